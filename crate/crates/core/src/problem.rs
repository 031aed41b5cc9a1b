//! Problem data, corner matching conditions and the rod-parameter mapping.
//!
//! The unknown `u(t, x)` satisfies `u_tt = a² u_xx + f` in
//! `{t > 0, γ(t) < x < l}` with `u = φ`, `u_t = ψ` (plus a velocity jump `v`
//! at `x = l`) at `t = 0`, `u(t, γ(t)) = μ₁(t)` and
//! `u_tt(t, l) + b u_x(t, l) = μ₂(t)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Smooth1, Source};
use crate::geometry::{BoundaryCurve, BoundaryScan};

/// Numerical tolerances. All are absolute unless noted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Residual bound for characteristic inversion.
    pub root: f64,
    pub quadrature: f64,
    /// Relative and absolute ODE tolerance.
    pub ode: f64,
    pub matching: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root: 1e-12,
            quadrature: 1e-13,
            ode: 1e-13,
            matching: 1e-9,
        }
    }
}

/// How the shock amplitudes `C⁽ⁱ⁾` (even `i`) are chosen.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum JumpMode {
    /// Amplitudes follow the reflection law off the moving boundary.
    #[default]
    Physical,
    /// Every amplitude is zero, including the initial one.
    Zero,
    /// `amplitudes[k]` is `C⁽²ᵏ⁾`; entries past the list follow the physical rule.
    Explicit { amplitudes: Vec<f64> },
}

fn zero_text() -> String {
    "0".into()
}

/// Textual problem description, as read from a configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDefinition {
    pub a: f64,
    pub b: f64,
    pub l: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default = "zero_text")]
    pub gamma: String,
    #[serde(default = "zero_text")]
    pub phi: String,
    #[serde(default = "zero_text")]
    pub psi: String,
    #[serde(default = "zero_text")]
    pub mu1: String,
    #[serde(default = "zero_text")]
    pub mu2: String,
    #[serde(default = "zero_text")]
    pub f: String,
    pub horizon: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub jumps: JumpMode,
}

impl ProblemDefinition {
    /// All-zero data with the given coefficients.
    pub fn zero(a: f64, b: f64, l: f64, horizon: f64) -> Self {
        ProblemDefinition {
            a,
            b,
            l,
            v: 0.0,
            gamma: zero_text(),
            phi: zero_text(),
            psi: zero_text(),
            mu1: zero_text(),
            mu2: zero_text(),
            f: zero_text(),
            horizon,
            tolerances: Tolerances::default(),
            jumps: JumpMode::Physical,
        }
    }
}

/// `(a, b) = (√(E/ρ), S E / M)` for a rod of Young modulus `E`, density `ρ`
/// and cross-section `S` struck by a load of mass `M`.
pub fn from_physical(e: f64, rho: f64, s: f64, m: f64) -> Result<(f64, f64)> {
    for (name, value) in [("E", e), ("rho", rho), ("S", s), ("M", m)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
        }
    }
    Ok(((e / rho).sqrt(), s * e / m))
}

/// Parsed data functions, before any geometric validation.
#[derive(Clone, Debug)]
pub struct ProblemData {
    pub a: f64,
    pub b: f64,
    pub l: f64,
    pub v: f64,
    pub gamma: Smooth1,
    pub phi: Smooth1,
    pub psi: Smooth1,
    pub mu1: Smooth1,
    pub mu2: Smooth1,
    pub f: Source,
    pub horizon: f64,
    pub tolerances: Tolerances,
    pub jumps: JumpMode,
}

fn parse1(slot: &'static str, text: &str, var: &str) -> Result<Smooth1> {
    Smooth1::parse(text, var).map_err(|source| Error::Parse { slot, source })
}

impl ProblemData {
    pub fn parse(def: &ProblemDefinition) -> Result<Self> {
        Ok(ProblemData {
            a: def.a,
            b: def.b,
            l: def.l,
            v: def.v,
            gamma: parse1("gamma", &def.gamma, "t")?,
            phi: parse1("phi", &def.phi, "x")?,
            psi: parse1("psi", &def.psi, "x")?,
            mu1: parse1("mu1", &def.mu1, "t")?,
            mu2: parse1("mu2", &def.mu2, "t")?,
            f: Source::parse(&def.f).map_err(|source| Error::Parse { slot: "f", source })?,
            horizon: def.horizon,
            tolerances: def.tolerances,
            jumps: def.jumps.clone(),
        })
    }

    fn check_scalars(&self) -> Result<()> {
        let finite = [self.a, self.b, self.l, self.v, self.horizon].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {}", self.a)));
        }
        if !(self.l > 0.0) {
            return Err(Error::InvalidParameter(format!("l must be positive, got {}", self.l)));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {}", self.horizon)));
        }
        let t = &self.tolerances;
        if ![t.root, t.quadrature, t.ode, t.matching].iter().all(|x| *x > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Fully validated problem: data plus the boundary curve checked on `[0, T]`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub data: ProblemData,
    pub boundary: Arc<BoundaryCurve>,
}

impl ProblemSpec {
    pub fn new(def: &ProblemDefinition) -> Result<Self> {
        Self::from_data(ProblemData::parse(def)?)
    }

    pub fn from_data(data: ProblemData) -> Result<Self> {
        data.check_scalars()?;
        let boundary = Arc::new(BoundaryCurve::from_smooth(
            data.gamma.clone(),
            data.a,
            data.l,
            data.tolerances.root,
            data.horizon,
        )?);
        Ok(ProblemSpec { data, boundary })
    }

    pub fn a(&self) -> f64 {
        self.data.a
    }

    pub fn b(&self) -> f64 {
        self.data.b
    }

    pub fn l(&self) -> f64 {
        self.data.l
    }

    pub fn v(&self) -> f64 {
        self.data.v
    }

    pub fn horizon(&self) -> f64 {
        self.data.horizon
    }

    pub fn matching(&self) -> Result<MatchingReport> {
        matching_residuals(&self.data)
    }
}

/// Corner compatibility residuals. All four vanish iff the smooth part
/// is twice continuously differentiable across every break line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MatchingReport {
    /// `μ₁(0) − φ(0)`
    pub res25: f64,
    /// `μ₁'(0) − ψ(0) − γ'(0) φ'(0)`
    pub res26: f64,
    /// `μ₁''(0) − (a² + γ'(0)²) φ''(0) − f(0,0) − 2γ'(0) ψ'(0) − γ''(0) φ'(0)`
    pub res27: f64,
    /// `μ₂(0) − f(0,l) − b φ'(l) − a² φ''(l)`
    pub res28: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

impl MatchingReport {
    pub fn max_abs(&self) -> f64 {
        [self.res25, self.res26, self.res27, self.res28]
            .iter()
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Evaluates the four corner conditions symbolically.
pub fn matching_residuals(d: &ProblemData) -> Result<MatchingReport> {
    let (a, b, l) = (d.a, d.b, d.l);
    let g1 = d.gamma.d1(0.0)?;
    let g2 = d.gamma.d2(0.0)?;
    let res25 = d.mu1.value(0.0)? - d.phi.value(0.0)?;
    let res26 = d.mu1.d1(0.0)? - d.psi.value(0.0)? - g1 * d.phi.d1(0.0)?;
    let res27 = d.mu1.d2(0.0)?
        - (a * a + g1 * g1) * d.phi.d2(0.0)?
        - d.f.value(0.0, 0.0)?
        - 2.0 * g1 * d.psi.d1(0.0)?
        - g2 * d.phi.d1(0.0)?;
    let res28 = d.mu2.value(0.0)? - d.f.value(0.0, l)? - b * d.phi.d1(l)? - a * a * d.phi.d2(l)?;
    let tolerance = d.tolerances.matching;
    let mut report = MatchingReport {
        res25,
        res26,
        res27,
        res28,
        tolerance,
        satisfied: false,
    };
    report.satisfied = report.max_abs() <= tolerance;
    Ok(report)
}

/// One line of a [`ValidationReport`].
#[derive(Clone, Debug, Serialize)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Aggregated pre-solve checks.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
    pub boundary: Option<BoundaryScan>,
    pub matching: Option<MatchingReport>,
    /// Which finite-horizon checks stand in for conditions on all `t ≥ 0`.
    pub horizon_note: String,
    pub passed: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `true` when everything except the matching conditions passed.
    pub fn geometry_ok(&self) -> bool {
        self.checks.iter().filter(|c| c.name != "matching").all(|c| c.passed)
    }
}

/// Runs every pre-solve check. Only malformed expressions are errors;
/// everything else is recorded in the report.
pub fn validate_problem(def: &ProblemDefinition) -> Result<ValidationReport> {
    let data = ProblemData::parse(def)?;
    let mut checks = Vec::new();
    let scalars = data.check_scalars();
    checks.push(ValidationCheck {
        name: "parameters",
        passed: scalars.is_ok(),
        detail: match &scalars {
            Ok(()) => format!("a = {}, b = {}, l = {}, T = {}", data.a, data.b, data.l, data.horizon),
            Err(e) => e.to_string(),
        },
    });
    let mut boundary = None;
    let mut matching = None;
    let mut horizon_note = String::new();
    if scalars.is_ok() {
        let scan = BoundaryScan::run(&data.gamma, data.a, data.l, data.horizon);
        match scan {
            Ok(scan) => {
                checks.push(ValidationCheck {
                    name: "boundary_origin",
                    passed: scan.gamma0.abs() <= 1e-12,
                    detail: format!("gamma(0) = {}", scan.gamma0),
                });
                checks.push(ValidationCheck {
                    name: "boundary_slope",
                    passed: scan.slope_violation.is_none(),
                    detail: match scan.slope_violation {
                        None => format!(
                            "max |gamma'| / a = {} at t = {}",
                            scan.max_slope / data.a,
                            scan.max_slope_at
                        ),
                        Some((t, s)) => format!("gamma'({t}) = {s} outside (-{a}, {a})", a = data.a),
                    },
                });
                checks.push(ValidationCheck {
                    name: "boundary_intersection",
                    passed: scan.intersection.is_none(),
                    detail: match scan.intersection {
                        None => format!("gamma(t) < l = {} on the sampled horizon", data.l),
                        Some((t, g)) => format!("gamma({t}) = {g} >= l = {}", data.l),
                    },
                });
                horizon_note = format!(
                    "|gamma'| < a and gamma < l were checked on {} uniform samples of [0, {}]; \
                     the limits of gamma(t) +- a t as t -> infinity are not checked",
                    scan.samples, data.horizon
                );
                boundary = Some(scan);
            }
            Err(e) => checks.push(ValidationCheck {
                name: "boundary_eval",
                passed: false,
                detail: e.to_string(),
            }),
        }
        match matching_residuals(&data) {
            Ok(m) => {
                checks.push(ValidationCheck {
                    name: "matching",
                    passed: m.satisfied,
                    detail: format!(
                        "residuals ({:e}, {:e}, {:e}, {:e}), tolerance {:e}",
                        m.res25, m.res26, m.res27, m.res28, m.tolerance
                    ),
                });
                matching = Some(m);
            }
            Err(e) => checks.push(ValidationCheck {
                name: "matching",
                passed: false,
                detail: e.to_string(),
            }),
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        checks,
        boundary,
        matching,
        horizon_note,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn def() -> ProblemDefinition {
        ProblemDefinition::zero(1.0, 1.0, 1.0, 1.0)
    }

    fn matching(d: &ProblemDefinition) -> MatchingReport {
        matching_residuals(&ProblemData::parse(d).unwrap()).unwrap()
    }

    #[test]
    fn physical_mapping() {
        assert_eq!(from_physical(1.0, 1.0, 1.0, 1.0).unwrap(), (1.0, 1.0));
        assert_eq!(from_physical(4.0, 1.0, 1.0, 2.0).unwrap(), (2.0, 2.0));
        assert!(from_physical(0.0, 1.0, 1.0, 1.0).is_err());
        let (e, rho, s, m) = (2.1e11, 7850.0, 3e-4, 12.5);
        let (a, b) = from_physical(e, rho, s, m).unwrap();
        assert!((a * a * rho - e).abs() <= 1e-15 * e);
        assert!((b * m - s * e).abs() <= 1e-15 * s * e);
    }

    #[test]
    fn zero_data_matches() {
        let m = matching(&def());
        assert_eq!(m.max_abs(), 0.0);
        assert!(m.satisfied);
    }

    #[test]
    fn value_mismatch_at_corner() {
        let mut d = def();
        d.phi = "1".into();
        let m = matching(&d);
        assert_eq!(m.res25, -1.0);
        assert!(!m.satisfied);
    }

    #[test]
    fn slope_and_right_end_conditions() {
        let mut d = def();
        d.b = 2.0;
        d.phi = "x".into();
        d.mu2 = "2".into();
        d.mu1 = "t".into();
        let m = matching(&d);
        assert_eq!(m.res26, 1.0);
        assert_eq!(m.res28, 0.0);
    }

    #[test]
    fn quadratic_profile_residuals() {
        let mut d = def();
        d.phi = "x^2".into();
        let m = matching(&d);
        assert_eq!(m.res27, -2.0);
        // b φ'(l) + a² φ''(l) = 2 + 2
        assert_eq!(m.res28, -4.0);
    }

    #[test]
    fn moving_boundary_enters_slope_condition() {
        let mut d = def();
        d.gamma = "t/4".into();
        d.phi = "x".into();
        d.mu1 = "0.25*t".into();
        // u = x is compatible: u(t, t/4) = t/4
        let m = matching(&d);
        assert_eq!(m.res26, 0.0);
    }

    #[test]
    fn validation_records_failures() {
        assert!(validate_problem(&def()).unwrap().passed);
        let mut d = def();
        d.gamma = "2*t".into();
        let r = validate_problem(&d).unwrap();
        assert!(!r.check("boundary_slope").unwrap().passed);
        d.gamma = "1".into();
        let r = validate_problem(&d).unwrap();
        assert!(!r.check("boundary_intersection").unwrap().passed);
        d.gamma = "sin(".into();
        assert!(matches!(validate_problem(&d), Err(Error::Parse { slot: "gamma", .. })));
    }

    #[test]
    fn definition_round_trips_through_json() {
        let mut d = def();
        d.jumps = JumpMode::Explicit {
            amplitudes: vec![1.0, 2.0],
        };
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<ProblemDefinition>(&text).unwrap(), d);
        let minimal: ProblemDefinition =
            serde_json::from_str(r#"{"a": 1, "b": 0, "l": 1, "horizon": 1}"#).unwrap();
        assert_eq!(minimal.jumps, JumpMode::Physical);
        assert_eq!(minimal.f, "0");
    }
}
