//! Assembly of `u = w + g(x − at) + p(x + at) + g*(x − at) + p*(x + at)`.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BreakLine, Partition, RegionIndex};
use crate::jumps::{jump_constants, JumpTable};
use crate::problem::{MatchingReport, ProblemSpec};
use crate::waves::{Jet, SegmentTable, WJet};

/// Which adjacent region to use for a point lying on a break line.
/// `Plus` is the side of larger `x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// The band owning the point: the lower index.
    #[default]
    Auto,
    Minus,
    Plus,
}

/// Side choices for the two families of break lines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Sides {
    /// Lines `x − at = const`.
    pub left: Side,
    /// Lines `x + at = const`.
    pub right: Side,
}

impl Sides {
    pub const AUTO: Sides = Sides {
        left: Side::Auto,
        right: Side::Auto,
    };

    pub fn both(side: Side) -> Self {
        Sides { left: side, right: side }
    }
}

/// Which parts of the solution to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parts {
    #[default]
    All,
    /// `u₁` only.
    Smooth,
    /// `u₂` only.
    Jump,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Free constant of the initial split between `g⁽⁰⁾` and `p⁽⁰⁾`.
    pub c1: f64,
    /// Build the smooth part even when the matching conditions fail.
    pub force: bool,
    pub parts: Parts,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            c1: 0.0,
            force: false,
            parts: Parts::All,
        }
    }
}

/// `u` and its derivatives up to second order. Second derivatives are NaN
/// when only first order was requested.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldJet {
    pub u: f64,
    pub ut: f64,
    pub ux: f64,
    pub utt: f64,
    pub utx: f64,
    pub uxx: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    spec: ProblemSpec,
    partition: Arc<Partition>,
    matching: MatchingReport,
    smooth: Option<SegmentTable>,
    jump: Option<JumpTable>,
    options: SolveOptions,
}

impl Solution {
    pub fn build(spec: &ProblemSpec, options: SolveOptions) -> Result<Self> {
        let matching = spec.matching()?;
        let want_smooth = options.parts != Parts::Jump;
        if want_smooth && !matching.satisfied && !options.force {
            return Err(Error::MatchingFailed {
                max_residual: matching.max_abs(),
            });
        }
        let partition = Arc::new(Partition::build(&spec.boundary, spec.l(), spec.horizon())?);
        let smooth = if want_smooth {
            Some(SegmentTable::build(spec, partition.clone(), options.c1)?)
        } else {
            None
        };
        let jump = if options.parts != Parts::Smooth {
            let c = jump_constants(&spec.boundary, &partition, spec.v(), &spec.data.jumps)?;
            Some(JumpTable::build(spec, partition.clone(), c)?)
        } else {
            None
        };
        Ok(Solution {
            spec: spec.clone(),
            partition,
            matching,
            smooth,
            jump,
            options,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn matching(&self) -> &MatchingReport {
        &self.matching
    }

    pub fn options(&self) -> &SolveOptions {
        &self.options
    }

    pub fn smooth(&self) -> Option<&SegmentTable> {
        self.smooth.as_ref()
    }

    pub fn jumps(&self) -> Option<&JumpTable> {
        self.jump.as_ref()
    }

    pub fn break_lines(&self) -> Result<Vec<BreakLine>> {
        self.partition.break_lines(&self.spec.boundary)
    }

    /// Region of `(t, x)` after applying the side choice on break lines.
    pub fn region(&self, t: f64, x: f64, sides: Sides) -> Result<RegionIndex> {
        let mut r = self.partition.classify(&self.spec.boundary, t, x)?;
        if let (Some(k), Side::Minus) = (r.on_left, sides.left) {
            r.i = k + 1;
        }
        if let (Some(k), Side::Plus) = (r.on_right, sides.right) {
            r.j = k + 1;
        }
        Ok(r)
    }

    /// `(u, ∂ₜu, ∂ₓu)`.
    pub fn evaluate(&self, t: f64, x: f64, sides: Sides) -> Result<(f64, f64, f64)> {
        let j = self.jet(t, x, sides, 1, Parts::All)?;
        Ok((j.u, j.ut, j.ux))
    }

    /// All derivatives up to second order.
    pub fn evaluate_jet(&self, t: f64, x: f64, sides: Sides) -> Result<FieldJet> {
        self.jet(t, x, sides, 2, Parts::All)
    }

    /// Like [`Solution::evaluate_jet`] restricted to `u₁` or `u₂`; a part
    /// that was not built contributes zero.
    pub fn evaluate_part(&self, t: f64, x: f64, sides: Sides, parts: Parts) -> Result<FieldJet> {
        self.jet(t, x, sides, 2, parts)
    }

    fn jet(&self, t: f64, x: f64, sides: Sides, order: usize, parts: Parts) -> Result<FieldJet> {
        let a = self.spec.a();
        let r = self.region(t, x, sides)?;
        let (xi, eta) = (x - a * t, x + a * t);
        let mut g = Jet::zero();
        let mut p = Jet::zero();
        let mut w = WJet::default();
        let add = |acc: &mut Jet, s: Jet| {
            acc.value += s.value;
            acc.d1 += s.d1;
            acc.d2 += s.d2;
        };
        if let Some(s) = self.smooth.as_ref().filter(|_| parts != Parts::Jump) {
            add(&mut g, s.g(r.i, xi, order)?);
            add(&mut p, s.p(r.j, eta, order)?);
            let ws = s.particular();
            if !ws.is_zero() {
                w = if order >= 2 { ws.jet(t, x)? } else { first_only(ws.first(t, x)?) };
            }
        }
        if let Some(s) = self.jump.as_ref().filter(|_| parts != Parts::Smooth) {
            add(&mut g, s.g(r.i, xi, order)?);
            add(&mut p, s.p(r.j, eta, order)?);
        }
        let second = order >= 2;
        let nan_unless = |v: f64| if second { v } else { f64::NAN };
        Ok(FieldJet {
            u: w.w + g.value + p.value,
            ut: w.wt - a * g.d1 + a * p.d1,
            ux: w.wx + g.d1 + p.d1,
            utt: nan_unless(w.wtt + a * a * (g.d2 + p.d2)),
            utx: nan_unless(w.wtx + a * (p.d2 - g.d2)),
            uxx: nan_unless(w.wxx + g.d2 + p.d2),
        })
    }

    /// Smallest `γ(t)` on `[0, T]`, sampled.
    fn x_min(&self) -> Result<f64> {
        let bc = &self.spec.boundary;
        let n = 1024;
        let mut m = 0.0f64;
        for k in 0..=n {
            m = m.min(bc.gamma(self.spec.horizon() * k as f64 / n as f64)?);
        }
        Ok(m)
    }

    /// Uniform `nt × nx` sampling of `[0, T] × [min γ, l]`; points left of
    /// the boundary are masked.
    pub fn sample_grid(&self, nt: usize, nx: usize) -> Result<SolutionField> {
        if nt < 2 || nx < 2 {
            return Err(Error::InvalidParameter(format!("grid must be at least 2x2, got {nt}x{nx}")));
        }
        let horizon = self.spec.horizon();
        let (x0, x1) = (self.x_min()?, self.spec.l());
        let ts: Vec<f64> = (0..nt).map(|k| horizon * k as f64 / (nt - 1) as f64).collect();
        let xs: Vec<f64> = (0..nx).map(|k| x0 + (x1 - x0) * k as f64 / (nx - 1) as f64).collect();
        let rows = ts
            .par_iter()
            .map(|&t| {
                xs.iter()
                    .map(|&x| match self.region(t, x, Sides::AUTO) {
                        Err(Error::OutOfDomain { .. }) => Ok(FieldPoint::masked(t, x)),
                        Err(e) => Err(e),
                        Ok(r) => {
                            let (u, ut, ux) = self.evaluate(t, x, Sides::AUTO)?;
                            Ok(FieldPoint {
                                t,
                                x,
                                region: Some((r.i, r.j)),
                                u,
                                ut,
                                ux,
                            })
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SolutionField {
            t: ts,
            x: xs,
            points: rows.into_iter().flatten().collect(),
            lines: self.break_lines()?,
        })
    }
}

fn first_only((w, wt, wx): (f64, f64, f64)) -> WJet {
    WJet {
        w,
        wt,
        wx,
        wtt: f64::NAN,
        wtx: f64::NAN,
        wxx: f64::NAN,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldPoint {
    pub t: f64,
    pub x: f64,
    /// `None` for points outside the domain.
    pub region: Option<(usize, usize)>,
    pub u: f64,
    pub ut: f64,
    pub ux: f64,
}

impl FieldPoint {
    fn masked(t: f64, x: f64) -> Self {
        FieldPoint {
            t,
            x,
            region: None,
            u: f64::NAN,
            ut: f64::NAN,
            ux: f64::NAN,
        }
    }

    pub fn inside(&self) -> bool {
        self.region.is_some()
    }
}

/// Row-major samples (`t` outer, `x` inner) plus break polylines.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionField {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub points: Vec<FieldPoint>,
    pub lines: Vec<BreakLine>,
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

impl SolutionField {
    pub fn at(&self, it: usize, ix: usize) -> &FieldPoint {
        &self.points[it * self.x.len() + ix]
    }

    /// CSV with header `t,x,region_i,region_j,u,du_dt,du_dx`; masked points
    /// have empty cells. `comment` lines are written first, prefixed by `#`.
    pub fn write_csv<W: Write>(&self, mut out: W, comment: &[String]) -> std::io::Result<()> {
        for c in comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "t,x,region_i,region_j,u,du_dt,du_dx")?;
        for p in &self.points {
            let (ri, rj) = match p.region {
                Some((i, j)) => (i.to_string(), j.to_string()),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_f64(p.t),
                fmt_f64(p.x),
                ri,
                rj,
                fmt_f64(p.u),
                fmt_f64(p.ut),
                fmt_f64(p.ux)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemDefinition;

    fn solve(def: &ProblemDefinition) -> Solution {
        Solution::build(&ProblemSpec::new(def).unwrap(), SolveOptions::default()).unwrap()
    }

    #[test]
    fn zero_data_is_zero() {
        let s = solve(&ProblemDefinition::zero(1.0, 1.0, 1.0, 2.0));
        for &(t, x) in &[(0.0, 0.0), (0.5, 0.3), (1.7, 0.9), (2.0, 1.0)] {
            assert_eq!(s.evaluate(t, x, Sides::AUTO).unwrap(), (0.0, 0.0, 0.0));
        }
        let field = s.sample_grid(5, 4).unwrap();
        assert!(field.points.iter().all(|p| p.u == 0.0 && p.inside()));
    }

    #[test]
    fn quadratic_initial_data_in_the_first_region() {
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.0);
        d.phi = "x^2".into();
        d.mu1 = "t^2".into();
        d.mu2 = "2".into();
        let s = solve(&d);
        assert!(s.matching().satisfied);
        let (u, ut, ux) = s.evaluate(0.2, 0.5, Sides::AUTO).unwrap();
        assert!((u - 0.29).abs() < 1e-14);
        assert!((ut - 0.4).abs() < 1e-14 && (ux - 1.0).abs() < 1e-14);
    }

    #[test]
    fn refuses_failed_matching_unless_forced() {
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.0);
        d.phi = "1".into();
        let spec = ProblemSpec::new(&d).unwrap();
        let err = Solution::build(&spec, SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MatchingFailed { .. }));
        let opts = SolveOptions {
            force: true,
            ..SolveOptions::default()
        };
        assert!(Solution::build(&spec, opts).is_ok());
        let opts = SolveOptions {
            parts: Parts::Jump,
            ..SolveOptions::default()
        };
        assert!(Solution::build(&spec, opts).is_ok());
    }

    #[test]
    fn velocity_jump_across_the_impact_front() {
        let mut d = ProblemDefinition::zero(1.0, 1.0, 1.0, 0.9);
        d.v = 1.0;
        let s = solve(&d);
        let t = 0.4;
        let x = 1.0 - t;
        let minus = s.evaluate(t, x, Sides::both(Side::Minus)).unwrap();
        let plus = s.evaluate(t, x, Sides::both(Side::Plus)).unwrap();
        assert!((plus.1 - minus.1 - 1.0).abs() < 1e-12);
        assert!((plus.0 - minus.0).abs() < 1e-14);
        // off the line the side choice does nothing
        let a = s.evaluate(t, 0.3, Sides::both(Side::Minus)).unwrap();
        let b = s.evaluate(t, 0.3, Sides::both(Side::Plus)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_masks_points_left_of_the_boundary() {
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.0);
        d.gamma = "-t/2".into();
        let s = solve(&d);
        let field = s.sample_grid(2, 2).unwrap();
        assert_eq!(field.points.len(), 4);
        assert_eq!(field.x[0], -0.5);
        assert!(!field.at(0, 0).inside());
        assert!(field.at(1, 0).inside() && field.at(0, 1).inside() && field.at(1, 1).inside());
        let mut buf = Vec::new();
        field.write_csv(&mut buf, &["test".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[2], "0.0000000000000000e0,-5.0000000000000000e-1,,,,,");
    }
}
