//! The smooth part `u₁ = w + g(x − at) + p(x + at)`.

pub(crate) mod ladder;
pub mod particular;

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::Partition;
use crate::numeric::quad::Quadrature;
use crate::problem::ProblemSpec;

use ladder::{Drive, Ladder};
pub use particular::{ParticularSolution, WJet};

/// A value with its first two derivatives. `d2` is NaN when not requested.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn zero() -> Self {
        Jet {
            value: 0.0,
            d1: 0.0,
            d2: 0.0,
        }
    }
}

/// Which piecewise function a segment belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    /// Function of `x − at`, bounded by left breaks.
    G,
    /// Function of `x + at`, bounded by right breaks.
    P,
}

/// Domain of one segment, `[lo, hi]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SegmentFunction {
    pub kind: SegmentKind,
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Measured discontinuity of a segment family at one break:
/// `(next segment − previous segment)` for value, `D` and `D²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BreakJump {
    pub kind: SegmentKind,
    /// Break index `k`: between segments `k` and `k + 1`.
    pub index: usize,
    pub z: f64,
    /// Boundary time of the break (`r_k` for `g`, `l_k` for `p`).
    pub t: f64,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

pub(crate) fn segment_list(ladder: &Ladder) -> Vec<SegmentFunction> {
    let mut out = Vec::new();
    for i in 0..ladder.g_count() {
        let (lo, hi) = ladder.g_domain(i);
        out.push(SegmentFunction {
            kind: SegmentKind::G,
            index: i,
            lo,
            hi,
        });
    }
    for j in 0..ladder.p_count() {
        let (lo, hi) = ladder.p_domain(j);
        out.push(SegmentFunction {
            kind: SegmentKind::P,
            index: j,
            lo,
            hi,
        });
    }
    out
}

/// Two-sided jumps of `g` and `p` at every break inside the horizon,
/// evaluated with each neighbour's own formula at the exact break.
pub(crate) fn measure_breaks(ladder: &Ladder) -> Result<Vec<BreakJump>> {
    let part = &ladder.part;
    let mut out = Vec::new();
    for k in 0..ladder.g_count().saturating_sub(1) {
        let t = part.r[k];
        if t > ladder.horizon {
            break;
        }
        let z = part.left_breaks[k];
        let before = if k == 0 {
            ladder.g_jet(0, z, 2)?
        } else {
            ladder.g_jet_at(k, t, 2)?
        };
        let after = ladder.g_jet_at(k + 1, t, 2)?;
        out.push(BreakJump {
            kind: SegmentKind::G,
            index: k,
            z,
            t,
            value: after.value - before.value,
            d1: after.d1 - before.d1,
            d2: after.d2 - before.d2,
        });
    }
    for k in 0..ladder.p_count().saturating_sub(1) {
        let t = part.lseq[k];
        if t > ladder.horizon {
            break;
        }
        let z = part.right_breaks[k];
        let before = ladder.p_jet(k, z, 2)?;
        let after = ladder.p_jet(k + 1, z, 2)?;
        out.push(BreakJump {
            kind: SegmentKind::P,
            index: k,
            z,
            t,
            value: after.value - before.value,
            d1: after.d1 - before.d1,
            d2: after.d2 - before.d2,
        });
    }
    Ok(out)
}

/// Piecewise `g⁽ⁱ⁾`, `p⁽ʲ⁾` of the smooth part together with `w`.
#[derive(Clone, Debug)]
pub struct SegmentTable {
    ladder: Ladder,
    w: ParticularSolution,
    c1: f64,
    breaks: Vec<BreakJump>,
}

impl SegmentTable {
    /// Builds all segments needed up to the horizon. `c1` is the free
    /// constant splitting the initial data between `g⁽⁰⁾` and `p⁽⁰⁾`; the
    /// solution does not depend on it.
    pub fn build(spec: &ProblemSpec, partition: Arc<Partition>, c1: f64) -> Result<Self> {
        let d = &spec.data;
        let tol = d.tolerances;
        let w = ParticularSolution::new(d.f.clone(), spec.boundary.clone(), tol.quadrature);
        let drive = Drive::Smooth {
            phi: d.phi.clone(),
            psi: d.psi.clone(),
            mu1: d.mu1.clone(),
            mu2: d.mu2.clone(),
            w: w.clone(),
            c1,
            quad: Quadrature::new(tol.quadrature),
        };
        let ladder = Ladder::build(spec.boundary.clone(), partition, d.b, drive, tol.ode)?;
        let breaks = measure_breaks(&ladder)?;
        Ok(SegmentTable { ladder, w, c1, breaks })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn particular(&self) -> &ParticularSolution {
        &self.w
    }

    pub fn g(&self, i: usize, z: f64, order: usize) -> Result<Jet> {
        self.ladder.g_jet(i, z, order)
    }

    pub fn p(&self, j: usize, z: f64, order: usize) -> Result<Jet> {
        self.ladder.p_jet(j, z, order)
    }

    /// `g⁽ⁱ⁾` at the left-band point whose characteristic meets the
    /// boundary at time `t` (`i ≥ 1`).
    pub fn g_at_time(&self, i: usize, t: f64, order: usize) -> Result<Jet> {
        self.ladder.g_jet_at(i, t, order)
    }

    pub fn segments(&self) -> Vec<SegmentFunction> {
        segment_list(&self.ladder)
    }

    pub fn g_count(&self) -> usize {
        self.ladder.g_count()
    }

    pub fn p_count(&self) -> usize {
        self.ladder.p_count()
    }

    pub fn breaks(&self) -> &[BreakJump] {
        &self.breaks
    }

    pub fn break_jump(&self, kind: SegmentKind, index: usize) -> Option<&BreakJump> {
        self.breaks.iter().find(|b| b.kind == kind && b.index == index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ProblemDefinition, ProblemSpec};

    fn table(def: &ProblemDefinition, c1: f64) -> (ProblemSpec, SegmentTable) {
        let spec = ProblemSpec::new(def).unwrap();
        let part = Arc::new(Partition::build(&spec.boundary, def.l, def.horizon).unwrap());
        let t = SegmentTable::build(&spec, part, c1).unwrap();
        (spec, t)
    }

    #[test]
    fn initial_segments() {
        let mut d = ProblemDefinition::zero(1.0, 1.0, 1.0, 1.0);
        d.phi = "x^2".into();
        let (_, t) = table(&d, 0.0);
        let g = t.g(0, 0.4, 2).unwrap();
        let p = t.p(0, 0.4, 2).unwrap();
        for j in [g, p] {
            assert!((j.value - 0.08).abs() < 1e-16);
            assert_eq!((j.d1, j.d2), (0.4, 1.0));
        }
        d.phi = "0".into();
        d.psi = "1".into();
        let (_, t) = table(&d, 0.0);
        assert!((t.g(0, 0.6, 1).unwrap().value + 0.3).abs() < 1e-15);
        assert!((t.p(0, 0.6, 1).unwrap().value - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero_segments() {
        let d = ProblemDefinition::zero(1.0, 1.0, 1.0, 2.5);
        let (_, t) = table(&d, 0.0);
        for s in t.segments() {
            let z = 0.5 * (s.lo + s.hi);
            let j = match s.kind {
                SegmentKind::G => t.g(s.index, z, 2).unwrap(),
                SegmentKind::P => t.p(s.index, z, 2).unwrap(),
            };
            assert_eq!((j.value, j.d1, j.d2), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn first_g_reflects_initial_p() {
        // γ = 0: g⁽¹⁾(z) = −p⁽⁰⁾(−z)
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.5);
        d.phi = "sin(x)".into();
        d.psi = "x".into();
        let (_, t) = table(&d, 0.0);
        for &z in &[-0.9, -0.5, -0.1] {
            let g = t.g(1, z, 2).unwrap();
            let p = t.p(0, -z, 2).unwrap();
            assert!((g.value + p.value).abs() < 1e-15);
            assert!((g.d1 - p.d1).abs() < 1e-15);
            assert!((g.d2 + p.d2).abs() < 1e-15);
        }
    }

    #[test]
    fn first_g_on_linear_boundary() {
        // γ = t/2: Φ₋(z) = −2z and γ₊(Φ₋(z)) = −3z
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.5);
        d.gamma = "t/2".into();
        d.phi = "x^3".into();
        let (_, t) = table(&d, 0.0);
        for &z in &[-0.3, -0.2, -0.05] {
            let g = t.g(1, z, 1).unwrap().value;
            let p = t.p(0, -3.0 * z, 1).unwrap().value;
            assert!((g + p).abs() < 1e-14, "{g} vs {p}");
        }
    }

    #[test]
    fn p_ode_homogeneous_decay() {
        // R ≡ 0 on the first right band when φ is linear and the rest vanishes:
        // R = −b φ'/2 per g⁽⁰⁾, so use b = 0 and a slope start instead
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.0);
        d.phi = "x".into();
        let (_, t) = table(&d, 0.0);
        // a² D²p = 0 with Dp(l) = 1/2
        let p = t.p(1, 1.7, 2).unwrap();
        assert!((p.d1 - 0.5).abs() < 1e-13);
        assert!((p.value - (0.5 + 0.5 * 0.7)).abs() < 1e-13);
        assert!(p.d2.abs() < 1e-13);
    }

    #[test]
    fn gauge_constant_cancels() {
        let mut d = ProblemDefinition::zero(1.3, 0.7, 1.0, 2.0);
        d.gamma = "0.2*sin(t)".into();
        d.phi = "cos(x)".into();
        d.psi = "x^2".into();
        d.mu1 = "1 + t".into();
        let (_, t0) = table(&d, 0.0);
        let (_, t1) = table(&d, 7.3);
        for &(i, z) in &[(1usize, -0.4), (2, -1.2)] {
            let (g0, g1) = (t0.g(i, z, 1).unwrap(), t1.g(i, z, 1).unwrap());
            assert!((g1.value - g0.value - 7.3).abs() < 1e-12);
        }
        for &(j, z) in &[(1usize, 1.8), (2, 2.5)] {
            let (p0, p1) = (t0.p(j, z, 1).unwrap(), t1.p(j, z, 1).unwrap());
            assert!((p0.value - p1.value - 7.3).abs() < 1e-12);
            assert!((p0.d1 - p1.d1).abs() < 1e-12);
        }
    }

    #[test]
    fn value_break_equals_corner_mismatch() {
        let mut d = ProblemDefinition::zero(1.0, 1.0, 1.0, 1.0);
        d.phi = "1 + x".into();
        d.mu1 = "0.25".into();
        let (spec, t) = table(&d, 0.0);
        let m = spec.matching().unwrap();
        let jump = t.break_jump(SegmentKind::G, 0).unwrap();
        assert!((jump.value - m.res25).abs() < 1e-15);
        // a right-end mismatch shows up in D²p at the first right break
        let jp = t.break_jump(SegmentKind::P, 0).unwrap();
        assert!((jp.d2 - m.res28).abs() < 1e-12);
    }
}
