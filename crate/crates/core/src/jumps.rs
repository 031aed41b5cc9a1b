//! The discontinuous part `u₂ = g*(x − at) + p*(x + at)` and the jump ladder.
//!
//! `u₂` has zero data everywhere; its only source is the slope kick
//! `C⁽ʲ⁻¹⁾ / a` added to `Dp*⁽ʲ⁾` at the start of every odd right band. The
//! result is continuous, and `∂ₜu₂` jumps by `C⁽ⁱ⁾` across the even right
//! break lines.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Partition};
use crate::problem::{JumpMode, ProblemSpec};
use crate::waves::ladder::{Drive, Ladder};
use crate::waves::{measure_breaks, segment_list, BreakJump, Jet, SegmentFunction, SegmentKind, SegmentTable};

/// `(a + γ'(r)) / (a − γ'(r))`: amplification of a velocity jump reflected
/// off the moving boundary at time `r`.
pub fn reflection_factor(bc: &BoundaryCurve, r: f64) -> Result<f64> {
    let a = bc.a();
    let s = bc.gamma1(r)?;
    if !(a - s > 0.0 && a + s > 0.0) {
        return Err(Error::SlopeViolation { t: r, slope: s, a });
    }
    Ok((a + s) / (a - s))
}

/// Amplitudes `C⁽ⁱ⁾` for `i < partition.len()`; odd entries are zero.
pub fn jump_constants(bc: &BoundaryCurve, partition: &Partition, v: f64, mode: &JumpMode) -> Result<Vec<f64>> {
    let n = partition.len();
    let mut c = vec![0.0; n];
    if matches!(mode, JumpMode::Zero) {
        return Ok(c);
    }
    let given: &[f64] = match mode {
        JumpMode::Explicit { amplitudes } => amplitudes,
        _ => &[],
    };
    for i in (0..n).step_by(2) {
        let k = i / 2;
        c[i] = match given.get(k) {
            Some(&x) => x,
            None if i == 0 => v,
            None => c[i - 2] * reflection_factor(bc, partition.r[i - 1])?,
        };
    }
    Ok(c)
}

/// Piecewise `g*`, `p*` of the jump part.
#[derive(Clone, Debug)]
pub struct JumpTable {
    ladder: Ladder,
    amplitudes: Vec<f64>,
    breaks: Vec<BreakJump>,
}

impl JumpTable {
    pub fn build(spec: &ProblemSpec, partition: Arc<Partition>, amplitudes: Vec<f64>) -> Result<Self> {
        let a = spec.a();
        let kicks = (0..partition.len())
            .map(|j| {
                if j % 2 == 1 {
                    amplitudes.get(j - 1).copied().unwrap_or(0.0) / a
                } else {
                    0.0
                }
            })
            .collect();
        let ladder = Ladder::build(
            spec.boundary.clone(),
            partition,
            spec.b(),
            Drive::Jump { kicks },
            spec.data.tolerances.ode,
        )?;
        let breaks = measure_breaks(&ladder)?;
        Ok(JumpTable {
            ladder,
            amplitudes,
            breaks,
        })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// `true` when every amplitude vanishes, so `u₂ ≡ 0`.
    pub fn is_zero(&self) -> bool {
        self.amplitudes.iter().all(|&c| c == 0.0)
    }

    pub fn g(&self, i: usize, z: f64, order: usize) -> Result<Jet> {
        if self.is_zero() {
            return Ok(Jet::zero());
        }
        self.ladder.g_jet(i, z, order)
    }

    pub fn p(&self, j: usize, z: f64, order: usize) -> Result<Jet> {
        if self.is_zero() {
            return Ok(Jet::zero());
        }
        self.ladder.p_jet(j, z, order)
    }

    pub fn segments(&self) -> Vec<SegmentFunction> {
        segment_list(&self.ladder)
    }

    pub fn breaks(&self) -> &[BreakJump] {
        &self.breaks
    }

    /// Jump of `∂ₜu₂` (larger-`x` side minus smaller-`x` side) that the
    /// construction prescribes on break line `index` of the given kind.
    pub fn expected_velocity_jump(&self, kind: SegmentKind, index: usize) -> Result<f64> {
        let c = |i: usize| self.amplitudes.get(i).copied().unwrap_or(0.0);
        Ok(match kind {
            SegmentKind::P if index % 2 == 0 => c(index),
            SegmentKind::G if index % 2 == 1 => {
                c(index - 1) * reflection_factor(&self.ladder.bc, self.ladder.part.r[index])?
            }
            _ => 0.0,
        })
    }
}

/// One predicted-versus-measured entry of the ladder report.
#[derive(Clone, Debug, Serialize)]
pub struct LadderEntry {
    pub name: String,
    pub kind: SegmentKind,
    pub index: usize,
    pub predicted: f64,
    pub measured: f64,
}

impl LadderEntry {
    pub fn abs_error(&self) -> f64 {
        (self.measured - self.predicted).abs()
    }

    pub fn rel_error(&self) -> f64 {
        self.abs_error() / self.predicted.abs().max(1e-300)
    }
}

/// Base values and recurrence links of the break discontinuities of the
/// smooth part.
#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    pub delta: [f64; 3],
    pub rho: [f64; 3],
    pub entries: Vec<LadderEntry>,
}

impl LadderReport {
    pub fn entry(&self, name: &str) -> Option<&LadderEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Compares every measured break jump of `table` with its closed-form
/// base value or with the recurrence from the preceding break.
pub fn discontinuity_ladder(spec: &ProblemSpec, table: &SegmentTable) -> Result<LadderReport> {
    let bc = &spec.boundary;
    let m = spec.matching()?;
    let a = spec.a();
    let b = spec.b();
    let s = a - bc.gamma1(0.0)?;
    let g2 = bc.gamma2(0.0)?;
    let delta = [
        m.res25,
        -m.res26 / s,
        (s * m.res27 + g2 * m.res26) / (s * s * s),
    ];
    let rho = [0.0, 0.0, m.res28 / (a * a)];
    let find = |kind, k| table.break_jump(kind, k).copied();
    let mut entries = Vec::new();
    let mut push = |name: String, kind, index, predicted, measured| {
        entries.push(LadderEntry {
            name,
            kind,
            index,
            predicted,
            measured,
        })
    };
    for jump in table.breaks() {
        let k = jump.index;
        match jump.kind {
            SegmentKind::G => {
                if k == 0 {
                    push("g0.value".into(), jump.kind, k, delta[0], jump.value);
                    push("g0.d1".into(), jump.kind, k, delta[1], jump.d1);
                    push("g0.d2".into(), jump.kind, k, delta[2], jump.d2);
                    continue;
                }
                let f = reflection_factor(bc, jump.t)?;
                let prev = match find(SegmentKind::P, k - 1) {
                    Some(p) => p,
                    None => continue,
                };
                push(format!("g{k}.value"), jump.kind, k, 0.0, jump.value);
                push(format!("g{k}.d1"), jump.kind, k, 0.0, jump.d1);
                push(format!("g{k}.d2"), jump.kind, k, -f * f * prev.d2, jump.d2);
            }
            SegmentKind::P => {
                push(format!("p{k}.value"), jump.kind, k, 0.0, jump.value);
                push(format!("p{k}.d1"), jump.kind, k, 0.0, jump.d1);
                if k == 0 {
                    push("p0.d2".into(), jump.kind, k, rho[2], jump.d2);
                    continue;
                }
                let prev = match find(SegmentKind::G, k - 1) {
                    Some(g) => g,
                    None => continue,
                };
                push(
                    format!("p{k}.d2"),
                    jump.kind,
                    k,
                    -prev.d2 - b / (a * a) * prev.d1,
                    jump.d2,
                );
            }
        }
    }
    Ok(LadderReport { delta, rho, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemDefinition;

    fn setup(def: &ProblemDefinition) -> (ProblemSpec, Arc<Partition>) {
        let spec = ProblemSpec::new(def).unwrap();
        let part = Arc::new(Partition::build(&spec.boundary, def.l, def.horizon).unwrap());
        (spec, part)
    }

    #[test]
    fn constant_amplitudes_on_fixed_boundary() {
        let (spec, part) = setup(&ProblemDefinition::zero(1.0, 1.0, 1.0, 6.0));
        let c = jump_constants(&spec.boundary, &part, 2.5, &JumpMode::Physical).unwrap();
        for (i, ci) in c.iter().enumerate() {
            assert_eq!(*ci, if i % 2 == 0 { 2.5 } else { 0.0 });
        }
        assert!(jump_constants(&spec.boundary, &part, 0.0, &JumpMode::Physical)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
        assert!(jump_constants(&spec.boundary, &part, 1.0, &JumpMode::Zero)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn one_reflection_triples_the_jump() {
        // γ = t/2 has γ' = 1/2 everywhere: factor (1 + 1/2) / (1 − 1/2) = 3
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.5);
        d.gamma = "t/2".into();
        let (spec, part) = setup(&d);
        let c = jump_constants(&spec.boundary, &part, 1.0, &JumpMode::Physical).unwrap();
        assert_eq!(c[2], 3.0);
    }

    #[test]
    fn explicit_list_is_continued_by_the_physical_rule() {
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 1.7);
        d.gamma = "t/2".into();
        let (spec, part) = setup(&d);
        let mode = JumpMode::Explicit { amplitudes: vec![2.0] };
        let c = jump_constants(&spec.boundary, &part, 1.0, &mode).unwrap();
        assert_eq!((c[0], c[2]), (2.0, 6.0));
    }

    #[test]
    fn hand_integrated_segments() {
        // γ ≡ 0, b = 0, a = l = v = 1
        let mut d = ProblemDefinition::zero(1.0, 0.0, 1.0, 3.5);
        d.v = 1.0;
        let (spec, part) = setup(&d);
        let c = jump_constants(&spec.boundary, &part, 1.0, &JumpMode::Physical).unwrap();
        let jt = JumpTable::build(&spec, part, c).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() < 1e-12;
        for &z in &[1.2, 1.9] {
            assert!(close(jt.p(1, z, 1).unwrap().value, z - 1.0));
        }
        for &z in &[-0.7, -0.2] {
            assert!(close(jt.g(2, z - 1.0, 1).unwrap().value, z));
        }
        assert!(close(jt.p(2, 2.5, 1).unwrap().value, 1.5));
        assert!(close(jt.p(3, 3.5, 1).unwrap().value, 2.0 + 2.0 * 0.5));
    }

    #[test]
    fn base_second_jump_on_a_curved_boundary() {
        // γ''(0) ≠ 0 and both res26 and res27 nonzero
        let mut d = ProblemDefinition::zero(1.5, 0.7, 1.0, 1.5);
        d.gamma = "0.2*sin(t) + 0.15*t^2".into();
        d.phi = "sin(x)".into();
        d.mu1 = "0.3*t + 0.5*t^2".into();
        let spec = ProblemSpec::new(&d).unwrap();
        let part = Arc::new(Partition::build(&spec.boundary, 1.0, 1.5).unwrap());
        let table = SegmentTable::build(&spec, part, 0.0).unwrap();
        let report = discontinuity_ladder(&spec, &table).unwrap();
        for name in ["g0.value", "g0.d1", "g0.d2", "p0.d2"] {
            let e = report.entry(name).unwrap();
            assert!(e.abs_error() <= 1e-12 * e.predicted.abs().max(1.0), "{name}: {e:?}");
        }
        assert!(report.delta[2].abs() > 0.1);
    }

    #[test]
    fn zero_velocity_gives_zero_part() {
        let (spec, part) = setup(&ProblemDefinition::zero(1.0, 1.0, 1.0, 2.0));
        let jt = JumpTable::build(&spec, part, vec![0.0; 3]).unwrap();
        assert!(jt.is_zero());
        assert_eq!(jt.p(1, 1.5, 2).unwrap(), Jet::zero());
    }
}
