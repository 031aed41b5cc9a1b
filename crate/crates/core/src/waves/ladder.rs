//! Segment recursion shared by the smooth part and the jump part.
//!
//! `g⁽ⁱ⁾` (argument `x − at`) and `p⁽ʲ⁾` (argument `x + at`) are built band by
//! band. A `g` segment is defined through the Dirichlet condition on
//! `x = γ(t)` and is evaluated on demand; a `p` segment solves
//! `a² D²p + b Dp = R(z)` from the condition at `x = l` and is stored as
//! a dense ODE solution.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Smooth1;
use crate::geometry::{BoundaryCurve, Family, Partition};
use crate::numeric::ode::{solve_dense, DenseSolution, OdeOptions};
use crate::numeric::quad::Quadrature;

use super::particular::ParticularSolution;
use super::Jet;

/// Data that distinguishes the two parts.
#[derive(Clone, Debug)]
pub(crate) enum Drive {
    Smooth {
        phi: Smooth1,
        psi: Smooth1,
        mu1: Smooth1,
        mu2: Smooth1,
        w: ParticularSolution,
        c1: f64,
        quad: Quadrature,
    },
    /// Homogeneous data; `kicks[j]` is added to `Dp⁽ʲ⁾` at its left end.
    Jump { kicks: Vec<f64> },
}

#[derive(Clone, Debug)]
struct PSegment {
    lo: f64,
    hi: f64,
    start: f64,
    sol: DenseSolution<2>,
}

#[derive(Clone, Debug)]
pub(crate) struct Ladder {
    pub bc: Arc<BoundaryCurve>,
    pub part: Arc<Partition>,
    pub a: f64,
    pub b: f64,
    pub l: f64,
    pub horizon: f64,
    drive: Drive,
    // p[0] is the closed-form initial segment
    p: Vec<Option<PSegment>>,
    g_count: usize,
}

impl Ladder {
    pub fn build(
        bc: Arc<BoundaryCurve>,
        part: Arc<Partition>,
        b: f64,
        drive: Drive,
        ode_tol: f64,
    ) -> Result<Self> {
        let a = bc.a();
        let l = part.l;
        let horizon = part.horizon;
        let n = part.len();
        // g⁽ⁱ⁾ is needed while its band starts before the horizon
        let g_count = (1..n).find(|&i| part.r[i] >= horizon).map_or(n, |i| i + 1);
        let mut ladder = Ladder {
            bc,
            part,
            a,
            b,
            l,
            horizon,
            drive,
            p: vec![None],
            g_count,
        };
        let opts = OdeOptions::with_tolerance(ode_tol);
        let z_max = l + a * horizon;
        for j in 1..n {
            if ladder.part.lseq[j - 1] >= horizon {
                break;
            }
            let lo = ladder.part.right_breaks[j - 1];
            let hi = ladder.part.right_breaks[j].min(z_max);
            let prev = ladder.p_jet(j - 1, lo, 1)?;
            let kick = match &ladder.drive {
                Drive::Jump { kicks } => kicks.get(j).copied().unwrap_or(0.0),
                Drive::Smooth { .. } => 0.0,
            };
            let (a2, bb) = (a * a, b);
            let this = &ladder;
            let sol = solve_dense(
                |z, y: &[f64; 2]| {
                    let r = this.rhs(j, z)?;
                    Ok([y[1], (r - bb * y[1]) / a2])
                },
                lo,
                [0.0, prev.d1 + kick],
                hi,
                &opts,
            )
            .map_err(|e| match e {
                Error::Ode { z, detail } => Error::Ode {
                    z,
                    detail: format!("segment p{j}: {detail}"),
                },
                other => other,
            })?;
            ladder.p.push(Some(PSegment {
                lo,
                hi,
                start: prev.value,
                sol,
            }));
        }
        Ok(ladder)
    }

    pub fn g_count(&self) -> usize {
        self.g_count
    }

    pub fn p_count(&self) -> usize {
        self.p.len()
    }

    /// Domain of `g⁽ⁱ⁾`, clipped to the horizon.
    pub fn g_domain(&self, i: usize) -> (f64, f64) {
        if i == 0 {
            return (0.0, self.l);
        }
        let lb = &self.part.left_breaks;
        let floor = self.bc.gamma_minus(self.horizon).unwrap_or(lb[i]);
        (lb[i].max(floor), lb[i - 1])
    }

    pub fn p_domain(&self, j: usize) -> (f64, f64) {
        match &self.p[j] {
            None => (0.0, self.l),
            Some(s) => (s.lo, s.hi),
        }
    }

    fn check(&self, family: Family, index: usize, z: f64) -> Result<()> {
        let (count, (lo, hi)) = match family {
            Family::Minus => (self.g_count, if index < self.g_count { self.g_domain(index) } else { (0.0, 0.0) }),
            Family::Plus => (self.p.len(), if index < self.p.len() { self.p_domain(index) } else { (0.0, 0.0) }),
        };
        let snap = 1e-9 * (1.0 + z.abs());
        if index >= count || z < lo - snap || z > hi + snap {
            return Err(Error::SegmentDomain { index, z, lo, hi });
        }
        Ok(())
    }

    fn antiderivative_psi(psi: &Smooth1, quad: &Quadrature, z: f64) -> Result<f64> {
        if psi.is_zero() {
            return Ok(0.0);
        }
        quad.integrate(|s| Ok(psi.value(s)?), 0.0, z)
    }

    /// `φ/2 ± Ψ/(2a) ∓ C₁` for the initial segments; `sign = +1` gives `p⁽⁰⁾`.
    fn initial(&self, z: f64, sign: f64, order: usize) -> Result<Jet> {
        match &self.drive {
            Drive::Jump { .. } => Ok(Jet::zero()),
            Drive::Smooth { phi, psi, c1, quad, .. } => {
                let a2 = 2.0 * self.a;
                let big_psi = Self::antiderivative_psi(psi, quad, z)?;
                Ok(Jet {
                    value: 0.5 * phi.value(z)? + sign * big_psi / a2 - sign * c1,
                    d1: 0.5 * phi.d1(z)? + sign * psi.value(z)? / a2,
                    d2: if order >= 2 {
                        0.5 * phi.d2(z)? + sign * psi.d1(z)? / a2
                    } else {
                        f64::NAN
                    },
                })
            }
        }
    }

    pub fn p_jet(&self, j: usize, z: f64, order: usize) -> Result<Jet> {
        self.check(Family::Plus, j, z)?;
        let seg = match &self.p[j] {
            None => return self.initial(z, 1.0, order),
            Some(s) => s,
        };
        let [y, q] = seg.sol.eval(z);
        let d2 = if order >= 2 {
            (self.rhs(j, z)? - self.b * q) / (self.a * self.a)
        } else {
            f64::NAN
        };
        Ok(Jet {
            value: seg.start + y,
            d1: q,
            d2,
        })
    }

    pub fn g_jet(&self, i: usize, z: f64, order: usize) -> Result<Jet> {
        self.check(Family::Minus, i, z)?;
        if i == 0 {
            return self.initial(z, -1.0, order);
        }
        let t = self.bc.invert(Family::Minus, z.min(0.0))?;
        self.g_jet_at(i, t, order)
    }

    /// `g⁽ⁱ⁾(γ₋(t))`, `i ≥ 1`, parametrised by the boundary time.
    pub fn g_jet_at(&self, i: usize, t: f64, order: usize) -> Result<Jet> {
        let a = self.a;
        let g1 = self.bc.gamma1(t)?;
        let big_p = self.p_jet(i - 1, self.bc.gamma_plus(t)?, order)?;
        let (m, w) = match &self.drive {
            Drive::Smooth { mu1, w, .. } => {
                let m = Jet {
                    value: mu1.value(t)?,
                    d1: mu1.d1(t)?,
                    d2: if order >= 2 { mu1.d2(t)? } else { f64::NAN },
                };
                (m, w.boundary_trace(t, order)?)
            }
            Drive::Jump { .. } => (Jet::zero(), Jet::zero()),
        };
        let big_g = m.value - big_p.value - w.value;
        let big_g1 = m.d1 - big_p.d1 * (a + g1) - w.d1;
        let inv1 = 1.0 / (g1 - a);
        let d2 = if order >= 2 {
            let g2 = self.bc.gamma2(t)?;
            let big_g2 = m.d2 - big_p.d2 * (a + g1) * (a + g1) - big_p.d1 * g2 - w.d2;
            let inv2 = -g2 * inv1 * inv1 * inv1;
            big_g2 * inv1 * inv1 + big_g1 * inv2
        } else {
            f64::NAN
        };
        Ok(Jet {
            value: big_g,
            d1: big_g1 * inv1,
            d2,
        })
    }

    /// Right-hand side `R(z)` of the ODE for `p⁽ʲ⁾`.
    pub fn rhs(&self, j: usize, z: f64) -> Result<f64> {
        let a = self.a;
        let g = self.g_jet(j - 1, 2.0 * self.l - z, 2)?;
        let mut r = -a * a * g.d2 - self.b * g.d1;
        if let Drive::Smooth { mu2, w, .. } = &self.drive {
            let tau = ((z - self.l) / a).max(0.0);
            let (wx, wtt) = w.right_trace(tau)?;
            r += mu2.value(tau)? - self.b * wx - wtt;
        }
        Ok(r)
    }
}
