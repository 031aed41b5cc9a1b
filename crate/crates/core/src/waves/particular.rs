//! Duhamel particular solution `w` with zero initial data.
//!
//! `w(t, x) = (2a)⁻¹ ∫₀ᵗ ∫_{x−a(t−s)}^{x+a(t−s)} f̃(s, ξ) dξ ds`, where `f̃`
//! continues `f` linearly (value and slope) beyond `[γ(s), l]`. The
//! derivatives come from differentiating under the integral sign, so each
//! needs only the outer integral.

use std::sync::Arc;

use crate::error::Result;
use crate::expr::Source;
use crate::geometry::{BoundaryCurve, Family};
use crate::numeric::quad::Quadrature;

use super::Jet;

/// `w` and its derivatives up to second order at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WJet {
    pub w: f64,
    pub wt: f64,
    pub wx: f64,
    pub wtt: f64,
    pub wtx: f64,
    pub wxx: f64,
}

#[derive(Clone, Debug)]
pub struct ParticularSolution {
    f: Source,
    bc: Arc<BoundaryCurve>,
    quad: Quadrature,
    zero: bool,
}

impl ParticularSolution {
    pub fn new(f: Source, bc: Arc<BoundaryCurve>, tol: f64) -> Self {
        let zero = f.is_zero();
        ParticularSolution {
            f,
            bc,
            quad: Quadrature::new(tol),
            zero,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn source(&self) -> &Source {
        &self.f
    }

    /// `(f̃, ∂ₓf̃)` at `(s, xi)`.
    pub fn extended(&self, s: f64, xi: f64) -> Result<(f64, f64)> {
        let l = self.bc.l();
        let lo = self.bc.gamma(s)?;
        let edge = if xi > l {
            l
        } else if xi < lo {
            lo
        } else {
            return Ok((self.f.value(s, xi)?, self.f.dx(s, xi)?));
        };
        let v = self.f.value(s, edge)?;
        let d = self.f.dx(s, edge)?;
        Ok((v + d * (xi - edge), d))
    }

    /// Interior points of `(0, t)` where the cone edges leave the strip.
    fn splits(&self, t: f64, x: f64) -> Result<Vec<f64>> {
        let a = self.bc.a();
        let mut pts = vec![0.0];
        let s1 = t - (self.bc.l() - x) / a;
        let xi = x - a * t;
        let s2 = if xi < 0.0 {
            self.bc.invert(Family::Minus, xi)?
        } else {
            0.0
        };
        let mut inner: Vec<f64> = [s1, s2].into_iter().filter(|&s| s > 0.0 && s < t).collect();
        inner.sort_by(f64::total_cmp);
        pts.extend(inner);
        pts.push(t);
        Ok(pts)
    }

    /// Outer integrals `∫₀ᵗ [f̃(β) ± f̃(α)]` and `∫₀ᵗ [f̃ₓ(β) ± f̃ₓ(α)]`
    /// with `α, β = x ∓ a(t − s)`.
    fn edge_integrals(&self, t: f64, x: f64) -> Result<[f64; 4]> {
        let a = self.bc.a();
        let pts = self.splits(t, x)?;
        let mut acc = [0.0; 4];
        for w in pts.windows(2) {
            let part = self.quad.integrate_vec(
                |s| {
                    let (fb, db) = self.extended(s, x + a * (t - s))?;
                    let (fa, da) = self.extended(s, x - a * (t - s))?;
                    Ok([fb + fa, fb - fa, db + da, db - da])
                },
                w[0],
                w[1],
            )?;
            for k in 0..4 {
                acc[k] += part[k];
            }
        }
        Ok(acc)
    }

    /// `∫_α^β f̃(s, ξ) dξ`, with the linear continuations integrated exactly.
    fn cone_slice(&self, s: f64, alpha: f64, beta: f64) -> Result<f64> {
        let l = self.bc.l();
        let lo = self.bc.gamma(s)?;
        let mut total = 0.0;
        let linear = |edge: f64, from: f64, to: f64| -> Result<f64> {
            let v = self.f.value(s, edge)?;
            let d = self.f.dx(s, edge)?;
            Ok(v * (to - from) + 0.5 * d * ((to - edge).powi(2) - (from - edge).powi(2)))
        };
        if alpha < lo {
            total += linear(lo, alpha, beta.min(lo))?;
        }
        let (p, q) = (alpha.max(lo), beta.min(l));
        if q > p {
            total += self.quad.integrate(|xi| Ok(self.f.value(s, xi)?), p, q)?;
        }
        if beta > l {
            total += linear(l, alpha.max(l), beta)?;
        }
        Ok(total)
    }

    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        if self.zero || t <= 0.0 {
            return Ok(0.0);
        }
        let a = self.bc.a();
        let pts = self.splits(t, x)?;
        let mut total = 0.0;
        for w in pts.windows(2) {
            total += self
                .quad
                .integrate(|s| self.cone_slice(s, x - a * (t - s), x + a * (t - s)), w[0], w[1])?;
        }
        Ok(total / (2.0 * a))
    }

    /// All derivatives except `w` itself (which is left at zero).
    pub fn derivatives(&self, t: f64, x: f64) -> Result<WJet> {
        if self.zero {
            return Ok(WJet::default());
        }
        let f = self.f.value(t, x)?;
        if t <= 0.0 {
            return Ok(WJet {
                wtt: f,
                ..WJet::default()
            });
        }
        let a = self.bc.a();
        let [sp, sm, dp, dm] = self.edge_integrals(t, x)?;
        Ok(WJet {
            w: 0.0,
            wt: 0.5 * sp,
            wx: sm / (2.0 * a),
            wtt: f + 0.5 * a * dm,
            wtx: 0.5 * dp,
            wxx: dm / (2.0 * a),
        })
    }

    pub fn jet(&self, t: f64, x: f64) -> Result<WJet> {
        let mut j = self.derivatives(t, x)?;
        j.w = self.value(t, x)?;
        Ok(j)
    }

    /// `(w, ∂ₜw, ∂ₓw)` at a point.
    pub fn first(&self, t: f64, x: f64) -> Result<(f64, f64, f64)> {
        if self.zero {
            return Ok((0.0, 0.0, 0.0));
        }
        let j = self.jet(t, x)?;
        Ok((j.w, j.wt, j.wx))
    }

    /// `W(t) = w(t, γ(t))` with its first two time derivatives.
    pub fn boundary_trace(&self, t: f64, order: usize) -> Result<Jet> {
        if self.zero {
            return Ok(Jet::zero());
        }
        let x = self.bc.gamma(t)?;
        let g1 = self.bc.gamma1(t)?;
        let j = self.jet(t, x)?;
        let d2 = if order >= 2 {
            let g2 = self.bc.gamma2(t)?;
            j.wtt + 2.0 * g1 * j.wtx + g1 * g1 * j.wxx + g2 * j.wx
        } else {
            f64::NAN
        };
        Ok(Jet {
            value: j.w,
            d1: j.wt + g1 * j.wx,
            d2,
        })
    }

    /// `(∂ₓw, ∂ₜ²w)` on the right end `x = l`.
    pub fn right_trace(&self, t: f64) -> Result<(f64, f64)> {
        if self.zero {
            return Ok((0.0, 0.0));
        }
        let j = self.derivatives(t, self.bc.l())?;
        Ok((j.wx, j.wtt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particular(f: &str, gamma: &str) -> ParticularSolution {
        let bc = Arc::new(BoundaryCurve::build(gamma, 1.0, 1.0, 1e-12, 2.0).unwrap());
        ParticularSolution::new(Source::parse(f).unwrap(), bc, 1e-13)
    }

    #[test]
    fn zero_source_is_zero() {
        let w = particular("0", "0");
        assert!(w.is_zero());
        assert_eq!(w.jet(0.7, 0.3).unwrap(), WJet::default());
    }

    #[test]
    fn constant_source() {
        let w = particular("1", "0.2*sin(t)");
        for &(t, x) in &[(0.3, 0.5), (1.4, 0.9), (1.9, 0.35)] {
            let j = w.jet(t, x).unwrap();
            assert!((j.w - t * t / 2.0).abs() < 1e-12);
            assert!((j.wt - t).abs() < 1e-12);
            assert!((j.wtt - 1.0).abs() < 1e-12);
            assert!(j.wxx.abs() < 1e-12 && j.wx.abs() < 1e-12 && j.wtx.abs() < 1e-12);
        }
    }

    #[test]
    fn linear_source_matches_closed_form() {
        let w = particular("x", "t/4");
        for &(t, x) in &[(0.3, 0.5), (1.2, 0.8), (1.8, 0.6)] {
            let j = w.jet(t, x).unwrap();
            assert!((j.w - x * t * t / 2.0).abs() < 1e-10);
            assert!((j.wx - t * t / 2.0).abs() < 1e-12);
            assert!((j.wt - x * t).abs() < 1e-12);
            assert!((j.wtx - t).abs() < 1e-12);
        }
    }

    #[test]
    fn equation_and_initial_data_hold() {
        let w = particular("sin(x + t) + x*t", "0.3*sin(t)");
        for &(t, x) in &[(0.4, 0.5), (1.5, 0.7), (1.9, 0.95)] {
            let j = w.jet(t, x).unwrap();
            let f = w.source().value(t, x).unwrap();
            assert!((j.wtt - j.wxx - f).abs() < 1e-12);
        }
        let j = w.jet(0.0, 0.4).unwrap();
        assert_eq!((j.w, j.wt), (0.0, 0.0));
        assert_eq!(j.wtt, 0.4f64.sin());
    }

    #[test]
    fn derivatives_match_finite_differences_of_value() {
        let w = particular("cos(2*x) * exp(-t)", "0.3*sin(t)");
        let (t, x, h) = (1.3, 0.6, 1e-4);
        let j = w.jet(t, x).unwrap();
        let wt = (w.value(t + h, x).unwrap() - w.value(t - h, x).unwrap()) / (2.0 * h);
        let wx = (w.value(t, x + h).unwrap() - w.value(t, x - h).unwrap()) / (2.0 * h);
        assert!((wt - j.wt).abs() < 1e-8, "{wt} vs {}", j.wt);
        assert!((wx - j.wx).abs() < 1e-8, "{wx} vs {}", j.wx);
    }
}
