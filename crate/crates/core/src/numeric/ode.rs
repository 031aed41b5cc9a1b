//! Dormand–Prince 5(4) with Hairer's continuous extension.
//!
//! Every accepted step keeps its five interpolation coefficients, so the
//! result is a [`DenseSolution`] that can be evaluated anywhere in the
//! integration interval. The interpolant matches the state and its slope
//! at every step boundary.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size control settings.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step, as a fraction of the interval length.
    pub max_step_fraction: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            max_step_fraction: 0.125,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
struct Step<const N: usize> {
    z0: f64,
    h: f64,
    cont: [[f64; N]; 5],
}

/// Piecewise quartic interpolant of an ODE solution on `[start, end]`.
#[derive(Clone, Debug)]
pub struct DenseSolution<const N: usize> {
    steps: Vec<Step<N>>,
    start: f64,
    end: f64,
    y_end: [f64; N],
}

impl<const N: usize> DenseSolution<N> {
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    /// State at the final mesh point, exactly as computed by the last step.
    pub fn final_state(&self) -> [f64; N] {
        self.y_end
    }

    /// Interpolated state at `z`. Arguments slightly outside the interval
    /// are served by the nearest step's polynomial.
    pub fn eval(&self, z: f64) -> [f64; N] {
        if z == self.end {
            return self.y_end;
        }
        let k = self.steps.partition_point(|s| s.z0 <= z).saturating_sub(1);
        let st = &self.steps[k];
        let s = (z - st.z0) / st.h;
        let s1 = 1.0 - s;
        let c = &st.cont;
        std::array::from_fn(|i| {
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        })
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Integrates `y' = rhs(z, y)` from `z0` to `z1 > z0`.
pub fn solve_dense<F, const N: usize>(
    mut rhs: F,
    z0: f64,
    y0: [f64; N],
    z1: f64,
    opts: &OdeOptions,
) -> Result<DenseSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(z1 > z0) {
        return Err(Error::Ode {
            z: z0,
            detail: format!("empty interval [{z0}, {z1}]"),
        });
    }
    let span = z1 - z0;
    let h_max = span * opts.max_step_fraction;
    let mut z = z0;
    let mut y = y0;
    let mut k1 = rhs(z, &y)?;

    // initial step guess (Hairer & Wanner, II.4)
    let scale = |v: &[f64; N], i: usize| opts.atol + opts.rtol * v[i].abs();
    let norm = |v: &[f64; N], s: &[f64; N]| {
        (v.iter().enumerate().map(|(i, x)| (x / scale(s, i)).powi(2)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = norm(&y, &y);
    let d1 = norm(&k1, &y);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h = h.min(h_max).max(1e-12 * span);

    let mut steps = Vec::new();
    let mut rejected_last = false;
    while z < z1 {
        if steps.len() >= opts.max_steps {
            return Err(Error::Ode {
                z,
                detail: format!("more than {} steps", opts.max_steps),
            });
        }
        let last = z + h >= z1 - 1e-12 * span;
        if last {
            h = z1 - z;
        }
        let k2 = rhs(z + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = rhs(z + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(z + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = rhs(
            z + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = rhs(
            z + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let z_new = if last { z1 } else { z + h };
        let k7 = rhs(z_new, &y_new)?;
        let err: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err_norm = (err
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / N as f64)
            .sqrt();
        if !err_norm.is_finite() {
            return Err(Error::Ode {
                z,
                detail: "non-finite state".into(),
            });
        }
        if err_norm <= 1.0 {
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y_new[i] - y[i];
                let bspl = h * k1[i] - dy;
                cont[0][i] = y[i];
                cont[1][i] = dy;
                cont[2][i] = bspl;
                cont[3][i] = dy - h * k7[i] - bspl;
                cont[4][i] =
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            steps.push(Step { z0: z, h, cont });
            z = z_new;
            y = y_new;
            k1 = k7;
            let mut fac = 0.9 * err_norm.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(h_max);
            rejected_last = false;
        } else {
            let fac = (0.9 * err_norm.powf(-0.2)).max(0.2);
            h *= fac;
            rejected_last = true;
            if h < 1e-14 * span {
                return Err(Error::Ode {
                    z,
                    detail: format!("step size underflow (error norm {err_norm:e})"),
                });
            }
        }
    }
    Ok(DenseSolution {
        steps,
        start: z0,
        end: z1,
        y_end: y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_dense_output() {
        let sol = solve_dense(
            |_, y: &[f64; 1]| Ok([-2.0 * y[0]]),
            0.0,
            [1.0],
            3.0,
            &OdeOptions::with_tolerance(1e-11),
        )
        .unwrap();
        for k in 0..=60 {
            let z = 3.0 * k as f64 / 60.0;
            let got = sol.eval(z)[0];
            assert!((got - (-2.0 * z).exp()).abs() < 1e-10, "z = {z}: {got}");
        }
        assert_eq!(sol.final_state()[0], sol.eval(3.0)[0]);
    }

    #[test]
    fn harmonic_oscillator_keeps_phase() {
        let sol = solve_dense(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            10.0,
            &OdeOptions::with_tolerance(1e-12),
        )
        .unwrap();
        for k in 0..=100 {
            let z = 0.1 * k as f64;
            let [p, q] = sol.eval(z);
            assert!((p - z.sin()).abs() < 1e-10);
            assert!((q - z.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn forced_linear_second_order() {
        // a^2 p'' + b p' = 1 with a = 1, b = 0: p = (z - z0)^2 / 2
        let z0 = 1.5;
        let sol = solve_dense(
            |_, y: &[f64; 2]| Ok([y[1], 1.0]),
            z0,
            [0.0, 0.0],
            2.5,
            &OdeOptions::with_tolerance(1e-10),
        )
        .unwrap();
        for k in 0..=20 {
            let z = z0 + k as f64 / 20.0;
            assert!((sol.eval(z)[0] - 0.5 * (z - z0).powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn rhs_errors_propagate() {
        let r = solve_dense(
            |z, _: &[f64; 1]| {
                if z > 0.5 {
                    Err(Error::InvalidParameter("boom".into()))
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            1.0,
            &OdeOptions::with_tolerance(1e-8),
        );
        assert!(r.is_err());
    }
}
