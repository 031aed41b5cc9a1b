//! The moving boundary, its characteristic maps and the partition of the
//! half-strip into regions `Q(i, j)`.
//!
//! With `γ₊(t) = γ(t) + a t` and `γ₋(t) = γ(t) − a t`, the inverses `Φ₊`,
//! `Φ₋` send a characteristic intercept back to the time at which that
//! characteristic meets the boundary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Smooth1;
use crate::numeric::roots::{bracket_increasing, solve_increasing};

/// Number of intervals in the boundary sampling grid.
const SAMPLES: usize = 4096;

/// Characteristic family: `Plus` for `γ(t) + a t`, `Minus` for `γ(t) − a t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Plus,
    Minus,
}

/// Outcome of sampling `γ` on `[0, T]`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryScan {
    pub gamma0: f64,
    pub max_slope: f64,
    pub max_slope_at: f64,
    /// First sample with `|γ'(t)| ≥ a`, as `(t, γ'(t))`.
    pub slope_violation: Option<(f64, f64)>,
    /// First sample with `γ(t) ≥ l`, as `(t, γ(t))`.
    pub intersection: Option<(f64, f64)>,
    pub samples: usize,
}

impl BoundaryScan {
    pub fn run(gamma: &Smooth1, a: f64, l: f64, horizon: f64) -> Result<Self> {
        let mut scan = BoundaryScan {
            gamma0: gamma.value(0.0)?,
            max_slope: 0.0,
            max_slope_at: 0.0,
            slope_violation: None,
            intersection: None,
            samples: SAMPLES + 1,
        };
        for k in 0..=SAMPLES {
            let t = horizon * k as f64 / SAMPLES as f64;
            let g = gamma.value(t)?;
            let s = gamma.d1(t)?;
            if s.abs() > scan.max_slope {
                scan.max_slope = s.abs();
                scan.max_slope_at = t;
            }
            if scan.slope_violation.is_none() && !(s.abs() < a) {
                scan.slope_violation = Some((t, s));
            }
            if scan.intersection.is_none() && !(g < l) {
                scan.intersection = Some((t, g));
            }
        }
        Ok(scan)
    }
}

/// The left boundary `x = γ(t)` with its derivatives and characteristic
/// inverses.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    gamma: Smooth1,
    a: f64,
    l: f64,
    tol: f64,
    horizon: f64,
    scan: BoundaryScan,
    // γ₋ on the sampling grid, for bracketing Φ₋
    grid_t: Vec<f64>,
    grid_minus: Vec<f64>,
}

impl BoundaryCurve {
    /// Parses `gamma_text` (a function of `t`) and validates it on `[0, horizon]`.
    pub fn build(gamma_text: &str, a: f64, l: f64, tol: f64, horizon: f64) -> Result<Self> {
        let gamma = Smooth1::parse(gamma_text, "t").map_err(|source| Error::Parse {
            slot: "gamma",
            source,
        })?;
        Self::from_smooth(gamma, a, l, tol, horizon)
    }

    pub fn from_smooth(gamma: Smooth1, a: f64, l: f64, tol: f64, horizon: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("wave speed a must be positive, got {a}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!("strip width l must be positive, got {l}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("root tolerance must be positive, got {tol}")));
        }
        let scan = BoundaryScan::run(&gamma, a, l, horizon)?;
        if let Some((t, slope)) = scan.slope_violation {
            return Err(Error::SlopeViolation { t, slope, a });
        }
        if let Some((t, g)) = scan.intersection {
            return Err(Error::Intersection { t, gamma: g, l });
        }
        if scan.gamma0.abs() > 1e-12 {
            return Err(Error::BoundaryOrigin(scan.gamma0));
        }
        let mut grid_t = Vec::with_capacity(SAMPLES + 1);
        let mut grid_minus = Vec::with_capacity(SAMPLES + 1);
        for k in 0..=SAMPLES {
            let t = horizon * k as f64 / SAMPLES as f64;
            grid_t.push(t);
            grid_minus.push(gamma.value(t)? - a * t);
        }
        Ok(BoundaryCurve {
            gamma,
            a,
            l,
            tol,
            horizon,
            scan,
            grid_t,
            grid_minus,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn root_tolerance(&self) -> f64 {
        self.tol
    }

    pub fn expr(&self) -> &Smooth1 {
        &self.gamma
    }

    pub fn scan(&self) -> &BoundaryScan {
        &self.scan
    }

    /// `max |γ'| / a` over the sampled horizon.
    pub fn margin(&self) -> f64 {
        self.scan.max_slope / self.a
    }

    pub fn gamma(&self, t: f64) -> Result<f64> {
        Ok(self.gamma.value(t)?)
    }

    pub fn gamma1(&self, t: f64) -> Result<f64> {
        Ok(self.gamma.d1(t)?)
    }

    pub fn gamma2(&self, t: f64) -> Result<f64> {
        Ok(self.gamma.d2(t)?)
    }

    pub fn gamma_plus(&self, t: f64) -> Result<f64> {
        Ok(self.gamma(t)? + self.a * t)
    }

    pub fn gamma_minus(&self, t: f64) -> Result<f64> {
        Ok(self.gamma(t)? - self.a * t)
    }

    pub fn characteristic(&self, family: Family, t: f64) -> Result<f64> {
        match family {
            Family::Plus => self.gamma_plus(t),
            Family::Minus => self.gamma_minus(t),
        }
    }

    /// `Φ±(alpha)`: the time `t ≥ 0` with `γ(t) ± a t = alpha`.
    pub fn invert(&self, family: Family, alpha: f64) -> Result<f64> {
        match family {
            Family::Plus => {
                if !(alpha >= 0.0) {
                    return Err(Error::Precondition(format!("Φ₊ needs alpha ≥ 0, got {alpha}")));
                }
                self.solve(alpha, |t| self.gamma_plus(t).map(|g| g - alpha), None)
            }
            Family::Minus => {
                if !(alpha <= 0.0) {
                    return Err(Error::Precondition(format!("Φ₋ needs alpha ≤ 0, got {alpha}")));
                }
                let hint = self.minus_bracket(alpha);
                self.solve(alpha, |t| self.gamma_minus(t).map(|g| alpha - g), hint)
            }
        }
    }

    /// `Φ±'(alpha) = 1 / (γ'(t) ± a)` at `t = Φ±(alpha)`.
    pub fn inverse_d1(&self, family: Family, alpha: f64) -> Result<f64> {
        let t = self.invert(family, alpha)?;
        Ok(1.0 / (self.gamma1(t)? + self.sign(family) * self.a))
    }

    /// `Φ±''(alpha) = −γ''(t) / (γ'(t) ± a)³` at `t = Φ±(alpha)`.
    pub fn inverse_d2(&self, family: Family, alpha: f64) -> Result<f64> {
        let t = self.invert(family, alpha)?;
        let d = self.gamma1(t)? + self.sign(family) * self.a;
        Ok(-self.gamma2(t)? / (d * d * d))
    }

    fn sign(&self, family: Family) -> f64 {
        match family {
            Family::Plus => 1.0,
            Family::Minus => -1.0,
        }
    }

    fn minus_bracket(&self, alpha: f64) -> Option<(f64, f64)> {
        let g = &self.grid_minus;
        // grid_minus is decreasing; find the first sample at or below alpha
        let k = g.partition_point(|&v| v > alpha);
        if k == 0 {
            return Some((0.0, 0.0));
        }
        if k >= g.len() {
            return None;
        }
        Some((self.grid_t[k - 1], self.grid_t[k]))
    }

    fn solve<F>(&self, alpha: f64, h: F, hint: Option<(f64, f64)>) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if alpha == 0.0 {
            return Ok(0.0);
        }
        let (lo, hi) = match hint {
            Some(b) => b,
            None => {
                let first = alpha.abs() / self.a;
                let limit = 1e3 * (self.horizon + self.l / self.a);
                bracket_increasing(&h, 0.0, first, limit)?.ok_or(Error::NoBracket { alpha, limit })?
            }
        };
        let (t, residual) = solve_increasing(&h, lo, hi)?;
        if residual.abs() > self.tol * (1.0 + alpha.abs()) {
            return Err(Error::RootTolerance { t, residual });
        }
        Ok(t)
    }
}

/// The two interleaved break ladders.
///
/// `left_breaks[i] = γ₋(r_i)` bounds the `x − at` bands and
/// `right_breaks[j] = l + a l_j` bounds the `x + at` bands.
#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    pub r: Vec<f64>,
    pub lseq: Vec<f64>,
    pub left_breaks: Vec<f64>,
    pub right_breaks: Vec<f64>,
    pub horizon: f64,
    pub a: f64,
    pub l: f64,
}

/// Position of a point relative to the partition.
///
/// `on_left = Some(k)` means the point lies on `x − at = left_breaks[k]`;
/// `on_right = Some(k)` means it lies on `x + at = right_breaks[k]`. Such
/// points are assigned to band `k`, the lower index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegionIndex {
    pub i: usize,
    pub j: usize,
    pub on_left: Option<usize>,
    pub on_right: Option<usize>,
}

impl RegionIndex {
    pub fn on_characteristic(&self) -> bool {
        self.on_left.is_some() || self.on_right.is_some()
    }
}

/// A straight break line clipped to the domain and horizon.
#[derive(Clone, Debug, Serialize)]
pub struct BreakLine {
    pub family: Family,
    pub index: usize,
    pub intercept: f64,
    /// `(t, x)` end points; the first lies on the boundary it starts from.
    pub from: (f64, f64),
    pub to: (f64, f64),
}

const MAX_BREAKS: usize = 100_000;

impl Partition {
    /// Builds `r_i`, `l_i` from `r_0 = l_0 = 0` until both ladders pass `horizon`.
    pub fn build(bc: &BoundaryCurve, l: f64, horizon: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidParameter(format!("strip width l must be positive, got {l}")));
        }
        let a = bc.a();
        if !(bc.gamma(0.0)? < l) {
            return Err(Error::Intersection {
                t: 0.0,
                gamma: bc.gamma(0.0)?,
                l,
            });
        }
        let mut r = vec![0.0];
        let mut lseq = vec![0.0];
        while *r.last().unwrap() < horizon || *lseq.last().unwrap() < horizon {
            let n = r.len();
            if n > MAX_BREAKS {
                return Err(Error::PartitionStall {
                    index: n,
                    detail: format!(
                        "breaks accumulate below the horizon (r = {}, l = {})",
                        r[n - 1],
                        lseq[n - 1]
                    ),
                });
            }
            let r_prev = r[n - 1];
            let l_prev = lseq[n - 1];
            let l_next = r_prev + (l - bc.gamma(r_prev)?) / a;
            let r_next = bc.invert(Family::Plus, l + a * l_prev)?;
            if !(l_next > l_prev) || !(r_next > r_prev) {
                return Err(Error::PartitionStall {
                    index: n,
                    detail: format!("non-increasing break (r: {r_prev} -> {r_next}, l: {l_prev} -> {l_next})"),
                });
            }
            r.push(r_next);
            lseq.push(l_next);
        }
        let left_breaks = r.iter().map(|&t| bc.gamma_minus(t)).collect::<Result<Vec<_>>>()?;
        let right_breaks = lseq.iter().map(|&s| l + a * s).collect();
        Ok(Partition {
            r,
            lseq,
            left_breaks,
            right_breaks,
            horizon,
            a,
            l,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Tolerance within which a point counts as lying on a break line.
    pub fn snap(z: f64) -> f64 {
        1e-10 * (1.0 + z.abs())
    }

    /// Band index of `xi = x − at` and the left break it lies on, if any.
    pub fn left_band(&self, xi: f64) -> (usize, Option<usize>) {
        let lb = &self.left_breaks;
        if let Some(k) = self.nearest(lb, xi) {
            return (k, Some(k));
        }
        if xi >= 0.0 {
            return (0, None);
        }
        // first k with lb[k] <= xi; lb is decreasing
        let k = lb.partition_point(|&v| v > xi);
        (k.min(lb.len()), None)
    }

    /// Band index of `eta = x + at` and the right break it lies on, if any.
    pub fn right_band(&self, eta: f64) -> (usize, Option<usize>) {
        let rb = &self.right_breaks;
        if let Some(k) = self.nearest(rb, eta) {
            return (k, Some(k));
        }
        if eta <= self.l {
            return (0, None);
        }
        // first k with rb[k] >= eta
        let k = rb.partition_point(|&v| v < eta);
        (k.min(rb.len()), None)
    }

    fn nearest(&self, breaks: &[f64], z: f64) -> Option<usize> {
        let snap = Self::snap(z);
        breaks.iter().position(|&b| (b - z).abs() <= snap)
    }

    /// Region of `(t, x)`; the point must lie in the closed domain.
    pub fn classify(&self, bc: &BoundaryCurve, t: f64, x: f64) -> Result<RegionIndex> {
        let slack = Self::snap(self.horizon);
        if !(t >= -slack && t <= self.horizon + slack) {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.horizon,
            });
        }
        let lo = bc.gamma(t.max(0.0))?;
        if !(x >= lo - Self::snap(lo) && x <= self.l + Self::snap(self.l)) {
            return Err(Error::OutOfDomain { t, x });
        }
        let (i, on_left) = self.left_band(x - self.a * t);
        let (j, on_right) = self.right_band(x + self.a * t);
        if i >= self.len() || j >= self.len() {
            return Err(Error::OutOfDomain { t, x });
        }
        Ok(RegionIndex { i, j, on_left, on_right })
    }

    /// Break lines clipped to `0 ≤ t ≤ horizon`.
    pub fn break_lines(&self, bc: &BoundaryCurve) -> Result<Vec<BreakLine>> {
        let a = self.a;
        let t_max = self.horizon;
        let mut lines = Vec::new();
        for (k, (&rk, &lb)) in self.r.iter().zip(&self.left_breaks).enumerate() {
            if rk > t_max {
                break;
            }
            // x − at = lb from the boundary at t = r_k to x = l
            let t_end = ((self.l - lb) / a).min(t_max);
            lines.push(BreakLine {
                family: Family::Minus,
                index: k,
                intercept: lb,
                from: (rk, bc.gamma(rk)?),
                to: (t_end, lb + a * t_end),
            });
        }
        for (k, (&lk, &rb)) in self.lseq.iter().zip(&self.right_breaks).enumerate() {
            if lk > t_max {
                break;
            }
            // x + at = rb from x = l at t = l_k to the boundary at r_{k+1}
            let t_end = match self.r.get(k + 1) {
                Some(&r_next) => r_next.min(t_max),
                None => t_max,
            };
            lines.push(BreakLine {
                family: Family::Plus,
                index: k,
                intercept: rb,
                from: (lk, self.l),
                to: (t_end, rb - a * t_end),
            });
        }
        Ok(lines)
    }
}
