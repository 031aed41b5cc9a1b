//! Independent checks of a constructed solution.
//!
//! Every check reduces to one [`CheckEntry`]: a maximum residual, where it
//! occurred, and the tolerance it is held to.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BreakLine, Family};
use crate::jumps::discontinuity_ladder;
use crate::problem::ProblemSpec;
use crate::solution::{Parts, Side, Sides, Solution, SolveOptions};
use crate::waves::SegmentKind;

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub max_residual: f64,
    /// `(t, x)` of the maximum, when the check is pointwise.
    pub location: Option<(f64, f64)>,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
}

impl CheckEntry {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        CheckEntry {
            name: name.into(),
            max_residual: 0.0,
            location: None,
            tolerance,
            samples: 0,
            passed: true,
        }
    }

    fn record(&mut self, residual: f64, at: (f64, f64)) {
        self.samples += 1;
        // NaN counts as the worst residual
        if !(residual <= self.max_residual) {
            self.max_residual = residual;
            self.location = Some(at);
        }
        self.passed = self.max_residual <= self.tolerance;
    }
}

/// Maximum FD residual at one step size and the order estimated from the
/// previous (larger) step.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceEntry {
    pub name: String,
    pub h: f64,
    pub max_residual: f64,
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub checks: Vec<CheckEntry>,
    pub convergence: Vec<ConvergenceEntry>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Step sizes for the PDE residual, decreasing.
    pub h_list: Vec<f64>,
    pub pde_points: usize,
    pub boundary_samples: usize,
    pub oracle_points: usize,
    /// Step of the 5-point stencil for `∂ₜ²u` at `x = l`.
    pub boundary_h: f64,
    /// Also rebuild with another gauge constant and as separate parts.
    pub rebuild_checks: bool,
    pub pde_tol: f64,
    pub dirichlet_tol: f64,
    pub second_bc_tol: f64,
    pub oracle_tol: f64,
    pub continuity_tol: f64,
    pub jump_tol: f64,
    pub gluing_tol: f64,
    pub ladder_tol: f64,
    /// Allowed distance of the empirical order from 2.
    pub order_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            h_list: vec![1e-2, 5e-3, 2.5e-3],
            pde_points: 200,
            boundary_samples: 200,
            oracle_points: 500,
            boundary_h: 1e-4,
            rebuild_checks: true,
            pde_tol: 1e-7,
            dirichlet_tol: 1e-8,
            second_bc_tol: 1e-6,
            oracle_tol: 1e-10,
            continuity_tol: 1e-8,
            jump_tol: 1e-7,
            gluing_tol: 1e-7,
            ladder_tol: 1e-6,
            order_tol: 0.3,
        }
    }
}

/// Residuals below this are rounding noise and carry no order information.
const ORDER_FLOOR: f64 = 1e-9;

/// Distance from `(t, x)` to the nearest break line, measured along `x`.
fn break_distance(sol: &Solution, t: f64, x: f64) -> f64 {
    let part = sol.partition();
    let a = part.a;
    let xi = x - a * t;
    let eta = x + a * t;
    let d_left = part.left_breaks.iter().map(|&z| (xi - z).abs()).fold(f64::INFINITY, f64::min);
    let d_right = part.right_breaks.iter().map(|&z| (eta - z).abs()).fold(f64::INFINITY, f64::min);
    d_left.min(d_right)
}

/// Natural units of a problem: steps and margins are multiples of `time =
/// l/a` and `length = l`, residuals are divided by `amplitude`.
#[derive(Clone, Copy, Debug)]
struct Scales {
    time: f64,
    length: f64,
    /// `max(1, max |u|)` over a coarse grid.
    amplitude: f64,
}

impl Scales {
    fn of(sol: &Solution) -> Result<Scales> {
        let spec = sol.spec();
        let field = sol.sample_grid(21, 21)?;
        let peak = field.points.iter().filter(|p| p.inside()).fold(0.0, |m: f64, p| m.max(p.u.abs()));
        Ok(Scales {
            time: spec.l() / spec.a(),
            length: spec.l(),
            amplitude: peak.max(1.0),
        })
    }
}

fn u_at(sol: &Solution, t: f64, x: f64) -> Result<f64> {
    Ok(sol.evaluate(t, x, Sides::AUTO)?.0)
}

/// Random interior points whose neighbourhood of `margin` time units and
/// `margin` length units avoids break lines and the domain edges.
fn interior_points(
    sol: &Solution,
    sc: &Scales,
    rng: &mut ChaCha8Rng,
    n: usize,
    margin: f64,
) -> Result<Vec<(f64, f64)>> {
    let spec = sol.spec();
    let bc = &spec.boundary;
    let (a, l, horizon) = (spec.a(), spec.l(), spec.horizon());
    let (mt, margin) = (margin * sc.time, margin * sc.length);
    let reach = margin + a * mt;
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 10_000 * n.max(1) {
        attempts += 1;
        if horizon <= 2.0 * mt {
            break;
        }
        let t = rng.gen_range(mt..horizon - mt);
        let lo = bc.gamma(t)?;
        if lo + reach >= l - margin {
            continue;
        }
        let x = rng.gen_range(lo + reach..l - margin);
        if break_distance(sol, t, x) > reach {
            out.push((t, x));
        }
    }
    Ok(out)
}

/// Central-difference residual of `u_tt − a² u_xx − f` at each `h`,
/// followed by the Richardson combination of the two finest steps. Steps
/// are `h·l/(2a)` in `t` and `h·l` in `x`; residuals are in units of
/// `max(1, |u|)·a²/l²`.
pub fn pde_residual_scan(
    sol: &Solution,
    h_list: &[f64],
    n: usize,
    rng: &mut ChaCha8Rng,
    tol: f64,
    order_tol: f64,
) -> Result<(Vec<CheckEntry>, Vec<ConvergenceEntry>)> {
    let spec = sol.spec();
    let a = spec.a();
    let sc = Scales::of(sol)?;
    let h_max = h_list.iter().copied().fold(0.0, f64::max);
    let pts = interior_points(sol, &sc, rng, n, 3.0 * h_max)?;
    let unit = sc.time * sc.time / sc.amplitude;
    let rows = pts
        .par_iter()
        .map(|&(t, x)| -> Result<(Vec<f64>, f64)> {
            let u0 = u_at(sol, t, x)?;
            let f = spec.data.f.value(t, x)?;
            let mut r = Vec::with_capacity(h_list.len());
            for &h in h_list {
                // Courant number 1/2; at 1 the stencil is exact for every homogeneous wave
                let (ht, hx) = (0.5 * h * sc.time, h * sc.length);
                let utt = (u_at(sol, t + ht, x)? - 2.0 * u0 + u_at(sol, t - ht, x)?) / (ht * ht);
                let uxx = (u_at(sol, t, x + hx)? - 2.0 * u0 + u_at(sol, t, x - hx)?) / (hx * hx);
                r.push((utt - a * a * uxx - f) * unit);
            }
            Ok((r, f * unit))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut convergence = Vec::new();
    let mut prev: Option<f64> = None;
    for (k, &h) in h_list.iter().enumerate() {
        let m = rows.iter().map(|(r, _)| r[k].abs()).fold(0.0, f64::max);
        let order = match prev {
            Some(p) if p > ORDER_FLOOR && m > 0.0 => Some((p / m).ln() / (h_list[k - 1] / h).ln()),
            _ => None,
        };
        convergence.push(ConvergenceEntry {
            name: "pde_residual".into(),
            h,
            max_residual: m,
            order,
        });
        prev = Some(m);
    }

    let mut extrap = CheckEntry::new("pde_residual", tol);
    let k = h_list.len();
    for (&(t, x), (r, f)) in pts.iter().zip(&rows) {
        let best = if k >= 2 {
            let q = (h_list[k - 2] / h_list[k - 1]).powi(2);
            (q * r[k - 1] - r[k - 2]) / (q - 1.0)
        } else {
            r[k - 1]
        };
        extrap.record(best.abs() / (1.0 + f.abs()), (t, x));
    }

    let mut order_check = CheckEntry::new("pde_order", order_tol);
    for c in &convergence {
        if let Some(p) = c.order {
            order_check.record((p - 2.0).abs(), (f64::NAN, c.h));
        }
    }
    order_check.location = None;
    Ok((vec![extrap, order_check], convergence))
}

/// Five-point `∂ₜ²u` at `(t, x)`.
fn second_in_time(sol: &Solution, t: f64, x: f64, h: f64) -> Result<f64> {
    let u = |s: f64| u_at(sol, s, x);
    Ok((-u(t + 2.0 * h)? + 16.0 * u(t + h)? - 30.0 * u(t)? + 16.0 * u(t - h)? - u(t - 2.0 * h)?) / (12.0 * h * h))
}

/// Dirichlet residual on `x = γ(t)` and the second boundary condition on
/// `x = l`, sampled at `n` evenly spaced times. The stencil step is `h·l/a`.
pub fn boundary_residual_scan(sol: &Solution, n: usize, h: f64, tols: (f64, f64)) -> Result<Vec<CheckEntry>> {
    let spec = sol.spec();
    let d = &spec.data;
    let bc = &spec.boundary;
    let (a, l, horizon) = (spec.a(), spec.l(), spec.horizon());
    let part = sol.partition();
    let sc = Scales::of(sol)?;
    let h = h * sc.time;
    let unit = sc.time * sc.time / sc.amplitude;
    // times at which a break line meets x = l
    let mut hits: Vec<f64> = part.lseq.clone();
    hits.extend(part.left_breaks.iter().map(|&z| (l - z) / a));
    let ts: Vec<f64> = (1..=n).map(|k| horizon * k as f64 / n as f64).collect();
    let rows = ts
        .par_iter()
        .map(|&t| -> Result<(f64, Option<f64>)> {
            let x = bc.gamma(t)?;
            let dir = (u_at(sol, t, x)? - d.mu1.value(t)?).abs() / sc.amplitude;
            let clear = t - 2.0 * h > 0.0
                && t + 2.0 * h <= horizon
                && hits.iter().all(|&s| (s - t).abs() > 3.0 * h);
            let second = if clear {
                let utt = second_in_time(sol, t, l, h)?;
                let ux = sol.evaluate(t, l, Sides::AUTO)?.2;
                Some((utt + d.b * ux - d.mu2.value(t)?).abs() * unit)
            } else {
                None
            };
            Ok((dir, second))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut dirichlet = CheckEntry::new("dirichlet", tols.0);
    let mut right = CheckEntry::new("second_boundary", tols.1);
    for (&t, (dir, second)) in ts.iter().zip(&rows) {
        dirichlet.record(*dir, (t, bc.gamma(t)?));
        if let Some(s) = second {
            right.record(*s, (t, l));
        }
    }
    Ok(vec![dirichlet, right])
}

/// Points strictly inside a break line, away from its end points.
fn line_points(line: &BreakLine, time: f64) -> Vec<(f64, f64)> {
    [0.25, 0.5, 0.75]
        .iter()
        .filter_map(|&s| {
            let t = line.from.0 + s * (line.to.0 - line.from.0);
            let x = line.from.1 + s * (line.to.1 - line.from.1);
            (line.to.0 - line.from.0 > 1e-9 * time).then_some((t, x))
        })
        .collect()
}

fn sides_across(family: Family, side: Side) -> Sides {
    match family {
        Family::Minus => Sides {
            left: side,
            right: Side::Auto,
        },
        Family::Plus => Sides {
            left: Side::Auto,
            right: side,
        },
    }
}

/// Two-sided limits across every break line within the horizon: `u` must
/// be continuous and `∂ₜu` must jump by the prescribed amplitude.
pub fn characteristic_jump_scan(sol: &Solution, continuity_tol: f64, jump_tol: f64) -> Result<Vec<CheckEntry>> {
    let lines = sol.break_lines()?;
    let sc = Scales::of(sol)?;
    let mut value = CheckEntry::new("continuity", continuity_tol);
    let mut right_even = CheckEntry::new("velocity_jump_right_even", jump_tol);
    let mut right_odd = CheckEntry::new("velocity_jump_right_odd", jump_tol);
    let mut left_odd = CheckEntry::new("velocity_jump_left_odd", jump_tol);
    let mut left_even = CheckEntry::new("velocity_jump_left_even", jump_tol);
    for line in &lines {
        let kind = match line.family {
            Family::Minus => SegmentKind::G,
            Family::Plus => SegmentKind::P,
        };
        let expected = match sol.jumps() {
            Some(j) => j.expected_velocity_jump(kind, line.index)?,
            None => 0.0,
        };
        for (t, x) in line_points(line, sc.time) {
            let minus = sol.evaluate(t, x, sides_across(line.family, Side::Minus))?;
            let plus = sol.evaluate(t, x, sides_across(line.family, Side::Plus))?;
            value.record((plus.0 - minus.0).abs() / sc.amplitude, (t, x));
            let err = (plus.1 - minus.1 - expected).abs() / expected.abs().max(1.0);
            let entry = match (line.family, line.index % 2 == 0) {
                (Family::Plus, true) => &mut right_even,
                (Family::Plus, false) => &mut right_odd,
                (Family::Minus, false) => &mut left_odd,
                (Family::Minus, true) => &mut left_even,
            };
            entry.record(err, (t, x));
        }
    }
    Ok(vec![value, right_even, right_odd, left_odd, left_even])
}

/// Largest jump of `u₁` and its first and second derivatives across the
/// break lines, each derivative scaled to the problem's units.
pub fn smooth_gluing_scan(sol: &Solution, tol: f64) -> Result<CheckEntry> {
    let mut entry = CheckEntry::new("smooth_gluing", tol);
    if sol.smooth().is_none() {
        return Ok(entry);
    }
    let sc = Scales::of(sol)?;
    let (tu, lu) = (sc.time, sc.length);
    for line in &sol.break_lines()? {
        for (t, x) in line_points(line, tu) {
            let m = sol.evaluate_part(t, x, sides_across(line.family, Side::Minus), Parts::Smooth)?;
            let p = sol.evaluate_part(t, x, sides_across(line.family, Side::Plus), Parts::Smooth)?;
            let worst = [
                p.u - m.u,
                (p.ut - m.ut) * tu,
                (p.ux - m.ux) * lu,
                (p.utt - m.utt) * tu * tu,
                (p.utx - m.utx) * tu * lu,
                (p.uxx - m.uxx) * lu * lu,
            ]
            .iter()
            .fold(0.0, |acc: f64, d| acc.max(d.abs()))
                / sc.amplitude;
            entry.record(worst, (t, x));
        }
    }
    Ok(entry)
}

/// Predicted versus measured segment discontinuities.
pub fn ladder_check(sol: &Solution, tol: f64) -> Result<CheckEntry> {
    let mut entry = CheckEntry::new("discontinuity_ladder", tol);
    if let Some(table) = sol.smooth() {
        let report = discontinuity_ladder(sol.spec(), table)?;
        for e in &report.entries {
            let err = e.abs_error() / e.predicted.abs().max(1.0);
            entry.record(err, (f64::NAN, f64::NAN));
        }
        entry.location = None;
    }
    Ok(entry)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite fixed-order Gauss–Legendre rule.
struct FixedRule {
    x: Vec<f64>,
    w: Vec<f64>,
    panels: usize,
}

impl FixedRule {
    fn new(order: usize, panels: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        FixedRule { x, w, panels }
    }

    fn integrate(&self, f: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
        let h = (b - a) / self.panels as f64;
        let mut total = 0.0;
        for k in 0..self.panels {
            let c = a + (k as f64 + 0.5) * h;
            for (xi, wi) in self.x.iter().zip(&self.w) {
                total += wi * f(c + 0.5 * h * xi)?;
            }
        }
        Ok(0.5 * h * total)
    }
}

/// d'Alembert–Duhamel value in the region untouched by either boundary.
pub fn dalembert_value(spec: &ProblemSpec, t: f64, x: f64) -> Result<f64> {
    let d = &spec.data;
    let a = spec.a();
    let rule = FixedRule::new(20, 8);
    let (lo, hi) = (x - a * t, x + a * t);
    let mut u = 0.5 * (d.phi.value(lo)? + d.phi.value(hi)?);
    if !d.psi.is_zero() && t > 0.0 {
        u += rule.integrate(|s| Ok(d.psi.value(s)?), lo, hi)? / (2.0 * a);
    }
    if !d.f.is_zero() && t > 0.0 {
        let inner = FixedRule::new(20, 2);
        let duhamel = rule.integrate(
            |s| {
                let r = a * (t - s);
                if r <= 0.0 {
                    return Ok(0.0);
                }
                inner.integrate(|xi| Ok(d.f.value(s, xi)?), x - r, x + r)
            },
            0.0,
            t,
        )?;
        u += duhamel / (2.0 * a);
    }
    Ok(u)
}

/// Compares `u` with [`dalembert_value`] at random points of the region
/// `x − at ≥ 0`, `x + at ≤ l`.
pub fn dalembert_oracle_check(sol: &Solution, n: usize, rng: &mut ChaCha8Rng, tol: f64) -> Result<CheckEntry> {
    let spec = sol.spec();
    let (a, l) = (spec.a(), spec.l());
    let t_max = spec.horizon().min(l / (2.0 * a));
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let t = rng.gen_range(0.0..t_max);
            let x = rng.gen_range(a * t..l - a * t);
            (t, x)
        })
        .collect();
    let errs = pts
        .par_iter()
        .map(|&(t, x)| -> Result<f64> {
            let u = u_at(sol, t, x)?;
            let o = dalembert_value(spec, t, x)?;
            Ok((u - o).abs() / (1.0 + o.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut entry = CheckEntry::new("dalembert_oracle", tol);
    for (&p, &e) in pts.iter().zip(&errs) {
        entry.record(e, p);
    }
    Ok(entry)
}

/// Largest `|u_a − u_b|` over a grid, for two solutions of the same domain.
pub fn grid_difference(
    name: &str,
    sol: &Solution,
    other: impl Fn(f64, f64) -> Result<f64> + Sync,
    nt: usize,
    nx: usize,
    tol: f64,
) -> Result<CheckEntry> {
    let field = sol.sample_grid(nt, nx)?;
    let diffs = field
        .points
        .par_iter()
        .filter(|p| p.inside())
        .map(|p| Ok(((p.u - other(p.t, p.x)?).abs(), (p.t, p.x))))
        .collect::<Result<Vec<_>>>()?;
    let mut entry = CheckEntry::new(name, tol);
    for (d, at) in diffs {
        entry.record(d, at);
    }
    Ok(entry)
}

/// Runs every check. Failures of the checks are recorded in the report;
/// `Err` is returned only when the solution cannot be evaluated.
pub fn verify(sol: &Solution, opts: &VerifyOptions) -> Result<VerificationReport> {
    if opts.h_list.is_empty() {
        return Err(Error::InvalidParameter("h_list must not be empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    let (pde, convergence) = pde_residual_scan(sol, &opts.h_list, opts.pde_points, &mut rng, opts.pde_tol, opts.order_tol)?;
    checks.extend(pde);
    checks.extend(boundary_residual_scan(
        sol,
        opts.boundary_samples,
        opts.boundary_h,
        (opts.dirichlet_tol, opts.second_bc_tol),
    )?);
    checks.extend(characteristic_jump_scan(sol, opts.continuity_tol, opts.jump_tol)?);
    if sol.smooth().is_some() {
        let forced = !sol.matching().satisfied;
        if !forced {
            checks.push(smooth_gluing_scan(sol, opts.gluing_tol)?);
        }
        checks.push(ladder_check(sol, opts.ladder_tol)?);
        checks.push(dalembert_oracle_check(sol, opts.oracle_points, &mut rng, opts.oracle_tol)?);
    }
    if opts.rebuild_checks && sol.options().parts == Parts::All {
        let spec = sol.spec();
        let base = *sol.options();
        let gauge = Solution::build(
            spec,
            SolveOptions {
                c1: base.c1 + 7.3,
                ..base
            },
        )?;
        checks.push(grid_difference("gauge", sol, |t, x| u_at(&gauge, t, x), 40, 40, 1e-12)?);
        let smooth = Solution::build(
            spec,
            SolveOptions {
                parts: Parts::Smooth,
                ..base
            },
        )?;
        let jump = Solution::build(
            spec,
            SolveOptions {
                parts: Parts::Jump,
                ..base
            },
        )?;
        checks.push(grid_difference(
            "decomposition",
            sol,
            |t, x| Ok(u_at(&smooth, t, x)? + u_at(&jump, t, x)?),
            40,
            40,
            1e-12,
        )?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        seed: opts.seed,
        checks,
        convergence,
        passed,
    })
}
