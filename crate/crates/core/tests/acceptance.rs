//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::time::Instant;

use charwave::geometry::{BoundaryCurve, Family, Partition};
use charwave::jumps::discontinuity_ladder;
use charwave::validation::{
    boundary_residual_scan, characteristic_jump_scan, dalembert_oracle_check, pde_residual_scan, smooth_gluing_scan,
};
use charwave::{Error, Parts, ProblemDefinition, ProblemSpec, SegmentKind, Side, Sides, Solution, SolveOptions};
use common::{standing_wave, travelling_wave};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Error>;

fn solve(def: &ProblemDefinition, options: SolveOptions) -> Result<Solution, Error> {
    Solution::build(&ProblemSpec::new(def)?, options)
}

fn partition_ladders() -> Outcome {
    let bc = BoundaryCurve::build("0", 1.0, 1.0, 1e-12, 10.0)?;
    let p = Partition::build(&bc, 1.0, 10.0)?;
    let mut worst = 0.0f64;
    for i in 0..=10 {
        worst = worst.max((p.r[i] - i as f64).abs()).max((p.lseq[i] - i as f64).abs());
    }
    // γ = c t: (c + a) r_i = l + a l_{i-1} and l_i = r_{i-1} + (l - c r_{i-1}) / a
    let (a, l, c) = (1.0, 1.0, 0.5);
    let (mut r, mut s) = (vec![0.0], vec![0.0]);
    for i in 1..4 {
        r.push((l + a * s[i - 1]) / (c + a));
        s.push(r[i - 1] + (l - c * r[i - 1]) / a);
    }
    let bc = BoundaryCurve::build("t/2", a, l, 1e-12, 1.7)?;
    let q = Partition::build(&bc, l, 1.7)?;
    let quoted = [(q.lseq[1], 1.0), (q.r[1], 2.0 / 3.0), (q.lseq[2], 4.0 / 3.0), (q.r[2], 4.0 / 3.0), (q.lseq[3], 5.0 / 3.0)];
    let mut linear = 0.0f64;
    for (got, want) in quoted {
        linear = linear.max((got - want).abs());
    }
    for i in 1..4 {
        linear = linear.max((q.r[i] - r[i]).abs()).max((q.lseq[i] - s[i]).abs());
    }
    Ok((
        worst <= 1e-12 && linear <= 1e-9,
        format!("fixed boundary max err {worst:.1e} (tol 1e-12), linear boundary max err {linear:.1e} (tol 1e-9)"),
    ))
}

fn inverse_round_trip() -> Outcome {
    let bc = BoundaryCurve::build("0.3*sin(2*t)", 1.0, 1.0, 1e-12, 3.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut trip, mut deriv) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let t = rng.gen_range(0.0..3.0);
        for fam in [Family::Plus, Family::Minus] {
            let alpha = bc.characteristic(fam, t)?;
            trip = trip.max((bc.invert(fam, alpha)? - t).abs());
            let h = 1e-6;
            let fd = (bc.invert(fam, alpha + h)? - bc.invert(fam, alpha - h)?) / (2.0 * h);
            let exact = bc.inverse_d1(fam, alpha)?;
            deriv = deriv.max((fd - exact).abs() / exact.abs());
        }
    }
    Ok((
        trip <= 1e-9 && deriv <= 1e-5,
        format!("round trip {trip:.1e} (tol 1e-9), derivative rel err {deriv:.1e} (tol 1e-5)"),
    ))
}

fn dalembert() -> Outcome {
    let a = 1.5;
    let sol = solve(&travelling_wave(a, 0.7, 2.0), SolveOptions::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = dalembert_oracle_check(&sol, 500, &mut rng, 1e-10)?;
    Ok((e.passed, format!("max rel diff {:.1e} over {} points (tol 1e-10)", e.max_residual, e.samples)))
}

fn gluing() -> Outcome {
    let (a, b) = (1.5, 0.7);
    let def = standing_wave(a, b, 2.5);
    let sol = solve(&def, SolveOptions::default())?;
    let part = sol.partition();
    let crossings = part.r.iter().filter(|&&r| r > 0.0 && r <= 2.5).count();
    let glue = smooth_gluing_scan(&sol, 1e-7)?;
    let mut ok = glue.passed && crossings >= 3;
    let mut detail = format!(
        "max jump of u1 and derivatives {:.1e} over {} points, {crossings} reflections",
        glue.max_residual, glue.samples
    );
    let violations = [
        ("res25", "mu1", "0.3"),
        ("res26", "mu1", "0.3*t"),
        ("res27", "mu1", "0.3*t^2"),
        ("res28", "mu2", "0.3"),
    ];
    for (name, slot, extra) in violations {
        let mut d = def.clone();
        match slot {
            "mu1" => d.mu1 = format!("{} + {extra}", d.mu1),
            _ => d.mu2 = format!("{} + {extra}", d.mu2),
        }
        let spec = ProblemSpec::new(&d)?;
        let m = spec.matching()?;
        let s = Solution::build(&spec, SolveOptions { force: true, ..SolveOptions::default() })?;
        let table = s.smooth().expect("smooth part");
        let ladder = discontinuity_ladder(&spec, table)?;
        let g0 = table.break_jump(SegmentKind::G, 0).expect("first left break");
        let p0 = table.break_jump(SegmentKind::P, 0).expect("first right break");
        let (measured, formula) = match name {
            "res25" => (g0.value, ladder.delta[0]),
            "res26" => (g0.d1, ladder.delta[1]),
            "res27" => (g0.d2, ladder.delta[2]),
            _ => (p0.d2, ladder.rho[2]),
        };
        let others = [m.res25, m.res26, m.res27, m.res28].iter().filter(|r| r.abs() > 1e-12).count();
        let rel = (measured - formula).abs() / formula.abs();
        ok &= rel <= 1e-6 && others == 1 && formula != 0.0;
        detail += &format!("; {name} base jump rel err {rel:.1e}");
    }
    Ok((ok, detail))
}

fn recurrence() -> Outcome {
    let (a, b) = (1.5, 0.7);
    let mut worst = 0.0f64;
    let mut links = 0;
    for (slot, extra) in [("mu1", "0.3*t"), ("mu1", "0.3*t^2"), ("mu2", "0.3")] {
        let mut d = standing_wave(a, b, 3.6);
        match slot {
            "mu1" => d.mu1 = format!("{} + {extra}", d.mu1),
            _ => d.mu2 = format!("{} + {extra}", d.mu2),
        }
        let spec = ProblemSpec::new(&d)?;
        let s = Solution::build(&spec, SolveOptions { force: true, ..SolveOptions::default() })?;
        let ladder = discontinuity_ladder(&spec, s.smooth().expect("smooth part"))?;
        let scale = ladder.delta.iter().chain(&ladder.rho).fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 1..=4 {
            for kind in ["g", "p"] {
                let e = ladder
                    .entry(&format!("{kind}{k}.d2"))
                    .ok_or_else(|| Error::InvalidParameter(format!("missing ladder entry {kind}{k}")))?;
                let err = if e.predicted.abs() > 1e-3 * scale {
                    links += 1;
                    e.rel_error()
                } else {
                    e.abs_error() / scale
                };
                worst = worst.max(err);
            }
        }
    }
    Ok((
        worst <= 1e-6 && links >= 8,
        format!("max rel err {worst:.1e} over {links} nonzero links, 4 reflections (tol 1e-6)"),
    ))
}

/// `∂ₜu(plus) − ∂ₜu(minus)` at the middle of every break line of a family.
fn velocity_jumps(sol: &Solution, family: Family) -> Result<Vec<(usize, f64)>, Error> {
    let mut out = Vec::new();
    for line in sol.break_lines()? {
        if line.family != family || line.to.0 - line.from.0 < 1e-9 {
            continue;
        }
        let t = 0.5 * (line.from.0 + line.to.0);
        let x = 0.5 * (line.from.1 + line.to.1);
        let sides = |s| match family {
            Family::Plus => Sides { left: Side::Auto, right: s },
            Family::Minus => Sides { left: s, right: Side::Auto },
        };
        let m = sol.evaluate(t, x, sides(Side::Minus))?;
        let p = sol.evaluate(t, x, sides(Side::Plus))?;
        out.push((line.index, p.1 - m.1));
    }
    Ok(out)
}

fn shock_amplitudes() -> Outcome {
    let v = 1.25;
    let mut d = ProblemDefinition::zero(1.0, 0.8, 1.0, 6.5);
    d.v = v;
    let sol = solve(&d, SolveOptions::default())?;
    let even: Vec<f64> = velocity_jumps(&sol, Family::Plus)?
        .into_iter()
        .filter(|(k, _)| k % 2 == 0)
        .map(|(_, j)| (j - v).abs())
        .collect();
    let fixed = even.iter().fold(0.0f64, |m, e| m.max(*e));
    let mut d = ProblemDefinition::zero(1.0, 0.8, 1.0, 1.6);
    d.gamma = "t/2".into();
    d.v = v;
    let sol = solve(&d, SolveOptions::default())?;
    let left = velocity_jumps(&sol, Family::Minus)?.into_iter().find(|(k, _)| *k == 1);
    let right = velocity_jumps(&sol, Family::Plus)?.into_iter().find(|(k, _)| *k == 2);
    let (ok, reflected) = match (left, right) {
        (Some((_, l)), Some((_, r))) => {
            let e = ((l - 3.0 * v).abs()).max((r - 3.0 * v).abs()) / (3.0 * v);
            (e <= 1e-6, e)
        }
        _ => (false, f64::NAN),
    };
    Ok((
        fixed <= 1e-7 && even.len() >= 3 && ok,
        format!(
            "fixed end: {} even lines, max |jump - v| {fixed:.1e} (tol 1e-7); after reflection at slope 1/2 rel err vs 3v {reflected:.1e} (tol 1e-6)",
            even.len()
        ),
    ))
}

fn conjugation() -> Outcome {
    let mut d = standing_wave(1.5, 0.7, 3.0);
    d.v = 1.0;
    let sol = solve(&d, SolveOptions::default())?;
    let scan = characteristic_jump_scan(&sol, 1e-8, 1e-7)?;
    let value = &scan[0];
    let odd = scan.iter().find(|c| c.name == "velocity_jump_right_odd").expect("odd entry");
    Ok((
        value.passed && odd.passed && odd.samples > 0,
        format!(
            "max |[u]| {:.1e} (tol 1e-8), max |[u_t]| on odd right lines {:.1e} (tol 1e-7)",
            value.max_residual, odd.max_residual
        ),
    ))
}

fn pde_convergence() -> Outcome {
    let sol = solve(&standing_wave(1.5, 0.7, 2.5), SolveOptions::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (checks, conv) = pde_residual_scan(&sol, &[1e-2, 5e-3, 2.5e-3], 200, &mut rng, 1e-7, 0.3)?;
    let orders: Vec<f64> = conv.iter().filter_map(|c| c.order).collect();
    let ok = orders.len() == 2 && orders.iter().all(|p| (p - 2.0).abs() <= 0.3) && checks.iter().all(|c| c.passed);
    Ok((
        ok,
        format!(
            "orders {:?}, residuals {:?}",
            orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>(),
            conv.iter().map(|c| format!("{:.2e}", c.max_residual)).collect::<Vec<_>>()
        ),
    ))
}

fn boundary_residuals() -> Outcome {
    let mut d = standing_wave(1.5, 0.7, 2.5);
    d.v = 1.0;
    let sol = solve(&d, SolveOptions::default())?;
    let scan = boundary_residual_scan(&sol, 200, 1e-4, (1e-8, 1e-6))?;
    Ok((
        scan.iter().all(|c| c.passed) && scan[1].samples > 0,
        format!(
            "dirichlet {:.1e} (tol 1e-8), second condition {:.1e} over {} stencils (tol 1e-6)",
            scan[0].max_residual, scan[1].max_residual, scan[1].samples
        ),
    ))
}

fn gauge() -> Outcome {
    let mut d = travelling_wave(1.5, 0.7, 2.5);
    d.v = 1.0;
    let spec = ProblemSpec::new(&d)?;
    let base = Solution::build(&spec, SolveOptions::default())?.sample_grid(100, 100)?;
    let other = Solution::build(&spec, SolveOptions { c1: 7.3, ..SolveOptions::default() })?.sample_grid(100, 100)?;
    let worst = base
        .points
        .iter()
        .zip(&other.points)
        .filter(|(p, _)| p.inside())
        .fold(0.0f64, |m, (p, q)| m.max((p.u - q.u).abs()));
    Ok((worst <= 1e-12, format!("max change {worst:.1e} on a 100x100 grid (tol 1e-12)")))
}

fn decomposition() -> Outcome {
    let mut d = standing_wave(1.5, 0.7, 2.5);
    d.v = 1.0;
    let full = solve(&d, SolveOptions::default())?.sample_grid(100, 100)?;
    let jump = solve(&d, SolveOptions { parts: Parts::Jump, ..SolveOptions::default() })?.sample_grid(100, 100)?;
    let mut d0 = d.clone();
    d0.v = 0.0;
    let smooth = solve(&d0, SolveOptions::default())?.sample_grid(100, 100)?;
    let mut worst = 0.0f64;
    for ((f, s), j) in full.points.iter().zip(&smooth.points).zip(&jump.points) {
        if f.inside() {
            worst = worst.max((f.u - s.u - j.u).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |u - u(v=0) - u2| {worst:.1e} on a 100x100 grid (tol 1e-12)")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("partition ladders", partition_ladders),
        ("inverse characteristic round trip", inverse_round_trip),
        ("d'Alembert oracle", dalembert),
        ("C2 gluing and base jumps", gluing),
        ("discontinuity recurrence", recurrence),
        ("shock amplitude law", shock_amplitudes),
        ("conjugation conditions", conjugation),
        ("PDE residual convergence", pde_convergence),
        ("boundary residuals", boundary_residuals),
        ("gauge independence", gauge),
        ("decomposition", decomposition),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let status = if ok { "PASS" } else { "FAIL" };
        println!("criterion {:2} {status}  {name}: {detail} [{:.2?}]", k + 1, start.elapsed());
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
