mod common;

use charwave::{ProblemSpec, Side, Sides, Solution, SolveOptions};
use common::{standing_wave, standing_wave_exact, travelling_wave, travelling_wave_exact};

fn build(d: &charwave::ProblemDefinition) -> Solution {
    Solution::build(&ProblemSpec::new(d).unwrap(), SolveOptions::default()).unwrap()
}

#[test]
fn field_matches_exact_solutions() {
    let (a, b) = (1.5, 0.7);
    let s = build(&standing_wave(a, b, 2.5));
    let w = build(&travelling_wave(a, b, 2.5));
    for (sol, exact) in [(&s, standing_wave_exact as fn(f64, f64, f64) -> f64), (&w, travelling_wave_exact)] {
        let field = sol.sample_grid(60, 60).unwrap();
        for p in field.points.iter().filter(|p| p.inside()) {
            assert!((p.u - exact(a, p.t, p.x)).abs() < 1e-11);
        }
    }
}

#[test]
fn derivatives_match_central_differences() {
    let mut d = travelling_wave(1.5, 0.7, 2.5);
    d.v = 1.0;
    let sol = build(&d);
    let h = 1e-5;
    let part = sol.partition().clone();
    for k in 0..40 {
        let t = 0.05 + 2.4 * k as f64 / 40.0;
        let x = 0.3 + 0.6 * ((k * 7) % 11) as f64 / 11.0;
        let near = part.left_breaks.iter().any(|&z| (x - 1.5 * t - z).abs() < 1e-3)
            || part.right_breaks.iter().any(|&z| (x + 1.5 * t - z).abs() < 1e-3);
        if near {
            continue;
        }
        let u = |t: f64, x: f64| sol.evaluate(t, x, Sides::AUTO).unwrap().0;
        let (_, ut, ux) = sol.evaluate(t, x, Sides::AUTO).unwrap();
        let ft = (u(t + h, x) - u(t - h, x)) / (2.0 * h);
        let fx = (u(t, x + h) - u(t, x - h)) / (2.0 * h);
        assert!((ft - ut).abs() <= 1e-5 * (1.0 + ut.abs()), "u_t at ({t}, {x})");
        assert!((fx - ux).abs() <= 1e-5 * (1.0 + ux.abs()), "u_x at ({t}, {x})");
    }
}

#[test]
fn sides_differ_only_on_break_lines() {
    let mut d = standing_wave(1.5, 0.7, 2.0);
    d.v = 1.0;
    let sol = build(&d);
    let minus = Sides::both(Side::Minus);
    let plus = Sides::both(Side::Plus);
    for &(t, x) in &[(0.3, 0.5), (1.1, 0.4), (1.9, 0.8)] {
        assert_eq!(sol.evaluate(t, x, minus).unwrap(), sol.evaluate(t, x, plus).unwrap());
    }
    // on the impact front the velocity differs by v
    let t = 0.4;
    let x = 1.0 - 1.5 * t;
    let jump = sol.evaluate(t, x, plus).unwrap().1 - sol.evaluate(t, x, minus).unwrap().1;
    assert!((jump - 1.0).abs() < 1e-12);
    assert_eq!(sol.evaluate(t, x, Sides::AUTO).unwrap(), sol.evaluate(t, x, minus).unwrap());
}

#[test]
fn grid_is_deterministic_and_labels_regions() {
    let mut d = standing_wave(1.5, 0.7, 2.0);
    d.v = 1.0;
    let sol = build(&d);
    let a = sol.sample_grid(25, 17).unwrap();
    let b = sol.sample_grid(25, 17).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        assert_eq!(p.u.to_bits(), q.u.to_bits());
        if let Some((i, j)) = p.region {
            let r = sol.region(p.t, p.x, Sides::AUTO).unwrap();
            assert_eq!((r.i, r.j), (i, j));
        }
    }
}

#[test]
fn points_outside_the_domain_are_rejected() {
    let sol = build(&standing_wave(1.5, 0.7, 2.0));
    assert!(matches!(sol.evaluate(2.5, 0.5, Sides::AUTO), Err(charwave::Error::HorizonExceeded { .. })));
    assert!(matches!(sol.evaluate(1.0, 1.2, Sides::AUTO), Err(charwave::Error::OutOfDomain { .. })));
    assert!(matches!(sol.evaluate(1.5, 0.1, Sides::AUTO), Err(charwave::Error::OutOfDomain { .. })));
}
