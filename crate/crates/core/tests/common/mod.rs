#![allow(dead_code)]

use charwave::ProblemDefinition;

/// `u = sin(x) cos(at)` on `0.2 sin(t) < x < 1`, satisfying every matching condition.
pub fn standing_wave(a: f64, b: f64, horizon: f64) -> ProblemDefinition {
    let mut d = ProblemDefinition::zero(a, b, 1.0, horizon);
    d.gamma = "0.2*sin(t)".into();
    d.phi = "sin(x)".into();
    d.mu1 = format!("sin(0.2*sin(t))*cos({a}*t)");
    d.mu2 = format!("({}*sin(1) + {b}*cos(1))*cos({a}*t)", -a * a);
    d
}

pub fn standing_wave_exact(a: f64, t: f64, x: f64) -> f64 {
    x.sin() * (a * t).cos()
}

/// `u = sin(2(x + at))` on `0.2 sin(t) < x < 1`.
pub fn travelling_wave(a: f64, b: f64, horizon: f64) -> ProblemDefinition {
    let mut d = ProblemDefinition::zero(a, b, 1.0, horizon);
    d.gamma = "0.2*sin(t)".into();
    d.phi = "sin(2*x)".into();
    d.psi = format!("{}*cos(2*x)", 2.0 * a);
    d.mu1 = format!("sin(2*(0.2*sin(t) + {a}*t))");
    d.mu2 = format!("{}*sin(2*(1 + {a}*t)) + {}*cos(2*(1 + {a}*t))", -4.0 * a * a, 2.0 * b);
    d
}

pub fn travelling_wave_exact(a: f64, t: f64, x: f64) -> f64 {
    (2.0 * (x + a * t)).sin()
}
