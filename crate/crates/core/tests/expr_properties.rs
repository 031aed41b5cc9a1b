use charwave::expr::{differentiate, parse_expression};
use proptest::prelude::*;

/// Random expressions in `x` built from operations that stay finite on `[-1, 1]`.
fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        (-3i32..=3).prop_map(|k| format!("{}", k as f64 / 2.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.prop_map(|a| format!("sqrt(1 + ({a})^2)")),
        ]
    })
}

proptest! {
    #[test]
    fn derivative_matches_central_difference(text in expression(), x in -1.0f64..1.0) {
        let e = parse_expression(&text, &["x"]).unwrap();
        let d = differentiate(&e, "x");
        let h = 1e-5;
        let fd = (e.eval(&[x + h]).unwrap() - e.eval(&[x - h]).unwrap()) / (2.0 * h);
        let exact = d.eval(&[x]).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "{text}: {fd} vs {exact}");
    }

    #[test]
    fn printing_and_reparsing_preserves_values(text in expression(), x in -1.0f64..1.0) {
        let e = parse_expression(&text, &["x"]).unwrap();
        let again = parse_expression(&e.to_string(), &["x"]).unwrap();
        let (u, v) = (e.eval(&[x]).unwrap(), again.eval(&[x]).unwrap());
        prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()), "{text} -> {e}");
    }
}
