//! Randomized properties of the expression language and the formatting
//! helpers: display output reparses to the same function, symbolic
//! derivatives agree with finite differences, and significant-digit
//! formatting is a faithful, idempotent rounding.

use heatprop::expr::{parse, Expr, Func};
use heatprop::util::format_sig;
use proptest::prelude::*;

fn func_strategy() -> impl Strategy<Value = Func> {
    prop_oneof![
        Just(Func::Sin),
        Just(Func::Cos),
        Just(Func::Sinh),
        Just(Func::Cosh),
        Just(Func::Tanh),
        Just(Func::Exp),
    ]
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-2.0..2.0f64).prop_map(Expr::Const),
        (1u8..=4u8).prop_map(|k| Expr::Const(f64::from(k))),
        Just(Expr::Var(0)),
    ];
    leaf.prop_recursive(3, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            (
                inner.clone(),
                prop_oneof![Just(-2.0), Just(-1.0), Just(0.5), Just(2.0), Just(3.0)]
            )
                .prop_map(|(a, p)| Expr::Pow(Box::new(a), p)),
            (func_strategy(), inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

proptest! {
    /// Rendering a tree and parsing the text back yields the same function:
    /// at every probe point the two trees either produce the same value or
    /// fail in the same way.
    #[test]
    fn display_output_reparses_to_the_same_function(e in expr_strategy()) {
        let text = e.display_with(&["t"]);
        let reparsed = parse(&text, &["t"], &[])
            .unwrap_or_else(|err| panic!("display output {text:?} failed to reparse: {err}"));
        for &t in &[0.17, 0.42, 0.93, 1.31] {
            match (e.eval(&[t]), reparsed.eval(&[t])) {
                (Ok(a), Ok(b)) => {
                    if a.is_finite() || b.is_finite() {
                        prop_assert!(
                            (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                            "eval mismatch for {text:?} at t = {t}: {a} vs {b}"
                        );
                    }
                }
                (Err(_), Err(_)) => {}
                (ra, rb) => prop_assert!(
                    false,
                    "eval outcome mismatch for {text:?} at t = {t}: {ra:?} vs {rb:?}"
                ),
            }
        }
    }

    /// The symbolic derivative matches a five-point finite difference of the
    /// original expression wherever both are well scaled.
    #[test]
    fn symbolic_derivatives_match_finite_differences(
        e in expr_strategy(),
        t in 0.25f64..1.25,
    ) {
        let d = e.differentiate(0);
        let exact = match d.eval(&[t]) {
            Ok(v) if v.is_finite() && v.abs() < 1e5 => v,
            _ => return Ok(()),
        };
        let f_t = match e.eval(&[t]) {
            Ok(v) if v.is_finite() && v.abs() < 1e5 => v,
            _ => return Ok(()),
        };
        let mut best = f64::INFINITY;
        'steps: for h in [1e-3, 3e-4, 1e-4, 3e-5] {
            let mut vals = [0.0f64; 4];
            for (slot, k) in [(-2.0, 0), (-1.0, 1), (1.0, 2), (2.0, 3)] {
                match e.eval(&[t + slot * h]) {
                    Ok(v) if v.is_finite() && v.abs() < 1e8 => vals[k] = v,
                    _ => continue 'steps,
                }
            }
            let fd = (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h);
            best = best.min((fd - exact).abs());
        }
        if best.is_finite() {
            let scale = exact.abs().max(f_t.abs()).max(1.0);
            prop_assert!(
                best <= 1e-3 * scale,
                "derivative of {:?} off by {best:.3e} at t = {t} (exact {exact:.6e})",
                e.display_with(&["t"])
            );
        }
    }

    /// Formatting to n significant digits is a faithful rounding (the parsed
    /// value is within one unit of the last digit) and is idempotent.
    #[test]
    fn significant_digit_formatting_round_trips(
        v in -1e9f64..1e9,
        digits in 6usize..=14,
    ) {
        let s = format_sig(v, digits);
        let back: f64 = s.parse().expect("formatted value parses as f64");
        let tol = 10f64.powi(1 - digits as i32) * v.abs() + 1e-300;
        prop_assert!(
            (back - v).abs() <= tol,
            "{v} formatted to {digits} digits as {s:?} reparses to {back}"
        );
        prop_assert_eq!(format_sig(back, digits), s);
    }
}
