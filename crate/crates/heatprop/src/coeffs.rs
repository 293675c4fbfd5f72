//! The coefficient model: six time functions a, b, c, d, f, g and the
//! derived characteristic data τ(t), σ(t).
//!
//! The governing operator is
//!
//! ```text
//! u_t = a(t)·u_xx − b(t)·x²·u + c(t)·x·u_x + d(t)·u + f(t)·x·u − g(t)·u_x
//! ```
//!
//! Sign registry (the single most likely user error): the x²-potential term
//! is written with a **minus** (`−b·x²·u`) and the drift term with a
//! **minus** (`−g·u_x`), so `CoefficientSet` stores b and g exactly as they
//! appear behind those minus signs. A PDE `u_t = u_xx + x²u` therefore has
//! `b = −1`, and `u_t = u_xx + u_x` has `g = −1`.

use crate::error::{Error, Result};
use crate::expr::{self, Expr};

/// A closed-form function of the time variable `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffExpr {
    ast: Expr,
}

impl CoeffExpr {
    /// Constant function.
    pub fn constant(v: f64) -> CoeffExpr {
        CoeffExpr {
            ast: Expr::Const(v),
        }
    }

    /// Parses with extra named constants bound (besides the built-in `pi`).
    pub fn parse_with_constants(src: &str, consts: &[(&str, f64)]) -> Result<CoeffExpr> {
        Ok(CoeffExpr {
            ast: expr::parse(src, &["t"], consts)?,
        })
    }

    /// Evaluates at time `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.ast.eval(&[t])
    }

    /// Symbolic derivative d/dt.
    pub fn differentiate(&self) -> CoeffExpr {
        CoeffExpr {
            ast: self.ast.differentiate(0),
        }
    }
}

impl std::fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.ast)
    }
}

/// Parses a coefficient expression in the variable `t`.
pub fn parse_coeff_expr(src: &str) -> Result<CoeffExpr> {
    CoeffExpr::parse_with_constants(src, &[])
}

/// A closed-form function of `(s, x)` used as a non-homogeneous source term.
#[derive(Debug, Clone)]
pub struct SourceExpr {
    ast: Expr,
}

impl SourceExpr {
    /// Evaluates at source time `s` and position `x`.
    pub fn eval(&self, s: f64, x: f64) -> Result<f64> {
        self.ast.eval(&[s, x])
    }
}

impl std::fmt::Display for SourceExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.ast.display_with(&["s", "x"]))
    }
}

/// Parses a source expression in the variables `s` (emission time) and `x`.
pub fn parse_source_expr(src: &str) -> Result<SourceExpr> {
    Ok(SourceExpr {
        ast: expr::parse(src, &["s", "x"], &[])?,
    })
}

/// Point values of all six coefficients plus the symbolic derivatives of
/// a and d, all finite by construction.
#[derive(Debug, Clone, Copy)]
pub struct CoeffValues {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
    pub da: f64,
    pub dd: f64,
}

/// The six coefficient functions of the governing operator, with symbolic
/// derivatives of a and d attached (they enter τ and σ; computing them
/// symbolically avoids pushing finite-difference noise into the
/// characteristic equation).
///
/// Smoothness assumption (documented, not enforced): a and d are
/// continuously differentiable and all six coefficients are continuous on
/// the working time interval. The expression grammar makes this automatic
/// away from isolated domain violations (division by zero, fractional
/// powers of negatives).
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub a: CoeffExpr,
    pub b: CoeffExpr,
    pub c: CoeffExpr,
    pub d: CoeffExpr,
    pub f: CoeffExpr,
    pub g: CoeffExpr,
    /// Symbolic derivative of `a`.
    pub da: CoeffExpr,
    /// Symbolic derivative of `d`.
    pub dd: CoeffExpr,
}

impl CoefficientSet {
    /// Builds a set from the six coefficient expressions; derivatives of
    /// a and d are computed symbolically here.
    pub fn new(
        a: CoeffExpr,
        b: CoeffExpr,
        c: CoeffExpr,
        d: CoeffExpr,
        f: CoeffExpr,
        g: CoeffExpr,
    ) -> CoefficientSet {
        let da = a.differentiate();
        let dd = d.differentiate();
        CoefficientSet {
            a,
            b,
            c,
            d,
            f,
            g,
            da,
            dd,
        }
    }

    /// Parses six expression strings (order a, b, c, d, f, g) with shared
    /// named constants.
    pub fn from_strs(srcs: [&str; 6], consts: &[(&str, f64)]) -> Result<CoefficientSet> {
        let [a, b, c, d, f, g] = srcs;
        Ok(CoefficientSet::new(
            CoeffExpr::parse_with_constants(a, consts)?,
            CoeffExpr::parse_with_constants(b, consts)?,
            CoeffExpr::parse_with_constants(c, consts)?,
            CoeffExpr::parse_with_constants(d, consts)?,
            CoeffExpr::parse_with_constants(f, consts)?,
            CoeffExpr::parse_with_constants(g, consts)?,
        ))
    }

    /// Evaluates every coefficient (and a′, d′) at `t`, checking that all
    /// values are finite. Errors name the offending coefficient.
    pub fn eval(&self, t: f64) -> Result<CoeffValues> {
        let one = |e: &CoeffExpr, name: &str| -> Result<f64> {
            let v = e.eval(t).map_err(|err| match err {
                Error::EvalDomain { .. } => Error::EvalDomain {
                    what: name.to_string(),
                    t,
                },
                other => other,
            })?;
            if !v.is_finite() {
                return Err(Error::EvalDomain {
                    what: name.to_string(),
                    t,
                });
            }
            Ok(v)
        };
        Ok(CoeffValues {
            a: one(&self.a, "a")?,
            b: one(&self.b, "b")?,
            c: one(&self.c, "c")?,
            d: one(&self.d, "d")?,
            f: one(&self.f, "f")?,
            g: one(&self.g, "g")?,
            da: one(&self.da, "a'")?,
            dd: one(&self.dd, "d'")?,
        })
    }

    /// The characteristic-equation data (τ, σ) at time `t`, where the
    /// characteristic equation is μ″ − τ(t)·μ′ − 4σ(t)·μ = 0 with
    ///
    /// ```text
    /// τ = a′/a + 2c − 4d
    /// σ = a·b + c·d − d² + d·a′/(2a) − d′/2
    /// ```
    ///
    /// σ is computed in this expanded form: the compact grouping
    /// d/2·(a′/a − d′/d) divides by d and is spuriously singular whenever
    /// d(t) = 0, which holds identically for most named presets.
    pub fn tau_sigma(&self, t: f64) -> Result<(f64, f64)> {
        let v = self.eval(t)?;
        if v.a == 0.0 {
            return Err(Error::ZeroDiffusion { t });
        }
        let tau = v.da / v.a + 2.0 * v.c - 4.0 * v.d;
        let sigma = v.a * v.b + v.c * v.d - v.d * v.d + v.d * v.da / (2.0 * v.a) - v.dd / 2.0;
        Ok((tau, sigma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn set(srcs: [&str; 6]) -> CoefficientSet {
        CoefficientSet::from_strs(srcs, &[]).unwrap()
    }

    #[test]
    fn classical_tau_sigma_is_zero() {
        let cs = set(["1", "0", "0", "0", "0", "0"]);
        for t in [0.0, 0.5, 2.0, -1.0] {
            let (tau, sigma) = cs.tau_sigma(t).unwrap();
            assert_eq!(tau, 0.0);
            assert_eq!(sigma, 0.0);
        }
    }

    #[test]
    fn cosh_squared_model_tau_sigma() {
        // a = cosh²t, b = −sinh²t, c = sinh 2t, d = ½ sinh 2t
        // gives τ = 2 tanh t and σ = −1/2 identically, i.e. the
        // characteristic equation μ″ − 2 tanh t · μ′ + 2μ = 0.
        let cs = set([
            "cosh(t)^2",
            "-sinh(t)^2",
            "sinh(2*t)",
            "0.5*sinh(2*t)",
            "0",
            "0",
        ]);
        for i in 0..50 {
            let t = -1.2 + 0.05 * i as f64;
            let (tau, sigma) = cs.tau_sigma(t).unwrap();
            assert_relative_eq!(tau, 2.0 * t.tanh(), max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(sigma, -0.5, max_relative = 1e-12);
        }
        // 2·tanh(1) via an independent scalar calculator.
        let (tau, _) = cs.tau_sigma(1.0).unwrap();
        assert_relative_eq!(tau, 1.523_188_311_911_529_7, max_relative = 1e-12);
    }

    #[test]
    fn expanded_sigma_handles_vanishing_d() {
        // a = 1/2, b = 1/2, rest zero: σ = ab = 1/4 without any division
        // by the identically-zero d.
        let cs = set(["0.5", "0.5", "0", "0", "0.5", "0"]);
        let (tau, sigma) = cs.tau_sigma(0.7).unwrap();
        assert_eq!(tau, 0.0);
        assert_relative_eq!(sigma, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn zero_diffusion_is_an_error_naming_t() {
        let cs = set(["t", "0", "0", "0", "0", "0"]);
        match cs.tau_sigma(0.0) {
            Err(Error::ZeroDiffusion { t }) => assert_eq!(t, 0.0),
            other => panic!("expected zero-diffusion error, got {other:?}"),
        }
        assert!(cs.tau_sigma(1.0).is_ok());
    }

    #[test]
    fn symbolic_derivative_of_a_feeds_tau() {
        // a = cosh²t ⇒ a′ = sinh 2t ⇒ a′/a = 2 tanh t.
        let cs = set(["cosh(t)^2", "0", "0", "0", "0", "0"]);
        let v = cs.eval(0.8).unwrap();
        assert_relative_eq!(v.da, (1.6f64).sinh(), max_relative = 1e-13);
        let (tau, _) = cs.tau_sigma(0.8).unwrap();
        assert_relative_eq!(tau, 2.0 * (0.8f64).tanh(), max_relative = 1e-13);
    }

    #[test]
    fn eval_names_the_offending_coefficient() {
        let cs = set(["1/t", "0", "0", "0", "0", "0"]);
        match cs.eval(0.0) {
            Err(Error::EvalDomain { what, t }) => {
                assert_eq!(what, "a");
                assert_eq!(t, 0.0);
            }
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_values_are_domain_errors() {
        let cs = set(["exp(t)", "0", "0", "0", "0", "0"]);
        assert!(matches!(
            cs.eval(1000.0),
            Err(Error::EvalDomain { ref what, .. }) if what == "a"
        ));
    }

    #[test]
    fn source_expr_two_variables() {
        let f = parse_source_expr("x^2 - 2*s").unwrap();
        assert_eq!(f.eval(0.25, 3.0).unwrap(), 8.5);
        let g = parse_source_expr("1").unwrap();
        assert_eq!(g.eval(9.0, -4.0).unwrap(), 1.0);
    }

    #[test]
    fn coeff_expr_display_round_trips() {
        let e = parse_coeff_expr("-(1 + t)^(-2)*sinh(2*t)").unwrap();
        let printed = e.to_string();
        let e2 = parse_coeff_expr(&printed).unwrap();
        for t in [0.2, 1.1, 2.7] {
            assert_relative_eq!(
                e.eval(t).unwrap(),
                e2.eval(t).unwrap(),
                max_relative = 1e-14
            );
        }
    }
}
