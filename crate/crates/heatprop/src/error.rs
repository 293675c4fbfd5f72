//! Error type shared across the crate.

/// Crate-wide error enum.
///
/// Each variant carries enough context to produce a one-line diagnostic.
/// [`Error::kind`] returns a stable machine-readable slug and
/// [`Error::is_usage`] separates caller mistakes (bad input, bad flags)
/// from domain/numerical failures (horizons, divergence, stiffness);
/// front ends map the two classes to different exit codes.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Expression text failed to tokenize or parse.
    #[error("syntax error at byte {pos}: {msg}")]
    ParseSyntax { pos: usize, msg: String },

    /// Identifier in an expression is not a variable, constant, or known function.
    #[error("unknown name '{name}' at byte {pos}")]
    UnknownName { pos: usize, name: String },

    /// `^` exponent does not reduce to a constant.
    #[error("non-constant exponent at byte {pos}")]
    NonConstantExponent { pos: usize },

    /// Expression evaluation hit a domain violation (division by zero,
    /// non-real power, or a non-finite coefficient value).
    #[error("evaluation domain error in {what} at t = {t}")]
    EvalDomain { what: String, t: f64 },

    /// Diffusion coefficient a(t) vanished where it must not.
    #[error("diffusion coefficient a(t) vanishes at t = {t}")]
    ZeroDiffusion { t: f64 },

    /// Initial data for the characteristic equation is degenerate: a(t0) = 0.
    #[error("invalid initial data: a(t0) = 0 at t0 = {t0}")]
    InvalidInitialData { t0: f64 },

    /// The adaptive integrator's step size underflowed.
    #[error("stiffness: step size underflow near t = {t}")]
    Stiffness { t: f64 },

    /// Requested time lies at or beyond the first zero of the
    /// characteristic function, where the kernel prefactor is non-real.
    #[error("past validity horizon: t = {t} but the characteristic function first vanishes at t = {horizon}")]
    PastHorizon { t: f64, horizon: f64 },

    /// The singularity-resolved coefficient integrals divide by the
    /// characteristic derivative, which vanishes inside the interval.
    #[error("resolved-form breakdown: the characteristic derivative vanishes near t = {t}")]
    ResolvedFormBreakdown { t: f64 },

    /// Fundamental pair has a (numerically) zero Wronskian at the anchor.
    #[error("degenerate fundamental set: Wronskian vanishes at t0 = {t0}")]
    DegenerateFundamentalSet { t0: f64 },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {detail}")]
    QuadratureFailure { detail: String },

    /// Propagator integral does not converge for the given data.
    #[error("divergent integral: {detail}")]
    DivergentIntegral { detail: String },

    /// Kernel evaluation overflowed in linear scale.
    #[error("kernel overflow at (x, y) = ({x}, {y}); use the logarithmic evaluator")]
    Overflow { x: f64, y: f64 },

    /// Initial data produced a non-finite sample.
    #[error("non-finite data sample at y = {y}")]
    NonFiniteData { y: f64 },

    /// Source term produced a non-finite sample.
    #[error("non-finite source sample at (s, x) = ({s}, {x})")]
    NonFiniteSource { s: f64, x: f64 },

    /// Spatial grid construction or validation failed.
    #[error("invalid grid: {detail}")]
    InvalidGrid { detail: String },

    /// Problem-specification JSON failed to parse or validate.
    #[error("invalid problem spec: {detail}")]
    ProblemSpec { detail: String },

    /// A scalar argument is outside its documented range.
    #[error("invalid parameter: {detail}")]
    InvalidParameter { detail: String },

    /// Interpolant evaluated outside the solved interval.
    #[error("t = {t} outside solved interval [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
}

impl Error {
    /// Stable machine-readable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ParseSyntax { .. } => "parse_syntax",
            Error::UnknownName { .. } => "unknown_name",
            Error::NonConstantExponent { .. } => "non_constant_exponent",
            Error::EvalDomain { .. } => "eval_domain",
            Error::ZeroDiffusion { .. } => "zero_diffusion",
            Error::InvalidInitialData { .. } => "invalid_initial_data",
            Error::Stiffness { .. } => "stiffness",
            Error::PastHorizon { .. } => "past_horizon",
            Error::ResolvedFormBreakdown { .. } => "resolved_form_breakdown",
            Error::DegenerateFundamentalSet { .. } => "degenerate_fundamental_set",
            Error::QuadratureFailure { .. } => "quadrature_failure",
            Error::DivergentIntegral { .. } => "divergent_integral",
            Error::Overflow { .. } => "overflow",
            Error::NonFiniteData { .. } => "non_finite_data",
            Error::NonFiniteSource { .. } => "non_finite_source",
            Error::InvalidGrid { .. } => "invalid_grid",
            Error::ProblemSpec { .. } => "problem_spec",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::OutOfRange { .. } => "out_of_range",
        }
    }

    /// True when the error is a caller mistake (malformed input or
    /// arguments) rather than a domain/numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::ParseSyntax { .. }
                | Error::UnknownName { .. }
                | Error::NonConstantExponent { .. }
                | Error::InvalidGrid { .. }
                | Error::ProblemSpec { .. }
                | Error::InvalidParameter { .. }
        )
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_are_distinct_and_stable() {
        let errs = [
            Error::ParseSyntax {
                pos: 0,
                msg: "x".into(),
            },
            Error::UnknownName {
                pos: 0,
                name: "q".into(),
            },
            Error::NonConstantExponent { pos: 0 },
            Error::EvalDomain {
                what: "a".into(),
                t: 0.0,
            },
            Error::ZeroDiffusion { t: 0.0 },
            Error::InvalidInitialData { t0: 0.0 },
            Error::Stiffness { t: 0.0 },
            Error::PastHorizon {
                t: 1.0,
                horizon: 0.5,
            },
            Error::ResolvedFormBreakdown { t: 0.0 },
            Error::DegenerateFundamentalSet { t0: 0.0 },
            Error::QuadratureFailure { detail: "x".into() },
            Error::DivergentIntegral { detail: "x".into() },
            Error::Overflow { x: 0.0, y: 0.0 },
            Error::NonFiniteData { y: 0.0 },
            Error::NonFiniteSource { s: 0.0, x: 0.0 },
            Error::InvalidGrid { detail: "x".into() },
            Error::ProblemSpec { detail: "x".into() },
            Error::InvalidParameter { detail: "x".into() },
            Error::OutOfRange {
                t: 2.0,
                lo: 0.0,
                hi: 1.0,
            },
        ];
        let mut kinds: Vec<&str> = errs.iter().map(|e| e.kind()).collect();
        kinds.sort_unstable();
        kinds.dedup();
        assert_eq!(kinds.len(), 19, "every variant has a unique kind slug");
    }

    #[test]
    fn usage_classification() {
        assert!(Error::ParseSyntax {
            pos: 3,
            msg: "bad".into()
        }
        .is_usage());
        assert!(Error::InvalidParameter {
            detail: "tol".into()
        }
        .is_usage());
        assert!(!Error::PastHorizon {
            t: 1.0,
            horizon: 0.5
        }
        .is_usage());
        assert!(!Error::DivergentIntegral { detail: "d".into() }.is_usage());
        assert!(!Error::Stiffness { t: 0.1 }.is_usage());
    }

    #[test]
    fn messages_are_single_line() {
        let e = Error::PastHorizon {
            t: 1.25,
            horizon: 0.9375,
        };
        let msg = e.to_string();
        assert!(!msg.contains('\n'));
        assert!(msg.contains("0.9375"));
    }
}
