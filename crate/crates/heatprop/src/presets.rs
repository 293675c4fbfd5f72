//! Named coefficient models with known closed-form solutions, plus the JSON
//! problem description consumed by the command-line tool.
//!
//! Each preset carries reference data — the characteristic solution μ, the
//! kernel anchored at t₀ = 0, and the reduced coefficients (τ, σ) — so that
//! the numerical pipeline can be cross-checked without duplicating any of
//! its own code paths.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};

/// The built-in coefficient models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetKind {
    /// Constant diffusion `a`, everything else zero.
    Classical,
    /// Constant diffusion `a` with a linear source term `f·x·u`.
    LinearPotential,
    /// Diffusion and repulsive quadratic potential `a`, forcing
    /// `f = ω·cosh((2a−1)t)`, `g = −ω·sinh((2a−1)t)`.
    Hyperbolic,
    /// `a = b = 1/2` with constant forcing `f = ω` (shifted hyperbolic
    /// Mehler kernel).
    HyperbolicHalf,
    /// `a = 1/2, b = −1/2` with constant forcing `f = ω` (shifted
    /// trigonometric Mehler kernel).
    Oscillator,
    /// Growing diffusion `a = cosh²t` with matched drift terms.
    CoshModel,
    /// Decaying diffusion `a = cos²t` with matched drift terms.
    CosModel,
}

impl PresetKind {
    /// Every preset, in listing order.
    pub fn all() -> [PresetKind; 7] {
        [
            PresetKind::Classical,
            PresetKind::LinearPotential,
            PresetKind::Hyperbolic,
            PresetKind::HyperbolicHalf,
            PresetKind::Oscillator,
            PresetKind::CoshModel,
            PresetKind::CosModel,
        ]
    }

    /// The stable name used on the command line and in problem files.
    pub fn name(self) -> &'static str {
        match self {
            PresetKind::Classical => "classical",
            PresetKind::LinearPotential => "linear_potential",
            PresetKind::Hyperbolic => "hyperbolic",
            PresetKind::HyperbolicHalf => "hyperbolic_half",
            PresetKind::Oscillator => "oscillator",
            PresetKind::CoshModel => "cosh_model",
            PresetKind::CosModel => "cos_model",
        }
    }

    fn from_name(name: &str) -> Option<PresetKind> {
        PresetKind::all().into_iter().find(|k| k.name() == name)
    }

    /// Tunable parameters and their default values.
    pub fn default_params(self) -> &'static [(&'static str, f64)] {
        match self {
            PresetKind::Classical => &[("a", 1.0)],
            PresetKind::LinearPotential => &[("a", 1.0), ("f", 1.0)],
            PresetKind::Hyperbolic => &[("a", 1.0), ("omega", 0.5)],
            PresetKind::HyperbolicHalf | PresetKind::Oscillator => &[("omega", 0.5)],
            PresetKind::CoshModel | PresetKind::CosModel => &[],
        }
    }

    /// One-line description of where the resolved kernel stays valid.
    pub fn validity_note(self) -> &'static str {
        match self {
            PresetKind::Classical | PresetKind::LinearPotential => "valid for all t > t0",
            PresetKind::Hyperbolic => "valid for all t > t0 (a > 0)",
            PresetKind::HyperbolicHalf => "valid for all t > t0",
            PresetKind::Oscillator => "resolved form valid for t - t0 < pi/2",
            PresetKind::CoshModel => {
                "kernel valid while mu > 0; constant data stays integrable until \
                 tan(t)*tanh(t) = 1 (t ~ 0.9376 from t0 = 0)"
            }
            PresetKind::CosModel => {
                "diffusion cos^2(t) vanishes at t = pi/2; integrate within one window"
            }
        }
    }
}

/// Embeds a parameter value into a coefficient expression string.
/// `{:e}` keeps full precision and round-trips through the parser.
fn lit(v: f64) -> String {
    format!("{v:e}")
}

/// A fully instantiated preset: resolved parameter values plus the parsed
/// coefficient set.
#[derive(Debug, Clone)]
pub struct Preset {
    kind: PresetKind,
    params: BTreeMap<String, f64>,
    coeffs: CoefficientSet,
}

impl Preset {
    /// Builds `kind` with `overrides` applied on top of the defaults.
    /// Unknown or non-finite parameter values are rejected.
    pub fn build(kind: PresetKind, overrides: &BTreeMap<String, f64>) -> Result<Preset> {
        let mut params: BTreeMap<String, f64> = kind
            .default_params()
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect();
        for (key, &value) in overrides {
            if !params.contains_key(key.as_str()) {
                let known: Vec<&str> = kind.default_params().iter().map(|&(k, _)| k).collect();
                return Err(Error::InvalidParameter {
                    detail: format!(
                        "preset '{}' has no parameter '{key}' (available: {})",
                        kind.name(),
                        if known.is_empty() {
                            "none".to_string()
                        } else {
                            known.join(", ")
                        }
                    ),
                });
            }
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    detail: format!("parameter '{key}' must be finite, got {value}"),
                });
            }
            params.insert(key.clone(), value);
        }
        let coeffs = build_coeffs(kind, &params)?;
        Ok(Preset {
            kind,
            params,
            coeffs,
        })
    }

    /// Builds a preset from its command-line name.
    pub fn by_name(name: &str, overrides: &BTreeMap<String, f64>) -> Result<Preset> {
        let kind = PresetKind::from_name(name).ok_or_else(|| Error::InvalidParameter {
            detail: format!(
                "unknown preset '{name}' (available: {})",
                PresetKind::all()
                    .iter()
                    .map(|k| k.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        })?;
        Preset::build(kind, overrides)
    }

    pub fn kind(&self) -> PresetKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Resolved parameter values (defaults merged with overrides).
    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> CoefficientSet {
        self.coeffs
    }

    fn param(&self, key: &str) -> f64 {
        self.params[key]
    }

    /// Closed-form characteristic solution μ(t; t₀) where one is known.
    ///
    /// For the constant-coefficient models the formula holds for every
    /// anchor; for the decaying-diffusion model it is only known at t₀ = 0.
    pub fn analytic_mu(&self, t0: f64, t: f64) -> Option<f64> {
        let dt = t - t0;
        match self.kind {
            PresetKind::Classical | PresetKind::LinearPotential => Some(2.0 * self.param("a") * dt),
            PresetKind::Hyperbolic => Some((2.0 * self.param("a") * dt).sinh()),
            PresetKind::HyperbolicHalf => Some(dt.sinh()),
            PresetKind::Oscillator => Some(dt.sin()),
            PresetKind::CoshModel => {
                let m1 = |t: f64| t.cos() * t.sinh() + t.sin() * t.cosh();
                let m2 = |t: f64| t.sin() * t.sinh() - t.cos() * t.cosh();
                Some(m1(t0) * m2(t) - m2(t0) * m1(t))
            }
            PresetKind::CosModel => {
                if t0.abs() < 1e-12 {
                    Some(t.cos() * t.sinh() + t.sin() * t.cosh())
                } else {
                    None
                }
            }
        }
    }

    /// Closed-form `ln K(x, y; t, 0)` where one is known. Returns `None`
    /// outside the validity window, or for parameter values without a
    /// reference formula (the repulsive-potential model needs `a = 1`).
    pub fn analytic_log_kernel(&self, x: f64, y: f64, t: f64) -> Option<f64> {
        use std::f64::consts::PI;
        if !(t > 0.0) {
            return None;
        }
        match self.kind {
            PresetKind::Classical => {
                let a = self.param("a");
                Some(-0.5 * (4.0 * PI * a * t).ln() - (x - y) * (x - y) / (4.0 * a * t))
            }
            PresetKind::LinearPotential => {
                let a = self.param("a");
                let f = self.param("f");
                Some(
                    -0.5 * (4.0 * PI * a * t).ln() - (x - y) * (x - y) / (4.0 * a * t)
                        + f * (x + y) * t / 2.0
                        + a * f * f * t * t * t / 12.0,
                )
            }
            PresetKind::Hyperbolic => {
                if (self.param("a") - 1.0).abs() > 1e-12 {
                    return None;
                }
                let om = self.param("omega");
                let s2 = (2.0 * t).sinh();
                let c2 = (2.0 * t).cosh();
                let sh = (t / 2.0).sinh();
                Some(
                    -0.5 * (2.0 * PI * s2).ln() - ((x * x + y * y) * c2 - 2.0 * x * y) / (2.0 * s2)
                        + 2.0 * om * (x * sh + y * (1.5 * t).sinh()) * sh / s2
                        - 2.0 * om * om * c2 * sh.powi(4) / s2
                        + om * om / 2.0 * (t - 2.0 * t.sinh() + 0.5 * s2),
                )
            }
            PresetKind::HyperbolicHalf => {
                let om = self.param("omega");
                let (xs, ys) = (x - om, y - om);
                Some(
                    om * om * t / 2.0
                        - 0.5 * (2.0 * PI * t.sinh()).ln()
                        - ((xs * xs + ys * ys) * t.cosh() - 2.0 * xs * ys) / (2.0 * t.sinh()),
                )
            }
            PresetKind::Oscillator => {
                if t >= PI {
                    return None;
                }
                let om = self.param("omega");
                let (xs, ys) = (x + om, y + om);
                Some(
                    -om * om * t / 2.0
                        - 0.5 * (2.0 * PI * t.sin()).ln()
                        - ((xs * xs + ys * ys) * t.cos() - 2.0 * xs * ys) / (2.0 * t.sin()),
                )
            }
            PresetKind::CoshModel | PresetKind::CosModel => {
                let m1 = t.cos() * t.sinh() + t.sin() * t.cosh();
                if m1 <= 0.0 {
                    return None;
                }
                // The two models share a kernel with x and y exchanged.
                let sign = if self.kind == PresetKind::CoshModel {
                    1.0
                } else {
                    -1.0
                };
                Some(
                    -0.5 * (2.0 * PI * m1).ln()
                        + (sign * (y * y - x * x) * t.sin() * t.sinh() + 2.0 * x * y
                            - (x * x + y * y) * t.cos() * t.cosh())
                            / (2.0 * m1),
                )
            }
        }
    }

    /// Reduced characteristic coefficients (τ, σ) in closed form, for
    /// checking the symbolic reduction `μ″ = τ·μ′ + 4σ·μ`.
    pub fn reference_tau_sigma(&self, t: f64) -> Option<(f64, f64)> {
        match self.kind {
            PresetKind::Classical | PresetKind::LinearPotential => Some((0.0, 0.0)),
            PresetKind::Hyperbolic => {
                let a = self.param("a");
                Some((0.0, a * a))
            }
            PresetKind::HyperbolicHalf => Some((0.0, 0.25)),
            PresetKind::Oscillator => Some((0.0, -0.25)),
            PresetKind::CoshModel => Some((2.0 * t.tanh(), -0.5)),
            PresetKind::CosModel => Some((-2.0 * t.tan(), 0.5)),
        }
    }
}

fn build_coeffs(kind: PresetKind, params: &BTreeMap<String, f64>) -> Result<CoefficientSet> {
    let strs: [String; 6] = match kind {
        PresetKind::Classical => {
            let a = lit(params["a"]);
            [
                a,
                "0".into(),
                "0".into(),
                "0".into(),
                "0".into(),
                "0".into(),
            ]
        }
        PresetKind::LinearPotential => {
            let a = lit(params["a"]);
            let f = lit(params["f"]);
            [a, "0".into(), "0".into(), "0".into(), f, "0".into()]
        }
        PresetKind::Hyperbolic => {
            let a = params["a"];
            let om = params["omega"];
            let rate = lit(2.0 * a - 1.0);
            [
                lit(a),
                lit(a),
                "0".into(),
                "0".into(),
                format!("{}*cosh({rate}*t)", lit(om)),
                format!("{}*sinh({rate}*t)", lit(-om)),
            ]
        }
        PresetKind::HyperbolicHalf => {
            let om = lit(params["omega"]);
            [
                "0.5".into(),
                "0.5".into(),
                "0".into(),
                "0".into(),
                om,
                "0".into(),
            ]
        }
        PresetKind::Oscillator => {
            let om = lit(params["omega"]);
            [
                "0.5".into(),
                "-0.5".into(),
                "0".into(),
                "0".into(),
                om,
                "0".into(),
            ]
        }
        PresetKind::CoshModel => [
            "cosh(t)^2".into(),
            "-sinh(t)^2".into(),
            "sinh(2*t)".into(),
            "0.5*sinh(2*t)".into(),
            "0".into(),
            "0".into(),
        ],
        PresetKind::CosModel => [
            "cos(t)^2".into(),
            "-sin(t)^2".into(),
            "-sin(2*t)".into(),
            "-0.5*sin(2*t)".into(),
            "0".into(),
            "0".into(),
        ],
    };
    let refs: [&str; 6] = [&strs[0], &strs[1], &strs[2], &strs[3], &strs[4], &strs[5]];
    CoefficientSet::from_strs(refs, &[])
}

/// JSON problem description selecting a preset by name.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub preset: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub t0: f64,
}

/// JSON problem description giving the six coefficients as expressions in
/// `t` (omitted ones default to zero; `pi` is available as a constant).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpec {
    pub a: String,
    #[serde(default = "zero_expr")]
    pub b: String,
    #[serde(default = "zero_expr")]
    pub c: String,
    #[serde(default = "zero_expr")]
    pub d: String,
    #[serde(default = "zero_expr")]
    pub f: String,
    #[serde(default = "zero_expr")]
    pub g: String,
    #[serde(default)]
    pub t0: f64,
}

fn zero_expr() -> String {
    "0".to_string()
}

/// A problem read from JSON: either a preset reference or explicit
/// coefficient expressions.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Preset(PresetSpec),
    Explicit(ExplicitSpec),
}

impl ProblemSpec {
    /// Parses a problem from JSON text.
    pub fn from_json(text: &str) -> Result<ProblemSpec> {
        serde_json::from_str(text).map_err(|e| Error::ProblemSpec {
            detail: format!(
                "expected {{\"preset\", \"params\"?, \"t0\"?}} or {{\"a\"..\"g\", \"t0\"?}}: {e}"
            ),
        })
    }

    /// Resolves the description into a coefficient set and anchor time.
    pub fn build(&self) -> Result<(CoefficientSet, f64)> {
        match self {
            ProblemSpec::Preset(spec) => {
                if !spec.t0.is_finite() {
                    return Err(Error::ProblemSpec {
                        detail: format!("t0 must be finite, got {}", spec.t0),
                    });
                }
                let preset = Preset::by_name(&spec.preset, &spec.params)?;
                Ok((preset.into_coefficients(), spec.t0))
            }
            ProblemSpec::Explicit(spec) => {
                if !spec.t0.is_finite() {
                    return Err(Error::ProblemSpec {
                        detail: format!("t0 must be finite, got {}", spec.t0),
                    });
                }
                let consts = [("pi", std::f64::consts::PI)];
                let cs = CoefficientSet::from_strs(
                    [&spec.a, &spec.b, &spec.c, &spec.d, &spec.f, &spec.g],
                    &consts,
                )?;
                Ok((cs, spec.t0))
            }
        }
    }
}
