//! The characteristic second-order ODE behind the kernel construction.
//!
//! Every kernel quantity is driven by the scalar function μ(t) solving
//!
//! ```text
//! μ″ = τ(t)·μ′ + 4σ(t)·μ,    μ(t₀) = 0,  μ′(t₀) = 2a(t₀) ≠ 0,
//! ```
//!
//! where τ and σ are the reduced coefficients from
//! [`CoefficientSet::tau_sigma`]. The kernel exists while μ keeps the sign
//! it picks up at t₀; the first return of μ to zero is a hard validity
//! horizon (the kernel's normalization 1/√(2πμ) blows up there).
//!
//! For solvers that need μ anchored at many different initial times (e.g.
//! time-dependent forcing integrated over intermediate times), integrating
//! the ODE once per anchor is wasteful. Instead, a [`FundamentalSet`] holds
//! two independent solutions with Wronskian 1 at a reference time; the
//! anchored solution for any later anchor `s` is the linear combination
//! with μ(s) = 0, μ′(s) = 2a(s), formed in closed form from the basis
//! ([`reanchor`]).

use crate::coeffs::{CoeffExpr, CoefficientSet};
use crate::error::{Error, Result};
use crate::ode::{integrate, HermiteSeries, OdeOptions};

/// Dense solution of the characteristic ODE with the degenerate initial
/// condition μ(t₀) = 0, μ′(t₀) = 2a(t₀).
#[derive(Debug, Clone)]
pub struct CharacteristicSolution {
    t0: f64,
    a0: f64,
    series: HermiteSeries<2>,
}

impl CharacteristicSolution {
    /// Anchor time t₀.
    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Diffusion coefficient at the anchor, a(t₀).
    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// End of the solved interval.
    pub fn t_end(&self) -> f64 {
        self.series.t_end()
    }

    /// μ(t).
    pub fn mu(&self, t: f64) -> Result<f64> {
        Ok(self.series.eval(t)?[0])
    }

    /// (μ(t), μ′(t)).
    pub fn mu_dmu(&self, t: f64) -> Result<(f64, f64)> {
        let y = self.series.eval(t)?;
        Ok((y[0], y[1]))
    }

    /// First t > t₀ where μ returns to zero, if any inside the solved
    /// interval. Located by a node scan, bisection on the dense output, and
    /// a Newton polish with the stored μ′. The anchor zero itself is not
    /// reported.
    pub fn first_mu_zero(&self) -> Option<f64> {
        self.first_component_zero(0)
    }

    /// First t where μ′ changes sign, if any inside the solved interval.
    /// The resolved kernel coefficient formulas divide by μ′, so this marks
    /// where they stop being usable even though μ is still positive.
    pub fn first_dmu_zero(&self) -> Option<f64> {
        self.first_component_zero(1)
    }

    fn first_component_zero(&self, comp: usize) -> Option<f64> {
        let nodes: Vec<(f64, f64)> = self.series.nodes().map(|(t, y, _)| (t, y[comp])).collect();
        for w in nodes.windows(2) {
            let (ta, fa) = w[0];
            let (tb, fb) = w[1];
            if fb == 0.0 {
                return Some(tb);
            }
            // The anchor node has μ = 0 exactly; fa·fb = 0 there, which is
            // correctly not treated as a crossing.
            if fa * fb < 0.0 {
                return Some(self.refine_zero(comp, ta, tb));
            }
        }
        None
    }

    fn refine_zero(&self, comp: usize, mut lo: f64, mut hi: f64) -> f64 {
        let f = |t: f64| self.series.eval(t).map(|y| y[comp]).unwrap_or(f64::NAN);
        let mut flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                return mid;
            }
            if flo * fm < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
            if hi - lo < 1e-14 * hi.abs().max(1.0) {
                break;
            }
        }
        // Newton polish, safeguarded to stay inside the bracket. The
        // derivative of component 0 (μ) is the stored component 1 (μ′); the
        // derivative of μ′ comes from the interpolant slope.
        let mut z = 0.5 * (lo + hi);
        for _ in 0..4 {
            if let Ok((y, dy)) = self.series.eval_both(z) {
                let fv = y[comp];
                let fp = if comp == 0 { y[1] } else { dy[comp] };
                if fp != 0.0 {
                    let z1 = z - fv / fp;
                    if z1 > lo && z1 < hi {
                        z = z1;
                        continue;
                    }
                }
            }
            break;
        }
        z
    }
}

/// Solves the characteristic ODE from `t0` to `t_end > t0`.
///
/// Fails with [`Error::InvalidInitialData`] when a(t₀) = 0 (the degenerate
/// initial slope 2a(t₀) would vanish and no kernel anchor exists there).
pub fn solve_characteristic(
    cs: &CoefficientSet,
    t0: f64,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<CharacteristicSolution> {
    let a0 = cs.eval(t0)?.a;
    if a0 == 0.0 {
        return Err(Error::InvalidInitialData { t0 });
    }
    let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        let (tau, sigma) = cs.tau_sigma(t)?;
        Ok([y[1], tau * y[1] + 4.0 * sigma * y[0]])
    };
    let series = integrate(rhs, t0, [0.0, 2.0 * a0], t_end, opts)?;
    Ok(CharacteristicSolution { t0, a0, series })
}

/// Two independent characteristic solutions over `[t_ref, t_end]` with
/// initial data (1, 0) and (0, 1) at `t_ref`, stored densely as
/// `[μ₁, μ₁′, μ₂, μ₂′]`.
#[derive(Debug, Clone)]
pub struct FundamentalSet {
    t_ref: f64,
    series: HermiteSeries<4>,
    a: CoeffExpr,
}

impl FundamentalSet {
    /// Reference time carrying the basis initial data.
    pub fn t_ref(&self) -> f64 {
        self.t_ref
    }

    /// End of the solved interval.
    pub fn t_end(&self) -> f64 {
        self.series.t_end()
    }

    /// Basis values `[μ₁, μ₁′, μ₂, μ₂′]` at `t`.
    pub fn basis(&self, t: f64) -> Result<[f64; 4]> {
        self.series.eval(t)
    }

    /// Wronskian μ₁μ₂′ − μ₂μ₁′ at `t`. Equals 1 at `t_ref` and stays
    /// nonzero in exact arithmetic.
    pub fn wronskian(&self, t: f64) -> Result<f64> {
        let v = self.basis(t)?;
        Ok(v[0] * v[3] - v[2] * v[1])
    }

    fn checked_wronskian(&self, t: f64) -> Result<f64> {
        let v = self.basis(t)?;
        let w = v[0] * v[3] - v[2] * v[1];
        let scale = (v[0] * v[3]).abs().max((v[2] * v[1]).abs()).max(1e-300);
        if !w.is_finite() || w.abs() < 1e-12 * scale {
            return Err(Error::DegenerateFundamentalSet { t0: t });
        }
        Ok(w)
    }
}

/// Integrates the fundamental pair once over `[t_ref, t_end]` (a single
/// four-state solve, so both solutions share every accepted step).
pub fn solve_fundamental_set(
    cs: &CoefficientSet,
    t_ref: f64,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<FundamentalSet> {
    let rhs = |t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let (tau, sigma) = cs.tau_sigma(t)?;
        Ok([
            y[1],
            tau * y[1] + 4.0 * sigma * y[0],
            y[3],
            tau * y[3] + 4.0 * sigma * y[2],
        ])
    };
    let series = integrate(rhs, t_ref, [1.0, 0.0, 0.0, 1.0], t_end, opts)?;
    Ok(FundamentalSet {
        t_ref,
        series,
        a: cs.a.clone(),
    })
}

/// μ(t) anchored at `t0`, recombined from the basis:
/// `μ = 2a(t₀)/W(t₀) · (μ₁(t₀)μ₂(t) − μ₂(t₀)μ₁(t))`.
pub fn mu_from_fundamental(fs: &FundamentalSet, t0: f64, t: f64) -> Result<f64> {
    let v0 = fs.basis(t0)?;
    let w = fs.checked_wronskian(t0)?;
    let a0 = fs.a.eval(t0)?;
    let v = fs.basis(t)?;
    Ok(2.0 * a0 / w * (v0[0] * v[2] - v0[2] * v[0]))
}

/// Builds the full anchored solution at `s` from the basis, as a dense
/// [`CharacteristicSolution`] over `[s, t_end]`.
///
/// The anchor node carries the exact initial data (0, 2a(s)); subsequent
/// nodes reuse the basis nodes, so no new integration happens.
pub fn reanchor(fs: &FundamentalSet, s: f64) -> Result<CharacteristicSolution> {
    let a_s = fs.a.eval(s)?;
    if a_s == 0.0 {
        return Err(Error::InvalidInitialData { t0: s });
    }
    let w = fs.checked_wronskian(s)?;
    let (v_s, d_s) = fs.series.eval_both(s)?;
    let coef_a = 2.0 * a_s * v_s[0] / w;
    let coef_b = 2.0 * a_s * v_s[2] / w;
    // μ = coef_a·μ₂ − coef_b·μ₁ (zero at s with slope 2a(s) by construction).

    let guard = 1e-10 * (1.0 + s.abs());
    let mut ts = vec![s];
    let mut ys = vec![[0.0, 2.0 * a_s]];
    let mut dys = vec![[2.0 * a_s, coef_a * d_s[3] - coef_b * d_s[1]]];
    for (t, y, dy) in fs.series.nodes() {
        if t <= s + guard {
            continue;
        }
        ts.push(t);
        ys.push([coef_a * y[2] - coef_b * y[0], coef_a * y[3] - coef_b * y[1]]);
        dys.push([
            coef_a * y[3] - coef_b * y[1],
            coef_a * dy[3] - coef_b * dy[1],
        ]);
    }
    if ts.len() < 2 {
        return Err(Error::InvalidParameter {
            detail: format!(
                "anchor {s} leaves no room inside the solved interval ending at {}",
                fs.t_end()
            ),
        });
    }
    let series = HermiteSeries::from_nodes(ts, ys, dys)?;
    Ok(CharacteristicSolution {
        t0: s,
        a0: a_s,
        series,
    })
}

/// Validity horizon of a kernel anchored with `sol`.
#[derive(Debug, Clone, Copy)]
pub struct Horizon {
    /// First zero of μ after the anchor (`INFINITY` if none inside the
    /// solved interval).
    pub t_mu_zero: f64,
    /// First sign change of the quadratic output coefficient γ, if γ
    /// samples were supplied and a change was found (`INFINITY` otherwise).
    /// Beyond this time constant initial data stops being integrable
    /// against the kernel, even though the kernel itself is still valid.
    pub t_gamma_zero: f64,
    /// Whether γ samples were supplied.
    pub gamma_tracked: bool,
}

/// Scans for the horizon times. `gamma_samples` are `(t, γ(t))` pairs in
/// increasing t (typically a coefficient trajectory); the first sign change
/// is refined by linear interpolation.
pub fn validity_horizon(
    sol: &CharacteristicSolution,
    gamma_samples: Option<&[(f64, f64)]>,
) -> Horizon {
    let t_mu_zero = sol.first_mu_zero().unwrap_or(f64::INFINITY);
    let mut t_gamma_zero = f64::INFINITY;
    if let Some(samples) = gamma_samples {
        for w in samples.windows(2) {
            let (ta, ga) = w[0];
            let (tb, gb) = w[1];
            if ga == 0.0 {
                t_gamma_zero = ta;
                break;
            }
            if ga * gb < 0.0 {
                t_gamma_zero = ta + ga * (tb - ta) / (ga - gb);
                break;
            }
        }
    }
    Horizon {
        t_mu_zero,
        t_gamma_zero,
        gamma_tracked: gamma_samples.is_some(),
    }
}
