//! Applying the kernel to initial data, and the non-homogeneous solver.
//!
//! The homogeneous solution of the Cauchy problem is
//! `u(x, t) = ∫ K(x, y; t, t₀) u₀(y) dy`. Because K is a single Gaussian in
//! y, each supported data shape gets its own integration strategy:
//!
//! - constant data: closed form (a Gaussian integral), valid while the
//!   y-quadratic coefficient γ is negative;
//! - point mass at y₀: the kernel value itself;
//! - gridded data: exact piecewise-linear model integrated cell by cell
//!   with a fixed Gauss–Legendre rule;
//! - arbitrary callables: Gauss–Hermite after completing the square
//!   (γ < 0), or adaptive quadrature on a tail-tested window (γ ≥ 0).
//!
//! A source term F(t, x) enters by time slicing:
//! `u = H(t, t₀)u₀ + ∫ H(t, s) F(s, ·) ds`, with the s-integral done by
//! per-panel Gauss–Legendre and one re-anchored kernel per node
//! ([`duhamel_solve`]).

use std::fmt;
use std::sync::Arc;

use crate::characteristic::{reanchor, solve_fundamental_set};
use crate::coeffs::{CoefficientSet, SourceExpr};
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::kernel::{HeatKernel, KernelEngine};
use crate::ode::OdeOptions;
use crate::quad::{gk_adaptive, GaussHermite, GaussLegendre};
use crate::util::parallel_map;

/// Natural-log overflow threshold for `exp` in f64.
const LOG_OVERFLOW: f64 = 709.0;

/// Initial data shapes the propagator understands.
#[derive(Clone)]
pub enum InitialData {
    /// u₀ ≡ v.
    Constant(f64),
    /// u₀ = δ(x − x₀).
    Delta { x0: f64 },
    /// Piecewise-linear data on a uniform grid, zero outside it.
    Grid(GridField),
    /// Arbitrary pointwise data.
    Callable(Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>),
}

impl InitialData {
    /// Wraps a plain closure as callable data.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        InitialData::Callable(Arc::new(move |y| Ok(f(y))))
    }
}

impl fmt::Debug for InitialData {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Constant(v) => write!(fm, "Constant({v})"),
            InitialData::Delta { x0 } => write!(fm, "Delta {{ x0: {x0} }}"),
            InitialData::Grid(g) => write!(
                fm,
                "Grid({} points on [{}, {}])",
                g.len(),
                g.x_min(),
                g.x_max()
            ),
            InitialData::Callable(_) => write!(fm, "Callable(..)"),
        }
    }
}

/// Shared numerical knobs for the solvers.
#[derive(Debug, Clone, Copy)]
pub struct NumericParams {
    /// ODE tolerance for characteristic and auxiliary integrations.
    pub tol: f64,
    /// Quadrature tolerance for kernel coefficients and data integrals.
    pub qtol: f64,
    /// Gauss–Hermite order for callable data with γ < 0.
    pub gh_order: usize,
}

impl Default for NumericParams {
    fn default() -> Self {
        NumericParams {
            tol: 1e-10,
            qtol: 1e-10,
            gh_order: 64,
        }
    }
}

/// The quadratic-in-x log coefficients of the constant-data solution:
/// for u₀ ≡ v, `ln(u/v) = A·x² + B·x + C`. Requires γ < 0.
pub fn constant_data_log_coeffs(hk: &HeatKernel) -> Result<(f64, f64, f64)> {
    let c = hk.coefficients();
    if !(c.gamma < 0.0) {
        return Err(Error::DivergentIntegral {
            detail: format!(
                "constant data needs gamma < 0, got gamma = {:.6e} at t = {}",
                c.gamma, c.t
            ),
        });
    }
    let g4 = 4.0 * c.gamma;
    let qa = (4.0 * c.alpha * c.gamma - c.beta * c.beta) / g4;
    let qb = (2.0 * c.gamma * c.delta - c.beta * c.epsilon) / (2.0 * c.gamma);
    let qc =
        (4.0 * c.gamma * c.kappa - c.epsilon * c.epsilon) / g4 - 0.5 * (-2.0 * c.mu * c.gamma).ln();
    Ok((qa, qb, qc))
}

/// Closed-form solution for constant initial data u₀ ≡ v.
pub fn solve_constant_data(hk: &HeatKernel, v: f64, x: f64) -> Result<f64> {
    let (qa, qb, qc) = constant_data_log_coeffs(hk)?;
    let lg = qa * x * x + qb * x + qc;
    if lg > LOG_OVERFLOW {
        return Err(Error::Overflow { x, y: f64::NAN });
    }
    Ok(v * lg.exp())
}

/// Kernel applier for one fixed (t₀, t) pair.
#[derive(Debug, Clone)]
pub struct Propagator {
    hk: HeatKernel,
    gh: GaussHermite,
    gl: GaussLegendre,
    qtol: f64,
}

impl Propagator {
    /// Wraps a kernel with the given numerical parameters.
    pub fn new(hk: HeatKernel, params: &NumericParams) -> Self {
        Propagator {
            hk,
            gh: GaussHermite::new(params.gh_order.max(2)),
            gl: GaussLegendre::new(4),
            qtol: params.qtol,
        }
    }

    /// The wrapped kernel.
    pub fn kernel(&self) -> &HeatKernel {
        &self.hk
    }

    /// u(x) = ∫ K(x, y) u₀(y) dy for the given data shape.
    pub fn apply(&self, data: &InitialData, x: f64) -> Result<f64> {
        match data {
            InitialData::Constant(v) => solve_constant_data(&self.hk, *v, x),
            InitialData::Delta { x0 } => self.hk.eval(x, *x0),
            InitialData::Grid(g) => self.apply_grid(g, x),
            InitialData::Callable(f) => self.apply_callable(f.as_ref(), x),
        }
    }

    /// [`Propagator::apply`] over many output points, fanned out over
    /// `threads` threads.
    pub fn apply_many(&self, data: &InitialData, xs: &[f64], threads: usize) -> Result<Vec<f64>> {
        parallel_map(xs, threads, |&x| self.apply(data, x))
            .into_iter()
            .collect()
    }

    fn apply_grid(&self, g: &GridField, x: f64) -> Result<f64> {
        // The data model is exactly piecewise linear, so integrate cell by
        // cell; a fixed low-order rule per cell is already far below the
        // cell-size error of the data model itself.
        let xs = g.xs();
        let vs = g.values();
        let mut acc = 0.0;
        for i in 0..xs.len() - 1 {
            if vs[i] == 0.0 && vs[i + 1] == 0.0 {
                continue;
            }
            let (ya, yb) = (xs[i], xs[i + 1]);
            let (va, vb) = (vs[i], vs[i + 1]);
            let w = yb - ya;
            acc += self.gl.integrate(ya, yb, |y| {
                let lin = va + (vb - va) * (y - ya) / w;
                Ok(self.hk.eval(x, y)? * lin)
            })?;
        }
        Ok(acc)
    }

    fn apply_callable(
        &self,
        f: &(dyn Fn(f64) -> Result<f64> + Send + Sync),
        x: f64,
    ) -> Result<f64> {
        let c = self.hk.coefficients();
        if c.gamma < 0.0 {
            // Complete the square in y: γy² + (βx + ε)y peaks at
            // m = −(βx + ε)/(2γ) with width 1/√(−γ).
            let b = c.beta * x + c.epsilon;
            let m = -b / (2.0 * c.gamma);
            let root = (-c.gamma).sqrt();
            let log_pref = self.hk.log_eval(x, 0.0) + b * b / (-4.0 * c.gamma) - root.ln();
            if log_pref > LOG_OVERFLOW {
                return Err(Error::Overflow { x, y: m });
            }
            let pref = log_pref.exp();
            let sum = self.gh.integrate(|s| f(m + s / root))?;
            if !sum.is_finite() {
                return Err(Error::QuadratureFailure {
                    detail: format!("data integral is not finite near y = {m}"),
                });
            }
            Ok(pref * sum)
        } else {
            // γ ≥ 0: the kernel does not decay in y by itself. Find a
            // window outside which the product K·u₀ is negligible, then
            // integrate adaptively; if no such window exists the integral
            // genuinely diverges.
            let psi = |y: f64| -> Result<f64> {
                let v = f(y)?;
                if v == 0.0 {
                    return Ok(0.0);
                }
                let lk = self.hk.log_eval(x, y) + v.abs().ln();
                if lk > LOG_OVERFLOW {
                    return Err(Error::Overflow { x, y });
                }
                Ok(v.signum() * lk.exp())
            };
            // Window search compares magnitudes in log space so that a
            // growing product reads as "no window" instead of overflowing.
            let log_mag = |y: f64| -> Result<f64> {
                let v = f(y)?;
                if v == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(self.hk.log_eval(x, y) + v.abs().ln())
            };
            let log_center = log_mag(x)?.max(log_mag(0.0)?).max(1e-120f64.ln());
            let cutoff = log_center + 1e-16f64.ln();
            let mut window = None;
            for k in 0..=11 {
                let yw = (1u64 << k) as f64;
                if log_mag(yw)? <= cutoff && log_mag(-yw)? <= cutoff {
                    window = Some(yw);
                    break;
                }
            }
            let yw = window.ok_or_else(|| Error::DivergentIntegral {
                detail: format!(
                    "gamma = {:.6e} >= 0 and the data does not decay fast enough \
                     for the integral to converge",
                    c.gamma
                ),
            })?;
            let r = gk_adaptive(|y| Ok([psi(y)?]), -2.0 * yw, 2.0 * yw, self.qtol, 1024)?;
            Ok(r.value[0])
        }
    }
}

/// One-call convenience: `∫ K(x, y) u₀(y) dy` for a prebuilt kernel.
pub fn apply_propagator(
    hk: &HeatKernel,
    data: &InitialData,
    x: f64,
    params: &NumericParams,
) -> Result<f64> {
    Propagator::new(*hk, params).apply(data, x)
}

/// Solves the non-homogeneous problem
/// `u_t = L u + F(t, x)`, `u(·, t₀) = u₀`, at time `t` on the points `xs`,
/// via `u = H(t, t₀)u₀ + ∫ H(t, s) F(s, ·) ds`.
///
/// The s-integral uses `n_slices` panels with a 4-point Gauss–Legendre rule
/// each. All kernels anchored at interior times come from one fundamental
/// pair ([`solve_fundamental_set`] + [`reanchor`]), so the characteristic
/// ODE is integrated once regardless of the slice count. Work is fanned out
/// over `threads` threads across quadrature nodes.
#[allow(clippy::too_many_arguments)]
pub fn duhamel_solve(
    cs: &CoefficientSet,
    t0: f64,
    u0: &InitialData,
    source: &SourceExpr,
    xs: &[f64],
    t: f64,
    n_slices: usize,
    params: &NumericParams,
    threads: usize,
) -> Result<Vec<f64>> {
    if !(t > t0) {
        return Err(Error::OutOfRange {
            t,
            lo: t0,
            hi: f64::INFINITY,
        });
    }
    if n_slices == 0 {
        return Err(Error::InvalidParameter {
            detail: "time slicing needs at least one panel".to_string(),
        });
    }
    let opts = OdeOptions::with_tol(params.tol);
    let fs = solve_fundamental_set(cs, t0, t, &opts)?;

    // Homogeneous part.
    let sol0 = reanchor(&fs, t0)?;
    let eng0 = KernelEngine::new(cs, sol0, &opts)?;
    let hk0 = eng0.kernel(t, params.qtol)?;
    let mut total = Propagator::new(hk0, params).apply_many(u0, xs, threads)?;

    // Quadrature nodes in s over [t₀, t].
    let gl = GaussLegendre::new(4);
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(4 * n_slices);
    let width = (t - t0) / n_slices as f64;
    for j in 0..n_slices {
        let (sa, sb) = (t0 + width * j as f64, t0 + width * (j + 1) as f64);
        let (cm, hw) = (0.5 * (sa + sb), 0.5 * (sb - sa));
        for (&z, &w) in gl.nodes().iter().zip(gl.weights()) {
            nodes.push((cm + hw * z, w * hw));
        }
    }

    // One re-anchored kernel per node; each contributes w·[H(t,s)F(s,·)](x).
    let contributions = parallel_map(&nodes, threads, |&(s, w)| -> Result<Vec<f64>> {
        let sol = reanchor(&fs, s)?;
        let eng = KernelEngine::new(cs, sol, &opts)?;
        let hk = eng.kernel(t, params.qtol)?;
        let prop = Propagator::new(hk, params);
        let src = source.clone();
        let data = InitialData::Callable(Arc::new(move |y: f64| {
            let v = src.eval(s, y)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteSource { s, x: y });
            }
            Ok(v)
        }));
        let vals = prop.apply_many(&data, xs, 1)?;
        Ok(vals.into_iter().map(|v| w * v).collect())
    });
    for piece in contributions {
        let piece = piece?;
        for (acc, v) in total.iter_mut().zip(piece) {
            *acc += v;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::parse_source_expr;
    use crate::kernel::heat_kernel;
    use std::f64::consts::PI;

    fn coeffs(list: [&str; 6]) -> CoefficientSet {
        CoefficientSet::from_strs(list, &[]).unwrap()
    }

    fn params() -> NumericParams {
        NumericParams {
            tol: 1e-12,
            qtol: 1e-12,
            gh_order: 64,
        }
    }

    #[test]
    fn constant_data_is_steady_for_pure_diffusion() {
        let cs = coeffs(["1", "0", "0", "0", "0", "0"]);
        let hk = heat_kernel(&cs, 0.0, 0.37, 1e-12, 1e-12).unwrap();
        let (qa, qb, qc) = constant_data_log_coeffs(&hk).unwrap();
        assert!(qa.abs() < 1e-12 && qb.abs() < 1e-12 && qc.abs() < 1e-12);
        let u = solve_constant_data(&hk, 2.5, 1.7).unwrap();
        assert!((u - 2.5).abs() < 1e-12);
        let prop = Propagator::new(hk, &params());
        let u = prop.apply(&InitialData::Constant(2.5), -0.4).unwrap();
        assert!((u - 2.5).abs() < 1e-12);
    }

    #[test]
    fn constant_data_under_linear_forcing_grows_exponentially() {
        // a = 1, f = 1: u = v·exp(t·x + t³/3).
        let cs = coeffs(["1", "0", "0", "0", "1", "0"]);
        let t = 0.6;
        let hk = heat_kernel(&cs, 0.0, t, 1e-12, 1e-12).unwrap();
        let (qa, qb, qc) = constant_data_log_coeffs(&hk).unwrap();
        assert!(qa.abs() < 1e-11, "qa = {qa}");
        assert!((qb - t).abs() < 1e-11, "qb = {qb}");
        assert!((qc - t * t * t / 3.0).abs() < 1e-11, "qc = {qc}");
        let u = solve_constant_data(&hk, 1.3, 0.8).unwrap();
        assert!((u - 1.3 * (t * 0.8 + t * t * t / 3.0).exp()).abs() < 1e-10);
    }

    #[test]
    fn point_mass_data_returns_the_kernel_value() {
        let cs = coeffs(["1", "0", "0", "0", "0", "0"]);
        let t = 0.45;
        let hk = heat_kernel(&cs, 0.0, t, 1e-12, 1e-12).unwrap();
        let prop = Propagator::new(hk, &params());
        let u = prop.apply(&InitialData::Delta { x0: 0.3 }, -0.2).unwrap();
        let exact = (4.0 * PI * t).powf(-0.5) * (-(0.5f64 * 0.5) / (4.0 * t)).exp();
        assert!((u - exact).abs() < 1e-12);
    }

    #[test]
    fn gaussian_data_evolves_exactly_under_pure_diffusion() {
        // u₀ = e^{−y²} under u_t = u_xx: u = (1+4t)^{−1/2}·e^{−x²/(1+4t)}.
        let cs = coeffs(["1", "0", "0", "0", "0", "0"]);
        let t = 0.55;
        let hk = heat_kernel(&cs, 0.0, t, 1e-12, 1e-12).unwrap();
        let prop = Propagator::new(hk, &params());
        let data = InitialData::from_fn(|y| (-y * y).exp());
        for &x in &[-1.0, 0.0, 0.7] {
            let u = prop.apply(&data, x).unwrap();
            let exact = (1.0 + 4.0 * t).powf(-0.5) * (-x * x / (1.0 + 4.0 * t)).exp();
            assert!((u - exact).abs() < 1e-10, "x={x}: {u} vs {exact}");
        }
    }

    #[test]
    fn gridded_data_matches_the_closed_form_to_model_error() {
        let cs = coeffs(["1", "0", "0", "0", "0", "0"]);
        let t = 0.3;
        let hk = heat_kernel(&cs, 0.0, t, 1e-12, 1e-12).unwrap();
        let prop = Propagator::new(hk, &params());
        let spec = crate::grid::GridSpec {
            x_min: -6.0,
            x_max: 6.0,
            n: 2001,
        };
        let g = GridField::from_fn(&spec, |y| (-y * y).exp()).unwrap();
        for &x in &[-0.9, 0.0, 1.3] {
            let u = prop.apply(&InitialData::Grid(g.clone()), x).unwrap();
            let exact = (1.0 + 4.0 * t).powf(-0.5) * (-x * x / (1.0 + 4.0 * t)).exp();
            assert!((u - exact).abs() < 1e-5, "x={x}: {u} vs {exact}");
        }
    }

    #[test]
    fn growing_kernel_integrates_decaying_data_on_a_window() {
        // After the γ sign change of the growing-diffusion model the kernel
        // grows in y, but Gaussian data still gives a convergent integral.
        let cs = coeffs([
            "cosh(t)^2",
            "-sinh(t)^2",
            "sinh(2*t)",
            "0.5*sinh(2*t)",
            "0",
            "0",
        ]);
        let t: f64 = 1.2;
        let hk = heat_kernel(&cs, 0.0, t, 1e-12, 1e-12).unwrap();
        let gamma = hk.coefficients().gamma;
        assert!(gamma > 0.0, "test requires the grown regime, gamma={gamma}");

        let prop = Propagator::new(hk, &params());
        let data = InitialData::from_fn(|y| (-y * y).exp());
        // Closed form by completing the square against the exact kernel
        // exponent (coefficient of y² is γ − 1 after the data joins).
        let m1 = t.cos() * t.sinh() + t.sin() * t.cosh();
        let alpha = (-t.sin() * t.sinh() - t.cos() * t.cosh()) / (2.0 * m1);
        let beta = 1.0 / m1;
        for &x in &[-0.8, 0.0, 0.5] {
            let u = prop.apply(&data, x).unwrap();
            let exact = (2.0 * PI * m1).powf(-0.5)
                * (alpha * x * x).exp()
                * (PI / (1.0 - gamma)).sqrt()
                * ((beta * x) * (beta * x) / (4.0 * (1.0 - gamma))).exp();
            assert!(
                (u - exact).abs() < 1e-8 * exact.max(1.0),
                "x={x}: {u} vs {exact}"
            );
        }

        // Constant data diverges there…
        let res = prop.apply(&InitialData::Constant(1.0), 0.0);
        assert!(matches!(res, Err(Error::DivergentIntegral { .. })));
        // …and so does callable data that does not decay.
        let res = prop.apply(&InitialData::from_fn(|_| 1.0), 0.0);
        assert!(matches!(res, Err(Error::DivergentIntegral { .. })));
    }

    #[test]
    fn apply_many_is_order_preserving_and_thread_invariant() {
        let cs = coeffs(["1", "0", "0", "0", "0", "0"]);
        let hk = heat_kernel(&cs, 0.0, 0.4, 1e-12, 1e-12).unwrap();
        let prop = Propagator::new(hk, &params());
        let data = InitialData::from_fn(|y| (-y * y).exp());
        let xs: Vec<f64> = (0..17).map(|i| -2.0 + 0.25 * i as f64).collect();
        let serial = prop.apply_many(&data, &xs, 1).unwrap();
        let parallel = prop.apply_many(&data, &xs, 4).unwrap();
        assert_eq!(serial.len(), xs.len());
        for (a, b) in serial.iter().zip(&parallel) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn manufactured_source_reproduces_t_times_x_squared() {
        // u* = t·x² solves u_t = u_xx + (x² − 2t) with u(·,0) = 0.
        let cs = coeffs(["1", "0", "0", "0", "0", "0"]);
        let source = parse_source_expr("x^2 - 2*s").unwrap();
        let xs: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
        let t = 0.5;
        let u = duhamel_solve(
            &cs,
            0.0,
            &InitialData::Constant(0.0),
            &source,
            &xs,
            t,
            8,
            &NumericParams::default(),
            2,
        )
        .unwrap();
        for (&x, &v) in xs.iter().zip(&u) {
            assert!((v - t * x * x).abs() < 1e-6, "x={x}: {v} vs {}", t * x * x);
        }
    }

    #[test]
    fn unit_source_integrates_to_elapsed_time() {
        let cs = coeffs(["1", "0", "0", "0", "0", "0"]);
        let source = parse_source_expr("1").unwrap();
        let xs = [-0.5, 0.0, 1.0];
        let t = 0.8;
        let u = duhamel_solve(
            &cs,
            0.0,
            &InitialData::Constant(0.0),
            &source,
            &xs,
            t,
            8,
            &NumericParams::default(),
            1,
        )
        .unwrap();
        for (&x, &v) in xs.iter().zip(&u) {
            assert!((v - t).abs() < 1e-8, "x={x}: {v} vs {t}");
        }
    }

    #[test]
    fn invalid_duhamel_arguments_are_rejected() {
        let cs = coeffs(["1", "0", "0", "0", "0", "0"]);
        let source = parse_source_expr("1").unwrap();
        let res = duhamel_solve(
            &cs,
            1.0,
            &InitialData::Constant(0.0),
            &source,
            &[0.0],
            0.5,
            4,
            &NumericParams::default(),
            1,
        );
        assert!(matches!(res, Err(Error::OutOfRange { .. })));
        let res = duhamel_solve(
            &cs,
            0.0,
            &InitialData::Constant(0.0),
            &source,
            &[0.0],
            0.5,
            0,
            &NumericParams::default(),
            1,
        );
        assert!(matches!(res, Err(Error::InvalidParameter { .. })));
    }
}
