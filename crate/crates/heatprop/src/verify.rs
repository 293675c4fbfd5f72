//! Independent verification tools: finite-difference residuals of the PDE,
//! a Crank–Nicolson reference solver, and the transcendental equations
//! behind the growing/decaying-diffusion validity horizons.
//!
//! Nothing here shares code with the kernel construction: the residual
//! check differentiates sampled solution values numerically, and the
//! reference solver discretizes the PDE directly, so agreement between the
//! two paths is meaningful evidence.

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::GridField;

/// Outcome of [`pde_residual`].
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// max over probes of |u_t − L u| divided by `scale`.
    pub max_residual: f64,
    /// Normalizer: the largest |u_t| seen across probes.
    pub scale: f64,
    /// Number of probes evaluated.
    pub probe_count: usize,
    /// Spatial stencil width used.
    pub dx: f64,
    /// Temporal stencil width used.
    pub dt: f64,
}

/// Checks that sampled values satisfy
/// `u_t = a·u_xx − b·x²·u + c·x·u_x + d·u + f·x·u − g·u_x`
/// at the probe points `(t, x)`, using a 4th-order stencil in x and a
/// centered 2nd-order stencil in t, both with width `h`. The sampler must
/// be valid on `[t − h, t + h] × [x − 2h, x + 2h]` around every probe.
pub fn pde_residual<S>(
    mut sampler: S,
    cs: &CoefficientSet,
    probes: &[(f64, f64)],
    h: f64,
) -> Result<ResidualReport>
where
    S: FnMut(f64, f64) -> Result<f64>,
{
    if !(h > 0.0) || probes.is_empty() {
        return Err(Error::InvalidParameter {
            detail: "residual check needs h > 0 and at least one probe".to_string(),
        });
    }
    let mut max_abs = 0.0f64;
    let mut scale = 0.0f64;
    for &(t, x) in probes {
        let u = sampler(t, x)?;
        let up1 = sampler(t, x + h)?;
        let um1 = sampler(t, x - h)?;
        let up2 = sampler(t, x + 2.0 * h)?;
        let um2 = sampler(t, x - 2.0 * h)?;
        let ut_p = sampler(t + h, x)?;
        let ut_m = sampler(t - h, x)?;

        let ut = (ut_p - ut_m) / (2.0 * h);
        let ux = (-up2 + 8.0 * up1 - 8.0 * um1 + um2) / (12.0 * h);
        let uxx = (-up2 + 16.0 * up1 - 30.0 * u + 16.0 * um1 - um2) / (12.0 * h * h);

        let cv = cs.eval(t)?;
        let rhs =
            cv.a * uxx - cv.b * x * x * u + cv.c * x * ux + cv.d * u + cv.f * x * u - cv.g * ux;
        max_abs = max_abs.max((ut - rhs).abs());
        scale = scale.max(ut.abs());
    }
    let scale = scale.max(1e-300);
    Ok(ResidualReport {
        max_residual: max_abs / scale,
        scale,
        probe_count: probes.len(),
        dx: h,
        dt: h,
    })
}

/// Solves the tridiagonal system with the Thomas algorithm.
/// `sub[0]` and `sup[n−1]` are unused.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = sup[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if i + 1 < n {
            c[i] = sup[i] / denom;
        }
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Crank–Nicolson reference solver on the grid of `u0`, from `t_start` to
/// `t_end` in `nt` equal steps, with homogeneous Dirichlet ends (the data
/// should be negligible near the boundary).
///
/// Each step freezes the coefficients at the midpoint time, preserving
/// second-order accuracy for time-dependent coefficients.
pub fn crank_nicolson(
    cs: &CoefficientSet,
    u0: &GridField,
    t_start: f64,
    t_end: f64,
    nt: usize,
) -> Result<GridField> {
    if !(t_end > t_start) || nt == 0 {
        return Err(Error::InvalidParameter {
            detail: format!(
                "time stepping needs t_end > t_start and nt >= 1 (got [{t_start}, {t_end}], nt = {nt})"
            ),
        });
    }
    let xs = u0.xs();
    let dx = u0.dx();
    let n = xs.len();
    let k = (t_end - t_start) / nt as f64;
    let mut u = u0.values().to_vec();

    let mut sub = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];

    for step in 0..nt {
        let tm = t_start + k * (step as f64 + 0.5);
        let cv = cs.eval(tm)?;
        // L u|_i = p·u_{i−1} + q·u_i + r·u_{i+1}.
        rhs[0] = 0.0;
        rhs[n - 1] = 0.0;
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        sub[n - 1] = 0.0;
        sup[0] = 0.0;
        for i in 1..n - 1 {
            let x = xs[i];
            let adv = cv.c * x - cv.g;
            let react = -cv.b * x * x + cv.d + cv.f * x;
            let p = cv.a / (dx * dx) - adv / (2.0 * dx);
            let q = -2.0 * cv.a / (dx * dx) + react;
            let r = cv.a / (dx * dx) + adv / (2.0 * dx);
            sub[i] = -0.5 * k * p;
            diag[i] = 1.0 - 0.5 * k * q;
            sup[i] = -0.5 * k * r;
            rhs[i] = u[i] + 0.5 * k * (p * u[i - 1] + q * u[i] + r * u[i + 1]);
        }
        thomas(&sub, &diag, &sup, &mut rhs);
        u.copy_from_slice(&rhs);
        u[0] = 0.0;
        u[n - 1] = 0.0;
    }
    GridField::new(xs.to_vec(), u)
}

/// Roots of the two transcendental horizon equations:
/// the first positive solution of `tan t · tanh t = 1` (written
/// `tanh t − cot t = 0`) and the first positive solution of
/// `tan t · tanh t = −1` (written `tanh t + cot t = 0`).
///
/// These mark where the quadratic output coefficient γ changes sign for the
/// growing- and decaying-diffusion models respectively.
pub fn find_transcendental_roots() -> (f64, f64) {
    let f1 = |t: f64| t.tanh() - 1.0 / t.tan();
    let d1 = |t: f64| {
        let sech = 1.0 / t.cosh();
        let csc = 1.0 / t.sin();
        sech * sech + csc * csc
    };
    let f2 = |t: f64| t.tanh() + 1.0 / t.tan();
    let d2 = |t: f64| {
        let sech = 1.0 / t.cosh();
        let csc = 1.0 / t.sin();
        sech * sech - csc * csc
    };
    let pi = std::f64::consts::PI;
    (
        newton_bisect(f1, d1, 0.1, 1.5),
        newton_bisect(f2, d2, 0.5 * pi + 0.1, pi - 0.1),
    )
}

fn newton_bisect<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
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
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..6 {
        let step = f(z) / df(z);
        let z1 = z - step;
        if !z1.is_finite() || z1 <= lo || z1 >= hi {
            break;
        }
        z = z1;
        if step.abs() < 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    z
}
