//! Exact heat-kernel construction.
//!
//! The kernel of `u_t = a u_xx − b x²u + c x u_x + d u + f x u − g u_x` has
//! the closed Gaussian form
//!
//! ```text
//! K(x, y; t, t₀) = (2πμ)^{−1/2} · exp(αx² + βxy + γy² + δx + εy + κ),
//! ```
//!
//! where μ is the anchored characteristic solution and the six coefficient
//! functions of t solve a coupled Riccati system. This module evaluates them
//! in resolved form: everything is expressed through μ, μ′, two auxiliary
//! states
//!
//! ```text
//! h′ = c − 2d,                      h(t₀) = 0,
//! D′ = e^{−h}[(f + (d/a)g)μ + (g/(2a))μ′],   D(t₀) = 0,
//! ```
//!
//! and five time integrals with integrands built from (μ, μ′, h, D). The
//! integrands are all smooth at the anchor (no 1/μ factors survive), so
//! plain adaptive quadrature applies; all five share one partition.

use crate::characteristic::{solve_characteristic, CharacteristicSolution};
use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::ode::{integrate, HermiteSeries, OdeOptions};
use crate::quad::gk_adaptive;

/// Span below which the kernel coefficients are taken at their anchor
/// limits instead of dividing tiny quadrature results by a tiny μ.
const NEAR_ANCHOR: f64 = 1e-8;

/// Natural-log overflow threshold for `exp` in f64.
const LOG_OVERFLOW: f64 = 709.0;

/// The six exponent coefficients (plus context) of the kernel at one time.
#[derive(Debug, Clone, Copy)]
pub struct KernelCoefficients {
    /// Anchor time t₀.
    pub t0: f64,
    /// Evaluation time t > t₀.
    pub t: f64,
    /// Coefficient of x².
    pub alpha: f64,
    /// Coefficient of x·y.
    pub beta: f64,
    /// Coefficient of y².
    pub gamma: f64,
    /// Coefficient of x.
    pub delta: f64,
    /// Coefficient of y.
    pub epsilon: f64,
    /// Constant term.
    pub kappa: f64,
    /// μ(t) (normalization is (2πμ)^{−1/2}).
    pub mu: f64,
    /// μ′(t).
    pub dmu: f64,
    /// Auxiliary phase h(t) = ∫(c − 2d).
    pub h: f64,
}

/// Evaluated heat kernel at a fixed time pair (t₀, t).
#[derive(Debug, Clone, Copy)]
pub struct HeatKernel {
    coeffs: KernelCoefficients,
    log_norm: f64,
}

impl HeatKernel {
    /// Wraps assembled coefficients; fails if the normalization (2πμ)^{−1/2}
    /// is not real (μ ≤ 0).
    pub fn from_coefficients(coeffs: KernelCoefficients) -> Result<Self> {
        if !(coeffs.mu > 0.0) {
            return Err(Error::PastHorizon {
                t: coeffs.t,
                horizon: coeffs.t0,
            });
        }
        let log_norm = -0.5 * (2.0 * std::f64::consts::PI * coeffs.mu).ln();
        Ok(HeatKernel { coeffs, log_norm })
    }

    /// The exponent coefficients.
    pub fn coefficients(&self) -> &KernelCoefficients {
        &self.coeffs
    }

    /// ln K(x, y) — always finite for finite inputs.
    pub fn log_eval(&self, x: f64, y: f64) -> f64 {
        let c = &self.coeffs;
        self.log_norm
            + c.alpha * x * x
            + c.beta * x * y
            + c.gamma * y * y
            + c.delta * x
            + c.epsilon * y
            + c.kappa
    }

    /// K(x, y); fails with [`Error::Overflow`] when the value exceeds the
    /// f64 range (underflow quietly returns 0).
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let lk = self.log_eval(x, y);
        if lk > LOG_OVERFLOW {
            return Err(Error::Overflow { x, y });
        }
        Ok(lk.exp())
    }
}

/// Anchor-limit values of (δ, ε, κ) as t → t₀⁺: (g/(2a), −g/(2a), 0) at t₀.
pub fn kernel_coeffs_initial(cs: &CoefficientSet, t0: f64) -> Result<(f64, f64, f64)> {
    let cv = cs.eval(t0)?;
    if cv.a == 0.0 {
        return Err(Error::InvalidInitialData { t0 });
    }
    let d0 = cv.g / (2.0 * cv.a);
    Ok((d0, -d0, 0.0))
}

/// Short-time expansion of ln K: a free Gaussian with the frozen diffusion
/// a(t₀) plus the drift tilt from g(t₀),
/// `−½ln(4πa(t₀)Δt) − (x−y)²/(4a(t₀)Δt) + g(t₀)(x−y)/(2a(t₀))`.
pub fn asymptotic_log_kernel(cs: &CoefficientSet, t0: f64, x: f64, y: f64, t: f64) -> Result<f64> {
    let cv = cs.eval(t0)?;
    if cv.a <= 0.0 {
        return Err(Error::InvalidInitialData { t0 });
    }
    let dt = t - t0;
    if !(dt > 0.0) {
        return Err(Error::OutOfRange {
            t,
            lo: t0,
            hi: f64::INFINITY,
        });
    }
    let r = x - y;
    Ok(
        -0.5 * (4.0 * std::f64::consts::PI * cv.a * dt).ln() - r * r / (4.0 * cv.a * dt)
            + cv.g * r / (2.0 * cv.a),
    )
}

/// Exponentiated [`asymptotic_log_kernel`] with the same overflow contract
/// as [`HeatKernel::eval`].
pub fn asymptotic_kernel(cs: &CoefficientSet, t0: f64, x: f64, y: f64, t: f64) -> Result<f64> {
    let lk = asymptotic_log_kernel(cs, t0, x, y, t)?;
    if lk > LOG_OVERFLOW {
        return Err(Error::Overflow { x, y });
    }
    Ok(lk.exp())
}

/// Kernel evaluator for one coefficient set and one anchored characteristic
/// solution. Construction integrates the auxiliary (h, D) pair across the
/// solved interval once; coefficient evaluations then only run quadrature.
#[derive(Debug, Clone)]
pub struct KernelEngine {
    cs: CoefficientSet,
    sol: CharacteristicSolution,
    aux: HermiteSeries<2>,
    dmu_flip: Option<f64>,
}

impl KernelEngine {
    /// Builds the engine over the full interval covered by `sol`.
    pub fn new(
        cs: &CoefficientSet,
        sol: CharacteristicSolution,
        opts: &OdeOptions,
    ) -> Result<Self> {
        let t0 = sol.t0();
        let aux_rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
            let cv = cs.eval(t)?;
            if cv.a == 0.0 {
                return Err(Error::ZeroDiffusion { t });
            }
            let (m, dm) = sol.mu_dmu(t)?;
            let emh = (-y[0]).exp();
            Ok([
                cv.c - 2.0 * cv.d,
                emh * ((cv.f + cv.d / cv.a * cv.g) * m + cv.g / (2.0 * cv.a) * dm),
            ])
        };
        let aux = integrate(aux_rhs, t0, [0.0, 0.0], sol.t_end(), opts)?;
        let dmu_flip = sol.first_dmu_zero();
        Ok(KernelEngine {
            cs: cs.clone(),
            sol,
            aux,
            dmu_flip,
        })
    }

    /// The underlying characteristic solution.
    pub fn solution(&self) -> &CharacteristicSolution {
        &self.sol
    }

    /// The coefficient set.
    pub fn coefficients(&self) -> &CoefficientSet {
        &self.cs
    }

    fn check_time(&self, t: f64) -> Result<(f64, f64)> {
        let t0 = self.sol.t0();
        if !(t > t0) || t > self.sol.t_end() * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::OutOfRange {
                t,
                lo: t0,
                hi: self.sol.t_end(),
            });
        }
        if let Some(flip) = self.dmu_flip {
            if t >= flip {
                return Err(Error::ResolvedFormBreakdown { t: flip });
            }
        }
        let (m, dm) = self.sol.mu_dmu(t)?;
        if !(m > 0.0) {
            let horizon = self.sol.first_mu_zero().unwrap_or(t0);
            return Err(Error::PastHorizon { t, horizon });
        }
        Ok((m, dm))
    }

    /// Integrand of the five coefficient integrals at interior time τ.
    fn integrand(&self, tau: f64) -> Result<[f64; 5]> {
        let cv = self.cs.eval(tau)?;
        let (_, sigma) = self.cs.tau_sigma(tau)?;
        let (_, dm) = self.sol.mu_dmu(tau)?;
        let hd = self.aux.eval(tau)?;
        let eh = hd[0].exp();
        let big_d = hd[1];
        let fg = cv.f + cv.d / cv.a * cv.g;
        let base = cv.a * sigma / (dm * dm) * eh * eh;
        let lin = cv.a / dm * eh * fg;
        Ok([base, base * big_d, lin, base * big_d * big_d, lin * big_d])
    }

    fn assemble(&self, t: f64, m: f64, dm: f64, ints: &[f64; 5]) -> Result<KernelCoefficients> {
        let t0 = self.sol.t0();
        let cv = self.cs.eval(t)?;
        if cv.a == 0.0 {
            return Err(Error::ZeroDiffusion { t });
        }
        let hd = self.aux.eval(t)?;
        let (h, big_d) = (hd[0], hd[1]);
        let eh = h.exp();

        let alpha = -dm / (4.0 * cv.a * m) - cv.d / (2.0 * cv.a);
        let beta = eh / m;
        let gamma = -cv.a * eh * eh / (m * dm) - 4.0 * ints[0];
        let delta = if t - t0 < NEAR_ANCHOR {
            kernel_coeffs_initial(&self.cs, t0)?.0
        } else {
            eh * big_d / m
        };
        let epsilon = -(2.0 * cv.a / dm) * delta * eh - 8.0 * ints[1] + 2.0 * ints[2];
        let kappa = -(cv.a * m / dm) * delta * delta - 4.0 * ints[3] + 2.0 * ints[4];

        let kc = KernelCoefficients {
            t0,
            t,
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            kappa,
            mu: m,
            dmu: dm,
            h,
        };
        let all = [alpha, beta, gamma, delta, epsilon, kappa, m, dm, h];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::ResolvedFormBreakdown { t });
        }
        Ok(kc)
    }

    /// Kernel coefficients at time `t`, with quadrature tolerance `qtol`.
    pub fn coeffs_at(&self, t: f64, qtol: f64) -> Result<KernelCoefficients> {
        let (m, dm) = self.check_time(t)?;
        let t0 = self.sol.t0();
        let ints = if t - t0 < NEAR_ANCHOR {
            [0.0; 5]
        } else {
            gk_adaptive(|tau| self.integrand(tau), t0, t, qtol, 1024)?.value
        };
        self.assemble(t, m, dm, &ints)
    }

    /// Coefficients along a strictly increasing list of times, reusing the
    /// quadrature prefix between consecutive outputs.
    pub fn trajectory(&self, ts: &[f64], qtol: f64) -> Result<Vec<KernelCoefficients>> {
        if ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter {
                detail: "trajectory times must be strictly increasing".to_string(),
            });
        }
        let t0 = self.sol.t0();
        let mut out = Vec::with_capacity(ts.len());
        let mut running = [0.0f64; 5];
        let mut prev = t0;
        for &t in ts {
            let (m, dm) = self.check_time(t)?;
            if t - t0 >= NEAR_ANCHOR {
                if t - prev > 1e-13 * (1.0 + t.abs()) {
                    let piece = gk_adaptive(|tau| self.integrand(tau), prev, t, qtol, 1024)?;
                    for (r, v) in running.iter_mut().zip(piece.value) {
                        *r += v;
                    }
                    prev = t;
                }
                out.push(self.assemble(t, m, dm, &running)?);
            } else {
                out.push(self.assemble(t, m, dm, &[0.0; 5])?);
            }
        }
        Ok(out)
    }

    /// Full kernel at time `t`.
    pub fn kernel(&self, t: f64, qtol: f64) -> Result<HeatKernel> {
        HeatKernel::from_coefficients(self.coeffs_at(t, qtol)?)
    }
}

/// One-shot construction: solves the characteristic problem on [t₀, t],
/// builds the engine, and returns the kernel at `t`.
pub fn heat_kernel(
    cs: &CoefficientSet,
    t0: f64,
    t: f64,
    tol: f64,
    qtol: f64,
) -> Result<HeatKernel> {
    if !(t > t0) {
        return Err(Error::OutOfRange {
            t,
            lo: t0,
            hi: f64::INFINITY,
        });
    }
    let opts = OdeOptions::with_tol(tol);
    let sol = solve_characteristic(cs, t0, t, &opts)?;
    let engine = KernelEngine::new(cs, sol, &opts)?;
    engine.kernel(t, qtol)
}
