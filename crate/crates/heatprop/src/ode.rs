//! Adaptive explicit Runge–Kutta integration with dense cubic-Hermite output.
//!
//! The integrator is the Dormand–Prince embedded 4(5) pair with PI step-size
//! control and FSAL (first-same-as-last) evaluation reuse. The problems this
//! crate integrates are non-stiff by construction; when the controller is
//! forced below the representable step size the integrator reports a
//! stiffness error rather than silently switching methods.
//!
//! Output is a [`HermiteSeries`]: accepted nodes `(t, y, y′)` plus an
//! optional refinement pass that bisects any interval where the cubic-Hermite
//! interpolant drifts from a direct half-step re-integration, so interpolated
//! values between nodes honor the requested tolerance too.

use crate::error::{Error, Result};

/// Options for [`integrate`].
#[derive(Debug, Clone)]
pub struct OdeOptions {
    /// Per-step local error tolerance (used for both the absolute and the
    /// relative component of the error norm).
    pub tol: f64,
    /// Hard upper bound on the step size (`INFINITY` = none). Clamping the
    /// step turns the method into a fixed-step integrator once the
    /// controller's proposal exceeds the bound, which is how order studies
    /// are run.
    pub max_step: f64,
    /// Run the interpolation-refinement pass after integration.
    pub hermite_refine: bool,
    /// Safety cap on accepted+rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-10,
            max_step: f64::INFINITY,
            hermite_refine: true,
            max_steps: 1_000_000,
        }
    }
}

impl OdeOptions {
    /// Convenience constructor with everything else defaulted.
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            tol,
            ..OdeOptions::default()
        }
    }
}

/// Piecewise cubic-Hermite interpolant built from `(t, y, y′)` nodes.
///
/// Node derivatives are exact right-hand-side evaluations, so the
/// interpolant is C¹ and its derivative at the nodes equals the stored y′.
#[derive(Debug, Clone)]
pub struct HermiteSeries<const N: usize> {
    ts: Vec<f64>,
    ys: Vec<[f64; N]>,
    dys: Vec<[f64; N]>,
}

impl<const N: usize> HermiteSeries<N> {
    /// Builds a series from parallel node arrays (strictly increasing `ts`).
    pub fn from_nodes(ts: Vec<f64>, ys: Vec<[f64; N]>, dys: Vec<[f64; N]>) -> Result<Self> {
        if ts.len() < 2 || ts.len() != ys.len() || ts.len() != dys.len() {
            return Err(Error::InvalidParameter {
                detail: "interpolant needs at least two matched nodes".to_string(),
            });
        }
        if !ts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter {
                detail: "interpolant nodes must be strictly increasing".to_string(),
            });
        }
        Ok(HermiteSeries { ts, ys, dys })
    }

    /// Start of the covered interval.
    pub fn t_start(&self) -> f64 {
        self.ts[0]
    }

    /// End of the covered interval.
    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    /// True if the series is empty (never constructed that way in practice).
    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    /// Iterates over nodes as `(t, y, y′)`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64; N], &[f64; N])> + '_ {
        self.ts
            .iter()
            .zip(self.ys.iter())
            .zip(self.dys.iter())
            .map(|((t, y), dy)| (*t, y, dy))
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (lo, hi) = (self.t_start(), self.t_end());
        let slack = 1e-9 * (1.0 + (hi - lo).abs());
        if t < lo - slack || t > hi + slack {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let tc = t.clamp(lo, hi);
        // Index of the segment [ts[i], ts[i+1]] containing tc.
        let i = match self.ts.binary_search_by(|v| v.partial_cmp(&tc).unwrap()) {
            Ok(k) => k.min(self.ts.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.ts.len() - 2),
        };
        Ok((i, tc))
    }

    /// Interpolated state at `t`.
    pub fn eval(&self, t: f64) -> Result<[f64; N]> {
        Ok(self.eval_both(t)?.0)
    }

    /// Interpolated state and its time derivative at `t`.
    pub fn eval_both(&self, t: f64) -> Result<([f64; N], [f64; N])> {
        let (i, tc) = self.locate(t)?;
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let s = (tc - t0) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        let (d00, d10, d01, d11) = hermite_basis_deriv(s);
        let mut val = [0.0; N];
        let mut der = [0.0; N];
        for k in 0..N {
            let (y0, y1) = (self.ys[i][k], self.ys[i + 1][k]);
            let (m0, m1) = (self.dys[i][k], self.dys[i + 1][k]);
            val[k] = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
            der[k] = (d00 * y0 + d10 * h * m0 + d01 * y1 + d11 * h * m1) / h;
        }
        Ok((val, der))
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

fn hermite_basis_deriv(s: f64) -> (f64, f64, f64, f64) {
    (
        6.0 * s * (s - 1.0),
        (1.0 - s) * (1.0 - 3.0 * s),
        6.0 * s * (1.0 - s),
        s * (3.0 * s - 2.0),
    )
}

// Dormand–Prince 4(5) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error coefficients: 5th-order weights minus the embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

struct StepResult<const N: usize> {
    y_new: [f64; N],
    k_new: [f64; N],
    err_vec: [f64; N],
}

/// One Dormand–Prince step of size `h` from `(t, y)` with `k1 = rhs(t, y)`
/// already known. Returns the 5th-order solution, the FSAL derivative at the
/// new point, and the raw embedded error vector.
fn dopri_step<const N: usize, F>(
    rhs: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<StepResult<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut stage = [0.0; N];
    for i in 0..N {
        stage[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = rhs(t + C2 * h, &stage)?;
    for i in 0..N {
        stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = rhs(t + C3 * h, &stage)?;
    for i in 0..N {
        stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = rhs(t + C4 * h, &stage)?;
    for i in 0..N {
        stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = rhs(t + C5 * h, &stage)?;
    for i in 0..N {
        stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = rhs(t + h, &stage)?;
    let mut y_new = [0.0; N];
    for i in 0..N {
        y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = rhs(t + h, &y_new)?;
    let mut err_vec = [0.0; N];
    for i in 0..N {
        err_vec[i] =
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok(StepResult {
        y_new,
        k_new: k7,
        err_vec,
    })
}

/// Integrates `y′ = rhs(t, y)` from `(t0, y0)` to `t_end > t0` and returns
/// the dense solution.
pub fn integrate<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
) -> Result<HermiteSeries<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(t_end > t0) {
        return Err(Error::InvalidParameter {
            detail: format!("integration needs t_end > t0 (got t0 = {t0}, t_end = {t_end})"),
        });
    }
    if !(opts.tol > 0.0 && opts.tol <= 1e-2) {
        return Err(Error::InvalidParameter {
            detail: format!("tol must lie in (0, 1e-2], got {}", opts.tol),
        });
    }

    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - 0.75 * BETA;
    const FACMIN: f64 = 0.2;
    const FACMAX: f64 = 10.0;

    let span = t_end - t0;
    let tol = opts.tol;
    let mut ts = vec![t0];
    let mut ys = vec![y0];
    let mut k1 = rhs(t0, &y0)?;
    let mut dys = vec![k1];

    let mut t = t0;
    let mut y = y0;
    let mut h = (span * 1e-4).min(opts.max_step).min(span);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut nsteps = 0usize;

    while t < t_end {
        nsteps += 1;
        if nsteps > opts.max_steps {
            return Err(Error::Stiffness { t });
        }
        let h_floor = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_floor {
            return Err(Error::Stiffness { t });
        }
        let mut h_use = h.min(opts.max_step);
        if t + h_use > t_end {
            h_use = t_end - t;
        }
        let step = dopri_step(&rhs, t, &y, &k1, h_use)?;
        // Scaled RMS error norm.
        let mut acc = 0.0;
        for ((&e, &yi), &yn) in step.err_vec.iter().zip(&y).zip(&step.y_new) {
            let sc = tol + tol * yi.abs().max(yn.abs());
            let r = e / sc;
            acc += r * r;
        }
        let err = (acc / N as f64).sqrt();

        if err <= 1.0 {
            t += h_use;
            y = step.y_new;
            k1 = step.k_new;
            ts.push(t);
            ys.push(y);
            dys.push(k1);

            let fac11 = err.powf(EXPO1);
            let facmax = if last_rejected { 1.0 } else { FACMAX };
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / facmax, 1.0 / FACMIN);
            h = h_use / fac;
            facold = err.max(1e-4);
            last_rejected = false;
        } else {
            let fac11 = err.powf(EXPO1);
            h = h_use / (fac11 / SAFE).min(1.0 / FACMIN);
            last_rejected = true;
        }
    }

    if opts.hermite_refine {
        refine(&rhs, &mut ts, &mut ys, &mut dys, tol)?;
    }
    HermiteSeries::from_nodes(ts, ys, dys)
}

/// Bisects any segment where cubic-Hermite interpolation at the midpoint
/// disagrees with a direct half-step re-integration by more than 10·tol
/// (absolute-plus-relative scale), inserting the re-integrated midpoint as a
/// new node. The reference midpoint comes from a single 5th-order step, whose
/// local error is an order smaller than the interpolation error under test.
fn refine<const N: usize, F>(
    rhs: &F,
    ts: &mut Vec<f64>,
    ys: &mut Vec<[f64; N]>,
    dys: &mut Vec<[f64; N]>,
    tol: f64,
) -> Result<()>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut out_t: Vec<f64> = Vec::with_capacity(ts.len());
    let mut out_y: Vec<[f64; N]> = Vec::with_capacity(ts.len());
    let mut out_d: Vec<[f64; N]> = Vec::with_capacity(ts.len());

    #[allow(clippy::too_many_arguments)]
    fn seg<const N: usize, F>(
        rhs: &F,
        ta: f64,
        ya: [f64; N],
        ka: [f64; N],
        tb: f64,
        yb: [f64; N],
        kb: [f64; N],
        tol: f64,
        depth: usize,
        out_t: &mut Vec<f64>,
        out_y: &mut Vec<[f64; N]>,
        out_d: &mut Vec<[f64; N]>,
    ) -> Result<()>
    where
        F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let h = tb - ta;
        let tm = ta + 0.5 * h;
        if depth == 0 || tm <= ta || tm >= tb {
            return Ok(());
        }
        let step = dopri_step(rhs, ta, &ya, &ka, 0.5 * h)?;
        let ym = step.y_new;
        let km = step.k_new;
        let (h00, h10, h01, h11) = hermite_basis(0.5);
        let mut ok = true;
        for i in 0..N {
            let interp = h00 * ya[i] + h10 * h * ka[i] + h01 * yb[i] + h11 * h * kb[i];
            if (interp - ym[i]).abs() > 10.0 * tol * (1.0 + ym[i].abs()) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(());
        }
        seg(
            rhs,
            ta,
            ya,
            ka,
            tm,
            ym,
            km,
            tol,
            depth - 1,
            out_t,
            out_y,
            out_d,
        )?;
        out_t.push(tm);
        out_y.push(ym);
        out_d.push(km);
        seg(
            rhs,
            tm,
            ym,
            km,
            tb,
            yb,
            kb,
            tol,
            depth - 1,
            out_t,
            out_y,
            out_d,
        )
    }

    for i in 0..ts.len() - 1 {
        out_t.push(ts[i]);
        out_y.push(ys[i]);
        out_d.push(dys[i]);
        seg(
            rhs,
            ts[i],
            ys[i],
            dys[i],
            ts[i + 1],
            ys[i + 1],
            dys[i + 1],
            tol,
            12,
            &mut out_t,
            &mut out_y,
            &mut out_d,
        )?;
    }
    out_t.push(*ts.last().unwrap());
    out_y.push(*ys.last().unwrap());
    out_d.push(*dys.last().unwrap());
    *ts = out_t;
    *ys = out_y;
    *dys = out_d;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_matches_closed_form() {
        let opts = OdeOptions::with_tol(1e-10);
        let sol = integrate(|_t, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 1.0, &opts).unwrap();
        let end = sol.eval(1.0).unwrap()[0];
        assert!(
            (end - 1.0f64.exp()).abs() < 1e-9,
            "endpoint error too large"
        );
        // Dense output between nodes honors the tolerance budget.
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let v = sol.eval(t).unwrap()[0];
            assert!(
                (v - t.exp()).abs() <= 1e-8 * (1.0 + t.exp()),
                "dense output off at t={t}"
            );
        }
    }

    #[test]
    fn harmonic_oscillator_two_state() {
        let opts = OdeOptions::with_tol(1e-11);
        let sol = integrate(
            |_t, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            3.0,
            &opts,
        )
        .unwrap();
        for i in 0..=30 {
            let t = 0.1 * i as f64;
            let (v, d) = sol.eval_both(t).unwrap();
            assert!((v[0] - t.sin()).abs() < 1e-9);
            assert!((v[1] - t.cos()).abs() < 1e-9);
            // Interpolant derivative of component 0 is component 1.
            assert!((d[0] - v[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn blow_up_reports_stiffness() {
        // y′ = y² from y(0)=1 blows up at t=1; the integrator must fail
        // loudly rather than step across the singularity.
        let opts = OdeOptions::with_tol(1e-8);
        match integrate(|_t, y: &[f64; 1]| Ok([y[0] * y[0]]), 0.0, [1.0], 2.0, &opts) {
            Err(Error::Stiffness { t }) => assert!((t - 1.0).abs() < 0.05, "stiffness at t={t}"),
            other => panic!("expected stiffness error, got {other:?}"),
        }
    }

    #[test]
    fn max_step_is_respected() {
        let opts = OdeOptions {
            tol: 1e-3,
            max_step: 0.05,
            hermite_refine: false,
            ..OdeOptions::default()
        };
        let sol = integrate(|_t, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 1.0, &opts).unwrap();
        let ts: Vec<f64> = sol.nodes().map(|(t, _, _)| t).collect();
        for w in ts.windows(2) {
            assert!(w[1] - w[0] <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn eval_outside_interval_errors() {
        let opts = OdeOptions::with_tol(1e-8);
        let sol = integrate(|_t, _y: &[f64; 1]| Ok([1.0]), 0.0, [0.0], 1.0, &opts).unwrap();
        assert!(matches!(sol.eval(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(sol.eval(-0.5), Err(Error::OutOfRange { .. })));
        // A hair outside is clamped (floating-point slack).
        assert!(sol.eval(1.0 + 1e-12).is_ok());
    }

    #[test]
    fn rhs_errors_propagate() {
        let opts = OdeOptions::with_tol(1e-8);
        let res = integrate(
            |t, _y: &[f64; 1]| {
                if t > 0.5 {
                    Err(Error::EvalDomain {
                        what: "test".to_string(),
                        t,
                    })
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            1.0,
            &opts,
        );
        assert!(matches!(res, Err(Error::EvalDomain { .. })));
    }

    #[test]
    fn fixed_step_order_is_at_least_four() {
        // With the step clamped and a loose tolerance the controller always
        // proposes the clamp, so halving max_step halves the actual step;
        // the endpoint error must then drop by ≥ 2⁴.
        let run = |h: f64| -> f64 {
            let opts = OdeOptions {
                tol: 1e-2,
                max_step: h,
                hermite_refine: false,
                ..OdeOptions::default()
            };
            let sol = integrate(
                |t, y: &[f64; 2]| Ok([y[1], -y[0] + t.sin()]),
                0.0,
                [1.0, 0.0],
                2.0,
                &opts,
            )
            .unwrap();
            // Closed form of y″ = −y + sin t, y(0)=1, y′(0)=0:
            // y = cos t + (sin t − t·cos t)/2.
            let t = 2.0f64;
            let exact = t.cos() + 0.5 * (t.sin() - t * t.cos());
            (sol.eval(t).unwrap()[0] - exact).abs()
        };
        let e1 = run(0.1);
        let e2 = run(0.05);
        assert!(
            e1 / e2 >= 16.0,
            "error ratio {} below expected order (e1={e1:.3e}, e2={e2:.3e})",
            e1 / e2
        );
    }
}
