//! Quadrature rules: adaptive (7,15) Gauss–Kronrod for vector integrands on
//! a shared partition, and fixed Gauss–Hermite / Gauss–Legendre rules.
//!
//! The adaptive rule integrates all `M` components of the integrand on one
//! common partition, bisecting whichever segment currently carries the
//! largest component error. Sharing the partition means one expensive
//! integrand evaluation (which internally interpolates ODE solutions) serves
//! every component at once.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// (7,15) Gauss–Kronrod abscissae on [0,1] (positive half; rule is symmetric)
// and the matching weights. Even-indexed abscissae are the embedded 7-point
// Gauss nodes. Tabulated to full published precision; the extra digits
// round to the nearest f64.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Outcome of [`gk_adaptive`].
#[derive(Debug, Clone)]
pub struct GaussKronrodResult<const M: usize> {
    /// Integral estimate per component.
    pub value: [f64; M],
    /// Error estimate per component.
    pub error: [f64; M],
    /// Number of segments in the final shared partition.
    pub segments: usize,
}

struct Segment<const M: usize> {
    a: f64,
    b: f64,
    value: [f64; M],
    error: [f64; M],
    worst: f64,
}

impl<const M: usize> PartialEq for Segment<M> {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}
impl<const M: usize> Eq for Segment<M> {}
impl<const M: usize> PartialOrd for Segment<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const M: usize> Ord for Segment<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst
            .partial_cmp(&other.worst)
            .unwrap_or(Ordering::Equal)
    }
}

/// One (7,15) rule application on `[a, b]`, with the QUADPACK error
/// estimate per component.
fn gk15_segment<const M: usize, F>(f: &F, a: f64, b: f64) -> Result<Segment<M>>
where
    F: Fn(f64) -> Result<[f64; M]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let eval = |x: f64| -> Result<[f64; M]> {
        let v = f(x)?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::QuadratureFailure {
                detail: format!("integrand returned a non-finite value at x = {x}"),
            });
        }
        Ok(v)
    };

    let fc = eval(center)?;
    let mut resk = fc.map(|v| WGK[7] * v);
    let mut resg = fc.map(|v| WG[3] * v);
    let mut resabs = fc.map(|v| WGK[7] * v.abs());
    // Pairs f(center ± half·x) for the error estimate pass.
    let mut fv = [[0.0; M]; 15];
    fv[7] = fc;
    for j in 0..7 {
        let lo = eval(center - half * XGK[j])?;
        let hi = eval(center + half * XGK[j])?;
        fv[j] = lo;
        fv[14 - j] = hi;
        for m in 0..M {
            let sum = lo[m] + hi[m];
            resk[m] += WGK[j] * sum;
            resabs[m] += WGK[j] * (lo[m].abs() + hi[m].abs());
            if j % 2 == 1 {
                // XGK[1], XGK[3], XGK[5] are Gauss nodes (plus the center).
                resg[m] += WG[j / 2] * sum;
            }
        }
    }

    let mut value = [0.0; M];
    let mut error = [0.0; M];
    for m in 0..M {
        let reskh = 0.5 * resk[m];
        let mut resasc = WGK[7] * (fv[7][m] - reskh).abs();
        for (j, w) in WGK.iter().enumerate().take(7) {
            resasc += w * ((fv[j][m] - reskh).abs() + (fv[14 - j][m] - reskh).abs());
        }
        value[m] = resk[m] * half;
        let resasc_s = resasc * half.abs();
        let resabs_s = resabs[m] * half.abs();
        let mut err = ((resk[m] - resg[m]) * half).abs();
        if resasc_s != 0.0 && err != 0.0 {
            err = resasc_s * (200.0 * err / resasc_s).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * resabs_s;
        if floor > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(floor);
        }
        error[m] = err;
    }
    let worst = error.iter().cloned().fold(0.0, f64::max);
    Ok(Segment {
        a,
        b,
        value,
        error,
        worst,
    })
}

/// Adaptively integrates the `M`-component integrand `f` over `[a, b]` on a
/// shared partition until every component satisfies
/// `error ≤ tol · (1 + |value|)`, bisecting the segment with the largest
/// component error. Fails with [`Error::QuadratureFailure`] if the partition
/// exceeds `max_segments`.
pub fn gk_adaptive<const M: usize, F>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_segments: usize,
) -> Result<GaussKronrodResult<M>>
where
    F: Fn(f64) -> Result<[f64; M]>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter {
            detail: format!("quadrature interval must be finite with a < b (got [{a}, {b}])"),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            detail: format!("quadrature tolerance must be positive, got {tol}"),
        });
    }
    let mut heap: BinaryHeap<Segment<M>> = BinaryHeap::new();
    heap.push(gk15_segment(&f, a, b)?);
    loop {
        let mut value = [0.0; M];
        let mut error = [0.0; M];
        for seg in heap.iter() {
            for m in 0..M {
                value[m] += seg.value[m];
                error[m] += seg.error[m];
            }
        }
        let converged = (0..M).all(|m| error[m] <= tol * (1.0 + value[m].abs()));
        if converged {
            return Ok(GaussKronrodResult {
                value,
                error,
                segments: heap.len(),
            });
        }
        if heap.len() >= max_segments {
            let worst = error.iter().cloned().fold(0.0, f64::max);
            return Err(Error::QuadratureFailure {
                detail: format!(
                    "partition reached {max_segments} segments with residual error {worst:.3e}"
                ),
            });
        }
        let seg = heap.pop().expect("heap cannot be empty");
        let width = seg.b - seg.a;
        let mid = 0.5 * (seg.a + seg.b);
        if width < 16.0 * f64::EPSILON * (seg.a.abs().max(seg.b.abs()).max(1.0)) {
            return Err(Error::QuadratureFailure {
                detail: format!(
                    "segment [{:.6e}, {:.6e}] cannot be subdivided further",
                    seg.a, seg.b
                ),
            });
        }
        heap.push(gk15_segment(&f, seg.a, mid)?);
        heap.push(gk15_segment(&f, mid, seg.b)?);
    }
}

/// Gauss–Hermite rule: `∫ e^{−x²} f(x) dx ≈ Σ wᵢ f(xᵢ)`.
///
/// Nodes and weights come from Newton iteration on the orthonormal Hermite
/// recurrence; the rule is exact for polynomials up to degree `2n − 1`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `n`-point rule (`n ≥ 1`). Nodes are in descending order,
    /// symmetric about zero.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let pim4 = 1.0 / std::f64::consts::PI.powf(0.25);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let mut z = 0.0;
        for i in 0..m {
            z = match i {
                0 => {
                    let s = (2.0 * n as f64 + 1.0).sqrt();
                    s - 1.85575 * s.powf(-1.0 / 3.0)
                }
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                // Orthonormal Hermite recurrence: p_j(z).
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / j as f64).sqrt() * p2
                        - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-14 {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        GaussHermite { nodes, weights }
    }

    /// Node abscissae.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Node weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True if the rule has no nodes (never constructed that way).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule: `∫ e^{−x²} f(x) dx`.
    pub fn integrate<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

/// Gauss–Legendre rule on a reference interval `[-1, 1]`, exact for
/// polynomials up to degree `2n − 1`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule (`n ≥ 1`).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..200 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-14 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        GaussLegendre { nodes, weights }
    }

    /// Reference nodes on `[-1, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Reference weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]` by affine mapping of the rule.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x)?;
        }
        Ok(acc * h)
    }
}
