//! Uniform spatial grids and sampled fields.

use crate::error::{Error, Result};
use crate::util::linspace;

/// Specification of a uniform grid: `n ≥ 3` points from `x_min` to `x_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    /// Validates the spec and materializes the points.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(linspace(self.x_min, self.x_max, self.n))
    }

    fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::InvalidGrid {
                detail: format!(
                    "grid bounds must be finite with x_min < x_max (got {} and {})",
                    self.x_min, self.x_max
                ),
            });
        }
        if self.n < 3 {
            return Err(Error::InvalidGrid {
                detail: format!("grid needs at least 3 points, got {}", self.n),
            });
        }
        Ok(())
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// Parses the `min:max:n` form used on the command line.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = |what: &str| Error::InvalidGrid {
            detail: format!("expected min:max:n, {what} in {s:?}"),
        };
        if parts.len() != 3 {
            return Err(bad("wrong number of fields"));
        }
        let x_min: f64 = parts[0].trim().parse().map_err(|_| bad("bad minimum"))?;
        let x_max: f64 = parts[1].trim().parse().map_err(|_| bad("bad maximum"))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("bad point count"))?;
        let spec = GridSpec { x_min, x_max, n };
        spec.validate()?;
        Ok(spec)
    }
}

/// Function values sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    xs: Vec<f64>,
    values: Vec<f64>,
    dx: f64,
}

impl GridField {
    /// Wraps matched point/value arrays. The points must be uniformly
    /// spaced (relative tolerance 1e-8) and ascending; values must be
    /// finite.
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 3 || xs.len() != values.len() {
            return Err(Error::InvalidGrid {
                detail: format!(
                    "field needs at least 3 matched points (got {} points, {} values)",
                    xs.len(),
                    values.len()
                ),
            });
        }
        let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidGrid {
                detail: "field points must be ascending and finite".to_string(),
            });
        }
        for (i, w) in xs.windows(2).enumerate() {
            if ((w[1] - w[0]) - dx).abs() > 1e-8 * dx.max(1.0) {
                return Err(Error::InvalidGrid {
                    detail: format!("field points must be uniformly spaced (break at index {i})"),
                });
            }
        }
        for (&x, &v) in xs.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::NonFiniteData { y: x });
            }
        }
        Ok(GridField { xs, values, dx })
    }

    /// Samples `f` on the grid described by `spec`.
    pub fn from_fn<F>(spec: &GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let xs = spec.points()?;
        let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        GridField::new(xs, values)
    }

    /// Grid points.
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Sampled values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid spacing.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// True when empty (construction forbids this).
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// First grid point.
    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    /// Last grid point.
    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Linear interpolation inside the grid, zero outside it (fields are
    /// treated as compactly supported data).
    pub fn interp_zero_ext(&self, x: f64) -> f64 {
        if x < self.x_min() || x > self.x_max() {
            return 0.0;
        }
        let s = (x - self.x_min()) / self.dx;
        let i = (s.floor() as usize).min(self.xs.len() - 2);
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}
