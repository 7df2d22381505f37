//! Kernel density estimation of the smoothed marginal from unlabeled points.
//!
//! The estimate at a query `x` is the exact sum
//! `(1/m) * sum_i sigma^{-d} K(||x - X_i|| / sigma)` over the `m` reference
//! points, with a symmetric compact-support kernel profile `K`. No binning or
//! tree pruning is applied at the experiment scales this crate targets.

use crate::error::{Error, Result};

/// Radial kernel profile with compact support.
///
/// The profile maps a nonnegative scaled distance `u = ||x - X_i|| / sigma`
/// to a nonnegative value, is nonincreasing on `[0, support_radius]`, and is
/// identically zero beyond `support_radius`. The profile is not normalized to
/// integrate to one; the density-sensitive metric only consumes the estimate
/// through `exp(-alpha * p)`, where `alpha` absorbs scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothingKernel {
    /// Indicator of `[0, 1]`.
    #[default]
    Boxcar,
    /// `max(0, 1 - u^2)` on `[0, 1]`.
    Epanechnikov,
}

impl SmoothingKernel {
    pub fn profile(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0);
        match self {
            SmoothingKernel::Boxcar => {
                if u <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SmoothingKernel::Epanechnikov => (1.0 - u * u).max(0.0),
        }
    }

    /// Diameter of the support of the profile (the constant `C0`).
    pub fn support_radius(&self) -> f64 {
        1.0
    }

    /// Checks the profile invariants on a sample grid: nonnegative,
    /// nonincreasing on the support, zero beyond it.
    pub fn validate(&self) -> Result<()> {
        let r = self.support_radius();
        let mut prev = f64::INFINITY;
        for i in 0..=256 {
            let u = r * i as f64 / 256.0;
            let v = self.profile(u);
            if v < 0.0 || v > prev {
                return Err(Error::InvalidConfig(
                    "kernel profile must be nonnegative and nonincreasing".into(),
                ));
            }
            prev = v;
        }
        if self.profile(r * 1.0000001) != 0.0 && self.profile(r + 1.0) != 0.0 {
            return Err(Error::InvalidConfig(
                "kernel profile must vanish beyond its support radius".into(),
            ));
        }
        Ok(())
    }
}

/// Anything that can report a smoothed density value at a point.
///
/// The plug-in metric is generic over this so that tests can feed it
/// perturbed densities alongside the fitted [`DensityModel`].
pub trait Density {
    fn dim(&self) -> usize;
    /// Density value at `x`; `x.len()` must equal `dim()`.
    fn density_at(&self, x: &[f64]) -> f64;
}

/// Fitted kernel density estimate over a fixed set of reference points.
///
/// Immutable after [`fit_density`]; evaluation is a pure function and safe
/// for concurrent callers.
#[derive(Debug, Clone)]
pub struct DensityModel {
    kernel: SmoothingKernel,
    sigma: f64,
    points: Vec<Vec<f64>>,
    dim: usize,
    /// Precomputed `sigma^{-d} / m`.
    scale: f64,
}

impl DensityModel {
    pub fn kernel(&self) -> SmoothingKernel {
        self.kernel
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates the density estimate at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Elementwise [`Self::evaluate`], order preserved.
    pub fn evaluate_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.evaluate(x)).collect()
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let inv_sigma = 1.0 / self.sigma;
        let support = self.kernel.support_radius();
        let mut sum = 0.0;
        for p in &self.points {
            let mut d2 = 0.0;
            for (a, b) in x.iter().zip(p.iter()) {
                let t = a - b;
                d2 += t * t;
            }
            let u = d2.sqrt() * inv_sigma;
            if u <= support {
                sum += self.kernel.profile(u);
            }
        }
        sum * self.scale
    }
}

impl Density for DensityModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn density_at(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.eval_unchecked(x)
    }
}

/// Fits a kernel density estimate on the unlabeled points.
pub fn fit_density(
    points: Vec<Vec<f64>>,
    kernel: SmoothingKernel,
    sigma: f64,
) -> Result<DensityModel> {
    if points.is_empty() {
        return Err(Error::NoUnlabeledData);
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidBandwidth(sigma));
    }
    kernel.validate()?;
    let dim = points[0].len();
    if dim == 0 {
        return Err(Error::InvalidConfig("points must have dimension >= 1".into()));
    }
    for p in &points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    let m = points.len() as f64;
    let scale = sigma.powi(-(dim as i32)) / m;
    Ok(DensityModel {
        kernel,
        sigma,
        points,
        dim,
        scale,
    })
}
