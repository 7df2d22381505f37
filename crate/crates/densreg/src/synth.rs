//! Synthetic data generators: a planar swiss roll, the tendril
//! distribution class (two cube faces joined by thin filaments), and simple
//! supports for covering-number experiments.
//!
//! All generators are pure functions of their seed; identical seeds produce
//! bit-identical datasets. Labeled subsets are chosen before responses are
//! attached, so labels are missing completely at random by construction.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::regress::{LabeledSample, UnlabeledCloud};
use crate::util::fmt_g12;

/// Swiss roll generator settings.
#[derive(Debug, Clone)]
pub struct SwissRollConfig {
    /// Total sample size N.
    pub n_total: usize,
    /// Range of the spiral parameter t.
    pub t_range: (f64, f64),
    /// Gaussian jitter (in final, unit-square coordinates).
    pub jitter_sd: f64,
    /// Gaussian response noise.
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SwissRollConfig {
    fn default() -> Self {
        SwissRollConfig {
            n_total: 400,
            t_range: (1.5 * PI, 4.5 * PI),
            jitter_sd: 0.01,
            noise_sd: 0.05,
            seed: 0,
        }
    }
}

/// Tendril distribution settings: a `d`-cube whose top and bottom faces are
/// joined by `q = (1/epsilon)^(d-1)` axis-aligned filaments, each attached
/// to exactly one face according to the bit vector `omega`.
#[derive(Debug, Clone)]
pub struct TendrilConfig {
    /// Ambient dimension, at least 2.
    pub dim: usize,
    /// Grid pitch in (0, 1/2) with integer 1/epsilon.
    pub epsilon: f64,
    /// Component assignment per tendril; length `(1/epsilon)^(dim-1)`.
    pub omega: Vec<u8>,
    /// Lipschitz scale of the response step.
    pub lipschitz: f64,
    pub seed: u64,
}

impl TendrilConfig {
    /// Number of tendrils implied by `dim` and `epsilon`.
    pub fn tendril_count(dim: usize, epsilon: f64) -> usize {
        let per_axis = (1.0 / epsilon).round() as usize;
        per_axis.pow(dim as u32 - 1)
    }

    /// Config with alternating omega bits.
    pub fn alternating(dim: usize, epsilon: f64, lipschitz: f64, seed: u64) -> Result<Self> {
        let q = Self::tendril_count(dim, epsilon);
        let omega = (0..q).map(|j| (j % 2) as u8).collect();
        let cfg = TendrilConfig {
            dim,
            epsilon,
            omega,
            lipschitz,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Response step height `L * epsilon / 8`.
    pub fn step(&self) -> f64 {
        self.lipschitz * self.epsilon / 8.0
    }

    fn per_axis(&self) -> usize {
        (1.0 / self.epsilon).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidConfig("tendril dim must be >= 2".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidConfig(
                "epsilon must lie in (0, 1/2)".into(),
            ));
        }
        let inv = 1.0 / self.epsilon;
        if (inv - inv.round()).abs() > 1e-9 {
            return Err(Error::InvalidConfig("1/epsilon must be an integer".into()));
        }
        if self.omega.len() != Self::tendril_count(self.dim, self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "omega must have length {}",
                Self::tendril_count(self.dim, self.epsilon)
            )));
        }
        if self.lipschitz < 0.0 {
            return Err(Error::InvalidConfig("lipschitz must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Evaluable ground-truth regression function of a generated dataset.
#[derive(Debug, Clone)]
pub enum Truth {
    SwissRoll { t_range: (f64, f64), scale: f64 },
    Tendril(TendrilConfig),
}

fn spiral_point(t: f64, scale: f64) -> [f64; 2] {
    [
        t * t.cos() / scale + 0.5,
        t * t.sin() / scale + 0.5,
    ]
}

impl Truth {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Truth::SwissRoll { t_range, scale } => {
                // invert the embedding by projecting onto the spiral
                let (t0, t1) = *t_range;
                let dist2 = |t: f64| {
                    let p = spiral_point(t, *scale);
                    (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)
                };
                let steps = 4096;
                let mut best = (f64::INFINITY, t0);
                for i in 0..=steps {
                    let t = t0 + (t1 - t0) * i as f64 / steps as f64;
                    let d = dist2(t);
                    if d < best.0 {
                        best = (d, t);
                    }
                }
                let width = (t1 - t0) / steps as f64;
                let (mut lo, mut hi) = ((best.1 - width).max(t0), (best.1 + width).min(t1));
                for _ in 0..60 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if dist2(m1) < dist2(m2) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let t = 0.5 * (lo + hi);
                (t - t0) / (t1 - t0)
            }
            Truth::Tendril(cfg) => {
                let d = cfg.dim;
                let tol = 1e-9;
                if (x[d - 1] - 1.0).abs() <= tol {
                    return cfg.step();
                }
                if x[d - 1].abs() <= tol {
                    return 0.0;
                }
                // locate the tendril column, if any
                let per_axis = cfg.per_axis();
                let mut index = 0usize;
                for &c in &x[..d - 1] {
                    let s = (c / cfg.epsilon).round();
                    if (c - s * cfg.epsilon).abs() > tol || s < 0.0 || s as usize >= per_axis {
                        return 0.0; // off the support
                    }
                    index = index * per_axis + s as usize;
                }
                if cfg.omega[index] == 1 {
                    cfg.step()
                } else {
                    0.0
                }
            }
        }
    }
}

/// A generated semisupervised dataset with known ground truth.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub unlabeled: UnlabeledCloud,
    pub labeled: LabeledSample,
    /// Noiseless truth at the labeled points, in sample order.
    pub labeled_truth: Vec<f64>,
    /// Noiseless truth at the unlabeled points, in cloud order.
    pub unlabeled_truth: Vec<f64>,
    pub truth: Truth,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.labeled.xs[0].len()
    }
}

fn partition_indices(rng: &mut ChaCha8Rng, n_total: usize, n_labeled: usize) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n_total).collect();
    idx.shuffle(rng);
    let mut labeled = idx[..n_labeled].to_vec();
    let mut unlabeled = idx[n_labeled..].to_vec();
    labeled.sort_unstable();
    unlabeled.sort_unstable();
    (labeled, unlabeled)
}

/// Samples the swiss roll: `t` uniform on the configured range, embedded as
/// `(t cos t, t sin t)` scaled and shifted into the unit square, plus
/// Gaussian jitter. The response truth is `t` normalized to `[0, 1]`.
pub fn swiss_roll(config: &SwissRollConfig, n_labeled: usize) -> Result<Dataset> {
    let (t0, t1) = config.t_range;
    if !(t1 > t0) {
        return Err(Error::InvalidConfig("empty t_range".into()));
    }
    if config.jitter_sd < 0.0 || config.noise_sd < 0.0 {
        return Err(Error::InvalidConfig("negative standard deviation".into()));
    }
    if n_labeled == 0 || n_labeled > config.n_total {
        return Err(Error::InvalidConfig(format!(
            "n_labeled must lie in 1..={}",
            config.n_total
        )));
    }
    let scale = 2.0 * t0.abs().max(t1.abs());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(config.n_total);
    let mut truths = Vec::with_capacity(config.n_total);
    for _ in 0..config.n_total {
        let t: f64 = rng.gen_range(t0..t1);
        let base = spiral_point(t, scale);
        let jx: f64 = rng.sample(StandardNormal);
        let jy: f64 = rng.sample(StandardNormal);
        points.push(vec![
            base[0] + config.jitter_sd * jx,
            base[1] + config.jitter_sd * jy,
        ]);
        truths.push((t - t0) / (t1 - t0));
    }
    // subset chosen before responses are attached (MCAR by construction)
    let (lab_idx, unlab_idx) = partition_indices(&mut rng, config.n_total, n_labeled);
    let mut ys = Vec::with_capacity(n_labeled);
    for &i in &lab_idx {
        let noise: f64 = rng.sample(StandardNormal);
        ys.push(truths[i] + config.noise_sd * noise);
    }
    let y_bound = ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    Ok(Dataset {
        unlabeled: UnlabeledCloud::new(unlab_idx.iter().map(|&i| points[i].clone()).collect()),
        labeled: LabeledSample::new(lab_idx.iter().map(|&i| points[i].clone()).collect(), ys, y_bound)?,
        labeled_truth: lab_idx.iter().map(|&i| truths[i]).collect(),
        unlabeled_truth: unlab_idx.iter().map(|&i| truths[i]).collect(),
        truth: Truth::SwissRoll {
            t_range: config.t_range,
            scale,
        },
    })
}

/// Samples the tendril mixture: mass 1/4 uniform on each of the top and
/// bottom faces and 1/2 uniform over the extended tendrils (each tendril
/// equally likely, uniform along its length). Responses are noiseless:
/// the step value on the component containing the top face, zero on the
/// other component.
pub fn tendril_sample(
    config: &TendrilConfig,
    n_total: usize,
    n_labeled: usize,
) -> Result<Dataset> {
    config.validate()?;
    if n_labeled == 0 || n_labeled > n_total {
        return Err(Error::InvalidConfig(format!(
            "n_labeled must lie in 1..={n_total}"
        )));
    }
    let d = config.dim;
    let q = config.omega.len();
    let per_axis = config.per_axis();
    let step = config.step();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(n_total);
    let mut truths = Vec::with_capacity(n_total);
    for _ in 0..n_total {
        let u: f64 = rng.gen();
        let mut x = vec![0.0; d];
        let truth;
        if u < 0.5 {
            // one of the faces, 1/4 mass each
            for slot in x.iter_mut().take(d - 1) {
                *slot = rng.gen();
            }
            if u < 0.25 {
                x[d - 1] = 1.0;
                truth = step;
            } else {
                x[d - 1] = 0.0;
                truth = 0.0;
            }
        } else {
            let j = rng.gen_range(0..q);
            let mut rest = j;
            for axis in (0..d - 1).rev() {
                x[axis] = (rest % per_axis) as f64 * config.epsilon;
                rest /= per_axis;
            }
            let len = 1.0 - config.epsilon;
            let along: f64 = rng.gen_range(0.0..len);
            if config.omega[j] == 1 {
                x[d - 1] = config.epsilon + along;
                truth = step;
            } else {
                x[d - 1] = along;
                truth = 0.0;
            }
        }
        points.push(x);
        truths.push(truth);
    }
    let (lab_idx, unlab_idx) = partition_indices(&mut rng, n_total, n_labeled);
    let ys: Vec<f64> = lab_idx.iter().map(|&i| truths[i]).collect();
    let y_bound = step.max(1.0);
    Ok(Dataset {
        unlabeled: UnlabeledCloud::new(unlab_idx.iter().map(|&i| points[i].clone()).collect()),
        labeled: LabeledSample::new(lab_idx.iter().map(|&i| points[i].clone()).collect(), ys, y_bound)?,
        labeled_truth: lab_idx.iter().map(|&i| truths[i]).collect(),
        unlabeled_truth: unlab_idx.iter().map(|&i| truths[i]).collect(),
        truth: Truth::Tendril(config.clone()),
    })
}

/// Simple supports for covering-number experiments.
#[derive(Debug, Clone)]
pub enum CloudKind {
    /// Draws uniformly from a fixed finite set of atoms.
    PointMasses { atoms: Vec<Vec<f64>> },
    /// Draws uniformly from an `r`-dimensional axis-aligned unit piece of
    /// `[0,1]^dim`, thickened by a ball of radius `gamma` in the remaining
    /// coordinates.
    SegmentTube { dim: usize, r: usize, gamma: f64 },
}

/// `k` well-separated atoms on the diagonal of the unit cube.
pub fn spread_atoms(k: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|j| vec![(j as f64 + 0.5) / k as f64; dim])
        .collect()
}

pub fn atoms_and_tubes(kind: &CloudKind, n: usize, seed: u64) -> Result<UnlabeledCloud> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        CloudKind::PointMasses { atoms } => {
            if atoms.is_empty() {
                return Err(Error::InvalidConfig("need at least one atom".into()));
            }
            let dim = atoms[0].len();
            if atoms.iter().any(|a| a.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: atoms.iter().find(|a| a.len() != dim).unwrap().len(),
                });
            }
            let points = (0..n)
                .map(|_| atoms[rng.gen_range(0..atoms.len())].clone())
                .collect();
            Ok(UnlabeledCloud::new(points))
        }
        CloudKind::SegmentTube { dim, r, gamma } => {
            if *r == 0 || r >= dim {
                return Err(Error::InvalidConfig("need 1 <= r < dim".into()));
            }
            if *gamma < 0.0 {
                return Err(Error::InvalidConfig("gamma must be nonnegative".into()));
            }
            let thick = dim - r;
            let mut points = Vec::with_capacity(n);
            for _ in 0..n {
                let mut x = vec![0.0; *dim];
                for slot in x.iter_mut().take(*r) {
                    *slot = rng.gen();
                }
                if *gamma > 0.0 {
                    // uniform draw from the (dim - r)-ball of radius gamma
                    let mut g: Vec<f64> =
                        (0..thick).map(|_| rng.sample(StandardNormal)).collect();
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let u: f64 = rng.gen();
                    let radius = gamma * u.powf(1.0 / thick as f64);
                    if norm > 0.0 {
                        for v in &mut g {
                            *v *= radius / norm;
                        }
                    }
                    x[*r..].copy_from_slice(&g);
                }
                points.push(x);
            }
            Ok(UnlabeledCloud::new(points))
        }
    }
}

/// Writes a dataset as CSV: columns `x_1..x_d`, `y` (empty for unlabeled
/// rows) and `is_labeled`.
pub fn write_dataset_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let d = dataset.dim();
    let header: Vec<String> = (1..=d)
        .map(|i| format!("x_{i}"))
        .chain(["y".into(), "is_labeled".into()])
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (x, y) in dataset.labeled.xs.iter().zip(dataset.labeled.ys.iter()) {
        let coords: Vec<String> = x.iter().map(|&c| fmt_g12(c)).collect();
        writeln!(out, "{},{},1", coords.join(","), fmt_g12(*y))?;
    }
    for x in &dataset.unlabeled.points {
        let coords: Vec<String> = x.iter().map(|&c| fmt_g12(c)).collect();
        writeln!(out, "{},,0", coords.join(","))?;
    }
    Ok(())
}
