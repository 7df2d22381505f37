//! Cross-validation selection of the hyperparameter triple `(h, alpha,
//! sigma)` over a finite grid.
//!
//! The labeled sample is split once into equal train and validation halves;
//! one regressor is fitted per grid element on the train half and scored by
//! validation mean squared error. Ties break toward the smallest `alpha`
//! (the weakest semisupervised assumption), then the smallest `h`, then the
//! smallest `sigma`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::density::{fit_density, SmoothingKernel};
use crate::error::{Error, Result};
use crate::metric::{build_graph, MetricParams};
use crate::regress::{nw_predict, Fallback, LabeledSample, UnlabeledCloud, WeightKernel};

/// The hyperparameter triple selected by cross-validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Regression bandwidth.
    pub h: f64,
    /// Density sensitivity.
    pub alpha: f64,
    /// Density estimation bandwidth.
    pub sigma: f64,
}

/// Finite search grid; the full grid is the cartesian product.
#[derive(Debug, Clone)]
pub struct ParamGrid {
    pub hs: Vec<f64>,
    pub alphas: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl ParamGrid {
    pub fn size(&self) -> usize {
        self.hs.len() * self.alphas.len() * self.sigmas.len()
    }

    fn validate(&self) -> Result<()> {
        if self.hs.is_empty() || self.alphas.is_empty() || self.sigmas.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let has_dupes = |v: &[f64]| {
            let mut sorted = v.to_vec();
            sorted.sort_by(f64::total_cmp);
            sorted.windows(2).any(|w| w[0] == w[1])
        };
        if has_dupes(&self.hs) || has_dupes(&self.alphas) || has_dupes(&self.sigmas) {
            return Err(Error::InvalidConfig("duplicate grid values".into()));
        }
        if self.hs.iter().any(|&h| !(h > 0.0))
            || self.sigmas.iter().any(|&s| !(s > 0.0))
            || self.alphas.iter().any(|&a| !(a >= 0.0))
        {
            return Err(Error::InvalidConfig(
                "grid values must satisfy h > 0, sigma > 0, alpha >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a cross-validation sweep.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub selected: HyperParams,
    /// Validation risk for every grid element.
    pub table: Vec<(HyperParams, f64)>,
    pub split_seed: u64,
}

/// Deterministic pseudo-random split into train (`ceil(n/2)`) and
/// validation (`floor(n/2)`) halves.
pub fn split(labeled: &LabeledSample, seed: u64) -> Result<(LabeledSample, LabeledSample)> {
    let n = labeled.len();
    if n < 2 {
        return Err(Error::CannotSplit(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let cut = n.div_ceil(2);
    let (mut train_idx, mut val_idx) = (idx[..cut].to_vec(), idx[cut..].to_vec());
    train_idx.sort_unstable();
    val_idx.sort_unstable();
    let take = |ids: &[usize]| LabeledSample {
        xs: ids.iter().map(|&i| labeled.xs[i].clone()).collect(),
        ys: ids.iter().map(|&i| labeled.ys[i]).collect(),
        y_bound: labeled.y_bound,
    };
    Ok((take(&train_idx), take(&val_idx)))
}

/// Grid search by validation MSE.
///
/// Semantically one regressor is fitted per grid element on the train half;
/// fits sharing `(alpha, sigma)` reuse one metric graph and one set of
/// validation shortest-path passes, which leaves the per-element risks
/// bit-identical to independent fits.
pub fn select(
    unlabeled: &UnlabeledCloud,
    labeled: &LabeledSample,
    grid: &ParamGrid,
    metric_params: &MetricParams,
    seed: u64,
) -> Result<CvReport> {
    grid.validate()?;
    let (train, validation) = split(labeled, seed)?;
    let mut table: Vec<(HyperParams, f64)> = Vec::with_capacity(grid.size());

    for &sigma in &grid.sigmas {
        let wrap = |alpha: f64, e: Error| Error::CvFit {
            h: grid.hs[0],
            alpha,
            sigma,
            source: Box::new(e),
        };
        let density = fit_density(unlabeled.points.clone(), SmoothingKernel::Boxcar, sigma)
            .map_err(|e| wrap(grid.alphas[0], e))?;
        let mut nodes = unlabeled.points.clone();
        let offset = nodes.len();
        nodes.extend(train.xs.iter().cloned());
        let base = build_graph(
            density,
            nodes,
            MetricParams {
                alpha: grid.alphas[0],
                ..*metric_params
            },
        )
        .map_err(|e| wrap(grid.alphas[0], e))?;

        for &alpha in &grid.alphas {
            let graph = base.with_alpha(alpha);
            // distances from each validation point to the train points,
            // shared across the bandwidth sweep
            let mut val_dists: Vec<Vec<f64>> = Vec::with_capacity(validation.len());
            for x in &validation.xs {
                let dist = graph
                    .distances_from_query(x)
                    .map_err(|e| wrap(alpha, e))?;
                val_dists.push((offset..offset + train.len()).map(|i| dist[i]).collect());
            }
            for &h in &grid.hs {
                let mut total = 0.0;
                for (dists, y) in val_dists.iter().zip(validation.ys.iter()) {
                    let p = nw_predict(
                        dists,
                        &train.ys,
                        h,
                        WeightKernel::Boxcar,
                        Fallback::GlobalMean,
                    )
                    .map_err(|e| Error::CvFit {
                        h,
                        alpha,
                        sigma,
                        source: Box::new(e),
                    })?;
                    total += (p - y) * (p - y);
                }
                let risk = total / validation.len() as f64;
                table.push((HyperParams { h, alpha, sigma }, risk));
            }
        }
    }

    let mut best = 0usize;
    for i in 1..table.len() {
        let (cand_params, cand_risk) = table[i];
        let (best_params, best_risk) = table[best];
        let better = cand_risk < best_risk
            || (cand_risk == best_risk
                && (cand_params.alpha, cand_params.h, cand_params.sigma)
                    < (best_params.alpha, best_params.h, best_params.sigma));
        if better {
            best = i;
        }
    }
    Ok(CvReport {
        selected: table[best].0,
        table,
        split_seed: seed,
    })
}

/// Gap between the true excess risk of the selected element and the best
/// true excess risk on the grid. Used to check the oracle inequality
/// empirically.
pub fn oracle_gap(report: &CvReport, truth_risks: &[(HyperParams, f64)]) -> Result<f64> {
    let lookup = |p: &HyperParams| {
        truth_risks
            .iter()
            .find(|(q, _)| q.h == p.h && q.alpha == p.alpha && q.sigma == p.sigma)
            .map(|(_, r)| *r)
            .ok_or(Error::MissingParams {
                h: p.h,
                alpha: p.alpha,
                sigma: p.sigma,
            })
    };
    let selected = lookup(&report.selected)?;
    let mut best = f64::INFINITY;
    for (p, _) in &report.table {
        best = best.min(lookup(p)?);
    }
    Ok(selected - best)
}
