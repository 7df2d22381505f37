//! Semisupervised Nadaraya-Watson regression in the density-sensitive metric.
//!
//! Predictions are weighted means of the labeled responses, with weights
//! given by a compact-support kernel of the graph distance between the query
//! and each labeled point. The default weight kernel is the boxcar
//! indicator, so a prediction is simply the mean response over labeled
//! points within bandwidth `h` of the query.

use crate::adapt::HyperParams;
use crate::density::{fit_density, SmoothingKernel};
use crate::error::{Error, Result};
use crate::metric::{build_graph, MetricGraph, MetricParams};

/// Covariate-only points from the marginal distribution.
#[derive(Debug, Clone, Default)]
pub struct UnlabeledCloud {
    pub points: Vec<Vec<f64>>,
}

impl UnlabeledCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        UnlabeledCloud { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The observed (X, Y) pairs with a known response bound `|Y| <= y_bound`.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub y_bound: f64,
}

impl LabeledSample {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<f64>, y_bound: f64) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::NoLabeledData);
        }
        if ys.iter().any(|y| y.abs() > y_bound) {
            return Err(Error::InvalidConfig(format!(
                "response exceeds the stated bound {y_bound}"
            )));
        }
        Ok(LabeledSample { xs, ys, y_bound })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// Policy when no labeled point falls inside the kernel neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fallback {
    /// Global mean of the labeled responses (stays within the response
    /// bound, preserving the range of the estimator).
    #[default]
    GlobalMean,
    /// Response of the labeled point nearest in the graph metric.
    NearestLabel,
    /// Surface an error.
    Error,
}

/// Weight kernel `Q` applied to scaled distances `D / h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightKernel {
    /// `I(u <= 1)`; the prediction is a plain neighborhood mean.
    #[default]
    Boxcar,
    /// `max(0, 1 - u^2)`.
    Epanechnikov,
}

impl WeightKernel {
    fn weight(&self, u: f64) -> f64 {
        match self {
            WeightKernel::Boxcar => {
                if u <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            WeightKernel::Epanechnikov => (1.0 - u * u).max(0.0),
        }
    }
}

/// Nadaraya-Watson prediction from distances and responses. Shared by
/// [`Regressor`] and the cross-validation sweep so both paths stay
/// numerically identical.
pub fn nw_predict(
    distances: &[f64],
    ys: &[f64],
    bandwidth: f64,
    weight_kernel: WeightKernel,
    fallback: Fallback,
) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (d, y) in distances.iter().zip(ys.iter()) {
        let w = weight_kernel.weight(d / bandwidth);
        num += w * y;
        den += w;
    }
    if den > 0.0 {
        return Ok(num / den);
    }
    let global_mean = || ys.iter().sum::<f64>() / ys.len() as f64;
    match fallback {
        Fallback::GlobalMean => Ok(global_mean()),
        Fallback::NearestLabel => {
            let mut best = (f64::INFINITY, 0usize);
            for (i, &d) in distances.iter().enumerate() {
                if d < best.0 {
                    best = (d, i);
                }
            }
            if best.0.is_finite() {
                Ok(ys[best.1])
            } else {
                Ok(global_mean())
            }
        }
        Fallback::Error => Err(Error::EmptyNeighborhood),
    }
}

/// Fitted semisupervised kernel regressor.
///
/// Immutable after [`fit`]; `predict` operates on a per-call query overlay
/// and is safe for concurrent callers.
pub struct Regressor {
    graph: MetricGraph,
    labeled_nodes: Vec<usize>,
    labeled: LabeledSample,
    bandwidth: f64,
    fallback: Fallback,
    weight_kernel: WeightKernel,
}

/// Fits with the default boxcar kernels and global-mean fallback.
pub fn fit(
    unlabeled: &UnlabeledCloud,
    labeled: &LabeledSample,
    params: &HyperParams,
    metric_params: &MetricParams,
) -> Result<Regressor> {
    fit_with(
        unlabeled,
        labeled,
        params,
        metric_params,
        SmoothingKernel::Boxcar,
        WeightKernel::Boxcar,
        Fallback::GlobalMean,
    )
}

/// Full-control fit: density estimate on the unlabeled points with
/// `(sigma, kernel)`, metric graph over unlabeled and labeled points with
/// the density sensitivity `params.alpha`.
pub fn fit_with(
    unlabeled: &UnlabeledCloud,
    labeled: &LabeledSample,
    params: &HyperParams,
    metric_params: &MetricParams,
    kernel: SmoothingKernel,
    weight_kernel: WeightKernel,
    fallback: Fallback,
) -> Result<Regressor> {
    if labeled.is_empty() {
        return Err(Error::NoLabeledData);
    }
    if !(params.h > 0.0) {
        return Err(Error::InvalidBandwidth(params.h));
    }
    let density = fit_density(unlabeled.points.clone(), kernel, params.sigma)?;
    let mut nodes = unlabeled.points.clone();
    let offset = nodes.len();
    nodes.extend(labeled.xs.iter().cloned());
    let graph_params = MetricParams {
        alpha: params.alpha,
        ..*metric_params
    };
    let graph = build_graph(density, nodes, graph_params)?;
    let labeled_nodes = (offset..offset + labeled.len()).collect();
    Ok(Regressor {
        graph,
        labeled_nodes,
        labeled: labeled.clone(),
        bandwidth: params.h,
        fallback,
        weight_kernel,
    })
}

impl Regressor {
    /// Assembles a regressor from an existing graph in which the labeled
    /// points are already nodes (`labeled_nodes[i]` holds `labeled.xs[i]`).
    /// Lets callers share one graph across several bandwidths or responses.
    pub fn from_graph(
        graph: MetricGraph,
        labeled_nodes: Vec<usize>,
        labeled: LabeledSample,
        bandwidth: f64,
        weight_kernel: WeightKernel,
        fallback: Fallback,
    ) -> Result<Self> {
        if labeled.is_empty() {
            return Err(Error::NoLabeledData);
        }
        if labeled_nodes.len() != labeled.len() {
            return Err(Error::InvalidConfig(
                "labeled_nodes and labeled sample must have equal length".into(),
            ));
        }
        if !(bandwidth > 0.0) {
            return Err(Error::InvalidBandwidth(bandwidth));
        }
        if labeled_nodes.iter().any(|&i| i >= graph.num_nodes()) {
            return Err(Error::InvalidConfig("labeled node index out of range".into()));
        }
        Ok(Regressor {
            graph,
            labeled_nodes,
            labeled,
            bandwidth,
            fallback,
            weight_kernel,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn labeled(&self) -> &LabeledSample {
        &self.labeled
    }

    /// Prediction from precomputed distances between a query and the
    /// labeled points (one entry per labeled point, in sample order).
    pub fn predict_from_distances(&self, dist_to_labeled: &[f64]) -> Result<f64> {
        debug_assert_eq!(dist_to_labeled.len(), self.labeled.len());
        nw_predict(
            dist_to_labeled,
            &self.labeled.ys,
            self.bandwidth,
            self.weight_kernel,
            self.fallback,
        )
    }

    /// Predicts at `x` by registering it as a query overlay node and
    /// running one single-source shortest-path pass.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let dist = self.graph.distances_from_query(x)?;
        let to_labeled: Vec<f64> = self.labeled_nodes.iter().map(|&i| dist[i]).collect();
        self.predict_from_distances(&to_labeled)
    }

    /// Elementwise [`Self::predict`], order preserved.
    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// Mean squared prediction error over an evaluation sample.
    pub fn empirical_risk(&self, eval_set: &LabeledSample) -> Result<f64> {
        if eval_set.is_empty() {
            return Err(Error::EmptyEvalSet);
        }
        let mut total = 0.0;
        for (x, y) in eval_set.xs.iter().zip(eval_set.ys.iter()) {
            let p = self.predict(x)?;
            total += (p - y) * (p - y);
        }
        Ok(total / eval_set.len() as f64)
    }
}
