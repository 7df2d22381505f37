//! Monte-Carlo experiment driver: sweeps labeled sample size and density
//! sensitivity over repeated synthetic draws, aggregates mean squared error
//! with 95% confidence intervals, and emits CSV tables plus a self-rendered
//! SVG risk plot. Everything is a pure function of the config, so identical
//! configs produce byte-identical artifacts.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::adapt::{self, ParamGrid};
use crate::density::{fit_density, SmoothingKernel};
use crate::error::{Error, Result};
use crate::metric::{build_graph, MetricGraph, MetricParams};
use crate::regress::{nw_predict, Fallback, LabeledSample, WeightKernel};
use crate::synth::{swiss_roll, tendril_sample, Dataset, SwissRollConfig, TendrilConfig};
use crate::util::{fmt_g12, mix_seed};

/// Which synthetic generator a sweep draws from. The generator's own `seed`
/// field is ignored; the harness derives one per repetition.
#[derive(Debug, Clone)]
pub enum GeneratorConfig {
    SwissRoll(SwissRollConfig),
    Tendril { config: TendrilConfig, n_total: usize },
}

impl GeneratorConfig {
    fn n_total(&self) -> usize {
        match self {
            GeneratorConfig::SwissRoll(cfg) => cfg.n_total,
            GeneratorConfig::Tendril { n_total, .. } => *n_total,
        }
    }

    fn draw(&self, n_labeled: usize, seed: u64) -> Result<Dataset> {
        match self {
            GeneratorConfig::SwissRoll(cfg) => {
                let cfg = SwissRollConfig { seed, ..cfg.clone() };
                swiss_roll(&cfg, n_labeled)
            }
            GeneratorConfig::Tendril { config, n_total } => {
                let cfg = TendrilConfig { seed, ..config.clone() };
                tendril_sample(&cfg, *n_total, n_labeled)
            }
        }
    }
}

/// Bandwidth policy per sweep cell.
#[derive(Debug, Clone)]
pub enum HRule {
    Fixed(f64),
    /// Select `h` per cell by a train/validation split over this grid.
    Cv { hs: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    /// Labeled sample sizes to sweep.
    pub n_grid: Vec<usize>,
    /// Density sensitivities to sweep.
    pub alpha_grid: Vec<f64>,
    pub repetitions: usize,
    pub metric_params: MetricParams,
    /// Density bandwidth used for every fit.
    pub sigma: f64,
    pub h_rule: HRule,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.alpha_grid.is_empty() {
            return Err(Error::InvalidConfig("empty sweep grid".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
        }
        let n_total = self.generator.n_total();
        if self.n_grid.iter().any(|&n| n == 0 || n > n_total) {
            return Err(Error::InvalidConfig(format!(
                "labeled sizes must lie in 1..={n_total}"
            )));
        }
        if self.alpha_grid.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::InvalidConfig("alpha must be nonnegative".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidBandwidth(self.sigma));
        }
        if let HRule::Fixed(h) = self.h_rule {
            if !(h > 0.0) {
                return Err(Error::InvalidBandwidth(h));
            }
        }
        if let HRule::Cv { hs } = &self.h_rule {
            if hs.is_empty() || hs.iter().any(|h| !(*h > 0.0)) {
                return Err(Error::InvalidConfig("invalid bandwidth grid".into()));
            }
        }
        Ok(())
    }
}

/// One aggregated sweep cell.
#[derive(Debug, Clone)]
pub struct RiskRow {
    pub n: usize,
    pub alpha: f64,
    pub mean_mse: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Repetitions that contributed (successful fits).
    pub reps: usize,
    /// Repetitions whose fit failed; excluded from the mean, never silent.
    pub failures: usize,
    /// Per-repetition MSEs behind the aggregate, in repetition order.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RiskReport {
    /// Ordered by (`n_grid`, `alpha_grid`) position.
    pub rows: Vec<RiskRow>,
    pub master_seed: u64,
    pub wall_seconds: f64,
}

/// Sample mean with a 95% normal-approximation interval; degenerate for a
/// single sample.
fn mean_ci(samples: &[f64]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, mean, mean);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    let half = 1.96 * (var / n).sqrt();
    (mean, mean - half, mean + half)
}

/// One repetition's semisupervised fit at a fixed `n`: density and base
/// graph built once, reweighted per alpha.
struct RepFit {
    base: MetricGraph,
    labeled_nodes: Vec<usize>,
    ys: Vec<f64>,
    truths: Vec<f64>,
}

fn prepare_rep(config: &ExperimentConfig, ds: &Dataset) -> Result<RepFit> {
    let density = fit_density(
        ds.unlabeled.points.clone(),
        SmoothingKernel::Boxcar,
        config.sigma,
    )?;
    let mut nodes = ds.unlabeled.points.clone();
    let offset = nodes.len();
    nodes.extend(ds.labeled.xs.iter().cloned());
    let params = MetricParams {
        alpha: 0.0,
        ..config.metric_params
    };
    let base = build_graph(density, nodes, params)?;
    let mut truths = ds.unlabeled_truth.clone();
    truths.extend_from_slice(&ds.labeled_truth);
    Ok(RepFit {
        base,
        labeled_nodes: (offset..offset + ds.labeled.len()).collect(),
        ys: ds.labeled.ys.clone(),
        truths,
    })
}

/// MSE of the kernel regressor against the known truth at every node,
/// using one shortest-path pass per labeled point.
fn risk_at(fit: &RepFit, graph: &MetricGraph, h: f64) -> Result<f64> {
    let per_label: Vec<Vec<f64>> = fit
        .labeled_nodes
        .iter()
        .map(|&j| graph.distances_from(j))
        .collect();
    let mut total = 0.0;
    let mut dists = vec![0.0; fit.labeled_nodes.len()];
    for (i, &truth) in fit.truths.iter().enumerate() {
        for (slot, row) in dists.iter_mut().zip(per_label.iter()) {
            *slot = row[i];
        }
        let pred = nw_predict(&dists, &fit.ys, h, WeightKernel::Boxcar, Fallback::GlobalMean)?;
        total += (pred - truth) * (pred - truth);
    }
    Ok(total / fit.truths.len() as f64)
}

fn cell_bandwidth(
    config: &ExperimentConfig,
    ds: &Dataset,
    alpha: f64,
    seed: u64,
) -> Result<f64> {
    match &config.h_rule {
        HRule::Fixed(h) => Ok(*h),
        HRule::Cv { hs } => {
            let grid = ParamGrid {
                hs: hs.clone(),
                alphas: vec![alpha],
                sigmas: vec![config.sigma],
            };
            let report = adapt::select(
                &ds.unlabeled,
                &ds.labeled,
                &grid,
                &config.metric_params,
                seed,
            )?;
            Ok(report.selected.h)
        }
    }
}

/// Runs the full (repetition, n, alpha) sweep. Each cell's result depends
/// only on `(master_seed, repetition index, n, alpha)`, so shrinking either
/// grid leaves the remaining cells unchanged.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RiskReport> {
    config.validate()?;
    let start = Instant::now();
    let cells = config.n_grid.len() * config.alpha_grid.len();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); cells];
    let mut failures = vec![0usize; cells];
    for r in 0..config.repetitions {
        let seed = mix_seed(config.master_seed, r as u64);
        for (ni, &n) in config.n_grid.iter().enumerate() {
            let prep = config
                .generator
                .draw(n, seed)
                .and_then(|ds| prepare_rep(config, &ds).map(|fit| (ds, fit)));
            for (ai, &alpha) in config.alpha_grid.iter().enumerate() {
                let cell = ni * config.alpha_grid.len() + ai;
                let outcome = match &prep {
                    Ok((ds, fit)) => cell_bandwidth(config, ds, alpha, seed)
                        .and_then(|h| risk_at(fit, &fit.base.with_alpha(alpha), h)),
                    Err(_) => Err(Error::InvalidConfig("dataset or graph fit failed".into())),
                };
                match outcome {
                    Ok(mse) => samples[cell].push(mse),
                    Err(_) => failures[cell] += 1,
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(cells);
    for (ni, &n) in config.n_grid.iter().enumerate() {
        for (ai, &alpha) in config.alpha_grid.iter().enumerate() {
            let cell = ni * config.alpha_grid.len() + ai;
            let cell_samples = std::mem::take(&mut samples[cell]);
            if cell_samples.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "every repetition failed for n={n}, alpha={alpha}"
                )));
            }
            let (mean, lo, hi) = mean_ci(&cell_samples);
            rows.push(RiskRow {
                n,
                alpha,
                mean_mse: mean,
                ci_low: lo,
                ci_high: hi,
                reps: cell_samples.len(),
                failures: failures[cell],
                samples: cell_samples,
            });
        }
    }
    Ok(RiskReport {
        rows,
        master_seed: config.master_seed,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Semisupervised sweep alongside a purely supervised baseline (metric
/// graph over the labeled points only, Euclidean geometry) and risk ratios.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub semisupervised: RiskReport,
    /// One row per `n`; `alpha` is recorded as 0.
    pub supervised: RiskReport,
    /// `(n, alpha, semisupervised mean / supervised mean)` per sweep cell.
    pub ratios: Vec<(usize, f64, f64)>,
}

fn supervised_bandwidth(
    config: &ExperimentConfig,
    labeled: &LabeledSample,
    seed: u64,
) -> Result<f64> {
    let hs = match &config.h_rule {
        HRule::Fixed(h) => return Ok(*h),
        HRule::Cv { hs } => hs,
    };
    let (train, val) = adapt::split(labeled, seed)?;
    let graph = supervised_graph(config, &train.xs)?;
    let val_dists: Vec<Vec<f64>> = val
        .xs
        .iter()
        .map(|x| graph.distances_from_query(x))
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, f64)> = None;
    for &h in hs {
        let mut risk = 0.0;
        for (d, y) in val_dists.iter().zip(val.ys.iter()) {
            let p = nw_predict(d, &train.ys, h, WeightKernel::Boxcar, Fallback::GlobalMean)?;
            risk += (p - y) * (p - y);
        }
        risk /= val.len() as f64;
        let better = match best {
            None => true,
            Some((best_risk, best_h)) => risk < best_risk || (risk == best_risk && h < best_h),
        };
        if better {
            best = Some((risk, h));
        }
    }
    Ok(best.expect("nonempty bandwidth grid").1)
}

fn supervised_graph(config: &ExperimentConfig, xs: &[Vec<f64>]) -> Result<MetricGraph> {
    let density = fit_density(xs.to_vec(), SmoothingKernel::Boxcar, config.sigma)?;
    let params = MetricParams {
        alpha: 0.0,
        k_neighbors: config
            .metric_params
            .k_neighbors
            .min(xs.len().saturating_sub(1))
            .max(1),
        ..config.metric_params
    };
    build_graph(density, xs.to_vec(), params)
}

fn supervised_risk(config: &ExperimentConfig, ds: &Dataset, h: f64) -> Result<f64> {
    let graph = supervised_graph(config, &ds.labeled.xs)?;
    let mut total = 0.0;
    let mut count = 0usize;
    let eval = ds
        .unlabeled
        .points
        .iter()
        .zip(ds.unlabeled_truth.iter())
        .chain(ds.labeled.xs.iter().zip(ds.labeled_truth.iter()));
    for (x, &truth) in eval {
        let dist = graph.distances_from_query(x)?;
        let pred = nw_predict(&dist, &ds.labeled.ys, h, WeightKernel::Boxcar, Fallback::GlobalMean)?;
        total += (pred - truth) * (pred - truth);
        count += 1;
    }
    Ok(total / count as f64)
}

pub fn compare_supervised(config: &ExperimentConfig) -> Result<CompareReport> {
    let semisupervised = run_experiment(config)?;
    config.validate()?;
    let start = Instant::now();
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); config.n_grid.len()];
    let mut failures = vec![0usize; config.n_grid.len()];
    for r in 0..config.repetitions {
        let seed = mix_seed(config.master_seed, r as u64);
        for (ni, &n) in config.n_grid.iter().enumerate() {
            let outcome = config.generator.draw(n, seed).and_then(|ds| {
                let h = supervised_bandwidth(config, &ds.labeled, seed)?;
                supervised_risk(config, &ds, h)
            });
            match outcome {
                Ok(mse) => samples[ni].push(mse),
                Err(_) => failures[ni] += 1,
            }
        }
    }
    let mut rows = Vec::with_capacity(config.n_grid.len());
    for (ni, &n) in config.n_grid.iter().enumerate() {
        let cell_samples = std::mem::take(&mut samples[ni]);
        if cell_samples.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "every supervised repetition failed for n={n}"
            )));
        }
        let (mean, lo, hi) = mean_ci(&cell_samples);
        rows.push(RiskRow {
            n,
            alpha: 0.0,
            mean_mse: mean,
            ci_low: lo,
            ci_high: hi,
            reps: cell_samples.len(),
            failures: failures[ni],
            samples: cell_samples,
        });
    }
    let supervised = RiskReport {
        rows,
        master_seed: config.master_seed,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    let mut ratios = Vec::with_capacity(semisupervised.rows.len());
    for row in &semisupervised.rows {
        let baseline = supervised
            .rows
            .iter()
            .find(|s| s.n == row.n)
            .expect("baseline row for every n");
        ratios.push((row.n, row.alpha, row.mean_mse / baseline.mean_mse));
    }
    Ok(CompareReport {
        semisupervised,
        supervised,
        ratios,
    })
}

pub fn risk_csv(report: &RiskReport) -> String {
    let mut out = String::from("n,alpha,mean_mse,ci_low,ci_high,reps\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.n,
            fmt_g12(row.alpha),
            fmt_g12(row.mean_mse),
            fmt_g12(row.ci_low),
            fmt_g12(row.ci_high),
            row.reps
        ));
    }
    out
}

pub fn ratio_csv(report: &CompareReport) -> String {
    let mut out = String::from("n,alpha,ratio\n");
    for &(n, alpha, ratio) in &report.ratios {
        out.push_str(&format!("{n},{},{}\n", fmt_g12(alpha), fmt_g12(ratio)));
    }
    out
}

const SVG_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Renders mean MSE against n (log-x) with one polyline per alpha and
/// 95% error bars. Pure string construction; identical reports yield
/// identical bytes.
pub fn risk_svg(report: &RiskReport) -> String {
    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (60.0, 20.0, 20.0, 45.0);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    if report.rows.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let ns: Vec<usize> = {
        let mut v: Vec<usize> = report.rows.iter().map(|r| r.n).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut alphas: Vec<f64> = report.rows.iter().map(|r| r.alpha).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let (lx0, lx1) = ((ns[0] as f64).ln(), (*ns.last().unwrap() as f64).ln());
    let xr = if lx1 > lx0 { lx1 - lx0 } else { 1.0 };
    let ymax = report
        .rows
        .iter()
        .map(|r| r.ci_high)
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.05;
    let px = |n: usize| ml + ((n as f64).ln() - lx0) / xr * (w - ml - mr);
    let py = |v: f64| h - mb - (v.max(0.0) / ymax) * (h - mt - mb);
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ml:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{ml:.2}\" y1=\"{mt:.2}\" x2=\"{ml:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb,
        h - mb
    ));
    for &n in &ns {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{n}</text>\n",
            px(n),
            h - mb + 16.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">n (log scale)</text>\n\
         <text x=\"14\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 14 {:.2})\">mean MSE</text>\n\
         <text x=\"{ml:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        (ml + w - mr) / 2.0,
        h - 8.0,
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0,
        mt + 4.0,
        fmt_g12(ymax)
    ));
    for (ai, &alpha) in alphas.iter().enumerate() {
        let color = SVG_COLORS[ai % SVG_COLORS.len()];
        let rows: Vec<&RiskRow> = ns
            .iter()
            .filter_map(|&n| report.rows.iter().find(|r| r.n == n && r.alpha == alpha))
            .collect();
        let points: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.n), py(r.mean_mse)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            points.join(" ")
        ));
        for r in &rows {
            let x = px(r.n);
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{color}\"/>\n\
                 <circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                py(r.ci_low),
                py(r.ci_high),
                py(r.mean_mse)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"{color}\">alpha = {}</text>\n",
            w - mr - 90.0,
            mt + 14.0 * (ai as f64 + 1.0),
            fmt_g12(alpha)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `risk.csv` and `risk.svg` into `output_dir`.
pub fn emit(report: &RiskReport, output_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(output_dir)?;
    let mut csv = std::fs::File::create(output_dir.join("risk.csv"))?;
    csv.write_all(risk_csv(report).as_bytes())?;
    let mut svg = std::fs::File::create(output_dir.join("risk.svg"))?;
    svg.write_all(risk_svg(report).as_bytes())?;
    Ok(())
}

/// Writes the comparison artifacts: the semisupervised sweep via [`emit`],
/// plus `supervised.csv` and `ratio.csv`.
pub fn emit_compare(report: &CompareReport, output_dir: &Path) -> Result<()> {
    emit(&report.semisupervised, output_dir)?;
    let mut sup = std::fs::File::create(output_dir.join("supervised.csv"))?;
    sup.write_all(risk_csv(&report.supervised).as_bytes())?;
    let mut ratio = std::fs::File::create(output_dir.join("ratio.csv"))?;
    ratio.write_all(ratio_csv(report).as_bytes())?;
    Ok(())
}
