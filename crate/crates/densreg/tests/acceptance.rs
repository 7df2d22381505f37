//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single PASS/FAIL line so the suite doubles as a checklist.

use std::collections::HashMap;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use densreg::adapt::{self, HyperParams, ParamGrid};
use densreg::cover::{exponent_sweep, greedy_cover};
use densreg::density::{fit_density, Density, DensityModel, SmoothingKernel};
use densreg::harness::{
    compare_supervised, run_experiment, ExperimentConfig, GeneratorConfig, HRule,
};
use densreg::metric::{build_graph, MetricGraph, MetricParams};
use densreg::regress::{LabeledSample, UnlabeledCloud};
use densreg::synth::{atoms_and_tubes, spread_atoms, CloudKind, SwissRollConfig, TendrilConfig};

fn criterion(label: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("ACCEPTANCE {label}: PASS"),
        Err(cause) => {
            println!("ACCEPTANCE {label}: FAIL");
            resume_unwind(cause);
        }
    }
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, dim: usize, alpha: f64) -> MetricGraph {
    let points = random_points(rng, n, dim);
    let sigma = rng.gen_range(0.3..0.8);
    let density = fit_density(points.clone(), SmoothingKernel::Boxcar, sigma).unwrap();
    let params = MetricParams {
        alpha,
        k_neighbors: rng.gen_range(1..n.min(6)),
        quadrature_segments: 8,
    };
    build_graph(density, points, params).unwrap()
}

/// Criterion 1: on the swiss roll with a fixed moderate bandwidth, positive
/// density sensitivity clearly helps when labels are scarce and stops
/// helping once labels are plentiful.
#[test]
fn small_sample_alpha_advantage() {
    criterion("1 (small-sample alpha advantage)", || {
        let config = ExperimentConfig {
            generator: GeneratorConfig::SwissRoll(SwissRollConfig::default()),
            n_grid: vec![5, 10, 20, 320],
            alpha_grid: vec![0.0, 0.05, 0.1, 0.2, 0.3],
            repetitions: 50,
            metric_params: MetricParams::new(0.0),
            sigma: 0.2,
            h_rule: HRule::Fixed(0.15),
            master_seed: 42,
        };
        let report = run_experiment(&config).unwrap();
        let row = |n: usize, alpha: f64| {
            report
                .rows
                .iter()
                .find(|r| r.n == n && r.alpha == alpha)
                .unwrap()
        };
        let best_positive = |n: usize| {
            report
                .rows
                .iter()
                .filter(|r| r.n == n && r.alpha > 0.0)
                .min_by(|a, b| a.mean_mse.total_cmp(&b.mean_mse))
                .unwrap()
        };
        for n in [5, 10, 20] {
            let base = row(n, 0.0);
            let best = best_positive(n);
            assert!(
                best.mean_mse < base.mean_mse,
                "n={n}: best positive alpha {} not below alpha=0 ({} vs {})",
                best.alpha,
                best.mean_mse,
                base.mean_mse
            );
        }
        // scarcest labels: the advantage is significant, not just nominal
        let base5 = row(5, 0.0);
        let best5 = best_positive(5);
        assert!(
            best5.ci_high < base5.ci_low,
            "n=5 confidence intervals overlap: [{}, {}] vs [{}, {}]",
            best5.ci_low,
            best5.ci_high,
            base5.ci_low,
            base5.ci_high
        );
        // abundant labels: no significant positive-alpha advantage remains
        let base320 = row(320, 0.0);
        let best320 = best_positive(320);
        assert!(
            best320.mean_mse >= base320.ci_low,
            "n=320: positive alpha still significantly better ({} < {})",
            best320.mean_mse,
            base320.ci_low
        );
    });
}

struct Shifted {
    inner: DensityModel,
    eps: f64,
}

impl Density for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn density_at(&self, x: &[f64]) -> f64 {
        self.inner.density_at(x) + self.eps
    }
}

/// Criterion 2: adding a constant eps to the density multiplies every edge
/// weight by exp(-alpha * eps), so all graph distances are sandwiched.
#[test]
fn density_shift_sandwich() {
    criterion("2 (density-shift sandwich)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..1000 {
            let n = rng.gen_range(5..20);
            let dim = rng.gen_range(1..4);
            let alpha = if rng.gen::<bool>() { 1.0 } else { 4.0 };
            let eps = rng.gen_range(f64::EPSILON..=0.5);
            let points = random_points(&mut rng, n, dim);
            let sigma = rng.gen_range(0.3..0.8);
            let density =
                fit_density(points.clone(), SmoothingKernel::Boxcar, sigma).unwrap();
            let params = MetricParams {
                alpha,
                k_neighbors: rng.gen_range(1..n.min(5)),
                quadrature_segments: 8,
            };
            let g1 = build_graph(density.clone(), points.clone(), params).unwrap();
            let g2 = build_graph(Shifted { inner: density, eps }, points, params).unwrap();
            let (lo, hi) = ((-alpha * eps).exp(), (alpha * eps).exp());
            for i in 0..n {
                let d1 = g1.distances_from(i);
                let d2 = g2.distances_from(i);
                for j in 0..n {
                    let (lower, upper) = (lo * d1[j], hi * d1[j]);
                    assert!(
                        d2[j] >= lower - 1e-9 * (1.0 + lower)
                            && d2[j] <= upper + 1e-9 * (1.0 + upper),
                        "trial {trial}: d1={} d2={} bounds [{lower}, {upper}]",
                        d1[j],
                        d2[j]
                    );
                }
            }
        }
    });
}

/// Independent shortest-path pass over explicit undirected edges, summing
/// along the path in visit order.
fn reference_dijkstra(n: usize, edges: &[(usize, usize, f64)], source: usize) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, w) in edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    loop {
        let mut next: Option<usize> = None;
        for v in 0..n {
            if !done[v]
                && dist[v].is_finite()
                && next.is_none_or(|u| dist[v] < dist[u])
            {
                next = Some(v);
            }
        }
        let Some(u) = next else { break };
        done[u] = true;
        for &(v, w) in &adj[u] {
            let cand = dist[u] + w;
            if cand < dist[v] {
                dist[v] = cand;
            }
        }
    }
    dist
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Criterion 3: at alpha = 0 every edge weight is bitwise the Euclidean
/// segment length and graph distances equal Euclidean-weight geodesics.
#[test]
fn euclidean_degeneracy() {
    criterion("3 (alpha=0 Euclidean degeneracy)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..1000 {
            let n = rng.gen_range(4..14);
            let dim = rng.gen_range(1..4);
            let g = random_graph(&mut rng, n, dim, 0.0);
            let edges = g.edge_list();
            let euclid_edges: Vec<(usize, usize, f64)> = edges
                .iter()
                .map(|&(a, b, w)| {
                    let len = euclidean(&g.nodes()[a], &g.nodes()[b]);
                    assert_eq!(w, len, "trial {trial}: edge ({a},{b}) weight not Euclidean");
                    (a, b, len)
                })
                .collect();
            for source in 0..n {
                let ours = g.distances_from(source);
                let oracle = reference_dijkstra(n, &euclid_edges, source);
                assert_eq!(ours, oracle, "trial {trial}, source {source}");
            }
        }
    });
}

fn min_over_simple_paths(
    n: usize,
    adj: &[Vec<(usize, f64)>],
    current: usize,
    target: usize,
    visited: &mut Vec<bool>,
    acc: f64,
    best: &mut f64,
) {
    if current == target {
        if acc < *best {
            *best = acc;
        }
        return;
    }
    let _ = n;
    for &(next, w) in &adj[current] {
        if !visited[next] {
            visited[next] = true;
            min_over_simple_paths(n, adj, next, target, visited, acc + w, best);
            visited[next] = false;
        }
    }
}

/// Criterion 4: graph distances equal the minimum over all simple paths,
/// checked exhaustively on small graphs.
#[test]
fn shortest_path_oracle() {
    criterion("4 (shortest-path enumeration oracle)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..500 {
            let n = rng.gen_range(3..=8);
            let alpha = [0.0, 1.0, 3.0][rng.gen_range(0..3)];
            let g = random_graph(&mut rng, n, 2, alpha);
            let mut adj = vec![Vec::new(); n];
            for (a, b, w) in g.edge_list() {
                adj[a].push((b, w));
                adj[b].push((a, w));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut best = f64::INFINITY;
                    let mut visited = vec![false; n];
                    visited[i] = true;
                    min_over_simple_paths(n, &adj, i, j, &mut visited, 0.0, &mut best);
                    let got = g.shortest_distance(i, j);
                    assert_eq!(got.value, best, "trial {trial}, pair ({i},{j})");
                }
            }
        }
    });
}

/// Criterion 5: symmetry, identity and the triangle inequality hold on
/// random graphs.
#[test]
fn metric_axioms() {
    criterion("5 (metric axioms)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..200 {
            let n = rng.gen_range(4..14);
            let dim = rng.gen_range(1..4);
            let alpha = rng.gen_range(0.0..2.0);
            let g = random_graph(&mut rng, n, dim, alpha);
            let dist: Vec<Vec<f64>> = (0..n).map(|i| g.distances_from(i)).collect();
            for i in 0..n {
                assert_eq!(dist[i][i], 0.0, "trial {trial}: d({i},{i}) != 0");
                for j in 0..n {
                    if i != j {
                        assert!(dist[i][j] > 0.0, "trial {trial}: d({i},{j}) not positive");
                    }
                    assert!(
                        (dist[i][j] - dist[j][i]).abs() <= 1e-9 * (1.0 + dist[i][j]),
                        "trial {trial}: asymmetry at ({i},{j})"
                    );
                    for k in 0..n {
                        assert!(
                            dist[i][j] <= dist[i][k] + dist[k][j] + 1e-9 * (1.0 + dist[i][j]),
                            "trial {trial}: triangle violated at ({i},{k},{j})"
                        );
                    }
                }
            }
        }
    });
}

fn cloud_graph(points: Vec<Vec<f64>>, sigma: f64, k: usize) -> MetricGraph {
    let density = fit_density(points.clone(), SmoothingKernel::Boxcar, sigma).unwrap();
    build_graph(
        density,
        points,
        MetricParams {
            alpha: 0.0,
            k_neighbors: k,
            quadrature_segments: 8,
        },
    )
    .unwrap()
}

/// Criterion 6: fitted covering exponents recover the intrinsic dimension
/// of simple supports.
#[test]
fn covering_exponents() {
    criterion("6 (covering exponents)", || {
        // 1D: uniform segment embedded in the plane
        let line = atoms_and_tubes(
            &CloudKind::SegmentTube {
                dim: 2,
                r: 1,
                gamma: 0.0,
            },
            300,
            60,
        )
        .unwrap();
        let g = cloud_graph(line.points, 0.2, 8);
        let sweep = exponent_sweep(&g, &[0.02, 0.04, 0.08, 0.16, 0.32]).unwrap();
        assert!(
            (sweep.exponent_fit - 1.0).abs() < 0.3,
            "segment exponent {}",
            sweep.exponent_fit
        );

        // 2D: uniform square embedded in three dimensions
        let square = atoms_and_tubes(
            &CloudKind::SegmentTube {
                dim: 3,
                r: 2,
                gamma: 0.0,
            },
            600,
            61,
        )
        .unwrap();
        let g = cloud_graph(square.points, 0.25, 12);
        // radii large enough that metric balls span several graph hops;
        // below that scale the discrete graph inflates covering counts
        let sweep = exponent_sweep(&g, &[0.1, 0.15, 0.22, 0.33]).unwrap();
        assert!(
            (sweep.exponent_fit - 2.0).abs() < 0.4,
            "square exponent {}",
            sweep.exponent_fit
        );

        // point masses: counts pinned at the number of atoms
        let atoms = atoms_and_tubes(
            &CloudKind::PointMasses {
                atoms: spread_atoms(3, 2),
            },
            150,
            62,
        )
        .unwrap();
        let g = cloud_graph(atoms.points, 0.1, 8);
        for r in [0.02, 0.05, 0.1] {
            assert!(greedy_cover(&g, r).unwrap().count <= 3);
        }
        let sweep = exponent_sweep(&g, &[0.02, 0.05, 0.1]).unwrap();
        assert!(
            sweep.exponent_fit.abs() < 0.2,
            "atom exponent {}",
            sweep.exponent_fit
        );
    });
}

/// Criterion 7: cross-validation always returns the table argmin, never
/// does worse than the best alpha=0 candidate, and finds a perfect
/// zero-risk configuration when one exists.
#[test]
fn cv_argmin_and_degradation() {
    criterion("7 (cv argmin and degradation)", || {
        let metric_params = MetricParams {
            alpha: 0.0,
            k_neighbors: 2,
            quadrature_segments: 8,
        };

        // randomized trials: argmin and degradation
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let m = rng.gen_range(5..12);
            let n = rng.gen_range(4..10);
            let dim = rng.gen_range(1..3);
            let unlabeled = UnlabeledCloud::new(random_points(&mut rng, m, dim));
            let xs = random_points(&mut rng, n, dim);
            let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let labeled = LabeledSample::new(xs, ys, 1.0).unwrap();
            let grid = ParamGrid {
                hs: vec![0.1, 0.5, 2.0],
                alphas: vec![0.0, 1.0, 4.0],
                sigmas: vec![0.3, 0.6],
            };
            let report =
                adapt::select(&unlabeled, &labeled, &grid, &metric_params, trial).unwrap();
            let table_min = report
                .table
                .iter()
                .map(|&(_, risk)| risk)
                .fold(f64::INFINITY, f64::min);
            let selected_risk = report
                .table
                .iter()
                .find(|(p, _)| *p == report.selected)
                .map(|&(_, risk)| risk)
                .unwrap();
            assert_eq!(selected_risk, table_min, "trial {trial}: not the argmin");
            let best_zero_alpha = report
                .table
                .iter()
                .filter(|(p, _)| p.alpha == 0.0)
                .map(|&(_, risk)| risk)
                .fold(f64::INFINITY, f64::min);
            assert!(
                selected_risk <= best_zero_alpha,
                "trial {trial}: degradation bound violated"
            );
        }

        // deterministic noiseless instance with a perfect candidate: two
        // label clusters; a small bandwidth reproduces the labels exactly
        // once each half of the split holds one point from each cluster
        let unlabeled = UnlabeledCloud::new(vec![vec![0.1], vec![0.45], vec![0.55], vec![0.9]]);
        let labeled = LabeledSample::new(
            vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]],
            vec![0.0, 0.0, 1.0, 1.0],
            1.0,
        )
        .unwrap();
        let grid = ParamGrid {
            hs: vec![0.1, 10.0],
            alphas: vec![0.0],
            sigmas: vec![0.5],
        };
        let mut checked = false;
        for seed in 0..64 {
            let (train, _) = adapt::split(&labeled, seed).unwrap();
            // balanced split: training half sees both clusters
            if train.ys.iter().sum::<f64>() != 1.0 {
                continue;
            }
            let report =
                adapt::select(&unlabeled, &labeled, &grid, &metric_params, seed).unwrap();
            let selected_risk = report
                .table
                .iter()
                .find(|(p, _)| *p == report.selected)
                .map(|&(_, risk)| risk)
                .unwrap();
            assert_eq!(selected_risk, 0.0, "seed {seed}: perfect candidate missed");
            assert_eq!(
                report.selected,
                HyperParams {
                    h: 0.1,
                    alpha: 0.0,
                    sigma: 0.5
                }
            );
            checked = true;
        }
        assert!(checked, "no balanced split found");
    });
}

/// Criterion 8: on the tendril distribution in four dimensions, the
/// semisupervised estimator beats the labeled-only baseline at small n.
#[test]
fn supervised_comparison() {
    criterion("8 (semisupervised effectiveness)", || {
        let config = ExperimentConfig {
            generator: GeneratorConfig::Tendril {
                config: TendrilConfig::alternating(4, 0.25, 8.0, 0).unwrap(),
                n_total: 400,
            },
            n_grid: vec![8, 16],
            alpha_grid: vec![4.0],
            repetitions: 30,
            metric_params: MetricParams::new(0.0),
            sigma: 0.1,
            h_rule: HRule::Fixed(0.05),
            master_seed: 8,
        };
        let report = compare_supervised(&config).unwrap();
        for &n in &[8usize, 16] {
            let (_, alpha, ratio) = *report
                .ratios
                .iter()
                .find(|(rn, _, _)| *rn == n)
                .unwrap();
            assert!(
                ratio < 1.0,
                "n={n}, alpha={alpha}: risk ratio {ratio} not below 1"
            );
        }
    });
}

/// Criterion 9: the `simulate` subcommand is byte-deterministic.
#[test]
fn simulate_determinism() {
    criterion("9 (simulate determinism)", || {
        let dir = std::env::temp_dir().join("densreg_acceptance_determinism");
        std::fs::create_dir_all(&dir).unwrap();
        let config_path = dir.join("sim.conf");
        std::fs::write(
            &config_path,
            "generator = swiss_roll\n\
             n_total = 80\n\
             n_grid = 5,10\n\
             alpha_grid = 0,0.2\n\
             repetitions = 3\n\
             k = 6\n\
             sigma = 0.2\n\
             h = 0.15\n\
             seed = 9\n",
        )
        .unwrap();
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.join(format!("run{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_densreg"))
                .args([
                    "simulate",
                    "--config",
                    config_path.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                ])
                .status()
                .unwrap();
            assert!(status.success());
            outputs.push(std::fs::read(out.join("risk.csv")).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "risk.csv differs between runs");
        assert!(!outputs[0].is_empty());
    });
}

/// Every printed criterion line corresponds to a real test above; this
/// guard keeps the labels unique and the numbering dense.
#[test]
fn criterion_labels_are_consistent() {
    let labels = [
        "1 (small-sample alpha advantage)",
        "2 (density-shift sandwich)",
        "3 (alpha=0 Euclidean degeneracy)",
        "4 (shortest-path enumeration oracle)",
        "5 (metric axioms)",
        "6 (covering exponents)",
        "7 (cv argmin and degradation)",
        "8 (semisupervised effectiveness)",
        "9 (simulate determinism)",
    ];
    let mut seen = HashMap::new();
    for label in labels {
        let number: u32 = label.split(' ').next().unwrap().parse().unwrap();
        assert!(seen.insert(number, label).is_none());
    }
    assert_eq!(seen.len(), 9);
}
