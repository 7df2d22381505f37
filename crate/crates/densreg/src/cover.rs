//! Empirical covering numbers of the graph metric.
//!
//! A greedy cover picks the lowest-index uncovered node as the next center
//! and removes everything within the radius; the resulting count is within a
//! factor of the optimum and, swept over radii, exposes the effective
//! dimension of the sampled support as the slope of `ln(count)` against
//! `ln(1/radius)`.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metric::MetricGraph;
use crate::util::fmt_g12;

/// Greedy cover of the graph nodes at one radius.
#[derive(Debug, Clone)]
pub struct CoverReport {
    pub radius: f64,
    /// Number of balls used.
    pub count: usize,
    /// Node indices of the ball centers, in selection order (increasing).
    pub centers: Vec<usize>,
}

/// Covering counts over several radii and the fitted scaling exponent.
#[derive(Debug, Clone)]
pub struct CoverSweep {
    /// `(radius, count)` pairs, one per requested radius.
    pub sweep: Vec<(f64, usize)>,
    /// Least-squares slope of `ln(count)` on `ln(1/radius)`; an estimate of
    /// the intrinsic dimension of the support at these scales.
    pub exponent_fit: f64,
}

/// Covers all nodes with metric balls of the given radius.
pub fn greedy_cover(graph: &MetricGraph, radius: f64) -> Result<CoverReport> {
    if graph.num_nodes() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidConfig("cover radius must be nonnegative".into()));
    }
    let n = graph.num_nodes();
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    for c in 0..n {
        if covered[c] {
            continue;
        }
        centers.push(c);
        let dist = graph.distances_from(c);
        for (i, &d) in dist.iter().enumerate() {
            if d <= radius {
                covered[i] = true;
            }
        }
    }
    Ok(CoverReport {
        radius,
        count: centers.len(),
        centers,
    })
}

/// Runs [`greedy_cover`] at every radius and fits the scaling exponent.
/// Requires at least three distinct positive radii.
pub fn exponent_sweep(graph: &MetricGraph, radii: &[f64]) -> Result<CoverSweep> {
    let mut rs: Vec<f64> = radii.to_vec();
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    if rs.len() < 3 {
        return Err(Error::DegenerateSweep(
            "need at least three distinct radii".into(),
        ));
    }
    if rs.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::DegenerateSweep(
            "radii must be positive and finite".into(),
        ));
    }
    let mut sweep = Vec::with_capacity(rs.len());
    for &r in &rs {
        sweep.push((r, greedy_cover(graph, r)?.count));
    }
    // OLS of ln(count) against ln(1/r)
    let xs: Vec<f64> = sweep.iter().map(|&(r, _)| (1.0 / r).ln()).collect();
    let ys: Vec<f64> = sweep.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateSweep("radii are not distinct".into()));
    }
    Ok(CoverSweep {
        sweep,
        exponent_fit: sxy / sxx,
    })
}

/// Writes a sweep as CSV with columns `radius,count`.
pub fn write_cover_csv(sweep: &CoverSweep, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "radius,count")?;
    for &(r, c) in &sweep.sweep {
        writeln!(out, "{},{c}", fmt_g12(r))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{fit_density, SmoothingKernel};
    use crate::metric::{build_graph, MetricParams};
    use crate::synth::{atoms_and_tubes, spread_atoms, CloudKind};

    fn params(alpha: f64, k: usize) -> MetricParams {
        MetricParams {
            k_neighbors: k,
            ..MetricParams::new(alpha)
        }
    }

    fn line_graph(n: usize, alpha: f64) -> MetricGraph {
        let points: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
        let density = fit_density(points.clone(), SmoothingKernel::Boxcar, 0.2).unwrap();
        build_graph(density, points, params(alpha, 4.min(n - 1))).unwrap()
    }

    #[test]
    fn huge_radius_single_ball() {
        let g = line_graph(30, 0.0);
        let cover = greedy_cover(&g, 100.0).unwrap();
        assert_eq!(cover.count, 1);
        assert_eq!(cover.centers, vec![0]);
    }

    #[test]
    fn two_points_split_below_their_distance() {
        let points = vec![vec![0.0], vec![1.0]];
        let density = fit_density(points.clone(), SmoothingKernel::Boxcar, 0.3).unwrap();
        let g = build_graph(density, points, params(0.0, 1)).unwrap();
        assert_eq!(greedy_cover(&g, 0.6).unwrap().count, 2);
        assert_eq!(greedy_cover(&g, 1.0).unwrap().count, 1);
    }

    #[test]
    fn three_atoms_need_at_most_three_balls() {
        let cloud =
            atoms_and_tubes(&CloudKind::PointMasses { atoms: spread_atoms(3, 2) }, 120, 9).unwrap();
        let density =
            fit_density(cloud.points.clone(), SmoothingKernel::Boxcar, 0.1).unwrap();
        let g = build_graph(density, cloud.points, MetricParams::new(0.0)).unwrap();
        for r in [1e-6, 0.01, 0.1] {
            assert!(greedy_cover(&g, r).unwrap().count <= 3);
        }
    }

    #[test]
    fn counts_decrease_with_radius() {
        let g = line_graph(60, 0.0);
        let sweep = exponent_sweep(&g, &[0.02, 0.05, 0.1, 0.2, 0.4]).unwrap();
        for pair in sweep.sweep.windows(2) {
            assert!(pair[0].1 >= pair[1].1, "counts not monotone: {:?}", sweep.sweep);
        }
        // one-dimensional support: slope near 1
        assert!(
            (sweep.exponent_fit - 1.0).abs() < 0.3,
            "exponent {}",
            sweep.exponent_fit
        );
    }

    #[test]
    fn alpha_shrinks_distances_and_covers() {
        // positive alpha contracts every edge (weights scale by
        // exp(-alpha * density) <= 1), so covers at a fixed radius need no
        // more balls than with alpha = 0
        let flat = line_graph(40, 0.0);
        let warped = line_graph(40, 3.0);
        for r in [0.05, 0.1, 0.2] {
            let a = greedy_cover(&flat, r).unwrap().count;
            let b = greedy_cover(&warped, r).unwrap().count;
            assert!(b <= a, "r={r}: {b} > {a}");
        }
    }

    #[test]
    fn sweep_input_validation() {
        let g = line_graph(10, 0.0);
        assert!(matches!(
            exponent_sweep(&g, &[0.1, 0.2]),
            Err(Error::DegenerateSweep(_))
        ));
        assert!(matches!(
            exponent_sweep(&g, &[0.1, 0.1, 0.1]),
            Err(Error::DegenerateSweep(_))
        ));
        assert!(matches!(
            exponent_sweep(&g, &[0.0, 0.1, 0.2]),
            Err(Error::DegenerateSweep(_))
        ));
        assert!(greedy_cover(&g, -1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = line_graph(20, 0.0);
        let sweep = exponent_sweep(&g, &[0.05, 0.1, 0.2]).unwrap();
        let dir = std::env::temp_dir().join("densreg_cover_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cover.csv");
        write_cover_csv(&sweep, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "radius,count");
        assert_eq!(lines.len(), 4);
        for (line, (r, c)) in lines[1..].iter().zip(sweep.sweep.iter()) {
            let mut parts = line.split(',');
            assert_eq!(parts.next().unwrap().parse::<f64>().unwrap(), *r);
            assert_eq!(parts.next().unwrap().parse::<usize>().unwrap(), *c);
        }
    }
}
