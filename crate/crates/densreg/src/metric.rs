//! Computable surrogate for the density-sensitive path metric.
//!
//! Distances between sample points are approximated by shortest paths on a
//! k-nearest-neighbor graph whose edges are weighted by a trapezoid-rule
//! quadrature of `exp(-alpha * p(x))` along the straight segment between the
//! endpoints, where `p` is the fitted density estimate. With `alpha = 0`
//! every edge weight is exactly the Euclidean segment length, so graph
//! distances reduce to Euclidean graph geodesics.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::sync::Arc;

use crate::density::Density;
use crate::error::{Error, Result};

/// Parameters controlling the graph surrogate of the metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    /// Density sensitivity; `0` recovers Euclidean geometry.
    pub alpha: f64,
    /// Neighbors per node when wiring the graph.
    pub k_neighbors: usize,
    /// Per-edge subdivision count for the quadrature.
    pub quadrature_segments: usize,
}

impl MetricParams {
    pub fn new(alpha: f64) -> Self {
        MetricParams {
            alpha,
            k_neighbors: 20,
            quadrature_segments: 16,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be nonnegative, got {}",
                self.alpha
            )));
        }
        if self.k_neighbors < 1 {
            return Err(Error::InvalidConfig("k_neighbors must be >= 1".into()));
        }
        if self.quadrature_segments < 1 {
            return Err(Error::InvalidConfig(
                "quadrature_segments must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams::new(0.0)
    }
}

/// Result of a shortest-path query.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDistance {
    /// Minimum summed edge weight, `+inf` when unreachable.
    pub value: f64,
    /// One optimal route (present iff `value` is finite).
    pub path: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
struct Edge {
    a: usize,
    b: usize,
    length: f64,
    /// Density values at the `segments + 1` quadrature points from `a` to `b`.
    samples: Vec<f64>,
}

/// Undirected k-NN graph with density-weighted edges.
///
/// Immutable after construction; all queries are pure.
pub struct MetricGraph {
    nodes: Vec<Vec<f64>>,
    dim: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, f64)>>,
    params: MetricParams,
    density: Arc<dyn Density + Send + Sync>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn sample_segment(
    density: &dyn Density,
    a: &[f64],
    b: &[f64],
    segments: usize,
) -> (f64, Vec<f64>) {
    let length = sq_dist(a, b).sqrt();
    let mut samples = Vec::with_capacity(segments + 1);
    let mut point = vec![0.0; a.len()];
    for i in 0..=segments {
        let t = i as f64 / segments as f64;
        for (j, slot) in point.iter_mut().enumerate() {
            *slot = a[j] + t * (b[j] - a[j]);
        }
        samples.push(density.density_at(&point));
    }
    (length, samples)
}

fn weight_from_samples(length: f64, samples: &[f64], alpha: f64) -> f64 {
    let segments = samples.len() - 1;
    let mut sum = 0.5 * (-alpha * samples[0]).exp();
    for s in &samples[1..segments] {
        sum += (-alpha * s).exp();
    }
    sum += 0.5 * (-alpha * samples[segments]).exp();
    length * (sum / segments as f64)
}

/// Quadrature weight of the straight segment from `a` to `b` under the
/// integrand `exp(-alpha * p(.))`. Returns `0` when `a = b`.
pub fn edge_weight(
    density: &dyn Density,
    a: &[f64],
    b: &[f64],
    alpha: f64,
    segments: usize,
) -> Result<f64> {
    if a.len() != density.dim() {
        return Err(Error::DimensionMismatch {
            expected: density.dim(),
            got: a.len(),
        });
    }
    if b.len() != density.dim() {
        return Err(Error::DimensionMismatch {
            expected: density.dim(),
            got: b.len(),
        });
    }
    let (length, samples) = sample_segment(density, a, b, segments);
    Ok(weight_from_samples(length, &samples, alpha))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Builds the undirected k-NN graph over `nodes`, weighting every edge by
/// [`edge_weight`]. Directed k-NN edges are mutualized into undirected ones
/// (union, not intersection); ties in the neighbor ranking break toward the
/// smaller node index. Disconnected graphs are joined by the
/// minimum-Euclidean-length inter-component bridges of a spanning structure
/// over the components, so every distance is finite.
pub fn build_graph(
    density: impl Density + Send + Sync + 'static,
    nodes: Vec<Vec<f64>>,
    params: MetricParams,
) -> Result<MetricGraph> {
    params.validate()?;
    if nodes.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let dim = nodes[0].len();
    if dim != density.dim() {
        return Err(Error::DimensionMismatch {
            expected: density.dim(),
            got: dim,
        });
    }
    for p in &nodes {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    let n = nodes.len();
    if params.k_neighbors >= n {
        return Err(Error::KTooLarge {
            k: params.k_neighbors,
            nodes: n,
        });
    }

    let cmp = |x: &(f64, usize), y: &(f64, usize)| {
        x.0.total_cmp(&y.0).then(x.1.cmp(&y.1))
    };

    let k = params.k_neighbors;
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        cand.clear();
        for (j, node) in nodes.iter().enumerate() {
            if j != i {
                cand.push((sq_dist(&nodes[i], node), j));
            }
        }
        cand.select_nth_unstable_by(k - 1, cmp);
        for &(_, j) in &cand[..k] {
            pairs.insert((i.min(j), i.max(j)));
        }
    }

    // Join components with minimum-Euclidean bridges (Kruskal over the
    // per-pair minimum cross edges).
    let mut uf = UnionFind::new(n);
    for &(a, b) in &pairs {
        uf.union(a, b);
    }
    let mut roots: BTreeSet<usize> = (0..n).map(|i| uf.find(i)).collect();
    if roots.len() > 1 {
        let comp: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        let mut best: HashMap<(usize, usize), (f64, usize, usize)> = HashMap::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if comp[i] == comp[j] {
                    continue;
                }
                let key = (comp[i].min(comp[j]), comp[i].max(comp[j]));
                let d2 = sq_dist(&nodes[i], &nodes[j]);
                let entry = best.entry(key).or_insert((f64::INFINITY, usize::MAX, usize::MAX));
                if (d2, i, j) < (entry.0, entry.1, entry.2) {
                    *entry = (d2, i, j);
                }
            }
        }
        let mut bridges: Vec<(f64, usize, usize)> = best.into_values().collect();
        bridges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        for (_, i, j) in bridges {
            if uf.union(i, j) {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
        roots = (0..n).map(|i| uf.find(i)).collect();
        debug_assert_eq!(roots.len(), 1);
    }
    let _ = roots;

    let segments = params.quadrature_segments;
    let edges: Vec<Edge> = pairs
        .into_iter()
        .map(|(a, b)| {
            let (length, samples) = sample_segment(&density, &nodes[a], &nodes[b], segments);
            Edge {
                a,
                b,
                length,
                samples,
            }
        })
        .collect();

    let adj = build_adjacency(n, &edges, params.alpha);
    Ok(MetricGraph {
        nodes,
        dim,
        edges,
        adj,
        params,
        density: Arc::new(density),
    })
}

fn build_adjacency(n: usize, edges: &[Edge], alpha: f64) -> Vec<Vec<(usize, f64)>> {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in edges {
        let w = weight_from_samples(e.length, &e.samples, alpha);
        adj[e.a].push((e.b, w));
        adj[e.b].push((e.a, w));
    }
    for list in &mut adj {
        list.sort_by_key(|&(j, _)| j);
    }
    adj
}

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_PRED: usize = usize::MAX;

fn dijkstra(adj: &[Vec<(usize, f64)>], seeds: &[(usize, f64)]) -> (Vec<f64>, Vec<usize>) {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut heap = BinaryHeap::new();
    for &(node, d) in seeds {
        if d < dist[node] {
            dist[node] = d;
            heap.push(HeapItem { dist: d, node });
        }
    }
    while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(HeapItem { dist: nd, node: v });
            } else if nd == dist[v] && u < pred[v] {
                // ties break toward the smaller predecessor index
                pred[v] = u;
            }
        }
    }
    (dist, pred)
}

impl MetricGraph {
    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &MetricParams {
        &self.params
    }

    pub fn density(&self) -> &Arc<dyn Density + Send + Sync> {
        &self.density
    }

    /// Undirected edge list as `(a, b, weight)` triples, `a < b`.
    pub fn edge_list(&self) -> Vec<(usize, usize, f64)> {
        self.edges
            .iter()
            .map(|e| {
                (
                    e.a,
                    e.b,
                    weight_from_samples(e.length, &e.samples, self.params.alpha),
                )
            })
            .collect()
    }

    /// Same topology and density samples, reweighted for a different alpha.
    /// Cheap compared to a rebuild; used when sweeping alpha over one graph.
    pub fn with_alpha(&self, alpha: f64) -> MetricGraph {
        let params = MetricParams {
            alpha,
            ..self.params
        };
        let adj = build_adjacency(self.nodes.len(), &self.edges, alpha);
        MetricGraph {
            nodes: self.nodes.clone(),
            dim: self.dim,
            edges: self.edges.clone(),
            adj,
            params,
            density: Arc::clone(&self.density),
        }
    }

    /// Dijkstra distance and one optimal route between two graph nodes.
    pub fn shortest_distance(&self, source: usize, target: usize) -> PathDistance {
        assert!(source < self.nodes.len() && target < self.nodes.len());
        let (dist, pred) = dijkstra(&self.adj, &[(source, 0.0)]);
        let value = dist[target];
        if !value.is_finite() {
            return PathDistance { value, path: None };
        }
        let mut path = vec![target];
        let mut cur = target;
        while cur != source {
            cur = pred[cur];
            debug_assert_ne!(cur, NO_PRED);
            path.push(cur);
        }
        path.reverse();
        PathDistance {
            value,
            path: Some(path),
        }
    }

    /// Single-source distances to every node.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        assert!(source < self.nodes.len());
        dijkstra(&self.adj, &[(source, 0.0)]).0
    }

    /// Distances from an out-of-sample query point to every node.
    ///
    /// The query is treated as a logical overlay node wired to its
    /// `k_neighbors` Euclidean nearest graph nodes (existing edges are not
    /// rewired); the overlay is private to this call, so concurrent queries
    /// never observe each other.
    pub fn distances_from_query(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let k = self.params.k_neighbors.min(self.nodes.len());
        let mut cand: Vec<(f64, usize)> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(j, node)| (sq_dist(x, node), j))
            .collect();
        let cmp =
            |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, cmp);
            cand.truncate(k);
        }
        let segments = self.params.quadrature_segments;
        let mut seeds = Vec::with_capacity(k);
        for &(_, j) in &cand {
            let (length, samples) =
                sample_segment(self.density.as_ref(), x, &self.nodes[j], segments);
            seeds.push((j, weight_from_samples(length, &samples, self.params.alpha)));
        }
        Ok(dijkstra(&self.adj, &seeds).0)
    }
}
