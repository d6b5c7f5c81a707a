//! Finite weighted graphs with vertex measures.
//!
//! A graph is assembled with [`GraphBuilder`], checked, and frozen into a
//! [`WeightedGraph`]. The frozen form stores a sorted adjacency list (CSR
//! layout) and caches the vertex measures μ(x) = Σ_{y∼x} μ_xy. Vertex ids are
//! dense integers `0..n`.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// A single structural problem found by [`GraphBuilder::validate`] or
/// [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SelfLoop { vertex: usize },
    NonPositiveWeight { x: usize, y: usize, weight: f64 },
    AsymmetricWeight { x: usize, y: usize, forward: f64, backward: f64 },
    DuplicateEdge { x: usize, y: usize },
    VertexOutOfRange { vertex: usize, num_vertices: usize },
    Disconnected { components: usize, witness: usize },
    MeasureMismatch { vertex: usize, cached: f64, recomputed: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            Violation::NonPositiveWeight { x, y, weight } => {
                write!(f, "non-positive weight {weight} on edge ({x}, {y})")
            }
            Violation::AsymmetricWeight {
                x,
                y,
                forward,
                backward,
            } => write!(
                f,
                "asymmetric weight on edge ({x}, {y}): {forward} vs {backward}"
            ),
            Violation::DuplicateEdge { x, y } => write!(f, "duplicate edge ({x}, {y})"),
            Violation::VertexOutOfRange {
                vertex,
                num_vertices,
            } => write!(f, "vertex {vertex} out of range (n = {num_vertices})"),
            Violation::Disconnected {
                components,
                witness,
            } => write!(
                f,
                "disconnected: {components} components, vertex {witness} unreachable from 0"
            ),
            Violation::MeasureMismatch {
                vertex,
                cached,
                recomputed,
            } => write!(
                f,
                "cached measure {cached} at vertex {vertex} differs from {recomputed}"
            ),
        }
    }
}

/// Mutable edge collection; produces a [`WeightedGraph`] via [`finalize`].
///
/// Edges may be listed in either orientation. Listing an edge in both
/// orientations with the same weight is accepted and merged; unequal weights
/// are an [`Violation::AsymmetricWeight`].
///
/// [`finalize`]: GraphBuilder::finalize
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    num_vertices: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl GraphBuilder {
    pub fn new(num_vertices: usize) -> Self {
        Self {
            num_vertices,
            entries: Vec::new(),
        }
    }

    /// Raises the vertex count so that `vertex` is in range.
    pub fn ensure_vertex(&mut self, vertex: usize) -> &mut Self {
        self.num_vertices = self.num_vertices.max(vertex + 1);
        self
    }

    pub fn add_edge(&mut self, x: usize, y: usize, weight: f64) -> &mut Self {
        self.entries.push((x, y, weight));
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    /// Merges orientations and reports every structural violation.
    fn merged(&self) -> (Vec<(usize, usize, f64)>, Vec<Violation>) {
        let n = self.num_vertices;
        let mut violations = Vec::new();
        // (min, max) -> (weight, orientation-of-first-listing)
        let mut seen: HashMap<(usize, usize), (f64, bool)> = HashMap::new();
        let mut merged = Vec::with_capacity(self.entries.len());
        for &(x, y, w) in &self.entries {
            for v in [x, y] {
                if v >= n {
                    violations.push(Violation::VertexOutOfRange {
                        vertex: v,
                        num_vertices: n,
                    });
                }
            }
            if x >= n || y >= n {
                continue;
            }
            if x == y {
                violations.push(Violation::SelfLoop { vertex: x });
                continue;
            }
            if !(w > 0.0) || !w.is_finite() {
                violations.push(Violation::NonPositiveWeight { x, y, weight: w });
                continue;
            }
            let key = (x.min(y), x.max(y));
            let forward = x < y;
            match seen.get(&key) {
                None => {
                    seen.insert(key, (w, forward));
                    merged.push((key.0, key.1, w));
                }
                Some(&(w0, f0)) => {
                    if f0 == forward {
                        violations.push(Violation::DuplicateEdge { x, y });
                    } else if w0 != w {
                        violations.push(Violation::AsymmetricWeight {
                            x,
                            y,
                            forward: w0,
                            backward: w,
                        });
                    }
                }
            }
        }
        (merged, violations)
    }

    /// All violations, including connectivity.
    pub fn validate(&self) -> Vec<Violation> {
        let (edges, mut violations) = self.merged();
        if violations.is_empty() {
            let g = WeightedGraph::from_canonical(self.num_vertices, edges);
            violations.extend(connectivity_violation(&g));
        }
        violations
    }

    /// Freezes the graph. Structural violations are errors; a disconnected
    /// graph is accepted (queries report unreachable pairs explicitly).
    pub fn finalize(self) -> Result<WeightedGraph> {
        let (edges, violations) = self.merged();
        if !violations.is_empty() {
            return Err(Error::InvalidGraph(violations));
        }
        Ok(WeightedGraph::from_canonical(self.num_vertices, edges))
    }
}

/// Immutable weighted graph with cached vertex measures.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    measures: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    fn from_canonical(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Self {
        edges.sort_by_key(|e| (e.0, e.1));
        let mut degree = vec![0usize; n];
        for &(x, y, _) in &edges {
            degree[x] += 1;
            degree[y] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0usize; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for &(x, y, w) in &edges {
            targets[fill[x]] = y;
            weights[fill[x]] = w;
            fill[x] += 1;
            targets[fill[y]] = x;
            weights[fill[y]] = w;
            fill[y] += 1;
        }
        // Sort each row by neighbour id so iteration order is canonical.
        for v in 0..n {
            let (a, b) = (offsets[v], offsets[v + 1]);
            let mut row: Vec<(usize, f64)> = targets[a..b]
                .iter()
                .copied()
                .zip(weights[a..b].iter().copied())
                .collect();
            row.sort_by_key(|&(t, _)| t);
            for (i, (t, w)) in row.into_iter().enumerate() {
                targets[a + i] = t;
                weights[a + i] = w;
            }
        }
        let measures = (0..n)
            .map(|v| pairwise_sum(&weights[offsets[v]..offsets[v + 1]]))
            .collect();
        Self {
            offsets,
            targets,
            weights,
            measures,
            edges,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.measures.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.num_vertices()
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::UnknownVertex {
                vertex: x,
                num_vertices: self.num_vertices(),
            })
        }
    }

    /// Neighbours of `x` with edge weights, ordered by neighbour id.
    pub fn neighbors(&self, x: usize) -> impl ExactSizeIterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.offsets[x], self.offsets[x + 1]);
        self.targets[a..b]
            .iter()
            .copied()
            .zip(self.weights[a..b].iter().copied())
    }

    pub fn neighbor_ids(&self, x: usize) -> &[usize] {
        &self.targets[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn neighbor_weights(&self, x: usize) -> &[f64] {
        &self.weights[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// Weight μ_xy, or `None` when x and y are not adjacent.
    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        let ids = self.neighbor_ids(x);
        ids.binary_search(&y)
            .ok()
            .map(|i| self.neighbor_weights(x)[i])
    }

    /// Canonical edge list with `x < y`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Cached μ(x). Panics when `x` is out of range.
    pub fn measure(&self, x: usize) -> f64 {
        self.measures[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn vertex_measure(&self, x: usize) -> Result<f64> {
        self.check_vertex(x)?;
        Ok(self.measures[x])
    }

    pub fn total_measure(&self) -> f64 {
        pairwise_sum(&self.measures)
    }

    /// Breadth-first distances from `o`; `None` marks unreachable vertices.
    pub fn distances_from(&self, o: usize) -> Result<Vec<Option<usize>>> {
        self.check_vertex(o)?;
        let mut dist = vec![None; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[o] = Some(0);
        queue.push_back(o);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap();
            for &y in self.neighbor_ids(x) {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        Ok(dist)
    }

    /// Graph distance; `Ok(None)` when `x` and `y` lie in different components.
    pub fn graph_distance(&self, x: usize, y: usize) -> Result<Option<usize>> {
        self.check_vertex(y)?;
        Ok(self.distances_from(x)?[y])
    }

    /// Closed ball B(o, n), sorted by vertex id.
    pub fn ball(&self, o: usize, n: usize) -> Result<Vec<usize>> {
        let dist = self.distances_from(o)?;
        Ok(dist
            .iter()
            .enumerate()
            .filter_map(|(v, d)| matches!(d, Some(d) if *d <= n).then_some(v))
            .collect())
    }

    /// Entry `n` is μ(B(o, n)) for `0 <= n <= n_max`.
    pub fn volume_profile(&self, o: usize, n_max: usize) -> Result<Vec<f64>> {
        let dist = self.distances_from(o)?;
        let mut shells = vec![Vec::new(); n_max + 1];
        for (v, d) in dist.iter().enumerate() {
            if let Some(d) = *d {
                if d <= n_max {
                    shells[d].push(self.measures[v]);
                }
            }
        }
        let mut acc = 0.0;
        Ok(shells
            .iter()
            .map(|s| {
                acc += pairwise_sum(s);
                acc
            })
            .collect())
    }

    /// The least p with μ_xy / μ(x) >= 1/p on every directed edge, i.e.
    /// max μ(x)/μ_xy. Returns 1 for a graph without edges.
    pub fn check_p0(&self) -> f64 {
        let mut best: f64 = 1.0;
        for x in 0..self.num_vertices() {
            for &w in self.neighbor_weights(x) {
                best = best.max(self.measures[x] / w);
            }
        }
        best
    }

    pub fn connected_components(&self) -> Vec<usize> {
        let n = self.num_vertices();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &y in self.neighbor_ids(x) {
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        queue.push_back(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        connectivity_violation(self).is_none()
    }

    /// Largest graph distance from `o` among reachable vertices.
    pub fn eccentricity(&self, o: usize) -> Result<usize> {
        Ok(self
            .distances_from(o)?
            .into_iter()
            .flatten()
            .max()
            .unwrap_or(0))
    }

    /// Copies the edge list back into a builder.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new(self.num_vertices());
        for &(x, y, w) in &self.edges {
            b.add_edge(x, y, w);
        }
        b
    }
}

fn connectivity_violation(g: &WeightedGraph) -> Option<Violation> {
    let comp = g.connected_components();
    let components = comp.iter().copied().max().map_or(0, |m| m + 1);
    if components <= 1 {
        return None;
    }
    let witness = comp.iter().position(|&c| c != 0).unwrap_or(0);
    Some(Violation::Disconnected {
        components,
        witness,
    })
}

/// Re-checks a frozen graph: connectivity, adjacency symmetry and the cached
/// measures. Empty iff the graph is a well-formed connected weighted graph.
pub fn validate(g: &WeightedGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for x in 0..g.num_vertices() {
        let recomputed: f64 = g.neighbor_weights(x).iter().sum();
        let cached = g.measure(x);
        if (cached - recomputed).abs() > 4.0 * f64::EPSILON * recomputed.abs() {
            out.push(Violation::MeasureMismatch {
                vertex: x,
                cached,
                recomputed,
            });
        }
        for (y, w) in g.neighbors(x) {
            if y == x {
                out.push(Violation::SelfLoop { vertex: x });
            } else if g.weight(y, x) != Some(w) && x < y {
                out.push(Violation::AsymmetricWeight {
                    x,
                    y,
                    forward: w,
                    backward: g.weight(y, x).unwrap_or(0.0),
                });
            }
        }
    }
    out.extend(connectivity_violation(g));
    out
}
