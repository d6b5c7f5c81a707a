//! Test-bed graphs: weighted paths, integer-line segments, explicit
//! truncations of homogeneous trees and the layer-indexed radial model.

use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{GraphBuilder, WeightedGraph};
use crate::io::fmt17;
use crate::tree_example::ExampleParams;

/// Default cap on vertices for explicit constructions.
pub const DEFAULT_VERTEX_BUDGET: usize = 1_000_000;

/// Path `0 – 1 – … – length` with edge `(i, i+1)` weighted `weight_fn(i)`.
pub fn make_path(length: usize, weight_fn: impl Fn(usize) -> f64) -> Result<WeightedGraph> {
    if length == 0 {
        return Err(Error::param("length", "must be at least 1"));
    }
    let mut b = GraphBuilder::new(length + 1);
    for i in 0..length {
        let w = weight_fn(i);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::param(
                "weight_fn",
                format!("weight {w} on edge ({i}, {}) is not positive", i + 1),
            ));
        }
        b.add_edge(i, i + 1, w);
    }
    b.finalize()
}

/// The segment `{-radius, …, radius}` of the integer line with unit weights.
#[derive(Debug, Clone)]
pub struct IntegerSegment {
    pub graph: WeightedGraph,
    pub radius: usize,
}

impl IntegerSegment {
    pub fn new(radius: usize) -> Result<Self> {
        Self::weighted(radius, |_| 1.0)
    }

    /// `weight_fn(k)` weights the edge between integers `k` and `k + 1`.
    pub fn weighted(radius: usize, weight_fn: impl Fn(i64) -> f64) -> Result<Self> {
        let r = radius as i64;
        let graph = make_path(2 * radius, |i| weight_fn(i as i64 - r))?;
        Ok(Self { graph, radius })
    }

    /// Vertex id of the integer 0.
    pub fn origin(&self) -> usize {
        self.radius
    }

    /// Vertex id of integer `k`, `|k| <= radius`.
    pub fn vertex(&self, k: i64) -> usize {
        assert!(k.unsigned_abs() as usize <= self.radius, "{k} outside segment");
        (k + self.radius as i64) as usize
    }

    pub fn label(&self, v: usize) -> i64 {
        v as i64 - self.radius as i64
    }
}

/// Explicit rooted truncation of T_N, numbered in breadth-first order so
/// that each sphere D_n occupies a contiguous id range. The root is vertex 0.
#[derive(Debug, Clone)]
pub struct TreeTruncation {
    pub graph: WeightedGraph,
    n_branch: usize,
    layer_start: Vec<usize>,
}

impl TreeTruncation {
    pub fn root(&self) -> usize {
        0
    }

    pub fn n_branch(&self) -> usize {
        self.n_branch
    }

    pub fn depth(&self) -> usize {
        self.layer_start.len() - 2
    }

    pub fn layer(&self, n: usize) -> Range<usize> {
        self.layer_start[n]..self.layer_start[n + 1]
    }

    pub fn layer_of(&self, v: usize) -> usize {
        self.layer_start.partition_point(|&s| s <= v) - 1
    }
}

/// Number of vertices of the depth-`depth` truncation of T_N, as a float so
/// that budget checks cannot overflow.
pub fn tree_vertex_count(n_branch: usize, depth: usize) -> f64 {
    let mut total = 1.0;
    let mut layer = 1.0;
    for n in 1..=depth {
        layer = if n == 1 {
            n_branch as f64
        } else {
            layer * (n_branch - 1) as f64
        };
        total += layer;
    }
    total
}

/// Truncation of T_N to depth `depth`: the root has N children and every
/// other internal vertex N − 1. Edges between D_n and D_{n+1} carry
/// `level_weight(n)`.
pub fn make_tree(
    n_branch: usize,
    depth: usize,
    level_weight: impl Fn(usize) -> f64,
    budget: usize,
) -> Result<TreeTruncation> {
    if n_branch < 2 {
        return Err(Error::param("N", "branching degree must be at least 2"));
    }
    if depth == 0 {
        return Err(Error::param("depth", "must be at least 1"));
    }
    let count = tree_vertex_count(n_branch, depth);
    if count > budget as f64 {
        return Err(Error::BudgetExceeded {
            requested: count,
            budget,
        });
    }
    let count = count as usize;
    let mut b = GraphBuilder::new(count);
    let mut layer_start = vec![0, 1];
    let mut next = 1;
    for n in 0..depth {
        let w = level_weight(n);
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::param(
                "level_weight",
                format!("weight {w} at level {n} is not positive"),
            ));
        }
        let children = if n == 0 { n_branch } else { n_branch - 1 };
        for parent in layer_start[n]..layer_start[n + 1] {
            for _ in 0..children {
                b.add_edge(parent, next, w);
                next += 1;
            }
        }
        layer_start.push(next);
    }
    debug_assert_eq!(next, count);
    Ok(TreeTruncation {
        graph: b.finalize()?,
        n_branch,
        layer_start,
    })
}

/// Layer-constant function on T_N: entry n is the value on D_n.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction(pub Vec<f64>);

impl RadialFunction {
    pub fn from_fn(depth: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self((0..=depth).map(f).collect())
    }

    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    pub fn get(&self, n: usize) -> f64 {
        self.0[n]
    }
}

/// (T_N, μ) with radial weights, stored through the reduced weights
/// w_n = (N−1)^n μ_n so that nothing overflows at large depth.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTreeModel {
    n_branch: usize,
    weights: Vec<f64>,
    params: Option<ExampleParams>,
}

impl RadialTreeModel {
    /// `weights[n]` is w_n for `0 <= n <= depth`.
    pub fn new(n_branch: usize, weights: Vec<f64>) -> Result<Self> {
        if n_branch < 2 {
            return Err(Error::param("N", "branching degree must be at least 2"));
        }
        if weights.len() < 2 {
            return Err(Error::param("depth", "must be at least 1"));
        }
        if let Some(n) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::param(
                "weights",
                format!("w_{n} = {} is not positive", weights[n]),
            ));
        }
        Ok(Self {
            n_branch,
            weights,
            params: None,
        })
    }

    pub fn from_fn(n_branch: usize, depth: usize, w: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new(n_branch, (0..=depth).map(w).collect())
    }

    pub fn params(&self) -> Option<&ExampleParams> {
        self.params.as_ref()
    }

    pub fn n_branch(&self) -> usize {
        self.n_branch
    }

    pub fn depth(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights[n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ln |D_n|, with |D_0| = 1 and |D_n| = N (N−1)^{n−1}.
    pub fn layer_log_size(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            let nb = self.n_branch as f64;
            nb.ln() + (n - 1) as f64 * (nb - 1.0).ln()
        }
    }

    /// μ(D_n) in the untruncated tree: N w_0 for n = 0, N (w_{n−1} + w_n) otherwise.
    pub fn layer_measure(&self, n: usize) -> f64 {
        let nb = self.n_branch as f64;
        if n == 0 {
            nb * self.weights[0]
        } else {
            nb * (self.weights[n - 1] + self.weights[n])
        }
    }

    /// μ(B(o, n)) = N (2 Σ_{k≤n} w_k − w_n) for `n <= depth`.
    pub fn ball_volume(&self, n: usize) -> f64 {
        let s: f64 = self.weights[..=n].iter().sum();
        self.n_branch as f64 * (2.0 * s - self.weights[n])
    }

    /// μ(B(o, n)) for `0 <= n <= n_max`, accumulated layer by layer.
    pub fn ball_volumes(&self, n_max: usize) -> Vec<f64> {
        let mut acc = 0.0;
        (0..=n_max.min(self.depth()))
            .map(|n| {
                acc += self.layer_measure(n);
                acc
            })
            .collect()
    }

    /// Laplacian of a radial function at layer `n < depth`.
    pub fn radial_laplacian(&self, u: &RadialFunction, n: usize) -> f64 {
        if n == 0 {
            u.get(1) - u.get(0)
        } else {
            let (wn, wp) = (self.weights[n], self.weights[n - 1]);
            (wn * u.get(n + 1) + wp * u.get(n - 1)) / (wn + wp) - u.get(n)
        }
    }

    /// Raw edge weight μ_n = w_n / (N−1)^n; only meaningful at small depth.
    pub fn raw_weight(&self, n: usize) -> f64 {
        self.weights[n] / ((self.n_branch - 1) as f64).powi(n as i32)
    }

    /// Text table `n w_n layer_log_size` with a parameter header.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        match &self.params {
            Some(p) => writeln!(
                out,
                "# radial model: sigma={} epsilon={} N={} n0={} depth={}",
                fmt17(p.sigma),
                fmt17(p.epsilon),
                self.n_branch,
                p.n0,
                self.depth()
            ),
            None => writeln!(
                out,
                "# radial model: N={} depth={}",
                self.n_branch,
                self.depth()
            ),
        }
        .unwrap();
        out.push_str("# n w_n layer_log_size\n");
        for n in 0..=self.depth() {
            writeln!(
                out,
                "{n} {} {}",
                fmt17(self.weights[n]),
                fmt17(self.layer_log_size(n))
            )
            .unwrap();
        }
        out
    }

    /// Parses the table written by [`to_table`](Self::to_table). Parameters
    /// in the header are not reconstructed; only N and the weights are.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut n_branch = None;
        let mut weights = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let t = line.trim();
            if let Some(h) = t.strip_prefix('#') {
                for tok in h.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("N=") {
                        n_branch = Some(v.parse::<usize>().map_err(|e| Error::Parse {
                            line: line_no,
                            message: format!("bad N: {e}"),
                        })?);
                    }
                }
                continue;
            }
            if t.is_empty() {
                continue;
            }
            let cols: Vec<&str> = t.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 columns, found {}", cols.len()),
                });
            }
            let n: usize = cols[0].parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad layer index: {e}"),
            })?;
            if n != weights.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected layer {}, found {n}", weights.len()),
                });
            }
            weights.push(cols[1].parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad weight: {e}"),
            })?);
        }
        let n_branch = n_branch.ok_or(Error::Parse {
            line: 1,
            message: "header does not name N".into(),
        })?;
        Self::new(n_branch, weights)
    }
}

/// Radial model of the example weights μ_n for the given parameters.
pub fn make_radial_model(params: &ExampleParams, depth: usize) -> Result<RadialTreeModel> {
    params.validate_shape()?;
    if depth == 0 {
        return Err(Error::param("depth", "must be at least 1"));
    }
    let mut model = RadialTreeModel::from_fn(params.n_branch, depth, |n| {
        params.reduced_weight(n as u64)
    })?;
    model.params = Some(params.clone());
    Ok(model)
}

/// Explicit depth-`depth` truncation carrying the model's raw weights, with
/// the lifted function x ↦ u_{d(o,x)}.
pub fn radial_to_explicit(
    model: &RadialTreeModel,
    u: &RadialFunction,
    depth: usize,
    budget: usize,
) -> Result<(TreeTruncation, VertexFunction)> {
    if depth > model.depth() || depth > u.depth() {
        return Err(Error::param(
            "depth",
            format!(
                "{depth} exceeds model depth {} or function depth {}",
                model.depth(),
                u.depth()
            ),
        ));
    }
    let tree = make_tree(model.n_branch(), depth, |n| model.raw_weight(n), budget)?;
    let lifted = VertexFunction::from_fn(tree.graph.num_vertices(), |v| u.get(tree.layer_of(v)));
    Ok((tree, lifted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths() {
        let g = make_path(2, |_| 1.0).unwrap();
        assert_eq!(g.measure(1), 2.0);
        let g = make_path(1, |_| 2.5).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.weight(0, 1), Some(2.5));
        let g = make_path(10, |i| (i + 1) as f64).unwrap();
        assert_eq!(g.measure(5), 5.0 + 6.0);
        assert!(make_path(0, |_| 1.0).is_err());
        assert!(make_path(3, |i| if i == 1 { 0.0 } else { 1.0 }).is_err());
    }

    #[test]
    fn segment_labels() {
        let s = IntegerSegment::new(5).unwrap();
        assert_eq!(s.graph.num_vertices(), 11);
        assert_eq!(s.label(s.vertex(-2)), -2);
        let ball: Vec<i64> = s
            .graph
            .ball(s.origin(), 2)
            .unwrap()
            .into_iter()
            .map(|v| s.label(v))
            .collect();
        assert_eq!(ball, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn small_trees() {
        let t = make_tree(3, 1, |_| 1.0, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(t.graph.num_vertices(), 4);
        assert_eq!(t.graph.degree(0), 3);
        let t = make_tree(3, 2, |_| 1.0, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(t.graph.num_vertices(), 10);
        assert_eq!(t.layer(2).len(), 6);
        let t = make_tree(3, 3, |_| 1.0, DEFAULT_VERTEX_BUDGET).unwrap();
        assert_eq!(t.graph.check_p0(), 3.0);
    }

    #[test]
    fn tree_budget() {
        let err = make_tree(3, 30, |_| 1.0, DEFAULT_VERTEX_BUDGET).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        assert!(make_tree(1, 3, |_| 1.0, 100).is_err());
    }

    #[test]
    fn layer_sizes_by_counting() {
        for nb in 2..=4 {
            for depth in 1..=6 {
                let t = make_tree(nb, depth, |_| 1.0, DEFAULT_VERTEX_BUDGET).unwrap();
                let dist = t.graph.distances_from(0).unwrap();
                for n in 1..=depth {
                    let counted = dist.iter().filter(|d| **d == Some(n)).count();
                    assert_eq!(counted, nb * (nb - 1).pow(n as u32 - 1));
                    assert_eq!(t.layer(n).len(), counted);
                    assert_eq!(t.layer_of(t.layer(n).start), n);
                }
            }
        }
    }

    #[test]
    fn star_lift() {
        let model = RadialTreeModel::new(4, vec![1.0, 1.0]).unwrap();
        let u = RadialFunction(vec![0.7, 0.2]);
        let (tree, f) = radial_to_explicit(&model, &u, 1, 100).unwrap();
        assert_eq!(f[0], 0.7);
        assert!((1..5).all(|v| f[v] == 0.2));
        assert_eq!(tree.graph.degree(0), 4);
    }

    #[test]
    fn table_round_trip() {
        let model = RadialTreeModel::from_fn(3, 5, |n| 1.0 / (n as f64 + 3.0)).unwrap();
        let back = RadialTreeModel::from_table(&model.to_table()).unwrap();
        assert_eq!(back, model);
        assert!(RadialTreeModel::from_table("0 1 0\n").is_err());
    }
}
