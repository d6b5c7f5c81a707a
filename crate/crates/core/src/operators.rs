//! Graph Laplacian, semilinear residual and the summation-by-parts identity.
//!
//! Double sums "over x, y ∈ V" run over ordered adjacent pairs, so every
//! unordered edge contributes twice.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::generators::TreeTruncation;
use crate::graph::WeightedGraph;
use crate::io::fmt17;
use crate::numeric::{nonneg_pow, pairwise_sum};

const PAR_THRESHOLD: usize = 4096;

/// Marks which vertices of a finite truncation are interior, i.e. have all
/// of their ambient-graph neighbours present. Inequality verdicts are only
/// issued on interior vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteriorMask(Vec<bool>);

impl InteriorMask {
    pub fn from_flags(flags: Vec<bool>) -> Self {
        Self(flags)
    }

    /// Every vertex interior (the graph is taken as the whole space).
    pub fn all(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// Interior iff d(o, x) < radius.
    pub fn within_radius(g: &WeightedGraph, o: usize, radius: usize) -> Result<Self> {
        let d = g.distances_from(o)?;
        Ok(Self(
            d.into_iter()
                .map(|d| matches!(d, Some(d) if d < radius))
                .collect(),
        ))
    }

    /// Interior iff the vertex has the ambient degree (regular ambient graphs
    /// such as the integer line or T_N).
    pub fn by_degree(g: &WeightedGraph, ambient_degree: usize) -> Self {
        Self(
            (0..g.num_vertices())
                .map(|x| g.degree(x) == ambient_degree)
                .collect(),
        )
    }

    /// Interior iff the vertex lies strictly above the last layer.
    pub fn for_tree(tree: &TreeTruncation) -> Self {
        let depth = tree.depth();
        Self(
            (0..tree.graph.num_vertices())
                .map(|v| tree.layer_of(v) < depth)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_interior(&self, x: usize) -> bool {
        self.0[x]
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter_map(|(x, &f)| f.then_some(x))
    }

    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter_map(|(x, &f)| (!f).then_some(x))
    }

    pub fn interior_count(&self) -> usize {
        self.0.iter().filter(|&&f| f).count()
    }

    pub fn check_domain(&self, g: &WeightedGraph) -> Result<()> {
        if self.len() != g.num_vertices() {
            return Err(Error::DomainMismatch {
                expected: g.num_vertices(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

fn laplacian_at(g: &WeightedGraph, u: &VertexFunction, x: usize) -> f64 {
    let mx = g.measure(x);
    if mx == 0.0 {
        return 0.0;
    }
    let ux = u[x];
    let s: f64 = g.neighbors(x).map(|(y, w)| w * (u[y] - ux)).sum();
    s / mx
}

/// Δu(x) = (1/μ(x)) Σ_{y∼x} μ_xy (u(y) − u(x)).
pub fn laplacian(g: &WeightedGraph, u: &VertexFunction) -> Result<VertexFunction> {
    u.check_domain(g)?;
    let n = g.num_vertices();
    let values: Vec<f64> = if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(|x| laplacian_at(g, u, x)).collect()
    } else {
        (0..n).map(|x| laplacian_at(g, u, x)).collect()
    };
    Ok(VertexFunction::new(values))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("{sigma} is not positive")));
    }
    Ok(())
}

/// x ↦ Δu(x) + u(x)^σ for nonnegative u.
pub fn residual(g: &WeightedGraph, u: &VertexFunction, sigma: f64) -> Result<VertexFunction> {
    check_sigma(sigma)?;
    u.check_domain(g)?;
    u.check_nonnegative()?;
    let lap = laplacian(g, u)?;
    Ok(VertexFunction::from_fn(g.num_vertices(), |x| {
        lap[x] + nonneg_pow(u[x], sigma)
    }))
}

/// Outcome of checking Δu + u^σ ≤ tol on the interior of a truncation.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub sigma: f64,
    pub tolerance: f64,
    pub residuals: VertexFunction,
    pub interior_count: usize,
    /// Interior vertices with residual > tolerance, ascending by id.
    pub violations: Vec<(usize, f64)>,
    /// Maximum residual over interior vertices (−∞ when there are none).
    pub max_residual: f64,
    /// Maximum residual over boundary vertices; informational only.
    pub boundary_max_residual: f64,
}

impl InequalityReport {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }

    /// Structured text report listing at most the first 20 violations.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "inequality: laplacian(u) + u^sigma <= tolerance").unwrap();
        writeln!(out, "sigma = {}", fmt17(self.sigma)).unwrap();
        writeln!(out, "tolerance = {}", fmt17(self.tolerance)).unwrap();
        writeln!(out, "vertices = {}", self.residuals.len()).unwrap();
        writeln!(out, "interior_vertices = {}", self.interior_count).unwrap();
        writeln!(out, "max_interior_residual = {}", fmt17(self.max_residual)).unwrap();
        writeln!(
            out,
            "max_boundary_residual = {}",
            fmt17(self.boundary_max_residual)
        )
        .unwrap();
        writeln!(out, "violations = {}", self.violations.len()).unwrap();
        writeln!(
            out,
            "verdict = {}",
            if self.is_satisfied() {
                "no interior violation (bounded-horizon verdict)"
            } else {
                "violated"
            }
        )
        .unwrap();
        for (x, r) in self.violations.iter().take(20) {
            writeln!(out, "violation vertex={x} residual={}", fmt17(*r)).unwrap();
        }
        out
    }
}

pub fn check_inequality(
    g: &WeightedGraph,
    u: &VertexFunction,
    sigma: f64,
    mask: &InteriorMask,
    tol: f64,
) -> Result<InequalityReport> {
    mask.check_domain(g)?;
    let residuals = residual(g, u, sigma)?;
    let mut violations = Vec::new();
    let mut max_residual = f64::NEG_INFINITY;
    let mut boundary_max_residual = f64::NEG_INFINITY;
    for (x, &r) in residuals.values().iter().enumerate() {
        if mask.is_interior(x) {
            max_residual = max_residual.max(r);
            if r > tol {
                violations.push((x, r));
            }
        } else {
            boundary_max_residual = boundary_max_residual.max(r);
        }
    }
    Ok(InequalityReport {
        sigma,
        tolerance: tol,
        residuals,
        interior_count: mask.interior_count(),
        violations,
        max_residual,
        boundary_max_residual,
    })
}

/// Both sides of Σ μ_xy (∇_xy u) ψ(x) = −½ Σ μ_xy (∇_xy u)(∇_xy ψ), each
/// summed on its own, plus the magnitude of the summands for relative
/// comparisons.
#[derive(Debug, Clone, Copy)]
pub struct GreenPairing {
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
}

impl GreenPairing {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.scale.max(f64::MIN_POSITIVE)
    }
}

pub fn green_pairing(
    g: &WeightedGraph,
    u: &VertexFunction,
    psi: &VertexFunction,
) -> Result<GreenPairing> {
    u.check_domain(g)?;
    psi.check_domain(g)?;
    let mut left = Vec::with_capacity(2 * g.num_edges());
    let mut right = Vec::with_capacity(2 * g.num_edges());
    let mut scale = 0.0;
    for x in 0..g.num_vertices() {
        for (y, w) in g.neighbors(x) {
            let du = u.gradient(x, y);
            let a = w * du * psi[x];
            let b = w * du * psi.gradient(x, y);
            scale += a.abs() + 0.5 * b.abs();
            left.push(a);
            right.push(b);
        }
    }
    Ok(GreenPairing {
        lhs: pairwise_sum(&left),
        rhs: -0.5 * pairwise_sum(&right),
        scale,
    })
}

/// Σ_{x,y} μ_xy (∇_xy u) ψ(x) + Σ_x μ(x) u(x)^σ ψ(x) for a nonnegative test
/// function ψ supported inside the interior, with u > 0 on its support.
pub fn weak_form(
    g: &WeightedGraph,
    u: &VertexFunction,
    psi: &VertexFunction,
    sigma: f64,
    mask: &InteriorMask,
) -> Result<f64> {
    check_sigma(sigma)?;
    u.check_domain(g)?;
    psi.check_domain(g)?;
    mask.check_domain(g)?;
    psi.check_nonnegative()?;
    u.check_nonnegative()?;
    let mut terms = Vec::new();
    for x in 0..g.num_vertices() {
        let p = psi[x];
        if p == 0.0 {
            continue;
        }
        if !mask.is_interior(x) {
            return Err(Error::SupportOnBoundary { vertex: x });
        }
        if !(u[x] > 0.0) {
            return Err(Error::param(
                "u",
                format!("must be positive on the support of psi (vertex {x})"),
            ));
        }
        for (y, w) in g.neighbors(x) {
            terms.push(w * u.gradient(x, y) * p);
        }
        terms.push(g.measure(x) * u[x].powf(sigma) * p);
    }
    Ok(pairwise_sum(&terms))
}
