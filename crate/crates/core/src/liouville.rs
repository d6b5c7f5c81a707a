//! Checks behind the nonexistence results: zero propagation, the a-priori
//! bounds for σ > 1, the descent chain for σ < 1, and the cutoff functions
//! φ_i used in the test-function argument.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::WeightedGraph;
use crate::io::fmt17;
use crate::numeric::nonneg_pow;
use crate::operators::{residual, InteriorMask};
use crate::trend::SeriesReport;

/// Relative slack allowed in per-step descent checks.
pub const DESCENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroVerdict {
    /// u > 0 at every interior vertex.
    StrictlyPositive,
    /// Every interior zero of u sits in a zero region closed under adjacency;
    /// `vertices` is the number of interior zeros.
    IdenticallyZero { vertices: usize },
    /// u vanishes at an interior vertex with a positive neighbour, so the
    /// residual there is positive and u is not a solution.
    HypothesisViolated {
        vertex: usize,
        neighbor: usize,
        residual: f64,
    },
}

/// Follows the zero set of u from every interior zero across interior
/// vertices. Runs in O(V + E).
pub fn zero_propagation(
    g: &WeightedGraph,
    u: &VertexFunction,
    sigma: f64,
    mask: &InteriorMask,
) -> Result<ZeroVerdict> {
    mask.check_domain(g)?;
    let res = residual(g, u, sigma)?;
    let n = g.num_vertices();
    let mut seen = vec![false; n];
    let mut zeros = 0;
    let mut queue = VecDeque::new();
    for start in mask.interior() {
        if u[start] != 0.0 || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        while let Some(x) = queue.pop_front() {
            zeros += 1;
            for (y, _) in g.neighbors(x) {
                if u[y] != 0.0 {
                    return Ok(ZeroVerdict::HypothesisViolated {
                        vertex: x,
                        neighbor: y,
                        residual: res[x],
                    });
                }
                if mask.is_interior(y) && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    Ok(if zeros == 0 {
        ZeroVerdict::StrictlyPositive
    } else {
        ZeroVerdict::IdenticallyZero { vertices: zeros }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundsVerdict {
    Pass {
        max_interior_value: f64,
        /// Largest u(x)/u(y) over checked edges.
        max_ratio: f64,
    },
    ValueNotBelowOne {
        vertex: usize,
        value: f64,
    },
    RatioOutOfRange {
        x: usize,
        y: usize,
        ratio: f64,
    },
}

impl BoundsVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, BoundsVerdict::Pass { .. })
    }
}

/// For σ > 1 and a graph with condition (p₀): checks u < 1 on the interior
/// and 1/p₀ ≤ u(x)/u(y) ≤ p₀ on every edge with an interior endpoint.
pub fn check_solution_bounds(
    g: &WeightedGraph,
    u: &VertexFunction,
    sigma: f64,
    p0: f64,
    mask: &InteriorMask,
) -> Result<BoundsVerdict> {
    if !(sigma > 1.0) {
        return Err(Error::param("sigma", format!("{sigma} must exceed 1")));
    }
    if !(p0 >= 1.0) {
        return Err(Error::param("p0", format!("{p0} must be at least 1")));
    }
    mask.check_domain(g)?;
    u.check_domain(g)?;
    u.check_nonnegative()?;
    let mut max_value = f64::NEG_INFINITY;
    let mut max_ratio: f64 = 0.0;
    for x in mask.interior() {
        if !(u[x] < 1.0) {
            return Ok(BoundsVerdict::ValueNotBelowOne {
                vertex: x,
                value: u[x],
            });
        }
        max_value = max_value.max(u[x]);
    }
    for x in 0..g.num_vertices() {
        for (y, _) in g.neighbors(x) {
            if !(mask.is_interior(x) || mask.is_interior(y)) || (u[x] == 0.0 && u[y] == 0.0) {
                continue;
            }
            let ratio = u[x] / u[y];
            if !(ratio <= p0 && ratio * p0 >= 1.0) {
                return Ok(BoundsVerdict::RatioOutOfRange { x, y, ratio });
            }
            max_ratio = max_ratio.max(ratio);
        }
    }
    Ok(BoundsVerdict::Pass {
        max_interior_value: max_value,
        max_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStop {
    Completed,
    /// The current vertex is not interior, so its neighbourhood is unknown.
    LeftInterior,
}

/// The chain x_{i+1} = argmin_{y∼x_i} u(y).
#[derive(Debug, Clone, PartialEq)]
pub struct DescentTrace {
    pub sigma: f64,
    pub chain: Vec<usize>,
    pub values: Vec<f64>,
    /// u(x₀)(1 − u(x₀)^{σ−1})^i.
    pub bound: Vec<f64>,
    /// u(x₀) ∏_{j<i} (1 − u(x_j)^{σ−1}); never below `values` for a solution.
    pub product_bound: Vec<f64>,
    /// Entry i: u(x_{i+1}) ≤ u(x_i)(1 − u(x_i)^{σ−1}) up to relative slack.
    pub step_holds: Vec<bool>,
    /// First i with bound(i) < 1.
    pub first_below_one: Option<usize>,
    pub stop: DescentStop,
}

impl DescentTrace {
    pub fn truncated(&self) -> bool {
        self.stop != DescentStop::Completed
    }

    pub fn steps(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn all_steps_hold(&self) -> bool {
        self.step_holds.iter().all(|&b| b)
    }

    /// Whether u(x_n) ≤ u(x₀)(1 − u(x₀)^{σ−1})^n at the final step.
    pub fn final_bound_holds(&self) -> bool {
        let n = self.steps();
        self.values[n] <= self.bound[n] * (1.0 + DESCENT_TOLERANCE)
    }

    /// CSV with columns `step,vertex,value,bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,vertex,value,bound\n");
        for (i, (&x, (&v, &b))) in self
            .chain
            .iter()
            .zip(self.values.iter().zip(&self.bound))
            .enumerate()
        {
            writeln!(out, "{i},{x},{},{}", fmt17(v), fmt17(b)).unwrap();
        }
        out
    }
}

/// Builds the descent chain for 0 < σ < 1 from x₀ with u(x₀) ≥ 1. Ties in
/// the argmin go to the smallest vertex id.
pub fn descent_sequence(
    g: &WeightedGraph,
    u: &VertexFunction,
    sigma: f64,
    x0: usize,
    steps: usize,
    mask: &InteriorMask,
) -> Result<DescentTrace> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::param("sigma", format!("{sigma} is not in (0, 1)")));
    }
    g.check_vertex(x0)?;
    mask.check_domain(g)?;
    u.check_domain(g)?;
    if let Some(x) = (0..u.len()).find(|&x| !(u[x] > 0.0)) {
        return Err(Error::NegativeValue {
            vertex: x,
            value: u[x],
        });
    }
    let u0 = u[x0];
    if !(u0 >= 1.0) {
        return Err(Error::param("u(x0)", format!("{u0} < 1")));
    }
    let factor = 1.0 - u0.powf(sigma - 1.0);
    let mut trace = DescentTrace {
        sigma,
        chain: vec![x0],
        values: vec![u0],
        bound: vec![u0],
        product_bound: vec![u0],
        step_holds: Vec::new(),
        first_below_one: None,
        stop: DescentStop::Completed,
    };
    let mut x = x0;
    for i in 0..steps {
        if !mask.is_interior(x) || g.degree(x) == 0 {
            trace.stop = DescentStop::LeftInterior;
            break;
        }
        let next = g
            .neighbor_ids(x)
            .iter()
            .copied()
            .min_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)))
            .expect("nonzero degree");
        let ux = u[x];
        let step_factor = 1.0 - ux.powf(sigma - 1.0);
        trace
            .step_holds
            .push(u[next] <= ux * step_factor + DESCENT_TOLERANCE * ux);
        trace.product_bound.push(trace.product_bound[i] * step_factor);
        trace.bound.push(u0 * factor.powi(i as i32 + 1));
        trace.chain.push(next);
        trace.values.push(u[next]);
        x = next;
    }
    trace.first_below_one = trace.bound.iter().position(|&b| b < 1.0);
    Ok(trace)
}

/// h_k: 1 on d ≤ 2^k, 2 − d/2^k on 2^k < d < 2^{k+1}, 0 beyond; vertices
/// unreachable from o get 0.
pub fn build_h(g: &WeightedGraph, o: usize, k: u32) -> Result<VertexFunction> {
    let d = g.distances_from(o)?;
    Ok(h_from_distances(&d, k))
}

fn h_from_distances(d: &[Option<usize>], k: u32) -> VertexFunction {
    let r = 2f64.powi(k as i32);
    VertexFunction::new(
        d.iter()
            .map(|d| match d {
                Some(d) => {
                    let d = *d as f64;
                    if d <= r {
                        1.0
                    } else if d < 2.0 * r {
                        2.0 - d / r
                    } else {
                        0.0
                    }
                }
                None => 0.0,
            })
            .collect(),
    )
}

/// φ_i = (1/i) Σ_{k=i−1}^{2i−2} h_k together with its pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffFamily {
    pub root: usize,
    pub index: u32,
    /// h_k for k = i−1 ..= 2i−2.
    pub h: Vec<VertexFunction>,
    pub phi: VertexFunction,
    /// Measured c in |∇_{xy} φ_i| ≤ c / (i 2^k) for x ∈ B_k ∖ B_{k−1}.
    pub gradient_constant: f64,
}

impl CutoffFamily {
    /// 2^{i−1}: φ_i ≡ 1 within this radius.
    pub fn inner_radius(&self) -> usize {
        1 << (self.index - 1)
    }

    /// 2^{2i−1}: φ_i ≡ 0 from this radius on.
    pub fn outer_radius(&self) -> usize {
        1 << (2 * self.index - 1)
    }
}

/// Builds φ_i on a truncation; refuses unless B(o, 2^{2i−1}) is interior.
pub fn build_phi(g: &WeightedGraph, o: usize, i: u32, mask: &InteriorMask) -> Result<CutoffFamily> {
    if i == 0 || i > 31 {
        return Err(Error::param("i", format!("{i} is not in 1..=31")));
    }
    mask.check_domain(g)?;
    let d = g.distances_from(o)?;
    let outer = 1usize << (2 * i - 1);
    if let Some(v) = (0..g.num_vertices()).find(|&v| matches!(d[v], Some(dv) if dv <= outer) && !mask.is_interior(v)) {
        return Err(Error::CutoffDoesNotFit { radius: outer, vertex: v });
    }
    let h: Vec<VertexFunction> = (i - 1..=2 * i - 2).map(|k| h_from_distances(&d, k)).collect();
    let inv = 1.0 / i as f64;
    let phi = VertexFunction::from_fn(g.num_vertices(), |x| {
        h.iter().map(|hk| hk[x]).sum::<f64>() * inv
    });
    let mut c: f64 = 0.0;
    for x in 0..g.num_vertices() {
        let Some(dx) = d[x] else { continue };
        // x ∈ B_k ∖ B_{k−1} with B_k = {d ≤ 2^k}; the shell index is clamped
        // below at i−1, where B_{i−2} carries no gradient.
        let shell = if dx <= 1 { 0 } else { usize::BITS - (dx - 1).leading_zeros() };
        let k = shell.max(i - 1);
        for y in g.neighbor_ids(x) {
            let grad = (phi[*y] - phi[x]).abs();
            if grad > 0.0 {
                c = c.max(grad * i as f64 * 2f64.powi(k as i32));
            }
        }
    }
    Ok(CutoffFamily {
        root: o,
        index: i,
        h,
        phi,
        gradient_constant: c,
    })
}

/// Σ over ordered adjacent pairs of μ_xy |∇_{xy} φ|^q.
pub fn cutoff_gradient_sum(g: &WeightedGraph, phi: &VertexFunction, q: f64) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::param("q", format!("{q} is not positive")));
    }
    phi.check_domain(g)?;
    let mut total = 0.0;
    for x in 0..g.num_vertices() {
        for (y, w) in g.neighbors(x) {
            total += w * nonneg_pow((phi[y] - phi[x]).abs(), q);
        }
    }
    Ok(total)
}

/// Which of the two cutoff energies of the test-function argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffEnergy {
    /// Exponent 2(σ−t)/(σ−1).
    First,
    /// Exponent 2σ/(σ−t−1).
    Second,
}

impl CutoffEnergy {
    pub fn exponent(self, sigma: f64, t: f64) -> f64 {
        match self {
            CutoffEnergy::First => 2.0 * (sigma - t) / (sigma - 1.0),
            CutoffEnergy::Second => 2.0 * sigma / (sigma - t - 1.0),
        }
    }

    /// The growth rate in i that the energy is expected to stay below, up to
    /// a constant, on graphs with the critical volume growth.
    pub fn normalizer(self, sigma: f64, t: f64, i: u32) -> f64 {
        let fi = i as f64;
        match self {
            CutoffEnergy::First => {
                fi.powf((2.0 * t - sigma) / (sigma - 1.0)) * 2f64.powf(4.0 * fi * t / (sigma - 1.0))
            }
            CutoffEnergy::Second => {
                let a = sigma / (sigma - 1.0) - 2.0 * sigma / (sigma - t - 1.0);
                let b = 2.0 * sigma / (sigma - 1.0) - 2.0 * sigma / (sigma - t - 1.0);
                fi.powf(a) * 2f64.powf(fi * b)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub i: u32,
    pub sum: f64,
    pub normalizer: f64,
    pub ratio: f64,
    pub gradient_constant: f64,
}

/// Sweeps i = 1.. while φ_i fits, with t = 1/i unless `t` is given.
pub fn cutoff_energy_sweep(
    g: &WeightedGraph,
    o: usize,
    sigma: f64,
    t: Option<f64>,
    which: CutoffEnergy,
    mask: &InteriorMask,
) -> Result<Vec<EnergyRow>> {
    if !(sigma > 1.0) {
        return Err(Error::param("sigma", format!("{sigma} must exceed 1")));
    }
    let mut rows = Vec::new();
    for i in 1..=31 {
        let fam = match build_phi(g, o, i, mask) {
            Ok(f) => f,
            Err(Error::CutoffDoesNotFit { .. }) => break,
            Err(e) => return Err(e),
        };
        let t = t.unwrap_or(1.0 / i as f64);
        let q = which.exponent(sigma, t);
        if !(q > 0.0 && q.is_finite()) {
            continue;
        }
        let sum = cutoff_gradient_sum(g, &fam.phi, q)?;
        let normalizer = which.normalizer(sigma, t, i);
        rows.push(EnergyRow {
            i,
            sum,
            normalizer,
            ratio: sum / normalizer,
            gradient_constant: fam.gradient_constant,
        });
    }
    Ok(rows)
}

/// Σ_{n=1}^{m} n^{2σ−1} / μ(B(o,n))^{σ−1} from a volume profile indexed by
/// radius (entry 0 is ignored).
pub fn conjecture_series_from_volumes(volumes: &[f64], sigma: f64) -> Result<SeriesReport> {
    if !(sigma > 1.0) {
        return Err(Error::param("sigma", format!("{sigma} must exceed 1")));
    }
    let mut terms = Vec::with_capacity(volumes.len().saturating_sub(1));
    for (n, &v) in volumes.iter().enumerate().skip(1) {
        if !(v > 0.0) {
            return Err(Error::ZeroVolume { radius: n });
        }
        let nf = n as f64;
        terms.push(((2.0 * sigma - 1.0) * nf.ln() - (sigma - 1.0) * v.ln()).exp());
    }
    Ok(SeriesReport::from_terms(&terms))
}

pub fn conjecture_series(
    g: &WeightedGraph,
    o: usize,
    sigma: f64,
    n_max: usize,
) -> Result<SeriesReport> {
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    conjecture_series_from_volumes(&g.volume_profile(o, n_max)?, sigma)
}
