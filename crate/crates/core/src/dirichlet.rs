//! Damped Jacobi iteration for Δu + u^σ = 0 on a finite set with prescribed
//! boundary values, and an exhaustion probe over growing balls.

use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::WeightedGraph;
use crate::io::fmt17;
use crate::numeric::nonneg_pow;
use crate::operators::{residual, InteriorMask};

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 200_000;
pub const DEFAULT_CAP: f64 = 1e6;
const MIN_THETA: f64 = 1e-8;
const PAR_THRESHOLD: usize = 4096;

#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub graph: WeightedGraph,
    pub interior: InteriorMask,
    /// Values on boundary vertices; interior entries are ignored.
    pub boundary_values: VertexFunction,
    pub sigma: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub theta: f64,
    /// Any iterate above this counts as divergence.
    pub cap: f64,
}

impl DirichletProblem {
    pub fn new(
        graph: WeightedGraph,
        interior: InteriorMask,
        boundary_values: VertexFunction,
        sigma: f64,
    ) -> Result<Self> {
        let p = Self {
            graph,
            interior,
            boundary_values,
            sigma,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            theta: DEFAULT_THETA,
            cap: DEFAULT_CAP,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.interior.check_domain(&self.graph)?;
        self.boundary_values.check_domain(&self.graph)?;
        for x in self.interior.boundary() {
            let v = self.boundary_values[x];
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::NegativeValue { vertex: x, value: v });
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param("sigma", format!("{} is not positive", self.sigma)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::param("tolerance", "must be positive"));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::param("theta", format!("{} is not in (0, 1]", self.theta)));
        }
        if let Some(x) = self.interior.interior().find(|&x| self.graph.degree(x) == 0) {
            return Err(Error::param("interior", format!("vertex {x} has no neighbours")));
        }
        Ok(())
    }

    /// Boundary data on the boundary, zero inside.
    pub fn default_initial(&self) -> VertexFunction {
        VertexFunction::from_fn(self.graph.num_vertices(), |x| {
            if self.interior.is_interior(x) {
                0.0
            } else {
                self.boundary_values[x]
            }
        })
    }

    /// max over interior x of |Δu(x) + u(x)^σ|.
    pub fn residual_norm(&self, u: &VertexFunction) -> f64 {
        let r = |x: usize| {
            let m = self.graph.measure(x);
            let s: f64 = self.graph.neighbors(x).map(|(y, w)| w * (u[y] - u[x])).sum();
            (s / m + nonneg_pow(u[x], self.sigma)).abs()
        };
        self.interior.interior().map(r).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    /// Residual within tolerance, confirmed by an independent recomputation.
    Converged,
    Diverged { vertex: usize, value: f64 },
    BudgetExhausted,
    /// The solver's own check passed but the independent one did not.
    RevalidationFailed { residual_norm: f64 },
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Converged => f.write_str("converged"),
            SolveStatus::Diverged { .. } => f.write_str("diverged"),
            SolveStatus::BudgetExhausted => f.write_str("budget_exhausted"),
            SolveStatus::RevalidationFailed { .. } => f.write_str("revalidation_failed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub residual_norm: f64,
    pub final_theta: f64,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Iterates u(x) ← (1−θ) u(x) + θ max(0, (1/μ(x)) Σ μ_xy u(y) + u(x)^σ) on
/// interior vertices, halving θ whenever the residual norm grows on two
/// consecutive sweeps.
pub fn solve(
    problem: &DirichletProblem,
    initial: &VertexFunction,
) -> Result<(VertexFunction, SolveReport)> {
    problem.validate()?;
    initial.check_domain(&problem.graph)?;
    initial.check_nonnegative()?;
    for x in problem.interior.boundary() {
        if initial[x] != problem.boundary_values[x] {
            return Err(Error::param(
                "initial",
                format!("differs from the boundary data at vertex {x}"),
            ));
        }
    }
    let g = &problem.graph;
    let n = g.num_vertices();
    let sigma = problem.sigma;
    let interior: Vec<usize> = problem.interior.interior().collect();
    let mut u = initial.clone();
    let mut theta = problem.theta;
    let mut norm = problem.residual_norm(&u);
    let mut rises = 0;
    let mut iterations = 0;
    let update = |u: &VertexFunction, x: usize, theta: f64| {
        let avg: f64 = g.neighbors(x).map(|(y, w)| w * u[y]).sum::<f64>() / g.measure(x);
        let target = (avg + nonneg_pow(u[x], sigma)).max(0.0);
        (1.0 - theta) * u[x] + theta * target
    };
    let status = loop {
        if norm <= problem.tolerance {
            break SolveStatus::Converged;
        }
        if iterations >= problem.max_iterations {
            break SolveStatus::BudgetExhausted;
        }
        let fresh: Vec<f64> = if n >= PAR_THRESHOLD {
            interior.par_iter().map(|&x| update(&u, x, theta)).collect()
        } else {
            interior.iter().map(|&x| update(&u, x, theta)).collect()
        };
        let mut growing = true;
        for (&x, v) in interior.iter().zip(fresh) {
            growing &= v >= u[x];
            u[x] = v;
        }
        iterations += 1;
        if let Some(&x) = interior.iter().find(|&&x| !(u[x] <= problem.cap)) {
            break SolveStatus::Diverged { vertex: x, value: u[x] };
        }
        let next = problem.residual_norm(&u);
        // a rising residual along a monotone increasing iterate is blow-up,
        // which damping would only slow down
        rises = if next > norm && !growing { rises + 1 } else { 0 };
        if rises >= 2 {
            theta = (theta / 2.0).max(MIN_THETA);
            rises = 0;
        }
        norm = next;
    };
    let status = if status == SolveStatus::Converged {
        let res = residual(g, &u, sigma)?;
        let check = problem
            .interior
            .interior()
            .map(|x| res[x].abs())
            .fold(0.0, f64::max);
        if check <= problem.tolerance {
            SolveStatus::Converged
        } else {
            SolveStatus::RevalidationFailed { residual_norm: check }
        }
    } else {
        status
    };
    Ok((
        u,
        SolveReport {
            status,
            iterations,
            residual_norm: norm,
            final_theta: theta,
        },
    ))
}

/// One member of an exhaustion family.
#[derive(Debug, Clone)]
pub struct ProbeInstance {
    pub graph: WeightedGraph,
    pub root: usize,
    pub interior: InteriorMask,
    pub boundary_values: VertexFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPolicy {
    Zero,
    Prescribed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub radius: usize,
    pub u_root: f64,
    pub u_max: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: String,
}

/// Solves on each radius from zero interior data. Failures are recorded in
/// the row status rather than aborting the sweep.
pub fn exhaustion_probe(
    radii: &[usize],
    policy: BoundaryPolicy,
    sigma: f64,
    family: impl Fn(usize) -> Result<ProbeInstance>,
) -> Result<Vec<ProbeRow>> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("radii", "must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let attempt = family(radius).and_then(|inst| {
            let bv = match policy {
                BoundaryPolicy::Zero => VertexFunction::zeros(inst.graph.num_vertices()),
                BoundaryPolicy::Prescribed => inst.boundary_values,
            };
            let root = inst.root;
            let problem = DirichletProblem::new(inst.graph, inst.interior, bv, sigma)?;
            let initial = problem.default_initial();
            let (u, report) = solve(&problem, &initial)?;
            Ok((u, report, root))
        });
        rows.push(match attempt {
            Ok((u, report, root)) => ProbeRow {
                radius,
                u_root: u[root],
                u_max: u.values().iter().copied().fold(0.0, f64::max),
                residual_norm: report.residual_norm,
                iterations: report.iterations,
                status: report.status.to_string(),
            },
            Err(e) => ProbeRow {
                radius,
                u_root: f64::NAN,
                u_max: f64::NAN,
                residual_norm: f64::NAN,
                iterations: 0,
                status: format!("error: {e}"),
            },
        });
    }
    Ok(rows)
}

/// CSV with columns `radius,u_root,u_max,residual_norm,iterations,status`.
pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from("radius,u_root,u_max,residual_norm,iterations,status\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.radius,
            fmt17(r.u_root),
            fmt17(r.u_max),
            fmt17(r.residual_norm),
            r.iterations,
            r.status.replace(',', ";")
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::make_path;

    fn three_point(a: f64, b: f64) -> DirichletProblem {
        let g = make_path(2, |_| 1.0).unwrap();
        let mask = InteriorMask::from_flags(vec![false, true, false]);
        DirichletProblem::new(g, mask, VertexFunction::new(vec![a, 0.0, b]), 2.0).unwrap()
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let p = three_point(0.0, 0.0);
        let (u, rep) = solve(&p, &p.default_initial()).unwrap();
        assert!(rep.converged());
        assert_eq!(rep.iterations, 0);
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quadratic_closed_form() {
        // The solution error is the residual over |1 − 2u|, so the default
        // tolerance alone does not give 1e−10 in value.
        let mut p = three_point(0.1, 0.1);
        p.tolerance = 1e-13;
        let (u, rep) = solve(&p, &p.default_initial()).unwrap();
        assert!(rep.converged(), "{rep:?}");
        let want = (1.0 - 0.6f64.sqrt()) / 2.0;
        assert!((u[1] - want).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_initial_data() {
        let p = three_point(0.1, 0.2);
        let wrong = VertexFunction::new(vec![0.0, 0.0, 0.2]);
        assert!(solve(&p, &wrong).is_err());
        assert!(solve(&p, &VertexFunction::new(vec![0.1, -1.0, 0.2])).is_err());
    }

    #[test]
    fn large_data_diverges() {
        let p = three_point(2.0, 2.0);
        let (_, rep) = solve(&p, &p.default_initial()).unwrap();
        assert!(matches!(rep.status, SolveStatus::Diverged { .. }), "{rep:?}");
    }

    #[test]
    fn budget_is_reported() {
        let mut p = three_point(0.1, 0.1);
        p.max_iterations = 3;
        let (_, rep) = solve(&p, &p.default_initial()).unwrap();
        assert_eq!(rep.status, SolveStatus::BudgetExhausted);
        assert_eq!(rep.iterations, 3);
    }

    #[test]
    fn probe_records_failures() {
        let rows = exhaustion_probe(&[1, 2, 3], BoundaryPolicy::Prescribed, 2.0, |r| {
            if r == 2 {
                return Err(Error::param("radius", "unavailable"));
            }
            let g = make_path(2 * r, |_| 1.0)?;
            let n = g.num_vertices();
            let interior = InteriorMask::by_degree(&g, 2);
            let bv = VertexFunction::from_fn(n, |x| if x == 0 || x == n - 1 { 0.1 } else { 0.0 });
            Ok(ProbeInstance {
                graph: g,
                root: r,
                interior,
                boundary_values: bv,
            })
        })
        .unwrap();
        assert_eq!(rows[0].status, "converged");
        assert!(rows[1].status.starts_with("error"));
        assert!(probe_csv(&rows).starts_with("radius,u_root,u_max,residual_norm,iterations,status\n1,"));
        assert!(exhaustion_probe(&[2, 1], BoundaryPolicy::Zero, 2.0, |_| unreachable!()).is_err());
    }
}
