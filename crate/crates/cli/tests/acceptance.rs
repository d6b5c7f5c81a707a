//! Acceptance suite: one PASS/FAIL line per criterion. Tolerances and
//! runtime budgets are pinned below; the process exits nonzero if any
//! criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semilinear_core::dirichlet::{solve, DirichletProblem, SolveReport};
use semilinear_core::generators::{
    make_path, make_radial_model, make_tree, radial_to_explicit, IntegerSegment,
    DEFAULT_VERTEX_BUDGET,
};
use semilinear_core::hp::MIN_BITS;
use semilinear_core::liouville::{check_solution_bounds, descent_sequence};
use semilinear_core::operators::{check_inequality, green_pairing, laplacian, residual};
use semilinear_core::recurrence::{nash_williams_partial, simulate_return, WalkConfig};
use semilinear_core::tree_example::{
    calibrate, delta0, limit_expression, radial_residual, radial_solution, verify_certificate,
    volume_ratio_profile,
};
use semilinear_core::{InteriorMask, Precision, Trend, VertexFunction, WeightedGraph};

const LAPLACIAN_ABS_TOL: f64 = 1e-12;
const GREEN_REL_TOL: f64 = 1e-12;
const MASS_REL_TOL: f64 = 1e-10;
const LIFT_REL_TOL: f64 = 1e-10;
const RICHARDSON_REL_TOL: f64 = 0.02;
const VOLUME_BAND_MAX: f64 = 10.0;
const DESCENT_TOL: f64 = 1e-12;
const DIRICHLET_VALUE_TOL: f64 = 1e-10;
const DIRICHLET_SOLVER_TOL: f64 = 1e-13;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(budget: Duration, elapsed: Duration) -> bool {
    elapsed <= budget
}

fn random_function(rng: &mut ChaCha8Rng, n: usize) -> VertexFunction {
    VertexFunction::from_fn(n, |_| rng.random_range(-1.0..1.0))
}

fn c1_laplacian_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let g = support::random_connected_graph(&mut rng, 50);
        let u = random_function(&mut rng, g.num_vertices());
        let lap = laplacian(&g, &u).unwrap();
        let dense = support::dense_laplacian(&g, u.values());
        for x in 0..g.num_vertices() {
            worst = worst.max((lap[x] - dense[x]).abs());
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= LAPLACIAN_ABS_TOL && within(Duration::from_secs(5), t),
        format!("max abs error {worst:.2e} over 100 graphs in {t:.2?}"),
    )
}

fn c2_green_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_gap: f64 = 0.0;
    let mut worst_mass: f64 = 0.0;
    for _ in 0..100 {
        let g = support::random_connected_graph(&mut rng, 200);
        let u = random_function(&mut rng, g.num_vertices());
        let psi = random_function(&mut rng, g.num_vertices());
        worst_gap = worst_gap.max(green_pairing(&g, &u, &psi).unwrap().relative_gap());
        let lap = laplacian(&g, &u).unwrap();
        let terms: Vec<f64> = (0..g.num_vertices()).map(|x| g.measure(x) * lap[x]).collect();
        let total: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        worst_mass = worst_mass.max(total.abs() / scale.max(f64::MIN_POSITIVE));
    }
    outcome(
        worst_gap <= GREEN_REL_TOL && worst_mass <= MASS_REL_TOL,
        format!("max relative gap {worst_gap:.2e}, max mass defect {worst_mass:.2e}"),
    )
}

fn c3_example_verification() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (sigma, eps, n_branch) in [(2.0, 0.5, 3), (3.0, 0.25, 3)] {
        let start = Instant::now();
        let horizon = 100_000u64;
        let res = calibrate(sigma, eps, n_branch, horizon).and_then(|c| {
            let sweep = verify_certificate(&c)?;
            Ok((c, sweep))
        });
        let t = start.elapsed();
        match res {
            Ok((c, sweep)) => {
                let p = &c.params;
                let direct = (0..=horizon).all(|n| radial_residual(n, p) <= 0.0);
                let d0 = delta0(sigma, c.n0).unwrap();
                let constraints = p.delta <= d0
                    && p.delta.powf(sigma - 1.0) <= eps / (sigma - 1.0) / 2.0 * (1.0 + 1e-15);
                let ok = direct
                    && sweep.all_nonpositive()
                    && constraints
                    && within(Duration::from_secs(10), t);
                pass &= ok;
                detail.push(format!(
                    "({sigma}, {eps}, {n_branch}): n0={} delta={:.6} max residual {:.3e} in {t:.2?}",
                    c.n0, p.delta, sweep.max_residual
                ));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("({sigma}, {eps}, {n_branch}): {e}"));
            }
        }
    }
    outcome(pass, detail.join("; "))
}

fn c4_radial_explicit() -> Outcome {
    let cert = match calibrate(2.0, 0.5, 3, 100_000) {
        Ok(c) => c,
        Err(e) => return outcome(false, e.to_string()),
    };
    let p = cert.params;
    let depth = 6;
    let model = make_radial_model(&p, depth).unwrap();
    let (tree, u) =
        radial_to_explicit(&model, &radial_solution(&p, depth), depth, DEFAULT_VERTEX_BUDGET).unwrap();
    let mask = InteriorMask::for_tree(&tree);
    let report = check_inequality(&tree.graph, &u, p.sigma, &mask, 0.0).unwrap();
    let p0 = tree.graph.check_p0();
    let bounds = check_solution_bounds(&tree.graph, &u, p.sigma, p0, &mask).unwrap();
    let res = residual(&tree.graph, &u, p.sigma).unwrap();
    let mut worst: f64 = 0.0;
    for v in mask.interior() {
        let want = radial_residual(tree.layer_of(v) as u64, &p);
        worst = worst.max((res[v] - want).abs() / want.abs());
    }
    outcome(
        report.is_satisfied() && bounds.passed() && worst <= LIFT_REL_TOL,
        format!(
            "{} interior vertices, max residual {:.3e}, p0* = {p0:.4}, bounds {:?}, radial/explicit gap {worst:.2e}",
            report.interior_count, report.max_residual, bounds
        ),
    )
}

fn c5_limit_identity() -> Outcome {
    let start = Instant::now();
    let ns = [1_000u64, 10_000, 100_000, 1_000_000];
    let vals: Vec<f64> = match ns
        .iter()
        .map(|&n| limit_expression(n, 2.0, 0.5, Precision::bits(MIN_BITS)).map(|v| v.value))
        .collect()
    {
        Ok(v) => v,
        Err(e) => return outcome(false, e.to_string()),
    };
    let t = start.elapsed();
    let errs: Vec<f64> = vals.iter().map(|v| (v - 0.5).abs()).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    // v(n) ≈ L + c / ln n through the last two points
    let (l1, l2) = ((ns[2] as f64).ln(), (ns[3] as f64).ln());
    let extrapolated = (vals[3] * l2 - vals[2] * l1) / (l2 - l1);
    let rich_ok = ((extrapolated - 0.5) / 0.5).abs() <= RICHARDSON_REL_TOL;
    outcome(
        decreasing && rich_ok && within(Duration::from_secs(5), t),
        format!(
            "|value - 0.5| = {:?} (strictly decreasing: {decreasing}); extrapolated {extrapolated:.5} (within 2%: {rich_ok}) in {t:.2?}",
            errs.iter().map(|e| format!("{e:.5}")).collect::<Vec<_>>()
        ),
    )
}

fn c6_volume_band() -> Outcome {
    let cert = match calibrate(2.0, 0.5, 3, 100_000) {
        Ok(c) => c,
        Err(e) => return outcome(false, e.to_string()),
    };
    let prof = volume_ratio_profile(&cert.params, 10_000).unwrap();
    let band: Vec<f64> = prof.iter().filter(|(n, _)| *n >= 16).map(|(_, r)| *r).collect();
    let lo = band.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = band.iter().cloned().fold(0.0, f64::max);
    outcome(
        hi / lo <= VOLUME_BAND_MAX,
        format!("n0={}: band [{lo:.4}, {hi:.4}], C/c = {:.4}", cert.n0, hi / lo),
    )
}

fn c7_descent() -> Outcome {
    let sigma = 0.5;
    let vals = support::equality_descent(4.0, sigma, 10);
    let mut u = vec![100.0];
    u.extend(&vals);
    u.extend([0.3, 0.2, 0.1]);
    let g = make_path(u.len() - 1, |_| 1.0).unwrap();
    let mask = InteriorMask::by_degree(&g, 2);
    let t = match descent_sequence(&g, &VertexFunction::new(u), sigma, 1, 4, &mask) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let geometric = t
        .bound
        .iter()
        .enumerate()
        .all(|(k, b)| (b - 4.0 * 0.5f64.powi(k as i32)).abs() <= DESCENT_TOL);
    let equality = (0..vals.len()).all(|i| (t.values[i] - t.product_bound[i]).abs() <= DESCENT_TOL * t.values[i]);
    outcome(
        geometric && equality && t.first_below_one == Some(3),
        format!(
            "bound {:?}; values {:?} equal the per-step product bound for {} equality steps; first bound below 1 at n = {:?}",
            t.bound,
            t.values.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>(),
            vals.len() - 1,
            t.first_below_one
        ),
    )
}

fn c8_recurrence() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();

    let line = IntegerSegment::new(2000).unwrap();
    let mask = InteriorMask::by_degree(&line.graph, 2);
    let cfg = WalkConfig {
        root: line.origin(),
        steps: 10_000,
        walks: 10_000,
        seed: 2024,
    };
    let est = simulate_return(&line.graph, cfg, Some(&mask)).unwrap().summary();
    let exact = support::line_return_probability(2000, 10_000);
    let ok = (est.return_fraction - exact).abs() <= est.halfwidth;
    pass &= ok;
    detail.push(format!(
        "line: {:.4} +/- {:.4} vs exact {exact:.4}",
        est.return_fraction, est.halfwidth
    ));

    // the full depth-30 tree exceeds the vertex budget; walks are censored
    // at the truncation boundary and the oracle uses the same boundary
    let depth = 16;
    let tree = make_tree(3, depth, |_| 1.0, DEFAULT_VERTEX_BUDGET).unwrap();
    let tmask = InteriorMask::for_tree(&tree);
    let cfg = WalkConfig {
        root: 0,
        steps: 1000,
        walks: 10_000,
        seed: 2024,
    };
    let est = simulate_return(&tree.graph, cfg, Some(&tmask)).unwrap().summary();
    let exact = support::tree_return_probability(3, depth, 1000);
    let ok = (est.return_fraction - exact).abs() <= est.halfwidth;
    pass &= ok;
    detail.push(format!(
        "T_3 depth {depth}: {:.4} +/- {:.4} vs oracle {exact:.4} (censored {})",
        est.return_fraction, est.halfwidth, est.censored
    ));

    let nw_line = nash_williams_partial(&line.graph, line.origin(), 1000).unwrap();
    let nw_tree = nash_williams_partial(&tree.graph, 0, depth - 1).unwrap();
    let trends = nw_line.diagnostic.trend == Trend::Divergent && nw_tree.diagnostic.trend == Trend::Convergent;
    pass &= trends;
    detail.push(format!(
        "Nash-Williams: line {}, T_3 {}",
        nw_line.diagnostic.trend, nw_tree.diagnostic.trend
    ));
    outcome(pass, detail.join("; "))
}

fn revalidate(problem: &DirichletProblem, u: &VertexFunction, report: &SolveReport) -> bool {
    if !report.converged() {
        return true;
    }
    let res = residual(&problem.graph, u, problem.sigma).unwrap();
    problem.interior.interior().all(|x| res[x].abs() <= problem.tolerance)
}

fn c9_dirichlet() -> Outcome {
    let three = |a: f64, b: f64| {
        let g = make_path(2, |_| 1.0).unwrap();
        let mask = InteriorMask::from_flags(vec![false, true, false]);
        let mut p = DirichletProblem::new(g, mask, VertexFunction::new(vec![a, 0.0, b]), 2.0).unwrap();
        p.tolerance = DIRICHLET_SOLVER_TOL;
        p
    };
    let p = three(0.1, 0.1);
    let (u, rep) = solve(&p, &p.default_initial()).unwrap();
    let want = support::quadratic_root(0.1, 0.1);
    let closed = rep.converged() && (u[1] - want).abs() <= DIRICHLET_VALUE_TOL;

    let mut problems: Vec<DirichletProblem> = vec![three(0.0, 0.0), three(0.2, 0.05), three(0.3, 0.3)];
    for r in [5usize, 20, 80] {
        let seg = IntegerSegment::new(r).unwrap();
        let mask = InteriorMask::by_degree(&seg.graph, 2);
        let n = seg.graph.num_vertices();
        let bv = VertexFunction::from_fn(n, |x| if mask.is_interior(x) { 0.0 } else { 0.5 });
        problems.push(DirichletProblem::new(seg.graph, mask, bv, 2.0).unwrap());
    }
    if let Ok(c) = calibrate(2.0, 0.5, 3, 100_000) {
        let model = make_radial_model(&c.params, 6).unwrap();
        let (tree, lifted) =
            radial_to_explicit(&model, &radial_solution(&c.params, 6), 6, DEFAULT_VERTEX_BUDGET).unwrap();
        let mask = InteriorMask::for_tree(&tree);
        problems.push(DirichletProblem::new(tree.graph, mask, lifted, 2.0).unwrap());
    }
    let mut statuses = Vec::new();
    let mut all_valid = revalidate(&p, &u, &rep);
    for prob in &problems {
        let (u, rep) = solve(prob, &prob.default_initial()).unwrap();
        statuses.push(rep.status.to_string());
        all_valid &= revalidate(prob, &u, &rep);
    }
    outcome(
        closed && all_valid,
        format!(
            "u(x) = {:.15} vs closed form {want:.15}; further runs [{}], converged ones re-validated: {all_valid}",
            u[1],
            statuses.join(", ")
        ),
    )
}

fn run_recurrence(bin: &str, graph: &Path, dir: &Path, tag: &str, threads: usize) -> Result<(String, String), String> {
    let series = dir.join(format!("series_{tag}.csv"));
    let walks = dir.join(format!("walks_{tag}.csv"));
    let status = Command::new(bin)
        .args(["--threads", &threads.to_string(), "recurrence", "--graph"])
        .arg(graph)
        .args(["--root", "0", "--n-max", "7", "--steps", "300", "--walks", "5000", "--seed", "99"])
        .args(["--interior", "degree:3", "--series-out"])
        .arg(&series)
        .arg("--walks-out")
        .arg(&walks)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    let read = |p: &Path| std::fs::read_to_string(p).map(|t| semilinear_cli::manifest::body(&t));
    Ok((read(&series).map_err(|e| e.to_string())?, read(&walks).map_err(|e| e.to_string())?))
}

fn c10_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_semilinear");
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("tree.txt");
    let g: WeightedGraph = make_tree(3, 8, |_| 1.0, DEFAULT_VERTEX_BUDGET).unwrap().graph;
    std::fs::write(&graph, semilinear_core::io::write_edge_list(&g)).unwrap();
    let runs: Result<Vec<_>, String> = [("a", 1), ("b", 1), ("c", 4)]
        .iter()
        .map(|(tag, th)| run_recurrence(bin, &graph, dir.path(), tag, *th))
        .collect();
    match runs {
        Ok(r) => {
            let same = r[0] == r[1] && r[0] == r[2];
            outcome(
                same,
                format!(
                    "two 1-thread runs and one 4-thread run: bodies identical = {same} ({} + {} bytes)",
                    r[0].0.len(),
                    r[0].1.len()
                ),
            )
        }
        Err(e) => outcome(false, e),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("laplacian matches dense (P - I)u oracle", c1_laplacian_oracle),
        ("green identity and mass antisymmetry", c2_green_identity),
        ("tree example calibration and residual sweep", c3_example_verification),
        ("radial and explicit tree agree", c4_radial_explicit),
        ("limit identity", c5_limit_identity),
        ("volume ratio band", c6_volume_band),
        ("sublinear descent chain", c7_descent),
        ("recurrence oracles and Nash-Williams trends", c8_recurrence),
        ("dirichlet closed form and re-validation", c9_dirichlet),
        ("recurrence CSV determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!(
            "{status} [{:>2}] {name} ({:.2?}): {}",
            i + 1,
            start.elapsed(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
