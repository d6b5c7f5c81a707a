use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use semilinear_core::dirichlet::{exhaustion_probe, probe_csv, BoundaryPolicy, ProbeInstance};
use semilinear_core::generators::{
    make_radial_model, make_tree, radial_to_explicit, IntegerSegment, RadialTreeModel,
    DEFAULT_VERTEX_BUDGET,
};
use semilinear_core::io::{
    fmt17, fmt_sig, parse_edge_list, parse_vertex_function, write_edge_list, write_vertex_function,
};
use semilinear_core::liouville::{conjecture_series_from_volumes, descent_sequence};
use semilinear_core::operators::check_inequality;
use semilinear_core::recurrence::{
    default_horizons, ladder_csv, nash_williams_partial, simulate_return, WalkConfig,
};
use semilinear_core::tree_example::{
    calibrate, delta0, delta_cap, limit_expression, limit_target, radial_residual,
    radial_solution, rhs_eqzdelta, rhs_eqzdelta_f64, u_layer, verify_certificate, verify_params,
    volume_ratio_profile, CERTIFICATE_DIGITS,
};
use semilinear_core::{
    ExampleParams, InteriorMask, Precision, SeriesReport, VertexFunction, WeightedGraph,
};

use crate::config::Settings;
use crate::error::{exit, usage, Result};
use crate::manifest::RunManifest;
use crate::{emit, read_text, Cli, Command};

pub fn dispatch(cli: &Cli) -> Result<i32> {
    let mut s = Settings::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Check(a) => check(&mut s, a),
        Command::TreeExample(a) => tree_example(&mut s, a),
        Command::Volume(a) => volume(&mut s, a),
        Command::Recurrence(a) => recurrence(&mut s, a),
        Command::Limit(a) => limit(&mut s, a),
        Command::Series(a) => series(&mut s, a),
        Command::Descent(a) => descent(&mut s, a),
        Command::Probe(a) => probe(&mut s, a),
        Command::Generate(a) => generate(&mut s, a),
    }
}

fn path_opt(s: &mut Settings, key: &str, flag: &Option<PathBuf>) -> Result<Option<PathBuf>> {
    Ok(s
        .opt::<String>(key, flag.as_ref().map(|p| p.display().to_string()), None)?
        .map(PathBuf::from))
}

fn path_req(s: &mut Settings, key: &str, flag: &Option<PathBuf>) -> Result<PathBuf> {
    path_opt(s, key, flag)?.ok_or_else(|| usage(format!("missing required `--{key}`")))
}

fn load_graph(path: &Path) -> Result<WeightedGraph> {
    Ok(parse_edge_list(&read_text(path)?)?.finalize()?)
}

fn load_function(path: &Path) -> Result<VertexFunction> {
    Ok(parse_vertex_function(&read_text(path)?)?)
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err(usage(format!("`--{key}` is empty")));
    }
    items
        .iter()
        .map(|t| t.parse::<T>().map_err(|e| usage(format!("`--{key}` entry `{t}`: {e}"))))
        .collect()
}

/// `all`, `degree:K` or `radius:R` around `root`.
fn parse_interior(spec: &str, g: &WeightedGraph, root: usize) -> Result<InteriorMask> {
    let bad = || usage(format!("interior spec `{spec}` is not all, degree:K or radius:R"));
    match spec.split_once(':') {
        None if spec == "all" => Ok(InteriorMask::all(g.num_vertices())),
        Some(("degree", k)) => Ok(InteriorMask::by_degree(g, k.parse().map_err(|_| bad())?)),
        Some(("radius", r)) => Ok(InteriorMask::within_radius(g, root, r.parse().map_err(|_| bad())?)?),
        _ => Err(bad()),
    }
}

fn check(s: &mut Settings, a: &crate::CheckArgs) -> Result<i32> {
    let graph_path = path_req(s, "graph", &a.graph)?;
    let sol_path = path_req(s, "solution", &a.solution)?;
    let sigma: f64 = s.require("sigma", a.sigma)?;
    let tol = s.value("tol", a.tol, 0.0)?;
    let root = s.value("root", a.root, 0usize)?;
    let interior = s.value("interior", a.interior.clone(), "all".to_string())?;
    let report_path = path_opt(s, "report", &a.report)?;
    let g = load_graph(&graph_path)?;
    let u = load_function(&sol_path)?;
    let mask = parse_interior(&interior, &g, root)?;
    let report = check_inequality(&g, &u, sigma, &mask, tol)?;
    let mut m = RunManifest::new("check", s.resolved());
    m.add_input(&graph_path)?;
    m.add_input(&sol_path)?;
    emit(report_path.as_deref(), &m.wrap(&report.to_text()))?;
    Ok(if report.is_satisfied() { exit::OK } else { exit::VERIFIED_FALSE })
}

fn layer_csv(params: &ExampleParams, horizon: u64, stride: u64, hp: bool) -> Result<String> {
    let ratios = volume_ratio_profile(params, horizon.max(2))?;
    let mut out = String::from("n,u_n,w_n,residual,rhs_eqZdelta,volume_ratio\n");
    let mut n = 0;
    while n <= horizon {
        let rhs = match n {
            0 => String::new(),
            _ if hp => rhs_eqzdelta(n, params, Precision::default())?.sig(17),
            _ => fmt17(rhs_eqzdelta_f64(n, params)),
        };
        let ratio = if n >= 2 { fmt17(ratios[n as usize - 2].1) } else { String::new() };
        writeln!(
            out,
            "{n},{},{},{},{rhs},{ratio}",
            fmt17(u_layer(n, params)),
            fmt17(params.reduced_weight(n)),
            fmt17(radial_residual(n, params)),
        )
        .unwrap();
        n += stride;
    }
    Ok(out)
}

fn tree_example(s: &mut Settings, a: &crate::TreeExampleArgs) -> Result<i32> {
    let sigma: f64 = s.require("sigma", a.sigma)?;
    let epsilon: f64 = s.require("epsilon", a.epsilon)?;
    let n_branch = s.value("n-branch", a.n_branch, 3usize)?;
    let horizon = s.value("horizon", a.horizon, 100_000u64)?;
    let n0 = s.opt("n0", a.n0, None)?;
    let delta = s.opt("delta", a.delta, None)?;
    let cert_path = path_opt(s, "certificate", &a.certificate)?;
    let csv_path = path_opt(s, "csv", &a.csv)?;
    let stride = s.value("csv-stride", a.csv_stride, 1u64)?;
    let hp = s.switch("hp-rhs", a.hp_rhs)?;
    let emit_graph = path_opt(s, "emit-graph", &a.emit_graph)?;
    let emit_solution = path_opt(s, "emit-solution", &a.emit_solution)?;
    let emit_depth = s.value("emit-depth", a.emit_depth, 6usize)?;
    if stride == 0 {
        return Err(usage("--csv-stride must be at least 1"));
    }
    if delta.is_some() && n0.is_none() {
        return Err(usage("--delta requires --n0"));
    }

    let (params, text, verified) = match n0 {
        None => {
            let cert = calibrate(sigma, epsilon, n_branch, horizon)?;
            let resweep = verify_certificate(&cert)?;
            let mut text = cert.certificate();
            writeln!(
                text,
                "independent_sweep_max_residual = {}",
                fmt_sig(resweep.max_residual, CERTIFICATE_DIGITS)
            )
            .unwrap();
            writeln!(text, "verdict = verified").unwrap();
            (cert.params, text, true)
        }
        Some(n0) => {
            let d0 = delta0(sigma, n0)?;
            let cap = delta_cap(sigma, epsilon);
            let delta = delta.unwrap_or(d0.min(cap));
            let params = ExampleParams::new(sigma, epsilon, n_branch, n0, delta)?;
            let sweep = verify_params(&params, horizon)?;
            let d = CERTIFICATE_DIGITS;
            let mut text = String::from("verification: tree example (supplied parameters)\n");
            for (k, v) in [
                ("sigma", sigma),
                ("epsilon", epsilon),
                ("delta", delta),
                ("delta0", d0),
                ("delta1_cap", cap),
                ("max_residual", sweep.max_residual),
                ("min_relative_margin", sweep.min_relative_margin),
            ] {
                writeln!(text, "{k} = {}", fmt_sig(v, d)).unwrap();
            }
            writeln!(text, "N = {n_branch}\nn0 = {n0}\nhorizon_checked = {horizon}").unwrap();
            writeln!(text, "max_residual_at = {}", sweep.argmax).unwrap();
            match sweep.positive_at {
                Some(n) => writeln!(text, "first_violation = {n}\nverdict = violated").unwrap(),
                None => writeln!(text, "verdict = verified").unwrap(),
            }
            (params, text, sweep.all_nonpositive())
        }
    };
    let m = RunManifest::new("tree-example", s.resolved());
    emit(cert_path.as_deref(), &m.wrap(&text))?;
    if let Some(p) = csv_path {
        emit(Some(&p), &m.wrap(&layer_csv(&params, horizon, stride, hp)?))?;
    }
    if emit_graph.is_some() || emit_solution.is_some() {
        let model = make_radial_model(&params, emit_depth)?;
        let (tree, lifted) = radial_to_explicit(
            &model,
            &radial_solution(&params, emit_depth),
            emit_depth,
            DEFAULT_VERTEX_BUDGET,
        )?;
        if let Some(p) = emit_graph {
            emit(Some(&p), &m.wrap(&write_edge_list(&tree.graph)))?;
        }
        if let Some(p) = emit_solution {
            emit(Some(&p), &m.wrap(&write_vertex_function(&lifted)))?;
        }
    }
    Ok(if verified { exit::OK } else { exit::VERIFIED_FALSE })
}

/// Reduced-weight model of the example for volume-type commands.
fn tree_model(sigma: f64, epsilon: f64, n_branch: usize, n0: u64, n_max: usize) -> Result<RadialTreeModel> {
    let params = ExampleParams::new(sigma, epsilon, n_branch, n0, 1.0)?;
    Ok(RadialTreeModel::from_fn(n_branch, n_max.max(1), |n| params.reduced_weight(n as u64))?)
}

struct VolumeSource {
    volumes: Vec<f64>,
    default_excess: f64,
    input: Option<PathBuf>,
}

#[allow(clippy::too_many_arguments)]
fn volume_source(
    s: &mut Settings,
    graph: &Option<PathBuf>,
    root: Option<usize>,
    tree: bool,
    n_branch: Option<usize>,
    n0: Option<u64>,
    epsilon: Option<f64>,
    sigma: f64,
    n_max: usize,
) -> Result<VolumeSource> {
    if s.switch("tree", tree)? {
        let n_branch = s.value("n-branch", n_branch, 3usize)?;
        let n0 = s.value("n0", n0, 2u64)?;
        let epsilon: f64 = s.require("epsilon", epsilon)?;
        let model = tree_model(sigma, epsilon, n_branch, n0, n_max)?;
        Ok(VolumeSource {
            volumes: model.ball_volumes(n_max),
            default_excess: epsilon,
            input: None,
        })
    } else {
        let path = path_req(s, "graph", graph)?;
        let root = s.value("root", root, 0usize)?;
        let g = load_graph(&path)?;
        Ok(VolumeSource {
            volumes: g.volume_profile(root, n_max)?,
            default_excess: 0.0,
            input: Some(path),
        })
    }
}

fn volume(s: &mut Settings, a: &crate::VolumeArgs) -> Result<i32> {
    let sigma: f64 = s.require("sigma", a.sigma)?;
    let n_max: usize = s.require("n-max", a.n_max)?;
    if !(sigma > 1.0) {
        return Err(semilinear_core::Error::InvalidParameter {
            name: "sigma",
            reason: format!("{sigma} must exceed 1"),
        }
        .into());
    }
    if n_max < 2 {
        return Err(semilinear_core::Error::InvalidParameter {
            name: "n_max",
            reason: "must be at least 2".into(),
        }
        .into());
    }
    let src = volume_source(s, &a.graph, a.root, a.tree, a.n_branch, a.n0, a.epsilon, sigma, n_max)?;
    let excess = s.value("log-excess", a.log_excess, src.default_excess)?;
    let output = path_opt(s, "output", &a.output)?;
    let p = 1.0 / (sigma - 1.0);
    let mut body = String::from("n,volume,ratio\n");
    for n in 2..=n_max {
        let l = (n as f64).ln();
        let norm = ((2.0 * sigma * p) * l + (p + excess) * l.ln()).exp();
        let v = src.volumes[n];
        writeln!(body, "{n},{},{}", fmt17(v), fmt17(v / norm)).unwrap();
    }
    let mut m = RunManifest::new("volume", s.resolved());
    if let Some(p) = &src.input {
        m.add_input(p)?;
    }
    emit(output.as_deref(), &m.wrap(&body))?;
    Ok(exit::OK)
}

fn recurrence(s: &mut Settings, a: &crate::RecurrenceArgs) -> Result<i32> {
    let path = path_req(s, "graph", &a.graph)?;
    let root = s.value("root", a.root, 0usize)?;
    let n_max = s.value("n-max", a.n_max, 100usize)?;
    let steps = s.value("steps", a.steps, 1000u64)?;
    let walks = s.value("walks", a.walks, 10_000u64)?;
    let seed = s.value("seed", a.seed, 0u64)?;
    let interior = s.value("interior", a.interior.clone(), "all".to_string())?;
    let horizons = s.opt("horizons", a.horizons.clone(), None)?;
    let series_out = path_opt(s, "series-out", &a.series_out)?;
    let walks_out = path_opt(s, "walks-out", &a.walks_out)?;
    let horizons = match horizons {
        Some(h) => parse_list::<u64>("horizons", &h)?,
        None => default_horizons(steps),
    };
    let g = load_graph(&path)?;
    let mask = parse_interior(&interior, &g, root)?;
    let mask = (interior != "all").then_some(mask);
    let series = nash_williams_partial(&g, root, n_max)?;
    let cfg = WalkConfig {
        root,
        steps,
        walks,
        seed,
    };
    let est = simulate_return(&g, cfg, mask.as_ref())?;
    let ladder = est.ladder(&horizons);
    let mut m = RunManifest::new("recurrence", s.resolved());
    m.seed = Some(seed);
    m.add_input(&path)?;
    emit(series_out.as_deref(), &m.wrap(&series.to_csv("m")))?;
    emit(walks_out.as_deref(), &m.wrap(&ladder_csv(&ladder)))?;
    let d = series.diagnostic;
    let sum = est.summary();
    eprintln!(
        "nash_williams_trend = {} (alpha = {:.4}, beta = {:.4})",
        d.trend, d.alpha, d.beta
    );
    eprintln!(
        "return_fraction = {} +/- {} (censored {})",
        fmt17(sum.return_fraction),
        fmt17(sum.halfwidth),
        sum.censored
    );
    Ok(exit::OK)
}

fn limit(s: &mut Settings, a: &crate::LimitArgs) -> Result<i32> {
    let sigma: f64 = s.require("sigma", a.sigma)?;
    let epsilon: f64 = s.require("epsilon", a.epsilon)?;
    let raw: String = s.require("n", a.n.clone())?;
    let bits = s.value("bits", a.bits, semilinear_core::hp::DEFAULT_BITS)?;
    let output = path_opt(s, "output", &a.output)?;
    let ns = parse_list::<u64>("n", &raw)?;
    let target = limit_target(sigma, epsilon);
    let mut body = String::from("n,value,abs_error_to_p_epsilon\n");
    for n in ns {
        let v = limit_expression(n, sigma, epsilon, Precision::bits(bits))?;
        writeln!(body, "{n},{},{}", v.sig(17), fmt17((v.value - target).abs())).unwrap();
    }
    let mut m = RunManifest::new("limit", s.resolved());
    m.params.insert("target".into(), fmt17(target));
    emit(output.as_deref(), &m.wrap(&body))?;
    Ok(exit::OK)
}

fn series(s: &mut Settings, a: &crate::SeriesArgs) -> Result<i32> {
    let sigma: f64 = s.require("sigma", a.sigma)?;
    let n_max: usize = s.require("n-max", a.n_max)?;
    if n_max == 0 {
        return Err(usage("--n-max must be at least 1"));
    }
    let src = volume_source(s, &a.graph, a.root, a.tree, a.n_branch, a.n0, a.epsilon, sigma, n_max)?;
    let output = path_opt(s, "output", &a.output)?;
    let report: SeriesReport = conjecture_series_from_volumes(&src.volumes, sigma)?;
    let mut m = RunManifest::new("series", s.resolved());
    if let Some(p) = &src.input {
        m.add_input(p)?;
    }
    emit(output.as_deref(), &m.wrap(&report.to_csv("n")))?;
    let d = report.diagnostic;
    eprintln!("trend = {} (alpha = {:.4}, beta = {:.4})", d.trend, d.alpha, d.beta);
    Ok(exit::OK)
}

fn descent(s: &mut Settings, a: &crate::DescentArgs) -> Result<i32> {
    let graph_path = path_req(s, "graph", &a.graph)?;
    let sol_path = path_req(s, "solution", &a.solution)?;
    let sigma: f64 = s.require("sigma", a.sigma)?;
    let x0: usize = s.require("x0", a.x0)?;
    let steps = s.value("steps", a.steps, 50usize)?;
    let root = s.value("root", a.root, 0usize)?;
    let interior = s.value("interior", a.interior.clone(), "all".to_string())?;
    let output = path_opt(s, "output", &a.output)?;
    let g = load_graph(&graph_path)?;
    let u = load_function(&sol_path)?;
    let mask = parse_interior(&interior, &g, root)?;
    let trace = descent_sequence(&g, &u, sigma, x0, steps, &mask)?;
    let mut m = RunManifest::new("descent", s.resolved());
    m.add_input(&graph_path)?;
    m.add_input(&sol_path)?;
    emit(output.as_deref(), &m.wrap(&trace.to_csv()))?;
    eprintln!(
        "steps = {} truncated = {} first_bound_below_one = {} all_steps_hold = {}",
        trace.steps(),
        trace.truncated(),
        trace.first_below_one.map_or("none".to_string(), |i| i.to_string()),
        trace.all_steps_hold()
    );
    Ok(if trace.all_steps_hold() { exit::OK } else { exit::VERIFIED_FALSE })
}

fn probe(s: &mut Settings, a: &crate::ProbeArgs) -> Result<i32> {
    let family = s.value("family", a.family.clone(), "line".to_string())?;
    let radii: String = s.require("radii", a.radii.clone())?;
    let sigma: f64 = s.require("sigma", a.sigma)?;
    let boundary = s.value("boundary", a.boundary.clone(), "zero".to_string())?;
    let output = path_opt(s, "output", &a.output)?;
    let radii = parse_list::<usize>("radii", &radii)?;
    let policy = if boundary == "zero" { BoundaryPolicy::Zero } else { BoundaryPolicy::Prescribed };
    let rows = match family.as_str() {
        "line" => {
            let value = match boundary.split_once(':') {
                Some(("constant", v)) => v
                    .parse::<f64>()
                    .map_err(|e| usage(format!("boundary value `{v}`: {e}")))?,
                None if boundary == "zero" => 0.0,
                _ => return Err(usage(format!("line boundary `{boundary}` is not zero or constant:V"))),
            };
            exhaustion_probe(&radii, policy, sigma, |r| {
                let seg = IntegerSegment::new(r)?;
                let n = seg.graph.num_vertices();
                let interior = InteriorMask::by_degree(&seg.graph, 2);
                let bv = VertexFunction::from_fn(n, |x| if interior.is_interior(x) { 0.0 } else { value });
                Ok(ProbeInstance {
                    root: seg.origin(),
                    graph: seg.graph,
                    interior,
                    boundary_values: bv,
                })
            })?
        }
        "tree" => {
            if boundary != "zero" && boundary != "example" {
                return Err(usage(format!("tree boundary `{boundary}` is not zero or example")));
            }
            let n_branch = s.value("n-branch", a.n_branch, 3usize)?;
            let epsilon: f64 = s.require("epsilon", a.epsilon)?;
            let n0 = s.value("n0", a.n0, 2u64)?;
            let delta = match s.opt("delta", a.delta, None)? {
                Some(d) => d,
                None => delta0(sigma, n0)?.min(delta_cap(sigma, epsilon)),
            };
            let params = ExampleParams::new(sigma, epsilon, n_branch, n0, delta)?;
            exhaustion_probe(&radii, policy, sigma, |r| {
                let model = make_radial_model(&params, r)?;
                let (tree, lifted) =
                    radial_to_explicit(&model, &radial_solution(&params, r), r, DEFAULT_VERTEX_BUDGET)?;
                let interior = InteriorMask::for_tree(&tree);
                Ok(ProbeInstance {
                    graph: tree.graph,
                    root: 0,
                    interior,
                    boundary_values: lifted,
                })
            })?
        }
        other => return Err(usage(format!("unknown family `{other}`"))),
    };
    let m = RunManifest::new("probe", s.resolved());
    emit(output.as_deref(), &m.wrap(&probe_csv(&rows)))?;
    Ok(exit::OK)
}

fn generate(s: &mut Settings, a: &crate::GenerateArgs) -> Result<i32> {
    let kind: String = s.require("kind", a.kind.clone())?;
    let weight = s.value("weight", a.weight, 1.0)?;
    let output = path_opt(s, "output", &a.output)?;
    let g = match kind.as_str() {
        "line" => {
            let r: usize = s.require("radius", a.radius)?;
            IntegerSegment::weighted(r, |_| weight)?.graph
        }
        "tree" => {
            let n_branch = s.value("n-branch", a.n_branch, 3usize)?;
            let depth: usize = s.require("depth", a.depth)?;
            make_tree(n_branch, depth, |_| weight, DEFAULT_VERTEX_BUDGET)?.graph
        }
        other => return Err(usage(format!("unknown kind `{other}`"))),
    };
    let m = RunManifest::new("generate", s.resolved());
    emit(output.as_deref(), &m.wrap(&write_edge_list(&g)))?;
    Ok(exit::OK)
}
