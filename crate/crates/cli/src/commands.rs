use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use femnet::compiler::{
    account, compile_cpwl_shallow, compile_fem_deep, compile_fem_shallow, compile_terms, expand_lattice,
    reduce_terms, AccountMeta,
};
use femnet::galerkin1d::{
    report_table, solve_afem, solve_algorithm1, to_csv, to_markdown, uniform_knots, Bvp1dProblem, Bvp1dState,
    SolverConfig,
};
use femnet::geometry::BoundingBox;
use femnet::io;
use femnet::quantize::{check_structured, check_structured_tol};
use femnet::verify::{region_labels, verify_cpwl, verify_fem};
use femnet::{AffineLayer, QuantGrid, ReluNetwork};

use crate::{Cli, Command, MethodArg, PathwayArg};

/// What a command produced: exit status, files read, and a JSON payload for the run report.
pub struct Outcome {
    pub exit: u8,
    pub inputs: Vec<PathBuf>,
    pub results: Value,
}

impl Outcome {
    fn ok(inputs: Vec<PathBuf>, results: Value) -> Self {
        Self { exit: 0, inputs, results }
    }
}

type CmdResult = Result<Outcome, Box<dyn std::error::Error>>;

pub fn run(cli: &Cli) -> CmdResult {
    let seed = cli.seed;
    match &cli.command {
        Command::CompileFem { mesh, coeffs, pathway, out, report } => {
            compile_fem(mesh, coeffs, *pathway, out, report.as_deref())
        }
        Command::CompileCpwl { cpwl, lattice, out, report } => {
            compile_cpwl(cpwl.as_deref(), lattice.as_deref(), out, report.as_deref())
        }
        Command::Eval { net, points, out } => eval(net, points, out.as_deref()),
        Command::Verify { net, against, mesh, coeffs, cpwl, samples, tol, report } => {
            let source = resolve_source(against.as_deref(), mesh.as_deref(), coeffs.as_deref(), cpwl.as_deref())?;
            verify(net, source, *samples, *tol, report.as_deref(), seed)
        }
        Command::Quantize { net, grid, from_layer, out } => quantize(net, *grid, *from_layer, out),
        Command::CheckStructured { net, report, tol } => check(net, report.as_deref(), *tol),
        Command::SolveBvp { n, method, max_iter, eta, width, out, trace, knots, net } => {
            let mut config = SolverConfig::new(*n);
            config.max_iter = *max_iter;
            config.eta = *eta;
            let files = BvpOutputs { out: out.as_deref(), trace: trace.as_deref(), knots: knots.as_deref(), net: net.as_deref() };
            solve_bvp(&Bvp1dProblem::bump(*width), &config, *method, files)
        }
        Command::Report { n, max_iter, eta, out } => {
            let mut base = SolverConfig::new(3);
            base.max_iter = *max_iter;
            base.eta = *eta;
            report(n, &base, out)
        }
        Command::DemoRegionPlot { net, random, res, domain, out } => {
            region_plot(net.as_deref(), random.as_deref(), *res, domain, out.as_deref(), seed)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn compile_fem(mesh_path: &Path, coeffs_path: &Path, pathway: PathwayArg, out: &Path, report: Option<&Path>) -> CmdResult {
    let mesh = io::load_mesh(mesh_path)?;
    let coeffs = io::load_values(coeffs_path)?;
    let (net, bound) = match pathway {
        PathwayArg::Deep => compile_fem_deep(&mesh, &coeffs)?,
        PathwayArg::Shallow => compile_fem_shallow(&mesh, &coeffs)?,
    };
    io::save_network(out, &net)?;
    if let Some(p) = report {
        io::write_json(p, &bound)?;
    }
    let stats = net.stats();
    println!(
        "compiled {} basis functions: depth {}, size {}, nonzero parameters {}",
        bound.n_basis.unwrap_or(0),
        stats.hidden_layers,
        stats.size,
        stats.nonzero_params
    );
    Ok(Outcome::ok(
        vec![mesh_path.into(), coeffs_path.into()],
        json!({ "stats": stats, "bound": bound }),
    ))
}

fn compile_cpwl(cpwl: Option<&Path>, lattice: Option<&Path>, out: &Path, report: Option<&Path>) -> CmdResult {
    let (input, net, bound) = match (cpwl, lattice) {
        (Some(p), _) => {
            let f = io::load_cpwl(p)?;
            let (net, bound) = compile_cpwl_shallow(&f)?;
            (p, net, bound)
        }
        (None, Some(p)) => {
            let l = io::load_lattice(p)?;
            let d = l.dim();
            let terms = reduce_terms(&expand_lattice(&l)?, d)?;
            let (net, _) = compile_terms(&terms, d)?;
            let bound = account(&net, AccountMeta::LatticeShallow { d, m: l.m(), clauses: l.clause_count() })?;
            (p, net, bound)
        }
        (None, None) => return Err("one of --cpwl and --lattice is required".into()),
    };
    io::save_network(out, &net)?;
    if let Some(p) = report {
        io::write_json(p, &bound)?;
    }
    let stats = net.stats();
    println!("depth {}, size {}, nonzero parameters {}", stats.hidden_layers, stats.size, stats.nonzero_params);
    Ok(Outcome::ok(vec![input.into()], json!({ "stats": stats, "bound": bound })))
}

fn eval(net_path: &Path, points_path: &Path, out: Option<&Path>) -> CmdResult {
    let net = io::load_network(net_path)?;
    let pts = io::load_points(points_path, net.input_dim())?;
    let mut text = String::new();
    for x in &pts {
        let y = net.eval(x)?;
        let cells: Vec<String> = y.iter().map(|v| format!("{v:?}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    emit(out, &text)?;
    Ok(Outcome::ok(
        vec![net_path.into(), points_path.into()],
        json!({ "points": pts.len(), "outputs": net.output_dim() }),
    ))
}

enum Source {
    Fem { mesh: PathBuf, coeffs: PathBuf },
    Cpwl(PathBuf),
}

fn resolve_source(against: Option<&Path>, mesh: Option<&Path>, coeffs: Option<&Path>, cpwl: Option<&Path>) -> Result<Source, Box<dyn std::error::Error>> {
    if let Some(p) = cpwl {
        return Ok(Source::Cpwl(p.into()));
    }
    if let Some(m) = mesh {
        let c = coeffs.ok_or("--mesh needs --coeffs")?;
        return Ok(Source::Fem { mesh: m.into(), coeffs: c.into() });
    }
    let p = against.ok_or("give --against, --mesh with --coeffs, or --cpwl")?;
    let v: Value = serde_json::from_str(&fs::read_to_string(p)?)?;
    if v.get("simplices").is_some() {
        let c = coeffs.ok_or("a mesh source needs --coeffs")?;
        Ok(Source::Fem { mesh: p.into(), coeffs: c.into() })
    } else if v.get("pieces").is_some() && v.get("regions").is_some() {
        Ok(Source::Cpwl(p.into()))
    } else {
        Err(format!("{} is neither a mesh nor a CPWL file", p.display()).into())
    }
}

fn verify(net_path: &Path, source: Source, samples: usize, tol: f64, report: Option<&Path>, seed: u64) -> CmdResult {
    let net = io::load_network(net_path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = vec![net_path.to_path_buf()];
    let result = match source {
        Source::Fem { mesh, coeffs } => {
            let m = io::load_mesh(&mesh)?;
            let c = io::load_values(&coeffs)?;
            if c.len() != m.vertex_count() {
                return Err(format!("{} coefficients for {} vertices", c.len(), m.vertex_count()).into());
            }
            inputs.extend([mesh, coeffs]);
            verify_fem(&net, &m, &c, samples, tol, &mut rng)?
        }
        Source::Cpwl(p) => {
            let f = io::load_cpwl(&p)?;
            inputs.push(p);
            verify_cpwl(&net, &f, samples, tol, &mut rng)?
        }
    };
    if let Some(p) = report {
        io::write_json(p, &result)?;
    }
    let status = if result.passed { "ok" } else { "mismatch" };
    let summary = json!({
        "status": status,
        "samples": result.samples,
        "tol": result.tol,
        "max_error": result.max_error,
        "worst_point": result.worst_point,
        "expected": result.expected,
        "actual": result.actual,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(Outcome {
        exit: if result.passed { 0 } else { 2 },
        inputs,
        results: serde_json::to_value(&result)?,
    })
}

fn quantize(net_path: &Path, (k, l): (i32, u32), from_layer: usize, out: &Path) -> CmdResult {
    let net = io::load_network(net_path)?;
    let grid = QuantGrid::new(k, l);
    let q = grid.project_network(&net, from_layer);
    let mut changed = 0usize;
    let mut max_change = 0.0f64;
    for (a, b) in net.layers().iter().zip(q.layers()) {
        let (da, db) = (a.to_dense(), b.to_dense());
        for (ra, rb) in da.iter().zip(&db) {
            for (x, y) in ra.iter().zip(rb) {
                if x != y {
                    changed += 1;
                    max_change = max_change.max((x - y).abs());
                }
            }
        }
    }
    io::save_network(out, &q)?;
    println!("{changed} weights changed, largest change {max_change:e}");
    Ok(Outcome::ok(
        vec![net_path.into()],
        json!({ "grid": grid.values(), "changed": changed, "max_change": max_change }),
    ))
}

fn check(net_path: &Path, report: Option<&Path>, tol: Option<f64>) -> CmdResult {
    let net = io::load_network(net_path)?;
    let r = match tol {
        Some(t) => check_structured_tol(&net, t),
        None => check_structured(&net),
    };
    if let Some(p) = report {
        io::write_json(p, &r)?;
    }
    if let Some(w) = &r.warning {
        eprintln!("warning: {w}");
    }
    println!(
        "{}: {} offending entries in layers {}..{}",
        if r.conforms { "conforms" } else { "does not conform" },
        r.offending.len(),
        r.layers_checked.0,
        r.layers_checked.1
    );
    Ok(Outcome {
        exit: if r.conforms { 0 } else { 2 },
        inputs: vec![net_path.into()],
        results: serde_json::to_value(&r)?,
    })
}

struct BvpOutputs<'a> {
    out: Option<&'a Path>,
    trace: Option<&'a Path>,
    knots: Option<&'a Path>,
    net: Option<&'a Path>,
}

fn solve_bvp(problem: &Bvp1dProblem, config: &SolverConfig, method: MethodArg, files: BvpOutputs) -> CmdResult {
    config.validate()?;
    let state = match method {
        MethodArg::Dnn => solve_algorithm1(problem, config)?,
        MethodArg::Afem => solve_afem(problem, config.n)?,
        MethodArg::Uniform => Bvp1dState::from_grid(uniform_knots(config.n), problem)?,
    };
    if let Some(p) = files.out {
        io::write_json(p, &state)?;
    }
    if let Some(p) = files.trace {
        let rows: Vec<Vec<f64>> = state
            .trace
            .iter()
            .map(|t| vec![t.iteration as f64, t.energy, t.grad_norm, t.eta])
            .collect();
        fs::write(p, io::rows_to_csv("iteration,energy,grad_norm,eta", &rows))?;
    }
    if let Some(p) = files.knots {
        let history = if state.knot_history.is_empty() { vec![state.t.clone()] } else { state.knot_history.clone() };
        let header: Vec<String> = std::iter::once("step".to_string())
            .chain((0..state.t.len()).map(|i| format!("t{i}")))
            .collect();
        let rows: Vec<Vec<f64>> = history
            .iter()
            .enumerate()
            .map(|(s, t)| std::iter::once(s as f64).chain(t.iter().copied()).collect())
            .collect();
        fs::write(p, io::rows_to_csv(&header.join(","), &rows))?;
    }
    if let Some(p) = files.net {
        io::save_network(p, &state.to_network())?;
    }
    println!(
        "N = {}: energy {:.6}, H1 error {:.6}, {} iterations{}",
        config.n,
        state.energy,
        state.h1_error,
        state.iterations,
        if state.stalled { " (line search stalled)" } else { "" }
    );
    Ok(Outcome::ok(
        Vec::new(),
        json!({
            "N": config.n,
            "energy": state.energy,
            "h1_error": state.h1_error,
            "iterations": state.iterations,
            "stalled": state.stalled,
        }),
    ))
}

fn report(ns: &[usize], base: &SolverConfig, out: &[PathBuf]) -> CmdResult {
    let rows = report_table(&Bvp1dProblem::model(), ns, base)?;
    let md = to_markdown(&rows);
    for p in out {
        let text = match p.extension().and_then(|e| e.to_str()) {
            Some("md") | Some("markdown") => md.clone(),
            Some("csv") => to_csv(&rows),
            Some("json") => serde_json::to_string_pretty(&rows)?,
            _ => return Err(format!("{}: unknown output type, use .md, .csv or .json", p.display()).into()),
        };
        fs::write(p, text)?;
    }
    print!("{md}");
    Ok(Outcome::ok(Vec::new(), serde_json::to_value(&rows)?))
}

fn random_network(widths: &[usize], rng: &mut ChaCha8Rng) -> Result<ReluNetwork, Box<dyn std::error::Error>> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err("random network needs at least two positive widths".into());
    }
    let mut layers = Vec::new();
    for w in widths.windows(2) {
        let dense: Vec<Vec<f64>> = (0..w[1]).map(|_| (0..w[0]).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let bias = (0..w[1]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        layers.push(AffineLayer::from_dense(&dense, bias, w[0])?);
    }
    Ok(ReluNetwork::new(widths[0], layers)?)
}

fn region_plot(net_path: Option<&Path>, random: Option<&[usize]>, res: usize, domain: &[f64], out: Option<&Path>, seed: u64) -> CmdResult {
    let (net, inputs) = match (net_path, random) {
        (Some(p), _) => (io::load_network(p)?, vec![p.to_path_buf()]),
        (None, Some(w)) => (random_network(w, &mut ChaCha8Rng::seed_from_u64(seed))?, Vec::new()),
        (None, None) => return Err("one of --net and --random is required".into()),
    };
    let [lo, hi] = domain else {
        return Err("--domain takes two values lo,hi".into());
    };
    if !(lo < hi) {
        return Err("--domain needs lo < hi".into());
    }
    let labels = region_labels(&net, &BoundingBox::cube(2, *lo, *hi), res)?;
    let mut text = String::from("x,y,label\n");
    for (x, l) in &labels {
        text.push_str(&format!("{:?},{:?},{l}\n", x[0], x[1]));
    }
    emit(out, &text)?;
    let distinct: BTreeSet<usize> = labels.iter().map(|(_, l)| *l).collect();
    let hidden: usize = net.widths().iter().sum::<usize>();
    if out.is_some() {
        println!("{} grid points, {} distinct activation patterns", labels.len(), distinct.len());
    }
    Ok(Outcome::ok(
        inputs,
        json!({ "points": labels.len(), "regions": distinct.len(), "hidden_neurons": hidden }),
    ))
}
