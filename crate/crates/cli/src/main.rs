//! `femnet` command-line tool.

mod commands;
mod run_report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use run_report::RunReport;

#[derive(Parser, Debug, Serialize)]
#[command(name = "femnet", version, about = "Compile piecewise-linear and finite element functions into ReLU networks")]
pub struct Cli {
    /// Seed for every random sampler.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write a JSON run report (input hashes, config, results, timing) here.
    #[arg(long, global = true)]
    pub run_report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathwayArg {
    Deep,
    Shallow,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Dnn,
    Afem,
    Uniform,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Compile a finite element function on a mesh.
    CompileFem {
        #[arg(long)]
        mesh: PathBuf,
        /// One coefficient per vertex.
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, value_enum, default_value_t = PathwayArg::Deep)]
        pathway: PathwayArg,
        #[arg(short, long)]
        out: PathBuf,
        /// Depth and size accounting.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compile a CPWL function (or a lattice form) through the shallow route.
    CompileCpwl {
        #[arg(long, conflicts_with = "lattice", required_unless_present = "lattice")]
        cpwl: Option<PathBuf>,
        #[arg(long)]
        lattice: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate a network on a CSV of points.
    Eval {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        points: PathBuf,
        /// Output CSV; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare a network with its source by sampling.
    Verify {
        #[arg(long)]
        net: PathBuf,
        /// Mesh or CPWL file; the kind is detected from its contents.
        #[arg(long, conflicts_with_all = ["mesh", "cpwl"])]
        against: Option<PathBuf>,
        #[arg(long, requires = "coeffs", conflicts_with = "cpwl")]
        mesh: Option<PathBuf>,
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long)]
        cpwl: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Project weights onto a power-of-two grid.
    Quantize {
        #[arg(long)]
        net: PathBuf,
        /// `k,l` for the grid `2^k * {0, ±2^(1-2^(l-2)), ..., ±1}`.
        #[arg(long, value_parser = parse_grid)]
        grid: (i32, u32),
        /// Layers before this index are copied unchanged.
        #[arg(long, default_value_t = 0)]
        from_layer: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check that hidden layers use weights in {0, ±1/2, ±1} and zero biases.
    CheckStructured {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Accept values within this distance of the grid.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Solve the 1D model problem on N grid points.
    SolveBvp {
        #[arg(long = "N", default_value_t = 53)]
        n: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Dnn)]
        method: MethodArg,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        /// Width of the bump in the exact solution.
        #[arg(long, default_value_t = 0.01)]
        width: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Knot positions after every accepted step.
        #[arg(long)]
        knots: Option<PathBuf>,
        /// The solution as a one-hidden-layer network.
        #[arg(long)]
        net: Option<PathBuf>,
    },
    /// Error and energy table for uniform FEM, adaptive FEM and the moving-knot network.
    Report {
        #[arg(long = "N", value_delimiter = ',', default_values_t = [23, 37, 53])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        /// Output files; `.md`, `.csv` or `.json` by extension.
        #[arg(long, num_args = 1..)]
        out: Vec<PathBuf>,
    },
    /// Activation-pattern labels of a 2D-input network on a grid, as CSV.
    DemoRegionPlot {
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        net: Option<PathBuf>,
        /// Layer widths of a random network, e.g. `2,5,5,1`.
        #[arg(long, value_delimiter = ',')]
        random: Option<Vec<usize>>,
        #[arg(long, default_value_t = 200)]
        res: usize,
        /// Square domain `[lo, hi]^2`.
        #[arg(long, value_delimiter = ',', default_values_t = [-1.0, 1.0], allow_hyphen_values = true)]
        domain: Vec<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CompileFem { .. } => "compile-fem",
            Command::CompileCpwl { .. } => "compile-cpwl",
            Command::Eval { .. } => "eval",
            Command::Verify { .. } => "verify",
            Command::Quantize { .. } => "quantize",
            Command::CheckStructured { .. } => "check-structured",
            Command::SolveBvp { .. } => "solve-bvp",
            Command::Report { .. } => "report",
            Command::DemoRegionPlot { .. } => "demo-region-plot",
        }
    }
}

fn parse_grid(s: &str) -> Result<(i32, u32), String> {
    let (k, l) = s.split_once(',').ok_or("expected k,l")?;
    let k: i32 = k.trim().parse().map_err(|e| format!("k: {e}"))?;
    let l: u32 = l.trim().parse().map_err(|e| format!("l: {e}"))?;
    if !(2..=11).contains(&l) {
        return Err("l must lie in 2..=11".into());
    }
    if k.abs() > 900 {
        return Err("k out of range".into());
    }
    Ok((k, l))
}

fn long_version() -> String {
    let mut s = env!("CARGO_PKG_VERSION").to_string();
    for (kind, schema) in femnet::io::schema_versions() {
        s.push_str(&format!("\n{kind}: {schema}"));
    }
    s
}

fn main() -> ExitCode {
    let cmd = Cli::command().long_version(&*Box::leak(long_version().into_boxed_str()));
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let start = Instant::now();
    let outcome = commands::run(&cli);
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(out) => {
            if let Some(path) = &cli.run_report {
                let report = RunReport::new(&cli, &out, elapsed);
                if let Err(e) = report.write(path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(out.exit)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
