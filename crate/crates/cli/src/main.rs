//! `qwalk`: runs transport experiments and exports walk circuits.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use qwalk_transport::classical::McMode;
use qwalk_transport::geometry::{ConfigFormat, GeometryConfig};
use qwalk_transport::harness::{
    compare_maps, compare_vectors, extract_slice, run_experiment, Axis, ComparisonReport, ExperimentConfig, Solver,
};
use qwalk_transport::qasm::to_qasm;
use qwalk_transport::strategies::{build_swap_test, build_unrolled_walk, AbsorbMode, FluxMap, GroverK};
use qwalk_transport::walk::{
    build_boundary_conditions, build_position_coin, build_shift, build_source_prep, build_walk_step, CoinMode,
    WalkRegisters,
};

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Particle transport as a discrete-time quantum walk")]
struct Cli {
    /// Experiment config (TOML or JSON); relative paths inside it resolve
    /// against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every stochastic solver without its own seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log level: error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the solvers listed in the config and compare their flux maps.
    Run {
        /// Solvers to run instead of the configured list.
        #[arg(long, value_delimiter = ',')]
        solvers: Vec<Solver>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Analog Monte Carlo on the continuous geometry.
    Mc {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Deterministic lattice fixed point.
    Fd {
        /// Sum this many kernel applications instead of iterating to convergence.
        #[arg(long)]
        iterations: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Quantum walk measured after every step.
    WalkMeasured {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Unrolled quantum walk with amplitude amplification on the detector.
    WalkAmplified {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Swap-test overlap of the walk state with the detector region.
    SwapScore {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare two flux CSVs; prints cosine, TV and an optional slice.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Cell size in cm, needed for a slice.
        #[arg(long)]
        cell_size: Option<f64>,
        #[arg(long, value_enum, default_value_t = AxisArg::X)]
        axis: AxisArg,
        /// Slice coordinate in cm; the domain midline by default.
        #[arg(long)]
        coordinate: Option<f64>,
    },
    /// Write the walk circuits of the configured problem as OpenQASM 2.0.
    ExportQasm,
    /// Print a config with every default spelled out.
    PrintConfig {
        #[arg(long, value_enum, default_value_t = FormatArg::Toml)]
        format: FormatArg,
    },
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Walk steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Measured-walk or swap-test shots.
    #[arg(long)]
    shots: Option<u64>,
    /// Monte Carlo particles.
    #[arg(long)]
    particles: Option<u64>,
    /// Monte Carlo flight model.
    #[arg(long, value_enum)]
    mc_mode: Option<McModeArg>,
    /// Grover iterations, or `auto`.
    #[arg(long)]
    grover_k: Option<GroverK>,
    /// What happens to shots whose coin read "stay".
    #[arg(long, value_enum)]
    absorb_mode: Option<AbsorbArg>,
    /// Detector or scored cells as `x,y` pairs, for example `--detector 1,1 --detector 2,1`.
    #[arg(long, value_parser = parse_cell)]
    detector: Vec<[usize; 2]>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum McModeArg {
    Continuous,
    Lattice,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AbsorbArg {
    SelfLoop,
    Kill,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Toml,
    Json,
}

fn parse_cell(s: &str) -> std::result::Result<[usize; 2], String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok([parse(x)?, parse(y)?])
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(s) = self.steps {
            c.walk_measured.steps = s;
            c.walk_amplified.steps = s;
            c.swap_score.steps = s;
        }
        if let Some(s) = self.shots {
            c.walk_measured.shots = s;
            c.swap_score.shots = s;
        }
        if let Some(p) = self.particles {
            c.mc.particles = p;
        }
        if let Some(m) = self.mc_mode {
            c.mc.mode = match m {
                McModeArg::Continuous => McMode::Continuous,
                McModeArg::Lattice => McMode::Lattice,
            };
        }
        if let Some(k) = self.grover_k {
            c.walk_amplified.k = k;
        }
        if let Some(m) = self.absorb_mode {
            c.walk_measured.absorb_mode = match m {
                AbsorbArg::SelfLoop => AbsorbMode::SelfLoop,
                AbsorbArg::Kill => AbsorbMode::Kill,
            };
        }
        if !self.detector.is_empty() {
            c.walk_amplified.detector = Some(self.detector.clone());
            c.swap_score.region = Some(self.detector.clone());
        }
    }
}

/// Loads the config (or the default) and returns it with the directory its
/// relative paths resolve against.
fn load_config(cli: &Cli) -> Result<(ExperimentConfig, PathBuf)> {
    let cwd = std::env::current_dir().context("reading the working directory")?;
    let (mut config, base) = match &cli.config {
        Some(path) => {
            let config = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (config, cwd.join(base))
        }
        None => (ExperimentConfig::default(), cwd.clone()),
    };
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        config.output_dir = cwd.join(out);
    }
    Ok((config, base))
}

fn summarize(report: &ComparisonReport) {
    for r in &report.solvers {
        let status = if r.ok { "ok" } else { "failed" };
        println!("{:<15} {:<7} {:>8.2} s  {}", r.solver, status, r.runtime_s, r.outputs.join(" "));
    }
    for p in &report.pairs {
        println!(
            "{} vs {}: cosine {:.4}, TV {:.4}; slice cosine {:.4}, slice TV {:.4}",
            p.a, p.b, p.cosine, p.tv, p.slice_cosine, p.slice_tv
        );
    }
    if let Some(a) = &report.amplified {
        println!(
            "walk-amplified: a = {:.6}, k = {}, amplified {:.6} (predicted {:.6})",
            a.baseline, a.k, a.amplified, a.predicted
        );
    }
    if let Some(s) = &report.swap_score {
        println!("swap-score: {:.4} +- {:.4} (exact {:.6})", s.estimate, s.sigma, s.exact);
    }
}

fn experiment(cli: &Cli, solvers: Vec<Solver>, overrides: &Overrides, fd_iterations: Option<usize>) -> Result<()> {
    let (mut config, base) = load_config(cli)?;
    if !solvers.is_empty() {
        config.solvers = solvers;
    }
    overrides.apply(&mut config);
    if fd_iterations.is_some() {
        config.fd.iterations = fd_iterations;
    }
    match run_experiment(&config, &base) {
        Ok(report) => {
            summarize(&report);
            Ok(())
        }
        Err(qwalk_transport::Error::SolversFailed(failed)) => {
            let out = base.join(&config.output_dir);
            bail!(
                "solver(s) failed: {}; partial outputs and manifest in {}",
                failed.join(", "),
                out.display()
            )
        }
        Err(e) => Err(e.into()),
    }
}

fn compare(a: &Path, b: &Path, cell_size: Option<f64>, axis: AxisArg, coordinate: Option<f64>) -> Result<()> {
    let ma = FluxMap::read_csv(a).with_context(|| format!("reading {}", a.display()))?;
    let mb = FluxMap::read_csv(b).with_context(|| format!("reading {}", b.display()))?;
    let m = compare_maps(&ma, &mb)?;
    println!("cosine {:.6}", m.cosine);
    println!("tv {:.6}", m.tv);
    if let Some(h) = cell_size {
        let axis = match axis {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
        };
        let extent = match axis {
            Axis::X => h * ma.width() as f64,
            Axis::Y => h * ma.height() as f64,
        };
        let coord = coordinate.unwrap_or(extent / 2.0);
        let sa = extract_slice(&ma, h, axis, coord)?;
        let sb = extract_slice(&mb, h, axis, coord)?;
        let s = compare_vectors(&sa.values, &sb.values)?;
        println!("slice index {}", sa.index);
        println!("slice cosine {:.6}", s.cosine);
        println!("slice tv {:.6}", s.tv);
    }
    Ok(())
}

fn export_qasm(cli: &Cli) -> Result<()> {
    let (config, base) = load_config(cli)?;
    let problem = config.problem(&base)?;
    let g = &problem.geometry;
    let out = base.join(&config.output_dir);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let (regs, n) = WalkRegisters::contiguous(g.n_x(), g.n_y());
    let step = build_walk_step(g, &regs, n, CoinMode::GateLevel)?;
    let coin = build_position_coin(g, &regs, n, CoinMode::GateLevel)?;

    let n_pos = regs.n_position();
    let a: Vec<usize> = (0..n_pos).collect();
    let b: Vec<usize> = (n_pos..2 * n_pos).collect();
    let swap = build_swap_test(2 * n_pos + 1, 2 * n_pos, &a, &b)?;

    let mut files = vec![
        ("source.qasm", build_source_prep(g, &problem.source, &regs, n)?),
        ("coin.qasm", coin.gates().expect("gate-level coin").clone()),
        ("boundary.qasm", build_boundary_conditions(&regs, n)?),
        ("shift.qasm", build_shift(&regs, n)?),
        ("step.qasm", step.to_circuit().expect("gate-level step")?),
        ("swap_test.qasm", swap),
    ];
    match build_unrolled_walk(g, &problem.source, config.walk_amplified.steps) {
        Ok((prep, _)) => files.push(("amplified_prep.qasm", prep)),
        Err(e) => log::warn!("unrolled walk not exported: {e}"),
    }
    for (name, circuit) in files {
        let path = out.join(name);
        std::fs::write(&path, to_qasm(&circuit)?).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn print_config(cli: &Cli, format: FormatArg) -> Result<()> {
    let (mut config, _) = load_config(cli)?;
    if config.solvers.is_empty() {
        config.solvers = Solver::ALL.to_vec();
    }
    if config.geometry.is_none() && config.geometry_file.is_none() {
        let problem = config.problem(Path::new("."))?;
        config.geometry = Some(GeometryConfig::from_problem(&problem));
    }
    let format = match format {
        FormatArg::Toml => ConfigFormat::Toml,
        FormatArg::Json => ConfigFormat::Json,
    };
    print!("{}", config.to_text(format)?);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { solvers, overrides } => experiment(cli, solvers.clone(), overrides, None),
        Command::Mc { overrides } => experiment(cli, vec![Solver::Mc], overrides, None),
        Command::Fd { iterations, overrides } => experiment(cli, vec![Solver::Fd], overrides, *iterations),
        Command::WalkMeasured { overrides } => experiment(cli, vec![Solver::WalkMeasured], overrides, None),
        Command::WalkAmplified { overrides } => experiment(cli, vec![Solver::WalkAmplified], overrides, None),
        Command::SwapScore { overrides } => experiment(cli, vec![Solver::SwapScore], overrides, None),
        Command::Compare {
            a,
            b,
            cell_size,
            axis,
            coordinate,
        } => compare(a, b, *cell_size, *axis, *coordinate),
        Command::ExportQasm => export_qasm(cli),
        Command::PrintConfig { format } => print_config(cli, *format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
