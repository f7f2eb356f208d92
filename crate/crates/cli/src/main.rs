//! Command-line frontend for the regenerative-braking timetable synchronizer.
//!
//! Subcommands cover the whole pipeline: `gen` emits a synthetic instance,
//! `validate` checks a timetable against its scheduling windows, `pairs`
//! lists synchronization candidates, `build` exports the optimization model
//! as MPS, `solve` optimizes the timetable, `evaluate` turns one timetable
//! into overlap and energy figures, and `report` compares the initial
//! timetable against an optimized one.
//!
//! Exit codes: 0 success; 1 violations found or no feasible timetable;
//! 2 bad flags or unreadable/invalid inputs; 3 internal failure. Errors are
//! printed to stderr as a single `error: …` line, and artifacts written
//! before a failure are removed.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use railsync_core::mip::mps::export_mps_string;
use railsync_core::solver::ENUMERATION_CAP;
use railsync_core::{
    branch_and_bound, build_model, build_sync_pairs, compare_reports, effective_consumption,
    enumerate_oracle, extract_timetable, generate, overlap_closed_form, total_overlap,
    validate_timetable, BigMMode, Direction, GenSpec, Instance, PowerParams, Solution,
    SolveOptions, SolveStatus, SyncPair, SyncPairs, Timetable,
};

#[derive(Parser)]
#[command(
    name = "railsync",
    version,
    about = "Timetable synchronization for regenerative braking energy reuse",
    propagate_version = true
)]
struct Cli {
    /// Print progress details to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-line corridor instance
    Gen(GenArgs),
    /// Check a timetable against an instance's scheduling windows
    Validate(ValidateArgs),
    /// List synchronization pair candidates of the initial timetable
    Pairs(PairsArgs),
    /// Build the optimization model and export it as an MPS file
    Build(BuildArgs),
    /// Optimize the timetable for maximum braking/acceleration overlap
    Solve(SolveArgs),
    /// Compute overlap and energy figures for one timetable
    Evaluate(EvaluateArgs),
    /// Compare the initial timetable against an optimized one
    Report(ReportArgs),
}

/// Overrides applied to the instance's model parameters.
#[derive(Args)]
struct ModelArgs {
    /// Pairing radius override, seconds.
    #[arg(long, value_name = "SECONDS")]
    r: Option<f64>,
    /// Strict-inequality margin override, seconds.
    #[arg(long, value_name = "SECONDS")]
    epsilon: Option<f64>,
    /// Event deviation box half-width override, seconds.
    #[arg(long, value_name = "SECONDS")]
    delta: Option<f64>,
}

impl ModelArgs {
    fn apply(&self, inst: &mut Instance) -> Result<(), Failure> {
        if let Some(r) = self.r {
            if !(r > 0.0) {
                return Err(usage(format!("--r must be positive, got {r}")));
            }
            inst.params.r = r;
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(usage(format!("--epsilon must be positive, got {eps}")));
            }
            inst.params.epsilon = eps;
        }
        if let Some(delta) = self.delta {
            if !(delta >= 0.0) {
                return Err(usage(format!("--delta must be non-negative, got {delta}")));
            }
            inst.params.deviation = Some(delta);
        }
        Ok(())
    }
}

/// Constant-power energy model knobs.
#[derive(Args)]
struct PowerArgs {
    /// Traction draw while accelerating, kW.
    #[arg(long, value_name = "KW", default_value_t = 2000.0)]
    accel_kw: f64,
    /// Power a braking train feeds back, kW.
    #[arg(long, value_name = "KW", default_value_t = 1500.0)]
    regen_kw: f64,
    /// Fraction of regenerated power that survives transmission.
    #[arg(long, value_name = "FRACTION", default_value_t = 0.9)]
    efficiency: f64,
    /// Non-accelerating consumption per track traversal, kWh.
    #[arg(long, value_name = "KWH", default_value_t = 0.0)]
    base_kwh: f64,
}

impl PowerArgs {
    fn build(&self) -> Result<PowerParams, Failure> {
        let pp = PowerParams {
            accel_kw: self.accel_kw,
            regen_kw: self.regen_kw,
            efficiency: self.efficiency,
            base_kwh_per_trip: self.base_kwh,
            ..PowerParams::default()
        };
        pp.validate().map_err(usage)?;
        Ok(pp)
    }
}

#[derive(Args)]
struct GenArgs {
    /// Directory receiving instance.json.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Stations along the corridor.
    #[arg(long, default_value_t = GenSpec::default().stations)]
    stations: usize,
    /// Functional trains (even; half per direction).
    #[arg(long, default_value_t = GenSpec::default().trains)]
    trains: usize,
    /// Dispatch spacing within each fleet, seconds.
    #[arg(long, value_name = "SECONDS", default_value_t = GenSpec::default().mean_headway_s)]
    headway: f64,
    /// Full width of every trip window, seconds.
    #[arg(long, value_name = "SECONDS", default_value_t = GenSpec::default().trip_window_s)]
    trip_window: f64,
    /// Full width of every dwell window, seconds.
    #[arg(long, value_name = "SECONDS", default_value_t = GenSpec::default().dwell_window_s)]
    dwell_window: f64,
    /// Pairing radius, seconds.
    #[arg(long, value_name = "SECONDS", default_value_t = GenSpec::default().r)]
    r: f64,
    /// Event deviation box half-width, seconds.
    #[arg(long, value_name = "SECONDS", default_value_t = GenSpec::default().deviation)]
    delta: f64,
    /// Scheduling horizon, seconds.
    #[arg(long, value_name = "SECONDS", default_value_t = GenSpec::default().horizon_s)]
    horizon: f64,
    #[arg(long, default_value_t = GenSpec::default().seed)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance document (JSON).
    instance: PathBuf,
    /// Timetable CSV to check instead of the instance's initial timetable.
    #[arg(long, value_name = "CSV")]
    timetable: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct PairsArgs {
    /// Instance document (JSON).
    instance: PathBuf,
    /// Also write the table to DIR/pairs.txt.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct BuildArgs {
    /// Instance document (JSON).
    instance: PathBuf,
    /// Directory receiving model.mps and model-stats.txt.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Big-M choice: `auto` (per-pair, from event boxes) or a global value.
    #[arg(long, value_name = "auto|VALUE", default_value = "auto", value_parser = parse_big_m)]
    big_m: BigMMode,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance document (JSON).
    instance: PathBuf,
    /// Directory receiving solution.json, timetable.csv and solver.log.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Big-M choice: `auto` (per-pair, from event boxes) or a global value.
    #[arg(long, value_name = "auto|VALUE", default_value = "auto", value_parser = parse_big_m)]
    big_m: BigMMode,
    /// Stop after exploring this many search nodes.
    #[arg(long, value_name = "N")]
    node_limit: Option<usize>,
    /// Stop after this much solve time, seconds.
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    /// Stop once the relative optimality gap falls this low (0 proves optimality).
    #[arg(long, value_name = "FRACTION")]
    gap_limit: Option<f64>,
    /// Solver worker threads (default 1 for reproducible artifacts).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Solve by exhaustive indicator enumeration instead of branch-and-bound
    /// (reference mode; capped at a small pair count, budgets ignored).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Instance document (JSON).
    instance: PathBuf,
    /// Timetable CSV to evaluate instead of the instance's initial timetable.
    #[arg(long, value_name = "CSV")]
    timetable: Option<PathBuf>,
    /// Also write energy-report.txt and energy-pairs.csv there.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    power: PowerArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Instance document (JSON).
    instance: PathBuf,
    /// Optimized timetable CSV to compare against the initial one.
    #[arg(long, value_name = "CSV")]
    optimized: PathBuf,
    /// Also write report.txt there.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    power: PowerArgs,
}

/// A failure to report: exit code plus a single-line message.
struct Failure {
    exit: u8,
    msg: String,
}

fn usage<E: Display>(e: E) -> Failure {
    Failure {
        exit: 2,
        msg: e.to_string(),
    }
}

fn internal<E: Display>(e: E) -> Failure {
    Failure {
        exit: 3,
        msg: e.to_string(),
    }
}

fn parse_big_m(s: &str) -> Result<BigMMode, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(BigMMode::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 => Ok(BigMMode::Fixed(v)),
        Ok(v) => Err(format!("big-M must be positive, got {v}")),
        Err(_) => Err(format!("expected `auto` or a number, got `{s}`")),
    }
}

/// Removes everything written through it unless `commit` was called.
struct Artifacts {
    written: Vec<PathBuf>,
    keep: bool,
}

impl Artifacts {
    fn new() -> Self {
        Artifacts {
            written: Vec::new(),
            keep: false,
        }
    }

    fn write(&mut self, path: PathBuf, contents: &str) -> Result<(), Failure> {
        self.written.push(path.clone());
        fs::write(&path, contents).map_err(|e| internal(format!("{}: {e}", path.display())))
    }

    fn commit(&mut self) {
        self.keep = true;
    }
}

impl Drop for Artifacts {
    fn drop(&mut self) {
        if !self.keep {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
        }
    }
}

fn main() -> ExitCode {
    // Die quietly when stdout closes early (`railsync pairs … | head`)
    // instead of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let one_line = f.msg.replace('\n', "; ");
            eprintln!("error: {one_line}");
            ExitCode::from(f.exit)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Gen(args) => cmd_gen(args, verbose),
        Command::Validate(args) => cmd_validate(args, verbose),
        Command::Pairs(args) => cmd_pairs(args),
        Command::Build(args) => cmd_build(args, verbose),
        Command::Solve(args) => cmd_solve(args, verbose),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn note(verbose: bool, msg: impl Display) {
    if verbose {
        eprintln!("{msg}");
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| internal(format!("{}: {e}", dir.display())))
}

/// Loads an instance and applies parameter overrides. Input problems are
/// usage errors.
fn load_instance(path: &Path, model: &ModelArgs) -> Result<Instance, Failure> {
    let mut inst = Instance::from_file(path)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    model.apply(&mut inst)?;
    Ok(inst)
}

fn read_timetable(inst: &Instance, path: &Path) -> Result<Timetable, Failure> {
    let file =
        fs::File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Timetable::read_csv(&inst.network, file)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_gen(args: GenArgs, verbose: bool) -> Result<u8, Failure> {
    let spec = GenSpec {
        stations: args.stations,
        trains: args.trains,
        mean_headway_s: args.headway,
        trip_window_s: args.trip_window,
        dwell_window_s: args.dwell_window,
        r: args.r,
        deviation: args.delta,
        horizon_s: args.horizon,
        seed: args.seed,
    };
    let doc = generate(&spec).map_err(usage)?;
    let inst = doc.load().map_err(internal)?;
    let pairs = build_sync_pairs(&inst.network, &inst.params, &inst.initial).map_err(internal)?;
    ensure_dir(&args.out_dir)?;
    let mut artifacts = Artifacts::new();
    let path = args.out_dir.join("instance.json");
    let json = serde_json::to_string_pretty(&doc).map_err(internal)?;
    artifacts.write(path.clone(), &(json + "\n"))?;
    artifacts.commit();
    note(verbose, format_args!("seed {} under a {} s spacing", spec.seed, spec.mean_headway_s));
    println!(
        "wrote {}: {} trains, {} platforms, {} turn-arounds, {} pair candidates",
        path.display(),
        inst.network.trains.len(),
        inst.network.platforms.len(),
        doc.turnarounds.len(),
        pairs.len(),
    );
    Ok(0)
}

fn cmd_validate(args: ValidateArgs, verbose: bool) -> Result<u8, Failure> {
    let inst = load_instance(&args.instance, &args.model)?;
    let tt = match &args.timetable {
        Some(path) => read_timetable(&inst, path)?,
        None => inst.initial.clone(),
    };
    note(
        verbose,
        format_args!(
            "checking {} trains against {} scheduling windows",
            inst.network.trains.len(),
            inst.params.trip.len()
                + inst.params.dwell.len()
                + inst.params.travel.len()
                + inst.params.connection.len()
                + inst.params.turnaround.len()
                + inst.params.headway.len()
        ),
    );
    let report = validate_timetable(&inst.network, &inst.params, &tt).map_err(usage)?;
    print!("{report}");
    Ok(if report.is_feasible() { 0 } else { 1 })
}

fn pairs_table(inst: &Instance, pairs: &SyncPairs) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<9} {:<10} {:<10} {:<10} {:<10} {:>8} {:>8} {:>12}\n",
        "direction", "i", "j", "t", "partner", "accel_lb", "brake_lb", "midpoint_gap"
    ));
    let row = |p: &SyncPair| {
        let dir = match p.direction {
            Direction::Right => "right",
            Direction::Left => "left",
        };
        format!(
            "{:<9} {:<10} {:<10} {:<10} {:<10} {:>8.1} {:>8.1} {:>+12.2}\n",
            dir,
            inst.network.platform_id(p.i),
            inst.network.platform_id(p.j),
            inst.network.train_id(p.t),
            inst.network.train_id(p.partner),
            p.accel_lb,
            p.brake_lb,
            p.midpoint_gap,
        )
    };
    for p in pairs.all() {
        out.push_str(&row(p));
    }
    out
}

fn cmd_pairs(args: PairsArgs) -> Result<u8, Failure> {
    let inst = load_instance(&args.instance, &args.model)?;
    let pairs = build_sync_pairs(&inst.network, &inst.params, &inst.initial).map_err(usage)?;
    let table = pairs_table(&inst, &pairs);
    print!("{table}");
    println!(
        "{} pairs ({} right, {} left) within radius {}",
        pairs.len(),
        pairs.right.len(),
        pairs.left.len(),
        inst.params.r
    );
    if let Some(dir) = &args.out_dir {
        ensure_dir(dir)?;
        let mut artifacts = Artifacts::new();
        artifacts.write(dir.join("pairs.txt"), &table)?;
        artifacts.commit();
    }
    Ok(0)
}

/// Shared by `build` and `solve`: pairs from the initial timetable, then the
/// model. Modeling failures caused by the inputs are usage errors.
fn build_pipeline(
    inst: &Instance,
    mode: BigMMode,
    verbose: bool,
) -> Result<(SyncPairs, railsync_core::MipModel), Failure> {
    let pairs = build_sync_pairs(&inst.network, &inst.params, &inst.initial).map_err(usage)?;
    let model =
        build_model(&inst.network, &inst.params, &pairs, &inst.initial, mode).map_err(usage)?;
    let stats = model.stats();
    note(
        verbose,
        format_args!(
            "model: {} rows, {} columns, {} binaries",
            stats.rows, stats.columns, stats.binaries
        ),
    );
    Ok((pairs, model))
}

fn cmd_build(args: BuildArgs, verbose: bool) -> Result<u8, Failure> {
    let inst = load_instance(&args.instance, &args.model)?;
    let (_, model) = build_pipeline(&inst, args.big_m, verbose)?;
    let mps = export_mps_string(&model).map_err(internal)?;
    let stats = model.stats();
    ensure_dir(&args.out_dir)?;
    let mut artifacts = Artifacts::new();
    let mps_path = args.out_dir.join("model.mps");
    artifacts.write(mps_path.clone(), &mps)?;
    artifacts.write(args.out_dir.join("model-stats.txt"), &stats.to_string())?;
    artifacts.commit();
    print!("{stats}");
    println!("wrote {}", mps_path.display());
    Ok(0)
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "feasible",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unknown => "unknown",
    }
}

/// Deterministic solution summary: everything except wall-clock figures,
/// which live in solver.log.
fn solution_json(inst: &Instance, model: &railsync_core::MipModel, sol: &Solution) -> String {
    let pairs: Vec<serde_json::Value> = model
        .pairs
        .iter()
        .zip(&sol.pairs)
        .map(|(p, act)| {
            serde_json::json!({
                "direction": match p.direction {
                    Direction::Right => "right",
                    Direction::Left => "left",
                },
                "i": inst.network.platform_id(p.i),
                "j": inst.network.platform_id(p.j),
                "t": inst.network.train_id(p.t),
                "partner": inst.network.train_id(p.partner),
                "active": act.active,
                "sigma": act.sigma,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "status": status_name(sol.status),
        "objective": sol.objective,
        "best_bound": sol.best_bound,
        "gap": sol.gap,
        "nodes": sol.stats.nodes,
        "pairs": pairs,
    });
    serde_json::to_string_pretty(&doc).expect("json value serializes") + "\n"
}

fn solver_log(sol: &Solution) -> String {
    let mut log = String::new();
    log.push_str(&format!("status        {}\n", status_name(sol.status)));
    log.push_str(&format!("objective     {:.6}\n", sol.objective));
    log.push_str(&format!("best bound    {:.6}\n", sol.best_bound));
    log.push_str(&format!("gap           {:.6}\n", sol.gap));
    log.push_str(&format!("nodes         {}\n", sol.stats.nodes));
    log.push_str(&format!("lp iterations {}\n", sol.stats.lp_iterations));
    log.push_str(&format!("elapsed       {:?}\n", sol.stats.elapsed));
    if !sol.stats.node_log.is_empty() {
        log.push_str("node  depth  bound          incumbent\n");
        for rec in &sol.stats.node_log {
            let inc = rec
                .incumbent
                .map(|v| format!("{v:.6}"))
                .unwrap_or_else(|| "-".to_string());
            log.push_str(&format!(
                "{:<5} {:<6} {:<14.6} {}\n",
                rec.node, rec.depth, rec.bound, inc
            ));
        }
    }
    log
}

fn cmd_solve(args: SolveArgs, verbose: bool) -> Result<u8, Failure> {
    let inst = load_instance(&args.instance, &args.model)?;
    let (_, model) = build_pipeline(&inst, args.big_m, verbose)?;

    let mut opts = SolveOptions::default();
    if let Some(n) = args.node_limit {
        opts.node_limit = n;
    }
    if let Some(s) = args.time_limit {
        if !(s > 0.0) {
            return Err(usage(format!("--time-limit must be positive, got {s}")));
        }
        opts.time_limit = Duration::from_secs_f64(s);
    }
    if let Some(g) = args.gap_limit {
        if !(g >= 0.0) {
            return Err(usage(format!("--gap-limit must be non-negative, got {g}")));
        }
        opts.gap_limit = g;
    }
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        opts.threads = t;
    }

    let sol = if args.oracle {
        enumerate_oracle(&model).map_err(|e| match e {
            railsync_core::Error::TooManyPairs { .. } => usage(format!(
                "{e}; drop --oracle or shrink the instance (cap {ENUMERATION_CAP})"
            )),
            other => internal(other),
        })?
    } else {
        branch_and_bound(&model, &opts).map_err(internal)?
    };

    ensure_dir(&args.out_dir)?;
    let mut artifacts = Artifacts::new();
    artifacts.write(
        args.out_dir.join("solution.json"),
        &solution_json(&inst, &model, &sol),
    )?;
    artifacts.write(args.out_dir.join("solver.log"), &solver_log(&sol))?;

    let solved = matches!(sol.status, SolveStatus::Optimal | SolveStatus::Feasible);
    if solved {
        let tt = extract_timetable(&inst.network, &model, &sol.x).map_err(internal)?;
        let mut csv = Vec::new();
        tt.write_csv(&inst.network, &mut csv).map_err(internal)?;
        let csv = String::from_utf8(csv).map_err(internal)?;
        artifacts.write(args.out_dir.join("timetable.csv"), &csv)?;
    }
    artifacts.commit();

    println!(
        "status {}  objective {:.6}  bound {:.6}  gap {:.4}%  nodes {}",
        status_name(sol.status),
        sol.objective,
        sol.best_bound,
        100.0 * sol.gap,
        sol.stats.nodes
    );
    println!(
        "wrote {}",
        if solved {
            "solution.json, timetable.csv, solver.log"
        } else {
            "solution.json, solver.log"
        }
    );
    Ok(if solved { 0 } else { 1 })
}

/// Pairs from the initial timetable plus the overlap each realizes at `tt`.
fn pair_overlaps(
    inst: &Instance,
    pairs: &[SyncPair],
    tt: &Timetable,
) -> Result<Vec<f64>, Failure> {
    pairs
        .iter()
        .map(|p| {
            let (at, ap) = p.accel();
            let (bt, bp) = p.brake();
            let dep = tt.require(&inst.network, at, ap).map_err(usage)?.departure;
            let arr = tt.require(&inst.network, bt, bp).map_err(usage)?.arrival;
            Ok(overlap_closed_form(dep, arr, p.accel_lb, p.brake_lb))
        })
        .collect()
}

fn energy_pairs_csv(inst: &Instance, pairs: &[SyncPair], report: &railsync_core::EnergyReport) -> String {
    let mut out = String::from("pair,direction,t,partner,i,j,sigma_s,transferred_kwh\n");
    for (p, e) in pairs.iter().zip(&report.pairs) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6}\n",
            e.pair,
            match p.direction {
                Direction::Right => "right",
                Direction::Left => "left",
            },
            inst.network.train_id(p.t),
            inst.network.train_id(p.partner),
            inst.network.platform_id(p.i),
            inst.network.platform_id(p.j),
            e.sigma,
            e.transferred_kwh,
        ));
    }
    out
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<u8, Failure> {
    let inst = load_instance(&args.instance, &args.model)?;
    let pp = args.power.build()?;
    let tt = match &args.timetable {
        Some(path) => read_timetable(&inst, path)?,
        None => inst.initial.clone(),
    };
    let pairs = build_sync_pairs(&inst.network, &inst.params, &inst.initial).map_err(usage)?;
    let all: Vec<SyncPair> = pairs.all().cloned().collect();
    let sigmas = pair_overlaps(&inst, &all, &tt)?;
    let overlap = total_overlap(&inst.network, &all, &tt).map_err(usage)?;
    let report = effective_consumption(&inst.network, &inst.params, &tt, &all, &sigmas, &pp)
        .map_err(internal)?;
    let text = format!(
        "overlap      {:>12.3} s over {} pairs\n{report}\n",
        overlap,
        all.len()
    );
    print!("{text}");
    if let Some(dir) = &args.out_dir {
        ensure_dir(dir)?;
        let mut artifacts = Artifacts::new();
        artifacts.write(dir.join("energy-report.txt"), &text)?;
        artifacts.write(
            dir.join("energy-pairs.csv"),
            &energy_pairs_csv(&inst, &all, &report),
        )?;
        artifacts.commit();
    }
    Ok(0)
}

fn cmd_report(args: ReportArgs) -> Result<u8, Failure> {
    let inst = load_instance(&args.instance, &args.model)?;
    let pp = args.power.build()?;
    let optimized = read_timetable(&inst, &args.optimized)?;
    let pairs = build_sync_pairs(&inst.network, &inst.params, &inst.initial).map_err(usage)?;
    let all: Vec<SyncPair> = pairs.all().cloned().collect();

    let sig0 = pair_overlaps(&inst, &all, &inst.initial)?;
    let sig1 = pair_overlaps(&inst, &all, &optimized)?;
    let overlap0 = total_overlap(&inst.network, &all, &inst.initial).map_err(usage)?;
    let overlap1 = total_overlap(&inst.network, &all, &optimized).map_err(usage)?;
    let before =
        effective_consumption(&inst.network, &inst.params, &inst.initial, &all, &sig0, &pp)
            .map_err(internal)?;
    let after = effective_consumption(&inst.network, &inst.params, &optimized, &all, &sig1, &pp)
        .map_err(internal)?;
    let cmp = compare_reports(&before, &after).map_err(internal)?;

    let header = format!(
        "{:>6} {:>6} {:>16} {:>16} {:>18} {:>18} {:>13}\n",
        "trains",
        "pairs",
        "overlap_init_s",
        "overlap_final_s",
        "effective_init",
        "effective_final",
        "reduction_pct"
    );
    let row = format!(
        "{:>6} {:>6} {:>16.2} {:>16.2} {:>18.2} {:>18.2} {:>13.2}\n",
        inst.network.trains.len(),
        all.len(),
        overlap0,
        overlap1,
        before.effective_kwh,
        after.effective_kwh,
        cmp.reduction_percent,
    );
    let text = header + &row;
    print!("{text}");
    if let Some(dir) = &args.out_dir {
        ensure_dir(dir)?;
        let mut artifacts = Artifacts::new();
        artifacts.write(dir.join("report.txt"), &text)?;
        artifacts.commit();
    }
    Ok(0)
}
