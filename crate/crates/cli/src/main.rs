//! Command-line front end over the wave-construction library.
//!
//! One flat config file drives every subcommand; all outputs land in the
//! configured directory and embed the SHA-256 of the canonical config so a
//! plot can always be traced back to the run that produced it. Outputs are
//! deterministic for a fixed config and seed, regardless of worker count.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use perikdv_core::checks;
use perikdv_core::config::RunConfig;
use perikdv_core::constitutive::{build_moment_table, ConstitutiveModel, LawRegistry, MomentTable};
use perikdv_core::dynamics::{init_from_wave, measure_wave_speed, BondTable, Snapshot};
use perikdv_core::error::{Error, Result};
use perikdv_core::grid::Grid;
use perikdv_core::kdv::KdvProfileSpec;
use perikdv_core::operators::OperatorContext;
use perikdv_core::solver::{epsilon_sweep, fixed_point_solve, verify_solution, SolverConfig};

#[derive(Parser)]
#[command(name = "perikdv", version, about = "Solitary waves in 1D peridynamical media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the coefficient moments and write moments.json.
    Moments(CommonArgs),
    /// Tabulate the dispersion symbols at one epsilon into symbol.csv.
    Symbol(EpsArgs),
    /// Compute and verify the traveling wave at one epsilon.
    Solve(EpsArgs),
    /// Solve over the configured epsilon list and fit the deviation order.
    Sweep(CommonArgs),
    /// Evolve the computed wave on the physical lattice and measure its speed.
    Simulate(EpsArgs),
    /// Run the invariant suites against the configured model.
    Check(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.dir from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EpsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Wave parameter; defaults to the first entry of sweep.eps_list.
    #[arg(long)]
    epsilon: Option<f64>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Grid(_) | Error::DomainTooSmall { .. } => 2,
        Error::NonIntegrable { .. }
        | Error::NegativeMoment { .. }
        | Error::AssumptionViolated(_)
        | Error::QuadratureInsufficient(_)
        | Error::RemainderBoundExceeded { .. } => 3,
        Error::InnerSolveStalled { .. }
        | Error::NotContracting { .. }
        | Error::LeftTrustRegion { .. }
        | Error::FormMismatch { .. }
        | Error::ResolutionTooCoarse { .. }
        | Error::DomainMismatch { .. }
        | Error::BlowUp { .. }
        | Error::InsufficientTranslation(_) => 4,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

fn main() {
    if let Ok(threads) = std::env::var("PERIKDV_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}

/// Everything a subcommand needs, assembled once from the config file.
struct Setup {
    cfg: RunConfig,
    hash: String,
    model: ConstitutiveModel,
    moments: MomentTable,
    grid: Grid,
    out_dir: PathBuf,
}

impl Setup {
    fn comments(&self, extra: &[String]) -> Vec<String> {
        let mut c = vec![format!("config_hash={}", self.hash)];
        c.extend_from_slice(extra);
        c
    }
}

fn setup(args: &CommonArgs) -> Result<Setup> {
    let cfg = RunConfig::from_file(&args.config)?;
    let hash = cfg.hash();
    let model = cfg.build_model(&LawRegistry::builtin())?;
    let moments = build_moment_table(&model)?;
    let spec = KdvProfileSpec::from_moments(&moments);
    let l_dom = cfg.grid_l_dom.unwrap_or_else(|| spec.suggested_half_length());
    let grid = Grid::new(l_dom, cfg.grid_n())?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg.output_dir()));
    std::fs::create_dir_all(&out_dir)?;
    Ok(Setup {
        cfg,
        hash,
        model,
        moments,
        grid,
        out_dir,
    })
}

fn eps_of(args: &EpsArgs, cfg: &RunConfig) -> f64 {
    args.epsilon.unwrap_or_else(|| cfg.sweep_eps()[0])
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Moments(args) => cmd_moments(&args),
        Command::Symbol(args) => cmd_symbol(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Check(args) => cmd_check(&args),
    }
}

fn cmd_moments(args: &CommonArgs) -> Result<i32> {
    let s = setup(args)?;
    let mut value = serde_json::to_value(s.moments)?;
    value["config_hash"] = serde_json::Value::String(s.hash.clone());
    let path = s.out_dir.join("moments.json");
    std::fs::write(&path, format!("{:#}\n", value))?;
    println!(
        "moments: c0_sq = {:.12}, d1 = {:.12}, d2 = {:.12} -> {}",
        s.moments.c0_sq,
        s.moments.d1,
        s.moments.d2,
        path.display()
    );
    Ok(0)
}

fn cmd_symbol(args: &EpsArgs) -> Result<i32> {
    let s = setup(&args.common)?;
    let eps = eps_of(args, &s.cfg);
    let ctx = OperatorContext::new(&s.grid, &s.model, eps)?;
    let path = s.out_dir.join("symbol.csv");
    let mut f = File::create(&path)?;
    ctx.symbols()
        .write_csv(&s.grid, &mut f, &s.comments(&[format!("epsilon={eps}")]))?;
    println!(
        "symbol: eps = {eps}, plateau = {:.6}, C0 = {:.6}, C1 = {:.3} -> {}",
        ctx.symbols().b_eps_infty,
        ctx.symbols().c0_lower,
        ctx.symbols().c1_cutoff,
        path.display()
    );
    Ok(0)
}

fn cmd_solve(args: &EpsArgs) -> Result<i32> {
    let s = setup(&args.common)?;
    let eps = eps_of(args, &s.cfg);
    let ctx = OperatorContext::new(&s.grid, &s.model, eps)?;
    let sol = fixed_point_solve(&ctx, &SolverConfig::from_run_config(&s.cfg))?;
    let report = verify_solution(&ctx, &sol)?;

    let json_path = s.out_dir.join(format!("solution_eps{eps}.json"));
    std::fs::write(&json_path, format!("{:#}\n", sol.to_json(&s.hash)))?;
    let csv_path = s.out_dir.join(format!("solution_eps{eps}.csv"));
    let mut f = File::create(&csv_path)?;
    sol.write_profile_csv(&mut f, &s.comments(&[format!("epsilon={eps}")]))?;
    println!(
        "solve: eps = {eps}, c_eps = {:.9}, residual = {:.3e}, outer iters = {} -> {}",
        sol.c_eps(),
        report.residual,
        sol.outer_history.len(),
        json_path.display()
    );
    Ok(0)
}

fn cmd_sweep(args: &CommonArgs) -> Result<i32> {
    let s = setup(args)?;
    let eps_list = s.cfg.sweep_eps();
    let table = epsilon_sweep(
        &s.grid,
        &s.model,
        &eps_list,
        &SolverConfig::from_run_config(&s.cfg),
    );
    let path = s.out_dir.join("sweep.csv");
    let mut f = File::create(&path)?;
    table.write_csv(&mut f, &s.comments(&[]))?;
    for r in &table.rows {
        println!(
            "sweep: eps = {}, err_l2 = {:.6e}, residual = {:.3e}, status = {}",
            r.epsilon, r.err_l2, r.final_residual, r.status
        );
    }
    match table.slope {
        Some(slope) => println!("sweep: fitted order {slope:.4} -> {}", path.display()),
        None => println!("sweep: too few converged rows for a slope -> {}", path.display()),
    }
    if table.rows.iter().any(|r| r.status != "ok") {
        return Ok(4);
    }
    Ok(0)
}

fn cmd_simulate(args: &EpsArgs) -> Result<i32> {
    let s = setup(&args.common)?;
    let eps = eps_of(args, &s.cfg);
    let ctx = OperatorContext::new(&s.grid, &s.model, eps)?;
    let sol = fixed_point_solve(&ctx, &SolverConfig::from_run_config(&s.cfg))?;
    let c = sol.c_eps();

    let ly = s.cfg.dyn_ly.unwrap_or(s.grid.half_length() / eps);
    let limit = 0.2 / (eps * sol.decay_rate);
    let ny = s.cfg.dyn_ny.unwrap_or_else(|| {
        let mut n = 64usize;
        while 2.0 * ly / n as f64 > 0.5 * limit {
            n *= 2;
        }
        n
    });
    let pgrid = Grid::new(ly, ny)?;
    let table = BondTable::new(&s.model, pgrid.spacing())?;
    let mut state = init_from_wave(&sol, &pgrid)?;
    let dt = s.cfg.dyn_dt.unwrap_or(0.4 * pgrid.spacing() / c);
    let t_end = s.cfg.dyn_t_end.unwrap_or(0.5 * ly / c);
    let steps = ((t_end / dt).ceil() as usize).max(1);
    let stride = (steps / (s.cfg.snapshots() - 1)).max(1);

    let momentum0 = state.momentum(pgrid.spacing());
    let mut snaps: Vec<Snapshot> = Vec::new();
    let write_snap = |state: &perikdv_core::dynamics::SimState, idx: usize| -> Result<()> {
        let path = s.out_dir.join(format!("snapshot_{idx:03}.csv"));
        let mut f = File::create(&path)?;
        state.write_snapshot_csv(
            &pgrid,
            &mut f,
            &s.comments(&[format!("epsilon={eps}"), format!("time={}", state.time)]),
        )
    };
    write_snap(&state, 0)?;
    snaps.push(state.snapshot(&pgrid)?);
    let mut written = 1;
    for step in 1..=steps {
        state.step(&s.model, &table, dt)?;
        if step % stride == 0 || step == steps {
            write_snap(&state, written)?;
            written += 1;
            snaps.push(state.snapshot(&pgrid)?);
        }
    }
    let momentum_drift = (state.momentum(pgrid.spacing()) - momentum0).abs() / state.time;

    let meas = measure_wave_speed(&snaps)?;
    let summary = serde_json::json!({
        "config_hash": s.hash,
        "epsilon": eps,
        "c_eps": c,
        "measured_speed": meas.speed,
        "relative_speed_error": (meas.speed - c).abs() / c,
        "shape_drift": meas.shape_drift,
        "momentum_drift_per_time": momentum_drift,
        "Ly": ly,
        "Ny": ny,
        "dt": dt,
        "t_end": state.time,
        "snapshots": written,
    });
    let path = s.out_dir.join("simulation.json");
    std::fs::write(&path, format!("{:#}\n", summary))?;
    println!(
        "simulate: eps = {eps}, predicted c_eps = {c:.6}, measured = {:.6} ({:+.3}%), drift = {:.3e} -> {}",
        meas.speed,
        100.0 * (meas.speed - c) / c,
        meas.shape_drift,
        path.display()
    );
    Ok(0)
}

fn cmd_check(args: &CommonArgs) -> Result<i32> {
    let s = setup(args)?;
    let outcomes = checks::run_all(&s.cfg)?;
    let path = s.out_dir.join("check.txt");
    let mut f = File::create(&path)?;
    writeln!(f, "# config_hash={}", s.hash)?;
    let mut failures = 0;
    for o in &outcomes {
        let verdict = if o.passed { "ok  " } else { "FAIL" };
        println!("{verdict} {:<24} {}", o.name, o.detail);
        writeln!(f, "{verdict} {:<24} {}", o.name, o.detail)?;
        if !o.passed {
            failures += 1;
        }
    }
    println!("check: {} suites, {failures} failed", outcomes.len());
    if failures > 0 {
        return Ok(5);
    }
    Ok(0)
}
