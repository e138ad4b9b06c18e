use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use flattop::io::{parse_config, run, Command};
use flattop::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Sweep,
    Analyze,
    Optimize,
    Validate,
    ExportPotential,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Sweep => Command::Sweep,
            Cmd::Analyze => Command::Analyze,
            Cmd::Optimize => Command::Optimize,
            Cmd::Validate => Command::Validate,
            Cmd::ExportPotential => Command::ExportPotential,
        }
    }
}

/// Exchange-coupling sweeps, error budgets and design search for double quantum dots.
#[derive(Debug, Parser)]
#[command(name = "sim", version)]
struct Args {
    command: Cmd,
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; SIM_THREADS is used when absent.
    #[arg(long)]
    threads: Option<usize>,
    /// Uniform sweep points; overrides `analysis.v_points`.
    #[arg(long)]
    v_points: Option<usize>,
    /// Relative voltage error; overrides `analysis.delta`.
    #[arg(long)]
    delta: Option<f64>,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Error> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("SIM_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("SIM_THREADS={s:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn main_inner(args: Args) -> Result<bool, Error> {
    if let Some(n) = thread_count(args.threads)? {
        if n == 0 {
            return Err(Error::Parse("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Parse(format!("{}: {e}", args.config.display())))?;
    let mut spec = parse_config(&text).map_err(|e| Error::Parse(format!("{}: {e}", args.config.display())))?;
    let command = Command::from(args.command);
    if spec.command != command {
        eprintln!("note: running {command} (config says {})", spec.command);
        spec.command = command;
    }
    if let Some(out) = args.out {
        spec.output_dir = out;
    }
    if let Some(n) = args.v_points {
        spec.analysis.v_points = n;
    }
    if let Some(d) = args.delta {
        spec.analysis.delta = d;
    }
    let report = run(&spec)?;
    println!("{} done in {:.1} s; results in {}", command, report.run.wall_time_s, spec.output_dir.display());
    if let Some(a) = &report.analysis {
        let p = &a.point;
        println!(
            "v0 = {:.6}  J = {:.6e} ueV  omega_eff = {:.4e}  rms dJ/J = {:.3e}  swap = {:.2} ns",
            p.v0, p.j0_uev, p.omega_effective, p.rms_relative_error, p.swap_time_ns
        );
        for v in &a.verdicts {
            println!("threshold {:.0e}: {} (margin {:.3})", v.threshold, if v.passes { "pass" } else { "fail" }, v.margin);
        }
        let basis: Vec<String> = a.basis_convergence.iter().map(|r| format!("N={} {:.4e}", r.basis_size, r.j_uev)).collect();
        println!("J vs basis size: {}", basis.join(", "));
    }
    if let Some(o) = &report.optimize {
        println!(
            "omega_eff {:.4e} -> {:.4e} after {} evaluations ({:?})",
            o.initial_omega_effective, o.best_omega_effective, o.evaluations, o.termination
        );
    }
    if let Some(t) = &report.validation {
        for r in &t.rows {
            println!("{:<36} {:>14.6e} vs {:>14.6e}  {:<24} {}", r.check, r.value, r.reference, r.criterion, if r.passed { "pass" } else { "FAIL" });
        }
        return Ok(t.all_passed);
    }
    Ok(true)
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
