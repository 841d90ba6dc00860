use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cournot_mfg_cli::{preset, run_with, RunConfig, RunError, RunManifest, PRESETS};

#[derive(Parser)]
#[command(name = "cournot-mfg", version, about = "Cournot mean-field game solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a preset or a TOML configuration and write artifacts.
    Solve(SolveArgs),
    /// List preset names, or print one as TOML.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    beta: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    exploitability_every: Option<usize>,
    #[arg(long)]
    plots: bool,
    /// Run one solve per listed beta in parallel, each in `<out>/beta-<b>`.
    #[arg(long, value_delimiter = ',', conflicts_with = "beta")]
    sweep_beta: Vec<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), RunError> {
    match command {
        Command::Presets { show: None } => {
            for name in PRESETS {
                println!("{name}");
            }
            Ok(())
        }
        Command::Presets { show: Some(name) } => {
            print!("{}", preset(&name)?.to_toml());
            Ok(())
        }
        Command::Solve(args) => solve(args),
    }
}

fn solve(args: SolveArgs) -> Result<(), RunError> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => RunConfig::load(path)?,
        (None, None) => return Err(RunError::Usage("one of --preset or --config is required".into())),
    };
    if let Some(out) = args.out {
        cfg.output.directory = out;
    }
    if let Some(b) = args.beta {
        cfg.solver.beta = b;
    }
    if let Some(e) = args.epsilon {
        cfg.solver.epsilon = e;
    }
    if let Some(n) = args.max_iters {
        cfg.solver.max_iters = n;
    }
    if let Some(k) = args.exploitability_every {
        cfg.solver.exploitability_every = k;
    }
    cfg.output.plots |= args.plots;

    if args.sweep_beta.is_empty() {
        let manifest = run_logged(&cfg, "")?;
        report(&cfg, &manifest);
        return Ok(());
    }
    let configs: Vec<RunConfig> = args
        .sweep_beta
        .iter()
        .map(|&b| {
            let mut c = cfg.clone();
            c.solver.beta = b;
            c.output.directory = cfg.output.directory.join(format!("beta-{b}"));
            c
        })
        .collect();
    let results: Vec<Result<RunManifest, RunError>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| s.spawn(move || run_logged(c, &format!("[beta={}] ", c.solver.beta))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut first_err = None;
    for (c, r) in configs.iter().zip(results) {
        match r {
            Ok(m) => report(c, &m),
            Err(e) => {
                eprintln!("beta={}: {e}", c.solver.beta);
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn run_logged(cfg: &RunConfig, prefix: &str) -> Result<RunManifest, RunError> {
    let (manifest, _) = run_with(cfg, |d| {
        if d.iteration % 100 == 0 {
            eprintln!("{prefix}iter {:>6}  residual {:.3e}  weighted_an {:.3e}", d.iteration, d.residual, d.weighted_an);
        }
    })?;
    for w in &manifest.warnings {
        eprintln!("{prefix}warning: {w}");
    }
    Ok(manifest)
}

fn report(cfg: &RunConfig, m: &RunManifest) {
    println!(
        "{}: {} after {} iterations (residual {}) in {:.2}s -> {}",
        cfg.name,
        m.status,
        m.iterations,
        m.final_residual.map_or("n/a".to_string(), |r| format!("{r:.3e}")),
        m.wall_clock_seconds,
        cfg.output.directory.display()
    );
}
