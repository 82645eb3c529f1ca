use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use heomflux_cli::audit::{audit_trajectory, AuditInput};
use heomflux_cli::config::RunConfig;
use heomflux_cli::converge::converge;
use heomflux_cli::output::{self, Written};
use heomflux_cli::runner::execute;
use heomflux_cli::sweep::sweep;
use heomflux_cli::{Outcome, RunError, RunKind, THREADS_ENV};

#[derive(Parser)]
#[command(
    name = "heomflux",
    version,
    about = "Heat currents of open quantum systems from hierarchical equations of motion"
)]
struct Cli {
    /// Worker threads for the hierarchy kernel or for sweep points.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run at the configured depth and Padé counts.
    Run(RunArgs),
    /// One run per value of the [sweep] grid.
    Sweep(RunArgs),
    /// Deepen the hierarchy until the target observables settle.
    Converge(RunArgs),
    /// Re-check the first and second laws on a written trajectory.
    Audit(AuditArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in model: spin-boson or three-level-engine.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, conflicts_with_all = ["periodic", "transient"])]
    steady: bool,
    #[arg(long, conflicts_with = "transient")]
    periodic: bool,
    #[arg(long)]
    transient: bool,
    /// Override one key, e.g. `--set model.eta1=0.1` or `--set hierarchy.depth=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output prefix; overrides output.prefix.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct AuditArgs {
    /// Trajectory CSV written by run, sweep or converge.
    trajectory: PathBuf,
    /// Manifest of the run; defaults to the one next to the trajectory.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    tol_first_law: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_second_law: f64,
}

fn load(args: &RunArgs) -> Result<RunConfig, RunError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(p)) => RunConfig::for_preset(p)?,
        (None, None) => return Err(RunError::Config("give --config or --preset".into())),
    };
    for s in &args.set {
        cfg = cfg.with_override(s)?;
    }
    if args.steady {
        cfg.run.kind = RunKind::Steady;
    } else if args.periodic {
        cfg.run.kind = RunKind::Periodic;
    } else if args.transient {
        cfg.run.kind = RunKind::Transient;
    }
    if let Some(out) = &args.out {
        cfg.output.prefix = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(out: &Outcome) {
    let r = &out.resolution;
    eprintln!(
        "depth {} pade {:?} ados {} dt {} ({} iterations)",
        r.depth, r.pade_terms, r.ados, r.dt_used, out.diagnostics.iterations
    );
    if let Some(c) = &out.currents {
        eprintln!("Qdot_S {:?}  Qdot_B {:?}  W_dot {}", c.q_s, c.q_b, c.power);
    }
    if let Some(c) = &out.cycle {
        eprintln!(
            "per cycle: W {}  Q_S {:?}  Q_B {:?}  eps_S {:?}  eps_B {:?}",
            c.integrals.work,
            c.integrals.q_s,
            c.integrals.q_b,
            c.efficiencies.system,
            c.efficiencies.bath
        );
    }
    let audit = out.audit.describe();
    if !audit.is_empty() {
        eprintln!("{audit}");
    }
}

fn written(w: &Written) {
    for p in w.trajectories.iter().chain([&w.summary, &w.manifest]) {
        println!("{}", p.display());
    }
}

fn audit_gate(out: &Outcome) -> Result<(), RunError> {
    if out.audit.passed() {
        Ok(())
    } else {
        Err(RunError::Audit(out.audit.describe()))
    }
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let threads = cli.threads.max(1);
    match &cli.command {
        Command::Run(args) => {
            let cfg = load(args)?;
            let out = execute(&cfg, threads)?;
            report(&out);
            written(&output::write_run(&cfg, threads, None, &out)?);
            audit_gate(&out)
        }
        Command::Converge(args) => {
            let mut cfg = load(args)?;
            cfg.convergence.enabled = true;
            let (ladder, out) = converge(&cfg, threads);
            for r in &ladder.rungs {
                eprintln!(
                    "depth {} pade {:?} ados {} delta {:?}",
                    r.depth, r.pade_terms, r.ados, r.delta
                );
            }
            let out = out?;
            report(&out);
            written(&output::write_run(&cfg, threads, Some(&ladder), &out)?);
            audit_gate(&out)
        }
        Command::Sweep(args) => {
            let cfg = load(args)?;
            let sw = sweep(&cfg, threads)?;
            written(&output::write_sweep(&cfg, threads, &sw)?);
            let mut first_err = None;
            let mut audit_failures = Vec::new();
            for p in &sw.points {
                match &p.outcome {
                    Ok(o) if !o.audit.passed() => audit_failures.push(format!(
                        "{} = {}: {}",
                        sw.parameter,
                        p.value,
                        o.audit.describe()
                    )),
                    Ok(_) => {}
                    Err(e) => {
                        eprintln!("{} = {}: {e}", sw.parameter, p.value);
                        first_err.get_or_insert_with(|| {
                            e.context(format!("{} = {}", sw.parameter, p.value))
                        });
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }
            if audit_failures.is_empty() {
                Ok(())
            } else {
                Err(RunError::Audit(audit_failures.join("\n")))
            }
        }
        Command::Audit(a) => {
            let manifest = match &a.manifest {
                Some(m) => m.clone(),
                None => output::manifest_for_trajectory(&a.trajectory).ok_or_else(|| {
                    RunError::Config("cannot infer the manifest path; pass --manifest".into())
                })?,
            };
            let input = AuditInput::from_manifest(&manifest)?;
            let rep = audit_trajectory(&a.trajectory, &input, a.tol_first_law, a.tol_second_law)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&rep).map_err(|e| RunError::Io(e.to_string()))?
            );
            if rep.passed() {
                Ok(())
            } else {
                Err(RunError::Audit(format!(
                    "{} failed its audit",
                    a.trajectory.display()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
