use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use floq_cli::commands::{cmd_constants, cmd_model_dump, cmd_oracle, cmd_run, cmd_sweep};
use floq_cli::config::{fmt_g17, RunConfig};
use floq_cli::output::{print_constants, write_json, write_sweep_csv};
use floq_core::{Error, RunStatus};

#[derive(Parser)]
#[command(
    name = "floq",
    about = "Iterative block-diagonalization of driven Floquet Hamiltonians: \
             single-frequency runs, frequency sweeps with resonance exclusion, \
             theorem-constant reports and dense-diagonalization cross-checks."
)]
struct Cli {
    /// Path to a JSON configuration; omit for the built-in square-well desk
    /// preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Dotted-path overrides, e.g. --set grid_points=401
    #[arg(long = "set", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report the admissibility constants and smallness verdicts.
    Constants {
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// One fixed-frequency run; writes a JSON report.
    Run {
        #[arg(long)]
        omega: Option<f64>,
        /// Verify the stage identity on the dense window (slower).
        #[arg(long)]
        check_identity: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Staged resonance exclusion over the frequency grid.
    Sweep {
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Dense-diagonalization comparison at one frequency.
    Oracle {
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the perturbation blocks and model numbers as JSON.
    ModelDump {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("read {path:?}: {e}")))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    base.with_overrides(&cli.overrides)
}

fn out_dir(cfg: &RunConfig, explicit: Option<&PathBuf>) -> PathBuf {
    explicit
        .cloned()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    match &cli.cmd {
        Cmd::Constants { json } => {
            let rep = cmd_constants(&cfg)?;
            print_constants(&rep);
            if let Some(path) = json {
                write_json(&rep, path)?;
            }
        }
        Cmd::Run {
            omega,
            check_identity,
            out,
        } => {
            let rep = cmd_run(&cfg, *omega, *check_identity)?;
            match &rep.status {
                RunStatus::Completed { stages } => {
                    println!("completed {stages} stages at omega = {}", fmt_g17(rep.omega));
                }
                RunStatus::Underflow { stage } => {
                    println!(
                        "stage budget underflowed at stage {stage}, omega = {}",
                        fmt_g17(rep.omega)
                    );
                }
                RunStatus::ResonantAbort { stage, witness } => {
                    println!(
                        "resonant({stage}, (k={}, n={}, m={})) at omega = {}: dist {} < psi {}",
                        witness.k,
                        witness.n,
                        witness.m,
                        fmt_g17(rep.omega),
                        fmt_g17(witness.dist),
                        fmt_g17(witness.psi)
                    );
                }
            }
            for rec in &rep.stages {
                println!(
                    "  s={} w_s={} v_s={} contraction_ok={}{}",
                    rec.s,
                    fmt_g17(rec.w_s),
                    fmt_g17(rec.v_s),
                    rec.contraction_ok,
                    rec.identity_residual
                        .map(|r| format!(" identity_residual={}", fmt_g17(r)))
                        .unwrap_or_default()
                );
            }
            let dir = out_dir(&cfg, out.as_ref());
            std::fs::create_dir_all(&dir)
                .map_err(|e| Error::Usage(format!("create {dir:?}: {e}")))?;
            let path = dir.join("run_report.json");
            write_json(&rep, &path)?;
            println!("report: {}", path.display());
        }
        Cmd::Sweep { out_dir: od } => {
            let result = cmd_sweep(&cfg)?;
            let dir = out_dir(&cfg, od.as_ref());
            std::fs::create_dir_all(&dir)
                .map_err(|e| Error::Usage(format!("create {dir:?}: {e}")))?;
            write_sweep_csv(&result, &dir.join("sweep_points.csv"))?;
            write_json(&result.summary, &dir.join("sweep_summary.json"))?;
            let s = &result.summary;
            println!(
                "sweep: {}/{} frequencies complete, good measure {} of |Omega_0| = {}",
                s.completed,
                s.total,
                fmt_g17(s.good_measure_estimate),
                fmt_g17(s.omega0_measure)
            );
            println!(
                "bad measure {} <= delta_star eps_V + cells = {}: {}",
                fmt_g17(s.bad_measure_estimate),
                fmt_g17(s.bad_measure_bound_total),
                s.bad_within_bound
            );
            println!(
                "contraction ok everywhere: {}; outputs in {}",
                s.contraction_ok_everywhere,
                dir.display()
            );
        }
        Cmd::Oracle { omega, out } => {
            let rep = cmd_oracle(&cfg, *omega)?;
            println!(
                "oracle basis {} (|k| <= {}), interior |k| <= {}",
                rep.basis_size, rep.k_oracle, rep.interior_k
            );
            println!(
                "max eig error {}, median {}, unitarity {}, min overlap {}",
                fmt_g17(rep.run.max_eig_error.unwrap_or(f64::NAN)),
                fmt_g17(rep.median_eig_error),
                fmt_g17(rep.unitarity),
                fmt_g17(rep.min_overlap)
            );
            let dir = out_dir(&cfg, out.as_ref());
            std::fs::create_dir_all(&dir)
                .map_err(|e| Error::Usage(format!("create {dir:?}: {e}")))?;
            let path = dir.join("oracle_report.json");
            write_json(&rep, &path)?;
            println!("report: {}", path.display());
        }
        Cmd::ModelDump { out } => {
            let dump = cmd_model_dump(&cfg)?;
            match out {
                Some(path) => {
                    write_json(&dump, path)?;
                    println!("model dump: {}", path.display());
                }
                None => println!(
                    "{}",
                    serde_json::to_string_pretty(&dump)
                        .map_err(|e| Error::Usage(format!("serialize: {e}")))?
                ),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) | Error::Usage(_) | Error::Divergence(_) => 2,
                Error::Tolerance(_) => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
