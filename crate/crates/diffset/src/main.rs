use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use diffset::battery::{BatteryConfig, ContractionCaps};
use diffset::cli::{
    emit_contract_markdown, run_check, run_contract, run_hadamard, run_ppc, run_survey,
    OutputFormat, SurveyConfig,
};
use diffset::hadamard::HadamardConfig;
use diffset::planar::PpcConfig;
use std::path::PathBuf;
use std::process::ExitCode;

/// Nonexistence tests and searches for cyclic difference sets.
#[derive(Parser)]
#[command(name = "diffset", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (defaults to DIFFSET_JOBS or all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Base output path; writes <out>.jsonl and/or <out>.md.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_parser = parse_format, default_value = "both")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Survey every admissible (v, k, lambda) with k in a range.
    Survey {
        #[arg(long)]
        kmin: u64,
        #[arg(long)]
        kmax: u64,
        /// Run every test (no short-circuit on the first exclusion).
        #[arg(long)]
        full: bool,
        /// Report only rows with gcd(v, n) > 1.
        #[arg(long)]
        ryser_only: bool,
        /// Largest contraction modulus attempted.
        #[arg(long, default_value_t = 1000)]
        wmax: u64,
        /// Resume from an existing journal instead of restarting.
        #[arg(long)]
        resume: bool,
        /// Lift the work caps for rows that need very long enumerations.
        #[arg(long)]
        long_running: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Scan cyclic Hadamard parameters (4n-1, 2n-1, n-1) up to v max.
    Hadamard {
        #[arg(long)]
        vmax: u64,
        #[arg(long, default_value_t = 1000)]
        wmax: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Prime Power Conjecture scan over non-prime-power orders.
    Ppc {
        #[arg(long)]
        nmin: u64,
        #[arg(long)]
        nmax: u64,
        /// Largest Evans-Mann difference bound tried.
        #[arg(long)]
        max_bound: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the full battery on one parameter triple and explain it.
    Check {
        #[arg(long)]
        v: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        lambda: u64,
        #[arg(long, default_value_t = 1000)]
        wmax: u64,
    },
    /// Solve the contracted equations for (v, k, lambda) at (w, t).
    Contract {
        #[arg(long)]
        v: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        lambda: u64,
        #[arg(long)]
        w: u64,
        #[arg(long)]
        t: u64,
        /// Only count solutions of the linear and square equations.
        #[arg(long)]
        count_only: bool,
        /// Lift the work caps (required for the very large rows).
        #[arg(long)]
        long_running: bool,
    },
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "md" | "markdown" => Ok(OutputFormat::Markdown),
        "jsonl" => Ok(OutputFormat::Jsonl),
        "both" => Ok(OutputFormat::Both),
        other => Err(format!("unknown format {other:?} (md, jsonl, both)")),
    }
}

fn worker_count(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("DIFFSET_JOBS")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn contraction_caps(wmax: u64, long_running: bool) -> ContractionCaps {
    let mut caps = ContractionCaps {
        w_max: wmax,
        ..ContractionCaps::default()
    };
    if long_running {
        caps.node_budget = u64::MAX;
        caps.filter_ops_budget = u64::MAX;
    }
    caps
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cli.jobs))
        .build()
        .expect("thread pool");
    match pool.install(|| run(cli.command)) {
        Ok(clean) => {
            if clean {
                ExitCode::SUCCESS
            } else {
                // Completed, but known-existing parameters were excluded.
                ExitCode::from(2)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Survey {
            kmin,
            kmax,
            full,
            ryser_only,
            wmax,
            resume,
            long_running,
            output,
        } => {
            if kmin < 2 || kmin > kmax {
                bail!("need 2 <= kmin <= kmax");
            }
            let config = SurveyConfig {
                k_min: kmin,
                k_max: kmax,
                battery: BatteryConfig {
                    short_circuit: !full,
                    contraction: Some(contraction_caps(wmax, long_running)),
                    ..BatteryConfig::default()
                },
                ryser_only,
                out: output.out,
                format: output.format,
                resume,
            };
            let outcome = run_survey(&config).context("survey failed")?;
            let excluded = outcome.records.iter().filter(|r| r.is_excluded()).count();
            let open = outcome
                .records
                .iter()
                .filter(|r| r.status == "open")
                .count();
            println!(
                "{} parameter sets: {excluded} excluded, {open} open, {} known",
                outcome.records.len(),
                outcome.records.len() - excluded - open
            );
            for ps in &outcome.soundness_violations {
                eprintln!("soundness violation: {ps} is realizable but was excluded");
            }
            Ok(outcome.soundness_violations.is_empty())
        }
        Command::Hadamard { vmax, wmax, output } => {
            let config = HadamardConfig {
                battery: BatteryConfig {
                    contraction: Some(contraction_caps(wmax, false)),
                    ..BatteryConfig::default()
                },
            };
            let report =
                run_hadamard(vmax, &config, output.out.as_deref(), output.format)
                    .context("hadamard scan failed")?;
            let survivors = report.survivors();
            println!(
                "{} candidates, {} survivors: {:?}",
                report.rows.len(),
                survivors.len(),
                survivors
            );
            Ok(true)
        }
        Command::Ppc {
            nmin,
            nmax,
            max_bound,
            output,
        } => {
            if nmin < 2 || nmin > nmax {
                bail!("need 2 <= nmin <= nmax");
            }
            let mut config = PpcConfig::default();
            if let Some(bound) = max_bound {
                config.evans_mann.max_bound = bound;
            }
            let report = run_ppc(nmin, nmax, &config, output.out.as_deref(), output.format)
                .context("ppc scan failed")?;
            let survivors = report.survivors();
            println!(
                "{} non-prime-power orders, {} survivors: {:?}",
                report.rows.len(),
                survivors.len(),
                survivors
            );
            Ok(true)
        }
        Command::Check { v, k, lambda, wmax } => {
            let battery = BatteryConfig {
                contraction: Some(contraction_caps(wmax, false)),
                ..BatteryConfig::default()
            };
            let (cert, text) = run_check(v, k, lambda, &battery)
                .with_context(|| format!("check of ({v},{k},{lambda}) failed"))?;
            print!("{text}");
            let clean = !matches!(
                (diffset::constructions::known_family(cert.params), &cert.status),
                (Some(_), diffset::battery::Status::Excluded { .. })
            );
            Ok(clean)
        }
        Command::Contract {
            v,
            k,
            lambda,
            w,
            t,
            count_only,
            long_running,
        } => {
            let caps = contraction_caps(u64::MAX, long_running);
            let outcome = run_contract(
                v,
                k,
                lambda,
                w,
                t,
                count_only,
                caps.node_budget,
                caps.filter_ops_budget,
            )
            .context("contract failed")?;
            if !outcome.completed {
                bail!(
                    "work caps exhausted after {} solutions; rerun with --long-running",
                    outcome.count45
                );
            }
            print!("{}", emit_contract_markdown(&[outcome.clone()]));
            if let Some(survivors) = outcome.survivors {
                println!(
                    "{} solutions to the linear and square equations, {} after autocorrelation{}",
                    outcome.count45,
                    survivors,
                    if outcome.excluded == Some(true) {
                        "; EXCLUDED"
                    } else {
                        ""
                    }
                );
            } else {
                println!(
                    "{} solutions to the linear and square equations (count only)",
                    outcome.count45
                );
            }
            Ok(true)
        }
    }
}
