use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gelsim::{benchmark_suite, simulate, write_trial, WriteOptions};
use slip_harness::benchmark::{detect_stream, run_benchmark, run_directory, Classification};
use slip_harness::control::{run_control_loop, Scenario};
use slip_harness::gates::{all_passed, benchmark_gates, control_gates, latency_gates, Gate};
use slip_harness::latency::bench_latency;
use slip_harness::report::{self, write_benchmark, write_decisions, write_json, LATENCY_JSON};
use slip_harness::{FramePath, HarnessConfig, IngestRegistry};

#[derive(Parser)]
#[command(name = "slipctl", version, about = "Incipient slip detector: simulation, benchmarks and grip control")]
struct Cli {
    /// TOML config; defaults are used for anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export benchmark trials as trial directories.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// Suite seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Only trials of this object.
        #[arg(long)]
        object: Option<String>,
        /// Only this trial index within each object.
        #[arg(long)]
        trial: Option<usize>,
        /// Skip the rendered frames.
        #[arg(long)]
        no_pgm: bool,
    },
    /// Run the detector over one trial directory and log its decisions.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Ingest format; detected from the directory contents if omitted.
        #[arg(long)]
        format: Option<String>,
        /// JSON-lines output; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detection accuracy over the synthetic suite or a directory of trials.
    Bench {
        /// Directory of exported trials instead of the in-memory suite.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Ingest format for --input.
        #[arg(long)]
        format: Option<String>,
        /// Frame path for the in-memory suite; overrides the config.
        #[arg(long, value_enum)]
        path: Option<FramePath>,
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
        /// Also measure detector step latency.
        #[arg(long)]
        latency: bool,
        /// Exit nonzero if an acceptance gate fails.
        #[arg(long)]
        check: bool,
    },
    /// Closed-loop grip force simulation.
    ControlSim {
        #[arg(long, value_enum)]
        scenario: Scenario,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Runs with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        repeats: u64,
        /// JSON trace output (an array, one entry per run).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        check: bool,
    },
    /// Summarize a benchmark output directory.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

fn print_gates(gates: &[Gate]) {
    for g in gates {
        println!("{} {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    match cli.command {
        Command::Simulate {
            out,
            seed,
            object,
            trial,
            no_pgm,
        } => {
            let seed = seed.unwrap_or(cfg.suite.seed);
            let mut written = 0;
            for t in benchmark_suite(seed) {
                if object.as_ref().is_some_and(|o| *o != t.object.name) || trial.is_some_and(|i| i != t.trial_id) {
                    continue;
                }
                let frames = simulate(&cfg.model, &t.object, &t.script, t.sim_seed)?;
                let opts = WriteOptions {
                    pgm: !no_pgm,
                    csv: true,
                    texture_seed: t.texture_seed,
                };
                let dir = out.join(t.name());
                write_trial(&dir, &cfg.model, &t.object, &t.script, &frames, t.sim_seed, Some(t.label), &opts)
                    .with_context(|| format!("writing {}", dir.display()))?;
                written += 1;
            }
            if written == 0 {
                bail!("no trial matches the filters");
            }
            eprintln!("wrote {written} trials to {}", out.display());
            Ok(true)
        }
        Command::Detect { input, format, out } => {
            let stream = IngestRegistry::default().open(&input, format.as_deref(), &cfg)?;
            let records: Vec<_> = detect_stream(stream, &cfg)?.iter().map(|d| d.record()).collect();
            match out {
                Some(p) => write_decisions(std::fs::File::create(&p)?, &records)?,
                None => write_decisions(std::io::stdout().lock(), &records)?,
            }
            Ok(true)
        }
        Command::Bench {
            input,
            format,
            path,
            out,
            latency,
            check,
        } => {
            if let Some(p) = path {
                cfg.benchmark.path = p;
            }
            let (outcomes, table) = match &input {
                Some(dir) => run_directory(dir, format.as_deref(), &cfg)?,
                None => run_benchmark(&benchmark_suite(cfg.suite.seed), &cfg, cfg.benchmark.path),
            };
            write_benchmark(&out, &table, &outcomes)?;
            print!("{}", table.to_csv());
            let mut gates = benchmark_gates(&table);
            if latency {
                let run = bench_latency(&cfg, cfg.suite.seed)?;
                write_json(&out.join(LATENCY_JSON), &run.report)?;
                println!(
                    "step latency: {} markers median {:.3} ms p95 {:.3} ms; {} markers median {:.3} ms; budget {} ms",
                    run.report.full.markers,
                    run.report.full.median_ms,
                    run.report.full.p95_ms,
                    run.report.small.markers,
                    run.report.small.median_ms,
                    run.report.budget_ms
                );
                gates.extend(latency_gates(&run.report));
            }
            if check {
                print_gates(&gates);
                return Ok(all_passed(&gates));
            }
            Ok(true)
        }
        Command::ControlSim {
            scenario,
            seed,
            repeats,
            out,
            check,
        } => {
            let mut traces = Vec::new();
            let mut gates = Vec::new();
            for s in seed..seed + repeats.max(1) {
                let trace = run_control_loop(scenario, &cfg, s)?;
                println!(
                    "seed {s}: {} frames, forces {:?}, final {} N, {:?}",
                    trace.frames.len(),
                    trace.force_steps(),
                    trace.final_force,
                    trace.termination
                );
                gates.extend(control_gates(&trace, &cfg.control));
                traces.push(trace);
            }
            write_json(&out, &traces)?;
            if check {
                print_gates(&gates);
                return Ok(all_passed(&gates));
            }
            Ok(true)
        }
        Command::Report { input } => {
            let table = report::read_metrics(&input)?;
            let outcomes = report::read_outcomes(&input)?;
            let mut stdout = std::io::stdout().lock();
            write!(stdout, "{}", table.to_csv())?;
            let latencies: Vec<i64> = outcomes
                .iter()
                .filter(|o| o.classification == Classification::Success)
                .filter_map(|o| o.detection_latency)
                .collect();
            if !latencies.is_empty() {
                let mean = latencies.iter().sum::<i64>() as f64 / latencies.len() as f64;
                writeln!(stdout, "mean detection latency: {mean:.2} frames over {} trials", latencies.len())?;
            }
            for o in outcomes.iter().filter(|o| o.diagnostic.is_some()) {
                writeln!(stdout, "{} #{}: {}", o.object, o.trial_id, o.diagnostic.as_deref().unwrap_or(""))?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
