use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pktline::bench::{run_bench, BenchConfig};
use pktline::grid::{validate_schedule, Schedule};
use pktline::model::{gen_random_instance, load_instance, save_instance, DistanceDist, GenParams};
use pktline::solve::{solve, CategoryMode, SolveParams, DEFAULT_EPS_GK};

#[derive(Parser)]
#[command(name = "pktline", version, about = "Packet scheduling on a directed line")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long = "buffer", short = 'B', default_value_t = 1)]
        buffer: u32,
        #[arg(long = "link", short = 'c', default_value_t = 1)]
        link: u32,
        /// Number of requests.
        #[arg(long = "requests", short = 'M')]
        requests: usize,
        #[arg(long, default_value_t = 1.0)]
        arrival_rate: f64,
        /// `uniform`, `geometric:P` or `fixed:D`.
        #[arg(long, default_value = "uniform", value_parser = parse_distance)]
        distance: DistanceDist,
        /// Give every request a deadline `t + d + U{0..=slack}`.
        #[arg(long)]
        deadline_slack: Option<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Solve an instance and write its schedule.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EPS_GK)]
        eps_gk: f64,
        /// auto, short, medium, long or all.
        #[arg(long, default_value = "auto")]
        category: CategoryMode,
        #[arg(long, short)]
        out: PathBuf,
        /// Where to write the JSON trace report.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a schedule against an instance; exits 1 on any violation.
    Verify { instance: PathBuf, schedule: PathBuf },
    /// Run a benchmark config and write a CSV report.
    Bench {
        config: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Where to write the JSON summary with confidence intervals.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn parse_distance(s: &str) -> Result<DistanceDist, String> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "uniform" if arg.is_empty() => Ok(DistanceDist::Uniform),
        "geometric" => arg
            .parse()
            .map(|p| DistanceDist::Geometric { p })
            .map_err(|e| format!("geometric:P needs a probability: {e}")),
        "fixed" => arg
            .parse()
            .map(|d| DistanceDist::Fixed { d })
            .map_err(|e| format!("fixed:D needs an integer: {e}")),
        _ => Err(format!("unknown distance {s:?}; use uniform, geometric:P or fixed:D")),
    }
}

fn read(path: &PathBuf) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Generate {
            n,
            buffer,
            link,
            requests,
            arrival_rate,
            distance,
            deadline_slack,
            seed,
            out,
        } => {
            let params = GenParams {
                n,
                buffer,
                link,
                requests,
                arrival_rate,
                distance,
                deadline_slack,
            };
            let inst = gen_random_instance(&params, seed)?;
            write(&out, &save_instance(&inst))?;
            println!("wrote {} requests to {}", inst.len(), out.display());
        }
        Cmd::Solve {
            instance,
            seed,
            eps_gk,
            category,
            out,
            trace,
        } => {
            if !(eps_gk > 0.0 && eps_gk < 1.0) {
                bail!("--eps-gk must lie in (0, 1), got {eps_gk}");
            }
            let inst = load_instance(&read(&instance)?)?;
            let sol = solve(&inst, &SolveParams { mode: category, eps_gk, seed })?;
            let verdict = validate_schedule(&inst, &sol.schedule);
            if !verdict.is_ok() {
                bail!("internal error: schedule failed validation: {}", verdict.violations[0]);
            }
            write(&out, sol.schedule.to_json().as_bytes())?;
            if let Some(path) = trace {
                let mut json = serde_json::to_string_pretty(&sol.report)?;
                json.push('\n');
                write(&path, json.as_bytes())?;
            }
            println!("throughput {}", sol.report.throughput);
            println!("frac_bound {}", sol.report.frac_bound);
        }
        Cmd::Verify { instance, schedule } => {
            let inst = load_instance(&read(&instance)?)?;
            let sched = Schedule::from_json(&read(&schedule)?, inst.len())?;
            let verdict = validate_schedule(&inst, &sched);
            for v in &verdict.violations {
                println!("{v}");
            }
            if !verdict.is_ok() {
                return Ok(ExitCode::from(1));
            }
            println!("ok: {} delivered", sched.throughput());
        }
        Cmd::Bench { config, out, summary } => {
            let cfg = BenchConfig::from_json(&read(&config)?)?;
            let report = run_bench(&cfg)?;
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            write(&out, &csv)?;
            if let Some(path) = summary {
                let mut json = serde_json::to_string_pretty(&report.summary)?;
                json.push('\n');
                write(&path, json.as_bytes())?;
            }
            let r = report.summary.ratio;
            println!("{} runs, mean ratio {:.4} [{:.4}, {:.4}]", report.summary.runs, r.mean, r.lo, r.hi);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
