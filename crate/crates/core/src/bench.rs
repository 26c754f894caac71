//! Benchmark harness: generate instances, solve them, compare against the fractional bound.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::validate_schedule;
use crate::model::{gen_random_instance, GenParams};
use crate::solve::{solve, CategoryMode, SolveParams, DEFAULT_EPS_GK};

pub const CSV_HEADER: [&str; 13] = [
    "seed", "n", "B", "c", "M", "category", "R_rnd", "R_fltr", "R_quad", "R_final", "alg", "frac_bound", "ratio",
];

fn default_eps() -> f64 {
    DEFAULT_EPS_GK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Generator settings; each is run once per seed.
    pub instances: Vec<GenParams>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub mode: CategoryMode,
    #[serde(default = "default_eps")]
    pub eps_gk: f64,
    /// Worker threads; 0 means one per available core.
    #[serde(default)]
    pub threads: usize,
}

impl BenchConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let cfg: Self = serde_json::from_slice(bytes).map_err(|e| Error::Validation(format!("bench config: {e}")))?;
        if cfg.instances.is_empty() || cfg.seeds.is_empty() {
            return Err(Error::Validation("bench config needs at least one instance and one seed".into()));
        }
        if !(cfg.eps_gk > 0.0 && cfg.eps_gk < 1.0) {
            return Err(Error::Validation(format!("eps_gk must lie in (0, 1), got {}", cfg.eps_gk)));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "B")]
    pub buffer: u32,
    pub c: u32,
    #[serde(rename = "M")]
    pub m: usize,
    /// Category of the returned solution (`oracle` for exact small instances).
    pub category: String,
    /// Stage counts of the returned solution; empty unless it came from the pipeline.
    pub r_rnd: Option<usize>,
    pub r_fltr: Option<usize>,
    pub r_quad: Option<usize>,
    pub r_final: Option<usize>,
    pub alg: usize,
    pub frac_bound: f64,
    pub ratio: f64,
}

/// Mean with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl MeanCi {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self { mean: f64::NAN, lo: f64::NAN, hi: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let half = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            1.96 * (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, lo: mean - half, hi: mean + half }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub runs: usize,
    pub alg: MeanCi,
    pub frac_bound: MeanCi,
    pub ratio: MeanCi,
    pub min_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
}

fn opt(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl BenchReport {
    /// Data rows followed by one `mean` row.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.seed.to_string(),
                r.n.to_string(),
                r.buffer.to_string(),
                r.c.to_string(),
                r.m.to_string(),
                r.category.clone(),
                opt(r.r_rnd),
                opt(r.r_fltr),
                opt(r.r_quad),
                opt(r.r_final),
                r.alg.to_string(),
                format!("{}", r.frac_bound),
                format!("{:.6}", r.ratio),
            ])?;
        }
        let mean = |f: &dyn Fn(&BenchRow) -> f64| {
            let n = self.rows.len().max(1) as f64;
            format!("{:.3}", self.rows.iter().map(f).sum::<f64>() / n)
        };
        let mean_opt = |f: &dyn Fn(&BenchRow) -> Option<usize>| {
            let xs: Vec<f64> = self.rows.iter().filter_map(f).map(|v| v as f64).collect();
            if xs.is_empty() {
                String::new()
            } else {
                format!("{:.3}", xs.iter().sum::<f64>() / xs.len() as f64)
            }
        };
        w.write_record([
            "mean".to_string(),
            mean(&|r| r.n as f64),
            mean(&|r| r.buffer as f64),
            mean(&|r| r.c as f64),
            mean(&|r| r.m as f64),
            "*".to_string(),
            mean_opt(&|r| r.r_rnd),
            mean_opt(&|r| r.r_fltr),
            mean_opt(&|r| r.r_quad),
            mean_opt(&|r| r.r_final),
            mean(&|r| r.alg as f64),
            mean(&|r| r.frac_bound),
            format!("{:.6}", self.summary.ratio.mean),
        ])?;
        w.flush()?;
        Ok(())
    }
}

/// Generates, solves and validates one instance. A schedule failing validation is an error.
pub fn bench_one(gen: &GenParams, seed: u64, mode: CategoryMode, eps_gk: f64) -> Result<BenchRow> {
    let inst = gen_random_instance(gen, seed)?;
    let sol = solve(&inst, &SolveParams { mode, eps_gk, seed })?;
    let verdict = validate_schedule(&inst, &sol.schedule);
    if !verdict.is_ok() {
        return Err(Error::Validation(format!(
            "seed {seed}: schedule has {} violations",
            verdict.violations.len()
        )));
    }
    let rep = &sol.report;
    let category = match rep.chosen {
        Some(c) => c.name().to_string(),
        None if rep.method == "oracle" => "oracle".to_string(),
        None => "none".to_string(),
    };
    let trace = rep.chosen.and_then(|c| rep.run(c)).and_then(|r| r.pipeline.as_ref());
    Ok(BenchRow {
        seed,
        n: inst.n,
        buffer: inst.buffer,
        c: inst.link,
        m: inst.len(),
        category,
        r_rnd: trace.map(|t| t.r_rnd.len()),
        r_fltr: trace.map(|t| t.r_fltr.len()),
        r_quad: trace.map(|t| t.r_quad.len()),
        r_final: trace.map(|t| t.r_final.len()),
        alg: rep.throughput,
        frac_bound: rep.frac_bound,
        ratio: rep.ratio(),
    })
}

/// Runs every (instance, seed) pair; rows come out in config order whatever the thread count.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let jobs: Vec<(&GenParams, u64)> = cfg
        .instances
        .iter()
        .flat_map(|g| cfg.seeds.iter().map(move |&s| (g, s)))
        .collect();
    let threads = match cfg.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(jobs.len())
    .max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<BenchRow>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(gen, seed)) = jobs.get(i) else { break };
                let row = bench_one(gen, seed, cfg.mode, cfg.eps_gk);
                results.lock().expect("no panics while holding the lock")[i] = Some(row);
            });
        }
    });
    let rows = results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let summary = BenchSummary {
        runs: rows.len(),
        alg: MeanCi::of(&rows.iter().map(|r| r.alg as f64).collect::<Vec<_>>()),
        frac_bound: MeanCi::of(&rows.iter().map(|r| r.frac_bound).collect::<Vec<_>>()),
        ratio: MeanCi::of(&ratios),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
    };
    Ok(BenchReport { rows, summary })
}
