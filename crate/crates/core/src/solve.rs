//! Top-level solver: split requests by distance, solve every category with its algorithm,
//! keep the best solution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::IntegralPacking;
use crate::grid::{to_grid_request, Schedule};
use crate::model::{categorize, Category, Instance, PacketRequest, Thresholds};
use crate::oracle;
use crate::pipeline::{run_medium_long, PipelineParams, StageTrace};
use crate::shortsolver::{solve_short, ShortReport};

pub const DEFAULT_EPS_GK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryMode {
    /// Categories active under the thresholds; very-short only when `min(B, c) > 1`.
    #[default]
    Auto,
    Short,
    Medium,
    Long,
    /// Every category including very-short, whatever the capacities.
    All,
}

impl std::str::FromStr for CategoryMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "short" => Ok(Self::Short),
            "medium" => Ok(Self::Medium),
            "long" => Ok(Self::Long),
            "all" => Ok(Self::All),
            _ => Err(crate::Error::Validation(format!("unknown category mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub mode: CategoryMode,
    pub eps_gk: f64,
    pub seed: u64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            mode: CategoryMode::Auto,
            eps_gk: DEFAULT_EPS_GK,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRun {
    pub category: Category,
    pub requests: usize,
    pub throughput: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short: Option<ShortReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<StageTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    #[serde(rename = "B")]
    pub buffer: u32,
    pub c: u32,
    #[serde(rename = "M")]
    pub requests: usize,
    pub mode: CategoryMode,
    pub seed: u64,
    pub eps_gk: f64,
    /// `"oracle"` or `"categories"`.
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_vs: Option<f64>,
    pub unservable: usize,
    pub runs: Vec<CategoryRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen: Option<Category>,
    pub throughput: usize,
    pub frac_bound: f64,
}

impl SolveReport {
    pub fn run(&self, cat: Category) -> Option<&CategoryRun> {
        self.runs.iter().find(|r| r.category == cat)
    }

    pub fn ratio(&self) -> f64 {
        if self.frac_bound > 0.0 {
            self.throughput as f64 / self.frac_bound
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub packing: IntegralPacking,
    pub schedule: Schedule,
    pub report: SolveReport,
}

/// Upper bound on the fractional optimum: every request leaves its origin through the
/// store or the forward edge, so an origin takes at most `B + c` of its requests.
pub fn frac_bound(inst: &Instance) -> f64 {
    let mut per_origin: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for r in inst.requests.iter().filter(|r| r.is_servable()) {
        *per_origin.entry((r.a, r.t)).or_default() += 1;
    }
    let cut = u64::from(inst.buffer) + u64::from(inst.link);
    per_origin.values().map(|&m| m.min(cut) as f64).sum()
}

fn run_category(
    cat: Category,
    reqs: &[PacketRequest],
    inst: &Instance,
    th: &Thresholds,
    params: &SolveParams,
) -> Result<(IntegralPacking, CategoryRun)> {
    let mut run = CategoryRun {
        category: cat,
        requests: reqs.len(),
        throughput: 0,
        short: None,
        pipeline: None,
    };
    let packing = match cat {
        Category::VeryShort | Category::Short => {
            let ell = if cat == Category::VeryShort { th.ell_vs } else { th.ell_s };
            let sol = solve_short(reqs, ell, inst.buffer, inst.link)?;
            run.short = Some(sol.report);
            sol.packing
        }
        Category::Medium | Category::Long => {
            let d_max = if cat == Category::Medium { th.ell_m } else { inst.n as f64 };
            let pp = PipelineParams::new(d_max, params.eps_gk, params.seed)?;
            let (packing, trace) = run_medium_long(reqs, &pp)?;
            run.pipeline = Some(trace);
            packing
        }
    };
    run.throughput = packing.len();
    Ok((packing, run))
}

/// Solves `inst`. Instances too small for the category split (`n < 5`) are solved exactly
/// when the oracle accepts them, otherwise by the short solver on all requests.
pub fn solve(inst: &Instance, params: &SolveParams) -> Result<Solution> {
    inst.validate()?;
    let servable: Vec<PacketRequest> = inst.requests.iter().filter(|r| r.is_servable()).cloned().collect();
    let mut report = SolveReport {
        n: inst.n,
        buffer: inst.buffer,
        c: inst.link,
        requests: inst.len(),
        mode: params.mode,
        seed: params.seed,
        eps_gk: params.eps_gk,
        method: "categories".into(),
        ell_s: None,
        ell_m: None,
        ell_vs: None,
        unservable: inst.len() - servable.len(),
        runs: Vec::new(),
        chosen: None,
        throughput: 0,
        frac_bound: frac_bound(inst),
    };

    let packing = match Thresholds::new(inst.n) {
        Err(_) => {
            let small = Instance {
                requests: servable.clone(),
                ..inst.clone()
            };
            match oracle::optimal_schedule(&small, None) {
                Ok(p) => {
                    report.method = "oracle".into();
                    p
                }
                Err(_) => {
                    let th = Thresholds::raw(inst.n);
                    report.ell_s = Some(th.ell_s);
                    let (p, run) = run_category(Category::Short, &servable, inst, &th, params)?;
                    report.runs.push(run);
                    report.chosen = Some(Category::Short);
                    p
                }
            }
        }
        Ok(th) => {
            report.ell_s = Some(th.ell_s);
            report.ell_m = Some(th.ell_m);
            let very_short = match params.mode {
                CategoryMode::All => true,
                CategoryMode::Auto => inst.buffer.min(inst.link) > 1,
                _ => false,
            };
            if very_short {
                report.ell_vs = Some(th.ell_vs);
            }
            let mut groups: BTreeMap<Category, Vec<PacketRequest>> = BTreeMap::new();
            for r in &servable {
                groups.entry(categorize(r, &th, very_short)).or_default().push(r.clone());
            }
            let wanted = |c: Category| match params.mode {
                CategoryMode::Auto | CategoryMode::All => true,
                CategoryMode::Short => matches!(c, Category::Short | Category::VeryShort),
                CategoryMode::Medium => c == Category::Medium,
                CategoryMode::Long => c == Category::Long,
            };
            let mut best: Option<IntegralPacking> = None;
            for (cat, reqs) in groups {
                if !wanted(cat) {
                    continue;
                }
                let (p, run) = run_category(cat, &reqs, inst, &th, params)?;
                log::info!("{}: {} of {} requests", cat.name(), p.len(), reqs.len());
                report.runs.push(run);
                // Ties keep the shorter category.
                if best.as_ref().is_none_or(|b| p.len() > b.len()) {
                    report.chosen = Some(cat);
                    best = Some(p);
                }
            }
            best.unwrap_or_default()
        }
    };
    debug_assert!(packing.paths.iter().all(|(id, p)| {
        let (o, _) = to_grid_request(inst.request(*id));
        p.origin == o
    }));
    report.throughput = packing.len();
    let schedule = Schedule::from_paths(inst.len(), packing.paths.iter().map(|(&id, p)| (id, p)));
    Ok(Solution {
        packing,
        schedule,
        report,
    })
}
