//! Medium/long request algorithm: bounded-hop fractional MCF at capacity `λ`, best shift
//! class, randomized rounding, sketch-edge filter, quadrant routing with side limits and
//! detailed routing through the tiles. Runs at unit capacities.

pub mod crossbar;
pub mod detailed;
pub mod filter;
pub mod quadrant;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use crossbar::{route_crossbar, CrossbarProblem, CrossbarRequest, Entry, Side};
pub use detailed::{detailed_route, DetailedOutcome, RoutedRequest};
pub use filter::{filter, filter_threshold, sketch_loads};
pub use quadrant::{quadrant_route, QuadrantRouting};

use crate::error::{Error, Result};
use crate::flow::{max_throughput_mcf, randomized_round, EdgeCaps, FractionalMCF, IntegralPacking, McfParams};
use crate::grid::{to_grid_request, GridPath, GridVertex};
use crate::model::{lambda, PacketRequest};
use crate::tiling::{class_of, pipeline_tile_side, Quadrant, QuadrantKind, SketchPath, TileId, Tiling};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub d_min: f64,
    pub d_max: f64,
    pub k: i64,
    pub lambda: f64,
    pub eps_gk: f64,
    pub seed: u64,
}

impl PipelineParams {
    /// Parameters for distances in `(3·ln d_max, d_max]`.
    pub fn new(d_max: f64, eps_gk: f64, seed: u64) -> Result<Self> {
        if !(d_max > std::f64::consts::E) {
            return Err(Error::Precondition(format!("d_max must exceed e, got {d_max}")));
        }
        Ok(Self {
            d_min: 3.0 * d_max.ln(),
            d_max,
            k: pipeline_tile_side(d_max),
            lambda: lambda(),
            eps_gk,
            seed,
        })
    }

    pub fn hop_bound(&self) -> usize {
        (2.0 * self.d_max).floor() as usize
    }

    /// `k/3`: paths allowed through each side of a SW quadrant.
    pub fn side_limit(&self) -> usize {
        (self.k / 3) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTrace {
    pub k: i64,
    pub d_min: f64,
    pub d_max: f64,
    /// `2λk`
    pub filter_threshold: f64,
    pub side_limit: usize,
    pub mcf_throughput: f64,
    pub mcf_upper_bound: f64,
    pub class_throughput: [f64; 4],
    pub chosen_class: usize,
    pub r_rnd: Vec<usize>,
    pub r_fltr: Vec<usize>,
    pub r_quad: Vec<usize>,
    pub r_final: Vec<usize>,
    pub quadrant_rejected: usize,
    pub side_dropped: usize,
    pub overflow_dropped: usize,
    /// Most paths entering any NW, SE or NE quadrant through one side.
    pub max_side_entries: usize,
}

/// Per-stage survival factors; their product is `|R_final| / Σ|f|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageLosses {
    pub class: f64,
    pub rounding: f64,
    pub filter: f64,
    pub quadrant: f64,
    pub detailed: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        1.0
    }
}

impl StageTrace {
    pub fn losses(&self) -> StageLosses {
        let class = self.class_throughput[self.chosen_class];
        StageLosses {
            class: ratio(class, self.mcf_throughput),
            rounding: ratio(self.r_rnd.len() as f64, class),
            filter: ratio(self.r_fltr.len() as f64, self.r_rnd.len() as f64),
            quadrant: ratio(self.r_quad.len() as f64, self.r_fltr.len() as f64),
            detailed: ratio(self.r_final.len() as f64, self.r_quad.len() as f64),
        }
    }

    /// `|R_final|` over the fractional throughput (1 when both are zero).
    pub fn end_to_end(&self) -> f64 {
        if self.mcf_throughput > 0.0 {
            self.r_final.len() as f64 / self.mcf_throughput
        } else if self.r_final.is_empty() {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

impl StageLosses {
    pub fn product(&self) -> f64 {
        self.class * self.rounding * self.filter * self.quadrant * self.detailed
    }
}

/// Restriction of a fractional solution to one shift class.
pub fn restrict_to_class(mcf: &FractionalMCF, reqs: &[PacketRequest], k: i64, class: usize) -> FractionalMCF {
    let by_id: BTreeMap<usize, &PacketRequest> = reqs.iter().map(|r| (r.id, r)).collect();
    FractionalMCF {
        flows: mcf
            .flows
            .iter()
            .filter(|f| class_of(by_id[&f.id], k) == class)
            .cloned()
            .collect(),
        upper_bound: mcf.upper_bound,
    }
}

/// Runs the full medium/long algorithm on `reqs`, whose distances must lie in
/// `(d_min, d_max]`. The returned packing is feasible at unit capacities.
pub fn run_medium_long(reqs: &[PacketRequest], params: &PipelineParams) -> Result<(IntegralPacking, StageTrace)> {
    if let Some(r) = reqs
        .iter()
        .find(|r| !(r.distance() as f64 > params.d_min && r.distance() as f64 <= params.d_max))
    {
        return Err(Error::Precondition(format!(
            "request {} has distance {} outside ({:.3}, {:.3}]",
            r.id,
            r.distance(),
            params.d_min,
            params.d_max
        )));
    }
    let k = params.k;
    let mut trace = StageTrace {
        k,
        d_min: params.d_min,
        d_max: params.d_max,
        filter_threshold: filter_threshold(k, params.lambda),
        side_limit: params.side_limit(),
        ..Default::default()
    };
    if reqs.is_empty() {
        return Ok((IntegralPacking::default(), trace));
    }

    // Fractional solution at capacity λ with paths of at most 2·d_max moves.
    let mcf_params = McfParams::new(EdgeCaps::uniform(params.lambda), params.hop_bound(), params.eps_gk);
    let mcf = max_throughput_mcf(reqs, &mcf_params)?;
    trace.mcf_throughput = mcf.throughput();
    trace.mcf_upper_bound = mcf.upper_bound;

    // Best shift class; ties go to the lowest index.
    let by_id: BTreeMap<usize, &PacketRequest> = reqs.iter().map(|r| (r.id, r)).collect();
    for f in &mcf.flows {
        trace.class_throughput[class_of(by_id[&f.id], k)] += f.value;
    }
    let best = (0..4).fold(0, |b, c| if trace.class_throughput[c] > trace.class_throughput[b] { c } else { b });
    trace.chosen_class = best;
    let tiling = Tiling::for_class(k, best)?;
    let restricted = restrict_to_class(&mcf, reqs, k, best);

    let rounded = randomized_round(&restricted, params.seed);
    trace.r_rnd = rounded.paths.keys().copied().collect();

    let sketches: BTreeMap<usize, SketchPath> = rounded.paths.iter().map(|(&id, p)| (id, tiling.project(p))).collect();
    trace.r_fltr = filter(&sketches, k, params.lambda);

    // Quadrant routing, one SW quadrant at a time.
    let mut per_tile: BTreeMap<TileId, Vec<(usize, GridVertex)>> = BTreeMap::new();
    for &id in &trace.r_fltr {
        let o = rounded.paths[&id].origin;
        per_tile.entry(tiling.tile_of(o)).or_default().push((id, o));
    }
    let mut sw_paths: BTreeMap<usize, GridPath> = BTreeMap::new();
    for (tile, origins) in &per_tile {
        let rect = tiling.quadrant_rect(Quadrant {
            tile: *tile,
            which: QuadrantKind::SW,
        });
        let routing = quadrant_route(origins, rect, Some(params.side_limit()));
        trace.quadrant_rejected += routing.rejected.len();
        trace.side_dropped += routing.side_dropped.len();
        sw_paths.extend(routing.paths);
    }
    trace.r_quad = sw_paths.keys().copied().collect();

    let routed: Vec<RoutedRequest> = sw_paths
        .into_iter()
        .map(|(id, sw_path)| RoutedRequest {
            id,
            dest_row: to_grid_request(by_id[&id]).1,
            sketch: sketches[&id].clone(),
            sw_path,
        })
        .collect();
    let outcome = detailed_route(&routed, &tiling);
    trace.overflow_dropped = outcome.overflow_dropped.len();
    trace.max_side_entries = outcome.max_side_entries;
    trace.r_final = outcome.paths.keys().copied().collect();
    Ok((IntegralPacking { paths: outcome.paths }, trace))
}
