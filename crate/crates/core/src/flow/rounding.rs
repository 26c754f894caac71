use rand::Rng as _;

use super::{FractionalMCF, IntegralPacking, SingleFlow};
use crate::grid::{GridEdge, GridPath, Move};
use crate::model::rng::{self, purpose, Rng};

/// Accepts the request with probability `|f|`, then walks from the origin choosing each
/// out-edge with probability proportional to its flow.
pub fn round_single(flow: &SingleFlow, rng: &mut Rng) -> Option<GridPath> {
    let coin: f64 = rng.random();
    if coin >= flow.value {
        return None;
    }
    let mut v = flow.origin;
    let mut moves = Vec::new();
    while v.row < flow.dest_row {
        let fw = flow.flow_on(GridEdge::new(v, Move::Forward)).max(0.0);
        let st = flow.flow_on(GridEdge::new(v, Move::Store)).max(0.0);
        // A vertex with no outgoing flow is only reachable through rounding noise; leave
        // along Forward so the path still ends on the destination row.
        let m = if st <= 0.0 {
            Move::Forward
        } else if fw <= 0.0 {
            Move::Store
        } else if rng.random::<f64>() * (fw + st) < fw {
            Move::Forward
        } else {
            Move::Store
        };
        moves.push(m);
        v = v.step(m);
    }
    Some(GridPath::new(flow.origin, moves))
}

/// Rounds every flow independently; request `id` draws from its own stream.
pub fn randomized_round(mcf: &FractionalMCF, seed: u64) -> IntegralPacking {
    let mut out = IntegralPacking::default();
    for f in &mcf.flows {
        let mut rng = rng::stream(seed, purpose::ROUNDING, f.id as u64);
        if let Some(p) = round_single(f, &mut rng) {
            out.paths.insert(f.id, p);
        }
    }
    out
}
