#![allow(dead_code)]

use std::collections::HashMap;

use pktline::flow::IntegralPacking;
use pktline::grid::{GridEdge, GridPath, GridVertex, Move};
use pktline::model::rng::{self, purpose, Rng};
use rand::Rng as _;

pub fn test_rng(seed: u64) -> Rng {
    rng::stream(seed, purpose::TEST, 0)
}

/// Random path from `origin` to row `origin.row + dist` with up to `max_slack` stores.
pub fn random_path(rng: &mut Rng, origin: GridVertex, dist: i64, max_slack: usize) -> GridPath {
    let slack = rng.random_range(0..=max_slack);
    let mut moves = vec![Move::Forward; dist as usize];
    for _ in 0..slack {
        // Never after the last forward: a path ends on its first destination-row vertex.
        let at = rng.random_range(0..moves.len());
        moves.insert(at, Move::Store);
    }
    GridPath::new(origin, moves)
}

/// Greedy random packing: draws `tries` random paths with distance in `1..=d` and keeps
/// those that fit under capacities `B` (store) and `c` (forward).
pub fn random_packing(rng: &mut Rng, rows: i64, cols: i64, d: i64, buffer: u32, link: u32, tries: usize) -> IntegralPacking {
    let mut loads: HashMap<GridEdge, u32> = HashMap::new();
    let mut out = IntegralPacking::default();
    for _ in 0..tries {
        let dist = rng.random_range(1..=d.min(rows - 1));
        let origin = GridVertex::new(rng.random_range(0..rows - dist), rng.random_range(0..cols));
        let p = random_path(rng, origin, dist, 3 * d as usize);
        let fits = p.edges().all(|e| loads.get(&e).copied().unwrap_or(0) < e.capacity(buffer, link));
        if fits {
            for e in p.edges() {
                *loads.entry(e).or_default() += 1;
            }
            let id = out.paths.len();
            out.paths.insert(id, p);
        }
    }
    out
}

/// All paths inside the window rows `0..rows`, cols `0..cols` with distance in `1..=max_dist`.
pub fn window_paths(rows: i64, cols: i64, max_dist: i64) -> Vec<GridPath> {
    fn extend(v: GridVertex, dest: i64, cols: i64, moves: &mut Vec<Move>, origin: GridVertex, out: &mut Vec<GridPath>) {
        if v.row == dest {
            out.push(GridPath::new(origin, moves.clone()));
            return;
        }
        for m in [Move::Forward, Move::Store] {
            let w = v.step(m);
            if w.col < cols {
                moves.push(m);
                extend(w, dest, cols, moves, origin, out);
                moves.pop();
            }
        }
    }
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            for dist in 1..=max_dist {
                if r + dist < rows {
                    let o = GridVertex::new(r, c);
                    extend(o, r + dist, cols, &mut Vec::new(), o, &mut out);
                }
            }
        }
    }
    out
}
