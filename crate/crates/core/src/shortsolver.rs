//! Exact per-tile packing for short requests, best of the four shift classes.
//!
//! Under a tiling with side `k`, a request whose origin lies in a SW quadrant and whose
//! path has at most `k/2` moves never leaves its tile, so tiles are independent. Each tile
//! is solved exactly by branch and bound over explicit path lists.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowNetwork, IntegralPacking};
use crate::grid::{to_grid_request, GridPath, GridVertex, Move};
use crate::model::PacketRequest;
use crate::tiling::{class_of, short_tile_side, Rect, TileId, Tiling};

/// Search nodes allowed per tile before the best packing found so far is returned.
pub const DEFAULT_NODE_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TileSolution {
    pub paths: BTreeMap<usize, GridPath>,
    /// False when the node budget ran out before optimality was proved.
    pub exact: bool,
    pub nodes: u64,
}

/// Every path from `origin` to row `dest` inside `rect` with at most `max_len` moves
/// ending at column `≤ max_col`, Forward-first depth-first order.
pub fn confined_paths(origin: GridVertex, dest: i64, rect: &Rect, max_len: usize, max_col: i64) -> Vec<GridPath> {
    fn go(v: GridVertex, dest: i64, rect: &Rect, left: usize, max_col: i64, moves: &mut Vec<Move>, origin: GridVertex, out: &mut Vec<GridPath>) {
        if v.row == dest {
            out.push(GridPath::new(origin, moves.clone()));
            return;
        }
        let need = (dest - v.row) as usize;
        if need <= left && v.row + 1 <= rect.row1() {
            moves.push(Move::Forward);
            go(v.step(Move::Forward), dest, rect, left - 1, max_col, moves, origin, out);
            moves.pop();
        }
        if need < left && v.col < rect.col1() && v.col < max_col {
            moves.push(Move::Store);
            go(v.step(Move::Store), dest, rect, left - 1, max_col, moves, origin, out);
            moves.pop();
        }
    }
    let mut out = Vec::new();
    if rect.contains(origin) && dest >= origin.row {
        go(origin, dest, rect, max_len, max_col, &mut Vec::new(), origin, &mut out);
    }
    out
}

struct Search<'a> {
    rect: Rect,
    buffer: u32,
    link: u32,
    reqs: &'a [PacketRequest],
    /// Request indices in branching order.
    order: Vec<usize>,
    /// `same[i]`: `order[i]` is interchangeable with `order[i-1]`.
    same: Vec<bool>,
    paths: Vec<Vec<GridPath>>,
    edge_ids: Vec<Vec<Vec<usize>>>,
    residual: Vec<u32>,
    choice: Vec<Option<usize>>,
    best: usize,
    best_choice: Vec<Option<usize>>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Search<'_> {
    fn edge_id(&self, v: GridVertex, m: Move) -> usize {
        let r = (v.row - self.rect.row0) as usize;
        let c = (v.col - self.rect.col0) as usize;
        2 * (r * self.rect.cols as usize + c) + usize::from(m == Move::Store)
    }

    fn fits(&self, ids: &[usize]) -> bool {
        ids.iter().all(|&e| self.residual[e] > 0)
    }

    /// Single-commodity relaxation over the residual grid: remaining requests push one unit
    /// from their origins, and a unit may leave on a forward edge into row `r` only while
    /// fewer units than requests heading to `r` have left there. Every packing of the
    /// remaining requests is such a flow, since a path ends with a forward move onto its
    /// destination row.
    fn flow_bound(&self, idx: usize) -> usize {
        let cols = self.rect.cols as usize;
        let rows = self.rect.rows as usize;
        let cells = rows * cols;
        let mut per_origin: BTreeMap<usize, i64> = BTreeMap::new();
        let mut per_dest = vec![0i64; rows];
        for &ri in &self.order[idx..] {
            let (o, b) = to_grid_request(&self.reqs[ri]);
            let v = ((o.row - self.rect.row0) as usize) * cols + (o.col - self.rect.col0) as usize;
            *per_origin.entry(v).or_default() += 1;
            per_dest[(b - self.rect.row0) as usize] += 1;
        }
        let mut net = FlowNetwork::new(cells + rows + 2);
        let (s, t) = (cells + rows, cells + rows + 1);
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                let fw = self.residual[2 * v] as i64;
                if r + 1 < rows && fw > 0 {
                    if per_dest[r + 1] > 0 {
                        // The forward edge either continues upward or delivers on row r+1.
                        let mid = net.add_node();
                        net.add_edge(v, mid, fw);
                        net.add_edge(mid, v + cols, fw);
                        net.add_edge(mid, cells + r + 1, fw);
                    } else {
                        net.add_edge(v, v + cols, fw);
                    }
                }
                if c + 1 < cols && self.residual[2 * v + 1] > 0 {
                    net.add_edge(v, v + 1, self.residual[2 * v + 1] as i64);
                }
            }
        }
        for (&v, &m) in &per_origin {
            net.add_edge(s, v, m);
        }
        for (r, &m) in per_dest.iter().enumerate() {
            if m > 0 {
                net.add_edge(cells + r, t, m);
            }
        }
        net.max_flow(s, t).value as usize
    }

    fn run(&mut self, idx: usize, accepted: usize) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if accepted > self.best {
            self.best = accepted;
            self.best_choice = self.choice.clone();
        }
        let n = self.order.len();
        if idx == n || accepted + (n - idx) <= self.best {
            return;
        }
        let bound = accepted + self.flow_bound(idx);
        if bound <= self.best {
            return;
        }
        let ri = self.order[idx];
        // Interchangeable requests take non-decreasing path indices, and a rejected one
        // forces the rest of its group to be rejected.
        let (start, may_accept) = if self.same[idx] {
            match self.choice[self.order[idx - 1]] {
                Some(p) => (p, true),
                None => (0, false),
            }
        } else {
            (0, true)
        };
        if may_accept {
            for pi in start..self.paths[ri].len() {
                if !self.fits(&self.edge_ids[ri][pi]) {
                    continue;
                }
                for &e in &self.edge_ids[ri][pi] {
                    self.residual[e] -= 1;
                }
                self.choice[ri] = Some(pi);
                self.run(idx + 1, accepted + 1);
                self.choice[ri] = None;
                for &e in &self.edge_ids[ri][pi] {
                    self.residual[e] += 1;
                }
                if self.aborted || self.best >= bound {
                    return;
                }
            }
        }
        self.run(idx + 1, accepted);
    }
}

/// Maximum-cardinality packing of `reqs` by paths confined to `rect` with at most
/// `max_len` moves, respecting capacities `B`, `c` and any deadlines.
pub fn solve_tile_exact(reqs: &[PacketRequest], rect: Rect, buffer: u32, link: u32, max_len: usize, budget: u64) -> TileSolution {
    let paths: Vec<Vec<GridPath>> = reqs
        .iter()
        .map(|r| {
            let (o, b) = to_grid_request(r);
            let max_col = r.deadline.map_or(i64::MAX, |dl| dl - b);
            confined_paths(o, b, &rect, max_len, max_col)
        })
        .collect();
    let key = |i: usize| {
        let r = &reqs[i];
        (paths[i].len(), r.a, r.t, r.b, r.deadline, r.id)
    };
    let mut order: Vec<usize> = (0..reqs.len()).filter(|&i| !paths[i].is_empty()).collect();
    order.sort_by_key(|&i| key(i));
    let same: Vec<bool> = (0..order.len())
        .map(|x| {
            x > 0 && {
                let (p, q) = (&reqs[order[x - 1]], &reqs[order[x]]);
                (p.a, p.b, p.t, p.deadline) == (q.a, q.b, q.t, q.deadline)
            }
        })
        .collect();
    let mut search = Search {
        rect,
        buffer,
        link,
        reqs,
        order,
        same,
        paths,
        edge_ids: Vec::new(),
        residual: Vec::new(),
        choice: vec![None; reqs.len()],
        best: 0,
        best_choice: vec![None; reqs.len()],
        nodes: 0,
        budget,
        aborted: false,
    };
    let cells = (rect.rows * rect.cols) as usize;
    search.residual = (0..2 * cells)
        .map(|e| if e % 2 == 0 { search.link } else { search.buffer })
        .collect();
    search.edge_ids = search
        .paths
        .iter()
        .map(|ps| {
            ps.iter()
                .map(|p| p.edges().map(|e| search.edge_id(e.from, e.dir)).collect())
                .collect()
        })
        .collect();
    search.run(0, 0);
    let mut out = TileSolution {
        exact: !search.aborted,
        nodes: search.nodes,
        ..Default::default()
    };
    for (i, c) in search.best_choice.iter().enumerate() {
        if let Some(pi) = c {
            out.paths.insert(reqs[i].id, search.paths[i][*pi].clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortReport {
    pub k: i64,
    pub max_len: usize,
    /// Throughput of each shift class.
    pub class_throughput: [usize; 4],
    pub chosen_class: usize,
    pub tiles: usize,
    pub inexact_tiles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortSolution {
    pub packing: IntegralPacking,
    pub report: ShortReport,
}

/// Short-request algorithm with threshold `ell`: for each of the four shift classes solve
/// every tile exactly, then return the best class.
pub fn solve_short(reqs: &[PacketRequest], ell: f64, buffer: u32, link: u32) -> Result<ShortSolution> {
    if let Some(r) = reqs.iter().find(|r| r.distance() as f64 > ell) {
        return Err(Error::Precondition(format!(
            "request {} has distance {} > {ell:.3}",
            r.id,
            r.distance()
        )));
    }
    let k = short_tile_side(ell);
    let max_len = 2 * ell.floor().max(0.0) as usize;
    let mut best: Option<(IntegralPacking, usize)> = None;
    let mut class_throughput = [0usize; 4];
    let (mut tiles, mut inexact_tiles) = (0, 0);
    for idx in 0..4 {
        let tiling = Tiling::for_class(k, idx)?;
        let mut by_tile: BTreeMap<TileId, Vec<PacketRequest>> = BTreeMap::new();
        for r in reqs.iter().filter(|r| class_of(r, k) == idx) {
            by_tile.entry(tiling.tile_of(to_grid_request(r).0)).or_default().push(r.clone());
        }
        let mut packing = IntegralPacking::default();
        for (tile, rs) in &by_tile {
            let sol = solve_tile_exact(rs, tiling.tile_rect(*tile), buffer, link, max_len, DEFAULT_NODE_BUDGET);
            tiles += 1;
            if !sol.exact {
                inexact_tiles += 1;
                warn!("tile {tile:?} of class {idx}: node budget exhausted after {} nodes", sol.nodes);
            }
            packing.paths.extend(sol.paths);
        }
        class_throughput[idx] = packing.len();
        if best.as_ref().is_none_or(|(b, _)| packing.len() > b.len()) {
            best = Some((packing, idx));
        }
    }
    let (packing, chosen_class) = best.expect("four classes");
    Ok(ShortSolution {
        packing,
        report: ShortReport {
            k,
            max_len,
            class_throughput,
            chosen_class,
            tiles,
            inexact_tiles,
        },
    })
}
