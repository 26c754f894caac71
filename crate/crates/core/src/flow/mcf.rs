//! Maximum-throughput fractional multicommodity flow with a hop bound.
//!
//! Multiplicative-weights method in the style of Garg and Könemann. Each request gets a
//! private demand edge of capacity 1 in front of its origin, so `|f_i| ≤ 1` is an ordinary
//! capacity constraint. Every grid move raises `row + col` by one, so a hop bound is the
//! same as confining request `i` to a window of rows `[a, b]` and columns
//! `[t−a, t−a + H − d]`; inside it the shortest path is an exact DAG dynamic program.
//!
//! The primal returned is the routed path flow with each path scaled down by the worst
//! congestion along it, then scaled back up while slack remains. Upper bounds come from the
//! edge lengths: the textbook `D(l)/α(l)` after every step and, once per evaluation, a
//! Lagrangian bound that also optimizes the demand-edge duals. The loop stops when the
//! primal is within `1 − eps_gk` of the best bound, at the textbook rule `α ≥ 1`, or when
//! the round budget runs out; the remaining gap is reported, not hidden.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use super::{EdgeCaps, FractionalMCF, SingleFlow};
use crate::error::{Error, Result};
use crate::grid::{to_grid_request, GridPath, GridVertex, Move};
use crate::model::PacketRequest;

/// Multiplicative step used by default. Smaller steps converge to a tighter certificate but
/// need quadratically more iterations.
pub const DEFAULT_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McfParams {
    pub caps: EdgeCaps,
    /// Maximum number of grid moves on any flow path.
    pub hop_bound: usize,
    /// Target relative gap between the primal and the certified bound.
    pub eps_gk: f64,
    /// Length multiplier per unit of congestion, the `ε` of the textbook method.
    pub step: f64,
    /// Routing steps allowed, in multiples of the number of requests.
    pub max_rounds: usize,
}

impl McfParams {
    pub fn new(caps: EdgeCaps, hop_bound: usize, eps_gk: f64) -> Self {
        Self {
            caps,
            hop_bound,
            eps_gk,
            step: DEFAULT_STEP,
            max_rounds: 1000,
        }
    }
}

/// Rows `[row0, row1]` and columns `[col0, col1]` of the grid, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub row0: i64,
    pub row1: i64,
    pub col0: i64,
    pub col1: i64,
}

impl Window {
    /// Region reachable by paths of at most `hop_bound` moves that meet the deadline.
    pub fn for_request(req: &PacketRequest, hop_bound: usize) -> Option<Self> {
        let (o, b) = to_grid_request(req);
        let mut col1 = o.col + hop_bound as i64 - req.distance();
        if let Some(dl) = req.deadline {
            col1 = col1.min(dl - b);
        }
        (col1 >= o.col).then_some(Self {
            row0: o.row,
            row1: b,
            col0: o.col,
            col1,
        })
    }

    pub fn contains(&self, v: GridVertex) -> bool {
        (self.row0..=self.row1).contains(&v.row) && (self.col0..=self.col1).contains(&v.col)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Commodity {
    id: usize,
    origin: GridVertex,
    win: Window,
    length: f64,
    value: f64,
    paths: BTreeMap<Vec<Move>, f64>,
}

/// Dense per-edge state over the bounding box of all windows.
struct Grid {
    row0: i64,
    col0: i64,
    width: usize,
    len_f: Vec<f64>,
    len_s: Vec<f64>,
    flow_f: Vec<f64>,
    flow_s: Vec<f64>,
}

impl Grid {
    fn idx(&self, r: i64, c: i64) -> usize {
        (r - self.row0) as usize * self.width + (c - self.col0) as usize
    }

    fn edge_index(&self, v: GridVertex) -> usize {
        self.idx(v.row, v.col)
    }
}

pub fn max_throughput_mcf(reqs: &[PacketRequest], p: &McfParams) -> Result<FractionalMCF> {
    let eps = p.step;
    if !(p.eps_gk > 0.0 && p.eps_gk < 0.5) {
        return Err(Error::Precondition(format!("eps_gk must be in (0, 0.5), got {}", p.eps_gk)));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("step must be in (0, 1), got {eps}")));
    }
    if !(p.caps.store > 0.0 && p.caps.forward > 0.0) {
        return Err(Error::Precondition("capacities must be positive".into()));
    }
    if let Some(r) = reqs.iter().find(|r| r.distance() > p.hop_bound as i64) {
        return Err(Error::Precondition(format!(
            "hop bound {} is below the distance {} of request {}",
            p.hop_bound,
            r.distance(),
            r.id
        )));
    }

    let mut flows_out: Vec<SingleFlow> = Vec::with_capacity(reqs.len());
    let mut comms: Vec<Commodity> = Vec::new();
    for r in reqs {
        let (origin, b) = to_grid_request(r);
        match Window::for_request(r, p.hop_bound) {
            Some(win) => comms.push(Commodity {
                id: r.id,
                origin,
                win,
                length: 0.0,
                value: 0.0,
                paths: BTreeMap::new(),
            }),
            None => flows_out.push(SingleFlow::empty(r.id, origin, b)),
        }
    }
    if comms.is_empty() {
        flows_out.sort_by_key(|f| f.id);
        return Ok(FractionalMCF {
            flows: flows_out,
            upper_bound: 0.0,
        });
    }

    let row0 = comms.iter().map(|c| c.win.row0).min().unwrap();
    let row1 = comms.iter().map(|c| c.win.row1).max().unwrap();
    let col0 = comms.iter().map(|c| c.win.col0).min().unwrap();
    let col1 = comms.iter().map(|c| c.win.col1).max().unwrap();
    let width = (col1 - col0 + 2) as usize;
    let cells = (row1 - row0 + 1) as usize * width;

    // δ from the textbook analysis, clamped so it stays a normal float for small steps.
    let path_len = (p.hop_bound + 1) as f64;
    let ln_delta = (1.0 + eps).ln() - ((1.0 + eps) * path_len).ln() / eps;
    let delta = ln_delta.exp().max(1e-250);

    let mut g = Grid {
        row0,
        col0,
        width,
        len_f: vec![delta / p.caps.forward; cells],
        len_s: vec![delta / p.caps.store; cells],
        flow_f: vec![0.0; cells],
        flow_s: vec![0.0; cells],
    };
    for c in &mut comms {
        c.length = delta;
    }
    // D(l) = Σ cap·len over every edge of the box plus the demand edges.
    let mut dual = delta * (2 * cells + comms.len()) as f64;
    let mut best_ub = f64::INFINITY;
    let mut primal;

    let mut scratch = Vec::new();
    let mut heap: BinaryHeap<Reverse<(Key, usize)>> = comms
        .iter()
        .enumerate()
        .map(|(k, c)| Reverse((Key(c.length), k)))
        .collect();

    let budget = p.max_rounds.saturating_mul(comms.len());
    let eval_every = 25 * comms.len();
    let mut iterations = 0usize;
    let mut stop = "budget";
    while let Some(Reverse((_, k))) = heap.pop() {
        if iterations >= budget {
            break;
        }
        let (dist, moves) = shortest_path(&g, &comms[k], &mut scratch);
        let next_lb = heap.peek().map_or(f64::INFINITY, |Reverse((Key(x), _))| *x);
        let alpha = dist.min(next_lb);
        best_ub = best_ub.min(dual / alpha);
        if alpha >= 1.0 {
            stop = "alpha";
            break;
        }
        if dist > (1.0 + eps) * alpha {
            heap.push(Reverse((Key(dist), k)));
            continue;
        }
        iterations += 1;

        let c = &mut comms[k];
        let mut u = 1.0f64;
        if moves.contains(&Move::Forward) {
            u = u.min(p.caps.forward);
        }
        if moves.contains(&Move::Store) {
            u = u.min(p.caps.store);
        }
        let mut v = c.origin;
        for &m in &moves {
            let i = g.edge_index(v);
            let (len, flow, cap) = match m {
                Move::Forward => (&mut g.len_f[i], &mut g.flow_f[i], p.caps.forward),
                Move::Store => (&mut g.len_s[i], &mut g.flow_s[i], p.caps.store),
            };
            let grow = *len * eps * u / cap;
            *len += grow;
            dual += cap * grow;
            *flow += u;
            v = v.step(m);
        }
        let grow = c.length * eps * u;
        c.length += grow;
        dual += grow;
        c.value += u;
        *c.paths.entry(moves).or_insert(0.0) += u;
        heap.push(Reverse((Key(dist), k)));

        if iterations % eval_every == 0 {
            best_ub = best_ub.min(lagrangian_bound(&g, &comms, &p.caps, &mut scratch));
            primal = scaled_weights(&g, &comms, &p.caps).1;
            if primal >= (1.0 - p.eps_gk) * best_ub {
                stop = "gap";
                break;
            }
        }
    }
    best_ub = best_ub.min(lagrangian_bound(&g, &comms, &p.caps, &mut scratch));
    let (weights, total) = scaled_weights(&g, &comms, &p.caps);
    primal = total;
    log::debug!(
        "mcf: {} commodities, {iterations} steps, stop={stop}, primal {primal:.4}, bound {best_ub:.4}",
        comms.len()
    );

    for (c, w) in comms.into_iter().zip(weights) {
        let b = c.win.row1;
        let paths = c
            .paths
            .into_keys()
            .zip(w)
            .filter(|(_, w)| *w > 0.0)
            .map(|(m, w)| (GridPath::new(c.origin, m), w))
            .collect();
        flows_out.push(SingleFlow::from_paths(c.id, c.origin, b, paths));
    }
    flows_out.sort_by_key(|f| f.id);
    Ok(FractionalMCF {
        flows: flows_out,
        upper_bound: best_ub.max(primal),
    })
}

/// `min over x ≥ 0 of x·Σ cap·len + Σ_i max(0, 1 − x·dist_i)`: grid duals `x·len` plus the
/// best demand-edge duals for them. Feasible for the dual LP, so an upper bound.
fn lagrangian_bound(g: &Grid, comms: &[Commodity], caps: &EdgeCaps, scratch: &mut Vec<f64>) -> f64 {
    let a: f64 = g.len_f.iter().sum::<f64>() * caps.forward + g.len_s.iter().sum::<f64>() * caps.store;
    let mut d: Vec<f64> = comms
        .iter()
        .map(|c| shortest_path(g, c, scratch).0 - c.length)
        .collect();
    d.sort_by(|x, y| y.total_cmp(x));
    // With d sorted decreasingly, at x = 1/d_j exactly the commodities after j contribute.
    let mut best = comms.len() as f64;
    let mut tail_count = 0.0;
    let mut tail_sum = 0.0;
    for j in (0..d.len()).rev() {
        let x = 1.0 / d[j];
        best = best.min(a * x + tail_count - x * tail_sum);
        tail_count += 1.0;
        tail_sum += d[j];
    }
    best
}

/// Per-path weights made feasible: each path is divided by the worst congestion on it
/// (demand edge included), then every path is stretched by the least slack on it, twice.
fn scaled_weights(g: &Grid, comms: &[Commodity], caps: &EdgeCaps) -> (Vec<Vec<f64>>, f64) {
    let mut load_f = vec![0.0; g.flow_f.len()];
    let mut load_s = vec![0.0; g.flow_s.len()];
    let mut weights: Vec<Vec<f64>> = comms
        .iter()
        .map(|c| {
            c.paths
                .iter()
                .map(|(moves, &w)| {
                    let mut worst = c.value;
                    let mut v = c.origin;
                    for &m in moves {
                        let i = g.edge_index(v);
                        worst = worst.max(match m {
                            Move::Forward => g.flow_f[i] / caps.forward,
                            Move::Store => g.flow_s[i] / caps.store,
                        });
                        v = v.step(m);
                    }
                    w / worst.max(1.0)
                })
                .collect()
        })
        .collect();
    for _ in 0..2 {
        load_f.iter_mut().for_each(|x| *x = 0.0);
        load_s.iter_mut().for_each(|x| *x = 0.0);
        for (c, ws) in comms.iter().zip(&weights) {
            for (moves, &w) in c.paths.keys().zip(ws) {
                let mut v = c.origin;
                for &m in moves {
                    let i = g.edge_index(v);
                    match m {
                        Move::Forward => load_f[i] += w,
                        Move::Store => load_s[i] += w,
                    }
                    v = v.step(m);
                }
            }
        }
        for (c, ws) in comms.iter().zip(weights.iter_mut()) {
            let value: f64 = ws.iter().sum();
            for (moves, w) in c.paths.keys().zip(ws.iter_mut()) {
                let mut stretch = if value > 0.0 { 1.0 / value } else { 1.0 };
                let mut v = c.origin;
                for &m in moves {
                    let i = g.edge_index(v);
                    let (load, cap) = match m {
                        Move::Forward => (load_f[i], caps.forward),
                        Move::Store => (load_s[i], caps.store),
                    };
                    stretch = stretch.min(cap / load);
                    v = v.step(m);
                }
                *w *= stretch * (1.0 - 1e-12);
            }
        }
    }
    let total = weights.iter().flatten().sum();
    (weights, total)
}

/// Exact shortest path inside the commodity's window, demand edge included.
/// Ties prefer Forward, which yields the lexicographically smallest path.
fn shortest_path(g: &Grid, c: &Commodity, to_go: &mut Vec<f64>) -> (f64, Vec<Move>) {
    let w = c.win;
    let rows = (w.row1 - w.row0) as usize;
    let cols = (w.col1 - w.col0 + 1) as usize;
    // Row `rows` is the destination row, where the cost to go is zero.
    to_go.clear();
    to_go.resize((rows + 1) * cols, 0.0);
    // Rows are swept right to left in strips of four, each row lagging one column behind
    // the row below it, so four dependency chains run side by side.
    let mut top = rows;
    while top >= 4 {
        let r0 = top - 1;
        let base: [usize; 4] = std::array::from_fn(|j| g.idx(w.row0 + (r0 - j) as i64, w.col0));
        let mut right = [f64::INFINITY; 4];
        let mut cell = |j: usize, col: usize, right: &mut [f64; 4]| {
            let r = r0 - j;
            let i = base[j] + col;
            let up = g.len_f[i] + to_go[(r + 1) * cols + col];
            let side = g.len_s[i] + right[j];
            let best = if side < up { side } else { up };
            to_go[r * cols + col] = best;
            right[j] = best;
        };
        for step in 0..cols + 3 {
            if step >= 3 && step < cols {
                let c = cols - 1 - step;
                cell(0, c, &mut right);
                cell(1, c + 1, &mut right);
                cell(2, c + 2, &mut right);
                cell(3, c + 3, &mut right);
            } else {
                for j in 0..4 {
                    if let Some(col) = (cols - 1 + j).checked_sub(step).filter(|&c| c < cols) {
                        cell(j, col, &mut right);
                    }
                }
            }
        }
        top -= 4;
    }
    for r in (0..top).rev() {
        let base = g.idx(w.row0 + r as i64, w.col0);
        let mut right = f64::INFINITY;
        for col in (0..cols).rev() {
            let up = g.len_f[base + col] + to_go[(r + 1) * cols + col];
            let side = g.len_s[base + col] + right;
            let best = if side < up { side } else { up };
            to_go[r * cols + col] = best;
            right = best;
        }
    }
    let mut moves = Vec::with_capacity(rows + cols);
    let (mut r, mut col) = (0usize, 0usize);
    while r < rows {
        let i = g.idx(w.row0 + r as i64, w.col0 + col as i64);
        let fwd = g.len_f[i] + to_go[(r + 1) * cols + col];
        let store = if col + 1 < cols {
            g.len_s[i] + to_go[r * cols + col + 1]
        } else {
            f64::INFINITY
        };
        if fwd <= store {
            moves.push(Move::Forward);
            r += 1;
        } else {
            moves.push(Move::Store);
            col += 1;
        }
    }
    (to_go[0] + c.length, moves)
}

/// Checks capacity, conservation, demand, hop-bound and deadline constraints of an MCF.
pub fn check_mcf(mcf: &FractionalMCF, reqs: &[PacketRequest], caps: EdgeCaps, hop_bound: usize) -> Result<(), String> {
    const TOL: f64 = 1e-9;
    for (e, w) in mcf.cumulative() {
        if w > caps.of(e) * (1.0 + TOL) + TOL {
            return Err(format!("edge {e:?} carries {w} > {}", caps.of(e)));
        }
    }
    for f in &mcf.flows {
        let r = reqs
            .iter()
            .find(|r| r.id == f.id)
            .ok_or_else(|| format!("flow for unknown request {}", f.id))?;
        let (origin, b) = to_grid_request(r);
        if f.origin != origin || f.dest_row != b {
            return Err(format!("request {}: wrong endpoints", f.id));
        }
        if f.value > 1.0 + TOL || f.value < -TOL {
            return Err(format!("request {}: value {} outside [0, 1]", f.id, f.value));
        }
        let mut net: BTreeMap<GridVertex, f64> = BTreeMap::new();
        for (&e, &w) in &f.edges {
            if w < -TOL {
                return Err(format!("request {}: negative flow on {e:?}", f.id));
            }
            if e.from.row >= b {
                return Err(format!("request {}: flow leaves the destination row", f.id));
            }
            if let Some(dl) = r.deadline {
                if e.to().time() > dl {
                    return Err(format!("request {}: flow past the deadline", f.id));
                }
            }
            *net.entry(e.from).or_insert(0.0) += w;
            *net.entry(e.to()).or_insert(0.0) -= w;
        }
        for (v, x) in net {
            let want = if v == origin {
                f.value
            } else if v.row == b {
                x.min(0.0)
            } else {
                0.0
            };
            if (x - want).abs() > TOL {
                return Err(format!("request {}: conservation fails at {v:?} ({x})", f.id));
            }
        }
        if f.longest_support_path() > hop_bound {
            return Err(format!("request {}: path longer than {hop_bound}", f.id));
        }
        let sum: f64 = f.paths.iter().map(|(_, w)| w).sum();
        if (sum - f.value).abs() > TOL {
            return Err(format!("request {}: decomposition sums to {sum}", f.id));
        }
        if let Some((p, _)) = f.paths.iter().find(|(p, _)| !p.serves(r)) {
            return Err(format!("request {}: path {} does not serve it", f.id, p.action_string()));
        }
    }
    Ok(())
}
