//! Exhaustive solvers for tiny instances, used as ground truth.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::flow::IntegralPacking;
use crate::grid::{to_grid_request, GridEdge, GridPath, GridVertex, Move};
use crate::model::{Instance, PacketRequest};
use crate::pipeline::{CrossbarProblem, Side};

pub const MAX_REQUESTS: usize = 8;
pub const MAX_NODES: usize = 10;
pub const MAX_PATH_LEN: usize = 12;

/// `min(12, n + 2·max distance)`.
pub fn default_path_cap(inst: &Instance) -> usize {
    let maxd = inst.requests.iter().map(|r| r.distance()).max().unwrap_or(0).max(0) as usize;
    (inst.n + 2 * maxd).min(MAX_PATH_LEN)
}

fn check_limits(inst: &Instance, cap: usize) -> Result<()> {
    if inst.len() > MAX_REQUESTS || inst.n > MAX_NODES || cap > MAX_PATH_LEN {
        return Err(Error::SizeLimit(format!(
            "oracle handles M <= {MAX_REQUESTS}, n <= {MAX_NODES}, cap <= {MAX_PATH_LEN}; got M = {}, n = {}, cap = {cap}",
            inst.len(),
            inst.n
        )));
    }
    Ok(())
}

/// All paths serving `r` with at most `cap` moves that meet its deadline.
fn request_paths(r: &PacketRequest, cap: usize) -> Vec<GridPath> {
    let (o, b) = to_grid_request(r);
    let d = r.distance();
    if d < 1 || d as usize > cap {
        return Vec::new();
    }
    let max_col = r.deadline.map_or(i64::MAX, |dl| dl - b);
    let mut out = Vec::new();
    let mut stack = vec![(o, Vec::<Move>::new())];
    while let Some((v, moves)) = stack.pop() {
        if v.row == b {
            out.push(GridPath::new(o, moves));
            continue;
        }
        if moves.len() + ((b - v.row) as usize) < cap && v.col < max_col {
            let mut m = moves.clone();
            m.push(Move::Store);
            stack.push((v.step(Move::Store), m));
        }
        let mut m = moves;
        m.push(Move::Forward);
        stack.push((v.step(Move::Forward), m));
    }
    out.retain(|p| p.end().col <= max_col);
    out
}

/// Maximum-cardinality valid packing with paths of at most `cap` moves (default
/// [`default_path_cap`]), by branch and bound over every request's path list.
pub fn optimal_schedule(inst: &Instance, cap: Option<usize>) -> Result<IntegralPacking> {
    let cap = cap.unwrap_or_else(|| default_path_cap(inst));
    check_limits(inst, cap)?;
    // Identical requests are adjacent and share one path list, shortest paths first.
    let mut reqs: Vec<&PacketRequest> = inst.requests.iter().collect();
    let key = |r: &PacketRequest| (r.a, r.b, r.t, r.deadline);
    reqs.sort_by_key(|r| key(r));
    let mut options: Vec<(usize, Vec<GridPath>)> = Vec::new();
    let mut group = Vec::new();
    for (i, r) in reqs.iter().enumerate() {
        let mut ps = request_paths(r, cap);
        if ps.is_empty() {
            continue;
        }
        ps.sort_by_key(|p| p.len());
        let same = i > 0 && key(reqs[i - 1]) == key(r) && !options.is_empty();
        group.push(if same { group.last().copied().unwrap_or(0) } else { options.len() });
        options.push((r.id, ps));
    }
    let origins: Vec<GridVertex> = options.iter().map(|(_, ps)| ps[0].origin).collect();

    struct Bb<'a> {
        options: &'a [(usize, Vec<GridPath>)],
        group: &'a [usize],
        origins: &'a [GridVertex],
        buffer: u32,
        link: u32,
        load: HashMap<GridEdge, u32>,
        chosen: Vec<(usize, usize)>,
        best: Vec<(usize, usize)>,
        target: usize,
    }
    impl Bb<'_> {
        fn residual(&self, v: GridVertex) -> usize {
            [Move::Store, Move::Forward]
                .into_iter()
                .map(|m| {
                    let e = GridEdge { from: v, dir: m };
                    (e.capacity(self.buffer, self.link) - self.load.get(&e).copied().unwrap_or(0)) as usize
                })
                .sum()
        }

        /// Origin cut over the undecided requests.
        fn bound(&self, i: usize) -> usize {
            let mut count: BTreeMap<GridVertex, usize> = BTreeMap::new();
            for &v in &self.origins[i..] {
                *count.entry(v).or_insert(0) += 1;
            }
            count.into_iter().map(|(v, k)| k.min(self.residual(v))).sum()
        }

        /// Decides request `i`. Within a group of identical requests the chosen ones come
        /// first with non-decreasing path indices, starting from `min_pi`.
        fn go(&mut self, i: usize, min_pi: usize) {
            if self.chosen.len() > self.best.len() {
                self.best = self.chosen.clone();
            }
            if i == self.options.len() || self.best.len() >= self.target {
                return;
            }
            if self.chosen.len() + self.bound(i) <= self.best.len() {
                return;
            }
            let (id, ref paths) = self.options[i];
            let next_min = |pi: usize| if self.group.get(i + 1) == Some(&self.group[i]) { pi } else { 0 };
            for (pi, p) in paths.iter().enumerate().skip(min_pi) {
                let fits = p
                    .edges()
                    .all(|e| self.load.get(&e).copied().unwrap_or(0) < e.capacity(self.buffer, self.link));
                if !fits {
                    continue;
                }
                for e in p.edges() {
                    *self.load.entry(e).or_insert(0) += 1;
                }
                self.chosen.push((id, pi));
                let m = next_min(pi);
                self.go(i + 1, m);
                self.chosen.pop();
                for e in p.edges() {
                    *self.load.get_mut(&e).expect("loaded") -= 1;
                }
            }
            // Rejecting one request of a group rejects the rest of it.
            let mut j = i + 1;
            while j < self.options.len() && self.group[j] == self.group[i] {
                j += 1;
            }
            self.go(j, 0);
        }
    }
    let mut bb = Bb {
        options: &options,
        group: &group,
        origins: &origins,
        buffer: inst.buffer,
        link: inst.link,
        load: HashMap::new(),
        chosen: Vec::new(),
        best: Vec::new(),
        target: 0,
    };
    bb.target = bb.bound(0);
    bb.go(0, 0);
    let index: BTreeMap<usize, &Vec<GridPath>> = options.iter().map(|(id, ps)| (*id, ps)).collect();
    Ok(IntegralPacking {
        paths: bb.best.iter().map(|&(id, pi)| (id, index[&id][pi].clone())).collect(),
    })
}

// Per-packet status in 4 bits: waiting, rejected, delivered, or in flight at a node.
const WAITING: u64 = 0;
const REJECTED: u64 = 1;
const DELIVERED: u64 = 2;
const AT: u64 = 3;

fn get(st: u64, i: usize) -> u64 {
    (st >> (4 * i)) & 0xf
}

fn set(st: u64, i: usize, v: u64) -> u64 {
    (st & !(0xf << (4 * i))) | (v << (4 * i))
}

/// Optimum by forward simulation: at each time step every packet in flight forwards or
/// stores and every arriving packet may also be rejected; memoized on the full state.
/// A packet's step count is implied by the clock, so the state is one code per packet.
/// Independent of the grid formulation used by [`optimal_schedule`].
pub fn optimal_by_time_steps(inst: &Instance, cap: Option<usize>) -> Result<usize> {
    let cap = cap.unwrap_or_else(|| default_path_cap(inst));
    check_limits(inst, cap)?;
    let reqs = &inst.requests;
    if reqs.is_empty() {
        return Ok(0);
    }
    let start = reqs.iter().map(|r| r.t).min().expect("non-empty");
    let horizon = reqs.iter().map(|r| r.t).max().expect("non-empty") + cap as i64;

    struct Sim<'a> {
        reqs: &'a [PacketRequest],
        /// Index of the first request identical to each one; identical packets in the same
        /// status are interchangeable, so their codes are kept sorted.
        group: Vec<usize>,
        buffer: usize,
        link: usize,
        cap: usize,
        horizon: i64,
        memo: HashMap<(i64, u64), usize>,
    }

    impl Sim<'_> {
        /// Whether packet `i` at `node` at `time` can still arrive within the cap and deadline.
        fn alive(&self, i: usize, node: i64, time: i64) -> bool {
            let r = &self.reqs[i];
            let left = r.b - node;
            time - r.t + left <= self.cap as i64 && r.deadline.is_none_or(|dl| time + left <= dl)
        }

        fn canonical(&self, st: u64) -> u64 {
            let mut out = st;
            let mut i = 0;
            while i < self.reqs.len() {
                let g = self.group[i];
                let mut j = i;
                while j < self.reqs.len() && self.group[j] == g {
                    j += 1;
                }
                if j - i > 1 {
                    let mut codes: Vec<u64> = (i..j).map(|x| get(st, x)).collect();
                    codes.sort_unstable();
                    for (x, c) in (i..j).zip(codes) {
                        out = set(out, x, c);
                    }
                }
                i = j;
            }
            out
        }

        fn best(&mut self, time: i64, st: u64) -> usize {
            let open = (0..self.reqs.len()).any(|i| !matches!(get(st, i), REJECTED | DELIVERED));
            if time > self.horizon || !open {
                return 0;
            }
            let st = self.canonical(st);
            if let Some(&v) = self.memo.get(&(time, st)) {
                return v;
            }
            let mut cur = st;
            let mut active = Vec::new();
            for i in 0..self.reqs.len() {
                match get(st, i) {
                    WAITING if self.reqs[i].t == time => {
                        cur = set(cur, i, AT + self.reqs[i].a as u64);
                        active.push(i);
                    }
                    c if c >= AT => active.push(i),
                    _ => {}
                }
            }
            let mut best = 0;
            let mut usage = vec![[0usize; 2]; 64];
            self.choose(time, st, cur, &active, 0, &mut usage, &mut best);
            self.memo.insert((time, st), best);
            best
        }

        #[allow(clippy::too_many_arguments)]
        fn choose(
            &mut self,
            time: i64,
            before: u64,
            cur: u64,
            active: &[usize],
            delivered: usize,
            usage: &mut [[usize; 2]],
            best: &mut usize,
        ) {
            let Some((&i, rest)) = active.split_first() else {
                let v = delivered + self.best(time + 1, cur);
                *best = (*best).max(v);
                return;
            };
            let node = (get(cur, i) - AT) as i64;
            if get(before, i) == WAITING {
                self.choose(time, before, set(cur, i, REJECTED), rest, delivered, usage, best);
            }
            for (dir, limit) in [(0, self.link), (1, self.buffer)] {
                if usage[node as usize][dir] >= limit {
                    continue;
                }
                let next = if dir == 0 { node + 1 } else { node };
                let (code, got) = if next == self.reqs[i].b {
                    (DELIVERED, 1)
                } else if self.alive(i, next, time + 1) {
                    (AT + next as u64, 0)
                } else {
                    continue;
                };
                usage[node as usize][dir] += 1;
                self.choose(time, before, set(cur, i, code), rest, delivered + got, usage, best);
                usage[node as usize][dir] -= 1;
            }
        }
    }

    // Identical requests must be adjacent for the canonical form.
    let mut order: Vec<usize> = (0..reqs.len()).collect();
    order.sort_by_key(|&i| (reqs[i].a, reqs[i].b, reqs[i].t, reqs[i].deadline));
    let sorted: Vec<PacketRequest> = order.iter().map(|&i| reqs[i].clone()).collect();
    let key = |r: &PacketRequest| (r.a, r.b, r.t, r.deadline);
    let group = (0..sorted.len())
        .map(|i| (0..=i).find(|&j| key(&sorted[j]) == key(&sorted[i])).expect("i matches itself"))
        .collect();
    let mut sim = Sim {
        reqs: &sorted,
        group,
        buffer: inst.buffer as usize,
        link: inst.link as usize,
        cap,
        horizon,
        memo: HashMap::new(),
    };
    // Requests that cannot arrive even when sent straight are rejected up front.
    let mut init = 0u64;
    for (i, r) in sorted.iter().enumerate() {
        if r.distance() < 1 || !sim.alive(i, r.a, r.t) {
            init = set(init, i, REJECTED);
        }
    }
    Ok(sim.best(start, init))
}

/// Exits of the `rows × cols` box at the origin: forward across the top row or store
/// across the right column.
fn leaves(v: GridVertex, m: Move, rows: i64, cols: i64) -> bool {
    match m {
        Move::Forward => v.row + 1 >= rows,
        Move::Store => v.col + 1 >= cols,
    }
}

/// Backtracking search for edge-disjoint paths, one per start vertex in order, each
/// leaving the box through its required side, if it has one.
fn route_all(
    starts: &[(GridVertex, Option<Side>)],
    rows: i64,
    cols: i64,
    used: &mut [bool],
    out: &mut Vec<GridPath>,
) -> bool {
    let Some(&(start, want)) = starts.get(out.len()) else {
        return true;
    };
    fn walk(
        v: GridVertex,
        moves: &mut Vec<Move>,
        start: GridVertex,
        want: Option<Side>,
        starts: &[(GridVertex, Option<Side>)],
        rows: i64,
        cols: i64,
        used: &mut [bool],
        out: &mut Vec<GridPath>,
    ) -> bool {
        for m in [Move::Forward, Move::Store] {
            let e = ((v.row * cols + v.col) * 2 + i64::from(m == Move::Store)) as usize;
            if used[e] {
                continue;
            }
            let exits = leaves(v, m, rows, cols);
            let side = if m == Move::Forward { Side::Top } else { Side::Right };
            if exits && want.is_some_and(|w| w != side) {
                continue;
            }
            used[e] = true;
            moves.push(m);
            let done = if exits {
                out.push(GridPath::new(start, moves.clone()));
                if route_all(starts, rows, cols, used, out) {
                    return true;
                }
                out.pop();
                false
            } else {
                walk(v.step(m), moves, start, want, starts, rows, cols, used, out)
            };
            moves.pop();
            used[e] = false;
            if done {
                return true;
            }
        }
        false
    }
    walk(start, &mut Vec::new(), start, want, starts, rows, cols, used, out)
}

/// Largest subset of `origins` (local coordinates inside a `rows × cols` quadrant) that can
/// leave through the top or right side along edge-disjoint paths, by subset enumeration.
pub fn quadrant_feasible_bruteforce(origins: &[GridVertex], rows: i64, cols: i64) -> Result<usize> {
    if rows > 4 || cols > 4 || origins.len() > 6 {
        return Err(Error::SizeLimit(format!(
            "quadrant oracle handles 4x4 and 6 requests, got {rows}x{cols} and {}",
            origins.len()
        )));
    }
    // Origins are interchangeable, so enumerate sub-multisets, largest first.
    let mut distinct: BTreeMap<GridVertex, usize> = BTreeMap::new();
    for &o in origins {
        *distinct.entry(o).or_default() += 1;
    }
    let verts: Vec<(GridVertex, usize)> = distinct.into_iter().collect();
    let mut picks: Vec<Vec<usize>> = vec![Vec::new()];
    for &(_, count) in &verts {
        picks = picks
            .into_iter()
            .flat_map(|p| (0..=count).map(move |k| [p.as_slice(), &[k]].concat()))
            .collect();
    }
    picks.sort_by_key(|p| std::cmp::Reverse(p.iter().sum::<usize>()));
    for pick in picks {
        let starts: Vec<(GridVertex, Option<Side>)> = verts
            .iter()
            .zip(&pick)
            .flat_map(|(&(v, _), &k)| std::iter::repeat_n((v, None), k))
            .collect();
        if route_all(&starts, rows, cols, &mut vec![false; (rows * cols * 2) as usize], &mut Vec::new()) {
            return Ok(starts.len());
        }
    }
    unreachable!("the empty selection is always routable")
}

/// Whether some sub-rectangle with `x` columns and `y` rows holds more than `x + y` origins.
pub fn has_overloaded_rectangle(origins: &[GridVertex], rows: i64, cols: i64) -> bool {
    for r0 in 0..rows {
        for r1 in r0..rows {
            for c0 in 0..cols {
                for c1 in c0..cols {
                    let dem = origins
                        .iter()
                        .filter(|v| (r0..=r1).contains(&v.row) && (c0..=c1).contains(&v.col))
                        .count() as i64;
                    if dem > (r1 - r0 + 1) + (c1 - c0 + 1) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Exact crossbar feasibility over all monotone paths; returns a witness when feasible.
pub fn crossbar_feasible_bruteforce(p: &CrossbarProblem) -> Result<Option<BTreeMap<usize, GridPath>>> {
    if p.rows > 5 || p.cols > 5 || p.requests.len() > 6 {
        return Err(Error::SizeLimit(format!(
            "crossbar oracle handles 5x5 and 6 requests, got {}x{} and {}",
            p.rows,
            p.cols,
            p.requests.len()
        )));
    }
    p.check_entries()?;
    let starts: Vec<(GridVertex, Option<Side>)> = p
        .requests
        .iter()
        .map(|r| (crate::pipeline::crossbar::entry_vertex(r.entry), Some(r.exit)))
        .collect();
    let mut out = Vec::new();
    if route_all(&starts, p.rows, p.cols, &mut vec![false; (p.rows * p.cols * 2) as usize], &mut out) {
        Ok(Some(p.requests.iter().map(|r| r.id).zip(out).collect()))
    } else {
        Ok(None)
    }
}
