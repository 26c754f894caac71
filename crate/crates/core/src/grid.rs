//! Untilted space-time grid, the schedule/path correspondence and the schedule validator.
//!
//! Node `v` at time `t` is the grid vertex `(row v, col t − v)`. A store action is a
//! horizontal edge `(r, c) → (r, c+1)` with capacity `B`; a forward action is a vertical
//! edge `(r, c) → (r+1, c)` with capacity `c`. The original time of a vertex is
//! `row + col`, so every move advances time by one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, PacketRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridVertex {
    pub row: i64,
    pub col: i64,
}

impl GridVertex {
    pub const fn new(row: i64, col: i64) -> Self {
        Self { row, col }
    }

    /// Original (tilted) time of this vertex.
    pub fn time(self) -> i64 {
        self.row + self.col
    }

    pub fn step(self, m: Move) -> Self {
        match m {
            Move::Store => Self::new(self.row, self.col + 1),
            Move::Forward => Self::new(self.row + 1, self.col),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    Forward,
    Store,
}

impl Move {
    pub fn symbol(self) -> char {
        match self {
            Move::Store => 's',
            Move::Forward => 'f',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            's' => Some(Move::Store),
            'f' => Some(Move::Forward),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridEdge {
    pub from: GridVertex,
    pub dir: Move,
}

impl GridEdge {
    pub fn new(from: GridVertex, dir: Move) -> Self {
        Self { from, dir }
    }

    pub fn to(self) -> GridVertex {
        self.from.step(self.dir)
    }

    pub fn capacity(self, buffer: u32, link: u32) -> u32 {
        match self.dir {
            Move::Store => buffer,
            Move::Forward => link,
        }
    }
}

/// A monotone up/right path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPath {
    pub origin: GridVertex,
    pub moves: Vec<Move>,
}

impl GridPath {
    pub fn new(origin: GridVertex, moves: Vec<Move>) -> Self {
        Self { origin, moves }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn end(&self) -> GridVertex {
        let f = self.forwards() as i64;
        GridVertex::new(self.origin.row + f, self.origin.col + self.moves.len() as i64 - f)
    }

    pub fn forwards(&self) -> usize {
        self.moves.iter().filter(|&&m| m == Move::Forward).count()
    }

    /// Time at which the path ends, in original coordinates.
    pub fn arrival_time(&self) -> i64 {
        self.end().time()
    }

    pub fn vertices(&self) -> impl Iterator<Item = GridVertex> + '_ {
        std::iter::once(self.origin).chain(self.moves.iter().scan(self.origin, |v, &m| {
            *v = v.step(m);
            Some(*v)
        }))
    }

    pub fn edges(&self) -> impl Iterator<Item = GridEdge> + '_ {
        self.moves.iter().scan(self.origin, |v, &m| {
            let e = GridEdge::new(*v, m);
            *v = v.step(m);
            Some(e)
        })
    }

    /// Whether this path serves `req`: starts at its origin and ends on its row with the last move forward.
    pub fn serves(&self, req: &PacketRequest) -> bool {
        let (origin, dest) = to_grid_request(req);
        self.origin == origin
            && self.forwards() as i64 == dest - origin.row
            && self.moves.last() == Some(&Move::Forward)
    }

    pub fn action_string(&self) -> String {
        self.moves.iter().map(|m| m.symbol()).collect()
    }
}

/// Origin vertex and destination row of a request.
pub fn to_grid_request(req: &PacketRequest) -> (GridVertex, i64) {
    (GridVertex::new(req.a, req.t - req.a), req.b)
}

pub fn path_to_schedule(path: &GridPath) -> Vec<Move> {
    path.moves.clone()
}

/// Grid path of an action sequence for `req`. The sequence must contain exactly `b − a`
/// forwards and end with the forward that reaches `b`.
pub fn schedule_to_path(actions: &[Move], req: &PacketRequest) -> Result<GridPath> {
    let (origin, _) = to_grid_request(req);
    let path = GridPath::new(origin, actions.to_vec());
    if path.forwards() as i64 != req.distance() {
        return Err(Error::MalformedPath(format!(
            "request {}: {} forwards, need {}",
            req.id,
            path.forwards(),
            req.distance()
        )));
    }
    if actions.last() != Some(&Move::Forward) {
        return Err(Error::MalformedPath(format!(
            "request {}: actions continue after reaching the destination",
            req.id
        )));
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Reject,
    Accept(Vec<Move>),
}

/// Per-request decisions, indexed by request id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub decisions: Vec<Decision>,
}

impl Schedule {
    pub fn all_rejected(m: usize) -> Self {
        Self {
            decisions: vec![Decision::Reject; m],
        }
    }

    /// Schedule from accepted paths keyed by request id.
    pub fn from_paths<'a>(m: usize, paths: impl IntoIterator<Item = (usize, &'a GridPath)>) -> Self {
        let mut s = Self::all_rejected(m);
        for (id, p) in paths {
            s.decisions[id] = Decision::Accept(p.moves.clone());
        }
        s
    }

    pub fn throughput(&self) -> usize {
        throughput(self)
    }

    /// `{"<id>": "reject" | "<actions>"}` with ids in increasing order.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<usize, String> = self
            .decisions
            .iter()
            .enumerate()
            .map(|(id, d)| {
                let v = match d {
                    Decision::Reject => "reject".to_string(),
                    Decision::Accept(moves) => moves.iter().map(|m| m.symbol()).collect(),
                };
                (id, v)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&map).expect("string map serializes");
        s.push('\n');
        s
    }

    /// Parses a schedule document for an instance with `m` requests; missing ids are rejections.
    pub fn from_json(bytes: &[u8], m: usize) -> Result<Self> {
        let map: BTreeMap<String, String> = serde_json::from_slice(bytes)?;
        let mut s = Self::all_rejected(m);
        for (k, v) in map {
            let id: usize = k
                .parse()
                .map_err(|_| Error::Validation(format!("schedule key {k:?} is not a request id")))?;
            if id >= m {
                return Err(Error::Validation(format!("schedule names unknown request {id}")));
            }
            s.decisions[id] = if v == "reject" {
                Decision::Reject
            } else {
                let moves = v
                    .chars()
                    .map(|c| {
                        Move::from_symbol(c).ok_or_else(|| {
                            Error::Validation(format!("request {id}: bad action {c:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Decision::Accept(moves)
            };
        }
        Ok(s)
    }
}

pub fn throughput(sched: &Schedule) -> usize {
    sched
        .decisions
        .iter()
        .filter(|d| matches!(d, Decision::Accept(_)))
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// More than `B` packets stored at `node` during step `time`.
    Buffer { node: i64, time: i64, count: u32 },
    /// More than `c` packets sent over `node → node+1` during step `time`.
    Link { node: i64, time: i64, count: u32 },
    /// An accepted packet does not end at its destination.
    Delivery { id: usize, node: i64, time: i64, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Buffer { node, time, count } => {
                write!(f, "buffer violation at node {node}, time {time}: {count} packets stored")
            }
            Violation::Link { node, time, count } => write!(
                f,
                "link violation on edge {node}->{}, time {time}: {count} packets sent",
                node + 1
            ),
            Violation::Delivery { id, node, time, reason } => {
                write!(f, "delivery violation for request {id} at node {node}, time {time}: {reason}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Simulates the schedule step by step and reports every capacity or delivery violation.
pub fn validate_schedule(inst: &Instance, sched: &Schedule) -> Verdict {
    let mut buffers: HashMap<(i64, i64), u32> = HashMap::new();
    let mut links: HashMap<(i64, i64), u32> = HashMap::new();
    let mut violations = Vec::new();
    let last_node = inst.n as i64 - 1;
    if sched.decisions.len() != inst.len() {
        violations.push(Violation::Delivery {
            id: sched.decisions.len().min(inst.len()),
            node: -1,
            time: -1,
            reason: format!(
                "schedule covers {} requests, instance has {}",
                sched.decisions.len(),
                inst.len()
            ),
        });
    }
    for req in &inst.requests {
        let Some(Decision::Accept(actions)) = sched.decisions.get(req.id) else {
            continue;
        };
        let (mut node, mut time) = (req.a, req.t);
        let mut delivered = false;
        for &m in actions {
            if delivered {
                violations.push(Violation::Delivery {
                    id: req.id,
                    node,
                    time,
                    reason: "action after reaching the destination".into(),
                });
                break;
            }
            match m {
                Move::Store => *buffers.entry((node, time)).or_default() += 1,
                Move::Forward => {
                    if node >= last_node {
                        violations.push(Violation::Delivery {
                            id: req.id,
                            node,
                            time,
                            reason: "forward past the last node".into(),
                        });
                        break;
                    }
                    *links.entry((node, time)).or_default() += 1;
                    node += 1;
                }
            }
            time += 1;
            delivered = node == req.b;
        }
        if !delivered && !violations.iter().any(|v| matches!(v, Violation::Delivery { id, .. } if *id == req.id)) {
            violations.push(Violation::Delivery {
                id: req.id,
                node,
                time,
                reason: format!("packet ends at node {node}, destination is {}", req.b),
            });
        }
    }
    for (&(node, time), &count) in &buffers {
        if count > inst.buffer {
            violations.push(Violation::Buffer { node, time, count });
        }
    }
    for (&(node, time), &count) in &links {
        if count > inst.link {
            violations.push(Violation::Link { node, time, count });
        }
    }
    violations.sort();
    Verdict { violations }
}

/// Number of paths on each grid edge.
pub fn edge_loads<'a>(paths: impl IntoIterator<Item = &'a GridPath>) -> HashMap<GridEdge, u32> {
    let mut loads = HashMap::new();
    for p in paths {
        for e in p.edges() {
            *loads.entry(e).or_default() += 1;
        }
    }
    loads
}

/// Grid-side feasibility: at most `B` paths per store edge and `c` per forward edge.
pub fn packing_respects_capacities<'a>(
    paths: impl IntoIterator<Item = &'a GridPath>,
    buffer: u32,
    link: u32,
) -> bool {
    edge_loads(paths)
        .into_iter()
        .all(|(e, load)| load <= e.capacity(buffer, link))
}
