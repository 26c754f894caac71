//! Flow machinery on grid windows: max-flow/min-cut, fractional multicommodity flow with
//! bounded path length, path decomposition and randomized rounding.

mod decompose;
mod maxflow;
mod mcf;
mod rounding;

pub use decompose::decompose;
pub use maxflow::{FlowNetwork, MaxFlow};
pub use mcf::{check_mcf, max_throughput_mcf, McfParams, Window};
pub use rounding::{randomized_round, round_single};

use std::collections::BTreeMap;

use crate::grid::{GridEdge, GridPath, GridVertex};

/// Uniform edge capacities of a grid window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCaps {
    pub store: f64,
    pub forward: f64,
}

impl EdgeCaps {
    pub fn uniform(c: f64) -> Self {
        Self { store: c, forward: c }
    }

    pub fn of(&self, e: GridEdge) -> f64 {
        match e.dir {
            crate::grid::Move::Store => self.store,
            crate::grid::Move::Forward => self.forward,
        }
    }
}

/// Flow of one request from its origin to its destination row.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleFlow {
    pub id: usize,
    pub origin: GridVertex,
    pub dest_row: i64,
    pub edges: BTreeMap<GridEdge, f64>,
    pub value: f64,
    pub paths: Vec<(GridPath, f64)>,
}

impl SingleFlow {
    pub fn empty(id: usize, origin: GridVertex, dest_row: i64) -> Self {
        Self {
            id,
            origin,
            dest_row,
            edges: BTreeMap::new(),
            value: 0.0,
            paths: Vec::new(),
        }
    }

    /// Flow made of weighted paths; the edge map is their sum.
    pub fn from_paths(id: usize, origin: GridVertex, dest_row: i64, paths: Vec<(GridPath, f64)>) -> Self {
        let mut edges = BTreeMap::new();
        let mut value = 0.0;
        for (p, w) in &paths {
            debug_assert_eq!(p.origin, origin);
            value += w;
            for e in p.edges() {
                *edges.entry(e).or_insert(0.0) += w;
            }
        }
        Self {
            id,
            origin,
            dest_row,
            edges,
            value,
            paths,
        }
    }

    /// Flow given by its edge map; the path decomposition is computed.
    pub fn from_edges(id: usize, origin: GridVertex, dest_row: i64, edges: BTreeMap<GridEdge, f64>) -> Self {
        let mut f = Self {
            id,
            origin,
            dest_row,
            edges,
            value: 0.0,
            paths: Vec::new(),
        };
        f.value = f.out_flow(origin);
        f.paths = decompose(&f);
        f
    }

    pub fn flow_on(&self, e: GridEdge) -> f64 {
        self.edges.get(&e).copied().unwrap_or(0.0)
    }

    pub fn out_flow(&self, v: GridVertex) -> f64 {
        self.flow_on(GridEdge::new(v, crate::grid::Move::Forward))
            + self.flow_on(GridEdge::new(v, crate::grid::Move::Store))
    }

    /// Length of the longest path in the support.
    pub fn longest_support_path(&self) -> usize {
        let mut best: BTreeMap<GridVertex, usize> = BTreeMap::new();
        let mut longest = 0;
        // Every edge advances time by one, so tails sorted by time are in topological order.
        let mut edges: Vec<(&GridEdge, &f64)> = self.edges.iter().filter(|(_, &w)| w > 0.0).collect();
        edges.sort_by_key(|(e, _)| (e.from.time(), e.from.row));
        for (e, _) in edges {
            let here = best.get(&e.from).copied().unwrap_or(0);
            let there = best.entry(e.to()).or_insert(0);
            *there = (*there).max(here + 1);
            longest = longest.max(here + 1);
        }
        longest
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FractionalMCF {
    pub flows: Vec<SingleFlow>,
    /// Certified upper bound on the optimum of the same problem.
    pub upper_bound: f64,
}

impl FractionalMCF {
    pub fn throughput(&self) -> f64 {
        self.flows.iter().map(|f| f.value).sum()
    }

    pub fn p_max(&self) -> usize {
        self.flows
            .iter()
            .map(SingleFlow::longest_support_path)
            .max()
            .unwrap_or(0)
    }

    pub fn cumulative(&self) -> BTreeMap<GridEdge, f64> {
        let mut total = BTreeMap::new();
        for f in &self.flows {
            for (&e, &w) in &f.edges {
                *total.entry(e).or_insert(0.0) += w;
            }
        }
        total
    }

    /// Relative gap between the returned throughput and the certified upper bound.
    pub fn gap(&self) -> f64 {
        if self.upper_bound <= 0.0 {
            0.0
        } else {
            (1.0 - self.throughput() / self.upper_bound).max(0.0)
        }
    }
}

/// Accepted requests with one path each; rejected requests are absent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntegralPacking {
    pub paths: BTreeMap<usize, GridPath>,
}

impl IntegralPacking {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}
