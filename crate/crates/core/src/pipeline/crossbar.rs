//! Routing through one quadrant: requests enter on the left or bottom side and leave on
//! the top or right side, along edge-disjoint paths with at most one bend.
//!
//! Coordinates are local: rows `0..h`, columns `0..w`. A left entry at row `r` arrives at
//! `(r, 0)`; a bottom entry at column `c` arrives at `(0, c)`. Returned paths start at the
//! arrival vertex and include the final move across the top or right side.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridEdge, GridPath, GridVertex, Move};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entry {
    Left(i64),
    Bottom(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Top,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Top => "top",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossbarRequest {
    pub id: usize,
    pub entry: Entry,
    pub exit: Side,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossbarProblem {
    pub rows: i64,
    pub cols: i64,
    pub requests: Vec<CrossbarRequest>,
}

impl CrossbarProblem {
    pub fn count(&self, side: Side) -> usize {
        self.requests.iter().filter(|r| r.exit == side).count()
    }

    /// The side-count condition: at most `cols` top exits and `rows` right exits.
    pub fn sides_fit(&self) -> bool {
        self.count(Side::Top) <= self.cols as usize && self.count(Side::Right) <= self.rows as usize
    }

    /// Entries must be inside the sides and pairwise distinct.
    pub fn check_entries(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.requests {
            let ok = match r.entry {
                Entry::Left(row) => (0..self.rows).contains(&row),
                Entry::Bottom(col) => (0..self.cols).contains(&col),
            };
            if !ok || !seen.insert(r.entry) {
                return Err(Error::Precondition(format!("request {}: bad or shared entry {:?}", r.id, r.entry)));
            }
        }
        Ok(())
    }
}

pub fn entry_vertex(e: Entry) -> GridVertex {
    match e {
        Entry::Left(r) => GridVertex::new(r, 0),
        Entry::Bottom(c) => GridVertex::new(0, c),
    }
}

/// Exit side of a path ending just outside the `rows × cols` box.
pub fn exit_side(p: &GridPath, rows: i64) -> Side {
    if p.end().row >= rows {
        Side::Top
    } else {
        Side::Right
    }
}

fn straight(from: GridVertex, first: (Move, i64), then: (Move, i64)) -> GridPath {
    let mut moves = vec![first.0; first.1 as usize];
    moves.extend(std::iter::repeat_n(then.0, then.1 as usize));
    GridPath::new(from, moves)
}

/// Edge-disjoint one-bend routing. Left-entering top-exiters are paired with
/// bottom-entering right-exiters, smallest row with smallest column: the pair crosses at
/// the intersection of the row and the column without sharing an edge. Unpaired ones bend
/// in a column (row) that has no bottom (left) entry.
pub fn route_crossbar(p: &CrossbarProblem) -> Result<BTreeMap<usize, GridPath>> {
    p.check_entries()?;
    for (side, avail) in [(Side::Top, p.cols), (Side::Right, p.rows)] {
        let needed = p.count(side);
        if needed > avail as usize {
            return Err(Error::CrossbarInfeasible {
                side: side.name(),
                needed,
                available: avail as usize,
            });
        }
    }
    let (h, w) = (p.rows, p.cols);
    let mut out = BTreeMap::new();
    let mut left_top: Vec<(i64, usize)> = Vec::new();
    let mut bottom_right: Vec<(i64, usize)> = Vec::new();
    let mut used_rows = BTreeSet::new();
    let mut used_cols = BTreeSet::new();
    for r in &p.requests {
        match (r.entry, r.exit) {
            (Entry::Left(row), Side::Right) => {
                out.insert(r.id, straight(GridVertex::new(row, 0), (Move::Store, w), (Move::Forward, 0)));
            }
            (Entry::Bottom(col), Side::Top) => {
                out.insert(r.id, straight(GridVertex::new(0, col), (Move::Forward, h), (Move::Store, 0)));
            }
            (Entry::Left(row), Side::Top) => left_top.push((row, r.id)),
            (Entry::Bottom(col), Side::Right) => bottom_right.push((col, r.id)),
        }
        match r.entry {
            Entry::Left(row) => used_rows.insert(row),
            Entry::Bottom(col) => used_cols.insert(col),
        };
    }
    left_top.sort_unstable();
    bottom_right.sort_unstable();
    let pairs = left_top.len().min(bottom_right.len());
    for (&(row, a), &(col, b)) in left_top.iter().zip(&bottom_right) {
        out.insert(a, straight(GridVertex::new(row, 0), (Move::Store, col), (Move::Forward, h - row)));
        out.insert(b, straight(GridVertex::new(0, col), (Move::Forward, row), (Move::Store, w - col)));
    }
    let mut free_cols = (0..w).filter(|c| !used_cols.contains(c));
    for &(row, id) in &left_top[pairs..] {
        let col = free_cols.next().expect("side counts checked");
        out.insert(id, straight(GridVertex::new(row, 0), (Move::Store, col), (Move::Forward, h - row)));
    }
    let mut free_rows = (0..h).filter(|r| !used_rows.contains(r));
    for &(col, id) in &bottom_right[pairs..] {
        let row = free_rows.next().expect("side counts checked");
        out.insert(id, straight(GridVertex::new(0, col), (Move::Forward, row), (Move::Store, w - col)));
    }
    if !edge_disjoint(out.values()) {
        return Err(Error::Validation("crossbar paths share an edge".into()));
    }
    Ok(out)
}

pub fn edge_disjoint<'a>(paths: impl IntoIterator<Item = &'a GridPath>) -> bool {
    let mut seen: HashSet<GridEdge> = HashSet::new();
    paths.into_iter().flat_map(|p| p.edges()).all(|e| seen.insert(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: usize, entry: Entry, exit: Side) -> CrossbarRequest {
        CrossbarRequest { id, entry, exit }
    }

    #[test]
    fn straight_through() {
        let p = CrossbarProblem {
            rows: 3,
            cols: 3,
            requests: vec![req(0, Entry::Left(1), Side::Right)],
        };
        let out = route_crossbar(&p).unwrap();
        assert_eq!(out[&0].action_string(), "sss");
        assert_eq!(exit_side(&out[&0], 3), Side::Right);
    }

    #[test]
    fn too_many_top_exits() {
        let p = CrossbarProblem {
            rows: 2,
            cols: 2,
            requests: vec![
                req(0, Entry::Left(0), Side::Top),
                req(1, Entry::Left(1), Side::Top),
                req(2, Entry::Bottom(0), Side::Top),
            ],
        };
        assert!(matches!(route_crossbar(&p), Err(Error::CrossbarInfeasible { side: "top", needed: 3, available: 2 })));
    }

    #[test]
    fn pair_crosses_at_corner() {
        let p = CrossbarProblem {
            rows: 2,
            cols: 2,
            requests: vec![req(0, Entry::Left(1), Side::Top), req(1, Entry::Bottom(1), Side::Right)],
        };
        let out = route_crossbar(&p).unwrap();
        assert_eq!(out[&0].action_string(), "sf");
        assert_eq!(out[&1].action_string(), "fs");
    }

    #[test]
    fn shared_entry_rejected() {
        let p = CrossbarProblem {
            rows: 2,
            cols: 2,
            requests: vec![req(0, Entry::Left(1), Side::Top), req(1, Entry::Left(1), Side::Right)],
        };
        assert!(route_crossbar(&p).is_err());
    }
}
