//! Detailed routing along sketch paths.
//!
//! SW quadrants are walled: only requests starting there use them. Every other crossing
//! goes through the NE quadrant of a tile. A path entering a tile from the left lands in
//! NW and moves right into NE; one entering from below lands in SE and moves up into NE.
//! NE then leaves right or up as the sketch path dictates. In the last tile of the sketch
//! path NE leaves upward, and the path is cut at its first vertex on the destination row.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::crossbar::{route_crossbar, CrossbarProblem, CrossbarRequest, Entry, Side};
use crate::grid::{GridPath, GridVertex, Move};
use crate::tiling::{Quadrant, QuadrantKind, SketchPath, TileId, Tiling};

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedRequest {
    pub id: usize,
    pub dest_row: i64,
    pub sketch: SketchPath,
    /// Path from the origin through the move that leaves its SW quadrant.
    pub sw_path: GridPath,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetailedOutcome {
    pub paths: BTreeMap<usize, GridPath>,
    /// Requests removed because a quadrant side had more exits than its length.
    pub overflow_dropped: Vec<usize>,
    /// Largest number of paths entering any quadrant through one side.
    pub max_side_entries: usize,
}

struct Progress {
    dest: i64,
    path: GridPath,
    done: bool,
}

impl Progress {
    /// Appends moves, stopping at the first vertex on the destination row.
    fn extend(&mut self, moves: &[Move]) {
        let mut v = self.path.end();
        for &m in moves {
            if v.row == self.dest {
                break;
            }
            v = v.step(m);
            self.path.moves.push(m);
        }
        self.done = v.row == self.dest;
    }
}

fn entry_of(tiling: &Tiling, v: GridVertex, last: Move) -> (Quadrant, Entry) {
    let q = tiling.quadrant_of(v);
    let corner = tiling.quadrant_rect(q).corner();
    let e = match last {
        Move::Forward => Entry::Bottom(v.col - corner.col),
        Move::Store => Entry::Left(v.row - corner.row),
    };
    (q, e)
}

pub fn detailed_route(reqs: &[RoutedRequest], tiling: &Tiling) -> DetailedOutcome {
    let h = tiling.half();
    let mut state: BTreeMap<usize, Progress> = BTreeMap::new();
    let mut pending: BTreeMap<Quadrant, Vec<(usize, Entry)>> = BTreeMap::new();
    let mut sketches: BTreeMap<usize, &SketchPath> = BTreeMap::new();
    let mut tiles: BTreeSet<TileId> = BTreeSet::new();
    let mut out = DetailedOutcome::default();

    let advance = |id: usize, st: &mut Progress, pending: &mut BTreeMap<Quadrant, Vec<(usize, Entry)>>| {
        if !st.done {
            let last = *st.path.moves.last().expect("segments are non-empty");
            let (q, e) = entry_of(tiling, st.path.end(), last);
            pending.entry(q).or_default().push((id, e));
        }
    };

    for r in reqs {
        tiles.extend(r.sketch.tiles.iter().copied());
        sketches.insert(r.id, &r.sketch);
        let mut st = Progress {
            dest: r.dest_row,
            path: GridPath::new(r.sw_path.origin, Vec::new()),
            done: false,
        };
        st.extend(&r.sw_path.moves);
        advance(r.id, &mut st, &mut pending);
        state.insert(r.id, st);
    }

    for &tile in &tiles {
        for which in [QuadrantKind::NW, QuadrantKind::SE, QuadrantKind::NE] {
            let q = Quadrant { tile, which };
            let Some(mut entering) = pending.remove(&q) else {
                continue;
            };
            entering.sort_unstable();
            for side in [Entry::Left(0), Entry::Bottom(0)] {
                let n = entering
                    .iter()
                    .filter(|(_, e)| std::mem::discriminant(e) == std::mem::discriminant(&side))
                    .count();
                out.max_side_entries = out.max_side_entries.max(n);
            }
            let exit_for = |id: usize| match which {
                QuadrantKind::NW => Side::Right,
                QuadrantKind::SE => Side::Top,
                _ => match sketches[&id].next_after(tile) {
                    Some(next) if next.j > tile.j => Side::Right,
                    _ => Side::Top,
                },
            };
            let mut problem = CrossbarProblem {
                rows: h,
                cols: h,
                requests: entering
                    .iter()
                    .map(|&(id, entry)| CrossbarRequest {
                        id,
                        entry,
                        exit: exit_for(id),
                    })
                    .collect(),
            };
            // A side with more exits than vertices sheds its largest ids.
            for side in [Side::Top, Side::Right] {
                let mut ids: Vec<usize> = problem.requests.iter().filter(|r| r.exit == side).map(|r| r.id).collect();
                if ids.len() > h as usize {
                    let drop: BTreeSet<usize> = ids.split_off(h as usize).into_iter().collect();
                    problem.requests.retain(|r| !drop.contains(&r.id));
                    for id in drop {
                        state.remove(&id);
                        out.overflow_dropped.push(id);
                    }
                }
            }
            let routed = route_crossbar(&problem).expect("entries distinct and side counts fit");
            let corner = tiling.quadrant_rect(q).corner();
            for (id, local) in routed {
                let st = state.get_mut(&id).expect("routed request is live");
                debug_assert_eq!(st.path.end(), GridVertex::new(corner.row + local.origin.row, corner.col + local.origin.col));
                st.extend(&local.moves);
                advance(id, st, &mut pending);
            }
        }
    }
    debug_assert!(pending.is_empty(), "paths left the sketch: {pending:?}");
    for (id, st) in state {
        if st.done {
            out.paths.insert(id, st.path);
        } else {
            out.overflow_dropped.push(id);
        }
    }
    out.overflow_dropped.sort_unstable();
    out
}
