//! Quadrant routing: a maximum set of requests with edge-disjoint paths from their origins
//! to the top or right side of a SW quadrant, at unit capacities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::crossbar::Side;
use crate::flow::FlowNetwork;
use crate::grid::{GridPath, GridVertex, Move};
use crate::tiling::Rect;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadrantRouting {
    /// Paths from each accepted origin through the move that leaves the quadrant.
    pub paths: BTreeMap<usize, GridPath>,
    /// Requests beyond the maximum flow.
    pub rejected: Vec<usize>,
    /// Requests removed to respect the per-side limit.
    pub side_dropped: Vec<usize>,
    /// Cardinality of the maximum flow, before the side limit.
    pub max_flow: usize,
}

/// Routes `origins` (request id, origin inside `rect`) out of the quadrant. Requests at a
/// shared origin are served in increasing id order. With `side_limit`, at most that many
/// paths may leave through each side; the largest ids are dropped first.
pub fn quadrant_route(origins: &[(usize, GridVertex)], rect: Rect, side_limit: Option<usize>) -> QuadrantRouting {
    let (h, w) = (rect.rows as usize, rect.cols as usize);
    let cells = h * w;
    let (s, t) = (cells, cells + 1);
    let local = |v: GridVertex| (v.row - rect.row0) as usize * w + (v.col - rect.col0) as usize;

    let mut at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(id, v) in origins {
        assert!(rect.contains(v), "origin {v:?} outside quadrant");
        at.entry(local(v)).or_default().push(id);
    }
    let mut net = FlowNetwork::new(cells + 2);
    // out[v] = [(edge index, move)] for the forward and store edges leaving v.
    let mut out: Vec<Vec<(usize, Move)>> = vec![Vec::new(); cells];
    for r in 0..h {
        for c in 0..w {
            let v = r * w + c;
            let up = if r + 1 < h { v + w } else { t };
            out[v].push((net.add_edge(v, up, 1), Move::Forward));
            let right = if c + 1 < w { v + 1 } else { t };
            out[v].push((net.add_edge(v, right, 1), Move::Store));
        }
    }
    for (&v, ids) in &at {
        net.add_edge(s, v, ids.len() as i64);
    }
    let flow = net.max_flow(s, t);
    let mut left: Vec<i64> = flow.flows.clone();

    let mut result = QuadrantRouting {
        max_flow: flow.value as usize,
        ..Default::default()
    };
    for (&v0, ids) in &at {
        let mut ids = ids.clone();
        ids.sort_unstable();
        for id in ids {
            // Walk along remaining flow; conservation guarantees we reach the sink.
            let mut v = v0;
            let mut moves = Vec::new();
            let mut routed = false;
            loop {
                let Some(&(e, m)) = out[v].iter().find(|&&(e, _)| left[e] > 0) else {
                    break;
                };
                left[e] -= 1;
                moves.push(m);
                let (_, to, _) = net.edge(e);
                if to == t {
                    routed = true;
                    break;
                }
                v = to;
            }
            if routed {
                let origin = GridVertex::new(rect.row0 + (v0 / w) as i64, rect.col0 + (v0 % w) as i64);
                result.paths.insert(id, GridPath::new(origin, moves));
            } else {
                debug_assert!(moves.is_empty());
                result.rejected.push(id);
            }
        }
    }
    if let Some(limit) = side_limit {
        for side in [Side::Top, Side::Right] {
            let on_side: Vec<usize> = result
                .paths
                .iter()
                .filter(|(_, p)| (p.end().row > rect.row1()) == (side == Side::Top))
                .map(|(&id, _)| id)
                .collect();
            for &id in on_side.iter().skip(limit) {
                result.paths.remove(&id);
                result.side_dropped.push(id);
            }
        }
        result.side_dropped.sort_unstable();
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(n: i64) -> Rect {
        Rect {
            row0: 0,
            col0: 0,
            rows: n,
            cols: n,
        }
    }

    #[test]
    fn single_request_goes_straight() {
        let r = quadrant_route(&[(7, GridVertex::new(1, 1))], rect(3), None);
        assert_eq!(r.paths[&7].action_string(), "ff");
    }

    #[test]
    fn corner_holds_two() {
        let o = GridVertex::new(2, 2);
        let r = quadrant_route(&[(0, o), (1, o), (2, o)], rect(3), None);
        assert_eq!(r.max_flow, 2);
        assert_eq!(r.paths.keys().copied().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(r.rejected, vec![2]);
    }

    #[test]
    fn side_limit_drops_largest() {
        let reqs: Vec<(usize, GridVertex)> = (0..3).map(|c| (c as usize, GridVertex::new(0, c))).collect();
        let r = quadrant_route(&reqs, rect(3), Some(1));
        assert_eq!(r.paths.len() + r.side_dropped.len(), 3);
        let tops = r.paths.values().filter(|p| p.end().row == 3).count();
        let rights = r.paths.len() - tops;
        assert!(tops <= 1 && rights <= 1);
    }
}
