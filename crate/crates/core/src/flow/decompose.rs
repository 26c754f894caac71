use std::collections::BTreeMap;

use super::SingleFlow;
use crate::grid::{GridEdge, GridPath, Move};

/// Splits a conservative flow into weighted origin→destination-row paths.
///
/// Each round follows positive-flow edges from the origin (Forward first), subtracts the
/// bottleneck and removes at least one edge from the support.
pub fn decompose(flow: &SingleFlow) -> Vec<(GridPath, f64)> {
    let mut rest: BTreeMap<GridEdge, f64> = flow.edges.iter().filter(|(_, &w)| w > 0.0).map(|(&e, &w)| (e, w)).collect();
    let scale = flow.value.abs().max(1.0);
    let tol = 1e-12 * scale;
    let mut out = Vec::new();
    let mut remaining = flow.value;
    while remaining > tol {
        let mut v = flow.origin;
        let mut moves = Vec::new();
        let mut bottleneck = f64::INFINITY;
        while v.row < flow.dest_row {
            let pick = [Move::Forward, Move::Store]
                .into_iter()
                .map(|m| GridEdge::new(v, m))
                .filter_map(|e| rest.get(&e).map(|&w| (e, w)))
                .max_by(|x, y| x.1.total_cmp(&y.1).then(std::cmp::Ordering::Greater));
            let Some((e, w)) = pick else { break };
            bottleneck = bottleneck.min(w);
            moves.push(e.dir);
            v = e.to();
        }
        if v.row < flow.dest_row || moves.is_empty() {
            break;
        }
        let w = bottleneck.min(remaining);
        let path = GridPath::new(flow.origin, moves);
        for e in path.edges() {
            let left = rest.get_mut(&e).expect("edge on support");
            *left -= w;
            if *left <= tol {
                rest.remove(&e);
            }
        }
        remaining -= w;
        out.push((path, w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridVertex;
    use crate::model::rng::{self, purpose};
    use rand::Rng as _;
    use Move::{Forward as F, Store as S};

    fn origin() -> GridVertex {
        GridVertex::new(0, 0)
    }

    #[test]
    fn single_path() {
        let p = GridPath::new(origin(), vec![F, S, F]);
        let f = SingleFlow::from_paths(0, origin(), 2, vec![(p.clone(), 0.7)]);
        let d = decompose(&f);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].0, p);
        assert!((d[0].1 - 0.7).abs() < 1e-15);
    }

    #[test]
    fn two_disjoint_paths() {
        let p = GridPath::new(origin(), vec![F]);
        let q = GridPath::new(origin(), vec![S, F]);
        let f = SingleFlow::from_paths(0, origin(), 1, vec![(p.clone(), 0.5), (q.clone(), 0.5)]);
        let mut d = decompose(&f);
        d.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(d, vec![(p, 0.5), (q, 0.5)]);
    }

    /// Random conservative flows on a 4×4 window reassemble exactly.
    #[test]
    fn random_flows_recompose() {
        let mut rng = rng::stream(3, purpose::TEST, 0);
        for _ in 0..500 {
            let mut paths = Vec::new();
            for _ in 0..rng.random_range(1..6) {
                let mut moves = vec![F, F];
                for _ in 0..rng.random_range(0..4) {
                    let pos = rng.random_range(0..moves.len());
                    moves.insert(pos, S);
                }
                paths.push((GridPath::new(origin(), moves), rng.random_range(0.01..0.3)));
            }
            let f = SingleFlow::from_paths(0, origin(), 2, paths);
            let d = decompose(&f);
            assert!(d.len() <= f.edges.len());
            let total: f64 = d.iter().map(|(_, w)| w).sum();
            assert!((total - f.value).abs() < 1e-12);
            let back = SingleFlow::from_paths(0, origin(), 2, d);
            for (e, w) in &f.edges {
                assert!((back.flow_on(*e) - w).abs() < 1e-12, "{e:?}");
            }
            assert_eq!(back.edges.len(), f.edges.len());
        }
    }
}
