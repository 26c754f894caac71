use std::collections::VecDeque;

/// Directed network with integer capacities, solved with Dinic's algorithm.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    // Edge 2k is the forward arc, 2k+1 its residual twin.
    to: Vec<usize>,
    cap: Vec<i64>,
    adj: Vec<Vec<usize>>,
    original: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: i64,
    /// Flow on each edge, in insertion order.
    pub flows: Vec<i64>,
    /// Nodes reachable from the source in the final residual network.
    pub source_side: Vec<bool>,
    pub cut_capacity: i64,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            ..Self::default()
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds `u → v` and returns its edge index.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64) -> usize {
        assert!(cap >= 0, "negative capacity");
        let k = self.original.len();
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(cap);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
        self.original.push(cap);
        k
    }

    pub fn edge(&self, k: usize) -> (usize, usize, i64) {
        (self.to[2 * k + 1], self.to[2 * k], self.original[k])
    }

    pub fn edge_count(&self) -> usize {
        self.original.len()
    }

    /// Maximum `s → t` flow with a min-cut certificate; panics if the two disagree.
    pub fn max_flow(&self, s: usize, t: usize) -> MaxFlow {
        let mut cap = self.cap.clone();
        let n = self.adj.len();
        let mut value = 0i64;
        if s != t {
            let mut level = vec![-1i32; n];
            let mut iter = vec![0usize; n];
            while self.bfs(&cap, s, t, &mut level) {
                iter.iter_mut().for_each(|i| *i = 0);
                loop {
                    let f = self.dfs(&mut cap, s, t, i64::MAX, &level, &mut iter);
                    if f == 0 {
                        break;
                    }
                    value += f;
                }
            }
        }
        let mut level = vec![-1i32; n];
        self.bfs(&cap, s, t, &mut level);
        let source_side: Vec<bool> = level.iter().map(|&l| l >= 0).collect();
        let flows: Vec<i64> = (0..self.original.len()).map(|k| cap[2 * k + 1]).collect();
        let cut_capacity = (0..self.original.len())
            .filter(|&k| {
                let (u, v, _) = self.edge(k);
                source_side[u] && !source_side[v]
            })
            .map(|k| self.original[k])
            .sum();
        assert_eq!(value, cut_capacity, "max-flow value differs from min-cut capacity");
        MaxFlow {
            value,
            flows,
            source_side,
            cut_capacity,
        }
    }

    fn bfs(&self, cap: &[i64], s: usize, t: usize, level: &mut [i32]) -> bool {
        level.iter_mut().for_each(|l| *l = -1);
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if cap[e] > 0 && level[v] < 0 {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        level[t] >= 0
    }

    fn dfs(&self, cap: &mut [i64], u: usize, t: usize, limit: i64, level: &[i32], iter: &mut [usize]) -> i64 {
        if u == t {
            return limit;
        }
        while iter[u] < self.adj[u].len() {
            let e = self.adj[u][iter[u]];
            let v = self.to[e];
            if cap[e] > 0 && level[v] == level[u] + 1 {
                let f = self.dfs(cap, v, t, limit.min(cap[e]), level, iter);
                if f > 0 {
                    cap[e] -= f;
                    cap[e ^ 1] += f;
                    return f;
                }
            }
            iter[u] += 1;
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rng::{self, purpose};
    use rand::Rng as _;

    #[test]
    fn single_path() {
        let mut g = FlowNetwork::new(3);
        g.add_edge(0, 1, 1);
        g.add_edge(1, 2, 1);
        let r = g.max_flow(0, 2);
        assert_eq!(r.value, 1);
        assert_eq!(r.flows, vec![1, 1]);
    }

    #[test]
    fn corner_with_three_demands() {
        // Super source feeds 3 units into one vertex that has two unit out-edges.
        let mut g = FlowNetwork::new(3);
        g.add_edge(0, 1, 3);
        g.add_edge(1, 2, 1);
        g.add_edge(1, 2, 1);
        assert_eq!(g.max_flow(0, 2).value, 2);
    }

    /// Conservation and capacity on random graphs; value equals the brute-force min cut.
    #[test]
    fn random_graphs_match_brute_force_cut() {
        let mut rng = rng::stream(5, purpose::TEST, 0);
        for _ in 0..300 {
            let n = rng.random_range(2..8);
            let mut g = FlowNetwork::new(n);
            for _ in 0..rng.random_range(0..16) {
                let u = rng.random_range(0..n);
                let v = rng.random_range(0..n);
                if u != v {
                    g.add_edge(u, v, rng.random_range(0..4));
                }
            }
            let r = g.max_flow(0, n - 1);
            let mut balance = vec![0i64; n];
            for k in 0..g.edge_count() {
                let (u, v, c) = g.edge(k);
                assert!(0 <= r.flows[k] && r.flows[k] <= c);
                balance[u] -= r.flows[k];
                balance[v] += r.flows[k];
            }
            for (v, &b) in balance.iter().enumerate().take(n - 1).skip(1) {
                assert_eq!(b, 0, "node {v}");
            }
            assert_eq!(balance[n - 1], r.value);
            let mut best = i64::MAX;
            for mask in 0u32..(1 << n) {
                if mask & 1 == 0 || mask & (1 << (n - 1)) != 0 {
                    continue;
                }
                let cut: i64 = (0..g.edge_count())
                    .map(|k| g.edge(k))
                    .filter(|&(u, v, _)| mask & (1 << u) != 0 && mask & (1 << v) == 0)
                    .map(|(_, _, c)| c)
                    .sum();
                best = best.min(cut);
            }
            assert_eq!(r.value, best);
        }
    }
}
