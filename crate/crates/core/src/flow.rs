//! Unit-capacity maximum flow (Edmonds–Karp) and vertex-disjoint path counts.

use std::collections::VecDeque;

/// A directed network with integer capacities stored as paired residual arcs.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    head: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u32>,
    next: Vec<usize>,
}

const END: usize = usize::MAX;

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { head: vec![END; nodes], ..Default::default() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, cap: u32) {
        for (a, b, c) in [(u, v, cap), (v, u, 0)] {
            self.to.push(b);
            self.cap.push(c);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    /// Maximum `s`–`t` flow, stopping early once `limit` is reached.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: u32) -> u32 {
        let n = self.head.len();
        let mut flow = 0;
        let mut via = vec![END; n];
        while flow < limit {
            via.iter_mut().for_each(|x| *x = END);
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            'bfs: while let Some(u) = q.pop_front() {
                let mut e = self.head[u];
                while e != END {
                    let v = self.to[e];
                    if self.cap[e] > 0 && !seen[v] {
                        seen[v] = true;
                        via[v] = e;
                        if v == t {
                            break 'bfs;
                        }
                        q.push_back(v);
                    }
                    e = self.next[e];
                }
            }
            if !seen[t] {
                break;
            }
            let mut bottleneck = u32::MAX;
            let mut v = t;
            while v != s {
                let e = via[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let push = bottleneck.min(limit - flow);
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            flow += push;
        }
        flow
    }
}

/// Maximum number of vertex-disjoint paths from `sources` to `sinks` in the
/// undirected graph on `0..n` with the given edges (Menger via node splitting).
pub fn max_vertex_disjoint_paths(n: usize, edges: &[(usize, usize)], sources: &[usize], sinks: &[usize], limit: u32) -> u32 {
    let s = 2 * n;
    let t = 2 * n + 1;
    let mut g = FlowNetwork::new(2 * n + 2);
    for i in 0..n {
        g.add_edge(2 * i, 2 * i + 1, 1);
    }
    for &(u, v) in edges {
        g.add_edge(2 * u + 1, 2 * v, 1);
        g.add_edge(2 * v + 1, 2 * u, 1);
    }
    for &u in sources {
        g.add_edge(s, 2 * u, 1);
    }
    for &u in sinks {
        g.add_edge(2 * u + 1, t, 1);
    }
    g.max_flow(s, t, limit)
}
