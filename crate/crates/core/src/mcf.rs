//! Successive-shortest-path min-cost flow on a bipartite transport network.
//!
//! The network is `s → source_i → target_j → t`, with `s → i` capacities
//! equal to the source weights, `j → t` capacities equal to the target
//! weights, and uncapacitated `i → j` arcs carrying the ground cost. Each
//! augmentation pushes flow along a cheapest residual `s → t` path, so the
//! optimal cost as a function of the total flow value is convex and piecewise
//! linear, and the path costs are exactly its successive slopes. Both the
//! balanced solver in [`crate::transport`] and the parametric scan in
//! [`crate::gw`] drive this engine one path at a time.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
    rev: usize,
}

/// A cheapest residual path from `s` to `t`.
#[derive(Debug, Clone)]
pub struct AugmentingPath {
    /// Cost per unit of flow along the path (sum of residual arc costs).
    pub slope: f64,
    /// Bottleneck residual capacity.
    pub capacity: f64,
    edges: Vec<(usize, usize)>,
}

/// One segment endpoint of the optimal-cost curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    /// Total flow value.
    pub mass: f64,
    /// Minimal cost at that flow value.
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct TransportNetwork {
    graph: Vec<Vec<Edge>>,
    potential: Vec<f64>,
    m: usize,
    n: usize,
    /// `(i, j, position of the i→j edge in graph[node(i)])`.
    arcs: Vec<(usize, usize, usize)>,
    eps: f64,
    flow_value: f64,
}

impl TransportNetwork {
    /// Builds the network. `cost(i, j)` returns `None` for arcs that must not
    /// exist; costs must be finite and nonnegative.
    pub fn new(supply: &[f64], demand: &[f64], mut cost: impl FnMut(usize, usize) -> Option<f64>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let nodes = m + n + 2;
        let scale = supply.iter().sum::<f64>().max(demand.iter().sum::<f64>()).max(f64::MIN_POSITIVE);
        let mut net = Self {
            graph: vec![Vec::new(); nodes],
            potential: vec![0.0; nodes],
            m,
            n,
            arcs: Vec::new(),
            eps: 1e-14 * scale,
            flow_value: 0.0,
        };
        let s = net.source_node();
        let t = net.sink_node();
        for (i, &w) in supply.iter().enumerate() {
            if w > net.eps {
                net.add_edge(s, 1 + i, w, 0.0);
            }
        }
        for (j, &w) in demand.iter().enumerate() {
            if w > net.eps {
                net.add_edge(1 + m + j, t, w, 0.0);
            }
        }
        for (i, &s) in supply.iter().enumerate() {
            if s <= net.eps {
                continue;
            }
            for (j, &d) in demand.iter().enumerate() {
                if d <= net.eps {
                    continue;
                }
                if let Some(c) = cost(i, j) {
                    debug_assert!(c.is_finite() && c >= 0.0, "arc cost must be finite and >= 0");
                    let pos = net.graph[1 + i].len();
                    net.add_edge(1 + i, 1 + m + j, f64::INFINITY, c);
                    net.arcs.push((i, j, pos));
                }
            }
        }
        net
    }

    fn source_node(&self) -> usize {
        0
    }

    fn sink_node(&self) -> usize {
        self.m + self.n + 1
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) {
        let rev_from = self.graph[to].len();
        let rev_to = self.graph[from].len();
        self.graph[from].push(Edge { to, cap, cost, rev: rev_from });
        self.graph[to].push(Edge { to: from, cap: 0.0, cost: -cost, rev: rev_to });
    }

    /// Total flow pushed so far.
    pub fn flow_value(&self) -> f64 {
        self.flow_value
    }

    /// Finds the next cheapest augmenting path, or `None` when `t` is no
    /// longer reachable. Updates node potentials; the network is otherwise
    /// unchanged until [`augment`](Self::augment) is called.
    pub fn shortest_path(&mut self) -> Option<AugmentingPath> {
        let nodes = self.graph.len();
        let (s, t) = (self.source_node(), self.sink_node());
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut done = vec![false; nodes];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(Reverse((OrderedFloat(0.0), s)));
        while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for (k, e) in self.graph[u].iter().enumerate() {
                if e.cap <= self.eps || done[e.to] {
                    continue;
                }
                // Reduced costs are nonnegative up to rounding.
                let rc = (e.cost + self.potential[u] - self.potential[e.to]).max(0.0);
                let nd = d + rc;
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev[e.to] = Some((u, k));
                    heap.push(Reverse((OrderedFloat(nd), e.to)));
                }
            }
        }
        if !dist[t].is_finite() {
            return None;
        }
        for (p, d) in self.potential.iter_mut().zip(&dist) {
            if d.is_finite() {
                *p += d;
            }
        }
        let mut edges = Vec::new();
        let mut capacity = f64::INFINITY;
        let mut slope = 0.0;
        let mut v = t;
        while let Some((u, k)) = prev[v] {
            let e = &self.graph[u][k];
            capacity = capacity.min(e.cap);
            slope += e.cost;
            edges.push((u, k));
            v = u;
        }
        edges.reverse();
        Some(AugmentingPath { slope, capacity, edges })
    }

    /// Pushes `amount` (at most `path.capacity`) along `path`.
    pub fn augment(&mut self, path: &AugmentingPath, amount: f64) {
        debug_assert!(amount <= path.capacity * (1.0 + 1e-12));
        for &(u, k) in &path.edges {
            let (to, rev) = {
                let e = &mut self.graph[u][k];
                e.cap -= amount;
                if e.cap < self.eps {
                    e.cap = 0.0;
                }
                (e.to, e.rev)
            };
            self.graph[to][rev].cap += amount;
        }
        self.flow_value += amount;
    }

    /// Positive flows on the `i → j` arcs.
    pub fn flows(&self) -> Vec<(usize, usize, f64)> {
        self.arcs
            .iter()
            .filter_map(|&(i, j, pos)| {
                let e = &self.graph[1 + i][pos];
                let f = self.graph[e.to][e.rev].cap;
                (f > self.eps).then_some((i, j, f))
            })
            .collect()
    }

    /// Runs augmentations to maximum flow, returning the breakpoints of the
    /// optimal cost curve, starting at `(0, 0)`.
    pub fn breakpoints_to_max_flow(&mut self) -> Vec<Breakpoint> {
        let mut points = vec![Breakpoint { mass: 0.0, cost: 0.0 }];
        while let Some(path) = self.shortest_path() {
            let amount = path.capacity;
            self.augment(&path, amount);
            let last = *points.last().unwrap();
            let next = Breakpoint { mass: self.flow_value, cost: last.cost + amount * path.slope };
            // Merge collinear steps so each breakpoint is a true slope change.
            if points.len() >= 2 {
                let prev = points[points.len() - 2];
                let s_prev = (last.cost - prev.cost) / (last.mass - prev.mass);
                if (s_prev - path.slope).abs() <= 1e-12 * s_prev.abs().max(1.0) {
                    *points.last_mut().unwrap() = next;
                    continue;
                }
            }
            points.push(next);
        }
        points
    }

    /// Dual variables `(u, v)` with `u_i + v_j ≤ c_ij` on every arc and
    /// equality on arcs carrying flow, recomputed from scratch by
    /// Bellman–Ford on the residual bipartite network. Meaningful once every
    /// source (or every target) arc is saturated, as in a balanced solve.
    /// Fails on a negative residual cycle, i.e. a flow that is not optimal.
    pub fn duals(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let (m, n) = (self.m, self.n);
        let mut arcs: Vec<(usize, usize, f64)> = Vec::new();
        let mut cost_scale: f64 = 0.0;
        for &(i, j, pos) in &self.arcs {
            let e = &self.graph[1 + i][pos];
            cost_scale = cost_scale.max(e.cost.abs());
            arcs.push((i, m + j, e.cost));
            if self.graph[e.to][e.rev].cap > self.eps {
                arcs.push((m + j, i, -e.cost));
            }
        }
        let tol = 1e-12 * cost_scale.max(1.0);
        let mut d = vec![0.0; m + n];
        let mut converged = false;
        for _ in 0..=(m + n) {
            let mut changed = false;
            for &(u, v, c) in &arcs {
                if d[u] + c < d[v] - tol {
                    d[v] = d[u] + c;
                    changed = true;
                }
            }
            if !changed {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Solver("negative residual cycle: flow is not optimal".into()));
        }
        let u = d[..m].iter().map(|x| -x).collect();
        let v = d[m..].to_vec();
        Ok((u, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakpoints_are_convex() {
        // Sources at 0 and 10, targets at 1 and 3: the cheap pairings go first.
        let xs = [0.0f64, 10.0];
        let ys = [1.0, 3.0];
        let mut net = TransportNetwork::new(&[1.0, 1.0], &[1.0, 1.0], |i, j| Some((xs[i] - ys[j]).abs()));
        let bp = net.breakpoints_to_max_flow();
        assert_eq!(bp.first().unwrap().mass, 0.0);
        assert!((bp.last().unwrap().mass - 2.0).abs() < 1e-12);
        let slopes: Vec<f64> = bp.windows(2).map(|w| (w[1].cost - w[0].cost) / (w[1].mass - w[0].mass)).collect();
        assert!(slopes.windows(2).all(|s| s[0] <= s[1] + 1e-12));
        // Optimal full matching: 0→1 and 10→3, cost 1 + 7 = 8.
        assert!((bp.last().unwrap().cost - 8.0).abs() < 1e-12);
    }

    #[test]
    fn missing_arcs_limit_flow() {
        let mut net = TransportNetwork::new(&[1.0, 1.0], &[1.0], |i, _| (i == 0).then_some(2.0));
        let bp = net.breakpoints_to_max_flow();
        assert!((net.flow_value() - 1.0).abs() < 1e-12);
        assert!((bp.last().unwrap().cost - 2.0).abs() < 1e-12);
        assert_eq!(net.flows(), vec![(0, 0, 1.0)]);
    }

    #[test]
    fn duals_certify_optimal_flow() {
        let xs = [0.0f64, 2.0, 5.0];
        let ys = [1.0, 4.0];
        let mut net = TransportNetwork::new(&[0.5, 0.25, 0.25], &[0.6, 0.4], |i, j| Some((xs[i] - ys[j]).abs()));
        net.breakpoints_to_max_flow();
        let (u, v) = net.duals().unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert!(u[i] + v[j] <= (xs[i] - ys[j]).abs() + 1e-12);
            }
        }
        for (i, j, _) in net.flows() {
            assert!((u[i] + v[j] - (xs[i] - ys[j]).abs()).abs() < 1e-12);
        }
    }
}
