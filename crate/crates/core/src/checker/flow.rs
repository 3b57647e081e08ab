//! Bipartite supply/demand network between constraint columns and basis
//! "row slots".
//!
//! A column of view `v` with support rows `s` connects to every slot `(g, x)`
//! with `x` in `s` and `g` a block group that view `v` touches. Slot `(g, x)`
//! has capacity `w_g`. By max-flow/min-cut, all column demands `d(c)` can be
//! met iff `d(T) <= sum_g w_g * |rows_g(T)|` for every column set `T`; when they
//! cannot, the columns reachable from the source in the residual network form
//! a violating `T`.

use std::collections::VecDeque;

use crate::constraint::ConstraintMatrix;
use crate::ranks::View;

const INF: i64 = i64::MAX / 4;
const SOURCE: usize = 0;
const SINK: usize = 1;

/// One block group of the basis: per-row capacity and the views touching it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SlotGroup {
    pub capacity: i64,
    pub first: bool,
    pub second: bool,
}

impl SlotGroup {
    fn touches(&self, view: View) -> bool {
        match view {
            View::First => self.first,
            View::Second => self.second,
        }
    }
}

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNet {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    /// Global constraint-column index for each local column.
    members: Vec<usize>,
    /// Edge id of `source -> column` per local column.
    demand_edge: Vec<usize>,
    demand: Vec<i64>,
    flow: i64,
}

impl FlowNet {
    /// Network over `members` with unit demands and no flow yet.
    pub fn new(cm: &ConstraintMatrix, members: &[usize], groups: &[SlotGroup]) -> Self {
        let n = cm.n();
        let k = members.len();
        let slot_base = 2 + k;
        let nodes = slot_base + groups.len() * n;
        let mut net = FlowNet {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
            members: members.to_vec(),
            demand_edge: Vec::with_capacity(k),
            demand: vec![1; k],
            flow: 0,
        };
        let mut used = vec![false; groups.len() * n];
        for (local, &global) in members.iter().enumerate() {
            let col = cm.column(global);
            let e = net.add_edge(SOURCE, 2 + local, 1);
            net.demand_edge.push(e);
            for (gi, g) in groups.iter().enumerate() {
                if g.capacity <= 0 || !g.touches(col.view) {
                    continue;
                }
                for row in col.support.ones() {
                    let slot = gi * n + row;
                    used[slot] = true;
                    net.add_edge(2 + local, slot_base + slot, INF);
                }
            }
        }
        for (slot, &u) in used.iter().enumerate() {
            if u {
                let cap = groups[slot / n].capacity;
                net.add_edge(slot_base + slot, SINK, cap);
            }
        }
        net
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap });
        self.edges.push(Edge { to: from, cap: 0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    pub fn local_of(&self, global: usize) -> Option<usize> {
        self.members.iter().position(|&g| g == global)
    }

    /// Adds `extra` units of demand to a local column. Flow already pushed
    /// stays valid.
    pub fn raise_demand(&mut self, local: usize, extra: i64) {
        self.demand[local] += extra;
        let e = self.demand_edge[local];
        self.edges[e].cap += extra;
    }

    /// Demand that makes a column unsaturable, forcing it onto the source side
    /// of every minimum cut.
    pub fn force(&mut self, local: usize) {
        let bump = INF - self.demand[local];
        self.raise_demand(local, bump);
    }

    /// Augments to a maximum flow (Edmonds-Karp) and returns its value.
    pub fn maximize(&mut self) -> i64 {
        let nodes = self.adj.len();
        let mut prev_edge = vec![usize::MAX; nodes];
        loop {
            prev_edge.iter_mut().for_each(|p| *p = usize::MAX);
            let mut queue = VecDeque::from([SOURCE]);
            let mut seen = vec![false; nodes];
            seen[SOURCE] = true;
            while let Some(u) = queue.pop_front() {
                if u == SINK {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.edges[e].to;
                    if !seen[v] && self.edges[e].cap > 0 {
                        seen[v] = true;
                        prev_edge[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[SINK] {
                return self.flow;
            }
            let mut bottleneck = INF;
            let mut v = SINK;
            while v != SOURCE {
                let e = prev_edge[v];
                bottleneck = bottleneck.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = SINK;
            while v != SOURCE {
                let e = prev_edge[v];
                self.edges[e].cap -= bottleneck;
                self.edges[e ^ 1].cap += bottleneck;
                v = self.edges[e ^ 1].to;
            }
            self.flow += bottleneck;
        }
    }

    /// True when every demand is met by the current flow.
    pub fn saturated(&self) -> bool {
        self.demand_edge.iter().all(|&e| self.edges[e].cap == 0)
    }

    /// Global indices of columns on the source side of the current residual
    /// network. After [`maximize`](Self::maximize) this is a minimum cut.
    pub fn source_side(&self) -> Vec<usize> {
        let nodes = self.adj.len();
        let mut seen = vec![false; nodes];
        seen[SOURCE] = true;
        let mut stack = vec![SOURCE];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if !seen[v] && self.edges[e].cap > 0 {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        (0..self.members.len())
            .filter(|&l| seen[2 + l])
            .map(|l| self.members[l])
            .collect()
    }
}
