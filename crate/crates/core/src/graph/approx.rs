//! Static lower bounds for pricing: minimum-cost terminal-to-terminal
//! path costs in the time-collapsed network, and the per-vertex distance
//! estimates they induce for the A* pricing search.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::model::Instance;

use super::{ArcClass, ExpandedGraph};

/// Terminal-to-terminal minimum routing costs in the time-collapsed
/// network: the union of all route adjacencies with the minimum vehicle
/// arc cost per ordered stop pair.
#[derive(Debug, Clone)]
pub struct StaticCostTable {
    pub terminals: Vec<usize>,
    terminal_pos: Vec<Option<usize>>,
    /// cost[from][to] over terminal positions; infinity when disconnected.
    cost: Vec<Vec<f64>>,
}

impl StaticCostTable {
    /// Minimum collapsed-network cost between two terminal stops.
    pub fn between(&self, from_stop: usize, to_stop: usize) -> f64 {
        match (self.terminal_pos[from_stop], self.terminal_pos[to_stop]) {
            (Some(a), Some(b)) => self.cost[a][b],
            _ => f64::INFINITY,
        }
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    stop: usize,
}

impl Eq for Entry {}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.stop.cmp(&self.stop))
    }
}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Builds the collapsed cost table with one Dijkstra per terminal.
pub fn static_cost_table(instance: &Instance) -> StaticCostTable {
    let network = &instance.network;
    let n = network.stop_count();
    // Minimum vehicle arc cost per ordered consecutive stop pair.
    let mut collapsed: HashMap<(usize, usize), f64> = HashMap::new();
    for h in 0..network.routes.len() {
        let seq = network.route_stop_indices(h);
        for w in seq.windows(2) {
            let (a, _) = w[0];
            let (b, _) = w[1];
            let cost = instance.costs.vehicle_km_rate * network.distance_km(a, b);
            collapsed
                .entry((a, b))
                .and_modify(|c| *c = c.min(cost))
                .or_insert(cost);
        }
    }
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut keys: Vec<_> = collapsed.keys().copied().collect();
    keys.sort_unstable();
    for (a, b) in keys {
        adjacency[a].push((b, collapsed[&(a, b)]));
    }

    let terminals = network.terminal_indices();
    let mut terminal_pos = vec![None; n];
    for (i, &t) in terminals.iter().enumerate() {
        terminal_pos[t] = Some(i);
    }
    let mut cost = vec![vec![f64::INFINITY; terminals.len()]; terminals.len()];
    for (i, &src) in terminals.iter().enumerate() {
        let mut dist = vec![f64::INFINITY; n];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Entry { dist: 0.0, stop: src });
        while let Some(Entry { dist: d, stop }) = heap.pop() {
            if d > dist[stop] {
                continue;
            }
            for &(next, c) in &adjacency[stop] {
                let nd = d + c;
                if nd < dist[next] {
                    dist[next] = nd;
                    heap.push(Entry { dist: nd, stop: next });
                }
            }
        }
        for (j, &t) in terminals.iter().enumerate() {
            cost[i][j] = dist[t];
        }
    }
    StaticCostTable { terminals, terminal_pos, cost }
}

/// Admissible per-vertex cost-to-destination estimates for one freight
/// request: zero at the destination, collapsed-network cost plus the
/// cheapest egress for terminal representations, and for the origin the
/// minimum over its access connections and the dummy arc.
pub fn heuristic_estimates(
    graph: &ExpandedGraph,
    _instance: &Instance,
    table: &StaticCostTable,
    request: usize,
) -> Vec<f64> {
    let mut estimate = vec![f64::INFINITY; graph.vertices.len()];
    estimate[graph.destination_vertex[request]] = 0.0;

    // Egress predecessors of the destination with their arc costs.
    let egress: Vec<(usize, f64)> = graph
        .arcs
        .iter()
        .filter(|a| !a.pruned && a.class == ArcClass::Egress && a.request == Some(request))
        .map(|a| (graph.vertices[a.tail].stop().expect("egress tail is a stop"), a.cost))
        .collect();

    // One value per terminal stop, shared by all its representations.
    let mut per_stop: HashMap<usize, f64> = HashMap::new();
    for &t in &table.terminals {
        let mut best = f64::INFINITY;
        for &(egress_stop, c) in &egress {
            let via = table.between(t, egress_stop) + c;
            if via < best {
                best = via;
            }
        }
        per_stop.insert(t, best);
    }
    for (id, v) in graph.live_vertices() {
        if graph.terminal_vertex[id] {
            if let Some(stop) = v.stop() {
                estimate[id] = per_stop[&stop];
            }
        }
    }

    let origin = graph.origin_vertex[request];
    let mut origin_est = f64::INFINITY;
    for arc in &graph.arcs {
        if arc.pruned || arc.request != Some(request) {
            continue;
        }
        match arc.class {
            ArcClass::Access => {
                let via = arc.cost + estimate[arc.head];
                if via < origin_est {
                    origin_est = via;
                }
            }
            ArcClass::Dummy => {
                if arc.cost < origin_est {
                    origin_est = arc.cost;
                }
            }
            _ => {}
        }
    }
    estimate[origin] = origin_est;
    estimate
}
