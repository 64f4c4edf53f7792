//! Passenger path precomputation: loopless k-shortest paths by total
//! travel time over the expanded graph, access/egress legs walked at the
//! configured speed.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use crate::model::Instance;

use super::{ArcClass, ExpandedGraph, VertexKind};

#[derive(Debug, Clone)]
pub struct PassengerPath {
    pub request: usize,
    /// Arc ids in traversal order (access, network arcs, egress).
    pub arcs: Vec<usize>,
    /// Leave-origin to arrive-destination span in seconds.
    pub travel_time: f64,
    pub start: f64,
    pub end: f64,
}

impl PassengerPath {
    pub fn vehicle_arcs<'a>(&'a self, graph: &'a ExpandedGraph) -> impl Iterator<Item = usize> + 'a {
        self.arcs
            .iter()
            .copied()
            .filter(|&a| graph.arcs[a].class == ArcClass::Vehicle)
    }

    pub fn contains_arc(&self, arc: usize) -> bool {
        self.arcs.contains(&arc)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PassengerPathSet {
    /// Indexed by request id; empty for freight requests.
    pub paths: Vec<Vec<PassengerPath>>,
    /// Passenger requests with zero feasible paths.
    pub unserviceable: Vec<usize>,
}

impl PassengerPathSet {
    pub fn total_paths(&self) -> usize {
        self.paths.iter().map(Vec::len).sum()
    }
}

/// Computes up to `params.k` shortest simple paths per passenger request.
/// Must run before access/egress pruning removes passenger vertices.
pub fn precompute_passenger_paths(graph: &ExpandedGraph, instance: &Instance) -> PassengerPathSet {
    let mut set = PassengerPathSet { paths: vec![Vec::new(); instance.requests.len()], unserviceable: Vec::new() };
    let weights = arc_durations(graph, instance);
    for (r, _req) in instance.passenger_requests() {
        let adjacency = passenger_adjacency(graph, r);
        let origin = graph.origin_vertex[r];
        let destination = graph.destination_vertex[r];
        let found = k_shortest_paths(graph, &adjacency, &weights, origin, destination, instance.params.k);
        if found.is_empty() {
            set.unserviceable.push(r);
        }
        for (arcs, weight) in found {
            let (start, end) = span(graph, instance, r, &arcs, weight);
            set.paths[r].push(PassengerPath { request: r, arcs, travel_time: weight, start, end });
        }
    }
    set
}

/// Travel duration of each arc in seconds: time delta for vehicle and
/// holding arcs, zero for transit, walk time for access/egress.
fn arc_durations(graph: &ExpandedGraph, instance: &Instance) -> Vec<f64> {
    graph
        .arcs
        .iter()
        .map(|arc| match arc.class {
            ArcClass::Vehicle | ArcClass::Holding => {
                let t0 = graph.vertices[arc.tail].time(instance);
                let t1 = graph.vertices[arc.head].time(instance);
                (t1 - t0) as f64
            }
            ArcClass::Transit => 0.0,
            ArcClass::Access => {
                let r = arc.request.expect("access arc without request");
                let stop = graph.vertices[arc.head].stop().expect("access head is a stop");
                instance.endpoint_distance_m(instance.requests[r].origin, stop) / instance.params.walk_speed
            }
            ArcClass::Egress => {
                let r = arc.request.expect("egress arc without request");
                let stop = graph.vertices[arc.tail].stop().expect("egress tail is a stop");
                instance.endpoint_distance_m(instance.requests[r].destination, stop) / instance.params.walk_speed
            }
            ArcClass::Dummy | ArcClass::Segment => f64::INFINITY,
        })
        .collect()
}

fn span(
    graph: &ExpandedGraph,
    instance: &Instance,
    request: usize,
    arcs: &[usize],
    weight: f64,
) -> (f64, f64) {
    let first = &graph.arcs[arcs[0]];
    let board = graph.vertices[first.head].time(instance) as f64;
    let walk_in = match first.class {
        ArcClass::Access => {
            let stop = graph.vertices[first.head].stop().unwrap();
            instance.endpoint_distance_m(instance.requests[request].origin, stop) / instance.params.walk_speed
        }
        _ => 0.0,
    };
    let start = board - walk_in;
    (start, start + weight)
}

/// Arcs a passenger request may traverse: the shared vehicle, holding and
/// transit arcs plus its own access/egress arcs.
fn passenger_adjacency(graph: &ExpandedGraph, request: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); graph.vertices.len()];
    for (id, arc) in graph.arcs.iter().enumerate() {
        if arc.pruned {
            continue;
        }
        let usable = match arc.class {
            ArcClass::Vehicle | ArcClass::Holding | ArcClass::Transit => true,
            ArcClass::Access | ArcClass::Egress => arc.request == Some(request),
            ArcClass::Dummy | ArcClass::Segment => false,
        };
        if usable {
            out[arc.tail].push(id);
        }
    }
    out
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap on (dist, vertex).
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over an arc-id adjacency with banned arcs/vertices. Returns the
/// arc sequence of one shortest path and its weight.
fn dijkstra(
    graph: &ExpandedGraph,
    adjacency: &[Vec<usize>],
    weights: &[f64],
    source: usize,
    target: usize,
    banned_arcs: &HashSet<usize>,
    banned_vertices: &HashSet<usize>,
) -> Option<(Vec<usize>, f64)> {
    let n = graph.vertices.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent_arc = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    if banned_vertices.contains(&source) {
        return None;
    }
    dist[source] = 0.0;
    heap.push(HeapEntry { dist: 0.0, vertex: source });
    while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        if v == target {
            break;
        }
        for &arc_id in &adjacency[v] {
            if banned_arcs.contains(&arc_id) {
                continue;
            }
            let arc = &graph.arcs[arc_id];
            if banned_vertices.contains(&arc.head) {
                continue;
            }
            let nd = d + weights[arc_id];
            if nd < dist[arc.head] {
                dist[arc.head] = nd;
                parent_arc[arc.head] = arc_id;
                heap.push(HeapEntry { dist: nd, vertex: arc.head });
            }
        }
    }
    if dist[target].is_infinite() {
        return None;
    }
    let mut arcs = Vec::new();
    let mut v = target;
    while v != source {
        let a = parent_arc[v];
        arcs.push(a);
        v = graph.arcs[a].tail;
    }
    arcs.reverse();
    Some((arcs, dist[target]))
}

/// Candidate ordering: weight, then fewer arcs, then lexicographic vertex ids.
#[derive(PartialEq)]
struct Candidate {
    weight: f64,
    vertices: Vec<usize>,
    arcs: Vec<usize>,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then_with(|| self.arcs.len().cmp(&other.arcs.len()))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn vertex_sequence(graph: &ExpandedGraph, source: usize, arcs: &[usize]) -> Vec<usize> {
    let mut seq = vec![source];
    for &a in arcs {
        seq.push(graph.arcs[a].head);
    }
    seq
}

/// Yen's loopless k-shortest paths.
pub(crate) fn k_shortest_paths(
    graph: &ExpandedGraph,
    adjacency: &[Vec<usize>],
    weights: &[f64],
    source: usize,
    target: usize,
    k: usize,
) -> Vec<(Vec<usize>, f64)> {
    let mut accepted: Vec<Candidate> = Vec::new();
    let first = match dijkstra(graph, adjacency, weights, source, target, &HashSet::new(), &HashSet::new()) {
        Some((arcs, weight)) => Candidate { weight, vertices: vertex_sequence(graph, source, &arcs), arcs },
        None => return Vec::new(),
    };
    accepted.push(first);
    let mut candidates: BTreeSet<Candidate> = BTreeSet::new();

    while accepted.len() < k {
        let last = &accepted[accepted.len() - 1];
        let last_arcs = last.arcs.clone();
        let last_vertices = last.vertices.clone();
        for spur_idx in 0..last_arcs.len() {
            let spur_node = last_vertices[spur_idx];
            let root_arcs = &last_arcs[..spur_idx];
            let root_weight: f64 = root_arcs.iter().map(|&a| weights[a]).sum();

            let mut banned_arcs: HashSet<usize> = HashSet::new();
            for p in &accepted {
                if p.arcs.len() > spur_idx && p.arcs[..spur_idx] == *root_arcs {
                    banned_arcs.insert(p.arcs[spur_idx]);
                }
            }
            let banned_vertices: HashSet<usize> = last_vertices[..spur_idx].iter().copied().collect();

            if let Some((spur_arcs, spur_weight)) =
                dijkstra(graph, adjacency, weights, spur_node, target, &banned_arcs, &banned_vertices)
            {
                let mut arcs = root_arcs.to_vec();
                arcs.extend(spur_arcs);
                let cand = Candidate {
                    weight: root_weight + spur_weight,
                    vertices: vertex_sequence(graph, source, &arcs),
                    arcs,
                };
                let dup = accepted.iter().any(|p| p.vertices == cand.vertices);
                if !dup {
                    candidates.insert(cand);
                }
            }
        }
        match candidates.pop_first() {
            Some(best) => accepted.push(best),
            None => break,
        }
    }

    accepted.into_iter().map(|c| (c.arcs, c.weight)).collect()
}

/// Asserts path incidence consistency: arcs chain tail-to-head from the
/// request origin to its destination.
pub fn path_is_chained(graph: &ExpandedGraph, request: usize, arcs: &[usize]) -> bool {
    if arcs.is_empty() {
        return false;
    }
    let mut at = graph.origin_vertex[request];
    for &a in arcs {
        if graph.arcs[a].tail != at {
            return false;
        }
        at = graph.arcs[a].head;
    }
    at == graph.destination_vertex[request]
        && matches!(graph.vertices[graph.destination_vertex[request]].kind, VertexKind::Destination(r) if r == request)
}
