//! Graph construction and preprocessing passes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::GraphError;
use crate::model::{Instance, Request, Time};

use super::{Arc, ArcClass, ExpandedGraph, Layer, Vertex, VertexKind};

/// Builds the expanded multi-layered graph: vehicle layers, the holding
/// layer, transit arcs between them, request origin/destination vertices,
/// and time-feasible access/egress arcs (freight connects to terminal
/// representations only; the relocation/nearest-terminal pruning happens
/// in [`prune_access_egress`]).
pub fn expand(instance: &Instance) -> ExpandedGraph {
    let network = &instance.network;
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut stop_vertex: HashMap<(usize, Time, u32), usize> = HashMap::new();
    let mut arcs: Vec<Arc> = Vec::new();

    let add_vertex = |vertices: &mut Vec<Vertex>, kind: VertexKind| -> usize {
        let id = vertices.len();
        vertices.push(Vertex { kind, pruned: false });
        id
    };

    // Vehicle layers.
    for (h, _) in network.routes.iter().enumerate() {
        for (stop, time) in network.route_stop_indices(h) {
            let id = add_vertex(&mut vertices, VertexKind::Stop { stop, time, layer: Layer::Vehicle(h) });
            stop_vertex.insert((stop, time, Layer::Vehicle(h).code()), id);
        }
    }

    // Holding layer: one vertex per (stop, time) at which any vehicle arrives.
    let mut arrival_times: BTreeMap<usize, BTreeSet<Time>> = BTreeMap::new();
    for h in 0..network.routes.len() {
        for (stop, time) in network.route_stop_indices(h) {
            arrival_times.entry(stop).or_default().insert(time);
        }
    }
    for (&stop, times) in &arrival_times {
        for &time in times {
            let id = add_vertex(&mut vertices, VertexKind::Stop { stop, time, layer: Layer::Holding });
            stop_vertex.insert((stop, time, Layer::Holding.code()), id);
        }
    }

    // Request origins and destinations.
    let mut origin_vertex = Vec::with_capacity(instance.requests.len());
    let mut destination_vertex = Vec::with_capacity(instance.requests.len());
    for (r, _) in instance.requests.iter().enumerate() {
        origin_vertex.push(add_vertex(&mut vertices, VertexKind::Origin(r)));
        destination_vertex.push(add_vertex(&mut vertices, VertexKind::Destination(r)));
    }

    // Vehicle arcs along each route.
    for h in 0..network.routes.len() {
        let seq = network.route_stop_indices(h);
        for w in seq.windows(2) {
            let (s0, t0) = w[0];
            let (s1, t1) = w[1];
            let tail = stop_vertex[&(s0, t0, Layer::Vehicle(h).code())];
            let head = stop_vertex[&(s1, t1, Layer::Vehicle(h).code())];
            let cost = instance.costs.vehicle_km_rate * network.distance_km(s0, s1);
            arcs.push(Arc { tail, head, class: ArcClass::Vehicle, cost, vehicle: Some(h), request: None, pruned: false });
        }
    }

    // Holding arcs between consecutive arrival times of one stop.
    for (&stop, times) in &arrival_times {
        let sorted: Vec<Time> = times.iter().copied().collect();
        for w in sorted.windows(2) {
            let tail = stop_vertex[&(stop, w[0], Layer::Holding.code())];
            let head = stop_vertex[&(stop, w[1], Layer::Holding.code())];
            arcs.push(Arc { tail, head, class: ArcClass::Holding, cost: 0.0, vehicle: None, request: None, pruned: false });
        }
    }

    // Transit arcs, both directions between a vehicle vertex and its
    // holding representation.
    for h in 0..network.routes.len() {
        for (stop, time) in network.route_stop_indices(h) {
            let up = stop_vertex[&(stop, time, Layer::Vehicle(h).code())];
            let hold = stop_vertex[&(stop, time, Layer::Holding.code())];
            let cost = instance.costs.transit_cost;
            arcs.push(Arc { tail: up, head: hold, class: ArcClass::Transit, cost, vehicle: None, request: None, pruned: false });
            arcs.push(Arc { tail: hold, head: up, class: ArcClass::Transit, cost, vehicle: None, request: None, pruned: false });
        }
    }

    // Access and egress arcs. Passengers connect to any holding vertex they
    // can walk to in time; freight connects to terminal representations.
    let holding_ids: Vec<usize> = arrival_times
        .iter()
        .flat_map(|(&stop, times)| {
            times
                .iter()
                .map(move |&t| (stop, t))
        })
        .map(|(stop, t)| stop_vertex[&(stop, t, Layer::Holding.code())])
        .collect();

    for (r, req) in instance.requests.iter().enumerate() {
        let o = origin_vertex[r];
        let d = destination_vertex[r];
        for &v in &holding_ids {
            let (stop, time) = match vertices[v].kind {
                VertexKind::Stop { stop, time, .. } => (stop, time),
                _ => unreachable!(),
            };
            if req.is_passenger() {
                let walk_in = instance.endpoint_distance_m(req.origin, stop) / instance.params.walk_speed;
                if (time - req.earliest) as f64 >= walk_in {
                    arcs.push(Arc { tail: o, head: v, class: ArcClass::Access, cost: 0.0, vehicle: None, request: Some(r), pruned: false });
                }
                let walk_out = instance.endpoint_distance_m(req.destination, stop) / instance.params.walk_speed;
                if (req.latest - time) as f64 >= walk_out {
                    arcs.push(Arc { tail: v, head: d, class: ArcClass::Egress, cost: 0.0, vehicle: None, request: Some(r), pruned: false });
                }
            } else if network.is_terminal(stop) {
                arcs.push(Arc { tail: o, head: v, class: ArcClass::Access, cost: instance.costs.access_cost, vehicle: None, request: Some(r), pruned: false });
                arcs.push(Arc { tail: v, head: d, class: ArcClass::Egress, cost: instance.costs.egress_cost, vehicle: None, request: Some(r), pruned: false });
            }
        }
    }

    let terminal_vertex = vertices
        .iter()
        .map(|v| v.stop().map(|s| network.is_terminal(s)).unwrap_or(false))
        .collect();

    let vertex_count = vertices.len();
    ExpandedGraph {
        vertices,
        arcs,
        origin_vertex,
        destination_vertex,
        stop_vertex,
        contraction: HashMap::new(),
        segment_members: HashMap::new(),
        terminal_vertex,
        freight_arc: Vec::new(),
        freight_out: vec![Vec::new(); vertex_count],
        freight_in: Vec::new(),
    }
}

/// Adds one dummy arc per freight request with cost penalty / demand, so
/// that routing the request over it costs exactly the rejection penalty.
pub fn add_dummy_arcs(graph: &mut ExpandedGraph, instance: &Instance) {
    for (r, req) in instance.freight_requests() {
        let cost = instance.rejection_penalty(req) / req.demand;
        graph.arcs.push(Arc {
            tail: graph.origin_vertex[r],
            head: graph.destination_vertex[r],
            class: ArcClass::Dummy,
            cost,
            vehicle: None,
            request: Some(r),
            pruned: false,
        });
    }
}

/// Contracts the vehicle arcs between consecutive terminals on each route
/// into segment arcs whose cost is the sum of the contracted arc costs.
pub fn contract_segments(graph: &mut ExpandedGraph, instance: &Instance) -> Result<(), GraphError> {
    let network = &instance.network;
    for h in 0..network.routes.len() {
        let seq = network.route_stop_indices(h);
        let terminal_positions: Vec<usize> = seq
            .iter()
            .enumerate()
            .filter(|(_, (s, _))| network.is_terminal(*s))
            .map(|(i, _)| i)
            .collect();
        if terminal_positions.len() == 1 {
            return Err(GraphError::SingleTerminalRoute { route: network.routes[h].id.clone() });
        }
        // Vehicle arc ids along this route, position i covering seq[i] -> seq[i+1].
        let route_arcs: Vec<usize> = graph
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.class == ArcClass::Vehicle && a.vehicle == Some(h))
            .map(|(id, _)| id)
            .collect();
        debug_assert_eq!(route_arcs.len(), seq.len().saturating_sub(1));
        for span in terminal_positions.windows(2) {
            let (lo, hi) = (span[0], span[1]);
            let members: Vec<usize> = (lo..hi).map(|i| route_arcs[i]).collect();
            let cost: f64 = members.iter().map(|&a| graph.arcs[a].cost).sum();
            let (s0, t0) = seq[lo];
            let (s1, t1) = seq[hi];
            let tail = graph.stop_vertex[&(s0, t0, Layer::Vehicle(h).code())];
            let head = graph.stop_vertex[&(s1, t1, Layer::Vehicle(h).code())];
            let segment_id = graph.arcs.len();
            graph.arcs.push(Arc {
                tail,
                head,
                class: ArcClass::Segment,
                cost,
                vehicle: Some(h),
                request: None,
                pruned: false,
            });
            for &m in &members {
                graph.contraction.insert(m, segment_id);
            }
            graph.segment_members.insert(segment_id, members);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct PruneReport {
    /// Freight requests left with no access arc after pruning.
    pub no_access: Vec<usize>,
    /// Freight requests left with no egress arc after pruning.
    pub no_egress: Vec<usize>,
}

/// Applies the access/egress pruning rules and drops passenger
/// origin/destination vertices from the graph (their incidence lives on in
/// the precomputed path set).
///
/// A freight access arc to holding vertex (s, t, 0) survives iff
/// (a) t - e >= zeta(r, s), (b) t is the earliest such representation of s,
/// and (c) s is among the iota terminals nearest to the request origin.
/// Egress arcs are pruned symmetrically with the latest representation.
pub fn prune_access_egress(graph: &mut ExpandedGraph, instance: &Instance) -> PruneReport {
    let mut report = PruneReport::default();

    // Passenger origins/destinations and all their arcs leave the graph.
    for (r, req) in instance.requests.iter().enumerate() {
        if req.is_passenger() {
            let o = graph.origin_vertex[r];
            let d = graph.destination_vertex[r];
            graph.vertices[o].pruned = true;
            graph.vertices[d].pruned = true;
        }
    }
    for arc in graph.arcs.iter_mut() {
        if let Some(r) = arc.request {
            if instance.requests[r].is_passenger() {
                arc.pruned = true;
            }
        }
    }

    for (r, req) in instance.freight_requests() {
        let nearest_access = nearest_terminals(instance, req.origin);
        let nearest_egress = nearest_terminals(instance, req.destination);
        let iota = instance.params.iota;
        let allowed_access: BTreeSet<usize> = nearest_access.into_iter().take(iota).collect();
        let allowed_egress: BTreeSet<usize> = nearest_egress.into_iter().take(iota).collect();

        // Earliest feasible representation per stop for access, latest for egress.
        let mut earliest: BTreeMap<usize, Time> = BTreeMap::new();
        let mut latest: BTreeMap<usize, Time> = BTreeMap::new();
        for arc in graph.arcs.iter() {
            if arc.request != Some(r) || arc.pruned {
                continue;
            }
            match arc.class {
                ArcClass::Access => {
                    let (stop, time) = stop_time(graph, arc.head);
                    if (time - req.earliest) as f64 >= instance.zeta_access(req, stop) {
                        earliest
                            .entry(stop)
                            .and_modify(|t| *t = (*t).min(time))
                            .or_insert(time);
                    }
                }
                ArcClass::Egress => {
                    let (stop, time) = stop_time(graph, arc.tail);
                    if (req.latest - time) as f64 >= instance.zeta_egress(req, stop) {
                        latest
                            .entry(stop)
                            .and_modify(|t| *t = (*t).max(time))
                            .or_insert(time);
                    }
                }
                _ => {}
            }
        }

        let mut has_access = false;
        let mut has_egress = false;
        for arc in graph.arcs.iter_mut() {
            if arc.request != Some(r) || arc.pruned {
                continue;
            }
            match arc.class {
                ArcClass::Access => {
                    let (stop, time) = stop_time_of(&graph.vertices, arc.head);
                    let keep = allowed_access.contains(&stop) && earliest.get(&stop) == Some(&time);
                    arc.pruned = !keep;
                    has_access |= keep;
                }
                ArcClass::Egress => {
                    let (stop, time) = stop_time_of(&graph.vertices, arc.tail);
                    let keep = allowed_egress.contains(&stop) && latest.get(&stop) == Some(&time);
                    arc.pruned = !keep;
                    has_egress |= keep;
                }
                _ => {}
            }
        }
        if !has_access {
            report.no_access.push(r);
        }
        if !has_egress {
            report.no_egress.push(r);
        }
    }
    report
}

/// Terminal stop indices ordered by distance from a point; ties by stop index.
fn nearest_terminals(instance: &Instance, point: [f64; 2]) -> Vec<usize> {
    let mut terminals = instance.network.terminal_indices();
    terminals.sort_by(|&a, &b| {
        let da = instance.endpoint_distance_m(point, a);
        let db = instance.endpoint_distance_m(point, b);
        da.total_cmp(&db).then(a.cmp(&b))
    });
    terminals
}

fn stop_time(graph: &ExpandedGraph, vertex: usize) -> (usize, Time) {
    stop_time_of(&graph.vertices, vertex)
}

fn stop_time_of(vertices: &[Vertex], vertex: usize) -> (usize, Time) {
    match vertices[vertex].kind {
        VertexKind::Stop { stop, time, .. } => (stop, time),
        _ => panic!("expected stop vertex"),
    }
}

impl Instance {
    /// Relocation threshold towards a stop for access.
    pub(crate) fn zeta_access(&self, request: &Request, stop: usize) -> f64 {
        if let Some(z) = request.zeta {
            return z;
        }
        if let Some(z) = self.params.zeta_default {
            return z;
        }
        (self.endpoint_distance_m(request.origin, stop) / self.params.zeta_speed).ceil()
    }

    /// Relocation threshold from a stop for egress.
    pub(crate) fn zeta_egress(&self, request: &Request, stop: usize) -> f64 {
        if let Some(z) = request.zeta {
            return z;
        }
        if let Some(z) = self.params.zeta_default {
            return z;
        }
        (self.endpoint_distance_m(request.destination, stop) / self.params.zeta_speed).ceil()
    }
}
