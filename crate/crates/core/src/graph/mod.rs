//! Partially time-expanded, multi-layered graph: one temporal layer per
//! vehicle plus a holding layer that synchronizes transfers, request
//! origin/destination vertices, and the preprocessing passes (dummy arcs,
//! freight segment contraction, access/egress pruning).

mod approx;
mod build;
mod paths;

pub use approx::{heuristic_estimates, static_cost_table, StaticCostTable};
pub use build::{add_dummy_arcs, contract_segments, expand, prune_access_egress, PruneReport};
pub use paths::{precompute_passenger_paths, PassengerPath, PassengerPathSet};

use std::collections::HashMap;

use serde::Serialize;

use crate::error::GraphError;
use crate::model::{Instance, Time};

/// Graph layer: 0 is the holding layer, vehicles get their own layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    Holding,
    Vehicle(usize),
}

impl Layer {
    pub fn code(self) -> u32 {
        match self {
            Layer::Holding => 0,
            Layer::Vehicle(h) => h as u32 + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    /// Request origin expanded at its earliest start time.
    Origin(usize),
    /// Request destination expanded at its latest completion time.
    Destination(usize),
    Stop { stop: usize, time: Time, layer: Layer },
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub kind: VertexKind,
    /// Pruned vertices stay in place to keep ids stable; adjacency and
    /// counts skip them.
    pub pruned: bool,
}

impl Vertex {
    pub fn stop(&self) -> Option<usize> {
        match self.kind {
            VertexKind::Stop { stop, .. } => Some(stop),
            _ => None,
        }
    }

    pub fn time(&self, instance: &Instance) -> Time {
        match self.kind {
            VertexKind::Stop { time, .. } => time,
            VertexKind::Origin(r) => instance.requests[r].earliest,
            VertexKind::Destination(r) => instance.requests[r].latest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcClass {
    /// Consecutive stops on one vehicle's route, in that vehicle's layer.
    Vehicle,
    /// Waiting at a stop between consecutive arrival times (holding layer).
    Holding,
    /// Layer change between a vehicle vertex and its holding representation.
    Transit,
    Access,
    Egress,
    /// Origin->destination arc encoding rejection of a freight request.
    Dummy,
    /// Contraction of the vehicle arcs between two consecutive terminals.
    Segment,
}

#[derive(Debug, Clone)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub class: ArcClass,
    pub cost: f64,
    /// Owning vehicle for Vehicle and Segment arcs.
    pub vehicle: Option<usize>,
    /// Owning request for Access, Egress and Dummy arcs.
    pub request: Option<usize>,
    pub pruned: bool,
}

#[derive(Debug, Clone)]
pub struct ExpandedGraph {
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<Arc>,
    /// Per request: its origin/destination vertex.
    pub origin_vertex: Vec<usize>,
    pub destination_vertex: Vec<usize>,
    /// (stop, time, layer code) -> vertex id.
    pub stop_vertex: HashMap<(usize, Time, u32), usize>,
    /// Vehicle arc id -> segment arc id, when the arc lies between two
    /// consecutive terminals on its route.
    pub contraction: HashMap<usize, usize>,
    /// Segment arc id -> the vehicle arcs contracted into it.
    pub segment_members: HashMap<usize, Vec<usize>>,
    /// Marks stop vertices whose stop is a freight terminal.
    pub terminal_vertex: Vec<bool>,
    /// Arc membership in the freight flow arc set.
    pub freight_arc: Vec<bool>,
    /// Adjacency restricted to the freight flow arc set.
    pub freight_out: Vec<Vec<usize>>,
    pub freight_in: Vec<Vec<usize>>,
}

impl ExpandedGraph {
    pub fn live_arcs(&self, class: ArcClass) -> impl Iterator<Item = (usize, &Arc)> {
        self.arcs
            .iter()
            .enumerate()
            .filter(move |(_, a)| !a.pruned && a.class == class)
    }

    pub fn count_arcs(&self, class: ArcClass) -> usize {
        self.live_arcs(class).count()
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = (usize, &Vertex)> {
        self.vertices.iter().enumerate().filter(|(_, v)| !v.pruned)
    }

    pub fn count_layer_vertices(&self, layer: Layer) -> usize {
        self.live_vertices()
            .filter(|(_, v)| matches!(v.kind, VertexKind::Stop { layer: l, .. } if l == layer))
            .count()
    }

    /// Vehicle arcs contracted into a segment.
    pub fn contracted_members(&self, segment_arc: usize) -> &[usize] {
        self.segment_members
            .get(&segment_arc)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Contracted vehicle arcs (image under the contraction map exists).
    pub fn contracted_vehicle_arcs(&self) -> Vec<usize> {
        self.live_arcs(ArcClass::Vehicle)
            .filter(|(id, _)| self.contraction.contains_key(id))
            .map(|(id, _)| id)
            .collect()
    }

    /// Vehicle arcs with no segment image.
    pub fn uncontracted_vehicle_arcs(&self) -> Vec<usize> {
        self.live_arcs(ArcClass::Vehicle)
            .filter(|(id, _)| !self.contraction.contains_key(id))
            .map(|(id, _)| id)
            .collect()
    }

    pub fn segment_arcs(&self) -> Vec<usize> {
        self.live_arcs(ArcClass::Segment).map(|(id, _)| id).collect()
    }

    /// Whether an arc can carry freight flow for the given request:
    /// shared freight arcs plus the request's own access/egress/dummy arcs.
    pub fn usable_by(&self, arc: usize, request: usize) -> bool {
        let a = &self.arcs[arc];
        if a.pruned || !self.freight_arc[arc] {
            return false;
        }
        match a.request {
            Some(owner) => owner == request,
            None => true,
        }
    }

    /// Vertex demand of a freight request: +1 at its origin, -1 at its
    /// destination, 0 elsewhere.
    pub fn vertex_demand(&self, request: usize, vertex: usize) -> i32 {
        if self.origin_vertex[request] == vertex {
            1
        } else if self.destination_vertex[request] == vertex {
            -1
        } else {
            0
        }
    }

    /// Vertices at which freight flow conservation is imposed: live
    /// origins, destinations, and terminal representations.
    pub fn conservation_vertices(&self) -> Vec<usize> {
        self.live_vertices()
            .filter(|(id, v)| match v.kind {
                VertexKind::Origin(_) | VertexKind::Destination(_) => true,
                VertexKind::Stop { .. } => self.terminal_vertex[*id],
            })
            .map(|(id, _)| id)
            .collect()
    }

    /// Recomputes freight arc membership and adjacency. Called at the end
    /// of the build pipeline; the graph is immutable afterwards.
    pub fn finalize(&mut self, instance: &Instance) {
        self.freight_arc = vec![false; self.arcs.len()];
        for (id, arc) in self.arcs.iter().enumerate() {
            if arc.pruned {
                continue;
            }
            let member = match arc.class {
                ArcClass::Segment | ArcClass::Dummy => true,
                ArcClass::Access | ArcClass::Egress => arc
                    .request
                    .map(|r| instance.requests[r].is_freight())
                    .unwrap_or(false),
                ArcClass::Holding | ArcClass::Transit => {
                    self.terminal_vertex[arc.tail] && self.terminal_vertex[arc.head]
                }
                ArcClass::Vehicle => false,
            };
            self.freight_arc[id] = member;
        }
        self.freight_out = vec![Vec::new(); self.vertices.len()];
        self.freight_in = vec![Vec::new(); self.vertices.len()];
        for (id, arc) in self.arcs.iter().enumerate() {
            if self.freight_arc[id] {
                self.freight_out[arc.tail].push(id);
                self.freight_in[arc.head].push(id);
            }
        }
    }

    /// Stable debug key of a vertex, e.g. `s2@3@0` or `o:f1@0`.
    pub fn vertex_key(&self, instance: &Instance, vertex: usize) -> String {
        match self.vertices[vertex].kind {
            VertexKind::Stop { stop, time, layer } => {
                let layer_key = match layer {
                    Layer::Holding => "0".to_string(),
                    Layer::Vehicle(h) => instance.network.routes[h].id.clone(),
                };
                format!("{}@{}@{}", instance.network.stops[stop].id, time, layer_key)
            }
            VertexKind::Origin(r) => {
                format!("o:{}@{}", instance.requests[r].id, instance.requests[r].earliest)
            }
            VertexKind::Destination(r) => {
                format!("d:{}@{}", instance.requests[r].id, instance.requests[r].latest)
            }
        }
    }

    /// JSON dump of live vertices and arcs with stable ordering.
    pub fn dump_json(&self, instance: &Instance) -> serde_json::Value {
        let vertices: Vec<serde_json::Value> = self
            .live_vertices()
            .map(|(id, _)| serde_json::json!({ "id": id, "key": self.vertex_key(instance, id) }))
            .collect();
        let arcs: Vec<serde_json::Value> = self
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.pruned)
            .map(|(id, a)| {
                serde_json::json!({
                    "id": id,
                    "tail": self.vertex_key(instance, a.tail),
                    "head": self.vertex_key(instance, a.head),
                    "class": a.class,
                    "cost": a.cost,
                    "freight": self.freight_arc.get(id).copied().unwrap_or(false),
                })
            })
            .collect();
        serde_json::json!({ "vertices": vertices, "arcs": arcs })
    }
}

/// Everything the solver needs from preprocessing: the finished graph,
/// passenger path sets, and the static pricing bound table.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub graph: ExpandedGraph,
    pub passenger_paths: PassengerPathSet,
    pub static_costs: StaticCostTable,
    pub prune_report: PruneReport,
}

/// Runs the full build pipeline on a validated instance.
pub fn build(instance: &Instance) -> Result<Preprocessed, GraphError> {
    let mut graph = expand(instance);
    add_dummy_arcs(&mut graph, instance);
    contract_segments(&mut graph, instance)?;
    let passenger_paths = precompute_passenger_paths(&graph, instance);
    let prune_report = prune_access_egress(&mut graph, instance);
    graph.finalize(instance);
    let static_costs = static_cost_table(instance);
    Ok(Preprocessed { graph, passenger_paths, static_costs, prune_report })
}
