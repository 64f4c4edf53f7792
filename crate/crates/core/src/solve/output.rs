//! Solution records and their JSON form. The serialized artifact carries
//! no wall-clock data so that identical runs produce identical bytes.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;

use crate::error::SolveError;
use crate::graph::{ArcClass, Preprocessed};
use crate::model::Instance;

use super::SolveStatus;

#[derive(Debug, Clone, Serialize)]
pub struct IterationLog {
    pub iter: usize,
    pub ub: f64,
    pub lb: f64,
    /// Columns added this iteration.
    pub cols: usize,
    /// Pricing problems solved this iteration.
    pub pricing_solved: usize,
    pub full: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcStep {
    pub class: ArcClass,
    pub from: String,
    pub to: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptedPath {
    pub request: String,
    pub path: Vec<ArcStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentAllocation {
    pub vehicle: String,
    pub from: String,
    pub to: String,
    pub count: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct PassengerFlow {
    pub request: String,
    pub path_index: usize,
    pub fraction: f64,
}

/// Arc-level assignment kept out of the JSON artifact; used by the audit
/// and by utilization reporting.
#[derive(Debug, Clone, Default)]
pub struct RawAssignment {
    /// Units per vehicle.
    pub y: Vec<u32>,
    /// Units allocated to freight per segment arc ordinal (graph order).
    pub x: Vec<u32>,
    /// Segment arc ids in the same order as `x`.
    pub segments: Vec<usize>,
    /// (request id, path arc ids) per freight request.
    pub freight_paths: Vec<(usize, Vec<usize>)>,
    /// Passenger path fractions, indexed like the passenger path set.
    pub g: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub objective: f64,
    pub lower_bound: f64,
    pub gap: f64,
    pub status: SolveStatus,
    /// Units assigned per vehicle id.
    pub y: BTreeMap<String, u32>,
    /// Nonzero freight capacity allocations.
    pub x: Vec<SegmentAllocation>,
    pub accepted: Vec<AcceptedPath>,
    pub rejected: Vec<String>,
    pub passenger_flows: Vec<PassengerFlow>,
    pub log: Vec<IterationLog>,
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip)]
    pub raw: RawAssignment,
    /// (ub, lb) after every branch-and-price node, for bound validation.
    #[serde(skip)]
    pub bound_trace: Vec<(f64, f64)>,
    #[serde(skip)]
    pub columns_generated: usize,
    #[serde(skip)]
    pub pricing_calls: Vec<super::PricingCall>,
}

impl Solution {
    pub fn infeasible(wall: Duration) -> Self {
        Solution {
            objective: f64::INFINITY,
            lower_bound: f64::INFINITY,
            gap: 0.0,
            status: SolveStatus::Infeasible,
            y: BTreeMap::new(),
            x: Vec::new(),
            accepted: Vec::new(),
            rejected: Vec::new(),
            passenger_flows: Vec::new(),
            log: Vec::new(),
            wall_time: wall,
            raw: RawAssignment::default(),
            bound_trace: Vec::new(),
            columns_generated: 0,
            pricing_calls: Vec::new(),
        }
    }

    /// Builds the record from integral design values, per-request freight
    /// paths and passenger fractions. The objective is recomputed from
    /// these raw values: design cost plus demand-weighted routing cost of
    /// every freight path (dummy paths price the rejection penalty).
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        prep: &Preprocessed,
        instance: &Instance,
        status: SolveStatus,
        lower_bound: f64,
        y: &[f64],
        x: &[f64],
        freight_paths: &[(usize, Vec<usize>)],
        g: &[Vec<f64>],
        logs: Vec<IterationLog>,
        wall: Duration,
    ) -> Result<Solution, SolveError> {
        let graph = &prep.graph;
        let y_rounded: Vec<u32> = y.iter().map(|&v| v.round().max(0.0) as u32).collect();
        let x_rounded: Vec<u32> = x.iter().map(|&v| v.round().max(0.0) as u32).collect();
        let segments = graph.segment_arcs();

        let mut objective = 0.0;
        for (h, &units) in y_rounded.iter().enumerate() {
            let _ = h;
            objective += instance.costs.design_cost * units as f64;
        }
        let mut y_map = BTreeMap::new();
        for (h, route) in instance.network.routes.iter().enumerate() {
            y_map.insert(route.id.clone(), y_rounded[h]);
        }

        let mut x_list = Vec::new();
        for (si, &seg) in segments.iter().enumerate() {
            if x_rounded[si] > 0 {
                let arc = &graph.arcs[seg];
                x_list.push(SegmentAllocation {
                    vehicle: instance.network.routes[arc.vehicle.unwrap()].id.clone(),
                    from: graph.vertex_key(instance, arc.tail),
                    to: graph.vertex_key(instance, arc.head),
                    count: x_rounded[si],
                });
            }
        }

        let mut accepted = Vec::new();
        let mut rejected = Vec::new();
        for (r, arcs) in freight_paths {
            let req = &instance.requests[*r];
            let routing: f64 = arcs.iter().map(|&a| graph.arcs[a].cost).sum();
            objective += req.demand * routing;
            let is_dummy = arcs.len() == 1 && graph.arcs[arcs[0]].class == ArcClass::Dummy;
            if is_dummy {
                rejected.push(req.id.clone());
            } else {
                let path = arcs
                    .iter()
                    .map(|&a| {
                        let arc = &graph.arcs[a];
                        ArcStep {
                            class: arc.class,
                            from: graph.vertex_key(instance, arc.tail),
                            to: graph.vertex_key(instance, arc.head),
                            vehicle: arc.vehicle.map(|h| instance.network.routes[h].id.clone()),
                        }
                    })
                    .collect();
                accepted.push(AcceptedPath { request: req.id.clone(), path });
            }
        }

        let mut passenger_flows = Vec::new();
        for (r, fractions) in g.iter().enumerate() {
            for (p, &frac) in fractions.iter().enumerate() {
                if frac > 1e-9 {
                    passenger_flows.push(PassengerFlow {
                        request: instance.requests[r].id.clone(),
                        path_index: p,
                        fraction: frac,
                    });
                }
            }
        }

        let gap = super::integrality_gap(objective, lower_bound)?;
        Ok(Solution {
            objective,
            lower_bound,
            gap,
            status,
            y: y_map,
            x: x_list,
            accepted,
            rejected,
            passenger_flows,
            log: logs,
            wall_time: wall,
            raw: RawAssignment {
                y: y_rounded,
                x: x_rounded,
                segments,
                freight_paths: freight_paths.to_vec(),
                g: g.to_vec(),
            },
            bound_trace: Vec::new(),
            columns_generated: 0,
            pricing_calls: Vec::new(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    /// Demand-weighted share of rejected freight.
    pub fn rejection_share(&self, instance: &Instance) -> f64 {
        let total: f64 = instance.freight_requests().map(|(_, r)| r.demand).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let rejected: f64 = instance
            .freight_requests()
            .filter(|(_, r)| self.rejected.contains(&r.id))
            .map(|(_, r)| r.demand)
            .sum();
        rejected / total
    }
}
