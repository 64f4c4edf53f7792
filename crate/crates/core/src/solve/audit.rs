//! Independent feasibility audit: re-evaluates every constraint family
//! from raw instance data and the solution's arc-level assignment, never
//! through LP rows.

use std::collections::HashMap;

use crate::error::SolveError;
use crate::graph::{ArcClass, Preprocessed};
use crate::model::Instance;

use super::{SolveStatus, Solution};

const TOL: f64 = 1e-6;

/// Checks service level, passenger and freight capacities, unit budgets,
/// path validity and the objective value. Returns an error naming the
/// first violated constraint.
pub fn audit_solution(prep: &Preprocessed, instance: &Instance, solution: &Solution) -> Result<(), SolveError> {
    if solution.status == SolveStatus::Infeasible {
        return Ok(());
    }
    let graph = &prep.graph;
    let raw = &solution.raw;

    // Unit budgets.
    for (h, route) in instance.network.routes.iter().enumerate() {
        if raw.y[h] > route.units {
            return Err(SolveError::Audit(format!(
                "vehicle {}: {} units assigned, {} available",
                route.id, raw.y[h], route.units
            )));
        }
    }
    for (si, &seg) in raw.segments.iter().enumerate() {
        let h = graph.arcs[seg].vehicle.unwrap();
        if raw.x[si] > raw.y[h] {
            return Err(SolveError::Audit(format!(
                "segment {si}: {} units allocated on a vehicle with {} assigned",
                raw.x[si], raw.y[h]
            )));
        }
    }

    // Freight paths: chained, usable, uniquely assigned; loads per segment.
    let seg_ordinal: HashMap<usize, usize> = raw.segments.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut freight_load: Vec<f64> = vec![0.0; raw.segments.len()];
    let mut seen: Vec<usize> = Vec::new();
    for (r, arcs) in &raw.freight_paths {
        if seen.contains(r) {
            return Err(SolveError::Audit(format!("request {r} assigned more than one path")));
        }
        seen.push(*r);
        if arcs.is_empty() {
            return Err(SolveError::Audit(format!("request {r} has an empty path")));
        }
        let mut at = graph.origin_vertex[*r];
        for &a in arcs {
            if !graph.usable_by(a, *r) {
                return Err(SolveError::Audit(format!("request {r} uses arc {a} outside its freight arc set")));
            }
            if graph.arcs[a].tail != at {
                return Err(SolveError::Audit(format!("request {r}: path breaks at arc {a}")));
            }
            at = graph.arcs[a].head;
            if graph.arcs[a].class == ArcClass::Segment {
                freight_load[seg_ordinal[&a]] += instance.requests[*r].demand;
            }
        }
        if at != graph.destination_vertex[*r] {
            return Err(SolveError::Audit(format!("request {r}: path does not reach its destination")));
        }
    }
    let mut expected: Vec<usize> = instance.freight_requests().map(|(r, _)| r).collect();
    expected.sort_unstable();
    let mut got = seen.clone();
    got.sort_unstable();
    if expected != got {
        return Err(SolveError::Audit("accepted and rejected sets do not partition the freight requests".into()));
    }
    for (si, &seg) in raw.segments.iter().enumerate() {
        let h = graph.arcs[seg].vehicle.unwrap();
        let lambda = instance.network.routes[h].unit_capacity;
        if freight_load[si] > lambda * raw.x[si] as f64 + TOL {
            return Err(SolveError::Audit(format!(
                "segment {si}: freight load {} exceeds allocated capacity {}",
                freight_load[si],
                lambda * raw.x[si] as f64
            )));
        }
    }

    // Passenger loads against remaining capacity per vehicle arc.
    let mut pax_load: HashMap<usize, f64> = HashMap::new();
    for (r, fractions) in raw.g.iter().enumerate() {
        let total: f64 = fractions.iter().sum();
        if total > 1.0 + TOL {
            return Err(SolveError::Audit(format!("passenger {r}: path fractions sum to {total}")));
        }
        for (p, &frac) in fractions.iter().enumerate() {
            if frac < -TOL {
                return Err(SolveError::Audit(format!("passenger {r}: negative fraction on path {p}")));
            }
            if frac > 0.0 {
                for a in prep.passenger_paths.paths[r][p].vehicle_arcs(graph) {
                    *pax_load.entry(a).or_insert(0.0) += instance.requests[r].demand * frac;
                }
            }
        }
    }
    for (a, arc) in graph.live_arcs(ArcClass::Vehicle) {
        let h = arc.vehicle.unwrap();
        let route = &instance.network.routes[h];
        let lambda = route.unit_capacity;
        let kappa = route.units as f64;
        let allocated = graph
            .contraction
            .get(&a)
            .map(|seg| raw.x[seg_ordinal[seg]] as f64)
            .unwrap_or(0.0);
        let capacity = lambda * (kappa - allocated);
        let load = pax_load.get(&a).copied().unwrap_or(0.0);
        if load > capacity + TOL {
            return Err(SolveError::Audit(format!(
                "vehicle arc {a}: passenger load {load} exceeds remaining capacity {capacity}"
            )));
        }
    }

    // Service level over all passenger demand.
    let total_pax: f64 = instance.passenger_requests().map(|(_, r)| r.demand).sum();
    let served: f64 = instance
        .passenger_requests()
        .map(|(r, req)| req.demand * raw.g[r].iter().sum::<f64>())
        .sum();
    if served + TOL < instance.params.chi * total_pax {
        return Err(SolveError::Audit(format!(
            "service level violated: served {served} of {total_pax} at chi={}",
            instance.params.chi
        )));
    }

    // Objective recomputation.
    let mut objective = 0.0;
    for (h, _) in instance.network.routes.iter().enumerate() {
        objective += instance.costs.design_cost * raw.y[h] as f64;
    }
    for (r, arcs) in &raw.freight_paths {
        let routing: f64 = arcs.iter().map(|&a| graph.arcs[a].cost).sum();
        objective += instance.requests[*r].demand * routing;
    }
    let scale = solution.objective.abs().max(1.0);
    if (objective - solution.objective).abs() > 1e-6 * scale {
        return Err(SolveError::Audit(format!(
            "objective mismatch: reported {}, recomputed {objective}",
            solution.objective
        )));
    }

    // Bounds sanity.
    if solution.lower_bound > solution.objective + 1e-6 * scale {
        return Err(SolveError::Audit(format!(
            "lower bound {} exceeds objective {}",
            solution.lower_bound, solution.objective
        )));
    }
    Ok(())
}
