//! Branch-and-price: best-first search over nodes ordered by parent lower
//! bound, column generation at every node against a shared column pool,
//! node upper bounds from a time-limited integer solve, and a branching
//! hierarchy that starts from the design variables.
//!
//! Branching order: fractional y by the max-fractionality rule, then
//! fractional x, then fractional per-request arc flows (forbid/force in
//! the pricing subproblem). The last level makes the search exact: once
//! y, x and all per-request segment/dummy flows are integral, the master
//! point can be converted into an equal-cost integer solution.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::error::SolveError;
use crate::formulations::{build_rmp, MasterState};
use crate::graph::{ArcClass, Preprocessed};
use crate::mip::{branch_and_bound, fractionality, MipConfig, INT_TOL};
use crate::model::Instance;
use crate::pricing::{NodeFilters, PricingContext, PricingState};

use super::cg::column_generation;
use super::output::{IterationLog, Solution};
use super::{fallback_all_rejected, select_branching_variable, solution_from_master_point, SolveConfig, SolveStatus};

#[derive(Debug, Clone)]
struct BnpNode {
    id: usize,
    lb: f64,
    y_bounds: Vec<(f64, f64)>,
    x_bounds: Vec<(f64, f64)>,
    filters: NodeFilters,
}

struct NodeOrd(BnpNode);

impl PartialEq for NodeOrd {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for NodeOrd {}
impl Ord for NodeOrd {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (lb, id).
        other
            .0
            .lb
            .total_cmp(&self.0.lb)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}
impl PartialOrd for NodeOrd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn apply_node(master: &mut MasterState, instance: &Instance, node: &BnpNode) {
    master.reset_bounds(instance);
    for (h, &(lo, hi)) in node.y_bounds.iter().enumerate() {
        master.set_y_bounds(h, lo, hi);
    }
    for (si, &(lo, hi)) in node.x_bounds.iter().enumerate() {
        master.set_x_bounds(si, lo, hi);
    }
    for ri in 0..master.columns.len() {
        for ci in 0..master.columns[ri].len() {
            if !node.filters.admits(&master.columns[ri][ci]) {
                master.disable_column(ri, ci);
            }
        }
    }
}

fn most_fractional_index(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        let f = fractionality(v);
        if f > INT_TOL {
            match best {
                Some((_, bf)) if f <= bf => {}
                _ => best = Some((i, f)),
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Most fractional per-request flow over segment and dummy arcs.
fn most_fractional_flow(master: &MasterState, prep: &Preprocessed) -> Option<(usize, usize)> {
    let graph = &prep.graph;
    let z = master.z_values();
    let mut best: Option<(usize, usize, f64)> = None;
    for (ri, &request) in master.freight_ids.iter().enumerate() {
        let mut flow: std::collections::BTreeMap<usize, f64> = Default::default();
        for (ci, col) in master.columns[ri].iter().enumerate() {
            let zv = z[ri][ci];
            if zv > 1e-12 {
                for &a in &col.arcs {
                    match graph.arcs[a].class {
                        ArcClass::Segment | ArcClass::Dummy => *flow.entry(a).or_insert(0.0) += zv,
                        _ => {}
                    }
                }
            }
        }
        for (&a, &v) in &flow {
            let f = fractionality(v);
            if f > INT_TOL {
                match best {
                    Some((_, _, bf)) if f <= bf => {}
                    _ => best = Some((request, a, f)),
                }
            }
        }
    }
    best.map(|(r, a, _)| (r, a))
}

/// Converts an all-integral master point (y, x and per-request arc flows
/// integral, z possibly split among equal-cost same-incidence columns)
/// into an integer point by keeping one column per request.
fn integral_point(master: &MasterState) -> Vec<f64> {
    let sol = master.last.as_ref().expect("integral_point before solve");
    let mut x = sol.x.clone();
    let z = master.z_values();
    for ri in 0..master.columns.len() {
        let mut chosen: Option<usize> = None;
        for (ci, &zv) in z[ri].iter().enumerate() {
            if zv > INT_TOL && chosen.is_none() {
                chosen = Some(ci);
            }
            x[master.z[ri][ci]] = 0.0;
        }
        if let Some(ci) = chosen {
            x[master.z[ri][ci]] = 1.0;
        }
    }
    for &yv in &master.y {
        x[yv] = x[yv].round();
    }
    for &xv in &master.x {
        x[xv] = x[xv].round();
    }
    x
}

/// Exact branch-and-price per the node scheme above. The global lower
/// bound is the minimum over active node bounds capped by the incumbent;
/// on natural termination the incumbent is optimal within epsilon.
pub fn branch_and_price(
    prep: &Preprocessed,
    instance: &Instance,
    config: &SolveConfig,
) -> Result<Solution, SolveError> {
    config.validate()?;
    let started = Instant::now();
    let deadline = started + config.time_limit;

    let mut master = build_rmp(prep, instance);
    let ctx = PricingContext::new(prep, instance);
    let freight_ids = master.freight_ids.clone();
    // Node relaxations must be solved exactly for valid pruning, so node
    // column generation converges by pricing, not by the global epsilon.
    let node_epsilon = config.epsilon.min(1e-10);

    let mut incumbent: Option<Solution> = None;
    let mut global_ub = f64::INFINITY;
    let mut heap: BinaryHeap<NodeOrd> = BinaryHeap::new();
    let mut next_id = 0usize;
    let root = BnpNode {
        id: next_id,
        lb: 0.0,
        y_bounds: instance.network.routes.iter().map(|r| (0.0, r.units as f64)).collect(),
        x_bounds: vec![(0.0, f64::INFINITY); master.x.len()],
        filters: NodeFilters::default(),
    };
    next_id += 1;
    heap.push(NodeOrd(root));

    let mut logs: Vec<IterationLog> = Vec::new();
    let mut bound_trace: Vec<(f64, f64)> = Vec::new();
    let mut columns_generated = 0usize;
    let mut pricing_calls = Vec::new();
    let mut nodes_processed = 0usize;
    let mut timed_out = false;
    let prune_margin = |ub: f64| ub - 1e-9 * ub.abs().max(1.0);

    while let Some(NodeOrd(node)) = heap.pop() {
        let global_lb_now = global_ub.min(node.lb);
        if global_ub.is_finite() {
            let gap = (global_ub - global_lb_now).max(0.0) / global_ub.abs().max(1e-10);
            if gap <= config.epsilon {
                heap.push(NodeOrd(node));
                break;
            }
        }
        if Instant::now() >= deadline {
            heap.push(NodeOrd(node));
            timed_out = true;
            break;
        }
        if node.lb >= prune_margin(global_ub) {
            continue;
        }
        nodes_processed += 1;

        apply_node(&mut master, instance, &node);
        let mut pricing = PricingState::new(&freight_ids, config.phi, config.full_pricing_every, config.slowdown_threshold);
        let node_deadline = (Instant::now() + config.node_cg_time).min(deadline);
        let outcome = column_generation(
            &mut master,
            prep,
            instance,
            &ctx,
            &mut pricing,
            &node.filters,
            node_epsilon,
            node.lb,
            node_deadline,
            config.record_pricing,
        )?;
        columns_generated += outcome.columns_generated;
        pricing_calls.extend(outcome.pricing_calls.clone());

        if outcome.infeasible {
            bound_trace.push((global_ub, global_ub.min(heap.peek().map(|n| n.0.lb).unwrap_or(global_ub))));
            continue;
        }
        let node_lb = outcome.lb.max(node.lb);
        logs.push(IterationLog {
            iter: nodes_processed,
            ub: outcome.ub_rmp,
            lb: node_lb,
            cols: outcome.columns_generated,
            pricing_solved: outcome.iterations,
            full: outcome.converged,
        });

        if node_lb >= prune_margin(global_ub) {
            let rest = heap.peek().map(|n| n.0.lb).unwrap_or(global_ub);
            bound_trace.push((global_ub, global_ub.min(rest)));
            continue;
        }

        let y_vals = master.y_values();
        let x_vals = master.x_values();

        enum Branching {
            OnY(usize),
            OnX(usize),
            OnFlow(usize, usize),
            Integral,
        }
        let decision = if let Some(h) = select_branching_variable(&y_vals) {
            Branching::OnY(h)
        } else if let Some(si) = most_fractional_index(&x_vals) {
            Branching::OnX(si)
        } else if let Some((r, a)) = most_fractional_flow(&master, prep) {
            Branching::OnFlow(r, a)
        } else {
            Branching::Integral
        };

        match decision {
            Branching::Integral => {
                let point = integral_point(&master);
                let candidate = solution_from_master_point(
                    prep,
                    instance,
                    &master,
                    &point,
                    node_lb,
                    &outcome,
                    started.elapsed(),
                    None,
                )?;
                if candidate.objective < global_ub - 1e-12 {
                    global_ub = candidate.objective;
                    incumbent = Some(candidate);
                }
                if !outcome.converged {
                    // The node relaxation is not solved yet; requeue it so
                    // its bound stays active.
                    heap.push(NodeOrd(BnpNode { id: next_id, lb: node_lb, ..node.clone() }));
                    next_id += 1;
                }
            }
            branching => {
                // Node upper bound from the fixed pool under node bounds.
                let integer_lp = master.fix_and_integerize();
                let start_point = master.last.as_ref().map(|s| s.x.clone());
                let node_budget = config.node_ub_time.min(deadline.saturating_duration_since(Instant::now()));
                if node_budget > std::time::Duration::ZERO {
                    let ub_result = branch_and_bound(
                        &integer_lp,
                        &MipConfig {
                            time_limit: Some(node_budget),
                            gap_tol: 1e-9,
                            start: start_point,
                            node_limit: None,
                        },
                    )
                    .map_err(|e| SolveError::Lp { context: "node upper bound".into(), source: e })?;
                    if let Some(x) = &ub_result.x {
                        let candidate = solution_from_master_point(
                            prep,
                            instance,
                            &master,
                            x,
                            node_lb,
                            &outcome,
                            started.elapsed(),
                            None,
                        )?;
                        if candidate.objective < global_ub - 1e-12 {
                            global_ub = candidate.objective;
                            incumbent = Some(candidate);
                        }
                    }
                }

                let mut push = |n: BnpNode| heap.push(NodeOrd(n));
                match branching {
                    Branching::OnY(h) => {
                        let v = y_vals[h];
                        let mut down = BnpNode { id: next_id, lb: node_lb, ..node.clone() };
                        next_id += 1;
                        down.y_bounds[h].1 = down.y_bounds[h].1.min(v.floor());
                        let mut up = BnpNode { id: next_id, lb: node_lb, ..node.clone() };
                        next_id += 1;
                        up.y_bounds[h].0 = up.y_bounds[h].0.max(v.ceil());
                        if down.y_bounds[h].0 <= down.y_bounds[h].1 {
                            push(down);
                        }
                        if up.y_bounds[h].0 <= up.y_bounds[h].1 {
                            push(up);
                        }
                    }
                    Branching::OnX(si) => {
                        let v = x_vals[si];
                        let mut down = BnpNode { id: next_id, lb: node_lb, ..node.clone() };
                        next_id += 1;
                        down.x_bounds[si].1 = down.x_bounds[si].1.min(v.floor());
                        let mut up = BnpNode { id: next_id, lb: node_lb, ..node.clone() };
                        next_id += 1;
                        up.x_bounds[si].0 = up.x_bounds[si].0.max(v.ceil());
                        if down.x_bounds[si].0 <= down.x_bounds[si].1 {
                            push(down);
                        }
                        if up.x_bounds[si].0 <= up.x_bounds[si].1 {
                            push(up);
                        }
                    }
                    Branching::OnFlow(r, a) => {
                        let mut forbid = BnpNode { id: next_id, lb: node_lb, ..node.clone() };
                        next_id += 1;
                        forbid.filters.by_request.entry(r).or_default().forbidden.insert(a);
                        push(forbid);
                        let mut force = BnpNode { id: next_id, lb: node_lb, ..node.clone() };
                        next_id += 1;
                        force.filters.by_request.entry(r).or_default().forced.insert(a);
                        push(force);
                    }
                    Branching::Integral => unreachable!(),
                }
            }
        }

        let rest = heap.peek().map(|n| n.0.lb).unwrap_or(global_ub);
        bound_trace.push((global_ub, global_ub.min(rest)));
    }

    let final_lb = global_ub.min(heap.peek().map(|n| n.0.lb).unwrap_or(global_ub));
    let wall = started.elapsed();
    let mut solution = match incumbent {
        Some(s) => s,
        None => {
            if heap.is_empty() && !timed_out {
                return Ok(Solution::infeasible(wall));
            }
            let outcome = super::cg::CgOutcome::default();
            fallback_all_rejected(prep, instance, 0.0, &outcome, wall)?
        }
    };
    solution.lower_bound = final_lb;
    solution.gap = super::integrality_gap(solution.objective, solution.lower_bound)?;
    solution.status = if timed_out {
        SolveStatus::TimeLimit
    } else {
        SolveStatus::Optimal
    };
    solution.log = logs;
    solution.bound_trace = bound_trace;
    solution.columns_generated = columns_generated;
    solution.pricing_calls = pricing_calls;
    solution.wall_time = wall;
    super::audit_solution(prep, instance, &solution)?;
    Ok(solution)
}
