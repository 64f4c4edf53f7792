//! The column generation loop shared by price-and-branch and every
//! branch-and-price node: solve the master (warmstarted), extract duals,
//! run a pricing round, add columns; the lower bound moves only on full
//! rounds.

use std::time::Instant;

use crate::error::SolveError;
use crate::formulations::MasterState;
use crate::graph::{ArcClass, Preprocessed};
use crate::lp::LpStatus;
use crate::model::Instance;
use crate::pricing::{lagrangian_lower_bound, NodeFilters, PricingContext, PricingState};

use super::output::IterationLog;

/// One recorded pricing search for offline validation: the dual-adapted
/// cost snapshot and the cost A* returned.
#[derive(Debug, Clone)]
pub struct PricingCall {
    pub request: usize,
    /// Nonzero capacity duals on segment arcs at the time of the call.
    pub alpha: Vec<(usize, f64)>,
    pub forbidden: Vec<usize>,
    /// Adapted cost of the returned path (reduced cost + convexity dual,
    /// divided by demand).
    pub adapted_cost: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct CgOutcome {
    /// Final master objective: an upper bound on the node relaxation.
    pub ub_rmp: f64,
    /// Valid lower bound on the node relaxation (full rounds only).
    pub lb: f64,
    pub iterations: usize,
    pub converged: bool,
    pub infeasible: bool,
    pub hit_deadline: bool,
    pub columns_generated: usize,
    pub logs: Vec<IterationLog>,
    pub pricing_calls: Vec<PricingCall>,
}

/// Runs column generation on the master under the given node filters.
/// Terminates when the gap closes to `epsilon`, a full round prices no
/// improving column, or the deadline passes. `initial_lb` seeds the bound
/// (a parent node's bound in branch-and-price).
#[allow(clippy::too_many_arguments)]
pub fn column_generation(
    master: &mut MasterState,
    prep: &Preprocessed,
    instance: &Instance,
    ctx: &PricingContext,
    pricing: &mut PricingState,
    filters: &NodeFilters,
    epsilon: f64,
    initial_lb: f64,
    deadline: Instant,
    record: bool,
) -> Result<CgOutcome, SolveError> {
    let mut outcome = CgOutcome { lb: initial_lb, ..Default::default() };
    pricing.reset_gap_window();
    let freight_ids = master.freight_ids.clone();
    let mut force_full = false;

    loop {
        outcome.iterations += 1;
        let iter = outcome.iterations;

        match master.solve()? {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                outcome.infeasible = true;
                return Ok(outcome);
            }
            status => return Err(SolveError::MasterNotOptimal { status }),
        }
        outcome.ub_rmp = master.objective();

        if freight_ids.is_empty() {
            outcome.converged = true;
            outcome.lb = outcome.ub_rmp;
            outcome.logs.push(IterationLog {
                iter,
                ub: outcome.ub_rmp,
                lb: outcome.lb,
                cols: 0,
                pricing_solved: 0,
                full: true,
            });
            return Ok(outcome);
        }

        let duals = master.extract_duals()?;
        let full = force_full || pricing.wants_full_round(iter);
        force_full = false;
        let round = pricing.round(prep, instance, ctx, &duals, filters, full);

        if record {
            for (col, &rc) in round.columns.iter().zip(&round.reduced_costs) {
                let q = instance.requests[col.request].demand;
                let eta = duals.convexity.get(&col.request).copied().unwrap_or(0.0);
                let filter = filters.filter(col.request);
                if filter.map(|f| f.forced.is_empty()).unwrap_or(true) {
                    outcome.pricing_calls.push(PricingCall {
                        request: col.request,
                        alpha: graph_alpha_snapshot(prep, &duals),
                        forbidden: filter.map(|f| f.forbidden.iter().copied().collect()).unwrap_or_default(),
                        adapted_cost: Some((rc + eta) / q),
                    });
                }
            }
            // Also record priced-but-nonimproving requests from full rounds.
            if full {
                for (&request, &rc) in &round.min_reduced {
                    if rc >= crate::pricing::NEGATIVE_TOL {
                        let q = instance.requests[request].demand;
                        let eta = duals.convexity.get(&request).copied().unwrap_or(0.0);
                        let filter = filters.filter(request);
                        if filter.map(|f| f.forced.is_empty()).unwrap_or(true) {
                            outcome.pricing_calls.push(PricingCall {
                                request,
                                alpha: graph_alpha_snapshot(prep, &duals),
                                forbidden: filter.map(|f| f.forbidden.iter().copied().collect()).unwrap_or_default(),
                                adapted_cost: Some((rc + eta) / q),
                            });
                        }
                    }
                }
            }
        }

        let mut upper_for_gap = outcome.ub_rmp;
        if full {
            let bound = lagrangian_lower_bound(outcome.ub_rmp, &freight_ids, &round)?;
            if bound > outcome.lb {
                outcome.lb = bound;
            }
            upper_for_gap = outcome.ub_rmp;
        }

        let added = master.add_columns(prep, instance, round.columns.clone());
        outcome.columns_generated += added;

        let gap = (upper_for_gap - outcome.lb).max(0.0) / upper_for_gap.abs().max(1e-10);
        pricing.observe_gap(gap);
        outcome.logs.push(IterationLog {
            iter,
            ub: outcome.ub_rmp,
            lb: outcome.lb,
            cols: added,
            pricing_solved: round.solved,
            full,
        });

        if full && round.columns.is_empty() {
            // Exact pricing found nothing: the master value is the node
            // relaxation optimum.
            outcome.converged = true;
            outcome.lb = outcome.lb.max(outcome.ub_rmp);
            return Ok(outcome);
        }
        if gap <= epsilon {
            outcome.converged = true;
            return Ok(outcome);
        }
        if added == 0 {
            if full {
                // Improving columns exist numerically but are already in
                // the pool; treat as converged at the current bound.
                outcome.converged = true;
                return Ok(outcome);
            }
            force_full = true;
        }
        if Instant::now() >= deadline {
            outcome.hit_deadline = true;
            return Ok(outcome);
        }
    }
}

/// Nonzero segment-capacity duals in stable order.
fn graph_alpha_snapshot(prep: &Preprocessed, duals: &crate::formulations::DualValues) -> Vec<(usize, f64)> {
    let mut alpha: Vec<(usize, f64)> = prep
        .graph
        .live_arcs(ArcClass::Segment)
        .filter_map(|(id, _)| {
            let v = duals.segment_capacity.get(&id).copied().unwrap_or(0.0);
            if v != 0.0 {
                Some((id, v))
            } else {
                None
            }
        })
        .collect();
    alpha.sort_by_key(|&(id, _)| id);
    alpha
}
