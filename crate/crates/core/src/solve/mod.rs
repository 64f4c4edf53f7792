//! Solver orchestration: column generation, price-and-branch, exact
//! branch-and-price, the arc MIP route, bounds/gap bookkeeping, and the
//! independent feasibility audit of every returned solution.

mod audit;
mod bnp;
mod cg;
mod output;

pub use audit::audit_solution;
pub use bnp::branch_and_price;
pub use cg::{column_generation, CgOutcome, PricingCall};
pub use output::{AcceptedPath, ArcStep, IterationLog, PassengerFlow, SegmentAllocation, Solution};

use std::time::{Duration, Instant};

use crate::error::SolveError;
use crate::formulations::{build_arc_mip, build_rmp, MasterState};
use crate::graph::Preprocessed;
use crate::mip::{branch_and_bound, fractionality, MipConfig, MipStatus, INT_TOL};
use crate::model::Instance;
use crate::pricing::{NodeFilters, PricingContext, PricingState};

#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Total wall-clock budget.
    pub time_limit: Duration,
    /// Slice of the budget reserved for branching in price-and-branch.
    pub branch_reserve: Duration,
    /// Column generation optimality tolerance.
    pub epsilon: f64,
    /// Pricing strength: fraction of pricing problems per partial round.
    pub phi: f64,
    /// Full pricing cadence in iterations.
    pub full_pricing_every: usize,
    /// Average gap-reduction threshold triggering a full-round fallback.
    pub slowdown_threshold: f64,
    /// Time limit for the node upper-bound solve in branch-and-price.
    pub node_ub_time: Duration,
    /// Time slice for one node's column generation in branch-and-price.
    pub node_cg_time: Duration,
    pub seed: u64,
    /// Record pricing calls for validation.
    pub record_pricing: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            time_limit: Duration::from_secs(5400),
            branch_reserve: Duration::from_secs(900),
            epsilon: 0.001,
            phi: 1.0,
            full_pricing_every: 5,
            slowdown_threshold: 1e-4,
            node_ub_time: Duration::from_secs(60),
            node_cg_time: Duration::from_secs(120),
            seed: 0,
            record_pricing: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.branch_reserve >= self.time_limit {
            return Err(SolveError::Audit("branch reserve must be smaller than the time limit".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(SolveError::Audit("epsilon must be positive".into()));
        }
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(SolveError::Audit("phi must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    TimeLimit,
    Infeasible,
}

/// (ub - lb) / max(ub, 1e-10), guarding tiny denominators.
pub fn integrality_gap(ub: f64, lb: f64) -> Result<f64, SolveError> {
    if lb > ub + 1e-6 {
        return Err(SolveError::BoundCrossing { lb, ub });
    }
    Ok((ub - lb).max(0.0) / ub.abs().max(1e-10))
}

/// Branching rule on design variables: the y with the largest distance to
/// the nearest integer; ties by lowest vehicle index. `None` when every
/// y is integral within tolerance.
pub fn select_branching_variable(y: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (h, &v) in y.iter().enumerate() {
        let f = fractionality(v);
        if f > INT_TOL {
            match best {
                Some((_, bf)) if f <= bf => {}
                _ => best = Some((h, f)),
            }
        }
    }
    best.map(|(h, _)| h)
}

/// Solves the arc-based MIP with branch-and-bound.
pub fn solve_arc_mip(
    prep: &Preprocessed,
    instance: &Instance,
    config: &SolveConfig,
) -> Result<Solution, SolveError> {
    config.validate()?;
    let started = Instant::now();
    let mip = build_arc_mip(prep, instance);
    let result = branch_and_bound(
        &mip.lp,
        &MipConfig { time_limit: Some(config.time_limit), gap_tol: 1e-9, start: None, node_limit: None },
    )
    .map_err(|e| SolveError::Lp { context: "arc mip".into(), source: e })?;

    match result.status {
        MipStatus::Infeasible => {
            return Ok(Solution::infeasible(started.elapsed()));
        }
        MipStatus::Unbounded => {
            return Err(SolveError::Audit("arc MIP unbounded; costs must be nonnegative".into()));
        }
        _ => {}
    }
    let x = result.x.as_ref().ok_or_else(|| SolveError::Audit("no incumbent within the time limit".into()))?;

    let y: Vec<f64> = mip.y.iter().map(|&v| x[v]).collect();
    let xs: Vec<f64> = mip.x.iter().map(|&v| x[v]).collect();
    let g: Vec<Vec<f64>> = mip.g.iter().map(|gs| gs.iter().map(|&v| x[v]).collect()).collect();
    // Decode per-request freight paths from the arc flows.
    let mut freight_paths = Vec::new();
    for (ri, &r) in mip.freight_ids.iter().enumerate() {
        let arcs: Vec<usize> = mip
            .freight_arcs
            .iter()
            .enumerate()
            .filter(|(ai, _)| x[mip.f[&(ri, *ai)]] > 0.5)
            .map(|(_, &a)| a)
            .collect();
        freight_paths.push((r, order_path(prep, r, arcs)?));
    }

    let status = match result.status {
        MipStatus::Optimal => SolveStatus::Optimal,
        MipStatus::Feasible => SolveStatus::Feasible,
        _ => SolveStatus::TimeLimit,
    };
    let solution = Solution::assemble(
        prep,
        instance,
        status,
        result.bound,
        &y,
        &xs,
        &freight_paths,
        &g,
        Vec::new(),
        started.elapsed(),
    )?;
    audit_solution(prep, instance, &solution)?;
    Ok(solution)
}

/// Orders a set of freight arcs into a chained origin->destination path.
fn order_path(prep: &Preprocessed, request: usize, mut arcs: Vec<usize>) -> Result<Vec<usize>, SolveError> {
    let graph = &prep.graph;
    let mut path = Vec::with_capacity(arcs.len());
    let mut at = graph.origin_vertex[request];
    let destination = graph.destination_vertex[request];
    while at != destination {
        let pos = arcs
            .iter()
            .position(|&a| graph.arcs[a].tail == at)
            .ok_or_else(|| SolveError::Audit(format!("freight flow of request {request} is not a path")))?;
        let a = arcs.swap_remove(pos);
        at = graph.arcs[a].head;
        path.push(a);
    }
    if !arcs.is_empty() {
        // Flow decomposition left a closed loop of zero net demand; such
        // arcs carry cost >= 0 and an optimal solution has none, but a
        // degenerate optimum may. Drop them and let the audit re-verify.
        arcs.clear();
    }
    Ok(path)
}

/// Price-and-branch: one column generation at the root, then integer
/// enforcement over the fixed column pool within the branching reserve.
/// The reported lower bound is the CG bound.
pub fn price_and_branch(
    prep: &Preprocessed,
    instance: &Instance,
    config: &SolveConfig,
) -> Result<Solution, SolveError> {
    config.validate()?;
    let started = Instant::now();
    let mut master = build_rmp(prep, instance);
    let ctx = PricingContext::new(prep, instance);
    let mut pricing = PricingState::new(&master.freight_ids.clone(), config.phi, config.full_pricing_every, config.slowdown_threshold);

    let cg_deadline = started + config.time_limit.saturating_sub(config.branch_reserve);
    let outcome = column_generation(
        &mut master,
        prep,
        instance,
        &ctx,
        &mut pricing,
        &NodeFilters::default(),
        config.epsilon,
        0.0,
        cg_deadline,
        config.record_pricing,
    )?;
    if outcome.infeasible {
        return Ok(Solution::infeasible(started.elapsed()));
    }

    // Fix the pool, integerize, and branch from the fractional CG point.
    let integer_lp = master.fix_and_integerize();
    let start_point = master.last.as_ref().map(|s| s.x.clone());
    let remaining = config.time_limit.saturating_sub(started.elapsed());
    let budget = remaining.min(config.branch_reserve.max(Duration::from_secs(1)));
    let result = branch_and_bound(
        &integer_lp,
        &MipConfig { time_limit: Some(budget), gap_tol: 1e-9, start: start_point, node_limit: None },
    )
    .map_err(|e| SolveError::Lp { context: "price-and-branch".into(), source: e })?;

    let lb = outcome.lb;
    let solution = match (&result.x, result.status) {
        (Some(x), status) => {
            let sol = solution_from_master_point(prep, instance, &master, x, lb, &outcome, started.elapsed(), match status {
                MipStatus::Optimal | MipStatus::Feasible => None,
                _ => Some(SolveStatus::TimeLimit),
            })?;
            sol
        }
        (None, MipStatus::Infeasible) => Solution::infeasible(started.elapsed()),
        (None, _) => {
            // Time exhausted before any integer point: fall back to the
            // always-feasible all-rejected assignment.
            fallback_all_rejected(prep, instance, lb, &outcome, started.elapsed())?
        }
    };
    audit_solution(prep, instance, &solution)?;
    Ok(solution)
}

/// Builds a Solution from an integer point over the master's variables.
pub(crate) fn solution_from_master_point(
    prep: &Preprocessed,
    instance: &Instance,
    master: &MasterState,
    x: &[f64],
    lb: f64,
    outcome: &CgOutcome,
    wall: Duration,
    status_override: Option<SolveStatus>,
) -> Result<Solution, SolveError> {
    let y: Vec<f64> = master.y.iter().map(|&v| x[v]).collect();
    let xs: Vec<f64> = master.x.iter().map(|&v| x[v]).collect();
    let g: Vec<Vec<f64>> = master.g.iter().map(|gs| gs.iter().map(|&v| x[v]).collect()).collect();
    let mut freight_paths = Vec::new();
    for (ri, &r) in master.freight_ids.iter().enumerate() {
        let mut chosen: Option<usize> = None;
        for (ci, &zv) in master.z[ri].iter().enumerate() {
            if x[zv] > 0.5 {
                chosen = Some(ci);
                break;
            }
        }
        let ci = chosen.ok_or_else(|| SolveError::Audit(format!("request {r}: no path selected")))?;
        freight_paths.push((r, master.columns[ri][ci].arcs.clone()));
    }
    let objective = master.lp.objective_value(x);
    let gap = integrality_gap(objective.max(lb), lb)?;
    let status = status_override.unwrap_or(if gap <= 1e-9 { SolveStatus::Optimal } else { SolveStatus::Feasible });
    Solution::assemble(prep, instance, status, lb, &y, &xs, &freight_paths, &g, outcome.logs.clone(), wall)
}

/// All freight rejected, no units assigned, passengers served by an LP
/// feasibility solve. Valid whenever the instance itself is feasible.
pub(crate) fn fallback_all_rejected(
    prep: &Preprocessed,
    instance: &Instance,
    lb: f64,
    outcome: &CgOutcome,
    wall: Duration,
) -> Result<Solution, SolveError> {
    let mut master = build_rmp(prep, instance);
    // Pin everything to the all-rejected point.
    for h in 0..master.y.len() {
        master.set_y_bounds(h, 0.0, 0.0);
    }
    for si in 0..master.x.len() {
        master.set_x_bounds(si, 0.0, 0.0);
    }
    let status = master.solve()?;
    if status != crate::lp::LpStatus::Optimal {
        return Ok(Solution::infeasible(wall));
    }
    let x = master.last.as_ref().unwrap().x.clone();
    solution_from_master_point(prep, instance, &master, &x, lb, outcome, wall, Some(SolveStatus::TimeLimit))
}
