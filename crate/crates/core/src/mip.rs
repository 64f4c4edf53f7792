//! Best-first branch-and-bound over [`LinearProgram`]s with integrality
//! flags. Branches on the most fractional integer variable (ties by lowest
//! index); node order is by parent bound, then creation order, so runs are
//! deterministic for a fixed input.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::LpError;
use crate::lp::{solve_lp, Basis, LinearProgram, LpStatus};

pub const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    /// Incumbent proven optimal within the gap tolerance.
    Optimal,
    /// Limit reached with an incumbent in hand.
    Feasible,
    /// Limit reached before any incumbent was found.
    Limit,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Incumbent primal values, when one exists.
    pub x: Option<Vec<f64>>,
    /// Incumbent objective; +inf when none.
    pub objective: f64,
    /// Best valid lower bound.
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct MipConfig {
    pub time_limit: Option<Duration>,
    pub gap_tol: f64,
    /// Starting point adopted as initial incumbent if integer feasible.
    pub start: Option<Vec<f64>>,
    pub node_limit: Option<usize>,
}

impl Default for MipConfig {
    fn default() -> Self {
        MipConfig { time_limit: None, gap_tol: 1e-9, start: None, node_limit: None }
    }
}

struct Node {
    id: usize,
    bound: f64,
    lbs: Vec<f64>,
    ubs: Vec<f64>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Node {}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse for best-first on (bound, id).
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn fractionality(v: f64) -> f64 {
    let f = v - v.floor();
    f.min(1.0 - f)
}

fn most_fractional(lp: &LinearProgram, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, var) in lp.vars.iter().enumerate() {
        if !var.integer {
            continue;
        }
        let f = fractionality(x[j]);
        if f > INT_TOL {
            match best {
                Some((_, bf)) if f <= bf => {}
                _ => best = Some((j, f)),
            }
        }
    }
    best.map(|(j, _)| j)
}

fn integer_feasible(lp: &LinearProgram, x: &[f64]) -> bool {
    lp.infeasibility(x) <= 1e-6
        && lp
            .vars
            .iter()
            .zip(x)
            .all(|(v, &xi)| !v.integer || fractionality(xi) <= INT_TOL)
}

/// Solves the MIP: on natural termination the incumbent is optimal within
/// the gap tolerance; on a limit, returns the best incumbent plus a valid
/// bound.
pub fn branch_and_bound(lp: &LinearProgram, config: &MipConfig) -> Result<MipSolution, LpError> {
    let started = Instant::now();
    let mut work = lp.clone();
    let base_lbs: Vec<f64> = lp.vars.iter().map(|v| v.lb).collect();
    let base_ubs: Vec<f64> = lp.vars.iter().map(|v| v.ub).collect();

    let mut incumbent: Option<Vec<f64>> = None;
    let mut incumbent_obj = f64::INFINITY;
    if let Some(start) = &config.start {
        if start.len() == lp.vars.len() && integer_feasible(lp, start) {
            incumbent_obj = lp.objective_value(start);
            incumbent = Some(start.clone());
        }
    }

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node { id: next_id, bound: f64::NEG_INFINITY, lbs: base_lbs, ubs: base_ubs, basis: None });
    next_id += 1;

    let mut nodes_processed = 0usize;
    let mut root_infeasible = false;
    let mut root_unbounded = false;
    let mut best_open_bound = f64::NEG_INFINITY;

    let out_of_budget = |nodes: usize, started: Instant| {
        config.node_limit.map(|nl| nodes >= nl).unwrap_or(false)
            || config.time_limit.map(|tl| started.elapsed() >= tl).unwrap_or(false)
    };

    while let Some(node) = heap.pop() {
        best_open_bound = node.bound;
        // Prune against the incumbent.
        if node.bound >= incumbent_obj - 1e-9 && incumbent.is_some() {
            // Everything left in a best-first queue is at least as bad.
            best_open_bound = incumbent_obj;
            heap.clear();
            break;
        }
        if out_of_budget(nodes_processed, started) {
            heap.push(node);
            break;
        }
        nodes_processed += 1;

        for j in 0..work.vars.len() {
            work.vars[j].lb = node.lbs[j];
            work.vars[j].ub = node.ubs[j];
        }
        let sol = solve_lp(&work, node.basis.as_ref())?;
        match sol.status {
            LpStatus::Infeasible => {
                if node.id == 0 {
                    root_infeasible = true;
                }
                continue;
            }
            LpStatus::Unbounded => {
                if node.id == 0 {
                    root_unbounded = true;
                    break;
                }
                continue;
            }
            LpStatus::IterationLimit => {
                return Err(LpError::Numerical("iteration limit inside branch and bound".into()));
            }
            LpStatus::Optimal => {}
        }
        let relax = sol.objective;
        if incumbent.is_some() && relax >= incumbent_obj - 1e-9 {
            continue;
        }
        match most_fractional(&work, &sol.x) {
            None => {
                // Integral: candidate incumbent.
                if relax < incumbent_obj - 1e-9 {
                    incumbent_obj = relax;
                    incumbent = Some(sol.x.clone());
                }
            }
            Some(j) => {
                let v = sol.x[j];
                let mut down = Node {
                    id: next_id,
                    bound: relax,
                    lbs: node.lbs.clone(),
                    ubs: node.ubs.clone(),
                    basis: Some(sol.basis.clone()),
                };
                next_id += 1;
                down.ubs[j] = v.floor();
                let mut up = Node {
                    id: next_id,
                    bound: relax,
                    lbs: node.lbs,
                    ubs: node.ubs,
                    basis: Some(sol.basis),
                };
                next_id += 1;
                up.lbs[j] = v.ceil();
                if down.lbs[j] <= down.ubs[j] {
                    heap.push(down);
                }
                if up.lbs[j] <= up.ubs[j] {
                    heap.push(up);
                }
            }
        }
    }

    if root_unbounded {
        return Ok(MipSolution { status: MipStatus::Unbounded, x: None, objective: f64::NEG_INFINITY, bound: f64::NEG_INFINITY, gap: f64::INFINITY, nodes: nodes_processed });
    }
    if root_infeasible && incumbent.is_none() {
        return Ok(MipSolution { status: MipStatus::Infeasible, x: None, objective: f64::INFINITY, bound: f64::INFINITY, gap: 0.0, nodes: nodes_processed });
    }

    let exhausted = heap.is_empty();
    let bound = if exhausted {
        if incumbent.is_some() {
            incumbent_obj.min(best_open_bound.max(incumbent_obj))
        } else {
            f64::INFINITY
        }
    } else {
        heap.peek().map(|n| n.bound).unwrap_or(best_open_bound)
    };
    let bound = if incumbent.is_some() { bound.min(incumbent_obj) } else { bound };
    let gap = if incumbent.is_some() {
        (incumbent_obj - bound).max(0.0) / incumbent_obj.abs().max(1e-10)
    } else {
        f64::INFINITY
    };
    let status = match (&incumbent, exhausted) {
        (Some(_), true) => MipStatus::Optimal,
        (Some(_), false) => {
            if gap <= config.gap_tol {
                MipStatus::Optimal
            } else {
                MipStatus::Feasible
            }
        }
        (None, true) => MipStatus::Infeasible,
        (None, false) => MipStatus::Limit,
    };
    Ok(MipSolution { status, x: incumbent, objective: incumbent_obj, bound, gap, nodes: nodes_processed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{RowSense, Variable};

    #[test]
    fn pure_lp_passthrough() {
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(0.0, f64::INFINITY, 1.0));
        lp.add_row(vec![(x, 1.0)], RowSense::Ge, 2.5);
        let mip = branch_and_bound(&lp, &MipConfig::default()).unwrap();
        assert_eq!(mip.status, MipStatus::Optimal);
        assert!((mip.objective - 2.5).abs() < 1e-9);
        let direct = solve_lp(&lp, None).unwrap();
        assert!((direct.objective - mip.objective).abs() < 1e-9);
    }

    #[test]
    fn knapsack_toy_minimized_negation() {
        // max 5a + 4b s.t. 3a + 2b <= 4, binary -> min -5a - 4b, optimum -5.
        let mut lp = LinearProgram::default();
        let a = lp.add_var(Variable::integer(0.0, 1.0, -5.0));
        let b = lp.add_var(Variable::integer(0.0, 1.0, -4.0));
        lp.add_row(vec![(a, 3.0), (b, 2.0)], RowSense::Le, 4.0);
        let mip = branch_and_bound(&lp, &MipConfig::default()).unwrap();
        assert_eq!(mip.status, MipStatus::Optimal);
        assert!((mip.objective + 5.0).abs() < 1e-9);
        let x = mip.x.unwrap();
        assert!((x[a] - 1.0).abs() < 1e-6);
        assert!(x[b].abs() < 1e-6);
    }

    #[test]
    fn integer_rounding_forced() {
        // min x s.t. x >= 1.5, x integer -> 2
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::integer(0.0, 10.0, 1.0));
        lp.add_row(vec![(x, 1.0)], RowSense::Ge, 1.5);
        let mip = branch_and_bound(&lp, &MipConfig::default()).unwrap();
        assert_eq!(mip.status, MipStatus::Optimal);
        assert!((mip.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_mip() {
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::integer(0.0, 1.0, 1.0));
        lp.add_row(vec![(x, 1.0)], RowSense::Ge, 2.0);
        let mip = branch_and_bound(&lp, &MipConfig::default()).unwrap();
        assert_eq!(mip.status, MipStatus::Infeasible);
    }

    #[test]
    fn start_point_used_as_incumbent() {
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::integer(0.0, 5.0, 1.0));
        lp.add_row(vec![(x, 1.0)], RowSense::Ge, 3.0);
        let config = MipConfig { start: Some(vec![4.0]), node_limit: Some(0), ..Default::default() };
        let mip = branch_and_bound(&lp, &config).unwrap();
        // No nodes processed: the start point is the incumbent.
        assert!((mip.objective - 4.0).abs() < 1e-9);
        assert!(matches!(mip.status, MipStatus::Feasible | MipStatus::Optimal));
    }
}
