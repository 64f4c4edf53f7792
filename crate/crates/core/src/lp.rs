//! Linear programming: problem container and a bounded-variable two-phase
//! revised simplex with a dense basis inverse. Returns primal values and
//! exact row duals; supports warmstarting from a previous basis.
//!
//! Dual sign convention (minimization): `<=` rows have nonpositive duals,
//! `>=` rows nonnegative, `=` rows free.

use serde::Serialize;

use crate::error::LpError;

#[derive(Debug, Clone)]
pub struct Variable {
    pub lb: f64,
    pub ub: f64,
    pub objective: f64,
    pub integer: bool,
}

impl Variable {
    pub fn continuous(lb: f64, ub: f64, objective: f64) -> Self {
        Variable { lb, ub, objective, integer: false }
    }

    pub fn integer(lb: f64, ub: f64, objective: f64) -> Self {
        Variable { lb, ub, objective, integer: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Minimization problem over bounded variables.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
}

impl LinearProgram {
    pub fn add_var(&mut self, var: Variable) -> usize {
        self.vars.push(var);
        self.vars.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> usize {
        self.rows.push(Constraint { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for (i, v) in self.vars.iter().enumerate() {
            if v.lb > v.ub {
                return Err(LpError::InconsistentBounds { index: i });
            }
            if !v.objective.is_finite() {
                return Err(LpError::NonFiniteObjective { index: i });
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, _) in &row.coeffs {
                if j >= self.vars.len() {
                    return Err(LpError::UnknownVariable { row: r, var: j });
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, &xi)| v.objective * xi).sum()
    }

    /// Evaluates a row's left-hand side at a point.
    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].coeffs.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Maximum primal violation (bounds and rows) at a point.
    pub fn infeasibility(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lb - xi).max(xi - v.ub);
        }
        for (r, row) in self.rows.iter().enumerate() {
            let lhs = self.row_activity(r, x);
            let gap = match row.sense {
                RowSense::Le => lhs - row.rhs,
                RowSense::Ge => row.rhs - lhs,
                RowSense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    /// Plain-text export in LP format for cross-checking with external
    /// tools. Coefficients printed with 12 significant digits.
    pub fn export_lp_format(&self) -> String {
        fn num(v: f64) -> String {
            let s = format!("{:.12e}", v);
            // normalize "1.000000000000e2" -> plain decimal
            let val: f64 = s.parse().unwrap_or(v);
            format!("{}", val)
        }
        let mut out = String::from("Minimize\n obj:");
        for (j, v) in self.vars.iter().enumerate() {
            if v.objective != 0.0 {
                out.push_str(&format!(" {}{} x{}", if v.objective >= 0.0 { "+" } else { "-" }, num(v.objective.abs()), j));
            }
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!(" c{}:", i));
            for &(j, c) in &row.coeffs {
                out.push_str(&format!(" {}{} x{}", if c >= 0.0 { "+" } else { "-" }, num(c.abs()), j));
            }
            let op = match row.sense {
                RowSense::Le => "<=",
                RowSense::Eq => "=",
                RowSense::Ge => ">=",
            };
            out.push_str(&format!(" {} {}\n", op, num(row.rhs)));
        }
        out.push_str("Bounds\n");
        for (j, v) in self.vars.iter().enumerate() {
            match (v.lb.is_finite(), v.ub.is_finite()) {
                (true, true) => out.push_str(&format!(" {} <= x{} <= {}\n", num(v.lb), j, num(v.ub))),
                (true, false) => out.push_str(&format!(" x{} >= {}\n", j, num(v.lb))),
                (false, true) => out.push_str(&format!(" x{} <= {}\n", j, num(v.ub))),
                (false, false) => out.push_str(&format!(" x{} free\n", j)),
            }
        }
        if self.vars.iter().any(|v| v.integer) {
            out.push_str("General\n");
            for (j, v) in self.vars.iter().enumerate() {
                if v.integer {
                    out.push_str(&format!(" x{}\n", j));
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Warmstart token: basis columns keyed stably so that appending variables
/// keeps an old basis valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisKey {
    Var(usize),
    Slack(usize),
}

#[derive(Debug, Clone, Default)]
pub struct Basis {
    pub basic: Vec<BasisKey>,
    pub at_upper: Vec<BasisKey>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// One dual per row.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
}

const TOL_DUAL: f64 = 1e-9;
const TOL_PIVOT: f64 = 1e-9;
const TOL_FEAS: f64 = 1e-9;
const TOL_PHASE1: f64 = 1e-7;
const REFACTOR_EVERY: usize = 100;
const MAX_ITER: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Simplex {
    m: usize,
    /// Columns: structural, then one slack per row, then artificials.
    n_total: usize,
    n_struct: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    b: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots_since_refactor: usize,
    degenerate_streak: usize,
    bland: bool,
}

impl Simplex {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.vars.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
        let mut b = Vec::with_capacity(m);
        let mut lb: Vec<f64> = lp.vars.iter().map(|v| v.lb).collect();
        let mut ub: Vec<f64> = lp.vars.iter().map(|v| v.ub).collect();
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.coeffs {
                if c != 0.0 {
                    cols[j].push((i, c));
                }
            }
            cols[n + i].push((i, 1.0));
            let (slo, shi) = match row.sense {
                RowSense::Le => (0.0, f64::INFINITY),
                RowSense::Ge => (f64::NEG_INFINITY, 0.0),
                RowSense::Eq => (0.0, 0.0),
            };
            lb.push(slo);
            ub.push(shi);
            b.push(row.rhs);
        }
        let mut cost: Vec<f64> = lp.vars.iter().map(|v| v.objective).collect();
        cost.extend(std::iter::repeat(0.0).take(m));
        Simplex {
            m,
            n_total: n + m,
            n_struct: n,
            cols,
            lb,
            ub,
            cost,
            b,
            state: Vec::new(),
            basis: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            pivots_since_refactor: 0,
            degenerate_streak: 0,
            bland: false,
        }
    }

    /// Nonbasic resting value of a column.
    fn rest_value(&self, j: usize, s: State) -> f64 {
        match s {
            State::Basic(_) => unreachable!(),
            State::AtLower => {
                if self.lb[j].is_finite() {
                    self.lb[j]
                } else if self.ub[j].is_finite() {
                    self.ub[j]
                } else {
                    0.0
                }
            }
            State::AtUpper => {
                if self.ub[j].is_finite() {
                    self.ub[j]
                } else if self.lb[j].is_finite() {
                    self.lb[j]
                } else {
                    0.0
                }
            }
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::Basic(pos) => self.xb[pos],
            s => self.rest_value(j, s),
        }
    }

    /// b - sum over nonbasic columns of A_j * value_j.
    fn rhs_minus_nonbasic(&self) -> Vec<f64> {
        let mut r = self.b.clone();
        for j in 0..self.n_total {
            if let State::Basic(_) = self.state[j] {
                continue;
            }
            let v = self.value(j);
            if v != 0.0 {
                for &(i, c) in &self.cols[j] {
                    r[i] -= c * v;
                }
            }
        }
        r
    }

    /// Rebuilds the dense basis inverse from the basis columns.
    /// Returns false when the basis matrix is singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            for &(i, c) in &self.cols[j] {
                mat[i * m + pos] = c;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut best = col;
            let mut best_abs = mat[col * m + col].abs();
            for r in col + 1..m {
                let a = mat[r * m + col].abs();
                if a > best_abs {
                    best_abs = a;
                    best = r;
                }
            }
            if best_abs < 1e-12 {
                return false;
            }
            if best != col {
                for k in 0..m {
                    mat.swap(col * m + k, best * m + k);
                    inv.swap(col * m + k, best * m + k);
                }
            }
            let piv = mat[col * m + col];
            for k in 0..m {
                mat[col * m + k] /= piv;
                inv[col * m + k] /= piv;
            }
            for r in 0..m {
                if r != col {
                    let f = mat[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            mat[r * m + k] -= f * mat[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;
        true
    }

    fn recompute_xb(&mut self) {
        let r = self.rhs_minus_nonbasic();
        let m = self.m;
        let mut xb = vec![0.0; m];
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.binv[i * m + k] * r[k];
            }
            xb[i] = acc;
        }
        self.xb = xb;
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for k in 0..m {
            y[k] = (0..m).map(|pos| cost[self.basis[pos]] * self.binv[pos * m + k]).sum();
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], cost: &[f64]) -> f64 {
        let mut d = cost[j];
        for &(i, c) in &self.cols[j] {
            d -= y[i] * c;
        }
        d
    }

    fn binv_times_col(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(i, c) in &self.cols[j] {
            for r in 0..m {
                let v = self.binv[r * m + i] * c;
                if v != 0.0 {
                    w[r] += v;
                }
            }
        }
        w
    }

    /// One simplex phase over the provided cost vector.
    /// Returns Optimal (no improving column) or Unbounded.
    fn iterate(&mut self, cost: &[f64], iter_budget: &mut usize) -> LpStatus {
        loop {
            if *iter_budget == 0 {
                return LpStatus::IterationLimit;
            }
            *iter_budget -= 1;

            let y = self.duals(cost);
            // Entering column.
            let mut enter: Option<(usize, f64, i8)> = None;
            for j in 0..self.n_total {
                match self.state[j] {
                    State::Basic(_) => continue,
                    s => {
                        if self.lb[j] == self.ub[j] {
                            continue; // fixed
                        }
                        let d = self.reduced_cost(j, &y, cost);
                        let free = self.lb[j].is_infinite() && self.ub[j].is_infinite();
                        let (viol, dir): (f64, i8) = if free {
                            if d < -TOL_DUAL {
                                (-d, 1)
                            } else if d > TOL_DUAL {
                                (d, -1)
                            } else {
                                continue;
                            }
                        } else {
                            match s {
                                State::AtLower => {
                                    if d < -TOL_DUAL {
                                        (-d, 1)
                                    } else {
                                        continue;
                                    }
                                }
                                State::AtUpper => {
                                    if d > TOL_DUAL {
                                        (d, -1)
                                    } else {
                                        continue;
                                    }
                                }
                                State::Basic(_) => unreachable!(),
                            }
                        };
                        let better = match enter {
                            None => true,
                            Some((bj, bv, _)) => {
                                if self.bland {
                                    j < bj
                                } else {
                                    viol > bv + 1e-12
                                }
                            }
                        };
                        if better {
                            enter = Some((j, viol, dir));
                            if self.bland {
                                break;
                            }
                        }
                    }
                }
            }
            let (j_in, _, dir) = match enter {
                Some(e) => e,
                None => return LpStatus::Optimal,
            };
            let sigma = dir as f64;
            let w = self.binv_times_col(j_in);

            // Ratio test: basic variables hitting a bound, and the entering
            // variable reaching its opposite bound.
            let own_span = self.ub[j_in] - self.lb[j_in];
            let mut t_best = if own_span.is_finite() { own_span } else { f64::INFINITY };
            let mut leave: Option<usize> = None; // basis position
            for pos in 0..self.m {
                let delta = sigma * w[pos];
                if delta.abs() <= TOL_PIVOT {
                    continue;
                }
                let jb = self.basis[pos];
                let t = if delta > 0.0 {
                    if self.lb[jb].is_finite() {
                        (self.xb[pos] - self.lb[jb]).max(0.0) / delta
                    } else {
                        continue;
                    }
                } else if self.ub[jb].is_finite() {
                    (self.ub[jb] - self.xb[pos]).max(0.0) / (-delta)
                } else {
                    continue;
                };
                let replace = match leave {
                    None => t < t_best - TOL_FEAS,
                    Some(cur) => {
                        t < t_best - TOL_FEAS
                            || (t <= t_best + TOL_FEAS
                                && if self.bland {
                                    self.basis[pos] < self.basis[cur]
                                } else {
                                    w[pos].abs() > w[cur].abs() + 1e-12
                                })
                    }
                };
                if replace {
                    t_best = t.min(t_best);
                    leave = Some(pos);
                } else if leave.is_none() && t <= t_best + TOL_FEAS {
                    t_best = t.min(t_best);
                    leave = Some(pos);
                }
            }

            if t_best.is_infinite() {
                return LpStatus::Unbounded;
            }
            if t_best <= 1e-11 {
                self.degenerate_streak += 1;
                if self.degenerate_streak > 100 {
                    self.bland = true;
                }
            } else {
                self.degenerate_streak = 0;
                self.bland = false;
            }

            // Apply the step.
            let entering_from = self.value(j_in);
            for pos in 0..self.m {
                self.xb[pos] -= sigma * t_best * w[pos];
            }
            match leave {
                None => {
                    // Bound flip: entering moves to its other bound.
                    self.state[j_in] = if sigma > 0.0 { State::AtUpper } else { State::AtLower };
                }
                Some(pos) => {
                    let j_out = self.basis[pos];
                    let delta = sigma * w[pos];
                    self.state[j_out] = if delta > 0.0 { State::AtLower } else { State::AtUpper };
                    self.basis[pos] = j_in;
                    self.state[j_in] = State::Basic(pos);
                    self.xb[pos] = entering_from + sigma * t_best;
                    // Rank-one update of the inverse.
                    let m = self.m;
                    let piv = w[pos];
                    if piv.abs() < 1e-11 || self.pivots_since_refactor >= REFACTOR_EVERY {
                        if !self.refactor() {
                            return LpStatus::IterationLimit;
                        }
                        self.recompute_xb();
                    } else {
                        for k in 0..m {
                            self.binv[pos * m + k] /= piv;
                        }
                        for r in 0..m {
                            if r != pos {
                                let f = w[r];
                                if f != 0.0 {
                                    for k in 0..m {
                                        self.binv[r * m + k] -= f * self.binv[pos * m + k];
                                    }
                                }
                            }
                        }
                        self.pivots_since_refactor += 1;
                    }
                }
            }
        }
    }

    /// Resting state for a nonbasic column: lower bound when finite, else
    /// upper bound when finite, else nonbasic at zero.
    fn default_state(&self, j: usize) -> State {
        if self.lb[j].is_finite() || self.ub[j].is_infinite() {
            State::AtLower
        } else {
            State::AtUpper
        }
    }

    fn reset_states(&mut self) {
        self.state = (0..self.n_total).map(|j| self.default_state(j)).collect();
    }

    /// Installs a starting basis (all-slack by default), then drives
    /// phase 1 with artificial columns if that start is infeasible.
    fn prepare(&mut self, lp: &LinearProgram, warmstart: Option<&Basis>) -> Result<Option<LpStatus>, LpError> {
        let n = self.n_struct;
        self.reset_states();
        self.basis.clear();

        let mut installed = false;
        if let Some(basis) = warmstart {
            if basis.basic.len() == self.m {
                let mut ok = true;
                let mut basic_cols = Vec::with_capacity(self.m);
                for key in &basis.basic {
                    let j = match key {
                        BasisKey::Var(v) if *v < n => *v,
                        BasisKey::Slack(s) if *s < self.m => n + *s,
                        _ => {
                            ok = false;
                            break;
                        }
                    };
                    basic_cols.push(j);
                }
                if ok {
                    let mut seen = vec![false; self.n_total];
                    for &j in &basic_cols {
                        if seen[j] {
                            ok = false;
                            break;
                        }
                        seen[j] = true;
                    }
                    if ok {
                        self.basis = basic_cols;
                        for (pos, &j) in self.basis.clone().iter().enumerate() {
                            self.state[j] = State::Basic(pos);
                        }
                        for key in &basis.at_upper {
                            let j = match key {
                                BasisKey::Var(v) if *v < n => *v,
                                BasisKey::Slack(s) if *s < self.m => n + *s,
                                _ => continue,
                            };
                            if !matches!(self.state[j], State::Basic(_)) && self.ub[j].is_finite() {
                                self.state[j] = State::AtUpper;
                            }
                        }
                        if self.refactor() {
                            self.recompute_xb();
                            let feasible = (0..self.m).all(|pos| {
                                let j = self.basis[pos];
                                self.xb[pos] >= self.lb[j] - 1e-7 && self.xb[pos] <= self.ub[j] + 1e-7
                            });
                            if feasible {
                                installed = true;
                            }
                        }
                        if !installed {
                            self.reset_states();
                            self.basis.clear();
                        }
                    }
                }
            }
        }

        if installed {
            return Ok(None);
        }

        // Cold start: slack basis, structural at their resting bound.
        self.basis = (n..self.n_total).collect();
        for (pos, &j) in self.basis.clone().iter().enumerate() {
            self.state[j] = State::Basic(pos);
        }
        if !self.refactor() {
            return Err(LpError::Numerical("identity refactor failed".into()));
        }
        self.recompute_xb();

        // Rows whose slack value violates the slack bounds need artificials.
        let mut artificials: Vec<usize> = Vec::new();
        let mut art_cost_rows: Vec<(usize, f64)> = Vec::new();
        for pos in 0..self.m {
            let j = self.basis[pos];
            let v = self.xb[pos];
            if v < self.lb[j] - TOL_FEAS || v > self.ub[j] + TOL_FEAS {
                // Park the slack at its nearest bound and cover the residual
                // with an artificial of matching sign.
                let parked = v.clamp(self.lb[j], self.ub[j]);
                let residual = v - parked;
                self.state[j] = if parked == self.lb[j] { State::AtLower } else { State::AtUpper };
                let row = pos; // slack basis: position == row
                let col_id = self.n_total + artificials.len();
                let sign = if residual >= 0.0 { 1.0 } else { -1.0 };
                artificials.push(col_id);
                art_cost_rows.push((row, sign));
            }
        }
        if artificials.is_empty() {
            return Ok(None);
        }
        for &(row, sign) in &art_cost_rows {
            self.cols.push(vec![(row, sign)]);
            self.lb.push(0.0);
            self.ub.push(f64::INFINITY);
            self.cost.push(0.0);
        }
        let first_art = self.n_total;
        self.n_total += artificials.len();
        self.state.extend(std::iter::repeat(State::AtLower).take(artificials.len()));
        for (k, &(row, _)) in art_cost_rows.iter().enumerate() {
            let j = first_art + k;
            let old = self.basis[row];
            debug_assert!(matches!(self.state[old], State::AtLower | State::AtUpper));
            self.basis[row] = j;
            self.state[j] = State::Basic(row);
        }
        if !self.refactor() {
            return Err(LpError::Numerical("phase-1 refactor failed".into()));
        }
        self.recompute_xb();

        // Phase 1: minimize the sum of artificials.
        let mut phase1_cost = vec![0.0; self.n_total];
        for &j in &artificials {
            phase1_cost[j] = 1.0;
        }
        let mut budget = MAX_ITER;
        let status = self.iterate(&phase1_cost, &mut budget);
        if status == LpStatus::IterationLimit {
            return Ok(Some(LpStatus::IterationLimit));
        }
        let infeas: f64 = artificials.iter().map(|&j| self.value(j).max(0.0)).sum();
        if infeas > TOL_PHASE1 {
            return Ok(Some(LpStatus::Infeasible));
        }
        // Pin artificials at zero for phase 2.
        for &j in &artificials {
            self.lb[j] = 0.0;
            self.ub[j] = 0.0;
        }
        let _ = lp;
        Ok(None)
    }

    fn extract(&self, lp: &LinearProgram, status: LpStatus) -> LpSolution {
        let n = self.n_struct;
        let mut x = vec![0.0; n];
        for j in 0..n {
            x[j] = self.value(j);
            // Clean tiny bound violations from floating point noise.
            if self.lb[j].is_finite() && x[j] < self.lb[j] && x[j] > self.lb[j] - 1e-7 {
                x[j] = self.lb[j];
            }
            if self.ub[j].is_finite() && x[j] > self.ub[j] && x[j] < self.ub[j] + 1e-7 {
                x[j] = self.ub[j];
            }
        }
        let duals = if status == LpStatus::Optimal {
            self.duals(&self.cost)
        } else {
            vec![0.0; self.m]
        };
        let mut basis = Basis::default();
        for &j in &self.basis {
            if j < n {
                basis.basic.push(BasisKey::Var(j));
            } else if j < n + self.m {
                basis.basic.push(BasisKey::Slack(j - n));
            } else {
                // Artificial stuck in the basis at zero: remember its row's
                // slack instead; the next warmstart check will verify.
                basis.basic.push(BasisKey::Slack(self.basis.iter().position(|&b| b == j).unwrap_or(0)));
            }
        }
        for j in 0..n + self.m {
            if matches!(self.state[j], State::AtUpper) {
                let key = if j < n { BasisKey::Var(j) } else { BasisKey::Slack(j - n) };
                basis.at_upper.push(key);
            }
        }
        let objective = lp.objective_value(&x);
        LpSolution { status, x, duals, objective, basis }
    }
}

/// Solves a linear program to optimality with exact duals.
/// Deterministic for a fixed input and warmstart basis.
pub fn solve_lp(lp: &LinearProgram, warmstart: Option<&Basis>) -> Result<LpSolution, LpError> {
    lp.validate()?;
    if lp.rows.is_empty() {
        // Pure bound problem: each variable rests at its cheapest bound.
        let mut x = Vec::with_capacity(lp.vars.len());
        for v in &lp.vars {
            let xi = if v.objective > 0.0 {
                if v.lb.is_finite() {
                    v.lb
                } else {
                    return Ok(LpSolution { status: LpStatus::Unbounded, x: vec![], duals: vec![], objective: f64::NEG_INFINITY, basis: Basis::default() });
                }
            } else if v.objective < 0.0 {
                if v.ub.is_finite() {
                    v.ub
                } else {
                    return Ok(LpSolution { status: LpStatus::Unbounded, x: vec![], duals: vec![], objective: f64::NEG_INFINITY, basis: Basis::default() });
                }
            } else if v.lb.is_finite() {
                v.lb
            } else if v.ub.is_finite() {
                v.ub
            } else {
                0.0
            };
            x.push(xi);
        }
        let objective = lp.objective_value(&x);
        return Ok(LpSolution { status: LpStatus::Optimal, x, duals: vec![], objective, basis: Basis::default() });
    }

    let mut s = Simplex::new(lp);
    if let Some(early) = s.prepare(lp, warmstart)? {
        return Ok(s.extract(lp, early));
    }
    let cost = s.cost.clone();
    let mut budget = MAX_ITER;
    let status = s.iterate(&cost, &mut budget);
    Ok(s.extract(lp, status))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable_lower_bound_row() {
        // min x s.t. x >= 3
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(f64::NEG_INFINITY, f64::INFINITY, 1.0));
        lp.add_row(vec![(x, 1.0)], RowSense::Ge, 3.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[x] - 3.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.0).abs() < 1e-9, "dual {}", sol.duals[0]);
    }

    #[test]
    fn symmetric_packing_lp() {
        // min -x - y s.t. x + y <= 1, x, y >= 0
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(0.0, f64::INFINITY, -1.0));
        let y = lp.add_var(Variable::continuous(0.0, f64::INFINITY, -1.0));
        lp.add_row(vec![(x, 1.0), (y, 1.0)], RowSense::Le, 1.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-9);
        assert!((sol.duals[0] + 1.0).abs() < 1e-9, "dual {}", sol.duals[0]);
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(0.0, 1.0, 1.0));
        lp.add_row(vec![(x, 1.0)], RowSense::Ge, 2.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(0.0, f64::INFINITY, -1.0));
        lp.add_row(vec![(x, -1.0)], RowSense::Le, 0.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_free_duals() {
        // min x + 2y s.t. x + y = 4, x - y = 0 -> x = y = 2
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(0.0, f64::INFINITY, 1.0));
        let y = lp.add_var(Variable::continuous(0.0, f64::INFINITY, 2.0));
        lp.add_row(vec![(x, 1.0), (y, 1.0)], RowSense::Eq, 4.0);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], RowSense::Eq, 0.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[x] - 2.0).abs() < 1e-9);
        assert!((sol.x[y] - 2.0).abs() < 1e-9);
        assert!((sol.objective - 6.0).abs() < 1e-9);
        // strong duality: b'y == objective
        let dual_obj = 4.0 * sol.duals[0];
        assert!((dual_obj - sol.objective).abs() < 1e-6);
    }

    #[test]
    fn bounded_variables_and_upper_rest() {
        // min -x s.t. x <= 10 (bound), row x + y <= 12, y in [0, 5]
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(0.0, 10.0, -1.0));
        let y = lp.add_var(Variable::continuous(0.0, 5.0, -0.5));
        lp.add_row(vec![(x, 1.0), (y, 1.0)], RowSense::Le, 12.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[x] - 10.0).abs() < 1e-9);
        assert!((sol.x[y] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn warmstart_reuses_basis_after_adding_column() {
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(0.0, f64::INFINITY, 2.0));
        lp.add_row(vec![(x, 1.0)], RowSense::Ge, 1.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        // New cheaper column enters against the warmstart basis.
        let z = lp.add_var(Variable::continuous(0.0, f64::INFINITY, 1.0));
        lp.rows[0].coeffs.push((z, 1.0));
        let sol2 = solve_lp(&lp, Some(&sol.basis)).unwrap();
        assert_eq!(sol2.status, LpStatus::Optimal);
        assert!((sol2.objective - 1.0).abs() < 1e-9);
        assert!((sol2.x[z] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_lp_terminates() {
        // Many redundant rows through the same vertex.
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::continuous(0.0, f64::INFINITY, 1.0));
        let y = lp.add_var(Variable::continuous(0.0, f64::INFINITY, 1.0));
        for _ in 0..6 {
            lp.add_row(vec![(x, 1.0), (y, 1.0)], RowSense::Ge, 2.0);
        }
        lp.add_row(vec![(x, 1.0), (y, -1.0)], RowSense::Ge, 0.0);
        let sol = solve_lp(&lp, None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn export_mentions_rows_and_bounds() {
        let mut lp = LinearProgram::default();
        let x = lp.add_var(Variable::integer(0.0, 3.0, 1.5));
        lp.add_row(vec![(x, 2.0)], RowSense::Le, 6.0);
        let text = lp.export_lp_format();
        assert!(text.contains("Minimize"));
        assert!(text.contains("c0:"));
        assert!(text.contains("General"));
    }
}
