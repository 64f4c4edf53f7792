//! Model formulations: the arc-based MIP over the expanded graph and the
//! path-based restricted master used by column generation, plus the
//! mapping from master rows to named dual vectors.

use std::collections::{HashMap, HashSet};

use crate::error::SolveError;
use crate::graph::{ArcClass, ExpandedGraph, Preprocessed};
use crate::lp::{Basis, LinearProgram, LpSolution, LpStatus, RowSense, Variable};
use crate::model::Instance;

/// A freight path column: arc incidence over the freight arc set, its
/// routing cost, and the owning request.
#[derive(Debug, Clone)]
pub struct Column {
    pub request: usize,
    /// Arc ids in traversal order from origin to destination.
    pub arcs: Vec<usize>,
    /// Sum of arc costs along the path (per unit of demand).
    pub routing_cost: f64,
    /// Uniqueness key: sorted arc ids.
    pub key: Vec<usize>,
}

impl Column {
    pub fn new(graph: &ExpandedGraph, request: usize, arcs: Vec<usize>) -> Self {
        let routing_cost = arcs.iter().map(|&a| graph.arcs[a].cost).sum();
        let mut key = arcs.clone();
        key.sort_unstable();
        Column { request, arcs, routing_cost, key }
    }

    /// The dummy path: reject the request.
    pub fn dummy(graph: &ExpandedGraph, request: usize) -> Self {
        let arc = graph
            .arcs
            .iter()
            .enumerate()
            .find(|(_, a)| a.class == ArcClass::Dummy && a.request == Some(request))
            .map(|(id, _)| id)
            .expect("freight request without dummy arc");
        Column::new(graph, request, vec![arc])
    }

    pub fn is_dummy(&self, graph: &ExpandedGraph) -> bool {
        self.arcs.len() == 1 && graph.arcs[self.arcs[0]].class == ArcClass::Dummy
    }

    pub fn segment_arcs<'a>(&'a self, graph: &'a ExpandedGraph) -> impl Iterator<Item = usize> + 'a {
        self.arcs.iter().copied().filter(|&a| graph.arcs[a].class == ArcClass::Segment)
    }
}

/// Variable and row handles of the arc-based MIP.
#[derive(Debug, Clone)]
pub struct ArcMip {
    pub lp: LinearProgram,
    /// y variable per vehicle.
    pub y: Vec<usize>,
    /// Segment arc ids in fixed order with their x variables.
    pub segments: Vec<usize>,
    pub x: Vec<usize>,
    /// Freight arc set in fixed order.
    pub freight_arcs: Vec<usize>,
    /// f variable per (freight request ordinal, freight arc ordinal).
    pub f: HashMap<(usize, usize), usize>,
    /// g variable per request and path index.
    pub g: Vec<Vec<usize>>,
    /// Freight request indices in instance order.
    pub freight_ids: Vec<usize>,
    pub row_service: usize,
    /// (request, vertex, row) for flow conservation.
    pub rows_flow: Vec<(usize, usize, usize)>,
    pub rows_contracted: Vec<(usize, usize)>,
    pub rows_uncontracted: Vec<(usize, usize)>,
    pub rows_freight_cap: Vec<(usize, usize)>,
    pub rows_pass_convexity: Vec<(usize, usize)>,
    pub rows_unit_alloc: Vec<(usize, usize)>,
    pub rows_unit_budget: Vec<(usize, usize)>,
}

/// Transcribes the arc-based formulation: design variables y, capacity
/// allocations x on segment arcs, passenger path fractions g, and binary
/// freight flows f over the freight arc set, with flow conservation at
/// origins, destinations and terminal representations only.
pub fn build_arc_mip(prep: &Preprocessed, instance: &Instance) -> ArcMip {
    let graph = &prep.graph;
    let mut lp = LinearProgram::default();

    let y: Vec<usize> = instance
        .network
        .routes
        .iter()
        .map(|r| lp.add_var(Variable::integer(0.0, r.units as f64, instance.costs.design_cost)))
        .collect();

    let segments = graph.segment_arcs();
    let x: Vec<usize> = segments
        .iter()
        .map(|_| lp.add_var(Variable::integer(0.0, f64::INFINITY, 0.0)))
        .collect();
    let segment_ordinal: HashMap<usize, usize> = segments.iter().enumerate().map(|(i, &a)| (a, i)).collect();

    let g: Vec<Vec<usize>> = instance
        .requests
        .iter()
        .enumerate()
        .map(|(r, _)| {
            prep.passenger_paths.paths[r]
                .iter()
                .map(|_| lp.add_var(Variable::continuous(0.0, f64::INFINITY, 0.0)))
                .collect()
        })
        .collect();

    let freight_ids: Vec<usize> = instance.freight_requests().map(|(r, _)| r).collect();
    let freight_arcs: Vec<usize> = (0..graph.arcs.len())
        .filter(|&a| !graph.arcs[a].pruned && graph.freight_arc[a])
        .collect();
    let mut f = HashMap::new();
    for (ri, &r) in freight_ids.iter().enumerate() {
        let q = instance.requests[r].demand;
        for (ai, &a) in freight_arcs.iter().enumerate() {
            let cost = q * graph.arcs[a].cost;
            let var = lp.add_var(Variable::integer(0.0, 1.0, cost));
            f.insert((ri, ai), var);
        }
    }
    let arc_ordinal: HashMap<usize, usize> = freight_arcs.iter().enumerate().map(|(i, &a)| (a, i)).collect();

    // Service level over all passenger demand.
    let total_pax_demand: f64 = instance.passenger_requests().map(|(_, r)| r.demand).sum();
    let mut service_coeffs = Vec::new();
    for (r, req) in instance.passenger_requests() {
        for &gv in &g[r] {
            service_coeffs.push((gv, req.demand));
        }
    }
    let row_service = lp.add_row(service_coeffs, RowSense::Ge, instance.params.chi * total_pax_demand);

    // Flow conservation per freight request at origins, destinations and
    // terminal representations.
    let mut rows_flow = Vec::new();
    let conservation = graph.conservation_vertices();
    for (ri, &r) in freight_ids.iter().enumerate() {
        for &v in &conservation {
            let mut coeffs = Vec::new();
            for &a in &graph.freight_out[v] {
                coeffs.push((f[&(ri, arc_ordinal[&a])], 1.0));
            }
            for &a in &graph.freight_in[v] {
                coeffs.push((f[&(ri, arc_ordinal[&a])], -1.0));
            }
            let rhs = graph.vertex_demand(r, v) as f64;
            let row = lp.add_row(coeffs, RowSense::Eq, rhs);
            rows_flow.push((r, v, row));
        }
    }

    // Passenger capacity on contracted and uncontracted vehicle arcs.
    let path_users = vehicle_arc_users(prep);
    let mut rows_contracted = Vec::new();
    let mut rows_uncontracted = Vec::new();
    for (a, arc) in graph.live_arcs(ArcClass::Vehicle) {
        let h = arc.vehicle.expect("vehicle arc without vehicle");
        let lambda = instance.network.routes[h].unit_capacity;
        let kappa = instance.network.routes[h].units as f64;
        let mut coeffs = Vec::new();
        if let Some(users) = path_users.get(&a) {
            for &(r, p) in users {
                coeffs.push((g[r][p], instance.requests[r].demand));
            }
        }
        match graph.contraction.get(&a) {
            Some(&seg) => {
                coeffs.push((x[segment_ordinal[&seg]], lambda));
                let row = lp.add_row(coeffs, RowSense::Le, lambda * kappa);
                rows_contracted.push((a, row));
            }
            None => {
                let row = lp.add_row(coeffs, RowSense::Le, lambda * kappa);
                rows_uncontracted.push((a, row));
            }
        }
    }

    // Freight capacity per segment.
    let mut rows_freight_cap = Vec::new();
    for (si, &seg) in segments.iter().enumerate() {
        let h = graph.arcs[seg].vehicle.expect("segment without vehicle");
        let lambda = instance.network.routes[h].unit_capacity;
        let mut coeffs = Vec::new();
        for (ri, &r) in freight_ids.iter().enumerate() {
            coeffs.push((f[&(ri, arc_ordinal[&seg])], instance.requests[r].demand));
        }
        coeffs.push((x[si], -lambda));
        let row = lp.add_row(coeffs, RowSense::Le, 0.0);
        rows_freight_cap.push((seg, row));
    }

    // Passenger flow per request sums to at most one.
    let mut rows_pass_convexity = Vec::new();
    for (r, _) in instance.passenger_requests() {
        let coeffs: Vec<(usize, f64)> = g[r].iter().map(|&gv| (gv, 1.0)).collect();
        let row = lp.add_row(coeffs, RowSense::Le, 1.0);
        rows_pass_convexity.push((r, row));
    }

    // Unit allocation bounded by assigned units, and assigned units by the
    // vehicle's unit count.
    let mut rows_unit_alloc = Vec::new();
    for (si, &seg) in segments.iter().enumerate() {
        let h = graph.arcs[seg].vehicle.unwrap();
        let row = lp.add_row(vec![(x[si], 1.0), (y[h], -1.0)], RowSense::Le, 0.0);
        rows_unit_alloc.push((seg, row));
    }
    let mut rows_unit_budget = Vec::new();
    for (h, route) in instance.network.routes.iter().enumerate() {
        let row = lp.add_row(vec![(y[h], 1.0)], RowSense::Le, route.units as f64);
        rows_unit_budget.push((h, row));
    }

    ArcMip {
        lp,
        y,
        segments,
        x,
        freight_arcs,
        f,
        g,
        freight_ids,
        row_service,
        rows_flow,
        rows_contracted,
        rows_uncontracted,
        rows_freight_cap,
        rows_pass_convexity,
        rows_unit_alloc,
        rows_unit_budget,
    }
}

/// Vehicle arc id -> passenger (request, path index) pairs using it.
fn vehicle_arc_users(prep: &Preprocessed) -> HashMap<usize, Vec<(usize, usize)>> {
    let mut users: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (r, paths) in prep.passenger_paths.paths.iter().enumerate() {
        for (p, path) in paths.iter().enumerate() {
            for a in path.vehicle_arcs(&prep.graph) {
                users.entry(a).or_default().push((r, p));
            }
        }
    }
    users
}

/// Row duals of the master named by role. Sign conventions are enforced
/// at extraction.
#[derive(Debug, Clone, Default)]
pub struct DualValues {
    /// Per segment arc id, from the path-based freight capacity rows
    /// (nonpositive).
    pub segment_capacity: HashMap<usize, f64>,
    /// Per freight request id, from the convexity rows (free).
    pub convexity: HashMap<usize, f64>,
    /// Service level row (nonnegative).
    pub service_level: f64,
    /// Per contracted vehicle arc id (nonpositive).
    pub contracted_cap: HashMap<usize, f64>,
    /// Per uncontracted vehicle arc id (nonpositive).
    pub uncontracted_cap: HashMap<usize, f64>,
    /// Per passenger request id (nonpositive).
    pub passenger_convexity: HashMap<usize, f64>,
    /// Per segment arc id, from the unit allocation rows (nonpositive).
    pub unit_allocation: HashMap<usize, f64>,
    /// Per vehicle, from the unit budget rows (nonpositive).
    pub unit_budget: Vec<f64>,
}

/// The restricted master: continuous relaxation of the path-based
/// formulation over the current column pool. Every freight request keeps
/// its dummy column, so the master stays feasible throughout column
/// generation (absent branching filters).
#[derive(Debug, Clone)]
pub struct MasterState {
    pub lp: LinearProgram,
    pub y: Vec<usize>,
    pub segments: Vec<usize>,
    pub x: Vec<usize>,
    pub g: Vec<Vec<usize>>,
    pub freight_ids: Vec<usize>,
    /// Column pool and z variable ids, parallel per freight ordinal.
    pub columns: Vec<Vec<Column>>,
    pub z: Vec<Vec<usize>>,
    keys: Vec<HashSet<Vec<usize>>>,
    pub row_service: usize,
    pub rows_contracted: Vec<(usize, usize)>,
    pub rows_uncontracted: Vec<(usize, usize)>,
    pub rows_pass_convexity: Vec<(usize, usize)>,
    pub rows_unit_alloc: Vec<(usize, usize)>,
    pub rows_unit_budget: Vec<(usize, usize)>,
    /// (segment arc id, row) for the path-based freight capacity rows.
    pub rows_alpha: Vec<(usize, usize)>,
    /// (freight request id, row) for the convexity rows.
    pub rows_convexity: Vec<(usize, usize)>,
    pub last: Option<LpSolution>,
    pub duplicates_skipped: usize,
    segment_ordinal: HashMap<usize, usize>,
    freight_ordinal: HashMap<usize, usize>,
}

/// Builds the restricted master seeded with the dummy column per freight
/// request, so the initial solution rejects everything.
pub fn build_rmp(prep: &Preprocessed, instance: &Instance) -> MasterState {
    let graph = &prep.graph;
    let mut lp = LinearProgram::default();

    let y: Vec<usize> = instance
        .network
        .routes
        .iter()
        .map(|r| lp.add_var(Variable::continuous(0.0, r.units as f64, instance.costs.design_cost)))
        .collect();
    let segments = graph.segment_arcs();
    let x: Vec<usize> = segments
        .iter()
        .map(|_| lp.add_var(Variable::continuous(0.0, f64::INFINITY, 0.0)))
        .collect();
    let segment_ordinal: HashMap<usize, usize> = segments.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let g: Vec<Vec<usize>> = instance
        .requests
        .iter()
        .enumerate()
        .map(|(r, _)| {
            prep.passenger_paths.paths[r]
                .iter()
                .map(|_| lp.add_var(Variable::continuous(0.0, f64::INFINITY, 0.0)))
                .collect()
        })
        .collect();

    let total_pax_demand: f64 = instance.passenger_requests().map(|(_, r)| r.demand).sum();
    let mut service_coeffs = Vec::new();
    for (r, req) in instance.passenger_requests() {
        for &gv in &g[r] {
            service_coeffs.push((gv, req.demand));
        }
    }
    let row_service = lp.add_row(service_coeffs, RowSense::Ge, instance.params.chi * total_pax_demand);

    let path_users = vehicle_arc_users(prep);
    let mut rows_contracted = Vec::new();
    let mut rows_uncontracted = Vec::new();
    for (a, arc) in graph.live_arcs(ArcClass::Vehicle) {
        let h = arc.vehicle.unwrap();
        let lambda = instance.network.routes[h].unit_capacity;
        let kappa = instance.network.routes[h].units as f64;
        let mut coeffs = Vec::new();
        if let Some(users) = path_users.get(&a) {
            for &(r, p) in users {
                coeffs.push((g[r][p], instance.requests[r].demand));
            }
        }
        match graph.contraction.get(&a) {
            Some(&seg) => {
                coeffs.push((x[segment_ordinal[&seg]], lambda));
                let row = lp.add_row(coeffs, RowSense::Le, lambda * kappa);
                rows_contracted.push((a, row));
            }
            None => {
                let row = lp.add_row(coeffs, RowSense::Le, lambda * kappa);
                rows_uncontracted.push((a, row));
            }
        }
    }

    let mut rows_pass_convexity = Vec::new();
    for (r, _) in instance.passenger_requests() {
        let coeffs: Vec<(usize, f64)> = g[r].iter().map(|&gv| (gv, 1.0)).collect();
        let row = lp.add_row(coeffs, RowSense::Le, 1.0);
        rows_pass_convexity.push((r, row));
    }

    let mut rows_unit_alloc = Vec::new();
    for (si, &seg) in segments.iter().enumerate() {
        let h = graph.arcs[seg].vehicle.unwrap();
        let row = lp.add_row(vec![(x[si], 1.0), (y[h], -1.0)], RowSense::Le, 0.0);
        rows_unit_alloc.push((seg, row));
    }
    let mut rows_unit_budget = Vec::new();
    for (h, route) in instance.network.routes.iter().enumerate() {
        let row = lp.add_row(vec![(y[h], 1.0)], RowSense::Le, route.units as f64);
        rows_unit_budget.push((h, row));
    }

    // Path-based freight capacity rows; columns enter with coefficient q.
    let mut rows_alpha = Vec::new();
    for (si, &seg) in segments.iter().enumerate() {
        let h = graph.arcs[seg].vehicle.unwrap();
        let lambda = instance.network.routes[h].unit_capacity;
        let row = lp.add_row(vec![(x[si], -lambda)], RowSense::Le, 0.0);
        rows_alpha.push((seg, row));
    }

    let freight_ids: Vec<usize> = instance.freight_requests().map(|(r, _)| r).collect();
    let freight_ordinal: HashMap<usize, usize> = freight_ids.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut rows_convexity = Vec::new();
    for &r in &freight_ids {
        let row = lp.add_row(Vec::new(), RowSense::Eq, 1.0);
        rows_convexity.push((r, row));
    }

    let mut master = MasterState {
        lp,
        y,
        segments,
        x,
        g,
        freight_ids: freight_ids.clone(),
        columns: vec![Vec::new(); freight_ids.len()],
        z: vec![Vec::new(); freight_ids.len()],
        keys: vec![HashSet::new(); freight_ids.len()],
        row_service,
        rows_contracted,
        rows_uncontracted,
        rows_pass_convexity,
        rows_unit_alloc,
        rows_unit_budget,
        rows_alpha,
        rows_convexity,
        last: None,
        duplicates_skipped: 0,
        segment_ordinal,
        freight_ordinal,
    };
    let dummies: Vec<Column> = freight_ids.iter().map(|&r| Column::dummy(graph, r)).collect();
    master.add_columns(prep, instance, dummies);
    master
}

impl MasterState {
    /// Adds columns to the pool and the LP; duplicates (by sorted arc key)
    /// are skipped and counted. Returns the number actually added.
    pub fn add_columns(&mut self, prep: &Preprocessed, instance: &Instance, columns: Vec<Column>) -> usize {
        let graph = &prep.graph;
        let mut added = 0;
        for col in columns {
            let ri = self.freight_ordinal[&col.request];
            if !self.keys[ri].insert(col.key.clone()) {
                self.duplicates_skipped += 1;
                continue;
            }
            let q = instance.requests[col.request].demand;
            let var = self.lp.add_var(Variable::continuous(0.0, f64::INFINITY, q * col.routing_cost));
            for seg in col.segment_arcs(graph) {
                let si = self.segment_ordinal[&seg];
                let row = self.rows_alpha[si].1;
                self.lp.rows[row].coeffs.push((var, q));
            }
            let conv_row = self.rows_convexity[ri].1;
            self.lp.rows[conv_row].coeffs.push((var, 1.0));
            self.columns[ri].push(col);
            self.z[ri].push(var);
            added += 1;
        }
        added
    }

    /// Solves the master, warmstarting from the previous basis.
    pub fn solve(&mut self) -> Result<LpStatus, SolveError> {
        let warm = self.last.as_ref().map(|s| s.basis.clone());
        let sol = crate::lp::solve_lp(&self.lp, warm.as_ref())
            .map_err(|e| SolveError::Lp { context: "restricted master".into(), source: e })?;
        let status = sol.status;
        if status == LpStatus::Optimal {
            self.last = Some(sol);
        } else {
            self.last = None;
        }
        Ok(status)
    }

    pub fn objective(&self) -> f64 {
        self.last.as_ref().map(|s| s.objective).unwrap_or(f64::INFINITY)
    }

    pub fn set_y_bounds(&mut self, vehicle: usize, lo: f64, hi: f64) {
        let v = self.y[vehicle];
        self.lp.vars[v].lb = lo;
        self.lp.vars[v].ub = hi;
    }

    pub fn set_x_bounds(&mut self, segment_ordinal: usize, lo: f64, hi: f64) {
        let v = self.x[segment_ordinal];
        self.lp.vars[v].lb = lo;
        self.lp.vars[v].ub = hi;
    }

    /// Disables a pool column (used by branching filters).
    pub fn disable_column(&mut self, freight_ordinal: usize, col: usize) {
        let v = self.z[freight_ordinal][col];
        self.lp.vars[v].ub = 0.0;
    }

    /// Restores default bounds on y, x and all columns.
    pub fn reset_bounds(&mut self, instance: &Instance) {
        for (h, route) in instance.network.routes.iter().enumerate() {
            let v = self.y[h];
            self.lp.vars[v].lb = 0.0;
            self.lp.vars[v].ub = route.units as f64;
        }
        for &v in &self.x {
            self.lp.vars[v].lb = 0.0;
            self.lp.vars[v].ub = f64::INFINITY;
        }
        for zs in &self.z {
            for &v in zs {
                self.lp.vars[v].lb = 0.0;
                self.lp.vars[v].ub = f64::INFINITY;
            }
        }
        self.last = None;
    }

    /// Fixes the column set and turns the master into the integer problem:
    /// y and x integer, z binary over the current pool, g continuous.
    /// Current branching bounds carry over.
    pub fn fix_and_integerize(&self) -> LinearProgram {
        let mut lp = self.lp.clone();
        for &v in &self.y {
            lp.vars[v].integer = true;
        }
        for &v in &self.x {
            lp.vars[v].integer = true;
        }
        for zs in &self.z {
            for &v in zs {
                lp.vars[v].integer = true;
                lp.vars[v].ub = lp.vars[v].ub.min(1.0);
            }
        }
        lp
    }

    /// Maps rows of the last optimal solve to named dual vectors, clamping
    /// sign violations up to 1e-6 and rejecting anything larger.
    pub fn extract_duals(&self) -> Result<DualValues, SolveError> {
        let sol = self.last.as_ref().expect("extract_duals before a successful solve");
        let duals = &sol.duals;
        let mut out = DualValues { unit_budget: vec![0.0; self.y.len()], ..Default::default() };

        fn nonpositive(name: &'static str, row: usize, v: f64) -> Result<f64, SolveError> {
            if v > 1e-6 {
                return Err(SolveError::DualSign { name, row, violation: v });
            }
            Ok(v.min(0.0))
        }

        out.service_level = {
            let v = duals[self.row_service];
            if v < -1e-6 {
                return Err(SolveError::DualSign { name: "service_level", row: self.row_service, violation: -v });
            }
            v.max(0.0)
        };
        for &(seg, row) in &self.rows_alpha {
            out.segment_capacity.insert(seg, nonpositive("segment_capacity", row, duals[row])?);
        }
        for &(r, row) in &self.rows_convexity {
            out.convexity.insert(r, duals[row]);
        }
        for &(a, row) in &self.rows_contracted {
            out.contracted_cap.insert(a, nonpositive("contracted_cap", row, duals[row])?);
        }
        for &(a, row) in &self.rows_uncontracted {
            out.uncontracted_cap.insert(a, nonpositive("uncontracted_cap", row, duals[row])?);
        }
        for &(r, row) in &self.rows_pass_convexity {
            out.passenger_convexity.insert(r, nonpositive("passenger_convexity", row, duals[row])?);
        }
        for &(seg, row) in &self.rows_unit_alloc {
            out.unit_allocation.insert(seg, nonpositive("unit_allocation", row, duals[row])?);
        }
        for &(h, row) in &self.rows_unit_budget {
            out.unit_budget[h] = nonpositive("unit_budget", row, duals[row])?;
        }
        Ok(out)
    }

    /// z values of the last solve, per freight ordinal and column.
    pub fn z_values(&self) -> Vec<Vec<f64>> {
        let sol = self.last.as_ref().expect("z_values before solve");
        self.z.iter().map(|zs| zs.iter().map(|&v| sol.x[v]).collect()).collect()
    }

    pub fn y_values(&self) -> Vec<f64> {
        let sol = self.last.as_ref().expect("y_values before solve");
        self.y.iter().map(|&v| sol.x[v]).collect()
    }

    pub fn x_values(&self) -> Vec<f64> {
        let sol = self.last.as_ref().expect("x_values before solve");
        self.x.iter().map(|&v| sol.x[v]).collect()
    }

    pub fn g_values(&self) -> Vec<Vec<f64>> {
        let sol = self.last.as_ref().expect("g_values before solve");
        self.g.iter().map(|gs| gs.iter().map(|&v| sol.x[v]).collect()).collect()
    }

    pub fn pool_size(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn warm_basis(&self) -> Option<Basis> {
        self.last.as_ref().map(|s| s.basis.clone())
    }

    pub fn freight_ordinal_of(&self, request: usize) -> usize {
        self.freight_ordinal[&request]
    }

    pub fn segment_ordinal_of(&self, segment_arc: usize) -> usize {
        self.segment_ordinal[&segment_arc]
    }
}

/// Total passenger load per vehicle arc implied by fractions g.
pub fn passenger_loads(prep: &Preprocessed, instance: &Instance, g: &[Vec<f64>]) -> HashMap<usize, f64> {
    let mut load: HashMap<usize, f64> = HashMap::new();
    for (r, paths) in prep.passenger_paths.paths.iter().enumerate() {
        let q = instance.requests[r].demand;
        for (p, path) in paths.iter().enumerate() {
            let frac = g[r][p];
            if frac > 0.0 {
                for a in path.vehicle_arcs(&prep.graph) {
                    *load.entry(a).or_insert(0.0) += q * frac;
                }
            }
        }
    }
    load
}
