//! Domain model: transit network, requests, cost parameters, and the
//! JSON instance format.
//!
//! An [`Instance`] is the single input to the solver pipeline. It is
//! immutable after [`Instance::validated`] succeeds and safe to share
//! across threads.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Seconds since the start of the planning horizon.
pub type Time = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Passenger,
    Freight,
}

/// A transportation request: origin/destination in planar meters, demand in
/// passenger equivalents, and the service window `[earliest, latest]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub kind: RequestKind,
    pub origin: [f64; 2],
    pub destination: [f64; 2],
    pub demand: f64,
    pub earliest: Time,
    pub latest: Time,
    /// Per-request relocation threshold in seconds; falls back to
    /// `Params::zeta_default`, then to distance / `Params::zeta_speed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
}

impl Request {
    pub fn is_freight(&self) -> bool {
        self.kind == RequestKind::Freight
    }

    pub fn is_passenger(&self) -> bool {
        self.kind == RequestKind::Passenger
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stop {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

/// One vehicle's timetabled path through the network: a strictly
/// time-increasing sequence of (stop id, arrival time) pairs, plus the
/// number of interior units and the per-unit capacity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VehicleRoute {
    pub id: String,
    /// `[(stop_id, arrival_seconds), ...]`, at least two entries.
    pub stops: Vec<(String, Time)>,
    /// Number of transportation units on this vehicle.
    pub units: u32,
    /// Capacity of one unit, in passenger equivalents.
    pub unit_capacity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceEntry {
    pub from: String,
    pub to: String,
    pub km: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PTNetwork {
    pub stops: Vec<Stop>,
    /// Stop ids that act as freight terminals.
    pub terminals: Vec<String>,
    pub routes: Vec<VehicleRoute>,
    /// Optional explicit inter-stop distances (km). Pairs not listed fall
    /// back to Euclidean distance between stop coordinates / 1000.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distances: Vec<DistanceEntry>,

    #[serde(skip)]
    stop_index: HashMap<String, usize>,
    #[serde(skip)]
    distance_overrides: HashMap<(usize, usize), f64>,
    #[serde(skip)]
    terminal_flags: Vec<bool>,
}

impl PTNetwork {
    pub fn new(stops: Vec<Stop>, terminals: Vec<String>, routes: Vec<VehicleRoute>) -> Self {
        PTNetwork {
            stops,
            terminals,
            routes,
            distances: Vec::new(),
            stop_index: HashMap::new(),
            distance_overrides: HashMap::new(),
            terminal_flags: Vec::new(),
        }
    }

    /// Resolves lookup tables and checks the network invariants.
    pub fn finish(&mut self) -> Result<(), ModelError> {
        self.stop_index.clear();
        for (i, s) in self.stops.iter().enumerate() {
            if self.stop_index.insert(s.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateStop { id: s.id.clone() });
            }
        }
        self.terminal_flags = vec![false; self.stops.len()];
        for t in &self.terminals {
            let idx = self
                .stop_index
                .get(t)
                .copied()
                .ok_or_else(|| ModelError::UnknownStop { id: t.clone(), context: "terminals".into() })?;
            self.terminal_flags[idx] = true;
        }
        self.distance_overrides.clear();
        for d in &self.distances {
            let a = self.resolve_stop(&d.from, "distances")?;
            let b = self.resolve_stop(&d.to, "distances")?;
            if d.km < 0.0 {
                return Err(ModelError::InvalidDistance { from: d.from.clone(), to: d.to.clone(), km: d.km });
            }
            if a == b && d.km != 0.0 {
                return Err(ModelError::InvalidDistance { from: d.from.clone(), to: d.to.clone(), km: d.km });
            }
            self.distance_overrides.insert((a, b), d.km);
            self.distance_overrides.insert((b, a), d.km);
        }
        for route in &self.routes {
            if route.stops.len() < 2 {
                return Err(ModelError::RouteTooShort { route: route.id.clone() });
            }
            if route.units < 1 {
                return Err(ModelError::InvalidRoute {
                    route: route.id.clone(),
                    reason: "unit count must be >= 1".into(),
                });
            }
            if route.unit_capacity <= 0.0 {
                return Err(ModelError::InvalidRoute {
                    route: route.id.clone(),
                    reason: "unit capacity must be positive".into(),
                });
            }
            let mut prev: Option<(usize, Time)> = None;
            let mut terminal_visits = 0usize;
            for (sid, t) in &route.stops {
                let idx = self.resolve_stop(sid, "route stops")?;
                if self.terminal_flags[idx] {
                    terminal_visits += 1;
                }
                if let Some((ps, pt)) = prev {
                    if *t <= pt {
                        return Err(ModelError::NonIncreasingTimes { route: route.id.clone(), time: *t });
                    }
                    if ps == idx {
                        return Err(ModelError::InvalidRoute {
                            route: route.id.clone(),
                            reason: "consecutive duplicate stop".into(),
                        });
                    }
                }
                prev = Some((idx, *t));
            }
            if terminal_visits == 1 {
                return Err(ModelError::SingleTerminalRoute { route: route.id.clone() });
            }
        }
        Ok(())
    }

    fn resolve_stop(&self, id: &str, context: &str) -> Result<usize, ModelError> {
        self.stop_index
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::UnknownStop { id: id.to_string(), context: context.to_string() })
    }

    pub fn stop_count(&self) -> usize {
        self.stops.len()
    }

    pub fn stop_idx(&self, id: &str) -> Option<usize> {
        self.stop_index.get(id).copied()
    }

    pub fn is_terminal(&self, stop: usize) -> bool {
        self.terminal_flags[stop]
    }

    pub fn terminal_indices(&self) -> Vec<usize> {
        (0..self.stops.len()).filter(|&i| self.terminal_flags[i]).collect()
    }

    /// Inter-stop distance in km: explicit table entry if present, else
    /// Euclidean distance between the stop coordinates.
    pub fn distance_km(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        if let Some(&km) = self.distance_overrides.get(&(a, b)) {
            return km;
        }
        let sa = &self.stops[a];
        let sb = &self.stops[b];
        ((sa.x - sb.x).powi(2) + (sa.y - sb.y).powi(2)).sqrt() / 1000.0
    }

    /// Route stop sequence resolved to stop indices.
    pub fn route_stop_indices(&self, vehicle: usize) -> Vec<(usize, Time)> {
        self.routes[vehicle]
            .stops
            .iter()
            .map(|(sid, t)| (self.stop_index[sid.as_str()], *t))
            .collect()
    }
}

/// Cost parameters of one planning scenario. Money is unitless "cost".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostModel {
    /// Design cost per transportation unit assigned to a vehicle (per day).
    pub design_cost: f64,
    /// Flat penalty for rejecting a freight request.
    pub rejection_penalty: f64,
    /// Routing cost per passenger equivalent and km on vehicle arcs.
    pub vehicle_km_rate: f64,
    /// Load/unload cost per passenger equivalent on each transit arc traversal.
    pub transit_cost: f64,
    /// Last-mile cost per passenger equivalent on freight egress arcs.
    pub egress_cost: f64,
    /// Cost per passenger equivalent on freight access arcs.
    #[serde(default)]
    pub access_cost: f64,
}

impl CostModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.design_cost <= 0.0 {
            return Err(ModelError::NonPositiveCost { field: "design_cost" });
        }
        if self.rejection_penalty <= 0.0 {
            return Err(ModelError::NonPositiveCost { field: "rejection_penalty" });
        }
        if self.vehicle_km_rate <= 0.0 {
            return Err(ModelError::NonPositiveCost { field: "vehicle_km_rate" });
        }
        if self.transit_cost < 0.0 {
            return Err(ModelError::NegativeCost { field: "transit_cost" });
        }
        if self.egress_cost < 0.0 {
            return Err(ModelError::NegativeCost { field: "egress_cost" });
        }
        if self.access_cost < 0.0 {
            return Err(ModelError::NegativeCost { field: "access_cost" });
        }
        Ok(())
    }
}

fn default_chi() -> f64 {
    1.0
}
fn default_k() -> usize {
    3
}
fn default_iota() -> usize {
    1
}
fn default_speed() -> f64 {
    1.0
}

/// Solver-facing instance parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Params {
    /// Required passenger service level in [0, 1].
    #[serde(default = "default_chi")]
    pub chi: f64,
    /// Number of precomputed paths per passenger request.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Freight origins/destinations connect to the `iota` nearest terminals.
    #[serde(default = "default_iota")]
    pub iota: usize,
    /// Fixed relocation threshold in seconds for all freight requests.
    /// `None` derives it per request and stop as distance / `zeta_speed`.
    #[serde(default)]
    pub zeta_default: Option<f64>,
    /// Freight relocation speed in m/s used when `zeta_default` is None.
    #[serde(default = "default_speed")]
    pub zeta_speed: f64,
    /// Passenger walking speed in m/s on access/egress legs.
    #[serde(default = "default_speed")]
    pub walk_speed: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            chi: default_chi(),
            k: default_k(),
            iota: default_iota(),
            zeta_default: None,
            zeta_speed: default_speed(),
            walk_speed: default_speed(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub network: PTNetwork,
    pub requests: Vec<Request>,
    pub costs: CostModel,
    #[serde(default)]
    pub params: Params,
}

impl Instance {
    /// Validates every model invariant and resolves lookup tables.
    /// All downstream code assumes a validated instance.
    pub fn validated(mut self) -> Result<Self, ModelError> {
        self.network.finish()?;
        self.costs.validate()?;
        if !(0.0..=1.0).contains(&self.params.chi) {
            return Err(ModelError::InvalidParam { field: "chi", reason: "must lie in [0, 1]".into() });
        }
        if self.params.k < 1 {
            return Err(ModelError::InvalidParam { field: "k", reason: "must be >= 1".into() });
        }
        if self.params.iota < 1 {
            return Err(ModelError::InvalidParam { field: "iota", reason: "must be >= 1".into() });
        }
        if let Some(z) = self.params.zeta_default {
            if z < 0.0 {
                return Err(ModelError::InvalidParam { field: "zeta_default", reason: "must be >= 0".into() });
            }
        }
        if self.params.zeta_speed <= 0.0 || self.params.walk_speed <= 0.0 {
            return Err(ModelError::InvalidParam { field: "speed", reason: "speeds must be positive".into() });
        }
        let mut seen = HashMap::new();
        for r in &self.requests {
            if let Some(_prev) = seen.insert(r.id.clone(), ()) {
                return Err(ModelError::DuplicateRequest { id: r.id.clone() });
            }
            if r.earliest >= r.latest {
                return Err(ModelError::EmptyWindow { request: r.id.clone() });
            }
            if r.demand <= 0.0 {
                return Err(ModelError::NonPositiveDemand { request: r.id.clone() });
            }
            if let Some(z) = r.zeta {
                if z < 0.0 {
                    return Err(ModelError::InvalidParam { field: "zeta", reason: format!("negative on request {}", r.id) });
                }
            }
        }
        let has_freight = self.requests.iter().any(Request::is_freight);
        if has_freight && self.network.terminals.is_empty() {
            return Err(ModelError::NoTerminals);
        }
        Ok(self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ModelError::Io { path: path.as_ref().display().to_string(), source: e })?;
        let inst: Instance = serde_json::from_str(&text)?;
        inst.validated()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), text)
            .map_err(|e| ModelError::Io { path: path.as_ref().display().to_string(), source: e })
    }

    /// Euclidean meters between a request endpoint and a stop.
    pub fn endpoint_distance_m(&self, point: [f64; 2], stop: usize) -> f64 {
        let s = &self.network.stops[stop];
        ((point[0] - s.x).powi(2) + (point[1] - s.y).powi(2)).sqrt()
    }

    pub fn freight_requests(&self) -> impl Iterator<Item = (usize, &Request)> {
        self.requests.iter().enumerate().filter(|(_, r)| r.is_freight())
    }

    pub fn passenger_requests(&self) -> impl Iterator<Item = (usize, &Request)> {
        self.requests.iter().enumerate().filter(|(_, r)| r.is_passenger())
    }

    /// Penalty charged when freight request `r` is rejected.
    pub fn rejection_penalty(&self, _request: &Request) -> f64 {
        self.costs.rejection_penalty
    }
}

/// Economic inputs from which [`CostModel`] is derived.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconParams {
    /// Investment per transportation unit (currency).
    pub investment: f64,
    /// Fleet usage duration in years.
    pub years: f64,
    /// Annual base rate as a fraction, e.g. 0.0362.
    pub base_rate: f64,
    /// Truck externality cost per vehicle-km.
    pub truck_externality: f64,
    pub truck_tour_km: f64,
    pub truck_capacity_parcels: f64,
    /// Cargo-bike externality cost per vehicle-km.
    pub bike_externality: f64,
    pub bike_tour_km: f64,
    pub bike_capacity_parcels: f64,
    /// Parcels per passenger-equivalent unit.
    pub parcels_per_unit: f64,
    /// Demand units per freight request entering the penalty formula.
    #[serde(default = "default_demand_units")]
    pub demand_units: f64,
    #[serde(default = "default_vehicle_km_rate")]
    pub vehicle_km_rate: f64,
    #[serde(default = "default_transit_cost")]
    pub transit_cost: f64,
    #[serde(default)]
    pub access_cost: f64,
}

fn default_demand_units() -> f64 {
    1.0
}
fn default_vehicle_km_rate() -> f64 {
    0.0406
}
fn default_transit_cost() -> f64 {
    0.1
}

impl Default for EconParams {
    /// Case-study defaults: 1.51e6 investment over 25 years at 3.62%,
    /// 0.2/km truck externality on 80 km tours of 100 parcels,
    /// 0.115/km cargo-bike externality on 12.2 km tours of 20 parcels,
    /// 12 parcels per passenger equivalent.
    fn default() -> Self {
        EconParams {
            investment: 1.51e6,
            years: 25.0,
            base_rate: 0.0362,
            truck_externality: 0.2,
            truck_tour_km: 80.0,
            truck_capacity_parcels: 100.0,
            bike_externality: 0.115,
            bike_tour_km: 12.2,
            bike_capacity_parcels: 20.0,
            parcels_per_unit: 12.0,
            demand_units: 1.0,
            vehicle_km_rate: 0.0406,
            transit_cost: 0.1,
            access_cost: 0.0,
        }
    }
}

/// Derives the cost model from economic parameters:
/// unit design cost as the daily present value of the investment, the
/// rejection penalty from truck externalities, and the egress cost from
/// cargo-bike externalities.
pub fn derive_costs(econ: &EconParams) -> Result<CostModel, ModelError> {
    for (field, v) in [
        ("investment", econ.investment),
        ("years", econ.years),
        ("truck_externality", econ.truck_externality),
        ("truck_tour_km", econ.truck_tour_km),
        ("truck_capacity_parcels", econ.truck_capacity_parcels),
        ("bike_externality", econ.bike_externality),
        ("bike_tour_km", econ.bike_tour_km),
        ("bike_capacity_parcels", econ.bike_capacity_parcels),
        ("parcels_per_unit", econ.parcels_per_unit),
        ("demand_units", econ.demand_units),
        ("vehicle_km_rate", econ.vehicle_km_rate),
    ] {
        if v <= 0.0 {
            return Err(ModelError::NonPositiveEconParam { field });
        }
    }
    if econ.base_rate <= 0.0 {
        return Err(ModelError::NonPositiveEconParam { field: "base_rate" });
    }
    if econ.transit_cost < 0.0 {
        return Err(ModelError::NegativeCost { field: "transit_cost" });
    }
    let design_cost = econ.investment / (econ.years * 365.0 * (1.0 + econ.base_rate).powf(econ.years));
    let rejection_penalty = econ.truck_externality * econ.truck_tour_km * econ.demand_units
        * econ.parcels_per_unit
        / econ.truck_capacity_parcels;
    let egress_cost =
        econ.bike_externality * econ.bike_tour_km * econ.parcels_per_unit / econ.bike_capacity_parcels;
    Ok(CostModel {
        design_cost,
        rejection_penalty,
        vehicle_km_rate: econ.vehicle_km_rate,
        transit_cost: econ.transit_cost,
        egress_cost,
        access_cost: econ.access_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_network() -> PTNetwork {
        let stops = (1..=3)
            .map(|i| Stop { id: format!("s{i}"), x: i as f64 * 1000.0, y: 0.0 })
            .collect();
        PTNetwork::new(
            stops,
            vec!["s1".into(), "s3".into()],
            vec![VehicleRoute {
                id: "v1".into(),
                stops: vec![("s1".into(), 0), ("s2".into(), 60), ("s3".into(), 120)],
                units: 2,
                unit_capacity: 10.0,
            }],
        )
    }

    fn base_costs() -> CostModel {
        CostModel {
            design_cost: 10.0,
            rejection_penalty: 1.92,
            vehicle_km_rate: 0.0406,
            transit_cost: 0.1,
            egress_cost: 0.8418,
            access_cost: 0.0,
        }
    }

    #[test]
    fn validated_instance_round_trips_through_json() {
        let inst = Instance {
            network: line_network(),
            requests: vec![Request {
                id: "f1".into(),
                kind: RequestKind::Freight,
                origin: [0.0, 0.0],
                destination: [3000.0, 100.0],
                demand: 1.0,
                earliest: 0,
                latest: 600,
                zeta: None,
            }],
            costs: base_costs(),
            params: Params::default(),
        }
        .validated()
        .unwrap();
        let text = serde_json::to_string_pretty(&inst).unwrap();
        let back: Instance = serde_json::from_str(&text).unwrap();
        let back = back.validated().unwrap();
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    }

    #[test]
    fn empty_window_rejected() {
        let inst = Instance {
            network: line_network(),
            requests: vec![Request {
                id: "f1".into(),
                kind: RequestKind::Freight,
                origin: [0.0, 0.0],
                destination: [3000.0, 0.0],
                demand: 1.0,
                earliest: 100,
                latest: 100,
                zeta: None,
            }],
            costs: base_costs(),
            params: Params::default(),
        };
        match inst.validated() {
            Err(ModelError::EmptyWindow { request }) => assert_eq!(request, "f1"),
            other => panic!("expected EmptyWindow, got {other:?}"),
        }
    }

    #[test]
    fn single_terminal_route_rejected() {
        let mut network = line_network();
        network.terminals = vec!["s1".into()];
        let inst = Instance {
            network,
            requests: vec![],
            costs: base_costs(),
            params: Params::default(),
        };
        match inst.validated() {
            Err(ModelError::SingleTerminalRoute { route }) => assert_eq!(route, "v1"),
            other => panic!("expected SingleTerminalRoute, got {other:?}"),
        }
    }

    #[test]
    fn derive_costs_matches_case_study_values() {
        let costs = derive_costs(&EconParams::default()).unwrap();
        assert!((costs.design_cost - 68.18).abs() < 0.5, "design cost {}", costs.design_cost);
        assert!((costs.rejection_penalty - 1.92).abs() < 1e-9);
        assert!((costs.egress_cost - 0.8418).abs() < 1e-9);
    }

    #[test]
    fn derive_costs_monotonicity() {
        let base = derive_costs(&EconParams::default()).unwrap();
        let mut bumped = EconParams::default();
        bumped.truck_externality += 0.1;
        let up = derive_costs(&bumped).unwrap();
        assert!(up.rejection_penalty > base.rejection_penalty);

        let mut rate = EconParams::default();
        rate.base_rate += 0.01;
        let cheaper = derive_costs(&rate).unwrap();
        assert!(cheaper.design_cost < base.design_cost);
    }

    #[test]
    fn derive_costs_rejects_nonpositive() {
        let mut econ = EconParams::default();
        econ.truck_tour_km = 0.0;
        assert!(matches!(derive_costs(&econ), Err(ModelError::NonPositiveEconParam { .. })));
    }

    #[test]
    fn euclidean_distance_fallback_and_override() {
        let mut n = line_network();
        n.distances = vec![DistanceEntry { from: "s1".into(), to: "s2".into(), km: 9.0 }];
        n.finish().unwrap();
        assert_eq!(n.distance_km(0, 1), 9.0);
        assert_eq!(n.distance_km(1, 0), 9.0);
        assert!((n.distance_km(1, 2) - 1.0).abs() < 1e-12);
        assert_eq!(n.distance_km(2, 2), 0.0);
    }
}
