//! Synthetic instance generation: a configurable stop layout with
//! timetabled vehicles, freight origins on a depot ring, destinations
//! drawn from per-stop weights, and demand scaled to a target volume.
//! Deterministic for a fixed seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GenerateError;
use crate::model::{
    CostModel, Instance, PTNetwork, Params, Request, RequestKind, Stop, Time, VehicleRoute,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Stops laid out on a line with this spacing in meters.
    pub num_stops: usize,
    pub stop_spacing_m: f64,
    /// Indices into the stop line that act as freight terminals.
    pub terminal_stops: Vec<usize>,
    pub num_vehicles: usize,
    /// Seconds between consecutive stops on a route.
    pub leg_seconds: Time,
    /// Departure offset between consecutive vehicles.
    pub headway_seconds: Time,
    /// Vehicles alternate direction when true.
    pub alternate_direction: bool,
    pub units_per_vehicle: u32,
    pub unit_capacity: f64,
    pub num_passengers: usize,
    pub num_freight: usize,
    /// Planning window for request time sampling.
    pub window: (Time, Time),
    /// Total freight demand in passenger equivalents, split evenly.
    pub total_freight_demand: f64,
    /// Demand per passenger request.
    pub passenger_demand: f64,
    /// Freight origins are sampled on a ring around the network center.
    pub depot_ring_radius_m: (f64, f64),
    /// Relative weight per stop for freight destination sampling;
    /// uniform when empty.
    pub destination_weights: Vec<f64>,
    /// Service window slack granted to freight requests, in multiples of
    /// the end-to-end line travel time.
    pub freight_window_factor: f64,
    pub costs: CostModel,
    pub params: Params,
}

impl GeneratorConfig {
    /// Instances small enough for exhaustive-enumeration checks:
    /// at most 3 vehicles, 8 stops and 6 freight requests.
    pub fn tiny_oracle() -> Self {
        GeneratorConfig {
            num_stops: 6,
            stop_spacing_m: 1000.0,
            terminal_stops: vec![0, 2, 5],
            num_vehicles: 2,
            leg_seconds: 120,
            headway_seconds: 300,
            alternate_direction: true,
            units_per_vehicle: 2,
            unit_capacity: 4.0,
            num_passengers: 3,
            num_freight: 4,
            window: (0, 5400),
            total_freight_demand: 8.0,
            passenger_demand: 2.0,
            depot_ring_radius_m: (1500.0, 2500.0),
            destination_weights: vec![],
            freight_window_factor: 3.0,
            costs: CostModel {
                design_cost: 2.0,
                rejection_penalty: 6.0,
                vehicle_km_rate: 1.0,
                transit_cost: 0.1,
                egress_cost: 0.5,
                access_cost: 0.0,
            },
            params: Params { chi: 0.8, ..Params::default() },
        }
    }

    /// Mid-size preset for pricing-strength comparisons.
    pub fn pricing_bench(num_freight: usize) -> Self {
        let mut c = GeneratorConfig::tiny_oracle();
        c.num_stops = 10;
        c.terminal_stops = vec![0, 3, 6, 9];
        c.num_vehicles = 6;
        c.num_passengers = 10;
        c.num_freight = num_freight;
        c.units_per_vehicle = 3;
        c.unit_capacity = 6.0;
        c.total_freight_demand = num_freight as f64 * 1.5;
        c.window = (0, 10_800);
        c.costs.rejection_penalty = 8.0;
        c
    }

    /// Preset for rejection-share sensitivity sweeps.
    pub fn sweep(num_freight: usize) -> Self {
        let mut c = GeneratorConfig::tiny_oracle();
        c.num_stops = 8;
        c.terminal_stops = vec![0, 3, 7];
        c.num_vehicles = 4;
        c.num_passengers = 4;
        c.num_freight = num_freight;
        c.units_per_vehicle = 2;
        c.unit_capacity = 8.0;
        c.total_freight_demand = num_freight as f64;
        c.window = (0, 7200);
        c
    }
}

/// Generates a validated instance; byte-identical output for equal
/// (config, seed) pairs.
pub fn generate_instance(config: &GeneratorConfig, seed: u64) -> Result<Instance, GenerateError> {
    if config.num_stops < 2 {
        return Err(GenerateError::Config("need at least two stops".into()));
    }
    if config.num_freight > 0 && config.terminal_stops.len() < 2 {
        return Err(GenerateError::Config(
            "freight requests need at least two terminal stops".into(),
        ));
    }
    if config.terminal_stops.iter().any(|&t| t >= config.num_stops) {
        return Err(GenerateError::Config("terminal index out of range".into()));
    }
    if !config.destination_weights.is_empty() && config.destination_weights.len() != config.num_stops {
        return Err(GenerateError::Config("destination_weights must have one entry per stop".into()));
    }
    if config.num_vehicles == 0 {
        return Err(GenerateError::Config("need at least one vehicle".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let stops: Vec<Stop> = (0..config.num_stops)
        .map(|i| Stop { id: format!("s{}", i + 1), x: i as f64 * config.stop_spacing_m, y: 0.0 })
        .collect();
    let terminals: Vec<String> = config.terminal_stops.iter().map(|&i| stops[i].id.clone()).collect();

    let line_seconds = (config.num_stops as Time - 1) * config.leg_seconds;
    let mut routes = Vec::new();
    for v in 0..config.num_vehicles {
        let start = config.window.0 + v as Time * config.headway_seconds;
        let forward = !config.alternate_direction || v % 2 == 0;
        let order: Vec<usize> = if forward {
            (0..config.num_stops).collect()
        } else {
            (0..config.num_stops).rev().collect()
        };
        let seq: Vec<(String, Time)> = order
            .iter()
            .enumerate()
            .map(|(i, &s)| (stops[s].id.clone(), start + i as Time * config.leg_seconds))
            .collect();
        routes.push(VehicleRoute {
            id: format!("v{}", v + 1),
            stops: seq,
            units: config.units_per_vehicle,
            unit_capacity: config.unit_capacity,
        });
    }

    let center_x = (config.num_stops - 1) as f64 * config.stop_spacing_m / 2.0;
    let mut requests = Vec::new();

    for p in 0..config.num_passengers {
        let from = rng.gen_range(0..config.num_stops);
        let mut to = rng.gen_range(0..config.num_stops);
        if to == from {
            to = (to + 1) % config.num_stops;
        }
        let ox = stops[from].x + rng.gen_range(-50.0..50.0);
        let oy = rng.gen_range(-50.0..50.0);
        let dx = stops[to].x + rng.gen_range(-50.0..50.0);
        let dy = rng.gen_range(-50.0..50.0);
        let legs = from.abs_diff(to) as Time;
        let direct = legs * config.leg_seconds;
        let e = rng.gen_range(config.window.0..=(config.window.1 - direct).max(config.window.0));
        let l = (e + 2 * direct + 2 * config.headway_seconds * config.num_vehicles as Time + 200)
            .min(config.window.1 + line_seconds * 2);
        requests.push(Request {
            id: format!("p{}", p + 1),
            kind: RequestKind::Passenger,
            origin: [ox, oy],
            destination: [dx, dy],
            demand: config.passenger_demand,
            earliest: e,
            latest: l,
            zeta: None,
        });
    }

    let freight_q = if config.num_freight > 0 {
        config.total_freight_demand / config.num_freight as f64
    } else {
        0.0
    };
    let weights: Vec<f64> = if config.destination_weights.is_empty() {
        vec![1.0; config.num_stops]
    } else {
        config.destination_weights.clone()
    };
    let weight_sum: f64 = weights.iter().sum();
    if config.num_freight > 0 && weight_sum <= 0.0 {
        return Err(GenerateError::Config("destination weights sum to zero".into()));
    }
    for f in 0..config.num_freight {
        // Depot ring around the network center.
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let radius = rng.gen_range(config.depot_ring_radius_m.0..=config.depot_ring_radius_m.1);
        let ox = center_x + radius * angle.cos();
        let oy = radius * angle.sin();
        // Weighted destination stop with local scatter.
        let mut draw = rng.gen_range(0.0..weight_sum);
        let mut dest_stop = config.num_stops - 1;
        for (i, &w) in weights.iter().enumerate() {
            if draw < w {
                dest_stop = i;
                break;
            }
            draw -= w;
        }
        let dx = stops[dest_stop].x + rng.gen_range(-100.0..100.0);
        let dy = rng.gen_range(-100.0..100.0);
        let slack = (line_seconds as f64 * config.freight_window_factor) as Time;
        let e = rng.gen_range(config.window.0..=(config.window.0 + (config.window.1 - config.window.0) / 2));
        let l = (e + slack).max(e + 1);
        requests.push(Request {
            id: format!("f{}", f + 1),
            kind: RequestKind::Freight,
            origin: [ox, oy],
            destination: [dx, dy],
            demand: freight_q,
            earliest: e,
            latest: l,
            zeta: Some(0.0),
        });
    }

    let instance = Instance {
        network: PTNetwork::new(stops, terminals, routes),
        requests,
        costs: config.costs.clone(),
        params: config.params.clone(),
    };
    Ok(instance.validated()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let config = GeneratorConfig::tiny_oracle();
        let a = generate_instance(&config, 1).unwrap();
        let b = generate_instance(&config, 1).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let c = generate_instance(&config, 2).unwrap();
        assert_ne!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn zero_terminals_with_freight_rejected() {
        let mut config = GeneratorConfig::tiny_oracle();
        config.terminal_stops = vec![];
        assert!(matches!(generate_instance(&config, 1), Err(GenerateError::Config(_))));
    }

    #[test]
    fn demand_scales_to_volume() {
        let config = GeneratorConfig::tiny_oracle();
        let inst = generate_instance(&config, 3).unwrap();
        let total: f64 = inst.freight_requests().map(|(_, r)| r.demand).sum();
        assert!((total - config.total_freight_demand).abs() < 1e-9);
    }
}
