//! Network design for cargo-hitching in timetabled transit systems:
//! dynamically allocating hybrid-unit capacity between passengers and
//! freight, minimizing design, routing and rejection-penalty cost.
//!
//! The pipeline: a validated [`model::Instance`] is expanded into the
//! multi-layered time-expanded graph ([`graph`]), formulated either as an
//! arc-based MIP or a path-based restricted master ([`formulations`]),
//! and solved exactly (arc MIP, branch-and-price) or heuristically
//! (price-and-branch with partial pricing) by [`solve`], with per-request
//! shortest-path pricing in [`pricing`] on the in-repo LP/MIP engine
//! ([`lp`], [`mip`]).

pub mod error;
pub mod formulations;
pub mod generate;
pub mod graph;
pub mod gtfs;
pub mod lp;
pub mod mip;
pub mod model;
pub mod pricing;
pub mod solve;

pub use model::{derive_costs, CostModel, EconParams, Instance, Params, PTNetwork, Request, RequestKind, Stop, VehicleRoute};
