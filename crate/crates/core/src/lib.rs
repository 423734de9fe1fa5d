//! Capacity-expansion planning: a modular linear program over an hourly
//! calendar, its embedded solver, and price and rent analytics.

pub mod analytics;
pub mod assembly;
pub mod costing;
pub mod generation;
pub mod hydro_hydrogen;
pub mod inputs;
pub mod lp;
pub mod model;
pub mod network;
pub mod policy;
pub mod runner;
pub mod storage;
pub mod temporal;
pub mod transmission;
