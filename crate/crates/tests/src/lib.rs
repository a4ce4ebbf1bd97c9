//! Independent reference implementations used to check the engine.
//!
//! Nothing here calls into the engine's algorithms: metrics, clustering,
//! flows and apportionment are written from their textbook definitions so
//! that the engine is compared against something other than itself.

pub mod cluster;
pub mod gen;
pub mod graph;
pub mod metrics;
pub mod rng;
