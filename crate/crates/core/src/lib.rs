//! Semantic content-addressable cache for quantum circuit simulation results.
//!
//! Circuits are translated to ZX diagrams, fully reduced, and fingerprinted
//! with a Weisfeiler-Leman hash; the resulting key addresses simulation
//! results in an embedded or networked store.

pub mod circuit;
pub mod corpus;
pub mod cutting;
pub mod exec;
pub mod identity;
pub mod qaoa;
pub mod rng;
pub mod sim;
pub mod store;
pub mod zx;
