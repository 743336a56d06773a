pub mod dyn_forest;
pub mod error;
pub mod graph;
pub mod forest_orient;
pub mod frac_orient;
pub mod refinement;
pub mod oracles;
pub mod pseudo_split;
pub mod arboricity;
pub mod acyclic_bf;
pub mod colouring;
pub mod trace;
pub mod harness;
pub mod batch;
