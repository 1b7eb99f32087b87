//! Symbolic reachability for B-lite machines using partitioned transition
//! relations learned on the fly over List Decision Diagrams.

pub mod bridge;
pub mod depmatrix;
pub mod engine;
pub mod ldd;
pub mod model;
pub mod ordering;
pub mod semantics;
