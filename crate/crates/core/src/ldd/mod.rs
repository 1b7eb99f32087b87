//! List Decision Diagrams: hash-consed sets of equal-length index vectors.

mod dot;
mod relation;
mod store;

use thiserror::Error;

pub use relation::PartialRelation;
pub use store::{
    LddStore, NodeRef, StoreConfig, StoreStats, DEFAULT_CACHE, DEFAULT_NODE_TABLE, FALSE_NODE, MAX_TABLE_SIZE,
    MIN_TABLE_SIZE, TRUE_NODE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LddError {
    #[error("node table exhausted ({0} nodes); raise --node-table")]
    NodeTableFull(u64),
    #[error("vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid store configuration: {0}")]
    InvalidConfig(String),
}
