//! The B-lite modelling language: syntax tree, parser, canonical printer,
//! normalization and elaboration into a finite partitioned transition system.

pub mod ast;
mod elaborate;
pub mod ir;
mod lexer;
mod normalize;
mod parser;
pub mod printer;

use std::fmt;

use thiserror::Error;

pub use elaborate::{elaborate, elaborate_with, ElaborationOptions, DEFAULT_ENUMERATION_BOUND};
pub use ir::{Action, Domain, ElaboratedMachine, Group, ParamSlot, Term, VarInfo};
pub use lexer::Pos;
pub use normalize::{normalize, NormalizedOperation};
pub use parser::parse_machine;
pub use printer::print_machine;

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: duplicate name '{name}'")]
    DuplicateName { pos: Pos, name: String },
    #[error("{pos}: unknown identifier '{name}'")]
    UnknownIdentifier { pos: Pos, name: String },
    #[error("constant '{0}' has no value (give a default or an override)")]
    UnresolvedConstant(String),
    #[error("override for unknown constant '{0}'")]
    UnknownConstant(String),
    #[error("type error in {context}: {message}")]
    Type { context: String, message: String },
    #[error("empty domain {lo}..{hi} for '{name}'")]
    EmptyDomain { name: String, lo: i64, hi: i64 },
    #[error("INITIALISATION: {0}")]
    Initialisation(String),
}
