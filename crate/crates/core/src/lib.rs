//! Multi-objective branch and bound for pure integer linear programs with two
//! or three objectives.
//!
//! The solver computes a minimal complete set (every nondominated image plus
//! one efficient preimage) by branch and bound over LP-relaxation lower bound
//! sets. Branching rules and node-selection strategies are pluggable so that
//! their effect on tree size and running time can be compared.

pub mod model;
pub mod simplex;
pub mod lbs;
pub mod dominance;
pub mod gap;
pub mod branching;
pub mod engine;
pub mod oracle;
pub mod instances;
pub mod bench;
