//! Contract-based verification of parameterized symbolic transition
//! systems on finite instances: parsing, parallel composition, fluent
//! temporal formulas, inductive-invariant checking with counterexample
//! extraction, invariant inference, and composition certificates.

pub mod compose;
pub mod contracts;
pub mod corpus;
pub mod inference;
pub mod model;
pub mod parser;
pub mod sfl;
