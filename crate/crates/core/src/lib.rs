//! Bounded-depth tree combinatorics for seven families of tree conditions.
//!
//! The crate materializes lazily-defined trees to finite depth, checks
//! density predicates on them, builds the labeled subtrees used by the
//! intersection arguments, classifies perfect trees by the canonical
//! relations, and verifies every intersection-smallness claim by exhaustive
//! enumeration at desk scale.

pub mod conditions;
pub mod fintree;
pub mod fruit;
pub mod harvest;
pub mod lab;
pub mod oracle;
pub mod ramsey;
pub mod seq;
pub mod system;
