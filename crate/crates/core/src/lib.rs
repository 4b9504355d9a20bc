//! Exact computations for the canonical extensions of the Morita and Johnson
//! homomorphisms to the Ptolemy groupoid of a once-bordered surface.

// Chains use `is_zero`; cache types are spelled out where they are declared.
#![allow(clippy::len_without_is_empty, clippy::type_complexity)]

pub mod automorphism;
pub mod chains;
pub mod fatgraph;
pub mod hall;
pub mod homomorphisms;
pub mod linalg;
pub mod nilpotent;
pub mod rational;
pub mod registry;
pub mod search;
pub mod sparse;
pub mod sw;
pub mod wedge;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("elements live in different Hall bases")]
    MismatchedBasis,
    #[error("expected {expected} generator images, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("product of an empty list")]
    EmptyProduct,
    #[error("bad word token `{0}`")]
    BadToken(String),
}
