//! Budget-constrained extraction of graph-convolutional node classifiers.

pub mod error;
pub mod experiment;
pub mod extraction;
pub mod gcn;
pub mod graph;
pub mod rng;
pub mod scoring;
pub mod selection;

pub use error::{CegaError, Result};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/gcn.md")]
    mod gcn {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/selection.md")]
    mod selection {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
