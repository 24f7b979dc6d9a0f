//! Magical configurations on fullerene graphs: feasibility of the magic
//! constants, exact enumeration, symmetry and PCA of the solution sets.
//!
//! Start with [`graph::builtin`] and [`search::enumerate`]; the
//! `fullerene-magic` binary wraps everything in [`cli`].

pub mod cli;
pub mod constants;
pub mod error;
pub mod graph;
pub mod pca;
pub mod search;
pub mod symmetry;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/constants.md")]
    mod constants {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/symmetry.md")]
    mod symmetry {}
    #[doc = include_str!("../../../book/src/pca.md")]
    mod pca {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/results.md")]
    mod results {}
}
