//! Desk-scale computations for the circle method applied to Waring's problem
//! over sums of three cubes.

// `!(x > 0.0)` rejects NaN along with the non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod circle;
pub mod convolution;
pub mod dickman;
pub mod error;
pub mod expsums;
pub mod localsolve;
pub mod predict;
pub mod quad;
pub mod reps;
pub mod series;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/sums.md")]
    struct Sums;
    #[doc = include_str!("../../../book/src/counting.md")]
    struct Counting;
    #[doc = include_str!("../../../book/src/circle.md")]
    struct Circle;
    #[doc = include_str!("../../../book/src/predictions.md")]
    struct Predictions;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
