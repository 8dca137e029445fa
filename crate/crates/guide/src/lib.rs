//! The `book/` chapters, compiled so that their code samples run as doctests.

#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/copulas.md")]
pub mod copulas {}

#[doc = include_str!("../../../book/src/success-probability.md")]
pub mod success_probability {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/gaussian-bound.md")]
pub mod gaussian_bound {}

#[doc = include_str!("../../../book/src/sample-size.md")]
pub mod sample_size {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
