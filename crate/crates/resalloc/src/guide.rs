//! The user guide, embedded chapter by chapter so that every Rust snippet
//! it shows compiles and runs with `cargo test --doc`.
//!
//! The rendered book lives in `book/` at the repository root (`mdbook build
//! book`); these modules are the same markdown files, so the guide cannot
//! drift from the API it documents.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/problem-model.md")]
pub mod problem_model {}

#[doc = include_str!("../../../book/src/dual-solvers.md")]
pub mod dual_solvers {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../book/src/benchmarking.md")]
pub mod benchmarking {}

/// The repository README's quick-start example, compiled the same way.
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
