//! Runs every code sample of the guide in `book/` as a doc-test.
//!
//! Each chapter is included verbatim as the documentation of an empty
//! module, so `cargo test` compiles and executes the guide's Rust blocks.
//! If a sample drifts from the library, the build says so — the book cannot
//! silently rot.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/paths.md")]
pub mod paths {}

#[doc = include_str!("../../../book/src/layers.md")]
pub mod layers {}

#[doc = include_str!("../../../book/src/model-selection.md")]
pub mod model_selection {}

#[doc = include_str!("../../../book/src/temporal.md")]
pub mod temporal {}

#[doc = include_str!("../../../book/src/ranking.md")]
pub mod ranking {}

#[doc = include_str!("../../../book/src/synthetic.md")]
pub mod synthetic {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
