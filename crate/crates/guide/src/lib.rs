//! Every Rust block in the book under `book/src` runs as a doc-test of this
//! crate, so the guide cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/lepage.md")]
pub mod lepage {}

#[doc = include_str!("../../../book/src/operator.md")]
pub mod operator {}

#[doc = include_str!("../../../book/src/wave.md")]
pub mod wave {}

#[doc = include_str!("../../../book/src/regularity.md")]
pub mod regularity {}

#[doc = include_str!("../../../book/src/runs.md")]
pub mod runs {}

#[doc = include_str!("../../../book/src/limits.md")]
pub mod limits {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
