//! Doc-test carrier for the mdbook guide in `book/`.
//!
//! Each chapter is included verbatim as the documentation of an empty module,
//! so every fenced Rust block in the book compiles and runs under
//! `cargo test -p kicked-walk-guide --doc`. If the library API drifts away
//! from what the book shows, the workspace test run fails.
//!
//! The crate exports nothing; depend on [`kicked_walk`] directly.

// Referenced so the doc-tests below can `use kicked_walk::...`.
pub use kicked_walk as _lib;

#[doc = include_str!("../../../README.md")]
pub mod readme {}

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/quantum-map.md")]
pub mod quantum_map {}

#[doc = include_str!("../../../book/src/resonant-route.md")]
pub mod resonant_route {}

#[doc = include_str!("../../../book/src/near-resonant-route.md")]
pub mod near_resonant_route {}

#[doc = include_str!("../../../book/src/light-shift.md")]
pub mod light_shift {}

#[doc = include_str!("../../../book/src/ensemble.md")]
pub mod ensemble {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
