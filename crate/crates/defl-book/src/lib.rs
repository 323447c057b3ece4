//! mdbook cannot run a book's code blocks against a local crate, so every
//! chapter is included here as a doc comment: `cargo test` then type-checks
//! and runs each snippet through rustdoc, keeping the guide honest. One
//! module per chapter, so a failure names its source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/formulas.md")]
pub mod formulas {}

#[doc = include_str!("../../../book/src/programs.md")]
pub mod programs {}

#[doc = include_str!("../../../book/src/announcements.md")]
pub mod announcements {}

#[doc = include_str!("../../../book/src/questions-and-network.md")]
pub mod questions_and_network {}

#[doc = include_str!("../../../book/src/common-knowledge.md")]
pub mod common_knowledge {}

#[doc = include_str!("../../../book/src/validity.md")]
pub mod validity {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
