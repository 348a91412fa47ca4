//! Corpus-protection toolkit for Java code datasets.
//!
//! The pipeline mines statement-level templates from a corpus, repairs
//! them into independently compilable units, filters them for side-effect
//! freedom, and injects them with type-correct weak-use statements at
//! execution-safe sites. The result is a poisoned corpus that still
//! compiles and behaves identically, plus a verification harness that
//! proves it.

pub mod corpus;
pub mod error;
pub mod inject;
pub mod jdk;
pub mod lex;
pub mod safety;
pub mod segment;
pub mod template;
pub mod toolchain;
pub mod verify;
pub mod weakuse;

pub use error::{Error, Result};
