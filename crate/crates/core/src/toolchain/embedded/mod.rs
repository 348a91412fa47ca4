//! Embedded Java-subset front end.
//!
//! Self-contained fallback toolchain: a parser ([`parser`]), a
//! name/scope checker ([`check`]) whose diagnostics mirror the classes
//! of error the repair loop needs (unresolved class/variable/method,
//! duplicate locals, syntax errors), and a deterministic tree-walking
//! interpreter ([`interp`]) for behavioral-equivalence runs. The subset
//! covers the code this pipeline generates and the bundled fixtures; it
//! is not a general-purpose Java implementation.

pub mod ast;
pub mod check;
pub mod interp;
pub mod parser;

use std::time::Instant;

use crate::error::Result;
use crate::lex;
use crate::toolchain::{CompileResult, Diagnostic, RunResult, Toolchain};

/// Highest Java feature release whose constructs the subset understands
/// (bounded by the interpreter's library model, e.g. `Stream.ofNullable`
/// from release 9).
const EMBEDDED_RELEASE: u32 = 11;

pub struct EmbeddedToolchain;

impl EmbeddedToolchain {
    pub fn new() -> Self {
        EmbeddedToolchain
    }

    fn front_end(source: &str) -> std::result::Result<ast::Unit, Vec<Diagnostic>> {
        let unit = parser::parse_unit(source).map_err(|e| {
            vec![Diagnostic::error(format!(
                "line {}: {}",
                lex::line_of(source, e.pos),
                e.message
            ))]
        })?;
        let diags = check::check_unit(&unit);
        if diags.is_empty() {
            Ok(unit)
        } else {
            Err(diags)
        }
    }
}

impl Default for EmbeddedToolchain {
    fn default() -> Self {
        Self::new()
    }
}

impl Toolchain for EmbeddedToolchain {
    fn id(&self) -> String {
        format!("embedded-{}", EMBEDDED_RELEASE)
    }

    fn compile(&self, source: &str) -> Result<CompileResult> {
        let started = Instant::now();
        match Self::front_end(source) {
            Ok(_) => Ok(CompileResult::success(started.elapsed())),
            Err(diags) => Ok(CompileResult::failure(diags, started.elapsed())),
        }
    }

    fn run(&self, source: &str, main_class: &str) -> Result<RunResult> {
        let unit = match Self::front_end(source) {
            Ok(u) => u,
            Err(diags) => {
                let msg: Vec<String> = diags.into_iter().map(|d| d.message).collect();
                return Ok(RunResult {
                    stdout: Vec::new(),
                    stderr: format!("compile failed: {}", msg.join("; ")).into_bytes(),
                    exit: -1,
                    timed_out: false,
                });
            }
        };
        Ok(interp::run_main(&unit, main_class))
    }

    fn supports_release(&self, feature_release: u32) -> bool {
        feature_release <= EMBEDDED_RELEASE
    }
}
