//! Compile/run toolchain abstraction.
//!
//! Every probe compilation and equivalence run goes through the
//! [`Toolchain`] trait. Two backends exist:
//!
//! * [`javac::JavacToolchain`] drives an external JDK (`javac` + `java`)
//!   in isolated temporary workspaces and parses its diagnostics.
//! * [`embedded::EmbeddedToolchain`] is a self-contained Java-subset
//!   front end (parser, name/scope checker, interpreter) used when no JDK
//!   is configured. It performs the same class of checks the repair loop
//!   depends on — unresolved symbols, duplicate locals, malformed
//!   syntax — and executes self-contained programs deterministically.
//!
//! Reports always record which toolchain produced a result.

pub mod embedded;
pub mod javac;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagKind {
    Error,
    Warning,
    Note,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Class,
    Variable,
    Method,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolRef {
    pub kind: SymbolKind,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub message: String,
    pub symbol: Option<SymbolRef>,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>) -> Self {
        Diagnostic {
            kind: DiagKind::Error,
            message: message.into(),
            symbol: None,
        }
    }

    pub fn unresolved(kind: SymbolKind, name: impl Into<String>) -> Self {
        let name = name.into();
        Diagnostic {
            kind: DiagKind::Error,
            message: format!("cannot find symbol: {}", name),
            symbol: Some(SymbolRef { kind, name }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompileResult {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip, default)]
    pub elapsed: Duration,
}

impl CompileResult {
    pub fn success(elapsed: Duration) -> Self {
        CompileResult {
            ok: true,
            diagnostics: Vec::new(),
            elapsed,
        }
    }

    pub fn failure(diagnostics: Vec<Diagnostic>, elapsed: Duration) -> Self {
        let ok = !diagnostics.iter().any(|d| d.kind == DiagKind::Error);
        CompileResult {
            ok,
            diagnostics,
            elapsed,
        }
    }

    /// Unresolved symbols, in diagnostic order.
    pub fn unresolved_symbols(&self) -> Vec<&SymbolRef> {
        self.diagnostics.iter().filter_map(|d| d.symbol.as_ref()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub exit: i32,
    pub timed_out: bool,
}

pub trait Toolchain: Send + Sync {
    /// Stable identifier recorded in reports (name + release).
    fn id(&self) -> String;

    /// Compile one source file's worth of Java text (possibly several
    /// top-level classes) in an isolated workspace.
    fn compile(&self, source: &str) -> Result<CompileResult>;

    /// Compile `source` and execute `main_class.main`.
    fn run(&self, source: &str, main_class: &str) -> Result<RunResult>;

    /// Whether the backing compiler accepts features of the given Java
    /// feature release (e.g. 9 for `Stream.ofNullable`).
    fn supports_release(&self, feature_release: u32) -> bool;
}

/// How the toolchain should be chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ToolchainSpec {
    /// Use `FUNPOISON_COMPILER` if set, else `javac` on PATH, else the
    /// embedded front end.
    #[default]
    Auto,
    Embedded,
    Javac(PathBuf),
}

impl ToolchainSpec {
    /// Parse a `--compiler` flag value.
    pub fn parse(value: &str) -> Self {
        match value {
            "auto" => ToolchainSpec::Auto,
            "embedded" => ToolchainSpec::Embedded,
            path => ToolchainSpec::Javac(PathBuf::from(path)),
        }
    }
}

pub const COMPILER_ENV: &str = "FUNPOISON_COMPILER";

pub fn resolve(spec: &ToolchainSpec, timeout: Duration) -> Result<Arc<dyn Toolchain>> {
    match spec {
        ToolchainSpec::Embedded => Ok(Arc::new(embedded::EmbeddedToolchain::new())),
        ToolchainSpec::Javac(path) => {
            let tc = javac::JavacToolchain::new(path.clone(), timeout)?;
            Ok(Arc::new(tc))
        }
        ToolchainSpec::Auto => {
            if let Ok(v) = std::env::var(COMPILER_ENV) {
                if !v.is_empty() {
                    return resolve(&ToolchainSpec::parse(&v), timeout);
                }
            }
            if let Some(found) = find_on_path("javac") {
                if let Ok(tc) = javac::JavacToolchain::new(found, timeout) {
                    return Ok(Arc::new(tc));
                }
            }
            Ok(Arc::new(embedded::EmbeddedToolchain::new()))
        }
    }
}

fn find_on_path(bin: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    for dir in std::env::split_paths(&path) {
        let cand = dir.join(bin);
        if cand.is_file() {
            return Some(cand);
        }
    }
    None
}

pub(crate) fn config_error(msg: impl Into<String>) -> Error {
    Error::CompilerUnavailable(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        assert_eq!(ToolchainSpec::parse("embedded"), ToolchainSpec::Embedded);
        assert_eq!(ToolchainSpec::parse("auto"), ToolchainSpec::Auto);
        assert_eq!(
            ToolchainSpec::parse("/usr/bin/javac"),
            ToolchainSpec::Javac(PathBuf::from("/usr/bin/javac"))
        );
    }

    #[test]
    fn unresolved_symbol_extraction() {
        let res = CompileResult::failure(
            vec![
                Diagnostic::unresolved(SymbolKind::Class, "Widget"),
                Diagnostic::error("other"),
            ],
            Duration::ZERO,
        );
        assert!(!res.ok);
        let syms = res.unresolved_symbols();
        assert_eq!(syms.len(), 1);
        assert_eq!(syms[0].name, "Widget");
    }
}
