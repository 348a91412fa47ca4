//! External JDK backend.
//!
//! Each probe gets its own temporary workspace; the source file name is
//! derived from the public (or first) top-level class so `javac` accepts
//! it. Diagnostics are recovered from stderr, including the
//! `cannot find symbol` / `symbol: kind name` pairs the repair loop
//! consumes.

use std::fs;
use std::io::Read as _;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::lex::{self, TokKind};

use super::{config_error, CompileResult, DiagKind, Diagnostic, RunResult, SymbolKind, SymbolRef, Toolchain};

pub struct JavacToolchain {
    javac: PathBuf,
    java: PathBuf,
    timeout: Duration,
    release: u32,
}

impl JavacToolchain {
    pub fn new(javac: PathBuf, timeout: Duration) -> Result<Self> {
        let out = Command::new(&javac)
            .arg("-version")
            .output()
            .map_err(|e| config_error(format!("{}: {e}", javac.display())))?;
        let text = String::from_utf8_lossy(&out.stdout).into_owned()
            + &String::from_utf8_lossy(&out.stderr);
        let release = parse_release(&text)
            .ok_or_else(|| config_error(format!("unrecognized javac -version output: {text:?}")))?;
        let java = javac
            .parent()
            .map(|d| d.join("java"))
            .filter(|p| p.is_file())
            .unwrap_or_else(|| PathBuf::from("java"));
        Ok(JavacToolchain {
            javac,
            java,
            timeout,
            release,
        })
    }

    pub fn release(&self) -> u32 {
        self.release
    }

    fn compile_in(&self, dir: &std::path::Path, source: &str) -> Result<CompileResult> {
        let file = format!("{}.java", main_type_name(source));
        let src_path = dir.join(&file);
        fs::write(&src_path, source).map_err(|e| crate::Error::io(&src_path, e))?;
        let started = Instant::now();
        let out = Command::new(&self.javac)
            .arg("-d")
            .arg(dir)
            .arg(&file)
            .current_dir(dir)
            .output()
            .map_err(|e| config_error(format!("{}: {e}", self.javac.display())))?;
        let elapsed = started.elapsed();
        if out.status.success() {
            Ok(CompileResult::success(elapsed))
        } else {
            let stderr = String::from_utf8_lossy(&out.stderr);
            Ok(CompileResult::failure(parse_diagnostics(&stderr), elapsed))
        }
    }
}

impl Toolchain for JavacToolchain {
    fn id(&self) -> String {
        format!("javac-{}", self.release)
    }

    fn compile(&self, source: &str) -> Result<CompileResult> {
        let dir = tempdir()?;
        let res = self.compile_in(dir.path(), source);
        res
    }

    fn run(&self, source: &str, main_class: &str) -> Result<RunResult> {
        let dir = tempdir()?;
        let compiled = self.compile_in(dir.path(), source)?;
        if !compiled.ok {
            let msg: Vec<String> = compiled.diagnostics.iter().map(|d| d.message.clone()).collect();
            return Ok(RunResult {
                stdout: Vec::new(),
                stderr: format!("compile failed: {}", msg.join("; ")).into_bytes(),
                exit: -1,
                timed_out: false,
            });
        }
        let mut child = Command::new(&self.java)
            .arg("-cp")
            .arg(dir.path())
            .arg(main_class)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| config_error(format!("{}: {e}", self.java.display())))?;
        let deadline = Instant::now() + self.timeout;
        let mut timed_out = false;
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        timed_out = true;
                        break;
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
                Err(e) => return Err(config_error(format!("wait on java: {e}"))),
            }
        }
        let mut stdout = Vec::new();
        let mut stderr = Vec::new();
        if let Some(mut s) = child.stdout.take() {
            let _ = s.read_to_end(&mut stdout);
        }
        if let Some(mut s) = child.stderr.take() {
            let _ = s.read_to_end(&mut stderr);
        }
        let exit = if timed_out {
            -1
        } else {
            child.wait().ok().and_then(|s| s.code()).unwrap_or(-1)
        };
        Ok(RunResult {
            stdout,
            stderr,
            exit,
            timed_out,
        })
    }

    fn supports_release(&self, feature_release: u32) -> bool {
        self.release >= feature_release
    }
}

fn tempdir() -> Result<tempfile_dir::TempDir> {
    tempfile_dir::TempDir::new()
}

/// Minimal self-cleaning temp directory; avoids pulling a dev-only
/// dependency into the library build.
mod tempfile_dir {
    use std::path::{Path, PathBuf};
    use std::sync::atomic::{AtomicU64, Ordering};

    use crate::error::{Error, Result};

    static COUNTER: AtomicU64 = AtomicU64::new(0);

    pub struct TempDir {
        path: PathBuf,
    }

    impl TempDir {
        pub fn new() -> Result<TempDir> {
            let n = COUNTER.fetch_add(1, Ordering::Relaxed);
            let path = std::env::temp_dir().join(format!(
                "funpoison-{}-{}",
                std::process::id(),
                n
            ));
            std::fs::create_dir_all(&path).map_err(|e| Error::io(&path, e))?;
            Ok(TempDir { path })
        }

        pub fn path(&self) -> &Path {
            &self.path
        }
    }

    impl Drop for TempDir {
        fn drop(&mut self) {
            let _ = std::fs::remove_dir_all(&self.path);
        }
    }
}

/// File-base type name: the public top-level class if any, else the
/// first declared type, else `Probe`.
pub fn main_type_name(source: &str) -> String {
    let toks = lex::code_tokens(source);
    let mut first: Option<String> = None;
    let mut depth = 0i32;
    let mut i = 0;
    while i < toks.len() {
        let t = toks[i].text(source);
        match t {
            "{" => depth += 1,
            "}" => depth -= 1,
            "class" | "interface" | "enum"
                if depth == 0 && i + 1 < toks.len() && toks[i + 1].kind == TokKind::Ident =>
            {
                let name = toks[i + 1].text(source).to_string();
                let public = toks[..i]
                    .iter()
                    .rev()
                    .take(4)
                    .any(|m| m.text(source) == "public");
                if public {
                    return name;
                }
                if first.is_none() {
                    first = Some(name);
                }
            }
            _ => {}
        }
        i += 1;
    }
    first.unwrap_or_else(|| "Probe".to_string())
}

/// Parse javac stderr into structured diagnostics.
///
/// Expected shape:
/// ```text
/// Probe.java:3: error: cannot find symbol
///         List<String> xs = new ArrayList<>();
///         ^
///   symbol:   class List
///   location: class Probe
/// ```
pub fn parse_diagnostics(stderr: &str) -> Vec<Diagnostic> {
    let mut diags: Vec<Diagnostic> = Vec::new();
    for line in stderr.lines() {
        let trimmed = line.trim_start();
        if let Some(rest) = split_header(line) {
            let (kind, message) = rest;
            diags.push(Diagnostic {
                kind,
                message,
                symbol: None,
            });
        } else if let Some(sym) = trimmed.strip_prefix("symbol:") {
            if let Some(last) = diags.last_mut() {
                last.symbol = parse_symbol(sym.trim());
            }
        }
    }
    if diags.is_empty() && !stderr.trim().is_empty() {
        diags.push(Diagnostic::error(stderr.trim().to_string()));
    }
    diags
}

fn split_header(line: &str) -> Option<(DiagKind, String)> {
    // "<file>.java:<line>: error: <message>"
    let idx = line.find(".java:")?;
    let rest = &line[idx + ".java:".len()..];
    let colon = rest.find(':')?;
    rest[..colon].trim().parse::<u32>().ok()?;
    let tail = rest[colon + 1..].trim_start();
    if let Some(m) = tail.strip_prefix("error:") {
        Some((DiagKind::Error, m.trim().to_string()))
    } else {
        tail.strip_prefix("warning:")
            .map(|m| (DiagKind::Warning, m.trim().to_string()))
    }
}

fn parse_symbol(text: &str) -> Option<SymbolRef> {
    let mut parts = text.split_whitespace();
    let kind = match parts.next()? {
        "class" => SymbolKind::Class,
        "variable" => SymbolKind::Variable,
        "method" => SymbolKind::Method,
        _ => return None,
    };
    let raw = parts.next()?;
    // Methods render as "name(arg,types)"; keep just the name.
    let name = raw.split('(').next()?.to_string();
    Some(SymbolRef { kind, name })
}

fn parse_release(version_output: &str) -> Option<u32> {
    // "javac 17.0.8" or "javac 1.8.0_392"
    let num = version_output.split_whitespace().find(|w| w.chars().next().is_some_and(|c| c.is_ascii_digit()))?;
    let mut parts = num.split('.');
    let major: u32 = parts.next()?.parse().ok()?;
    if major == 1 {
        parts.next()?.parse().ok()
    } else {
        Some(major)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn release_parsing() {
        assert_eq!(parse_release("javac 17.0.8"), Some(17));
        assert_eq!(parse_release("javac 1.8.0_392"), Some(8));
        assert_eq!(parse_release("javac 21"), Some(21));
        assert_eq!(parse_release("no digits"), None);
    }

    #[test]
    fn diagnostic_parsing() {
        let stderr = "Probe.java:3: error: cannot find symbol\n        List<String> xs;\n        ^\n  symbol:   class List\n  location: class Probe\nProbe.java:5: error: cannot find symbol\n        helper(x);\n        ^\n  symbol:   method helper(int)\n  location: class Probe\n2 errors\n";
        let diags = parse_diagnostics(stderr);
        assert_eq!(diags.len(), 2);
        assert_eq!(
            diags[0].symbol,
            Some(SymbolRef {
                kind: SymbolKind::Class,
                name: "List".into()
            })
        );
        assert_eq!(
            diags[1].symbol,
            Some(SymbolRef {
                kind: SymbolKind::Method,
                name: "helper".into()
            })
        );
    }

    #[test]
    fn main_type_selection() {
        assert_eq!(main_type_name("class A {} public class B {}"), "B");
        assert_eq!(main_type_name("class A { class Inner {} }"), "A");
        assert_eq!(main_type_name("int x = 1;"), "Probe");
    }
}
