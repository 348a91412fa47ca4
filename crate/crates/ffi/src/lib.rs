//! C ABI for the funpoison pipeline.
//!
//! Every constructor returns an opaque handle or null; on null (or any
//! non-`FP_OK` status) `fp_last_error_message` carries a UTF-8
//! description valid until the next failing call on the same thread.
//! Handles are freed exactly once with their matching `fp_*_free`;
//! freeing null is a no-op.

// The safety contract (valid or null pointers, NUL-terminated UTF-8
// strings, single ownership of handles) is stated above for the whole
// surface rather than repeated per function.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use funpoison::corpus::{load_corpus, save_corpus, Corpus};
use funpoison::inject::{poison_dataset, render_report, InjectionConfig, InjectionReport, Mode};
use funpoison::safety::{filter_pool, Ruleset};
use funpoison::template::{build_pool, load_pool, save_pool, TemplatePool};
use funpoison::toolchain::{resolve, Toolchain, ToolchainSpec};
use funpoison::verify::{render_verification, verify_corpus, VerificationSummary};

/// Status codes returned by fallible operations.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Invalid configuration value (rate, mode, ...).
    Config = 3,
    /// File could not be read or written.
    Io = 4,
    /// Clean/poisoned corpora are not unit-aligned.
    IdMismatch = 5,
    /// Any other pipeline failure.
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &funpoison::Error) -> FpStatus {
    match err {
        funpoison::Error::Config(_) => FpStatus::Config,
        funpoison::Error::Io { .. } => FpStatus::Io,
        funpoison::Error::IdMismatch(_) => FpStatus::IdMismatch,
        _ => FpStatus::Internal,
    }
}

fn fail(err: &funpoison::Error) -> FpStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Message for the most recent failure on this thread; empty string when
/// nothing failed yet. The pointer is invalidated by the next failure.
#[no_mangle]
pub extern "C" fn fp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, FpStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(FpStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        FpStatus::InvalidUtf8
    })
}

// ---------------------------------------------------------------------------
// Handles
// ---------------------------------------------------------------------------

pub struct FpCorpus(Corpus);
pub struct FpPool(TemplatePool);
pub struct FpToolchain(Arc<dyn Toolchain>);
/// A completed injection: poisoned corpus plus its report.
pub struct FpRun {
    poisoned: Corpus,
    report: InjectionReport,
}
pub struct FpSummary(VerificationSummary);

macro_rules! free_fn {
    ($name:ident, $ty:ty) => {
        /// Frees the handle; null is ignored.
        #[no_mangle]
        pub unsafe extern "C" fn $name(ptr: *mut $ty) {
            if !ptr.is_null() {
                drop(Box::from_raw(ptr));
            }
        }
    };
}

free_fn!(fp_corpus_free, FpCorpus);
free_fn!(fp_pool_free, FpPool);
free_fn!(fp_toolchain_free, FpToolchain);
free_fn!(fp_run_free, FpRun);
free_fn!(fp_summary_free, FpSummary);

/// Frees a string returned by an `fp_*_render` function.
#[no_mangle]
pub unsafe extern "C" fn fp_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

// ---------------------------------------------------------------------------
// Toolchain
// ---------------------------------------------------------------------------

/// Resolve a compiler backend: "auto", "embedded", or a javac path.
/// `timeout_secs` bounds each compile/run probe. Null on failure.
#[no_mangle]
pub unsafe extern "C" fn fp_toolchain_new(
    spec: *const c_char,
    timeout_secs: u64,
) -> *mut FpToolchain {
    let Ok(spec) = cstr_arg(spec) else {
        return std::ptr::null_mut();
    };
    match resolve(&ToolchainSpec::parse(spec), Duration::from_secs(timeout_secs)) {
        Ok(tc) => Box::into_raw(Box::new(FpToolchain(tc))),
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

/// Load a corpus from a directory of .java files or a JSONL record file.
#[no_mangle]
pub unsafe extern "C" fn fp_corpus_load(path: *const c_char) -> *mut FpCorpus {
    let Ok(path) = cstr_arg(path) else {
        return std::ptr::null_mut();
    };
    match load_corpus(Path::new(path)) {
        Ok(c) => Box::into_raw(Box::new(FpCorpus(c))),
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_corpus_len(corpus: *const FpCorpus) -> usize {
    corpus.as_ref().map(|c| c.0.len()).unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Pool
// ---------------------------------------------------------------------------

/// Mine, repair, and safety-filter a template pool. `cap` 0 means
/// uncapped. Null on failure.
#[no_mangle]
pub unsafe extern "C" fn fp_pool_build(
    corpus: *const FpCorpus,
    cap: usize,
    seed: u64,
    toolchain: *const FpToolchain,
) -> *mut FpPool {
    let (Some(corpus), Some(tc)) = (corpus.as_ref(), toolchain.as_ref()) else {
        set_error("null corpus or toolchain");
        return std::ptr::null_mut();
    };
    let cap = if cap == 0 { None } else { Some(cap) };
    match build_pool(&corpus.0, cap, seed, tc.0.as_ref()) {
        Ok((pool, _stats)) => {
            let (filtered, _) = filter_pool(&pool, &Ruleset::default());
            Box::into_raw(Box::new(FpPool(filtered)))
        }
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_pool_load(path: *const c_char) -> *mut FpPool {
    let Ok(path) = cstr_arg(path) else {
        return std::ptr::null_mut();
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            fail(&funpoison::Error::io(path, e));
            return std::ptr::null_mut();
        }
    };
    match load_pool(&text) {
        Ok(p) => Box::into_raw(Box::new(FpPool(p))),
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_pool_save(pool: *const FpPool, path: *const c_char) -> FpStatus {
    let Some(pool) = pool.as_ref() else {
        set_error("null pool");
        return FpStatus::NullArgument;
    };
    let path = match cstr_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let text = match save_pool(&pool.0) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    match std::fs::write(path, text) {
        Ok(()) => FpStatus::Ok,
        Err(e) => fail(&funpoison::Error::io(path, e)),
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_pool_len(pool: *const FpPool) -> usize {
    pool.as_ref().map(|p| p.0.templates.len()).unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Injection
// ---------------------------------------------------------------------------

/// Poison a corpus. `mode` is "funpoison" or "dead-branch". Null on
/// failure (including invalid configuration).
#[no_mangle]
pub unsafe extern "C" fn fp_inject(
    corpus: *const FpCorpus,
    pool: *const FpPool,
    rate: f64,
    templates_per_unit: usize,
    seed: u64,
    mode: *const c_char,
    toolchain: *const FpToolchain,
) -> *mut FpRun {
    let (Some(corpus), Some(pool), Some(tc)) = (corpus.as_ref(), pool.as_ref(), toolchain.as_ref())
    else {
        set_error("null corpus, pool, or toolchain");
        return std::ptr::null_mut();
    };
    let Ok(mode_str) = cstr_arg(mode) else {
        return std::ptr::null_mut();
    };
    let Some(mode) = Mode::parse(mode_str) else {
        fail(&funpoison::Error::Config(format!(
            "mode must be \"funpoison\" or \"dead-branch\", got {mode_str:?}"
        )));
        return std::ptr::null_mut();
    };
    let config = InjectionConfig {
        rate,
        templates_per_unit,
        seed,
        mode,
    };
    match poison_dataset(&corpus.0, &pool.0, &config, tc.0.as_ref()) {
        Ok((poisoned, report)) => Box::into_raw(Box::new(FpRun { poisoned, report })),
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_run_effective_rate(run: *const FpRun) -> f64 {
    run.as_ref().map(|r| r.report.effective_rate).unwrap_or(0.0)
}

#[no_mangle]
pub unsafe extern "C" fn fp_run_reverted_units(run: *const FpRun) -> usize {
    run.as_ref().map(|r| r.report.reverted_units).unwrap_or(0)
}

/// Write the poisoned corpus and its JSONL report to the given paths.
#[no_mangle]
pub unsafe extern "C" fn fp_run_save(
    run: *const FpRun,
    corpus_path: *const c_char,
    report_path: *const c_char,
) -> FpStatus {
    let Some(run) = run.as_ref() else {
        set_error("null run");
        return FpStatus::NullArgument;
    };
    let corpus_path = match cstr_arg(corpus_path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let report_path = match cstr_arg(report_path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    if let Err(e) = save_corpus(&run.poisoned, Path::new(corpus_path)) {
        return fail(&e);
    }
    let text = match render_report(&run.report) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    match std::fs::write(report_path, text) {
        Ok(()) => FpStatus::Ok,
        Err(e) => fail(&funpoison::Error::io(report_path, e)),
    }
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Verify a run against its clean corpus. Null on failure (including
/// id misalignment).
#[no_mangle]
pub unsafe extern "C" fn fp_verify(
    clean: *const FpCorpus,
    run: *const FpRun,
    toolchain: *const FpToolchain,
) -> *mut FpSummary {
    let (Some(clean), Some(run), Some(tc)) = (clean.as_ref(), run.as_ref(), toolchain.as_ref())
    else {
        set_error("null corpus, run, or toolchain");
        return std::ptr::null_mut();
    };
    match verify_corpus(&clean.0, &run.poisoned, &run.report, tc.0.as_ref()) {
        Ok(s) => Box::into_raw(Box::new(FpSummary(s))),
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

/// 1 when every hard invariant held, 0 otherwise (or on null).
#[no_mangle]
pub unsafe extern "C" fn fp_summary_healthy(summary: *const FpSummary) -> i32 {
    summary.as_ref().map(|s| s.0.healthy() as i32).unwrap_or(0)
}

#[no_mangle]
pub unsafe extern "C" fn fp_summary_compile_fraction(summary: *const FpSummary) -> f64 {
    summary
        .as_ref()
        .map(|s| s.0.compile_success_fraction)
        .unwrap_or(0.0)
}

/// Structured record plus human-readable table; free with
/// `fp_string_free`. Null on null input.
#[no_mangle]
pub unsafe extern "C" fn fp_summary_render(summary: *const FpSummary) -> *mut c_char {
    let Some(summary) = summary.as_ref() else {
        set_error("null summary");
        return std::ptr::null_mut();
    };
    match render_verification(&summary.0) {
        Ok(text) => CString::new(text.replace('\0', " "))
            .map(CString::into_raw)
            .unwrap_or(std::ptr::null_mut()),
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::fs;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn write_fixture_corpus(dir: &Path) -> CString {
        let path = dir.join("corpus.jsonl");
        let mut out = String::new();
        for i in 0..8 {
            let code = format!(
                "static int f{i}(int x) {{\\n    int a = x + {i};\\n    int b = a * 2;\\n    return b;\\n}}"
            );
            out.push_str(&format!("{{\"id\":\"u{i}\",\"code\":\"{code}\"}}\n"));
        }
        fs::write(&path, out).unwrap();
        c(path.to_str().unwrap())
    }

    #[test]
    fn full_pipeline_through_the_c_abi() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_path = write_fixture_corpus(dir.path());
        unsafe {
            let tc = fp_toolchain_new(c("embedded").as_ptr(), 10);
            assert!(!tc.is_null());
            let corpus = fp_corpus_load(corpus_path.as_ptr());
            assert!(!corpus.is_null());
            assert_eq!(fp_corpus_len(corpus), 8);

            let pool = fp_pool_build(corpus, 0, 7, tc);
            assert!(!pool.is_null());
            assert!(fp_pool_len(pool) >= 2);

            let pool_path = c(dir.path().join("pool.jsonl").to_str().unwrap());
            assert_eq!(fp_pool_save(pool, pool_path.as_ptr()), FpStatus::Ok);
            let reloaded = fp_pool_load(pool_path.as_ptr());
            assert_eq!(fp_pool_len(reloaded), fp_pool_len(pool));

            let run = fp_inject(corpus, pool, 1.0, 2, 7, c("funpoison").as_ptr(), tc);
            assert!(!run.is_null());
            assert_eq!(fp_run_reverted_units(run), 0);
            assert!(fp_run_effective_rate(run) > 0.9);

            let out_path = c(dir.path().join("poisoned.jsonl").to_str().unwrap());
            let rep_path = c(dir.path().join("report.jsonl").to_str().unwrap());
            assert_eq!(
                fp_run_save(run, out_path.as_ptr(), rep_path.as_ptr()),
                FpStatus::Ok
            );
            assert!(dir.path().join("report.jsonl").exists());

            let summary = fp_verify(corpus, run, tc);
            assert!(!summary.is_null());
            assert_eq!(fp_summary_healthy(summary), 1);
            assert_eq!(fp_summary_compile_fraction(summary), 1.0);
            let rendered = fp_summary_render(summary);
            assert!(!rendered.is_null());
            let text = CStr::from_ptr(rendered).to_str().unwrap().to_string();
            assert!(text.contains("healthy"));
            fp_string_free(rendered);

            fp_summary_free(summary);
            fp_run_free(run);
            fp_pool_free(reloaded);
            fp_pool_free(pool);
            fp_corpus_free(corpus);
            fp_toolchain_free(tc);
        }
    }

    #[test]
    fn null_and_bad_arguments_report_errors() {
        unsafe {
            assert!(fp_corpus_load(std::ptr::null()).is_null());
            let msg = CStr::from_ptr(fp_last_error_message()).to_str().unwrap();
            assert!(msg.contains("null"));

            assert!(fp_corpus_load(c("/nonexistent/path").as_ptr()).is_null());
            let msg = CStr::from_ptr(fp_last_error_message()).to_str().unwrap();
            assert!(msg.contains("nonexistent"));

            assert_eq!(
                fp_pool_save(std::ptr::null(), c("x").as_ptr()),
                FpStatus::NullArgument
            );
            assert_eq!(fp_summary_healthy(std::ptr::null()), 0);
            assert_eq!(fp_corpus_len(std::ptr::null()), 0);

            // Freeing null is a no-op.
            fp_corpus_free(std::ptr::null_mut());
            fp_string_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn invalid_config_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_path = write_fixture_corpus(dir.path());
        unsafe {
            let tc = fp_toolchain_new(c("embedded").as_ptr(), 10);
            let corpus = fp_corpus_load(corpus_path.as_ptr());
            let pool = fp_pool_build(corpus, 0, 1, tc);
            let run = fp_inject(corpus, pool, 0.0, 2, 1, c("funpoison").as_ptr(), tc);
            assert!(run.is_null());
            let msg = CStr::from_ptr(fp_last_error_message()).to_str().unwrap();
            assert!(msg.contains("rate"));

            let run = fp_inject(corpus, pool, 0.5, 2, 1, c("bogus").as_ptr(), tc);
            assert!(run.is_null());

            fp_pool_free(pool);
            fp_corpus_free(corpus);
            fp_toolchain_free(tc);
        }
    }
}
