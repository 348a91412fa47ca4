//! End-to-end acceptance checks over the bundled fixture corpora.
//!
//! Each check prints one `criterion N (...): PASS/FAIL` line. Structural
//! checks are validated against independent oracles implemented in this
//! file (a separate tokenizer, a brute-force seam enumerator, and BLEU
//! scores frozen from a standalone reference implementation), not
//! against the library's own machinery.

use std::collections::BTreeSet;
use std::panic::AssertUnwindSafe;
use std::path::PathBuf;
use std::sync::OnceLock;

use funpoison::corpus::{self, Corpus, SourceUnit, UnitKind};
use funpoison::inject::{
    self, dead_branch_inject, poison_dataset, InjectionConfig, InjectionReport, Mode, UnitOutcome,
};
use funpoison::safety::{filter_pool, filter_template, Ruleset};
use funpoison::template::{build_pool, NameMetadata, Provenance, Template, TemplatePool};
use funpoison::toolchain::embedded::EmbeddedToolchain;
use funpoison::toolchain::Toolchain;
use funpoison::verify::{self, detect_entry, run_equivalence, similarity, verify_corpus, Equivalence};
use funpoison::weakuse::{self, pattern_pool, VariableKind};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn load(name: &str) -> Corpus {
    corpus::load_corpus(&data(name)).expect("fixture loads")
}

fn tc() -> &'static EmbeddedToolchain {
    static TC: OnceLock<EmbeddedToolchain> = OnceLock::new();
    TC.get_or_init(EmbeddedToolchain::new)
}

fn criterion(n: u32, name: &str, f: impl FnOnce()) {
    match std::panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(()) => println!("criterion {n} ({name}): PASS"),
        Err(e) => {
            println!("criterion {n} ({name}): FAIL");
            std::panic::resume_unwind(e);
        }
    }
}

// ---------------------------------------------------------------------------
// Independent tokenizer (used instead of the library lexer for the
// subsequence and identity checks).
// ---------------------------------------------------------------------------

const OPS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

/// Code tokens of `src`: comments and whitespace dropped, string/char
/// literals kept as single tokens.
fn toks(src: &str) -> Vec<String> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'/' && b.get(i + 1) == Some(&b'/') {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if c == b'/' && b.get(i + 1) == Some(&b'*') {
            i += 2;
            while i + 1 < b.len() && !(b[i] == b'*' && b[i + 1] == b'/') {
                i += 1;
            }
            i = (i + 2).min(b.len());
        } else if c == b'"' || c == b'\'' {
            let q = c;
            let start = i;
            i += 1;
            while i < b.len() && b[i] != q && b[i] != b'\n' {
                if b[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            i = (i + 1).min(b.len());
            out.push(src[start..i].to_string());
        } else if c.is_ascii_alphanumeric() || c == b'_' || c == b'$' {
            let start = i;
            while i < b.len()
                && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'$' || b[i] == b'.')
            {
                // Keep identifier/number runs; a `.` only continues a
                // numeric literal (1.5), never an identifier chain.
                if b[i] == b'.' {
                    let numeric = b[start].is_ascii_digit()
                        && b.get(i + 1).map(|d| d.is_ascii_digit()).unwrap_or(false);
                    if !numeric {
                        break;
                    }
                }
                i += 1;
            }
            out.push(src[start..i].to_string());
        } else {
            let rest = &src[i..];
            let len = OPS.iter().find(|o| rest.starts_with(**o)).map(|o| o.len()).unwrap_or(1);
            out.push(src[i..i + len].to_string());
            i += len;
        }
    }
    out
}

fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

// ---------------------------------------------------------------------------
// Independent site oracle: brute-force seam enumeration by character
// scanning. Valid for the bundled oracle fixtures (plain statements,
// if/for/while/else headers, comments, strings).
// ---------------------------------------------------------------------------

struct OracleStmt {
    end: usize,
    block: usize,
    header: bool,
    inert: bool,
}

const HDR: &[&str] = &[
    "if", "for", "while", "switch", "try", "catch", "finally", "else", "do", "synchronized",
    "case", "default",
];
const XFER: &[&str] = &["return", "throw", "break", "continue", "yield"];

/// Whether `i` is inside a comment or string/char literal.
fn significance_mask(src: &str) -> Vec<bool> {
    let b = src.as_bytes();
    let mut mask = vec![true; b.len()];
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'/' && b.get(i + 1) == Some(&b'/') {
            while i < b.len() && b[i] != b'\n' {
                mask[i] = false;
                i += 1;
            }
        } else if b[i] == b'/' && b.get(i + 1) == Some(&b'*') {
            let end = src[i + 2..].find("*/").map(|k| i + 4 + k).unwrap_or(b.len());
            while i < end.min(b.len()) {
                mask[i] = false;
                i += 1;
            }
        } else if b[i] == b'"' || b[i] == b'\'' {
            let q = b[i];
            mask[i] = false;
            i += 1;
            while i < b.len() && b[i] != q && b[i] != b'\n' {
                mask[i] = false;
                if b[i] == b'\\' && i + 1 < b.len() {
                    mask[i + 1] = false;
                    i += 1;
                }
                i += 1;
            }
            if i < b.len() {
                mask[i] = false;
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    mask
}

fn first_word(stmt: &str) -> String {
    stmt.trim_start()
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect()
}

/// Pure for the oracle fixtures: no control transfer, no increment, and
/// only allowlisted calls (Math.*, String.valueOf, read-only instance
/// calls on a lowercase receiver).
fn oracle_inert(stmt: &str) -> bool {
    let words = toks(stmt);
    if words.is_empty() || XFER.contains(&first_word(stmt).as_str()) {
        return false;
    }
    if words.iter().any(|w| w == "++" || w == "--") {
        return false;
    }
    const READ_ONLY: &[&str] = &[
        "length", "size", "isEmpty", "charAt", "substring", "indexOf", "trim", "toUpperCase",
        "toLowerCase",
    ];
    for k in 0..words.len() {
        if words[k] != "(" || k == 0 {
            continue;
        }
        let callee = &words[k - 1];
        if !callee.chars().next().map(|c| c.is_ascii_alphabetic()).unwrap_or(false) {
            continue;
        }
        let qualified = k >= 3 && words[k - 2] == ".";
        if qualified {
            let receiver = &words[k - 3];
            let ok = receiver == "Math"
                || (receiver == "String" && callee == "valueOf")
                || (receiver.chars().next().map(|c| c.is_ascii_lowercase()).unwrap_or(false)
                    && READ_ONLY.contains(&callee.as_str()));
            if !ok {
                return false;
            }
        } else {
            return false;
        }
    }
    true
}

fn oracle_statements(code: &str) -> Vec<OracleStmt> {
    let b = code.as_bytes();
    let mask = significance_mask(code);
    let sig = |i: usize| mask[i] || b[i] == b'"' || b[i] == b'\''; // literal openers significant
    // Body starts after the first significant '{'.
    let mut i = 0;
    while i < b.len() && !(mask[i] && b[i] == b'{') {
        i += 1;
    }
    i += 1;
    let mut stmts = Vec::new();
    let mut blocks = vec![0usize];
    let mut next_block = 1usize;
    while i < b.len() {
        if !mask[i] || b[i].is_ascii_whitespace() {
            // Skip trivia unless it opens a literal (then it belongs to a
            // statement, handled below once a statement has started).
            if mask[i] && (b[i] == b'"' || b[i] == b'\'') {
                // unreachable: literal openers are masked false
            }
            i += 1;
            continue;
        }
        match b[i] {
            b'}' => {
                blocks.pop();
                i += 1;
            }
            b'{' => {
                blocks.push(next_block);
                next_block += 1;
                i += 1;
            }
            _ => {
                let start = i;
                let word_is_header = {
                    let w: String = code[i..]
                        .chars()
                        .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                        .collect();
                    HDR.contains(&w.as_str())
                };
                let block = *blocks.last().unwrap();
                if word_is_header {
                    // Header ends at its matching ')' (or at the keyword
                    // for a bare else).
                    let mut j = i;
                    let mut depth = 0i32;
                    let mut end = i;
                    while j < b.len() {
                        if mask[j] {
                            match b[j] {
                                b'(' => depth += 1,
                                b')' => {
                                    depth -= 1;
                                    if depth == 0 {
                                        end = j + 1;
                                        break;
                                    }
                                }
                                b'{' if depth == 0 => {
                                    // bare else
                                    end = j;
                                    break;
                                }
                                _ => {}
                            }
                        }
                        j += 1;
                    }
                    stmts.push(OracleStmt {
                        end,
                        block,
                        header: true,
                        inert: false,
                    });
                    i = end;
                } else {
                    let mut depth = 0i32;
                    let mut j = i;
                    while j < b.len() {
                        if mask[j] {
                            match b[j] {
                                b'(' | b'[' => depth += 1,
                                b')' | b']' => depth -= 1,
                                b';' if depth == 0 => break,
                                _ => {}
                            }
                        }
                        j += 1;
                    }
                    let end = (j + 1).min(b.len());
                    let text = &code[start..end];
                    stmts.push(OracleStmt {
                        end,
                        block,
                        header: false,
                        inert: oracle_inert(text),
                    });
                    i = end;
                }
            }
        }
    }
    let _ = sig;
    stmts
}

fn oracle_sites(code: &str) -> BTreeSet<usize> {
    let stmts = oracle_statements(code);
    let mut out = BTreeSet::new();
    for w in stmts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.block == b.block && !a.header && a.inert {
            out.insert(a.end);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Shared full-rate run over the 200-function corpus.
// ---------------------------------------------------------------------------

struct FullRun {
    clean: Corpus,
    poisoned: Corpus,
    report: InjectionReport,
    pool: TemplatePool,
}

fn full_run() -> &'static FullRun {
    static RUN: OnceLock<FullRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let clean = load("corpus_200.jsonl");
        assert_eq!(clean.len(), 200);
        let (pool, _) = build_pool(&clean, Some(100), 7, tc()).expect("pool builds");
        let (pool, _) = filter_pool(&pool, &Ruleset::default());
        assert!(pool.templates.len() >= 20, "pool too small: {}", pool.templates.len());
        let config = InjectionConfig {
            rate: 1.0,
            templates_per_unit: 3,
            seed: 7,
            mode: Mode::Funpoison,
        };
        let (poisoned, report) = poison_dataset(&clean, &pool, &config, tc()).expect("poisons");
        FullRun {
            clean,
            poisoned,
            report,
            pool,
        }
    })
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_compilability_preservation() {
    criterion(1, "compilability preservation", || {
        let run = full_run();
        assert_eq!(run.report.reverted_units, 0);
        assert!(run.report.injected_units >= 190, "{}", run.report.injected_units);
        let summary =
            verify_corpus(&run.clean, &run.poisoned, &run.report, tc()).expect("verifies");
        assert_eq!(summary.compile_success_fraction, 1.0);
        assert_eq!(summary.compile_checked, run.report.injected_units);
        assert!(summary.compile_failures.is_empty());
    });
}

#[test]
fn criterion_2_behavioral_equivalence() {
    criterion(2, "behavioral equivalence", || {
        let clean = load("runnable");
        assert!(clean.len() >= 20, "need >= 20 runnable fixtures");
        let pool = &full_run().pool;
        let config = InjectionConfig {
            rate: 1.0,
            templates_per_unit: 2,
            seed: 13,
            mode: Mode::Funpoison,
        };
        let (poisoned, report) = poison_dataset(&clean, pool, &config, tc()).expect("poisons");
        assert_eq!(report.reverted_units, 0);
        assert_eq!(report.injected_units, clean.len());
        for (c, p) in clean.units.iter().zip(poisoned.units.iter()) {
            assert!(detect_entry(&c.code).is_some(), "{} has an entry point", c.id);
            assert_ne!(c.code, p.code, "{} was injected", c.id);
            let eq = run_equivalence(c, p, tc()).expect("runs");
            assert_eq!(eq, Equivalence::Equal, "unit {}", c.id);
        }
    });
}

#[derive(serde::Deserialize)]
struct UnsafeFixture {
    #[allow(dead_code)]
    tier: String,
    category: String,
    snippet: String,
    #[serde(default)]
    imports: Vec<String>,
    #[serde(default)]
    stubs: Vec<String>,
}

fn fixture_template(snippet: &str, imports: Vec<String>, stubs: Vec<String>) -> Template {
    Template {
        snippet: snippet.to_string(),
        imports,
        preamble: vec![],
        stubs,
        names: NameMetadata::default(),
        provenance: Provenance {
            unit_id: "fixture".into(),
            start: 0,
            end: snippet.len(),
        },
        verdict: None,
    }
}

#[test]
fn criterion_3_safety_filter_soundness() {
    criterion(3, "safety filter soundness", || {
        let text = std::fs::read_to_string(data("unsafe_statements.json")).expect("fixture");
        let unsafe_set: Vec<UnsafeFixture> = serde_json::from_str(&text).expect("parses");
        let categories: BTreeSet<&str> = unsafe_set.iter().map(|f| f.category.as_str()).collect();
        assert_eq!(categories.len(), 19, "one fixture per category");
        let rules = Ruleset::default();
        for f in &unsafe_set {
            let t = fixture_template(&f.snippet, f.imports.clone(), f.stubs.clone());
            let verdict = filter_template(&t, &rules);
            assert!(!verdict.accepted, "{:?} must be rejected", f.snippet);
            assert!(
                verdict.violations.iter().any(|v| v.category == f.category),
                "{:?}: expected category {:?} among {:?}",
                f.snippet,
                f.category,
                verdict.violations
            );
        }

        let text = std::fs::read_to_string(data("safe_statements.json")).expect("fixture");
        let safe_set: Vec<String> = serde_json::from_str(&text).expect("parses");
        assert!(safe_set.len() >= 30);
        for s in &safe_set {
            let verdict = filter_template(&fixture_template(s, vec![], vec![]), &rules);
            assert!(verdict.accepted, "{s:?} rejected: {:?}", verdict.violations);
        }
    });
}

fn canonical_decl(kind: VariableKind) -> &'static str {
    match kind {
        VariableKind::Boolean => "boolean v0 = false;",
        VariableKind::Char => "char v0 = 'a';",
        VariableKind::IntLike => "int v0 = 3;",
        VariableKind::Long => "long v0 = 3L;",
        VariableKind::FloatLike => "double v0 = 1.5;",
        VariableKind::StringLike => "String v0 = \"s\";",
        VariableKind::OptionalLike => "Optional<String> v0 = Optional.of(\"s\");",
        VariableKind::Array => "int[] v0 = new int[] { 1, 2 };",
        VariableKind::CollectionLike => "List<String> v0 = new ArrayList<>();",
        VariableKind::MapLike => "Map<String, Integer> v0 = new HashMap<>();",
        VariableKind::GenericObject => "Object v0 = new Object();",
    }
}

fn canonical_imports(kind: VariableKind) -> Vec<String> {
    let base: &[&str] = match kind {
        VariableKind::OptionalLike => &["java.util.Optional"],
        VariableKind::CollectionLike => &["java.util.List", "java.util.ArrayList"],
        VariableKind::MapLike => &["java.util.Map", "java.util.HashMap"],
        _ => &[],
    };
    base.iter().map(|s| s.to_string()).collect()
}

#[test]
fn criterion_4_weak_use_pool_validity() {
    criterion(4, "weak-use pool validity", || {
        let mut excluded = Vec::new();
        let mut checked = 0usize;
        for (i, p) in pattern_pool().iter().enumerate() {
            if !tc().supports_release(p.min_release) {
                excluded.push(format!("{}/{} ({})", p.kind.as_str(), i, p.expr));
                continue;
            }
            checked += 1;
            let stmt = weakuse::render(p, "v0", 1, 1);
            let mut imports = canonical_imports(p.kind);
            imports.extend(p.imports.iter().map(|s| s.to_string()));

            // Compile: declaration + weak use inside the probe wrapper.
            let parts = verify::ProbeParts {
                imports: imports.clone(),
                stubs: vec![],
                preamble: vec![canonical_decl(p.kind).to_string()],
                body: stmt.clone(),
            };
            let res = verify::compile_probe(&parts, tc()).expect("probe runs");
            assert!(res.ok, "pattern {i} ({}): {stmt}\n{:?}", p.expr, res.diagnostics);

            // Inertness: sentinel program output is unchanged by the
            // weak use.
            let program = |body: &str| {
                let mut s = String::new();
                for imp in &imports {
                    s.push_str(&format!("import {imp};\n"));
                }
                s.push_str("public class Probe {\n    public static void main(String[] args) {\n");
                s.push_str(&format!("        {}\n", canonical_decl(p.kind)));
                s.push_str(body);
                s.push_str("        System.out.println(\"S\");\n    }\n}\n");
                s
            };
            let base = tc().run(&program(""), "Probe").expect("runs");
            let with = tc()
                .run(&program(&format!("        {stmt}\n")), "Probe")
                .expect("runs");
            assert_eq!(base.stdout, with.stdout, "pattern {i} ({}) changed output", p.expr);
            assert_eq!(base.stderr, with.stderr, "pattern {i} ({})", p.expr);
            assert_eq!(base.exit, with.exit, "pattern {i} ({})", p.expr);
        }
        assert!(checked > 40, "sweep covered {checked} patterns");
        // Exclusions must be exactly the release-gated patterns.
        let expected: Vec<String> = pattern_pool()
            .iter()
            .enumerate()
            .filter(|(_, p)| !tc().supports_release(p.min_release))
            .map(|(i, p)| format!("{}/{} ({})", p.kind.as_str(), i, p.expr))
            .collect();
        assert_eq!(excluded, expected);
        println!("  release-gated exclusions: {excluded:?}");
    });
}

#[test]
fn criterion_5_site_selection_oracle() {
    criterion(5, "site-selection oracle equivalence", || {
        let corpus = load("site_oracle.jsonl");
        assert_eq!(corpus.len(), 30);
        let mut nonempty = 0usize;
        for unit in &corpus.units {
            let got: BTreeSet<usize> = inject::select_insertion_sites(unit)
                .iter()
                .map(|s| s.offset)
                .collect();
            let want = oracle_sites(&unit.code);
            assert_eq!(got, want, "unit {}\n{}", unit.id, unit.code);
            if !want.is_empty() {
                nonempty += 1;
            }
        }
        assert!(nonempty >= 20, "oracle set is non-trivial");
    });
}

#[test]
fn criterion_6_effective_rate_property() {
    criterion(6, "effective-rate property", || {
        let clean = load("informational_500.jsonl");
        assert!(clean.len() >= 500);
        let pool = &full_run().pool;
        let config = InjectionConfig {
            rate: 1.0,
            templates_per_unit: 1,
            seed: 3,
            mode: Mode::Funpoison,
        };
        let (_, report) = poison_dataset(&clean, pool, &config, tc()).expect("poisons");
        assert_eq!(report.reverted_units, 0);
        // At full rate, the effective rate is exactly the fraction of
        // units with at least one valid site.
        assert!((report.effective_rate - report.eligible_fraction).abs() < 1e-12);
        // Cross-checked against the independent seam oracle.
        let oracle_eligible = clean
            .units
            .iter()
            .filter(|u| !oracle_sites(&u.code).is_empty())
            .count();
        let oracle_fraction = oracle_eligible as f64 / clean.len() as f64;
        assert!((report.eligible_fraction - oracle_fraction).abs() < 1e-12);
        println!(
            "  informational: {}/{} functions admit a valid site ({:.3})",
            oracle_eligible,
            clean.len(),
            oracle_fraction
        );
    });
}

#[test]
fn criterion_7_determinism() {
    criterion(7, "determinism", || {
        let bin = env!("CARGO_BIN_EXE_funpoison");
        let corpus = data("corpus_200.jsonl");
        // Each pass runs in its own directory with identical relative
        // paths, so every output file must match byte-for-byte.
        let run = |tag: &str| {
            let dir = tempfile::tempdir().expect("tempdir");
            std::fs::copy(&corpus, dir.path().join("corpus.jsonl")).expect("copy");
            let st = std::process::Command::new(bin)
                .current_dir(dir.path())
                .args([
                    "build-pool", "--corpus", "corpus.jsonl", "--out", "pool.jsonl", "--pool-cap",
                    "100", "--seed", "7", "--compiler", "embedded",
                ])
                .status()
                .expect("build-pool runs");
            assert!(st.success(), "pass {tag}");
            let st = std::process::Command::new(bin)
                .current_dir(dir.path())
                .args([
                    "inject", "--corpus", "corpus.jsonl", "--pool", "pool.jsonl", "--out",
                    "out.jsonl", "--report", "report.jsonl", "--rate", "0.25",
                    "--templates-per-unit", "3", "--seed", "7", "--compiler", "embedded",
                ])
                .status()
                .expect("inject runs");
            assert!(st.success(), "pass {tag}");
            (
                std::fs::read(dir.path().join("pool.jsonl")).expect("pool"),
                std::fs::read(dir.path().join("out.jsonl")).expect("corpus"),
                std::fs::read(dir.path().join("report.jsonl")).expect("report"),
            )
        };
        let a = run("a");
        let b = run("b");
        assert_eq!(a.0, b.0, "pool files differ");
        assert_eq!(a.1, b.1, "corpus files differ");
        assert_eq!(a.2, b.2, "report files differ");
    });
}

#[test]
fn criterion_8_host_subsequence() {
    criterion(8, "host-subsequence invariant", || {
        let run = full_run();
        let mut checked = 0usize;
        for (c, p) in run.clean.units.iter().zip(run.poisoned.units.iter()) {
            if c.code == p.code {
                continue;
            }
            checked += 1;
            assert!(
                is_subsequence(&toks(&c.code), &toks(&p.code)),
                "unit {} lost host tokens",
                c.id
            );
        }
        assert_eq!(checked, run.report.injected_units);
    });
}

#[test]
fn criterion_9_dead_branch_pairing() {
    criterion(9, "dead-branch ablation pairing", || {
        let clean = load("corpus_200.jsonl");
        let subset = Corpus {
            units: clean.units.iter().take(40).cloned().collect(),
            origin: clean.origin.clone(),
            skipped_records: 0,
        };
        let pool = &full_run().pool;
        let base = InjectionConfig {
            rate: 1.0,
            templates_per_unit: 2,
            seed: 21,
            mode: Mode::Funpoison,
        };
        let dead = InjectionConfig {
            mode: Mode::DeadBranch,
            ..base.clone()
        };
        let (_, ra) = poison_dataset(&subset, pool, &base, tc()).expect("poisons");
        let (pb, rb) = poison_dataset(&subset, pool, &dead, tc()).expect("poisons");
        assert_eq!(rb.reverted_units, 0, "dead-branch output compiles everywhere");
        // Identical unit and site selection across modes.
        let sel = |r: &InjectionReport| {
            r.per_unit
                .iter()
                .map(|u| {
                    (
                        u.unit_id.clone(),
                        u.insertions.iter().map(|i| i.offset).collect::<Vec<_>>(),
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(sel(&ra), sel(&rb));
        assert!(pb.units.iter().any(|u| u.code.contains("if (fpg")));

        // A sentinel inside the dead branch never executes.
        let runnable = load("runnable");
        let unit = &runnable.units[0];
        let outcome = dead_branch_inject(
            unit,
            &pool.templates[..1],
            &InjectionConfig {
                rate: 1.0,
                templates_per_unit: 1,
                seed: 2,
                mode: Mode::DeadBranch,
            },
            tc(),
        )
        .expect("injects");
        let UnitOutcome::Poisoned { unit: pu, .. } = outcome else {
            panic!("expected poisoned outcome");
        };
        let guard_open = pu.code.find("if (fpg").expect("guard present");
        let brace = guard_open + pu.code[guard_open..].find('{').expect("guard opens");
        let mut with_sentinel = pu.code.clone();
        with_sentinel
            .insert_str(brace + 1, "\nSystem.out.println(\"FP_SENTINEL\");");
        let entry = detect_entry(&unit.code).expect("entry");
        let clean_run = tc().run(&unit.code, &entry).expect("runs");
        let poisoned_run = tc().run(&with_sentinel, &entry).expect("runs");
        let out = String::from_utf8_lossy(&poisoned_run.stdout).to_string();
        assert!(!out.contains("FP_SENTINEL"), "sentinel executed:\n{out}");
        assert_eq!(clean_run.stdout, poisoned_run.stdout);
    });
}

#[test]
fn criterion_10_metric_sanity() {
    criterion(10, "metric sanity", || {
        let text = std::fs::read_to_string(data("bleu_pairs.json")).expect("fixture");
        let pairs: Vec<serde_json::Value> = serde_json::from_str(&text).expect("parses");
        assert_eq!(pairs.len(), 5);
        for p in &pairs {
            let clean = p["clean"].as_str().unwrap();
            let transformed = p["transformed"].as_str().unwrap();
            let expected = p["bleu"].as_f64().unwrap();
            let got = similarity(clean, transformed).bleu;
            assert!(
                (got - expected).abs() < 1e-9,
                "bleu {got} vs reference {expected} for {transformed:?}"
            );
        }

        // Identity laws on 100 units drawn from the informational set.
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let corpus = load("informational_500.jsonl");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let sample: Vec<&SourceUnit> = corpus.units.iter().collect::<Vec<_>>()
            .choose_multiple(&mut rng, 100)
            .copied()
            .collect();
        assert_eq!(sample.len(), 100);
        for u in sample {
            let s = similarity(&u.code, &u.code);
            assert_eq!(s.exact_match, 1, "unit {}", u.id);
            assert_eq!(s.bleu, 1.0, "unit {}", u.id);
            assert_eq!(s.code_similarity, 1.0, "unit {}", u.id);
        }
    });
}

// ---------------------------------------------------------------------------
// Property checks
// ---------------------------------------------------------------------------

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn small_corpus() -> Corpus {
        let units = (0..50)
            .map(|i| SourceUnit {
                id: format!("p{i:02}"),
                code: format!("static int f{i}(int x) {{\n    int a = x + {i};\n    return a;\n}}"),
                kind: UnitKind::FunctionSnippet,
            })
            .collect();
        Corpus {
            units,
            origin: funpoison::corpus::CorpusOrigin::Directory { path: "prop".into() },
            skipped_records: 0,
        }
    }

    proptest! {
        #[test]
        fn subset_sampling_partitions(rate in 0.01f64..=1.0, seed: u64) {
            let corpus = small_corpus();
            let (poisoned, rest) = inject::sample_subset(&corpus, rate, seed);
            let mut all: Vec<usize> = poisoned.iter().chain(rest.iter()).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..50).collect::<Vec<_>>());
            prop_assert!(!poisoned.is_empty());
            prop_assert_eq!(inject::sample_subset(&corpus, rate, seed), (poisoned, rest));
        }

        #[test]
        fn similarity_identity_holds(words in prop::collection::vec("[a-z]{1,6}", 1..40)) {
            let code = format!("int x = {};", words.join(" + "));
            let s = similarity(&code, &code);
            prop_assert_eq!(s.exact_match, 1);
            prop_assert_eq!(s.bleu, 1.0);
            prop_assert_eq!(s.code_similarity, 1.0);
        }
    }
}
