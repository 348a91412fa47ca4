//! Ground-truth harness: probe compilation, behavioral equivalence, and
//! similarity metrics.
//!
//! The probe wrapper is the single arbiter of template well-formedness:
//! a fragment is compilable iff its assembled probe unit compiles. The
//! similarity scores back quality reporting; the code similarity metric
//! deliberately omits a data-flow component and says so in the report.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SourceUnit};
use crate::error::{Error, Result};
use crate::inject::{self, InjectionReport, UnitRecord};
use crate::lex::{self, TokKind};
use crate::toolchain::{CompileResult, Toolchain};

/// Fragment parts assembled into a minimal probe unit.
#[derive(Debug, Clone, Default)]
pub struct ProbeParts {
    pub imports: Vec<String>,
    pub stubs: Vec<String>,
    pub preamble: Vec<String>,
    pub body: String,
}

/// Loop variable name used by the probe wrapper so `break`/`continue`
/// fragments still compile; chosen to be collision-unlikely and checked
/// against the body by the caller when it matters.
const PROBE_LOOP_VAR: &str = "fpProbeOnce";

/// Synthetic class holding the probed fragment.
pub const PROBE_CLASS: &str = "FpProbe";

/// Assemble a minimal compilation unit around a fragment.
///
/// The fragment body runs inside a single-iteration `for` loop of an
/// `Object`-returning static method, so control-transfer statements
/// (`return expr;`, `break;`, `continue;`, `throw ...;`) compile and are
/// left for the safety filter to reject on semantic grounds.
pub fn assemble_probe(parts: &ProbeParts) -> String {
    let mut out = String::new();
    for imp in &parts.imports {
        out.push_str("import ");
        out.push_str(imp);
        out.push_str(";\n");
    }
    if !parts.imports.is_empty() {
        out.push('\n');
    }
    for stub in &parts.stubs {
        out.push_str(stub);
        out.push('\n');
    }
    if !parts.stubs.is_empty() {
        out.push('\n');
    }
    out.push_str(&format!("class {PROBE_CLASS} {{\n"));
    out.push_str("    static Object fpProbe() {\n");
    out.push_str(&format!(
        "        for (int {PROBE_LOOP_VAR} = 0; {PROBE_LOOP_VAR} < 1; {PROBE_LOOP_VAR}++) {{\n"
    ));
    for line in &parts.preamble {
        out.push_str("            ");
        out.push_str(line);
        out.push('\n');
    }
    for line in parts.body.lines() {
        out.push_str("            ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("        }\n");
    out.push_str("        return null;\n");
    out.push_str("    }\n");
    out.push_str("}\n");
    out
}

/// Compile a fragment inside the probe wrapper.
pub fn compile_probe(parts: &ProbeParts, toolchain: &dyn Toolchain) -> Result<CompileResult> {
    toolchain.compile(&assemble_probe(parts))
}

/// Locate the entry-point class of a self-contained program: the
/// top-level class whose body contains `public static void main`.
pub fn detect_entry(code: &str) -> Option<String> {
    let toks = lex::code_tokens(code);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(code)).collect();
    let mut depth = 0i32;
    let mut current: Option<String> = None;
    let mut i = 0;
    while i < texts.len() {
        match texts[i] {
            "{" => depth += 1,
            "}" => depth -= 1,
            "class" if depth == 0 => {
                if let Some(name) = texts.get(i + 1) {
                    if toks[i + 1].kind == TokKind::Ident {
                        current = Some((*name).to_string());
                    }
                }
            }
            "main"
                if texts.get(i.wrapping_sub(1)) == Some(&"void")
                    && texts.get(i + 1) == Some(&"(") =>
            {
                let window = &texts[i.saturating_sub(3)..i];
                if window.contains(&"static") && current.is_some() {
                    return current;
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}

/// Outcome of comparing two program executions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Equivalence {
    Equal,
    Different { report: String },
    Inconclusive { reason: String },
}

/// Run two self-contained units and compare stdout, stderr, and exit
/// status byte-for-byte. A timeout on either side is inconclusive.
pub fn run_equivalence(
    clean: &SourceUnit,
    poisoned: &SourceUnit,
    toolchain: &dyn Toolchain,
) -> Result<Equivalence> {
    let entry = match detect_entry(&clean.code) {
        Some(e) => e,
        None => {
            return Ok(Equivalence::Inconclusive {
                reason: format!("unit {} has no entry point", clean.id),
            })
        }
    };
    let a = toolchain.run(&clean.code, &entry)?;
    let b = toolchain.run(&poisoned.code, &entry)?;
    if a.timed_out || b.timed_out {
        return Ok(Equivalence::Inconclusive {
            reason: format!("timeout running unit {}", clean.id),
        });
    }
    if a.stdout == b.stdout && a.stderr == b.stderr && a.exit == b.exit {
        Ok(Equivalence::Equal)
    } else {
        let mut report = format!("unit {} diverges:", clean.id);
        if a.stdout != b.stdout {
            report.push_str(&format!(
                " stdout {:?} vs {:?};",
                String::from_utf8_lossy(&a.stdout),
                String::from_utf8_lossy(&b.stdout)
            ));
        }
        if a.stderr != b.stderr {
            report.push_str(&format!(
                " stderr {:?} vs {:?};",
                String::from_utf8_lossy(&a.stderr),
                String::from_utf8_lossy(&b.stderr)
            ));
        }
        if a.exit != b.exit {
            report.push_str(&format!(" exit {} vs {};", a.exit, b.exit));
        }
        Ok(Equivalence::Different { report })
    }
}

// ---------------------------------------------------------------------------
// Similarity metrics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScores {
    /// 1 when the whitespace-normalized token sequences are identical.
    pub exact_match: u8,
    /// 4-gram BLEU with brevity penalty over code tokens, no smoothing.
    pub bleu: f64,
    /// Mean of token BLEU and a keyword/operator-weighted BLEU. The
    /// data-flow component of the full metric is intentionally omitted.
    pub code_similarity: f64,
    pub diagnostics: Vec<String>,
}

/// Note printed wherever code_similarity is reported.
pub const CODE_SIMILARITY_NOTE: &str =
    "code_similarity omits the data-flow component (token + weighted n-gram only)";

fn token_weight(kind: TokKind, text: &str) -> f64 {
    match kind {
        TokKind::Keyword => 2.0,
        TokKind::Punct if !matches!(text, "(" | ")" | "{" | "}" | "[" | "]" | ";" | ",") => 2.0,
        _ => 1.0,
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Modified n-gram precision with optional per-gram weights.
fn precision(candidate: &[String], reference: &[String], n: usize, weights: Option<&[f64]>) -> (f64, f64) {
    let ref_counts = ngram_counts(reference, n);
    let mut used: HashMap<&[String], usize> = HashMap::new();
    let mut matched = 0.0;
    let mut total = 0.0;
    if candidate.len() < n {
        return (0.0, 0.0);
    }
    for (i, w) in candidate.windows(n).enumerate() {
        let weight = match weights {
            Some(ws) => ws[i..i + n].iter().sum::<f64>() / n as f64,
            None => 1.0,
        };
        total += weight;
        let avail = ref_counts.get(w).copied().unwrap_or(0);
        let seen = used.entry(w).or_insert(0);
        if *seen < avail {
            *seen += 1;
            matched += weight;
        }
    }
    (matched, total)
}

fn bleu_core(candidate: &[String], reference: &[String], weights: Option<&[f64]>) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let (matched, total) = precision(candidate, reference, n, weights);
        if matched == 0.0 || total == 0.0 {
            return 0.0;
        }
        log_sum += (matched / total).ln();
    }
    let bp = if candidate.len() >= reference.len() {
        1.0
    } else {
        (1.0 - reference.len() as f64 / candidate.len() as f64).exp()
    };
    bp * (log_sum / 4.0).exp()
}

/// Score a transformed text against its clean original.
pub fn similarity(clean: &str, transformed: &str) -> SimilarityScores {
    let mut diagnostics = vec![CODE_SIMILARITY_NOTE.to_string()];
    let ref_toks = lex::code_tokens(clean);
    let cand_toks = lex::code_tokens(transformed);
    let reference: Vec<String> = ref_toks.iter().map(|t| t.text(clean).to_string()).collect();
    let candidate: Vec<String> = cand_toks
        .iter()
        .map(|t| t.text(transformed).to_string())
        .collect();
    if candidate.is_empty() {
        diagnostics.push("transformed text has no code tokens".to_string());
        return SimilarityScores {
            exact_match: 0,
            bleu: 0.0,
            code_similarity: 0.0,
            diagnostics,
        };
    }
    let exact = u8::from(reference == candidate);
    let bleu = if exact == 1 {
        1.0
    } else {
        bleu_core(&candidate, &reference, None)
    };
    let code_similarity = if exact == 1 {
        1.0
    } else {
        let weights: Vec<f64> = cand_toks
            .iter()
            .map(|t| token_weight(t.kind, t.text(transformed)))
            .collect();
        let weighted = bleu_core(&candidate, &reference, Some(&weights));
        (bleu + weighted) / 2.0
    };
    SimilarityScores {
        exact_match: exact,
        bleu,
        code_similarity,
        diagnostics,
    }
}

// ---------------------------------------------------------------------------
// Corpus-level verification
// ---------------------------------------------------------------------------

/// Aggregate verdict over a clean/poisoned corpus pair. Every field is
/// deterministic for fixed inputs; no timing data is recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub toolchain_id: String,
    pub units: usize,
    /// Injected units whose clean form compiles standalone.
    pub compile_checked: usize,
    pub compile_success: usize,
    /// 1.0 when every checked unit still compiles; 1.0 vacuously when
    /// nothing was checkable.
    pub compile_success_fraction: f64,
    pub runnable: usize,
    pub equivalent: usize,
    pub divergent: usize,
    pub inconclusive: usize,
    pub exact_match_mean: f64,
    /// Fraction of units whose token sequence changed (exact_match = 0).
    pub changed_fraction: f64,
    pub bleu_mean: f64,
    pub bleu_median: f64,
    pub code_similarity_mean: f64,
    pub code_similarity_median: f64,
    /// Injected units whose clean token sequence is not a subsequence of
    /// the poisoned one.
    pub subsequence_failures: Vec<String>,
    /// Injected units with a recorded offset that is not a valid
    /// insertion site of the clean unit.
    pub site_failures: Vec<String>,
    pub compile_failures: Vec<String>,
    pub divergent_units: Vec<String>,
    pub notes: Vec<String>,
}

impl VerificationSummary {
    /// Hard invariants: full compile success, no behavioral divergence,
    /// and both structural audits clean.
    pub fn healthy(&self) -> bool {
        self.compile_failures.is_empty()
            && self.divergent == 0
            && self.subsequence_failures.is_empty()
            && self.site_failures.is_empty()
    }
}

fn is_token_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Verify a poisoned corpus against its clean original and the injection
/// report: compile regression on injected units, behavioral equivalence
/// on the runnable subset, similarity scores over all units, and the two
/// structural audits (host token subsequence, recorded sites valid on
/// the clean unit).
pub fn verify_corpus(
    clean: &Corpus,
    poisoned: &Corpus,
    report: &InjectionReport,
    toolchain: &dyn Toolchain,
) -> Result<VerificationSummary> {
    if clean.units.len() != poisoned.units.len() {
        return Err(Error::IdMismatch(format!(
            "corpus sizes differ: {} clean vs {} poisoned",
            clean.units.len(),
            poisoned.units.len()
        )));
    }
    for (c, p) in clean.units.iter().zip(poisoned.units.iter()) {
        if c.id != p.id {
            return Err(Error::IdMismatch(format!(
                "first mismatched id: {} (clean) vs {} (poisoned)",
                c.id, p.id
            )));
        }
    }
    let records: BTreeMap<&str, &UnitRecord> = report
        .per_unit
        .iter()
        .map(|r| (r.unit_id.as_str(), r))
        .collect();

    let mut compile_checked = 0usize;
    let mut compile_success = 0usize;
    let mut compile_failures = Vec::new();
    let mut runnable = 0usize;
    let mut equivalent = 0usize;
    let mut divergent = 0usize;
    let mut inconclusive = 0usize;
    let mut divergent_units = Vec::new();
    let mut subsequence_failures = Vec::new();
    let mut site_failures = Vec::new();
    let mut exact = Vec::new();
    let mut bleu = Vec::new();
    let mut code_sim = Vec::new();

    for (c, p) in clean.units.iter().zip(poisoned.units.iter()) {
        let scores = similarity(&c.code, &p.code);
        exact.push(scores.exact_match as f64);
        bleu.push(scores.bleu);
        code_sim.push(scores.code_similarity);

        let injected = records
            .get(c.id.as_str())
            .filter(|r| !r.skipped && !r.reverted)
            .copied();
        if let Some(rec) = injected {
            let clean_toks = lex::code_token_texts(&c.code);
            let poisoned_toks = lex::code_token_texts(&p.code);
            if !is_token_subsequence(&clean_toks, &poisoned_toks) {
                subsequence_failures.push(c.id.clone());
            }
            let offsets: BTreeSet<usize> = inject::select_insertion_sites(c)
                .iter()
                .map(|s| s.offset)
                .collect();
            if rec.insertions.iter().any(|i| !offsets.contains(&i.offset)) {
                site_failures.push(c.id.clone());
            }
            let clean_probe = inject::probe_source(c.kind, &c.code, &[], &[]);
            if toolchain.compile(&clean_probe)?.ok {
                compile_checked += 1;
                let poisoned_probe = inject::probe_source(
                    p.kind,
                    &p.code,
                    &rec.imports_added,
                    &rec.stubs_added,
                );
                if toolchain.compile(&poisoned_probe)?.ok {
                    compile_success += 1;
                } else {
                    compile_failures.push(c.id.clone());
                }
            }
        }

        if detect_entry(&c.code).is_some() {
            runnable += 1;
            match run_equivalence(c, p, toolchain)? {
                Equivalence::Equal => equivalent += 1,
                Equivalence::Different { .. } => {
                    divergent += 1;
                    divergent_units.push(c.id.clone());
                }
                Equivalence::Inconclusive { .. } => inconclusive += 1,
            }
        }
    }

    let units = clean.units.len();
    let changed = exact.iter().filter(|&&e| e == 0.0).count();
    Ok(VerificationSummary {
        toolchain_id: toolchain.id(),
        units,
        compile_checked,
        compile_success,
        compile_success_fraction: if compile_checked == 0 {
            1.0
        } else {
            compile_success as f64 / compile_checked as f64
        },
        runnable,
        equivalent,
        divergent,
        inconclusive,
        exact_match_mean: mean(&exact),
        changed_fraction: changed as f64 / units as f64,
        bleu_mean: mean(&bleu),
        bleu_median: median(&bleu),
        code_similarity_mean: mean(&code_sim),
        code_similarity_median: median(&code_sim),
        subsequence_failures,
        site_failures,
        compile_failures,
        divergent_units,
        notes: vec![CODE_SIMILARITY_NOTE.to_string()],
    })
}

/// Structured record followed by a human-readable table.
pub fn render_verification(summary: &VerificationSummary) -> Result<String> {
    let mut v = serde_json::to_value(summary).map_err(|e| Error::Other(e.to_string()))?;
    v.as_object_mut()
        .expect("summary object")
        .insert("record".into(), "verification".into());
    let mut out = v.to_string();
    out.push('\n');
    let rows: Vec<(&str, String)> = vec![
        ("toolchain", summary.toolchain_id.clone()),
        ("units", summary.units.to_string()),
        (
            "compile success",
            format!(
                "{}/{} ({:.3})",
                summary.compile_success, summary.compile_checked, summary.compile_success_fraction
            ),
        ),
        (
            "equivalence",
            format!(
                "{} equal, {} different, {} inconclusive of {} runnable",
                summary.equivalent, summary.divergent, summary.inconclusive, summary.runnable
            ),
        ),
        ("exact match mean", format!("{:.3}", summary.exact_match_mean)),
        ("changed fraction", format!("{:.3}", summary.changed_fraction)),
        (
            "bleu mean/median",
            format!("{:.3} / {:.3}", summary.bleu_mean, summary.bleu_median),
        ),
        (
            "code similarity mean/median",
            format!(
                "{:.3} / {:.3}",
                summary.code_similarity_mean, summary.code_similarity_median
            ),
        ),
        (
            "subsequence audit",
            if summary.subsequence_failures.is_empty() {
                "ok".to_string()
            } else {
                format!("FAIL: {}", summary.subsequence_failures.join(", "))
            },
        ),
        (
            "site audit",
            if summary.site_failures.is_empty() {
                "ok".to_string()
            } else {
                format!("FAIL: {}", summary.site_failures.join(", "))
            },
        ),
        (
            "verdict",
            if summary.healthy() { "healthy".into() } else { "FAILED".into() },
        ),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, val) in rows {
        out.push_str(&format!("{k:width$}  {val}\n"));
    }
    for note in &summary.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    Ok(out)
}
