//! Controlled injection: subset sampling, execution-safe site selection,
//! conflict-aware assembly of poisoned units, and the dead-branch
//! ablation mode.
//!
//! Determinism contract: every random choice derives from the global
//! seed plus a stable hash of the unit id, so corpus order, worker
//! count, and mode never change outputs. The two modes consume their
//! random streams identically — a dead-branch corpus built with the same
//! configuration pairs site-for-site with the standard one.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SourceUnit, UnitKind};
use crate::error::{Error, Result};
use crate::lex::{self, TokKind};
use crate::segment::{self, StatementKind, StatementSpan};
use crate::template::{self, Provenance, Template, TemplatePool};
use crate::toolchain::{Diagnostic, Toolchain};
use crate::weakuse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Funpoison,
    DeadBranch,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Funpoison => "funpoison",
            Mode::DeadBranch => "dead-branch",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "funpoison" => Some(Mode::Funpoison),
            "dead-branch" => Some(Mode::DeadBranch),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionConfig {
    /// Poisoning rate ρ ∈ (0, 1].
    pub rate: f64,
    /// Templates per poisoned unit (m).
    pub templates_per_unit: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl InjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::Config(format!(
                "poisoning rate must be in (0, 1], got {}",
                self.rate
            )));
        }
        if self.templates_per_unit < 1 {
            return Err(Error::Config(
                "templates-per-unit must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Additional seams excluded at each end of a method body beyond the
/// body boundaries themselves. Zero keeps every inter-statement seam.
pub const BOUNDARY_SEAM_MARGIN: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertionSite {
    /// Byte offset where the block is spliced in (end of the preceding
    /// statement).
    pub offset: usize,
    pub depth: u32,
    pub preceding: StatementSpan,
}

/// Enumerate execution-safe seams: positions between two consecutive
/// statements of the same block whose preceding statement is a
/// declaration or a pure expression. Method-boundary seams do not exist
/// by construction (only inter-statement seams are candidates), and a
/// control-transfer or side-effectful predecessor disqualifies a seam.
pub fn select_insertion_sites(unit: &SourceUnit) -> Vec<InsertionSite> {
    let seg = segment::segment_statements(unit);
    let spans = &seg.spans;
    let mut per_block: BTreeMap<usize, Vec<InsertionSite>> = BTreeMap::new();
    for w in spans.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.block_id != b.block_id || a.is_header {
            continue;
        }
        if !matches!(
            a.kind,
            StatementKind::Declaration | StatementKind::PureExpression
        ) {
            continue;
        }
        per_block.entry(a.block_id).or_default().push(InsertionSite {
            offset: a.end,
            depth: a.brace_depth,
            preceding: a,
        });
    }
    let mut out = Vec::new();
    for (_, sites) in per_block {
        let n = sites.len();
        let Some(keep) = n.checked_sub(2 * BOUNDARY_SEAM_MARGIN).filter(|k| *k > 0) else {
            continue;
        };
        out.extend(sites.into_iter().skip(BOUNDARY_SEAM_MARGIN).take(keep));
    }
    out.sort_by_key(|s| s.offset);
    out
}

/// Uniform subset of unit indices at the given rate: (poisoned, rest),
/// both sorted. At least one unit is always selected.
pub fn sample_subset(corpus: &Corpus, rate: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let n = corpus.units.len();
    let count = ((rate * n as f64).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = rand::seq::index::sample(&mut rng, n, count).into_vec();
    chosen.sort_unstable();
    let set: BTreeSet<usize> = chosen.iter().copied().collect();
    let rest: Vec<usize> = (0..n).filter(|i| !set.contains(i)).collect();
    (chosen, rest)
}

fn stable_hash(s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

const SALT_TEMPLATES: u64 = 0x7465_6d70_6c74;
const SALT_SITES: u64 = 0x0073_6974_6573;

fn unit_seed(seed: u64, unit_id: &str, salt: u64) -> u64 {
    stable_hash(unit_id) ^ seed.rotate_left(17) ^ salt
}

// ---------------------------------------------------------------------------
// Renaming
// ---------------------------------------------------------------------------

fn fresh_name(base: &str, used: &HashSet<String>) -> String {
    let mut n = 1usize;
    loop {
        let cand = format!("{base}_fp{n}");
        if !used.contains(&cand) {
            return cand;
        }
        n += 1;
    }
}

/// Token-level identifier substitution.
fn rename_tokens(text: &str, renames: &BTreeMap<String, String>) -> String {
    if renames.is_empty() {
        return text.to_string();
    }
    let toks = lex::scan(text);
    let mut out = String::with_capacity(text.len());
    for t in &toks {
        let piece = t.text(text);
        if t.kind == TokKind::Ident {
            if let Some(r) = renames.get(piece) {
                out.push_str(r);
                continue;
            }
        }
        out.push_str(piece);
    }
    out
}

fn declared_in_lines(lines: &[String]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for line in lines {
        for stmt in template::split_statements(line) {
            out.extend(segment::scan_identifiers(stmt).declared);
        }
    }
    out
}

/// Rename template-declared identifiers that collide with host-scope
/// names. Renames apply consistently to snippet, preamble, and stubs;
/// non-colliding names are preserved. Stubs shadowing host-visible type
/// names are dropped rather than renamed.
pub fn resolve_conflicts(
    template: &Template,
    host: &HashSet<String>,
) -> (Template, Vec<(String, String)>) {
    let mut t = template.clone();
    t.stubs.retain(|s| {
        template::stub_name(s).map(|n| !host.contains(n)).unwrap_or(true)
    });

    let mut block: Vec<String> = t.preamble.clone();
    block.push(t.snippet.clone());
    let declared = declared_in_lines(&block);
    let mut used: HashSet<String> = host.clone();
    used.extend(declared.iter().cloned());
    let mut renames = BTreeMap::new();
    for name in &declared {
        if host.contains(name) {
            let fresh = fresh_name(name, &used);
            used.insert(fresh.clone());
            renames.insert(name.clone(), fresh);
        }
    }
    t.preamble = t.preamble.iter().map(|l| rename_tokens(l, &renames)).collect();
    t.snippet = rename_tokens(&t.snippet, &renames);
    if let Some(vars) = t.names.originals.get_mut("variable") {
        for v in vars.iter_mut() {
            if let Some(r) = renames.get(v) {
                *v = r.clone();
            }
        }
    }
    (t, renames.into_iter().collect())
}

// ---------------------------------------------------------------------------
// Unit injection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsertionRecord {
    pub offset: usize,
    pub template: Provenance,
    pub weak_use_patterns: Vec<String>,
    pub renames: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoisonedUnit {
    pub id: String,
    pub code: String,
    pub mode: Mode,
    pub insertions: Vec<InsertionRecord>,
    /// Imports merged into the unit (inline for full files, metadata for
    /// bare function snippets).
    pub imports_added: Vec<String>,
    /// Stub types appended as siblings (full files) or carried as
    /// metadata (snippets).
    pub stubs_added: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum UnitOutcome {
    Poisoned { unit: PoisonedUnit, drops: usize },
    /// No valid insertion site.
    Skipped,
    /// Post-injection probe failed; unit kept clean.
    Reverted { diagnostics: Vec<Diagnostic> },
}

fn indent_at(code: &str, stmt_start: usize) -> String {
    let line_start = code[..stmt_start].rfind('\n').map(|i| i + 1).unwrap_or(0);
    code[line_start..]
        .chars()
        .take_while(|c| *c == ' ' || *c == '\t')
        .collect()
}

/// Wrap a unit for probe compilation: full files compile as-is (plus
/// appended material already inline); bare snippets get a host class.
pub fn probe_source(
    kind: UnitKind,
    code: &str,
    imports: &[String],
    stubs: &[String],
) -> String {
    match kind {
        UnitKind::FullFile => code.to_string(),
        UnitKind::FunctionSnippet => {
            let mut s = String::new();
            for i in imports {
                s.push_str(&format!("import {i};\n"));
            }
            if !imports.is_empty() {
                s.push('\n');
            }
            s.push_str("class FpHost {\n");
            s.push_str(code);
            s.push_str("\n}\n");
            for stub in stubs {
                s.push('\n');
                s.push_str(stub);
                s.push('\n');
            }
            s
        }
    }
}

/// Host type names declared at any nesting level of the unit.
fn host_type_names(code: &str) -> BTreeSet<String> {
    let toks = lex::code_tokens(code);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(code)).collect();
    let mut out = BTreeSet::new();
    for i in 0..texts.len() {
        if matches!(texts[i], "class" | "interface" | "enum")
            && toks.get(i + 1).map(|t| t.kind) == Some(TokKind::Ident)
        {
            out.insert(texts[i + 1].to_string());
        }
    }
    out
}

/// Splice imports into a full file after the package/import section.
fn hoist_imports(code: &str, new_imports: &[String]) -> String {
    if new_imports.is_empty() {
        return code.to_string();
    }
    let toks = lex::scan(code);
    let mut insert_at = 0usize;
    for (i, t) in toks.iter().enumerate() {
        if t.kind.is_trivia() {
            continue;
        }
        match t.text(code) {
            "package" | "import" => {
                // Advance to the terminating semicolon.
                for u in &toks[i..] {
                    if u.text(code) == ";" {
                        insert_at = u.end;
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let block: String = new_imports
        .iter()
        .map(|i| format!("import {i};\n"))
        .collect();
    if insert_at == 0 {
        format!("{block}{code}")
    } else {
        format!("{}\n{block}{}", &code[..insert_at], &code[insert_at..])
    }
}

struct PlannedInsertion {
    site: InsertionSite,
    lines: Vec<String>,
    record: InsertionRecord,
}

/// Inject `templates` (≤ m, pre-sampled from the filtered pool) into one
/// unit. Surplus templates beyond the available sites are dropped and
/// counted. Any compile regression reverts the unit.
pub fn inject_unit(
    unit: &SourceUnit,
    templates: &[Template],
    config: &InjectionConfig,
    toolchain: &dyn Toolchain,
) -> Result<UnitOutcome> {
    config.validate()?;
    let sites = select_insertion_sites(unit);
    if sites.is_empty() {
        return Ok(UnitOutcome::Skipped);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(unit_seed(config.seed, &unit.id, SALT_SITES));
    let k = templates.len().min(sites.len());
    let mut chosen = rand::seq::index::sample(&mut rng, sites.len(), k).into_vec();
    chosen.sort_unstable();
    let drops = templates.len() - k;
    // One weak-use seed per offered template, drawn unconditionally so
    // the stream does not depend on how many fit.
    let weak_seeds: Vec<u64> = (0..templates.len()).map(|_| rng.gen()).collect();

    let host_types = host_type_names(&unit.code);
    let mut used: HashSet<String> = segment::host_identifier_set(&unit.code);
    let mut imports: BTreeSet<String> = BTreeSet::new();
    let mut stubs: BTreeMap<String, String> = BTreeMap::new();
    let host_imports = segment::unit_imports(&unit.code);

    let mut planned: Vec<PlannedInsertion> = Vec::new();
    for (slot, (site_idx, template)) in chosen.iter().zip(templates.iter()).enumerate() {
        let site = sites[*site_idx];
        let weak = weakuse::synthesize_weak_use_gated(template, weak_seeds[slot], |r| {
            toolchain.supports_release(r)
        });

        let mut lines: Vec<String> = template.preamble.clone();
        lines.push(template.snippet.clone());
        let mut weak_imports: BTreeSet<String> = BTreeSet::new();
        let mut weak_ids = Vec::new();
        for w in &weak {
            lines.push(w.text.clone());
            weak_ids.push(w.pattern_id.clone());
            weak_imports.extend(w.imports.iter().cloned());
        }

        // Rename anything the block declares that the host (or an
        // earlier block) already uses.
        let declared = declared_in_lines(&lines);
        let mut renames: BTreeMap<String, String> = BTreeMap::new();
        for name in &declared {
            if used.contains(name) {
                let fresh = fresh_name(name, &used);
                used.insert(fresh.clone());
                renames.insert(name.clone(), fresh);
            }
        }
        for name in &declared {
            if !renames.contains_key(name) {
                used.insert(name.clone());
            }
        }
        let mut lines: Vec<String> = lines
            .iter()
            .map(|l| rename_tokens(l, &renames))
            .collect();

        if config.mode == Mode::DeadBranch {
            // Opaque-false guard: `g > g` defeats constant folding and
            // never executes, and the compiler does not flag it as
            // unreachable.
            let guard = fresh_name("fpg", &used);
            used.insert(guard.clone());
            let mut wrapped = vec![
                format!("int {guard} = 0;"),
                format!("if ({guard} > {guard}) {{"),
            ];
            for l in &lines {
                wrapped.push(format!("    {l}"));
            }
            wrapped.push("}".to_string());
            lines = wrapped;
        }

        for i in template.imports.iter().chain(weak_imports.iter()) {
            if !host_imports.contains(i) {
                imports.insert(i.clone());
            }
        }
        for stub in &template.stubs {
            if let Some(name) = template::stub_name(stub) {
                if !host_types.contains(name) {
                    stubs.entry(name.to_string()).or_insert_with(|| stub.clone());
                }
            }
        }

        planned.push(PlannedInsertion {
            site,
            lines,
            record: InsertionRecord {
                offset: site.offset,
                template: template.provenance.clone(),
                weak_use_patterns: weak_ids,
                renames: renames.into_iter().collect(),
            },
        });
    }

    // Splice bottom-up so earlier offsets stay valid.
    let mut code = unit.code.clone();
    for p in planned.iter().rev() {
        let indent = indent_at(&code, p.site.preceding.start);
        let mut text = String::new();
        for line in &p.lines {
            text.push('\n');
            text.push_str(&indent);
            text.push_str(line);
        }
        code.insert_str(p.site.offset, &text);
    }

    let imports_added: Vec<String> = imports.into_iter().collect();
    let stubs_added: Vec<String> = stubs.into_values().collect();
    if unit.kind == UnitKind::FullFile {
        code = hoist_imports(&code, &imports_added);
        for stub in &stubs_added {
            code.push('\n');
            code.push_str(stub);
            code.push('\n');
        }
    }

    // Compile regression gate: a unit that compiled clean must still
    // compile poisoned. Units that never compiled standalone are passed
    // through unprobed.
    let clean = toolchain.compile(&probe_source(unit.kind, &unit.code, &[], &[]))?;
    if clean.ok {
        let poisoned =
            toolchain.compile(&probe_source(unit.kind, &code, &imports_added, &stubs_added))?;
        if !poisoned.ok {
            return Ok(UnitOutcome::Reverted {
                diagnostics: poisoned.diagnostics,
            });
        }
    }

    Ok(UnitOutcome::Poisoned {
        unit: PoisonedUnit {
            id: unit.id.clone(),
            code,
            mode: config.mode,
            insertions: planned.into_iter().map(|p| p.record).collect(),
            imports_added,
            stubs_added,
        },
        drops,
    })
}

/// [`inject_unit`] with the always-false branch wrapper. Sites and
/// template pairing are identical to the standard mode for the same
/// configuration.
pub fn dead_branch_inject(
    unit: &SourceUnit,
    templates: &[Template],
    config: &InjectionConfig,
    toolchain: &dyn Toolchain,
) -> Result<UnitOutcome> {
    let cfg = InjectionConfig {
        mode: Mode::DeadBranch,
        ..config.clone()
    };
    inject_unit(unit, templates, &cfg, toolchain)
}

// ---------------------------------------------------------------------------
// Corpus-level driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub unit_id: String,
    pub mode: Option<Mode>,
    pub insertions: Vec<InsertionRecord>,
    pub drops: usize,
    pub skipped: bool,
    pub reverted: bool,
    /// Import/stub material needed to recompile a poisoned snippet; full
    /// files carry it inline, snippets only here.
    #[serde(default)]
    pub imports_added: Vec<String>,
    #[serde(default)]
    pub stubs_added: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionReport {
    pub requested_rate: f64,
    pub effective_rate: f64,
    pub seed: u64,
    pub mode: Mode,
    pub pool_size: usize,
    /// Fraction of corpus units with at least one valid site.
    pub eligible_fraction: f64,
    pub selected_units: usize,
    pub injected_units: usize,
    pub skipped_units: usize,
    pub reverted_units: usize,
    pub dropped_templates: usize,
    pub warnings: Vec<String>,
    pub per_unit: Vec<UnitRecord>,
}

/// Poison a corpus: sample the subset, inject each selected unit, and
/// keep everything else byte-identical. Per-unit failures never abort
/// the run.
pub fn poison_dataset(
    corpus: &Corpus,
    pool: &TemplatePool,
    config: &InjectionConfig,
    toolchain: &dyn Toolchain,
) -> Result<(Corpus, InjectionReport)> {
    config.validate()?;
    if corpus.units.is_empty() {
        return Err(Error::Config("corpus is empty".to_string()));
    }
    if pool.templates.is_empty() {
        return Err(Error::Config("template pool is empty".to_string()));
    }
    let m = config.templates_per_unit;
    let (chosen, _rest) = sample_subset(corpus, config.rate, config.seed);
    let chosen_set: BTreeSet<usize> = chosen.iter().copied().collect();
    let mut warnings = Vec::new();
    if (config.rate * corpus.units.len() as f64).round() < 1.0 {
        warnings.push(format!(
            "rate {} selects less than one unit of {}; poisoning exactly one",
            config.rate,
            corpus.units.len()
        ));
    }

    let outcomes: Vec<(bool, Option<UnitOutcome>)> = corpus
        .units
        .par_iter()
        .enumerate()
        .map(|(i, unit)| {
            let eligible = !select_insertion_sites(unit).is_empty();
            if !chosen_set.contains(&i) {
                return Ok((eligible, None));
            }
            // Uniform with replacement across units, without within.
            let mut trng =
                ChaCha8Rng::seed_from_u64(unit_seed(config.seed, &unit.id, SALT_TEMPLATES));
            let take = m.min(pool.templates.len());
            let idxs = rand::seq::index::sample(&mut trng, pool.templates.len(), take);
            let templates: Vec<Template> =
                idxs.iter().map(|j| pool.templates[j].clone()).collect();
            let outcome = inject_unit(unit, &templates, config, toolchain)?;
            Ok((eligible, Some(outcome)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut units = Vec::with_capacity(corpus.units.len());
    let mut per_unit = Vec::new();
    let mut injected_units = 0usize;
    let mut skipped_units = 0usize;
    let mut reverted_units = 0usize;
    let mut dropped_templates = 0usize;
    let eligible = outcomes.iter().filter(|(e, _)| *e).count();

    for (unit, (_, outcome)) in corpus.units.iter().zip(outcomes) {
        match outcome {
            None => units.push(unit.clone()),
            Some(UnitOutcome::Poisoned { unit: pu, drops }) => {
                injected_units += 1;
                dropped_templates += drops;
                units.push(SourceUnit {
                    id: unit.id.clone(),
                    code: pu.code.clone(),
                    kind: unit.kind,
                });
                per_unit.push(UnitRecord {
                    unit_id: unit.id.clone(),
                    mode: Some(pu.mode),
                    insertions: pu.insertions,
                    drops,
                    skipped: false,
                    reverted: false,
                    imports_added: pu.imports_added,
                    stubs_added: pu.stubs_added,
                });
            }
            Some(UnitOutcome::Skipped) => {
                skipped_units += 1;
                units.push(unit.clone());
                per_unit.push(UnitRecord {
                    unit_id: unit.id.clone(),
                    skipped: true,
                    ..UnitRecord::default()
                });
            }
            Some(UnitOutcome::Reverted { diagnostics }) => {
                reverted_units += 1;
                units.push(unit.clone());
                warnings.push(format!(
                    "unit {} reverted after probe failure: {}",
                    unit.id,
                    diagnostics
                        .first()
                        .map(|d| d.message.clone())
                        .unwrap_or_default()
                ));
                per_unit.push(UnitRecord {
                    unit_id: unit.id.clone(),
                    reverted: true,
                    ..UnitRecord::default()
                });
            }
        }
    }

    let report = InjectionReport {
        requested_rate: config.rate,
        effective_rate: injected_units as f64 / corpus.units.len() as f64,
        seed: config.seed,
        mode: config.mode,
        pool_size: pool.templates.len(),
        eligible_fraction: eligible as f64 / corpus.units.len() as f64,
        selected_units: chosen.len(),
        injected_units,
        skipped_units,
        reverted_units,
        dropped_templates,
        warnings,
        per_unit,
    };
    Ok((
        Corpus {
            units,
            origin: corpus.origin.clone(),
            skipped_records: corpus.skipped_records,
        },
        report,
    ))
}

/// Sidecar report: one line-delimited record per touched unit plus a
/// trailing summary record.
pub fn render_report(report: &InjectionReport) -> Result<String> {
    let mut out = String::new();
    for u in &report.per_unit {
        let mut v = serde_json::to_value(u).map_err(|e| Error::Other(e.to_string()))?;
        v.as_object_mut()
            .expect("record object")
            .insert("record".into(), "unit".into());
        out.push_str(&v.to_string());
        out.push('\n');
    }
    let mut summary = serde_json::to_value(report).map_err(|e| Error::Other(e.to_string()))?;
    let obj = summary.as_object_mut().expect("summary object");
    obj.remove("per_unit");
    obj.insert("record".into(), "summary".into());
    out.push_str(&summary.to_string());
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusOrigin;
    use crate::safety::{self, Ruleset};
    use crate::toolchain::embedded::EmbeddedToolchain;

    fn snippet_unit(id: &str, body: &str) -> SourceUnit {
        SourceUnit {
            id: id.to_string(),
            code: format!("static int compute(int seedArg) {{\n    {body}\n}}"),
            kind: UnitKind::FunctionSnippet,
        }
    }

    fn corpus_of(units: Vec<SourceUnit>) -> Corpus {
        Corpus {
            units,
            origin: CorpusOrigin::Directory { path: "test".into() },
            skipped_records: 0,
        }
    }

    fn small_pool(tc: &EmbeddedToolchain) -> TemplatePool {
        let code = "void seedFn() { int acc = 1; int bcc = acc + 2; long ccc = 3L; \
                    String dcc = String.valueOf(bcc); double ecc = 1.5; boolean fcc = true; }";
        let corpus = corpus_of(vec![SourceUnit {
            id: "pool-src".into(),
            code: code.into(),
            kind: UnitKind::FunctionSnippet,
        }]);
        let (pool, _) = template::build_pool(&corpus, None, 1, tc).expect("pool builds");
        let (filtered, _) = safety::filter_pool(&pool, &Ruleset::default());
        assert!(filtered.templates.len() >= 4);
        filtered
    }

    #[test]
    fn site_selection_examples() {
        let u = snippet_unit("a", "int a = 1;\n    return a;");
        let sites = select_insertion_sites(&u);
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].preceding.kind, StatementKind::Declaration);
        assert_eq!(sites[0].offset, u.code.find("int a = 1;").unwrap() + 10);

        let u2 = snippet_unit("b", "throw new RuntimeException();");
        assert!(select_insertion_sites(&u2).is_empty());

        // No site after a side-effectful call, one after the declaration.
        let u3 = snippet_unit("c", "int a = 1;\n    sink(a);\n    int b = 2;\n    return b;");
        let sites3 = select_insertion_sites(&u3);
        let kinds: Vec<StatementKind> = sites3.iter().map(|s| s.preceding.kind).collect();
        assert!(kinds
            .iter()
            .all(|k| matches!(k, StatementKind::Declaration | StatementKind::PureExpression)));
        assert_eq!(sites3.len(), 2);
    }

    #[test]
    fn subset_sampling_contract() {
        let units: Vec<SourceUnit> = (0..100)
            .map(|i| snippet_unit(&format!("u{i}"), "int a = 1;\n    return a;"))
            .collect();
        let corpus = corpus_of(units);
        let (poi, rest) = sample_subset(&corpus, 0.10, 7);
        assert_eq!(poi.len(), 10);
        assert_eq!(rest.len(), 90);
        let mut all: Vec<usize> = poi.iter().chain(rest.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(sample_subset(&corpus, 0.10, 7), (poi, rest));

        let (full, none) = sample_subset(&corpus, 1.0, 7);
        assert_eq!(full.len(), 100);
        assert!(none.is_empty());

        // Sub-unit rates still poison one unit.
        let (one, _) = sample_subset(&corpus, 0.001, 7);
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn conflict_renaming() {
        let tc = EmbeddedToolchain::new();
        let pool = small_pool(&tc);
        let t = pool
            .templates
            .iter()
            .find(|t| t.snippet.contains("int acc"))
            .expect("template present");
        let mut host: HashSet<String> = HashSet::new();
        host.insert("acc".to_string());
        let (renamed, renames) = resolve_conflicts(t, &host);
        assert_eq!(renames, vec![("acc".to_string(), "acc_fp1".to_string())]);
        assert!(renamed.snippet.contains("acc_fp1"));
        assert!(!lex::code_token_texts(&renamed.snippet).contains(&"acc".to_string()));

        let (same, none) = resolve_conflicts(t, &HashSet::new());
        assert!(none.is_empty());
        assert_eq!(same.snippet, t.snippet);
    }

    #[test]
    fn inject_unit_inserts_and_preserves_host() {
        let tc = EmbeddedToolchain::new();
        let pool = small_pool(&tc);
        let unit = snippet_unit(
            "host",
            "int acc = 10;\n    int total = acc * 2;\n    int more = total + 1;\n    return more;",
        );
        let config = InjectionConfig {
            rate: 1.0,
            templates_per_unit: 3,
            seed: 42,
            mode: Mode::Funpoison,
        };
        let templates: Vec<Template> = pool.templates.iter().take(3).cloned().collect();
        let outcome = inject_unit(&unit, &templates, &config, &tc).expect("injects");
        let UnitOutcome::Poisoned { unit: pu, drops } = outcome else {
            panic!("expected poisoned outcome");
        };
        assert_eq!(drops, 0);
        assert_eq!(pu.insertions.len(), 3);

        // Host token sequence is a subsequence of the poisoned one.
        let host_toks = lex::code_token_texts(&unit.code);
        let poisoned_toks = lex::code_token_texts(&pu.code);
        assert!(is_subsequence(&host_toks, &poisoned_toks), "{}", pu.code);

        // Every recorded offset is a valid site on the clean unit.
        let offsets: BTreeSet<usize> =
            select_insertion_sites(&unit).iter().map(|s| s.offset).collect();
        for ins in &pu.insertions {
            assert!(offsets.contains(&ins.offset));
        }

        // Poisoned unit still compiles.
        let res = tc
            .compile(&probe_source(unit.kind, &pu.code, &pu.imports_added, &pu.stubs_added))
            .expect("probe");
        assert!(res.ok, "{:?}\n{}", res.diagnostics, pu.code);
    }

    fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
        let mut it = hay.iter();
        needle.iter().all(|n| it.any(|h| h == n))
    }

    #[test]
    fn surplus_templates_dropped() {
        let tc = EmbeddedToolchain::new();
        let pool = small_pool(&tc);
        let unit = snippet_unit("host", "int acc = 10;\n    return acc;");
        let config = InjectionConfig {
            rate: 1.0,
            templates_per_unit: 3,
            seed: 1,
            mode: Mode::Funpoison,
        };
        let templates: Vec<Template> = pool.templates.iter().take(3).cloned().collect();
        let outcome = inject_unit(&unit, &templates, &config, &tc).expect("injects");
        let UnitOutcome::Poisoned { unit: pu, drops } = outcome else {
            panic!("expected poisoned outcome");
        };
        assert_eq!(pu.insertions.len(), 1);
        assert_eq!(drops, 2);
    }

    #[test]
    fn modes_pair_site_for_site() {
        let tc = EmbeddedToolchain::new();
        let pool = small_pool(&tc);
        let unit = snippet_unit(
            "host",
            "int acc = 10;\n    int total = acc * 2;\n    int more = total + 1;\n    return more;",
        );
        let base = InjectionConfig {
            rate: 1.0,
            templates_per_unit: 2,
            seed: 9,
            mode: Mode::Funpoison,
        };
        let templates: Vec<Template> = pool.templates.iter().take(2).cloned().collect();
        let a = inject_unit(&unit, &templates, &base, &tc).expect("injects");
        let b = dead_branch_inject(&unit, &templates, &base, &tc).expect("injects");
        let (UnitOutcome::Poisoned { unit: pa, .. }, UnitOutcome::Poisoned { unit: pb, .. }) =
            (a, b)
        else {
            panic!("expected poisoned outcomes");
        };
        let offs = |p: &PoisonedUnit| p.insertions.iter().map(|i| i.offset).collect::<Vec<_>>();
        assert_eq!(offs(&pa), offs(&pb));
        assert_eq!(
            pa.insertions.iter().map(|i| &i.weak_use_patterns).collect::<Vec<_>>(),
            pb.insertions.iter().map(|i| &i.weak_use_patterns).collect::<Vec<_>>()
        );
        assert!(pb.code.contains("if (fpg_fp1") || pb.code.contains("if (fpg"));
        assert_ne!(pa.code, pb.code);
    }

    #[test]
    fn poison_dataset_deterministic_and_reported() {
        let tc = EmbeddedToolchain::new();
        let pool = small_pool(&tc);
        let units: Vec<SourceUnit> = (0..20)
            .map(|i| {
                if i % 5 == 4 {
                    // Ineligible: lone control transfer.
                    snippet_unit(&format!("u{i}"), "return 0;")
                } else {
                    snippet_unit(
                        &format!("u{i}"),
                        "int a = 1;\n    int b = a + 2;\n    return b;",
                    )
                }
            })
            .collect();
        let corpus = corpus_of(units);
        let config = InjectionConfig {
            rate: 0.5,
            templates_per_unit: 2,
            seed: 3,
            mode: Mode::Funpoison,
        };
        let (out1, rep1) = poison_dataset(&corpus, &pool, &config, &tc).expect("poisons");
        let (out2, rep2) = poison_dataset(&corpus, &pool, &config, &tc).expect("poisons");
        assert_eq!(out1, out2);
        assert_eq!(rep1, rep2);
        assert_eq!(rep1.selected_units, 10);
        assert_eq!(rep1.injected_units + rep1.skipped_units + rep1.reverted_units, 10);
        assert_eq!(rep1.reverted_units, 0);
        assert!((rep1.eligible_fraction - 0.8).abs() < 1e-9);
        assert!(rep1.effective_rate <= 0.5 + 1e-9);
        // Untouched units are byte-identical.
        let touched: BTreeSet<&String> =
            rep1.per_unit.iter().map(|u| &u.unit_id).collect();
        for (orig, out) in corpus.units.iter().zip(out1.units.iter()) {
            if !touched.contains(&orig.id) {
                assert_eq!(orig.code, out.code);
            }
        }
        let rendered = render_report(&rep1).expect("renders");
        assert!(rendered.lines().last().unwrap().contains("\"record\":\"summary\""));
    }

    #[test]
    fn full_file_imports_hoisted() {
        let tc = EmbeddedToolchain::new();
        // Template that carries an import.
        let src = corpus_of(vec![SourceUnit {
            id: "p".into(),
            code: "void seedFn() { List<String> xs = new ArrayList<>(); }".into(),
            kind: UnitKind::FunctionSnippet,
        }]);
        let (pool, _) = template::build_pool(&src, None, 1, &tc).expect("pool");
        let (pool, _) = safety::filter_pool(&pool, &Ruleset::default());
        assert_eq!(pool.templates.len(), 1);

        let unit = SourceUnit {
            id: "f".into(),
            code: "package demo;\n\nimport java.util.Objects;\n\nclass Host {\n    static int run(int x) {\n        int a = x + 1;\n        int b = a * 2;\n        return b;\n    }\n}\n".into(),
            kind: UnitKind::FullFile,
        };
        let config = InjectionConfig {
            rate: 1.0,
            templates_per_unit: 1,
            seed: 5,
            mode: Mode::Funpoison,
        };
        let outcome =
            inject_unit(&unit, &pool.templates, &config, &tc).expect("injects");
        let UnitOutcome::Poisoned { unit: pu, .. } = outcome else {
            panic!("expected poisoned outcome");
        };
        assert!(pu.code.contains("import java.util.ArrayList;"));
        assert!(pu.code.contains("import java.util.List;"));
        // Imports land after the package statement, before the class.
        let pkg = pu.code.find("package demo;").unwrap();
        let imp = pu.code.find("import java.util.List;").unwrap();
        let cls = pu.code.find("class Host").unwrap();
        assert!(pkg < imp && imp < cls);
        let res = tc.compile(&pu.code).expect("probe");
        assert!(res.ok, "{:?}\n{}", res.diagnostics, pu.code);
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = InjectionConfig {
            rate: 0.0,
            templates_per_unit: 3,
            seed: 0,
            mode: Mode::Funpoison,
        };
        assert!(bad.validate().is_err());
        let bad2 = InjectionConfig {
            rate: 1.5,
            templates_per_unit: 3,
            seed: 0,
            mode: Mode::Funpoison,
        };
        assert!(bad2.validate().is_err());
        let bad3 = InjectionConfig {
            rate: 0.5,
            templates_per_unit: 0,
            seed: 0,
            mode: Mode::Funpoison,
        };
        assert!(bad3.validate().is_err());
    }
}
