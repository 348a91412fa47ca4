//! Template mining: extract statement candidates, repair them into
//! independently compilable fragments, normalize names, and persist the
//! pool.
//!
//! Repair is compiler-in-the-loop: a static pass materializes imports,
//! stubs, and preamble declarations, then a bounded probe-compile loop
//! resolves whatever diagnostics remain. The probe is the only arbiter
//! of success; anything it cannot be brought to accept within the
//! iteration budget is rejected with the final diagnostics attached.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusOrigin};
use crate::error::{Error, Result};
use crate::lex::{self, TokKind, Token};
use crate::segment::{self, IdSets};
use crate::toolchain::{Diagnostic, SymbolKind, Toolchain};
use crate::verify::{self, ProbeParts};
use crate::{jdk, safety};

/// Maximum probe-compile iterations per candidate after the static pass.
const REPAIR_ITERATIONS: usize = 3;

/// One extracted statement candidate, pre-repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub unit_id: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub unit_id: String,
    pub start: usize,
    pub end: usize,
}

/// Original identifiers and their placeholder-normalized variants, kept
/// in parallel per role (`variable`, `method`, `class`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameMetadata {
    pub originals: BTreeMap<String, Vec<String>>,
    pub placeholders: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub snippet: String,
    pub imports: Vec<String>,
    pub preamble: Vec<String>,
    pub stubs: Vec<String>,
    pub names: NameMetadata,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<safety::SafetyVerdict>,
}

impl Template {
    /// Probe parts for recompilation checks.
    pub fn probe_parts(&self) -> ProbeParts {
        ProbeParts {
            imports: self.imports.clone(),
            stubs: self.stubs.clone(),
            preamble: self.preamble.clone(),
            body: self.snippet.clone(),
        }
    }

    /// Canonical dedup key: whitespace-normalized snippet plus sorted
    /// imports and stub names.
    pub fn dedup_key(&self) -> String {
        let normalized = lex::code_token_texts(&self.snippet).join(" ");
        let mut imports = self.imports.clone();
        imports.sort();
        let mut stub_names: Vec<&str> =
            self.stubs.iter().filter_map(|s| stub_name(s)).collect();
        stub_names.sort_unstable();
        format!("{normalized}\u{1}{}\u{1}{}", imports.join(","), stub_names.join(","))
    }

    /// Variable name → declared type text for snippet declarations.
    pub fn declared_types(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for stmt in split_statements(&self.snippet) {
            out.extend(segment::scan_identifiers(stmt).declared_types);
        }
        out
    }
}

/// Split a snippet into top-level statements at `;` boundaries outside
/// braces and parentheses. Candidates are single statements, but
/// templates constructed elsewhere (tests, fixtures) may hold several.
pub fn split_statements(snippet: &str) -> Vec<&str> {
    let toks = lex::code_tokens(snippet);
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    for t in &toks {
        match t.text(snippet) {
            "{" | "(" => depth += 1,
            "}" | ")" => depth -= 1,
            ";" if depth == 0 => {
                out.push(snippet[start..t.end].trim());
                start = t.end;
            }
            _ => {}
        }
    }
    if snippet[start..].trim() != "" {
        out.push(snippet[start..].trim());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Empty,
    FreeMethodCall,
    FreeArrayIndex,
    Timeout,
    Unrepairable,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::Empty => "empty",
            RejectReason::FreeMethodCall => "free-method-call",
            RejectReason::FreeArrayIndex => "free-array-index",
            RejectReason::Timeout => "timeout",
            RejectReason::Unrepairable => "unrepairable",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rejection {
    pub reason: RejectReason,
    pub diagnostics: Vec<Diagnostic>,
    pub candidate: Candidate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplatePool {
    pub templates: Vec<Template>,
    pub built_from: CorpusOrigin,
    pub size_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolStats {
    pub candidates: usize,
    pub repaired: usize,
    pub rejected: BTreeMap<String, usize>,
    /// Unique templates before any cap was applied.
    pub deduplicated: usize,
    /// Pool size after the cap (equals `deduplicated` when uncapped).
    pub retained: usize,
}

/// Extract every statement span from every unit as a standalone
/// candidate. Headers, type shells, and field declarations contribute
/// nothing.
pub fn extract_candidates(corpus: &Corpus) -> Vec<Candidate> {
    let mut out = Vec::new();
    for unit in &corpus.units {
        let seg = segment::segment_statements(unit);
        for span in seg.spans.iter().filter(|s| !s.is_header) {
            out.push(Candidate {
                unit_id: unit.id.clone(),
                start: span.start,
                end: span.end,
                text: span.text(&unit.code).to_string(),
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Repair
// ---------------------------------------------------------------------------

/// Synthesized type definition under construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct StubSpec {
    methods: BTreeSet<String>,
    fields: BTreeSet<String>,
}

fn render_stub(name: &str, spec: &StubSpec) -> String {
    let mut s = format!("class {name} {{ {name}(Object... a) {{}}");
    for m in &spec.methods {
        s.push_str(&format!(" static Object {m}(Object... a) {{ return null; }}"));
    }
    for f in &spec.fields {
        s.push_str(&format!(" static Object {f};"));
    }
    s.push_str(" }");
    s
}

/// Type name of a rendered stub.
pub fn stub_name(stub: &str) -> Option<&str> {
    let toks = lex::code_tokens(stub);
    let mut it = toks.iter();
    while let Some(t) = it.next() {
        if t.text(stub) == "class" {
            return it.next().map(|n| n.text(stub));
        }
    }
    None
}

/// Methods declared by a rendered stub (excluding the constructor).
pub fn stub_methods(stub: &str) -> Vec<String> {
    let toks = lex::code_tokens(stub);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(stub)).collect();
    let mut out = Vec::new();
    for i in 0..texts.len() {
        if texts[i] == "Object"
            && toks.get(i + 1).map(|t| t.kind) == Some(TokKind::Ident)
            && texts.get(i + 2) == Some(&"(")
        {
            out.push(texts[i + 1].to_string());
        }
    }
    out
}

/// Instance methods that identify a free variable as a String.
const STRINGY_METHODS: &[&str] = &[
    "length", "charAt", "substring", "isEmpty", "isBlank", "toUpperCase", "toLowerCase",
    "trim", "strip", "indexOf", "lastIndexOf", "contains", "startsWith", "endsWith",
    "replace", "concat", "chars", "toCharArray", "split", "repeat", "equalsIgnoreCase",
];

const ARITH_OPS: &[&str] = &[
    "+", "-", "*", "/", "%", "<", ">", "<=", ">=", "<<", ">>", ">>>", "&", "|", "^",
    "+=", "-=", "*=", "/=", "%=",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum FreeVarPlan {
    Divisor,
    StubReceiver { members_methods: BTreeSet<String>, members_fields: BTreeSet<String> },
    ObjectValue,
    BooleanValue,
    StringValue,
    DoubleValue,
    IntValue,
    TypedNew(String),
}

/// Decide a default-initialized declaration for a free variable from its
/// usage contexts. Divisor position wins (a zero there would change
/// runtime behavior of the host program after injection).
fn plan_free_variable(name: &str, src: &str, toks: &[Token], texts: &[&str]) -> FreeVarPlan {
    let _ = src;
    let mut member_methods: BTreeSet<String> = BTreeSet::new();
    let mut member_fields: BTreeSet<String> = BTreeSet::new();
    let mut divisor = false;
    let mut boolean = false;
    let mut stringy = false;
    let mut arithmetic = false;
    let mut nullish = false;
    let mut assigned: Option<FreeVarPlan> = None;

    for i in 0..texts.len() {
        if toks[i].kind != TokKind::Ident || texts[i] != name {
            continue;
        }
        let prev = if i > 0 { Some(texts[i - 1]) } else { None };
        // Skip member positions (`recv.name`).
        if prev == Some(".") {
            continue;
        }
        let next = texts.get(i + 1).copied();
        if matches!(prev, Some("/") | Some("%")) {
            divisor = true;
        }
        if next == Some(".") {
            if let Some(member) = texts.get(i + 2) {
                if texts.get(i + 3) == Some(&"(") {
                    if STRINGY_METHODS.contains(member) {
                        stringy = true;
                    } else {
                        member_methods.insert((*member).to_string());
                    }
                } else {
                    member_fields.insert((*member).to_string());
                }
            }
        }
        if matches!(prev, Some("!") | Some("&&") | Some("||"))
            || matches!(next, Some("&&") | Some("||") | Some("?"))
        {
            boolean = true;
        }
        if (next == Some("==") || next == Some("!=")) && texts.get(i + 2) == Some(&"null") {
            nullish = true;
        }
        if next == Some("=") && assigned.is_none() {
            assigned = texts.get(i + 2).and_then(|t| match toks.get(i + 2)?.kind {
                TokKind::IntLit => Some(FreeVarPlan::IntValue),
                TokKind::FloatLit => Some(FreeVarPlan::DoubleValue),
                TokKind::StrLit => Some(FreeVarPlan::StringValue),
                TokKind::Keyword if *t == "true" || *t == "false" => {
                    Some(FreeVarPlan::BooleanValue)
                }
                TokKind::Keyword if *t == "new" => texts
                    .get(i + 3)
                    .filter(|_| toks[i + 3].kind == TokKind::Ident)
                    .map(|n| FreeVarPlan::TypedNew((*n).to_string())),
                _ => None,
            });
        }
        if prev.map(|p| ARITH_OPS.contains(&p)).unwrap_or(false)
            || next.map(|n| ARITH_OPS.contains(&n)).unwrap_or(false)
        {
            // `+` adjacent to a string literal is concatenation.
            let concat = (next == Some("+") && toks.get(i + 2).map(|t| t.kind) == Some(TokKind::StrLit))
                || (prev == Some("+")
                    && i >= 2
                    && toks[i - 2].kind == TokKind::StrLit);
            if concat {
                stringy = true;
            } else {
                arithmetic = true;
            }
        }
    }

    if divisor {
        FreeVarPlan::Divisor
    } else if !member_methods.is_empty() || !member_fields.is_empty() {
        FreeVarPlan::StubReceiver {
            members_methods: member_methods,
            members_fields: member_fields,
        }
    } else if nullish {
        FreeVarPlan::ObjectValue
    } else if boolean {
        FreeVarPlan::BooleanValue
    } else if stringy {
        FreeVarPlan::StringValue
    } else if let Some(plan) = assigned {
        plan
    } else if arithmetic {
        FreeVarPlan::IntValue
    } else {
        FreeVarPlan::ObjectValue
    }
}

struct RepairState {
    snippet: String,
    imports: BTreeSet<String>,
    stubs: BTreeMap<String, StubSpec>,
    /// Free-variable name → preamble declaration line.
    preamble: BTreeMap<String, String>,
}

impl RepairState {
    fn parts(&self) -> ProbeParts {
        ProbeParts {
            imports: self.imports.iter().cloned().collect(),
            stubs: self
                .stubs
                .iter()
                .map(|(name, spec)| render_stub(name, spec))
                .collect(),
            preamble: self.preamble.values().cloned().collect(),
            body: self.snippet.clone(),
        }
    }

    fn add_type(&mut self, simple: &str) -> bool {
        match jdk::resolve(simple) {
            Some(None) => false,
            Some(Some(path)) => self.imports.insert(path),
            None => {
                if self.stubs.contains_key(simple) {
                    false
                } else {
                    self.stubs.insert(simple.to_string(), StubSpec::default());
                    true
                }
            }
        }
    }
}

/// Shorten fully qualified allowlist types to simple names, collecting
/// the imports they require.
fn shorten_qualified_names(snippet: &str, imports: &mut BTreeSet<String>) -> String {
    let toks = lex::code_tokens(snippet);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(snippet)).collect();
    let mut splices: Vec<(usize, usize, String)> = Vec::new();
    let mut i = 0;
    while i < texts.len() {
        if toks[i].kind == TokKind::Ident && texts[i] == "java" {
            // Collect the maximal dotted chain.
            let mut j = i;
            let mut parts = vec![texts[i]];
            while texts.get(j + 1) == Some(&".")
                && toks.get(j + 2).map(|t| t.kind) == Some(TokKind::Ident)
            {
                j += 2;
                parts.push(texts[j]);
            }
            // Find the longest prefix that is a known import.
            let mut k = parts.len();
            while k >= 3 {
                let path = parts[..k].join(".");
                if jdk::known_import(&path) {
                    let end_tok = i + 2 * (k - 1);
                    if path.rsplit_once('.').map(|(p, _)| p) != Some("java.lang") {
                        imports.insert(path.clone());
                    }
                    splices.push((
                        toks[i].start,
                        toks[end_tok].end,
                        parts[k - 1].to_string(),
                    ));
                    break;
                }
                k -= 1;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let mut out = snippet.to_string();
    for (start, end, simple) in splices.into_iter().rev() {
        out.replace_range(start..end, &simple);
    }
    out
}

/// Rewrite a bare allocation statement `new T(args);` as a fresh-local
/// assignment `T vN = new T(args);`.
fn rewrite_bare_allocation(snippet: &str) -> String {
    let toks = lex::code_tokens(snippet);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(snippet)).collect();
    if texts.first() != Some(&"new") {
        return snippet.to_string();
    }
    // Type tokens: ident (. ident)* up to `(` or `<`.
    let mut i = 1;
    let mut ty = String::new();
    while i < texts.len() {
        match toks[i].kind {
            TokKind::Ident => ty.push_str(texts[i]),
            _ if texts[i] == "." => ty.push('.'),
            _ => break,
        }
        i += 1;
    }
    if ty.is_empty() || texts.get(i).map(|t| *t == "[").unwrap_or(true) {
        // Array allocations and malformed starts are left as-is; the
        // probe decides their fate.
        return snippet.to_string();
    }
    // Generic allocation gets a diamond-friendly raw declaration type.
    let decl_ty = ty.rsplit('.').next().unwrap_or(&ty).to_string();
    let used = segment::host_identifier_set(snippet);
    let mut n = 1;
    let fresh = loop {
        let name = format!("v{n}");
        if !used.contains(&name) {
            break name;
        }
        n += 1;
    };
    format!("{decl_ty} {fresh} = {snippet}")
}

/// Attribute member accesses to stub receivers: `Stub.m(...)`, `x.m(...)`
/// where `x` is declared with a stub type, and field reads likewise.
fn attribute_members(state: &mut RepairState, ids: &IdSets) {
    let snippet = state.snippet.clone();
    let toks = lex::code_tokens(&snippet);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(&snippet)).collect();
    // Variable → stub type simple name, from snippet declarations.
    let mut stub_typed: BTreeMap<&str, String> = BTreeMap::new();
    for (var, ty) in &ids.declared_types {
        let simple = ty
            .split(['<', '[', '.'])
            .next()
            .unwrap_or(ty)
            .trim()
            .to_string();
        if state.stubs.contains_key(&simple) {
            stub_typed.insert(var.as_str(), simple);
        }
    }
    for i in 0..texts.len() {
        if texts[i] != "." || i == 0 || i + 1 >= texts.len() {
            continue;
        }
        if toks[i - 1].kind != TokKind::Ident || toks[i + 1].kind != TokKind::Ident {
            continue;
        }
        let recv = texts[i - 1];
        let member = texts[i + 1];
        let target = if state.stubs.contains_key(recv) {
            Some(recv.to_string())
        } else {
            stub_typed.get(recv).cloned()
        };
        let Some(stub) = target else { continue };
        let spec = state.stubs.get_mut(&stub).expect("stub present");
        if texts.get(i + 2) == Some(&"(") {
            spec.methods.insert(member.to_string());
        } else {
            spec.fields.insert(member.to_string());
        }
    }
}

/// Detect an unqualified call `name(...)` that no local context can
/// satisfy; such candidates are rejected outright.
fn has_free_unqualified_call(snippet: &str) -> Option<String> {
    let toks = lex::code_tokens(snippet);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(snippet)).collect();
    for i in 0..texts.len() {
        if toks[i].kind == TokKind::Ident && texts.get(i + 1) == Some(&"(") {
            let prev = if i > 0 { Some(texts[i - 1]) } else { None };
            if prev != Some(".") && prev != Some("new") {
                return Some(texts[i].to_string());
            }
        }
    }
    None
}

fn preamble_line(name: &str, plan: &FreeVarPlan, state: &mut RepairState) -> String {
    match plan {
        FreeVarPlan::Divisor => format!("int {name} = 1;"),
        FreeVarPlan::IntValue => format!("int {name} = 0;"),
        FreeVarPlan::DoubleValue => format!("double {name} = 0.0;"),
        FreeVarPlan::BooleanValue => format!("boolean {name} = false;"),
        FreeVarPlan::StringValue => format!("String {name} = \"\";"),
        FreeVarPlan::ObjectValue => format!("Object {name} = new Object();"),
        FreeVarPlan::TypedNew(ty) => {
            state.add_type(ty);
            format!("{ty} {name} = new {ty}();")
        }
        FreeVarPlan::StubReceiver {
            members_methods,
            members_fields,
        } => {
            // Fresh per-variable receiver type.
            let mut n = 1;
            let ty = loop {
                let t = format!("FpRecv{n}");
                if !state.stubs.contains_key(&t) && !state.snippet.contains(&t) {
                    break t;
                }
                n += 1;
            };
            state.stubs.insert(
                ty.clone(),
                StubSpec {
                    methods: members_methods.clone(),
                    fields: members_fields.clone(),
                },
            );
            format!("{ty} {name} = new {ty}();")
        }
    }
}

fn is_timeout(diags: &[Diagnostic]) -> bool {
    diags
        .iter()
        .any(|d| d.message.contains("timed out") || d.message.contains("timeout"))
}

/// Repair a candidate into a compilable template, or reject it.
pub fn repair_to_compilable(
    candidate: &Candidate,
    toolchain: &dyn Toolchain,
) -> Result<std::result::Result<Template, Rejection>> {
    let reject = |reason, diagnostics| {
        Ok(Err(Rejection {
            reason,
            diagnostics,
            candidate: candidate.clone(),
        }))
    };
    if lex::code_tokens(&candidate.text).is_empty() {
        return reject(RejectReason::Empty, vec![]);
    }

    let mut state = RepairState {
        snippet: candidate.text.clone(),
        imports: BTreeSet::new(),
        stubs: BTreeMap::new(),
        preamble: BTreeMap::new(),
    };
    state.snippet = shorten_qualified_names(&state.snippet, &mut state.imports);
    state.snippet = rewrite_bare_allocation(&state.snippet);

    if let Some(m) = has_free_unqualified_call(&state.snippet) {
        return reject(
            RejectReason::FreeMethodCall,
            vec![Diagnostic::unresolved(SymbolKind::Method, &m)],
        );
    }

    let ids = segment::scan_identifiers(&state.snippet);
    for ty in &ids.type_names {
        state.add_type(ty);
    }
    attribute_members(&mut state, &ids);

    // Free variables: indexing an unknown array cannot be made
    // runtime-safe, everything else gets a defaulted declaration.
    let snippet = state.snippet.clone();
    let toks = lex::code_tokens(&snippet);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(&snippet)).collect();
    for free in &ids.referenced {
        let indexed = (0..texts.len()).any(|i| {
            texts[i] == free
                && toks[i].kind == TokKind::Ident
                && texts.get(i + 1) == Some(&"[")
                && (i == 0 || texts[i - 1] != ".")
        });
        if indexed {
            return reject(
                RejectReason::FreeArrayIndex,
                vec![Diagnostic::unresolved(SymbolKind::Variable, free)],
            );
        }
        let plan = plan_free_variable(free, &snippet, &toks, &texts);
        let line = preamble_line(free, &plan, &mut state);
        state.preamble.insert(free.clone(), line);
    }

    // Bounded probe loop: compile, map diagnostics to fixes, repeat.
    let mut last_diags: Vec<Diagnostic> = Vec::new();
    for _ in 0..REPAIR_ITERATIONS {
        let result = verify::compile_probe(&state.parts(), toolchain)?;
        if result.ok {
            drop_shadowed_stubs(&mut state);
            return Ok(Ok(finish_template(state, candidate)));
        }
        if is_timeout(&result.diagnostics) {
            return reject(RejectReason::Timeout, result.diagnostics);
        }
        let mut progressed = false;
        for sym in result.unresolved_symbols() {
            match sym.kind {
                SymbolKind::Class => {
                    progressed |= state.add_type(&sym.name);
                }
                SymbolKind::Variable => {
                    let cap = sym.name.chars().next().is_some_and(|c| c.is_uppercase());
                    if cap {
                        progressed |= state.add_type(&sym.name);
                    } else if !state.preamble.contains_key(&sym.name) {
                        let plan = plan_free_variable(&sym.name, &snippet, &toks, &texts);
                        let line = preamble_line(&sym.name, &plan, &mut state);
                        state.preamble.insert(sym.name.clone(), line);
                        progressed = true;
                    }
                }
                SymbolKind::Method => {
                    // Attribute to a stub receiver if the call site names
                    // one; otherwise the candidate is unrepairable.
                    let before = state.stubs.clone();
                    attribute_members(&mut state, &ids);
                    progressed |= state.stubs != before;
                }
            }
        }
        last_diags = result.diagnostics;
        if !progressed {
            return reject(RejectReason::Unrepairable, last_diags);
        }
    }
    reject(RejectReason::Unrepairable, last_diags)
}

/// Footnote rule: a stub whose name an import already provides is
/// redundant and dropped.
fn drop_shadowed_stubs(state: &mut RepairState) {
    let imported: BTreeSet<String> = state
        .imports
        .iter()
        .filter_map(|p| p.rsplit('.').next().map(str::to_string))
        .collect();
    state.stubs.retain(|name, _| !imported.contains(name));
}

fn finish_template(state: RepairState, candidate: &Candidate) -> Template {
    let parts = state.parts();
    Template {
        snippet: state.snippet,
        imports: parts.imports,
        preamble: parts.preamble,
        stubs: parts.stubs,
        names: NameMetadata::default(),
        provenance: Provenance {
            unit_id: candidate.unit_id.clone(),
            start: candidate.start,
            end: candidate.end,
        },
        verdict: None,
    }
}

/// Populate name metadata: snippet-declared variables, stub classes, and
/// stub methods, each with placeholder-normalized variants.
pub fn anonymize_variable(mut template: Template) -> Template {
    let mut declared = BTreeSet::new();
    for stmt in split_statements(&template.snippet) {
        declared.extend(segment::scan_identifiers(stmt).declared);
    }
    let variables: Vec<String> = declared.into_iter().collect();
    let classes: Vec<String> = template
        .stubs
        .iter()
        .filter_map(|s| stub_name(s).map(str::to_string))
        .collect();
    let mut methods: Vec<String> = template
        .stubs
        .iter()
        .flat_map(|s| stub_methods(s))
        .collect();
    methods.sort();
    methods.dedup();

    let mut names = NameMetadata::default();
    let mut role = |key: &str, originals: Vec<String>, prefix: &str| {
        let placeholders: Vec<String> = (1..=originals.len())
            .map(|i| format!("{prefix}{i}"))
            .collect();
        if !originals.is_empty() {
            names.originals.insert(key.to_string(), originals);
            names.placeholders.insert(key.to_string(), placeholders);
        }
    };
    role("variable", variables, "V");
    role("method", methods, "M");
    role("class", classes, "C");
    template.names = names;
    template
}

// ---------------------------------------------------------------------------
// Pool assembly
// ---------------------------------------------------------------------------

/// Build the template pool: repair all candidates (in parallel, merged
/// in candidate order), deduplicate, and apply the seeded size cap.
pub fn build_pool(
    corpus: &Corpus,
    size_cap: Option<usize>,
    seed: u64,
    toolchain: &dyn Toolchain,
) -> Result<(TemplatePool, PoolStats)> {
    let candidates = extract_candidates(corpus);
    let mut stats = PoolStats {
        candidates: candidates.len(),
        ..PoolStats::default()
    };

    let results: Vec<std::result::Result<Template, Rejection>> = candidates
        .par_iter()
        .map(|c| repair_to_compilable(c, toolchain))
        .collect::<Result<Vec<_>>>()?;

    let mut templates: Vec<Template> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for result in results {
        match result {
            Ok(template) => {
                stats.repaired += 1;
                let template = anonymize_variable(template);
                if seen.insert(template.dedup_key()) {
                    templates.push(template);
                }
            }
            Err(rej) => {
                *stats
                    .rejected
                    .entry(rej.reason.as_str().to_string())
                    .or_insert(0) += 1;
            }
        }
    }
    stats.deduplicated = templates.len();

    if let Some(cap) = size_cap {
        if templates.len() > cap {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut keep = rand::seq::index::sample(&mut rng, templates.len(), cap).into_vec();
            keep.sort_unstable();
            let mut kept = Vec::with_capacity(cap);
            let mut it = keep.into_iter().peekable();
            for (i, t) in templates.into_iter().enumerate() {
                if it.peek() == Some(&i) {
                    it.next();
                    kept.push(t);
                }
            }
            templates = kept;
        }
    }
    stats.retained = templates.len();

    Ok((
        TemplatePool {
            templates,
            built_from: corpus.origin.clone(),
            size_cap,
        },
        stats,
    ))
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PoolHeader {
    record: String,
    built_from: CorpusOrigin,
    size_cap: Option<usize>,
    templates: usize,
}

/// Serialize a pool as line-delimited records: one header, then one
/// template per line. Output is byte-deterministic.
pub fn save_pool(pool: &TemplatePool) -> Result<String> {
    let header = PoolHeader {
        record: "pool-header".to_string(),
        built_from: pool.built_from.clone(),
        size_cap: pool.size_cap,
        templates: pool.templates.len(),
    };
    let mut out = serde_json::to_string(&header).map_err(|e| Error::Other(e.to_string()))?;
    out.push('\n');
    for t in &pool.templates {
        out.push_str(&serde_json::to_string(t).map_err(|e| Error::Other(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn load_pool(stream: &str) -> Result<TemplatePool> {
    let mut lines = stream.lines().enumerate();
    let (_, header_line) = lines.next().ok_or(Error::MalformedRecord {
        line: 1,
        reason: "empty pool stream".to_string(),
    })?;
    let header: PoolHeader =
        serde_json::from_str(header_line).map_err(|e| Error::MalformedRecord {
            line: 1,
            reason: format!("bad pool header: {e}"),
        })?;
    let mut templates = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let t: Template = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        templates.push(t);
    }
    if templates.len() != header.templates {
        return Err(Error::MalformedRecord {
            line: 1,
            reason: format!(
                "header declares {} templates, stream has {}",
                header.templates,
                templates.len()
            ),
        });
    }
    Ok(TemplatePool {
        templates,
        built_from: header.built_from,
        size_cap: header.size_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{SourceUnit, UnitKind};
    use crate::toolchain::embedded::EmbeddedToolchain;

    fn cand(text: &str) -> Candidate {
        Candidate {
            unit_id: "u1".into(),
            start: 0,
            end: text.len(),
            text: text.into(),
        }
    }

    fn repair(text: &str) -> std::result::Result<Template, Rejection> {
        let tc = EmbeddedToolchain::new();
        repair_to_compilable(&cand(text), &tc).expect("toolchain ok")
    }

    #[test]
    fn list_declaration_gets_imports_no_stubs() {
        let t = repair("List<String> xs = new ArrayList<>();").expect("repairs");
        assert_eq!(
            t.imports,
            vec!["java.util.ArrayList".to_string(), "java.util.List".to_string()]
        );
        assert!(t.stubs.is_empty());
        assert!(t.preamble.is_empty());
    }

    #[test]
    fn bare_allocation_rewritten_with_stub() {
        let t = repair("new Widget(3);").expect("repairs");
        assert_eq!(t.snippet, "Widget v1 = new Widget(3);");
        assert_eq!(t.stubs.len(), 1);
        assert_eq!(stub_name(&t.stubs[0]), Some("Widget"));
    }

    #[test]
    fn control_transfer_still_repairs() {
        let t = repair("return x + 1;").expect("repairs");
        assert_eq!(t.preamble, vec!["int x = 0;".to_string()]);
    }

    #[test]
    fn divisor_free_variable_defaults_to_one() {
        let t = repair("int q = total / parts;").expect("repairs");
        assert!(t.preamble.contains(&"int parts = 1;".to_string()));
        assert!(t.preamble.contains(&"int total = 0;".to_string()));
    }

    #[test]
    fn fqn_shortened_with_import() {
        let t = repair("java.util.List<String> xs = new java.util.ArrayList<>();")
            .expect("repairs");
        assert_eq!(t.snippet, "List<String> xs = new ArrayList<>();");
        assert!(t.imports.contains(&"java.util.List".to_string()));
        assert!(t.imports.contains(&"java.util.ArrayList".to_string()));
    }

    #[test]
    fn free_method_call_rejected() {
        let r = repair("int n = helper(3);").expect_err("rejects");
        assert_eq!(r.reason, RejectReason::FreeMethodCall);
    }

    #[test]
    fn free_array_index_rejected() {
        let r = repair("int n = data[i];").expect_err("rejects");
        assert_eq!(r.reason, RejectReason::FreeArrayIndex);
    }

    #[test]
    fn stub_receiver_methods_materialized() {
        let t = repair("Object r = conn.prepare(query);").expect("repairs");
        assert_eq!(t.stubs.len(), 1);
        assert!(t.stubs[0].contains("static Object prepare"));
        assert!(t.preamble.iter().any(|p| p.contains("conn = new FpRecv1()")));
        assert!(t.preamble.iter().any(|p| p == "Object query = new Object();"));
    }

    #[test]
    fn anonymization_parallel_maps() {
        let t = anonymize_variable(repair("new Widget(3);").expect("repairs"));
        assert_eq!(
            t.names.originals.get("variable"),
            Some(&vec!["v1".to_string()])
        );
        assert_eq!(
            t.names.placeholders.get("variable"),
            Some(&vec!["V1".to_string()])
        );
        assert_eq!(t.names.originals.get("class"), Some(&vec!["Widget".to_string()]));
        for (key, originals) in &t.names.originals {
            assert_eq!(originals.len(), t.names.placeholders[key].len());
        }
    }

    #[test]
    fn extract_counts() {
        let corpus = Corpus {
            units: vec![
                SourceUnit {
                    id: "a".into(),
                    code: "void m() { int a = 1; int b = a + 2; foo(b); }".into(),
                    kind: UnitKind::FunctionSnippet,
                },
                SourceUnit {
                    id: "b".into(),
                    code: "class T { int f; }".into(),
                    kind: UnitKind::FullFile,
                },
            ],
            origin: CorpusOrigin::Directory { path: "x".into() },
            skipped_records: 0,
        };
        let cands = extract_candidates(&corpus);
        assert_eq!(cands.len(), 3);
        assert!(cands.iter().all(|c| c.unit_id == "a"));
    }

    #[test]
    fn pool_roundtrip_and_dedup() {
        let tc = EmbeddedToolchain::new();
        let unit = SourceUnit {
            id: "a".into(),
            code: "void m() { int a = 1; int b = a + 2; int a2 = 1; }".into(),
            kind: UnitKind::FunctionSnippet,
        };
        let corpus = Corpus {
            units: vec![unit.clone()],
            origin: CorpusOrigin::Directory { path: "x".into() },
            skipped_records: 0,
        };
        let (pool, stats) = build_pool(&corpus, None, 7, &tc).expect("builds");
        assert_eq!(stats.candidates, 3);
        assert_eq!(stats.repaired, 3);
        assert_eq!(pool.templates.len(), 3);

        // Doubling the corpus does not change the deduplicated pool.
        let doubled = Corpus {
            units: vec![
                unit.clone(),
                SourceUnit {
                    id: "a-copy".into(),
                    ..unit
                },
            ],
            origin: CorpusOrigin::Directory { path: "x".into() },
            skipped_records: 0,
        };
        let (pool2, _) = build_pool(&doubled, None, 7, &tc).expect("builds");
        assert_eq!(
            pool.templates.iter().map(|t| &t.snippet).collect::<Vec<_>>(),
            pool2.templates.iter().map(|t| &t.snippet).collect::<Vec<_>>()
        );

        let saved = save_pool(&pool).expect("saves");
        let loaded = load_pool(&saved).expect("loads");
        assert_eq!(loaded, pool);
        assert_eq!(save_pool(&loaded).expect("saves"), saved);
    }

    #[test]
    fn capped_pool_is_stable() {
        let tc = EmbeddedToolchain::new();
        let code: String = (0..10)
            .map(|i| format!("int x{i} = {i};"))
            .collect::<Vec<_>>()
            .join(" ");
        let corpus = Corpus {
            units: vec![SourceUnit {
                id: "a".into(),
                code: format!("void m() {{ {code} }}"),
                kind: UnitKind::FunctionSnippet,
            }],
            origin: CorpusOrigin::Directory { path: "x".into() },
            skipped_records: 0,
        };
        let (pool, stats) = build_pool(&corpus, Some(5), 42, &tc).expect("builds");
        assert_eq!(pool.templates.len(), 5);
        assert_eq!(stats.deduplicated, 10);
        assert_eq!(stats.retained, 5);
        let (pool2, _) = build_pool(&corpus, Some(5), 42, &tc).expect("builds");
        assert_eq!(pool, pool2);
        let (pool3, _) = build_pool(&corpus, Some(5), 43, &tc).expect("builds");
        assert_ne!(pool, pool3);
    }

    #[test]
    fn templates_recompile_in_isolation() {
        let tc = EmbeddedToolchain::new();
        for text in [
            "List<String> xs = new ArrayList<>();",
            "new Widget(3);",
            "int q = total / parts;",
            "Object r = conn.prepare(query);",
            "Map<String, Integer> m = new HashMap<>();",
        ] {
            let t = repair(text).expect("repairs");
            let result = verify::compile_probe(&t.probe_parts(), &tc).expect("probe runs");
            assert!(result.ok, "{text}: {:?}", result.diagnostics);
        }
    }
}
