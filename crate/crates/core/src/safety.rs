//! Two-tier safety ruleset for template filtering.
//!
//! The conceptual tier captures semantic hazard classes (control flow,
//! mutation, misuse patterns); the programmatic tier captures concrete
//! API surfaces (process, I/O, printing, threading) plus locality
//! violations. Matching is token-sequence based over code tokens, so
//! occurrences inside comments or string literals never fire. All rules
//! run against every template — violations are collected exhaustively,
//! never short-circuited — and the built-in rules cannot be disabled,
//! only extended.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusOrigin;
use crate::error::{Error, Result};
use crate::jdk;
use crate::lex::{self, TokKind, Token};
use crate::segment;
use crate::template::{stub_name, Template, TemplatePool};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    Conceptual,
    Programmatic,
}

/// One matched hazard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub tier: Tier,
    pub category: String,
    /// The matched source fragment.
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyVerdict {
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

/// A single token position in a pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pat {
    /// Exact token text.
    Lit(String),
    /// Any string literal token.
    AnyString,
    /// A balanced `( ... )` group of any content.
    BalancedParens,
}

fn lits(texts: &[&str]) -> Vec<Pat> {
    texts.iter().map(|t| Pat::Lit((*t).to_string())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Matcher {
    /// Any of the given consecutive token sequences.
    TokenSeqs(Vec<Vec<Pat>>),
    /// Imports or in-code dotted chains with any of these prefixes.
    ImportPrefixes(Vec<String>),
    Structural(Structural),
}

/// Predicates that need declaration context rather than a flat token
/// pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structural {
    /// Terminal `.get()` on stream reductions or on `Optional`-typed
    /// locals.
    OptionalMisuse,
    /// `x` initialized with `new ...` and later compared against null.
    NullCheckAfterNew,
    /// A type declaration inside the snippet itself.
    TopLevelTypes,
    /// Declared names shadowing core JDK types.
    ReservedNames,
    /// `StringBuilder` combined with a `.toString()` round trip.
    StringBuilderToString,
    /// Assignment or increment whose target root is not template-local.
    NonLocalWrites,
    /// `set*/put*/add*/remove*/update*` call on a non-local receiver.
    NonLocalMutators,
    /// Stub types whose names collide with core JDK types.
    StubConflicts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyRule {
    pub tier: Tier,
    pub category: String,
    pub matcher: Matcher,
}

impl SafetyRule {
    fn new(tier: Tier, category: &str, matcher: Matcher) -> Self {
        SafetyRule {
            tier,
            category: category.to_string(),
            matcher,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ruleset {
    rules: Vec<SafetyRule>,
}

impl Default for Ruleset {
    fn default() -> Self {
        Ruleset {
            rules: builtin_rules(),
        }
    }
}

/// Extension record: `{tier, category, pattern}` where `pattern` is a
/// space-separated token sequence.
#[derive(Debug, Deserialize)]
struct RuleOverride {
    tier: Tier,
    category: String,
    pattern: String,
}

impl Ruleset {
    pub fn rules(&self) -> &[SafetyRule] {
        &self.rules
    }

    /// Append extension rules from a JSON array file. Built-in rules are
    /// always retained.
    pub fn extend_from_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let overrides: Vec<RuleOverride> =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!(
                "bad ruleset override file {}: {e}",
                path.display()
            )))?;
        for o in overrides {
            let toks = lex::code_token_texts(&o.pattern);
            if toks.is_empty() {
                return Err(Error::Config(format!(
                    "empty pattern in override category {:?}",
                    o.category
                )));
            }
            self.rules.push(SafetyRule {
                tier: o.tier,
                category: o.category,
                matcher: Matcher::TokenSeqs(vec![toks
                    .iter()
                    .map(|t| Pat::Lit(t.clone()))
                    .collect()]),
            });
        }
        // Keep tier evaluation order stable.
        self.rules.sort_by_key(|r| r.tier);
        Ok(())
    }
}

fn builtin_rules() -> Vec<SafetyRule> {
    use self::Structural as S;
    use Matcher::{ImportPrefixes, TokenSeqs};
    use Tier::*;
    let structural = |s: S| Matcher::Structural(s);
    vec![
        SafetyRule::new(
            Conceptual,
            "Package/API",
            ImportPrefixes(
                ["java.io", "java.net", "java.nio.file", "java.lang.reflect", "sun.misc"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            ),
        ),
        SafetyRule::new(
            Conceptual,
            "Dangerous Calls",
            TokenSeqs(vec![
                lits(&["System", ".", "exit", "("]),
                lits(&["Runtime", ".", "getRuntime", "(", ")", ".", "exec"]),
                lits(&["Runtime", ".", "getRuntime", "(", ")", ".", "halt"]),
                lits(&["Class", ".", "forName", "("]),
            ]),
        ),
        SafetyRule::new(
            Conceptual,
            "Concurrency",
            TokenSeqs(vec![
                lits(&[".", "wait", "("]),
                lits(&[".", "notify", "("]),
                lits(&[".", "notifyAll", "("]),
            ]),
        ),
        SafetyRule::new(Conceptual, "Optional Misuse", structural(S::OptionalMisuse)),
        SafetyRule::new(
            Conceptual,
            "Control Flow",
            TokenSeqs(vec![
                lits(&["return"]),
                lits(&["throw"]),
                lits(&["break"]),
                lits(&["continue"]),
            ]),
        ),
        SafetyRule::new(Conceptual, "Assertion", TokenSeqs(vec![lits(&["assert"])])),
        SafetyRule::new(
            Conceptual,
            "Data Mutation",
            TokenSeqs(vec![
                lits(&[".", "add", "("]),
                lits(&[".", "put", "("]),
                lits(&[".", "remove", "("]),
                lits(&[".", "clear", "("]),
            ]),
        ),
        SafetyRule::new(
            Conceptual,
            "String/Builder",
            structural(S::StringBuilderToString),
        ),
        SafetyRule::new(
            Conceptual,
            "Unsafe Equality",
            TokenSeqs(vec![vec![
                Pat::AnyString,
                Pat::Lit(".".into()),
                Pat::Lit("equals".into()),
                Pat::Lit("(".into()),
            ]]),
        ),
        SafetyRule::new(Conceptual, "Null Checks", structural(S::NullCheckAfterNew)),
        SafetyRule::new(Conceptual, "Top-level Types", structural(S::TopLevelTypes)),
        SafetyRule::new(Conceptual, "Reserved Names", structural(S::ReservedNames)),
        SafetyRule::new(
            Programmatic,
            "OS / Process",
            TokenSeqs(vec![
                lits(&["ProcessBuilder"]),
                lits(&["Runtime", ".", "getRuntime"]),
            ]),
        ),
        SafetyRule::new(
            Programmatic,
            "File / Network I/O",
            TokenSeqs(vec![
                lits(&["new", "FileReader"]),
                lits(&["new", "FileWriter"]),
                lits(&["new", "FileInputStream"]),
                lits(&["new", "FileOutputStream"]),
                lits(&["new", "RandomAccessFile"]),
                lits(&["new", "Socket"]),
                lits(&["new", "ServerSocket"]),
                lits(&["new", "DatagramSocket"]),
                lits(&["URLConnection"]),
                lits(&["HttpURLConnection"]),
                lits(&["Files", ".", "write"]),
                lits(&["Files", ".", "delete"]),
                lits(&["Files", ".", "move"]),
                lits(&["Files", ".", "copy"]),
                lits(&["Files", ".", "createFile"]),
                lits(&["Files", ".", "createDirectories"]),
                lits(&["Files", ".", "readAllBytes"]),
                lits(&["Files", ".", "readAllLines"]),
                lits(&["Files", ".", "newInputStream"]),
                lits(&["Files", ".", "newOutputStream"]),
                lits(&["Files", ".", "newBufferedReader"]),
                lits(&["Files", ".", "newBufferedWriter"]),
            ]),
        ),
        SafetyRule::new(
            Programmatic,
            "Printing / Logging",
            TokenSeqs(vec![
                lits(&["System", ".", "out", ".", "println"]),
                lits(&["System", ".", "out", ".", "printf"]),
                lits(&["System", ".", "out", ".", "print"]),
                lits(&["System", ".", "err", ".", "println"]),
                lits(&["System", ".", "err", ".", "printf"]),
                lits(&["System", ".", "err", ".", "print"]),
                lits(&["Logger"]),
                lits(&[".", "log", "("]),
            ]),
        ),
        SafetyRule::new(
            Programmatic,
            "Threading / Sync APIs",
            TokenSeqs(vec![
                lits(&["Executor"]),
                lits(&["ExecutorService"]),
                lits(&["Executors"]),
                lits(&["Semaphore"]),
                lits(&["Lock"]),
                lits(&["ReentrantLock"]),
                lits(&["CountDownLatch"]),
                lits(&["Thread"]),
                lits(&["synchronized"]),
            ]),
        ),
        SafetyRule::new(Programmatic, "Non-local Writes", structural(S::NonLocalWrites)),
        SafetyRule::new(
            Programmatic,
            "Non-local Mutators",
            structural(S::NonLocalMutators),
        ),
        SafetyRule::new(Programmatic, "Stub Conflicts", structural(S::StubConflicts)),
    ]
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

struct Scanned<'a> {
    src: &'a str,
    toks: Vec<Token>,
    texts: Vec<&'a str>,
}

impl<'a> Scanned<'a> {
    fn new(src: &'a str) -> Self {
        let toks = lex::code_tokens(src);
        let texts = toks.iter().map(|t| t.text(src)).collect();
        Scanned { src, toks, texts }
    }

    fn excerpt(&self, first: usize, last: usize) -> String {
        self.src[self.toks[first].start..self.toks[last].end].to_string()
    }
}

/// Match `pattern` at consecutive token positions; returns (first, last)
/// token index of the first match.
fn match_seq(s: &Scanned<'_>, pattern: &[Pat], from: usize) -> Option<(usize, usize)> {
    'outer: for start in from..s.texts.len() {
        let mut i = start;
        for pat in pattern {
            match pat {
                Pat::Lit(t) => {
                    if s.texts.get(i) != Some(&t.as_str()) {
                        continue 'outer;
                    }
                    i += 1;
                }
                Pat::AnyString => {
                    if s.toks.get(i).map(|t| t.kind) != Some(TokKind::StrLit) {
                        continue 'outer;
                    }
                    i += 1;
                }
                Pat::BalancedParens => {
                    if s.texts.get(i) != Some(&"(") {
                        continue 'outer;
                    }
                    let mut depth = 0usize;
                    loop {
                        match s.texts.get(i) {
                            Some(&"(") => depth += 1,
                            Some(&")") => {
                                depth -= 1;
                                if depth == 0 {
                                    break;
                                }
                            }
                            Some(_) => {}
                            None => continue 'outer,
                        }
                        i += 1;
                    }
                    i += 1;
                }
            }
        }
        return Some((start, i - 1));
    }
    None
}

/// Dotted identifier chains (`a.b.c`) in the token stream, with the
/// first token index of each.
fn dotted_chains(s: &Scanned<'_>) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.texts.len() {
        if s.toks[i].kind == TokKind::Ident {
            let start = i;
            let mut parts = vec![s.texts[i]];
            while s.texts.get(i + 1) == Some(&".")
                && s.toks.get(i + 2).map(|t| t.kind) == Some(TokKind::Ident)
            {
                i += 2;
                parts.push(s.texts[i]);
            }
            if parts.len() > 1 {
                out.push((start, i, parts.join(".")));
            }
        }
        i += 1;
    }
    out
}

/// Everything a structural predicate can see about a template.
struct Ctx<'a> {
    template: &'a Template,
    snippet: Scanned<'a>,
    preamble_text: String,
    /// Names declared by the snippet or its preamble.
    local: BTreeSet<String>,
}

impl<'a> Ctx<'a> {
    fn new(template: &'a Template) -> Self {
        let snippet = Scanned::new(&template.snippet);
        let preamble_text = template.preamble.join("\n");
        let mut local = segment::scan_identifiers(&template.snippet).declared;
        for line in &template.preamble {
            local.extend(segment::scan_identifiers(line).declared);
        }
        Ctx {
            template,
            snippet,
            preamble_text,
            local,
        }
    }
}

fn check_rule(rule: &SafetyRule, ctx: &Ctx<'_>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut hit = |excerpt: String| {
        out.push(Violation {
            tier: rule.tier,
            category: rule.category.clone(),
            excerpt,
        });
    };
    let preamble = Scanned::new(&ctx.preamble_text);
    match &rule.matcher {
        Matcher::TokenSeqs(seqs) => {
            for seq in seqs {
                for s in [&ctx.snippet, &preamble] {
                    if let Some((a, b)) = match_seq(s, seq, 0) {
                        hit(s.excerpt(a, b));
                    }
                }
            }
        }
        Matcher::ImportPrefixes(prefixes) => {
            for import in &ctx.template.imports {
                if prefixes.iter().any(|p| import.starts_with(p.as_str())) {
                    hit(format!("import {import};"));
                }
            }
            for (a, b, chain) in dotted_chains(&ctx.snippet) {
                if prefixes.iter().any(|p| chain.starts_with(p.as_str())) {
                    hit(ctx.snippet.excerpt(a, b));
                }
            }
        }
        Matcher::Structural(kind) => {
            structural(*kind, rule, ctx, &preamble, &mut out);
        }
    }
    out
}

fn structural(
    kind: Structural,
    rule: &SafetyRule,
    ctx: &Ctx<'_>,
    preamble: &Scanned<'_>,
    out: &mut Vec<Violation>,
) {
    let mut hit = |excerpt: String| {
        out.push(Violation {
            tier: rule.tier,
            category: rule.category.clone(),
            excerpt,
        });
    };
    let s = &ctx.snippet;
    match kind {
        Structural::OptionalMisuse => {
            for seq in [
                lits(&[".", "findFirst", "(", ")", ".", "get", "("]),
                lits(&[".", "findAny", "(", ")", ".", "get", "("]),
                vec![
                    Pat::Lit(".".into()),
                    Pat::Lit("reduce".into()),
                    Pat::BalancedParens,
                    Pat::Lit(".".into()),
                    Pat::Lit("get".into()),
                    Pat::Lit("(".into()),
                ],
            ] {
                if let Some((a, b)) = match_seq(s, &seq, 0) {
                    hit(s.excerpt(a, b));
                }
            }
            // Bare get() on a local whose declared type is Optional-like.
            let types = segment::scan_identifiers(&ctx.template.snippet).declared_types;
            for (var, ty) in types {
                if ty.trim_start().starts_with("Optional") {
                    let seq = lits(&[&var, ".", "get", "("]);
                    if let Some((a, b)) = match_seq(s, &seq, 0) {
                        hit(s.excerpt(a, b));
                    }
                }
            }
        }
        Structural::NullCheckAfterNew => {
            // Names assigned a fresh allocation anywhere in the template.
            let mut newly: BTreeSet<&str> = BTreeSet::new();
            for sc in [s, preamble] {
                for i in 0..sc.texts.len() {
                    if sc.toks[i].kind == TokKind::Ident
                        && sc.texts.get(i + 1) == Some(&"=")
                        && sc.texts.get(i + 2) == Some(&"new")
                    {
                        newly.insert(sc.texts[i]);
                    }
                }
            }
            for name in newly {
                for seq in [
                    lits(&[name, "==", "null"]),
                    lits(&["null", "==", name]),
                    lits(&[name, "!=", "null"]),
                    lits(&["null", "!=", name]),
                ] {
                    if let Some((a, b)) = match_seq(s, &seq, 0) {
                        hit(s.excerpt(a, b));
                    }
                }
            }
        }
        Structural::TopLevelTypes => {
            for kw in ["class", "interface", "enum"] {
                if let Some((a, b)) = match_seq(s, &lits(&[kw]), 0) {
                    hit(s.excerpt(a, b.min(a + 3).min(s.texts.len() - 1)));
                }
            }
        }
        Structural::ReservedNames => {
            for name in &ctx.local {
                if jdk::is_core_type(name) {
                    hit(name.clone());
                }
            }
        }
        Structural::StringBuilderToString => {
            let builder = match_seq(s, &lits(&["StringBuilder"]), 0).is_some()
                || match_seq(preamble, &lits(&["StringBuilder"]), 0).is_some();
            if builder {
                if let Some((a, b)) = match_seq(s, &lits(&[".", "toString", "("]), 0) {
                    hit(s.excerpt(a, b));
                }
            }
        }
        Structural::NonLocalWrites => {
            for (root, a, b) in write_targets(s) {
                if !ctx.local.contains(root) {
                    hit(s.excerpt(a, b));
                }
            }
        }
        Structural::NonLocalMutators => {
            const PREFIXES: &[&str] = &["set", "put", "add", "remove", "update"];
            for i in 0..s.texts.len() {
                if s.texts[i] != "." || s.texts.get(i + 2) != Some(&"(") {
                    continue;
                }
                let Some(member) = s.texts.get(i + 1) else { continue };
                if s.toks[i + 1].kind != TokKind::Ident
                    || !PREFIXES.iter().any(|p| member.starts_with(p))
                {
                    continue;
                }
                let Some(root_idx) = chain_root(s, i) else { continue };
                if !ctx.local.contains(s.texts[root_idx]) {
                    hit(s.excerpt(root_idx, i + 2));
                }
            }
        }
        Structural::StubConflicts => {
            for stub in &ctx.template.stubs {
                if let Some(name) = stub_name(stub) {
                    if jdk::is_core_type(name) {
                        hit(name.to_string());
                    }
                }
            }
        }
    }
}

/// Root identifier of the receiver chain ending just before the `.` at
/// token index `dot`. Only plain `a.b.c` chains resolve; call results
/// and indexed receivers yield `None` (their roots are checked at their
/// own sites).
fn chain_root(s: &Scanned<'_>, dot: usize) -> Option<usize> {
    if dot == 0 || s.toks[dot - 1].kind != TokKind::Ident {
        return None;
    }
    let mut k = dot - 1;
    while k >= 2 && s.texts[k - 1] == "." && s.toks[k - 2].kind == TokKind::Ident {
        k -= 2;
    }
    Some(k)
}

/// Assignment and increment targets: (root name, first token, last token).
fn write_targets<'a>(s: &'a Scanned<'_>) -> Vec<(&'a str, usize, usize)> {
    const ASSIGN_OPS: &[&str] = &[
        "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
    ];
    let mut out = Vec::new();
    for i in 0..s.texts.len() {
        if ASSIGN_OPS.contains(&s.texts[i]) {
            // Find the lvalue root to the left.
            let mut j = i;
            // Skip a balanced index suffix.
            while j >= 1 && s.texts[j - 1] == "]" {
                let mut depth = 0usize;
                let mut k = j - 1;
                loop {
                    match s.texts[k] {
                        "]" => depth += 1,
                        "[" => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                }
                j = k;
            }
            if j == 0 || s.toks[j - 1].kind != TokKind::Ident {
                continue;
            }
            let mut k = j - 1;
            let mut dotted = false;
            while k >= 2 && s.texts[k - 1] == "." && s.toks[k - 2].kind == TokKind::Ident {
                k -= 2;
                dotted = true;
            }
            let indexed = j != i;
            if s.texts[i] == "=" && !dotted && !indexed {
                // `T x = ...` declares; a bare `x = ...` with no type
                // token before it reassigns.
                let declares = k >= 1
                    && (s.toks[k - 1].kind == TokKind::Ident
                        || lex::is_primitive_type(s.texts[k - 1])
                        || s.texts[k - 1] == ">"
                        || s.texts[k - 1] == "]");
                if declares {
                    continue;
                }
            }
            out.push((s.texts[k], k, i));
        } else if s.texts[i] == "++" || s.texts[i] == "--" {
            if i >= 1 && s.toks[i - 1].kind == TokKind::Ident {
                let root = chain_root(s, i).unwrap_or(i - 1);
                out.push((s.texts[root], root, i));
            } else if s.toks.get(i + 1).map(|t| t.kind) == Some(TokKind::Ident) {
                out.push((s.texts[i + 1], i, i + 1));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

/// Run every rule against one template. Conceptual tier first, then
/// programmatic; all violations are collected.
pub fn filter_template(template: &Template, ruleset: &Ruleset) -> SafetyVerdict {
    let ctx = Ctx::new(template);
    let mut violations = Vec::new();
    for tier in [Tier::Conceptual, Tier::Programmatic] {
        for rule in ruleset.rules.iter().filter(|r| r.tier == tier) {
            violations.extend(check_rule(rule, &ctx));
        }
    }
    SafetyVerdict {
        accepted: violations.is_empty(),
        violations,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Distinct-category counts over rejected templates.
    pub by_category: std::collections::BTreeMap<String, usize>,
}

/// Filter a pool, dropping rejected templates. Retained templates carry
/// their (accepting) verdict. Idempotent: filtering an already filtered
/// pool changes nothing.
pub fn filter_pool(pool: &TemplatePool, ruleset: &Ruleset) -> (TemplatePool, FilterStats) {
    let mut stats = FilterStats::default();
    let mut templates = Vec::new();
    for t in &pool.templates {
        let verdict = filter_template(t, ruleset);
        if verdict.accepted {
            stats.accepted += 1;
            let mut t = t.clone();
            t.verdict = Some(verdict);
            templates.push(t);
        } else {
            stats.rejected += 1;
            let cats: BTreeSet<&String> =
                verdict.violations.iter().map(|v| &v.category).collect();
            for c in cats {
                *stats.by_category.entry(c.clone()).or_insert(0) += 1;
            }
        }
    }
    (
        TemplatePool {
            templates,
            built_from: pool.built_from.clone(),
            size_cap: pool.size_cap,
        },
        stats,
    )
}

#[allow(dead_code)]
fn origin_of(pool: &TemplatePool) -> &CorpusOrigin {
    &pool.built_from
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{NameMetadata, Provenance};

    fn tpl(snippet: &str) -> Template {
        Template {
            snippet: snippet.to_string(),
            imports: vec![],
            preamble: vec![],
            stubs: vec![],
            names: NameMetadata::default(),
            provenance: Provenance {
                unit_id: "t".into(),
                start: 0,
                end: snippet.len(),
            },
            verdict: None,
        }
    }

    fn categories(snippet: &str) -> Vec<String> {
        let v = filter_template(&tpl(snippet), &Ruleset::default());
        let mut cats: Vec<String> = v.violations.into_iter().map(|x| x.category).collect();
        cats.dedup();
        cats
    }

    #[test]
    fn safe_statement_accepted() {
        let v = filter_template(&tpl("int a = b + 1;"), &Ruleset::default());
        assert!(v.accepted);
        assert!(v.violations.is_empty());
    }

    #[test]
    fn dangerous_calls_rejected() {
        assert!(categories("System.exit(0);").contains(&"Dangerous Calls".to_string()));
        assert!(categories("Runtime.getRuntime().exec(cmd);")
            .contains(&"Dangerous Calls".to_string()));
        assert!(categories("Class.forName(\"x\");").contains(&"Dangerous Calls".to_string()));
    }

    #[test]
    fn control_flow_rejected() {
        for s in ["return x;", "throw e;", "break;", "continue;"] {
            assert!(
                categories(s).contains(&"Control Flow".to_string()),
                "{s}"
            );
        }
    }

    #[test]
    fn comments_and_strings_do_not_fire() {
        let v = filter_template(
            &tpl("String s = \"System.exit(0)\"; // return early"),
            &Ruleset::default(),
        );
        assert!(
            v.violations.iter().all(|x| x.category != "Dangerous Calls"
                && x.category != "Control Flow"),
            "{:?}",
            v.violations
        );
    }

    #[test]
    fn violations_collected_across_rules() {
        let v = filter_template(
            &tpl("if (true) { System.exit(0); return; }"),
            &Ruleset::default(),
        );
        let cats: BTreeSet<&str> =
            v.violations.iter().map(|x| x.category.as_str()).collect();
        assert!(cats.contains("Dangerous Calls"));
        assert!(cats.contains("Control Flow"));
        // Conceptual violations precede programmatic ones.
        let tiers: Vec<Tier> = v.violations.iter().map(|x| x.tier).collect();
        let first_prog = tiers.iter().position(|t| *t == Tier::Programmatic);
        if let Some(p) = first_prog {
            assert!(tiers[..p].iter().all(|t| *t == Tier::Conceptual));
        }
    }

    #[test]
    fn optional_misuse_variants() {
        assert!(categories("int x = xs.stream().reduce(0, Integer::sum).get();")
            .contains(&"Optional Misuse".to_string()));
        assert!(categories("String s = xs.stream().findFirst().get();")
            .contains(&"Optional Misuse".to_string()));
        assert!(categories("Optional<String> o = maybe(); String s = o.get();")
            .contains(&"Optional Misuse".to_string()));
    }

    #[test]
    fn null_check_after_new() {
        assert!(
            categories("Widget x = new Widget(); boolean b = x == null;")
                .contains(&"Null Checks".to_string())
        );
        assert!(!categories("boolean b = y == null;").contains(&"Null Checks".to_string()));
    }

    #[test]
    fn non_local_write_and_mutator() {
        assert!(categories("cache.total = cache.total + 1;")
            .contains(&"Non-local Writes".to_string()));
        assert!(categories("registry.addListener(l);")
            .contains(&"Non-local Mutators".to_string()));
        // Local targets are fine.
        let v = filter_template(&tpl("int i = 0; i = i + 1;"), &Ruleset::default());
        assert!(
            v.violations.iter().all(|x| x.category != "Non-local Writes"),
            "{:?}",
            v.violations
        );
    }

    #[test]
    fn printing_rejected() {
        assert!(categories("System.out.println(x);")
            .contains(&"Printing / Logging".to_string()));
    }

    #[test]
    fn unsafe_equality_literal_receiver() {
        assert!(categories("boolean b = \"abc\".equals(obj);")
            .contains(&"Unsafe Equality".to_string()));
    }

    #[test]
    fn stub_conflict_detected() {
        let mut t = tpl("Object x = List.make();");
        t.stubs = vec!["class List { List(Object... a) {} static Object make(Object... a) { return null; } }".into()];
        let v = filter_template(&t, &Ruleset::default());
        assert!(v
            .violations
            .iter()
            .any(|x| x.category == "Stub Conflicts"));
    }

    #[test]
    fn filter_pool_idempotent() {
        let pool = TemplatePool {
            templates: vec![tpl("int a = b + 1;"), tpl("return a;")],
            built_from: CorpusOrigin::Directory { path: "x".into() },
            size_cap: None,
        };
        let rs = Ruleset::default();
        let (once, stats) = filter_pool(&pool, &rs);
        assert_eq!(stats.accepted, 1);
        assert_eq!(stats.rejected, 1);
        assert_eq!(stats.by_category.get("Control Flow"), Some(&1));
        let (twice, stats2) = filter_pool(&once, &rs);
        assert_eq!(once, twice);
        assert_eq!(stats2.rejected, 0);
    }

    #[test]
    fn override_rules_extend_builtins() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("rules.json");
        std::fs::write(
            &path,
            r#"[{"tier":"programmatic","category":"House Style","pattern":"Telemetry . record ("}]"#,
        )
        .expect("write");
        let mut rs = Ruleset::default();
        let builtin_count = rs.rules().len();
        rs.extend_from_file(&path).expect("loads");
        assert_eq!(rs.rules().len(), builtin_count + 1);
        assert!(categories("int a = 1;").is_empty());
        let v = filter_template(&tpl("Telemetry.record(x);"), &rs);
        assert!(v.violations.iter().any(|x| x.category == "House Style"));
        // Builtins still present.
        let v2 = filter_template(&tpl("return x;"), &rs);
        assert!(!v2.accepted);
    }
}
