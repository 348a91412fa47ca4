//! Statement segmentation, identifier scanning, and scope tracking.
//!
//! Parsing depth is deliberately lexical: brace/paren depth tracking plus
//! string/comment awareness. Statement boundaries, scope depth, and
//! identifier classes are all this pipeline needs; the compile probe is
//! the ground truth for well-formedness.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::corpus::{SourceUnit, UnitKind};
use crate::lex::{self, is_primitive_type, TokKind, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatementKind {
    /// Block headers, labels, and other non-statement spans.
    None,
    Declaration,
    PureExpression,
    ControlTransfer,
    SideEffectful,
    MethodBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatementSpan {
    pub start: usize,
    pub end: usize,
    pub brace_depth: u32,
    /// Inertness classification used when this span is the statement
    /// preceding a candidate insertion seam.
    pub kind: StatementKind,
    /// Identifies the enclosing executable block; seams only exist
    /// between consecutive spans sharing a block.
    pub block_id: usize,
    /// True for block headers (`if (...)`, `for (...)`, `else`, ...).
    pub is_header: bool,
}

impl StatementSpan {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

#[derive(Debug, Default)]
pub struct Segmentation {
    pub spans: Vec<StatementSpan>,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    /// Top level of a full file: package, imports, type headers.
    Shell,
    /// Directly inside a type body: fields, method signatures.
    TypeBody,
    /// Method body or nested executable block.
    Exec,
}

/// Segment the executable statements of a unit.
///
/// Spans cover semicolon-terminated statements and block headers inside
/// method bodies; comments, type shells, and field declarations are
/// excluded. Spans are non-overlapping and in source order.
pub fn segment_statements(unit: &SourceUnit) -> Segmentation {
    let src = &unit.code;
    let toks = lex::scan(src);
    let sig: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.kind.is_trivia())
        .map(|(i, _)| i)
        .collect();

    let mut seg = Segmentation::default();
    let mut stack: Vec<(Ctx, usize)> = Vec::new();
    let mut next_block = 0usize;
    let top = match unit.kind {
        UnitKind::FullFile => Ctx::Shell,
        UnitKind::FunctionSnippet => Ctx::TypeBody,
    };
    stack.push((top, next_block));
    next_block += 1;

    let mut si = 0usize; // index into sig
    while si < sig.len() {
        let ctx = stack.last().map(|(c, _)| *c).unwrap_or(top);
        let ti = sig[si];
        let tok = toks[ti];
        let text = tok.text(src);
        match ctx {
            Ctx::Shell => {
                if text == "{" {
                    // Stray block at top level; treat as shell.
                    stack.push((Ctx::Shell, next_block));
                    next_block += 1;
                    si += 1;
                } else if text == "}" {
                    if stack.len() > 1 {
                        stack.pop();
                    }
                    si += 1;
                } else if is_type_header_start(&toks, &sig, si, src) {
                    si = skip_to_open_brace(&toks, &sig, si, src);
                    if si < sig.len() {
                        stack.push((Ctx::TypeBody, next_block));
                        next_block += 1;
                        si += 1; // past '{'
                    }
                } else {
                    // package / import / annotation — skip to ';' or next header.
                    si = skip_shell_item(&toks, &sig, si, src);
                }
            }
            Ctx::TypeBody => {
                if text == "}" {
                    stack.pop();
                    si += 1;
                } else if text == ";" {
                    si += 1;
                } else if text == "{" {
                    // instance or static initializer block
                    stack.push((Ctx::Exec, next_block));
                    next_block += 1;
                    si += 1;
                } else if is_type_header_start(&toks, &sig, si, src) {
                    si = skip_to_open_brace(&toks, &sig, si, src);
                    if si < sig.len() {
                        stack.push((Ctx::TypeBody, next_block));
                        next_block += 1;
                        si += 1;
                    }
                } else {
                    si = scan_member(&toks, &sig, si, src, &mut stack, &mut next_block);
                }
            }
            Ctx::Exec => {
                let depth = brace_depth_of(&stack);
                if text == "}" {
                    stack.pop();
                    si += 1;
                } else if text == "{" {
                    stack.push((Ctx::Exec, next_block));
                    next_block += 1;
                    si += 1;
                } else {
                    let block_id = stack.last().map(|(_, b)| *b).unwrap_or(0);
                    si = scan_statement(&toks, &sig, si, src, depth, block_id, &mut seg);
                }
            }
        }
    }
    seg
}

fn brace_depth_of(stack: &[(Ctx, usize)]) -> u32 {
    // The bottom frame is the unit itself, not a brace.
    (stack.len() - 1) as u32
}

fn tok_text<'a>(toks: &[Token], sig: &[usize], si: usize, src: &'a str) -> Option<&'a str> {
    sig.get(si).map(|&ti| toks[ti].text(src))
}

fn is_type_header_start(toks: &[Token], sig: &[usize], si: usize, src: &str) -> bool {
    // Look ahead over modifiers and annotations for class/interface/enum
    // (or the contextual `record Ident (`).
    let mut j = si;
    let mut guard = 0;
    while j < sig.len() && guard < 32 {
        let t = toks[sig[j]].text(src);
        match t {
            "public" | "private" | "protected" | "static" | "final" | "abstract" | "strictfp"
            | "sealed" | "non" => j += 1,
            "@" => {
                j += 2; // @ Ident
                if tok_text(toks, sig, j, src) == Some("(") {
                    j = skip_balanced(toks, sig, j, src, "(", ")");
                }
            }
            "class" | "interface" | "enum" => return true,
            "record" => {
                return tok_text(toks, sig, j + 1, src)
                    .map(is_ident_like)
                    .unwrap_or(false)
                    && tok_text(toks, sig, j + 2, src) == Some("(");
            }
            _ => return false,
        }
        guard += 1;
    }
    false
}

fn is_ident_like(s: &str) -> bool {
    s.chars()
        .next()
        .map(|c| c.is_alphabetic() || c == '_' || c == '$')
        .unwrap_or(false)
        && !lex::is_keyword(s)
}

/// Advance past a balanced delimiter group starting at `si` (which must
/// point at `open`). Returns the index just past the matching close.
fn skip_balanced(toks: &[Token], sig: &[usize], si: usize, src: &str, open: &str, close: &str) -> usize {
    let mut depth = 0i32;
    let mut j = si;
    while j < sig.len() {
        let t = toks[sig[j]].text(src);
        if t == open {
            depth += 1;
        } else if t == close {
            depth -= 1;
            if depth == 0 {
                return j + 1;
            }
        }
        j += 1;
    }
    j
}

fn skip_to_open_brace(toks: &[Token], sig: &[usize], si: usize, src: &str) -> usize {
    let mut j = si;
    while j < sig.len() {
        let t = toks[sig[j]].text(src);
        if t == "{" {
            return j;
        }
        if t == "(" {
            j = skip_balanced(toks, sig, j, src, "(", ")");
            continue;
        }
        if t == ";" {
            // Headerless declaration like `interface X;` — malformed, bail.
            return j + 1;
        }
        j += 1;
    }
    j
}

fn skip_shell_item(toks: &[Token], sig: &[usize], si: usize, src: &str) -> usize {
    let mut j = si;
    while j < sig.len() {
        let t = toks[sig[j]].text(src);
        if t == ";" {
            return j + 1;
        }
        if t == "{" || t == "}" {
            return j;
        }
        if is_type_header_start(toks, sig, j, src) && j != si {
            return j;
        }
        j += 1;
    }
    j
}

/// Scan one type-body member starting at `si`. Pushes an Exec frame when
/// the member turns out to be a method or constructor body.
fn scan_member(
    toks: &[Token],
    sig: &[usize],
    si: usize,
    src: &str,
    stack: &mut Vec<(Ctx, usize)>,
    next_block: &mut usize,
) -> usize {
    let mut j = si;
    let mut saw_assign = false;
    while j < sig.len() {
        let t = toks[sig[j]].text(src);
        match t {
            ";" => return j + 1, // field or abstract method
            "=" => {
                saw_assign = true;
                j += 1;
            }
            "(" => {
                j = skip_balanced(toks, sig, j, src, "(", ")");
            }
            "{" => {
                if saw_assign {
                    // field initializer containing a lambda/anon-class body
                    j = skip_balanced(toks, sig, j, src, "{", "}");
                } else {
                    stack.push((Ctx::Exec, *next_block));
                    *next_block += 1;
                    return j + 1;
                }
            }
            "}" => return j, // malformed member; let the caller pop
            _ => j += 1,
        }
    }
    j
}

const HEADER_KEYWORDS: &[&str] = &[
    "if", "for", "while", "switch", "try", "catch", "finally", "else", "do", "synchronized",
    "case", "default",
];

const CONTROL_TRANSFER: &[&str] = &["return", "throw", "break", "continue", "yield"];

/// Scan one statement in an executable block and record its span.
fn scan_statement(
    toks: &[Token],
    sig: &[usize],
    si: usize,
    src: &str,
    depth: u32,
    block_id: usize,
    seg: &mut Segmentation,
) -> usize {
    let start_tok = toks[sig[si]];
    let first = start_tok.text(src);

    if HEADER_KEYWORDS.contains(&first) {
        return scan_header(toks, sig, si, src, depth, block_id, seg);
    }
    // Label: `ident :` at statement start (but not `case`-like ternary).
    if start_tok.kind == TokKind::Ident
        && tok_text(toks, sig, si + 1, src) == Some(":")
    {
        let end = toks[sig[si + 1]].end;
        push_span(seg, src, start_tok.start, end, depth, block_id, true);
        return si + 2;
    }

    // Simple statement: scan to `;` at relative paren/brace depth zero,
    // consuming balanced braces (lambdas, anon classes, array inits).
    let mut j = si;
    let mut paren = 0i32;
    let mut brace = 0i32;
    while j < sig.len() {
        let t = toks[sig[j]].text(src);
        match t {
            "(" | "[" => paren += 1,
            ")" | "]" => paren -= 1,
            "{" => brace += 1,
            "}" => {
                if brace == 0 {
                    // Unterminated tail region: no span, diagnostic only.
                    seg.diagnostics.push(format!(
                        "unterminated statement near byte {} dropped",
                        start_tok.start
                    ));
                    return j;
                }
                brace -= 1;
            }
            ";" if paren == 0 && brace == 0 => {
                let end = toks[sig[j]].end;
                push_span(seg, src, start_tok.start, end, depth, block_id, false);
                return j + 1;
            }
            _ => {}
        }
        j += 1;
    }
    seg.diagnostics.push(format!(
        "unterminated statement near byte {} dropped",
        start_tok.start
    ));
    j
}

fn scan_header(
    toks: &[Token],
    sig: &[usize],
    si: usize,
    src: &str,
    depth: u32,
    block_id: usize,
    seg: &mut Segmentation,
) -> usize {
    let start = toks[sig[si]].start;
    let first = toks[sig[si]].text(src);
    let mut j = si + 1;
    match first {
        "do" | "finally" | "try" | "else" => {
            if first == "else" && tok_text(toks, sig, j, src) == Some("if") {
                j += 1;
                if tok_text(toks, sig, j, src) == Some("(") {
                    j = skip_balanced(toks, sig, j, src, "(", ")");
                }
            } else if first == "try" && tok_text(toks, sig, j, src) == Some("(") {
                j = skip_balanced(toks, sig, j, src, "(", ")");
            }
        }
        "case" | "default" => {
            while j < sig.len() && tok_text(toks, sig, j, src) != Some(":") {
                j += 1;
            }
            j += 1; // past ':'
            let end = toks[sig[(j - 1).min(sig.len() - 1)]].end;
            push_span(seg, src, start, end, depth, block_id, true);
            return j;
        }
        _ => {
            // if / for / while / switch / catch / synchronized
            if tok_text(toks, sig, j, src) == Some("(") {
                j = skip_balanced(toks, sig, j, src, "(", ")");
            }
        }
    }
    // `while (...)` closing a do-loop ends with ';'.
    if first == "while" && tok_text(toks, sig, j, src) == Some(";") {
        j += 1;
    }
    let end = toks[sig[j - 1]].end;
    push_span(seg, src, start, end, depth, block_id, true);
    j
}

fn push_span(
    seg: &mut Segmentation,
    src: &str,
    start: usize,
    end: usize,
    depth: u32,
    block_id: usize,
    is_header: bool,
) {
    let kind = if is_header {
        StatementKind::None
    } else {
        classify_statement(&src[start..end])
    };
    seg.spans.push(StatementSpan {
        start,
        end,
        brace_depth: depth,
        kind,
        block_id,
        is_header,
    });
}

// ---------------------------------------------------------------------------
// Statement classification
// ---------------------------------------------------------------------------

/// Static methods considered free of observable effects.
const PURE_STATIC_CALLS: &[(&str, &[&str])] = &[
    ("Math", &["*"]),
    ("StrictMath", &["*"]),
    ("Objects", &["hashCode", "hash", "equals", "toString", "isNull", "nonNull", "requireNonNullElse"]),
    ("Arrays", &["hashCode", "deepHashCode", "deepToString", "toString", "asList", "copyOf", "copyOfRange", "stream"]),
    ("Integer", &["valueOf", "parseInt", "toString", "max", "min", "sum", "compare", "toBinaryString", "toHexString", "bitCount"]),
    ("Long", &["valueOf", "parseLong", "toString", "max", "min", "sum", "compare"]),
    ("Double", &["valueOf", "parseDouble", "toString", "max", "min", "sum", "compare", "isNaN", "isFinite", "doubleToRawLongBits", "doubleToLongBits"]),
    ("Float", &["valueOf", "parseFloat", "toString"]),
    ("Boolean", &["valueOf", "parseBoolean", "toString"]),
    ("Character", &["valueOf", "isDigit", "isLetter", "isWhitespace", "toUpperCase", "toLowerCase", "getNumericValue"]),
    ("Short", &["valueOf"]),
    ("Byte", &["valueOf"]),
    ("String", &["valueOf", "format", "join", "copyValueOf"]),
    ("System", &["identityHashCode"]),
    ("List", &["of", "copyOf"]),
    ("Set", &["of", "copyOf"]),
    ("Map", &["of", "copyOf", "entry"]),
    ("Collections", &["unmodifiableList", "unmodifiableMap", "unmodifiableSet", "emptyList", "emptyMap", "emptySet", "singletonList", "singleton", "min", "max", "nCopies"]),
    ("Optional", &["of", "ofNullable", "empty"]),
    ("Stream", &["of", "ofNullable", "empty"]),
];

/// Instance methods considered read-only on any receiver.
const READ_ONLY_INSTANCE_CALLS: &[&str] = &[
    "length",
    "size",
    "isEmpty",
    "isPresent",
    "charAt",
    "substring",
    "indexOf",
    "lastIndexOf",
    "contains",
    "containsKey",
    "containsValue",
    "startsWith",
    "endsWith",
    "trim",
    "strip",
    "toUpperCase",
    "toLowerCase",
    "replace",
    "concat",
    "hashCode",
    "equals",
    "equalsIgnoreCase",
    "compareTo",
    "compareToIgnoreCase",
    "intValue",
    "longValue",
    "doubleValue",
    "floatValue",
    "booleanValue",
    "charValue",
    "split",
    "name",
    "ordinal",
    "get",
    "getKey",
    "getValue",
    "getOrDefault",
    "keySet",
    "entrySet",
    "values",
    "toString",
    "chars",
    "count",
    "min",
    "max",
    "abs",
];

fn is_pure_call(qualifier: Option<&str>, name: &str) -> bool {
    if let Some(q) = qualifier {
        for (ty, methods) in PURE_STATIC_CALLS {
            if *ty == q && (methods.contains(&"*") || methods.contains(&name)) {
                return true;
            }
        }
        // Instance call via a lowercase receiver.
        if q.chars().next().map(|c| c.is_lowercase()).unwrap_or(false) {
            return READ_ONLY_INSTANCE_CALLS.contains(&name);
        }
        false
    } else {
        false
    }
}

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
];

/// Classify a statement's inertness. Headers are classified `None` by the
/// caller; this sees only simple (semicolon-terminated) statements.
pub fn classify_statement(stmt: &str) -> StatementKind {
    let toks = lex::code_tokens(stmt);
    if toks.is_empty() {
        return StatementKind::None;
    }
    let texts: Vec<&str> = toks.iter().map(|t| t.text(stmt)).collect();
    if CONTROL_TRANSFER.contains(&texts[0]) {
        return StatementKind::ControlTransfer;
    }
    if texts[0] == "assert" {
        return StatementKind::SideEffectful;
    }
    if let Some(decl) = parse_declaration(stmt, &toks) {
        let pure = decl
            .initializers
            .iter()
            .all(|range| expr_is_pure(stmt, &toks[range.clone()]));
        return if pure {
            StatementKind::Declaration
        } else {
            StatementKind::SideEffectful
        };
    }
    // Simple local assignment `ident = <pure>;`
    if toks[0].kind == TokKind::Ident && texts.get(1) == Some(&"=") {
        let body = &toks[2..toks.len().saturating_sub(1)];
        return if expr_is_pure(stmt, body) {
            StatementKind::PureExpression
        } else {
            StatementKind::SideEffectful
        };
    }
    let body = &toks[..toks.len().saturating_sub(1)];
    if expr_is_pure(stmt, body) {
        StatementKind::PureExpression
    } else {
        StatementKind::SideEffectful
    }
}

/// True when an expression token slice has no observable effect: no
/// assignments, no increments, and only allowlisted calls.
fn expr_is_pure(src: &str, toks: &[Token]) -> bool {
    let texts: Vec<&str> = toks.iter().map(|t| t.text(src)).collect();
    for (i, t) in texts.iter().enumerate() {
        if ASSIGN_OPS.contains(t) && *t == "=" {
            // `==` is scanned as one token, so a bare `=` is an assignment.
            return false;
        }
        if ASSIGN_OPS.contains(t) && *t != "=" {
            return false;
        }
        if *t == "++" || *t == "--" {
            return false;
        }
        if toks[i].kind == TokKind::Ident && texts.get(i + 1) == Some(&"(") {
            let after_new = i >= 1 && texts[i - 1] == "new";
            if after_new {
                continue; // allocation treated as effect-free
            }
            let qualifier = if i >= 2 && texts[i - 1] == "." {
                Some(texts[i - 2])
            } else {
                None
            };
            if !is_pure_call(qualifier, t) {
                return false;
            }
        }
    }
    true
}

struct DeclInfo {
    names: Vec<String>,
    type_text: String,
    type_names: Vec<String>,
    /// Token ranges of the declarator initializers.
    initializers: Vec<std::ops::Range<usize>>,
}

/// Try to parse `final? Type name (= init)? (, name (= init)?)* ;`.
fn parse_declaration(src: &str, toks: &[Token]) -> Option<DeclInfo> {
    let texts: Vec<&str> = toks.iter().map(|t| t.text(src)).collect();
    let mut i = 0;
    while texts.get(i) == Some(&"final") {
        i += 1;
    }
    let ty_start = i;
    // Base type: primitive keyword or (possibly qualified) identifier.
    match toks.get(i)?.kind {
        TokKind::Keyword if is_primitive_type(texts[i]) => i += 1,
        TokKind::Ident => {
            i += 1;
            while texts.get(i) == Some(&".") && toks.get(i + 1).map(|t| t.kind) == Some(TokKind::Ident)
            {
                i += 2;
            }
        }
        _ => return None,
    }
    // Generic arguments.
    if texts.get(i) == Some(&"<") {
        let mut depth = 0i32;
        while i < texts.len() {
            match texts[i] {
                "<" => depth += 1,
                ">" => {
                    depth -= 1;
                    if depth == 0 {
                        i += 1;
                        break;
                    }
                }
                ">>" => {
                    depth -= 2;
                    if depth <= 0 {
                        i += 1;
                        break;
                    }
                }
                ";" | "=" | "(" => return None,
                _ => {}
            }
            i += 1;
        }
    }
    // Array suffix on the type.
    while texts.get(i) == Some(&"[") && texts.get(i + 1) == Some(&"]") {
        i += 2;
    }
    let ty_end = i;
    if ty_end == ty_start {
        return None;
    }
    // First declarator.
    if toks.get(i)?.kind != TokKind::Ident {
        return None;
    }
    let type_text = src[toks[ty_start].start..toks[ty_end - 1].end].to_string();
    let mut names = vec![texts[i].to_string()];
    i += 1;
    while texts.get(i) == Some(&"[") && texts.get(i + 1) == Some(&"]") {
        i += 2;
    }
    let mut initializers = Vec::new();
    loop {
        match texts.get(i) {
            Some(&"=") => {
                let init_start = i + 1;
                let mut depth = 0i32;
                let mut j = init_start;
                while j < texts.len() {
                    match texts[j] {
                        "(" | "[" | "{" => depth += 1,
                        ")" | "]" | "}" => depth -= 1,
                        "," | ";" if depth == 0 => break,
                        _ => {}
                    }
                    j += 1;
                }
                initializers.push(init_start..j);
                i = j;
            }
            Some(&",") => {
                i += 1;
                if toks.get(i).map(|t| t.kind) != Some(TokKind::Ident) {
                    return None;
                }
                names.push(texts[i].to_string());
                i += 1;
                while texts.get(i) == Some(&"[") && texts.get(i + 1) == Some(&"]") {
                    i += 2;
                }
            }
            Some(&";") | None => break,
            _ => return None,
        }
    }
    let type_names = texts[ty_start..ty_end]
        .iter()
        .filter(|t| t.chars().next().map(|c| c.is_uppercase()).unwrap_or(false))
        .map(|t| t.to_string())
        .collect();
    Some(DeclInfo {
        names,
        type_text,
        type_names,
        initializers,
    })
}

// ---------------------------------------------------------------------------
// Identifier scanning
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct IdSets {
    pub declared: BTreeSet<String>,
    pub referenced: BTreeSet<String>,
    pub type_names: BTreeSet<String>,
    pub method_names: BTreeSet<String>,
    /// Declared variable name → declared type text.
    pub declared_types: BTreeMap<String, String>,
}

/// Classify the identifiers of a statement.
///
/// Heuristics: a capitalized token followed by `(` in `new` position,
/// `<`, `.`, or another identifier is a type name; a token followed by
/// `(` otherwise is a method name; the `Type name` pattern yields a
/// declaration. Keywords and literals are excluded everywhere.
pub fn scan_identifiers(stmt: &str) -> IdSets {
    let toks = lex::code_tokens(stmt);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(stmt)).collect();
    let mut out = IdSets::default();

    let mut expr_ranges: Vec<std::ops::Range<usize>> = Vec::new();
    if let Some(decl) = parse_declaration(stmt, &toks) {
        for n in &decl.names {
            out.declared.insert(n.clone());
            out.declared_types.insert(n.clone(), decl.type_text.clone());
        }
        for t in decl.type_names {
            out.type_names.insert(t);
        }
        expr_ranges.extend(decl.initializers);
    } else {
        expr_ranges.push(0..toks.len());
    }

    for range in expr_ranges {
        scan_expression(stmt, &toks, &texts, range, &mut out);
    }
    out
}

fn scan_expression(
    _stmt: &str,
    toks: &[Token],
    texts: &[&str],
    range: std::ops::Range<usize>,
    out: &mut IdSets,
) {
    let mut i = range.start;
    // Track generic-argument depth opened right after a type name so the
    // capitalized identifiers inside count as types, not references.
    let mut generic_depth = 0i32;
    while i < range.end {
        let t = texts[i];
        let kind = toks[i].kind;
        if kind == TokKind::Keyword {
            if t == "new" {
                // `new Qualified.Type(...)` or `new Type[...]`
                let mut j = i + 1;
                while j < range.end && toks[j].kind == TokKind::Ident {
                    out.type_names.insert(texts[j].to_string());
                    if texts.get(j + 1) == Some(&".") {
                        j += 2;
                    } else {
                        break;
                    }
                }
                i = j + 1;
                continue;
            }
            i += 1;
            continue;
        }
        if generic_depth > 0 {
            match t {
                "<" => generic_depth += 1,
                ">" => generic_depth -= 1,
                ">>" => generic_depth -= 2,
                _ => {
                    if kind == TokKind::Ident && starts_upper(t) {
                        out.type_names.insert(t.to_string());
                    }
                }
            }
            i += 1;
            continue;
        }
        if kind == TokKind::Ident {
            let next = texts.get(i + 1).copied();
            let prev = if i > 0 { Some(texts[i - 1]) } else { None };
            let after_dot = prev == Some(".");
            if next == Some("(") {
                if after_dot || !starts_upper(t) {
                    out.method_names.insert(t.to_string());
                } else {
                    // Capitalized call without `new`: treat as method
                    // (e.g. a constructor-like factory is still a call).
                    out.method_names.insert(t.to_string());
                }
            } else if starts_upper(t)
                && (next == Some(".") || next == Some("<") || matches!(next, Some(n) if is_ident_like(n)))
            {
                out.type_names.insert(t.to_string());
                if next == Some("<") {
                    generic_depth = 1;
                    i += 2;
                    continue;
                }
            } else if !after_dot {
                out.referenced.insert(t.to_string());
            }
        }
        i += 1;
    }
    // A name is either declared or free, not both.
    for d in &out.declared {
        out.referenced.remove(d);
    }
    for t in &out.type_names {
        out.referenced.remove(t);
    }
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().map(|c| c.is_uppercase()).unwrap_or(false)
}

// ---------------------------------------------------------------------------
// Scope tracking
// ---------------------------------------------------------------------------

/// Per-depth sets of names in scope plus the unit's imports.
#[derive(Debug, Default, Clone)]
pub struct ScopeMap {
    depths: Vec<HashSet<String>>,
    pub imports: BTreeSet<String>,
}

impl ScopeMap {
    pub fn new() -> Self {
        ScopeMap {
            depths: vec![HashSet::new()],
            imports: BTreeSet::new(),
        }
    }

    pub fn push_scope(&mut self) {
        self.depths.push(HashSet::new());
    }

    /// Pop back to depth `d`, dropping every name declared deeper.
    pub fn pop_to(&mut self, d: usize) {
        self.depths.truncate(d + 1);
    }

    pub fn pop_scope(&mut self) {
        if self.depths.len() > 1 {
            self.depths.pop();
        }
    }

    pub fn depth(&self) -> usize {
        self.depths.len() - 1
    }

    pub fn declare(&mut self, name: &str) -> bool {
        self.depths
            .last_mut()
            .expect("scope stack never empty")
            .insert(name.to_string())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.depths.iter().any(|s| s.contains(name))
    }

    pub fn declared_at_current(&self, name: &str) -> bool {
        self.depths.last().unwrap().contains(name)
    }

    pub fn flattened(&self) -> BTreeSet<String> {
        self.depths.iter().flatten().cloned().collect()
    }
}

/// Every identifier mentioned anywhere in a unit, plus import simple
/// names. Used as the collision set for conflict-aware renaming; it is a
/// superset of any true scope, so renames are always safe.
pub fn host_identifier_set(code: &str) -> HashSet<String> {
    let toks = lex::code_tokens(code);
    let mut out = HashSet::new();
    for t in &toks {
        if t.kind == TokKind::Ident {
            out.insert(t.text(code).to_string());
        }
    }
    out
}

/// Import declarations present in a unit, as full paths.
pub fn unit_imports(code: &str) -> BTreeSet<String> {
    let toks = lex::code_tokens(code);
    let texts: Vec<&str> = toks.iter().map(|t| t.text(code)).collect();
    let mut out = BTreeSet::new();
    let mut i = 0;
    while i < texts.len() {
        if texts[i] == "import" {
            let mut j = i + 1;
            if texts.get(j) == Some(&"static") {
                j += 1;
            }
            let mut path = String::new();
            while j < texts.len() && texts[j] != ";" {
                path.push_str(texts[j]);
                j += 1;
            }
            if !path.is_empty() {
                out.insert(path);
            }
            i = j;
        }
        i += 1;
    }
    out
}

/// Audit that no identifier is declared twice in any overlapping scope.
pub fn scope_audit(unit: &SourceUnit) -> Result<(), String> {
    let seg = segment_statements(unit);
    let mut scope = ScopeMap::new();
    let mut last_depth = 0u32;
    for span in &seg.spans {
        while (span.brace_depth as usize) > scope.depth() {
            scope.push_scope();
        }
        if span.brace_depth < last_depth {
            scope.pop_to(span.brace_depth as usize);
        }
        last_depth = span.brace_depth;
        if span.is_header {
            continue;
        }
        let ids = scan_identifiers(span.text(&unit.code));
        for name in &ids.declared {
            if scope.contains(name) {
                return Err(format!(
                    "identifier `{name}` declared twice in scope (unit {})",
                    unit.id
                ));
            }
            scope.declare(name);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snippet_unit(code: &str) -> SourceUnit {
        SourceUnit {
            id: "t".into(),
            code: code.into(),
            kind: UnitKind::FunctionSnippet,
        }
    }

    fn span_texts(unit: &SourceUnit) -> Vec<String> {
        segment_statements(unit)
            .spans
            .iter()
            .map(|s| s.text(&unit.code).to_string())
            .collect()
    }

    #[test]
    fn two_terminated_statements() {
        let unit = snippet_unit("void f() { int a = 1; foo(a); }");
        assert_eq!(span_texts(&unit), vec!["int a = 1;", "foo(a);"]);
    }

    #[test]
    fn comment_between_statements_excluded() {
        let unit = snippet_unit("void f() { int a = 1; // note\nfoo(a); }");
        assert_eq!(span_texts(&unit), vec!["int a = 1;", "foo(a);"]);
    }

    #[test]
    fn nested_block_depths() {
        let unit = snippet_unit("void f() { if (x) { y(); } }");
        let seg = segment_statements(&unit);
        assert_eq!(seg.spans.len(), 2);
        assert_eq!(seg.spans[0].text(&unit.code), "if (x)");
        assert!(seg.spans[0].is_header);
        assert_eq!(seg.spans[1].text(&unit.code), "y();");
        assert_eq!(seg.spans[1].brace_depth, seg.spans[0].brace_depth + 1);
    }

    #[test]
    fn type_shell_excluded() {
        let unit = SourceUnit {
            id: "t".into(),
            code: "import java.util.List;\nclass A { int field = 3; void m() { int a = 1; } }".into(),
            kind: UnitKind::FullFile,
        };
        assert_eq!(span_texts(&unit), vec!["int a = 1;"]);
    }

    #[test]
    fn coverage_reconstruction() {
        let unit = SourceUnit {
            id: "t".into(),
            code: "class A { /* doc */ void m() { int a = 1;\n  b(); // x\n  if (a > 0) { c(); } } }"
                .into(),
            kind: UnitKind::FullFile,
        };
        let seg = segment_statements(&unit);
        // Spans are non-overlapping, in order, and slices of the source.
        let mut pos = 0;
        let mut rebuilt = String::new();
        for s in &seg.spans {
            assert!(s.start >= pos);
            rebuilt.push_str(&unit.code[pos..s.start]);
            rebuilt.push_str(s.text(&unit.code));
            pos = s.end;
        }
        rebuilt.push_str(&unit.code[pos..]);
        assert_eq!(rebuilt, unit.code);
    }

    #[test]
    fn classify_control_and_decl() {
        assert_eq!(classify_statement("return x + 1;"), StatementKind::ControlTransfer);
        assert_eq!(classify_statement("int a = 1;"), StatementKind::Declaration);
        assert_eq!(
            classify_statement("List<String> xs = new ArrayList<>();"),
            StatementKind::Declaration
        );
        assert_eq!(
            classify_statement("int n = readLine().length();"),
            StatementKind::SideEffectful
        );
        assert_eq!(classify_statement("foo(a);"), StatementKind::SideEffectful);
        assert_eq!(classify_statement("int y = Math.abs(-3);"), StatementKind::Declaration);
        assert_eq!(classify_statement("x = y + 1;"), StatementKind::PureExpression);
        assert_eq!(classify_statement("x.f = 3;"), StatementKind::SideEffectful);
        assert_eq!(classify_statement("i++;"), StatementKind::SideEffectful);
    }

    #[test]
    fn scan_identifiers_examples() {
        let ids = scan_identifiers("List<String> xs = new ArrayList<>();");
        assert_eq!(ids.declared.iter().collect::<Vec<_>>(), vec!["xs"]);
        assert!(ids.type_names.contains("List"));
        assert!(ids.type_names.contains("String"));
        assert!(ids.type_names.contains("ArrayList"));

        let ids = scan_identifiers("count += helper(x);");
        assert!(ids.referenced.contains("count"));
        assert!(ids.referenced.contains("x"));
        assert!(ids.method_names.contains("helper"));
        assert!(ids.declared.is_empty());
    }

    #[test]
    fn scope_roundtrip() {
        let mut scope = ScopeMap::new();
        scope.declare("a");
        let before = scope.flattened();
        scope.push_scope();
        scope.declare("b");
        scope.pop_scope();
        assert_eq!(scope.flattened(), before);
    }

    #[test]
    fn scope_audit_flags_duplicates() {
        let ok = snippet_unit("void f() { int a = 1; { int b = 2; } int b = 3; }");
        assert!(scope_audit(&ok).is_ok());
        let bad = snippet_unit("void f() { int a = 1; { int a = 2; } }");
        assert!(scope_audit(&bad).is_err());
    }

    #[test]
    fn imports_extracted() {
        let imports = unit_imports("import java.util.List;\nimport static java.lang.Math.abs;\nclass A {}");
        assert!(imports.contains("java.util.List"));
    }
}
