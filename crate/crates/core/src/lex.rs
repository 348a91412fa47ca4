//! Lossless lexical scanner for Java source text.
//!
//! The scanner is the substrate for statement segmentation, identifier
//! classification, safety matching, and the similarity metrics. It is
//! deliberately tolerant: unterminated strings, chars, and comments are
//! scanned to end of input instead of failing, so that arbitrary corpus
//! fragments remain processable.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Keyword,
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    Punct,
    LineComment,
    BlockComment,
    Whitespace,
}

impl TokKind {
    /// Trivia tokens carry no code meaning.
    pub fn is_trivia(self) -> bool {
        matches!(
            self,
            TokKind::LineComment | TokKind::BlockComment | TokKind::Whitespace
        )
    }

    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokKind::IntLit | TokKind::FloatLit | TokKind::StrLit | TokKind::CharLit
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

/// Reserved words of the Java language. Contextual keywords (`var`,
/// `record`, `yield`, ...) are scanned as identifiers.
pub const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.binary_search(&s).is_ok()
}

pub const PRIMITIVE_TYPES: &[&str] = &[
    "boolean", "byte", "char", "double", "float", "int", "long", "short",
];

pub fn is_primitive_type(s: &str) -> bool {
    PRIMITIVE_TYPES.contains(&s)
}

/// Multi-character operators, longest first so maximal munch works by
/// scanning the list in order.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

/// Scan `src` into a lossless token stream: concatenating all token
/// slices reproduces the input byte for byte.
pub fn scan(src: &str) -> Vec<Token> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let c = bytes[i];
        let kind = if c.is_ascii_whitespace() {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            TokKind::Whitespace
        } else if c == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            TokKind::LineComment
        } else if c == b'/' && i + 1 < bytes.len() && bytes[i + 1] == b'*' {
            i += 2;
            while i < bytes.len() {
                if bytes[i] == b'*' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            TokKind::BlockComment
        } else if c == b'"' {
            i += 1;
            // Text blocks (""") are treated as ordinary strings; the
            // empty-string case falls out naturally.
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                if bytes[i] == b'\\' && i + 1 < bytes.len() {
                    i += 1;
                }
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'"' {
                i += 1;
            }
            TokKind::StrLit
        } else if c == b'\'' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'\'' && bytes[i] != b'\n' {
                if bytes[i] == b'\\' && i + 1 < bytes.len() {
                    i += 1;
                }
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'\'' {
                i += 1;
            }
            TokKind::CharLit
        } else if c.is_ascii_digit() || (c == b'.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit()) {
            scan_number(bytes, &mut i)
        } else if c.is_ascii_alphabetic() || c == b'_' || c == b'$' || c >= 0x80 {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric()
                    || bytes[i] == b'_'
                    || bytes[i] == b'$'
                    || bytes[i] >= 0x80)
            {
                i += 1;
            }
            if is_keyword(&src[start..i]) {
                TokKind::Keyword
            } else {
                TokKind::Ident
            }
        } else {
            let rest = &src[i..];
            let mut len = 1;
            for op in OPERATORS {
                if rest.starts_with(op) {
                    len = op.len();
                    break;
                }
            }
            i += len;
            TokKind::Punct
        };
        toks.push(Token {
            kind,
            start,
            end: i,
        });
    }
    toks
}

fn scan_number(bytes: &[u8], i: &mut usize) -> TokKind {
    let start = *i;
    let mut float = false;
    if bytes[*i] == b'0' && *i + 1 < bytes.len() && matches!(bytes[*i + 1], b'x' | b'X' | b'b' | b'B')
    {
        *i += 2;
        while *i < bytes.len() && (bytes[*i].is_ascii_hexdigit() || bytes[*i] == b'_') {
            *i += 1;
        }
    } else {
        while *i < bytes.len() && (bytes[*i].is_ascii_digit() || bytes[*i] == b'_') {
            *i += 1;
        }
        if *i < bytes.len() && bytes[*i] == b'.' && *i + 1 < bytes.len() && bytes[*i + 1].is_ascii_digit() {
            float = true;
            *i += 1;
            while *i < bytes.len() && (bytes[*i].is_ascii_digit() || bytes[*i] == b'_') {
                *i += 1;
            }
        } else if bytes[start] == b'.' {
            float = true;
        }
        if *i < bytes.len() && matches!(bytes[*i], b'e' | b'E') {
            let mut j = *i + 1;
            if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                float = true;
                *i = j;
                while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                    *i += 1;
                }
            }
        }
    }
    if *i < bytes.len() {
        match bytes[*i] {
            b'f' | b'F' | b'd' | b'D' => {
                float = true;
                *i += 1;
            }
            b'l' | b'L' => {
                *i += 1;
            }
            _ => {}
        }
    }
    if float {
        TokKind::FloatLit
    } else {
        TokKind::IntLit
    }
}

/// Code tokens of `src`: everything except whitespace and comments.
pub fn code_tokens(src: &str) -> Vec<Token> {
    scan(src).into_iter().filter(|t| !t.kind.is_trivia()).collect()
}

/// Code token texts, for metric computation and subsequence checks.
pub fn code_token_texts(src: &str) -> Vec<String> {
    code_tokens(src)
        .iter()
        .map(|t| t.text(src).to_string())
        .collect()
}

/// Render a token stream for diagnostics.
pub struct TokenDisplay<'a>(pub &'a [Token], pub &'a str);

impl fmt::Display for TokenDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(t.text(self.1))?;
        }
        Ok(())
    }
}

/// 1-based line number of a byte offset.
pub fn line_of(src: &str, offset: usize) -> usize {
    src.as_bytes()[..offset.min(src.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        code_token_texts(src)
    }

    #[test]
    fn lossless_scan() {
        let src = "int a = 1; // c\nfoo(\"x\\\"y\", 'z'); /* b */";
        let toks = scan(src);
        let rebuilt: String = toks.iter().map(|t| t.text(src)).collect();
        assert_eq!(rebuilt, src);
    }

    #[test]
    fn keyword_vs_ident() {
        let t = texts("return records;");
        assert_eq!(t, vec!["return", "records", ";"]);
        let toks = code_tokens("return records;");
        assert_eq!(toks[0].kind, TokKind::Keyword);
        assert_eq!(toks[1].kind, TokKind::Ident);
    }

    #[test]
    fn operators_maximal_munch() {
        let t = texts("a >>>= b >>> c >= d;");
        assert_eq!(t, vec!["a", ">>>=", "b", ">>>", "c", ">=", "d", ";"]);
    }

    #[test]
    fn numbers() {
        let toks = code_tokens("0x1F 1_000 3.14 2e10 1L 2.5f");
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokKind::IntLit,
                TokKind::IntLit,
                TokKind::FloatLit,
                TokKind::FloatLit,
                TokKind::IntLit,
                TokKind::FloatLit
            ]
        );
    }

    #[test]
    fn unterminated_constructs_tolerated() {
        let src = "foo(\"unterminated";
        let toks = scan(src);
        let rebuilt: String = toks.iter().map(|t| t.text(src)).collect();
        assert_eq!(rebuilt, src);
        let src2 = "a /* never closed";
        assert_eq!(scan(src2).last().unwrap().kind, TokKind::BlockComment);
    }

    #[test]
    fn comment_excluded_from_code_tokens() {
        let t = texts("a(); // System.exit(0)\nb();");
        assert_eq!(t, vec!["a", "(", ")", ";", "b", "(", ")", ";"]);
    }
}
