//! Recursive-descent parser for the embedded Java subset.
//!
//! Works over the lossless token stream with trivia removed. Generic
//! closing angles are split on demand (`>>` inside type arguments), and
//! the local-declaration versus expression ambiguity is settled by
//! checkpointed backtracking. Constructs outside the subset (switch,
//! lambdas, method references, anonymous classes) fail with a parse
//! error naming the construct.

use crate::lex::{self, TokKind, Token};

use super::ast::*;

#[derive(Debug, Clone)]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

pub type PResult<T> = Result<T, ParseError>;

pub fn parse_unit(src: &str) -> PResult<Unit> {
    let toks = lex::code_tokens(src);
    let mut p = Parser {
        src,
        toks,
        i: 0,
        gt_debt: 0,
    };
    p.unit()
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    i: usize,
    /// Outstanding virtual `>` tokens produced by splitting `>>`/`>>>`.
    gt_debt: u32,
}

#[derive(Clone, Copy)]
struct Checkpoint {
    i: usize,
    gt_debt: u32,
}

impl<'a> Parser<'a> {
    fn save(&self) -> Checkpoint {
        Checkpoint {
            i: self.i,
            gt_debt: self.gt_debt,
        }
    }

    fn restore(&mut self, cp: Checkpoint) {
        self.i = cp.i;
        self.gt_debt = cp.gt_debt;
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.start).unwrap_or(self.src.len())
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn done(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn peek(&self) -> &str {
        if self.gt_debt > 0 {
            return ">";
        }
        self.toks
            .get(self.i)
            .map(|t| t.text(self.src))
            .unwrap_or("")
    }

    fn peek_ahead(&self, n: usize) -> &str {
        // Only used outside generic contexts, where gt_debt is zero.
        self.toks
            .get(self.i + n)
            .map(|t| t.text(self.src))
            .unwrap_or("")
    }

    fn peek_kind(&self) -> Option<TokKind> {
        if self.gt_debt > 0 {
            return Some(TokKind::Punct);
        }
        self.toks.get(self.i).map(|t| t.kind)
    }

    fn advance(&mut self) -> &str {
        debug_assert_eq!(self.gt_debt, 0);
        let t = self.toks.get(self.i).map(|t| t.text(self.src)).unwrap_or("");
        self.i += 1;
        t
    }

    fn at(&self, s: &str) -> bool {
        self.peek() == s
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.gt_debt > 0 {
            if s == ">" {
                self.gt_debt -= 1;
                return true;
            }
            return false;
        }
        if self.at(s) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{}`, found `{}`", s, self.peek()))
        }
    }

    /// Consume a `>` in a generic context, splitting `>>`/`>>>`.
    fn eat_gt(&mut self) -> bool {
        if self.gt_debt > 0 {
            self.gt_debt -= 1;
            return true;
        }
        match self.peek() {
            ">" => {
                self.i += 1;
                true
            }
            ">>" => {
                self.i += 1;
                self.gt_debt = 1;
                true
            }
            ">>>" => {
                self.i += 1;
                self.gt_debt = 2;
                true
            }
            _ => false,
        }
    }

    fn ident(&mut self) -> PResult<String> {
        if self.gt_debt == 0 && self.peek_kind() == Some(TokKind::Ident) {
            Ok(self.advance().to_string())
        } else {
            self.err(format!("expected identifier, found `{}`", self.peek()))
        }
    }

    // ---- compilation unit ----

    fn unit(&mut self) -> PResult<Unit> {
        let mut package = None;
        let mut imports = Vec::new();
        let mut types = Vec::new();
        if self.eat("package") {
            package = Some(self.qualified_name()?);
            self.expect(";")?;
        }
        while self.eat("import") {
            let is_static = self.eat("static");
            let mut path = self.ident()?;
            let mut wildcard = false;
            while self.eat(".") {
                if self.eat("*") {
                    wildcard = true;
                    break;
                }
                path.push('.');
                path.push_str(&self.ident()?);
            }
            self.expect(";")?;
            imports.push(Import {
                path,
                is_static,
                wildcard,
            });
        }
        while !self.done() {
            if self.eat(";") {
                continue;
            }
            types.push(self.type_decl()?);
        }
        Ok(Unit {
            package,
            imports,
            types,
        })
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let mut name = self.ident()?;
        while self.at(".") && self.toks.get(self.i + 1).map(|t| t.kind) == Some(TokKind::Ident) {
            self.advance();
            name.push('.');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    fn skip_modifiers(&mut self) -> (bool, bool) {
        let mut is_static = false;
        let mut is_final = false;
        loop {
            match self.peek() {
                "public" | "private" | "protected" | "abstract" | "strictfp" | "native"
                | "synchronized" | "transient" | "volatile" => {
                    self.advance();
                }
                "static" => {
                    is_static = true;
                    self.advance();
                }
                "final" => {
                    is_final = true;
                    self.advance();
                }
                "@" => {
                    self.advance();
                    let _ = self.qualified_name();
                    if self.at("(") {
                        let _ = self.skip_balanced("(", ")");
                    }
                }
                _ => return (is_static, is_final),
            }
        }
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.done() {
                return self.err(format!("unbalanced `{}`", open));
            }
            let t = self.advance();
            if t == open {
                depth += 1;
            } else if t == close {
                depth -= 1;
            }
        }
        Ok(())
    }

    fn type_decl(&mut self) -> PResult<ClassDecl> {
        self.skip_modifiers();
        let is_interface = match self.peek() {
            "class" => {
                self.advance();
                false
            }
            "interface" => {
                self.advance();
                true
            }
            "enum" => return self.err("unsupported construct: enum declaration"),
            other => return self.err(format!("expected type declaration, found `{}`", other)),
        };
        let name = self.ident()?;
        if self.at("<") {
            self.skip_type_params()?;
        }
        while self.eat("extends") || self.eat("implements") {
            loop {
                self.parse_type()?;
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect("{")?;
        let mut decl = ClassDecl {
            name,
            is_interface,
            fields: Vec::new(),
            methods: Vec::new(),
            nested: Vec::new(),
        };
        while !self.eat("}") {
            if self.done() {
                return self.err("unterminated class body");
            }
            if self.eat(";") {
                continue;
            }
            self.member(&mut decl)?;
        }
        Ok(decl)
    }

    fn skip_type_params(&mut self) -> PResult<()> {
        self.expect("<")?;
        let mut depth = 1u32;
        while depth > 0 {
            if self.done() {
                return self.err("unterminated type parameters");
            }
            match self.peek() {
                "<" => {
                    depth += 1;
                    self.advance();
                }
                ">" => {
                    depth -= 1;
                    self.advance();
                }
                ">>" => {
                    depth = depth.saturating_sub(2);
                    self.advance();
                }
                _ => {
                    self.advance();
                }
            }
        }
        Ok(())
    }

    fn member(&mut self, decl: &mut ClassDecl) -> PResult<()> {
        let (is_static, _) = self.skip_modifiers();
        if self.at("class") || self.at("interface") {
            let nested = self.type_decl()?;
            decl.nested.push(nested);
            return Ok(());
        }
        if self.at("{") {
            return self.err("unsupported construct: initializer block");
        }
        if self.at("<") {
            self.skip_type_params()?;
        }
        // Constructor: class-name followed by `(`.
        if self.peek() == decl.name && self.peek_ahead(1) == "(" {
            let name = self.ident()?;
            let (params, varargs) = self.params()?;
            if self.eat("throws") {
                loop {
                    self.parse_type()?;
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            let body = Some(self.block()?);
            decl.methods.push(MethodDecl {
                name,
                params,
                ret: TypeRef::simple("void"),
                body,
                is_static,
                is_ctor: true,
                varargs,
            });
            return Ok(());
        }
        let ty = if self.eat("void") {
            TypeRef::simple("void")
        } else {
            self.parse_type()?
        };
        let name = self.ident()?;
        if self.at("(") {
            let (params, varargs) = self.params()?;
            if self.eat("throws") {
                loop {
                    self.parse_type()?;
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            let body = if self.eat(";") { None } else { Some(self.block()?) };
            decl.methods.push(MethodDecl {
                name,
                params,
                ret: ty,
                body,
                is_static,
                is_ctor: false,
                varargs,
            });
        } else {
            // Field declaration, possibly multiple declarators.
            let mut cur_name = name;
            loop {
                let mut fty = ty.clone();
                while self.eat("[") {
                    self.expect("]")?;
                    fty.dims += 1;
                }
                let init = if self.eat("=") {
                    Some(self.var_init()?)
                } else {
                    None
                };
                decl.fields.push(FieldDecl {
                    name: cur_name,
                    ty: fty,
                    init,
                    is_static,
                });
                if self.eat(",") {
                    cur_name = self.ident()?;
                } else {
                    break;
                }
            }
            self.expect(";")?;
        }
        Ok(())
    }

    fn params(&mut self) -> PResult<(Vec<Param>, bool)> {
        self.expect("(")?;
        let mut params = Vec::new();
        let mut varargs = false;
        if !self.eat(")") {
            loop {
                self.skip_modifiers();
                let mut ty = self.parse_type()?;
                if self.eat("...") {
                    varargs = true;
                    ty.dims += 1;
                }
                let name = self.ident()?;
                while self.eat("[") {
                    self.expect("]")?;
                    ty.dims += 1;
                }
                params.push(Param { ty, name });
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        Ok((params, varargs))
    }

    // ---- types ----

    fn parse_type(&mut self) -> PResult<TypeRef> {
        let mut name = if lex::is_primitive_type(self.peek()) {
            self.advance().to_string()
        } else if self.gt_debt == 0 && self.peek_kind() == Some(TokKind::Ident) {
            self.ident()?
        } else {
            return self.err(format!("expected type, found `{}`", self.peek()));
        };
        let primitive = lex::is_primitive_type(&name);
        let mut args = Vec::new();
        if !primitive {
            while self.at(".")
                && self.toks.get(self.i + 1).map(|t| t.kind) == Some(TokKind::Ident)
            {
                self.advance();
                name.push('.');
                name.push_str(&self.ident()?);
            }
            if self.at("<") {
                args = self.type_args()?;
            }
        }
        let mut dims = 0;
        loop {
            let cp = self.save();
            if self.eat("[") {
                if self.eat("]") {
                    dims += 1;
                    continue;
                }
                self.restore(cp);
            }
            break;
        }
        Ok(TypeRef { name, args, dims })
    }

    fn type_args(&mut self) -> PResult<Vec<TypeRef>> {
        self.expect("<")?;
        let mut args = Vec::new();
        if self.eat_gt() {
            return Ok(args); // diamond
        }
        loop {
            if self.eat("?") {
                let mut bound = TypeRef::simple("Object");
                if self.eat("extends") || self.eat("super") {
                    bound = self.parse_type()?;
                }
                args.push(bound);
            } else {
                args.push(self.parse_type()?);
            }
            if self.eat(",") {
                continue;
            }
            if self.eat_gt() {
                return Ok(args);
            }
            return self.err(format!("expected `>` in type arguments, found `{}`", self.peek()));
        }
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.eat("}") {
            if self.done() {
                return self.err("unterminated block");
            }
            stmts.push(self.statement()?);
        }
        Ok(stmts)
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        match self.peek() {
            "{" => Ok(Stmt::Block(self.block()?)),
            ";" => {
                self.advance();
                Ok(Stmt::Empty)
            }
            "if" => {
                self.advance();
                self.expect("(")?;
                let cond = self.expr()?;
                self.expect(")")?;
                let then = Box::new(self.statement()?);
                let otherwise = if self.eat("else") {
                    Some(Box::new(self.statement()?))
                } else {
                    None
                };
                Ok(Stmt::If {
                    cond,
                    then,
                    otherwise,
                })
            }
            "while" => {
                self.advance();
                self.expect("(")?;
                let cond = self.expr()?;
                self.expect(")")?;
                let body = Box::new(self.statement()?);
                Ok(Stmt::While { cond, body })
            }
            "do" => {
                self.advance();
                let body = Box::new(self.statement()?);
                self.expect("while")?;
                self.expect("(")?;
                let cond = self.expr()?;
                self.expect(")")?;
                self.expect(";")?;
                Ok(Stmt::DoWhile { body, cond })
            }
            "for" => self.for_statement(),
            "return" => {
                self.advance();
                let value = if self.at(";") { None } else { Some(self.expr()?) };
                self.expect(";")?;
                Ok(Stmt::Return(value, pos))
            }
            "break" => {
                self.advance();
                self.expect(";")?;
                Ok(Stmt::Break(pos))
            }
            "continue" => {
                self.advance();
                self.expect(";")?;
                Ok(Stmt::Continue(pos))
            }
            "throw" => {
                self.advance();
                let e = self.expr()?;
                self.expect(";")?;
                Ok(Stmt::Throw(e, pos))
            }
            "try" => self.try_statement(),
            "switch" => self.err("unsupported construct: switch"),
            "synchronized" => self.err("unsupported construct: synchronized block"),
            "assert" => self.err("unsupported construct: assert"),
            _ => {
                if let Some(local) = self.try_local_decl()? {
                    return Ok(local);
                }
                let e = self.expr()?;
                self.expect(";")?;
                Ok(Stmt::Expr(e, pos))
            }
        }
    }

    fn for_statement(&mut self) -> PResult<Stmt> {
        self.expect("for")?;
        self.expect("(")?;
        // Enhanced for: `Type name : expr`.
        let cp = self.save();
        match self.try_foreach_header() {
            Ok(stmt) => return stmt,
            Err(_) => self.restore(cp),
        }
        let init = if self.eat(";") {
            None
        } else if let Some(local) = self.try_local_decl()? {
            Some(Box::new(local))
        } else {
            let e = self.expr()?;
            let pos = e.pos();
            self.expect(";")?;
            Some(Box::new(Stmt::Expr(e, pos)))
        };
        let cond = if self.at(";") { None } else { Some(self.expr()?) };
        self.expect(";")?;
        let mut update = Vec::new();
        if !self.at(")") {
            loop {
                update.push(self.expr()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        let body = Box::new(self.statement()?);
        Ok(Stmt::For {
            init,
            cond,
            update,
            body,
        })
    }

    fn try_foreach_header(&mut self) -> PResult<PResult<Stmt>> {
        let pos = self.pos();
        self.skip_modifiers();
        let ty = self.parse_type()?;
        let var = self.ident()?;
        if !self.eat(":") {
            return self.err("not a foreach");
        }
        Ok((|| {
            let iter = self.expr()?;
            self.expect(")")?;
            let body = Box::new(self.statement()?);
            Ok(Stmt::ForEach {
                ty,
                var,
                iter,
                body,
                pos,
            })
        })())
    }

    fn try_statement(&mut self) -> PResult<Stmt> {
        self.expect("try")?;
        if self.at("(") {
            return self.err("unsupported construct: try-with-resources");
        }
        let body = self.block()?;
        let mut catches = Vec::new();
        while self.eat("catch") {
            self.expect("(")?;
            self.skip_modifiers();
            let mut ty = self.parse_type()?;
            while self.eat("|") {
                // Multi-catch collapses to the first alternative.
                let _ = self.parse_type()?;
                ty = ty.clone();
            }
            let name = self.ident()?;
            self.expect(")")?;
            let cbody = self.block()?;
            catches.push(CatchClause {
                ty,
                name,
                body: cbody,
            });
        }
        let finally = if self.eat("finally") {
            Some(self.block()?)
        } else {
            None
        };
        if catches.is_empty() && finally.is_none() {
            return self.err("try without catch or finally");
        }
        Ok(Stmt::Try {
            body,
            catches,
            finally,
        })
    }

    /// Attempt `final? Type name (= init)? (, name (= init)?)* ;`.
    fn try_local_decl(&mut self) -> PResult<Option<Stmt>> {
        let cp = self.save();
        let pos = self.pos();
        self.skip_modifiers();
        let ty = match self.parse_type() {
            Ok(t) => t,
            Err(_) => {
                self.restore(cp);
                return Ok(None);
            }
        };
        if self.gt_debt != 0 || self.peek_kind() != Some(TokKind::Ident) {
            self.restore(cp);
            return Ok(None);
        }
        let mut vars = Vec::new();
        loop {
            let name = match self.ident() {
                Ok(n) => n,
                Err(_) => {
                    self.restore(cp);
                    return Ok(None);
                }
            };
            let mut extra_dims = 0;
            while self.at("[") && self.peek_ahead(1) == "]" {
                self.advance();
                self.advance();
                extra_dims += 1;
            }
            let init = if self.eat("=") {
                match self.var_init() {
                    Ok(e) => Some(e),
                    Err(e) => {
                        // Committed: `Type name =` cannot be an expression.
                        return Err(e);
                    }
                }
            } else {
                None
            };
            vars.push(Declarator {
                name,
                extra_dims,
                init,
            });
            if self.eat(",") {
                continue;
            }
            if self.eat(";") {
                return Ok(Some(Stmt::Local { ty, vars, pos }));
            }
            self.restore(cp);
            return Ok(None);
        }
    }

    fn var_init(&mut self) -> PResult<Expr> {
        if self.at("{") {
            self.advance();
            let mut elems = Vec::new();
            if !self.eat("}") {
                loop {
                    elems.push(self.var_init()?);
                    if self.eat(",") {
                        if self.eat("}") {
                            break;
                        }
                        continue;
                    }
                    self.expect("}")?;
                    break;
                }
            }
            Ok(Expr::ArrayLit(elems))
        } else {
            self.expr()
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        self.assignment()
    }

    fn assignment(&mut self) -> PResult<Expr> {
        let lhs = self.ternary()?;
        let pos = self.pos();
        let op = match self.peek() {
            "=" => None,
            "+=" => Some(BinOp::Add),
            "-=" => Some(BinOp::Sub),
            "*=" => Some(BinOp::Mul),
            "/=" => Some(BinOp::Div),
            "%=" => Some(BinOp::Rem),
            "&=" => Some(BinOp::BitAnd),
            "|=" => Some(BinOp::BitOr),
            "^=" => Some(BinOp::BitXor),
            "<<=" => Some(BinOp::Shl),
            ">>=" => Some(BinOp::Shr),
            ">>>=" => Some(BinOp::Ushr),
            _ => return Ok(lhs),
        };
        self.advance();
        let value = self.assignment()?;
        Ok(Expr::Assign {
            target: Box::new(lhs),
            op,
            value: Box::new(value),
            pos,
        })
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if self.eat("?") {
            let then = self.expr()?;
            self.expect(":")?;
            let otherwise = self.ternary()?;
            Ok(Expr::Ternary {
                cond: Box::new(cond),
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            })
        } else {
            Ok(cond)
        }
    }

    fn binary(&mut self, min_level: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let (op, level) = match self.peek() {
                "||" => (BinOp::Or, 0),
                "&&" => (BinOp::And, 1),
                "|" => (BinOp::BitOr, 2),
                "^" => (BinOp::BitXor, 3),
                "&" => (BinOp::BitAnd, 4),
                "==" => (BinOp::Eq, 5),
                "!=" => (BinOp::Ne, 5),
                "<" => (BinOp::Lt, 6),
                ">" => (BinOp::Gt, 6),
                "<=" => (BinOp::Le, 6),
                ">=" => (BinOp::Ge, 6),
                "instanceof" => {
                    if min_level > 6 {
                        return Ok(lhs);
                    }
                    self.advance();
                    let ty = self.parse_type()?;
                    // Pattern variable, if present, is ignored.
                    if self.gt_debt == 0 && self.peek_kind() == Some(TokKind::Ident) {
                        let _ = self.ident();
                    }
                    lhs = Expr::InstanceOf(Box::new(lhs), ty);
                    continue;
                }
                "<<" => (BinOp::Shl, 7),
                ">>" => (BinOp::Shr, 7),
                ">>>" => (BinOp::Ushr, 7),
                "+" => (BinOp::Add, 8),
                "-" => (BinOp::Sub, 8),
                "*" => (BinOp::Mul, 9),
                "/" => (BinOp::Div, 9),
                "%" => (BinOp::Rem, 9),
                _ => return Ok(lhs),
            };
            if level < min_level {
                return Ok(lhs);
            }
            let pos = self.pos();
            self.advance();
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek() {
            "!" => {
                self.advance();
                Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)))
            }
            "~" => {
                self.advance();
                Ok(Expr::Unary(UnOp::BitNot, Box::new(self.unary()?)))
            }
            "-" => {
                self.advance();
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)))
            }
            "+" => {
                self.advance();
                Ok(Expr::Unary(UnOp::Plus, Box::new(self.unary()?)))
            }
            "++" | "--" => {
                let inc = self.advance() == "++";
                let target = self.unary()?;
                Ok(Expr::IncDec {
                    target: Box::new(target),
                    inc,
                    prefix: true,
                    pos,
                })
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            let pos = self.pos();
            if self.at(".") {
                if self.peek_ahead(1) == "new" {
                    return self.err("unsupported construct: qualified new");
                }
                self.advance();
                if self.at("<") {
                    self.skip_type_params()?;
                }
                let name = self.ident()?;
                if self.at("(") {
                    let args = self.call_args()?;
                    e = Expr::Call {
                        recv: Some(Box::new(e)),
                        name,
                        args,
                        pos,
                    };
                } else {
                    e = Expr::Field {
                        recv: Box::new(e),
                        name,
                        pos,
                    };
                }
            } else if self.at("[") {
                self.advance();
                let index = self.expr()?;
                self.expect("]")?;
                e = Expr::Index {
                    array: Box::new(e),
                    index: Box::new(index),
                    pos,
                };
            } else if self.at("++") || self.at("--") {
                let inc = self.advance() == "++";
                e = Expr::IncDec {
                    target: Box::new(e),
                    inc,
                    prefix: false,
                    pos,
                };
            } else if self.at("::") {
                return self.err("unsupported construct: method reference");
            } else if self.at("->") {
                return self.err("unsupported construct: lambda");
            } else {
                return Ok(e);
            }
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        if self.gt_debt > 0 {
            return self.err("unexpected `>`");
        }
        match self.peek_kind() {
            Some(TokKind::IntLit) => {
                let text = self.advance().to_string();
                return parse_int_lit(&text, pos);
            }
            Some(TokKind::FloatLit) => {
                let text = self.advance().to_string();
                return parse_float_lit(&text, pos);
            }
            Some(TokKind::StrLit) => {
                let text = self.advance().to_string();
                return Ok(Expr::Str(unescape(text.trim_matches('"'))));
            }
            Some(TokKind::CharLit) => {
                let text = self.advance().to_string();
                let inner = unescape(text.trim_matches('\''));
                let c = inner.chars().next().unwrap_or('\0');
                return Ok(Expr::Char(c));
            }
            _ => {}
        }
        match self.peek() {
            "true" => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            "false" => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            "null" => {
                self.advance();
                Ok(Expr::Null)
            }
            "this" => {
                self.advance();
                Ok(Expr::Name("this".into(), pos))
            }
            "super" => self.err("unsupported construct: super"),
            "new" => self.new_expr(),
            "(" => {
                if let Some(cast) = self.try_cast()? {
                    return Ok(cast);
                }
                self.expect("(")?;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => {
                if lex::is_primitive_type(self.peek()) {
                    // e.g. `int.class` is out of subset.
                    return self.err("unsupported construct: primitive class literal");
                }
                if self.peek_kind() == Some(TokKind::Ident) {
                    let name = self.ident()?;
                    if self.at("(") {
                        let args = self.call_args()?;
                        return Ok(Expr::Call {
                            recv: None,
                            name,
                            args,
                            pos,
                        });
                    }
                    return Ok(Expr::Name(name, pos));
                }
                self.err(format!("unexpected token `{}`", self.peek()))
            }
        }
    }

    fn new_expr(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        self.expect("new")?;
        let mut ty = if lex::is_primitive_type(self.peek()) {
            TypeRef::simple(self.advance())
        } else {
            self.parse_type()?
        };
        // parse_type greedily consumed `[]` pairs; they belong to the
        // array allocation, not the element type.
        let empty_dims = ty.dims;
        ty.dims = 0;
        if self.at("[") || empty_dims > 0 {
            let mut dims: Vec<Option<Expr>> = Vec::new();
            while self.at("[") {
                self.advance();
                if self.eat("]") {
                    dims.push(None);
                } else {
                    let e = self.expr()?;
                    self.expect("]")?;
                    dims.push(Some(e));
                }
            }
            for _ in 0..empty_dims {
                dims.push(None);
            }
            let init = if self.at("{") {
                match self.var_init()? {
                    Expr::ArrayLit(elems) => Some(elems),
                    _ => unreachable!(),
                }
            } else {
                None
            };
            if init.is_none() && dims.first().map(|d| d.is_none()).unwrap_or(true) {
                return self.err("array allocation needs a size or initializer");
            }
            return Ok(Expr::NewArray {
                elem: ty,
                dims,
                init,
            });
        }
        let args = self.call_args()?;
        if self.at("{") {
            return self.err("unsupported construct: anonymous class");
        }
        Ok(Expr::New { ty, args, pos })
    }

    /// Cast detection: `(Type) operand` where Type is primitive, an
    /// array, or a reference type followed by a token that can only
    /// start an operand. `(name) - x` stays a subtraction.
    fn try_cast(&mut self) -> PResult<Option<Expr>> {
        let cp = self.save();
        self.expect("(")?;
        let ty = match self.parse_type() {
            Ok(t) => t,
            Err(_) => {
                self.restore(cp);
                return Ok(None);
            }
        };
        if self.gt_debt != 0 || !self.at(")") {
            self.restore(cp);
            return Ok(None);
        }
        self.advance(); // `)`
        let next = self.peek();
        let next_kind = self.peek_kind();
        let operand_start = matches!(next_kind, Some(TokKind::Ident))
            || next_kind.map(|k| k.is_literal()).unwrap_or(false)
            || matches!(next, "(" | "new" | "this" | "!" | "~" | "true" | "false" | "null");
        let strong = ty.is_primitive() || ty.dims > 0 || !ty.args.is_empty();
        let plausible_ref_cast = strong
            || ty
                .simple_name()
                .chars()
                .next()
                .map(|c| c.is_ascii_uppercase())
                .unwrap_or(false);
        let accept = if strong {
            operand_start || matches!(next, "+" | "-")
        } else {
            plausible_ref_cast && operand_start
        };
        if !accept {
            self.restore(cp);
            return Ok(None);
        }
        let operand = self.unary()?;
        Ok(Some(Expr::Cast(ty, Box::new(operand))))
    }
}

fn parse_int_lit(text: &str, pos: usize) -> PResult<Expr> {
    let cleaned: String = text.chars().filter(|&c| c != '_').collect();
    let (body, long) = match cleaned.strip_suffix(['l', 'L']) {
        Some(b) => (b, true),
        None => (cleaned.as_str(), false),
    };
    let value = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).map(|v| v as i64)
    } else if let Some(bin) = body.strip_prefix("0b").or_else(|| body.strip_prefix("0B")) {
        u64::from_str_radix(bin, 2).map(|v| v as i64)
    } else if body.len() > 1 && body.starts_with('0') {
        u64::from_str_radix(&body[1..], 8).map(|v| v as i64)
    } else {
        body.parse::<i64>().or_else(|_| body.parse::<u64>().map(|v| v as i64))
    };
    match value {
        Ok(v) => Ok(Expr::Int(v, long)),
        Err(_) => Err(ParseError {
            pos,
            message: format!("invalid integer literal `{}`", text),
        }),
    }
}

fn parse_float_lit(text: &str, pos: usize) -> PResult<Expr> {
    let cleaned: String = text.chars().filter(|&c| c != '_').collect();
    let (body, is_float) = match cleaned.strip_suffix(['f', 'F']) {
        Some(b) => (b, true),
        None => (
            cleaned.strip_suffix(['d', 'D']).unwrap_or(&cleaned),
            false,
        ),
    };
    body.parse::<f64>()
        .map(|v| Expr::Float(v, is_float))
        .map_err(|_| ParseError {
            pos,
            message: format!("invalid float literal `{}`", text),
        })
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('b') => out.push('\u{8}'),
            Some('f') => out.push('\u{c}'),
            Some('0') => out.push('\0'),
            Some('\\') => out.push('\\'),
            Some('\'') => out.push('\''),
            Some('"') => out.push('"'),
            Some('u') => {
                let hex: String = chars.by_ref().take(4).collect();
                if let Ok(code) = u32::from_str_radix(&hex, 16) {
                    if let Some(ch) = char::from_u32(code) {
                        out.push(ch);
                    }
                }
            }
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> Unit {
        parse_unit(src).unwrap_or_else(|e| panic!("parse failed at {}: {}", e.pos, e.message))
    }

    #[test]
    fn minimal_class() {
        let u = parse_ok("public class A { int x = 1; void m() { x = x + 1; } }");
        assert_eq!(u.types.len(), 1);
        assert_eq!(u.types[0].fields.len(), 1);
        assert_eq!(u.types[0].methods.len(), 1);
    }

    #[test]
    fn generics_with_nested_close() {
        let u = parse_ok(
            "import java.util.*; class A { Map<String, List<Integer>> m() { return null; } }",
        );
        let m = &u.types[0].methods[0];
        assert_eq!(m.ret.name, "Map");
        assert_eq!(m.ret.args.len(), 2);
        assert_eq!(m.ret.args[1].name, "List");
    }

    #[test]
    fn local_vs_expression() {
        let u = parse_ok("class A { void m(int a, int b) { a.b.c = 1; int[] xs = new int[3]; xs[0] = a * b; } }");
        let body = u.types[0].methods[0].body.as_ref().unwrap();
        assert!(matches!(&body[0], Stmt::Expr(Expr::Assign { .. }, _)));
        assert!(matches!(&body[1], Stmt::Local { .. }));
        assert!(matches!(&body[2], Stmt::Expr(Expr::Assign { .. }, _)));
    }

    #[test]
    fn cast_vs_paren() {
        let u = parse_ok("class A { void m(int a, int b) { int x = (a) - b; long y = (long) a; Object o = (String) null; } }");
        let body = u.types[0].methods[0].body.as_ref().unwrap();
        match &body[0] {
            Stmt::Local { vars, .. } => {
                assert!(matches!(vars[0].init, Some(Expr::Binary { op: BinOp::Sub, .. })));
            }
            other => panic!("{:?}", other),
        }
        match &body[1] {
            Stmt::Local { vars, .. } => assert!(matches!(vars[0].init, Some(Expr::Cast(..)))),
            other => panic!("{:?}", other),
        }
        match &body[2] {
            Stmt::Local { vars, .. } => assert!(matches!(vars[0].init, Some(Expr::Cast(..)))),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn control_flow_and_foreach() {
        let u = parse_ok(
            "class A { int sum(int[] xs) { int s = 0; for (int x : xs) { if (x > 0) { s += x; } else { continue; } } for (int i = 0; i < 3; i++) { s--; } while (false) { break; } return s; } }",
        );
        let body = u.types[0].methods[0].body.as_ref().unwrap();
        assert!(matches!(&body[1], Stmt::ForEach { .. }));
        assert!(matches!(&body[2], Stmt::For { .. }));
        assert!(matches!(&body[3], Stmt::While { .. }));
    }

    #[test]
    fn unsupported_constructs_error() {
        assert!(parse_unit("class A { void m() { switch (1) { default: } } }").is_err());
        assert!(parse_unit("class A { void m() { Runnable r = () -> {}; } }").is_err());
        let e = parse_unit("class A { void m() { java.util.function.Supplier<String> s = A::toString; } }")
            .unwrap_err();
        assert!(e.message.contains("unsupported"), "{}", e.message);
    }

    #[test]
    fn literals() {
        let u = parse_ok(
            "class A { long a = 0x1FL; int b = 1_000; double c = 2.5e3; float d = 1.5f; char e = '\\n'; String f = \"a\\tb\"; }",
        );
        let f = &u.types[0].fields;
        assert!(matches!(f[0].init, Some(Expr::Int(31, true))));
        assert!(matches!(f[1].init, Some(Expr::Int(1000, false))));
        assert!(matches!(f[4].init, Some(Expr::Char('\n'))));
        match &f[5].init {
            Some(Expr::Str(s)) => assert_eq!(s, "a\tb"),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn ternary_and_instanceof() {
        let u = parse_ok(
            "import java.util.Map; class A { int m(Object o) { Object o2 = o; int w = (o2 instanceof Map) ? ((Map) o2).size() : 0; return w; } }",
        );
        let body = u.types[0].methods[0].body.as_ref().unwrap();
        match &body[1] {
            Stmt::Local { vars, .. } => {
                assert!(matches!(vars[0].init, Some(Expr::Ternary { .. })))
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn array_allocation_forms() {
        let u = parse_ok(
            "class A { int[] a = new int[3]; int[][] b = new int[2][]; int[] c = new int[] {1, 2}; int[] d = {3, 4}; }",
        );
        let f = &u.types[0].fields;
        assert!(matches!(&f[0].init, Some(Expr::NewArray { dims, .. }) if dims.len() == 1));
        assert!(matches!(&f[1].init, Some(Expr::NewArray { dims, .. }) if dims.len() == 2));
        assert!(matches!(&f[2].init, Some(Expr::NewArray { init: Some(_), .. })));
        assert!(matches!(&f[3].init, Some(Expr::ArrayLit(v)) if v.len() == 2));
    }
}
