//! Name and scope checker for the embedded front end.
//!
//! Produces the diagnostic classes the repair loop consumes: unresolved
//! classes, variables, and methods, plus duplicate local declarations.
//! Member lookup against JDK types is permissive (the subset does not
//! model full standard-library signatures); lookup against unit-declared
//! classes is exact.

use std::collections::{HashMap, HashSet};

use crate::jdk;
use crate::toolchain::{Diagnostic, SymbolKind};

use super::ast::*;

pub fn check_unit(unit: &Unit) -> Vec<Diagnostic> {
    let mut ck = Checker::new(unit);
    ck.run();
    ck.diags
}

struct Checker<'u> {
    unit: &'u Unit,
    classes: HashMap<String, &'u ClassDecl>,
    imports: HashMap<String, String>,
    wildcard_packages: Vec<String>,
    diags: Vec<Diagnostic>,
    /// Names already reported, to avoid diagnostic floods for one symbol.
    reported: HashSet<(SymbolKind, String)>,
}

/// Lexical scope for locals: one map per block, duplicates checked
/// across the whole method (Java forbids local shadowing of locals).
struct Scope {
    frames: Vec<HashMap<String, TypeRef>>,
}

impl Scope {
    fn new() -> Self {
        Scope { frames: vec![HashMap::new()] }
    }

    fn push(&mut self) {
        self.frames.push(HashMap::new());
    }

    fn pop(&mut self) {
        self.frames.pop();
    }

    fn declare(&mut self, name: &str, ty: TypeRef) -> bool {
        let dup = self.frames.iter().any(|f| f.contains_key(name));
        self.frames
            .last_mut()
            .expect("scope has a frame")
            .insert(name.to_string(), ty);
        !dup
    }

    fn lookup(&self, name: &str) -> Option<&TypeRef> {
        self.frames.iter().rev().find_map(|f| f.get(name))
    }
}

impl<'u> Checker<'u> {
    fn new(unit: &'u Unit) -> Self {
        let mut classes = HashMap::new();
        fn collect<'u>(c: &'u ClassDecl, into: &mut HashMap<String, &'u ClassDecl>) {
            into.insert(c.name.clone(), c);
            for n in &c.nested {
                collect(n, into);
            }
        }
        for c in &unit.types {
            collect(c, &mut classes);
        }
        let mut imports = HashMap::new();
        let mut wildcard_packages = Vec::new();
        for imp in &unit.imports {
            if imp.is_static {
                continue;
            }
            if imp.wildcard {
                wildcard_packages.push(imp.path.clone());
            } else if let Some(simple) = imp.path.rsplit('.').next() {
                imports.insert(simple.to_string(), imp.path.clone());
            }
        }
        Checker {
            unit,
            classes,
            imports,
            wildcard_packages,
            diags: Vec::new(),
            reported: HashSet::new(),
        }
    }

    fn run(&mut self) {
        for class in &self.unit.types {
            self.check_class(class);
        }
    }

    fn report(&mut self, kind: SymbolKind, name: &str) {
        if self.reported.insert((kind, name.to_string())) {
            self.diags.push(Diagnostic::unresolved(kind, name));
        }
    }

    fn report_message(&mut self, message: String) {
        self.diags.push(Diagnostic::error(message));
    }

    /// Is `name` a resolvable class name in this unit?
    fn is_class(&self, name: &str) -> bool {
        if name.contains('.') {
            // Qualified uses are accepted when the path is a known JDK
            // import or its package prefix is a known package.
            return jdk::known_import(name)
                || name.starts_with("java.")
                || name.starts_with("javax.");
        }
        if self.classes.contains_key(name) || self.imports.contains_key(name) {
            return true;
        }
        if jdk::resolve(name).is_some() {
            // java.lang needs no import; other packages need one, or a
            // wildcard import of their package.
            match jdk::resolve(name) {
                Some(None) => return true,
                Some(Some(path)) => {
                    let pkg = path.rsplit_once('.').map(|(p, _)| p).unwrap_or("");
                    return self.wildcard_packages.iter().any(|w| w == pkg);
                }
                None => {}
            }
        }
        // Type variables from skipped generic parameter lists.
        name.len() == 1 && name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
    }

    fn check_type(&mut self, ty: &TypeRef) {
        let name = ty.simple_name().to_string();
        if ty.is_primitive() || ty.name == "void" || crate::lex::is_primitive_type(&ty.name) {
            // primitive, possibly an array of one
        } else if !self.is_class(&name) && !self.is_class(&ty.name) {
            self.report(SymbolKind::Class, &name);
        }
        for arg in &ty.args {
            self.check_type(&arg.clone());
        }
    }

    fn check_class(&mut self, class: &'u ClassDecl) {
        for field in &class.fields {
            self.check_type(&field.ty);
            if let Some(init) = &field.init {
                let mut scope = Scope::new();
                self.check_expr(init, &mut scope, class);
            }
        }
        for method in &class.methods {
            self.check_method(method, class);
        }
        for nested in &class.nested {
            self.check_class(nested);
        }
    }

    fn check_method(&mut self, method: &'u MethodDecl, class: &'u ClassDecl) {
        if method.ret.name != "void" {
            self.check_type(&method.ret);
        }
        let mut scope = Scope::new();
        for p in &method.params {
            self.check_type(&p.ty);
            if !scope.declare(&p.name, p.ty.clone()) {
                self.report_message(format!(
                    "variable {} is already defined in method {}",
                    p.name, method.name
                ));
            }
        }
        if let Some(body) = &method.body {
            scope.push();
            for stmt in body {
                self.check_stmt(stmt, &mut scope, class, method);
            }
            scope.pop();
        }
    }

    fn check_stmt(
        &mut self,
        stmt: &Stmt,
        scope: &mut Scope,
        class: &'u ClassDecl,
        method: &'u MethodDecl,
    ) {
        match stmt {
            Stmt::Local { ty, vars, .. } => {
                self.check_type(ty);
                for var in vars {
                    if let Some(init) = &var.init {
                        self.check_expr(init, scope, class);
                    }
                    let mut vty = ty.clone();
                    vty.dims += var.extra_dims;
                    if !scope.declare(&var.name, vty) {
                        self.report_message(format!(
                            "variable {} is already defined in method {}",
                            var.name, method.name
                        ));
                    }
                }
            }
            Stmt::Expr(e, _) => self.check_expr(e, scope, class),
            Stmt::If {
                cond,
                then,
                otherwise,
            } => {
                self.check_expr(cond, scope, class);
                scope.push();
                self.check_stmt(then, scope, class, method);
                scope.pop();
                if let Some(e) = otherwise {
                    scope.push();
                    self.check_stmt(e, scope, class, method);
                    scope.pop();
                }
            }
            Stmt::While { cond, body } => {
                self.check_expr(cond, scope, class);
                scope.push();
                self.check_stmt(body, scope, class, method);
                scope.pop();
            }
            Stmt::DoWhile { body, cond } => {
                scope.push();
                self.check_stmt(body, scope, class, method);
                scope.pop();
                self.check_expr(cond, scope, class);
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
            } => {
                scope.push();
                if let Some(i) = init {
                    self.check_stmt(i, scope, class, method);
                }
                if let Some(c) = cond {
                    self.check_expr(c, scope, class);
                }
                for u in update {
                    self.check_expr(u, scope, class);
                }
                self.check_stmt(body, scope, class, method);
                scope.pop();
            }
            Stmt::ForEach {
                ty, var, iter, body, ..
            } => {
                self.check_type(ty);
                self.check_expr(iter, scope, class);
                scope.push();
                if !scope.declare(var, ty.clone()) {
                    self.report_message(format!(
                        "variable {} is already defined in method {}",
                        var, method.name
                    ));
                }
                self.check_stmt(body, scope, class, method);
                scope.pop();
            }
            Stmt::Block(stmts) => {
                scope.push();
                for s in stmts {
                    self.check_stmt(s, scope, class, method);
                }
                scope.pop();
            }
            Stmt::Return(value, _) => {
                if let Some(v) = value {
                    self.check_expr(v, scope, class);
                }
            }
            Stmt::Throw(e, _) => self.check_expr(e, scope, class),
            Stmt::Try {
                body,
                catches,
                finally,
            } => {
                scope.push();
                for s in body {
                    self.check_stmt(s, scope, class, method);
                }
                scope.pop();
                for c in catches {
                    self.check_type(&c.ty);
                    scope.push();
                    scope.declare(&c.name, c.ty.clone());
                    for s in &c.body {
                        self.check_stmt(s, scope, class, method);
                    }
                    scope.pop();
                }
                if let Some(f) = finally {
                    scope.push();
                    for s in f {
                        self.check_stmt(s, scope, class, method);
                    }
                    scope.pop();
                }
            }
            Stmt::Break(_) | Stmt::Continue(_) | Stmt::Empty => {}
        }
    }

    /// Static type of an expression when cheaply known; None means
    /// unknown, which downgrades member checks to permissive.
    fn type_of(&self, e: &Expr, scope: &Scope) -> Option<TypeRef> {
        match e {
            Expr::Name(n, _) => scope.lookup(n).cloned().or_else(|| {
                self.unit
                    .types
                    .iter()
                    .flat_map(|c| &c.fields)
                    .find(|f| &f.name == n)
                    .map(|f| f.ty.clone())
            }),
            Expr::New { ty, .. } => Some(ty.clone()),
            Expr::Cast(ty, _) => Some(ty.clone()),
            _ => None,
        }
    }

    fn check_expr(&mut self, e: &Expr, scope: &mut Scope, class: &'u ClassDecl) {
        match e {
            Expr::Name(n, _) => {
                if n == "this" || scope.lookup(n).is_some() {
                    return;
                }
                if class.fields.iter().any(|f| &f.name == n)
                    || self
                        .unit
                        .types
                        .iter()
                        .flat_map(|c| &c.fields)
                        .any(|f| &f.name == n)
                {
                    return;
                }
                if self.is_class(n) {
                    return;
                }
                self.report(SymbolKind::Variable, n);
            }
            Expr::Field { recv, name, .. } => {
                if let Expr::Name(n, _) = recv.as_ref() {
                    if scope.lookup(n).is_none() && self.is_class(n) {
                        // Static field access; exact for unit classes.
                        if let Some(c) = self.classes.get(n.as_str()) {
                            if !c.fields.iter().any(|f| &f.name == name) {
                                self.report(SymbolKind::Variable, name);
                            }
                        }
                        return;
                    }
                }
                self.check_expr(recv, scope, class);
                if let Some(ty) = self.type_of(recv, scope) {
                    if ty.dims > 0 {
                        if name != "length" {
                            self.report(SymbolKind::Variable, name);
                        }
                        return;
                    }
                    if let Some(c) = self.classes.get(ty.simple_name()) {
                        if !c.fields.iter().any(|f| &f.name == name) {
                            self.report(SymbolKind::Variable, name);
                        }
                    }
                }
            }
            Expr::Call {
                recv, name, args, ..
            } => {
                for a in args {
                    self.check_expr(a, scope, class);
                }
                match recv {
                    None => {
                        let found = class_has_method(class, name, args.len())
                            || self
                                .unit
                                .types
                                .iter()
                                .any(|c| class_has_method(c, name, args.len()));
                        if !found {
                            self.report(SymbolKind::Method, name);
                        }
                    }
                    Some(r) => {
                        if let Expr::Name(n, _) = r.as_ref() {
                            if scope.lookup(n).is_none() {
                                if let Some(c) = self.classes.get(n.as_str()) {
                                    if !class_has_method(c, name, args.len()) {
                                        self.report(SymbolKind::Method, name);
                                    }
                                    return;
                                }
                                if self.is_class(n) {
                                    return; // JDK static call, permissive
                                }
                            }
                        }
                        self.check_expr(r, scope, class);
                        if let Some(ty) = self.type_of(r, scope) {
                            if ty.dims == 0 {
                                if let Some(c) = self.classes.get(ty.simple_name()) {
                                    if !class_has_method(c, name, args.len())
                                        && !is_object_method(name)
                                    {
                                        self.report(SymbolKind::Method, name);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Expr::New { ty, args, .. } => {
                self.check_type(ty);
                for a in args {
                    self.check_expr(a, scope, class);
                }
                if let Some(c) = self.classes.get(ty.simple_name()) {
                    let ctors: Vec<_> = c.methods.iter().filter(|m| m.is_ctor).collect();
                    let ok = if ctors.is_empty() {
                        args.is_empty()
                    } else {
                        ctors
                            .iter()
                            .any(|m| arity_matches(m, args.len()))
                    };
                    if !ok {
                        self.report_message(format!(
                            "constructor {} cannot be applied to given types",
                            ty.simple_name()
                        ));
                    }
                }
            }
            Expr::NewArray { elem, dims, init } => {
                self.check_type(elem);
                for d in dims.iter().flatten() {
                    self.check_expr(d, scope, class);
                }
                if let Some(elems) = init {
                    for e in elems {
                        self.check_expr(e, scope, class);
                    }
                }
            }
            Expr::ArrayLit(elems) => {
                for e in elems {
                    self.check_expr(e, scope, class);
                }
            }
            Expr::Index { array, index, .. } => {
                self.check_expr(array, scope, class);
                self.check_expr(index, scope, class);
            }
            Expr::Unary(_, inner) => self.check_expr(inner, scope, class),
            Expr::IncDec { target, .. } => self.check_expr(target, scope, class),
            Expr::Binary { lhs, rhs, .. } => {
                self.check_expr(lhs, scope, class);
                self.check_expr(rhs, scope, class);
            }
            Expr::InstanceOf(inner, ty) => {
                self.check_expr(inner, scope, class);
                self.check_type(ty);
            }
            Expr::Cast(ty, inner) => {
                self.check_type(ty);
                self.check_expr(inner, scope, class);
            }
            Expr::Assign { target, value, .. } => {
                self.check_expr(target, scope, class);
                self.check_expr(value, scope, class);
            }
            Expr::Ternary {
                cond,
                then,
                otherwise,
            } => {
                self.check_expr(cond, scope, class);
                self.check_expr(then, scope, class);
                self.check_expr(otherwise, scope, class);
            }
            Expr::Int(..)
            | Expr::Float(..)
            | Expr::Bool(_)
            | Expr::Char(_)
            | Expr::Str(_)
            | Expr::Null => {}
        }
    }
}

fn arity_matches(m: &MethodDecl, n: usize) -> bool {
    if m.varargs {
        n + 1 >= m.params.len()
    } else {
        n == m.params.len()
    }
}

fn class_has_method(c: &ClassDecl, name: &str, argc: usize) -> bool {
    c.methods
        .iter()
        .any(|m| !m.is_ctor && m.name == name && arity_matches(m, argc))
}

fn is_object_method(name: &str) -> bool {
    matches!(name, "equals" | "hashCode" | "toString" | "getClass")
}
