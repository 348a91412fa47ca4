//! Syntax tree for the embedded Java subset.
//!
//! The subset covers what the pipeline's probe units contain: top-level
//! classes with fields and methods, block statements, the usual control
//! flow, and an expression grammar without lambdas or method references.
//! Positions are byte offsets into the original source.

#[derive(Debug, Clone)]
pub struct Unit {
    pub package: Option<String>,
    pub imports: Vec<Import>,
    pub types: Vec<ClassDecl>,
}

#[derive(Debug, Clone)]
pub struct Import {
    pub path: String,
    pub is_static: bool,
    pub wildcard: bool,
}

#[derive(Debug, Clone)]
pub struct ClassDecl {
    pub name: String,
    pub is_interface: bool,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub nested: Vec<ClassDecl>,
}

#[derive(Debug, Clone)]
pub struct FieldDecl {
    pub name: String,
    pub ty: TypeRef,
    pub init: Option<Expr>,
    pub is_static: bool,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: TypeRef,
    pub body: Option<Vec<Stmt>>,
    pub is_static: bool,
    pub is_ctor: bool,
    pub varargs: bool,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub ty: TypeRef,
    pub name: String,
}

/// A (possibly generic, possibly array) type use. Qualified names are
/// stored dot-joined; `dims` counts `[]` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRef {
    pub name: String,
    pub args: Vec<TypeRef>,
    pub dims: u32,
}

impl TypeRef {
    pub fn simple(name: &str) -> Self {
        TypeRef {
            name: name.to_string(),
            args: Vec::new(),
            dims: 0,
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.dims == 0 && crate::lex::is_primitive_type(&self.name)
    }

    /// Rightmost segment of a qualified name.
    pub fn simple_name(&self) -> &str {
        self.name.rsplit('.').next().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Local {
        ty: TypeRef,
        vars: Vec<Declarator>,
        pos: usize,
    },
    Expr(Expr, usize),
    If {
        cond: Expr,
        then: Box<Stmt>,
        otherwise: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Vec<Expr>,
        body: Box<Stmt>,
    },
    ForEach {
        ty: TypeRef,
        var: String,
        iter: Expr,
        body: Box<Stmt>,
        pos: usize,
    },
    Block(Vec<Stmt>),
    Return(Option<Expr>, usize),
    Break(usize),
    Continue(usize),
    Throw(Expr, usize),
    Try {
        body: Vec<Stmt>,
        catches: Vec<CatchClause>,
        finally: Option<Vec<Stmt>>,
    },
    Empty,
}

#[derive(Debug, Clone)]
pub struct CatchClause {
    pub ty: TypeRef,
    pub name: String,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Declarator {
    pub name: String,
    pub extra_dims: u32,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Ushr,
    BitAnd,
    BitOr,
    BitXor,
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Plus,
    Not,
    BitNot,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Int(i64, bool),
    Float(f64, bool),
    Bool(bool),
    Char(char),
    Str(String),
    Null,
    Name(String, usize),
    Field {
        recv: Box<Expr>,
        name: String,
        pos: usize,
    },
    Call {
        recv: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
        pos: usize,
    },
    New {
        ty: TypeRef,
        args: Vec<Expr>,
        pos: usize,
    },
    NewArray {
        elem: TypeRef,
        dims: Vec<Option<Expr>>,
        init: Option<Vec<Expr>>,
    },
    ArrayLit(Vec<Expr>),
    Index {
        array: Box<Expr>,
        index: Box<Expr>,
        pos: usize,
    },
    Unary(UnOp, Box<Expr>),
    IncDec {
        target: Box<Expr>,
        inc: bool,
        prefix: bool,
        pos: usize,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        pos: usize,
    },
    InstanceOf(Box<Expr>, TypeRef),
    Cast(TypeRef, Box<Expr>),
    Assign {
        target: Box<Expr>,
        op: Option<BinOp>,
        value: Box<Expr>,
        pos: usize,
    },
    Ternary {
        cond: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

impl Expr {
    pub fn pos(&self) -> usize {
        match self {
            Expr::Name(_, p)
            | Expr::Field { pos: p, .. }
            | Expr::Call { pos: p, .. }
            | Expr::New { pos: p, .. }
            | Expr::Index { pos: p, .. }
            | Expr::IncDec { pos: p, .. }
            | Expr::Binary { pos: p, .. }
            | Expr::Assign { pos: p, .. } => *p,
            Expr::Unary(_, e) | Expr::Cast(_, e) | Expr::InstanceOf(e, _) => e.pos(),
            Expr::Ternary { cond, .. } => cond.pos(),
            _ => 0,
        }
    }
}
