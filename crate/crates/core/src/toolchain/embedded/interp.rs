//! Deterministic tree-walking interpreter for the embedded subset.
//!
//! Implements Java evaluation semantics where they are observable in
//! fixture programs: 32/64-bit wrapping arithmetic, division-by-zero
//! exceptions, numeric promotion, string concatenation and Java-style
//! `toString` formatting, and a small model of the collection, string,
//! math, boxing, optional, and stream APIs used by the weak-use pool.
//! A step budget stands in for a wall-clock timeout.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::toolchain::RunResult;

use super::ast::*;

const STEP_LIMIT: u64 = 20_000_000;

#[derive(Clone)]
pub enum Value {
    Int(i32),
    Long(i64),
    Float(f32),
    Double(f64),
    Bool(bool),
    Char(char),
    Null,
    Str(Rc<String>),
    Array(Rc<RefCell<ArrayVal>>),
    List(Rc<RefCell<Vec<Value>>>),
    SetV(Rc<RefCell<Vec<Value>>>),
    MapV(Rc<RefCell<Vec<(Value, Value)>>>),
    Builder(Rc<RefCell<String>>),
    OptionalV(Rc<Option<Value>>),
    StreamV(Rc<Vec<Value>>),
    Obj(Rc<RefCell<ObjVal>>),
}

pub struct ArrayVal {
    pub elem: String,
    pub data: Vec<Value>,
}

pub struct ObjVal {
    pub class: String,
    pub fields: HashMap<String, Value>,
}

#[derive(Debug, Clone)]
pub struct Thrown {
    pub class: String,
    pub message: Option<String>,
}

impl Thrown {
    fn new(class: &str, message: impl Into<String>) -> Self {
        Thrown {
            class: class.to_string(),
            message: Some(message.into()),
        }
    }
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(Value),
}

type EResult = Result<Value, Thrown>;
type SResult = Result<Flow, Thrown>;

struct Frame {
    scopes: Vec<HashMap<String, Value>>,
    this_val: Option<Value>,
    class: String,
}

impl Frame {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.scopes.iter().rev().find_map(|s| s.get(name).cloned())
    }

    fn assign(&mut self, name: &str, value: Value) -> bool {
        for scope in self.scopes.iter_mut().rev() {
            if let Some(slot) = scope.get_mut(name) {
                *slot = value;
                return true;
            }
        }
        false
    }

    fn declare(&mut self, name: &str, value: Value) {
        self.scopes
            .last_mut()
            .expect("frame has a scope")
            .insert(name.to_string(), value);
    }
}

pub struct Interp<'u> {
    unit: &'u Unit,
    classes: HashMap<&'u str, &'u ClassDecl>,
    statics: RefCell<HashMap<(String, String), Value>>,
    out: RefCell<Vec<u8>>,
    err: RefCell<Vec<u8>>,
    steps: RefCell<u64>,
}

pub fn run_main(unit: &Unit, main_class: &str) -> RunResult {
    let interp = Interp::new(unit);
    let outcome = interp.exec_main(main_class);
    let stdout = interp.out.borrow().clone();
    let mut stderr = interp.err.borrow().clone();
    let (exit, timed_out) = match outcome {
        Ok(()) => (0, false),
        Err(t) if t.class == "__budget" => (-1, true),
        Err(t) => {
            stderr.extend_from_slice(
                format!(
                    "Exception in thread \"main\" {}{}\n",
                    fqn_exception(&t.class),
                    t.message.map(|m| format!(": {m}")).unwrap_or_default()
                )
                .as_bytes(),
            );
            (1, false)
        }
    };
    RunResult {
        stdout,
        stderr,
        exit,
        timed_out,
    }
}

impl<'u> Interp<'u> {
    fn new(unit: &'u Unit) -> Self {
        let mut classes = HashMap::new();
        fn collect<'u>(c: &'u ClassDecl, into: &mut HashMap<&'u str, &'u ClassDecl>) {
            into.insert(c.name.as_str(), c);
            for n in &c.nested {
                collect(n, into);
            }
        }
        for c in &unit.types {
            collect(c, &mut classes);
        }
        Interp {
            unit,
            classes,
            statics: RefCell::new(HashMap::new()),
            out: RefCell::new(Vec::new()),
            err: RefCell::new(Vec::new()),
            steps: RefCell::new(0),
        }
    }

    fn budget(&self) -> Result<(), Thrown> {
        let mut s = self.steps.borrow_mut();
        *s += 1;
        if *s > STEP_LIMIT {
            Err(Thrown {
                class: "__budget".into(),
                message: None,
            })
        } else {
            Ok(())
        }
    }

    fn exec_main(&self, main_class: &str) -> Result<(), Thrown> {
        self.init_statics()?;
        let class = self
            .classes
            .get(main_class)
            .copied()
            .or_else(|| {
                self.unit
                    .types
                    .iter()
                    .find(|c| c.methods.iter().any(|m| m.name == "main" && m.is_static))
            })
            .ok_or_else(|| Thrown::new("NoClassDefFoundError", main_class))?;
        let main = class
            .methods
            .iter()
            .find(|m| m.name == "main" && m.is_static)
            .ok_or_else(|| Thrown::new("NoSuchMethodError", "main"))?;
        let args = Value::Array(Rc::new(RefCell::new(ArrayVal {
            elem: "String".into(),
            data: Vec::new(),
        })));
        self.invoke_user(class, main, None, vec![args])?;
        Ok(())
    }

    fn init_statics(&self) -> Result<(), Thrown> {
        for class in &self.unit.types {
            let frame = &mut Frame {
                scopes: vec![HashMap::new()],
                this_val: None,
                class: class.name.clone(),
            };
            for field in &class.fields {
                if !field.is_static {
                    continue;
                }
                let value = match &field.init {
                    Some(e) => {
                        let v = self.eval(e, frame)?;
                        coerce(&field.ty, v)
                    }
                    None => default_value(&field.ty),
                };
                self.statics
                    .borrow_mut()
                    .insert((class.name.clone(), field.name.clone()), value);
            }
        }
        Ok(())
    }

    fn invoke_user(
        &self,
        class: &'u ClassDecl,
        method: &'u MethodDecl,
        this_val: Option<Value>,
        mut args: Vec<Value>,
    ) -> EResult {
        self.budget()?;
        let mut frame = Frame {
            scopes: vec![HashMap::new()],
            this_val,
            class: class.name.clone(),
        };
        if method.varargs && !method.params.is_empty() {
            let fixed = method.params.len() - 1;
            let rest: Vec<Value> = args.split_off(fixed.min(args.len()));
            // A single array argument in the varargs slot passes through.
            let packed = if rest.len() == 1 && matches!(rest[0], Value::Array(_)) {
                rest.into_iter().next().expect("one element")
            } else {
                Value::Array(Rc::new(RefCell::new(ArrayVal {
                    elem: "Object".into(),
                    data: rest,
                })))
            };
            args.push(packed);
        }
        for (param, arg) in method.params.iter().zip(args) {
            frame.declare(&param.name, coerce(&param.ty, arg));
        }
        let body = match &method.body {
            Some(b) => b,
            None => return Ok(Value::Null),
        };
        frame.scopes.push(HashMap::new());
        for stmt in body {
            match self.exec(stmt, &mut frame)? {
                Flow::Return(v) => return Ok(coerce(&method.ret, v)),
                Flow::Normal => {}
                Flow::Break | Flow::Continue => break,
            }
        }
        Ok(default_value(&method.ret))
    }

    fn construct(&self, class: &'u ClassDecl, args: Vec<Value>) -> EResult {
        let mut fields = HashMap::new();
        for field in &class.fields {
            if !field.is_static {
                fields.insert(field.name.clone(), default_value(&field.ty));
            }
        }
        let obj = Value::Obj(Rc::new(RefCell::new(ObjVal {
            class: class.name.clone(),
            fields,
        })));
        // Field initializers run before the constructor body.
        for field in &class.fields {
            if field.is_static {
                continue;
            }
            if let Some(init) = &field.init {
                let mut frame = Frame {
                    scopes: vec![HashMap::new()],
                    this_val: Some(obj.clone()),
                    class: class.name.clone(),
                };
                let v = self.eval(init, &mut frame)?;
                if let Value::Obj(o) = &obj {
                    o.borrow_mut()
                        .fields
                        .insert(field.name.clone(), coerce(&field.ty, v));
                }
            }
        }
        let ctor = class
            .methods
            .iter()
            .filter(|m| m.is_ctor)
            .find(|m| arity_ok(m, args.len()));
        if let Some(ctor) = ctor {
            self.invoke_user(class, ctor, Some(obj.clone()), args)?;
        }
        Ok(obj)
    }

    // ---- statements ----

    fn exec(&self, stmt: &Stmt, frame: &mut Frame) -> SResult {
        self.budget()?;
        match stmt {
            Stmt::Empty => Ok(Flow::Normal),
            Stmt::Local { ty, vars, .. } => {
                for var in vars {
                    let mut vty = ty.clone();
                    vty.dims += var.extra_dims;
                    let value = match &var.init {
                        Some(Expr::ArrayLit(elems)) => {
                            self.array_from_lit(&vty, elems, frame)?
                        }
                        Some(e) => coerce(&vty, self.eval(e, frame)?),
                        None => default_value(&vty),
                    };
                    frame.declare(&var.name, value);
                }
                Ok(Flow::Normal)
            }
            Stmt::Expr(e, _) => {
                self.eval(e, frame)?;
                Ok(Flow::Normal)
            }
            Stmt::Block(stmts) => {
                frame.scopes.push(HashMap::new());
                let mut flow = Flow::Normal;
                for s in stmts {
                    flow = self.exec(s, frame)?;
                    if !matches!(flow, Flow::Normal) {
                        break;
                    }
                }
                frame.scopes.pop();
                Ok(flow)
            }
            Stmt::If {
                cond,
                then,
                otherwise,
            } => {
                if self.truth(cond, frame)? {
                    self.exec(then, frame)
                } else if let Some(e) = otherwise {
                    self.exec(e, frame)
                } else {
                    Ok(Flow::Normal)
                }
            }
            Stmt::While { cond, body } => {
                while self.truth(cond, frame)? {
                    match self.exec(body, frame)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        _ => {}
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::DoWhile { body, cond } => {
                loop {
                    match self.exec(body, frame)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        _ => {}
                    }
                    if !self.truth(cond, frame)? {
                        break;
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
            } => {
                frame.scopes.push(HashMap::new());
                let result = (|| {
                    if let Some(i) = init {
                        self.exec(i, frame)?;
                    }
                    loop {
                        if let Some(c) = cond {
                            if !self.truth(c, frame)? {
                                break;
                            }
                        }
                        match self.exec(body, frame)? {
                            Flow::Break => break,
                            Flow::Return(v) => return Ok(Flow::Return(v)),
                            _ => {}
                        }
                        for u in update {
                            self.eval(u, frame)?;
                        }
                    }
                    Ok(Flow::Normal)
                })();
                frame.scopes.pop();
                result
            }
            Stmt::ForEach {
                ty, var, iter, body, ..
            } => {
                let iterable = self.eval(iter, frame)?;
                let items: Vec<Value> = match &iterable {
                    Value::Array(a) => a.borrow().data.clone(),
                    Value::List(l) | Value::SetV(l) => l.borrow().clone(),
                    Value::Null => {
                        return Err(Thrown::new(
                            "NullPointerException",
                            "cannot iterate over null",
                        ))
                    }
                    _ => {
                        return Err(Thrown::new(
                            "UnsupportedOperationException",
                            "foreach over unsupported value",
                        ))
                    }
                };
                for item in items {
                    frame.scopes.push(HashMap::new());
                    frame.declare(var, coerce(ty, item));
                    let flow = self.exec(body, frame);
                    frame.scopes.pop();
                    match flow? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        _ => {}
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::Return(value, _) => {
                let v = match value {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::Null,
                };
                Ok(Flow::Return(v))
            }
            Stmt::Break(_) => Ok(Flow::Break),
            Stmt::Continue(_) => Ok(Flow::Continue),
            Stmt::Throw(e, _) => {
                let v = self.eval(e, frame)?;
                match v {
                    Value::Obj(o) => {
                        let o = o.borrow();
                        let message = o.fields.get("message").and_then(|m| match m {
                            Value::Str(s) => Some(s.to_string()),
                            Value::Null => None,
                            other => Some(to_java_string(other)),
                        });
                        Err(Thrown {
                            class: o.class.clone(),
                            message,
                        })
                    }
                    Value::Null => Err(Thrown::new("NullPointerException", "throw of null")),
                    _ => Err(Thrown::new(
                        "UnsupportedOperationException",
                        "throw of non-object",
                    )),
                }
            }
            Stmt::Try {
                body,
                catches,
                finally,
            } => {
                let mut outcome = self.exec(&Stmt::Block(body.clone()), frame);
                if let Err(thrown) = &outcome {
                    if thrown.class != "__budget" {
                        for clause in catches {
                            if catches_class(&clause.ty, &thrown.class) {
                                frame.scopes.push(HashMap::new());
                                let exc = Value::Obj(Rc::new(RefCell::new(ObjVal {
                                    class: thrown.class.clone(),
                                    fields: HashMap::from([(
                                        "message".to_string(),
                                        thrown
                                            .message
                                            .clone()
                                            .map(|m| Value::Str(Rc::new(m)))
                                            .unwrap_or(Value::Null),
                                    )]),
                                })));
                                frame.declare(&clause.name, exc);
                                outcome = self.exec(&Stmt::Block(clause.body.clone()), frame);
                                frame.scopes.pop();
                                break;
                            }
                        }
                    }
                }
                if let Some(f) = finally {
                    let fin = self.exec(&Stmt::Block(f.clone()), frame)?;
                    if !matches!(fin, Flow::Normal) {
                        return Ok(fin);
                    }
                }
                outcome
            }
        }
    }

    fn truth(&self, e: &Expr, frame: &mut Frame) -> Result<bool, Thrown> {
        match self.eval(e, frame)? {
            Value::Bool(b) => Ok(b),
            _ => Err(Thrown::new(
                "UnsupportedOperationException",
                "condition is not boolean",
            )),
        }
    }

    fn array_from_lit(&self, ty: &TypeRef, elems: &[Expr], frame: &mut Frame) -> EResult {
        let mut inner = ty.clone();
        inner.dims = inner.dims.saturating_sub(1);
        let mut data = Vec::with_capacity(elems.len());
        for e in elems {
            let v = match e {
                Expr::ArrayLit(nested) => self.array_from_lit(&inner, nested, frame)?,
                other => coerce(&inner, self.eval(other, frame)?),
            };
            data.push(v);
        }
        Ok(Value::Array(Rc::new(RefCell::new(ArrayVal {
            elem: ty.name.clone(),
            data,
        }))))
    }

    // ---- expressions ----

    fn eval(&self, e: &Expr, frame: &mut Frame) -> EResult {
        self.budget()?;
        match e {
            Expr::Int(v, true) => Ok(Value::Long(*v)),
            Expr::Int(v, false) => Ok(Value::Int(*v as i32)),
            Expr::Float(v, true) => Ok(Value::Float(*v as f32)),
            Expr::Float(v, false) => Ok(Value::Double(*v)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Char(c) => Ok(Value::Char(*c)),
            Expr::Str(s) => Ok(Value::Str(Rc::new(s.clone()))),
            Expr::Null => Ok(Value::Null),
            Expr::Name(n, _) => self.eval_name(n, frame),
            Expr::Field { recv, name, .. } => self.eval_field(recv, name, frame),
            Expr::Call {
                recv, name, args, ..
            } => self.eval_call(recv.as_deref(), name, args, frame),
            Expr::New { ty, args, .. } => self.eval_new(ty, args, frame),
            Expr::NewArray { elem, dims, init } => {
                if let Some(elems) = init {
                    let mut full = elem.clone();
                    full.dims = dims.len() as u32;
                    return self.array_from_lit(&full, elems, frame);
                }
                let mut sizes = Vec::new();
                for d in dims {
                    match d {
                        Some(e) => {
                            let n = as_int(&self.eval(e, frame)?)?;
                            if n < 0 {
                                return Err(Thrown::new(
                                    "NegativeArraySizeException",
                                    n.to_string(),
                                ));
                            }
                            sizes.push(n as usize);
                        }
                        None => break,
                    }
                }
                Ok(self.alloc_array(elem, &sizes, dims.len() as u32))
            }
            Expr::ArrayLit(elems) => {
                let ty = TypeRef {
                    name: "Object".into(),
                    args: Vec::new(),
                    dims: 1,
                };
                self.array_from_lit(&ty, elems, frame)
            }
            Expr::Index { array, index, .. } => {
                let a = self.eval(array, frame)?;
                let i = as_int(&self.eval(index, frame)?)?;
                match a {
                    Value::Array(arr) => {
                        let arr = arr.borrow();
                        arr.data.get(i as usize).cloned().ok_or_else(|| {
                            Thrown::new(
                                "ArrayIndexOutOfBoundsException",
                                format!("Index {} out of bounds for length {}", i, arr.data.len()),
                            )
                        })
                    }
                    Value::Null => Err(Thrown::new("NullPointerException", "index of null array")),
                    _ => Err(Thrown::new(
                        "UnsupportedOperationException",
                        "index of non-array",
                    )),
                }
            }
            Expr::Unary(op, inner) => {
                let v = self.eval(inner, frame)?;
                unary(*op, v)
            }
            Expr::IncDec {
                target,
                inc,
                prefix,
                ..
            } => {
                let old = self.eval(target, frame)?;
                let delta = Value::Int(if *inc { 1 } else { -1 });
                let new = binary(BinOp::Add, old.clone(), delta)?;
                let new = coerce_like(&old, new);
                self.assign_to(target, new.clone(), frame)?;
                Ok(if *prefix { new } else { old })
            }
            Expr::Binary { op, lhs, rhs, .. } => match op {
                BinOp::And => {
                    if self.truth(lhs, frame)? {
                        Ok(Value::Bool(self.truth(rhs, frame)?))
                    } else {
                        Ok(Value::Bool(false))
                    }
                }
                BinOp::Or => {
                    if self.truth(lhs, frame)? {
                        Ok(Value::Bool(true))
                    } else {
                        Ok(Value::Bool(self.truth(rhs, frame)?))
                    }
                }
                _ => {
                    let l = self.eval(lhs, frame)?;
                    let r = self.eval(rhs, frame)?;
                    binary(*op, l, r)
                }
            },
            Expr::InstanceOf(inner, ty) => {
                let v = self.eval(inner, frame)?;
                Ok(Value::Bool(instance_of(&v, ty.simple_name())))
            }
            Expr::Cast(ty, inner) => {
                let v = self.eval(inner, frame)?;
                cast(ty, v)
            }
            Expr::Assign {
                target, op, value, ..
            } => {
                let rhs = self.eval(value, frame)?;
                let result = match op {
                    None => rhs,
                    Some(op) => {
                        let old = self.eval(target, frame)?;
                        let combined = binary(*op, old.clone(), rhs)?;
                        coerce_like(&old, combined)
                    }
                };
                self.assign_to(target, result.clone(), frame)?;
                Ok(result)
            }
            Expr::Ternary {
                cond,
                then,
                otherwise,
            } => {
                if self.truth(cond, frame)? {
                    self.eval(then, frame)
                } else {
                    self.eval(otherwise, frame)
                }
            }
        }
    }

    fn alloc_array(&self, elem: &TypeRef, sizes: &[usize], total_dims: u32) -> Value {
        if sizes.is_empty() {
            return Value::Null;
        }
        let n = sizes[0];
        let data: Vec<Value> = (0..n)
            .map(|_| {
                if sizes.len() > 1 {
                    self.alloc_array(elem, &sizes[1..], total_dims - 1)
                } else if total_dims > 1 {
                    Value::Null
                } else {
                    default_value(elem)
                }
            })
            .collect();
        Value::Array(Rc::new(RefCell::new(ArrayVal {
            elem: elem.name.clone(),
            data,
        })))
    }

    fn eval_name(&self, n: &str, frame: &mut Frame) -> EResult {
        if n == "this" {
            return frame
                .this_val
                .clone()
                .ok_or_else(|| Thrown::new("UnsupportedOperationException", "this in static context"));
        }
        if let Some(v) = frame.lookup(n) {
            return Ok(v);
        }
        if let Some(Value::Obj(o)) = &frame.this_val {
            if let Some(v) = o.borrow().fields.get(n) {
                return Ok(v.clone());
            }
        }
        if let Some(v) = self
            .statics
            .borrow()
            .get(&(frame.class.clone(), n.to_string()))
        {
            return Ok(v.clone());
        }
        Err(Thrown::new(
            "UnsupportedOperationException",
            format!("unresolved name {n}"),
        ))
    }

    fn eval_field(&self, recv: &Expr, name: &str, frame: &mut Frame) -> EResult {
        // Static field access: `ClassName.field`.
        if let Expr::Name(cls, _) = recv {
            if frame.lookup(cls).is_none() {
                if let Some(class) = self.classes.get(cls.as_str()) {
                    if let Some(v) = self
                        .statics
                        .borrow()
                        .get(&(class.name.clone(), name.to_string()))
                    {
                        return Ok(v.clone());
                    }
                }
                if let Some(v) = builtin_static_field(cls, name) {
                    return Ok(v);
                }
            }
        }
        let value = self.eval(recv, frame)?;
        match (&value, name) {
            (Value::Array(a), "length") => Ok(Value::Int(a.borrow().data.len() as i32)),
            (Value::Obj(o), _) => o
                .borrow()
                .fields
                .get(name)
                .cloned()
                .ok_or_else(|| Thrown::new("UnsupportedOperationException", format!("field {name}"))),
            (Value::Null, _) => Err(Thrown::new(
                "NullPointerException",
                format!("field {name} of null"),
            )),
            _ => Err(Thrown::new(
                "UnsupportedOperationException",
                format!("field {name}"),
            )),
        }
    }

    fn eval_args(&self, args: &[Expr], frame: &mut Frame) -> Result<Vec<Value>, Thrown> {
        args.iter().map(|a| self.eval(a, frame)).collect()
    }

    fn eval_call(
        &self,
        recv: Option<&Expr>,
        name: &str,
        args: &[Expr],
        frame: &mut Frame,
    ) -> EResult {
        match recv {
            None => {
                let argv = self.eval_args(args, frame)?;
                let class = self
                    .classes
                    .get(frame.class.as_str())
                    .copied()
                    .ok_or_else(|| Thrown::new("NoClassDefFoundError", frame.class.clone()))?;
                let method = class
                    .methods
                    .iter()
                    .find(|m| !m.is_ctor && m.name == name && arity_ok(m, argv.len()))
                    .ok_or_else(|| {
                        Thrown::new("NoSuchMethodError", format!("{}.{}", class.name, name))
                    })?;
                let this_val = if method.is_static {
                    None
                } else {
                    frame.this_val.clone()
                };
                self.invoke_user(class, method, this_val, argv)
            }
            Some(Expr::Field { recv, name: out, .. })
                if matches!(recv.as_ref(), Expr::Name(s, _) if s == "System")
                    && (out == "out" || out == "err") =>
            {
                // System.out.println / print.
                let argv = self.eval_args(args, frame)?;
                let text = match (name, argv.first()) {
                    ("println", None) => "\n".to_string(),
                    ("println", Some(v)) => format!("{}\n", to_java_string(v)),
                    ("print", Some(v)) => to_java_string(v),
                    ("print", None) => String::new(),
                    _ => {
                        return Err(Thrown::new(
                            "UnsupportedOperationException",
                            format!("System.{out}.{name}"),
                        ))
                    }
                };
                if out == "out" {
                    self.out.borrow_mut().extend_from_slice(text.as_bytes());
                } else {
                    self.err.borrow_mut().extend_from_slice(text.as_bytes());
                }
                Ok(Value::Null)
            }
            Some(r) => {
                // Static call on a (possibly package-qualified) class name.
                let class_recv = match r {
                    Expr::Name(cls, _) => Some(cls.clone()),
                    _ => qualified_class_tail(r),
                };
                if let Some(cls) = &class_recv {
                    if frame.lookup(cls).is_none() {
                        if let Some(class) = self.classes.get(cls.as_str()).copied() {
                            let argv = self.eval_args(args, frame)?;
                            let method = class
                                .methods
                                .iter()
                                .find(|m| !m.is_ctor && m.name == name && arity_ok(m, argv.len()))
                                .ok_or_else(|| {
                                    Thrown::new(
                                        "NoSuchMethodError",
                                        format!("{}.{}", class.name, name),
                                    )
                                })?;
                            return self.invoke_user(class, method, None, argv);
                        }
                        if is_known_class_name(cls) {
                            let argv = self.eval_args(args, frame)?;
                            return builtin_static(cls, name, argv);
                        }
                    }
                }
                let value = self.eval(r, frame)?;
                let argv = self.eval_args(args, frame)?;
                if let Value::Obj(o) = &value {
                    let class_name = o.borrow().class.clone();
                    if let Some(class) = self.classes.get(class_name.as_str()).copied() {
                        if let Some(method) = class
                            .methods
                            .iter()
                            .find(|m| !m.is_ctor && m.name == name && arity_ok(m, argv.len()))
                        {
                            return self.invoke_user(class, method, Some(value.clone()), argv);
                        }
                    }
                }
                builtin_instance(&value, name, argv)
            }
        }
    }

    fn eval_new(&self, ty: &TypeRef, args: &[Expr], frame: &mut Frame) -> EResult {
        let argv = self.eval_args(args, frame)?;
        let name = ty.simple_name();
        if let Some(class) = self.classes.get(name).copied() {
            return self.construct(class, argv);
        }
        builtin_new(name, argv)
    }

    fn assign_to(&self, target: &Expr, value: Value, frame: &mut Frame) -> Result<(), Thrown> {
        match target {
            Expr::Name(n, _) => {
                if frame.assign(n, value.clone()) {
                    return Ok(());
                }
                if let Some(Value::Obj(o)) = &frame.this_val {
                    let mut o = o.borrow_mut();
                    if o.fields.contains_key(n) {
                        o.fields.insert(n.clone(), value);
                        return Ok(());
                    }
                }
                let key = (frame.class.clone(), n.clone());
                if self.statics.borrow().contains_key(&key) {
                    self.statics.borrow_mut().insert(key, value);
                    return Ok(());
                }
                Err(Thrown::new(
                    "UnsupportedOperationException",
                    format!("assignment to unresolved name {n}"),
                ))
            }
            Expr::Field { recv, name, .. } => {
                if let Expr::Name(cls, _) = recv.as_ref() {
                    if frame.lookup(cls).is_none() && self.classes.contains_key(cls.as_str()) {
                        let key = (cls.clone(), name.clone());
                        self.statics.borrow_mut().insert(key, value);
                        return Ok(());
                    }
                }
                let obj = self.eval(recv, frame)?;
                match obj {
                    Value::Obj(o) => {
                        o.borrow_mut().fields.insert(name.clone(), value);
                        Ok(())
                    }
                    Value::Null => Err(Thrown::new(
                        "NullPointerException",
                        format!("field {name} of null"),
                    )),
                    _ => Err(Thrown::new(
                        "UnsupportedOperationException",
                        format!("field write {name}"),
                    )),
                }
            }
            Expr::Index { array, index, .. } => {
                let a = self.eval(array, frame)?;
                let i = as_int(&self.eval(index, frame)?)?;
                match a {
                    Value::Array(arr) => {
                        let mut arr = arr.borrow_mut();
                        let len = arr.data.len();
                        let elem_name = arr.elem.clone();
                        match arr.data.get_mut(i as usize) {
                            Some(slot) => {
                                *slot = coerce(&TypeRef::simple(&elem_name), value);
                                Ok(())
                            }
                            None => Err(Thrown::new(
                                "ArrayIndexOutOfBoundsException",
                                format!("Index {} out of bounds for length {}", i, len),
                            )),
                        }
                    }
                    Value::Null => Err(Thrown::new("NullPointerException", "store to null array")),
                    _ => Err(Thrown::new(
                        "UnsupportedOperationException",
                        "store to non-array",
                    )),
                }
            }
            _ => Err(Thrown::new(
                "UnsupportedOperationException",
                "unsupported assignment target",
            )),
        }
    }
}

/// `java.util.Arrays`-style receiver chain: a Name/Field chain starting
/// with a lowercase package segment. Yields the trailing class name.
fn qualified_class_tail(e: &Expr) -> Option<String> {
    fn segments(e: &Expr, into: &mut Vec<String>) -> bool {
        match e {
            Expr::Name(n, _) => {
                into.push(n.clone());
                true
            }
            Expr::Field { recv, name, .. } => {
                if !segments(recv, into) {
                    return false;
                }
                into.push(name.clone());
                true
            }
            _ => false,
        }
    }
    let mut parts = Vec::new();
    if !segments(e, &mut parts) || parts.len() < 2 {
        return None;
    }
    let first_lower = parts[0]
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_lowercase());
    let tail = parts.last().expect("non-empty");
    if first_lower && is_known_class_name(tail) {
        Some(tail.clone())
    } else {
        None
    }
}

fn arity_ok(m: &MethodDecl, n: usize) -> bool {
    if m.varargs {
        n + 1 >= m.params.len()
    } else {
        n == m.params.len()
    }
}

// ---- values and conversions ----

fn default_value(ty: &TypeRef) -> Value {
    if ty.dims > 0 {
        return Value::Null;
    }
    match ty.name.as_str() {
        "int" | "short" | "byte" => Value::Int(0),
        "long" => Value::Long(0),
        "float" => Value::Float(0.0),
        "double" => Value::Double(0.0),
        "boolean" => Value::Bool(false),
        "char" => Value::Char('\0'),
        "void" => Value::Null,
        _ => Value::Null,
    }
}

/// Coerce a value to a declared type (widening/narrowing between
/// numeric primitives; reference types pass through).
fn coerce(ty: &TypeRef, v: Value) -> Value {
    if ty.dims > 0 {
        return v;
    }
    match ty.name.as_str() {
        "int" | "short" | "byte" | "Integer" => match v {
            Value::Int(_) => v,
            Value::Long(x) => Value::Int(x as i32),
            Value::Char(c) => Value::Int(c as i32),
            Value::Double(d) => Value::Int(d as i32),
            Value::Float(f) => Value::Int(f as i32),
            other => other,
        },
        "long" | "Long" => match v {
            Value::Int(x) => Value::Long(x as i64),
            Value::Char(c) => Value::Long(c as i64),
            Value::Double(d) => Value::Long(d as i64),
            Value::Float(f) => Value::Long(f as i64),
            other => other,
        },
        "double" | "Double" => match v {
            Value::Int(x) => Value::Double(x as f64),
            Value::Long(x) => Value::Double(x as f64),
            Value::Float(f) => Value::Double(f as f64),
            Value::Char(c) => Value::Double(c as u32 as f64),
            other => other,
        },
        "float" | "Float" => match v {
            Value::Int(x) => Value::Float(x as f32),
            Value::Long(x) => Value::Float(x as f32),
            Value::Double(d) => Value::Float(d as f32),
            Value::Char(c) => Value::Float(c as u32 as f32),
            other => other,
        },
        "char" | "Character" => match v {
            Value::Int(x) => Value::Char(char_from_code(x)),
            other => other,
        },
        _ => v,
    }
}

/// Coerce `new` to the primitive family of `like` (used for compound
/// assignment and ++/--, which implicitly narrow in Java).
fn coerce_like(like: &Value, new: Value) -> Value {
    let ty = match like {
        Value::Int(_) => "int",
        Value::Long(_) => "long",
        Value::Float(_) => "float",
        Value::Double(_) => "double",
        Value::Char(_) => "char",
        _ => return new,
    };
    coerce(&TypeRef::simple(ty), new)
}

fn char_from_code(x: i32) -> char {
    char::from_u32((x as u32) & 0xFFFF).unwrap_or('\u{FFFD}')
}

fn as_int(v: &Value) -> Result<i32, Thrown> {
    match v {
        Value::Int(x) => Ok(*x),
        Value::Char(c) => Ok(*c as i32),
        Value::Long(x) => Ok(*x as i32),
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            "integer value expected",
        )),
    }
}

enum Promoted {
    Int(i32, i32),
    Long(i64, i64),
    Float(f32, f32),
    Double(f64, f64),
}

fn promote(l: &Value, r: &Value) -> Option<Promoted> {
    use Value::*;
    let to_d = |v: &Value| match v {
        Int(x) => Some(*x as f64),
        Long(x) => Some(*x as f64),
        Float(x) => Some(*x as f64),
        Double(x) => Some(*x),
        Char(c) => Some(*c as u32 as f64),
        _ => None,
    };
    let to_f = |v: &Value| match v {
        Int(x) => Some(*x as f32),
        Long(x) => Some(*x as f32),
        Float(x) => Some(*x),
        Char(c) => Some(*c as u32 as f32),
        _ => None,
    };
    let to_l = |v: &Value| match v {
        Int(x) => Some(*x as i64),
        Long(x) => Some(*x),
        Char(c) => Some(*c as i64),
        _ => None,
    };
    let to_i = |v: &Value| match v {
        Int(x) => Some(*x),
        Char(c) => Some(*c as i32),
        _ => None,
    };
    if matches!(l, Double(_)) || matches!(r, Double(_)) {
        Some(Promoted::Double(to_d(l)?, to_d(r)?))
    } else if matches!(l, Float(_)) || matches!(r, Float(_)) {
        Some(Promoted::Float(to_f(l)?, to_f(r)?))
    } else if matches!(l, Long(_)) || matches!(r, Long(_)) {
        Some(Promoted::Long(to_l(l)?, to_l(r)?))
    } else {
        Some(Promoted::Int(to_i(l)?, to_i(r)?))
    }
}

fn unary(op: UnOp, v: Value) -> EResult {
    use Value::*;
    match (op, v) {
        (UnOp::Not, Bool(b)) => Ok(Bool(!b)),
        (UnOp::Neg, Int(x)) => Ok(Int(x.wrapping_neg())),
        (UnOp::Neg, Long(x)) => Ok(Long(x.wrapping_neg())),
        (UnOp::Neg, Float(x)) => Ok(Float(-x)),
        (UnOp::Neg, Double(x)) => Ok(Double(-x)),
        (UnOp::Neg, Char(c)) => Ok(Int((c as i32).wrapping_neg())),
        (UnOp::Plus, Char(c)) => Ok(Int(c as i32)),
        (UnOp::Plus, v) => Ok(v),
        (UnOp::BitNot, Int(x)) => Ok(Int(!x)),
        (UnOp::BitNot, Long(x)) => Ok(Long(!x)),
        (UnOp::BitNot, Char(c)) => Ok(Int(!(c as i32))),
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            "unary operand type",
        )),
    }
}

fn binary(op: BinOp, l: Value, r: Value) -> EResult {
    use BinOp::*;
    use Value::*;
    // String concatenation wins for `+` when either side is a String.
    if op == Add {
        if let Str(s) = &l {
            return Ok(Str(Rc::new(format!("{}{}", s, to_java_string(&r)))));
        }
        if let Str(s) = &r {
            return Ok(Str(Rc::new(format!("{}{}", to_java_string(&l), s))));
        }
    }
    match op {
        Eq | Ne => {
            let eq = reference_or_numeric_eq(&l, &r)?;
            return Ok(Bool(if op == Eq { eq } else { !eq }));
        }
        And | Or => {
            // Non-short-circuit forms arrive as BitAnd/BitOr below.
            if let (Bool(a), Bool(b)) = (&l, &r) {
                return Ok(Bool(if op == And { *a && *b } else { *a || *b }));
            }
        }
        _ => {}
    }
    if matches!(op, BitAnd | BitOr | BitXor) {
        if let (Bool(a), Bool(b)) = (&l, &r) {
            return Ok(Bool(match op {
                BitAnd => *a & *b,
                BitOr => *a | *b,
                _ => *a ^ *b,
            }));
        }
    }
    if matches!(op, Shl | Shr | Ushr) {
        let shift = as_int(&r)? as u32;
        return match l {
            Int(x) => Ok(Int(match op {
                Shl => x.wrapping_shl(shift & 31),
                Shr => x.wrapping_shr(shift & 31),
                _ => ((x as u32).wrapping_shr(shift & 31)) as i32,
            })),
            Char(c) => binary(op, Int(c as i32), r),
            Long(x) => Ok(Long(match op {
                Shl => x.wrapping_shl(shift & 63),
                Shr => x.wrapping_shr(shift & 63),
                _ => ((x as u64).wrapping_shr(shift & 63)) as i64,
            })),
            _ => Err(Thrown::new(
                "UnsupportedOperationException",
                "shift operand type",
            )),
        };
    }
    let promoted = promote(&l, &r).ok_or_else(|| {
        Thrown::new(
            "UnsupportedOperationException",
            "binary operand types",
        )
    })?;
    macro_rules! cmp {
        ($a:expr, $b:expr) => {
            match op {
                Lt => return Ok(Bool($a < $b)),
                Le => return Ok(Bool($a <= $b)),
                Gt => return Ok(Bool($a > $b)),
                Ge => return Ok(Bool($a >= $b)),
                _ => {}
            }
        };
    }
    match promoted {
        Promoted::Int(a, b) => {
            cmp!(a, b);
            let v = match op {
                Add => a.wrapping_add(b),
                Sub => a.wrapping_sub(b),
                Mul => a.wrapping_mul(b),
                Div => {
                    if b == 0 {
                        return Err(Thrown::new("ArithmeticException", "/ by zero"));
                    }
                    a.wrapping_div(b)
                }
                Rem => {
                    if b == 0 {
                        return Err(Thrown::new("ArithmeticException", "/ by zero"));
                    }
                    a.wrapping_rem(b)
                }
                BitAnd => a & b,
                BitOr => a | b,
                BitXor => a ^ b,
                _ => {
                    return Err(Thrown::new(
                        "UnsupportedOperationException",
                        "int operator",
                    ))
                }
            };
            Ok(Int(v))
        }
        Promoted::Long(a, b) => {
            cmp!(a, b);
            let v = match op {
                Add => a.wrapping_add(b),
                Sub => a.wrapping_sub(b),
                Mul => a.wrapping_mul(b),
                Div => {
                    if b == 0 {
                        return Err(Thrown::new("ArithmeticException", "/ by zero"));
                    }
                    a.wrapping_div(b)
                }
                Rem => {
                    if b == 0 {
                        return Err(Thrown::new("ArithmeticException", "/ by zero"));
                    }
                    a.wrapping_rem(b)
                }
                BitAnd => a & b,
                BitOr => a | b,
                BitXor => a ^ b,
                _ => {
                    return Err(Thrown::new(
                        "UnsupportedOperationException",
                        "long operator",
                    ))
                }
            };
            Ok(Long(v))
        }
        Promoted::Float(a, b) => {
            cmp!(a, b);
            let v = match op {
                Add => a + b,
                Sub => a - b,
                Mul => a * b,
                Div => a / b,
                Rem => a % b,
                _ => {
                    return Err(Thrown::new(
                        "UnsupportedOperationException",
                        "float operator",
                    ))
                }
            };
            Ok(Float(v))
        }
        Promoted::Double(a, b) => {
            cmp!(a, b);
            let v = match op {
                Add => a + b,
                Sub => a - b,
                Mul => a * b,
                Div => a / b,
                Rem => a % b,
                _ => {
                    return Err(Thrown::new(
                        "UnsupportedOperationException",
                        "double operator",
                    ))
                }
            };
            Ok(Double(v))
        }
    }
}

/// `==` semantics: numeric promotion for primitives, identity for
/// references (string literals are not interned here, so fixtures are
/// expected to compare strings with `.equals`).
fn reference_or_numeric_eq(l: &Value, r: &Value) -> Result<bool, Thrown> {
    use Value::*;
    if let Some(p) = promote(l, r) {
        return Ok(match p {
            Promoted::Int(a, b) => a == b,
            Promoted::Long(a, b) => a == b,
            Promoted::Float(a, b) => a == b,
            Promoted::Double(a, b) => a == b,
        });
    }
    Ok(match (l, r) {
        (Bool(a), Bool(b)) => a == b,
        (Null, Null) => true,
        (Null, _) | (_, Null) => false,
        (Str(a), Str(b)) => Rc::ptr_eq(a, b),
        (Array(a), Array(b)) => Rc::ptr_eq(a, b),
        (List(a), List(b)) => Rc::ptr_eq(a, b),
        (SetV(a), SetV(b)) => Rc::ptr_eq(a, b),
        (MapV(a), MapV(b)) => Rc::ptr_eq(a, b),
        (Builder(a), Builder(b)) => Rc::ptr_eq(a, b),
        (Obj(a), Obj(b)) => Rc::ptr_eq(a, b),
        _ => false,
    })
}

fn instance_of(v: &Value, ty: &str) -> bool {
    use Value::*;
    match v {
        Null => false,
        Str(_) => matches!(ty, "String" | "CharSequence" | "Object" | "Comparable"),
        List(_) => matches!(ty, "List" | "ArrayList" | "Collection" | "Iterable" | "Object"),
        SetV(_) => matches!(ty, "Set" | "HashSet" | "Collection" | "Iterable" | "Object"),
        MapV(_) => matches!(ty, "Map" | "HashMap" | "Object"),
        Array(_) => ty == "Object",
        Int(_) => matches!(ty, "Integer" | "Number" | "Object"),
        Long(_) => matches!(ty, "Long" | "Number" | "Object"),
        Float(_) => matches!(ty, "Float" | "Number" | "Object"),
        Double(_) => matches!(ty, "Double" | "Number" | "Object"),
        Bool(_) => matches!(ty, "Boolean" | "Object"),
        Char(_) => matches!(ty, "Character" | "Object"),
        Builder(_) => matches!(ty, "StringBuilder" | "StringBuffer" | "CharSequence" | "Object"),
        OptionalV(_) => matches!(ty, "Optional" | "Object"),
        StreamV(_) => matches!(ty, "Stream" | "IntStream" | "Object"),
        Obj(o) => ty == "Object" || o.borrow().class == ty,
    }
}

fn cast(ty: &TypeRef, v: Value) -> EResult {
    if ty.dims > 0 {
        return Ok(v);
    }
    match ty.name.as_str() {
        "int" | "short" | "byte" | "long" | "float" | "double" | "char" => Ok(coerce(ty, v)),
        name => {
            if matches!(v, Value::Null) {
                return Ok(v);
            }
            let checked = matches!(
                name,
                "String" | "List" | "Set" | "Map" | "Collection" | "Integer" | "Long" | "Double"
                    | "Boolean" | "Character"
            );
            if checked && !instance_of(&v, name) {
                return Err(Thrown::new(
                    "ClassCastException",
                    format!("cannot cast to {name}"),
                ));
            }
            Ok(v)
        }
    }
}

// ---- Java-style string rendering ----

pub fn to_java_string(v: &Value) -> String {
    use Value::*;
    match v {
        Int(x) => x.to_string(),
        Long(x) => x.to_string(),
        Float(x) => java_float_string(*x),
        Double(x) => java_double_string(*x),
        Bool(b) => b.to_string(),
        Char(c) => c.to_string(),
        Null => "null".to_string(),
        Str(s) => s.to_string(),
        Builder(s) => s.borrow().clone(),
        List(items) | SetV(items) => {
            let inner: Vec<String> =
                items.borrow().iter().map(to_java_string).collect();
            format!("[{}]", inner.join(", "))
        }
        MapV(entries) => {
            let inner: Vec<String> = entries
                .borrow()
                .iter()
                .map(|(k, val)| format!("{}={}", to_java_string(k), to_java_string(val)))
                .collect();
            format!("{{{}}}", inner.join(", "))
        }
        OptionalV(o) => match o.as_ref() {
            Some(inner) => format!("Optional[{}]", to_java_string(inner)),
            None => "Optional.empty".to_string(),
        },
        Array(a) => format!("[{}@{:x}", a.borrow().elem, identity(v) as u32),
        StreamV(_) => format!("java.util.stream.ReferencePipeline@{:x}", identity(v) as u32),
        Obj(o) => format!("{}@{:x}", o.borrow().class, identity(v) as u32),
    }
}

pub fn java_double_string(d: f64) -> String {
    if d.is_nan() {
        return "NaN".to_string();
    }
    if d.is_infinite() {
        return if d > 0.0 { "Infinity" } else { "-Infinity" }.to_string();
    }
    let a = d.abs();
    if d == 0.0 {
        return if d.is_sign_negative() { "-0.0" } else { "0.0" }.to_string();
    }
    if (1e-3..1e7).contains(&a) {
        let mut s = format!("{:?}", d);
        if !s.contains('.') && !s.contains('e') && !s.contains('E') {
            s.push_str(".0");
        }
        if let Some(stripped) = rewrite_exponent(&s) {
            return stripped;
        }
        s
    } else {
        let s = format!("{:e}", d);
        rewrite_exponent(&s).unwrap_or(s)
    }
}

pub fn java_float_string(f: f32) -> String {
    if f.is_nan() {
        return "NaN".to_string();
    }
    if f.is_infinite() {
        return if f > 0.0 { "Infinity" } else { "-Infinity" }.to_string();
    }
    let a = f.abs();
    if f == 0.0 {
        return if f.is_sign_negative() { "-0.0" } else { "0.0" }.to_string();
    }
    if (1e-3..1e7).contains(&a) {
        let mut s = format!("{:?}", f);
        if !s.contains('.') && !s.contains('e') {
            s.push_str(".0");
        }
        if let Some(stripped) = rewrite_exponent(&s) {
            return stripped;
        }
        s
    } else {
        let s = format!("{:e}", f);
        rewrite_exponent(&s).unwrap_or(s)
    }
}

/// `1e7` / `1.5e-8` → Java's `1.0E7` / `1.5E-8`.
fn rewrite_exponent(s: &str) -> Option<String> {
    let idx = s.find(['e', 'E'])?;
    let (mantissa, exp) = s.split_at(idx);
    let exp = &exp[1..];
    let mantissa = if mantissa.contains('.') {
        mantissa.to_string()
    } else {
        format!("{mantissa}.0")
    };
    Some(format!("{}E{}", mantissa, exp.trim_start_matches('+')))
}

// ---- hashing ----

fn identity(v: &Value) -> i32 {
    use Value::*;
    let addr = match v {
        Str(rc) => Rc::as_ptr(rc) as usize,
        Array(rc) => Rc::as_ptr(rc) as usize,
        List(rc) | SetV(rc) => Rc::as_ptr(rc) as usize,
        MapV(rc) => Rc::as_ptr(rc) as usize,
        Builder(rc) => Rc::as_ptr(rc) as usize,
        OptionalV(rc) => Rc::as_ptr(rc) as usize,
        StreamV(rc) => Rc::as_ptr(rc) as usize,
        Obj(rc) => Rc::as_ptr(rc) as usize,
        Int(x) => return x.wrapping_mul(31).wrapping_add(17),
        Long(x) => return ((*x ^ (*x >> 32)) as i32).wrapping_add(101),
        Float(x) => return x.to_bits() as i32,
        Double(x) => {
            let b = x.to_bits();
            return (b ^ (b >> 32)) as i32;
        }
        Bool(b) => return if *b { 1231 } else { 1237 },
        Char(c) => return *c as i32,
        Null => return 0,
    };
    ((addr >> 4) as u32 ^ (addr >> 36) as u32) as i32
}

pub fn java_string_hash(s: &str) -> i32 {
    let mut h: i32 = 0;
    for u in s.encode_utf16() {
        h = h.wrapping_mul(31).wrapping_add(u as i32);
    }
    h
}

/// `Objects.hashCode` semantics per value class.
fn value_hash(v: &Value) -> i32 {
    use Value::*;
    match v {
        Int(x) => *x,
        Long(x) => (*x ^ ((*x as u64 >> 32) as i64)) as i32,
        Float(x) => x.to_bits() as i32,
        Double(x) => {
            let b = x.to_bits();
            (b ^ (b >> 32)) as i32
        }
        Bool(b) => {
            if *b {
                1231
            } else {
                1237
            }
        }
        Char(c) => *c as i32,
        Null => 0,
        Str(s) => java_string_hash(s),
        List(items) => {
            let mut h: i32 = 1;
            for item in items.borrow().iter() {
                h = h.wrapping_mul(31).wrapping_add(value_hash(item));
            }
            h
        }
        SetV(items) => items
            .borrow()
            .iter()
            .fold(0i32, |acc, item| acc.wrapping_add(value_hash(item))),
        MapV(entries) => entries.borrow().iter().fold(0i32, |acc, (k, val)| {
            acc.wrapping_add(value_hash(k) ^ value_hash(val))
        }),
        _ => identity(v),
    }
}

/// `.equals` semantics.
fn value_equals(l: &Value, r: &Value) -> bool {
    use Value::*;
    match (l, r) {
        (Int(a), Int(b)) => a == b,
        (Long(a), Long(b)) => a == b,
        (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
        (Double(a), Double(b)) => a.to_bits() == b.to_bits(),
        (Bool(a), Bool(b)) => a == b,
        (Char(a), Char(b)) => a == b,
        (Null, Null) => true,
        (Str(a), Str(b)) => a == b,
        (List(a), List(b)) => {
            let (a, b) = (a.borrow(), b.borrow());
            a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| value_equals(x, y))
        }
        (SetV(a), SetV(b)) => {
            let (a, b) = (a.borrow(), b.borrow());
            a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| value_equals(x, y)))
        }
        _ => reference_or_numeric_eq(l, r).unwrap_or(false),
    }
}

// ---- builtin library model ----

fn is_known_class_name(name: &str) -> bool {
    crate::jdk::resolve(name).is_some() || name == "StrictMath"
}

fn builtin_static_field(class: &str, name: &str) -> Option<Value> {
    use Value::*;
    let v = match (class, name) {
        ("Integer", "MAX_VALUE") => Int(i32::MAX),
        ("Integer", "MIN_VALUE") => Int(i32::MIN),
        ("Long", "MAX_VALUE") => Long(i64::MAX),
        ("Long", "MIN_VALUE") => Long(i64::MIN),
        ("Double", "MAX_VALUE") => Double(f64::MAX),
        ("Double", "MIN_VALUE") => Double(f64::MIN_POSITIVE),
        ("Double", "NaN") => Double(f64::NAN),
        ("Double", "POSITIVE_INFINITY") => Double(f64::INFINITY),
        ("Double", "NEGATIVE_INFINITY") => Double(f64::NEG_INFINITY),
        ("Math", "PI") | ("StrictMath", "PI") => Double(std::f64::consts::PI),
        ("Math", "E") | ("StrictMath", "E") => Double(std::f64::consts::E),
        ("Character", "MAX_VALUE") => Char('\u{FFFF}'),
        ("Character", "MIN_VALUE") => Char('\0'),
        _ => return None,
    };
    Some(v)
}

fn need(args: &[Value], n: usize, what: &str) -> Result<(), Thrown> {
    if args.len() == n {
        Ok(())
    } else {
        Err(Thrown::new(
            "UnsupportedOperationException",
            format!("{what} expects {n} arguments"),
        ))
    }
}

fn as_f64(v: &Value) -> Result<f64, Thrown> {
    use Value::*;
    match v {
        Int(x) => Ok(*x as f64),
        Long(x) => Ok(*x as f64),
        Float(x) => Ok(*x as f64),
        Double(x) => Ok(*x),
        Char(c) => Ok(*c as u32 as f64),
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            "numeric value expected",
        )),
    }
}

fn as_i64(v: &Value) -> Result<i64, Thrown> {
    use Value::*;
    match v {
        Int(x) => Ok(*x as i64),
        Long(x) => Ok(*x),
        Char(c) => Ok(*c as i64),
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            "integer value expected",
        )),
    }
}

fn as_str(v: &Value) -> Result<Rc<String>, Thrown> {
    match v {
        Value::Str(s) => Ok(s.clone()),
        Value::Null => Err(Thrown::new("NullPointerException", "string is null")),
        other => Ok(Rc::new(to_java_string(other))),
    }
}

fn builtin_static(class: &str, name: &str, args: Vec<Value>) -> EResult {
    use Value::*;
    match (class, name) {
        ("Math", _) | ("StrictMath", _) => return math_static(name, args),
        ("System", "identityHashCode") => {
            need(&args, 1, "identityHashCode")?;
            return Ok(Int(identity(&args[0])));
        }
        ("System", "lineSeparator") => return Ok(Str(Rc::new("\n".to_string()))),
        ("Objects", "hashCode") => {
            need(&args, 1, "Objects.hashCode")?;
            return Ok(Int(value_hash(&args[0])));
        }
        ("Objects", "hash") => {
            let mut h: i32 = 1;
            for a in &args {
                h = h.wrapping_mul(31).wrapping_add(value_hash(a));
            }
            return Ok(Int(h));
        }
        ("Objects", "equals") => {
            need(&args, 2, "Objects.equals")?;
            return Ok(Bool(value_equals(&args[0], &args[1])));
        }
        ("Objects", "toString") => {
            need(&args, 1, "Objects.toString")?;
            return Ok(Str(Rc::new(to_java_string(&args[0]))));
        }
        ("Objects", "isNull") => {
            need(&args, 1, "Objects.isNull")?;
            return Ok(Bool(matches!(args[0], Null)));
        }
        ("Objects", "nonNull") => {
            need(&args, 1, "Objects.nonNull")?;
            return Ok(Bool(!matches!(args[0], Null)));
        }
        ("Objects", "requireNonNull") => {
            if matches!(args.first(), Some(Null) | None) {
                return Err(Thrown::new("NullPointerException", "requireNonNull"));
            }
            return Ok(args.into_iter().next().expect("checked non-empty"));
        }
        ("Integer", "valueOf") | ("Short", "valueOf") | ("Byte", "valueOf") => {
            need(&args, 1, "valueOf")?;
            return Ok(Int(as_int(&args[0])?));
        }
        ("Integer", "parseInt") => {
            let s = as_str(&args[0])?;
            return s
                .trim()
                .parse::<i32>()
                .map(Int)
                .map_err(|_| Thrown::new("NumberFormatException", format!("For input string: \"{s}\"")));
        }
        ("Integer", "toString") | ("Long", "toString") | ("Double", "toString")
        | ("Boolean", "toString") | ("String", "valueOf") => {
            need(&args, 1, "valueOf/toString")?;
            return Ok(Str(Rc::new(to_java_string(&args[0]))));
        }
        ("Integer", "sum") => {
            need(&args, 2, "Integer.sum")?;
            return Ok(Int(as_int(&args[0])?.wrapping_add(as_int(&args[1])?)));
        }
        ("Integer", "max") => {
            need(&args, 2, "Integer.max")?;
            return Ok(Int(as_int(&args[0])?.max(as_int(&args[1])?)));
        }
        ("Integer", "min") => {
            need(&args, 2, "Integer.min")?;
            return Ok(Int(as_int(&args[0])?.min(as_int(&args[1])?)));
        }
        ("Integer", "compare") => {
            need(&args, 2, "Integer.compare")?;
            return Ok(Int(as_int(&args[0])?.cmp(&as_int(&args[1])?) as i32));
        }
        ("Long", "valueOf") => {
            need(&args, 1, "Long.valueOf")?;
            return Ok(Long(as_i64(&args[0])?));
        }
        ("Long", "parseLong") => {
            let s = as_str(&args[0])?;
            return s
                .trim()
                .parse::<i64>()
                .map(Long)
                .map_err(|_| Thrown::new("NumberFormatException", format!("For input string: \"{s}\"")));
        }
        ("Double", "valueOf") => {
            need(&args, 1, "Double.valueOf")?;
            return Ok(Double(as_f64(&args[0])?));
        }
        ("Double", "parseDouble") => {
            let s = as_str(&args[0])?;
            return s
                .trim()
                .parse::<f64>()
                .map(Double)
                .map_err(|_| Thrown::new("NumberFormatException", format!("For input string: \"{s}\"")));
        }
        ("Double", "doubleToRawLongBits") | ("Double", "doubleToLongBits") => {
            need(&args, 1, "doubleToLongBits")?;
            return Ok(Long(as_f64(&args[0])?.to_bits() as i64));
        }
        ("Double", "isNaN") => {
            need(&args, 1, "Double.isNaN")?;
            return Ok(Bool(as_f64(&args[0])?.is_nan()));
        }
        ("Float", "valueOf") => {
            need(&args, 1, "Float.valueOf")?;
            return Ok(Float(as_f64(&args[0])? as f32));
        }
        ("Boolean", "valueOf") => {
            need(&args, 1, "Boolean.valueOf")?;
            return match &args[0] {
                Bool(b) => Ok(Bool(*b)),
                Str(s) => Ok(Bool(s.eq_ignore_ascii_case("true"))),
                _ => Err(Thrown::new(
                    "UnsupportedOperationException",
                    "Boolean.valueOf argument",
                )),
            };
        }
        ("Boolean", "parseBoolean") => {
            let s = as_str(&args[0])?;
            return Ok(Bool(s.eq_ignore_ascii_case("true")));
        }
        ("Character", "valueOf") => {
            need(&args, 1, "Character.valueOf")?;
            return match &args[0] {
                Char(c) => Ok(Char(*c)),
                Int(x) => Ok(Char(char_from_code(*x))),
                _ => Err(Thrown::new(
                    "UnsupportedOperationException",
                    "Character.valueOf argument",
                )),
            };
        }
        ("Character", "isDigit") => {
            need(&args, 1, "Character.isDigit")?;
            if let Char(c) = &args[0] {
                return Ok(Bool(c.is_ascii_digit()));
            }
        }
        ("Character", "isLetter") => {
            need(&args, 1, "Character.isLetter")?;
            if let Char(c) = &args[0] {
                return Ok(Bool(c.is_alphabetic()));
            }
        }
        ("Character", "toUpperCase") => {
            if let Some(Char(c)) = args.first() {
                return Ok(Char(c.to_ascii_uppercase()));
            }
        }
        ("Character", "toLowerCase") => {
            if let Some(Char(c)) = args.first() {
                return Ok(Char(c.to_ascii_lowercase()));
            }
        }
        ("String", "join") => {
            if let Some((sep, rest)) = args.split_first() {
                let sep = as_str(sep)?;
                let parts: Result<Vec<_>, _> =
                    rest.iter().map(|v| as_str(v).map(|s| s.to_string())).collect();
                return Ok(Str(Rc::new(parts?.join(&sep))));
            }
        }
        ("Arrays", _) => return arrays_static(name, args),
        ("Collections", "emptyList") => return Ok(List(Rc::new(RefCell::new(Vec::new())))),
        ("Collections", "singletonList") => {
            need(&args, 1, "singletonList")?;
            return Ok(List(Rc::new(RefCell::new(args))));
        }
        ("Collections", "unmodifiableList") => {
            need(&args, 1, "unmodifiableList")?;
            return Ok(args.into_iter().next().expect("checked"));
        }
        ("List", "of") => return Ok(List(Rc::new(RefCell::new(args)))),
        ("Set", "of") => {
            let mut items: Vec<Value> = Vec::new();
            for a in args {
                if !items.iter().any(|x| value_equals(x, &a)) {
                    items.push(a);
                }
            }
            return Ok(SetV(Rc::new(RefCell::new(items))));
        }
        ("Map", "of") => {
            let mut entries = Vec::new();
            let mut it = args.into_iter();
            while let (Some(k), Some(v)) = (it.next(), it.next()) {
                entries.push((k, v));
            }
            return Ok(MapV(Rc::new(RefCell::new(entries))));
        }
        ("Stream", "of") | ("IntStream", "of") => return Ok(StreamV(Rc::new(args))),
        ("Stream", "empty") => return Ok(StreamV(Rc::new(Vec::new()))),
        ("Stream", "ofNullable") => {
            need(&args, 1, "Stream.ofNullable")?;
            let items = if matches!(args[0], Null) {
                Vec::new()
            } else {
                args
            };
            return Ok(StreamV(Rc::new(items)));
        }
        ("Optional", "of") => {
            need(&args, 1, "Optional.of")?;
            if matches!(args[0], Null) {
                return Err(Thrown::new("NullPointerException", "Optional.of(null)"));
            }
            return Ok(OptionalV(Rc::new(Some(
                args.into_iter().next().expect("checked"),
            ))));
        }
        ("Optional", "ofNullable") => {
            need(&args, 1, "Optional.ofNullable")?;
            let inner = match args.into_iter().next().expect("checked") {
                Null => None,
                other => Some(other),
            };
            return Ok(OptionalV(Rc::new(inner)));
        }
        ("Optional", "empty") => return Ok(OptionalV(Rc::new(None))),
        _ => {}
    }
    Err(Thrown::new(
        "UnsupportedOperationException",
        format!("{class}.{name} is not modeled"),
    ))
}

fn math_static(name: &str, args: Vec<Value>) -> EResult {
    use Value::*;
    match (name, args.as_slice()) {
        ("abs", [Int(x)]) => Ok(Int(x.wrapping_abs())),
        ("abs", [Long(x)]) => Ok(Long(x.wrapping_abs())),
        ("abs", [Float(x)]) => Ok(Float(x.abs())),
        ("abs", [Double(x)]) => Ok(Double(x.abs())),
        ("abs", [Char(c)]) => Ok(Int(*c as i32)),
        ("max", [a, b]) | ("min", [a, b]) => {
            let p = promote(a, b).ok_or_else(|| {
                Thrown::new("UnsupportedOperationException", "Math.max/min operands")
            })?;
            let take_max = name == "max";
            Ok(match p {
                Promoted::Int(x, y) => Int(if take_max { x.max(y) } else { x.min(y) }),
                Promoted::Long(x, y) => Long(if take_max { x.max(y) } else { x.min(y) }),
                Promoted::Float(x, y) => Float(if take_max { x.max(y) } else { x.min(y) }),
                Promoted::Double(x, y) => Double(if take_max { x.max(y) } else { x.min(y) }),
            })
        }
        ("floor", [v]) => Ok(Double(as_f64(v)?.floor())),
        ("ceil", [v]) => Ok(Double(as_f64(v)?.ceil())),
        ("sqrt", [v]) => Ok(Double(as_f64(v)?.sqrt())),
        ("pow", [a, b]) => Ok(Double(as_f64(a)?.powf(as_f64(b)?))),
        ("round", [Float(x)]) => Ok(Int((*x + 0.5).floor() as i32)),
        ("round", [Double(x)]) => Ok(Long((*x + 0.5).floor() as i64)),
        ("round", [v]) => Ok(Long(as_f64(v)?.round() as i64)),
        ("signum", [Double(x)]) => Ok(Double(x.signum())),
        ("signum", [Float(x)]) => Ok(Float(x.signum())),
        ("nextAfter", [a, b]) => {
            // Identity use (v, v) returns v; the general case is the
            // adjacent representable double.
            let (start, dir) = (as_f64(a)?, as_f64(b)?);
            if start == dir || start.is_nan() {
                match a {
                    Float(x) => Ok(Float(*x)),
                    _ => Ok(Double(start)),
                }
            } else {
                let bits = start.to_bits();
                let next = if (dir > start) == (start >= 0.0) {
                    bits + 1
                } else {
                    bits.wrapping_sub(1)
                };
                Ok(Double(f64::from_bits(next)))
            }
        }
        ("floorDiv", [a, b]) => {
            let (x, y) = (as_i64(a)?, as_i64(b)?);
            if y == 0 {
                return Err(Thrown::new("ArithmeticException", "/ by zero"));
            }
            let q = x.div_euclid(y);
            Ok(match (&args[0], &args[1]) {
                (Int(_), Int(_)) => Int(q as i32),
                _ => Long(q),
            })
        }
        ("floorMod", [a, b]) => {
            let (x, y) = (as_i64(a)?, as_i64(b)?);
            if y == 0 {
                return Err(Thrown::new("ArithmeticException", "/ by zero"));
            }
            let m = x.rem_euclid(y);
            Ok(match (&args[0], &args[1]) {
                (Int(_), Int(_)) => Int(m as i32),
                _ => Long(m),
            })
        }
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("Math.{name} is not modeled"),
        )),
    }
}

fn arrays_static(name: &str, args: Vec<Value>) -> EResult {
    use Value::*;
    match (name, args.as_slice()) {
        ("hashCode", [Null]) => Ok(Int(0)),
        ("hashCode", [Array(a)]) => {
            let mut h: i32 = 1;
            for item in a.borrow().data.iter() {
                h = h.wrapping_mul(31).wrapping_add(value_hash(item));
            }
            Ok(Int(h))
        }
        ("deepHashCode", [Null]) => Ok(Int(0)),
        ("deepHashCode", [Array(a)]) => {
            fn deep(v: &Value) -> i32 {
                match v {
                    Array(a) => {
                        let mut h: i32 = 1;
                        for item in a.borrow().data.iter() {
                            h = h.wrapping_mul(31).wrapping_add(deep(item));
                        }
                        h
                    }
                    other => value_hash(other),
                }
            }
            let mut h: i32 = 1;
            for item in a.borrow().data.iter() {
                h = h.wrapping_mul(31).wrapping_add(deep(item));
            }
            Ok(Int(h))
        }
        ("toString", [Null]) => Ok(Str(Rc::new("null".to_string()))),
        ("toString", [Array(a)]) => {
            let inner: Vec<String> = a.borrow().data.iter().map(to_java_string).collect();
            Ok(Str(Rc::new(format!("[{}]", inner.join(", ")))))
        }
        ("deepToString", [v]) => {
            fn deep(v: &Value) -> String {
                match v {
                    Array(a) => {
                        let inner: Vec<String> = a.borrow().data.iter().map(deep).collect();
                        format!("[{}]", inner.join(", "))
                    }
                    other => to_java_string(other),
                }
            }
            Ok(Str(Rc::new(match v {
                Null => "null".to_string(),
                other => deep(other),
            })))
        }
        ("asList", items) => Ok(List(Rc::new(RefCell::new(match items {
            [Array(a)] => a.borrow().data.clone(),
            other => other.to_vec(),
        })))),
        ("copyOf", [Array(a), n]) => {
            let n = as_int(n)? as usize;
            let src = a.borrow();
            let elem = src.elem.clone();
            let mut data = src.data.clone();
            data.resize(n, default_value(&TypeRef::simple(&elem)));
            Ok(Array(Rc::new(RefCell::new(ArrayVal { elem, data }))))
        }
        ("sort", [Array(a)]) => {
            let mut arr = a.borrow_mut();
            arr.data.sort_by(|x, y| {
                let fx = as_f64(x).unwrap_or(0.0);
                let fy = as_f64(y).unwrap_or(0.0);
                fx.partial_cmp(&fy).unwrap_or(std::cmp::Ordering::Equal)
            });
            Ok(Null)
        }
        ("equals", [a, b]) => match (a, b) {
            (Array(x), Array(y)) => {
                let (x, y) = (x.borrow(), y.borrow());
                Ok(Bool(
                    x.data.len() == y.data.len()
                        && x.data
                            .iter()
                            .zip(y.data.iter())
                            .all(|(l, r)| value_equals(l, r)),
                ))
            }
            (Null, Null) => Ok(Bool(true)),
            _ => Ok(Bool(false)),
        },
        ("fill", [Array(a), v]) => {
            let mut arr = a.borrow_mut();
            for slot in arr.data.iter_mut() {
                *slot = v.clone();
            }
            Ok(Null)
        }
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("Arrays.{name} is not modeled"),
        )),
    }
}

fn builtin_new(name: &str, args: Vec<Value>) -> EResult {
    use Value::*;
    match name {
        "Object" => Ok(Obj(Rc::new(RefCell::new(ObjVal {
            class: "Object".into(),
            fields: HashMap::new(),
        })))),
        "ArrayList" | "LinkedList" => {
            let items = match args.first() {
                Some(List(l)) | Some(SetV(l)) => l.borrow().clone(),
                _ => Vec::new(),
            };
            Ok(List(Rc::new(RefCell::new(items))))
        }
        "HashSet" | "LinkedHashSet" => {
            let mut items: Vec<Value> = Vec::new();
            if let Some(List(l)) | Some(SetV(l)) = args.first() {
                for v in l.borrow().iter() {
                    if !items.iter().any(|x| value_equals(x, v)) {
                        items.push(v.clone());
                    }
                }
            }
            Ok(SetV(Rc::new(RefCell::new(items))))
        }
        "HashMap" | "LinkedHashMap" => {
            let entries = match args.first() {
                Some(MapV(m)) => m.borrow().clone(),
                _ => Vec::new(),
            };
            Ok(MapV(Rc::new(RefCell::new(entries))))
        }
        "StringBuilder" | "StringBuffer" => {
            let init = match args.first() {
                Some(Str(s)) => s.to_string(),
                _ => String::new(),
            };
            Ok(Builder(Rc::new(RefCell::new(init))))
        }
        "String" => {
            let s = match args.first() {
                Some(Str(s)) => s.to_string(),
                Some(other) => to_java_string(other),
                None => String::new(),
            };
            Ok(Str(Rc::new(s)))
        }
        "Integer" => Ok(Int(as_int(args.first().unwrap_or(&Null))?)),
        "Long" => Ok(Long(as_i64(args.first().unwrap_or(&Null))?)),
        "Double" => Ok(Double(as_f64(args.first().unwrap_or(&Null))?)),
        "Boolean" => match args.first() {
            Some(Bool(b)) => Ok(Bool(*b)),
            _ => Ok(Bool(false)),
        },
        _ if is_exception_class(name) => {
            let message = match args.first() {
                Some(Str(s)) => Str(s.clone()),
                Some(Null) | None => Null,
                Some(other) => Str(Rc::new(to_java_string(other))),
            };
            Ok(Obj(Rc::new(RefCell::new(ObjVal {
                class: name.to_string(),
                fields: HashMap::from([("message".to_string(), message)]),
            }))))
        }
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("constructor {name} is not modeled"),
        )),
    }
}

fn is_exception_class(name: &str) -> bool {
    name.ends_with("Exception") || name.ends_with("Error") || name == "Throwable"
}

fn fqn_exception(name: &str) -> String {
    match name {
        "NoSuchElementException" | "ConcurrentModificationException" => {
            format!("java.util.{name}")
        }
        _ => format!("java.lang.{name}"),
    }
}

/// Catch matching over the subset's flat exception model: exact match,
/// universal supertypes, and the few platform hierarchies the runtime
/// itself throws.
fn catches_class(catch_ty: &TypeRef, thrown: &str) -> bool {
    let t = catch_ty.simple_name();
    if t == thrown || matches!(t, "Exception" | "RuntimeException" | "Throwable") {
        return true;
    }
    match t {
        "IndexOutOfBoundsException" => matches!(
            thrown,
            "ArrayIndexOutOfBoundsException" | "StringIndexOutOfBoundsException"
        ),
        "IllegalArgumentException" => thrown == "NumberFormatException",
        _ => false,
    }
}

fn str_index(s: &str, i: i32) -> Result<usize, Thrown> {
    let chars = s.chars().count() as i32;
    if i < 0 || i > chars {
        return Err(Thrown::new(
            "StringIndexOutOfBoundsException",
            format!("index {}, length {}", i, chars),
        ));
    }
    Ok(s.char_indices()
        .nth(i as usize)
        .map(|(b, _)| b)
        .unwrap_or(s.len()))
}

fn builtin_instance(value: &Value, name: &str, args: Vec<Value>) -> EResult {
    use Value::*;
    match value {
        Null => Err(Thrown::new(
            "NullPointerException",
            format!("call of {name} on null"),
        )),
        Str(s) => string_method(s, name, args),
        List(items) => list_method(items, name, args, false),
        SetV(items) => list_method(items, name, args, true),
        MapV(entries) => map_method(entries, name, args),
        Builder(buf) => builder_method(value, buf, name, args),
        OptionalV(o) => match (name, args.as_slice()) {
            ("isPresent", []) => Ok(Bool(o.is_some())),
            ("isEmpty", []) => Ok(Bool(o.is_none())),
            ("get", []) | ("orElseThrow", []) => o
                .as_ref()
                .clone()
                .ok_or_else(|| Thrown::new("NoSuchElementException", "No value present")),
            ("orElse", [d]) => Ok(o.as_ref().clone().unwrap_or_else(|| d.clone())),
            _ => Err(Thrown::new(
                "UnsupportedOperationException",
                format!("Optional.{name} is not modeled"),
            )),
        },
        StreamV(items) => match (name, args.as_slice()) {
            ("count", []) => Ok(Long(items.len() as i64)),
            ("findAny", []) | ("findFirst", []) => {
                Ok(OptionalV(Rc::new(items.first().cloned())))
            }
            ("sum", []) => {
                let mut total: i64 = 0;
                for item in items.iter() {
                    total = total.wrapping_add(as_i64(item)?);
                }
                Ok(Int(total as i32))
            }
            _ => Err(Thrown::new(
                "UnsupportedOperationException",
                format!("Stream.{name} is not modeled"),
            )),
        },
        Array(_) => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("array method {name}"),
        )),
        Int(_) | Long(_) | Float(_) | Double(_) | Bool(_) | Char(_) => {
            boxed_method(value, name, args)
        }
        Obj(o) => match (name, args.as_slice()) {
            ("getMessage", []) => Ok(o.borrow().fields.get("message").cloned().unwrap_or(Null)),
            ("toString", []) => Ok(Str(Rc::new(to_java_string(value)))),
            ("hashCode", []) => Ok(Int(identity(value))),
            ("equals", [other]) => Ok(Bool(reference_or_numeric_eq(value, other)?)),
            _ => Err(Thrown::new(
                "UnsupportedOperationException",
                format!("{}.{} is not modeled", o.borrow().class, name),
            )),
        },
    }
}

fn boxed_method(value: &Value, name: &str, args: Vec<Value>) -> EResult {
    use Value::*;
    match (name, args.as_slice()) {
        ("intValue", []) => Ok(Int(as_int(value)?)),
        ("longValue", []) => Ok(Long(as_i64(value)?)),
        ("doubleValue", []) => Ok(Double(as_f64(value)?)),
        ("floatValue", []) => Ok(Float(as_f64(value)? as f32)),
        ("booleanValue", []) => Ok(value.clone()),
        ("charValue", []) => Ok(value.clone()),
        ("toString", []) => Ok(Str(Rc::new(to_java_string(value)))),
        ("hashCode", []) => Ok(Int(value_hash(value))),
        ("equals", [other]) => Ok(Bool(value_equals(value, other))),
        ("compareTo", [other]) => {
            let (a, b) = (as_f64(value)?, as_f64(other)?);
            Ok(Int(a.partial_cmp(&b).map(|o| o as i32).unwrap_or(0)))
        }
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("boxed method {name} is not modeled"),
        )),
    }
}

fn string_method(s: &Rc<String>, name: &str, args: Vec<Value>) -> EResult {
    use Value::*;
    match (name, args.as_slice()) {
        ("length", []) => Ok(Int(s.chars().count() as i32)),
        ("isEmpty", []) => Ok(Bool(s.is_empty())),
        ("isBlank", []) => Ok(Bool(s.trim().is_empty())),
        ("charAt", [i]) => {
            let i = as_int(i)?;
            s.chars()
                .nth(i.max(0) as usize)
                .filter(|_| i >= 0)
                .map(Char)
                .ok_or_else(|| {
                    Thrown::new(
                        "StringIndexOutOfBoundsException",
                        format!("index {}, length {}", i, s.chars().count()),
                    )
                })
        }
        ("substring", [from]) => {
            let b = str_index(s, as_int(from)?)?;
            Ok(Str(Rc::new(s[b..].to_string())))
        }
        ("substring", [from, to]) => {
            let (f, t) = (as_int(from)?, as_int(to)?);
            if f > t {
                return Err(Thrown::new(
                    "StringIndexOutOfBoundsException",
                    format!("begin {}, end {}", f, t),
                ));
            }
            let (b, e) = (str_index(s, f)?, str_index(s, t)?);
            Ok(Str(Rc::new(s[b..e].to_string())))
        }
        ("indexOf", [what]) => {
            let needle = match what {
                Str(n) => n.to_string(),
                Char(c) => c.to_string(),
                Int(x) => char_from_code(*x).to_string(),
                _ => return Err(Thrown::new("UnsupportedOperationException", "indexOf arg")),
            };
            Ok(Int(match s.find(&needle) {
                Some(b) => s[..b].chars().count() as i32,
                None => -1,
            }))
        }
        ("lastIndexOf", [what]) => {
            let needle = match what {
                Str(n) => n.to_string(),
                Char(c) => c.to_string(),
                _ => return Err(Thrown::new("UnsupportedOperationException", "lastIndexOf arg")),
            };
            Ok(Int(match s.rfind(&needle) {
                Some(b) => s[..b].chars().count() as i32,
                None => -1,
            }))
        }
        ("contains", [Str(n)]) => Ok(Bool(s.contains(n.as_str()))),
        ("startsWith", [Str(n)]) => Ok(Bool(s.starts_with(n.as_str()))),
        ("endsWith", [Str(n)]) => Ok(Bool(s.ends_with(n.as_str()))),
        ("trim", []) | ("strip", []) => Ok(Str(Rc::new(s.trim().to_string()))),
        ("toUpperCase", []) => Ok(Str(Rc::new(s.to_uppercase()))),
        ("toLowerCase", []) => Ok(Str(Rc::new(s.to_lowercase()))),
        ("replace", [from, to]) => {
            let (f, t) = match (from, to) {
                (Str(a), Str(b)) => (a.to_string(), b.to_string()),
                (Char(a), Char(b)) => (a.to_string(), b.to_string()),
                _ => return Err(Thrown::new("UnsupportedOperationException", "replace args")),
            };
            Ok(Str(Rc::new(s.replace(&f, &t))))
        }
        ("concat", [Str(o)]) => Ok(Str(Rc::new(format!("{s}{o}")))),
        ("equals", [other]) => Ok(Bool(matches!(other, Str(o) if o == s))),
        ("equalsIgnoreCase", [Str(o)]) => Ok(Bool(s.eq_ignore_ascii_case(o))),
        ("compareTo", [Str(o)]) => Ok(Int(match s.as_str().cmp(o.as_str()) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        })),
        ("hashCode", []) => Ok(Int(java_string_hash(s))),
        ("toString", []) | ("intern", []) => Ok(Str(s.clone())),
        ("chars", []) => Ok(StreamV(Rc::new(
            s.encode_utf16().map(|u| Int(u as i32)).collect(),
        ))),
        ("toCharArray", []) => Ok(Array(Rc::new(RefCell::new(ArrayVal {
            elem: "char".into(),
            data: s.chars().map(Char).collect(),
        })))),
        ("repeat", [n]) => {
            let n = as_int(n)?;
            if n < 0 {
                return Err(Thrown::new("IllegalArgumentException", "count is negative"));
            }
            Ok(Str(Rc::new(s.repeat(n as usize))))
        }
        ("split", [Str(sep)]) => {
            // Literal separators only; the subset has no regex engine.
            let plain = sep
                .chars()
                .all(|c| !r"\^$.|?*+()[]{}".contains(c));
            if !plain {
                return Err(Thrown::new(
                    "UnsupportedOperationException",
                    "regex split is not modeled",
                ));
            }
            let mut parts: Vec<&str> = s.split(sep.as_str()).collect();
            while parts.last() == Some(&"") {
                parts.pop();
            }
            Ok(Array(Rc::new(RefCell::new(ArrayVal {
                elem: "String".into(),
                data: parts
                    .into_iter()
                    .map(|p| Str(Rc::new(p.to_string())))
                    .collect(),
            }))))
        }
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("String.{name} is not modeled"),
        )),
    }
}

fn list_method(
    items: &Rc<RefCell<Vec<Value>>>,
    name: &str,
    args: Vec<Value>,
    is_set: bool,
) -> EResult {
    use Value::*;
    match (name, args.as_slice()) {
        ("size", []) => Ok(Int(items.borrow().len() as i32)),
        ("isEmpty", []) => Ok(Bool(items.borrow().is_empty())),
        ("add", [v]) => {
            if is_set {
                let exists = items.borrow().iter().any(|x| value_equals(x, v));
                if exists {
                    return Ok(Bool(false));
                }
            }
            items.borrow_mut().push(v.clone());
            Ok(Bool(true))
        }
        ("add", [i, v]) if !is_set => {
            let i = as_int(i)? as usize;
            let mut list = items.borrow_mut();
            if i > list.len() {
                return Err(Thrown::new(
                    "IndexOutOfBoundsException",
                    format!("Index: {}, Size: {}", i, list.len()),
                ));
            }
            list.insert(i, v.clone());
            Ok(Null)
        }
        ("get", [i]) if !is_set => {
            let i = as_int(i)?;
            let list = items.borrow();
            list.get(i.max(0) as usize)
                .filter(|_| i >= 0)
                .cloned()
                .ok_or_else(|| {
                    Thrown::new(
                        "IndexOutOfBoundsException",
                        format!("Index {} out of bounds for length {}", i, list.len()),
                    )
                })
        }
        ("set", [i, v]) if !is_set => {
            let i = as_int(i)? as usize;
            let mut list = items.borrow_mut();
            let len = list.len();
            match list.get_mut(i) {
                Some(slot) => {
                    let old = slot.clone();
                    *slot = v.clone();
                    Ok(old)
                }
                None => Err(Thrown::new(
                    "IndexOutOfBoundsException",
                    format!("Index {} out of bounds for length {}", i, len),
                )),
            }
        }
        ("remove", [Int(i)]) if !is_set => {
            let i = *i as usize;
            let mut list = items.borrow_mut();
            if i < list.len() {
                Ok(list.remove(i))
            } else {
                Err(Thrown::new(
                    "IndexOutOfBoundsException",
                    format!("Index {} out of bounds for length {}", i, list.len()),
                ))
            }
        }
        ("remove", [v]) => {
            let mut list = items.borrow_mut();
            match list.iter().position(|x| value_equals(x, v)) {
                Some(i) => {
                    list.remove(i);
                    Ok(Bool(true))
                }
                None => Ok(Bool(false)),
            }
        }
        ("contains", [v]) => Ok(Bool(items.borrow().iter().any(|x| value_equals(x, v)))),
        ("indexOf", [v]) if !is_set => Ok(Int(
            items
                .borrow()
                .iter()
                .position(|x| value_equals(x, v))
                .map(|i| i as i32)
                .unwrap_or(-1),
        )),
        ("clear", []) => {
            items.borrow_mut().clear();
            Ok(Null)
        }
        ("addAll", [other]) => {
            let incoming = match other {
                List(l) | SetV(l) => l.borrow().clone(),
                _ => return Err(Thrown::new("UnsupportedOperationException", "addAll arg")),
            };
            let mut changed = false;
            for v in incoming {
                if is_set && items.borrow().iter().any(|x| value_equals(x, &v)) {
                    continue;
                }
                items.borrow_mut().push(v);
                changed = true;
            }
            Ok(Bool(changed))
        }
        ("toString", []) => {
            let v = if is_set {
                SetV(items.clone())
            } else {
                List(items.clone())
            };
            Ok(Str(Rc::new(to_java_string(&v))))
        }
        ("hashCode", []) => {
            let v = if is_set {
                SetV(items.clone())
            } else {
                List(items.clone())
            };
            Ok(Int(value_hash(&v)))
        }
        ("equals", [other]) => {
            let v = if is_set {
                SetV(items.clone())
            } else {
                List(items.clone())
            };
            Ok(Bool(value_equals(&v, other)))
        }
        ("stream", []) => Ok(StreamV(Rc::new(items.borrow().clone()))),
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("collection method {name} is not modeled"),
        )),
    }
}

fn map_method(entries: &Rc<RefCell<Vec<(Value, Value)>>>, name: &str, args: Vec<Value>) -> EResult {
    use Value::*;
    match (name, args.as_slice()) {
        ("size", []) => Ok(Int(entries.borrow().len() as i32)),
        ("isEmpty", []) => Ok(Bool(entries.borrow().is_empty())),
        ("put", [k, v]) => {
            let mut map = entries.borrow_mut();
            for entry in map.iter_mut() {
                if value_equals(&entry.0, k) {
                    let old = entry.1.clone();
                    entry.1 = v.clone();
                    return Ok(old);
                }
            }
            map.push((k.clone(), v.clone()));
            Ok(Null)
        }
        ("get", [k]) => Ok(entries
            .borrow()
            .iter()
            .find(|(ek, _)| value_equals(ek, k))
            .map(|(_, v)| v.clone())
            .unwrap_or(Null)),
        ("getOrDefault", [k, d]) => Ok(entries
            .borrow()
            .iter()
            .find(|(ek, _)| value_equals(ek, k))
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| d.clone())),
        ("containsKey", [k]) => Ok(Bool(
            entries.borrow().iter().any(|(ek, _)| value_equals(ek, k)),
        )),
        ("containsValue", [v]) => Ok(Bool(
            entries.borrow().iter().any(|(_, ev)| value_equals(ev, v)),
        )),
        ("remove", [k]) => {
            let mut map = entries.borrow_mut();
            match map.iter().position(|(ek, _)| value_equals(ek, k)) {
                Some(i) => Ok(map.remove(i).1),
                None => Ok(Null),
            }
        }
        ("keySet", []) => Ok(SetV(Rc::new(RefCell::new(
            entries.borrow().iter().map(|(k, _)| k.clone()).collect(),
        )))),
        ("values", []) => Ok(List(Rc::new(RefCell::new(
            entries.borrow().iter().map(|(_, v)| v.clone()).collect(),
        )))),
        ("clear", []) => {
            entries.borrow_mut().clear();
            Ok(Null)
        }
        ("toString", []) => Ok(Str(Rc::new(to_java_string(&MapV(entries.clone()))))),
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("map method {name} is not modeled"),
        )),
    }
}

fn builder_method(
    this: &Value,
    buf: &Rc<RefCell<String>>,
    name: &str,
    args: Vec<Value>,
) -> EResult {
    use Value::*;
    match (name, args.as_slice()) {
        ("append", [v]) => {
            buf.borrow_mut().push_str(&to_java_string(v));
            Ok(this.clone())
        }
        ("toString", []) => Ok(Str(Rc::new(buf.borrow().clone()))),
        ("length", []) => Ok(Int(buf.borrow().chars().count() as i32)),
        ("reverse", []) => {
            let reversed: String = buf.borrow().chars().rev().collect();
            *buf.borrow_mut() = reversed;
            Ok(this.clone())
        }
        ("charAt", [i]) => {
            let i = as_int(i)?;
            buf.borrow()
                .chars()
                .nth(i.max(0) as usize)
                .filter(|_| i >= 0)
                .map(Char)
                .ok_or_else(|| {
                    Thrown::new("StringIndexOutOfBoundsException", format!("index {}", i))
                })
        }
        ("isEmpty", []) => Ok(Bool(buf.borrow().is_empty())),
        _ => Err(Thrown::new(
            "UnsupportedOperationException",
            format!("StringBuilder.{name} is not modeled"),
        )),
    }
}
