//! The statically typed source language: first-order functions over naturals
//! and booleans, with input/output and a context that calls into the program.

mod machine;
mod parse;
mod typing;

use std::fmt;

pub use machine::{config_type, link, SrcMachine, SrcWhole};
pub use parse::{parse_src_context, parse_src_expr, parse_src_iface, parse_src_program};
pub use typing::{typecheck_context, typecheck_program, LinkError, TypeError};

use crate::explore::{explore, run_machine, RunOutcome};
use crate::trace::{Behavior, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Nat,
    Bool,
}

impl Ty {
    pub fn has(self, v: Value) -> bool {
        matches!((self, v), (Ty::Nat, Value::Nat(_)) | (Ty::Bool, Value::Bool(_)))
    }

    pub fn of(v: Value) -> Ty {
        match v {
            Value::Nat(_) => Ty::Nat,
            Value::Bool(_) => Ty::Bool,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ty::Nat => "nat",
            Ty::Bool => "bool",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
}

impl BinOp {
    /// Addition saturates; subtraction is truncated at zero.
    pub fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            BinOp::Add => a.saturating_add(b),
            BinOp::Sub => a.saturating_sub(b),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SrcExpr {
    Var(String),
    Nat(u64),
    True,
    False,
    Op(BinOp, Box<SrcExpr>, Box<SrcExpr>),
    Geq(Box<SrcExpr>, Box<SrcExpr>),
    Let(String, Ty, Box<SrcExpr>, Box<SrcExpr>),
    If(Box<SrcExpr>, Box<SrcExpr>, Box<SrcExpr>),
    Call(String, Box<SrcExpr>),
    Read,
    Write(Box<SrcExpr>),
    Fail,
    /// Pending return from a function body; only appears at run time.
    Ret(Box<SrcExpr>),
}

impl SrcExpr {
    pub fn value(v: Value) -> SrcExpr {
        match v {
            Value::Nat(n) => SrcExpr::Nat(n),
            Value::Bool(true) => SrcExpr::True,
            Value::Bool(false) => SrcExpr::False,
        }
    }

    pub fn as_value(&self) -> Option<Value> {
        match self {
            SrcExpr::Nat(n) => Some(Value::Nat(*n)),
            SrcExpr::True => Some(Value::Bool(true)),
            SrcExpr::False => Some(Value::Bool(false)),
            _ => None,
        }
    }

    pub fn is_value(&self) -> bool {
        matches!(self, SrcExpr::Nat(_) | SrcExpr::True | SrcExpr::False)
    }

    pub fn var(x: &str) -> SrcExpr {
        SrcExpr::Var(x.to_string())
    }

    pub fn op(op: BinOp, a: SrcExpr, b: SrcExpr) -> SrcExpr {
        SrcExpr::Op(op, Box::new(a), Box::new(b))
    }

    pub fn geq(a: SrcExpr, b: SrcExpr) -> SrcExpr {
        SrcExpr::Geq(Box::new(a), Box::new(b))
    }

    pub fn let_in(x: &str, ty: Ty, e1: SrcExpr, e2: SrcExpr) -> SrcExpr {
        SrcExpr::Let(x.to_string(), ty, Box::new(e1), Box::new(e2))
    }

    pub fn ite(c: SrcExpr, t: SrcExpr, e: SrcExpr) -> SrcExpr {
        SrcExpr::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn call(f: &str, a: SrcExpr) -> SrcExpr {
        SrcExpr::Call(f.to_string(), Box::new(a))
    }

    pub fn write(a: SrcExpr) -> SrcExpr {
        SrcExpr::Write(Box::new(a))
    }

    /// Replaces free occurrences of `x` by the closed value `v`.
    pub fn subst(&self, x: &str, v: Value) -> SrcExpr {
        let mut e = self.clone();
        e.subst_mut(x, v);
        e
    }

    /// In-place form of [`Self::subst`].
    pub fn subst_mut(&mut self, x: &str, v: Value) {
        use SrcExpr::*;
        match self {
            Var(y) if y == x => *self = SrcExpr::value(v),
            Var(_) | Nat(_) | True | False | Read | Fail => {}
            Op(_, a, b) | Geq(a, b) => {
                a.subst_mut(x, v);
                b.subst_mut(x, v);
            }
            Let(y, _, a, b) => {
                a.subst_mut(x, v);
                if y != x {
                    b.subst_mut(x, v);
                }
            }
            If(c, a, b) => {
                c.subst_mut(x, v);
                a.subst_mut(x, v);
                b.subst_mut(x, v);
            }
            Call(_, a) | Write(a) | Ret(a) => a.subst_mut(x, v),
        }
    }

    /// Visits every subexpression in preorder.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a SrcExpr)) {
        use SrcExpr::*;
        f(self);
        match self {
            Var(_) | Nat(_) | True | False | Read | Fail => {}
            Op(_, a, b) | Geq(a, b) | Let(_, _, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            If(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
            Call(_, a) | Write(a) | Ret(a) => a.walk(f),
        }
    }

    pub fn any(&self, pred: &dyn Fn(&SrcExpr) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= pred(e));
        found
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Function names called anywhere in the expression.
    pub fn called_functions(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let SrcExpr::Call(f, _) = e {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
        });
        out
    }

    /// Every identifier bound or used in the expression.
    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| match e {
            SrcExpr::Var(x) | SrcExpr::Let(x, ..) => out.push(x.clone()),
            _ => {}
        });
        out
    }
}

impl fmt::Display for SrcExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SrcExpr::*;
        match self {
            Var(x) => write!(f, "{x}"),
            Nat(n) => write!(f, "{n}"),
            True => write!(f, "true"),
            False => write!(f, "false"),
            Op(o, a, b) => write!(f, "({} {a} {b})", o.symbol()),
            Geq(a, b) => write!(f, "(>= {a} {b})"),
            Let(x, t, a, b) => write!(f, "(let {x} {t} {a} {b})"),
            If(c, a, b) => write!(f, "(if {c} {a} {b})"),
            Call(g, a) => write!(f, "(call {g} {a})"),
            Read => write!(f, "(read)"),
            Write(a) => write!(f, "(write {a})"),
            Fail => write!(f, "fail"),
            Ret(a) => write!(f, "(ret {a})"),
        }
    }
}

/// A declared interface function `f : arg → ret`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IfaceEntry {
    pub name: String,
    pub arg: Ty,
    pub ret: Ty,
}

impl IfaceEntry {
    pub fn new(name: &str, arg: Ty, ret: Ty) -> Self {
        IfaceEntry { name: name.to_string(), arg, ret }
    }
}

/// A typed interface.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Iface {
    pub entries: Vec<IfaceEntry>,
}

impl Iface {
    pub fn new(entries: Vec<IfaceEntry>) -> Self {
        Iface { entries }
    }

    pub fn get(&self, f: &str) -> Option<&IfaceEntry> {
        self.entries.iter().find(|e| e.name == f)
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }
}

impl fmt::Display for Iface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(iface")?;
        for e in &self.entries {
            write!(f, " ({} (-> {} {}))", e.name, e.arg, e.ret)?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SrcFun {
    pub name: String,
    pub param: String,
    pub arg: Ty,
    pub ret: Ty,
    pub body: SrcExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SrcProgram {
    pub iface: Iface,
    pub funs: Vec<SrcFun>,
}

impl SrcProgram {
    pub fn fun(&self, f: &str) -> Option<&SrcFun> {
        self.funs.iter().find(|d| d.name == f)
    }
}

impl fmt::Display for SrcProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(program {}", self.iface)?;
        for d in &self.funs {
            write!(f, " (fun {} ({} {}) {} {})", d.name, d.param, d.arg, d.ret, d.body)?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SrcContext {
    pub body: SrcExpr,
}

impl SrcContext {
    pub fn new(body: SrcExpr) -> Self {
        SrcContext { body }
    }
}

impl fmt::Display for SrcContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

/// Runs a linked whole program on a fixed input script.
pub fn run(w: &SrcWhole, inputs: &[u64], budget: u64, informative: bool) -> RunOutcome {
    run_machine(SrcMachine::new(w, informative), inputs, budget)
}

/// All traces of `C[P]` over input scripts of length at most `input_len`.
pub fn behaviors(
    p: &SrcProgram,
    c: &SrcContext,
    domain: &[u64],
    input_len: usize,
    budget: u64,
) -> Result<Behavior, LinkError> {
    let w = link(p, c)?;
    Ok(explore(SrcMachine::new(&w, false), domain, input_len, budget))
}

/// Informative variant of [`behaviors`].
pub fn informative_behaviors(
    w: &SrcWhole,
    domain: &[u64],
    input_len: usize,
    budget: u64,
) -> Behavior {
    explore(SrcMachine::new(w, true), domain, input_len, budget)
}
