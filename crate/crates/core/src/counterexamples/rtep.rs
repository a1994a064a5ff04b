//! One-function programs over a natural or boolean argument, compiled to a
//! language of naturals only. Compiled boolean functions guard their argument
//! and misbehave on values that encode no boolean.

use std::fmt;

use crate::criteria::{Backtranslation, Bounds, Chain, ChainError, Enumeration, Goal};
use crate::trace::{Behavior, Event, TracePrefix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArgTy {
    Nat,
    Bool,
}

impl fmt::Display for ArgTy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgTy::Nat => "nat",
            ArgTy::Bool => "bool",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SExpr {
    /// `if x then a else b`
    IfX(Box<SExpr>, Box<SExpr>),
    /// `if x < n then a else b`
    IfLt(u64, Box<SExpr>, Box<SExpr>),
    Num(u64),
    Call(Box<SExpr>),
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::IfX(a, b) => write!(f, "(if x {a} {b})"),
            SExpr::IfLt(n, a, b) => write!(f, "(if (< x {n}) {a} {b})"),
            SExpr::Num(n) => write!(f, "{n}"),
            SExpr::Call(a) => write!(f, "(f {a})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SProg {
    pub arg: ArgTy,
    pub body: SExpr,
}

impl SProg {
    pub fn new(arg: ArgTy, body: SExpr) -> Self {
        SProg { arg, body }
    }

    pub fn typecheck(&self) -> Result<(), String> {
        fn go(e: &SExpr, arg: ArgTy) -> Result<(), String> {
            match e {
                SExpr::IfX(a, b) if arg == ArgTy::Bool => go(a, arg).and(go(b, arg)),
                SExpr::IfX(..) => Err("`if x` needs a boolean argument".into()),
                SExpr::IfLt(_, a, b) if arg == ArgTy::Nat => go(a, arg).and(go(b, arg)),
                SExpr::IfLt(..) => Err("`x < n` needs a natural argument".into()),
                SExpr::Num(_) => Ok(()),
                SExpr::Call(a) if arg == ArgTy::Nat => go(a, arg),
                SExpr::Call(_) => Err("f expects a boolean but expressions are natural".into()),
            }
        }
        go(&self.body, self.arg)
    }
}

impl fmt::Display for SProg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f(x:{}) ↦ {}", self.arg, self.body)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TExpr {
    IfLt(u64, Box<TExpr>, Box<TExpr>),
    Num(u64),
    Call(Box<TExpr>),
}

impl TExpr {
    fn ite(n: u64, a: TExpr, b: TExpr) -> TExpr {
        TExpr::IfLt(n, Box::new(a), Box::new(b))
    }
}

impl fmt::Display for TExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TExpr::IfLt(n, a, b) => write!(f, "(if (< x {n}) {a} {b})"),
            TExpr::Num(n) => write!(f, "{n}"),
            TExpr::Call(a) => write!(f, "(f {a})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TProg {
    pub body: TExpr,
}

impl fmt::Display for TProg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f(x:nat) ↦ {}", self.body)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SCtx {
    Nat(u64),
    Bool(bool),
}

impl fmt::Display for SCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SCtx::Nat(n) => write!(f, "f({n})"),
            SCtx::Bool(b) => write!(f, "f({b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TCtx(pub u64);

impl fmt::Display for TCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f({})", self.0)
    }
}

fn compile_expr(e: &SExpr) -> TExpr {
    match e {
        SExpr::IfX(a, b) => TExpr::ite(1, compile_expr(a), compile_expr(b)),
        SExpr::IfLt(n, a, b) => TExpr::ite(*n, compile_expr(a), compile_expr(b)),
        SExpr::Num(n) => TExpr::Num(*n),
        SExpr::Call(a) => TExpr::Call(Box::new(compile_expr(a))),
    }
}

pub fn compile(p: &SProg) -> Result<TProg, String> {
    p.typecheck()?;
    let body = compile_expr(&p.body);
    Ok(TProg {
        body: match p.arg {
            ArgTy::Nat => body,
            ArgTy::Bool => TExpr::ite(2, body, TExpr::ite(3, TExpr::Call(Box::new(TExpr::Num(2))), TExpr::Num(42))),
        },
    })
}

/// Calls `f` on `v`; `None` is silent divergence, detected as a call to an
/// argument whose evaluation is already in progress.
fn call_tgt(p: &TProg, v: u64, active: &mut Vec<u64>) -> Option<u64> {
    if active.contains(&v) {
        return None;
    }
    active.push(v);
    let r = eval_tgt(p, &p.body, v, active);
    active.pop();
    r
}

fn eval_tgt(p: &TProg, e: &TExpr, x: u64, active: &mut Vec<u64>) -> Option<u64> {
    match e {
        TExpr::IfLt(n, a, b) => eval_tgt(p, if x < *n { a } else { b }, x, active),
        TExpr::Num(n) => Some(*n),
        TExpr::Call(a) => {
            let v = eval_tgt(p, a, x, active)?;
            call_tgt(p, v, active)
        }
    }
}

fn call_src(p: &SProg, v: SCtx, active: &mut Vec<u64>) -> Option<u64> {
    if let SCtx::Nat(n) = v {
        if active.contains(&n) {
            return None;
        }
        active.push(n);
    }
    let r = eval_src(p, &p.body, v, active);
    if matches!(v, SCtx::Nat(_)) {
        active.pop();
    }
    r
}

fn eval_src(p: &SProg, e: &SExpr, x: SCtx, active: &mut Vec<u64>) -> Option<u64> {
    match (e, x) {
        (SExpr::IfX(a, b), SCtx::Bool(c)) => eval_src(p, if c { a } else { b }, x, active),
        (SExpr::IfLt(n, a, b), SCtx::Nat(v)) => eval_src(p, if v < *n { a } else { b }, x, active),
        (SExpr::Num(n), _) => Some(*n),
        (SExpr::Call(a), _) => {
            let v = eval_src(p, a, x, active)?;
            call_src(p, SCtx::Nat(v), active)
        }
        _ => unreachable!("typechecked programs only branch on their own argument type"),
    }
}

fn result_trace(r: Option<u64>) -> TracePrefix {
    match r {
        Some(n) => TracePrefix::terminated(vec![Event::out_int(n as i64)]),
        None => TracePrefix::diverging(vec![]),
    }
}

pub fn run_src(p: &SProg, c: SCtx) -> Result<TracePrefix, String> {
    p.typecheck()?;
    match (p.arg, c) {
        (ArgTy::Nat, SCtx::Nat(_)) | (ArgTy::Bool, SCtx::Bool(_)) => Ok(result_trace(call_src(p, c, &mut vec![]))),
        _ => Err(format!("context {c} does not link with {p}")),
    }
}

pub fn run_tgt(p: &TProg, c: TCtx) -> TracePrefix {
    result_trace(call_tgt(p, c.0, &mut vec![]))
}

/// The guarded compiler between the two languages.
#[derive(Clone, Copy, Debug, Default)]
pub struct RtepChain;

impl Chain for RtepChain {
    type SrcProg = SProg;
    type TgtProg = TProg;
    type SrcCtx = SCtx;
    type TgtCtx = TCtx;

    fn name(&self) -> String {
        "bool-guarding".into()
    }

    fn compile(&self, p: &SProg) -> Result<TProg, ChainError> {
        compile(p).map_err(ChainError::Compile)
    }

    fn src_behavior(&self, p: &SProg, c: &SCtx, _b: &Bounds) -> Result<Behavior, ChainError> {
        run_src(p, *c).map(|t| Behavior::from_iter([t])).map_err(ChainError::Link)
    }

    fn tgt_behavior(&self, p: &TProg, c: &TCtx, _b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(Behavior::from_iter([run_tgt(p, *c)]))
    }

    /// Complete for boolean programs. Natural arguments are unbounded, and
    /// programs of different argument types share no context.
    fn src_contexts(&self, programs: &[SProg], b: &Bounds) -> Enumeration<SCtx> {
        let Some(first) = programs.first() else { return Enumeration::complete(vec![]) };
        if programs.iter().any(|p| p.arg != first.arg) {
            return Enumeration::complete(vec![]);
        }
        match first.arg {
            ArgTy::Bool => Enumeration::complete(vec![SCtx::Bool(true), SCtx::Bool(false)]),
            ArgTy::Nat => Enumeration::partial((0..=b.ctx_size as u64).map(SCtx::Nat).collect()),
        }
    }

    fn tgt_contexts(&self, _programs: &[SProg], b: &Bounds) -> Enumeration<TCtx> {
        Enumeration::partial((0..=b.ctx_size as u64).map(TCtx).collect())
    }

    fn backtranslate(&self, c_t: &TCtx, programs: &[SProg], _goal: &Goal, _b: &Bounds) -> Backtranslation<SCtx> {
        let Some(first) = programs.first() else { return Backtranslation::Unavailable };
        match (first.arg, c_t.0) {
            (ArgTy::Nat, n) => Backtranslation::Candidates(vec![SCtx::Nat(n)]),
            (ArgTy::Bool, 0) => Backtranslation::Candidates(vec![SCtx::Bool(true)]),
            (ArgTy::Bool, 1) => Backtranslation::Candidates(vec![SCtx::Bool(false)]),
            (ArgTy::Bool, _) => Backtranslation::Unavailable,
        }
    }
}

fn num(n: u64) -> Box<SExpr> {
    Box::new(SExpr::Num(n))
}

/// `f(x:Bool) ↦ 0`, the program whose compilation outputs 42.
pub fn zero_on_bool() -> SProg {
    SProg::new(ArgTy::Bool, SExpr::Num(0))
}

/// A small pool of programs of both argument types, with some behaviourally equal pairs.
pub fn program_pool() -> Vec<SProg> {
    vec![
        zero_on_bool(),
        SProg::new(ArgTy::Bool, SExpr::IfX(num(0), num(0))),
        SProg::new(ArgTy::Bool, SExpr::IfX(num(1), num(0))),
        SProg::new(ArgTy::Bool, SExpr::Num(1)),
        SProg::new(ArgTy::Nat, SExpr::Num(0)),
        SProg::new(ArgTy::Nat, SExpr::IfLt(3, num(0), num(0))),
        SProg::new(ArgTy::Nat, SExpr::IfLt(2, num(7), Box::new(SExpr::Call(num(0))))),
        SProg::new(ArgTy::Nat, SExpr::IfLt(2, num(7), num(7))),
        SProg::new(ArgTy::Nat, SExpr::IfLt(1, num(4), Box::new(SExpr::Call(num(3))))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compiled_bool_function_guards_its_argument() {
        let t = compile(&zero_on_bool()).unwrap();
        assert_eq!(t.to_string(), "f(x:nat) ↦ (if (< x 2) 0 (if (< x 3) (f 2) 42))");
        assert_eq!(run_tgt(&t, TCtx(0)), TracePrefix::terminated(vec![Event::out_int(0)]));
        assert_eq!(run_tgt(&t, TCtx(2)), TracePrefix::diverging(vec![]));
        assert_eq!(run_tgt(&t, TCtx(3)), TracePrefix::terminated(vec![Event::out_int(42)]));
        assert_eq!(run_tgt(&t, TCtx(9)), TracePrefix::terminated(vec![Event::out_int(42)]));
    }

    #[test]
    fn booleans_compile_to_zero_and_one() {
        let p = SProg::new(ArgTy::Bool, SExpr::IfX(num(5), num(6)));
        let t = compile(&p).unwrap();
        assert_eq!(run_src(&p, SCtx::Bool(true)).unwrap(), run_tgt(&t, TCtx(0)));
        assert_eq!(run_src(&p, SCtx::Bool(false)).unwrap(), run_tgt(&t, TCtx(1)));
    }

    #[test]
    fn ill_typed_programs_are_rejected() {
        assert!(SProg::new(ArgTy::Bool, SExpr::Call(num(0))).typecheck().is_err());
        assert!(SProg::new(ArgTy::Nat, SExpr::IfX(num(0), num(1))).typecheck().is_err());
        assert!(run_src(&zero_on_bool(), SCtx::Nat(0)).is_err());
    }

    #[test]
    fn recursion_on_an_active_argument_diverges() {
        let p = SProg::new(ArgTy::Nat, SExpr::IfLt(2, num(7), Box::new(SExpr::Call(num(3)))));
        assert_eq!(run_src(&p, SCtx::Nat(3)).unwrap(), TracePrefix::diverging(vec![]));
        assert_eq!(run_src(&p, SCtx::Nat(1)).unwrap(), TracePrefix::terminated(vec![Event::out_int(7)]));
    }
}
