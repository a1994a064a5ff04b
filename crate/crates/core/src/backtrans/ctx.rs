//! Context-based back-translation: every target value is embedded into the
//! source naturals (`n ↦ n+2`, `true ↦ 1`, `false ↦ 0`), with helpers that
//! move between the embedding and the real source types.

use std::collections::HashSet;

use thiserror::Error;

use crate::source::{self, BinOp, Iface, SrcContext, SrcExpr, SrcProgram, Ty};
use crate::target::{TgtContext, TgtExpr};
use crate::trace::{Event, TerminalMark, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BacktransError {
    #[error("context calls `{0}`, which is not in the interface")]
    UnknownFunction(String),
    #[error("context performs input or output")]
    IoInContext,
    #[error("context contains a runtime return")]
    Malformed,
}

/// Hands out variable names that do not clash with the context's own.
struct Fresh {
    taken: HashSet<String>,
    next: usize,
}

impl Fresh {
    fn new(taken: impl IntoIterator<Item = String>) -> Self {
        Fresh { taken: taken.into_iter().collect(), next: 0 }
    }

    fn name(&mut self, hint: &str) -> String {
        loop {
            self.next += 1;
            let n = format!("{hint}_{}", self.next);
            if self.taken.insert(n.clone()) {
                return n;
            }
        }
    }
}

pub fn inject(t: Ty, e: SrcExpr) -> SrcExpr {
    match t {
        Ty::Nat => SrcExpr::op(BinOp::Add, e, SrcExpr::Nat(2)),
        Ty::Bool => SrcExpr::ite(e, SrcExpr::Nat(1), SrcExpr::Nat(0)),
    }
}

fn extract_with(t: Ty, e: SrcExpr, x: &str) -> SrcExpr {
    let v = SrcExpr::var(x);
    let body = match t {
        Ty::Nat => SrcExpr::ite(
            SrcExpr::geq(v.clone(), SrcExpr::Nat(2)),
            SrcExpr::op(BinOp::Sub, v, SrcExpr::Nat(2)),
            SrcExpr::Fail,
        ),
        Ty::Bool => SrcExpr::ite(
            SrcExpr::geq(v.clone(), SrcExpr::Nat(2)),
            SrcExpr::Fail,
            SrcExpr::ite(
                SrcExpr::geq(SrcExpr::op(BinOp::Add, v, SrcExpr::Nat(1)), SrcExpr::Nat(2)),
                SrcExpr::True,
                SrcExpr::False,
            ),
        ),
    };
    SrcExpr::let_in(x, Ty::Nat, e, body)
}

/// `extract_τ(e)` with a binder that cannot capture anything in `e`.
pub fn extract(t: Ty, e: SrcExpr) -> SrcExpr {
    let mut fresh = Fresh::new(e.names());
    let x = fresh.name("x");
    extract_with(t, e, &x)
}

struct Translator<'a> {
    iface: &'a Iface,
    fresh: Fresh,
}

impl Translator<'_> {
    fn expr(&mut self, e: &TgtExpr) -> Result<SrcExpr, BacktransError> {
        use TgtExpr as T;
        Ok(match e {
            T::Nat(n) => SrcExpr::Nat(n.saturating_add(2)),
            T::True => SrcExpr::Nat(1),
            T::False => SrcExpr::Nat(0),
            T::Var(x) => SrcExpr::Var(x.clone()),
            T::Fail => SrcExpr::Fail,
            T::Op(op, a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                self.binary(a, b, |x1, x2| inject(Ty::Nat, SrcExpr::op(*op, x1, x2)))
            }
            T::Geq(a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                self.binary(a, b, |x1, x2| inject(Ty::Bool, SrcExpr::geq(x1, x2)))
            }
            T::Let(x, a, b) => SrcExpr::let_in(x, Ty::Nat, self.expr(a)?, self.expr(b)?),
            T::If(c, a, b) => {
                let c = self.expr(c)?;
                let x = self.fresh.name("c");
                SrcExpr::ite(extract_with(Ty::Bool, c, &x), self.expr(a)?, self.expr(b)?)
            }
            T::Check(a, t) => {
                let a = self.expr(a)?;
                let x = self.fresh.name("k");
                let (on_nat, on_bool) = match t {
                    Ty::Bool => (0, 1),
                    Ty::Nat => (1, 0),
                };
                SrcExpr::let_in(
                    &x,
                    Ty::Nat,
                    a,
                    SrcExpr::ite(
                        SrcExpr::geq(SrcExpr::var(&x), SrcExpr::Nat(2)),
                        SrcExpr::Nat(on_nat),
                        SrcExpr::Nat(on_bool),
                    ),
                )
            }
            T::Call(f, a) => {
                let entry = self.iface.get(f).ok_or_else(|| BacktransError::UnknownFunction(f.clone()))?;
                let (arg, ret) = (entry.arg, entry.ret);
                let a = self.expr(a)?;
                let x = self.fresh.name("a");
                inject(ret, SrcExpr::call(f, extract_with(arg, a, &x)))
            }
            T::Read | T::Write(_) => return Err(BacktransError::IoInContext),
            T::Ret(_) => return Err(BacktransError::Malformed),
        })
    }

    /// Both operands are evaluated right to left, like the target does, and
    /// only then checked, so a failing operand fires after every effect of
    /// the other one.
    fn binary(&mut self, a: SrcExpr, b: SrcExpr, combine: impl FnOnce(SrcExpr, SrcExpr) -> SrcExpr) -> SrcExpr {
        let y2 = self.fresh.name("r");
        let y1 = self.fresh.name("l");
        let x1 = self.fresh.name("n");
        let x2 = self.fresh.name("m");
        let t1 = self.fresh.name("t");
        let t2 = self.fresh.name("t");
        SrcExpr::let_in(
            &y2,
            Ty::Nat,
            b,
            SrcExpr::let_in(
                &y1,
                Ty::Nat,
                a,
                SrcExpr::let_in(
                    &x1,
                    Ty::Nat,
                    extract_with(Ty::Nat, SrcExpr::var(&y1), &t1),
                    SrcExpr::let_in(
                        &x2,
                        Ty::Nat,
                        extract_with(Ty::Nat, SrcExpr::var(&y2), &t2),
                        combine(SrcExpr::var(&x1), SrcExpr::var(&x2)),
                    ),
                ),
            ),
        )
    }
}

/// Back-translates a target context against a typed interface. The result
/// type-checks at `nat`.
pub fn backtranslate_ctx(c: &TgtContext, iface: &Iface) -> Result<SrcContext, BacktransError> {
    let mut t = Translator { iface, fresh: Fresh::new(c.body.names()) };
    Ok(SrcContext::new(t.expr(&c.body)?))
}

/// The source value a target value is encoded as.
pub fn encode_value(v: Value) -> u64 {
    match v {
        Value::Nat(n) => n.saturating_add(2),
        Value::Bool(true) => 1,
        Value::Bool(false) => 0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Inject,
    Extract,
}

/// Evaluates `inject_τ(v)` or `extract_τ(v)`; `None` means the helper failed.
pub fn inject_extract_eval(dir: Direction, t: Ty, v: Value) -> Option<Value> {
    let body = match dir {
        Direction::Inject => inject(t, SrcExpr::value(v)),
        Direction::Extract => extract(t, SrcExpr::value(v)),
    };
    eval_closed(&body)
}

/// Runs a closed source expression with no program; `None` if it fails.
pub fn eval_closed(e: &SrcExpr) -> Option<Value> {
    eval_linked(&SrcProgram { iface: Iface::default(), funs: vec![] }, &SrcContext::new(e.clone()))
}

/// Runs `C[P]` to completion and returns the final value, or `None` on failure.
pub fn eval_linked(p: &SrcProgram, c: &SrcContext) -> Option<Value> {
    use crate::explore::{Machine, StepOutcome};
    let w = source::link(p, c).ok()?;
    let mut m = source::SrcMachine::new(&w, false);
    for _ in 0..100_000 {
        match m.step() {
            StepOutcome::Silent => {}
            StepOutcome::Emit(Event::FailAct) => return None,
            StepOutcome::Emit(_) | StepOutcome::NeedInput => return None,
            StepOutcome::Halt(TerminalMark::Terminated(_)) => return m.expr().as_value(),
            StepOutcome::Halt(_) => return None,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{parse_src_program, typecheck_context};
    use crate::target::parse_tgt_context;

    fn iface() -> Iface {
        parse_src_program("(program (iface (f (-> nat nat)) (g (-> bool bool))) (fun f (x nat) nat x) (fun g (b bool) bool b))")
            .unwrap()
            .iface
    }

    #[test]
    fn helper_values() {
        use Direction::*;
        assert_eq!(inject_extract_eval(Extract, Ty::Nat, Value::Nat(5)), Some(Value::Nat(3)));
        assert_eq!(inject_extract_eval(Extract, Ty::Nat, Value::Nat(7)), Some(Value::Nat(5)));
        assert_eq!(inject_extract_eval(Extract, Ty::Nat, Value::Nat(0)), None);
        assert_eq!(inject_extract_eval(Extract, Ty::Bool, Value::Nat(0)), Some(Value::Bool(false)));
        assert_eq!(inject_extract_eval(Extract, Ty::Bool, Value::Nat(1)), Some(Value::Bool(true)));
        assert_eq!(inject_extract_eval(Extract, Ty::Bool, Value::Nat(2)), None);
        assert_eq!(inject_extract_eval(Inject, Ty::Bool, Value::Bool(true)), Some(Value::Nat(1)));
        assert_eq!(inject_extract_eval(Inject, Ty::Nat, Value::Nat(4)), Some(Value::Nat(6)));
    }

    #[test]
    fn check_bool_encoding() {
        let c = parse_tgt_context("(check y bool)").unwrap();
        let s = backtranslate_ctx(&c, &iface()).unwrap();
        assert_eq!(s.body.to_string(), "(let k_1 nat y (if (>= k_1 2) 0 1))");
    }

    #[test]
    fn arithmetic_is_shifted() {
        let c = parse_tgt_context("(+ 10 5)").unwrap();
        let s = backtranslate_ctx(&c, &iface()).unwrap();
        assert_eq!(typecheck_context(&s, &iface()), Ok(Ty::Nat));
        assert_eq!(eval_closed(&s.body), Some(Value::Nat(17)));
        let c = parse_tgt_context("(+ false 3)").unwrap();
        assert_eq!(eval_closed(&backtranslate_ctx(&c, &iface()).unwrap().body), None);
    }

    #[test]
    fn fresh_names_avoid_context_names() {
        let c = parse_tgt_context("(let r_1 4 (+ r_1 (check r_1 nat)))").unwrap();
        let s = backtranslate_ctx(&c, &iface()).unwrap();
        assert_eq!(eval_closed(&s.body), None);
        let c = parse_tgt_context("(let r_1 4 (+ r_1 r_1))").unwrap();
        assert_eq!(eval_closed(&backtranslate_ctx(&c, &iface()).unwrap().body), Some(Value::Nat(10)));
    }

    #[test]
    fn unknown_call_is_rejected() {
        let c = parse_tgt_context("(call h 1)").unwrap();
        assert_eq!(backtranslate_ctx(&c, &iface()), Err(BacktransError::UnknownFunction("h".into())));
    }
}
