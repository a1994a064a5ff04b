use std::sync::Arc;

use crate::explore::{Machine, StepOutcome};
use crate::trace::{Event, TerminalMark, Value};

use super::typing::{typecheck_context, typecheck_program, LinkError};
use super::{SrcContext, SrcExpr, SrcProgram, Ty};

/// A program linked with a context, ready to run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrcWhole {
    pub program: Arc<SrcProgram>,
    pub init: SrcExpr,
}

/// Links a program with a context, checking every linking premise in turn.
pub fn link(p: &SrcProgram, c: &SrcContext) -> Result<SrcWhole, LinkError> {
    typecheck_program(p).map_err(LinkError::IllTypedProgram)?;
    if p.funs.iter().any(|d| d.body.any(&|e| matches!(e, SrcExpr::Fail))) {
        return Err(LinkError::FailInProgram);
    }
    if c.body.any(&|e| matches!(e, SrcExpr::Read | SrcExpr::Write(_))) {
        return Err(LinkError::IoInContext);
    }
    if let Some(f) = c.body.called_functions().into_iter().find(|f| p.iface.get(f).is_none()) {
        return Err(LinkError::UnknownFunction(f));
    }
    if c.body.any(&|e| matches!(e, SrcExpr::Ret(_))) {
        return Err(LinkError::Malformed("context contains a runtime return".into()));
    }
    typecheck_context(c, &p.iface).map_err(LinkError::IllTypedContext)?;
    Ok(SrcWhole { program: Arc::new(p.clone()), init: c.body.clone() })
}

/// An internal call that has not returned yet, used to detect silent recursion
/// that pumps the stack forever.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PendingCall {
    fname: String,
    arg: Value,
    depth: usize,
}

/// Small-step machine for whole source programs.
#[derive(Clone, Debug)]
pub struct SrcMachine {
    program: Arc<SrcProgram>,
    expr: SrcExpr,
    stack: Vec<String>,
    informative: bool,
    failed: bool,
    pending_input: Option<u64>,
    pending_calls: Vec<PendingCall>,
    partial: bool,
    awaiting: bool,
}

/// Placeholder for the value a partial context is waiting for; never a valid identifier.
const HOLE: &str = "#ret";

enum Red {
    Silent,
    Emit(Event),
    Fail,
    Stuck,
    NeedInput,
    Diverge,
}

impl SrcMachine {
    pub fn new(w: &SrcWhole, informative: bool) -> Self {
        SrcMachine {
            program: w.program.clone(),
            expr: w.init.clone(),
            stack: Vec::new(),
            informative,
            failed: false,
            pending_input: None,
            pending_calls: Vec::new(),
            partial: false,
            awaiting: false,
        }
    }

    /// A machine for the context alone: each boundary call is emitted and then
    /// waits for [`Self::answer`] to supply the returned value.
    pub fn partial_context(w: &SrcWhole) -> Self {
        let mut m = Self::new(w, true);
        m.partial = true;
        m
    }

    pub fn awaiting_return(&self) -> bool {
        self.awaiting
    }

    /// Resumes a partial context after a boundary call, as if it returned `v`.
    pub fn answer(&mut self, v: Value) {
        assert!(self.awaiting, "no call is waiting for a return value");
        self.expr.subst_mut(HOLE, v);
        self.awaiting = false;
    }

    pub fn expr(&self) -> &SrcExpr {
        &self.expr
    }

    pub fn stack(&self) -> &[String] {
        &self.stack
    }

    pub fn program(&self) -> &SrcProgram {
        &self.program
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    /// The configuration as a comparable string (stack and expression).
    pub fn config_key(&self) -> String {
        if self.failed {
            return "fail".into();
        }
        format!("{}|{}", self.stack.join(","), self.expr)
    }

    fn reduce(&mut self, e: &mut SrcExpr) -> Red {
        use SrcExpr::*;
        match e {
            Var(_) | Nat(_) | True | False => Red::Stuck,
            Fail => Red::Fail,
            Op(op, a, b) => {
                if !b.is_value() {
                    return self.reduce(b);
                }
                if !a.is_value() {
                    return self.reduce(a);
                }
                match (a.as_value(), b.as_value()) {
                    (Some(Value::Nat(x)), Some(Value::Nat(y))) => {
                        *e = Nat(op.apply(x, y));
                        Red::Silent
                    }
                    _ => Red::Stuck,
                }
            }
            Geq(a, b) => {
                if !b.is_value() {
                    return self.reduce(b);
                }
                if !a.is_value() {
                    return self.reduce(a);
                }
                match (a.as_value(), b.as_value()) {
                    (Some(Value::Nat(x)), Some(Value::Nat(y))) => {
                        *e = if x >= y { True } else { False };
                        Red::Silent
                    }
                    _ => Red::Stuck,
                }
            }
            Let(x, _, a, b) => {
                if !a.is_value() {
                    return self.reduce(a);
                }
                let v = a.as_value().expect("value");
                let mut body = std::mem::replace(&mut **b, Fail);
                body.subst_mut(x, v);
                *e = body;
                Red::Silent
            }
            If(c, a, b) => {
                if !c.is_value() {
                    return self.reduce(c);
                }
                match **c {
                    True => *e = std::mem::replace(&mut **a, Fail),
                    False => *e = std::mem::replace(&mut **b, Fail),
                    _ => return Red::Stuck,
                }
                Red::Silent
            }
            Call(f, a) => {
                if !a.is_value() {
                    return self.reduce(a);
                }
                let v = a.as_value().expect("value");
                if self.partial && self.stack.is_empty() {
                    let ev = Event::Call(f.clone(), v);
                    self.stack.push(f.clone());
                    *e = Ret(Box::new(Var(HOLE.to_string())));
                    self.awaiting = true;
                    return Red::Emit(ev);
                }
                let Some(def) = self.program.fun(f) else {
                    return Red::Stuck;
                };
                let depth = self.stack.len();
                let label = if depth == 0 {
                    if self.informative {
                        Red::Emit(Event::Call(f.clone(), v))
                    } else {
                        Red::Silent
                    }
                } else {
                    if self.pending_calls.iter().any(|c| c.fname == *f && c.arg == v && c.depth < depth) {
                        return Red::Diverge;
                    }
                    self.pending_calls.push(PendingCall { fname: f.clone(), arg: v, depth });
                    Red::Silent
                };
                let body = def.body.subst(&def.param, v);
                self.stack.push(f.clone());
                *e = Ret(Box::new(body));
                label
            }
            Ret(a) => {
                if !a.is_value() {
                    return self.reduce(a);
                }
                let v = a.as_value().expect("value");
                self.stack.pop();
                let depth = self.stack.len();
                while self.pending_calls.last().is_some_and(|c| c.depth >= depth) {
                    self.pending_calls.pop();
                }
                *e = SrcExpr::value(v);
                if depth == 0 && self.informative {
                    Red::Emit(Event::Ret(v))
                } else {
                    Red::Silent
                }
            }
            Read => match self.pending_input.take() {
                Some(n) => {
                    *e = Nat(n);
                    Red::Emit(Event::Read(n))
                }
                None => Red::NeedInput,
            },
            Write(a) => {
                if !a.is_value() {
                    return self.reduce(a);
                }
                match a.as_value() {
                    Some(Value::Nat(n)) => {
                        *e = Nat(n);
                        Red::Emit(Event::Write(n))
                    }
                    _ => Red::Stuck,
                }
            }
        }
    }
}

impl Machine for SrcMachine {
    fn step(&mut self) -> StepOutcome {
        if self.failed {
            return StepOutcome::Halt(TerminalMark::Terminated(None));
        }
        if self.expr.is_value() && self.stack.is_empty() {
            return StepOutcome::Halt(TerminalMark::Terminated(None));
        }
        if self.awaiting {
            return StepOutcome::Halt(TerminalMark::Open);
        }
        let mut e = std::mem::replace(&mut self.expr, SrcExpr::Fail);
        let r = self.reduce(&mut e);
        self.expr = e;
        match r {
            Red::Silent => StepOutcome::Silent,
            Red::Emit(ev) => {
                self.pending_calls.clear();
                StepOutcome::Emit(ev)
            }
            Red::Fail => {
                self.failed = true;
                StepOutcome::Emit(Event::FailAct)
            }
            Red::Stuck => StepOutcome::Halt(TerminalMark::Terminated(None)),
            Red::NeedInput => StepOutcome::NeedInput,
            Red::Diverge => StepOutcome::Halt(TerminalMark::SilentDiv),
        }
    }

    fn feed(&mut self, n: u64) -> StepOutcome {
        self.pending_input = Some(n);
        let out = self.step();
        self.pending_input = None;
        out
    }
}

/// Runtime typing of a configuration, used to test progress and preservation.
pub fn config_type(m: &SrcMachine) -> Result<Ty, super::TypeError> {
    let ctx = SrcContext::new(m.expr.clone());
    super::typecheck_context(&ctx, &m.program.iface)
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::trace::{TerminalMark, TracePrefix};

    fn prog(s: &str) -> SrcProgram {
        parse_src_program(s).unwrap()
    }

    fn ctx(s: &str) -> SrcContext {
        parse_src_context(s).unwrap()
    }

    #[test]
    fn informative_and_plain_runs() {
        let p = prog("(program (iface (f (-> nat nat))) (fun f (x nat) nat (write x)))");
        let w = link(&p, &ctx("(call f 3)")).unwrap();
        let t = run(&w, &[], 100, true).trace;
        assert_eq!(
            t,
            TracePrefix::terminated(vec![
                Event::Call("f".into(), Value::Nat(3)),
                Event::Write(3),
                Event::Ret(Value::Nat(3))
            ])
        );
        assert_eq!(run(&w, &[], 100, false).trace, TracePrefix::terminated(vec![Event::Write(3)]));
    }

    #[test]
    fn self_call_diverges_silently() {
        let p = prog("(program (iface (f (-> nat nat))) (fun f (x nat) nat (call f x)))");
        let w = link(&p, &ctx("(call f 0)")).unwrap();
        assert_eq!(run(&w, &[], 1000, false).trace, TracePrefix::diverging(vec![]));
    }

    #[test]
    fn growing_arguments_are_truncated() {
        let p = prog("(program (iface (f (-> nat nat))) (fun f (x nat) nat (call f (+ x 1))))");
        let w = link(&p, &ctx("(call f 0)")).unwrap();
        assert!(matches!(run(&w, &[], 200, false).trace.end, TerminalMark::Truncated(_)));
    }

    #[test]
    fn echo_behaviours() {
        let p = prog("(program (iface (f (-> nat nat))) (fun f (x nat) nat (write (read))))");
        let b = behaviors(&p, &ctx("(call f 0)"), &[0, 1], 1, 100).unwrap();
        let expect: Behavior = [
            TracePrefix::terminated(vec![Event::Read(0), Event::Write(0)]),
            TracePrefix::terminated(vec![Event::Read(1), Event::Write(1)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(b, expect);
        let no_read = prog("(program (iface (f (-> nat nat))) (fun f (x nat) nat (+ x 1)))");
        assert_eq!(behaviors(&no_read, &ctx("(call f 0)"), &[0, 1], 1, 100).unwrap().len(), 1);
    }

    #[test]
    fn link_errors_name_the_premise() {
        let p = prog("(program (iface (f (-> nat nat))) (fun f (x nat) nat x))");
        assert_eq!(link(&p, &ctx("(write 3)")).unwrap_err().premise(), "io_in_context");
        assert_eq!(link(&p, &ctx("(call g 1)")).unwrap_err().premise(), "unknown_function");
        let bad = prog("(program (iface (f (-> nat nat))) (fun f (x nat) nat fail))");
        assert_eq!(link(&bad, &ctx("(call f 1)")).unwrap_err().premise(), "fail_in_program");
    }

    #[test]
    fn context_fail_emits_once_and_terminates() {
        let p = prog("(program (iface (f (-> nat nat))) (fun f (x nat) nat x))");
        let w = link(&p, &ctx("(+ (call f 1) fail)")).unwrap();
        assert_eq!(run(&w, &[], 100, true).trace, TracePrefix::terminated(vec![Event::FailAct]));
    }

    #[test]
    fn right_operand_runs_first() {
        let p = prog("(program (iface (f (-> nat nat)) (g (-> nat nat))) (fun f (x nat) nat (write 1)) (fun g (x nat) nat (write 2)))");
        let w = link(&p, &ctx("(+ (call f 0) (call g 0))")).unwrap();
        assert_eq!(run(&w, &[], 100, false).trace, TracePrefix::terminated(vec![Event::Write(2), Event::Write(1)]));
    }
}
