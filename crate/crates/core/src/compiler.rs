//! Type-erasing compiler from the source to the target language. Each
//! function body is guarded by a dynamic check of its argument.

use crate::source::{self, typecheck_context, typecheck_program, LinkError, SrcContext, SrcExpr, SrcProgram, TypeError};
use crate::target::{self, TgtContext, TgtExpr, TgtFun, TgtProgram};
use crate::trace::{TerminalMark, TracePrefix};

pub fn compile_expr(e: &SrcExpr) -> TgtExpr {
    use SrcExpr as S;
    let b = |x: &SrcExpr| Box::new(compile_expr(x));
    match e {
        S::Var(x) => TgtExpr::Var(x.clone()),
        S::Nat(n) => TgtExpr::Nat(*n),
        S::True => TgtExpr::True,
        S::False => TgtExpr::False,
        S::Op(o, x, y) => TgtExpr::Op(*o, b(x), b(y)),
        S::Geq(x, y) => TgtExpr::Geq(b(x), b(y)),
        S::Let(x, _, e1, e2) => TgtExpr::Let(x.clone(), b(e1), b(e2)),
        S::If(c, x, y) => TgtExpr::If(b(c), b(x), b(y)),
        S::Call(f, x) => TgtExpr::Call(f.clone(), b(x)),
        S::Read => TgtExpr::Read,
        S::Write(x) => TgtExpr::Write(b(x)),
        S::Fail => TgtExpr::Fail,
        S::Ret(x) => TgtExpr::Ret(b(x)),
    }
}

/// Compiles a well-typed program, preserving declaration order.
pub fn compile_program(p: &SrcProgram) -> Result<TgtProgram, TypeError> {
    typecheck_program(p)?;
    Ok(TgtProgram {
        iface: p.iface.names(),
        funs: p
            .funs
            .iter()
            .map(|d| TgtFun {
                name: d.name.clone(),
                param: d.param.clone(),
                body: TgtExpr::ite(
                    TgtExpr::check(TgtExpr::var(&d.param), d.arg),
                    compile_expr(&d.body),
                    TgtExpr::Fail,
                ),
            })
            .collect(),
    })
}

/// Compiles a context that type-checks against the interface of `p`.
pub fn compile_context(c: &SrcContext, iface: &source::Iface) -> Result<TgtContext, TypeError> {
    typecheck_context(c, iface)?;
    Ok(TgtContext::new(compile_expr(&c.body)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Correctness {
    Accept(TracePrefix),
    Reject { source: TracePrefix, target: TracePrefix },
    Unknown { source: TracePrefix, target: TracePrefix },
}

/// Runs `C[P]` and its compiled counterpart on the same inputs and compares
/// the traces, terminal marks included.
pub fn check_correctness(
    p: &SrcProgram,
    c: &SrcContext,
    inputs: &[u64],
    budget: u64,
) -> Result<Correctness, LinkError> {
    let w = source::link(p, c)?;
    let tp = compile_program(p).map_err(LinkError::IllTypedProgram)?;
    let tc = compile_context(c, &p.iface).map_err(LinkError::IllTypedContext)?;
    let tw = target::link(&tp, &tc).map_err(|e| LinkError::Malformed(e.to_string()))?;
    let s = source::run(&w, inputs, budget, false).trace;
    let t = target::run(&tw, inputs, budget, false).trace;
    Ok(compare_runs(s, t))
}

pub fn compare_runs(source: TracePrefix, target: TracePrefix) -> Correctness {
    let trunc = |t: &TracePrefix| matches!(t.end, TerminalMark::Truncated(_));
    if trunc(&source) || trunc(&target) {
        Correctness::Unknown { source, target }
    } else if source == target {
        Correctness::Accept(source)
    } else {
        Correctness::Reject { source, target }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{parse_src_context, parse_src_program};
    use crate::trace::Event;

    #[test]
    fn function_bodies_are_guarded() {
        let p = parse_src_program("(program (iface (f (-> bool nat))) (fun f (x bool) nat 7))").unwrap();
        let t = compile_program(&p).unwrap();
        assert_eq!(t.to_string(), "(program (iface f) (fun f (x) (if (check x bool) 7 fail)))");
    }

    #[test]
    fn expression_rules() {
        assert_eq!(compile_expr(&SrcExpr::True), TgtExpr::True);
        let c = parse_src_context("(let x nat (call f 1) (+ x 1))").unwrap();
        assert_eq!(compile_expr(&c.body).to_string(), "(let x (call f 1) (+ x 1))");
        let c = parse_src_context("(if (call g true) 0 1)").unwrap();
        assert_eq!(compile_expr(&c.body).to_string(), "(if (call g true) 0 1)");
    }

    #[test]
    fn correctness_examples() {
        let echo = parse_src_program("(program (iface (f (-> nat nat))) (fun f (x nat) nat (write (read))))").unwrap();
        let c = parse_src_context("(call f 0)").unwrap();
        assert_eq!(
            check_correctness(&echo, &c, &[5], 100).unwrap(),
            Correctness::Accept(TracePrefix::terminated(vec![Event::Read(5), Event::Write(5)]))
        );
        let looping = parse_src_program("(program (iface (f (-> nat nat))) (fun f (x nat) nat (call f x)))").unwrap();
        assert_eq!(
            check_correctness(&looping, &c, &[], 1000).unwrap(),
            Correctness::Accept(TracePrefix::diverging(vec![]))
        );
        let mismatch = compare_runs(TracePrefix::terminated(vec![Event::Write(1)]), TracePrefix::terminated(vec![]));
        assert!(matches!(mismatch, Correctness::Reject { .. }));
    }
}
