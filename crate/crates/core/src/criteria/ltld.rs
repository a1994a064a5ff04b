//! The chain from the typed source language to the untyped target language.

use crate::backtrans::{backtranslate_ctx, verify_rfrxc};
use crate::compiler::compile_program;
use crate::source::{self, BinOp, Iface, SrcContext, SrcExpr, SrcProgram, Ty};
use crate::target::{self, TgtContext, TgtExpr, TgtProgram};
use crate::trace::{Behavior, Event, TracePrefix};

use super::chain::{Backtranslation, Bounds, Chain, ChainError, Enumeration};
use super::{Goal, Requirement};

/// The compiler from the typed language to the untyped one, with context
/// back-translation and the trace-based pipeline as source context oracles.
#[derive(Clone, Copy, Debug, Default)]
pub struct LtLd;

fn constants(b: &Bounds) -> Vec<u64> {
    let mut cs: Vec<u64> = b.domain.iter().copied().chain(0..=2).collect();
    cs.sort_unstable();
    cs.dedup();
    cs
}

fn reads(t: &TracePrefix) -> Vec<u64> {
    t.events.iter().filter_map(|e| if let Event::Read(n) = e { Some(*n) } else { None }).collect()
}

/// Splits `total` into ordered sizes of `parts` positive pieces.
fn splits(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in splits(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

struct SrcEnum<'a> {
    iface: &'a Iface,
    consts: Vec<u64>,
}

impl SrcEnum<'_> {
    /// Well-typed context expressions of type `t` with exactly `n` nodes.
    fn exact(&self, n: usize, t: Ty, vars: &[(String, Ty)]) -> Vec<SrcExpr> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        if n == 1 {
            out.extend(vars.iter().filter(|(_, u)| *u == t).map(|(x, _)| SrcExpr::var(x)));
            match t {
                Ty::Nat => out.extend(self.consts.iter().map(|&c| SrcExpr::Nat(c))),
                Ty::Bool => out.extend([SrcExpr::True, SrcExpr::False]),
            }
            out.push(SrcExpr::Fail);
            return out;
        }
        for e in &self.iface.entries {
            if e.ret == t {
                for a in self.exact(n - 1, e.arg, vars) {
                    out.push(SrcExpr::call(&e.name, a));
                }
            }
        }
        for s in splits(n - 1, 2) {
            match t {
                Ty::Nat => {
                    for op in [BinOp::Add, BinOp::Sub] {
                        for a in self.exact(s[0], Ty::Nat, vars) {
                            for b in self.exact(s[1], Ty::Nat, vars) {
                                out.push(SrcExpr::op(op, a.clone(), b));
                            }
                        }
                    }
                }
                Ty::Bool => {
                    for a in self.exact(s[0], Ty::Nat, vars) {
                        for b in self.exact(s[1], Ty::Nat, vars) {
                            out.push(SrcExpr::geq(a.clone(), b));
                        }
                    }
                }
            }
            for u in [Ty::Nat, Ty::Bool] {
                let x = format!("z{}", vars.len());
                let mut inner = vars.to_vec();
                inner.push((x.clone(), u));
                for a in self.exact(s[0], u, vars) {
                    for b in self.exact(s[1], t, &inner) {
                        out.push(SrcExpr::let_in(&x, u, a.clone(), b));
                    }
                }
            }
        }
        for s in splits(n - 1, 3) {
            for c in self.exact(s[0], Ty::Bool, vars) {
                for a in self.exact(s[1], t, vars) {
                    for b in self.exact(s[2], t, vars) {
                        out.push(SrcExpr::ite(c.clone(), a.clone(), b));
                    }
                }
            }
        }
        out
    }
}

struct TgtEnum {
    names: Vec<String>,
    consts: Vec<u64>,
}

impl TgtEnum {
    fn exact(&self, n: usize, vars: &[String]) -> Vec<TgtExpr> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        if n == 1 {
            out.extend(vars.iter().map(|x| TgtExpr::var(x)));
            out.extend(self.consts.iter().map(|&c| TgtExpr::Nat(c)));
            out.extend([TgtExpr::True, TgtExpr::False, TgtExpr::Fail]);
            return out;
        }
        for a in self.exact(n - 1, vars) {
            for f in &self.names {
                out.push(TgtExpr::call(f, a.clone()));
            }
            out.push(TgtExpr::check(a.clone(), Ty::Nat));
            out.push(TgtExpr::check(a, Ty::Bool));
        }
        for s in splits(n - 1, 2) {
            for a in self.exact(s[0], vars) {
                for b in self.exact(s[1], vars) {
                    out.push(TgtExpr::op(BinOp::Add, a.clone(), b.clone()));
                    out.push(TgtExpr::op(BinOp::Sub, a.clone(), b.clone()));
                    out.push(TgtExpr::geq(a.clone(), b));
                }
            }
            let x = format!("z{}", vars.len());
            let mut inner = vars.to_vec();
            inner.push(x.clone());
            for a in self.exact(s[0], vars) {
                for b in self.exact(s[1], &inner) {
                    out.push(TgtExpr::let_in(&x, a.clone(), b));
                }
            }
        }
        for s in splits(n - 1, 3) {
            for c in self.exact(s[0], vars) {
                for a in self.exact(s[1], vars) {
                    for b in self.exact(s[2], vars) {
                        out.push(TgtExpr::ite(c.clone(), a.clone(), b));
                    }
                }
            }
        }
        out
    }
}

/// Source contexts over `iface` with at most `max_size` nodes, smallest first.
pub fn source_contexts(iface: &Iface, max_size: usize, consts: Vec<u64>) -> Vec<SrcContext> {
    let en = SrcEnum { iface, consts };
    let mut out = Vec::new();
    for n in 1..=max_size {
        for t in [Ty::Nat, Ty::Bool] {
            out.extend(en.exact(n, t, &[]).into_iter().map(SrcContext::new));
        }
    }
    out
}

/// Target contexts calling the functions of `iface`, of at most `max_size` nodes.
pub fn target_contexts(iface: &Iface, max_size: usize, consts: Vec<u64>) -> Vec<TgtContext> {
    let en = TgtEnum { names: iface.names(), consts };
    (1..=max_size).flat_map(|n| en.exact(n, &[])).map(TgtContext::new).collect()
}

impl Chain for LtLd {
    type SrcProg = SrcProgram;
    type TgtProg = TgtProgram;
    type SrcCtx = SrcContext;
    type TgtCtx = TgtContext;

    fn name(&self) -> String {
        "typed-to-untyped".into()
    }

    fn compile(&self, p: &SrcProgram) -> Result<TgtProgram, ChainError> {
        compile_program(p).map_err(|e| ChainError::Compile(e.to_string()))
    }

    fn src_behavior(&self, p: &SrcProgram, c: &SrcContext, b: &Bounds) -> Result<Behavior, ChainError> {
        source::behaviors(p, c, &b.domain, b.input_len, b.budget).map_err(|e| ChainError::Link(e.to_string()))
    }

    fn tgt_behavior(&self, p: &TgtProgram, c: &TgtContext, b: &Bounds) -> Result<Behavior, ChainError> {
        target::behaviors(p, c, &b.domain, b.input_len, b.budget).map_err(|e| ChainError::Link(e.to_string()))
    }

    /// Never complete: natural-number literals are unbounded.
    fn src_contexts(&self, programs: &[SrcProgram], b: &Bounds) -> Enumeration<SrcContext> {
        let Some(p) = programs.first() else { return Enumeration::partial(vec![]) };
        Enumeration::partial(source_contexts(&p.iface, b.ctx_size, constants(b)))
    }

    fn tgt_contexts(&self, programs: &[SrcProgram], b: &Bounds) -> Enumeration<TgtContext> {
        let Some(p) = programs.first() else { return Enumeration::partial(vec![]) };
        Enumeration::partial(target_contexts(&p.iface, b.ctx_size, constants(b)))
    }

    fn backtranslate(&self, c_t: &TgtContext, programs: &[SrcProgram], goal: &Goal, b: &Bounds) -> Backtranslation<SrcContext> {
        let Some(first) = programs.first() else { return Backtranslation::Unavailable };
        let mut cands = Vec::new();
        if let Ok(c) = backtranslate_ctx(c_t, &first.iface) {
            cands.push(c);
        }
        if let Goal::Each(reqs) = goal {
            let mut runs: Vec<SrcProgram> = Vec::new();
            let mut inputs = Vec::new();
            for (i, r) in reqs {
                let traces: Vec<&TracePrefix> = match r {
                    Requirement::Contains(t) | Requirement::Prefix(t) | Requirement::XPrefix(t) => vec![t],
                    Requirement::Covers(o) => o.iter().collect(),
                    Requirement::Equals(_) | Requirement::Includes(_) => vec![],
                };
                for t in traces {
                    runs.push(programs[*i].clone());
                    inputs.push(reads(t));
                }
            }
            if !runs.is_empty() {
                if let Ok(report) = verify_rfrxc(&runs, c_t, &inputs, b.budget) {
                    if let Some(c) = report.source_context {
                        if !cands.contains(&c) {
                            cands.push(c);
                        }
                    }
                }
            }
        }
        Backtranslation::Candidates(cands)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{check_criterion, CriterionId, Targets};
    use crate::source::{link, parse_src_program, typecheck_context};
    use crate::target::{parse_tgt_context, wf_context};

    fn prog(body: &str) -> SrcProgram {
        parse_src_program(&format!("(program (iface (f (-> nat nat))) (fun f (x nat) nat {body}))")).unwrap()
    }

    #[test]
    fn enumerated_contexts_are_well_formed() {
        let p = prog("x");
        let src = source_contexts(&p.iface, 4, vec![0, 1]);
        assert!(src.len() > 50);
        for c in &src {
            typecheck_context(c, &p.iface).unwrap();
            link(&p, c).unwrap();
        }
        let tgt = target_contexts(&p.iface, 3, vec![0, 1]);
        for c in &tgt {
            wf_context(c, &p.iface.names()).unwrap();
        }
        assert!(tgt.iter().any(|c| c.to_string() == "(call f true)"));
    }

    #[test]
    fn splits_are_compositions() {
        assert_eq!(splits(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert!(splits(1, 2).is_empty());
    }

    #[test]
    fn rsp_holds_on_given_contexts() {
        let p = prog("(write (+ x (read)))");
        let cs = ["(call f 1)", "(call f true)", "(+ (call f 0) false)", "(if (call f 2) 1 2)"];
        let targets = cs.iter().map(|c| parse_tgt_context(c).unwrap()).collect();
        let b = Bounds { ctx_size: 2, input_len: 1, budget: 500, domain: vec![0, 1] };
        let v = check_criterion(&LtLd, CriterionId::PfRsp, &[p], Targets::Given(targets), &b).unwrap();
        assert!(v.is_holds(), "{:?}", v.to_json());
    }

    #[test]
    fn rtep_holds_for_distinguishable_programs() {
        let b = Bounds { ctx_size: 2, input_len: 0, budget: 200, domain: vec![0] };
        let c = parse_tgt_context("(call f 0)").unwrap();
        let v = check_criterion(&LtLd, CriterionId::Rtep, &[prog("(write 1)"), prog("(write 2)")], Targets::Given(vec![c]), &b).unwrap();
        assert!(v.is_holds(), "{:?}", v.to_json());
    }
}
