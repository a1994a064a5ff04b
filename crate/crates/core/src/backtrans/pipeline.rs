//! End-to-end trace-based back-translation: from the informative runs of one
//! target context against several compiled programs to a single source
//! context that reproduces every run's prefix.

use serde_json::json;
use thiserror::Error;

use crate::compiler::compile_program;
use crate::source::{self, typecheck_context, Iface, SrcContext, SrcProgram, Ty};
use crate::target::{self, TgtContext};
use crate::trace::{xpref_leq, Event, TracePrefix};

use super::informative::{ctx_view, decompose_trace, project, source_variant, Decomposition};
use super::tree::{build_tree, tree_backtranslate, TraceTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("no programs given")]
    NoPrograms,
    #[error("program {0} does not share the interface of program 0")]
    InterfaceMismatch(usize),
    #[error("program {0} is ill-typed: {1}")]
    IllTyped(usize, String),
    #[error("expected 1 or {expected} input scripts, got {got}")]
    InputCount { expected: usize, got: usize },
}

/// What happened to one program along the pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramReport {
    pub informative: TracePrefix,
    pub decomposition: Decomposition,
    pub source_variant: TracePrefix,
    /// The prefix the source side has to reproduce.
    pub expected: TracePrefix,
    pub source_trace: Option<TracePrefix>,
    pub reproduced: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    /// Pairs of stage name and whether it passed, in execution order.
    pub stages: Vec<(&'static str, bool)>,
    pub tree: Option<TraceTree>,
    pub source_context: Option<SrcContext>,
    pub programs: Vec<ProgramReport>,
    pub failure: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.stages.iter().all(|(_, ok)| *ok)
    }

    pub fn failed_stage(&self) -> Option<&'static str> {
        self.stages.iter().find(|(_, ok)| !ok).map(|(n, _)| *n)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "passed": self.passed(),
            "stages": self.stages.iter().map(|(n, ok)| json!({"stage": n, "ok": ok})).collect::<Vec<_>>(),
            "tree": self.tree.as_ref().map(|t| t.to_json()),
            "source_context": self.source_context.as_ref().map(|c| c.to_string()),
            "failure": self.failure,
            "programs": self.programs.iter().map(|p| json!({
                "informative": p.informative.to_string(),
                "ctx_ok": p.decomposition.ctx_ok,
                "prg_ok": p.decomposition.prg_ok,
                "source_variant": p.source_variant.to_string(),
                "expected": p.expected.to_string(),
                "source_trace": p.source_trace.as_ref().map(|t| t.to_string()),
                "reproduced": p.reproduced,
            })).collect::<Vec<_>>(),
        })
    }
}

/// How much longer than the target run the source replay may take.
const REPLAY_FACTOR: u64 = 20;

fn reads(t: &TracePrefix) -> Vec<u64> {
    t.events.iter().filter_map(|e| if let Event::Read(n) = e { Some(*n) } else { None }).collect()
}

/// Runs the whole proof pipeline as a computation and records every stage.
pub fn verify_rfrxc(
    programs: &[SrcProgram],
    c_t: &TgtContext,
    inputs: &[Vec<u64>],
    budget: u64,
) -> Result<Report, PipelineError> {
    let first = programs.first().ok_or(PipelineError::NoPrograms)?;
    let iface: &Iface = &first.iface;
    if let Some(i) = programs.iter().position(|p| p.iface != *iface) {
        return Err(PipelineError::InterfaceMismatch(i));
    }
    if inputs.len() != 1 && inputs.len() != programs.len() {
        return Err(PipelineError::InputCount { expected: programs.len(), got: inputs.len() });
    }
    let script = |i: usize| if inputs.len() == 1 { &inputs[0] } else { &inputs[i] };
    let mut report = Report { stages: vec![], tree: None, source_context: None, programs: vec![], failure: None };

    let mut compiled = Vec::new();
    for (i, p) in programs.iter().enumerate() {
        compiled.push(compile_program(p).map_err(|e| PipelineError::IllTyped(i, e.to_string()))?);
    }

    let mut linked = true;
    let mut runs = Vec::new();
    for (i, tp) in compiled.iter().enumerate() {
        match target::link(tp, c_t) {
            Ok(w) => runs.push(target::run(&w, script(i), budget, true).trace),
            Err(e) => {
                linked = false;
                report.failure = Some(format!("target link of program {i}: {e}"));
                break;
            }
        }
    }
    report.stages.push(("informative_runs", linked));
    if !linked {
        return Ok(report);
    }

    let mut decomposed = true;
    for (i, mu) in runs.iter().enumerate() {
        let d = decompose_trace(&compiled[i], c_t, mu);
        decomposed &= d.ctx_ok && d.prg_ok;
        let mu_s = source_variant(mu, iface);
        let expected = project(&mu_s).maximal_xpref();
        report.programs.push(ProgramReport {
            informative: mu.clone(),
            decomposition: d,
            source_variant: mu_s,
            expected,
            source_trace: None,
            reproduced: false,
        });
    }
    report.stages.push(("decomposition", decomposed));

    let words: Vec<_> = runs.iter().map(ctx_view).collect();
    let tree = match build_tree(&words, iface) {
        Ok(t) => t,
        Err(e) => {
            report.stages.push(("tree", false));
            report.failure = Some(e.to_string());
            return Ok(report);
        }
    };
    report.stages.push(("tree", true));
    let c_s = tree_backtranslate(&tree, iface);
    report.tree = Some(tree);

    let typed = typecheck_context(&c_s, iface).is_ok_and(|t| t == Ty::Nat);
    let mut wholes = Vec::new();
    let mut linkable = typed;
    for p in programs {
        match source::link(p, &c_s) {
            Ok(w) => wholes.push(w),
            Err(e) => {
                linkable = false;
                report.failure.get_or_insert_with(|| format!("source link: {e}"));
            }
        }
    }
    report.source_context = Some(c_s);
    report.stages.push(("backtranslation_well_typed", linkable));
    if !linkable {
        return Ok(report);
    }

    let mut all = true;
    for (i, w) in wholes.iter().enumerate() {
        let pr = &mut report.programs[i];
        let t = source::run(w, &reads(&pr.informative), budget.saturating_mul(REPLAY_FACTOR), false).trace;
        pr.reproduced = xpref_leq(&pr.expected, &t);
        all &= pr.reproduced;
        pr.source_trace = Some(t);
    }
    report.stages.push(("reproduction", all));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtrans::tree::TraceTree;
    use crate::source::parse_src_program;
    use crate::target::parse_tgt_context;
    use crate::trace::Value;

    #[test]
    fn identity_program() {
        let p = parse_src_program("(program (iface (f (-> nat nat))) (fun f (x nat) nat x))").unwrap();
        let r = verify_rfrxc(&[p], &parse_tgt_context("(call f 2)").unwrap(), &[vec![]], 1000).unwrap();
        assert!(r.passed(), "{:?}", r);
        assert_eq!(r.programs[0].expected, TracePrefix::terminated(vec![]));
        assert_eq!(
            r.tree,
            Some(TraceTree::CallNode { fname: "f".into(), arg: Value::Nat(2), children: vec![(Value::Nat(2), TraceTree::Term)] })
        );
    }

    #[test]
    fn two_programs_branch_on_the_return() {
        let p1 = parse_src_program("(program (iface (f (-> nat nat))) (fun f (x nat) nat 1))").unwrap();
        let p2 = parse_src_program("(program (iface (f (-> nat nat))) (fun f (x nat) nat 2))").unwrap();
        let c = parse_tgt_context("(if (>= (call f 0) 2) (+ true 1) 0)").unwrap();
        let r = verify_rfrxc(&[p1, p2], &c, &[vec![]], 1000).unwrap();
        assert!(r.passed(), "{:?}", r);
        match r.tree {
            Some(TraceTree::CallNode { ref children, .. }) => assert_eq!(children.len(), 2),
            ref other => panic!("unexpected tree {other:?}"),
        }
        assert_eq!(r.programs[1].expected, TracePrefix::terminated(vec![Event::FailAct]));
    }

    #[test]
    fn ill_typed_call_becomes_failure() {
        let p = parse_src_program("(program (iface (f (-> nat nat))) (fun f (x nat) nat (write x)))").unwrap();
        let r = verify_rfrxc(&[p], &parse_tgt_context("(call f true)").unwrap(), &[vec![]], 1000).unwrap();
        assert!(r.passed(), "{:?}", r);
        assert_eq!(r.source_context.unwrap().body, crate::source::SrcExpr::Fail);
        assert_eq!(r.programs[0].source_trace, Some(TracePrefix::terminated(vec![Event::FailAct])));
    }
}
