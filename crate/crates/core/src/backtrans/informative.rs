//! Informative traces: traces decorated with boundary calls and returns,
//! their projections, and the partial semantics of contexts and programs.

use std::fmt;

use crate::explore::{run_machine, Machine, StepOutcome};
use crate::source::{self, Iface, SrcContext, SrcMachine, SrcProgram, SrcWhole};
use crate::target::{self, TgtContext, TgtMachine, TgtProgram, TgtWhole};
use crate::trace::{Event, TerminalMark, TracePrefix};

/// Erases boundary events, keeping I/O, failures and the terminal mark.
pub fn project(mu: &TracePrefix) -> TracePrefix {
    TracePrefix::new(mu.events.iter().filter(|e| !e.is_interaction()).cloned().collect(), mu.end.clone())
}

/// One symbol of the context's view of an informative trace.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CtxTok {
    Call(String, crate::trace::Value),
    Ret(crate::trace::Value),
    Fail,
    Term,
    Div,
}

impl fmt::Display for CtxTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CtxTok::Call(g, v) => write!(f, "cl({g},{v})"),
            CtxTok::Ret(v) => write!(f, "rt({v})"),
            CtxTok::Fail => write!(f, "fail"),
            CtxTok::Term => write!(f, "term"),
            CtxTok::Div => write!(f, "div"),
        }
    }
}

/// The context's view: I/O is dropped, a failure ends the word, and complete
/// traces close with a termination or divergence symbol. Open and truncated
/// traces leave the word unclosed.
pub fn ctx_view(mu: &TracePrefix) -> Vec<CtxTok> {
    let mut out = Vec::new();
    for e in &mu.events {
        match e {
            Event::Call(f, v) => out.push(CtxTok::Call(f.clone(), *v)),
            Event::Ret(v) => out.push(CtxTok::Ret(*v)),
            Event::FailAct => {
                out.push(CtxTok::Fail);
                return out;
            }
            _ => {}
        }
    }
    match mu.end {
        TerminalMark::Terminated(_) => out.push(CtxTok::Term),
        TerminalMark::SilentDiv => out.push(CtxTok::Div),
        TerminalMark::Open | TerminalMark::Truncated(_) => {}
    }
    out
}

/// Checks the trace's I/O alternation: I/O only while the program has control.
fn io_inside_calls(mu: &TracePrefix) -> bool {
    let mut inside = false;
    for e in &mu.events {
        match e {
            Event::Call(..) => {
                if inside {
                    return false;
                }
                inside = true;
            }
            Event::Ret(_) => {
                if !inside {
                    return false;
                }
                inside = false;
            }
            Event::FailAct => {}
            _ if !inside => return false,
            _ => {}
        }
    }
    true
}

/// Replays the context side of `mu` on a machine in partial mode.
fn replay_partial<M: Machine>(mut m: M, mu: &TracePrefix, awaiting: impl Fn(&M) -> bool, answer: impl Fn(&mut M, crate::trace::Value)) -> bool {
    if !io_inside_calls(mu) {
        return false;
    }
    let word = ctx_view(mu);
    let unclosed = !matches!(word.last(), Some(CtxTok::Fail | CtxTok::Term | CtxTok::Div));
    let mut i = 0;
    let mut fuel = 1_000_000u64;
    loop {
        if awaiting(&m) {
            match word.get(i) {
                Some(CtxTok::Ret(v)) => {
                    answer(&mut m, *v);
                    i += 1;
                }
                // The program still has control: it failed, diverged, or the trace stops here.
                Some(CtxTok::Fail | CtxTok::Div) => return i + 1 == word.len(),
                None => return unclosed,
                Some(_) => return false,
            }
            continue;
        }
        if fuel == 0 {
            return false;
        }
        fuel -= 1;
        match m.step() {
            StepOutcome::Silent => {}
            StepOutcome::Emit(Event::Call(f, v)) => {
                if word.get(i) != Some(&CtxTok::Call(f, v)) {
                    return unclosed && i == word.len();
                }
                i += 1;
            }
            StepOutcome::Emit(Event::Ret(_)) => {}
            StepOutcome::Emit(Event::FailAct) => {
                return (word.get(i) == Some(&CtxTok::Fail) && i + 1 == word.len()) || (unclosed && i == word.len())
            }
            StepOutcome::Emit(_) | StepOutcome::NeedInput => return false,
            StepOutcome::Halt(TerminalMark::Terminated(_)) => {
                return (word.get(i) == Some(&CtxTok::Term) && i + 1 == word.len()) || (unclosed && i == word.len())
            }
            StepOutcome::Halt(_) => return false,
        }
    }
}

/// Does the target context, answered by the returns recorded in `mu`, produce the context view of `mu`?
pub fn ctx_accepts_tgt(c: &TgtContext, iface: &[String], mu: &TracePrefix) -> bool {
    let p = TgtProgram { iface: iface.to_vec(), funs: vec![] };
    let Ok(w) = target::link(&p, c) else { return false };
    replay_partial(TgtMachine::partial_context(&w), mu, |m| m.awaiting_return(), |m, v| m.answer(v))
}

pub fn ctx_accepts_src(c: &SrcContext, iface: &Iface, mu: &TracePrefix) -> bool {
    let p = SrcProgram { iface: iface.clone(), funs: vec![] };
    let Ok(w) = source::link(&p, c) else { return false };
    replay_partial(SrcMachine::partial_context(&w), mu, |m| m.awaiting_return(), |m, v| m.answer(v))
}

/// A call-delimited piece of an informative trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub call: Event,
    /// Events after the call, up to and including the matching return if any.
    pub events: Vec<Event>,
    /// Whether the segment ends with its return.
    pub closed: bool,
}

pub fn segments(mu: &TracePrefix) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    let mut open = false;
    for e in &mu.events {
        match e {
            Event::Call(..) => {
                out.push(Segment { call: e.clone(), events: vec![], closed: false });
                open = true;
            }
            Event::Ret(_) if open => {
                let s = out.last_mut().expect("open segment");
                s.events.push(e.clone());
                s.closed = true;
                open = false;
            }
            _ if open => out.last_mut().expect("open segment").events.push(e.clone()),
            _ => {}
        }
    }
    out
}

/// Does the run of one call reproduce a segment? `is_last` segments of
/// complete traces must also agree on how the program ended.
fn segment_matches(run: &TracePrefix, seg: &Segment, end: &TerminalMark, is_last: bool) -> bool {
    let mut want = vec![seg.call.clone()];
    want.extend(seg.events.iter().cloned());
    if seg.closed {
        return run.events == want && matches!(run.end, TerminalMark::Terminated(_));
    }
    if !is_last {
        return false;
    }
    match end {
        TerminalMark::Open | TerminalMark::Truncated(_) => {
            run.events.starts_with(&want)
                || (matches!(run.end, TerminalMark::Truncated(_)) && want.starts_with(&run.events))
        }
        TerminalMark::SilentDiv => run.events == want && run.end == TerminalMark::SilentDiv,
        TerminalMark::Terminated(_) => {
            run.events == want && want.last() == Some(&Event::FailAct)
        }
    }
}

fn inputs_of(seg: &Segment) -> Vec<u64> {
    seg.events.iter().filter_map(|e| if let Event::Read(n) = e { Some(*n) } else { None }).collect()
}

/// Budget used when replaying a single call in isolation.
const SEGMENT_BUDGET: u64 = 100_000;

/// Does the target program reproduce every call segment of `mu`?
pub fn prg_accepts_tgt(p: &TgtProgram, mu: &TracePrefix) -> bool {
    let segs = segments(mu);
    segs.iter().enumerate().all(|(i, seg)| {
        let Event::Call(f, v) = &seg.call else { return false };
        let c = TgtContext::new(target::TgtExpr::call(f, target::TgtExpr::value(*v)));
        let Ok(w) = target::link(p, &c) else { return false };
        let run = run_tgt(&w, &inputs_of(seg));
        segment_matches(&run, seg, &mu.end, i + 1 == segs.len())
    })
}

/// Source counterpart of [`prg_accepts_tgt`]; ill-typed calls are skipped.
pub fn prg_accepts_src(p: &SrcProgram, mu: &TracePrefix) -> bool {
    let segs = segments(mu);
    segs.iter().enumerate().all(|(i, seg)| {
        let Event::Call(f, v) = &seg.call else { return false };
        match p.iface.get(f) {
            Some(entry) if entry.arg.has(*v) => {}
            _ => return true,
        }
        let c = SrcContext::new(source::SrcExpr::call(f, source::SrcExpr::value(*v)));
        let Ok(w) = source::link(p, &c) else { return false };
        let run = run_src(&w, &inputs_of(seg));
        segment_matches(&run, seg, &mu.end, i + 1 == segs.len())
    })
}

fn run_tgt(w: &TgtWhole, inputs: &[u64]) -> TracePrefix {
    run_machine(TgtMachine::new(w, true), inputs, SEGMENT_BUDGET).trace
}

fn run_src(w: &SrcWhole, inputs: &[u64]) -> TracePrefix {
    run_machine(SrcMachine::new(w, true), inputs, SEGMENT_BUDGET).trace
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Decomposition {
    pub ctx_ok: bool,
    pub prg_ok: bool,
}

pub fn decompose_trace(p: &TgtProgram, c: &TgtContext, mu: &TracePrefix) -> Decomposition {
    Decomposition { ctx_ok: ctx_accepts_tgt(c, &p.iface, mu), prg_ok: prg_accepts_tgt(p, mu) }
}

/// The source-admissible variant of `mu`: a trailing ill-typed call, with or
/// without the failure it caused, becomes a single failure.
pub fn source_variant(mu: &TracePrefix, iface: &Iface) -> TracePrefix {
    let ill_typed = |e: &Event| match e {
        Event::Call(f, v) => iface.get(f).is_some_and(|entry| !entry.arg.has(*v)),
        _ => false,
    };
    let n = mu.events.len();
    let cut = match mu.events.as_slice() {
        [.., c] if ill_typed(c) => Some(n - 1),
        [.., c, Event::FailAct] if ill_typed(c) => Some(n - 2),
        _ => None,
    };
    match cut {
        Some(k) => {
            let mut events = mu.events[..k].to_vec();
            events.push(Event::FailAct);
            TracePrefix::terminated(events)
        }
        None => mu.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_src_program;
    use crate::target::{link, parse_tgt_context, parse_tgt_program};
    use crate::trace::Value;

    fn call(f: &str, n: u64) -> Event {
        Event::Call(f.into(), Value::Nat(n))
    }

    fn ret(n: u64) -> Event {
        Event::Ret(Value::Nat(n))
    }

    #[test]
    fn projection_erases_boundary_events() {
        let mu = TracePrefix::terminated(vec![call("f", 2), Event::Write(3), ret(1)]);
        assert_eq!(project(&mu), TracePrefix::terminated(vec![Event::Write(3)]));
        assert_eq!(project(&TracePrefix::diverging(vec![])), TracePrefix::diverging(vec![]));
        assert_eq!(project(&TracePrefix::open(vec![call("f", 2)])), TracePrefix::open(vec![]));
    }

    #[test]
    fn context_partial_semantics() {
        let iface = vec!["f".to_string()];
        let c = parse_tgt_context("(call f 2)").unwrap();
        assert!(ctx_accepts_tgt(&c, &iface, &TracePrefix::open(vec![call("f", 2)])));
        assert!(ctx_accepts_tgt(&c, &iface, &TracePrefix::terminated(vec![call("f", 2), ret(5)])));
        assert!(!ctx_accepts_tgt(&c, &iface, &TracePrefix::terminated(vec![call("f", 2)])));
        let seven = parse_tgt_context("7").unwrap();
        assert!(!ctx_accepts_tgt(&seven, &iface, &TracePrefix::open(vec![call("f", 2)])));
        let io_first = TracePrefix::terminated(vec![Event::Write(1), call("f", 2), ret(5)]);
        assert!(!ctx_accepts_tgt(&c, &iface, &io_first));
    }

    #[test]
    fn program_partial_semantics() {
        let p = parse_tgt_program("(program (iface f) (fun f (x) (write x)))").unwrap();
        let mu = TracePrefix::terminated(vec![call("f", 3), Event::Write(3), ret(3)]);
        assert!(prg_accepts_tgt(&p, &mu));
        let wrong = TracePrefix::terminated(vec![call("f", 3), Event::Write(3), ret(4)]);
        assert!(!prg_accepts_tgt(&p, &wrong));
        let sp = parse_src_program("(program (iface (f (-> bool bool))) (fun f (b bool) bool b))").unwrap();
        assert!(prg_accepts_src(&sp, &TracePrefix::terminated(vec![call("f", 5), Event::Write(9), ret(9)])));
    }

    #[test]
    fn decomposition_of_real_runs() {
        let p = parse_tgt_program("(program (iface f) (fun f (x) (write (+ x (read)))))").unwrap();
        let c = parse_tgt_context("(+ (call f 1) (call f 2))").unwrap();
        let w = link(&p, &c).unwrap();
        let mu = target::run(&w, &[10, 20], 1000, true).trace;
        assert_eq!(decompose_trace(&p, &c, &mu), Decomposition { ctx_ok: true, prg_ok: true });
        let other = parse_tgt_program("(program (iface f) (fun f (x) (write x)))").unwrap();
        assert!(!decompose_trace(&other, &c, &mu).prg_ok);
    }

    #[test]
    fn source_variant_cases() {
        let iface = parse_src_program("(program (iface (f (-> bool bool))))").unwrap().iface;
        let fail = TracePrefix::terminated(vec![Event::FailAct]);
        assert_eq!(source_variant(&TracePrefix::open(vec![call("f", 5)]), &iface), fail);
        assert_eq!(source_variant(&TracePrefix::terminated(vec![call("f", 5), Event::FailAct]), &iface), fail);
        let fine = TracePrefix::terminated(vec![Event::Call("f".into(), Value::Bool(true)), Event::Ret(Value::Bool(true))]);
        assert_eq!(source_variant(&fine, &iface), fine);
    }
}
