//! A minimal while language, its fuel-bounded variant, and the two chains
//! between them.
//!
//! Fuel is spent on event-producing steps only, so a context with fuel `n`
//! lets a program emit exactly its first `n` events before it stops.

use std::collections::HashMap;
use std::fmt;

use crate::criteria::{Backtranslation, Bounds, Chain, ChainError, Enumeration, Goal, Requirement};
use crate::monitor::{monitor_eval, monitor_eval_lasso, PropVerdict, PropertyMonitor};
use crate::trace::{Behavior, Event, TerminalMark, TracePrefix};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Output(i64),
    Seq(Box<Stmt>, Box<Stmt>),
    If(bool, Box<Stmt>, Box<Stmt>),
    WhileTrue(Box<Stmt>),
}

impl Stmt {
    pub fn seq(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Seq(Box::new(a), Box::new(b))
    }

    pub fn ite(c: bool, a: Stmt, b: Stmt) -> Stmt {
        Stmt::If(c, Box::new(a), Box::new(b))
    }

    pub fn forever(body: Stmt) -> Stmt {
        Stmt::WhileTrue(Box::new(body))
    }

    /// `while (true) { output(n); }`
    pub fn omega(n: i64) -> Stmt {
        Stmt::forever(Stmt::Output(n))
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Skip => write!(f, "skip"),
            Stmt::Output(n) => write!(f, "(output {n})"),
            Stmt::Seq(a, b) => write!(f, "(seq {a} {b})"),
            Stmt::If(c, a, b) => write!(f, "(if {c} {a} {b})"),
            Stmt::WhileTrue(s) => write!(f, "(while true {s})"),
        }
    }
}

/// An exactly computed run: either finite, or an infinite lasso `stem · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FuelTrace {
    Finite(TracePrefix),
    Lasso { stem: Vec<Event>, cycle: Vec<Event> },
}

impl FuelTrace {
    /// The trace as a prefix, unrolling an infinite lasso to `n` events and marking it truncated.
    pub fn to_prefix(&self, n: usize) -> TracePrefix {
        match self {
            FuelTrace::Finite(t) => t.clone(),
            FuelTrace::Lasso { stem, cycle } => {
                let events: Vec<Event> = stem.iter().chain(cycle.iter().cycle()).take(n.max(stem.len())).cloned().collect();
                let len = events.len() as u64;
                TracePrefix::new(events, TerminalMark::Truncated(len))
            }
        }
    }

    pub fn verdict(&self, m: &PropertyMonitor) -> PropVerdict {
        match self {
            FuelTrace::Finite(t) => monitor_eval(m, t),
            FuelTrace::Lasso { stem, cycle } => monitor_eval_lasso(m, stem, cycle),
        }
    }
}

/// Runs a program with optional fuel, detecting repeated configurations.
pub fn run(p: &Stmt, fuel: Option<u64>) -> FuelTrace {
    let mut stack: Vec<Stmt> = vec![p.clone()];
    let mut fuel = fuel;
    let mut events = Vec::new();
    let mut seen: HashMap<(Vec<Stmt>, Option<u64>), usize> = HashMap::new();
    loop {
        if fuel == Some(0) {
            return FuelTrace::Finite(TracePrefix::terminated(events));
        }
        if let Some(&at) = seen.get(&(stack.clone(), fuel)) {
            let cycle = events[at..].to_vec();
            if cycle.is_empty() {
                return FuelTrace::Finite(TracePrefix::diverging(events));
            }
            events.truncate(at);
            return FuelTrace::Lasso { stem: events, cycle };
        }
        seen.insert((stack.clone(), fuel), events.len());
        let Some(s) = stack.pop() else {
            return FuelTrace::Finite(TracePrefix::terminated(events));
        };
        match s {
            Stmt::Skip => {}
            Stmt::Output(n) => {
                events.push(Event::out_int(n));
                fuel = fuel.map(|f| f - 1);
            }
            Stmt::Seq(a, b) => {
                stack.push(*b);
                stack.push(*a);
            }
            Stmt::If(c, a, b) => stack.push(if c { *a } else { *b }),
            Stmt::WhileTrue(body) => {
                stack.push(Stmt::WhileTrue(body.clone()));
                stack.push(*body);
            }
        }
    }
}

/// A context of the fuel-bounded language: the unit context with `n` units of fuel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fuel(pub u64);

impl fmt::Display for Fuel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(fuel {})", self.0)
    }
}

/// The only context of the plain language; programs are already whole.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Unit;

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unit")
    }
}

fn unbounded(p: &Stmt, b: &Bounds) -> Behavior {
    Behavior::from_iter([run(p, None).to_prefix(b.budget as usize)])
}

fn fuelled(p: &Stmt, n: u64) -> Behavior {
    Behavior::from_iter([run(p, Some(n)).to_prefix(0)])
}

/// Fuel needed to reproduce a trace: one unit per event, plus one to reach a silent divergence.
pub fn fuel_for(t: &TracePrefix) -> Fuel {
    let extra = u64::from(t.end == TerminalMark::SilentDiv);
    Fuel(t.events.len() as u64 + extra)
}

/// The fuel-bounded language compiled to the plain one by dropping the fuel.
#[derive(Clone, Copy, Debug, Default)]
pub struct FuelErasure;

impl Chain for FuelErasure {
    type SrcProg = Stmt;
    type TgtProg = Stmt;
    type SrcCtx = Fuel;
    type TgtCtx = Unit;

    fn name(&self) -> String {
        "fuel-erasure".into()
    }

    fn compile(&self, p: &Stmt) -> Result<Stmt, ChainError> {
        Ok(p.clone())
    }

    fn src_behavior(&self, p: &Stmt, c: &Fuel, _b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(fuelled(p, c.0))
    }

    fn tgt_behavior(&self, p: &Stmt, _c: &Unit, b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(unbounded(p, b))
    }

    fn src_contexts(&self, _programs: &[Stmt], b: &Bounds) -> Enumeration<Fuel> {
        Enumeration::partial((0..=b.ctx_size as u64).map(Fuel).collect())
    }

    fn tgt_contexts(&self, _programs: &[Stmt], _b: &Bounds) -> Enumeration<Unit> {
        Enumeration::complete(vec![Unit])
    }

    /// The fuel-sized context `(|m|, C)` for each requested prefix.
    fn backtranslate(&self, _c_t: &Unit, _programs: &[Stmt], goal: &Goal, _b: &Bounds) -> Backtranslation<Fuel> {
        let Goal::Each(reqs) = goal else { return Backtranslation::Unavailable };
        let mut cands = Vec::new();
        for (_, r) in reqs {
            let t = match r {
                Requirement::Contains(t) | Requirement::Prefix(t) | Requirement::XPrefix(t) => t,
                _ => continue,
            };
            let c = fuel_for(t);
            if !cands.contains(&c) {
                cands.push(c);
            }
        }
        Backtranslation::Candidates(cands)
    }
}

/// The plain language compiled into the fuel-bounded one by the identity.
#[derive(Clone, Copy, Debug, Default)]
pub struct FuelIntroduction;

impl Chain for FuelIntroduction {
    type SrcProg = Stmt;
    type TgtProg = Stmt;
    type SrcCtx = Unit;
    type TgtCtx = Fuel;

    fn name(&self) -> String {
        "fuel-introduction".into()
    }

    fn compile(&self, p: &Stmt) -> Result<Stmt, ChainError> {
        Ok(p.clone())
    }

    fn src_behavior(&self, p: &Stmt, _c: &Unit, b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(unbounded(p, b))
    }

    fn tgt_behavior(&self, p: &Stmt, c: &Fuel, _b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(fuelled(p, c.0))
    }

    fn src_contexts(&self, _programs: &[Stmt], _b: &Bounds) -> Enumeration<Unit> {
        Enumeration::complete(vec![Unit])
    }

    fn tgt_contexts(&self, _programs: &[Stmt], b: &Bounds) -> Enumeration<Fuel> {
        Enumeration::partial((0..=b.ctx_size as u64).map(Fuel).collect())
    }

    fn backtranslate(&self, _c_t: &Fuel, _programs: &[Stmt], _goal: &Goal, _b: &Bounds) -> Backtranslation<Unit> {
        Backtranslation::Candidates(vec![Unit])
    }
}

/// Programs the fuel demos run on.
pub fn demo_programs() -> Vec<Stmt> {
    vec![
        Stmt::omega(41),
        Stmt::omega(42),
        Stmt::seq(Stmt::Output(1), Stmt::seq(Stmt::Output(2), Stmt::Output(3))),
        Stmt::seq(Stmt::Output(7), Stmt::forever(Stmt::Skip)),
        Stmt::seq(Stmt::Output(5), Stmt::forever(Stmt::seq(Stmt::Output(1), Stmt::ite(true, Stmt::Output(2), Stmt::Skip)))),
        Stmt::forever(Stmt::seq(Stmt::Skip, Stmt::ite(false, Stmt::Skip, Stmt::Output(9)))),
    ]
}
