//! Events, trace prefixes, behaviours and the relations between them.

use std::collections::BTreeSet;
use std::fmt;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact rational numbers used by output events of the rational-valued mini-language.
pub type Rational = Ratio<i64>;

/// A first-order value that can cross the context/program boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    #[serde(rename = "nat")]
    Nat(u64),
    #[serde(rename = "bool")]
    Bool(bool),
}

impl Value {
    pub fn as_nat(self) -> Option<u64> {
        match self {
            Value::Nat(n) => Some(n),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Nat(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A single observable event.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    Read(u64),
    Write(u64),
    PubIn(i64),
    PubOut(i64),
    PrivIn(i64),
    Out(Rational),
    /// Context-to-program call, only present in informative traces.
    Call(String, Value),
    /// Program-to-context return, only present in informative traces.
    Ret(Value),
    FailAct,
}

impl Event {
    /// Call and return events carry boundary information instead of I/O.
    pub fn is_interaction(&self) -> bool {
        matches!(self, Event::Call(..) | Event::Ret(_))
    }

    pub fn is_io(&self) -> bool {
        !self.is_interaction() && *self != Event::FailAct
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Event::Read(_) | Event::PubIn(_) | Event::PrivIn(_))
    }

    pub fn out_int(n: i64) -> Event {
        Event::Out(Rational::from_integer(n))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Read(n) => write!(f, "rd {n}"),
            Event::Write(n) => write!(f, "wr {n}"),
            Event::PubIn(n) => write!(f, "pubin {n}"),
            Event::PubOut(n) => write!(f, "pubout {n}"),
            Event::PrivIn(n) => write!(f, "privin {n}"),
            Event::Out(q) => write!(f, "out {q}"),
            Event::Call(g, v) => write!(f, "call {g} {v}"),
            Event::Ret(v) => write!(f, "ret {v}"),
            Event::FailAct => write!(f, "failact"),
        }
    }
}

/// How a trace prefix ends.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TerminalMark {
    /// The prefix may be extended.
    Open,
    /// Normal termination with an optional payload.
    Terminated(Option<i64>),
    /// Silent divergence: no further events will ever be produced.
    SilentDiv,
    /// The exploration bound was exhausted after this many steps.
    Truncated(u64),
}

impl TerminalMark {
    pub fn is_extendable(&self) -> bool {
        matches!(self, TerminalMark::Open | TerminalMark::Truncated(_))
    }

    pub fn term() -> TerminalMark {
        TerminalMark::Terminated(None)
    }
}

/// A finite sequence of events closed by a terminal mark.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TracePrefix {
    pub events: Vec<Event>,
    pub end: TerminalMark,
}

impl TracePrefix {
    pub fn new(events: Vec<Event>, end: TerminalMark) -> Self {
        TracePrefix { events, end }
    }

    pub fn open(events: Vec<Event>) -> Self {
        TracePrefix::new(events, TerminalMark::Open)
    }

    pub fn terminated(events: Vec<Event>) -> Self {
        TracePrefix::new(events, TerminalMark::Terminated(None))
    }

    pub fn diverging(events: Vec<Event>) -> Self {
        TracePrefix::new(events, TerminalMark::SilentDiv)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Finite prefixes end open or terminated.
    pub fn is_finpref(&self) -> bool {
        matches!(self.end, TerminalMark::Open | TerminalMark::Terminated(_))
    }

    /// Extended prefixes additionally allow silent divergence.
    pub fn is_xpref(&self) -> bool {
        self.is_finpref() || self.end == TerminalMark::SilentDiv
    }

    pub fn is_complete(&self) -> bool {
        self.end != TerminalMark::Open
    }

    pub fn is_terminating(&self) -> bool {
        matches!(self.end, TerminalMark::Terminated(_))
    }

    /// The finite prefix obtained by forgetting anything after the events.
    pub fn as_open(&self) -> TracePrefix {
        TracePrefix::open(self.events.clone())
    }

    /// The finite prefix carrying all the information a checker may rely on:
    /// terminated traces stay closed, every other end becomes open.
    pub fn maximal_finpref(&self) -> TracePrefix {
        match self.end {
            TerminalMark::Terminated(_) => self.clone(),
            _ => self.as_open(),
        }
    }

    /// Like [`TracePrefix::maximal_finpref`] but keeps silent divergence.
    pub fn maximal_xpref(&self) -> TracePrefix {
        match self.end {
            TerminalMark::Terminated(_) | TerminalMark::SilentDiv => self.clone(),
            _ => self.as_open(),
        }
    }
}

impl fmt::Display for TracePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")?;
        match &self.end {
            TerminalMark::Open => write!(f, "∘"),
            TerminalMark::Terminated(None) => write!(f, "⊙"),
            TerminalMark::Terminated(Some(p)) => write!(f, "⊙{p}"),
            TerminalMark::SilentDiv => write!(f, "↻"),
            TerminalMark::Truncated(s) => write!(f, "…({s} steps)"),
        }
    }
}

/// `m ≤ t` for a finite prefix `m`. Truncated ends of `t` behave like open ones.
pub fn prefix_leq(m: &TracePrefix, t: &TracePrefix) -> bool {
    match &m.end {
        TerminalMark::Open => t.events.starts_with(&m.events),
        TerminalMark::Terminated(_) => m.end == t.end && m.events == t.events,
        TerminalMark::SilentDiv | TerminalMark::Truncated(_) => false,
    }
}

/// `x ≤ t` for an extended prefix, where silent divergence only matches itself.
pub fn xpref_leq(x: &TracePrefix, t: &TracePrefix) -> bool {
    match &x.end {
        TerminalMark::SilentDiv => t.end == TerminalMark::SilentDiv && x.events == t.events,
        _ => prefix_leq(x, t),
    }
}

/// The set of complete traces a whole program produces at the explored bound.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Behavior {
    pub traces: BTreeSet<TracePrefix>,
}

impl Behavior {
    pub fn new() -> Self {
        Behavior::default()
    }

    /// Open prefixes are not complete traces and are rejected.
    pub fn insert(&mut self, t: TracePrefix) {
        assert!(t.end != TerminalMark::Open, "behaviours only hold complete traces");
        self.traces.insert(t);
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TracePrefix> {
        self.traces.iter()
    }

    pub fn has_truncated(&self) -> bool {
        self.traces.iter().any(|t| matches!(t.end, TerminalMark::Truncated(_)))
    }

    pub fn contains(&self, t: &TracePrefix) -> bool {
        self.traces.contains(t)
    }

    /// Whether some trace of the behaviour extends `m`.
    pub fn produces(&self, m: &TracePrefix) -> bool {
        self.traces.iter().any(|t| xpref_leq(m, t))
    }
}

impl FromIterator<TracePrefix> for Behavior {
    fn from_iter<I: IntoIterator<Item = TracePrefix>>(iter: I) -> Self {
        let mut b = Behavior::new();
        for t in iter {
            b.insert(t);
        }
        b
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.traces.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, "}}")
    }
}

/// A finite set of finite prefixes, the refuting evidence for hypersafety.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Observation {
    pub prefixes: BTreeSet<TracePrefix>,
}

impl Observation {
    pub fn new<I: IntoIterator<Item = TracePrefix>>(prefixes: I) -> Self {
        Observation { prefixes: prefixes.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }
}

/// `o ≤ b`: every prefix of the observation is extended by a trace of the behaviour.
pub fn obs_leq(o: &Observation, b: &Behavior) -> bool {
    o.prefixes.iter().all(|m| b.traces.iter().any(|t| prefix_leq(m, t)))
}

fn pub_inputs(t: &TracePrefix) -> Vec<i64> {
    t.events
        .iter()
        .filter_map(|e| match e {
            Event::PubIn(n) => Some(*n),
            _ => None,
        })
        .collect()
}

fn pub_events(t: &TracePrefix) -> Vec<&Event> {
    t.events.iter().filter(|e| matches!(e, Event::PubIn(_) | Event::PubOut(_))).collect()
}

/// Termination-insensitive noninterference of a behaviour.
pub fn tini_member(b: &Behavior) -> bool {
    tini_witness(b).is_none()
}

/// The first pair of terminating traces breaking noninterference, if any.
pub fn tini_witness(b: &Behavior) -> Option<(TracePrefix, TracePrefix)> {
    let term: Vec<&TracePrefix> = b.traces.iter().filter(|t| t.is_terminating()).collect();
    for (i, t1) in term.iter().enumerate() {
        for t2 in &term[i + 1..] {
            if pub_inputs(t1) == pub_inputs(t2) && pub_events(t1) != pub_events(t2) {
                return Some(((*t1).clone(), (*t2).clone()));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wr(n: u64) -> Event {
        Event::Write(n)
    }

    #[test]
    fn prefix_examples() {
        assert!(prefix_leq(&TracePrefix::open(vec![]), &TracePrefix::terminated(vec![wr(1)])));
        assert!(!prefix_leq(&TracePrefix::terminated(vec![]), &TracePrefix::terminated(vec![wr(1)])));
        assert!(prefix_leq(
            &TracePrefix::open(vec![wr(1)]),
            &TracePrefix::terminated(vec![wr(1), wr(2)])
        ));
    }

    #[test]
    fn truncated_counts_as_extendable() {
        let t = TracePrefix::new(vec![wr(1), wr(2)], TerminalMark::Truncated(10));
        assert!(prefix_leq(&TracePrefix::open(vec![wr(1)]), &t));
        assert!(!prefix_leq(&TracePrefix::terminated(vec![wr(1), wr(2)]), &t));
    }

    #[test]
    fn divergence_only_matches_itself() {
        let d = TracePrefix::diverging(vec![wr(1)]);
        assert!(xpref_leq(&d, &d));
        assert!(!xpref_leq(&d, &TracePrefix::terminated(vec![wr(1)])));
        assert!(xpref_leq(&TracePrefix::open(vec![wr(1)]), &d));
    }

    #[test]
    fn obs_examples() {
        let b: Behavior = [TracePrefix::terminated(vec![wr(1)])].into_iter().collect();
        assert!(obs_leq(&Observation::new([TracePrefix::open(vec![])]), &b));
        let b2: Behavior = [TracePrefix::terminated(vec![wr(1), wr(2)]), TracePrefix::terminated(vec![wr(2)])]
            .into_iter()
            .collect();
        let o = Observation::new([TracePrefix::open(vec![wr(1)]), TracePrefix::open(vec![wr(2)])]);
        assert!(obs_leq(&o, &b2));
        assert!(!obs_leq(&Observation::new([TracePrefix::open(vec![wr(3)])]), &b));
    }

    #[test]
    fn tini_examples() {
        assert!(tini_member(&Behavior::new()));
        let bad: Behavior = [
            TracePrefix::terminated(vec![Event::PubIn(1), Event::PubOut(1)]),
            TracePrefix::terminated(vec![Event::PubIn(1), Event::PubOut(2)]),
        ]
        .into_iter()
        .collect();
        assert!(!tini_member(&bad));
        let ok: Behavior = [
            TracePrefix::terminated(vec![Event::PubIn(1), Event::PubOut(1)]),
            TracePrefix::terminated(vec![Event::PubIn(2), Event::PubOut(2)]),
        ]
        .into_iter()
        .collect();
        assert!(tini_member(&ok));
    }

    #[test]
    fn tini_ignores_private_inputs_and_non_terminating_traces() {
        let b: Behavior = [
            TracePrefix::terminated(vec![Event::PrivIn(1), Event::PubOut(1)]),
            TracePrefix::terminated(vec![Event::PrivIn(2), Event::PubOut(2)]),
        ]
        .into_iter()
        .collect();
        assert!(!tini_member(&b));
        let d: Behavior = [
            TracePrefix::terminated(vec![Event::PrivIn(1), Event::PubOut(1)]),
            TracePrefix::diverging(vec![Event::PrivIn(2), Event::PubOut(2)]),
        ]
        .into_iter()
        .collect();
        assert!(tini_member(&d));
    }
}
