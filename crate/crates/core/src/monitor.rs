//! Finite-state property monitors with three-valued verdicts, the Safety and
//! Dense classes, and the decomposition of a property into both.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::trace::{Event, TerminalMark, TracePrefix};
use crate::trace_json::{event_to_json, item_from_json};

/// Outcome of evaluating a property on a single trace or prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PropVerdict {
    Accept,
    Reject,
    Unknown,
}

impl PropVerdict {
    fn of(b: bool) -> PropVerdict {
        if b {
            PropVerdict::Accept
        } else {
            PropVerdict::Reject
        }
    }
}

impl fmt::Display for PropVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PropVerdict::Accept => "accept",
            PropVerdict::Reject => "reject",
            PropVerdict::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// One state of a monitor.
///
/// Transitions are keyed by exact events; anything else follows `default`.
/// `accept_infinite` decides infinite traces: an infinite trace is accepted
/// when every state it visits infinitely often has the flag set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonitorState {
    pub label: String,
    pub edges: Vec<(Event, usize)>,
    pub default: usize,
    pub accept_term: bool,
    pub accept_div: bool,
    pub accept_infinite: bool,
    pub open_reject: bool,
}

impl MonitorState {
    fn new(label: &str, default: usize) -> Self {
        MonitorState {
            label: label.to_string(),
            edges: Vec::new(),
            default,
            accept_term: true,
            accept_div: true,
            accept_infinite: true,
            open_reject: false,
        }
    }

    fn rejecting(label: &str, me: usize) -> Self {
        MonitorState {
            label: label.to_string(),
            edges: Vec::new(),
            default: me,
            accept_term: false,
            accept_div: false,
            accept_infinite: false,
            open_reject: true,
        }
    }

    fn with_edge(mut self, e: Event, to: usize) -> Self {
        self.edges.push((e, to));
        self
    }
}

/// A finite-state acceptor of traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyMonitor {
    pub name: String,
    pub states: Vec<MonitorState>,
    pub start: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonitorError {
    #[error("monitor has no states")]
    Empty,
    #[error("state {0} has a transition to a missing state")]
    DanglingEdge(usize),
    #[error("rejection at open state {0} is not extension-closed (reaches state {1})")]
    NotExtensionClosed(usize, usize),
    #[error("invalid monitor description: {0}")]
    Spec(String),
}

impl PropertyMonitor {
    pub fn new(name: impl Into<String>, states: Vec<MonitorState>, start: usize) -> Result<Self, MonitorError> {
        let m = PropertyMonitor { name: name.into(), states, start };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), MonitorError> {
        if self.states.is_empty() || self.start >= self.states.len() {
            return Err(MonitorError::Empty);
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.default >= self.states.len() || s.edges.iter().any(|(_, t)| *t >= self.states.len()) {
                return Err(MonitorError::DanglingEdge(i));
            }
        }
        Ok(())
    }

    pub fn step(&self, s: usize, e: &Event) -> usize {
        let st = &self.states[s];
        st.edges.iter().find(|(ev, _)| ev == e).map(|(_, t)| *t).unwrap_or(st.default)
    }

    pub fn run(&self, events: &[Event]) -> usize {
        events.iter().fold(self.start, |s, e| self.step(s, e))
    }

    pub fn classify(&self, s: usize, end: &TerminalMark) -> PropVerdict {
        let st = &self.states[s];
        match end {
            TerminalMark::Terminated(_) => PropVerdict::of(st.accept_term),
            TerminalMark::SilentDiv => PropVerdict::of(st.accept_div),
            TerminalMark::Open | TerminalMark::Truncated(_) => {
                if st.open_reject {
                    PropVerdict::Reject
                } else {
                    PropVerdict::Unknown
                }
            }
        }
    }

    fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let st = &self.states[s];
        st.edges.iter().map(|(_, t)| *t).chain(std::iter::once(st.default))
    }

    /// States reachable from `from` along any events (including `from`).
    pub fn reachable(&self, from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([from]);
        let mut todo = vec![from];
        while let Some(s) = todo.pop() {
            for t in self.successors(s) {
                if seen.insert(t) {
                    todo.push(t);
                }
            }
        }
        seen
    }

    /// Checks that rejecting an open prefix is final: every state reachable from
    /// an open-rejecting state rejects every completion.
    pub fn check_extension_closed(&self) -> Result<(), MonitorError> {
        for (i, s) in self.states.iter().enumerate() {
            if !s.open_reject {
                continue;
            }
            for r in self.reachable(i) {
                let t = &self.states[r];
                if !t.open_reject || t.accept_term || t.accept_div || t.accept_infinite {
                    return Err(MonitorError::NotExtensionClosed(i, r));
                }
            }
        }
        Ok(())
    }

    /// Whether every terminating trace is accepted, decided on the state graph.
    pub fn accepts_all_terminating(&self) -> bool {
        self.reachable(self.start).iter().all(|s| self.states[*s].accept_term)
    }

    /// Whether every rejected trace has a finite bad prefix. A rejected
    /// terminated trace is its own bad prefix, so only silent divergence and
    /// infinite traces need an open-rejecting state.
    pub fn is_safety(&self) -> bool {
        if self.check_extension_closed().is_err() {
            return false;
        }
        let reach = self.reachable(self.start);
        reach.iter().all(|s| {
            let st = &self.states[*s];
            st.open_reject || (st.accept_div && st.accept_infinite)
        })
    }
}

/// Evaluates a monitor on a prefix or complete trace.
pub fn monitor_eval(m: &PropertyMonitor, p: &TracePrefix) -> PropVerdict {
    let s = m.run(&p.events);
    m.classify(s, &p.end)
}

/// Evaluates a monitor on the infinite trace `stem · cycle^ω`.
///
/// An empty cycle denotes silent divergence after the stem.
pub fn monitor_eval_lasso(m: &PropertyMonitor, stem: &[Event], cycle: &[Event]) -> PropVerdict {
    let mut s = m.run(stem);
    if cycle.is_empty() {
        return m.classify(s, &TerminalMark::SilentDiv);
    }
    let mut boundaries: Vec<usize> = Vec::new();
    loop {
        if let Some(pos) = boundaries.iter().position(|b| *b == s) {
            let mut inf_states = BTreeSet::new();
            let mut q = boundaries[pos];
            for _ in pos..boundaries.len() {
                for e in cycle {
                    q = m.step(q, e);
                    inf_states.insert(q);
                }
            }
            return PropVerdict::of(inf_states.iter().all(|q| m.states[*q].accept_infinite));
        }
        boundaries.push(s);
        s = m.run_from(s, cycle);
    }
}

impl PropertyMonitor {
    fn run_from(&self, s: usize, events: &[Event]) -> usize {
        events.iter().fold(s, |q, e| self.step(q, e))
    }
}

/// Accepts every trace.
pub fn accept_all() -> PropertyMonitor {
    PropertyMonitor { name: "accept_all".into(), states: vec![MonitorState::new("any", 0)], start: 0 }
}

/// Safety: the event `e` never occurs.
pub fn never_event(e: Event) -> PropertyMonitor {
    let name = format!("never[{e}]");
    let ok = MonitorState::new("clean", 0).with_edge(e, 1);
    PropertyMonitor { name, states: vec![ok, MonitorState::rejecting("seen", 1)], start: 0 }
}

/// Every terminating trace contains `e`; non-terminating traces are accepted.
pub fn eventually_on_term(e: Event) -> PropertyMonitor {
    let name = format!("eventually_on_term[{e}]");
    let mut waiting = MonitorState::new("waiting", 0).with_edge(e, 1);
    waiting.accept_term = false;
    PropertyMonitor { name, states: vec![waiting, MonitorState::new("seen", 1)], start: 0 }
}

/// Only the infinite repetition `e^ω` is accepted.
pub fn only_infinite_repeat(e: Event) -> PropertyMonitor {
    let name = format!("only_infinite_repeat[{e}]");
    let mut all = MonitorState::new("repeating", 1).with_edge(e, 0);
    all.accept_term = false;
    all.accept_div = false;
    PropertyMonitor { name, states: vec![all, MonitorState::rejecting("broken", 1)], start: 0 }
}

/// Exactly the terminating traces, the smallest dense property.
pub fn terminating_only() -> PropertyMonitor {
    let mut s = MonitorState::new("any", 0);
    s.accept_div = false;
    s.accept_infinite = false;
    PropertyMonitor { name: "terminating_only".into(), states: vec![s], start: 0 }
}

/// Finite traces together with the single infinite trace `e^ω`.
pub fn finite_or_repeat(e: Event) -> PropertyMonitor {
    let name = format!("finite_or_repeat[{e}]");
    let all = MonitorState::new("repeating", 1).with_edge(e, 0);
    let mut broken = MonitorState::new("broken", 1);
    broken.accept_infinite = false;
    PropertyMonitor { name, states: vec![all, broken], start: 0 }
}

/// The built-in monitors instantiated over an event of interest.
pub fn builtin_monitors(e: &Event) -> Vec<PropertyMonitor> {
    vec![
        accept_all(),
        never_event(e.clone()),
        eventually_on_term(e.clone()),
        only_infinite_repeat(e.clone()),
        terminating_only(),
        finite_or_repeat(e.clone()),
    ]
}

/// Splits a monitor into a safety part and a dense part whose conjunction is the original.
pub fn decompose(m: &PropertyMonitor) -> (PropertyMonitor, PropertyMonitor) {
    let mut safety = m.clone();
    safety.name = format!("safety({})", m.name);
    for st in &mut safety.states {
        st.accept_div = true;
        st.accept_infinite = true;
        st.open_reject = false;
    }
    let mut dense = m.clone();
    dense.name = format!("dense({})", m.name);
    for st in &mut dense.states {
        st.accept_term = true;
        st.open_reject = false;
    }
    (safety, dense)
}

/// Result of the bounded dense check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseReport {
    pub verdict: PropVerdict,
    pub witness: Option<TracePrefix>,
    pub prefixes_checked: usize,
}

/// All event sequences of exactly length `n` over `alphabet`, in lexicographic order.
pub fn sequences(alphabet: &[Event], n: usize) -> Vec<Vec<Event>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * alphabet.len());
        for s in &out {
            for e in alphabet {
                let mut t = s.clone();
                t.push(e.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Checks density up to `depth`: every finite prefix must have an accepted
/// terminating extension of length at most `depth + 1`.
pub fn dense_bounded_check(m: &PropertyMonitor, depth: usize, alphabet: &[Event]) -> DenseReport {
    assert!(!alphabet.is_empty(), "alphabet must be nonempty");
    let mut checked = 0;
    for len in 0..=depth {
        for events in sequences(alphabet, len) {
            let s = m.run(&events);
            checked += 2;
            if !accepting_term_within(m, s, depth + 1 - len, alphabet) {
                return DenseReport {
                    verdict: PropVerdict::Reject,
                    witness: Some(TracePrefix::open(events)),
                    prefixes_checked: checked,
                };
            }
            if !m.states[s].accept_term {
                return DenseReport {
                    verdict: PropVerdict::Reject,
                    witness: Some(TracePrefix::terminated(events)),
                    prefixes_checked: checked,
                };
            }
        }
    }
    let verdict = if m.accepts_all_terminating() { PropVerdict::Accept } else { PropVerdict::Unknown };
    DenseReport { verdict, witness: None, prefixes_checked: checked }
}

fn accepting_term_within(m: &PropertyMonitor, from: usize, budget: usize, alphabet: &[Event]) -> bool {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([(from, 0usize)]);
    while let Some((s, d)) = queue.pop_front() {
        if m.states[s].accept_term {
            return true;
        }
        if d == budget {
            continue;
        }
        for e in alphabet {
            let t = m.step(s, e);
            if seen.insert(t) {
                queue.push_back((t, d + 1));
            }
        }
    }
    false
}

/// Serializable description of a built-in monitor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonitorSpec {
    NeverEvent(Event),
    EventuallyOnTerm(Event),
    AcceptAll,
    OnlyInfiniteRepeat(Event),
    TerminatingOnly,
    FiniteOrRepeat(Event),
}

impl MonitorSpec {
    pub fn build(&self) -> PropertyMonitor {
        match self {
            MonitorSpec::NeverEvent(e) => never_event(e.clone()),
            MonitorSpec::EventuallyOnTerm(e) => eventually_on_term(e.clone()),
            MonitorSpec::AcceptAll => accept_all(),
            MonitorSpec::OnlyInfiniteRepeat(e) => only_infinite_repeat(e.clone()),
            MonitorSpec::TerminatingOnly => terminating_only(),
            MonitorSpec::FiniteOrRepeat(e) => finite_or_repeat(e.clone()),
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            MonitorSpec::NeverEvent(e) => json!({"kind": "never_event", "event": event_to_json(e)}),
            MonitorSpec::EventuallyOnTerm(e) => json!({"kind": "eventually_on_term", "event": event_to_json(e)}),
            MonitorSpec::AcceptAll => json!({"kind": "accept_all"}),
            MonitorSpec::OnlyInfiniteRepeat(e) => json!({"kind": "only_infinite_repeat", "event": event_to_json(e)}),
            MonitorSpec::TerminatingOnly => json!({"kind": "terminating_only"}),
            MonitorSpec::FiniteOrRepeat(e) => json!({"kind": "finite_or_repeat", "event": event_to_json(e)}),
        }
    }

    pub fn from_json(j: &Json) -> Result<MonitorSpec, MonitorError> {
        let kind = j.get("kind").and_then(Json::as_str).ok_or_else(|| MonitorError::Spec("missing `kind`".into()))?;
        let event = || -> Result<Event, MonitorError> {
            let ej = j.get("event").ok_or_else(|| MonitorError::Spec(format!("`{kind}` needs an `event`")))?;
            match item_from_json(ej, 1) {
                Ok(Ok(e)) => Ok(e),
                Ok(Err(_)) => Err(MonitorError::Spec("`event` must be an event, not a terminal mark".into())),
                Err(err) => Err(MonitorError::Spec(err.to_string())),
            }
        };
        Ok(match kind {
            "never_event" => MonitorSpec::NeverEvent(event()?),
            "eventually_on_term" => MonitorSpec::EventuallyOnTerm(event()?),
            "accept_all" => MonitorSpec::AcceptAll,
            "only_infinite_repeat" => MonitorSpec::OnlyInfiniteRepeat(event()?),
            "terminating_only" => MonitorSpec::TerminatingOnly,
            "finite_or_repeat" => MonitorSpec::FiniteOrRepeat(event()?),
            other => return Err(MonitorError::Spec(format!("unknown monitor kind `{other}`"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wr(n: u64) -> Event {
        Event::Write(n)
    }

    #[test]
    fn eval_examples() {
        let m = never_event(wr(42));
        assert_eq!(monitor_eval(&m, &TracePrefix::open(vec![Event::Read(1), wr(42)])), PropVerdict::Reject);
        assert_eq!(monitor_eval(&m, &TracePrefix::open(vec![Event::Read(1)])), PropVerdict::Unknown);
        assert_eq!(monitor_eval(&m, &TracePrefix::terminated(vec![Event::Read(1)])), PropVerdict::Accept);
    }

    #[test]
    fn decompose_examples() {
        let (s, d) = decompose(&accept_all());
        for t in [TracePrefix::terminated(vec![wr(1)]), TracePrefix::diverging(vec![])] {
            assert_eq!(monitor_eval(&s, &t), PropVerdict::Accept);
            assert_eq!(monitor_eval(&d, &t), PropVerdict::Accept);
        }
        let (s, d) = decompose(&never_event(wr(42)));
        let t = TracePrefix::terminated(vec![wr(42)]);
        assert_eq!(monitor_eval(&s, &t), PropVerdict::Reject);
        assert_eq!(monitor_eval(&d, &t), PropVerdict::Accept);
    }

    #[test]
    fn dense_examples() {
        let alpha = [wr(42), wr(0)];
        assert_eq!(dense_bounded_check(&accept_all(), 3, &alpha).verdict, PropVerdict::Accept);
        assert_eq!(dense_bounded_check(&terminating_only(), 4, &alpha).verdict, PropVerdict::Accept);
        let r = dense_bounded_check(&never_event(wr(42)), 2, &alpha);
        assert_eq!(r.verdict, PropVerdict::Reject);
        assert_eq!(r.witness, Some(TracePrefix::open(vec![wr(42)])));
    }

    #[test]
    fn lasso_evaluation() {
        let m = only_infinite_repeat(Event::out_int(42));
        assert_eq!(monitor_eval_lasso(&m, &[], &[Event::out_int(42)]), PropVerdict::Accept);
        assert_eq!(monitor_eval_lasso(&m, &[], &[Event::out_int(41)]), PropVerdict::Reject);
        let l = finite_or_repeat(Event::out_int(42));
        assert_eq!(monitor_eval_lasso(&l, &[Event::out_int(42)], &[Event::out_int(41)]), PropVerdict::Reject);
        assert_eq!(monitor_eval(&l, &TracePrefix::terminated(vec![Event::out_int(41)])), PropVerdict::Accept);
    }

    #[test]
    fn safety_classification() {
        assert!(never_event(wr(1)).is_safety());
        assert!(accept_all().is_safety());
        assert!(eventually_on_term(wr(1)).is_safety());
        assert!(!terminating_only().is_safety());
        assert!(!only_infinite_repeat(wr(1)).is_safety());
        for m in builtin_monitors(&wr(1)) {
            m.check_extension_closed().unwrap();
        }
    }

    #[test]
    fn spec_json_round_trip() {
        for spec in [
            MonitorSpec::NeverEvent(wr(42)),
            MonitorSpec::EventuallyOnTerm(wr(7)),
            MonitorSpec::AcceptAll,
            MonitorSpec::OnlyInfiniteRepeat(Event::out_int(42)),
        ] {
            assert_eq!(MonitorSpec::from_json(&spec.to_json()).unwrap(), spec);
        }
        assert!(MonitorSpec::from_json(&json!({"kind": "nope"})).is_err());
    }
}
