//! Driving small-step machines: single runs over an input script, and
//! exhaustive exploration of all input scripts up to a length bound.

use crate::trace::{Behavior, Event, TerminalMark, TracePrefix};

/// What a single machine step did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Silent,
    Emit(Event),
    /// The next redex reads an input; call [`Machine::feed`] to perform it.
    NeedInput,
    Halt(TerminalMark),
}

/// A deterministic small-step machine whose only nondeterminism is input.
pub trait Machine: Clone {
    fn step(&mut self) -> StepOutcome;

    /// Performs the pending read with value `n`.
    fn feed(&mut self, n: u64) -> StepOutcome;
}

/// A single run over a fixed input script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub trace: TracePrefix,
    /// The run stopped because it wanted more input than the script had.
    pub inputs_exhausted: bool,
    pub steps: u64,
    pub inputs_used: usize,
}

pub fn run_machine<M: Machine>(mut m: M, inputs: &[u64], budget: u64) -> RunOutcome {
    let mut events = Vec::new();
    let mut steps = 0u64;
    let mut used = 0usize;
    loop {
        if steps >= budget {
            return RunOutcome {
                trace: TracePrefix::new(events, TerminalMark::Truncated(steps)),
                inputs_exhausted: false,
                steps,
                inputs_used: used,
            };
        }
        let out = match m.step() {
            StepOutcome::NeedInput => match inputs.get(used) {
                Some(&n) => {
                    used += 1;
                    m.feed(n)
                }
                None => {
                    return RunOutcome {
                        trace: TracePrefix::new(events, TerminalMark::Truncated(steps)),
                        inputs_exhausted: true,
                        steps,
                        inputs_used: used,
                    }
                }
            },
            o => o,
        };
        steps += 1;
        match out {
            StepOutcome::Silent => {}
            StepOutcome::Emit(e) => events.push(e),
            StepOutcome::Halt(end) => {
                return RunOutcome { trace: TracePrefix::new(events, end), inputs_exhausted: false, steps, inputs_used: used }
            }
            StepOutcome::NeedInput => unreachable!("feed always performs the read"),
        }
    }
}

/// Explores every input script over `domain` of length at most `input_len`.
///
/// Scripts branch lazily at each read, so shared prefixes run once. A run that
/// wants a read beyond `input_len` ends `Truncated`.
pub fn explore<M: Machine>(m: M, domain: &[u64], input_len: usize, budget: u64) -> Behavior {
    let mut out = Behavior::new();
    explore_each(m, domain, input_len, budget, |t, _| out.insert(t));
    out
}

/// Like [`explore`], reporting each complete trace along with the script that produced it.
pub fn explore_each<M: Machine, F: FnMut(TracePrefix, &[u64])>(
    m: M,
    domain: &[u64],
    input_len: usize,
    budget: u64,
    mut sink: F,
) {
    struct Branch<M> {
        m: M,
        events: Vec<Event>,
        steps: u64,
        script: Vec<u64>,
        feed: Option<u64>,
    }
    let mut stack = vec![Branch { m, events: Vec::new(), steps: 0, script: Vec::new(), feed: None }];
    while let Some(mut b) = stack.pop() {
        loop {
            if b.steps >= budget {
                sink(TracePrefix::new(b.events, TerminalMark::Truncated(b.steps)), &b.script);
                break;
            }
            let out = match b.feed.take() {
                Some(n) => b.m.feed(n),
                None => b.m.step(),
            };
            match out {
                StepOutcome::NeedInput => {
                    if b.script.len() >= input_len || domain.is_empty() {
                        sink(TracePrefix::new(b.events, TerminalMark::Truncated(b.steps)), &b.script);
                        break;
                    }
                    for &d in domain.iter().rev() {
                        let mut script = b.script.clone();
                        script.push(d);
                        stack.push(Branch {
                            m: b.m.clone(),
                            events: b.events.clone(),
                            steps: b.steps,
                            script,
                            feed: Some(d),
                        });
                    }
                    break;
                }
                StepOutcome::Silent => b.steps += 1,
                StepOutcome::Emit(e) => {
                    b.steps += 1;
                    b.events.push(e);
                }
                StepOutcome::Halt(end) => {
                    sink(TracePrefix::new(b.events, end), &b.script);
                    break;
                }
            }
        }
    }
}
