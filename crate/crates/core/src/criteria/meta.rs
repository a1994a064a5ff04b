//! Checks of the language-level assumptions the criteria rely on.

use std::collections::{BTreeMap, BTreeSet};

use crate::trace::{Behavior, Event, TerminalMark, TracePrefix};

use super::{Evidence, Side, Verdict, Witness};

/// Two traces of one program are related when they are equal or split at
/// distinct input events after a common prefix. Truncated ends may still
/// continue, so a trace cut by the bound is related to its extensions.
pub fn related_by_determinacy(t1: &TracePrefix, t2: &TracePrefix) -> bool {
    let k = t1.events.iter().zip(&t2.events).take_while(|(a, b)| a == b).count();
    match (t1.events.get(k), t2.events.get(k)) {
        (Some(a), Some(b)) => a.is_input() && b.is_input(),
        (None, None) => t1.end == t2.end || matches!(t1.end, TerminalMark::Truncated(_)) || matches!(t2.end, TerminalMark::Truncated(_)),
        (None, Some(_)) => t1.end.is_extendable(),
        (Some(_), None) => t2.end.is_extendable(),
    }
}

fn single(present: Vec<(usize, TracePrefix)>, reason: String) -> Verdict<(), ()> {
    Verdict::Violated(Witness { side: Side::Target, context: None, present, absent: vec![], reason, source_contexts_tried: 0 })
}

/// Every pair of traces of every program's behaviour is related.
pub fn check_determinacy<P>(runner: impl Fn(&P) -> Behavior, programs: &[P]) -> Verdict<(), ()> {
    for (i, p) in programs.iter().enumerate() {
        let b = runner(p);
        let ts: Vec<&TracePrefix> = b.iter().collect();
        for (a, t1) in ts.iter().enumerate() {
            for t2 in &ts[a + 1..] {
                if !related_by_determinacy(t1, t2) {
                    return single(
                        vec![(i, (*t1).clone()), (i, (*t2).clone())],
                        format!("program {i} produces {t1} and {t2}, which do not split at an input"),
                    );
                }
            }
        }
    }
    Verdict::Holds(Evidence { matches: vec![], contexts_checked: programs.len(), note: "every trace pair agrees or splits at an input".into() })
}

fn with_input(e: &Event, v: u64) -> Option<Event> {
    let v_i = i64::try_from(v).ok()?;
    Some(match e {
        Event::Read(_) => Event::Read(v),
        Event::PubIn(_) => Event::PubIn(v_i),
        Event::PrivIn(_) => Event::PrivIn(v_i),
        _ => return None,
    })
}

/// Whenever a trace consumes an input, every other domain value at the same
/// position starts some produced trace too.
pub fn check_input_totality<P>(runner: impl Fn(&P) -> Behavior, programs: &[P], domain: &[u64]) -> Verdict<(), ()> {
    for (i, p) in programs.iter().enumerate() {
        let b = runner(p);
        let produced: BTreeSet<&[Event]> = b.iter().flat_map(|t| (0..=t.events.len()).map(move |k| &t.events[..k])).collect();
        for t in b.iter() {
            for (k, e) in t.events.iter().enumerate() {
                if !e.is_input() {
                    continue;
                }
                for &d in domain {
                    let Some(alt) = with_input(e, d) else { continue };
                    let mut word = t.events[..k].to_vec();
                    word.push(alt.clone());
                    if !produced.contains(word.as_slice()) {
                        return single(
                            vec![(i, t.clone())],
                            format!("program {i} accepts {e} after {k} events but never {alt}"),
                        );
                    }
                }
            }
        }
    }
    Verdict::Holds(Evidence { matches: vec![], contexts_checked: programs.len(), note: "every input position accepts the whole domain".into() })
}

#[derive(Default)]
struct Node {
    children: BTreeMap<Event, Node>,
    ends: BTreeSet<TerminalMark>,
    truncated: bool,
}

/// Exhaustively checks, for every complete trace of at most `depth` events
/// over the events of `b` plus one foreign event, that a non-produced trace is
/// refuted by a produced prefix whose next step along it is not produced.
///
/// Holds when every such trace is refuted; Unknown when the refutation would
/// rely on a prefix at which the behaviour was cut by a bound.
pub fn check_safety_like(b: &Behavior, depth: usize) -> Verdict<(), ()> {
    let mut root = Node::default();
    for t in b.iter() {
        let mut n = &mut root;
        for e in &t.events {
            n = n.children.entry(e.clone()).or_default();
        }
        match t.end {
            TerminalMark::Truncated(_) | TerminalMark::Open => n.truncated = true,
            ref end => {
                n.ends.insert(end.clone());
            }
        }
    }
    if b.is_empty() {
        return single(vec![], "the empty behaviour produces no prefix at all".into());
    }
    let mut alphabet: BTreeSet<Event> = b.iter().flat_map(|t| t.events.iter().cloned()).collect();
    let foreign = (0..).map(Event::Write).find(|e| !alphabet.contains(e)).expect("finite alphabet");
    alphabet.insert(foreign);
    let alphabet: Vec<Event> = alphabet.into_iter().collect();
    let ends = [TerminalMark::term(), TerminalMark::SilentDiv];

    // Walks the produced words; a step off the trie refutes every extension at once.
    let mut checked = 0usize;
    let mut stack: Vec<(&Node, usize)> = vec![(&root, 0)];
    while let Some((n, len)) = stack.pop() {
        for end in &ends {
            checked += 1;
            if !n.ends.contains(end) && n.truncated {
                return Verdict::Unknown(format!("a trace of {len} events was cut by the bound before its end was known"));
            }
        }
        if len == depth {
            continue;
        }
        for e in &alphabet {
            match n.children.get(e) {
                Some(child) => stack.push((child, len + 1)),
                None => {
                    checked += 1;
                    if n.truncated {
                        return Verdict::Unknown(format!("a trace of {len} events was cut by the bound before its next event was known"));
                    }
                }
            }
        }
    }
    Verdict::Holds(Evidence {
        matches: vec![],
        contexts_checked: checked,
        note: format!("every non-produced trace up to depth {depth} is refuted by a produced prefix"),
    })
}
