//! The single program `x = input; y = f(); output y` with a private input and
//! a public output. Target contexts may read the private variable `x`.

use std::fmt;

use crate::criteria::{Backtranslation, Bounds, Chain, ChainError, Enumeration, Goal, Requirement};
use crate::trace::{Behavior, Event, TracePrefix};

pub use super::introspect::{Const, CONSTANTS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Prog;

impl fmt::Display for Prog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x = input; y = f(); output y")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TgtCtx {
    Const(i64),
    /// `f() { return x; }`
    ReadsX,
}

impl fmt::Display for TgtCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TgtCtx::Const(c) => write!(f, "f() = {c}"),
            TgtCtx::ReadsX => write!(f, "f() = x"),
        }
    }
}

fn trace(x: i64, y: i64) -> TracePrefix {
    TracePrefix::terminated(vec![Event::PrivIn(x), Event::PubOut(y)])
}

fn behaviour(f: impl Fn(i64) -> i64, domain: &[u64]) -> Behavior {
    domain.iter().map(|&x| trace(x as i64, f(x as i64))).collect()
}

/// The identity compiler into the language where contexts read private state.
#[derive(Clone, Copy, Debug, Default)]
pub struct TiniChain;

impl Chain for TiniChain {
    type SrcProg = Prog;
    type TgtProg = Prog;
    type SrcCtx = Const;
    type TgtCtx = TgtCtx;

    fn name(&self) -> String {
        "private-state-access".into()
    }

    fn compile(&self, p: &Prog) -> Result<Prog, ChainError> {
        Ok(*p)
    }

    fn src_behavior(&self, _p: &Prog, c: &Const, b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(behaviour(|_| c.0, &b.domain))
    }

    fn tgt_behavior(&self, _p: &Prog, c: &TgtCtx, b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(match *c {
            TgtCtx::Const(k) => behaviour(|_| k, &b.domain),
            TgtCtx::ReadsX => behaviour(|x| x, &b.domain),
        })
    }

    fn src_contexts(&self, _programs: &[Prog], _b: &Bounds) -> Enumeration<Const> {
        Enumeration::complete(CONSTANTS.map(Const).collect())
    }

    fn tgt_contexts(&self, _programs: &[Prog], _b: &Bounds) -> Enumeration<TgtCtx> {
        Enumeration::complete(CONSTANTS.map(TgtCtx::Const).chain([TgtCtx::ReadsX]).collect())
    }

    /// The context whose `f` returns the recorded output.
    fn backtranslate(&self, _c_t: &TgtCtx, _programs: &[Prog], goal: &Goal, _b: &Bounds) -> Backtranslation<Const> {
        let Goal::Each(reqs) = goal else { return Backtranslation::Unavailable };
        let outputs: Vec<Const> = reqs
            .iter()
            .filter_map(|(_, r)| match r {
                Requirement::Contains(t) | Requirement::Prefix(t) => t.events.iter().find_map(|e| match e {
                    Event::PubOut(o) => Some(Const(*o)),
                    _ => None,
                }),
                _ => None,
            })
            .collect();
        Backtranslation::Candidates(outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{tini_member, tini_witness};

    #[test]
    fn reading_x_leaks_the_input() {
        let b = Bounds { domain: vec![1, 2], ..Bounds::default() };
        let leak = TiniChain.tgt_behavior(&Prog, &TgtCtx::ReadsX, &b).unwrap();
        assert!(!tini_member(&leak));
        assert_eq!(tini_witness(&leak), Some((trace(1, 1), trace(2, 2))));
        for k in CONSTANTS {
            assert!(tini_member(&TiniChain.src_behavior(&Prog, &Const(k), &b).unwrap()));
        }
    }
}
