//! Programs `x = read(); y = f(); write(x + y)` whose target contexts may
//! branch on which program they were linked with.

use std::fmt;

use crate::criteria::{Backtranslation, Bounds, Chain, ChainError, Enumeration, Goal};
use crate::trace::{Behavior, Event, TracePrefix};

/// Constants a context function may return.
pub const CONSTANTS: std::ops::RangeInclusive<i64> = 0..=10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Prog {
    /// Identity token the linker exposes to code-reading contexts.
    pub id: String,
    /// Unreachable statements appended after the write.
    pub dead_code: Option<String>,
}

impl Prog {
    pub fn new(id: &str, dead_code: Option<&str>) -> Self {
        Prog { id: id.into(), dead_code: dead_code.map(Into::into) }
    }
}

impl fmt::Display for Prog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: x = read(); y = f(); write(x + y)", self.id)?;
        if let Some(d) = &self.dead_code {
            write!(f, "; if (false) {{ {d} }}")?;
        }
        Ok(())
    }
}

/// A source context: `f` returns a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Const(pub i64);

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f() = {}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TgtCtx {
    Const(i64),
    /// `f` returns `then` when linked with the program `id`, else `other`.
    ByCode { id: String, then: i64, other: i64 },
}

impl fmt::Display for TgtCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TgtCtx::Const(c) => write!(f, "f() = {c}"),
            TgtCtx::ByCode { id, then, other } => write!(f, "f() = if code is {id} then {then} else {other}"),
        }
    }
}

impl TgtCtx {
    /// What `f` returns once linked with `p`.
    pub fn resolve(&self, p: &Prog) -> i64 {
        match self {
            TgtCtx::Const(c) => *c,
            TgtCtx::ByCode { id, then, other } => {
                if *id == p.id {
                    *then
                } else {
                    *other
                }
            }
        }
    }
}

fn behaviour(y: i64, domain: &[u64]) -> Behavior {
    domain
        .iter()
        .map(|&x| TracePrefix::terminated(vec![Event::Read(x), Event::out_int(x as i64 + y)]))
        .collect()
}

/// The identity compiler into the language with code introspection.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntrospectChain;

impl Chain for IntrospectChain {
    type SrcProg = Prog;
    type TgtProg = Prog;
    type SrcCtx = Const;
    type TgtCtx = TgtCtx;

    fn name(&self) -> String {
        "code-introspection".into()
    }

    fn compile(&self, p: &Prog) -> Result<Prog, ChainError> {
        Ok(p.clone())
    }

    fn src_behavior(&self, _p: &Prog, c: &Const, b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(behaviour(c.0, &b.domain))
    }

    fn tgt_behavior(&self, p: &Prog, c: &TgtCtx, b: &Bounds) -> Result<Behavior, ChainError> {
        Ok(behaviour(c.resolve(p), &b.domain))
    }

    fn src_contexts(&self, _programs: &[Prog], _b: &Bounds) -> Enumeration<Const> {
        Enumeration::complete(CONSTANTS.map(Const).collect())
    }

    fn tgt_contexts(&self, programs: &[Prog], _b: &Bounds) -> Enumeration<TgtCtx> {
        let mut items: Vec<TgtCtx> = CONSTANTS.map(TgtCtx::Const).collect();
        for p in programs {
            for then in CONSTANTS {
                for other in CONSTANTS {
                    items.push(TgtCtx::ByCode { id: p.id.clone(), then, other });
                }
            }
        }
        Enumeration::complete(items)
    }

    /// Hard-codes each program in turn wherever the context reads the code.
    fn backtranslate(&self, c_t: &TgtCtx, programs: &[Prog], goal: &Goal, _b: &Bounds) -> Backtranslation<Const> {
        let mut cands = Vec::new();
        for i in goal.programs() {
            let c = Const(c_t.resolve(&programs[i]));
            if !cands.contains(&c) {
                cands.push(c);
            }
        }
        Backtranslation::Candidates(cands)
    }
}

/// Two programs that differ only in dead code.
pub fn programs() -> [Prog; 2] {
    [Prog::new("P1", None), Prog::new("P2", Some("write(0)"))]
}

/// The context that tells the two programs apart, making them output 1 and 2 on input 0.
pub fn distinguishing_context() -> TgtCtx {
    TgtCtx::ByCode { id: "P1".into(), then: 1, other: 2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_reading_context_separates_the_programs() {
        let [p1, p2] = programs();
        let b = Bounds { domain: vec![0], ..Bounds::default() };
        let c = distinguishing_context();
        let t1 = IntrospectChain.tgt_behavior(&p1, &c, &b).unwrap();
        let t2 = IntrospectChain.tgt_behavior(&p2, &c, &b).unwrap();
        assert!(t1.contains(&TracePrefix::terminated(vec![Event::Read(0), Event::out_int(1)])));
        assert!(t2.contains(&TracePrefix::terminated(vec![Event::Read(0), Event::out_int(2)])));
        for k in CONSTANTS {
            let s1 = IntrospectChain.src_behavior(&p1, &Const(k), &b).unwrap();
            assert_eq!(s1, IntrospectChain.src_behavior(&p2, &Const(k), &b).unwrap());
        }
    }
}
