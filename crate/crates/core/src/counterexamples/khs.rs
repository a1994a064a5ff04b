//! The K-hypersafety separation: one program reading an input in `1..=K+1`
//! and writing a sum of context-provided values. Source contexts provide
//! constants; target contexts may make each value depend on the input.

use std::fmt;

use num::{One, Zero};

use crate::criteria::{Backtranslation, Bounds, Chain, ChainError, Enumeration, Goal, Requirement};
use crate::trace::{Behavior, Event, Rational, TracePrefix};

/// `x = read(); y = x + Σ_{j≠x} f_j()` for `x ≤ K`, and `y = x + f_1()` for `x = K+1`; `write(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KhsProg {
    pub k: usize,
}

impl fmt::Display for KhsProg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P_{}: x = read(); switch x {{ i ≤ {} ⇒ y = x + Σ_{{j≠i}} f_j(); {} ⇒ y = x + f_1() }}; write(y)", self.k, self.k, self.k + 1)
    }
}

/// A source context: `f_j()` returns `values[j-1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constants(pub Vec<Rational>);

impl fmt::Display for Constants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().enumerate().map(|(j, v)| format!("f_{}() = {v}", j + 1)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A target context: `f_j()` returns `table[j-1][x-1]` when the private input is `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Table(pub Vec<Vec<Rational>>);

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                format!("f_{}(x) = [{}]", j + 1, cells.join(" "))
            })
            .collect();
        write!(f, "{{{}}}", rows.join(", "))
    }
}

impl Table {
    /// The table in which every `f_j` ignores the input.
    pub fn constant(values: &[Rational], k: usize) -> Table {
        Table(values.iter().map(|v| vec![*v; k + 1]).collect())
    }
}

/// Output of the program on input `x` given the value of each `f_j` at `x`.
pub fn output(k: usize, x: u64, f: impl Fn(usize) -> Rational) -> Rational {
    let xr = Rational::from_integer(x as i64);
    if x as usize == k + 1 {
        xr + f(1)
    } else {
        xr + (1..=k).filter(|&j| j != x as usize).map(&f).fold(Rational::zero(), |a, b| a + b)
    }
}

fn trace(x: u64, y: Rational) -> TracePrefix {
    TracePrefix::terminated(vec![Event::Read(x), Event::Out(y)])
}

pub fn src_behaviour(k: usize, c: &Constants) -> Behavior {
    (1..=k as u64 + 1).map(|x| trace(x, output(k, x, |j| c.0[j - 1]))).collect()
}

pub fn tgt_behaviour(k: usize, t: &Table) -> Behavior {
    (1..=k as u64 + 1).map(|x| trace(x, output(k, x, |j| t.0[j - 1][x as usize - 1]))).collect()
}

/// Which input a K-set of prefixes leaves out, naming the case of the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Missing {
    Last,
    First,
    Middle(u64),
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KhsSolution {
    /// The unique constants reproducing every prefix.
    Solution(Vec<Rational>),
    /// Consistent, but some constant is not determined; one solution is given.
    Underdetermined(Vec<Rational>),
    Inconsistent,
    NotApplicable(String),
}

impl fmt::Display for KhsSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            KhsSolution::Solution(v) => write!(f, "solution [{}]", list(v)),
            KhsSolution::Underdetermined(v) => write!(f, "underdetermined, e.g. [{}]", list(v)),
            KhsSolution::Inconsistent => f.write_str("inconsistent"),
            KhsSolution::NotApplicable(why) => write!(f, "not applicable: {why}"),
        }
    }
}

/// Solution of the cyclic system `Σ_{j ∈ vars, j ≠ m} x_j = r_m` for each
/// `m ∈ vars`: `Some` values when unique, `None` for a free variable, or
/// `Err` when inconsistent.
fn cyclic(vars: &[usize], rhs: impl Fn(usize) -> Rational) -> Result<Vec<(usize, Option<Rational>)>, ()> {
    match vars.len() {
        0 => Ok(vec![]),
        1 => {
            if rhs(vars[0]).is_zero() {
                Ok(vec![(vars[0], None)])
            } else {
                Err(())
            }
        }
        n => {
            let total = vars.iter().map(|&m| rhs(m)).fold(Rational::zero(), |a, b| a + b) / Rational::from_integer(n as i64 - 1);
            Ok(vars.iter().map(|&m| (m, Some(total - rhs(m)))).collect())
        }
    }
}

/// Solves for the constant context that reproduces each `(input, output)` prefix.
pub fn solve_khs_system(k: usize, prefixes: &[(u64, Rational)]) -> (Missing, KhsSolution) {
    if k == 0 {
        return (Missing::None, KhsSolution::NotApplicable("K must be positive".into()));
    }
    let mut rhs: Vec<Option<Rational>> = vec![None; k + 2];
    for &(a, b) in prefixes {
        if a == 0 || a as usize > k + 1 {
            return (Missing::None, KhsSolution::NotApplicable(format!("input {a} is outside 1..={}", k + 1)));
        }
        if rhs[a as usize].is_some() {
            return (Missing::None, KhsSolution::NotApplicable(format!("input {a} repeats")));
        }
        rhs[a as usize] = Some(b - Rational::from_integer(a as i64));
    }
    let r = |a: usize| rhs[a].expect("present input");
    let mut x: Vec<Option<Rational>> = vec![None; k + 1];
    let mut unique = true;
    let mut fill = |sol: Vec<(usize, Option<Rational>)>, x: &mut Vec<Option<Rational>>| {
        for (j, v) in sol {
            unique &= v.is_some();
            x[j] = Some(v.unwrap_or_else(Rational::zero));
        }
    };
    let missing = match prefixes.len() {
        n if n == k + 1 => {
            let all: Vec<usize> = (1..=k).collect();
            let Ok(sol) = cyclic(&all, r) else { return (Missing::None, KhsSolution::Inconsistent) };
            let free_first = sol.iter().any(|(j, v)| *j == 1 && v.is_none());
            fill(sol, &mut x);
            if free_first {
                x[1] = Some(r(k + 1));
                unique = true;
            }
            Missing::None
        }
        n if n == k => {
            let m = (1..=k + 1).find(|&a| rhs[a].is_none()).expect("one input is missing");
            if m == k + 1 {
                let all: Vec<usize> = (1..=k).collect();
                let Ok(sol) = cyclic(&all, r) else { return (Missing::Last, KhsSolution::Inconsistent) };
                fill(sol, &mut x);
                Missing::Last
            } else if m == 1 {
                let x1 = r(k + 1);
                x[1] = Some(x1);
                let rest: Vec<usize> = (2..=k).collect();
                let Ok(sol) = cyclic(&rest, |a| r(a) - x1) else { return (Missing::First, KhsSolution::Inconsistent) };
                fill(sol, &mut x);
                Missing::First
            } else {
                let x1 = r(k + 1);
                x[1] = Some(x1);
                let total = r(1) + x1;
                let mut others = Rational::zero();
                for a in (2..=k).filter(|&a| a != m) {
                    let v = total - r(a);
                    others = others + v;
                    x[a] = Some(v);
                }
                x[m] = Some(r(1) - others);
                Missing::Middle(m as u64)
            }
        }
        n => return (Missing::None, KhsSolution::NotApplicable(format!("expected {k} or {} prefixes, got {n}", k + 1))),
    };
    let values: Vec<Rational> = x[1..].iter().map(|v| v.unwrap_or_else(Rational::zero)).collect();
    let consistent = prefixes.iter().all(|&(a, b)| output(k, a, |j| values[j - 1]) == b);
    let sol = if !consistent {
        KhsSolution::Inconsistent
    } else if unique {
        KhsSolution::Solution(values)
    } else {
        KhsSolution::Underdetermined(values)
    };
    (missing, sol)
}

/// `{[1, 1+c], …, [K, K+c], [K+1, K+1]}` with `c = K−1`.
pub fn falsifying_set(k: usize) -> Vec<(u64, Rational)> {
    let c = k as i64 - 1;
    let mut s: Vec<(u64, Rational)> = (1..=k as i64).map(|i| (i as u64, Rational::from_integer(i + c))).collect();
    s.push((k as u64 + 1, Rational::from_integer(k as i64 + 1)));
    s
}

/// `f_1` returns 1 except 0 at input K+1; every other `f_j` returns 1.
pub fn falsifying_table(k: usize) -> Table {
    let one = Rational::one();
    let mut rows = vec![vec![one; k + 1]; k];
    rows[0][k] = Rational::zero();
    Table(rows)
}

fn pairs_of(t: &TracePrefix) -> Option<(u64, Rational)> {
    match t.events.as_slice() {
        [Event::Read(a), Event::Out(b)] => Some((*a, *b)),
        _ => None,
    }
}

/// The identity compiler into the language where contexts read the program's input.
#[derive(Clone, Copy, Debug, Default)]
pub struct KhsChain;

impl Chain for KhsChain {
    type SrcProg = KhsProg;
    type TgtProg = KhsProg;
    type SrcCtx = Constants;
    type TgtCtx = Table;

    fn name(&self) -> String {
        "input-reading-context".into()
    }

    fn compile(&self, p: &KhsProg) -> Result<KhsProg, ChainError> {
        Ok(*p)
    }

    fn src_behavior(&self, p: &KhsProg, c: &Constants, _b: &Bounds) -> Result<Behavior, ChainError> {
        if c.0.len() != p.k {
            return Err(ChainError::Link(format!("context defines {} functions, program needs {}", c.0.len(), p.k)));
        }
        Ok(src_behaviour(p.k, c))
    }

    fn tgt_behavior(&self, p: &KhsProg, c: &Table, _b: &Bounds) -> Result<Behavior, ChainError> {
        if c.0.len() != p.k || c.0.iter().any(|row| row.len() != p.k + 1) {
            return Err(ChainError::Link(format!("table is not {} × {}", p.k, p.k + 1)));
        }
        Ok(tgt_behaviour(p.k, c))
    }

    /// Integer constants in `0..=ctx_size`; rationals make the space unbounded.
    fn src_contexts(&self, programs: &[KhsProg], b: &Bounds) -> Enumeration<Constants> {
        let Some(p) = programs.first() else { return Enumeration::partial(vec![]) };
        let mut out = vec![vec![]];
        for _ in 0..p.k {
            out = out
                .into_iter()
                .flat_map(|v: Vec<Rational>| {
                    (0..=b.ctx_size as i64).map(move |c| {
                        let mut w = v.clone();
                        w.push(Rational::from_integer(c));
                        w
                    })
                })
                .collect();
        }
        Enumeration::partial(out.into_iter().map(Constants).collect())
    }

    fn tgt_contexts(&self, programs: &[KhsProg], _b: &Bounds) -> Enumeration<Table> {
        let Some(p) = programs.first() else { return Enumeration::partial(vec![]) };
        Enumeration::partial(vec![falsifying_table(p.k), Table::constant(&vec![Rational::one(); p.k], p.k)])
    }

    /// Solves the linear system of the requested prefixes.
    fn backtranslate(&self, _c_t: &Table, programs: &[KhsProg], goal: &Goal, _b: &Bounds) -> Backtranslation<Constants> {
        let (Some(p), Goal::Each(reqs)) = (programs.first(), goal) else { return Backtranslation::Unavailable };
        let [(0, Requirement::Covers(o))] = reqs.as_slice() else { return Backtranslation::Unavailable };
        let Some(pairs) = o.iter().map(pairs_of).collect::<Option<Vec<_>>>() else { return Backtranslation::Unavailable };
        match solve_khs_system(p.k, &pairs) {
            (_, KhsSolution::Solution(v) | KhsSolution::Underdetermined(v)) => Backtranslation::Candidates(vec![Constants(v)]),
            (_, KhsSolution::Inconsistent) => {
                Backtranslation::Impossible(format!("the equations for {} prefixes admit no constant context", pairs.len()))
            }
            (_, KhsSolution::NotApplicable(_)) => Backtranslation::Unavailable,
        }
    }
}
