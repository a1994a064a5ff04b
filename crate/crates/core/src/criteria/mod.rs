//! Bounded, witness-producing checkers for robust satisfaction of properties
//! and for the property-free forms of the robust preservation criteria,
//! parametric over a compilation chain.

mod chain;
mod ltld;
mod meta;

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value as Json};
use thiserror::Error;

pub use chain::{Backtranslation, Bounds, Chain, ChainError, Enumeration, Side};
pub use ltld::LtLd;
pub use meta::{check_determinacy, check_input_totality, check_safety_like, related_by_determinacy};

use crate::monitor::{monitor_eval, PropVerdict, PropertyMonitor};
use crate::trace::{obs_leq, prefix_leq, tini_member, tini_witness, xpref_leq, Behavior, Observation, TerminalMark, TracePrefix};

/// Identifiers of the criteria, one per property-free characterization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CriterionId {
    PfRtp,
    PfRsp,
    PfRdp,
    PfRhp,
    PfRschp,
    PfRhsp(usize),
    PfR2rtp,
    PfR2rsp,
    PfRkrsp(usize),
    PfRfrxp(usize),
    PfRrhp,
    Rtep,
    Rtinip,
}

impl CriterionId {
    /// Number of programs the criterion relates, or `None` for a pool of any size.
    pub fn arity(self) -> Option<usize> {
        use CriterionId::*;
        match self {
            PfRtp | PfRsp | PfRdp | PfRhp | PfRschp | PfRhsp(_) | Rtinip => Some(1),
            PfR2rtp | PfR2rsp | Rtep => Some(2),
            PfRkrsp(k) | PfRfrxp(k) => Some(k),
            PfRrhp => None,
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CriterionId::*;
        match self {
            PfRtp => write!(f, "pf-rtp"),
            PfRsp => write!(f, "pf-rsp"),
            PfRdp => write!(f, "pf-rdp"),
            PfRhp => write!(f, "pf-rhp"),
            PfRschp => write!(f, "pf-rschp"),
            PfRhsp(k) => write!(f, "pf-rhsp:{k}"),
            PfR2rtp => write!(f, "pf-r2rtp"),
            PfR2rsp => write!(f, "pf-r2rsp"),
            PfRkrsp(k) => write!(f, "pf-rkrsp:{k}"),
            PfRfrxp(k) => write!(f, "pf-rfrxp:{k}"),
            PfRrhp => write!(f, "pf-rrhp"),
            Rtep => write!(f, "rtep"),
            Rtinip => write!(f, "rtinip"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CriterionError {
    #[error("unknown criterion `{0}`")]
    Unknown(String),
    #[error("criterion {id} relates {expected} program(s), got {got}")]
    Arity { id: CriterionId, expected: usize, got: usize },
    #[error("arity argument must be positive")]
    ZeroArity,
    #[error(transparent)]
    Chain(#[from] ChainError),
}

impl FromStr for CriterionId {
    type Err = CriterionError;

    /// Accepts names such as `pf-rsp`, `pfRSP`, `pf-rhsp:3` or `pf-rfrxp(2)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_ascii_lowercase();
        let (base, k) = match norm.find([':', '(']) {
            Some(i) => {
                let digits = norm[i + 1..].trim_end_matches(')');
                let k: usize = digits.parse().map_err(|_| CriterionError::Unknown(s.to_string()))?;
                if k == 0 {
                    return Err(CriterionError::ZeroArity);
                }
                (norm[..i].to_string(), Some(k))
            }
            None => (norm, None),
        };
        use CriterionId::*;
        let id = match (base.as_str(), k) {
            ("pfrtp", None) => PfRtp,
            ("pfrsp", None) => PfRsp,
            ("pfrdp", None) => PfRdp,
            ("pfrhp", None) => PfRhp,
            ("pfrschp", None) => PfRschp,
            ("pfrhsp", Some(k)) => PfRhsp(k),
            ("pfr2rtp", None) => PfR2rtp,
            ("pfr2rsp", None) => PfR2rsp,
            ("pfrkrsp", Some(k)) => PfRkrsp(k),
            ("pfrfrxp", Some(k)) => PfRfrxp(k),
            ("pfrrhp", None) => PfRrhp,
            ("rtep", None) => Rtep,
            ("rtinip", None) => Rtinip,
            _ => return Err(CriterionError::Unknown(s.to_string())),
        };
        Ok(id)
    }
}

/// What a single source context has to achieve for one program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Requirement {
    /// The complete trace is produced.
    Contains(TracePrefix),
    /// Some produced trace extends the finite prefix.
    Prefix(TracePrefix),
    /// Some produced trace extends the extended prefix (silent divergence matches only itself).
    XPrefix(TracePrefix),
    /// The behaviour is exactly this set.
    Equals(Behavior),
    /// The behaviour contains this set.
    Includes(Behavior),
    /// Every prefix of the observation is produced.
    Covers(Vec<TracePrefix>),
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Requirement::Contains(t) => write!(f, "produces {t}"),
            Requirement::Prefix(m) | Requirement::XPrefix(m) => write!(f, "extends {m}"),
            Requirement::Equals(b) => write!(f, "behaviour = {b}"),
            Requirement::Includes(b) => write!(f, "behaviour ⊇ {b}"),
            Requirement::Covers(o) => {
                write!(f, "covers {{")?;
                for (i, m) in o.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// The obligation a source context must meet, over programs by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goal {
    Each(Vec<(usize, Requirement)>),
    /// The two programs have different behaviours.
    Distinguish(usize, usize),
    /// The program's behaviour violates termination-insensitive noninterference.
    BreaksTini(usize),
}

impl Goal {
    pub fn programs(&self) -> Vec<usize> {
        match self {
            Goal::Each(rs) => rs.iter().map(|(i, _)| *i).collect(),
            Goal::Distinguish(i, j) => vec![*i, *j],
            Goal::BreaksTini(i) => vec![*i],
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Each(rs) => {
                for (n, (i, r)) in rs.iter().enumerate() {
                    if n > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "P{i} {r}")?;
                }
                Ok(())
            }
            Goal::Distinguish(i, j) => write!(f, "P{i} and P{j} behave differently"),
            Goal::BreaksTini(i) => write!(f, "P{i} leaks private input"),
        }
    }
}

fn requirement_met(r: &Requirement, b: &Behavior) -> Option<bool> {
    let met = match r {
        Requirement::Contains(t) => b.contains(t),
        Requirement::Prefix(m) => b.iter().any(|t| prefix_leq(m, t)),
        Requirement::XPrefix(x) => b.iter().any(|t| xpref_leq(x, t)),
        Requirement::Equals(want) => {
            if b.has_truncated() {
                return None;
            }
            return Some(b == want);
        }
        Requirement::Includes(want) => want.iter().all(|t| b.contains(t)),
        Requirement::Covers(o) => obs_leq(&Observation::new(o.iter().cloned()), b),
    };
    if met {
        Some(true)
    } else if b.has_truncated() {
        None
    } else {
        Some(false)
    }
}

/// Decides a goal from the behaviours it mentions; `None` when bounds leave it open.
pub fn goal_met(goal: &Goal, behaviour: &mut dyn FnMut(usize) -> Option<Behavior>) -> Option<bool> {
    match goal {
        Goal::Each(rs) => {
            let mut all = Some(true);
            for (i, r) in rs {
                let b = behaviour(*i)?;
                match requirement_met(r, &b) {
                    Some(true) => {}
                    Some(false) => return Some(false),
                    None => all = None,
                }
            }
            all
        }
        Goal::Distinguish(i, j) => {
            let (bi, bj) = (behaviour(*i)?, behaviour(*j)?);
            if bi.has_truncated() || bj.has_truncated() {
                None
            } else {
                Some(bi != bj)
            }
        }
        Goal::BreaksTini(i) => {
            let b = behaviour(*i)?;
            if !tini_member(&b) {
                Some(true)
            } else if b.has_truncated() {
                None
            } else {
                Some(false)
            }
        }
    }
}

/// How a source context was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Via {
    Backtranslation,
    Enumeration,
}

#[derive(Clone, Debug)]
pub struct Match<S, T> {
    pub target_context: Option<T>,
    pub goal: Goal,
    pub source_context: S,
    pub via: Via,
}

#[derive(Clone, Debug)]
pub struct Evidence<S, T> {
    pub matches: Vec<Match<S, T>>,
    /// Number of target contexts, or source contexts for robust checks, examined.
    pub contexts_checked: usize,
    pub note: String,
}

/// A counterexample. `present` traces are in the behaviour of the indexed
/// program under `context`; `absent` ones are not.
#[derive(Clone, Debug)]
pub struct Witness<C> {
    pub side: Side,
    pub context: Option<C>,
    pub present: Vec<(usize, TracePrefix)>,
    pub absent: Vec<(usize, TracePrefix)>,
    pub reason: String,
    pub source_contexts_tried: usize,
}

#[derive(Clone, Debug)]
pub enum Verdict<S, T> {
    Holds(Evidence<S, T>),
    Violated(Witness<T>),
    Unknown(String),
}

impl<S, T> Verdict<S, T> {
    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds(_) => "holds",
            Verdict::Violated(_) => "violated",
            Verdict::Unknown(_) => "unknown",
        }
    }

    /// Process exit code: 0 holds, 1 violated, 2 unknown.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Holds(_) => 0,
            Verdict::Violated(_) => 1,
            Verdict::Unknown(_) => 2,
        }
    }
}

impl<S: fmt::Display, T: fmt::Display> Verdict<S, T> {
    pub fn to_json(&self) -> Json {
        let trace_list = |v: &[(usize, TracePrefix)]| {
            v.iter().map(|(i, t)| json!({"program": i, "trace": t.to_string()})).collect::<Vec<_>>()
        };
        match self {
            Verdict::Holds(ev) => json!({
                "verdict": "holds",
                "contexts_checked": ev.contexts_checked,
                "note": ev.note,
                "matches": ev.matches.iter().map(|m| json!({
                    "target_context": m.target_context.as_ref().map(|c| c.to_string()),
                    "goal": m.goal.to_string(),
                    "source_context": m.source_context.to_string(),
                    "via": match m.via { Via::Backtranslation => "backtranslation", Via::Enumeration => "enumeration" },
                })).collect::<Vec<_>>(),
            }),
            Verdict::Violated(w) => json!({
                "verdict": "violated",
                "side": w.side.to_string(),
                "context": w.context.as_ref().map(|c| c.to_string()),
                "present": trace_list(&w.present),
                "absent": trace_list(&w.absent),
                "reason": w.reason,
                "source_contexts_tried": w.source_contexts_tried,
            }),
            Verdict::Unknown(why) => json!({"verdict": "unknown", "reason": why}),
        }
    }
}

enum Search<S> {
    Found(S, Via),
    Exhausted(usize),
    Impossible(String),
    Open(String),
}

/// Looks for a source context meeting `goal`: the chain's back-translation
/// first, then the chain's source context enumeration.
fn find_source_context<C: Chain>(
    chain: &C,
    programs: &[C::SrcProg],
    c_t: Option<&C::TgtCtx>,
    goal: &Goal,
    src: &Enumeration<C::SrcCtx>,
    bounds: &Bounds,
) -> Search<C::SrcCtx> {
    let check = |c_s: &C::SrcCtx| -> Option<bool> {
        goal_met(goal, &mut |i| chain.src_behavior(&programs[i], c_s, bounds).ok())
    };
    let mut inconclusive = false;
    if let Some(c_t) = c_t {
        match chain.backtranslate(c_t, programs, goal, bounds) {
            Backtranslation::Candidates(cands) => {
                for c_s in cands {
                    match check(&c_s) {
                        Some(true) => return Search::Found(c_s, Via::Backtranslation),
                        Some(false) => {}
                        None => inconclusive = true,
                    }
                }
            }
            Backtranslation::Impossible(why) => return Search::Impossible(why),
            Backtranslation::Unavailable => {}
        }
    }
    for c_s in &src.items {
        match check(c_s) {
            Some(true) => return Search::Found(c_s.clone(), Via::Enumeration),
            Some(false) => {}
            None => inconclusive = true,
        }
    }
    if src.complete && !inconclusive {
        Search::Exhausted(src.items.len())
    } else if inconclusive {
        Search::Open(format!("some of {} source contexts hit the bound", src.items.len()))
    } else {
        Search::Open(format!("no match among {} source contexts; the source context space is not exhausted", src.items.len()))
    }
}

/// Instantiates the criterion on one target context: the goals a single
/// source context must meet, each with the target traces that justify it.
fn obligations(id: CriterionId, behaviours: &[Behavior]) -> Result<Vec<(Goal, Vec<(usize, TracePrefix)>)>, String> {
    use CriterionId::*;
    let trunc = |i: usize| behaviours[i].has_truncated();
    let traces = |i: usize| behaviours[i].iter().cloned().collect::<Vec<_>>();
    let each = |i: usize, f: &dyn Fn(&TracePrefix) -> Requirement| {
        traces(i).into_iter().map(|t| (Goal::Each(vec![(i, f(&t))]), vec![(i, t)])).collect::<Vec<_>>()
    };
    let product = |k: usize, f: &dyn Fn(&TracePrefix) -> Requirement| {
        let mut tuples: Vec<Vec<TracePrefix>> = vec![vec![]];
        for i in 0..k {
            let mut next = Vec::new();
            for tu in &tuples {
                for t in traces(i) {
                    let mut tu = tu.clone();
                    tu.push(t);
                    next.push(tu);
                }
            }
            tuples = next;
        }
        tuples
            .into_iter()
            .map(|tu| {
                let goal = Goal::Each(tu.iter().enumerate().map(|(i, t)| (i, f(t))).collect());
                (goal, tu.into_iter().enumerate().collect())
            })
            .collect::<Vec<_>>()
    };
    Ok(match id {
        PfRtp => {
            if trunc(0) {
                return Err("a target trace hit the bound".into());
            }
            each(0, &|t| Requirement::Contains(t.clone()))
        }
        PfRsp => each(0, &|t| Requirement::Prefix(t.maximal_finpref())),
        PfRdp => traces(0)
            .into_iter()
            .filter(|t| t.end == TerminalMark::SilentDiv)
            .map(|t| (Goal::Each(vec![(0, Requirement::Contains(t.clone()))]), vec![(0, t)]))
            .collect(),
        PfRhp | PfRschp => {
            if trunc(0) {
                return Err("a target trace hit the bound".into());
            }
            let b = behaviours[0].clone();
            let req = if id == PfRhp { Requirement::Equals(b) } else { Requirement::Includes(b) };
            vec![(Goal::Each(vec![(0, req)]), traces(0).into_iter().map(|t| (0, t)).collect())]
        }
        PfRhsp(k) => {
            let mut prefixes: Vec<TracePrefix> = traces(0).iter().map(|t| t.maximal_finpref()).collect();
            prefixes.dedup();
            let k = k.min(prefixes.len());
            subsets(prefixes.len(), k)
                .into_iter()
                .map(|ix| {
                    let o: Vec<TracePrefix> = ix.iter().map(|&i| prefixes[i].clone()).collect();
                    let shown = o.iter().map(|m| (0, m.clone())).collect();
                    (Goal::Each(vec![(0, Requirement::Covers(o))]), shown)
                })
                .collect()
        }
        PfR2rtp => {
            if trunc(0) || trunc(1) {
                return Err("a target trace hit the bound".into());
            }
            product(2, &|t| Requirement::Contains(t.clone()))
        }
        PfR2rsp => product(2, &|t| Requirement::Prefix(t.maximal_finpref())),
        PfRkrsp(k) => product(k, &|t| Requirement::Prefix(t.maximal_finpref())),
        PfRfrxp(k) => product(k, &|t| Requirement::XPrefix(t.maximal_xpref())),
        PfRrhp => {
            if (0..behaviours.len()).any(trunc) {
                return Err("a target trace hit the bound".into());
            }
            let reqs = behaviours.iter().enumerate().map(|(i, b)| (i, Requirement::Equals(b.clone()))).collect();
            let shown = behaviours.iter().enumerate().flat_map(|(i, b)| b.iter().map(move |t| (i, t.clone()))).collect();
            vec![(Goal::Each(reqs), shown)]
        }
        Rtep => {
            if trunc(0) || trunc(1) {
                return Err("a target trace hit the bound".into());
            }
            if behaviours[0] == behaviours[1] {
                vec![]
            } else {
                let only0 = behaviours[0].iter().find(|t| !behaviours[1].contains(t)).map(|t| (0, t.clone()));
                let only1 = behaviours[1].iter().find(|t| !behaviours[0].contains(t)).map(|t| (1, t.clone()));
                vec![(Goal::Distinguish(0, 1), only0.into_iter().chain(only1).collect())]
            }
        }
        Rtinip => match tini_witness(&behaviours[0]) {
            Some((a, b)) => vec![(Goal::BreaksTini(0), vec![(0, a), (0, b)])],
            None if trunc(0) => return Err("a target trace hit the bound".into()),
            None => vec![],
        },
    })
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut vec![], &mut out);
    out
}

/// Where the target contexts of a criterion check come from.
pub enum Targets<T> {
    Given(Vec<T>),
    Enumerate,
}

/// Checks one criterion on the given programs.
///
/// Holds when every obligation of every considered target context is met by
/// some source context and the target contexts were given or exhaustively
/// enumerated. Violated only when the source search ended in a provable
/// impossibility or exhausted a complete enumeration. Unknown otherwise.
pub fn check_criterion<C: Chain>(
    chain: &C,
    id: CriterionId,
    programs: &[C::SrcProg],
    targets: Targets<C::TgtCtx>,
    bounds: &Bounds,
) -> Result<Verdict<C::SrcCtx, C::TgtCtx>, CriterionError> {
    match id.arity() {
        Some(k) if k != programs.len() => {
            return Err(CriterionError::Arity { id, expected: k, got: programs.len() })
        }
        None if programs.is_empty() => return Err(CriterionError::Arity { id, expected: 1, got: 0 }),
        _ => {}
    }
    let compiled = programs.iter().map(|p| chain.compile(p)).collect::<Result<Vec<_>, _>>()?;
    let (contexts, complete) = match targets {
        Targets::Given(cs) => (cs, true),
        Targets::Enumerate => {
            let e = chain.tgt_contexts(programs, bounds);
            (e.items, e.complete)
        }
    };
    let src = chain.src_contexts(programs, bounds);
    let mut matches = Vec::new();
    let mut unknown: Option<String> = None;
    for c_t in &contexts {
        let mut behaviours = Vec::new();
        for tp in &compiled {
            behaviours.push(chain.tgt_behavior(tp, c_t, bounds)?);
        }
        let obls = match obligations(id, &behaviours) {
            Ok(o) => o,
            Err(why) => {
                unknown.get_or_insert(format!("target context {c_t}: {why}"));
                continue;
            }
        };
        for (goal, shown) in obls {
            match find_source_context(chain, programs, Some(c_t), &goal, &src, bounds) {
                Search::Found(c_s, via) => {
                    matches.push(Match { target_context: Some(c_t.clone()), goal, source_context: c_s, via })
                }
                Search::Exhausted(n) => {
                    return Ok(Verdict::Violated(Witness {
                        side: Side::Target,
                        context: Some(c_t.clone()),
                        present: shown,
                        absent: absent_for(&goal, &behaviours),
                        reason: format!("no source context among all {n} meets: {goal}"),
                        source_contexts_tried: n,
                    }))
                }
                Search::Impossible(why) => {
                    return Ok(Verdict::Violated(Witness {
                        side: Side::Target,
                        context: Some(c_t.clone()),
                        present: shown,
                        absent: absent_for(&goal, &behaviours),
                        reason: format!("no source context can meet {goal}: {why}"),
                        source_contexts_tried: 0,
                    }))
                }
                Search::Open(why) => {
                    unknown.get_or_insert(format!("target context {c_t}, goal {goal}: {why}"));
                }
            }
        }
    }
    if let Some(why) = unknown {
        return Ok(Verdict::Unknown(why));
    }
    if id == CriterionId::PfRdp {
        return Ok(Verdict::Unknown(format!(
            "all {} silently diverging target traces were reproduced, but divergence-preservation also covers unbounded traces",
            matches.len()
        )));
    }
    if !complete {
        return Ok(Verdict::Unknown(format!(
            "all {} obligations over {} target contexts met; the target context space is not exhausted",
            matches.len(),
            contexts.len()
        )));
    }
    let n = contexts.len();
    Ok(Verdict::Holds(Evidence { matches, contexts_checked: n, note: format!("{id} over {n} target context(s)") }))
}

fn absent_for(goal: &Goal, behaviours: &[Behavior]) -> Vec<(usize, TracePrefix)> {
    match goal {
        Goal::Distinguish(i, j) => {
            let mut out = Vec::new();
            if let Some(t) = behaviours[*i].iter().find(|t| !behaviours[*j].contains(t)) {
                out.push((*j, t.clone()));
            }
            if let Some(t) = behaviours[*j].iter().find(|t| !behaviours[*i].contains(t)) {
                out.push((*i, t.clone()));
            }
            out
        }
        _ => vec![],
    }
}

fn robust_over<Ctx: Clone>(
    contexts: Enumeration<Ctx>,
    side: Side,
    m: &PropertyMonitor,
    mut behaviour: impl FnMut(&Ctx) -> Result<Behavior, ChainError>,
) -> Verdict<Ctx, Ctx> {
    let mut unknown = None;
    let n = contexts.items.len();
    for c in contexts.items {
        let Ok(b) = behaviour(&c) else { continue };
        for t in b.iter() {
            match monitor_eval(m, t) {
                PropVerdict::Accept => {}
                PropVerdict::Reject => {
                    return Verdict::Violated(Witness {
                        side,
                        context: Some(c.clone()),
                        present: vec![(0, t.clone())],
                        absent: vec![],
                        reason: format!("{} rejects {t}", m.name),
                        source_contexts_tried: 0,
                    })
                }
                PropVerdict::Unknown => {
                    unknown.get_or_insert(format!("{} cannot decide {t}", m.name));
                }
            }
        }
    }
    if let Some(why) = unknown {
        return Verdict::Unknown(why);
    }
    if !contexts.complete {
        return Verdict::Unknown(format!("{} accepts every trace of {n} contexts; the context space is not exhausted", m.name));
    }
    Verdict::Holds(Evidence { matches: vec![], contexts_checked: n, note: format!("{} accepts every trace of all {n} contexts", m.name) })
}

/// Does the program satisfy the monitor's property against every source context?
pub fn robustly_satisfies_source<C: Chain>(
    chain: &C,
    p: &C::SrcProg,
    m: &PropertyMonitor,
    bounds: &Bounds,
) -> Verdict<C::SrcCtx, C::SrcCtx> {
    let ctxs = chain.src_contexts(std::slice::from_ref(p), bounds);
    robust_over(ctxs, Side::Source, m, |c| chain.src_behavior(p, c, bounds))
}

/// Does the compiled program satisfy the monitor's property against every target context?
pub fn robustly_satisfies_target<C: Chain>(
    chain: &C,
    p: &C::SrcProg,
    m: &PropertyMonitor,
    bounds: &Bounds,
) -> Result<Verdict<C::TgtCtx, C::TgtCtx>, ChainError> {
    let tp = chain.compile(p)?;
    let ctxs = chain.tgt_contexts(std::slice::from_ref(p), bounds);
    Ok(robust_over(ctxs, Side::Target, m, |c| chain.tgt_behavior(&tp, c, bounds)))
}

/// Robust satisfaction on either side, with contexts rendered as text.
pub fn robustly_satisfies<C: Chain>(
    chain: &C,
    side: Side,
    p: &C::SrcProg,
    m: &PropertyMonitor,
    bounds: &Bounds,
) -> Result<Verdict<String, String>, ChainError> {
    Ok(match side {
        Side::Source => stringify(robustly_satisfies_source(chain, p, m, bounds)),
        Side::Target => stringify(robustly_satisfies_target(chain, p, m, bounds)?),
    })
}

/// Renders the contexts of a verdict as text.
pub fn stringify<S: fmt::Display, T: fmt::Display>(v: Verdict<S, T>) -> Verdict<String, String> {
    match v {
        Verdict::Holds(ev) => Verdict::Holds(Evidence {
            matches: ev
                .matches
                .into_iter()
                .map(|m| Match {
                    target_context: m.target_context.map(|c| c.to_string()),
                    goal: m.goal,
                    source_context: m.source_context.to_string(),
                    via: m.via,
                })
                .collect(),
            contexts_checked: ev.contexts_checked,
            note: ev.note,
        }),
        Verdict::Violated(w) => Verdict::Violated(Witness {
            side: w.side,
            context: w.context.map(|c| c.to_string()),
            present: w.present,
            absent: w.absent,
            reason: w.reason,
            source_contexts_tried: w.source_contexts_tried,
        }),
        Verdict::Unknown(s) => Verdict::Unknown(s),
    }
}

/// Re-executes a witness of a criterion violation on the target side (or a
/// robust-satisfaction violation on either side) and checks that every
/// recorded trace is reproduced exactly.
pub fn replay_target_witness<C: Chain>(
    chain: &C,
    programs: &[C::SrcProg],
    w: &Witness<C::TgtCtx>,
    bounds: &Bounds,
) -> Result<bool, ChainError> {
    let Some(c) = &w.context else { return Ok(false) };
    let mut cache: Vec<Option<Behavior>> = vec![None; programs.len()];
    let mut get = |i: usize| -> Result<Behavior, ChainError> {
        if let Some(b) = &cache[i] {
            return Ok(b.clone());
        }
        let b = chain.tgt_behavior(&chain.compile(&programs[i])?, c, bounds)?;
        cache[i] = Some(b.clone());
        Ok(b)
    };
    for (i, t) in &w.present {
        if !get(*i)?.contains(t) {
            return Ok(false);
        }
    }
    for (i, t) in &w.absent {
        if get(*i)?.contains(t) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn replay_source_witness<C: Chain>(
    chain: &C,
    programs: &[C::SrcProg],
    w: &Witness<C::SrcCtx>,
    bounds: &Bounds,
) -> Result<bool, ChainError> {
    let Some(c) = &w.context else { return Ok(false) };
    for (i, t) in &w.present {
        if !chain.src_behavior(&programs[*i], c, bounds)?.contains(t) {
            return Ok(false);
        }
    }
    for (i, t) in &w.absent {
        if chain.src_behavior(&programs[*i], c, bounds)?.contains(t) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_names_parse() {
        assert_eq!("pf-rsp".parse::<CriterionId>().unwrap(), CriterionId::PfRsp);
        assert_eq!("pfRSP".parse::<CriterionId>().unwrap(), CriterionId::PfRsp);
        assert_eq!("pf-rhsp:3".parse::<CriterionId>().unwrap(), CriterionId::PfRhsp(3));
        assert_eq!("pf-rfrxp(2)".parse::<CriterionId>().unwrap(), CriterionId::PfRfrxp(2));
        assert_eq!("rtep".parse::<CriterionId>().unwrap(), CriterionId::Rtep);
        assert!("pf-rhsp:0".parse::<CriterionId>().is_err());
        assert!("pf-xyz".parse::<CriterionId>().is_err());
        for id in [CriterionId::PfRkrsp(4), CriterionId::PfRrhp, CriterionId::Rtinip] {
            assert_eq!(id.to_string().parse::<CriterionId>().unwrap(), id);
        }
    }

    #[test]
    fn subsets_are_combinations() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(2, 0), vec![Vec::<usize>::new()]);
    }
}
