//! Scripted separation demos. Each runs the positive half (the weaker
//! criterion holds on the chain) and the negative half (a concrete witness
//! against the stronger one), replaying every witness it reports.

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::criteria::{
    check_criterion, replay_target_witness, robustly_satisfies_source, robustly_satisfies_target, Bounds, Chain,
    CriterionId, Targets, Verdict,
};
use crate::monitor::{finite_or_repeat, never_event, only_infinite_repeat, terminating_only, builtin_monitors, PropVerdict};
use crate::trace::{tini_member, tini_witness, Event, Rational, TerminalMark, TracePrefix};
use crate::trace_json::trace_to_json;

use super::fuel::{self, FuelErasure, FuelIntroduction, FuelTrace, Fuel, Stmt, Unit};
use super::introspect::{self, IntrospectChain};
use super::khs::{self, KhsChain, KhsProg, KhsSolution, Table};
use super::rtep::{self, RtepChain, SCtx, TCtx};
use super::tini::{self, TiniChain};

pub const DEMOS: [&str; 6] =
    ["fuel_rsp_not_rdp", "fuel_rdp_not_rsp", "rtep_not_rsp_rdp", "rtp_not_rtinip", "rhp_not_r2rsp", "khs_k_not_k1"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DemoError {
    #[error("unknown demo `{0}`; expected one of {}", DEMOS.join(", "))]
    Unknown(String),
    #[error("K must be at least 1")]
    BadK,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemoOptions {
    /// Arity of the hypersafety demo.
    pub k: usize,
    /// Longest prefix the fuel demos reproduce.
    pub depth: usize,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions { k: 2, depth: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct DemoCheck {
    pub name: String,
    pub passed: bool,
    pub detail: Json,
}

#[derive(Clone, Debug)]
pub struct DemoReport {
    pub demo: String,
    pub checks: Vec<DemoCheck>,
    pub notes: Vec<String>,
}

impl DemoReport {
    fn new(demo: &str) -> Self {
        DemoReport { demo: demo.into(), checks: vec![], notes: vec![] }
    }

    fn check(&mut self, name: &str, passed: bool, detail: Json) {
        self.checks.push(DemoCheck { name: name.into(), passed, detail });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn to_json(&self) -> Json {
        json!({
            "demo": self.demo,
            "passed": self.passed(),
            "notes": self.notes,
            "checks": self.checks.iter().map(|c| json!({"check": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
        })
    }
}

pub fn run_demo(name: &str, opts: &DemoOptions) -> Result<DemoReport, DemoError> {
    match name {
        "fuel_rsp_not_rdp" => Ok(fuel_rsp_not_rdp(opts.depth)),
        "fuel_rdp_not_rsp" => Ok(fuel_rdp_not_rsp()),
        "rtep_not_rsp_rdp" => Ok(rtep_not_rsp_rdp()),
        "rtp_not_rtinip" => Ok(rtp_not_rtinip()),
        "rhp_not_r2rsp" => Ok(rhp_not_r2rsp()),
        "khs_k_not_k1" if opts.k == 0 => Err(DemoError::BadK),
        "khs_k_not_k1" => Ok(khs_k_not_k1(opts.k)),
        other => Err(DemoError::Unknown(other.to_string())),
    }
}

fn verdict_json<S: std::fmt::Display, T: std::fmt::Display>(v: &Verdict<S, T>) -> Json {
    v.to_json()
}

/// Runs the replay of a violation witness and records it as its own check.
fn replay<C: Chain, S>(r: &mut DemoReport, chain: &C, programs: &[C::SrcProg], v: &Verdict<S, C::TgtCtx>, b: &Bounds) {
    if let Verdict::Violated(w) = v {
        let ok = replay_target_witness(chain, programs, w, b).unwrap_or(false);
        r.check("witness replays", ok, json!({"context": w.context.as_ref().map(|c| c.to_string())}));
    }
}

const FUEL_NOTE: &str = "fuel is spent on event-producing steps only; silent steps are free";

fn fuel_rsp_not_rdp(depth: usize) -> DemoReport {
    let mut r = DemoReport::new("fuel_rsp_not_rdp");
    r.notes.push(FUEL_NOTE.into());
    let b = Bounds { ctx_size: 10, input_len: 0, budget: 64.max(depth as u64 + 1), domain: vec![] };
    let programs = fuel::demo_programs();

    let mut all = true;
    let mut verdicts = Vec::new();
    for p in &programs {
        let v = check_criterion(&FuelErasure, CriterionId::PfRsp, std::slice::from_ref(p), Targets::Given(vec![Unit]), &b)
            .expect("arity 1");
        all &= v.is_holds();
        verdicts.push(json!({"program": p.to_string(), "verdict": verdict_json(&v)}));
    }
    r.check("pf-rsp holds on every demo program", all, json!(verdicts));

    let mut exact = true;
    let mut checked = 0;
    let mut mismatch = Json::Null;
    for p in &programs {
        let t = fuel::run(p, None).to_prefix(depth);
        for k in 0..=depth.min(t.events.len()) {
            let m = &t.events[..k];
            let s = fuel::run(p, Some(k as u64)).to_prefix(0);
            checked += 1;
            let ok = s.events == m && s.end != TerminalMark::Open;
            if !ok && exact {
                mismatch = json!({"program": p.to_string(), "prefix": trace_to_json(&TracePrefix::open(m.to_vec())), "source": trace_to_json(&s)});
            }
            exact &= ok;
        }
    }
    r.check("context (C, |m|) reproduces each target prefix exactly", exact, json!({"prefixes": checked, "max_len": depth, "mismatch": mismatch}));

    let dense = finite_or_repeat(Event::out_int(42));
    let p41 = Stmt::omega(41);
    let src: Vec<TracePrefix> = (0..=10).map(|n| fuel::run(&p41, Some(n)).to_prefix(0)).collect();
    let terminated = src.iter().all(|t| t.is_terminating());
    let accepted = programs
        .iter()
        .all(|p| (0..=10).all(|n| fuel::run(p, Some(n)).verdict(&dense) == PropVerdict::Accept));
    r.check(
        "source traces with fuel ≤ 10 are terminated and satisfy the dense property",
        terminated && accepted,
        json!({"property": dense.name, "program": p41.to_string(), "traces": src.iter().map(trace_to_json).collect::<Vec<_>>()}),
    );

    let tgt = fuel::run(&p41, None);
    let violated = tgt.verdict(&dense) == PropVerdict::Reject;
    let witness = TracePrefix::open(tgt.to_prefix(10).events);
    r.check(
        "target violates the dense property",
        violated && witness.events.len() >= 10 && witness.events.iter().all(|e| *e != Event::out_int(42)),
        json!({"property": dense.name, "program": p41.to_string(), "context": Unit.to_string(), "witness": trace_to_json(&witness),
               "lasso": match &tgt { FuelTrace::Lasso { stem, cycle } => json!({"stem": stem.len(), "cycle": cycle.iter().map(|e| e.to_string()).collect::<Vec<_>>()}), FuelTrace::Finite(_) => Json::Null }}),
    );
    let again = fuel::run(&p41, None).to_prefix(witness.events.len());
    r.check("witness replays", again.events == witness.events, json!({"events": witness.events.len()}));
    r
}

fn fuel_rdp_not_rsp() -> DemoReport {
    let mut r = DemoReport::new("fuel_rdp_not_rsp");
    r.notes.push(FUEL_NOTE.into());
    let b = Bounds { ctx_size: 12, input_len: 0, budget: 64, domain: vec![] };
    let programs = fuel::demo_programs();
    let dense: Vec<_> = builtin_monitors(&Event::out_int(42)).into_iter().filter(|m| m.accepts_all_terminating()).collect();

    let mut pairs = 0;
    let mut preserved = true;
    for m in &dense {
        for p in &programs {
            if fuel::run(p, None).verdict(m) != PropVerdict::Accept {
                continue;
            }
            pairs += 1;
            preserved &= (0..=12).all(|n| fuel::run(p, Some(n)).verdict(m) == PropVerdict::Accept);
        }
    }
    r.check(
        "robustly satisfied dense properties stay satisfied with fuel ≤ 12",
        preserved && pairs > 0,
        json!({"monitors": dense.iter().map(|m| m.name.clone()).collect::<Vec<_>>(), "robust_pairs": pairs}),
    );
    let finite = programs.iter().all(|p| {
        (0..=12).all(|n| match fuel::run(p, Some(n)) {
            FuelTrace::Finite(t) => t.is_terminating() || FuelTrace::Finite(t.clone()) == fuel::run(p, None),
            FuelTrace::Lasso { .. } => false,
        })
    });
    r.check("every target trace is terminated or already a source trace", finite, json!({"fuel": "0..=12"}));

    let safety = only_infinite_repeat(Event::out_int(42));
    let p42 = Stmt::omega(42);
    r.check(
        "source robustly satisfies the safety property",
        fuel::run(&p42, None).verdict(&safety) == PropVerdict::Accept,
        json!({"property": safety.name, "program": p42.to_string(), "contexts": [Unit.to_string()]}),
    );
    let v = robustly_satisfies_target(&FuelIntroduction, &p42, &safety, &b).expect("identity compiler");
    let witness_ok = matches!(&v, Verdict::Violated(w) if w.present.iter().all(|(_, t)| t.is_terminating()));
    r.check("target violates the safety property", witness_ok, verdict_json(&v));
    replay(&mut r, &FuelIntroduction, &[p42.clone()], &v, &b);
    let later = Fuel(5);
    let t = fuel::run(&p42, Some(later.0)).to_prefix(0);
    r.check(
        "every fuel amount stops the loop",
        t == TracePrefix::terminated(vec![Event::out_int(42); 5]),
        json!({"context": later.to_string(), "trace": trace_to_json(&t)}),
    );
    r
}

fn rtep_not_rsp_rdp() -> DemoReport {
    let mut r = DemoReport::new("rtep_not_rsp_rdp");
    let b = Bounds { ctx_size: 5, input_len: 0, budget: 100, domain: vec![] };
    let p = rtep::zero_on_bool();
    let never42 = never_event(Event::out_int(42));

    let s = robustly_satisfies_source(&RtepChain, &p, &never42, &b);
    r.check("source robustly never outputs 42", s.is_holds(), verdict_json(&s));
    let t = robustly_satisfies_target(&RtepChain, &p, &never42, &b).expect("well-typed");
    let f3 = matches!(&t, Verdict::Violated(w) if w.context == Some(TCtx(3))
        && w.present == vec![(0, TracePrefix::terminated(vec![Event::out_int(42)]))]);
    r.check("target f(3) outputs 42", f3, verdict_json(&t));
    replay(&mut r, &RtepChain, &[p.clone()], &t, &b);

    let compiled = rtep::compile(&p).expect("well-typed");
    let div = rtep::run_tgt(&compiled, TCtx(2));
    r.check("target f(2) diverges silently", div == TracePrefix::diverging(vec![]), json!({"trace": trace_to_json(&div)}));
    let term = terminating_only();
    let s = robustly_satisfies_source(&RtepChain, &p, &term, &b);
    let t = robustly_satisfies_target(&RtepChain, &p, &term, &b).expect("well-typed");
    r.check("source robustly terminates", s.is_holds(), verdict_json(&s));
    r.check("target violates termination", matches!(&t, Verdict::Violated(w) if w.context == Some(TCtx(2))), verdict_json(&t));
    replay(&mut r, &RtepChain, &[p.clone()], &t, &b);

    let rsp = check_criterion(&RtepChain, CriterionId::PfRsp, &[p.clone()], Targets::Given(vec![TCtx(3)]), &b).expect("arity 1");
    r.check("pf-rsp violated", rsp.is_violated(), verdict_json(&rsp));
    replay(&mut r, &RtepChain, &[p.clone()], &rsp, &b);
    let rdp = check_criterion(&RtepChain, CriterionId::PfRdp, &[p.clone()], Targets::Given(vec![TCtx(2)]), &b).expect("arity 1");
    r.check("pf-rdp violated", rdp.is_violated(), verdict_json(&rdp));
    replay(&mut r, &RtepChain, &[p.clone()], &rdp, &b);

    let pool = rtep::program_pool();
    let ctxs: Vec<TCtx> = (0..=5).map(TCtx).collect();
    let mut pairs = 0;
    let mut equal_pairs = 0;
    let mut ok = true;
    let mut failures = Vec::new();
    for (i, p1) in pool.iter().enumerate() {
        for p2 in &pool[i + 1..] {
            if p1.arg != p2.arg {
                continue;
            }
            pairs += 1;
            let src_ctxs = RtepChain.src_contexts(&[p1.clone(), p2.clone()], &b).items;
            let src_equal = src_ctxs.iter().all(|c| rtep::run_src(p1, *c).ok() == rtep::run_src(p2, *c).ok());
            let (t1, t2) = (rtep::compile(p1).expect("pool"), rtep::compile(p2).expect("pool"));
            if src_equal {
                equal_pairs += 1;
                if let Some(c) = ctxs.iter().find(|c| rtep::run_tgt(&t1, **c) != rtep::run_tgt(&t2, **c)) {
                    ok = false;
                    failures.push(json!({"programs": [p1.to_string(), p2.to_string()], "context": c.to_string()}));
                }
            }
            let v = check_criterion(&RtepChain, CriterionId::Rtep, &[p1.clone(), p2.clone()], Targets::Given(ctxs.clone()), &b)
                .expect("arity 2");
            if !v.is_holds() {
                ok = false;
                failures.push(json!({"programs": [p1.to_string(), p2.to_string()], "verdict": verdict_json(&v)}));
            }
        }
    }
    r.check(
        "no target context f(0..5) separates source-equivalent programs",
        ok && equal_pairs > 0,
        json!({"pairs": pairs, "source_equivalent_pairs": equal_pairs, "failures": failures, "sample": SCtx::Bool(true).to_string()}),
    );
    r
}

fn rtp_not_rtinip() -> DemoReport {
    let mut r = DemoReport::new("rtp_not_rtinip");
    let b = Bounds { ctx_size: 0, input_len: 1, budget: 10, domain: vec![1, 2] };
    let p = tini::Prog;
    let rtp = check_criterion(&TiniChain, CriterionId::PfRtp, &[p], Targets::Enumerate, &b).expect("arity 1");
    r.check("pf-rtp holds over every target context", rtp.is_holds(), verdict_json(&rtp));

    let src_ok = tini::CONSTANTS.map(tini::Const).all(|c| tini_member(&TiniChain.src_behavior(&p, &c, &b).expect("total")));
    r.check("every source context satisfies noninterference", src_ok, json!({"contexts": "f() = c for c in 0..=10"}));

    let leak = TiniChain.tgt_behavior(&p, &tini::TgtCtx::ReadsX, &b).expect("total");
    let pair = tini_witness(&leak);
    let expected = (
        TracePrefix::terminated(vec![Event::PrivIn(1), Event::PubOut(1)]),
        TracePrefix::terminated(vec![Event::PrivIn(2), Event::PubOut(2)]),
    );
    r.check(
        "target context f() = x breaks noninterference",
        !tini_member(&leak) && pair.as_ref() == Some(&expected),
        json!({"context": tini::TgtCtx::ReadsX.to_string(), "pair": pair.map(|(a, b)| [trace_to_json(&a), trace_to_json(&b)])}),
    );
    let v = check_criterion(&TiniChain, CriterionId::Rtinip, &[p], Targets::Given(vec![tini::TgtCtx::ReadsX]), &b).expect("arity 1");
    r.check("rtinip violated", v.is_violated(), verdict_json(&v));
    replay(&mut r, &TiniChain, &[p], &v, &b);
    r
}

fn rhp_not_r2rsp() -> DemoReport {
    let mut r = DemoReport::new("rhp_not_r2rsp");
    let b = Bounds { ctx_size: 0, input_len: 1, budget: 10, domain: vec![0] };
    let programs = introspect::programs();
    for p in &programs {
        let v = check_criterion(&IntrospectChain, CriterionId::PfRhp, std::slice::from_ref(p), Targets::Enumerate, &b).expect("arity 1");
        r.check(&format!("pf-rhp holds for {}", p.id), v.is_holds(), json!({"contexts_checked": match &v { Verdict::Holds(e) => e.contexts_checked, _ => 0 }, "verdict": v.label()}));
    }
    let equal = introspect::CONSTANTS.clone().all(|c| {
        let ctx = introspect::Const(c);
        IntrospectChain.src_behavior(&programs[0], &ctx, &b).ok() == IntrospectChain.src_behavior(&programs[1], &ctx, &b).ok()
    });
    r.check("every source context sees equal behaviours", equal, json!({"contexts": "f() = c for c in 0..=10"}));

    let c = introspect::distinguishing_context();
    let t1 = IntrospectChain.tgt_behavior(&programs[0], &c, &b).expect("total");
    let t2 = IntrospectChain.tgt_behavior(&programs[1], &c, &b).expect("total");
    let o1 = TracePrefix::terminated(vec![Event::Read(0), Event::out_int(1)]);
    let o2 = TracePrefix::terminated(vec![Event::Read(0), Event::out_int(2)]);
    r.check(
        "code-reading context yields outputs 1 and 2",
        t1.contains(&o1) && t2.contains(&o2),
        json!({"context": c.to_string(), "P1": trace_to_json(&o1), "P2": trace_to_json(&o2)}),
    );
    let v = check_criterion(&IntrospectChain, CriterionId::PfR2rsp, &programs, Targets::Given(vec![c.clone()]), &b).expect("arity 2");
    r.check("pf-r2rsp violated", v.is_violated(), verdict_json(&v));
    replay(&mut r, &IntrospectChain, &programs, &v, &b);
    let v = check_criterion(&IntrospectChain, CriterionId::Rtep, &programs, Targets::Given(vec![c]), &b).expect("arity 2");
    r.check("rtep violated", v.is_violated(), verdict_json(&v));
    replay(&mut r, &IntrospectChain, &programs, &v, &b);
    r
}

/// Every K-set of distinct inputs with outputs in `outputs`, each paired with
/// a target table producing it, when one exists.
pub fn reachable_sets(k: usize, outputs: &[i64]) -> Vec<(Vec<(u64, Rational)>, Table)> {
    let mut out = Vec::new();
    for missing in 1..=k as u64 + 1 {
        let inputs: Vec<u64> = (1..=k as u64 + 1).filter(|&a| a != missing).collect();
        let mut tuples: Vec<Vec<i64>> = vec![vec![]];
        for _ in &inputs {
            tuples = tuples.into_iter().flat_map(|t| outputs.iter().map(move |&o| [t.clone(), vec![o]].concat())).collect();
        }
        for ys in tuples {
            let set: Vec<(u64, Rational)> = inputs.iter().zip(&ys).map(|(&a, &y)| (a, Rational::from_integer(y))).collect();
            if let Some(t) = table_for(k, &set) {
                out.push((set, t));
            }
        }
    }
    out
}

/// A table that makes the target produce the prefixes, adjusting one
/// function per input.
fn table_for(k: usize, set: &[(u64, Rational)]) -> Option<Table> {
    let mut rows = vec![vec![Rational::from_integer(0); k + 1]; k];
    for &(a, y) in set {
        let need = y - Rational::from_integer(a as i64);
        let j = if a as usize == k + 1 || a != 1 { 1 } else { 2 };
        if j > k {
            if need != Rational::from_integer(0) {
                return None;
            }
            continue;
        }
        rows[j - 1][a as usize - 1] = need;
    }
    let t = Table(rows);
    let b = khs::tgt_behaviour(k, &t);
    set.iter()
        .all(|&(a, y)| b.contains(&TracePrefix::terminated(vec![Event::Read(a), Event::Out(y)])))
        .then_some(t)
}

fn khs_k_not_k1(k: usize) -> DemoReport {
    let mut r = DemoReport::new("khs_k_not_k1");
    r.notes.push(format!("K = {k}; outputs are exact rationals"));
    let b = Bounds { ctx_size: 2, input_len: 1, budget: 10, domain: (1..=k as u64 + 1).collect() };
    let p = KhsProg { k };

    let sets = reachable_sets(k, &[0, 1, 2, 3]);
    let mut unsolved = Vec::new();
    for (set, table) in &sets {
        let (missing, sol) = khs::solve_khs_system(k, set);
        let reproduced = match &sol {
            KhsSolution::Solution(v) => {
                let bs = khs::src_behaviour(k, &khs::Constants(v.clone()));
                set.iter().all(|&(a, y)| bs.contains(&TracePrefix::terminated(vec![Event::Read(a), Event::Out(y)])))
            }
            _ => false,
        };
        if !reproduced {
            unsolved.push(json!({
                "set": set.iter().map(|(a, y)| format!("[{a}, {y}]")).collect::<Vec<_>>(),
                "missing": format!("{missing:?}"),
                "result": sol.to_string(),
                "target_context": table.to_string(),
            }));
        }
    }
    let shown: Vec<Json> = unsolved.iter().take(5).cloned().collect();
    r.check(
        "every reachable K-prefix set has a unique constant context",
        unsolved.is_empty(),
        json!({"sets": sets.len(), "unsolved": unsolved.len(), "examples": shown}),
    );

    let table = khs::falsifying_table(k);
    let rhsp = check_criterion(&KhsChain, CriterionId::PfRhsp(k), &[p], Targets::Given(vec![table.clone()]), &b).expect("arity 1");
    r.check(&format!("pf-rhsp:{k} holds on the falsifying context"), rhsp.is_holds(), verdict_json(&rhsp));

    let s = khs::falsifying_set(k);
    let (_, sol) = khs::solve_khs_system(k, &s);
    r.check(
        "the falsifying (K+1)-set is inconsistent",
        sol == KhsSolution::Inconsistent,
        json!({"set": s.iter().map(|(a, y)| format!("[{a}, {y}]")).collect::<Vec<_>>(), "result": sol.to_string()}),
    );
    let bt = khs::tgt_behaviour(k, &table);
    let all = s.iter().all(|&(a, y)| bt.contains(&TracePrefix::terminated(vec![Event::Read(a), Event::Out(y)])));
    r.check("the target table reproduces the falsifying set", all, json!({"context": table.to_string()}));
    let v = check_criterion(&KhsChain, CriterionId::PfRhsp(k + 1), &[p], Targets::Given(vec![table]), &b).expect("arity 1");
    r.check(&format!("pf-rhsp:{} violated", k + 1), v.is_violated(), verdict_json(&v));
    replay(&mut r, &KhsChain, &[p], &v, &b);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_demo_is_an_error() {
        assert!(matches!(run_demo("nope", &DemoOptions::default()), Err(DemoError::Unknown(_))));
        assert_eq!(run_demo("khs_k_not_k1", &DemoOptions { k: 0, depth: 8 }).err(), Some(DemoError::BadK));
    }

    #[test]
    fn table_for_reaches_the_falsifying_set_shape() {
        for (set, t) in reachable_sets(3, &[0, 2]) {
            let b = khs::tgt_behaviour(3, &t);
            for (a, y) in set {
                assert!(b.contains(&TracePrefix::terminated(vec![Event::Read(a), Event::Out(y)])));
            }
        }
    }
}
