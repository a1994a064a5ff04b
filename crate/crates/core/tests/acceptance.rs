//! The acceptance suite. Each test prints one line of the form
//! `acceptance N PASS|FAIL name (elapsed of limit) detail` and asserts what
//! it measured. Run with `--nocapture` (or `--test-threads 1 --nocapture`
//! for ordered output) to see the lines.

mod common;

use std::time::{Duration, Instant};

use common::{gauss, khs_system, report, Gauss};
use num::Rational64;
use scwb_core::backtrans::{
    backtranslate_ctx, build_tree, ctx::eval_linked, ctx_accepts_src, inject_extract_eval, tree_backtranslate, tree_paths,
    verify_rfrxc, Direction, TraceTree,
};
use scwb_core::compiler::{compile_program, compile_context};
use scwb_core::counterexamples::{
    demo::reachable_sets, falsifying_set, khs, run_demo, solve_khs_system, DemoOptions, KhsSolution, Missing,
};
use scwb_core::criteria::{check_determinacy, check_input_totality, check_safety_like};
use scwb_core::gen::Gen;
use scwb_core::monitor::{builtin_monitors, decompose, dense_bounded_check, monitor_eval, monitor_eval_lasso, sequences, PropVerdict};
use scwb_core::source::{self, parse_src_iface, typecheck_context, Iface, SrcProgram, Ty};
use scwb_core::target::{self, parse_tgt_context, wf_context, TgtContext, TgtProgram};
use scwb_core::trace::{Event, TerminalMark, TracePrefix, Value};

const DOMAIN: [u64; 3] = [0, 1, 2];

fn secs(n: u64) -> Duration {
    Duration::from_secs(n)
}

/// A generator, an interface and a pool of programs sharing it.
fn pool(seed: u64, n: usize) -> (Gen, Iface, Vec<SrcProgram>) {
    let mut g = Gen::new(seed);
    let iface = g.iface();
    let programs = g.program_pool(&iface, n);
    (g, iface, programs)
}

/// A well-formed random target context for `iface`.
fn wf_tgt_context(g: &mut Gen, iface: &Iface) -> TgtContext {
    loop {
        let c = g.tgt_context(iface);
        if wf_context(&c, &iface.names()).is_ok() {
            return c;
        }
    }
}

#[test]
fn acceptance_01_backtranslation_examples() {
    let t0 = Instant::now();
    let iface = parse_src_iface("(iface (f (-> nat nat)) (g (-> bool bool)))").unwrap();
    let mut g = Gen::new(1);
    let programs: Vec<SrcProgram> = (0..10).map(|_| g.program(&iface)).collect();
    let ten_plus_five = backtranslate_ctx(&parse_tgt_context("(+ 10 5)").unwrap(), &iface).unwrap();
    let false_plus_three = backtranslate_ctx(&parse_tgt_context("(+ false 3)").unwrap(), &iface).unwrap();
    let mut ok = true;
    for p in &programs {
        ok &= eval_linked(p, &ten_plus_five) == Some(Value::Nat(17));
        let w = source::link(p, &false_plus_three).unwrap();
        ok &= source::run(&w, &[], 1000, false).trace == TracePrefix::terminated(vec![Event::FailAct]);
    }
    let extract = |n| inject_extract_eval(Direction::Extract, Ty::Nat, Value::Nat(n));
    ok &= extract(5) == Some(Value::Nat(3));
    ok &= extract(7) == Some(Value::Nat(5));
    ok &= extract(0).is_none();
    report(1, "back-translation worked examples", ok, t0, secs(1), "");
    assert!(ok);
}

#[test]
fn acceptance_02_compiler_correctness() {
    let t0 = Instant::now();
    let mut g = Gen::new(2);
    let mut mismatches = Vec::new();
    let mut exhausted = 0;
    for i in 0..200 {
        let iface = g.iface();
        let p = g.program(&iface);
        let c = g.src_context(&iface);
        let len = g.u64_in(0, 3) as usize;
        let inputs: Vec<u64> = (0..len).map(|_| g.u64_in(0, 4)).collect();
        let w = source::link(&p, &c).expect("generated pairs link");
        let tw = target::link(&compile_program(&p).unwrap(), &compile_context(&c, &iface).unwrap()).unwrap();
        let s = source::run(&w, &inputs, 1000, false);
        let t = target::run(&tw, &inputs, 1000, false);
        // Step counts inside a truncation mark are interpreter-specific.
        let same = match (&s.trace.end, &t.trace.end) {
            (TerminalMark::Truncated(_), TerminalMark::Truncated(_)) => s.trace.events == t.trace.events,
            _ => s.trace == t.trace,
        };
        exhausted += usize::from(s.inputs_exhausted && t.inputs_exhausted);
        if !same || s.inputs_exhausted != t.inputs_exhausted {
            mismatches.push(format!("#{i}: {} vs {}", s.trace, t.trace));
        }
    }
    report(
        2,
        "compiler correctness on 200 random runs",
        mismatches.is_empty(),
        t0,
        secs(30),
        &format!("mismatches={} input_exhausted={exhausted}", mismatches.len()),
    );
    assert!(mismatches.is_empty(), "{mismatches:?}");
}

#[test]
fn acceptance_03_bounded_rrhp() {
    let t0 = Instant::now();
    let (mut g, iface, programs) = pool(3, 10);
    let compiled: Vec<TgtProgram> = programs.iter().map(|p| compile_program(p).unwrap()).collect();
    let (mut mismatches, mut truncated) = (0, 0);
    for _ in 0..100 {
        let c_t = wf_tgt_context(&mut g, &iface);
        let c_s = backtranslate_ctx(&c_t, &iface).unwrap();
        for (p, tp) in programs.iter().zip(&compiled) {
            let bt = target::behaviors(tp, &c_t, &DOMAIN, 3, 2000).unwrap();
            let bs = source::behaviors(p, &c_s, &DOMAIN, 3, 2000).unwrap();
            truncated += usize::from(bt.has_truncated() || bs.has_truncated());
            mismatches += usize::from(bt != bs);
        }
    }
    let ok = mismatches == 0 && truncated == 0;
    report(3, "bounded pf-RRHP over 100 contexts x 10 programs", ok, t0, secs(60), &format!("mismatches={mismatches} truncated={truncated}"));
    assert!(ok);
}

/// Every tree whose root-to-leaf paths have at most three nodes and whose
/// call nodes have at most three children, over one `nat -> nat` function.
fn trees(depth: usize, root: bool) -> Vec<TraceTree> {
    let mut out = vec![TraceTree::Term, TraceTree::FailLeaf];
    if !root {
        out.push(TraceTree::Eps);
    }
    if depth <= 1 {
        return out;
    }
    let sub = trees(depth - 1, false);
    for k in 0..=3usize {
        let mut combos: Vec<Vec<TraceTree>> = vec![vec![]];
        for _ in 0..k {
            combos = combos.into_iter().flat_map(|c| sub.iter().map(move |t| [c.clone(), vec![t.clone()]].concat())).collect();
        }
        for kids in combos {
            let children = kids.into_iter().enumerate().map(|(v, t)| (Value::Nat(v as u64), t)).collect();
            out.push(TraceTree::CallNode { fname: "f".into(), arg: Value::Nat(depth as u64), children });
        }
    }
    out
}

fn path_trace(path: &[scwb_core::backtrans::CtxTok]) -> TracePrefix {
    use scwb_core::backtrans::CtxTok;
    let mut events = Vec::new();
    for tok in path {
        match tok {
            CtxTok::Call(f, v) => events.push(Event::Call(f.clone(), *v)),
            CtxTok::Ret(v) => events.push(Event::Ret(*v)),
            CtxTok::Fail => {
                events.push(Event::FailAct);
                return TracePrefix::terminated(events);
            }
            CtxTok::Term => return TracePrefix::terminated(events),
            CtxTok::Div => return TracePrefix::diverging(events),
        }
    }
    TracePrefix::open(events)
}

#[test]
fn acceptance_04_trace_tree_pipeline() {
    let t0 = Instant::now();
    let mut g = Gen::new(4);
    let mut failures = Vec::new();
    for i in 0..200 {
        let iface = g.iface();
        let k = g.u64_in(1, 4) as usize;
        let programs = g.program_pool(&iface, k);
        let c_t = wf_tgt_context(&mut g, &iface);
        let script: Vec<u64> = (0..3).map(|_| g.u64_in(0, 3)).collect();
        let r = verify_rfrxc(&programs, &c_t, &[script], 1000).unwrap();
        if !r.passed() {
            failures.push(format!("#{i} at {:?}: {}", r.failed_stage(), r.to_json()));
        }
    }
    let iface = parse_src_iface("(iface (f (-> nat nat)))").unwrap();
    let all = trees(3, true);
    let check = |t: &TraceTree| {
        let c_s = tree_backtranslate(t, &iface);
        let paths = tree_paths(t);
        build_tree(&paths, &iface).as_ref() == Ok(t)
            && typecheck_context(&c_s, &iface) == Ok(Ty::Nat)
            && paths.iter().all(|p| ctx_accepts_src(&c_s, &iface, &path_trace(p)))
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let tree_failures: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = all
            .chunks(all.len().div_ceil(workers))
            .map(|chunk| s.spawn(move || chunk.iter().filter(|t| !check(t)).map(|t| t.to_string()).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    let ok = failures.is_empty() && tree_failures.is_empty();
    report(
        4,
        "trace-tree pipeline",
        ok,
        t0,
        secs(60),
        &format!("random_failures={} trees={} tree_failures={}", failures.len(), all.len(), tree_failures.len()),
    );
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    assert!(tree_failures.is_empty(), "{:?}", &tree_failures[..tree_failures.len().min(5)]);
}

#[test]
fn acceptance_05_decomposition() {
    let t0 = Instant::now();
    let (a, b) = (Event::Write(0), Event::Write(1));
    let alphabet = [a.clone(), b];
    let mut monitors = builtin_monitors(&a);
    let mut bad = Vec::new();
    let mut checked = 0;
    for m in &monitors {
        let (s, d) = decompose(m);
        let both = |v1: PropVerdict, v2: PropVerdict| {
            if v1 == PropVerdict::Accept && v2 == PropVerdict::Accept {
                PropVerdict::Accept
            } else {
                PropVerdict::Reject
            }
        };
        for len in 0..=6 {
            for events in sequences(&alphabet, len) {
                for t in [TracePrefix::terminated(events.clone()), TracePrefix::diverging(events.clone())] {
                    checked += 1;
                    if monitor_eval(m, &t) != both(monitor_eval(&s, &t), monitor_eval(&d, &t)) {
                        bad.push(format!("{}: {t}", m.name));
                    }
                }
                for cut in 0..len {
                    let (stem, cycle) = events.split_at(cut);
                    checked += 1;
                    let direct = monitor_eval_lasso(m, stem, cycle);
                    if direct != both(monitor_eval_lasso(&s, stem, cycle), monitor_eval_lasso(&d, stem, cycle)) {
                        bad.push(format!("{}: lasso {stem:?} ({cycle:?})ω", m.name));
                    }
                }
            }
        }
    }
    let parts: Vec<_> = monitors.iter().flat_map(|m| {
        let (s, d) = decompose(m);
        [s, d]
    }).collect();
    monitors.extend(parts);
    let mut disagreements = Vec::new();
    for m in &monitors {
        let direct = (0..=4).all(|n| sequences(&alphabet, n).into_iter().all(|e| monitor_eval(m, &TracePrefix::terminated(e)) == PropVerdict::Accept));
        let r = dense_bounded_check(m, 4, &alphabet);
        if (r.verdict != PropVerdict::Reject) != direct {
            disagreements.push(m.name.clone());
        }
    }
    let ok = bad.is_empty() && disagreements.is_empty();
    report(5, "safety/dense decomposition", ok, t0, secs(10), &format!("traces={checked} monitors={}", monitors.len()));
    assert!(bad.is_empty(), "{:?}", &bad[..bad.len().min(5)]);
    assert!(disagreements.is_empty(), "{disagreements:?}");
}

#[test]
fn acceptance_06_fuel_separation() {
    let t0 = Instant::now();
    let r = run_demo("fuel_rsp_not_rdp", &DemoOptions { k: 2, depth: 8 }).unwrap();
    report(6, "fuel separation", r.passed(), t0, secs(5), &format!("checks={} failed={:?}", r.checks.len(), r.failed()));
    assert!(r.passed(), "{}", r.to_json());
}

#[test]
fn acceptance_07_rtep_separation() {
    let t0 = Instant::now();
    let r = run_demo("rtep_not_rsp_rdp", &DemoOptions::default()).unwrap();
    report(7, "RTEP separation", r.passed(), t0, secs(5), &format!("checks={} failed={:?}", r.checks.len(), r.failed()));
    assert!(r.passed(), "{}", r.to_json());
}

/// Solver and oracle on every reachable K-set; returns (sets, unique, agreements).
fn khs_sets(k: usize) -> (usize, usize, Vec<String>) {
    let mut unique = 0;
    let mut disagree = Vec::new();
    let sets = reachable_sets(k, &[0, 1, 2, 3]);
    for (set, _) in &sets {
        let (a, b) = khs_system(k, set);
        let oracle = gauss(a, b, k);
        let (_, sol) = solve_khs_system(k, set);
        let agree = match (&sol, &oracle) {
            (KhsSolution::Solution(x), Gauss::Unique(y)) => x == y,
            (KhsSolution::Underdetermined(_), Gauss::Underdetermined) => true,
            (KhsSolution::Inconsistent, Gauss::Inconsistent) => true,
            _ => false,
        };
        if !agree {
            disagree.push(format!("{set:?}: {sol:?} vs {oracle:?}"));
        }
        if let KhsSolution::Solution(x) = &sol {
            let b = khs::src_behaviour(k, &khs::Constants(x.clone()));
            if set.iter().all(|&(a, y)| b.contains(&TracePrefix::terminated(vec![Event::Read(a), Event::Out(y)]))) {
                unique += 1;
            }
        }
    }
    (sets.len(), unique, disagree)
}

#[test]
fn acceptance_08_k_hypersafety() {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut all_claims = true;
    for k in [2usize, 3] {
        let (n, unique, disagree) = khs_sets(k);
        assert!(disagree.is_empty(), "solver and oracle disagree: {disagree:?}");
        let s = falsifying_set(k);
        let c = Rational64::from_integer(k as i64 - 1);
        let expected: Vec<(u64, Rational64)> =
            (1..=k as u64).map(|a| (a, Rational64::from_integer(a as i64) + c)).chain([(k as u64 + 1, Rational64::from_integer(k as i64 + 1))]).collect();
        assert_eq!(s, expected);
        let (a, b) = khs_system(k, &s);
        assert_eq!(gauss(a, b, k), Gauss::Inconsistent);
        assert_eq!(solve_khs_system(k, &s).1, KhsSolution::Inconsistent);
        let bt = khs::tgt_behaviour(k, &khs::falsifying_table(k));
        assert!(s.iter().all(|&(a, y)| bt.contains(&TracePrefix::terminated(vec![Event::Read(a), Event::Out(y)]))));
        let demo = run_demo("khs_k_not_k1", &DemoOptions { k, depth: 8 }).unwrap();
        all_claims &= unique == n && demo.passed();
        lines.push(format!("K={k}: {unique}/{n} unique, demo {}", if demo.passed() { "passed" } else { "failed" }));
        if k == 3 {
            assert_eq!(unique, n);
            assert!(demo.passed(), "{}", demo.to_json());
        } else {
            // Input 1 missing leaves f_2 free and pins f_1 twice.
            for (set, _) in reachable_sets(k, &[0, 1, 2, 3]) {
                let (missing, sol) = solve_khs_system(k, &set);
                assert_eq!(matches!(sol, KhsSolution::Solution(_)), missing != Missing::First, "{set:?}");
            }
        }
    }
    report(8, "K-hypersafety", all_claims, t0, secs(5), &lines.join("; "));
}

#[test]
#[ignore = "fails: with K = 2 and input 1 missing, both remaining equations constrain only f_1"]
fn khs_every_reachable_two_set_solves_uniquely() {
    let (n, unique, _) = khs_sets(2);
    assert_eq!(unique, n);
}

#[test]
fn acceptance_09_introspection_and_tini() {
    let t0 = Instant::now();
    let a = run_demo("rhp_not_r2rsp", &DemoOptions::default()).unwrap();
    let b = run_demo("rtp_not_rtinip", &DemoOptions::default()).unwrap();
    let ok = a.passed() && b.passed();
    report(9, "introspection and TINI", ok, t0, secs(5), &format!("failed={:?} {:?}", a.failed(), b.failed()));
    assert!(a.passed(), "{}", a.to_json());
    assert!(b.passed(), "{}", b.to_json());
}

#[test]
fn acceptance_10_language_meta_properties() {
    let t0 = Instant::now();
    let mut g = Gen::new(10);
    let mut wholes = Vec::new();
    for _ in 0..200 {
        let iface = g.iface();
        let p = compile_program(&g.program(&iface)).unwrap();
        let c = wf_tgt_context(&mut g, &iface);
        wholes.push((p, c));
    }
    let runner = |(p, c): &(TgtProgram, TgtContext)| target::behaviors(p, c, &DOMAIN, 3, 2000).unwrap();
    let det = check_determinacy(runner, &wholes);
    let tot = check_input_totality(runner, &wholes, &DOMAIN);
    let unsafe_: Vec<usize> = wholes.iter().enumerate().filter(|(_, w)| !check_safety_like(&runner(w), 5).is_holds()).map(|(i, _)| i).collect();
    let ok = det.is_holds() && tot.is_holds() && unsafe_.is_empty();
    report(
        10,
        "determinacy, input totality, safety-like behaviours",
        ok,
        t0,
        secs(60),
        &format!("determinacy={} totality={} not_safety_like={}", det.label(), tot.label(), unsafe_.len()),
    );
    assert!(det.is_holds(), "{det:?}");
    assert!(tot.is_holds(), "{tot:?}");
    assert!(unsafe_.is_empty(), "{unsafe_:?}");
}
