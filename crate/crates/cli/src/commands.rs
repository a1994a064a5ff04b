use std::fs;
use std::path::Path;

use serde_json::{json, Value as Json};

use scwb_core::backtrans::{backtranslate_ctx, build_tree, ctx_accepts_src, ctx_view, project, source_variant, tree_backtranslate};
use scwb_core::compiler::compile_program;
use scwb_core::counterexamples::{run_demo, DemoOptions};
use scwb_core::monitor::{decompose, dense_bounded_check, MonitorSpec, PropVerdict};
use scwb_core::sexp::ParseError;
use scwb_core::source::{self, parse_src_context, parse_src_iface, parse_src_program, typecheck_context, Iface, Ty};
use scwb_core::target::{self, parse_tgt_context, parse_tgt_program};
use scwb_core::trace::{xpref_leq, Event, TracePrefix};
use scwb_core::trace_json::{trace_from_json, trace_to_json, trace_to_jsonl};

use crate::{check, Cli, Command, Failure, Lang, Outcome, RunArgs, TracesArgs};

pub fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Compile { file } => compile(file, cli.json),
        Command::Run(args) => run(args, cli.json),
        Command::BacktranslateCtx { iface, ctx } => backtranslate_context(iface, ctx, cli.json),
        Command::BacktranslateTraces(args) => backtranslate_traces(args),
        Command::Check(args) => check::check(args, cli.seed),
        Command::Classify { spec, depth } => classify(spec, *depth),
        Command::Demo { name, k, depth } => demo(name, *k, *depth, cli.json),
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

/// Reads `path` and parses it, reporting parse errors with the file name and position.
pub fn parse_file<T>(path: &Path, parse: impl Fn(&str) -> Result<T, ParseError>) -> Result<T, Failure> {
    let text = read(path)?;
    parse(&text).map_err(|e| Failure::usage(format!("{}:{}:{}: expected {}", path.display(), e.line, e.col, e.expected)))
}

fn ok(stdout: String) -> Result<Outcome, Failure> {
    Ok(Outcome { stdout, code: 0 })
}

fn line(j: &Json) -> String {
    format!("{j}\n")
}

fn compile(file: &Path, as_json: bool) -> Result<Outcome, Failure> {
    let p = parse_file(file, parse_src_program)?;
    let t = compile_program(&p).map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
    if as_json {
        ok(line(&json!({"program": t.to_string()})))
    } else {
        ok(format!("{t}\n"))
    }
}

fn parse_inputs(raw: &[String]) -> Result<Vec<u64>, Failure> {
    raw.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().map_err(|_| Failure::usage(format!("input `{s}` is not a natural number"))))
        .collect()
}

fn run(args: &RunArgs, as_json: bool) -> Result<Outcome, Failure> {
    let inputs = parse_inputs(&args.inputs)?;
    let outcome = match args.lang {
        Lang::Src => {
            let p = parse_file(&args.program, parse_src_program)?;
            let c = parse_file(&args.context, parse_src_context)?;
            let w = source::link(&p, &c).map_err(|e| Failure::usage(format!("link: {e}")))?;
            source::run(&w, &inputs, args.budget, args.informative)
        }
        Lang::Tgt => {
            let p = parse_file(&args.program, parse_tgt_program)?;
            let c = parse_file(&args.context, parse_tgt_context)?;
            let w = target::link(&p, &c).map_err(|e| Failure::usage(format!("link: {e}")))?;
            target::run(&w, &inputs, args.budget, args.informative)
        }
    };
    if as_json {
        ok(line(&json!({
            "trace": trace_to_json(&outcome.trace),
            "steps": outcome.steps,
            "inputs_used": outcome.inputs_used,
            "inputs_exhausted": outcome.inputs_exhausted,
        })))
    } else {
        ok(trace_to_jsonl(&outcome.trace))
    }
}

fn backtranslate_context(iface: &Path, ctx: &Path, as_json: bool) -> Result<Outcome, Failure> {
    let i = parse_file(iface, parse_src_iface)?;
    let c = parse_file(ctx, parse_tgt_context)?;
    match backtranslate_ctx(&c, &i) {
        Ok(s) if as_json => ok(line(&json!({"source_context": s.to_string()}))),
        Ok(s) => ok(format!("{s}\n")),
        Err(e) => Err(Failure { code: 1, message: format!("cannot back-translate {}: {e}", ctx.display()) }),
    }
}

fn read_prefixes(path: &Path) -> Result<Vec<TracePrefix>, Failure> {
    let text = read(path)?;
    let j: Json = serde_json::from_str(&text).map_err(|e| {
        Failure::usage(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })?;
    let items = j.as_array().ok_or_else(|| Failure::usage(format!("{}: expected a JSON array of traces", path.display())))?;
    items
        .iter()
        .enumerate()
        .map(|(i, t)| trace_from_json(t).map_err(|e| Failure::usage(format!("{}: trace {i}: {e}", path.display()))))
        .collect()
}

fn reads(t: &TracePrefix) -> Vec<u64> {
    t.events.iter().filter_map(|e| if let Event::Read(n) = e { Some(*n) } else { None }).collect()
}

fn backtranslate_traces(args: &TracesArgs) -> Result<Outcome, Failure> {
    let iface: Iface = parse_file(&args.iface, parse_src_iface)?;
    let prefixes = read_prefixes(&args.prefixes)?;
    let programs = args.programs.iter().map(|p| parse_file(p, parse_src_program)).collect::<Result<Vec<_>, _>>()?;
    if !programs.is_empty() && programs.len() != prefixes.len() {
        return Err(Failure::usage(format!("{} programs given for {} prefixes", programs.len(), prefixes.len())));
    }

    let mut stages = Vec::new();
    let words: Vec<_> = prefixes.iter().map(ctx_view).collect();
    let tree = match build_tree(&words, &iface) {
        Ok(t) => t,
        Err(e) => {
            stages.push(json!({"stage": "tree", "ok": false}));
            let report = json!({"passed": false, "stages": stages, "failure": e.to_string(), "source_context": null});
            return Ok(Outcome { stdout: line(&report), code: 1 });
        }
    };
    stages.push(json!({"stage": "tree", "ok": true}));
    let c_s = tree_backtranslate(&tree, &iface);
    let typed = typecheck_context(&c_s, &iface).is_ok_and(|t| t == Ty::Nat);
    stages.push(json!({"stage": "backtranslation_well_typed", "ok": typed}));

    let accepted: Vec<bool> = prefixes.iter().map(|mu| ctx_accepts_src(&c_s, &iface, mu)).collect();
    stages.push(json!({"stage": "context_accepts_prefixes", "ok": accepted.iter().all(|b| *b)}));

    let mut rows = Vec::new();
    let mut all_reproduced = true;
    for (i, mu) in prefixes.iter().enumerate() {
        let expected = project(&source_variant(mu, &iface)).maximal_xpref();
        let mut row = json!({
            "prefix": mu.to_string(),
            "accepted": accepted[i],
            "expected": expected.to_string(),
        });
        if let Some(p) = programs.get(i) {
            let (trace, reproduced) = match source::link(p, &c_s) {
                Ok(w) => {
                    let t = source::run(&w, &reads(mu), args.budget, false).trace;
                    let r = xpref_leq(&expected, &t);
                    (Some(t.to_string()), r)
                }
                Err(_) => (None, false),
            };
            all_reproduced &= reproduced;
            row["source_trace"] = json!(trace);
            row["reproduced"] = json!(reproduced);
        }
        rows.push(row);
    }
    if !programs.is_empty() {
        stages.push(json!({"stage": "reproduction", "ok": all_reproduced}));
    }
    let passed = stages.iter().all(|s| s["ok"] == true);
    let report = json!({
        "passed": passed,
        "source_context": c_s.to_string(),
        "tree": tree.to_json(),
        "stages": stages,
        "prefixes": rows,
    });
    Ok(Outcome { stdout: line(&report), code: if passed { 0 } else { 1 } })
}

fn classify(path: &Path, depth: usize) -> Result<Outcome, Failure> {
    let text = read(path)?;
    let j: Json = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
    let spec = MonitorSpec::from_json(&j).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let m = spec.build();
    let mut alphabet = vec![Event::Write(0), Event::Write(1)];
    if let MonitorSpec::NeverEvent(e)
    | MonitorSpec::EventuallyOnTerm(e)
    | MonitorSpec::OnlyInfiniteRepeat(e)
    | MonitorSpec::FiniteOrRepeat(e) = &spec
    {
        if !alphabet.contains(e) {
            alphabet.insert(0, e.clone());
        }
    }
    let safety = m.is_safety();
    let dense = dense_bounded_check(&m, depth, &alphabet);
    let is_dense = dense.verdict != PropVerdict::Reject;
    let class = match (safety, is_dense) {
        (true, true) => "both",
        (true, false) => "safety",
        (false, true) => "dense",
        (false, false) => "neither",
    };
    let (s, d) = decompose(&m);
    let report = json!({
        "monitor": m.name,
        "spec": spec.to_json(),
        "class": class,
        "safety": safety,
        "dense": {
            "verdict": dense.verdict.to_string(),
            "witness": dense.witness.as_ref().map(|t| t.to_string()),
            "prefixes_checked": dense.prefixes_checked,
            "depth": depth,
        },
        "decomposition": {"safety": s.name, "dense": d.name},
    });
    ok(line(&report))
}

fn demo(name: &str, k: usize, depth: usize, as_json: bool) -> Result<Outcome, Failure> {
    let r = run_demo(name, &DemoOptions { k, depth }).map_err(|e| Failure::usage(e.to_string()))?;
    let code = if r.passed() { 0 } else { 1 };
    let stdout = if as_json {
        line(&r.to_json())
    } else {
        let mut s = String::new();
        for c in &r.checks {
            s.push_str(&format!("{} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name));
        }
        for n in &r.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s.push_str(&format!("{}: {}\n", r.demo, if r.passed() { "passed" } else { "failed" }));
        s
    };
    Ok(Outcome { stdout, code })
}
