use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value as Json;

use scwb_core::source::parse_src_context;
use scwb_core::target::parse_tgt_program;
use scwb_core::trace::{Event, TerminalMark, Value};
use scwb_core::trace_json::{trace_from_jsonl, trace_to_json};

const ADD_ONE: &str = "(program (iface (f (-> nat nat))) (fun f (x nat) nat (+ x 1)))";
const ADD_READ: &str = "(program (iface (f (-> nat nat))) (fun f (x nat) nat (+ (read) x)))";

fn dir(test: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("scwb-cli").join(test);
    fs::create_dir_all(&d).unwrap();
    d
}

fn file(d: &PathBuf, name: &str, text: &str) -> String {
    let p = d.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn scwb(args: &[&str]) -> Out {
    let o = Command::new(env!("CARGO_BIN_EXE_scwb")).args(args).output().unwrap();
    Out {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn json(o: &Out) -> Json {
    serde_json::from_str(o.stdout.trim()).unwrap_or_else(|e| panic!("{e}: {}", o.stdout))
}

#[test]
fn compile_prints_the_guarded_target_program() {
    let d = dir("compile");
    let p = file(&d, "p.src", ADD_ONE);
    let o = scwb(&["compile", &p]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(o.stdout, "(program (iface f) (fun f (x) (if (check x nat) (+ x 1) fail)))\n");
    parse_tgt_program(o.stdout.trim()).unwrap();
    let j = json(&scwb(&["--json", "compile", &p]));
    assert_eq!(j["program"], o.stdout.trim());
}

#[test]
fn compile_keeps_declaration_order() {
    let d = dir("order");
    let src = "(program (iface (g (-> bool nat)) (f (-> nat nat))) (fun g (b bool) nat 0) (fun f (x nat) nat x))";
    let o = scwb(&["compile", &file(&d, "p.src", src)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let g = o.stdout.find("(fun g").unwrap();
    let f = o.stdout.find("(fun f").unwrap();
    assert!(g < f, "{}", o.stdout);
    assert!(o.stdout.starts_with("(program (iface g f)"), "{}", o.stdout);
}

#[test]
fn parse_errors_carry_a_position_and_exit_three() {
    let d = dir("parse");
    let bad = file(&d, "bad.src", "(program (iface (f (-> nat nat)))\n  (fun f (x nat) nat (check 5 nat)))");
    let o = scwb(&["compile", &bad]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("bad.src:2:"), "{}", o.stderr);
    assert!(o.stderr.contains("target language"), "{}", o.stderr);

    let unbalanced = file(&d, "open.src", "(program (iface");
    assert_eq!(scwb(&["compile", &unbalanced]).code, 3);
    assert_eq!(scwb(&["compile", &d.join("missing.src").to_string_lossy()]).code, 3);
}

#[test]
fn unknown_flags_and_commands_are_usage_errors() {
    assert_eq!(scwb(&["--frobnicate", "demo", "rtp_not_rtinip"]).code, 3);
    assert_eq!(scwb(&["demo", "rtp_not_rtinip", "--frobnicate"]).code, 3);
    assert_eq!(scwb(&["transmogrify"]).code, 3);
    assert_eq!(scwb(&[]).code, 3);
    assert_eq!(scwb(&["--help"]).code, 0);
}

#[test]
fn run_emits_a_trace_as_json_lines() {
    let d = dir("run");
    let src = file(&d, "p.src", ADD_READ);
    let tgt = file(&d, "p.tgt", &scwb(&["compile", &src]).stdout);
    let ctx = file(&d, "c", "(call f 3)");
    let o = scwb(&["run", "--lang", "tgt", "--program", &tgt, "--context", &ctx, "--inputs", "5,7", "--budget", "1000"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(o.stdout.lines().count(), 2);
    let t = trace_from_jsonl(&o.stdout).unwrap();
    assert_eq!(t.events, vec![Event::Read(5)]);
    assert_eq!(t.end, TerminalMark::Terminated(None));

    let inf = scwb(&["run", "--lang", "src", "--program", &src, "--context", &ctx, "--inputs", "5", "--informative"]);
    let t = trace_from_jsonl(&inf.stdout).unwrap();
    assert_eq!(t.events, vec![Event::Call("f".into(), Value::Nat(3)), Event::Read(5), Event::Ret(Value::Nat(8))]);

    let j = json(&scwb(&["--json", "run", "--lang", "tgt", "--program", &tgt, "--context", &ctx]));
    assert_eq!(j["inputs_exhausted"], true);
}

#[test]
fn run_rejects_bad_inputs_and_unlinkable_wholes() {
    let d = dir("run-bad");
    let src = file(&d, "p.src", ADD_ONE);
    let ctx = file(&d, "c", "(call f true)");
    assert_eq!(scwb(&["run", "--lang", "src", "--program", &src, "--context", &ctx]).code, 3);
    let ok = file(&d, "ok", "(call f 1)");
    assert_eq!(scwb(&["run", "--lang", "src", "--program", &src, "--context", &ok, "--inputs", "x"]).code, 3);
    assert_eq!(scwb(&["run", "--lang", "wasm", "--program", &src, "--context", &ok]).code, 3);
}

#[test]
fn backtranslated_context_is_a_source_context() {
    let d = dir("bt-ctx");
    let iface = file(&d, "i", "(iface (f (-> nat nat)))");
    let ctx = file(&d, "c", "(call f true)");
    let o = scwb(&["backtranslate-ctx", "--iface", &iface, &ctx]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    parse_src_context(o.stdout.trim()).unwrap();

    let io = file(&d, "io", "(write (call f 1))");
    assert_eq!(scwb(&["backtranslate-ctx", "--iface", &iface, &io]).code, 1);
}

#[test]
fn trace_backtranslation_reproduces_real_runs() {
    let d = dir("bt-traces");
    let progs = [
        "(program (iface (f (-> nat nat))) (fun f (x nat) nat 3))",
        "(program (iface (f (-> nat nat))) (fun f (x nat) nat 4))",
    ];
    let ctx = file(&d, "c", "(let r (call f 2) (if (>= r 4) (call f 0) r))");
    let mut traces = Vec::new();
    let mut srcs = Vec::new();
    for (i, p) in progs.iter().enumerate() {
        let src = file(&d, &format!("p{i}.src"), p);
        let tgt = file(&d, &format!("p{i}.tgt"), &scwb(&["compile", &src]).stdout);
        let o = scwb(&["run", "--lang", "tgt", "--program", &tgt, "--context", &ctx, "--informative"]);
        traces.push(trace_to_json(&trace_from_jsonl(&o.stdout).unwrap()));
        srcs.push(src);
    }
    let iface = file(&d, "i", "(iface (f (-> nat nat)))");
    let prefixes = file(&d, "mu.json", &Json::Array(traces).to_string());
    let mut args = vec!["backtranslate-traces", "--iface", &iface, "--prefixes", &prefixes, "--programs"];
    args.extend(srcs.iter().map(String::as_str));
    let o = scwb(&args);
    assert_eq!(o.code, 0, "{}\n{}", o.stdout, o.stderr);
    let j = json(&o);
    assert_eq!(j["passed"], true);
    let stages: Vec<&str> = j["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages, ["tree", "backtranslation_well_typed", "context_accepts_prefixes", "reproduction"]);
    assert!(j["prefixes"].as_array().unwrap().iter().all(|p| p["reproduced"] == true));
    parse_src_context(j["source_context"].as_str().unwrap()).unwrap();
}

#[test]
fn clashing_prefixes_fail_the_tree_stage() {
    let d = dir("bt-clash");
    let iface = file(&d, "i", "(iface (f (-> nat nat)) (g (-> nat nat)))");
    let mu = r#"[[{"ev":"call","f":"f","v":{"nat":1}},{"end":"open"}],[{"ev":"call","f":"g","v":{"nat":1}},{"end":"open"}]]"#;
    let o = scwb(&["backtranslate-traces", "--iface", &iface, "--prefixes", &file(&d, "mu.json", mu)]);
    assert_eq!(o.code, 1);
    let j = json(&o);
    assert_eq!(j["stages"][0]["ok"], false);
    assert_eq!(scwb(&["backtranslate-traces", "--iface", &iface, "--prefixes", &file(&d, "bad.json", "[1,")]).code, 3);
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let d = dir("check");
    let p = file(&d, "p.src", ADD_ONE);
    let c = file(&d, "c", "(call f true)");
    let holds = scwb(&["check", "--chain", "lt-ld", "--criterion", "pf-rsp", "--programs", &p, "--target-ctx", &c]);
    assert_eq!(holds.code, 0, "{}", holds.stderr);
    assert_eq!(json(&holds)["result"]["verdict"], "holds");

    let violated = scwb(&["check", "--chain", "rtep", "--criterion", "rtep", "--pool-index", "0,4"]);
    assert_eq!(violated.code, 1, "{}", violated.stderr);
    assert_eq!(json(&violated)["result"]["verdict"], "violated");

    let unknown = scwb(&["check", "--chain", "lt-ld", "--criterion", "pf-rdp", "--programs", &p, "--target-ctx", &c]);
    assert_eq!(unknown.code, 2);
    assert_eq!(json(&unknown)["result"]["verdict"], "unknown");
}

#[test]
fn check_rejects_malformed_requests() {
    let d = dir("check-bad");
    let p = file(&d, "p.src", ADD_ONE);
    assert_eq!(scwb(&["check", "--chain", "lt-ld", "--criterion", "pf-nope", "--programs", &p]).code, 3);
    assert_eq!(scwb(&["check", "--chain", "lt-ld", "--criterion", "pf-r2rsp", "--programs", &p]).code, 3);
    assert_eq!(scwb(&["check", "--chain", "rtep", "--criterion", "rtep", "--programs", &p]).code, 3);
    assert_eq!(scwb(&["check", "--chain", "rtep", "--criterion", "pf-rsp", "--pool-index", "99"]).code, 3);
    assert_eq!(scwb(&["check", "--chain", "nowhere", "--criterion", "pf-rsp"]).code, 3);
    assert_eq!(scwb(&["check", "--chain", "khs", "--k", "0", "--criterion", "pf-rhsp:3"]).code, 3);
}

#[test]
fn hypersafety_chain_separates_k_from_k_plus_one() {
    let at = |id: &str| scwb(&["check", "--chain", "khs", "--k", "3", "--criterion", id]).code;
    assert_eq!(at("pf-rhsp:4"), 1);
    assert_ne!(at("pf-rhsp:3"), 1);
}

#[test]
fn seeded_checks_are_byte_identical() {
    let args = ["--seed", "11", "check", "--chain", "lt-ld", "--criterion", "pf-rfrxp:2", "--random-targets", "3"];
    let a = scwb(&args);
    let b = scwb(&args);
    assert!(a.code == 0 || a.code == 2, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["result"]["contexts_checked"], 3);
    let other = scwb(&["--seed", "12", "check", "--chain", "lt-ld", "--criterion", "pf-rfrxp:2", "--random-targets", "3"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn classify_reports_both_classes() {
    let d = dir("classify");
    let class = |spec: &str| json(&scwb(&["classify", &file(&d, "m.json", spec)]))["class"].as_str().unwrap().to_string();
    assert_eq!(class(r#"{"kind":"never_event","event":{"ev":"wr","n":1}}"#), "safety");
    assert_eq!(class(r#"{"kind":"terminating_only"}"#), "dense");
    assert_eq!(class(r#"{"kind":"accept_all"}"#), "both");
    assert_eq!(class(r#"{"kind":"eventually_on_term","event":{"ev":"wr","n":1}}"#), "safety");
    assert_eq!(class(r#"{"kind":"only_infinite_repeat","event":{"ev":"wr","n":1}}"#), "neither");
    assert_eq!(scwb(&["classify", &file(&d, "bad.json", r#"{"kind":"sometimes"}"#)]).code, 3);
}

#[test]
fn demos_exit_zero_exactly_when_every_check_passes() {
    let o = scwb(&["demo", "rtp_not_rtinip", "--json"]);
    assert_eq!(o.code, 0);
    assert_eq!(json(&o)["passed"], true);
    let k3 = scwb(&["demo", "khs_k_not_k1", "--k", "3"]);
    assert_eq!(k3.code, 0, "{}", k3.stdout);
    assert!(k3.stdout.lines().all(|l| !l.starts_with("FAIL")));
    let k2 = scwb(&["demo", "khs_k_not_k1", "--k", "2"]);
    assert_eq!(k2.code, 1);
    assert_eq!(k2.stdout.lines().filter(|l| l.starts_with("FAIL")).count(), 2);
    assert_eq!(scwb(&["demo", "no_such_demo"]).code, 3);
    assert_eq!(scwb(&["demo", "khs_k_not_k1", "--k", "0"]).code, 3);
}

#[test]
fn demo_output_is_deterministic() {
    let a = scwb(&["demo", "fuel_rsp_not_rdp", "--json"]);
    let b = scwb(&["demo", "fuel_rsp_not_rdp", "--json"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}
