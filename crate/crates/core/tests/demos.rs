use scwb_core::counterexamples::{run_demo, DemoOptions, DEMOS};

#[test]
fn every_demo_passes_both_halves() {
    for d in DEMOS {
        let r = run_demo(d, &DemoOptions { k: 3, depth: 8 }).unwrap();
        assert!(r.passed(), "{d}: {}", r.to_json());
        assert!(!r.checks.is_empty());
    }
}

#[test]
fn hypersafety_demo_reports_the_degenerate_two_function_case() {
    let r = run_demo("khs_k_not_k1", &DemoOptions { k: 2, depth: 8 }).unwrap();
    assert_eq!(
        r.failed(),
        vec!["every reachable K-prefix set has a unique constant context", "pf-rhsp:2 holds on the falsifying context"]
    );
    assert!(r.checks.iter().any(|c| c.name == "pf-rhsp:3 violated" && c.passed));
}

#[test]
fn reports_serialize_every_check() {
    let r = run_demo("rtp_not_rtinip", &DemoOptions::default()).unwrap();
    let j = r.to_json();
    assert_eq!(j["demo"], "rtp_not_rtinip");
    assert_eq!(j["checks"].as_array().unwrap().len(), r.checks.len());
    assert_eq!(j["passed"], true);
}

#[test]
fn fuel_reports_record_the_step_cost() {
    let r = run_demo("fuel_rsp_not_rdp", &DemoOptions::default()).unwrap();
    assert!(r.notes.iter().any(|n| n.contains("event-producing")));
}
