use std::time::Instant;

use mpccip::bench::{builtin_entry, BUILTIN_NAMES};
use mpccip::ipm::Status;
use mpccip::relax::solve_relaxation;
use mpccip::Options;

fn assert_all_converge(opts: &Options, what: &str) {
    for name in BUILTIN_NAMES {
        let b = builtin_entry(name).unwrap();
        let r = solve_relaxation(&b.problem().unwrap(), opts).unwrap();
        assert_eq!(r.status, Status::Success, "{what}: {name}: {:?}", r.message);
        assert!((r.objective - b.optimum).abs() <= 1e-6, "{what}: {name}: f={}", r.objective);
        assert!(r.comp_residual <= 1e-8, "{what}: {name}: comp={:e}", r.comp_residual);
    }
}

#[test]
fn builtins_converge() {
    let t = Instant::now();
    assert_all_converge(&Options::default(), "defaults");
    assert!(t.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn barrier_rules_converge() {
    for rule in ["loqo", "quality"] {
        let mut o = Options::default();
        o.set("barrier", rule).unwrap();
        assert_all_converge(&o, rule);
    }
}

#[test]
fn regularization_variants_converge() {
    for (k, v) in [
        ("relaxation_update", "proportional"),
        ("q_regularization", "eigenclip"),
        ("q_regularization", "off"),
        ("endgame_strategy", "none"),
    ] {
        let mut o = Options::default();
        o.set(k, v).unwrap();
        assert_all_converge(&o, &format!("{k}={v}"));
    }
}

#[test]
fn tau_is_logged_and_decreases() {
    let p = builtin_entry("two-circle").unwrap().problem().unwrap();
    let r = solve_relaxation(&p, &Options::default()).unwrap();
    let taus: Vec<f64> = r.logs.iter().filter_map(|l| l.tau).collect();
    assert!(!taus.is_empty());
    assert!(taus.windows(2).all(|w| w[1] <= w[0]), "{taus:?}");
    assert!(taus.last().unwrap() < &taus[0]);
}

#[test]
fn iteration_cap_is_reported() {
    let mut o = Options::default();
    o.set("max_iter", "3").unwrap();
    let p = builtin_entry("two-circle").unwrap().problem().unwrap();
    let r = solve_relaxation(&p, &o).unwrap();
    assert_eq!(r.status, Status::MaxIter);
    assert_eq!(r.iterations, 3);
}
