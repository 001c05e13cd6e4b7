use mpccip::bench::{builtin_entry, BUILTIN_NAMES};
use mpccip::ipm::Status;
use mpccip::penalty::solve_penalty;
use mpccip::Options;

#[test]
fn builtins_converge() {
    for barrier in ["monotone", "loqo"] {
        let mut o = Options::default();
        o.set("barrier", barrier).unwrap();
        for name in BUILTIN_NAMES {
            let b = builtin_entry(name).unwrap();
            let r = solve_penalty(&b.problem().unwrap(), &o).unwrap();
            assert_eq!(r.status, Status::Success, "{barrier}: {name}: {:?}", r.message);
            assert!((r.objective - b.optimum).abs() <= 1e-6, "{barrier}: {name}: f={}", r.objective);
            assert!(r.comp_residual <= 1e-8, "{barrier}: {name}");
            assert!(r.rho.is_some_and(|rho| rho >= 1.0));
        }
    }
}

#[test]
fn rho_never_decreases() {
    let p = builtin_entry("bilinear-lpcc").unwrap().problem().unwrap();
    let r = solve_penalty(&p, &Options::default()).unwrap();
    let rhos: Vec<f64> = r.logs.iter().filter_map(|l| l.rho).collect();
    assert!(rhos.windows(2).all(|w| w[1] >= w[0]), "{rhos:?}");
    assert_eq!(rhos.last().copied(), r.rho);
}

#[test]
fn capped_penalty_saturates() {
    let mut o = Options::default();
    o.set("rho_max", "1").unwrap();
    let p = builtin_entry("two-circle").unwrap().problem().unwrap();
    let r = solve_penalty(&p, &o).unwrap();
    assert_eq!(r.status, Status::PenaltySaturated);
    assert_eq!(r.rho, Some(1.0));
    assert!(r.message.unwrap().contains("rho_max"));
}

#[test]
fn exact_at_the_initial_penalty() {
    // the penalty is already exact at ρ₀ here, so the cap never binds
    let mut o = Options::default();
    o.set("rho_max", "1").unwrap();
    let b = builtin_entry("nonconvex-penalty").unwrap();
    let r = solve_penalty(&b.problem().unwrap(), &o).unwrap();
    assert_eq!(r.status, Status::Success);
    assert!((r.objective - b.optimum).abs() <= 1e-6);
}

#[test]
fn pair_free_problem_is_a_plain_solve() {
    let mut data = builtin_entry("two-circle").unwrap().data;
    data.pairs.clear();
    let p = data.to_problem().unwrap();
    let r = solve_penalty(&p, &Options::default()).unwrap();
    assert_eq!(r.status, Status::Success);
    assert!(r.logs.iter().all(|l| l.rho == Some(1.0)));
}
