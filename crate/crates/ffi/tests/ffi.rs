use std::ffi::{CStr, CString};
use std::ptr::null;

use mpccip::bench::{builtin_entry, QpccData};
use mpccip_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mpccip_last_error()) }.to_str().unwrap().to_string()
}

fn flat(m: &mpccip::bench::Matrix, rows: usize, cols: usize) -> Vec<f64> {
    let d = m.to_dense("m", rows, cols).unwrap();
    (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|ij| d[ij]).collect()
}

fn inf_lo(v: &[Option<f64>]) -> Vec<f64> {
    v.iter().map(|b| b.unwrap_or(f64::NEG_INFINITY)).collect()
}

fn inf_hi(v: &[Option<f64>]) -> Vec<f64> {
    v.iter().map(|b| b.unwrap_or(f64::INFINITY)).collect()
}

/// Creates a handle from `data` through the dense entry point.
fn create(data: &QpccData) -> Result<MpccipHandle, MpccipCode> {
    let (n, m) = (data.n, data.num_rows());
    let q = flat(&data.q_matrix, n, n);
    let a = data.a.as_ref().map(|a| flat(a, m, n)).unwrap_or_default();
    let (lg, ug, lx, ux) = (inf_lo(&data.lg), inf_hi(&data.ug), inf_lo(&data.lx), inf_hi(&data.ux));
    let pairs: Vec<u64> = data.pairs.iter().flat_map(|&(i, j)| [i as u64, j as u64]).collect();
    let mut h = 0;
    let code = unsafe {
        mpccip_create_qpcc(
            n,
            q.as_ptr(),
            data.q.as_ptr(),
            data.constant,
            m,
            a.as_ptr(),
            lg.as_ptr(),
            ug.as_ptr(),
            lx.as_ptr(),
            ux.as_ptr(),
            data.pairs.len(),
            pairs.as_ptr(),
            &mut h,
        )
    };
    if code != MPCCIP_OK {
        return Err(code);
    }
    if let Some(x0) = &data.x0 {
        assert_eq!(unsafe { mpccip_set_initial_point(h, x0.as_ptr(), x0.len()) }, MPCCIP_OK);
    }
    Ok(h)
}

fn result(h: MpccipHandle) -> MpccipResult {
    let mut r = MpccipResult::default();
    assert_eq!(unsafe { mpccip_get_result(h, &mut r) }, MPCCIP_OK, "{}", last_error());
    r
}

fn set(h: MpccipHandle, k: &str, v: &str) -> MpccipCode {
    let (k, v) = (CString::new(k).unwrap(), CString::new(v).unwrap());
    unsafe { mpccip_set_option(h, k.as_ptr(), v.as_ptr()) }
}

fn cli_objective(args: &[&str]) -> f64 {
    let mut out = Vec::new();
    let argv = ["mpccip"].iter().chain(args).copied();
    assert_eq!(mpccip::cli::run(argv, &mut out, &mut Vec::new()), 0);
    let out = String::from_utf8(out).unwrap();
    out.lines().find_map(|l| l.strip_prefix("objective=")).unwrap().parse().unwrap()
}

#[test]
fn two_circle_matches_cli_bitwise() {
    let data = builtin_entry("two-circle").unwrap().data;
    for (alg, name) in [(MPCCIP_ALGORITHM_RELAXATION, "relaxation"), (MPCCIP_ALGORITHM_PENALTY, "penalty")] {
        let h = create(&data).unwrap();
        assert_eq!(mpccip_solve(h, alg, 0), MPCCIP_OK, "{}", last_error());
        let r = result(h);
        assert_eq!(r.status, MPCCIP_STATUS_SUCCESS);
        assert!((r.objective - 1.0).abs() <= 1e-6);
        let cli = cli_objective(&["solve", "--builtin", "two-circle", "--algorithm", name]);
        assert_eq!(r.objective.to_bits(), cli.to_bits(), "{name}");
        let mut x = vec![0.0; 2];
        assert_eq!(unsafe { mpccip_get_x(h, x.as_mut_ptr(), 2) }, MPCCIP_OK);
        assert!(x.iter().any(|&v| (v - 1.0).abs() < 1e-4) && x.iter().any(|&v| v.abs() < 1e-4));
        assert_eq!(mpccip_destroy(h), MPCCIP_OK);
    }
}

#[test]
fn tolerance_option_matches_cli() {
    let data = builtin_entry("bilinear-lpcc").unwrap().data;
    let h = create(&data).unwrap();
    assert_eq!(set(h, "tol", "1e-6"), MPCCIP_OK);
    assert_eq!(mpccip_solve(h, MPCCIP_ALGORITHM_RELAXATION, 0), MPCCIP_OK);
    let r = result(h);
    assert!(r.kkt_error <= 1e-6, "{}", r.kkt_error);
    let cli = cli_objective(&["solve", "--builtin", "bilinear-lpcc", "--set", "tol=1e-6"]);
    assert_eq!(r.objective.to_bits(), cli.to_bits());
    mpccip_destroy(h);
}

#[test]
fn crossover_through_the_boundary() {
    let data = builtin_entry("tilted-switch").unwrap().data;
    let h = create(&data).unwrap();
    assert_eq!(mpccip_solve(h, MPCCIP_ALGORITHM_PENALTY, 1), MPCCIP_OK, "{}", last_error());
    assert_eq!(result(h).comp, 0.0);
    mpccip_destroy(h);
}

#[test]
fn lifecycle_is_guarded() {
    let data = builtin_entry("trivial-corner").unwrap().data;
    let h = create(&data).unwrap();
    let mut r = MpccipResult::default();
    assert_eq!(unsafe { mpccip_get_result(h, &mut r) }, MPCCIP_ERR_NO_RESULT);
    assert_eq!(mpccip_destroy(h), MPCCIP_OK);
    assert_eq!(mpccip_solve(h, MPCCIP_ALGORITHM_RELAXATION, 0), MPCCIP_ERR_INVALID_HANDLE);
    assert!(last_error().contains("released"));
    assert_eq!(unsafe { mpccip_get_result(h, &mut r) }, MPCCIP_ERR_INVALID_HANDLE);
    assert_eq!(mpccip_destroy(h), MPCCIP_ERR_INVALID_HANDLE);
    assert_eq!(set(h, "tol", "1e-6"), MPCCIP_ERR_INVALID_HANDLE);
    // ids are not reused
    let h2 = create(&data).unwrap();
    assert_ne!(h2, h);
    assert_eq!(mpccip_solve(h2, 7, 0), MPCCIP_ERR_INVALID_ARGUMENT);
    let bad = [f64::NAN, 0.0];
    assert_eq!(unsafe { mpccip_set_initial_point(h2, bad.as_ptr(), 2) }, MPCCIP_ERR_INVALID_ARGUMENT);
    assert_eq!(unsafe { mpccip_set_initial_point(h2, bad.as_ptr(), 1) }, MPCCIP_ERR_INVALID_ARGUMENT);
    mpccip_destroy(h2);
}

#[test]
fn unknown_and_invalid_options() {
    let h = create(&builtin_entry("two-circle").unwrap().data).unwrap();
    assert_eq!(set(h, "no_such_key", "1"), MPCCIP_ERR_UNKNOWN_OPTION);
    assert!(last_error().contains("no_such_key"));
    assert_eq!(set(h, "tol", "banana"), MPCCIP_ERR_INVALID_OPTION_VALUE);
    assert_eq!(set(h, "relaxation_update", "rolloff"), MPCCIP_OK);
    mpccip_destroy(h);
}

#[test]
fn asymmetric_q_is_rejected() {
    let mut data = builtin_entry("two-circle").unwrap().data;
    let mut q = data.q_matrix.to_dense("q", 2, 2).unwrap();
    q[(0, 1)] = 1.0;
    data.q_matrix = mpccip::bench::Matrix::from_dense(&q);
    assert_eq!(create(&data), Err(MPCCIP_ERR_INVALID_PROBLEM));
    assert!(last_error().contains("symmetric"), "{}", last_error());
}

#[test]
fn shape_errors_are_reported() {
    let mut data = builtin_entry("two-circle").unwrap().data;
    data.pairs = vec![(0, 5)];
    assert_eq!(create(&data), Err(MPCCIP_ERR_INVALID_PROBLEM));
    let mut h = 0;
    let q = [1.0];
    let code = unsafe {
        mpccip_create_qpcc(2, null(), q.as_ptr(), 0.0, 0, null(), null(), null(), null(), null(), 0, null(), &mut h)
    };
    assert_eq!(code, MPCCIP_ERR_INVALID_ARGUMENT);
    assert!(last_error().contains("q_matrix"));
}

#[test]
fn zero_pairs_is_a_plain_nlp() {
    // min (x-2)^2 + (y+1)^2 over x >= 0, y >= 0: (2, 0), f = 1
    let q = [2.0, 0.0, 0.0, 2.0];
    let c = [-4.0, 2.0];
    let lx = [0.0, 0.0];
    let mut h = 0;
    let code = unsafe {
        mpccip_create_qpcc(2, q.as_ptr(), c.as_ptr(), 5.0, 0, null(), null(), null(), lx.as_ptr(), null(), 0, null(), &mut h)
    };
    assert_eq!(code, MPCCIP_OK, "{}", last_error());
    assert_eq!(mpccip_solve(h, MPCCIP_ALGORITHM_RELAXATION, 0), MPCCIP_OK);
    let r = result(h);
    assert!((r.objective - 1.0).abs() < 1e-6, "{}", r.objective);
    let mut x = [0.0; 2];
    assert_eq!(unsafe { mpccip_get_x(h, x.as_mut_ptr(), 1) }, MPCCIP_ERR_BUFFER_TOO_SMALL);
    assert_eq!(unsafe { mpccip_get_x(h, x.as_mut_ptr(), 2) }, MPCCIP_OK);
    assert!((x[0] - 2.0).abs() < 1e-6 && x[1].abs() < 1e-6);
    mpccip_destroy(h);
}

#[test]
fn caller_arrays_are_copied() {
    let mut q = vec![2.0, 0.0, 0.0, 2.0];
    let mut c = vec![-2.0, -2.0];
    let mut lx = vec![0.0, 0.0];
    let mut pairs = vec![0u64, 1];
    let mut h = 0;
    let code = unsafe {
        mpccip_create_qpcc(2, q.as_ptr(), c.as_ptr(), 2.0, 0, null(), null(), null(), lx.as_ptr(), null(), 1, pairs.as_ptr(), &mut h)
    };
    assert_eq!(code, MPCCIP_OK);
    q.fill(f64::NAN);
    c.fill(f64::NAN);
    lx.fill(f64::NAN);
    pairs.fill(99);
    assert_eq!(mpccip_solve(h, MPCCIP_ALGORITHM_RELAXATION, 0), MPCCIP_OK);
    assert!((result(h).objective - 1.0).abs() < 1e-6);
    mpccip_destroy(h);
}

#[test]
fn coordinate_entry_point_agrees_with_dense() {
    let data = builtin_entry("two-circle").unwrap().data;
    let dense = create(&data).unwrap();
    let (rows, cols, vals) = ([0u64, 1], [0u64, 1], [2.0, 2.0]);
    let lx = inf_lo(&data.lx);
    let pairs = [0u64, 1];
    let mut h = 0;
    let code = unsafe {
        mpccip_create_qpcc_coo(
            2, 2, rows.as_ptr(), cols.as_ptr(), vals.as_ptr(), data.q.as_ptr(), data.constant,
            0, 0, null(), null(), null(), null(), null(), lx.as_ptr(), null(), 1, pairs.as_ptr(), &mut h,
        )
    };
    assert_eq!(code, MPCCIP_OK, "{}", last_error());
    let x0 = data.x0.clone().unwrap();
    assert_eq!(unsafe { mpccip_set_initial_point(h, x0.as_ptr(), 2) }, MPCCIP_OK);
    assert_eq!(flat(&data.q_matrix, 2, 2), vec![2.0, 0.0, 0.0, 2.0]);
    mpccip_solve(dense, MPCCIP_ALGORITHM_RELAXATION, 0);
    mpccip_solve(h, MPCCIP_ALGORITHM_RELAXATION, 0);
    assert_eq!(result(h).objective.to_bits(), result(dense).objective.to_bits());
    mpccip_destroy(h);
    mpccip_destroy(dense);
}

#[test]
fn header_declares_the_surface() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/mpccip.h");
    let header = std::fs::read_to_string(path).unwrap();
    for sym in [
        "mpccip_create_qpcc(",
        "mpccip_create_qpcc_coo(",
        "mpccip_destroy(",
        "mpccip_set_initial_point(",
        "mpccip_set_option(",
        "mpccip_solve(",
        "mpccip_get_result(",
        "mpccip_get_x(",
        "mpccip_last_error(",
        "MPCCIP_ERR_INVALID_HANDLE",
        "typedef struct MpccipResult",
    ] {
        assert!(header.contains(sym), "{sym}");
    }
    // the header must be valid C when a compiler is around
    if let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-x", "c", path]).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
