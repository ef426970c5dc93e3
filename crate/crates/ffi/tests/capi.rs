use std::ffi::{CString, c_char};
use std::ptr;

use hamdistill_ffi::*;

fn last_error() -> String {
    let len = unsafe { hd_last_error(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; len + 1];
    unsafe { hd_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..len].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn hamiltonian(family: &str, n: usize) -> *mut HdHamiltonian {
    let name = CString::new(family).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { hd_hamiltonian_new(name.as_ptr(), n, 0, &mut h) }, HdStatus::Ok);
    h
}

#[test]
fn handle_lifecycle_and_protocol() {
    let h = hamiltonian("trapped_ion", 3);
    assert_eq!(unsafe { hd_hamiltonian_qubits(h) }, 3);
    let mut a = HdOutcome {
        fidelity: 0.0,
        yield_value: 0.0,
        per_pair_fidelity: 0.0,
        survival_probability: 0.0,
        error_free_fidelity: 0.0,
        std_error: 0.0,
    };
    let mut b = a;
    let s = unsafe { hd_run_protocol(h, 2, 0.2, HdBasis::Hadamard, HdPath::PauliBranch, 0, 0, &mut a) };
    assert_eq!(s, HdStatus::Ok);
    let s = unsafe { hd_run_protocol(h, 2, 0.2, HdBasis::Hadamard, HdPath::DensityMatrix, 0, 0, &mut b) };
    assert_eq!(s, HdStatus::Ok);
    assert!((a.fidelity - b.fidelity).abs() < 1e-8);
    assert!(a.fidelity > 0.5 && a.fidelity <= 1.0);
    assert!(a.std_error.is_nan());
    unsafe { hd_hamiltonian_free(h) };
    unsafe { hd_hamiltonian_free(ptr::null_mut()) };
}

#[test]
fn errors_map_to_codes_with_messages() {
    let name = CString::new("ising").unwrap();
    let mut h = ptr::null_mut();
    let s = unsafe { hd_hamiltonian_new(name.as_ptr(), 3, 0, &mut h) };
    assert_ne!(s, HdStatus::Ok);
    assert!(h.is_null());
    assert!(last_error().contains("ising"));

    let s = unsafe { hd_hamiltonian_new(ptr::null(), 3, 0, &mut h) };
    assert_eq!(s, HdStatus::NullPointer);

    let h = hamiltonian("diagonal", 2);
    let mut out = 0.0;
    let s = unsafe { hd_detection_probability(h, 1.0, 16, 1, HdBasis::Hadamard, &mut out) };
    assert_eq!(s, HdStatus::InvalidArgument);
    let s = unsafe { hd_detection_probability(h, 1.0, 0, 1, HdBasis::Hadamard, &mut out) };
    assert_eq!(s, HdStatus::Ok);
    assert!(out.abs() < 1e-12);
    assert!(last_error().is_empty());
    unsafe { hd_hamiltonian_free(h) };
}

#[test]
fn analytics_entry_points() {
    let mut tol = 0.0;
    assert_eq!(unsafe { hd_noise_tolerance(1.0, &mut tol) }, HdStatus::Ok);
    assert!((tol - 1.0 / 3.0).abs() < 1e-6);
    assert_eq!(unsafe { hd_noise_tolerance(-1.0, &mut tol) }, HdStatus::Domain);

    let lb = hd_link_budget_default();
    let (mut one_way, mut ham) = (0.0, 0.0);
    assert_eq!(unsafe { hd_qkd_max_distance(lb, -1, 0, 0, &mut one_way) }, HdStatus::Ok);
    assert_eq!(unsafe { hd_qkd_max_distance(lb, 0, 15, 12, &mut ham) }, HdStatus::Ok);
    assert!(ham > one_way && one_way > 0.0);
}

#[test]
fn config_runs_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tol.csv");
    let text = CString::new("experiment = fig_tolerance_asymptotic\npoints = 5\n").unwrap();
    let path = CString::new(csv.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { hd_run_config(text.as_ptr(), path.as_ptr()) }, HdStatus::Ok);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 6);

    let bad = CString::new("experiment = fig_tolerance_asymptotic\npoint = 5\n").unwrap();
    assert_eq!(unsafe { hd_run_config(bad.as_ptr(), path.as_ptr()) }, HdStatus::Config);
    assert!(last_error().contains("points"));
}

#[test]
fn header_declares_entry_points() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hamdistill.h")).unwrap();
    for name in [
        "hd_last_error",
        "hd_hamiltonian_new",
        "hd_hamiltonian_free",
        "hd_run_protocol",
        "hd_run_config",
        "HD_STATUS_CONFIG",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
