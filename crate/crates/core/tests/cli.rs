use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hamdistill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamdistill")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_experiments_names_all() {
    let out = hamdistill(&["list-experiments"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig_m_sweep", "fig_nonpauli", "app_repeater", "theorem_check"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn help_documents_defaults() {
    let out = hamdistill(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("fallback_window") && text.contains("t_max"));
}

#[test]
fn run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "noise.cfg",
        "# small noise sweep\nexperiment = fig_noise_sweep\nn = 4\nm = 2\np_values = 0.1,0.3\nsamples = 200\n",
    );
    let mut bodies = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let csv = dir.path().join(name);
        let out = hamdistill(&["run", &cfg, "--seed", "3", "--threads", "1", "--out", csv.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        bodies.push(fs::read_to_string(&csv).unwrap());
        let manifest = fs::read_to_string(csv.with_extension("manifest")).unwrap();
        assert!(manifest.contains("seed = 3\n") && manifest.contains("# wall_time_s"));
    }
    assert_eq!(bodies[0], bodies[1]);
    let header = bodies[0].lines().next().unwrap();
    assert!(header.starts_with("family,p,fidelity,yield"));
    // four families, two noise levels
    assert_eq!(bodies[0].lines().count(), 1 + 8);
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "experiment = fig_finite_time\nt_mx = 3\n");
    let out = hamdistill(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("t_max"), "{err}");

    let cfg = write(dir.path(), "range.cfg", "experiment = fig_noise_sweep\nn = 4\nm = 4\n");
    assert_eq!(hamdistill(&["run", &cfg]).status.code(), Some(1));
}

#[test]
fn runtime_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // the output path is an existing directory, so the CSV cannot be created
    let cfg = write(dir.path(), "tol.cfg", "experiment = fig_tolerance_asymptotic\npoints = 3\n");
    let out = hamdistill(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
