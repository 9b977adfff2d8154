use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn mafol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mafol")).args(args).output().expect("running mafol")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn weights_found_and_infeasible() {
    let o = mafol(&["weights", path_str(&corpus("weighted.pot"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("c = (1.0000000000000004, 0.5000000000000001), unique"), "{text}");

    let o = mafol(&["weights", path_str(&corpus("bad.pot"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("infeasible: equations {c1=1, c2=1, c1+c2=1}"));
}

#[test]
fn burns_verdicts() {
    let o = mafol(&["burns", path_str(&corpus("quartic.pot")), "--grid", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: pass"));

    let o = mafol(&["burns", path_str(&corpus("mixed.pot")), "--grid", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("verdict: fail"));
    assert!(text.contains("bidegree not (k,k): (1,3) mass 0.5, (3,1) mass 0.5"));
}

#[test]
fn trace_of_the_ball_grows_like_exp_t() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mafol(&[
        "trace",
        path_str(&corpus("ball2.pot")),
        "--base",
        "1,0",
        "--t-points",
        "3",
        "--s-points",
        "3",
        "--out",
        path_str(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,s,z1_re,z1_im,z2_re,z2_im,rho,abs_detH,stratum"));
    assert_eq!(lines.next(), Some("0,0,1,0,0,0,1,1,P"));
    let last = csv
        .lines()
        .find(|l| l.starts_with("2,0,"))
        .expect("row at t = 2, s = 0");
    let rho: f64 = last.split(',').nth(6).unwrap().parse().unwrap();
    assert!((rho - 2f64.exp()).abs() < 1e-6, "{rho}");
}

#[test]
fn trace_from_the_origin_is_an_input_error() {
    let o = mafol(&["trace", path_str(&corpus("ball2.pot")), "--base", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outside the domain"));
}

#[test]
fn malformed_file_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("broken.pot");
    fs::write(&bad, "n = 2\na=[1,0] b=[1,0] c=1\na=[0,1 b=[0,1] c=1\n").unwrap();
    let o = mafol(&["analyze", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn non_hermitian_file_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("skew.pot");
    fs::write(&bad, "n = 2\na=[1,0] b=[0,1] c=1\n").unwrap();
    let o = mafol(&["weights", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_suite_directory_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mafol(&["suite", path_str(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mafol(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mafol(&["analyze", "x.pot", "--integrator", "euler"]).status.code(), Some(2));
}

#[test]
fn unexpected_check_result_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    fs::copy(corpus("bad.pot"), tmp.path().join("bad.pot")).unwrap();
    // Declared Monge-Ampere, which it is not.
    let o = mafol(&["suite", path_str(tmp.path()), "--checks", "monge_ampere"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("1 unexpected"));
}

#[test]
fn analyze_csv_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        let o = mafol(&[
            "analyze",
            path_str(&corpus("weighted.pot")),
            "--samples",
            "200",
            "--seed",
            "7",
            "--out",
            path_str(&out),
        ]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(out.join("analyze.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("index,z1_re,z1_im,z2_re,z2_im,rho,abs_detH,stratum,ma_residual,euler_residual,method")
    );
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn list_names_every_strategy() {
    let text = stdout(&mafol(&["list"]));
    for name in ["extended", "lsq", "direct", "rk4", "rk4-halving", "burns", "theta_orbit"] {
        assert!(text.contains(name), "{name}");
    }
}
