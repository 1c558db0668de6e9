//! End-to-end checks of the nysbench binary: sweep determinism, reporting,
//! and the smaller subcommands.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nysbench"))
}

fn synth_csv(dir: &Path) -> std::path::PathBuf {
    let data = dir.join("data.csv");
    let out = bin()
        .args([
            "synth",
            "--spec",
            "0 0:1:120;3 1:0.5:80",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&data)
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {out:?}");
    data
}

#[test]
fn sweep_is_byte_deterministic_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_csv(dir.path());

    let run = |out: &Path| {
        let st = bin()
            .args([
                "sweep",
                "--data",
                data.to_str().unwrap(),
                "--kernel",
                "multiquadric",
                "--sigma",
                "half-radius",
                "--methods",
                "anchornet,uniform",
                "--ranks",
                "5,10",
                "--runs",
                "3",
                "--seed",
                "42",
                "--no-timings",
                "--out",
            ])
            .arg(out)
            .output()
            .unwrap();
        assert!(st.status.success(), "sweep failed: {st:?}");
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    run(&a);
    run(&b);
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "sweep output not byte-identical");

    let text = String::from_utf8(bytes_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,kernel,sigma,m_requested,m_actual,run,seed,err_value,err_norm_kind,\
         relative_err,t_select_ms,t_factor_ms,t_eval_ms,min_sv,max_sv,pinv_norm"
    );
    // anchornet ranks run once, uniform three times each
    assert_eq!(lines.count(), 2 + 6);

    let report = bin()
        .args(["report", "--data"])
        .arg(&a)
        .output()
        .unwrap();
    assert!(report.status.success());
    let summary = String::from_utf8(report.stdout).unwrap();
    assert!(summary.starts_with("method,m_requested,runs,"));
    assert_eq!(summary.lines().count(), 1 + 4);
}

#[test]
fn sweep_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_csv(dir.path());
    let conf = dir.path().join("sweep.conf");
    std::fs::write(
        &conf,
        "kernel = gaussian\nmethods = uniform\nranks = 4,8\nruns = 2\nseed = 1\ntimings = false\n",
    )
    .unwrap();
    let out_a = dir.path().join("file.csv");
    let st = bin()
        .args(["sweep", "--data"])
        .arg(&data)
        .args(["--config"])
        .arg(&conf)
        .args(["--out"])
        .arg(&out_a)
        .output()
        .unwrap();
    assert!(st.status.success(), "config sweep failed: {st:?}");
    let text = std::fs::read_to_string(&out_a).unwrap();
    assert_eq!(text.lines().count(), 1 + 4); // 2 ranks x 2 runs

    // flag overrides the file's runs
    let out_b = dir.path().join("override.csv");
    let st = bin()
        .args(["sweep", "--data"])
        .arg(&data)
        .args(["--config"])
        .arg(&conf)
        .args(["--runs", "1", "--out"])
        .arg(&out_b)
        .output()
        .unwrap();
    assert!(st.status.success());
    let text = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(text.lines().count(), 1 + 2);
}

#[test]
fn select_and_diagnose_and_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_csv(dir.path());

    let sel = bin()
        .args([
            "select",
            "--data",
            data.to_str().unwrap(),
            "--method",
            "fps",
            "--rank",
            "6",
        ])
        .output()
        .unwrap();
    assert!(sel.status.success(), "select failed: {sel:?}");
    let indices: Vec<usize> = String::from_utf8(sel.stdout)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(indices.len(), 6);
    assert!(indices.iter().all(|&i| i < 200));

    let diag = bin()
        .args([
            "diagnose",
            "--data",
            data.to_str().unwrap(),
            "--kernel",
            "multiquadric",
            "--sigma",
            "1.0",
            "--method",
            "anchornet",
            "--rank",
            "10",
        ])
        .output()
        .unwrap();
    assert!(diag.status.success(), "diagnose failed: {diag:?}");
    let text = String::from_utf8(diag.stdout).unwrap();
    assert!(text.contains("e_hat_r="), "missing fields: {text}");
    assert!(text.contains("holds=true"), "bound did not hold: {text}");

    // unit-square points for the discrepancy subcommand
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "0.25,0.25\n0.75,0.75\n").unwrap();
    let disc = bin()
        .args(["discrepancy", "--data", pts.to_str().unwrap(), "--method", "exact"])
        .output()
        .unwrap();
    assert!(disc.status.success(), "discrepancy failed: {disc:?}");
    let text = String::from_utf8(disc.stdout).unwrap();
    assert!(text.contains("value="), "missing value: {text}");
}

#[test]
fn approximate_reports_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_csv(dir.path());
    let out = bin()
        .args([
            "approximate",
            "--data",
            data.to_str().unwrap(),
            "--kernel",
            "sigmoid",
            "--sigma",
            "1.0",
            "--method",
            "anchornet",
            "--rank",
            "20",
            "--norm",
            "max",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "approximate failed: {out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("err=") && text.contains("pinv_norm="), "{text}");

    // invalid kernel name should fail cleanly
    let bad = bin()
        .args([
            "approximate",
            "--data",
            data.to_str().unwrap(),
            "--kernel",
            "linear",
            "--rank",
            "5",
        ])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
