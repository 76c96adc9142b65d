use std::process::{Command, Output};

fn wgs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgs-random"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn page_prints_twelve_digits() {
    let out = wgs(&["page", "--na", "1", "--nb", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.480898346963\n");
}

#[test]
fn stabilizer_pmf_table() {
    let out = wgs(&["stabpmf", "--n", "2", "--na", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "s_a,probability\n0,0.6\n1,0.4\n");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["run", "--n", "3", "--seed", "1", "--bogus"][..],
        &["run", "--n", "3"],
        &["run", "--n", "3", "--seed", "1", "--na", "3"],
        &["run", "--n", "3", "--seed", "1", "--phi", "7"],
        &["page", "--na", "2", "--nb", "1"],
        &["converge", "--n", "4", "--seed", "1", "--trials", "10"],
        &["histogram", "--n", "4", "--seed", "1", "--mode", "sideways"],
        &["burnin", "--n", "4", "--seed", "1", "--threads", "0"],
    ] {
        let out = wgs(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let out = wgs(&["page", "--na", "1", "--nb", "2", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!target.exists());
}

#[test]
fn help_lists_defaults() {
    let out = wgs(&["converge", "--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for needle in ["[default: 0.01]", "[default: 10]", "[default: 200]", "[default: 5pi/8]", "[default: zeros]"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let out = wgs(&["run", "--n", "3", "--seed", "5", "--length", "4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,entropy_bits");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn experiment_csv_shapes() {
    let hist = wgs(&["histogram", "--n", "4", "--na", "2", "--seed", "3", "--burnin", "20", "--samples", "50", "--bins", "8"]);
    assert!(hist.status.success());
    let text = stdout(&hist);
    assert_eq!(text.lines().count(), 9);
    assert_eq!(text.lines().next(), Some("bin_lo,bin_hi,density"));

    let conv = wgs(&["converge", "--n", "2,3", "--seed", "3", "--trials", "200", "--max-depth", "40", "--epsilon", "0.05,0.01"]);
    assert!(conv.status.success());
    assert_eq!(stdout(&conv).lines().count(), 5);

    let oracle = wgs(&["oracle-check", "--n", "1,2"]);
    assert!(oracle.status.success());
    let text = stdout(&oracle);
    assert!(text.starts_with("n,trials,passed,failed,min_overlap,max_probability_error\n"));
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(3) == Some("0")), "{text}");
}

#[test]
fn same_seed_same_bytes() {
    let args = ["burnin", "--n", "4", "--na", "2", "--seed", "17", "--burnin", "30", "--samples", "40"];
    let a = wgs(&args);
    let b = wgs(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = wgs(&["burnin", "--n", "4", "--na", "2", "--seed", "18", "--burnin", "30", "--samples", "40"]);
    assert_ne!(a.stdout, other.stdout);
}
