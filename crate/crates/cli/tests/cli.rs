use std::path::Path;
use std::process::{Command, Output};

fn halasz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halasz"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn liouville_sum_vanishes_at_ten() {
    let out = halasz(&["sum", "--function", "liouville", "--limit", "1000000", "--grid", "geometric:2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# halasz sum --function liouville --limit 1000000 --grid geometric:2\n"));
    let rows = data_rows(&text);
    let ten = rows.iter().find(|r| r[0] == "10").expect("x = 10 row");
    assert_eq!(ten[3], "0");
    assert_eq!(rows.last().unwrap()[0], "1000000");
}

#[test]
fn thm1_pole_ratios_are_bounded() {
    let out = halasz(&[
        "thm1", "--function", "odd_one", "--epsilon", "-1", "--t0", "0", "--sigma", "1.001:1.5:20",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 20);
    for r in rows {
        let q: f64 = r[2].parse().unwrap();
        assert!((0.2..=5.0).contains(&q), "{r:?}");
    }
}

#[test]
fn extremal_build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let spec_s = spec.to_str().unwrap();
    let out = halasz(&[
        "extremal-build", "--kappa", "power:0.25", "--x1", "20", "--J", "3", "--out", spec_s,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = halasz(&["extremal-verify", spec_s, "--cutoff", "100000"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    assert!(report.contains("psum: pass"));
    assert!(report.contains("selected_range: [41, 317]"));
    assert!(report.contains("overall: pass"));

    // the built file doubles as a function
    let f = format!("extremal:{spec_s}");
    let out = halasz(&["sum", "--function", &f, "--limit", "1000"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["sum", "--function", "moebius", "--limit", "200000"],
        vec!["eval-f", "--function", "liouville", "--sigma", "1.05:1.5:4", "--t", "-1"],
        vec!["eval-f", "--function", "liouville", "--sigma", "1.05:1.5:4", "--log"],
        vec!["lemma", "--function", "liouville", "--epsilon", "1", "--sigma", "1.001:1.1:3"],
        vec!["thm2", "--function", "liouville", "--limit", "100000"],
        vec!["criterion", "--function", "moebius", "--cutoff", "100000"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("{i}-{rep}.csv"));
            let mut a = args.clone();
            let p = path.to_str().unwrap().to_string();
            a.push("--out");
            a.push(&p);
            let out = halasz(&a);
            assert!(out.status.success(), "{args:?}: {}", stderr(&out));
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
        assert!(outputs[0].starts_with(b"# halasz "), "{args:?}");
    }
}

#[test]
fn provenance_lists_defaults() {
    let out = halasz(&["lemma", "--function", "liouville", "--epsilon", "1", "--sigma", "1.01:1.1:2"]);
    let first = stdout(&out).lines().next().unwrap().to_string();
    assert_eq!(
        first,
        "# halasz lemma --function liouville --epsilon 1 --t0 0 --sigma 1.01:1.1:2:geometric --prime-cutoff 1000000"
    );
}

#[test]
fn criterion_verdicts() {
    let out = halasz(&["criterion", "--function", "one", "--cutoff", "100000"]);
    assert!(stdout(&out).contains("verdict: criterion fails"));
    let out = halasz(&["criterion", "--function", "liouville", "--cutoff", "1000000"]);
    assert!(stdout(&out).contains("verdict: criterion satisfied (sum side)"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["bogus"],
        vec!["sum"],
        vec!["sum", "--function", "zeta"],
        vec!["thm1", "--function", "one", "--epsilon", "2", "--sigma", "1.1:1.2:2"],
        vec!["thm1", "--function", "one", "--epsilon", "1", "--sigma", "1.1:1.7:2"],
        vec!["thm2", "--function", "one", "--limit", "10"],
        vec!["extremal-build", "--kappa", "power:0.6"],
    ] {
        let out = halasz(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).starts_with("error:"), "{args:?}: {}", stderr(&out));
    }
    let out = halasz(&["sum", "--function", "zeta"]);
    let err = stderr(&out);
    assert!(err.starts_with("error:unknown-function:"));
    assert!(err.contains("liouville") && err.contains("odd_one"));
}

#[test]
fn capacity_errors_exit_3() {
    let out = halasz(&["sum", "--function", "one", "--limit", "5000000000"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error:capacity:"));
    let out = halasz(&["extremal-build", "--kappa", "const:1", "--J", "50"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_spec_file_is_reported() {
    let out = halasz(&["extremal-verify", "/nonexistent/spec.json"]);
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("error:io:"));
    assert!(!Path::new("/nonexistent/spec.json").exists());
}
