use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SUBCOMMANDS: [&str; 7] = ["sample", "hull", "moments", "lk", "experiment", "tailcheck", "validate"];

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_isoconst"));
    c.env_remove("ISOCONST_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Set UPDATE_GOLDEN=1 to rewrite the files after an intended change.
#[test]
fn help_matches_golden_files() {
    let update = std::env::var("UPDATE_GOLDEN").is_ok();
    let mut names = vec![None];
    names.extend(SUBCOMMANDS.iter().map(Some));
    for sub in names {
        let args: Vec<&str> = sub.into_iter().copied().chain(["--help"]).collect();
        let o = run(&args);
        assert!(o.status.success());
        let text = stdout(&o);
        let path = golden_dir().join(format!("help_{}.txt", sub.copied().unwrap_or("root")));
        if update {
            fs::write(&path, &text).unwrap();
        } else {
            let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(text, want, "help drifted for {:?}", sub);
        }
    }
}

#[test]
fn help_lists_expected_flags() {
    let expect: [(&str, &[&str]); 7] = [
        ("sample", &["--dist", "--n", "--N", "--seed", "--out", "--format"]),
        ("hull", &["--dist", "--n", "--N", "--seed", "--symmetric", "--facet-budget", "--emit"]),
        ("moments", &["--poly", "--dist", "--n", "--N", "--seed", "--symmetric", "--oracle", "--samples", "--format"]),
        ("lk", &["--body", "--dim", "--poly", "--dist", "--n", "--N", "--seed"]),
        ("experiment", &["--config", "--out", "--trials", "--threads", "--facet-budget", "--lemma", "--seed"]),
        ("tailcheck", &["--dist", "--m", "--scale", "--t-grid", "--trials", "--seed", "--format"]),
        ("validate", &["--dist", "--samples", "--seed"]),
    ];
    for (sub, flags) in expect {
        let text = stdout(&run(&[sub, "--help"]));
        for f in flags {
            assert!(text.contains(&format!("{f} ")), "{sub} --help lacks {f}");
        }
        for line in text.lines().filter(|l| l.trim_start().starts_with("--")) {
            assert!(line.trim().contains("  "), "{sub}: undocumented flag line {line:?}");
        }
    }
}

#[test]
fn cube_constant_is_printed_exactly() {
    let o = run(&["lk", "--body", "cube", "--dim", "5"]);
    assert!(o.status.success());
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(first, "L = 0.2886751345948129");
    let pipeline: f64 = stdout(&o).lines().nth(1).unwrap().trim_start_matches("pipeline = ").parse().unwrap();
    assert!((pipeline - 12f64.sqrt().recip()).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["lk", "--body", "simplex", "--dim", "3"]).status.code(), Some(0));
    assert_eq!(run(&["lk", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["sample", "--n", "0", "--N", "3"]).status.code(), Some(1));
    assert_eq!(run(&["moments", "--poly", "/nonexistent/poly.json"]).status.code(), Some(1));
    // three points cannot span a full-dimensional body in R^3
    assert_eq!(run(&["hull", "--n", "3", "--N", "3", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn seed_comes_from_flag_then_env_then_zero() {
    let o = run(&["sample", "--n", "2", "--N", "2", "--seed", "17"]);
    assert!(stderr(&o).contains("seed: 17"));
    let o = bin().args(["sample", "--n", "2", "--N", "2"]).env("ISOCONST_SEED", "42").output().unwrap();
    assert!(stderr(&o).contains("seed: 42"));
    let o = run(&["sample", "--n", "2", "--N", "2"]);
    assert!(stderr(&o).contains("seed: 0"));
    let a = stdout(&bin().args(["sample", "--n", "2", "--N", "2"]).env("ISOCONST_SEED", "42").output().unwrap());
    let b = stdout(&run(&["sample", "--n", "2", "--N", "2", "--seed", "42"]));
    assert_eq!(a, b);
}

#[test]
fn emitted_hull_gives_same_moments_as_direct_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("poly.json");
    let poly_s = poly.to_str().unwrap();
    let o = run(&["hull", "--n", "3", "--N", "12", "--seed", "5", "--emit", poly_s]);
    assert!(o.status.success(), "{}", stderr(&o));
    let from_file = stdout(&run(&["moments", "--poly", poly_s]));
    let direct = stdout(&run(&["moments", "--n", "3", "--N", "12", "--seed", "5"]));
    assert!(!direct.is_empty());
    assert_eq!(from_file, direct);
}

#[test]
fn oracle_rows_agree_with_exact_values() {
    let o = run(&["moments", "--n", "3", "--N", "10", "--seed", "9", "--oracle", "--samples", "200000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let blocks = v["oracle"].as_array().unwrap();
    assert_eq!(blocks.len(), 2);
    for b in blocks {
        for r in b["rows"].as_array().unwrap() {
            assert!(r["stderr_units"].as_f64().unwrap().abs() < 5.0, "{r}");
        }
    }
}

#[test]
fn experiment_output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"dims":[2,3],"point_counts":["n+1","2n"],"distribution":"gaussian","trials":12,"master_seed":77}"#).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("out{threads}"));
        let o = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stderr(&o).contains("seed: 77"));
        outputs.push((fs::read_to_string(out.join("trials.csv")).unwrap(), fs::read_to_string(out.join("summary.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].0.lines().count() > 4 * 12);
}

#[test]
fn tailcheck_csv_has_one_row_per_threshold() {
    let o = run(&["tailcheck", "--m", "20", "--trials", "2000", "--t-grid", "0.2,0.4,0.6", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# calibrated_c="));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}
