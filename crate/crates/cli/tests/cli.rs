use std::path::Path;
use std::process::{Command, Output};

use blocksplit::spectral::TransitionMatrix;
use blocksplit::SplitParams;
use blocksplit_cli::verify::{cmd_verify_with, run_checks, Hooks, Level};
use blocksplit_cli::CliError;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blocksplit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = bin(&[
            "simulate", "--strategy", "even", "--block-size", "31", "--batch-range", "1:15:2",
            "--insertions", "20000", "--runs", "3", "--seed", "11", "--out", path_str(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("hammer_h,mean_fullness,min_fullness,max_fullness"));
    let rs: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(rs, ["1", "3", "5", "7", "9", "11", "13", "15"]);
}

#[test]
fn different_seed_changes_output() {
    let run = |seed: &str| {
        bin(&[
            "simulate", "--strategy", "even", "--block-size", "31", "--batch", "3",
            "--insertions", "5000", "--runs", "2", "--seed", seed,
        ])
        .stdout
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"strategy": "deferred_even", "block_size": 24, "batch": [5, 30], "insertions": 4000, "runs": 2}"#,
    )
    .unwrap();
    let o = bin(&["simulate", "--config", path_str(&cfg), "--batch", "7"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("7,"));
}

#[test]
fn analyze_writes_expected_cells() {
    let o = bin(&["analyze", "--block-size", "240", "--batch", "80,300"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["r", "predicted_fullness", "table_bound", "deferred_closed_form"]);
    // even B: no prediction; r > B: no deferred closed form
    assert_eq!(rows[1][1], "");
    assert!((rows[1][3].parse::<f64>().unwrap() - 7.0 / 9.0).abs() < 1e-9);
    assert_eq!(rows[2][3], "");
    assert!((rows[2][2].parse::<f64>().unwrap() - (1.75f64 / 3.0).max(2.0 / 3.0)).abs() < 1e-9);
}

#[test]
fn plot_renders_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("even.csv");
    let svg = dir.path().join("even.svg");
    let o = bin(&[
        "simulate", "--strategy", "deferred_even", "--block-size", "60", "--batch-range", "1:60:4",
        "--insertions", "5000", "--runs", "2", "--out", path_str(&csv),
    ]);
    assert!(o.status.success());
    let o = bin(&[
        "plot", path_str(&csv), "--block-size", "60", "--overlay", "lemma61", "--out", path_str(&svg),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("class=\"overlay\""));
    assert!(!text.contains("href"));
}

#[test]
fn plot_empty_csv_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    let svg = dir.path().join("out.svg");
    std::fs::write(&csv, "").unwrap();
    let o = bin(&["plot", path_str(&csv), "--block-size", "60", "--out", path_str(&svg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!svg.exists());
    std::fs::write(&csv, "hammer_h,mean_fullness,min_fullness,max_fullness\n").unwrap();
    let o = bin(&["plot", path_str(&csv), "--block-size", "60", "--out", path_str(&svg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!svg.exists());
}

#[test]
fn plot_malformed_csv_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    let svg = dir.path().join("out.svg");
    std::fs::write(
        &csv,
        "hammer_h,mean_fullness,min_fullness,max_fullness\n1,0.7,0.6,0.8\n2,abc,0.6,0.8\n",
    )
    .unwrap();
    let o = bin(&["plot", path_str(&csv), "--block-size", "60", "--out", path_str(&svg)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(!svg.exists());
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["--version"]).status.code(), Some(0));
    assert_eq!(bin(&["simulate", "--block-size"]).status.code(), Some(2));
    // r in regime I range only
    let o = bin(&["simulate", "--strategy", "uneven1", "--block-size", "240", "--batch", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(bin(&["analyze", "--block-size", "2", "--batch", "1"]).status.code(), Some(2));
    let o = bin(&[
        "simulate", "--strategy", "even", "--block-size", "15", "--batch", "2",
        "--insertions", "100", "--out", "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = bin(&["plot", "/nonexistent-dir/in.csv", "--block-size", "15"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_quick_passes() {
    let o = bin(&["verify", "--level", "quick"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS left-eigenvector-identity"));
    assert!(!text.contains("FAIL"));
}

fn corrupted(params: SplitParams) -> blocksplit::Result<TransitionMatrix> {
    let mut a = TransitionMatrix::build(params)?;
    let b = params.block_size();
    a.set(b, b, a.get(b, b) - 1);
    Ok(a)
}

#[test]
fn corrupted_matrix_is_named() {
    let hooks = Hooks { build_matrix: corrupted };
    let results = run_checks(Level::Quick, &hooks);
    let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    assert!(failed.contains(&"left-eigenvector-identity"), "{failed:?}");
    assert!(failed.contains(&"column-coherence"), "{failed:?}");
    // checks that never touch the matrix are unaffected
    assert!(!failed.contains(&"f-minimum"));
    match cmd_verify_with(Level::Quick, &hooks) {
        Err(e @ CliError::Verify(_)) => {
            assert_eq!(e.exit_code(), 1);
            assert!(e.to_string().contains("left-eigenvector-identity"));
        }
        other => panic!("{other:?}"),
    }
}
