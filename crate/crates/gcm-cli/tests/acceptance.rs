//! End-to-end checks against the compiled `gcm` binary. The rerun gate
//! prints an `[acceptance]` PASS/FAIL line; run with
//! `cargo test --test acceptance -- --nocapture` to see it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use gcm::nalgebra::{DMatrix, DVector};

fn gcm_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gcm"))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("failed to spawn gcm binary");
    assert!(
        out.status.success(),
        "command {:?} failed with {:?}\nstderr: {}",
        cmd,
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Checksums every file under `root`, keyed by path relative to `root`.
fn checksum_tree(root: &Path) -> BTreeMap<String, u64> {
    let mut map = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                map.insert(rel, fnv1a(&fs::read(&path).unwrap()));
            }
        }
    }
    map
}

/// One full pipeline pass: simulate → features → run (over the simulated
/// CSV files) → report, all rooted in `root`.
fn full_pipeline(root: &Path) {
    let data = root.join("data");
    run_ok(
        gcm_bin()
            .args(["simulate", "--scenario", "preset:paper", "--out"])
            .arg(&data),
    );

    run_ok(
        gcm_bin()
            .args(["features", "--in"])
            .arg(golden("recording.csv"))
            .arg("--meta")
            .arg(golden("recording_meta.json"))
            .arg("--out")
            .arg(root.join("features.csv")),
    );

    let config = root.join("exp.json");
    fs::write(
        &config,
        r#"{
  "schema_version": 1,
  "source": {"kind": "csv_dir", "path": "data"},
  "train_trials": [1],
  "test_trials": [2, 3, 4, 5, 6, 7, 8, 9, 10],
  "rng_seed": 380,
  "num_classes": 2
}
"#,
    )
    .unwrap();
    let out = root.join("out");
    run_ok(
        gcm_bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );

    run_ok(
        gcm_bin()
            .args(["report", "--report"])
            .arg(out.join("report.csv"))
            .arg("--out")
            .arg(root.join("plots")),
    );
}

// ---------------------------------------------------------------------------
// Gate: rerunning the whole pipeline with the same config and seed
// reproduces every output byte for byte.
// ---------------------------------------------------------------------------

#[test]
fn pipeline_rerun_is_byte_identical() {
    let name = "cli: pipeline rerun is byte-identical";
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    full_pipeline(first.path());
    full_pipeline(second.path());
    let a = checksum_tree(first.path());
    let b = checksum_tree(second.path());
    let verdict = if a == b {
        Ok(())
    } else {
        let diff: Vec<&String> = a
            .iter()
            .filter(|(k, v)| b.get(*k) != Some(v))
            .map(|(k, _)| k)
            .chain(b.keys().filter(|k| !a.contains_key(*k)))
            .collect();
        Err(format!("checksums differ for {diff:?}"))
    };
    match &verdict {
        Ok(()) => println!("[acceptance] {name}: PASS"),
        Err(why) => println!("[acceptance] {name}: FAIL — {why}"),
    }
    assert!(a.len() > 15, "pipeline produced only {} files", a.len());
    if let Err(why) = verdict {
        panic!("{name}: {why}");
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[test]
fn simulate_preset_writes_ten_trials_of_600_rows() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        gcm_bin()
            .args(["simulate", "--scenario", "preset:paper", "--out"])
            .arg(dir.path()),
    );
    for t in 1..=10 {
        let text = fs::read_to_string(dir.path().join(format!("trial_{t}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 601, "trial {t}: header + 600 rows");
    }
    assert!(dir.path().join("scenario.json").is_file());
}

#[test]
fn simulate_single_trial_scenario_writes_one_file() {
    let scenario = gcm::DriftScenario::new(
        2,
        5,
        1,
        vec![
            DVector::from_column_slice(&[0.0, 0.0]),
            DVector::from_column_slice(&[4.0, 4.0]),
        ],
        vec![DVector::zeros(2), DVector::zeros(2)],
        vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2)],
        7,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("one.json");
    fs::write(&spec, gcm::io::scenario_to_json(&scenario).unwrap()).unwrap();
    let out = dir.path().join("out");
    run_ok(
        gcm_bin()
            .arg("simulate")
            .arg("--scenario")
            .arg(&spec)
            .arg("--out")
            .arg(&out),
    );
    let mut files: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    assert_eq!(files, ["scenario.json", "trial_1.csv"]);
}

#[test]
fn simulate_unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcm_bin()
        .args(["simulate", "--scenario", "preset:nope", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

// ---------------------------------------------------------------------------
// features
// ---------------------------------------------------------------------------

#[test]
fn features_golden_input_reproduces_golden_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("features.csv");
    run_ok(
        gcm_bin()
            .args(["features", "--in"])
            .arg(golden("recording.csv"))
            .arg("--meta")
            .arg(golden("recording_meta.json"))
            .arg("--out")
            .arg(&out),
    );
    let got = fs::read_to_string(&out).unwrap();
    let want = fs::read_to_string(golden("features_expected.csv")).unwrap();
    // Four input channels come out as four feature columns plus the label.
    assert!(got.starts_with("f1,f2,f3,f4,label\n"));
    assert_eq!(got, want, "feature output drifted from the pinned golden");
}

#[test]
fn features_trim_zero_preserves_row_count_on_stdout() {
    let out = run_ok(
        gcm_bin()
            .args(["features", "--in"])
            .arg(golden("recording.csv"))
            .arg("--meta")
            .arg(golden("recording_meta.json"))
            .args(["--trim", "0", "--stdout"]),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    // 50 input samples: header + 50 rows when nothing is trimmed.
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn features_cutoff_at_nyquist_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gcm_bin()
        .args(["features", "--in"])
        .arg(golden("recording.csv"))
        .arg("--meta")
        .arg(golden("recording_meta.json"))
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .args(["--cutoff-hz", "1000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cutoff"));
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[test]
fn train_writes_a_loadable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    run_ok(
        gcm_bin()
            .args(["simulate", "--scenario", "preset:mild", "--out"])
            .arg(&data),
    );
    let ckpt = dir.path().join("model.json");
    run_ok(
        gcm_bin()
            .arg("train")
            .arg("--data")
            .arg(&data)
            .args(["--trials", "1", "--num-classes", "2", "--out"])
            .arg(&ckpt),
    );
    let clf = gcm::io::checkpoint_from_json(&fs::read_to_string(&ckpt).unwrap()).unwrap();
    assert_eq!(clf.num_classes(), 2);
    assert_eq!(clf.trial_counter(), 0);
    assert_eq!(clf.mode().token(), "ss");
}

#[test]
fn train_on_degenerate_data_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("trial_1.csv"),
        "f1,f2,label\n1,2,0\n1,2,0\n1,2,0\n1,2,0\n",
    )
    .unwrap();
    let out = gcm_bin()
        .arg("train")
        .arg("--data")
        .arg(dir.path())
        .args(["--trials", "1", "--num-classes", "2", "--out"])
        .arg(dir.path().join("model.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical"));
}

// ---------------------------------------------------------------------------
// run / report
// ---------------------------------------------------------------------------

#[test]
fn run_preset_stays_within_time_budget() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    run_ok(
        gcm_bin()
            .args([
                "run",
                "--preset",
                "paper",
                "--modes",
                "frozen,ss,fs",
                "--out",
            ])
            .arg(dir.path()),
    );
    let elapsed = start.elapsed();
    assert!(dir.path().join("report.csv").is_file());
    assert!(dir.path().join("summary.json").is_file());
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "preset run took {elapsed:?}, budget is 10 s"
    );
}

#[test]
fn run_theta_one_reports_ss_rows_identical_to_frozen() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        gcm_bin()
            .args(["run", "--preset", "mild", "--modes", "frozen,ss"])
            .args(["--theta", "1.0", "--out"])
            .arg(dir.path()),
    );
    let text = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let strip = |mode: &str| -> Vec<String> {
        text.lines()
            .skip(1)
            .filter(|l| l.starts_with(&format!("{mode},")))
            .map(|l| l.split_once(',').unwrap().1.to_string())
            .collect()
    };
    let frozen = strip("frozen");
    assert!(!frozen.is_empty());
    assert_eq!(strip("ss"), frozen);
}

#[test]
fn report_on_reference_run_reproduces_golden_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    run_ok(
        gcm_bin()
            .args(["run", "--preset", "crossing", "--out"])
            .arg(&out),
    );
    let plots = dir.path().join("plots");
    run_ok(
        gcm_bin()
            .args(["report", "--report"])
            .arg(out.join("report.csv"))
            .arg("--out")
            .arg(&plots),
    );

    let want = fs::read_to_string(golden("crossing_summary.json")).unwrap();
    for path in [out.join("summary.json"), plots.join("summary.json")] {
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            want,
            "{} drifted from the pinned golden",
            path.display()
        );
    }
    for mode in ["frozen", "ss", "fs"] {
        let plot = fs::read_to_string(plots.join(format!("accuracy_{mode}.csv"))).unwrap();
        assert!(plot.starts_with("trial,accuracy\n"));
        assert_eq!(plot.lines().count(), 10, "{mode}: header + 9 trials");
    }
}
