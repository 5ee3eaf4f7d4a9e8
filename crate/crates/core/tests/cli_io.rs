use std::fs;
use std::process::Command;

use cyclesim::cli::{
    config_to_toml, emit_results, load_config, parse_args, read_runs, CONFIG_FILE, RUNS_FILE, SWEEP_FILE,
};
use cyclesim::montecarlo::{aggregate, run_sweep, ExperimentConfig, RunMode, SweepOutput};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cyclesim"))
}

fn strip_cpu_column(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(8);
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (_, cfg) = parse_args([
        "cyclesim", "--networks", "4", "--tmax", "20ms", "--reps", "3", "--seed", "99", "--mode", "skip",
        "--channels", "37", "--hop", "7", "--noi-rank", "2", "--max-events", "1000",
    ])
    .unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, config_to_toml(&cfg)).unwrap();
    let back = load_config(&path).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(config_to_toml(&back), config_to_toml(&cfg));

    // Flags override the file.
    let (_, over) = parse_args(["cyclesim", "--config", path.to_str().unwrap(), "--reps", "5"]).unwrap();
    assert_eq!(over.reps, 5);
    assert_eq!(over.networks, 4);
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, "networks = 3\nbogus = 1\n").unwrap();
    assert!(load_config(&path).is_err());
}

#[test]
fn csv_is_deterministic_apart_from_cpu_time() {
    let cfg = ExperimentConfig {
        t_max_end_us: 20_000,
        t_max_step_us: 5_000,
        reps: 3,
        seed: 5,
        ..ExperimentConfig::default()
    };
    let mut files = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = run_sweep(&cfg).unwrap();
        emit_results(&out, dir.path()).unwrap();
        files.push(fs::read_to_string(dir.path().join(RUNS_FILE)).unwrap());
    }
    assert_eq!(strip_cpu_column(&files[0]), strip_cpu_column(&files[1]));
}

#[test]
fn aggregates_recompute_from_persisted_rows() {
    let cfg = ExperimentConfig {
        t_max_end_us: 25_000,
        t_max_step_us: 6_250,
        reps: 4,
        seed: 8,
        ..ExperimentConfig::default()
    };
    let out = run_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_results(&out, dir.path()).unwrap();
    let rows = read_runs(&dir.path().join(RUNS_FILE)).unwrap();
    assert_eq!(rows, out.rows);
    assert_eq!(aggregate(&rows), out.sweep);
    for s in &out.sweep {
        let (a, b, c) = s.event_reduction.unwrap();
        assert!(a <= b && b <= c);
    }
}

#[test]
fn single_repetition_min_mean_max_coincide() {
    let cfg = ExperimentConfig {
        t_max_end_us: 30_000,
        t_max_start_us: 30_000,
        seed: 3,
        ..ExperimentConfig::default()
    };
    let out = run_sweep(&cfg).unwrap();
    assert_eq!(out.sweep.len(), 1);
    let (a, b, c) = out.sweep[0].event_reduction.unwrap();
    assert_eq!((a, b), (b, c));
}

#[test]
fn empty_sweep_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    emit_results(&SweepOutput::default(), dir.path()).unwrap();
    for f in [RUNS_FILE, SWEEP_FILE] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        assert_eq!(text.lines().count(), 1, "{f}");
    }
}

#[test]
fn row_count_per_engine() {
    let cfg = ExperimentConfig {
        reps: 200,
        mode: RunMode::Verify,
        ..ExperimentConfig::default()
    };
    let out = run_sweep(&cfg).unwrap();
    assert_eq!(out.rows.len(), 400);
    let cfg = ExperimentConfig {
        mode: RunMode::Skip,
        ..cfg
    };
    assert_eq!(run_sweep(&cfg).unwrap().rows.len(), 200);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["--tmax", "15ms", "--reps", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    for f in [RUNS_FILE, SWEEP_FILE, CONFIG_FILE] {
        assert!(dir.path().join(f).exists(), "{f}");
    }

    let st = bin().args(["--noi-rank", "4", "--networks", "3"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    let st = bin().args(["--no-such-flag"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    let st = bin().args(["--tmax", "8ms"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    let st = bin().arg("--help").output().unwrap();
    assert_eq!(st.status.code(), Some(0));

    let file = dir.path().join("not_a_dir");
    fs::write(&file, "x").unwrap();
    let st = bin().arg("--out").arg(&file).output().unwrap();
    assert_eq!(st.status.code(), Some(3));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .env(cyclesim::cli::OUT_DIR_ENV, dir.path())
        .args(["--mode", "skip"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert!(dir.path().join(RUNS_FILE).exists());
}

#[test]
fn trace_file_written() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["--mode", "skip", "--tmax", "40ms", "--tmax-start", "40ms", "--reps", "3", "--trace", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let trace = fs::read_to_string(dir.path().join(cyclesim::cli::TRACE_FILE)).unwrap();
    assert!(trace.lines().all(|l| l.starts_with("k=0 rep=") && l.contains("case=")));
}
