use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rscsim_cli::{RunManifest, EXIT_NO_CROSSING, EXIT_RUNTIME, EXIT_USAGE};

fn rscsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rscsim"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> u8 {
    out.status.code().expect("exited") as u8
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compare `--help` output against `tests/golden/<name>.txt`; set
/// `UPDATE_GOLDEN=1` to rewrite the files.
#[test]
fn help_matches_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str]); 8] = [
        ("rscsim", &["--help"]),
        ("lattice", &["lattice", "--help"]),
        ("schedule", &["schedule", "--help"]),
        ("simulate", &["simulate", "--help"]),
        ("threshold", &["threshold", "--help"]),
        ("decode", &["decode", "--help"]),
        ("freqplan", &["freqplan", "--help"]),
        ("replay", &["replay", "--help"]),
    ];
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (name, args) in cases {
        let out = rscsim(tmp.path(), args);
        assert_eq!(code(&out), 0, "{name}");
        let text = String::from_utf8(out.stdout).unwrap();
        let path = golden_dir().join(format!("{name}.txt"));
        if update {
            std::fs::write(&path, &text).unwrap();
        } else {
            let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
            assert_eq!(text, want, "help for {name} changed; rerun with UPDATE_GOLDEN=1");
        }
    }
}

#[test]
fn bad_flags_exit_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["--bogus"][..],
        &["simulate", "-d", "3"],
        &[
            "simulate", "-d", "3", "--model", "circuit", "--p", "0.01", "--preset", "cr-gate",
        ],
        &["lattice", "-d", "three"],
        &["freqplan", "-d", "3", "--emit", "xml"],
    ] {
        assert_eq!(code(&rscsim(tmp.path(), args)), EXIT_USAGE, "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_with_runtime_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 6] = [
        &["lattice", "-d", "4"],
        &[
            "simulate", "-d", "3", "--model", "circuit", "--p", "1.5", "--shots", "10", "--seed", "1",
        ],
        &[
            "simulate", "-d", "3", "--preset", "nope", "--shots", "10", "--seed", "1",
        ],
        &[
            "threshold",
            "--model",
            "circuit",
            "--distances",
            "3",
            "--rates",
            "0.01,0.02,0.03",
            "--seed",
            "1",
        ],
        &["decode", "--graph", "missing.json", "--events", "missing.json"],
        &["freqplan", "-d", "3", "--sigma-mhz=-5", "--seed", "1"],
    ];
    for args in cases {
        let out = rscsim(tmp.path(), args);
        assert_eq!(code(&out), EXIT_RUNTIME, "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error:"), "{args:?}");
    }
}

#[test]
fn threshold_without_crossing_exits_with_its_own_code() {
    let tmp = tempfile::tempdir().unwrap();
    // Far below threshold the larger code always wins.
    let out = rscsim(
        tmp.path(),
        &[
            "threshold",
            "--model",
            "code-capacity",
            "--distances",
            "3,5",
            "--rates",
            "0.03,0.04,0.05",
            "--shots",
            "4000",
            "--seed",
            "1",
            "-o",
            "scan.csv",
        ],
    );
    assert_eq!(code(&out), EXIT_NO_CROSSING);
    let csv = std::fs::read_to_string(tmp.path().join("scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn lattice_dump_has_d_squared_data_qubits() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rscsim(tmp.path(), &["lattice", "--distance", "5", "--emit", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lattice"]["data_qubits"].as_array().unwrap().len(), 25);
    assert_eq!(v["lattice"]["stabilizers"].as_array().unwrap().len(), 24);
}

#[test]
fn noiseless_simulation_never_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rscsim(
        tmp.path(),
        &[
            "simulate",
            "--distance",
            "3",
            "--model",
            "circuit",
            "--p",
            "0",
            "--shots",
            "10",
            "--seed",
            "1",
        ],
    );
    assert_eq!(code(&out), 0);
    let mut rows = csv::Reader::from_reader(&out.stdout[..]);
    let headers = rows.headers().unwrap().clone();
    let row = rows.records().next().unwrap().unwrap();
    let failures = headers.iter().position(|h| h == "failures").unwrap();
    assert_eq!(&row[failures], "0");
}

#[test]
fn per_shot_rows_sum_to_aggregate() {
    let tmp = tempfile::tempdir().unwrap();
    let base = [
        "simulate", "-d", "3", "--model", "phenom", "--p", "0.03", "--shots", "500", "--seed", "5",
    ];
    let agg = rscsim(tmp.path(), &base);
    let mut per_shot_args = base.to_vec();
    per_shot_args.extend(["--per-shot", "--emit", "json"]);
    let per = rscsim(tmp.path(), &per_shot_args);
    assert_eq!(code(&agg), 0);
    assert_eq!(code(&per), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&per.stdout).unwrap();
    assert_eq!(rows.len(), 500);
    let failures = rows.iter().filter(|r| r["failure"].as_bool().unwrap()).count();
    let mut reader = csv::Reader::from_reader(&agg.stdout[..]);
    let row = reader.records().next().unwrap().unwrap();
    assert_eq!(row[6].parse::<usize>().unwrap(), failures);
}

#[test]
fn absent_seed_is_drawn_printed_and_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rscsim(tmp.path(), &["freqplan", "-d", "3", "--samples", "50", "-o", "f.csv"]);
    assert_eq!(code(&out), 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let seed: u64 = stderr
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed printed")
        .parse()
        .unwrap();
    let manifest = RunManifest::read(&tmp.path().join("f.csv.manifest.json")).unwrap();
    assert_eq!(manifest.seed, Some(seed));
    assert_eq!(
        manifest.argv[manifest.argv.len() - 2..],
        ["--seed".to_string(), seed.to_string()]
    );
    let replay = rscsim(tmp.path(), &["replay", "f.csv.manifest.json"]);
    assert_eq!(code(&replay), 0);
}

#[test]
fn replay_detects_changed_inputs_and_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let sim = rscsim(
        dir,
        &[
            "simulate",
            "-d",
            "3",
            "--model",
            "code-capacity",
            "--p",
            "0.05",
            "--shots",
            "200",
            "--seed",
            "2",
            "-o",
            "s.csv",
            "--graph-out",
            "g.json",
            "--events-out",
            "e.json",
        ],
    );
    assert_eq!(code(&sim), 0);
    assert_eq!(
        code(&rscsim(
            dir,
            &["decode", "--graph", "g.json", "--events", "e.json", "-o", "d.json"]
        )),
        0
    );

    std::fs::write(dir.join("s.csv"), "tampered").unwrap();
    // The manifest holds digests; the rerun itself is unaffected by the file.
    assert_eq!(code(&rscsim(dir, &["replay", "s.csv.manifest.json"])), 0);

    let mut manifest = RunManifest::read(&dir.join("s.csv.manifest.json")).unwrap();
    manifest.outputs[0].sha256 = "0".repeat(64);
    std::fs::write(dir.join("bad.manifest.json"), manifest.to_json().unwrap()).unwrap();
    let out = rscsim(dir, &["replay", "bad.manifest.json"]);
    assert_eq!(code(&out), EXIT_RUNTIME);
    assert!(String::from_utf8_lossy(&out.stdout).contains("MISMATCH"));

    std::fs::write(dir.join("e.json"), "[]").unwrap();
    let out = rscsim(dir, &["replay", "d.json.manifest.json"]);
    assert_eq!(code(&out), EXIT_RUNTIME);
    assert!(String::from_utf8_lossy(&out.stderr).contains("changed"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("scan.toml"),
        "model = \"code-capacity\"\ndistances = [3, 5]\nrates = [0.08, 0.12, 0.18]\nshots = 100\nseed = 1\n",
    )
    .unwrap();
    let out = rscsim(
        tmp.path(),
        &["threshold", "--config", "scan.toml", "--shots", "300", "--emit", "json"],
    );
    assert!(matches!(code(&out), 0 | 4));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["shots"] == 300 && r["seed"] == 1));

    std::fs::write(tmp.path().join("bad.toml"), "modle = \"circuit\"\n").unwrap();
    let out = rscsim(tmp.path(), &["threshold", "--config", "bad.toml"]);
    assert_eq!(code(&out), EXIT_RUNTIME);
}

#[test]
fn presets_set_the_circuit_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rscsim(
        tmp.path(),
        &[
            "simulate", "-d", "3", "--preset", "dp-gate", "--shots", "100", "--seed", "1",
        ],
    );
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("circuit,3,0.006,"), "{text}");
}
