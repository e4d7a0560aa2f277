use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const NINE_RANDOM: &str =
    "1110010\n1001101\n0100111\n0010000\n0010010\n0101010\n0001000\n1011010\n1101000\n";

fn s27() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/s27.bench")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psoframe"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn fsim_nine_vector_curve_ends_at_full_coverage() {
    let dir = TempDir::new().unwrap();
    let vectors = dir.path().join("t1.txt");
    fs::write(&vectors, format!("# nine random vectors\n{NINE_RANDOM}")).unwrap();
    let out = dir.path().join("out");
    let o = run(&["fsim", p(&s27()), p(&vectors), "--collapse", "-o", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("coverage.csv")).unwrap();
    assert!(csv.starts_with("vector,coverage\n"));
    assert_eq!(csv.lines().count(), 10);
    assert_eq!(csv.lines().last().unwrap(), "1101000,100.000");
    let det = fs::read_to_string(out.join("detections.csv")).unwrap();
    assert_eq!(det.lines().count(), 33);
    assert!(det.lines().skip(1).all(|l| !l.ends_with(',')));
}

#[test]
fn fsim_input_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&run(&["fsim", "/nonexistent.bench", "--random", "3"])),
        2
    );
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0000000\n01x0000\n").unwrap();
    assert_eq!(code(&run(&["fsim", p(&s27()), p(&bad)])), 2);
    let narrow = dir.path().join("narrow.txt");
    fs::write(&narrow, "000\n").unwrap();
    assert_eq!(code(&run(&["fsim", p(&s27()), p(&narrow)])), 2);
    let broken = dir.path().join("broken.bench");
    fs::write(&broken, "INPUT(a)\ny = FROB(a)\n").unwrap();
    assert_eq!(code(&run(&["fsim", p(&broken), "--random", "2"])), 2);
    assert_eq!(code(&run(&["fsim", p(&s27())])), 1);
    assert_eq!(
        code(&run(&[
            "fsim",
            p(&s27()),
            "--random",
            "3",
            "--mode",
            "sideways"
        ])),
        1
    );
    assert_eq!(code(&run(&["fsim", p(&s27()), "--random", "0"])), 1);
}

#[test]
fn fsim_random_is_deterministic() {
    let a = run(&["fsim", p(&s27()), "--random", "9", "--seed", "7"]);
    let b = run(&["fsim", p(&s27()), "--random", "9", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["fsim", p(&s27()), "--random", "9", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

fn frame_run(dir: &Path, extra: &[&str]) -> Output {
    let s = s27();
    let mut full: Vec<&str> = vec!["frame", p(&s), "-o", p(dir)];
    full.extend_from_slice(extra);
    run(&full)
}

fn load(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn frame_writes_consistent_outputs() {
    let dir = TempDir::new().unwrap();
    let o = frame_run(dir.path(), &["--collapse", "--exact-check"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = load(dir.path());
    assert_eq!(r["frame"]["coverage"], 100.0);
    assert!(r["exact"]["gap"].is_u64());

    let frame = fs::read_to_string(dir.path().join("frame.txt")).unwrap();
    let n = frame.lines().count();
    assert_eq!(n, r["pbest"]["vectors"].as_array().unwrap().len());
    assert!(n <= 9);

    // Coverage of the frame file, recomputed by fsim, matches the report.
    let fs_out = dir.path().join("fsim");
    let o = run(&[
        "fsim",
        p(&s27()),
        p(&dir.path().join("frame.txt")),
        "--collapse",
        "-o",
        p(&fs_out),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(fs_out.join("coverage.csv")).unwrap();
    let last: f64 = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(last, r["frame"]["coverage"].as_f64().unwrap());

    let cov = fs::read_to_string(dir.path().join("coverage.csv")).unwrap();
    assert!(cov.starts_with("series,step,vector,coverage\n"));
    assert_eq!(cov.lines().filter(|l| l.starts_with("pso,")).count(), n);
    assert_eq!(cov.lines().filter(|l| l.starts_with("random,")).count(), 32);
}

#[test]
fn frame_is_byte_stable_and_timestamp_is_opt_in() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(code(&frame_run(a.path(), &["--seed", "5"])), 0);
    assert_eq!(code(&frame_run(b.path(), &["--seed", "5"])), 0);
    for f in ["report.json", "coverage.csv", "frame.txt"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(load(a.path()).get("generated_at_unix").is_none());
    assert_eq!(
        code(&frame_run(b.path(), &["--seed", "5", "--timestamp"])),
        0
    );
    assert!(load(b.path())["generated_at_unix"].is_u64());
}

#[test]
fn frame_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&frame_run(dir.path(), &["--pop-size", "0"])), 1);
    assert_eq!(code(&frame_run(dir.path(), &["--mutation-rate", "1.5"])), 1);
    assert_eq!(code(&frame_run(dir.path(), &["--vdd", "-1"])), 1);
    assert_eq!(code(&frame_run(dir.path(), &["--cap-model", "table"])), 1);
    assert_eq!(code(&frame_run(dir.path(), &["--seed", "x"])), 1);
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn frame_config_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "collapse = true\nbaseline_seeds = 10\n[swarm]\nseed = 3\npopulation_size = 16\n[sim]\nmode = \"scan\"\n[power]\nvdd = 2.0\n",
    )
    .unwrap();
    let o = frame_run(dir.path(), &["--config", p(&cfg), "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = load(dir.path());
    assert_eq!(r["config"]["swarm"]["seed"], 4);
    assert_eq!(r["config"]["swarm"]["population_size"], 16);
    assert_eq!(r["config"]["baseline_seeds"], 10);
    assert_eq!(r["faults"]["count"], 32);
    assert_eq!(r["config"]["power"]["vdd"], 2.0);

    fs::write(&cfg, "[swarm]\npopulation = 3\n").unwrap();
    assert_eq!(code(&frame_run(dir.path(), &["--config", p(&cfg)])), 1);
    assert_eq!(
        code(&frame_run(dir.path(), &["--config", "/nonexistent.toml"])),
        2
    );
}

#[test]
fn frame_with_cap_table() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("caps.csv");
    let rows: String = [
        "G14", "G17", "G8", "G15", "G16", "G9", "G10", "G11", "G12", "G13",
    ]
    .iter()
    .map(|g| format!("{g},2e-15\n"))
    .collect();
    fs::write(&table, format!("gate_label,farads\n{rows}")).unwrap();
    let o = frame_run(
        dir.path(),
        &[
            "--collapse",
            "--cap-table",
            p(&table),
            "--vdd",
            "1.2",
            "--period",
            "1e-8",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = load(dir.path());
    let w = r["frame"]["weighted_toggles"].as_f64().unwrap();
    let watts = r["power"]["frame_watts"].as_f64().unwrap();
    assert!((watts - 1.44 / 2e-8 * w).abs() <= 1e-12 * watts);

    fs::write(&table, "G14,2e-15\n").unwrap();
    assert_eq!(code(&frame_run(dir.path(), &["--cap-table", p(&table)])), 2);
}

#[test]
fn frame_reports_unreachable_coverage() {
    let dir = TempDir::new().unwrap();
    let o = frame_run(
        dir.path(),
        &["--collapse", "--pop-size", "1", "--mutation-limit", "0"],
    );
    assert_eq!(code(&o), 4);
    assert!(dir.path().join("report.json").exists());
    assert!(
        load(dir.path())["pbest"]["detectable_coverage"]
            .as_f64()
            .unwrap()
            < 100.0
    );
}

#[test]
fn report_renders_saved_runs() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&frame_run(dir.path(), &["--collapse", "--seed", "3"])),
        0
    );
    let path = dir.path().join("report.json");
    let a = run(&["report", p(&path)]);
    let b = run(&["report", p(&path)]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let n = fs::read_to_string(dir.path().join("frame.txt"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(n, 6);
    let slots = text
        .lines()
        .find(|l| l.trim_start().starts_with("T6"))
        .unwrap();
    assert_eq!(slots.split_whitespace().count(), 6);
    assert!(slots.trim_end().ends_with("T1"));

    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    assert_eq!(code(&run(&["report", p(&empty)])), 2);
    fs::write(&empty, "{\"frame\": 1}").unwrap();
    assert_eq!(code(&run(&["report", p(&empty)])), 2);
    assert_eq!(code(&run(&["report", "/nonexistent.json"])), 2);
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&[])), 1);
}
