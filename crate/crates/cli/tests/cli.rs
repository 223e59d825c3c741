use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipsample")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stats_on_running_example() {
    let out = run(&["stats", "--input", path_str(&data("table1.csv"))]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("|M| = 3"), "{text}");
    assert!(text.contains("|G| = 5"));
    assert!(text.contains("search space = 1500"));
    assert!(text.contains("Z_f = 776"));
    assert!(text.contains("Z_hf = 67050"));
}

#[test]
fn stats_on_iris() {
    let out = run(&["stats", "--input", path_str(&data("iris.csv"))]);
    let text = stdout(&out);
    assert!(text.contains("|M| = 4"));
    assert!(text.contains("|G| = 150"));
    assert!(text.contains("distinct values = 123"), "{text}");
}

#[test]
fn stats_on_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.csv");
    fs::write(&input, "x,y\n1.5,2\n").unwrap();
    let report = dir.path().join("stats.json");
    let out = run(&["stats", "--input", path_str(&input), "--output", path_str(&report)]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("|G| = 1"));
    assert!(text.contains("search space = 1"));
    assert!(text.contains("Z_hf undefined"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["search_space"], "1");
    assert!(dir.path().join("stats.json.manifest.json").exists());
}

#[test]
fn sample_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = data("table1.csv");
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let r = run(&[
            "sample", "--input", path_str(&input), "--method", "fips", "--k", "500", "--seed", "7", "--output",
            path_str(out),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 500);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["freq"].as_u64().unwrap() >= 1);
        assert_eq!(v["bounds"].as_array().unwrap().len(), 3);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["seed_source"], "fixed");
    assert_eq!(manifest["dataset_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn entropy_seed_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.jsonl");
    let r = run(&[
        "sample", "--input", path_str(&data("table1.csv")), "--method", "random-cover", "--k", "3",
        "--entropy-seed", "--output", path_str(&out),
    ]);
    assert!(r.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("p.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed_source"], "entropy");
    assert!(manifest["seed"].is_u64());
}

#[test]
fn hips_on_constant_column_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    fs::write(&input, "a,b\n1,5\n2,5\n3,5\n").unwrap();
    let r = run(&["sample", "--input", path_str(&input), "--method", "hips", "--k", "2"]);
    assert_eq!(r.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&r.stderr).contains("b"));
}

#[test]
fn jaccard_cdf_needs_two_patterns() {
    let r = run(&["eval", "jaccard-cdf", "--input", path_str(&data("table1.csv")), "--method", "fips", "--k", "1"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn bad_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "a,b\n1,x\n").unwrap();
    let r = run(&["stats", "--input", path_str(&input)]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn impossible_band_hits_time_limit() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "eval", "draws-in-band", "--input", path_str(&data("table1.csv")), "--method", "fips", "--k", "3",
        "--band", "1.1:1.2", "--time-limit", "0.1", "--output", path_str(dir.path()),
    ]);
    assert_eq!(r.status.code(), Some(4));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["per_rep"][0]["accepted"], 0);
    assert_eq!(summary["per_rep"][0]["timed_out"], true);
}

#[test]
fn enumerate_running_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("all.csv");
    let r = run(&["enumerate", "--input", path_str(&data("table1.csv")), "--output", path_str(&out)]);
    assert!(r.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "m1_lo,m1_hi,m2_lo,m2_hi,m3_lo,m3_hi,freq,vol");
    assert_eq!(lines.count(), 1500);
    assert!(text.contains("\n2,6,7,12,91,130,5,780\n"));
}

#[test]
fn enumerate_respects_cap() {
    let r = run(&["enumerate", "--input", path_str(&data("iris.csv")), "--cap", "1000"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn plausibility_summary() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "eval", "plausibility", "--input", path_str(&data("iris.csv")), "--method", "hips", "--k", "20", "--R", "10",
        "--band", "0.10:0.35", "--output", path_str(dir.path()),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["metric"], "plausibility");
    assert_eq!(summary["R"], 10);
    assert_eq!(summary["swaps_per_attribute"], 150);
    assert!(summary["mean"].as_f64().unwrap() <= 1.0);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["parameters"]["swaps_per_attribute"], 150);
    let metrics = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().next().unwrap(), "method,draw_index,freq,vol,vol_freq,wall_time_us,seed");
    assert_eq!(metrics.lines().count(), 21);
    for line in metrics.lines().skip(1) {
        let freq: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((15.0..=52.5).contains(&freq), "{line}");
    }
}

#[test]
fn eval_outputs_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(workers);
        let r = run(&[
            "eval", "volfreq-curve", "--input", path_str(&data("iris.csv")), "--method", "hips", "--k", "50",
            "--reps", "5", "--workers", workers, "--output", path_str(&out),
        ]);
        assert!(r.status.success());
        outputs.push((
            fs::read_to_string(out.join("metrics.csv")).unwrap(),
            fs::read_to_string(out.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn every_eval_metric_runs() {
    let input = data("table1.csv");
    let metrics: [&[&str]; 8] = [
        &["freq-curve"],
        &["volfreq-curve"],
        &["tail", "--measure", "vol-freq", "--reference", "max-observed"],
        &["diversity"],
        &["jaccard-cdf", "--steps", "4"],
        &["plausibility", "--R", "3", "--swaps", "2"],
        &["draws-in-band", "--band", "0:1"],
        &["timing"],
    ];
    for m in metrics {
        let mut args = vec!["eval"];
        args.extend_from_slice(m);
        args.extend(["--input", path_str(&input), "--method", "fips", "--k", "10"]);
        let r = run(&args);
        assert!(r.status.success(), "{m:?}: {}", String::from_utf8_lossy(&r.stderr));
        let summary: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
        assert_eq!(summary["metric"], m[0]);
    }
}
