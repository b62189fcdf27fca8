use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stroketrace::synth::{rasterize, ScriptSpec};
use stroketrace::{GrayImage, OnlineTrace};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stroketrace"))
        .args(args)
        .env_remove("STROKETRACE_SEED")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_bar(dir: &Path) -> std::path::PathBuf {
    let spec = ScriptSpec::new((120, 60), 4.0, vec![vec![(30.0, 8.0), (36.0, 52.0)]]);
    let (img, _) = rasterize(&spec).unwrap();
    let path = dir.join("bar.pgm");
    img.save(&path).unwrap();
    path
}

#[test]
fn bar_converts_to_one_stroke() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_bar(dir.path());
    let out = dir.path().join("bar.json");
    let svg = dir.path().join("bar.svg");
    let csv = dir.path().join("bar.csv");
    let r = bin(&[
        "convert",
        p(&input),
        "-o",
        p(&out),
        "--svg",
        p(&svg),
        "--csv",
        p(&csv),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    let trace = OnlineTrace::from_json(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(trace.strokes.len(), 1);
    assert_eq!(trace.image_size, (120, 60));
    let svg = fs::read_to_string(&svg).unwrap();
    assert_eq!(svg.matches("<path").count(), 1);
    assert!(fs::read_to_string(&csv)
        .unwrap()
        .starts_with("stroke_id,x,y,t\n"));
}

#[test]
fn blank_page_gives_empty_trace() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("blank.pgm");
    GrayImage::filled(40, 30, 240)
        .unwrap()
        .save(&input)
        .unwrap();
    let r = bin(&["convert", p(&input)]);
    assert!(r.status.success(), "{}", stderr(&r));
    let trace = OnlineTrace::from_json(&r.stdout).unwrap();
    assert!(trace.strokes.is_empty());
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.pgm");
    let out = dir.path().join("out.json");
    let r = bin(&["convert", p(&missing), "-o", p(&out)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stderr(&r).contains("nope.pgm"));
    assert!(!out.exists());
}

#[test]
fn malformed_image_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("junk.pgm");
    fs::write(&input, b"P5\n4 4\n255\nshort").unwrap();
    let r = bin(&["convert", p(&input)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains("junk.pgm"));
}

#[test]
fn convert_output_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_bar(dir.path());
    let a = bin(&["convert", p(&input)]);
    let b = bin(&["convert", p(&input)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn debug_stages_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_bar(dir.path());
    let stages = dir.path().join("stages");
    let r = bin(&[
        "convert",
        p(&input),
        "--debug-stages",
        p(&stages),
        "--snapshot-every",
        "10",
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    for name in [
        "a_original.pgm",
        "b_binarized.pgm",
        "d_traversed.pgm",
        "e_overlay.svg",
        "histogram.json",
    ] {
        assert!(stages.join(name).exists(), "{name}");
    }
    let frames = fs::read_dir(&stages)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("c_traversal_")
        })
        .count();
    assert!(frames >= 2);
}

#[test]
fn synth_spec_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("script.json");
    fs::write(
        &spec,
        r#"{"image_size":[60,40],"pen_width":3,"strokes":[[[5,5],[50,30]]],"noise":0.01,"seed":9}"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let r = bin(&["synth", "--spec", p(&spec), "-o", p(out)]);
        assert!(r.status.success(), "{}", stderr(&r));
    }
    for name in ["script.pgm", "script.truth.json"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap()
        );
    }
}

#[test]
fn out_of_bounds_spec_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    fs::write(
        &spec,
        r#"{"image_size":[20,10],"pen_width":2,"strokes":[[[1,1],[25,5]]]}"#,
    )
    .unwrap();
    let r = bin(&[
        "synth",
        "--spec",
        p(&spec),
        "-o",
        p(&dir.path().join("out")),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains("strokes[0][1]"));
}

#[test]
fn corpus_writes_one_pair_per_item() {
    let dir = tempfile::tempdir().unwrap();
    let r = bin(&[
        "synth",
        "--corpus",
        "50",
        "--seed",
        "4",
        "-o",
        p(dir.path()),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.ends_with(".pgm")).count(), 50);
    assert_eq!(
        names.iter().filter(|n| n.ends_with(".truth.json")).count(),
        50
    );
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path, env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_stroketrace"));
        cmd.args(["synth", "--corpus", "2", "-o", p(out)]);
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        cmd.env_remove("STROKETRACE_SEED");
        if let Some(s) = env {
            cmd.env("STROKETRACE_SEED", s);
        }
        assert!(cmd.status().unwrap().success());
        fs::read(out.join("item_001.truth.json")).unwrap()
    };
    let from_env = run(&dir.path().join("env"), Some("77"), None);
    let from_flag = run(&dir.path().join("flag"), None, Some("77"));
    let default = run(&dir.path().join("default"), None, None);
    assert_eq!(from_env, from_flag);
    assert_ne!(from_env, default);
}

#[test]
fn eval_identical_traces_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let r = bin(&["synth", "--corpus", "1", "-o", p(dir.path())]);
    assert!(r.status.success());
    let truth = dir.path().join("item_000.truth.json");
    let r = bin(&["eval", p(&truth), p(&truth)]);
    assert!(r.status.success(), "{}", stderr(&r));
    let report: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(report["mean_dtw_per_point"], 0.0);
    assert_eq!(report["direction_accuracy"], 1.0);
    assert_eq!(report["unmatched_truth"].as_array().unwrap().len(), 0);
}

#[test]
fn eval_rejects_mismatched_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    fs::write(&a, OnlineTrace::new("a", (10, 10), 2.0).to_json()).unwrap();
    fs::write(&b, OnlineTrace::new("b", (12, 10), 2.0).to_json()).unwrap();
    let r = bin(&["eval", p(&a), p(&b)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains("image_size"));
}

#[test]
fn eval_reports_schema_errors_with_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let broken = dir.path().join("broken.json");
    fs::write(&a, OnlineTrace::new("a", (10, 10), 2.0).to_json()).unwrap();
    fs::write(
        &broken,
        r#"{"source":"x","image_size":[10,10],"avg_width":2,"timing":"synthetic-ticks","strokes":[{"id":0}]}"#,
    )
    .unwrap();
    let r = bin(&["eval", p(&a), p(&broken)]);
    assert_eq!(r.status.code(), Some(2));
    let msg = stderr(&r);
    assert!(
        msg.contains("broken.json") && msg.contains("points"),
        "{msg}"
    );
}

#[test]
fn batch_eval_has_one_row_per_item() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth");
    let rec = dir.path().join("rec");
    assert!(
        bin(&["synth", "--corpus", "5", "--seed", "3", "-o", p(&truth)])
            .status
            .success()
    );
    fs::create_dir(&rec).unwrap();
    for i in 0..5 {
        let img = truth.join(format!("item_{i:03}.pgm"));
        let out = rec.join(format!("item_{i:03}.json"));
        assert!(bin(&["convert", p(&img), "-o", p(&out)]).status.success());
    }
    let r = bin(&["eval", p(&truth), p(&rec)]);
    assert!(r.status.success(), "{}", stderr(&r));
    let report: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 5);
    assert_eq!(report["summary"]["items"], 5);
}

#[test]
fn render_draws_every_stroke() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_bar(dir.path());
    let json = dir.path().join("t.json");
    let svg = dir.path().join("t.svg");
    assert!(bin(&["convert", p(&input), "-o", p(&json)])
        .status
        .success());
    let r = bin(&["render", p(&json), "-o", p(&svg), "--underlay", p(&input)]);
    assert!(r.status.success(), "{}", stderr(&r));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<path").count(), 1);
    assert!(text.contains("viewBox=\"0 0 120 60\""));
}

#[test]
fn bench_summary_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for (out, jobs) in [(&a, "1"), (&b, "0")] {
        let r = bin(&[
            "bench",
            "-n",
            "8",
            "--seed",
            "5",
            "--jobs",
            jobs,
            "-o",
            p(out),
        ]);
        assert!(r.status.success(), "{}", stderr(&r));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    let summary = &report["summary"];
    for key in [
        "items",
        "stroke_count_exact_fraction",
        "direction_accuracy",
        "mean_dtw_per_point",
        "dtw_within_pen_width_fraction",
    ] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    assert_eq!(report["rows"].as_array().unwrap().len(), 8);
}

#[test]
fn invalid_flags_are_rejected() {
    let r = bin(&["convert", "x.pgm", "--truck-scale", "0"]);
    assert_eq!(r.status.code(), Some(2));
    let r = bin(&["convert", "x.pgm", "-k", "0"]);
    assert_eq!(r.status.code(), Some(2));
}
