//! Acceptance criteria for the converter, each checked end to end and
//! reported as an [`Outcome`].

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stroketrace::binarize::binarize;
use stroketrace::metrics::{dtw, evaluate};
use stroketrace::raster::{median_filter_5x5, BinaryImage, GrayImage};
use stroketrace::synth::{rasterize, stamp_mask, ScriptSpec};
use stroketrace::tracer::{find_start, TraversalMask};
use stroketrace::width::{sectional_widths, WidthMode};
use stroketrace::{convert, PipelineConfig, Point};
use stroketrace_oracles as oracle;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: &'static str,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Runs a `stroketrace` command in-process and times it.
fn stroketrace(args: &[&str]) -> Duration {
    let t0 = Instant::now();
    let argv = std::iter::once("stroketrace").chain(args.iter().copied());
    if let Err(e) = stroketrace_cli::run(argv) {
        panic!("stroketrace {}: {e}", args.join(" "));
    }
    t0.elapsed()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const ORACLE_INSTANCES: usize = 250;

pub fn oracle_exactness() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures: Vec<String> = Vec::new();
    let mut total = 0;

    for i in 0..ORACLE_INSTANCES {
        let (w, h) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let px: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
        let img = GrayImage::new(w, h, px.clone()).unwrap();
        if median_filter_5x5(&img).pixels() != &oracle::median_5x5(w, h, &px)[..] {
            failures.push(format!("median #{i}"));
        }
        total += 1;
    }

    for i in 0..ORACLE_INSTANCES {
        let (w, h) = (rng.random_range(1..=32), rng.random_range(1..=32));
        let density: f64 = rng.random();
        let m: Vec<bool> = (0..w * h).map(|_| rng.random_bool(density)).collect();
        let sw = sectional_widths(&BinaryImage::new(w, h, m.clone()).unwrap());
        if sw.per_row != oracle::row_runs(w, h, &m) {
            failures.push(format!("sectional_widths #{i}"));
        }
        total += 1;
    }

    for i in 0..ORACLE_INSTANCES {
        let (w, h) = (rng.random_range(1..=24), rng.random_range(1..=24));
        let m: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.3)).collect();
        let img = BinaryImage::new(w, h, m.clone()).unwrap();
        let mut visited = TraversalMask::new(&img);
        let fraction: f64 = rng.random();
        for y in 0..h {
            for x in 0..w {
                if rng.random_bool(fraction) {
                    visited.mark(&img, x, y);
                }
            }
        }
        if find_start(&img, &visited) != oracle::first_unvisited(w, h, &m, visited.as_slice()) {
            failures.push(format!("find_start #{i}"));
        }
        total += 1;
    }

    for i in 0..ORACLE_INSTANCES {
        let seq = |rng: &mut ChaCha8Rng| -> Vec<(f64, f64)> {
            let n = rng.random_range(1..=8);
            (0..n)
                .map(|_| (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)))
                .collect()
        };
        let (a, b) = (seq(&mut rng), seq(&mut rng));
        let pts = |s: &[(f64, f64)]| -> Vec<Point> {
            s.iter()
                .enumerate()
                .map(|(t, &(x, y))| Point::new(x, y, t as u64))
                .collect()
        };
        let fast = dtw(&pts(&a), &pts(&b));
        let slow = oracle::dtw_exhaustive(&a, &b);
        // Same sums in a different association order.
        if (fast - slow).abs() > 1e-9 * slow.max(1.0) {
            failures.push(format!("dtw #{i}: {fast} vs {slow}"));
        }
        total += 1;
    }

    for i in 0..ORACLE_INSTANCES {
        let (w, h) = (rng.random_range(4..=48), rng.random_range(4..=48));
        let pen = rng.random_range(1.0..6.0);
        let lines: Vec<Vec<(f64, f64)>> = (0..rng.random_range(1..=3))
            .map(|_| {
                (0..rng.random_range(1..=5))
                    .map(|_| {
                        (
                            rng.random_range(0.0..(w - 1) as f64),
                            rng.random_range(0.0..(h - 1) as f64),
                        )
                    })
                    .collect()
            })
            .collect();
        let mut spec = ScriptSpec::new((w, h), pen, lines.clone());
        spec.jitter_sigma = 0.0;
        spec.seed = i as u64;
        let expected = oracle::polyline_ink(w, h, &lines, pen / 2.0);
        let (img, _) = rasterize(&spec).unwrap();
        let ink: Vec<bool> = img.pixels().iter().map(|&v| v == spec.foreground).collect();
        if stamp_mask(&spec).mask() != &expected[..] || ink != expected {
            failures.push(format!("rasterize #{i}"));
        }
        total += 1;
    }

    let elapsed = started.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(30);
    Outcome {
        id: "1",
        title: "oracle exactness",
        pass,
        detail: format!(
            "{total} instances across median/sectional_widths/find_start/dtw/rasterize, {} mismatches{}, {:.2} s (limit 30 s)",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    }
}

pub fn binarization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut between, mut midpoint, mut n) = (0, 0, 0);
    let mut first_bad = None;
    for i in 0..100 {
        // Modes stay three jitter deviations inside the intensity range so
        // clamping does not pile up a third peak at 0 or 255.
        let dark: u8 = rng.random_range(24..=160);
        let light: u8 = (dark as u16 + rng.random_range(64..=120)).min(231) as u8;
        let (w, h) = (rng.random_range(64..=200), rng.random_range(48..=120));
        let lines: Vec<Vec<(f64, f64)>> = (0..rng.random_range(2..=5))
            .map(|_| {
                (0..rng.random_range(2..=5))
                    .map(|_| {
                        (
                            rng.random_range(4.0..(w - 4) as f64),
                            rng.random_range(4.0..(h - 4) as f64),
                        )
                    })
                    .collect()
            })
            .collect();
        let mut spec = ScriptSpec::new((w, h), rng.random_range(3..=6) as f64, lines);
        spec.foreground = dark;
        spec.background = light;
        spec.jitter_sigma = 8.0;
        spec.seed = i;
        let (img, _) = rasterize(&spec).unwrap();
        let (_, report) = binarize(&img, false);
        n += 1;
        let t = report.threshold;
        let ok_between = dark < t && t < light;
        let ok_mid = match (report.peak_lo, report.peak_hi) {
            (Some(lo), Some(hi)) => t as u16 == (lo as u16 + hi as u16) / 2,
            _ => false,
        };
        between += ok_between as usize;
        midpoint += ok_mid as usize;
        if (!ok_between || !ok_mid) && first_bad.is_none() {
            first_bad = Some(format!(
                "image {i}: modes {dark}/{light}, peaks {:?}/{:?}, T {t}",
                report.peak_lo, report.peak_hi
            ));
        }
    }
    Outcome {
        id: "2",
        title: "binarization threshold",
        pass: between == n && midpoint == n,
        detail: format!(
            "{between}/{n} thresholds strictly between modes, {midpoint}/{n} equal floor of peak midpoint{}",
            first_bad.map(|b| format!("; first miss: {b}")).unwrap_or_default()
        ),
    }
}

pub fn width_estimates() -> Outcome {
    let mut worst_axis: f64 = 0.0;
    let mut worst_diag: f64 = 0.0;
    let mut misses = Vec::new();
    for pen in 2..=6u32 {
        let pw = pen as f64;
        let cases = [
            (
                "vertical",
                1.0,
                vec![
                    vec![(30.0, 10.0), (30.0, 110.0)],
                    vec![(70.3, 10.0), (70.3, 110.0)],
                    vec![(110.5, 10.0), (110.5, 110.0)],
                ],
            ),
            (
                "diagonal",
                1.5,
                vec![
                    vec![(10.0, 10.0), (90.0, 90.0)],
                    vec![(50.0, 10.0), (130.0, 90.0)],
                    vec![(90.3, 10.0), (150.3, 70.0)],
                ],
            ),
        ];
        for (kind, tolerance, lines) in cases {
            let mut spec = ScriptSpec::new((160, 120), pw, lines);
            spec.seed = pen as u64;
            let (img, _) = rasterize(&spec).unwrap();
            let conv = convert(&img, kind, &PipelineConfig::default());
            let est = conv.width.expect("strokes have ink");
            assert_eq!(est.mode, WidthMode::HistogramEq1);
            let err = (est.avg_width - pw).abs();
            if kind == "vertical" {
                worst_axis = worst_axis.max(err);
            } else {
                worst_diag = worst_diag.max(err);
            }
            if err > tolerance {
                misses.push(format!("{kind} pen {pen}: {:.2}", est.avg_width));
            }
        }
    }
    Outcome {
        id: "3",
        title: "width estimate",
        pass: misses.is_empty(),
        detail: format!(
            "worst error axis-aligned {worst_axis:.2} px (tol 1.0), diagonal {worst_diag:.2} px (tol 1.5){}",
            if misses.is_empty() { String::new() } else { format!("; out of tolerance: {}", misses.join(", ")) }
        ),
    }
}

pub struct BenchRun {
    report: serde_json::Value,
    bytes: Vec<u8>,
    elapsed: Duration,
}

/// Runs the default benchmark (N=50, seed 42) into `dir/name`.
pub fn run_bench(dir: &Path, name: &str) -> BenchRun {
    let out = dir.join(name);
    let elapsed = stroketrace(&[
        "bench",
        "-n",
        "50",
        "--seed",
        "42",
        "--quiet",
        "-o",
        p(&out),
    ]);
    let bytes = fs::read(&out).unwrap();
    BenchRun {
        report: serde_json::from_slice(&bytes).unwrap(),
        bytes,
        elapsed,
    }
}

pub fn corpus_scores(bench: &BenchRun) -> Outcome {
    let s = &bench.report["summary"];
    let count = s["stroke_count_exact_fraction"].as_f64().unwrap();
    let direction = s["direction_accuracy"].as_f64().unwrap_or(0.0);
    let within = s["dtw_within_pen_width_fraction"].as_f64().unwrap_or(0.0);
    Outcome {
        id: "4",
        title: "end-to-end corpus (N=50, seed 42)",
        pass: count >= 0.80 && direction >= 0.90 && within >= 0.85,
        detail: format!(
            "stroke count exact {count:.2} (>= 0.80), direction accuracy {direction:.3} (>= 0.90), per-item DTW within pen width {within:.2} (>= 0.85)"
        ),
    }
}

pub fn four_strokes() -> Outcome {
    // Four separate bounded-turn strokes, each written from its top end.
    let strokes = vec![
        vec![(24.0, 18.0), (22.0, 50.0), (26.0, 80.0), (44.0, 96.0)],
        vec![(70.0, 20.0), (88.0, 55.0), (108.0, 92.0)],
        vec![(140.0, 24.0), (150.0, 60.0), (165.0, 88.0), (186.0, 100.0)],
        vec![(212.0, 16.0), (214.0, 60.0), (210.0, 102.0)],
    ];
    let mut spec = ScriptSpec::new((240, 120), 4.0, strokes);
    spec.seed = 4;
    let (img, truth) = rasterize(&spec).unwrap();
    let conv = convert(&img, "four", &PipelineConfig::default());
    let report = evaluate(&truth, &conv.trace).unwrap();
    let correct = report
        .matched_pairs
        .iter()
        .filter(|m| m.direction_correct)
        .count();
    Outcome {
        id: "5",
        title: "four disjoint strokes",
        pass: report.recovered_strokes == 4 && report.matched_pairs.len() == 4 && correct == 4,
        detail: format!(
            "recovered {} strokes, {} matched, {} directions correct",
            report.recovered_strokes,
            report.matched_pairs.len(),
            correct
        ),
    }
}

/// Writes a 512x256 five-stroke scan into `dir`.
pub fn large_image(dir: &Path) -> PathBuf {
    let strokes = vec![
        vec![(30.0, 30.0), (60.0, 120.0), (90.0, 220.0)],
        vec![(130.0, 20.0), (180.0, 90.0), (150.0, 200.0), (200.0, 235.0)],
        vec![(250.0, 40.0), (260.0, 130.0), (320.0, 180.0)],
        vec![(360.0, 30.0), (400.0, 110.0), (380.0, 220.0)],
        vec![(450.0, 25.0), (470.0, 120.0), (490.0, 230.0)],
    ];
    let mut spec = ScriptSpec::new((512, 256), 5.0, strokes);
    spec.noise = 0.02;
    spec.seed = 7;
    let (img, _) = rasterize(&spec).unwrap();
    let path = dir.join("large.pgm");
    img.save(&path).unwrap();
    path
}

pub fn determinism(dir: &Path, input: &Path, first: &BenchRun, second: &BenchRun) -> Outcome {
    let run = |name: &str| {
        let json = dir.join(format!("{name}.json"));
        let svg = dir.join(format!("{name}.svg"));
        stroketrace(&["convert", p(input), "-o", p(&json), "--svg", p(&svg)]);
        (fs::read(json).unwrap(), fs::read(svg).unwrap())
    };
    let (a, b) = (run("first"), run("second"));
    let convert_same = a == b;
    let bench_same = first.bytes == second.bytes;
    Outcome {
        id: "6",
        title: "determinism",
        pass: convert_same && bench_same,
        detail: format!(
            "convert outputs identical: {convert_same}; bench reports identical: {bench_same} ({} bytes)",
            first.bytes.len()
        ),
    }
}

pub fn performance(dir: &Path, input: &Path, bench: &BenchRun) -> Outcome {
    let elapsed = stroketrace(&["convert", p(input), "-o", p(&dir.join("timed.json"))]);
    let convert_ok = elapsed < Duration::from_secs(1);
    let bench_ok = bench.elapsed < Duration::from_secs(60);
    Outcome {
        id: "7",
        title: "performance",
        pass: convert_ok && bench_ok,
        detail: format!(
            "convert 512x256 {:.3} s (< 1 s), bench N=50 {:.2} s (< 60 s)",
            elapsed.as_secs_f64(),
            bench.elapsed.as_secs_f64()
        ),
    }
}

/// Runs every criterion, using `dir` for scratch files.
pub fn all(dir: &Path) -> Vec<Outcome> {
    let input = large_image(dir);
    let first = run_bench(dir, "bench_a.json");
    let second = run_bench(dir, "bench_b.json");
    vec![
        oracle_exactness(),
        binarization(),
        width_estimates(),
        corpus_scores(&first),
        four_strokes(),
        determinism(dir, &input, &first, &second),
        performance(dir, &input, &first),
    ]
}
