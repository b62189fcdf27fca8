use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use stroketrace::binarize::binarize;
use stroketrace::metrics::{evaluate_with, summarize, CorpusRow};
use stroketrace::pipeline::convert_observed;
use stroketrace::raster::median_filter_5x5;
use stroketrace::synth::{corpus, rasterize, CorpusParams, ScriptSpec};
use stroketrace::trace_model::SvgOptions;
use stroketrace::tracer::TraversalMask;
use stroketrace::{convert, load_image, BinaryImage, GrayImage, OnlineTrace};

use crate::args::{BenchArgs, ConvertArgs, EvalArgs, RenderArgs, SynthArgs};
use crate::output::{create_dir, emit, read, write_atomic};
use crate::CliError;

fn to_json_pretty<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    bytes
}

/// Unvisited ink in mid gray, consumed ink in black.
fn traversal_frame(binary: &BinaryImage, visited: &TraversalMask) -> GrayImage {
    let pixels = binary
        .mask()
        .iter()
        .zip(visited.as_slice())
        .map(|(&ink, &seen)| match (ink, seen) {
            (_, true) => 0,
            (true, false) => 170,
            (false, false) => 255,
        })
        .collect();
    GrayImage::new(binary.width(), binary.height(), pixels).expect("frame matches mask size")
}

pub fn convert_cmd(args: &ConvertArgs) -> Result<(), CliError> {
    let img = load_image(&args.input)?;
    let config = args.pipeline.config();
    let mut snapshots = Vec::new();
    let every = args.snapshot_every;
    let keep_frames = args.debug_stages.is_some() && every > 0;
    let conv = convert_observed(&img, &args.input.display().to_string(), &config, |ev| {
        if keep_frames && ev.global_tick % every == 0 {
            snapshots.push((ev.global_tick, ev.mask.clone()));
        }
    });
    conv.trace
        .validate()
        .map_err(|e| CliError::Internal(format!("converted trace is inconsistent: {e}")))?;

    // Everything is computed before the first byte is written.
    let json = conv.trace.to_json();
    let svg = args.svg.as_ref().map(|_| {
        conv.trace.to_svg(&SvgOptions {
            underlay: Some(&conv.binary),
            stroke_width: None,
        })
    });
    let csv = args.csv.as_ref().map(|_| conv.trace.to_csv());

    if let Some(dir) = &args.debug_stages {
        create_dir(dir)?;
        let binary = &conv.binary;
        write_atomic(&dir.join("a_original.pgm"), &img.to_pgm())?;
        write_atomic(&dir.join("a_filtered.pgm"), &conv.filtered.to_pgm())?;
        write_atomic(&dir.join("b_binarized.pgm"), &conv.binary.to_pgm())?;
        write_atomic(
            &dir.join("histogram.json"),
            &to_json_pretty(&conv.histogram),
        )?;
        for (tick, mask) in &snapshots {
            let frame = traversal_frame(binary, mask);
            write_atomic(
                &dir.join(format!("c_traversal_{tick:06}.pgm")),
                &frame.to_pgm(),
            )?;
        }
        write_atomic(
            &dir.join("d_traversed.pgm"),
            &traversal_frame(binary, &conv.visited).to_pgm(),
        )?;
        let overlay = conv.trace.to_svg(&SvgOptions {
            underlay: Some(&conv.binary),
            stroke_width: None,
        });
        write_atomic(&dir.join("e_overlay.svg"), &overlay)?;
        if let (Some(w), Some(g)) = (&conv.width, &conv.geometry) {
            let info = serde_json::json!({ "width": w, "geometry": g });
            write_atomic(&dir.join("geometry.json"), &to_json_pretty(&info))?;
        }
    }
    if let (Some(path), Some(bytes)) = (&args.svg, &svg) {
        write_atomic(path, bytes)?;
    }
    if let (Some(path), Some(bytes)) = (&args.csv, &csv) {
        write_atomic(path, bytes)?;
    }
    emit(args.output.as_deref(), &json)?;
    eprintln!(
        "{}: {} stroke(s), average width {:.2}",
        args.input.display(),
        conv.trace.strokes.len(),
        conv.trace.avg_width
    );
    Ok(())
}

fn spec_stem(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = name.strip_suffix(".json").unwrap_or(&name);
    name.strip_suffix(".spec").unwrap_or(name).to_owned()
}

pub fn synth_cmd(args: &SynthArgs) -> Result<(), CliError> {
    let mut outputs: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    let dir = &args.out_dir;
    if let Some(path) = &args.spec {
        let spec: ScriptSpec =
            serde_json::from_slice(&read(path)?).map_err(|e| stroketrace::Error::Schema {
                field: "spec".into(),
                message: e.to_string(),
            })?;
        let (img, truth) = rasterize(&spec)?;
        let stem = spec_stem(path);
        outputs.push((dir.join(format!("{stem}.pgm")), img.to_pgm()));
        outputs.push((dir.join(format!("{stem}.truth.json")), truth.to_json()));
    } else {
        let n = args.corpus.unwrap_or(0);
        for item in corpus(&CorpusParams::default(), n, args.seed)? {
            let stem = format!("item_{:03}", item.index);
            outputs.push((dir.join(format!("{stem}.pgm")), item.image.to_pgm()));
            outputs.push((dir.join(format!("{stem}.truth.json")), item.truth.to_json()));
            outputs.push((
                dir.join(format!("{stem}.spec.json")),
                to_json_pretty(&item.spec),
            ));
        }
    }
    create_dir(dir)?;
    for (path, bytes) in &outputs {
        write_atomic(path, bytes)?;
    }
    eprintln!("wrote {} file(s) to {}", outputs.len(), dir.display());
    Ok(())
}

fn load_trace(path: &Path) -> Result<OnlineTrace, CliError> {
    let trace = OnlineTrace::from_json(&read(path)?).map_err(|e| CliError::InFile {
        path: path.to_owned(),
        source: e,
    })?;
    trace.validate().map_err(|e| CliError::InFile {
        path: path.to_owned(),
        source: e,
    })?;
    Ok(trace)
}

pub fn eval_cmd(args: &EvalArgs) -> Result<(), CliError> {
    if args.truth.is_dir() {
        let mut names: Vec<String> = fs::read_dir(&args.truth)
            .map_err(|e| CliError::io(&args.truth, e))?
            .filter_map(|entry| entry.ok())
            .filter_map(|entry| {
                entry
                    .file_name()
                    .to_str()
                    .and_then(|n| n.strip_suffix(".truth.json"))
                    .map(str::to_owned)
            })
            .collect();
        names.sort();
        let mut rows = Vec::with_capacity(names.len());
        for name in names {
            let truth = load_trace(&args.truth.join(format!("{name}.truth.json")))?;
            let recovered = load_trace(&args.recovered.join(format!("{name}.json")))?;
            let report = evaluate_with(&truth, &recovered, args.match_threshold_scale)?;
            rows.push(CorpusRow {
                item: name,
                // Synthetic truth records the pen width as its average width.
                pen_width: Some(truth.avg_width),
                report,
            });
        }
        emit(args.output.as_deref(), &to_json_pretty(&summarize(rows)))
    } else {
        let truth = load_trace(&args.truth)?;
        let recovered = load_trace(&args.recovered)?;
        let report = evaluate_with(&truth, &recovered, args.match_threshold_scale)?;
        emit(args.output.as_deref(), &to_json_pretty(&report))
    }
}

pub fn render_cmd(args: &RenderArgs) -> Result<(), CliError> {
    let trace = load_trace(&args.trace)?;
    let underlay = match &args.underlay {
        Some(path) => {
            let img = load_image(path)?;
            if (img.width(), img.height()) != trace.image_size {
                return Err(stroketrace::Error::Invalid {
                    field: "underlay".into(),
                    message: format!(
                        "image is {}x{} but the trace is {}x{}",
                        img.width(),
                        img.height(),
                        trace.image_size.0,
                        trace.image_size.1
                    ),
                }
                .into());
            }
            Some(binarize(&median_filter_5x5(&img), false).0)
        }
        None => None,
    };
    let svg = trace.to_svg(&SvgOptions {
        underlay: underlay.as_ref(),
        stroke_width: args.stroke_width,
    });
    write_atomic(&args.output, &svg)
}

pub fn bench_cmd(args: &BenchArgs) -> Result<(), CliError> {
    let config = args.pipeline.config();
    let started = Instant::now();
    let items = corpus(&CorpusParams::default(), args.n, args.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let results: Vec<_> = pool.install(|| {
        items
            .par_iter()
            .map(|item| {
                let t0 = Instant::now();
                let conv = convert(
                    &item.image,
                    &format!("synthetic:{}", item.spec.seed),
                    &config,
                );
                let report = evaluate_with(&item.truth, &conv.trace, args.match_threshold_scale);
                (item, report, t0.elapsed())
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    for (item, report, elapsed) in results {
        let report = report.map_err(|e| CliError::Internal(format!("item {}: {e}", item.index)))?;
        if !args.quiet {
            eprintln!(
                "item {:03} {:>4}x{:<4} pen {} strokes {}/{} {:>8.2} ms",
                item.index,
                item.spec.image_size.0,
                item.spec.image_size.1,
                item.spec.pen_width,
                report.recovered_strokes,
                report.truth_strokes,
                elapsed.as_secs_f64() * 1e3
            );
        }
        rows.push(CorpusRow {
            item: format!("item_{:03}", item.index),
            pen_width: Some(item.spec.pen_width),
            report,
        });
    }
    let report = summarize(rows);
    if !args.quiet {
        eprintln!(
            "bench: {} items in {:.2} s",
            report.summary.items,
            started.elapsed().as_secs_f64()
        );
    }
    match &args.output {
        Some(path) => {
            write_atomic(path, &to_json_pretty(&report))?;
            if args.quiet {
                Ok(())
            } else {
                emit(None, &to_json_pretty(&report.summary))
            }
        }
        None => emit(None, &to_json_pretty(&report)),
    }
}
