use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, FRAC_PI_8};

use proptest::prelude::*;
use stroketrace::synth::{corpus, stamp_mask, CorpusParams, ScriptSpec};
use stroketrace::tracer::{
    angle_diff, derive_geometry, derive_geometry_with, find_start, initial_heading, trace_all,
    GeometryRatios, SteeringParams, Tracer, TraversalMask, TruckGeometry,
};
use stroketrace::width::{average_width, sectional_widths, WidthMode};
use stroketrace::{BinaryImage, OnlineTrace};

fn geometry_for(img: &BinaryImage) -> TruckGeometry {
    let est = average_width(&sectional_widths(img), WidthMode::HistogramEq1, 3).unwrap();
    derive_geometry(&est, 1.0)
}

/// Truck sized from the known pen width, bypassing the row-run estimate that
/// over-reads horizontal strokes.
fn pen_geometry(pen: f64) -> TruckGeometry {
    derive_geometry_with(pen, 1.0, &GeometryRatios::default())
}

fn draw(size: (usize, usize), pen: f64, strokes: Vec<Vec<(f64, f64)>>) -> BinaryImage {
    stamp_mask(&ScriptSpec::new(size, pen, strokes))
}

/// Trace, final mask and every tick's `(stroke, tick, heading)`.
fn run(
    img: &BinaryImage,
    geom: &TruckGeometry,
) -> (OnlineTrace, TraversalMask, Vec<(usize, u64, f64)>) {
    let mut headings = Vec::new();
    let (trace, mask) = Tracer::new(*geom, SteeringParams::default()).run_observed(img, |ev| {
        headings.push((ev.stroke, ev.state.ticks, ev.state.heading))
    });
    (trace, mask, headings)
}

fn direction(trace: &OnlineTrace, id: usize) -> f64 {
    let pts = &trace.strokes[id].points;
    let (a, b) = (pts.first().unwrap(), pts.last().unwrap());
    (b.y - a.y).atan2(b.x - a.x)
}

#[test]
fn horizontal_bar_direction_follows_axis() {
    let img = draw((120, 30), 4.0, vec![vec![(10.0, 15.0), (110.0, 15.0)]]);
    let trace = trace_all(&img, &pen_geometry(4.0));
    assert_eq!(trace.strokes.len(), 1);
    assert!(angle_diff(direction(&trace, 0), 0.0).abs() <= FRAC_PI_8);
}

#[test]
fn vertical_bar_is_traced_downward() {
    let img = draw((30, 120), 4.0, vec![vec![(15.0, 10.0), (15.0, 110.0)]]);
    let g = geometry_for(&img);
    let mask = TraversalMask::new(&img);
    let start = find_start(&img, &mask).unwrap();
    assert_eq!(initial_heading(&img, &mask, start, &g), FRAC_PI_2);
    let trace = trace_all(&img, &g);
    assert_eq!(trace.strokes.len(), 1);
    assert!(angle_diff(direction(&trace, 0), FRAC_PI_2).abs() <= FRAC_PI_8);
}

#[test]
fn forty_by_three_bar() {
    let mut img = BinaryImage::empty(50, 9);
    for y in 3..6 {
        for x in 5..45 {
            img.set(x, y, true);
        }
    }
    let trace = trace_all(&img, &pen_geometry(3.0));
    assert_eq!(trace.strokes.len(), 1);
    let pts = &trace.strokes[0].points;
    assert!(pts.last().unwrap().x > pts[0].x);
    assert!(pts.windows(2).all(|w| w[1].x >= w[0].x - 1.0));
}

#[test]
fn crossing_keeps_heading() {
    let img = draw(
        (100, 100),
        4.0,
        vec![
            vec![(10.0, 50.0), (90.0, 50.0)],
            vec![(50.0, 10.0), (50.0, 90.0)],
        ],
    );
    let (trace, _, headings) = run(&img, &pen_geometry(4.0));
    // The horizontal arm starts lower in scan order than the vertical's top.
    let horizontal = trace
        .strokes
        .iter()
        .position(|s| (s.points[0].y - 50.0).abs() < 4.0 && s.points[0].x < 20.0)
        .expect("a stroke entering from the left");
    let pts = &trace.strokes[horizontal].points;
    assert!(
        pts.last().unwrap().x > 80.0,
        "stroke stopped at x = {}",
        pts.last().unwrap().x
    );
    let inside: Vec<f64> = headings
        .iter()
        .zip(pts.iter().skip(1))
        .filter(|(h, p)| h.0 == horizontal && (p.x - 50.0).abs() < 15.0)
        .map(|(h, _)| h.2)
        .collect();
    let before = inside.first().copied().unwrap_or(0.0);
    let after = inside.last().copied().unwrap_or(0.0);
    assert!(angle_diff(after, before).abs() < FRAC_PI_6);
}

#[test]
fn l_shape_is_one_stroke_covering_most_ink() {
    let img = draw(
        (80, 80),
        4.0,
        vec![vec![(10.0, 10.0), (10.0, 70.0), (70.0, 70.0)]],
    );
    let (trace, mask, _) = run(&img, &pen_geometry(4.0));
    assert_eq!(trace.strokes.len(), 1);
    assert!(mask.visited_count() as f64 >= 0.9 * img.foreground_count() as f64);
}

#[test]
fn two_bars_two_strokes() {
    let img = draw(
        (100, 60),
        4.0,
        vec![
            vec![(10.0, 15.0), (90.0, 15.0)],
            vec![(10.0, 45.0), (90.0, 45.0)],
        ],
    );
    assert_eq!(trace_all(&img, &pen_geometry(4.0)).strokes.len(), 2);
}

#[test]
fn four_disjoint_strokes() {
    let img = draw(
        (200, 100),
        4.0,
        vec![
            vec![(10.0, 20.0), (40.0, 25.0), (60.0, 60.0)],
            vec![(80.0, 15.0), (80.0, 80.0)],
            vec![(110.0, 30.0), (150.0, 30.0), (170.0, 50.0)],
            vec![(120.0, 80.0), (190.0, 85.0)],
        ],
    );
    let trace = trace_all(&img, &pen_geometry(4.0));
    assert_eq!(trace.strokes.len(), 4);
}

#[test]
fn clean_corpus_masks_are_covered() {
    let params = CorpusParams {
        pen_widths: (3, 6),
        ..CorpusParams::default()
    };
    let (mut fg, mut seen) = (0usize, 0usize);
    for it in corpus(&params, 30, 21).unwrap() {
        let img = stamp_mask(&it.spec);
        let (_, mask, _) = run(&img, &geometry_for(&img));
        fg += img.foreground_count();
        seen += mask.visited_count();
    }
    assert!(seen as f64 >= 0.95 * fg as f64, "{seen} of {fg}");
}

fn scribble() -> impl Strategy<Value = (ScriptSpec, u32)> {
    (
        2u32..7,
        prop::collection::vec(
            prop::collection::vec((5.0f64..115.0, 5.0f64..75.0), 2..6),
            1..4,
        ),
    )
        .prop_map(|(pen, lines)| (ScriptSpec::new((120, 80), pen as f64, lines), pen))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn traversal_invariants((spec, _) in scribble()) {
        let img = stamp_mask(&spec);
        let g = geometry_for(&img);
        let (trace, mask, headings) = run(&img, &g);

        // Visited pixels are always ink.
        for (i, &v) in mask.as_slice().iter().enumerate() {
            prop_assert!(!v || img.mask()[i]);
        }
        // Points stay within one track width of ink.
        let ink: Vec<(f64, f64)> = (0..img.height())
            .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
            .filter(|&(x, y)| img.get(x, y))
            .map(|(x, y)| (x as f64, y as f64))
            .collect();
        for s in &trace.strokes {
            for p in &s.points {
                let d = ink.iter().map(|q| ((p.x - q.0).powi(2) + (p.y - q.1).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
                prop_assert!(d <= g.track_width + 1e-9, "point ({}, {}) is {} from ink", p.x, p.y, d);
            }
        }
        // Heading never turns more than the clamp between ticks.
        for w in headings.windows(2) {
            if w[0].0 == w[1].0 && w[1].1 == w[0].1 + 1 {
                prop_assert!(angle_diff(w[1].2, w[0].2).abs() <= FRAC_PI_6 + 1e-9);
            }
        }
        // Same input, same bytes.
        prop_assert_eq!(trace.to_json(), trace_all(&img, &g).to_json());
    }

    #[test]
    fn separated_blobs_give_one_stroke_each(pen in 3u32..7, xs in prop::collection::btree_set(0usize..6, 1..6)) {
        // Short vertical strokes in separate columns; each is a component.
        let lines: Vec<Vec<(f64, f64)>> = xs.iter().map(|&c| {
            let x = 15.0 + 30.0 * c as f64;
            vec![(x, 10.0), (x + 4.0, 60.0)]
        }).collect();
        let img = draw((200, 70), pen as f64, lines.clone());
        let trace = trace_all(&img, &geometry_for(&img));
        prop_assert_eq!(trace.strokes.len(), lines.len());
    }
}

#[test]
fn turning_off_a_bend_stays_near_ink() {
    let spec = ScriptSpec::new(
        (120, 80),
        5.0,
        vec![
            vec![(97.83, 69.94), (63.17, 22.53), (13.33, 44.22)],
            vec![(28.30, 20.32), (32.40, 14.50)],
            vec![(74.06, 36.59), (89.16, 13.21), (32.59, 60.63)],
        ],
    );
    let img = stamp_mask(&spec);
    let g = geometry_for(&img);
    let (trace, _, _) = run(&img, &g);
    let r = g.track_width;
    for p in trace.strokes.iter().flat_map(|s| &s.points) {
        let near = (0..img.height())
            .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
            .any(|(x, y)| img.get(x, y) && (p.x - x as f64).hypot(p.y - y as f64) <= r);
        assert!(near, "point ({}, {}) strays from ink", p.x, p.y);
    }
}
