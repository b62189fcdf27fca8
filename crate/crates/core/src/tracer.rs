//! Virtual-truck traversal of the binarized script.
//!
//! The ink is treated as a road. A truck with two sensing wheels is placed
//! on the first ink pixel in scan order and steers so that both wheels see
//! the same amount of road. Ink under the truck body is consumed as it
//! drives; a stroke ends when there is nothing left to consume ahead, and
//! the next stroke starts at the first unconsumed ink pixel.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::raster::BinaryImage;
use crate::trace_model::{OnlineTrace, Stroke};
use crate::width::WidthEstimate;

/// Ratios tying the truck's parts to its track width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryRatios {
    pub wheel_radius: f64,
    pub step: f64,
    pub lookahead: f64,
    pub axle_offset: f64,
}

impl Default for GeometryRatios {
    fn default() -> Self {
        GeometryRatios {
            wheel_radius: 0.25,
            step: 0.5,
            lookahead: 2.0,
            axle_offset: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruckGeometry {
    /// Distance between the two wheel centers.
    pub track_width: f64,
    /// Radius of each wheel's sensing disk.
    pub wheel_radius: f64,
    /// Advance per tick.
    pub step: f64,
    /// Reach of the probe that tells a gap from a dead end.
    pub lookahead: f64,
    /// How far ahead of the truck's position the wheel axle sits.
    pub axle_offset: f64,
}

/// Steering law and stroke bookkeeping knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringParams {
    /// Heading correction, in radians, for a fully one-sided wheel imbalance.
    pub gain: f64,
    /// Largest heading change allowed in one tick.
    pub max_turn: f64,
    /// Start pixels in a component already visited at least this much are
    /// treated as residue and skipped.
    pub residue_fraction: f64,
    /// When both wheels have at least this fraction of their disk on ink the
    /// truck is at a crossing or blob and keeps its heading.
    pub junction_fill: f64,
}

impl Default for SteeringParams {
    fn default() -> Self {
        SteeringParams {
            gain: 0.35,
            max_turn: PI / 6.0,
            residue_fraction: 0.8,
            junction_fill: 0.9,
        }
    }
}

/// Sizes the truck from the average stroke width with the default ratios.
pub fn derive_geometry(width: &WidthEstimate, truck_scale: f64) -> TruckGeometry {
    derive_geometry_with(width.avg_width, truck_scale, &GeometryRatios::default())
}

pub fn derive_geometry_with(
    avg_width: f64,
    truck_scale: f64,
    ratios: &GeometryRatios,
) -> TruckGeometry {
    let track_width = (truck_scale * avg_width).max(1.0);
    let step = (ratios.step * track_width).max(0.5);
    TruckGeometry {
        track_width,
        wheel_radius: (ratios.wheel_radius * track_width).max(0.5),
        step,
        lookahead: (ratios.lookahead * track_width).max(step),
        axle_offset: ratios.axle_offset * track_width,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruckState {
    pub x: f64,
    pub y: f64,
    /// Radians in `[0, 2π)`; 0 points along +x, π/2 along +y (down).
    pub heading: f64,
    pub ticks: u64,
}

impl TruckState {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        TruckState {
            x,
            y,
            heading: normalize_angle(heading),
            ticks: 0,
        }
    }

    fn wheel_centers(&self, geom: &TruckGeometry) -> ((f64, f64), (f64, f64)) {
        let half = geom.track_width / 2.0;
        let (s, c) = self.heading.sin_cos();
        let (ax, ay) = (self.x + geom.axle_offset * c, self.y + geom.axle_offset * s);
        // left normal is heading - π/2, right normal heading + π/2
        let left = (ax + half * s, ay - half * c);
        let right = (ax - half * s, ay + half * c);
        (left, right)
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Foreground pixels already consumed by emitted strokes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalMask {
    width: usize,
    height: usize,
    visited: Vec<bool>,
    count: usize,
}

impl TraversalMask {
    pub fn new(img: &BinaryImage) -> Self {
        TraversalMask {
            width: img.width(),
            height: img.height(),
            visited: vec![false; img.width() * img.height()],
            count: 0,
        }
    }

    pub fn is_visited(&self, x: usize, y: usize) -> bool {
        self.visited[y * self.width + x]
    }

    pub fn visited_count(&self) -> usize {
        self.count
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.visited
    }

    /// Marks one pixel; background pixels are never marked.
    pub fn mark(&mut self, img: &BinaryImage, x: usize, y: usize) {
        let i = y * self.width + x;
        if img.mask()[i] && !self.visited[i] {
            self.visited[i] = true;
            self.count += 1;
        }
    }

    /// Marks every foreground pixel whose center is within `radius` of
    /// `(cx, cy)`.
    pub fn mark_disk(&mut self, img: &BinaryImage, cx: f64, cy: f64, radius: f64) {
        for (x, y) in disk_pixels(self.width, self.height, cx, cy, radius) {
            self.mark(img, x, y);
        }
    }

    pub fn to_image(&self) -> BinaryImage {
        BinaryImage::new(self.width, self.height, self.visited.clone())
            .expect("mask dimensions are consistent")
    }

    fn unvisited_fg(&self, img: &BinaryImage, x: i64, y: i64) -> bool {
        img.get_signed(x, y) && !self.visited[y as usize * self.width + x as usize]
    }
}

/// In-bounds pixels whose centers lie within `radius` of `(cx, cy)`.
fn disk_pixels(
    width: usize,
    height: usize,
    cx: f64,
    cy: f64,
    radius: f64,
) -> impl Iterator<Item = (usize, usize)> {
    let x0 = (cx - radius).ceil().max(0.0) as i64;
    let x1 = (cx + radius).floor().min(width as f64 - 1.0) as i64;
    let y0 = (cy - radius).ceil().max(0.0) as i64;
    let y1 = (cy + radius).floor().min(height as f64 - 1.0) as i64;
    let r2 = radius * radius;
    (y0..=y1).flat_map(move |y| {
        (x0..=x1).filter_map(move |x| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            (dx * dx + dy * dy <= r2).then_some((x as usize, y as usize))
        })
    })
}

/// Number of pixel centers within `radius` of a pixel center.
/// True when some foreground pixel lies within `radius` of `(cx, cy)`.
fn near_ink(img: &BinaryImage, cx: f64, cy: f64, radius: f64) -> bool {
    disk_pixels(img.width(), img.height(), cx, cy, radius).any(|(x, y)| img.get(x, y))
}

fn disk_area(radius: f64) -> usize {
    let r = radius.floor() as i64;
    let r2 = radius * radius;
    (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| ((dx * dx + dy * dy) as f64) <= r2)
        .count()
}

/// First unvisited foreground pixel scanning rows top to bottom, each row
/// left to right.
pub fn find_start(img: &BinaryImage, mask: &TraversalMask) -> Option<(usize, usize)> {
    find_start_from(img, mask, 0)
}

fn find_start_from(img: &BinaryImage, mask: &TraversalMask, from: usize) -> Option<(usize, usize)> {
    let w = img.width();
    (from..img.mask().len())
        .find(|&i| img.mask()[i] && !mask.visited[i])
        .map(|i| (i % w, i / w))
}

/// Counts unvisited foreground pixels in a straight corridor that starts at
/// `(x, y)`, runs `length` along `heading` and is `2 * half_width` wide.
fn corridor_count(
    img: &BinaryImage,
    mask: &TraversalMask,
    (x, y): (f64, f64),
    heading: f64,
    length: f64,
    half_width: f64,
    stop_at_first: bool,
) -> usize {
    let (s, c) = heading.sin_cos();
    let reach = length + half_width;
    let x0 = (x - reach).floor() as i64;
    let x1 = (x + reach).ceil() as i64;
    let y0 = (y - reach).floor() as i64;
    let y1 = (y + reach).ceil() as i64;
    let mut n = 0;
    for py in y0..=y1 {
        for px in x0..=x1 {
            let (dx, dy) = (px as f64 - x, py as f64 - y);
            let along = dx * c + dy * s;
            let across = -dx * s + dy * c;
            if along >= 0.0
                && along <= length
                && across.abs() <= half_width
                && mask.unvisited_fg(img, px, py)
            {
                n += 1;
                if stop_at_first {
                    return n;
                }
            }
        }
    }
    n
}

pub const HEADING_PROBES: usize = 16;

/// Chooses the starting direction: the probe direction whose corridor holds
/// the most unvisited ink. Ties go to the direction nearest rightward, then
/// nearest downward.
pub fn initial_heading(
    img: &BinaryImage,
    mask: &TraversalMask,
    start: (usize, usize),
    geom: &TruckGeometry,
) -> f64 {
    probe_headings(img, mask, start, geom).0
}

/// Best probe direction and the unvisited ink count along it.
fn probe_headings(
    img: &BinaryImage,
    mask: &TraversalMask,
    start: (usize, usize),
    geom: &TruckGeometry,
) -> (f64, usize) {
    let n = HEADING_PROBES;
    let half_width = (geom.wheel_radius / 2.0).max(0.5);
    let origin = (start.0 as f64, start.1 as f64);
    let circular = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(n - d)
    };
    let (best, count) = (0..n)
        .map(|k| {
            let heading = k as f64 * TAU / n as f64;
            let count = corridor_count(
                img,
                mask,
                origin,
                heading,
                geom.lookahead,
                half_width,
                false,
            );
            (k, count)
        })
        .max_by(|a, b| {
            a.1.cmp(&b.1)
                .then(circular(b.0, 0).cmp(&circular(a.0, 0)))
                .then(circular(b.0, n / 4).cmp(&circular(a.0, n / 4)))
        })
        .unwrap_or((0, 0));
    (best as f64 * TAU / n as f64, count)
}

/// Road pixels (visited or not) under the left and right wheels.
pub fn wheel_balance(
    img: &BinaryImage,
    state: &TruckState,
    geom: &TruckGeometry,
) -> (usize, usize) {
    let (left, right) = state.wheel_centers(geom);
    let count = |(cx, cy): (f64, f64)| {
        disk_pixels(img.width(), img.height(), cx, cy, geom.wheel_radius)
            .filter(|&(x, y)| img.get(x, y))
            .count()
    };
    (count(left), count(right))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Moved(TruckState),
    StrokeEnd,
}

/// Advances the truck by one tick.
///
/// On the road the heading is corrected in proportion to the normalized
/// wheel imbalance and the truck moves one step, consuming the ink under
/// its body. Off the road it keeps its heading and only moves when unvisited
/// ink lies within the lookahead corridor. In both cases the stroke ends
/// when the corridor ahead holds no unvisited ink, which stops the truck at
/// a stroke's end and on road it has already consumed, or when the next
/// position would be more than a track width from any ink.
pub fn steer_step(
    img: &BinaryImage,
    mask: &mut TraversalMask,
    state: &TruckState,
    geom: &TruckGeometry,
    params: &SteeringParams,
) -> StepOutcome {
    let (l, r) = wheel_balance(img, state, geom);
    let mut heading = state.heading;
    let disk = disk_area(geom.wheel_radius) as f64;
    let at_junction = l.min(r) as f64 >= params.junction_fill * disk;
    if l + r > 0 && !at_junction {
        let imbalance = (r as f64 - l as f64) / (r + l) as f64;
        let turn = (params.gain * imbalance).clamp(-params.max_turn, params.max_turn);
        heading = normalize_angle(heading + turn);
    }
    let ahead = corridor_count(
        img,
        mask,
        (state.x, state.y),
        heading,
        geom.lookahead,
        geom.track_width / 2.0,
        true,
    );
    if ahead == 0 {
        return StepOutcome::StrokeEnd;
    }
    let (s, c) = heading.sin_cos();
    let next = TruckState {
        x: state.x + geom.step * c,
        y: state.y + geom.step * s,
        heading,
        ticks: state.ticks + 1,
    };
    if !near_ink(img, next.x, next.y, geom.track_width) {
        return StepOutcome::StrokeEnd;
    }
    mask.mark_disk(img, next.x, next.y, geom.track_width / 2.0);
    StepOutcome::Moved(next)
}

/// Drives one stroke from `start` until it ends. The returned stroke has id
/// 0; callers renumber.
pub fn trace_stroke(
    img: &BinaryImage,
    mask: &mut TraversalMask,
    start: (usize, usize),
    geom: &TruckGeometry,
    params: &SteeringParams,
) -> Stroke {
    trace_stroke_observed(img, mask, start, geom, params, &mut |_, _| {})
}

fn max_ticks(img: &BinaryImage, geom: &TruckGeometry) -> u64 {
    ((20 * img.foreground_count()) as f64 / geom.step).ceil() as u64
}

fn trace_stroke_observed(
    img: &BinaryImage,
    mask: &mut TraversalMask,
    start: (usize, usize),
    geom: &TruckGeometry,
    params: &SteeringParams,
    on_tick: &mut dyn FnMut(&TruckState, &TraversalMask),
) -> Stroke {
    let mid_road = touches_visited(img, mask, start);
    let heading = initial_heading(img, mask, start, geom);
    mask.mark(img, start.0, start.1);
    let forward = drive(img, mask, start, heading, geom, params, on_tick);
    // A start beside consumed road usually sits inside a stroke whose end
    // was eaten by an earlier crossing; finish the other half too.
    let mut backward = Vec::new();
    if mid_road {
        let (heading, count) = probe_headings(img, mask, start, geom);
        if count > 0 {
            backward = drive(img, mask, start, heading, geom, params, on_tick);
        }
    }
    let mut xy: Vec<(f64, f64)> = backward
        .iter()
        .skip(1)
        .rev()
        .chain(&forward)
        .copied()
        .collect();
    if backward.len() > 1 {
        // Begin at whichever end a top-down, left-right scan meets first.
        let key = |p: &(f64, f64)| (p.1.round() as i64, p.0.round() as i64);
        if key(xy.last().unwrap()) < key(&xy[0]) {
            xy.reverse();
        }
    }
    Stroke::from_xy(0, xy)
}

fn touches_visited(img: &BinaryImage, mask: &TraversalMask, (x, y): (usize, usize)) -> bool {
    let (x, y) = (x as i64, y as i64);
    (-1..=1).any(|dy| {
        (-1..=1).any(|dx| img.get_signed(x + dx, y + dy) && !mask.unvisited_fg(img, x + dx, y + dy))
    })
}

/// Runs the truck from `start` along `heading` until the stroke ends and
/// returns the visited positions, the start included.
fn drive(
    img: &BinaryImage,
    mask: &mut TraversalMask,
    start: (usize, usize),
    heading: f64,
    geom: &TruckGeometry,
    params: &SteeringParams,
    on_tick: &mut dyn FnMut(&TruckState, &TraversalMask),
) -> Vec<(f64, f64)> {
    let mut state = TruckState::new(start.0 as f64, start.1 as f64, heading);
    mask.mark_disk(img, state.x, state.y, geom.track_width / 2.0);
    let mut points = vec![(state.x, state.y)];
    let limit = max_ticks(img, geom);
    let margin = geom.track_width;
    let (w, h) = (img.width() as f64, img.height() as f64);
    on_tick(&state, mask);
    while state.ticks < limit {
        match steer_step(img, mask, &state, geom, params) {
            StepOutcome::StrokeEnd => break,
            StepOutcome::Moved(next) => {
                if next.x < -margin
                    || next.y < -margin
                    || next.x > w - 1.0 + margin
                    || next.y > h - 1.0 + margin
                {
                    break;
                }
                state = next;
                points.push((state.x, state.y));
                on_tick(&state, mask);
            }
        }
    }
    points
}

/// 8-connected component labels for the foreground.
fn label_components(img: &BinaryImage) -> (Vec<u32>, Vec<Vec<usize>>) {
    const NONE: u32 = u32::MAX;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut labels = vec![NONE; img.mask().len()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut stack = Vec::new();
    for seed in 0..labels.len() {
        if !img.mask()[seed] || labels[seed] != NONE {
            continue;
        }
        let id = members.len() as u32;
        let mut pixels = Vec::new();
        labels[seed] = id;
        stack.push(seed);
        while let Some(i) = stack.pop() {
            pixels.push(i);
            let (x, y) = ((i as i64) % w, (i as i64) / w);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if img.mask()[j] && labels[j] == NONE {
                        labels[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        members.push(pixels);
    }
    (labels, members)
}

/// Collects the unvisited ink region around `start` (8-connected) and
/// returns it when it is leftover margin rather than untraced road: either
/// smaller than two truck footprints, or so thin that no pixel has all four
/// direct neighbors unvisited ink. Regions that do not border consumed road
/// are never residue.
fn residue_sliver(
    img: &BinaryImage,
    mask: &TraversalMask,
    start: (usize, usize),
    geom: &TruckGeometry,
) -> Option<Vec<usize>> {
    let w = img.width() as i64;
    let min_area = (2.0 * geom.track_width).ceil() as usize;
    let fresh = |x: i64, y: i64| mask.unvisited_fg(img, x, y);
    let mut region = vec![start.1 * img.width() + start.0];
    let mut seen = std::collections::HashSet::from([region[0]]);
    let mut has_core = false;
    let mut touches_visited = false;
    let mut head = 0;
    while head < region.len() {
        let i = region[head] as i64;
        head += 1;
        let (x, y) = (i % w, i / w);
        if !has_core
            && [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .all(|&(dx, dy)| fresh(x + dx, y + dy))
        {
            has_core = true;
        }
        if has_core && region.len() >= min_area {
            return None;
        }
        for dy in -1..=1 {
            for dx in -1..=1 {
                if fresh(x + dx, y + dy) {
                    let j = ((y + dy) * w + x + dx) as usize;
                    if seen.insert(j) {
                        region.push(j);
                    }
                } else if img.get_signed(x + dx, y + dy) {
                    touches_visited = true;
                }
            }
        }
    }
    (touches_visited && (!has_core || region.len() < min_area)).then_some(region)
}

/// Per-tick progress passed to [`Tracer::run_observed`] callbacks.
#[derive(Debug, Clone, Copy)]
pub struct TickEvent<'a> {
    /// Ticks elapsed across all strokes so far.
    pub global_tick: u64,
    pub stroke: usize,
    pub state: &'a TruckState,
    pub mask: &'a TraversalMask,
}

/// Full traversal with explicit steering parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tracer {
    pub geometry: TruckGeometry,
    pub params: SteeringParams,
}

impl Tracer {
    pub fn new(geometry: TruckGeometry, params: SteeringParams) -> Self {
        Tracer { geometry, params }
    }

    pub fn run(&self, img: &BinaryImage) -> (OnlineTrace, TraversalMask) {
        self.run_observed(img, |_| {})
    }

    /// Traces every stroke, calling `on_tick` after each truck move.
    pub fn run_observed(
        &self,
        img: &BinaryImage,
        mut on_tick: impl FnMut(TickEvent<'_>),
    ) -> (OnlineTrace, TraversalMask) {
        let mut trace =
            OnlineTrace::new("", (img.width(), img.height()), self.geometry.track_width);
        let mut mask = TraversalMask::new(img);
        if img.foreground_count() == 0 {
            return (trace, mask);
        }
        let (labels, members) = label_components(img);
        let mut cursor = 0;
        let mut global_tick = 0u64;
        while let Some((x, y)) = find_start_from(img, &mask, cursor) {
            cursor = y * img.width() + x;
            let component = &members[labels[cursor] as usize];
            let visited = component.iter().filter(|&&i| mask.visited[i]).count();
            if visited as f64 >= self.params.residue_fraction * component.len() as f64 {
                for &i in component {
                    mask.mark(img, i % img.width(), i / img.width());
                }
                continue;
            }
            if let Some(sliver) = residue_sliver(img, &mask, (x, y), &self.geometry) {
                for i in sliver {
                    mask.mark(img, i % img.width(), i / img.width());
                }
                continue;
            }
            let id = trace.strokes.len();
            let mut stroke = trace_stroke_observed(
                img,
                &mut mask,
                (x, y),
                &self.geometry,
                &self.params,
                &mut |state, mask| {
                    on_tick(TickEvent {
                        global_tick,
                        stroke: id,
                        state,
                        mask,
                    });
                    global_tick += 1;
                },
            );
            stroke.id = id;
            trace.strokes.push(stroke);
        }
        (trace, mask)
    }
}

/// Traces all strokes with the default steering parameters.
pub fn trace_all(img: &BinaryImage, geom: &TruckGeometry) -> OnlineTrace {
    Tracer::new(*geom, SteeringParams::default()).run(img).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::width::WidthMode;
    use std::f64::consts::FRAC_PI_2;

    fn est(avg: f64) -> WidthEstimate {
        WidthEstimate {
            avg_width: avg,
            mode: WidthMode::HistogramEq1,
            k: 3,
            support: vec![],
        }
    }

    fn rect(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryImage {
        let mut img = BinaryImage::empty(w, h);
        for y in y0..=y1 {
            for x in x0..=x1 {
                img.set(x, y, true);
            }
        }
        img
    }

    #[test]
    fn geometry_from_width() {
        let g = derive_geometry(&est(4.0), 1.0);
        assert_eq!(
            (g.track_width, g.wheel_radius, g.step, g.lookahead),
            (4.0, 1.0, 2.0, 8.0)
        );
        let g = derive_geometry(&est(1.0), 1.0);
        assert_eq!(
            (g.track_width, g.wheel_radius, g.step, g.lookahead),
            (1.0, 0.5, 0.5, 2.0)
        );
        assert_eq!(derive_geometry(&est(4.0), 0.5).track_width, 2.0);
    }

    #[test]
    fn start_is_first_in_scan_order() {
        let mut img = BinaryImage::empty(10, 8);
        img.set(1, 5, true);
        img.set(7, 2, true);
        let mask = TraversalMask::new(&img);
        assert_eq!(find_start(&img, &mask), Some((7, 2)));
        assert_eq!(find_start(&BinaryImage::empty(4, 4), &mask), None);
    }

    #[test]
    fn start_skips_visited() {
        let mut img = BinaryImage::empty(10, 8);
        img.set(1, 5, true);
        img.set(7, 2, true);
        let mut mask = TraversalMask::new(&img);
        mask.mark(&img, 7, 2);
        assert_eq!(find_start(&img, &mask), Some((1, 5)));
    }

    #[test]
    fn mask_never_marks_background() {
        let img = rect(10, 10, 2, 2, 4, 4);
        let mut mask = TraversalMask::new(&img);
        mask.mark_disk(&img, 3.0, 3.0, 5.0);
        assert_eq!(mask.visited_count(), 9);
        mask.mark(&img, 0, 0);
        assert_eq!(mask.visited_count(), 9);
    }

    #[test]
    fn heading_along_bars() {
        let g = derive_geometry(&est(3.0), 1.0);
        let bar = rect(40, 10, 2, 4, 35, 6);
        let mask = TraversalMask::new(&bar);
        assert_eq!(initial_heading(&bar, &mask, (2, 4), &g), 0.0);
        let col = rect(10, 40, 4, 2, 6, 35);
        let mask = TraversalMask::new(&col);
        assert_eq!(initial_heading(&col, &mask, (4, 2), &g), FRAC_PI_2);
    }

    #[test]
    fn isolated_pixel_heads_right() {
        let mut img = BinaryImage::empty(9, 9);
        img.set(4, 4, true);
        let mask = TraversalMask::new(&img);
        let g = derive_geometry(&est(1.0), 1.0);
        assert_eq!(initial_heading(&img, &mask, (4, 4), &g), 0.0);
    }

    #[test]
    fn wheels_balanced_when_centered() {
        let bar = rect(40, 20, 0, 6, 39, 12);
        let g = derive_geometry(&est(7.0), 1.0);
        let (l, r) = wheel_balance(&bar, &TruckState::new(20.0, 9.0, 0.0), &g);
        assert_eq!(l, r);
        assert!(l > 0);
        // shifted up: the left (upper) wheel leaves the road first
        let (l, r) = wheel_balance(&bar, &TruckState::new(20.0, 7.0, 0.0), &g);
        assert!(l < r);
        assert_eq!(
            wheel_balance(
                &bar,
                &TruckState::new(20.0, 2.0, 0.0),
                &derive_geometry(&est(2.0), 1.0)
            ),
            (0, 0)
        );
    }

    #[test]
    fn centered_step_keeps_heading() {
        let bar = rect(60, 20, 0, 6, 59, 12);
        let g = derive_geometry(&est(7.0), 1.0);
        let mut mask = TraversalMask::new(&bar);
        let state = TruckState::new(20.0, 9.0, 0.0);
        match steer_step(&bar, &mut mask, &state, &g, &SteeringParams::default()) {
            StepOutcome::Moved(next) => {
                assert_eq!(next.heading, 0.0);
                assert_eq!((next.x, next.y), (23.5, 9.0));
            }
            StepOutcome::StrokeEnd => panic!("stopped on open road"),
        }
    }

    #[test]
    fn off_road_with_nothing_ahead_ends() {
        let img = rect(30, 30, 0, 0, 2, 2);
        let g = derive_geometry(&est(3.0), 1.0);
        let mut mask = TraversalMask::new(&img);
        let state = TruckState::new(20.0, 20.0, 0.0);
        assert_eq!(
            steer_step(&img, &mut mask, &state, &g, &SteeringParams::default()),
            StepOutcome::StrokeEnd
        );
    }

    #[test]
    fn empty_image_has_no_strokes() {
        let img = BinaryImage::empty(20, 20);
        let g = derive_geometry(&est(3.0), 1.0);
        assert!(trace_all(&img, &g).strokes.is_empty());
    }

    #[test]
    fn single_pixel_is_a_short_stroke() {
        let mut img = BinaryImage::empty(9, 9);
        img.set(4, 4, true);
        let g = derive_geometry(&est(1.0), 1.0);
        let trace = trace_all(&img, &g);
        assert_eq!(trace.strokes.len(), 1);
        let pts = &trace.strokes[0].points;
        assert!((1..=2).contains(&pts.len()));
        assert_eq!((pts[0].x, pts[0].y), (4.0, 4.0));
    }

    #[test]
    fn horizontal_bar_traced_left_to_right() {
        let bar = rect(50, 12, 5, 4, 44, 6);
        let g = derive_geometry(&est(3.0), 1.0);
        let trace = trace_all(&bar, &g);
        assert_eq!(trace.strokes.len(), 1);
        let pts = &trace.strokes[0].points;
        assert!(pts.last().unwrap().x > pts[0].x + 30.0);
        assert!(pts.windows(2).all(|w| w[1].x >= w[0].x - 0.5));
    }

    #[test]
    fn angles_normalize() {
        assert_eq!(normalize_angle(-FRAC_PI_2), 3.0 * FRAC_PI_2);
        assert!((angle_diff(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    }
}
