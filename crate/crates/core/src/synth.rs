//! Ground-truth generator. Known pen trajectories are rasterized into
//! noisy grayscale bitmaps so recovered traces can be scored against them.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryImage, GrayImage};
use crate::trace_model::{OnlineTrace, Stroke};

fn default_background() -> u8 {
    230
}

fn default_foreground() -> u8 {
    25
}

fn default_jitter() -> f64 {
    8.0
}

/// A synthetic script: pen trajectories plus rendering parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptSpec {
    pub image_size: (usize, usize),
    pub pen_width: f64,
    /// Each stroke is an ordered polyline in pixel coordinates, written from
    /// its first point to its last.
    pub strokes: Vec<Vec<(f64, f64)>>,
    /// Salt-and-pepper probability per pixel.
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "default_background")]
    pub background: u8,
    #[serde(default = "default_foreground")]
    pub foreground: u8,
    /// Standard deviation of the Gaussian intensity jitter; 0 disables it.
    #[serde(default = "default_jitter")]
    pub jitter_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ScriptSpec {
    pub fn new(image_size: (usize, usize), pen_width: f64, strokes: Vec<Vec<(f64, f64)>>) -> Self {
        ScriptSpec {
            image_size,
            pen_width,
            strokes,
            noise: 0.0,
            background: default_background(),
            foreground: default_foreground(),
            jitter_sigma: default_jitter(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.image_size;
        if w == 0 || h == 0 {
            return Err(Error::invalid(
                "image_size",
                "width and height must be positive",
            ));
        }
        if !self.pen_width.is_finite() || self.pen_width < 1.0 {
            return Err(Error::invalid("pen_width", "must be at least 1"));
        }
        if !(0.0..=0.2).contains(&self.noise) {
            return Err(Error::invalid("noise", "must lie in [0, 0.2]"));
        }
        if !self.jitter_sigma.is_finite() || self.jitter_sigma < 0.0 {
            return Err(Error::invalid("jitter_sigma", "must be nonnegative"));
        }
        for (i, line) in self.strokes.iter().enumerate() {
            if line.is_empty() {
                return Err(Error::invalid(format!("strokes[{i}]"), "empty polyline"));
            }
            for (j, &(x, y)) in line.iter().enumerate() {
                let inside = x.is_finite()
                    && y.is_finite()
                    && (0.0..=(w - 1) as f64).contains(&x)
                    && (0.0..=(h - 1) as f64).contains(&y);
                if !inside {
                    return Err(Error::invalid(
                        format!("strokes[{i}][{j}]"),
                        format!("point ({x}, {y}) lies outside the {w}x{h} image"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The exact trajectories as an online trace; ticks are point indices.
    pub fn truth(&self) -> OnlineTrace {
        let mut trace = OnlineTrace::new(
            format!("synthetic:{}", self.seed),
            self.image_size,
            self.pen_width,
        );
        trace.strokes = self
            .strokes
            .iter()
            .enumerate()
            .map(|(id, line)| Stroke::from_xy(id, line.iter().copied()))
            .collect();
        trace
    }
}

pub(crate) fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let u = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - (a.0 + u * dx)).hypot(p.1 - (a.1 + u * dy))
}

fn stamp_polyline(mask: &mut BinaryImage, line: &[(f64, f64)], radius: f64) {
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    let segments: Vec<((f64, f64), (f64, f64))> = if line.len() == 1 {
        vec![(line[0], line[0])]
    } else {
        line.windows(2).map(|s| (s[0], s[1])).collect()
    };
    for (a, b) in segments {
        let x0 = (a.0.min(b.0) - radius).ceil().max(0.0) as usize;
        let x1 = (a.0.max(b.0) + radius).floor().min(w - 1.0) as usize;
        let y0 = (a.1.min(b.1) - radius).ceil().max(0.0) as usize;
        let y1 = (a.1.max(b.1) + radius).floor().min(h - 1.0) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                if point_segment_distance((x as f64, y as f64), a, b) <= radius {
                    mask.set(x, y, true);
                }
            }
        }
    }
}

/// Pixels covered by the pen: every pixel whose center is within
/// `pen_width / 2` of some stroke segment. This is the limit of stamping
/// pen disks at vanishing spacing along each segment.
pub fn stamp_mask(spec: &ScriptSpec) -> BinaryImage {
    let mut mask = BinaryImage::empty(spec.image_size.0, spec.image_size.1);
    for line in &spec.strokes {
        stamp_polyline(&mut mask, line, spec.pen_width / 2.0);
    }
    mask
}

/// Renders the script and returns it together with its exact trajectories.
pub fn rasterize(spec: &ScriptSpec) -> Result<(GrayImage, OnlineTrace)> {
    spec.validate()?;
    let mask = stamp_mask(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let jitter = (spec.jitter_sigma > 0.0)
        .then(|| Normal::new(0.0, spec.jitter_sigma).expect("sigma is finite and positive"));

    let mut pixels: Vec<u8> = mask
        .mask()
        .iter()
        .map(|&ink| {
            let base = if ink {
                spec.foreground
            } else {
                spec.background
            } as f64;
            let v = match &jitter {
                Some(n) => base + n.sample(&mut rng),
                None => base,
            };
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    if spec.noise > 0.0 {
        for v in pixels.iter_mut() {
            if rng.random::<f64>() < spec.noise {
                *v = if rng.random::<bool>() { 255 } else { 0 };
            }
        }
    }
    let image = GrayImage::new(spec.image_size.0, spec.image_size.1, pixels)?;
    Ok((image, spec.truth()))
}

/// Knobs for random script generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub strokes: (usize, usize),
    pub segments: (usize, usize),
    pub segment_length: (f64, f64),
    /// Largest heading change between consecutive segments.
    pub max_turn: f64,
    pub pen_widths: (u32, u32),
    pub min_size: (usize, usize),
    pub max_size: (usize, usize),
    pub max_noise: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            strokes: (1, 5),
            segments: (4, 12),
            segment_length: (6.0, 12.0),
            max_turn: PI / 8.0,
            pen_widths: (2, 6),
            min_size: (192, 96),
            max_size: (512, 256),
            max_noise: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub index: usize,
    pub spec: ScriptSpec,
    pub image: GrayImage,
    pub truth: OnlineTrace,
}

const MAX_ATTEMPTS: usize = 500;

/// Generates `n` scripts. Item `i` depends only on `master_seed` and `i`.
pub fn corpus(params: &CorpusParams, n: usize, master_seed: u64) -> Result<Vec<CorpusItem>> {
    let mut master = ChaCha8Rng::seed_from_u64(master_seed);
    let seeds: Vec<u64> = (0..n).map(|_| master.random()).collect();
    seeds
        .into_iter()
        .enumerate()
        .map(|(index, seed)| {
            let spec = random_spec(params, seed)?;
            let (image, truth) = rasterize(&spec)?;
            Ok(CorpusItem {
                index,
                spec,
                image,
                truth,
            })
        })
        .collect()
}

/// Draws one random script specification from `seed`.
pub fn random_spec(params: &CorpusParams, seed: u64) -> Result<ScriptSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(params.min_size.0..=params.max_size.0);
    let h = rng.random_range(params.min_size.1..=params.max_size.1);
    let pen_width = rng.random_range(params.pen_widths.0..=params.pen_widths.1) as f64;
    let count = rng.random_range(params.strokes.0..=params.strokes.1);
    let noise = if params.max_noise > 0.0 {
        rng.random_range(0.0..=params.max_noise)
    } else {
        0.0
    };

    let mut spec = ScriptSpec::new((w, h), pen_width, Vec::new());
    spec.noise = noise;
    spec.seed = seed;
    let slot = w as f64 / count as f64;
    for k in 0..count {
        let line = (0..MAX_ATTEMPTS)
            .find_map(|_| random_stroke(&mut rng, params, &spec, k as f64 * slot, slot))
            .ok_or_else(|| {
                Error::invalid(
                    "corpus",
                    format!("could not place stroke {k} for seed {seed}"),
                )
            })?;
        spec.strokes.push(line);
    }
    spec.validate()?;
    Ok(spec)
}

/// A bounded-turn random walk, oriented so that it is written from the end
/// a top-to-bottom, left-to-right scan meets first. Walks whose topmost ink
/// lies in their interior are rejected.
fn random_stroke(
    rng: &mut ChaCha8Rng,
    params: &CorpusParams,
    spec: &ScriptSpec,
    slot_x: f64,
    slot_w: f64,
) -> Option<Vec<(f64, f64)>> {
    let (w, h) = (spec.image_size.0 as f64, spec.image_size.1 as f64);
    let margin = spec.pen_width + 2.0;
    let x = slot_x + rng.random_range(0.1..0.9) * slot_w;
    let y = rng.random_range(margin..(h - margin));
    let mut heading = rng.random_range(0.0..TAU);
    let segments = rng.random_range(params.segments.0..=params.segments.1);
    let mut line = vec![(x, y)];
    for _ in 0..segments {
        let len = rng.random_range(params.segment_length.0..=params.segment_length.1);
        let &(px, py) = line.last().unwrap();
        let next = (px + len * heading.cos(), py + len * heading.sin());
        if next.0 < margin
            || next.1 < margin
            || next.0 > w - 1.0 - margin
            || next.1 > h - 1.0 - margin
        {
            return None;
        }
        line.push(next);
        heading += rng.random_range(-params.max_turn..=params.max_turn);
    }

    let mut alone = BinaryImage::empty(spec.image_size.0, spec.image_size.1);
    stamp_polyline(&mut alone, &line, spec.pen_width / 2.0);
    let first = alone.mask().iter().position(|&m| m)?;
    let p = (
        (first % alone.width()) as f64,
        (first / alone.width()) as f64,
    );
    let radius = spec.pen_width / 2.0 + 1.0;
    let d_head = point_segment_distance(p, line[0], line[0]);
    let d_tail = point_segment_distance(p, line[line.len() - 1], line[line.len() - 1]);
    if d_head.min(d_tail) > radius {
        return None;
    }
    if d_tail < d_head {
        line.reverse();
    }
    Some(line)
}
