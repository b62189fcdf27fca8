//! The recovered online script: strokes of timed points, plus the JSON,
//! CSV and SVG encodings.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::raster::BinaryImage;

/// Value of the `timing` field. Timestamps are traversal ticks, not
/// physical time.
pub const TIMING_SYNTHETIC: &str = "synthetic-ticks";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub t: u64,
}

impl Point {
    pub fn new(x: f64, y: f64, t: u64) -> Self {
        Point { x, y, t }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    pub id: usize,
    pub points: Vec<Point>,
}

impl Stroke {
    /// Builds a stroke from bare coordinates, numbering ticks from zero.
    pub fn from_xy(id: usize, xy: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Stroke {
            id,
            points: xy
                .into_iter()
                .enumerate()
                .map(|(t, (x, y))| Point::new(x, y, t as u64))
                .collect(),
        }
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn reversed(&self) -> Stroke {
        Stroke {
            id: self.id,
            points: self
                .points
                .iter()
                .rev()
                .enumerate()
                .map(|(i, p)| Point::new(p.x, p.y, i as u64))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineTrace {
    pub source: String,
    pub image_size: (usize, usize),
    pub avg_width: f64,
    pub strokes: Vec<Stroke>,
}

impl OnlineTrace {
    pub fn new(source: impl Into<String>, image_size: (usize, usize), avg_width: f64) -> Self {
        OnlineTrace {
            source: source.into(),
            image_size,
            avg_width,
            strokes: Vec::new(),
        }
    }

    /// Checks the structural invariants: sequential ids, nonempty strokes
    /// and strictly increasing ticks.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.strokes.iter().enumerate() {
            if s.id != i {
                return Err(Error::schema(
                    format!("strokes[{i}].id"),
                    format!("expected {i}, found {}", s.id),
                ));
            }
            if s.points.is_empty() {
                return Err(Error::schema(
                    format!("strokes[{i}].points"),
                    "empty stroke",
                ));
            }
            if let Some(j) = s.points.windows(2).position(|w| w[1].t <= w[0].t) {
                return Err(Error::schema(
                    format!("strokes[{i}].points[{}]", j + 1),
                    "ticks must be strictly increasing",
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = String::from("{\n");
        let header = [
            ("source", json!(self.source)),
            ("image_size", json!([self.image_size.0, self.image_size.1])),
            ("avg_width", json!(round4(self.avg_width))),
            ("timing", json!(TIMING_SYNTHETIC)),
        ];
        for (key, value) in header {
            let _ = writeln!(out, "  \"{key}\": {value},");
        }
        if self.strokes.is_empty() {
            out.push_str("  \"strokes\": []\n}\n");
            return out.into_bytes();
        }
        out.push_str("  \"strokes\": [\n");
        for (i, s) in self.strokes.iter().enumerate() {
            let points: Vec<Value> = s
                .points
                .iter()
                .map(|p| json!([round4(p.x), round4(p.y), p.t]))
                .collect();
            let sep = if i + 1 == self.strokes.len() { "" } else { "," };
            let _ = writeln!(
                out,
                "    {{\"id\": {}, \"points\": {}}}{sep}",
                s.id,
                Value::Array(points)
            );
        }
        out.push_str("  ]\n}\n");
        out.into_bytes()
    }

    pub fn from_json(bytes: &[u8]) -> Result<OnlineTrace> {
        let doc: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
            offset: byte_offset(bytes, e.line(), e.column()),
            message: e.to_string(),
        })?;
        let root = doc
            .as_object()
            .ok_or_else(|| Error::schema("$", "expected an object"))?;

        let source = field(root, "source", "source")?
            .as_str()
            .ok_or_else(|| Error::schema("source", "expected a string"))?
            .to_owned();
        let size = field(root, "image_size", "image_size")?
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::schema("image_size", "expected [width, height]"))?;
        let dim = |v: &Value, name: &str| {
            v.as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| Error::schema(name, "expected a nonnegative integer"))
        };
        let image_size = (
            dim(&size[0], "image_size[0]")?,
            dim(&size[1], "image_size[1]")?,
        );
        let avg_width = field(root, "avg_width", "avg_width")?
            .as_f64()
            .ok_or_else(|| Error::schema("avg_width", "expected a number"))?;
        if let Some(timing) = root.get("timing") {
            if timing.as_str().is_none() {
                return Err(Error::schema("timing", "expected a string"));
            }
        }

        let strokes_json = field(root, "strokes", "strokes")?
            .as_array()
            .ok_or_else(|| Error::schema("strokes", "expected an array"))?;
        let mut strokes = Vec::with_capacity(strokes_json.len());
        for (i, s) in strokes_json.iter().enumerate() {
            let path = format!("strokes[{i}]");
            let obj = s
                .as_object()
                .ok_or_else(|| Error::schema(&path, "expected an object"))?;
            let id = field(obj, "id", &format!("{path}.id"))?
                .as_u64()
                .ok_or_else(|| Error::schema(format!("{path}.id"), "expected an integer"))?;
            let pts = field(obj, "points", &format!("{path}.points"))?
                .as_array()
                .ok_or_else(|| Error::schema(format!("{path}.points"), "expected an array"))?;
            let mut points = Vec::with_capacity(pts.len());
            for (j, p) in pts.iter().enumerate() {
                let bad = || Error::schema(format!("{path}.points[{j}]"), "expected [x, y, t]");
                let triple = p.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
                points.push(Point::new(
                    triple[0].as_f64().ok_or_else(bad)?,
                    triple[1].as_f64().ok_or_else(bad)?,
                    triple[2].as_u64().ok_or_else(bad)?,
                ));
            }
            strokes.push(Stroke {
                id: id as usize,
                points,
            });
        }

        let trace = OnlineTrace {
            source,
            image_size,
            avg_width,
            strokes,
        };
        trace.validate()?;
        Ok(trace)
    }

    /// One row per point under a `stroke_id,x,y,t` header.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = String::from("stroke_id,x,y,t\n");
        for s in &self.strokes {
            for p in &s.points {
                let _ = writeln!(out, "{},{},{},{}", s.id, round4(p.x), round4(p.y), p.t);
            }
        }
        out.into_bytes()
    }

    pub fn to_svg(&self, options: &SvgOptions) -> Vec<u8> {
        render_svg(self, options)
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(path, "missing required field"))
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split_inclusive(|&b| b == b'\n')
        .take(line - 1)
        .map(<[u8]>::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

pub(crate) fn round4(v: f64) -> f64 {
    let r = (v * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Resamples a stroke at uniform arc-length `spacing`. The first and last
/// points are kept; ticks are renumbered from zero.
pub fn resample(stroke: &Stroke, spacing: f64) -> Stroke {
    assert!(spacing > 0.0, "resample spacing must be positive");
    let pts = &stroke.points;
    if pts.len() < 2 {
        return stroke.clone();
    }
    let total = stroke.arc_length();
    if total == 0.0 {
        return Stroke::from_xy(stroke.id, [(pts[0].x, pts[0].y)]);
    }

    let mut xy = vec![(pts[0].x, pts[0].y)];
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut k = 1;
    loop {
        let target = k as f64 * spacing;
        if target >= total - 1e-9 {
            break;
        }
        while seg + 1 < pts.len() - 1 && seg_start + pts[seg].dist(&pts[seg + 1]) < target {
            seg_start += pts[seg].dist(&pts[seg + 1]);
            seg += 1;
        }
        let (a, b) = (&pts[seg], &pts[seg + 1]);
        let len = a.dist(b);
        let u = if len > 0.0 {
            ((target - seg_start) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        xy.push((a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)));
        k += 1;
    }
    let last = pts[pts.len() - 1];
    xy.push((last.x, last.y));
    Stroke::from_xy(stroke.id, xy)
}

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Default)]
pub struct SvgOptions<'a> {
    /// Ink pixels drawn in light gray beneath the strokes.
    pub underlay: Option<&'a BinaryImage>,
    /// Polyline width in pixels; defaults to a third of the trace's
    /// average width, at least 1.
    pub stroke_width: Option<f64>,
}

fn render_svg(trace: &OnlineTrace, options: &SvgOptions) -> Vec<u8> {
    let (w, h) = trace.image_size;
    let line_width = options
        .stroke_width
        .unwrap_or_else(|| (trace.avg_width / 3.0).max(1.0));
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );

    if !trace.strokes.is_empty() {
        svg.push_str("  <defs>\n");
        for s in &trace.strokes {
            let color = PALETTE[s.id % PALETTE.len()];
            let _ = writeln!(
                svg,
                r#"    <marker id="arrow-{}" viewBox="0 0 10 10" refX="5" refY="5" markerWidth="4" markerHeight="4" orient="auto"><polygon points="0,0 10,5 0,10" fill="{color}"/></marker>"#,
                s.id
            );
        }
        svg.push_str("  </defs>\n");
    }

    if let Some(bitmap) = options.underlay {
        svg.push_str(r##"  <g class="underlay" fill="#d9d9d9">"##);
        svg.push('\n');
        for y in 0..bitmap.height() {
            let mut x = 0;
            while x < bitmap.width() {
                if bitmap.get(x, y) {
                    let start = x;
                    while x < bitmap.width() && bitmap.get(x, y) {
                        x += 1;
                    }
                    // pixel centers sit on integer coordinates
                    let _ = writeln!(
                        svg,
                        r#"    <rect x="{}" y="{}" width="{}" height="1"/>"#,
                        start as f64 - 0.5,
                        y as f64 - 0.5,
                        x - start
                    );
                } else {
                    x += 1;
                }
            }
        }
        svg.push_str("  </g>\n");
    }

    for s in &trace.strokes {
        let color = PALETTE[s.id % PALETTE.len()];
        let mut d = String::new();
        for (i, p) in s.points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.4} {:.4} ", p.x, p.y);
        }
        if s.points.len() == 1 {
            let p = s.points[0];
            let _ = write!(d, "L{:.4} {:.4} ", p.x, p.y);
        }
        let _ = writeln!(
            svg,
            r#"  <path id="stroke-{id}" d="{}" fill="none" stroke="{color}" stroke-width="{line_width:.2}" stroke-linecap="round" stroke-linejoin="round" marker-end="url(#arrow-{id})"/>"#,
            d.trim_end(),
            id = s.id
        );
    }
    svg.push_str("</svg>\n");
    svg.into_bytes()
}
