//! Dynamic thresholding: the threshold sits halfway between the two dominant
//! histogram peaks (ink and paper).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryImage, GrayImage};

/// Half-width of the centered moving average applied before peak picking.
pub const SMOOTHING_RADIUS: usize = 2;
/// Minimum intensity distance between the two selected peaks.
pub const MIN_PEAK_SEPARATION: u8 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub counts: Vec<u64>,
    pub smoothed: Vec<f64>,
    pub peak_lo: Option<u8>,
    pub peak_hi: Option<u8>,
    pub threshold: u8,
    /// True when fewer than two separated peaks were found and the
    /// min/max-intensity midpoint was used instead.
    pub fallback: bool,
    /// True when the report describes the negated image (light-on-dark input).
    pub inverted: bool,
}

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut counts = [0u64; 256];
    for &v in img.pixels() {
        counts[v as usize] += 1;
    }
    counts
}

/// Window sums of the 5-wide moving average, ends replicated. Kept as
/// integers so peak comparisons are exact; divide by 5 for the average.
fn window_sums(counts: &[u64; 256]) -> [u64; 256] {
    let at = |i: i64| counts[i.clamp(0, 255) as usize];
    std::array::from_fn(|i| {
        let r = SMOOTHING_RADIUS as i64;
        (-r..=r).map(|d| at(i as i64 + d)).sum()
    })
}

pub fn smooth(counts: &[u64; 256]) -> Vec<f64> {
    let width = (2 * SMOOTHING_RADIUS + 1) as f64;
    window_sums(counts)
        .iter()
        .map(|&s| s as f64 / width)
        .collect()
}

/// Local maxima of `values` as `(index, value)`. A plateau counts once, at
/// its middle index, when it rises above both neighbors; the array ends
/// behave as if bordered by negative infinity.
fn local_maxima(values: &[u64; 256]) -> Vec<(u8, u64)> {
    let mut maxima = Vec::new();
    let mut start = 0;
    while start < 256 {
        let mut end = start;
        while end + 1 < 256 && values[end + 1] == values[start] {
            end += 1;
        }
        let v = values[start];
        let left_ok = start == 0 || values[start - 1] < v;
        let right_ok = end == 255 || values[end + 1] < v;
        if v > 0 && left_ok && right_ok {
            maxima.push((((start + end) / 2) as u8, v));
        }
        start = end + 1;
    }
    maxima
}

/// Picks the ink and paper peaks. Returns `(peak_lo, peak_hi)` ordered by
/// intensity.
pub fn find_two_peaks(counts: &[u64; 256]) -> Result<(u8, u8)> {
    let mut maxima = local_maxima(&window_sums(counts));
    maxima.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let (&(first, _), rest) = maxima.split_first().ok_or(Error::NoSecondPeak)?;
    let second = rest
        .iter()
        .find(|(i, _)| i.abs_diff(first) >= MIN_PEAK_SEPARATION)
        .map(|&(i, _)| i)
        .ok_or(Error::NoSecondPeak)?;
    Ok((first.min(second), first.max(second)))
}

/// Thresholds `img` so that the darker side of the midpoint is ink. With
/// `invert`, the image is negated first, so light ink on a dark background
/// yields the same mask its dark-on-light counterpart would.
pub fn binarize(img: &GrayImage, invert: bool) -> (BinaryImage, HistogramReport) {
    if invert {
        let (mask, mut report) = binarize_dark_ink(&img.negated());
        report.inverted = true;
        (mask, report)
    } else {
        binarize_dark_ink(img)
    }
}

fn binarize_dark_ink(img: &GrayImage) -> (BinaryImage, HistogramReport) {
    let counts = histogram(img);
    let smoothed = smooth(&counts);
    let mut report = HistogramReport {
        counts: counts.to_vec(),
        smoothed,
        peak_lo: None,
        peak_hi: None,
        threshold: 0,
        fallback: false,
        inverted: false,
    };

    let threshold = match find_two_peaks(&counts) {
        Ok((lo, hi)) => {
            report.peak_lo = Some(lo);
            report.peak_hi = Some(hi);
            midpoint(lo, hi)
        }
        Err(_) => {
            report.fallback = true;
            let lo = counts.iter().position(|&c| c > 0).unwrap_or(0) as u8;
            let hi = counts.iter().rposition(|&c| c > 0).unwrap_or(0) as u8;
            if lo == hi {
                report.threshold = lo;
                let blank = BinaryImage::empty(img.width(), img.height());
                return (blank, report);
            }
            midpoint(lo, hi)
        }
    };
    report.threshold = threshold;
    let mask = img.pixels().iter().map(|&v| v <= threshold).collect();
    let bin = BinaryImage::new(img.width(), img.height(), mask)
        .expect("mask length matches source image");
    (bin, report)
}

fn midpoint(lo: u8, hi: u8) -> u8 {
    ((lo as u16 + hi as u16) / 2) as u8
}
