//! Sectional widths (horizontal ink runs) and the average stroke width used
//! to size the truck.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryImage;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionalWidths {
    /// Every run length, in row-major discovery order.
    pub runs: Vec<usize>,
    /// Rows that contain at least one run, with that row's run lengths.
    pub per_row: Vec<(usize, Vec<usize>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WidthMode {
    /// Frequency-weighted mean of the `k` most frequent run widths.
    #[default]
    HistogramEq1,
    /// Arithmetic mean of the `k` longest runs.
    TopKMean,
}

impl fmt::Display for WidthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WidthMode::HistogramEq1 => "histogram",
            WidthMode::TopKMean => "topk",
        })
    }
}

impl FromStr for WidthMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "histogram" | "hist" | "eq1" => Ok(WidthMode::HistogramEq1),
            "topk" | "top-k" => Ok(WidthMode::TopKMean),
            other => Err(format!(
                "unknown width mode `{other}` (expected histogram or topk)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub avg_width: f64,
    pub mode: WidthMode,
    pub k: usize,
    /// `(width, frequency)` pairs in histogram mode; `(run, 1)` per selected
    /// run in top-k mode.
    pub support: Vec<(usize, usize)>,
}

/// Scans every row for maximal runs of consecutive foreground pixels.
pub fn sectional_widths(img: &BinaryImage) -> SectionalWidths {
    let mut out = SectionalWidths::default();
    for (y, row) in img.mask().chunks(img.width().max(1)).enumerate() {
        let lengths: Vec<usize> = row
            .split(|&fg| !fg)
            .map(<[bool]>::len)
            .filter(|&n| n > 0)
            .collect();
        if !lengths.is_empty() {
            out.runs.extend_from_slice(&lengths);
            out.per_row.push((y, lengths));
        }
    }
    out
}

pub fn average_width(sw: &SectionalWidths, mode: WidthMode, k: usize) -> Result<WidthEstimate> {
    if sw.runs.is_empty() {
        return Err(Error::EmptySignature);
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let (avg_width, support) = match mode {
        WidthMode::HistogramEq1 => {
            let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
            for &w in &sw.runs {
                *freq.entry(w).or_default() += 1;
            }
            let mut ranked: Vec<(usize, usize)> = freq.into_iter().collect();
            // most frequent first, ties toward the wider run
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.cmp(&a.0)));
            ranked.truncate(k);
            let weighted: usize = ranked.iter().map(|&(w, f)| w * f).sum();
            let total: usize = ranked.iter().map(|&(_, f)| f).sum();
            (weighted as f64 / total as f64, ranked)
        }
        WidthMode::TopKMean => {
            let mut runs = sw.runs.clone();
            runs.sort_unstable_by(|a, b| b.cmp(a));
            runs.truncate(k);
            let mean = runs.iter().sum::<usize>() as f64 / runs.len() as f64;
            (mean, runs.into_iter().map(|r| (r, 1)).collect())
        }
    };
    Ok(WidthEstimate {
        avg_width,
        mode,
        k,
        support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn runs(r: &[usize]) -> SectionalWidths {
        SectionalWidths {
            runs: r.to_vec(),
            per_row: vec![],
        }
    }

    #[test]
    fn row_runs() {
        let mask: Vec<bool> = "0011100110".chars().map(|c| c == '1').collect();
        let img = BinaryImage::new(10, 1, mask).unwrap();
        let sw = sectional_widths(&img);
        assert_eq!(sw.runs, vec![3, 2]);
        assert_eq!(sw.per_row, vec![(0, vec![3, 2])]);
    }

    #[test]
    fn empty_image_has_no_runs() {
        let sw = sectional_widths(&BinaryImage::empty(6, 4));
        assert!(sw.runs.is_empty());
        assert!(matches!(
            average_width(&sw, WidthMode::HistogramEq1, 3),
            Err(Error::EmptySignature)
        ));
    }

    #[test]
    fn constant_runs_in_both_modes() {
        let sw = runs(&[5; 12]);
        for mode in [WidthMode::HistogramEq1, WidthMode::TopKMean] {
            assert_eq!(average_width(&sw, mode, 3).unwrap().avg_width, 5.0);
        }
    }

    #[test]
    fn histogram_reading_of_eq1() {
        let mut r = vec![3; 10];
        r.extend(vec![4; 20]);
        r.extend(vec![5; 30]);
        r.push(40);
        let est = average_width(&runs(&r), WidthMode::HistogramEq1, 3).unwrap();
        assert!((est.avg_width - 260.0 / 60.0).abs() < 1e-12);
        assert_eq!(est.support, vec![(5, 30), (4, 20), (3, 10)]);
    }

    #[test]
    fn frequency_ties_prefer_wider() {
        let est = average_width(&runs(&[2, 2, 7, 7, 9]), WidthMode::HistogramEq1, 1).unwrap();
        assert_eq!(est.avg_width, 7.0);
    }

    #[test]
    fn top_k_mean() {
        let est = average_width(&runs(&[1, 2, 9, 10, 11]), WidthMode::TopKMean, 3).unwrap();
        assert_eq!(est.avg_width, 10.0);
        let est = average_width(&runs(&[4, 6]), WidthMode::TopKMean, 3).unwrap();
        assert_eq!(est.avg_width, 5.0);
    }

    #[test]
    fn mode_parses() {
        assert_eq!("topk".parse::<WidthMode>().unwrap(), WidthMode::TopKMean);
        assert!("median".parse::<WidthMode>().is_err());
    }
}
