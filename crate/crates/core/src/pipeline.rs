//! End-to-end offline-to-online conversion: median filter, threshold,
//! width estimate, truck sizing, traversal.

use serde::{Deserialize, Serialize};

use crate::binarize::{binarize, HistogramReport};
use crate::raster::{median_filter_5x5, BinaryImage, GrayImage};
use crate::trace_model::OnlineTrace;
use crate::tracer::{
    derive_geometry_with, GeometryRatios, SteeringParams, TickEvent, Tracer, TraversalMask,
    TruckGeometry,
};
use crate::width::{average_width, sectional_widths, WidthEstimate, WidthMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Treat light pixels as ink.
    pub invert: bool,
    pub truck_scale: f64,
    pub width_mode: WidthMode,
    pub k: usize,
    pub ratios: GeometryRatios,
    pub steering: SteeringParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            invert: false,
            truck_scale: 1.0,
            width_mode: WidthMode::HistogramEq1,
            k: 3,
            ratios: GeometryRatios::default(),
            steering: SteeringParams::default(),
        }
    }
}

/// Every intermediate product of a conversion.
#[derive(Debug, Clone)]
pub struct Conversion {
    pub filtered: GrayImage,
    pub binary: BinaryImage,
    pub histogram: HistogramReport,
    /// `None` when the page holds no ink.
    pub width: Option<WidthEstimate>,
    pub geometry: Option<TruckGeometry>,
    pub visited: TraversalMask,
    pub trace: OnlineTrace,
}

pub fn convert(img: &GrayImage, source: &str, config: &PipelineConfig) -> Conversion {
    convert_observed(img, source, config, |_| {})
}

/// Runs the pipeline, forwarding every traversal tick to `on_tick`.
///
/// A page without ink yields an empty trace with `avg_width` 0 rather than
/// an error.
pub fn convert_observed(
    img: &GrayImage,
    source: &str,
    config: &PipelineConfig,
    on_tick: impl FnMut(TickEvent<'_>),
) -> Conversion {
    let filtered = median_filter_5x5(img);
    let (binary, histogram) = binarize(&filtered, config.invert);
    let sections = sectional_widths(&binary);
    let size = (img.width(), img.height());

    let Ok(width) = average_width(&sections, config.width_mode, config.k) else {
        let visited = TraversalMask::new(&binary);
        return Conversion {
            filtered,
            binary,
            histogram,
            width: None,
            geometry: None,
            visited,
            trace: OnlineTrace::new(source, size, 0.0),
        };
    };
    let geometry = derive_geometry_with(width.avg_width, config.truck_scale, &config.ratios);
    let (mut trace, visited) =
        Tracer::new(geometry, config.steering).run_observed(&binary, on_tick);
    trace.source = source.to_owned();
    trace.avg_width = width.avg_width;
    Conversion {
        filtered,
        binary,
        histogram,
        width: Some(width),
        geometry: Some(geometry),
        visited,
        trace,
    }
}
