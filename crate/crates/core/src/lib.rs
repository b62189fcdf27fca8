//! Offline-to-online handwriting conversion.
//!
//! A grayscale scan of a script is median filtered, thresholded between
//! its ink and paper histogram peaks, and traversed by a virtual truck sized
//! from the average stroke width. The result is an [`OnlineTrace`]: ordered,
//! directed strokes separated by pen lifts.
//!
//! The [`synth`] and [`metrics`] modules provide rasterized ground truth and
//! the scores used to check recovered traces against it.

pub mod binarize;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod synth;
pub mod trace_model;
pub mod tracer;
pub mod width;

pub use error::{Error, Result};
pub use pipeline::{convert, PipelineConfig};
pub use raster::{load_image, BinaryImage, GrayImage};
pub use trace_model::{OnlineTrace, Point, Stroke};
