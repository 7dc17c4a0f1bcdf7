//! Nonlinear vector filters for impulsive noise in color images, with the
//! noise models, quality metrics and benchmark harness used to compare them.
//!
//! Every filter maps a square window of RGB pixels to one output color and
//! runs behind [`image::WindowFilter`]. Filters are looked up by name in
//! [`registry`].

pub mod bench;
pub mod color_math;
pub mod error;
pub mod filters;
pub mod image;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod registry;

pub use crate::color_math::{AcosMode, DistanceKind, Vec3};
pub use crate::error::{Error, Result};
pub use crate::image::{filter_image, filter_image_sequential, Image, Window, WindowFilter};
pub use crate::metrics::{evaluate, mae, mse, ncd, MetricReport};
pub use crate::noise::{corrupt, NoiseConfig, NoiseModel};
pub use crate::registry::{apply_filter, build, FilterSpec, FILTERS};
