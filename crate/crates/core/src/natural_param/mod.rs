//! Natural parameterization: the μ⁰ estimator, Minkowski content and box-counting dimension.

mod dimension;
mod mu0;

pub use dimension::{
    box_dimension, distance_transform_sq, minkowski_content, polyline_box_count, polyline_box_dimension,
    BoxDimension, MinkowskiEstimate,
};
pub use mu0::{
    conformal_radius_half_plane, detect_bubbles, disk_to_half_plane, estimate_mu0, half_plane_circle_average,
    half_plane_circle_weights, half_plane_to_disk, intensity_shape, scale_traces, scaling_covariance_check, Bubble,
    BubbleSet, MeasureEstimate, Mu0Config, ScalingReport,
};
