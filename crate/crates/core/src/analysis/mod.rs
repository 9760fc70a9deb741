//! Closed forms, shattering, sharpness, loss landscapes and spectra.

pub mod closed_form;
pub mod fourier;
pub mod landscape;
pub mod sharpness;
pub mod shatter;

pub use closed_form::{interval_from_coeffs, offset_from_threshold, one_layer_coeffs, IntervalClassifier};
pub use fourier::{fourier_spectrum, FourierSpectrum, FOURIER_SAMPLES};
pub use landscape::{landscape_projection, LandscapeGrid, PathPoint};
pub use sharpness::{
    comparison_labels, hessian_fd, largest_eigenvalue, sharpness, sharpness_comparison, SharpnessComparison,
    SharpnessReport, DEFAULT_FD_STEP,
};
pub use shatter::{
    generic_points, labeling_key, shatter_check, vc_profile, HypothesisFamily, ShatterResult, ShatterStatus, VcRow,
    MAX_SHATTER_POINTS,
};
