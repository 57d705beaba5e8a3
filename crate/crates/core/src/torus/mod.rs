//! Poincaré sections, attractor classification and frequency estimates.

mod classify;
mod section;
mod spectrum;

pub use classify::{
    classify_attractor, hausdorff_distance, AttractorClass, AttractorLabel, ClassifyConfig, ClosedCurve,
};
pub use section::{poincare_section, CrossingDirection, ReturnMap, SectionConfig};
pub use spectrum::{dominant_frequencies, spectral_peaks, SpectralPeak, MIN_SAMPLES};
