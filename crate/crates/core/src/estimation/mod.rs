//! Curve fitting and tomography.

pub mod fit;
pub mod lm;
pub mod tomography;

pub use fit::{fit_gaussian_death, fit_revival, gaussian_death, gaussian_revival, FitResult};
pub use lm::{LmOptions, LmOutcome};
pub use tomography::{
    exact_frequencies, monte_carlo_errors, reconstruct, simulate_tomography, Statistic, TomographyCounts,
    TomographyFrequencies,
};
