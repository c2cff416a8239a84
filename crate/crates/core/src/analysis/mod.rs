//! Calibration, embedding distances and the mixup regularization check.

mod calibration;
mod distances;
mod report;
mod taylor;

pub use calibration::{
    calibration_inputs, ece, ece_by_confidence, CalibrationBin, CalibrationInput, CalibrationReport,
};
pub use distances::{embedding_distances, DistanceReport};
pub use report::{calibration_csv, distance_csv, taylor_csv, taylor_summary};
pub use taylor::{
    estimate_tau, regularizer_terms, taylor_check, RegularizerReport, TaylorCheckReport, TAU_DRAWS,
};
