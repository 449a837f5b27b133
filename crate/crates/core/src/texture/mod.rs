//! Gabor texture features and the SVM texture concept classifier.

mod calibration;
mod cv;
mod gabor;
mod model;
mod svm;

pub use calibration::{fit_sigmoid, sigmoid, Sigmoid, CALIBRATION_ITERATIONS};
pub use cv::{cross_validate, median_gamma, stratified_folds, CvReport, GridPoint};
pub use gabor::{
    filter_index, gabor_energy_vector, GaborBank, GaborConfig, GaborEnergyVector, GaborKernel,
    DEFAULT_SIGMA_FACTOR, GABOR_DIM, N_FREQUENCIES, N_ORIENTATIONS,
};
pub use model::{
    classify_shot_texture, posterior_probability, train_ovr_svm, train_ovr_svm_with_report,
    ConceptSvm, ConceptTrainingReport, LabelledSample, TextureConceptId, TextureSignature,
    TrainedSvmModel, N_TEXTURE_CONCEPTS,
};
pub use svm::{
    rbf_kernel, solve_binary, BinarySolution, Gram, SvmParams, DEFAULT_KKT_TOLERANCE,
    DEFAULT_MAX_ITER,
};

/// Key-frames used for texture: the middle frame, plus the first and last
/// frames when the shot lasts longer than five seconds.
pub fn key_frame_indices(start: usize, end: usize, duration_ms: u64) -> Vec<usize> {
    let mid = start + (end - start) / 2;
    if duration_ms > 5000 && end > start {
        let mut v = vec![start, mid, end];
        v.dedup();
        v
    } else {
        vec![mid]
    }
}
