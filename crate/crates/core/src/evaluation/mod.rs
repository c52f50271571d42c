//! Confusion-matrix metrics for elite predictions, the feature set used by
//! the baseline, and a logistic-regression baseline trained by full-batch
//! gradient descent.
//!
//! Labeling convention: a positive prediction is "elite" and a positive
//! outcome is "complied". A false positive is an elite customer who did not
//! comply; a false negative is a non-elite customer who did.

mod features;
mod logistic;
mod metrics;

pub use features::{
    build_features, load_serves, parse_serves, write_serves, FeatureVector, FEATURE_NAMES,
    SERVES_HEADER,
};
pub use logistic::{
    decision_score, log_loss, log_loss_gradient, predict, predict_proba, train_logistic,
    LogisticModel, Standardizer, TrainConfig, NUM_FEATURES,
};
pub use metrics::{
    confusion, format_metric, load_ground_truth, outcomes_from_decisions, parse_ground_truth,
    precision, recall, write_ground_truth, write_report_csv, ConfusionMatrix, LabeledOutcome,
    MethodReport, GROUND_TRUTH_HEADER, REPORT_HEADER,
};
