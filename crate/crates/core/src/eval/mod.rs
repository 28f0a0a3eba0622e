//! ROC-AUC, stratified cross-validation splits, ensembling, and error reports.

pub mod auc;
pub mod ensemble;
pub mod report;
pub mod split;

pub use auc::{roc_auc, trapezoid_area, RocCurve};
pub use ensemble::ensemble_average;
pub use report::{classify_errors, EvalReport, DEFAULT_THRESHOLD};
pub use split::{stratified_splits, Fold, SplitSpec};
