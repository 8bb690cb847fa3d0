//! Feature engineering: PCA reduction, VIF diagnostics, lag/lead specs and
//! the per-hour feature tables with day-ahead provenance.

mod pca;
mod spec;
mod table;
mod vif;

pub use pca::{pca_fit, Components, FitScope, PcaModel};
pub use spec::{ablation_presets, preset, LagLeadSpec, LeadPolicy, MAX_OFFSET};
pub use table::{
    audit_day_ahead, build_features, feature_columns, fit_pca_pair, AuditReport, FeatureSpec,
    FeatureTable, HourMatrix, Provenance, Violation,
};
pub use vif::{vif, VifEntry, VifReport, COLLINEAR_R2};

use crate::linalg::Matrix;

/// Convenience wrapper: transform with a fitted model.
pub fn pca_transform(model: &PcaModel, matrix: &Matrix) -> crate::Result<Matrix> {
    model.transform(matrix)
}
