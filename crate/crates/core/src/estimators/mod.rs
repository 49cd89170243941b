//! Mean estimators in one, two and higher dimensions.

mod high_d;
mod one_d;
mod two_d;

pub use high_d::{
    hd_estimator, project_to_frame, CylinderConstraint, EstimateHd, HdConfig, HdDiagnostics, HD_SAMPLE_CONSTANT,
};
pub use one_d::{
    catoni, catoni_local, median_of_means, min_catoni_samples, mom_batch_count, CatoniParams, Estimate1D, CATONI_C2,
};
pub use two_d::{
    heavy_tailed_estimator_2d, inlier_light_estimator_2d, outlier_light_estimator_2d, outlier_light_estimator_2d_with,
    tester_stage_2d, BudgetEntry, Config2DBuilder, Diagnostics2D, Estimate2D, Estimator2DConfig, Path, StripRecord,
    TesterStage, TrimDenominator, DEFAULT_BETA, DEFAULT_L, DEFAULT_NET_CAP, DEFAULT_XI,
};
