//! Two-component mixture survival models, RMST-based trial design and Monte
//! Carlo operating characteristics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod curves;
pub mod design;
pub mod error;
pub mod inference;
pub mod law;
pub mod mixture;
pub mod normal;
pub mod quadrature;
pub mod root;
pub mod simulate;
pub mod trial_data;
pub mod variance;

pub use calibrate::{
    calibrate, calibrate_with, summarize, CalibratedDesign, Set3Method, SummaryInputs, SummaryPayload, SummarySet,
};
pub use design::{power_at_n, sample_size, DesignSpec, SampleSizeResult};
pub use error::{Error, Result};
pub use law::{Family, SurvivalLaw};
pub use mixture::{effect_size, hazard_ratio, EffectDecomposition, MixtureArm, Setting};
pub use variance::{limiting_variance, VarianceResult};
pub use inference::{kaplan_meier, log_rank_test, rmst_from_km, rmst_test, rmst_variance_hat, KmCurve, LogRankResult, RmstTestResult};
pub use trial_data::{Arm, SubjectRecord};
pub use simulate::{build_scenario_grid, run_study, GridSpec, Hypothesis, SampleSize, Scenario, StudyResult};
