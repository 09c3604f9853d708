//! Confidence bounds for plan statistics.

mod bounds;
pub mod special;

pub use bounds::{
    collision_upper_bound, convexity_check, cp_bounds, cp_lower_continuous, coverage_lower_bound, guideline_csv,
    guideline_table, mean_ci, min_coverage_bound, selection_bias_demo, successes, BiasReport, BinomialBound,
    BoundKind, ConvexityReport, GuidelineRow, MeanBound, PlanCertificate, Violation,
};
