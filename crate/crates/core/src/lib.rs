//! Inspection planning under execution uncertainty.
//!
//! A best-first search over a roadmap that tracks, per node, Monte-Carlo estimates of
//! each POI's inspection probability, the executed path length, and the collision
//! probability, together with Clopper-Pearson and t-interval certificates for the
//! returned command path.

pub mod cli;
pub mod error;
pub mod evaluator;
pub mod motion;
pub mod planner;
pub mod roadmap;
pub mod scalar;
pub mod stats;
pub mod world;

pub use error::{Error, Result};
pub use evaluator::{check_bounds, evaluate_plan, BoundVerdicts, EvalReport};
pub use motion::{draw_samples, simulate_segment, ExecState, ExecutedSegment, SampleParams};
pub use planner::{plan, Algorithm, CommandPlan, Ipv, PlanOutcome, PlanParams, SearchNode};
pub use roadmap::{build_rrg, load_scenario, ModelKind, ModelSpec, Roadmap, Scenario};
pub use scalar::Real;

pub type Vec3 = world::Vec3<f64>;
pub type Aabb = world::Aabb<f64>;
pub type Configuration = world::Configuration<f64>;
pub type Workspace = world::Workspace<f64>;
