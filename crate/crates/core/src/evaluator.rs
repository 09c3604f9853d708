//! Monte-Carlo execution of a command plan with fresh samples.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{draw_samples, simulate_segment, ExecState};
use crate::planner::CommandPlan;
use crate::roadmap::{ModelKind, Scenario};
use crate::stats::PlanCertificate;
use crate::world::visible_mask;

/// Mixed into the evaluation seed so execution samples never repeat planning samples.
pub const EXECUTION_SEED_TAG: u64 = 0x5EED_0E7E_C000_0001;

/// One simulated execution of the whole command path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub index: usize,
    /// POIs seen at any executed milestone.
    pub seen: Vec<usize>,
    pub collided: bool,
    /// Meters.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_exec: usize,
    pub seed: u64,
    /// Model the executions were simulated with.
    pub model: ModelKind,
    /// Model the plan was computed with.
    pub plan_model: ModelKind,
    pub model_mismatch: bool,
    /// Fraction of executions that saw each POI.
    pub poi_frequency: Vec<f64>,
    /// Mean number of POIs seen per execution.
    pub coverage_mean: f64,
    /// `coverage_mean` over the number of POIs.
    pub coverage_fraction: f64,
    /// Fraction of executions with at least one colliding segment.
    pub collision_rate: f64,
    /// Meters.
    pub length_mean: f64,
    pub length_std: f64,
    #[serde(skip)]
    pub traces: Vec<ExecutionTrace>,
}

impl EvalReport {
    /// One row per execution: `index,seen_count,collided,length`.
    pub fn traces_csv(&self) -> String {
        let mut out = String::from("index,seen_count,collided,length\n");
        for t in &self.traces {
            let _ = writeln!(out, "{},{},{},{}", t.index, t.seen.len(), u8::from(t.collided), t.length);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_plan(scenario: &Scenario, plan: &CommandPlan) -> Result<()> {
    let rm = &scenario.roadmap;
    let Some(&first) = plan.path.first() else {
        return Err(Error::arg("plan path is empty"));
    };
    if first != rm.start {
        return Err(Error::arg(format!("plan starts at vertex {first}, scenario start is {}", rm.start)));
    }
    if plan.ap_ipv.len() != scenario.pois.len() {
        return Err(Error::arg(format!(
            "plan covers {} POIs, scenario has {}",
            plan.ap_ipv.len(),
            scenario.pois.len()
        )));
    }
    if plan.configurations.len() != plan.path.len() {
        return Err(Error::arg("plan path and configurations differ in length"));
    }
    for (i, (&v, c)) in plan.path.iter().zip(&plan.configurations).enumerate() {
        let Some(rv) = rm.vertices.get(v) else {
            return Err(Error::arg(format!("plan vertex {v} not in roadmap")));
        };
        if rv.position.distance(c.position) > 1e-9 {
            return Err(Error::arg(format!("plan configuration {i} does not match roadmap vertex {v}")));
        }
        if i > 0 && rm.edge_between(plan.path[i - 1], v).is_none() {
            return Err(Error::arg(format!("plan step {} -> {v} is not a roadmap edge", plan.path[i - 1])));
        }
    }
    Ok(())
}

/// Simulates `n_exec` fresh executions of the plan under the scenario's model.
pub fn evaluate_plan(scenario: &Scenario, plan: &CommandPlan, n_exec: usize, seed: u64) -> Result<EvalReport> {
    if n_exec == 0 {
        return Err(Error::arg("n_exec must be at least 1"));
    }
    check_plan(scenario, plan)?;
    let samples = draw_samples(&scenario.model, n_exec, seed ^ EXECUTION_SEED_TAG)?;
    let start = *scenario.start_config();
    let vs = &scenario.roadmap.vertices;
    let traces: Vec<ExecutionTrace> = samples
        .par_iter()
        .map(|sp| {
            let mut state = ExecState::at(start);
            let mut seen = visible_mask(&start, &scenario.pois, &scenario.sensor, &scenario.workspace);
            let mut collided = false;
            let mut length = 0.0;
            for w in plan.path.windows(2) {
                let (seg, exit) = simulate_segment(&vs[w[0]], &vs[w[1]], sp, &state, scenario)?;
                seen.union_with(&seg.seen);
                collided |= seg.collided;
                length += seg.length;
                state = exit;
            }
            Ok(ExecutionTrace {
                index: sp.sample_index,
                seen: seen.iter().collect(),
                collided,
                length,
            })
        })
        .collect::<Result<_>>()?;

    let n = n_exec as f64;
    let k = scenario.pois.len();
    let mut counts = vec![0usize; k];
    for t in &traces {
        for &j in &t.seen {
            counts[j] += 1;
        }
    }
    let coverage_mean = traces.iter().map(|t| t.seen.len() as f64).sum::<f64>() / n;
    let collision_rate = traces.iter().filter(|t| t.collided).count() as f64 / n;
    let length_mean = traces.iter().map(|t| t.length).sum::<f64>() / n;
    let length_std = if n_exec >= 2 {
        (traces.iter().map(|t| (t.length - length_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(EvalReport {
        n_exec,
        seed,
        model: scenario.model.kind,
        plan_model: plan.model,
        model_mismatch: scenario.model.kind != plan.model,
        poi_frequency: counts.iter().map(|&c| c as f64 / n).collect(),
        coverage_mean,
        coverage_fraction: coverage_mean / k as f64,
        collision_rate,
        length_mean,
        length_std,
        traces,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    /// Distance to the violated side; negative when the bound fails.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdicts {
    /// Empirical mean coverage is at least the certified lower bound.
    pub coverage: Verdict,
    /// Empirical collision rate is at most the certified upper bound.
    pub collision: Verdict,
    /// Empirical mean length lies in the certified interval.
    pub length: Verdict,
    pub model_mismatch: bool,
    pub notes: Vec<String>,
}

impl BoundVerdicts {
    pub fn all_hold(&self) -> bool {
        self.coverage.holds && self.collision.holds && self.length.holds
    }
}

/// Compares an execution report with a plan certificate.
pub fn check_bounds(report: &EvalReport, cert: &PlanCertificate) -> BoundVerdicts {
    let verdict = |margin: f64| Verdict { holds: margin >= 0.0, margin };
    let mut notes = Vec::new();
    if cert.guideline_only {
        notes.push("guideline only: the plan was selected from many candidates, so its bounds are not guaranteed at the stated confidence".to_string());
    }
    if report.model_mismatch {
        notes.push("model mismatch: bounds not guaranteed".to_string());
    }
    BoundVerdicts {
        coverage: verdict(report.coverage_mean - cert.coverage_lower),
        collision: verdict(cert.collision_upper - report.collision_rate),
        length: verdict((report.length_mean - cert.length_lower).min(cert.length_upper - report.length_mean)),
        model_mismatch: report.model_mismatch,
        notes,
    }
}
