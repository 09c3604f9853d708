//! Best-first search over the roadmap with Monte-Carlo inspection estimates, plus the
//! deterministic (one identity sample) and uncertainty-penalized baselines.

mod node;
mod open;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use node::{
    dominates, extend, is_ek_bounded, is_goal, is_in_collision, lum_edge_cost, make_initial_node, subsume,
    CommandPath, Ipv, SampleTrack, SearchNode, StepEstimate, NEAR_ONE,
};

use crate::error::{Error, Result};
use crate::motion::draw_samples;
use crate::roadmap::{ModelKind, ModelSpec, Scenario};
use crate::stats::PlanCertificate;
use crate::Configuration;
use open::OpenList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Monte-Carlo search with the scenario's uncertainty model.
    Irisuu,
    /// One sample of the identity model: deterministic inspection planning.
    Iris,
    /// Deterministic planning with uncertainty-penalized edge costs.
    Lum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub algorithm: Algorithm,
    /// Monte-Carlo samples.
    pub m: usize,
    /// Required fraction of POIs covered.
    pub kappa: f64,
    /// Allowed relative length slack between AP and PAP.
    pub eps: f64,
    /// Collision-probability threshold.
    pub rho_coll: f64,
    /// One minus the confidence level of the certificates.
    pub alpha: f64,
    /// Edge-cost penalty weight for the penalized baseline, per meter of σ.
    pub lambda: f64,
    pub seed: u64,
    /// Maximum number of generated nodes.
    pub node_budget: usize,
}

impl Default for PlanParams {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Irisuu,
            m: 100,
            kappa: 0.99,
            eps: 3.0,
            rho_coll: 0.0,
            alpha: 0.05,
            lambda: 1.0,
            seed: 0,
            node_budget: 1_000_000,
        }
    }
}

impl PlanParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::arg("m must be at least 1"));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::arg(format!("kappa must lie in (0, 1], got {}", self.kappa)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::arg(format!("eps must be finite and non-negative, got {}", self.eps)));
        }
        if !(0.0..=1.0).contains(&self.rho_coll) {
            return Err(Error::arg(format!("rho_coll must lie in [0, 1], got {}", self.rho_coll)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::arg(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::arg(format!("lambda must be finite and non-negative, got {}", self.lambda)));
        }
        if self.node_budget == 0 {
            return Err(Error::arg("node_budget must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
    pub pruned_collision: usize,
    pub pruned_dominated: usize,
    pub subsumed: usize,
    /// Nodes inserted into OPEN that were not (ε,κ)-bounded. Always zero.
    pub unbounded_inserts: usize,
    pub open_peak: usize,
}

/// A command path with its planning-time estimates and certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandPlan {
    /// Model the estimates were computed under.
    pub model: ModelKind,
    /// Roadmap vertex indices, starting at the start vertex.
    pub path: Vec<usize>,
    pub configurations: Vec<Configuration>,
    pub ap_ipv: Vec<f64>,
    /// Sum of `ap_ipv`, POIs.
    pub coverage: f64,
    /// Mean executed length over the planning samples, meters.
    pub length: f64,
    /// Path cost the search minimized (equal to `length` except for the penalized baseline).
    pub search_cost: f64,
    /// Estimated collision probability.
    pub coll: f64,
    pub params: PlanParams,
    pub certificate: PlanCertificate,
    pub stats: SearchStats,
}

impl CommandPlan {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Found(Box<CommandPlan>),
    /// OPEN emptied without reaching the coverage goal.
    NoSolution(SearchStats),
    /// The node budget ran out first.
    BudgetExceeded(SearchStats),
}

impl PlanOutcome {
    pub fn plan(&self) -> Option<&CommandPlan> {
        match self {
            PlanOutcome::Found(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_plan(self) -> Option<CommandPlan> {
        match self {
            PlanOutcome::Found(p) => Some(*p),
            _ => None,
        }
    }
}

/// Model and sample count the algorithm actually plans with.
fn effective_setup(scenario: &Scenario, params: &PlanParams) -> (ModelSpec, usize, f64) {
    match params.algorithm {
        Algorithm::Irisuu => (scenario.model, params.m, 0.0),
        Algorithm::Iris => (ModelSpec::identity(), 1, 0.0),
        Algorithm::Lum => (ModelSpec::identity(), 1, params.lambda),
    }
}

/// Runs the search. Returns the first popped node meeting the coverage goal.
pub fn plan(scenario: &Scenario, params: &PlanParams) -> Result<PlanOutcome> {
    params.validate()?;
    let (model, m, lambda) = effective_setup(scenario, params);
    let mut params = *params;
    params.m = m;
    let mut sc = scenario.clone();
    sc.model = model;
    let sc = &sc;
    let samples = draw_samples(&model, m, params.seed)?;
    let k = sc.pois.len();
    let (eps, kappa) = (params.eps, params.kappa);

    let mut stats = SearchStats::default();
    let mut open = OpenList::new(sc.roadmap.len());
    let mut closed: Vec<Vec<(Ipv, f64)>> = vec![Vec::new(); sc.roadmap.len()];
    open.insert(make_initial_node(sc, &samples));
    stats.open_peak = 1;

    while let Some(n) = open.pop_best() {
        stats.expanded += 1;
        close(&mut closed[n.vertex], &n);
        if is_goal(&n, kappa, k) {
            return Ok(PlanOutcome::Found(Box::new(command_plan(sc, &n, params, stats)?)));
        }
        for &(v, _) in sc.roadmap.neighbors(n.vertex) {
            if stats.generated >= params.node_budget {
                return Ok(PlanOutcome::BudgetExceeded(stats));
            }
            stats.generated += 1;
            let mut child = extend(&n, v, sc, &samples, lambda)?;
            if is_in_collision(&child, params.rho_coll) {
                stats.pruned_collision += 1;
                continue;
            }
            if closed[v].iter().any(|(ipv, len)| ipv.covers(&child.pap_ipv) && *len <= child.pap_len) {
                stats.pruned_dominated += 1;
                continue;
            }
            let child_cov = child.ap_ipv.coverage();
            let mut absorbed = false;
            for id in open.at_vertex(v) {
                let other = open.get(id);
                if other.ap_ipv.coverage() > child_cov {
                    let merged = subsume(other, &child);
                    if is_ek_bounded(&merged, eps, kappa) {
                        open.replace(id, merged);
                        absorbed = true;
                        break;
                    }
                }
            }
            if absorbed {
                stats.subsumed += 1;
                continue;
            }
            for id in open.at_vertex(v) {
                let other = open.get(id);
                if child_cov > other.ap_ipv.coverage() {
                    let merged = subsume(&child, other);
                    if is_ek_bounded(&merged, eps, kappa) {
                        open.remove(id);
                        child = merged;
                        stats.subsumed += 1;
                    }
                }
            }
            if !is_ek_bounded(&child, eps, kappa) {
                stats.unbounded_inserts += 1;
            }
            open.insert(child);
            stats.open_peak = stats.open_peak.max(open.len());
        }
    }
    Ok(PlanOutcome::NoSolution(stats))
}

/// Adds a closed node's PAP to its vertex's Pareto frontier.
fn close(frontier: &mut Vec<(Ipv, f64)>, n: &SearchNode) {
    if frontier.iter().any(|(ipv, len)| ipv.covers(&n.pap_ipv) && *len <= n.pap_len) {
        return;
    }
    frontier.retain(|(ipv, len)| !(n.pap_ipv.covers(ipv) && n.pap_len <= *len));
    frontier.push((n.pap_ipv.clone(), n.pap_len));
}

fn command_plan(sc: &Scenario, n: &SearchNode, params: PlanParams, stats: SearchStats) -> Result<CommandPlan> {
    let path = n.path.vertices();
    let lengths: Vec<f64> = n.tracks.iter().map(|t| t.length).collect();
    let certificate = PlanCertificate::new(&n.ap_ipv.probs, n.coll, &lengths, params.m, params.alpha)?;
    Ok(CommandPlan {
        model: sc.model.kind,
        configurations: path.iter().map(|&v| sc.roadmap.vertices[v]).collect(),
        path,
        coverage: n.ap_ipv.coverage(),
        ap_ipv: n.ap_ipv.probs.clone(),
        length: n.mean_track_length(),
        search_cost: n.ap_len,
        coll: n.coll,
        params,
        certificate,
        stats,
    })
}
