use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{simulate_segment, ExecState, SampleParams};
use crate::roadmap::Scenario;
use crate::world::visible_mask;

/// Entries this close to one are treated as certain inspections.
pub const NEAR_ONE: f64 = 1e-12;

/// Inspection probability vector: entry `j` estimates the chance POI `j` is seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ipv {
    pub probs: Vec<f64>,
}

impl Ipv {
    pub fn zeros(k: usize) -> Self {
        Self { probs: vec![0.0; k] }
    }

    pub fn from_probs(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Expected number of inspected POIs.
    pub fn coverage(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `p ← 1 − (1 − p_step)(1 − p)` entrywise.
    pub fn accumulate(&mut self, step: &[f64]) {
        for (p, &s) in self.probs.iter_mut().zip(step) {
            let next = 1.0 - (1.0 - s) * (1.0 - *p);
            *p = if next > 1.0 - NEAR_ONE { 1.0 } else { next };
        }
    }

    /// True iff every entry is at least the corresponding entry of `other`.
    pub fn covers(&self, other: &Ipv) -> bool {
        self.probs.iter().zip(&other.probs).all(|(a, b)| a >= b)
    }

    pub fn max_with(&mut self, other: &Ipv) {
        for (a, &b) in self.probs.iter_mut().zip(&other.probs) {
            *a = a.max(b);
        }
    }
}

#[derive(Debug)]
struct PathLink {
    vertex: usize,
    prev: Option<Arc<PathLink>>,
}

/// Command path as a shared, persistent list of roadmap vertices.
#[derive(Debug, Clone)]
pub struct CommandPath {
    tail: Arc<PathLink>,
    len: usize,
}

impl CommandPath {
    pub fn start(vertex: usize) -> Self {
        Self {
            tail: Arc::new(PathLink { vertex, prev: None }),
            len: 1,
        }
    }

    pub fn push(&self, vertex: usize) -> Self {
        Self {
            tail: Arc::new(PathLink {
                vertex,
                prev: Some(self.tail.clone()),
            }),
            len: self.len + 1,
        }
    }

    pub fn last(&self) -> usize {
        self.tail.vertex
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len);
        let mut cur = Some(&self.tail);
        while let Some(link) = cur {
            out.push(link.vertex);
            cur = link.prev.as_ref();
        }
        out.reverse();
        out
    }
}

impl PartialEq for CommandPath {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && (Arc::ptr_eq(&self.tail, &other.tail) || self.vertices() == other.vertices())
    }
}

/// Execution of one sample along the node's command path.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrack {
    pub state: ExecState,
    /// Executed length so far, meters.
    pub length: f64,
}

/// Sample-averaged outcome of executing one command segment.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEstimate {
    /// Fraction of samples that saw each POI at the segment's endpoint.
    pub seen: Vec<f64>,
    /// Length added to the path estimates.
    pub length: f64,
    /// Fraction of samples whose executed segment collided.
    pub coll: f64,
}

/// Search node: an achievable path (AP) with its estimates and the optimistic
/// potentially achievable path (PAP) summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub vertex: usize,
    pub path: CommandPath,
    pub tracks: Arc<Vec<SampleTrack>>,
    pub ap_ipv: Ipv,
    pub ap_len: f64,
    pub pap_ipv: Ipv,
    pub pap_len: f64,
    /// Estimated collision probability.
    pub coll: f64,
}

impl SearchNode {
    /// Node reached by appending `vertex` with the given step estimate.
    pub fn advance(&self, vertex: usize, step: &StepEstimate, tracks: Arc<Vec<SampleTrack>>) -> SearchNode {
        let mut next = SearchNode {
            vertex,
            path: self.path.push(vertex),
            tracks,
            ap_ipv: self.ap_ipv.clone(),
            ap_len: self.ap_len + step.length,
            pap_ipv: self.pap_ipv.clone(),
            pap_len: self.pap_len + step.length,
            coll: 1.0 - (1.0 - self.coll) * (1.0 - step.coll),
        };
        next.ap_ipv.accumulate(&step.seen);
        next.pap_ipv.accumulate(&step.seen);
        debug_assert!(next.pap_covers_ap());
        next
    }

    /// PAP coverage is at least AP coverage entrywise and PAP length at most AP length.
    pub fn pap_covers_ap(&self) -> bool {
        self.pap_ipv.covers(&self.ap_ipv) && self.pap_len <= self.ap_len
    }

    /// Mean executed length over samples.
    pub fn mean_track_length(&self) -> f64 {
        self.tracks.iter().map(|t| t.length).sum::<f64>() / self.tracks.len() as f64
    }
}

/// Trivial path at the start vertex; every sample starts exactly there.
pub fn make_initial_node(scenario: &Scenario, samples: &[SampleParams]) -> SearchNode {
    let start = *scenario.start_config();
    let seen = visible_mask(&start, &scenario.pois, &scenario.sensor, &scenario.workspace);
    let mut ipv = Ipv::zeros(scenario.pois.len());
    for j in seen.iter() {
        ipv.probs[j] = 1.0;
    }
    let tracks = samples
        .iter()
        .map(|_| SampleTrack {
            state: ExecState::at(start),
            length: 0.0,
        })
        .collect();
    SearchNode {
        vertex: scenario.roadmap.start,
        path: CommandPath::start(scenario.roadmap.start),
        tracks: Arc::new(tracks),
        ap_ipv: ipv.clone(),
        ap_len: 0.0,
        pap_ipv: ipv,
        pap_len: 0.0,
        coll: 0.0,
    }
}

/// Cost of traversing an edge in the uncertainty-penalized baseline:
/// `length · (1 + λ σ̄)` with `σ̄` the mean region σ at both endpoints.
pub fn lum_edge_cost(edge: usize, scenario: &Scenario, lambda: f64) -> Result<f64> {
    let e = scenario
        .roadmap
        .edges
        .get(edge)
        .ok_or_else(|| Error::arg(format!("edge {edge} not in roadmap")))?;
    if lambda == 0.0 {
        return Ok(e.length);
    }
    let vs = &scenario.roadmap.vertices;
    let su = scenario.region_at(vs[e.u].position)?.equivalent_sigma();
    let sv = scenario.region_at(vs[e.v].position)?.equivalent_sigma();
    Ok(e.length * (1.0 + lambda * 0.5 * (su + sv)))
}

/// Extends `n` along the roadmap edge to `v`, simulating every sample.
///
/// With `lambda > 0` the step length is the penalized edge cost instead of the mean
/// executed length; per-sample tracks always record executed meters.
pub fn extend(n: &SearchNode, v: usize, scenario: &Scenario, samples: &[SampleParams], lambda: f64) -> Result<SearchNode> {
    let u = n.vertex;
    let &(_, edge) = scenario
        .roadmap
        .neighbors(u)
        .iter()
        .find(|&&(x, _)| x == v)
        .ok_or_else(|| Error::arg(format!("no roadmap edge {u} -> {v}")))?;
    let cu = &scenario.roadmap.vertices[u];
    let cv = &scenario.roadmap.vertices[v];
    let step_one = |(sp, track): (&SampleParams, &SampleTrack)| {
        simulate_segment(cu, cv, sp, &track.state, scenario).map(|(seg, exit)| {
            let length = track.length + seg.length;
            (seg, SampleTrack { state: exit, length })
        })
    };
    let pairs = samples.iter().zip(n.tracks.iter());
    let results: Vec<_> = if samples.len() >= 32 {
        pairs.collect::<Vec<_>>().into_par_iter().with_min_len(8).map(step_one).collect::<Result<_>>()?
    } else {
        pairs.map(step_one).collect::<Result<_>>()?
    };
    let m = samples.len() as f64;
    let k = scenario.pois.len();
    let mut counts = vec![0usize; k];
    let mut collided = 0usize;
    let mut total_len = 0.0;
    let mut tracks = Vec::with_capacity(results.len());
    for (seg, track) in results {
        for j in seg.seen.iter() {
            counts[j] += 1;
        }
        collided += usize::from(seg.collided);
        total_len += seg.length;
        tracks.push(track);
    }
    let length = if lambda > 0.0 {
        lum_edge_cost(edge, scenario, lambda)?
    } else {
        total_len / m
    };
    let step = StepEstimate {
        seen: counts.iter().map(|&c| c as f64 / m).collect(),
        length,
        coll: collided as f64 / m,
    };
    Ok(n.advance(v, &step, Arc::new(tracks)))
}

/// Collision test against threshold `rho`; at `rho == 0` any positive estimate collides.
pub fn is_in_collision(n: &SearchNode, rho: f64) -> bool {
    if rho > 0.0 {
        n.coll >= rho
    } else {
        n.coll > 0.0
    }
}

/// `n1`'s PAP is at least as good as `n2`'s in every POI and in length.
pub fn dominates(n1: &SearchNode, n2: &SearchNode) -> bool {
    n1.pap_ipv.covers(&n2.pap_ipv) && n1.pap_len <= n2.pap_len
}

/// `n1 ⊕ n2`: keeps `n1`'s AP and the optimistic envelope of both PAPs.
pub fn subsume(n1: &SearchNode, n2: &SearchNode) -> SearchNode {
    let mut out = n1.clone();
    out.pap_ipv.max_with(&n2.pap_ipv);
    out.pap_len = n1.pap_len.min(n2.pap_len);
    debug_assert!(out.pap_covers_ap());
    out
}

/// AP coverage within a factor `kappa` of PAP coverage and AP length within `1 + eps` of PAP length.
pub fn is_ek_bounded(n: &SearchNode, eps: f64, kappa: f64) -> bool {
    n.ap_ipv.coverage() >= kappa * n.pap_ipv.coverage() && n.ap_len <= (1.0 + eps) * n.pap_len
}

/// AP coverage reaches `k · kappa`.
pub fn is_goal(n: &SearchNode, kappa: f64, k: usize) -> bool {
    n.ap_ipv.coverage() >= k as f64 * kappa
}
