//! Shared fixtures and oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;

use irisuu::world::sees;
use irisuu::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load_fixture(name: &str) -> Scenario {
    Scenario::load(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn free(p: [f64; 2], obstacles: &[[f64; 4]], margin: f64) -> bool {
    obstacles
        .iter()
        .all(|o| p[0] < o[0] - margin || p[0] > o[2] + margin || p[1] < o[1] - margin || p[1] > o[3] + margin)
}

/// A random connected 2D roadmap scenario with the identity model, as a JSON document.
pub fn random_identity_scenario(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let obstacles: Vec<[f64; 4]> = (0..rng.random_range(1..=4))
            .map(|_| {
                let (x, y) = (rng.random_range(1.0..8.0), rng.random_range(1.0..8.0));
                [x, y, x + rng.random_range(0.3..2.0), y + rng.random_range(0.3..2.0)]
            })
            .collect();
        let point = |rng: &mut ChaCha8Rng| loop {
            let p = [rng.random_range(0.2..9.8), rng.random_range(0.2..9.8)];
            if free(p, &obstacles, 0.05) {
                return p;
            }
        };
        let n = rng.random_range(10..=16);
        let verts: Vec<[f64; 2]> = (0..n).map(|_| point(&mut rng)).collect();
        let headings: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..360.0)).collect();
        let pois: Vec<[f64; 2]> = (0..rng.random_range(6..=12)).map(|_| point(&mut rng)).collect();
        let fov = [90.0, 180.0, 360.0][rng.random_range(0..3)];
        let range = rng.random_range(2.5..5.0);

        let seg_free = |a: [f64; 2], b: [f64; 2]| {
            (0..=400).all(|i| {
                let t = i as f64 / 400.0;
                free([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], &obstacles, 0.02)
            })
        };
        let mut edges = Vec::new();
        for i in 0..n {
            let mut near: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let d = |j: usize| (verts[i][0] - verts[j][0]).hypot(verts[i][1] - verts[j][1]);
            near.sort_by(|&a, &b| d(a).total_cmp(&d(b)));
            for &j in near.iter().take(4) {
                let e = [i.min(j), i.max(j)];
                if !edges.contains(&e) && seg_free(verts[i], verts[j]) {
                    edges.push(e);
                }
            }
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for e in &edges {
                let w = if e[0] == u { e[1] } else if e[1] == u { e[0] } else { continue };
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            continue;
        }
        let doc = json!({
            "workspace": {"min": [0, 0], "max": [10, 10]},
            "obstacles": obstacles.iter().map(|o| json!({"min": [o[0], o[1]], "max": [o[2], o[3]]})).collect::<Vec<_>>(),
            "pois": pois,
            "sensor": {"fov_deg": fov, "range": range},
            "roadmap": {
                "vertices": verts.iter().zip(&headings).map(|(p, h)| json!({"position": p, "heading_deg": h})).collect::<Vec<_>>(),
                "edges": edges,
            },
            "start": {"vertex": 0},
            "model": {"type": "identity"},
        });
        let doc = doc.to_string();
        if Scenario::from_json(&doc).is_ok() {
            return doc;
        }
    }
}

/// Bitmask of POIs seen from each roadmap vertex.
pub fn vertex_masks(s: &Scenario) -> Vec<u64> {
    assert!(s.pois.len() <= 64);
    s.roadmap
        .vertices
        .iter()
        .map(|c| {
            s.pois
                .points
                .iter()
                .enumerate()
                .filter(|(_, p)| sees(c, **p, &s.sensor, &s.workspace))
                .fold(0u64, |m, (j, _)| m | (1 << j))
        })
        .collect()
}

#[derive(Clone)]
struct RefNode {
    vertex: usize,
    path: Vec<usize>,
    ap: u64,
    ap_len: f64,
    pap: u64,
    pap_len: f64,
}

impl RefNode {
    fn bounded(&self, eps: f64, kappa: f64) -> bool {
        f64::from(self.ap.count_ones()) >= kappa * f64::from(self.pap.count_ones())
            && self.ap_len <= (1.0 + eps) * self.pap_len
    }
}

// OPEN order: most PAP POIs, then shortest AP, then oldest.
type RefKey = (std::cmp::Reverse<u32>, u64, u64);

fn key(n: &RefNode, seq: u64) -> RefKey {
    (std::cmp::Reverse(n.pap.count_ones()), n.ap_len.to_bits(), seq)
}

pub enum RefOutcome {
    Found(Vec<usize>),
    NoSolution,
    Budget,
}

/// Deterministic inspection planning over POI bitmasks, written independently of the
/// crate's planner. Dominance is checked against a per-vertex Pareto frontier of
/// closed nodes; subsuming follows the two AP-coverage gates.
pub fn reference_iris(s: &Scenario, kappa: f64, eps: f64, budget: usize) -> RefOutcome {
    let masks = vertex_masks(s);
    let rm = &s.roadmap;
    let k = s.pois.len() as f64;
    let mut open: BTreeMap<RefKey, RefNode> = BTreeMap::new();
    let mut at: Vec<Vec<u64>> = vec![Vec::new(); rm.len()];
    let mut keys: BTreeMap<u64, RefKey> = BTreeMap::new();
    let mut closed: Vec<Vec<(u64, f64)>> = vec![Vec::new(); rm.len()];
    let mut next_seq = 0u64;
    let mut generated = 0usize;

    let mut insert = |open: &mut BTreeMap<RefKey, RefNode>, at: &mut Vec<Vec<u64>>, keys: &mut BTreeMap<u64, RefKey>, n: RefNode| {
        let kk = key(&n, next_seq);
        at[n.vertex].push(next_seq);
        keys.insert(next_seq, kk);
        open.insert(kk, n);
        next_seq += 1;
    };
    let start = rm.start;
    insert(
        &mut open,
        &mut at,
        &mut keys,
        RefNode {
            vertex: start,
            path: vec![start],
            ap: masks[start],
            ap_len: 0.0,
            pap: masks[start],
            pap_len: 0.0,
        },
    );

    while let Some((kk, n)) = open.pop_first() {
        let seq = kk.2;
        at[n.vertex].retain(|&x| x != seq);
        keys.remove(&seq);
        let front = &mut closed[n.vertex];
        if !front.iter().any(|&(m, l)| m & n.pap == n.pap && l <= n.pap_len) {
            front.retain(|&(m, l)| !(n.pap & m == m && n.pap_len <= l));
            front.push((n.pap, n.pap_len));
        }
        if f64::from(n.ap.count_ones()) >= k * kappa {
            return RefOutcome::Found(n.path);
        }
        let nbrs: Vec<usize> = rm.neighbors(n.vertex).iter().map(|&(v, _)| v).collect();
        for v in nbrs {
            if generated >= budget {
                return RefOutcome::Budget;
            }
            generated += 1;
            let step = rm.vertices[n.vertex].position.distance(rm.vertices[v].position);
            let mut path = n.path.clone();
            path.push(v);
            let mut child = RefNode {
                vertex: v,
                path,
                ap: n.ap | masks[v],
                ap_len: n.ap_len + step,
                pap: n.pap | masks[v],
                pap_len: n.pap_len + step,
            };
            if closed[v].iter().any(|&(m, l)| m & child.pap == child.pap && l <= child.pap_len) {
                continue;
            }
            let cov = child.ap.count_ones();
            let mut absorbed = false;
            for &sq in &at[v] {
                let other = &open[&keys[&sq]];
                if other.ap.count_ones() > cov {
                    let merged = RefNode {
                        pap: other.pap | child.pap,
                        pap_len: other.pap_len.min(child.pap_len),
                        ..other.clone()
                    };
                    if merged.bounded(eps, kappa) {
                        let old = keys[&sq];
                        open.remove(&old);
                        let nk = key(&merged, sq);
                        keys.insert(sq, nk);
                        open.insert(nk, merged);
                        absorbed = true;
                        break;
                    }
                }
            }
            if absorbed {
                continue;
            }
            for sq in at[v].clone() {
                let other = open[&keys[&sq]].clone();
                if cov > other.ap.count_ones() {
                    let merged = RefNode {
                        pap: child.pap | other.pap,
                        pap_len: child.pap_len.min(other.pap_len),
                        ..child.clone()
                    };
                    if merged.bounded(eps, kappa) {
                        open.remove(&keys[&sq]);
                        keys.remove(&sq);
                        at[v].retain(|&x| x != sq);
                        child = merged;
                    }
                }
            }
            insert(&mut open, &mut at, &mut keys, child);
        }
    }
    RefOutcome::NoSolution
}
