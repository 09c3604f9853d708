//! Scenarios, roadmaps, the scenario file format, and random-graph construction.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{segment_in_collision, Aabb, PoiSet, Region, RegionKind, SensorModel, Vec3};
use crate::{Configuration, Workspace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// Euclidean distance between the endpoint positions, meters.
    pub length: f64,
}

/// Undirected graph embedded in configuration space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Roadmap {
    pub vertices: Vec<Configuration>,
    pub edges: Vec<Edge>,
    pub start: usize,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Roadmap {
    /// Validates and builds a roadmap. Every edge must be collision-free in `w`.
    pub fn new(vertices: Vec<Configuration>, pairs: &[(usize, usize)], start: usize, w: &Workspace) -> Result<Self> {
        if start >= vertices.len() {
            return Err(Error::config(
                "start.vertex",
                format!("vertex {start} out of range for {} vertices", vertices.len()),
            ));
        }
        for (i, c) in vertices.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::config(format!("roadmap.vertices[{i}]"), "non-finite coordinate"));
            }
            if !w.is_free(c.position) {
                return Err(Error::config(format!("roadmap.vertices[{i}]"), "not in free space"));
            }
        }
        let mut map = Self {
            vertices,
            edges: Vec::with_capacity(pairs.len()),
            start,
            adjacency: Vec::new(),
        };
        map.adjacency = vec![Vec::new(); map.vertices.len()];
        for (i, &(u, v)) in pairs.iter().enumerate() {
            let path = format!("roadmap.edges[{i}]");
            let n = map.vertices.len();
            if u >= n || v >= n {
                return Err(Error::config(path, format!("endpoint out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::config(path, "self-loop"));
            }
            if map.adjacency[u].iter().any(|&(x, _)| x == v) {
                return Err(Error::config(path, "duplicate edge"));
            }
            let (p, q) = (map.vertices[u].position, map.vertices[v].position);
            if segment_in_collision(p, q, w) {
                return Err(Error::config(path, "edge intersects an obstacle"));
            }
            map.push_edge(u, v);
        }
        Ok(map)
    }

    fn push_edge(&mut self, u: usize, v: usize) {
        let length = self.vertices[u].position.distance(self.vertices[v].position);
        let id = self.edges.len();
        self.edges.push(Edge { u, v, length });
        self.adjacency[u].push((v, id));
        self.adjacency[v].push((u, id));
    }

    /// `(neighbor, edge index)` pairs in edge-insertion order.
    pub fn neighbors(&self, u: usize) -> &[(usize, usize)] {
        &self.adjacency[u]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<&Edge> {
        self.adjacency[u].iter().find(|&&(x, _)| x == v).map(|&(_, id)| &self.edges[id])
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Execution-uncertainty model selected by a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Executed path equals the command path.
    Identity,
    /// Per-milestone Gaussian position error with region-dependent σ.
    Gaussian,
    /// Inertial drift from accelerometer and gyro biases in GNSS outage regions.
    GnssDrift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    /// Accelerometer bias standard deviation, m/s².
    #[serde(default)]
    pub sigma_a: f64,
    /// Gyro bias standard deviation, rad/s.
    #[serde(default)]
    pub sigma_g: f64,
    /// Nominal speed, m/s.
    #[serde(default)]
    pub speed: f64,
}

impl ModelSpec {
    pub fn identity() -> Self {
        Self {
            kind: ModelKind::Identity,
            sigma_a: 0.0,
            sigma_g: 0.0,
            speed: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// 2 or 3.
    pub dim: usize,
    pub workspace: Workspace,
    pub pois: PoiSet<f64>,
    pub sensor: SensorModel<f64>,
    pub regions: Vec<Region<f64>>,
    pub roadmap: Roadmap,
    pub model: ModelSpec,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawScenario = serde_json::from_str(text)?;
        raw.into_scenario()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn start_config(&self) -> &Configuration {
        &self.roadmap.vertices[self.roadmap.start]
    }

    pub fn region_at(&self, pos: Vec3<f64>) -> Result<&RegionKind<f64>> {
        crate::world::region_sigma(pos, &self.regions)
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(document: &str) -> Result<Scenario> {
    Scenario::from_json(document)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    fov_deg: f64,
    range: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    min: Option<Vec<f64>>,
    max: Option<Vec<f64>>,
    sigma: Option<f64>,
    #[serde(default)]
    outage: bool,
    sigma_equiv: Option<f64>,
    #[serde(default)]
    default: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPose {
    position: Vec<f64>,
    heading_deg: Option<f64>,
    orientation_deg: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoadmap {
    vertices: Vec<RawPose>,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRrg {
    n: usize,
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStart {
    vertex: Option<usize>,
    position: Option<Vec<f64>>,
    heading_deg: Option<f64>,
    orientation_deg: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    workspace: RawBox,
    #[serde(default)]
    obstacles: Vec<RawBox>,
    pois: Vec<Vec<f64>>,
    sensor: RawSensor,
    #[serde(default)]
    regions: Vec<RawRegion>,
    roadmap: Option<RawRoadmap>,
    rrg: Option<RawRrg>,
    start: RawStart,
    model: ModelSpec,
}

fn point(v: &[f64], dim: usize, path: &str) -> Result<Vec3<f64>> {
    if v.len() != dim {
        return Err(Error::config(path, format!("expected {dim} coordinates, got {}", v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::config(path, "non-finite coordinate"));
    }
    Ok(Vec3::new(v[0], v[1], if dim == 3 { v[2] } else { 0.0 }))
}

fn aabb(b: &RawBox, dim: usize, path: &str) -> Result<Aabb<f64>> {
    let out = Aabb::new(point(&b.min, dim, &format!("{path}.min"))?, point(&b.max, dim, &format!("{path}.max"))?);
    if !out.has_valid_extents() {
        return Err(Error::config(path, "max below min"));
    }
    Ok(out)
}

fn pose(position: Vec3<f64>, heading: Option<f64>, orientation: Option<[f64; 3]>, dim: usize, path: &str) -> Result<Configuration> {
    match (heading, orientation) {
        (Some(_), Some(_)) => Err(Error::config(path, "give either heading_deg or orientation_deg, not both")),
        (_, Some(_)) if dim == 2 => Err(Error::config(path, "orientation_deg is only valid in 3D")),
        (_, Some([r, p, y])) => Ok(Configuration::new(position, r.to_radians(), p.to_radians(), y.to_radians())),
        (h, None) => Ok(Configuration::new(position, 0.0, 0.0, h.unwrap_or(0.0).to_radians())),
    }
}

impl RawScenario {
    fn into_scenario(self) -> Result<Scenario> {
        let dim = self.workspace.min.len();
        if dim != 2 && dim != 3 {
            return Err(Error::config("workspace.min", "expected 2 or 3 coordinates"));
        }
        let bounds = aabb(&self.workspace, dim, "workspace")?;
        let obstacles = self
            .obstacles
            .iter()
            .enumerate()
            .map(|(i, b)| aabb(b, dim, &format!("obstacles[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let workspace = Workspace::new(bounds, obstacles)?;
        let points = self
            .pois
            .iter()
            .enumerate()
            .map(|(i, p)| point(p, dim, &format!("pois[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let pois = PoiSet::new(points)?;
        let sensor = SensorModel::new(self.sensor.fov_deg.to_radians(), self.sensor.range)?;

        let mut regions = Vec::with_capacity(self.regions.len());
        for (i, r) in self.regions.iter().enumerate() {
            let path = format!("regions[{i}]");
            let area = match (&r.min, &r.max, r.default) {
                (None, None, true) => None,
                (Some(lo), Some(hi), false) => Some(aabb(&RawBox { min: lo.clone(), max: hi.clone() }, dim, &path)?),
                _ => return Err(Error::config(path, "needs either min and max, or default: true")),
            };
            let kind = match (r.outage, r.sigma, r.sigma_equiv) {
                (false, Some(sigma), None) => RegionKind::Sigma { sigma },
                (true, None, Some(sigma_equiv)) => RegionKind::Outage { sigma_equiv },
                (false, _, _) => return Err(Error::config(path, "needs sigma")),
                (true, _, _) => return Err(Error::config(path, "outage regions need sigma_equiv and no sigma")),
            };
            let s = kind.equivalent_sigma();
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::config(path, "sigma must be finite and non-negative"));
            }
            regions.push(Region { area, kind });
        }

        let model = self.model;
        for (name, v) in [("model.sigma_a", model.sigma_a), ("model.sigma_g", model.sigma_g), ("model.speed", model.speed)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be finite and non-negative"));
            }
        }
        if model.kind == ModelKind::GnssDrift && model.speed <= 0.0 {
            return Err(Error::config("model.speed", "drift model needs a positive speed"));
        }
        if model.kind != ModelKind::Identity && !regions.iter().any(|r| r.area.is_none()) {
            return Err(Error::config("regions", "a default region is required"));
        }

        let roadmap = match (self.roadmap, self.rrg) {
            (Some(_), Some(_)) => return Err(Error::config("roadmap", "give either roadmap or rrg, not both")),
            (None, None) => return Err(Error::config("roadmap", "missing roadmap or rrg")),
            (Some(rm), None) => {
                let vertices = rm
                    .vertices
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let path = format!("roadmap.vertices[{i}]");
                        pose(point(&v.position, dim, &path)?, v.heading_deg, v.orientation_deg, dim, &path)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let start = self
                    .start
                    .vertex
                    .ok_or_else(|| Error::config("start.vertex", "required with an explicit roadmap"))?;
                let pairs: Vec<(usize, usize)> = rm.edges.iter().map(|e| (e[0], e[1])).collect();
                Roadmap::new(vertices, &pairs, start, &workspace)?
            }
            (None, Some(rrg)) => {
                let s = &self.start;
                let pos = s
                    .position
                    .as_ref()
                    .ok_or_else(|| Error::config("start.position", "required with rrg"))?;
                let c = pose(point(pos, dim, "start.position")?, s.heading_deg, s.orientation_deg, dim, "start")?;
                let root = Roadmap::new(vec![c], &[], 0, &workspace)?;
                let mut sc = Scenario {
                    dim,
                    workspace: workspace.clone(),
                    pois: pois.clone(),
                    sensor,
                    regions: regions.clone(),
                    roadmap: root,
                    model,
                };
                sc.roadmap = build_rrg(&sc, rrg.n, rrg.seed)?;
                return Ok(sc);
            }
        };
        Ok(Scenario {
            dim,
            workspace,
            pois,
            sensor,
            regions,
            roadmap,
            model,
        })
    }
}

/// Connection-radius constant for a `dim`-dimensional box.
pub fn rrg_gamma(bounds: &Aabb<f64>, dim: usize) -> f64 {
    let d = dim as f64;
    let volume: f64 = (0..dim).map(|i| bounds.extent(i)).product();
    let unit_ball = if dim == 2 {
        std::f64::consts::PI
    } else {
        4.0 / 3.0 * std::f64::consts::PI
    };
    2.0 * (1.0 + 1.0 / d).powf(1.0 / d) * (volume / unit_ball).powf(1.0 / d)
}

/// Random geometric graph grown from the scenario's start configuration.
///
/// Each accepted sample is joined to its nearest vertex and to every vertex within
/// `γ (ln n / n)^(1/d)`, keeping only collision-free edges; samples that cannot be
/// joined are rejected.
pub fn build_rrg(scenario: &Scenario, n: usize, seed: u64) -> Result<Roadmap> {
    if n == 0 {
        return Err(Error::arg("rrg needs n >= 1"));
    }
    let w = &scenario.workspace;
    let dim = scenario.dim;
    let start = *scenario.start_config();
    let mut map = Roadmap::new(vec![start], &[], 0, w)?;
    let gamma = rrg_gamma(&w.bounds, dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 100 * n;
    let mut attempts = 0;
    while map.vertices.len() < n {
        if attempts >= max_attempts {
            return Err(Error::Construction(format!(
                "placed {} of {n} vertices in {max_attempts} attempts",
                map.vertices.len()
            )));
        }
        attempts += 1;
        let (lo, hi) = (w.bounds.min, w.bounds.max);
        let p = Vec3::new(
            rng.random_range(lo.x..=hi.x),
            rng.random_range(lo.y..=hi.y),
            if dim == 3 { rng.random_range(lo.z..=hi.z) } else { lo.z },
        );
        let yaw = rng.random_range(0.0..std::f64::consts::TAU);
        let pitch = if dim == 3 {
            rng.random_range(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2)
        } else {
            0.0
        };
        if !w.is_free(p) {
            continue;
        }
        let count = map.vertices.len() + 1;
        let radius = if count >= 2 {
            gamma * ((count as f64).ln() / count as f64).powf(1.0 / dim as f64)
        } else {
            0.0
        };
        let dists: Vec<f64> = map.vertices.iter().map(|c| c.position.distance(p)).collect();
        let nearest = dists
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("roadmap has a root");
        let linked: Vec<usize> = (0..dists.len())
            .filter(|&i| i == nearest || dists[i] <= radius)
            .filter(|&i| !segment_in_collision(map.vertices[i].position, p, w))
            .collect();
        if linked.is_empty() {
            continue;
        }
        let id = map.vertices.len();
        map.vertices.push(Configuration::new(p, 0.0, pitch, yaw));
        map.adjacency.push(Vec::new());
        for i in linked {
            map.push_edge(i, id);
        }
    }
    Ok(map)
}
