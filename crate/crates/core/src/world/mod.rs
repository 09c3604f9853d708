//! Workspace geometry, sensing, and collision predicates for point robots.

mod geometry;
mod poi_mask;

pub use geometry::{Aabb, Mat3, Vec3};
pub use poi_mask::PoiMask;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Robot pose. Angles are radians in `[0, 2π)`; planar robots use only `yaw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration<T> {
    pub position: Vec3<T>,
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
}

impl<T: Real> Configuration<T> {
    pub fn new(position: Vec3<T>, roll: T, pitch: T, yaw: T) -> Self {
        Self {
            position,
            roll: normalize_angle(roll),
            pitch: normalize_angle(pitch),
            yaw: normalize_angle(yaw),
        }
    }

    pub fn planar(x: T, y: T, heading: T) -> Self {
        Self::new(Vec3::planar(x, y), T::zero(), T::zero(), heading)
    }

    pub fn with_position(&self, position: Vec3<T>) -> Self {
        Self { position, ..*self }
    }

    /// Body-to-world rotation (Z-Y-X convention).
    pub fn rotation(&self) -> Mat3<T> {
        Mat3::from_euler_zyx(self.roll, self.pitch, self.yaw)
    }

    /// Sensor boresight: the body x-axis expressed in the world frame.
    pub fn boresight(&self) -> Vec3<T> {
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        Vec3::new(cy * cp, sy * cp, -sp)
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.roll.is_finite()
            && self.pitch.is_finite()
            && self.yaw.is_finite()
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle<T: Real>(a: T) -> T {
    let tau = T::TAU();
    let r = a % tau;
    let r = if r < T::zero() { r + tau } else { r };
    // `r + tau` can round up to exactly tau for tiny negative inputs
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

/// Bounds plus box obstacles, all in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace<T> {
    pub bounds: Aabb<T>,
    pub obstacles: Vec<Aabb<T>>,
}

impl<T: Real> Workspace<T> {
    pub fn new(bounds: Aabb<T>, obstacles: Vec<Aabb<T>>) -> Result<Self> {
        if !bounds.has_valid_extents() {
            return Err(Error::config("workspace", "bounds have negative extent"));
        }
        for (i, o) in obstacles.iter().enumerate() {
            if !o.has_valid_extents() {
                return Err(Error::config(format!("obstacles[{i}]"), "negative extent"));
            }
            if !bounds.contains_box(o) {
                return Err(Error::config(format!("obstacles[{i}]"), "not contained in bounds"));
            }
        }
        Ok(Self { bounds, obstacles })
    }

    /// True iff `p` lies in free space (inside bounds, outside every obstacle).
    pub fn is_free(&self, p: Vec3<T>) -> bool {
        !segment_in_collision(p, p, self)
    }
}

/// Conical range-limited sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel<T> {
    /// Full cone angle, radians.
    pub fov: T,
    /// Meters.
    pub range: T,
}

impl<T: Real> SensorModel<T> {
    pub fn new(fov: T, range: T) -> Result<Self> {
        if !(fov > T::zero() && fov <= T::TAU() + T::lit(1e-12)) {
            return Err(Error::config("sensor.fov_deg", "must lie in (0, 360]"));
        }
        if !(range > T::zero()) {
            return Err(Error::config("sensor.range", "must be positive"));
        }
        Ok(Self { fov, range })
    }
}

/// Ordered points of interest. Indices are zero-based in code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiSet<T> {
    pub points: Vec<Vec3<T>>,
}

impl<T: Real> PoiSet<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::config("pois", "at least one POI is required"));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// What an uncertainty region imposes on localization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegionKind<T> {
    /// Per-milestone position error with standard deviation `sigma` meters.
    Sigma { sigma: T },
    /// GNSS outage: error accumulates with time. `sigma_equiv` is the scalar
    /// used where a single σ is needed (uncertainty-penalized edge costs).
    Outage { sigma_equiv: T },
}

impl<T: Real> RegionKind<T> {
    pub fn is_outage(&self) -> bool {
        matches!(self, RegionKind::Outage { .. })
    }

    /// σ used for cost penalties.
    pub fn equivalent_sigma(&self) -> T {
        match *self {
            RegionKind::Sigma { sigma } => sigma,
            RegionKind::Outage { sigma_equiv } => sigma_equiv,
        }
    }
}

/// An uncertainty region; `area == None` is the default region matching everything.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    pub area: Option<Aabb<T>>,
    pub kind: RegionKind<T>,
}

/// True iff the closed segment `[p, q]` leaves the bounds or touches an obstacle.
pub fn segment_in_collision<T: Real>(p: Vec3<T>, q: Vec3<T>, w: &Workspace<T>) -> bool {
    if !w.bounds.contains(p) || !w.bounds.contains(q) {
        return true;
    }
    w.obstacles.iter().any(|o| o.intersects_segment(p, q))
}

const ANGLE_TOL: f64 = 1e-12;

/// True iff POI `poi` is inspected from configuration `c`: within range, inside the
/// sensor cone around the boresight, and not occluded.
pub fn sees<T: Real>(c: &Configuration<T>, poi: Vec3<T>, s: &SensorModel<T>, w: &Workspace<T>) -> bool {
    let d = poi - c.position;
    let dist = d.norm();
    if dist > s.range {
        return false;
    }
    let half = s.fov / T::lit(2.0);
    if half < T::PI() && dist > T::zero() {
        let cos_angle = c.boresight().dot(d) / dist;
        if cos_angle < half.cos() - T::lit(ANGLE_TOL) {
            return false;
        }
    }
    !segment_in_collision(c.position, poi, w)
}

/// Indices (ascending) of the POIs inspected from `c`.
pub fn visible_pois<T: Real>(
    c: &Configuration<T>,
    pois: &PoiSet<T>,
    s: &SensorModel<T>,
    w: &Workspace<T>,
) -> Vec<usize> {
    pois.points
        .iter()
        .enumerate()
        .filter(|(_, p)| sees(c, **p, s, w))
        .map(|(j, _)| j)
        .collect()
}

/// Same as [`visible_pois`], written into a mask.
pub fn visible_mask<T: Real>(
    c: &Configuration<T>,
    pois: &PoiSet<T>,
    s: &SensorModel<T>,
    w: &Workspace<T>,
) -> PoiMask {
    let mut mask = PoiMask::new(pois.len());
    for (j, p) in pois.points.iter().enumerate() {
        if sees(c, *p, s, w) {
            mask.insert(j);
        }
    }
    mask
}

/// First region containing `pos`; a region without an area matches anything.
pub fn region_sigma<'a, T: Real>(pos: Vec3<T>, regions: &'a [Region<T>]) -> Result<&'a RegionKind<T>> {
    regions
        .iter()
        .find(|r| r.area.map_or(true, |a| a.contains(pos)))
        .map(|r| &r.kind)
        .ok_or_else(|| {
            Error::config(
                "regions",
                format!(
                    "no region matches position ({}, {}, {}) and no default region is declared",
                    pos.x, pos.y, pos.z
                ),
            )
        })
}
