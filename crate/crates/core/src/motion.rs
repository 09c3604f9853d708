//! Execution-uncertainty models. Each sample freezes its uncertainty parameters, after
//! which simulating a command segment is deterministic.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roadmap::{ModelKind, ModelSpec, Scenario};
use crate::world::{segment_in_collision, visible_mask, PoiMask};
use crate::{Configuration, Vec3};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.80665;

/// One frozen draw of the uncertainty parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    pub sample_index: usize,
    /// Key of this sample's noise stream.
    pub noise_seed: u64,
    /// Accelerometer bias, m/s².
    pub accel_bias: Vec3,
    /// Gyro bias, rad/s.
    pub gyro_bias: Vec3,
}

/// Where a sample's execution stands after some prefix of the command path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecState {
    pub config: Configuration,
    /// Time spent in the current GNSS outage, seconds.
    pub outage_time: f64,
    /// Next position in the sample's noise stream.
    pub step: u64,
}

impl ExecState {
    /// The exact start state.
    pub fn at(config: Configuration) -> Self {
        Self {
            config,
            outage_time: 0.0,
            step: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutedSegment {
    /// Executed milestones: the entry configuration and the executed endpoint.
    pub waypoints: Vec<Configuration>,
    /// Meters.
    pub length: f64,
    pub collided: bool,
    /// POIs seen at the executed endpoint.
    pub seen: PoiMask,
}

/// Draws `m` independent samples of the model's uncertainty parameters.
pub fn draw_samples(model: &ModelSpec, m: usize, seed: u64) -> Result<Vec<SampleParams>> {
    if m == 0 {
        return Err(Error::arg("m must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drift = model.kind == ModelKind::GnssDrift;
    let normal3 = |rng: &mut ChaCha8Rng, sigma: f64| -> Vec3 {
        let mut axis = || sigma * rng.sample::<f64, _>(StandardNormal);
        Vec3::new(axis(), axis(), axis())
    };
    Ok((0..m)
        .map(|sample_index| {
            let noise_seed = rng.next_u64();
            let (accel_bias, gyro_bias) = if drift {
                let a = normal3(&mut rng, model.sigma_a);
                let g = normal3(&mut rng, model.sigma_g);
                (a, g)
            } else {
                (Vec3::zero(), Vec3::zero())
            };
            SampleParams {
                sample_index,
                noise_seed,
                accel_bias,
                gyro_bias,
            }
        })
        .collect())
}

/// Random generator for draw `step` of a sample's noise stream.
fn noise_at(noise_seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    rng.set_stream(step);
    rng
}

/// Position error of radius `|N(0,1)|·sigma` in a uniformly random direction.
pub fn gaussian_offset(noise_seed: u64, step: u64, sigma: f64, dim: usize) -> Vec3 {
    if sigma == 0.0 {
        return Vec3::zero();
    }
    let mut rng = noise_at(noise_seed, step);
    let r = rng.sample::<f64, _>(StandardNormal).abs() * sigma;
    let dir = if dim == 2 {
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        Vec3::planar(theta.cos(), theta.sin())
    } else {
        loop {
            let v = Vec3::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            let n = v.norm();
            if n > 1e-12 {
                break v * (1.0 / n);
            }
        }
    };
    dir * r
}

/// Inertial drift after `t` seconds without GNSS:
/// `½ C_b b_a t² + (1/6) C_b (b_g × g) t³`.
pub fn drift_offset(attitude: &Configuration, accel_bias: Vec3, gyro_bias: Vec3, t: f64) -> Vec3 {
    let c_b = attitude.rotation();
    let g = Vec3::new(0.0, 0.0, -GRAVITY);
    c_b.apply(accel_bias) * (0.5 * t * t) + c_b.apply(gyro_bias.cross(g)) * (t * t * t / 6.0)
}

/// Executes the command segment `u → v` for one sample.
pub fn simulate_segment(
    u: &Configuration,
    v: &Configuration,
    sp: &SampleParams,
    entry: &ExecState,
    scenario: &Scenario,
) -> Result<(ExecutedSegment, ExecState)> {
    let model = &scenario.model;
    let mut outage_time = 0.0;
    let offset = match model.kind {
        ModelKind::Identity => Vec3::zero(),
        ModelKind::Gaussian => {
            let sigma = scenario.region_at(v.position)?.equivalent_sigma();
            gaussian_offset(sp.noise_seed, entry.step, sigma, scenario.dim)
        }
        ModelKind::GnssDrift => {
            if model.speed <= 0.0 {
                return Err(Error::config("model.speed", "drift model needs a positive speed"));
            }
            let region = scenario.region_at(v.position)?;
            if region.is_outage() {
                outage_time = entry.outage_time + u.position.distance(v.position) / model.speed;
                let mut d = drift_offset(u, sp.accel_bias, sp.gyro_bias, outage_time);
                if scenario.dim == 2 {
                    d.z = 0.0;
                }
                d
            } else {
                gaussian_offset(sp.noise_seed, entry.step, region.equivalent_sigma(), scenario.dim)
            }
        }
    };
    let end = v.with_position(v.position + offset);
    let start = entry.config;
    let w = &scenario.workspace;
    let segment = ExecutedSegment {
        length: start.position.distance(end.position),
        collided: segment_in_collision(start.position, end.position, w),
        seen: visible_mask(&end, &scenario.pois, &scenario.sensor, w),
        waypoints: vec![start, end],
    };
    let exit = ExecState {
        config: end,
        outage_time,
        step: entry.step + 1,
    };
    Ok((segment, exit))
}
