//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any fails.

mod common;

use std::sync::Arc;
use std::time::Instant;

use irisuu::evaluator::check_bounds;
use irisuu::motion::{drift_offset, GRAVITY};
use irisuu::planner::{
    dominates, is_ek_bounded, is_goal, is_in_collision, make_initial_node, subsume, SampleTrack, StepEstimate,
};
use irisuu::stats::{
    collision_upper_bound, convexity_check, coverage_lower_bound, cp_bounds, cp_lower_continuous, min_coverage_bound,
    selection_bias_demo, successes,
};
use irisuu::world::{segment_in_collision, sees};
use irisuu::{
    draw_samples, evaluate_plan, plan, Algorithm, Configuration, ModelSpec, PlanOutcome, PlanParams, Scenario,
    SearchNode, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;

use common::{load_fixture, random_identity_scenario, reference_iris, vertex_masks, RefOutcome};

// Pinned tolerances.
const EXACT_TOL: f64 = 1e-9;
const BIAS_PER_PATH_TOL: f64 = 1e-4;
const BIAS_ANY_TOL: f64 = 0.01;
const LEMMA_TOL: f64 = 1e-9;
const CP_CALIBRATION_MIN: f64 = 0.94;
const DRIFT_REL_TOL: f64 = 1e-12;

struct Check {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Check {
    Check { ok, detail: detail.into() }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn step(seen: f64, length: f64) -> StepEstimate {
    StepEstimate {
        seen: vec![seen],
        length,
        coll: 0.0,
    }
}

fn no_tracks() -> Arc<Vec<SampleTrack>> {
    Arc::new(Vec::new())
}

fn running_example() -> Check {
    let s = load_fixture("running_example.scn");
    let (a, b) = (s.roadmap.vertices[0], s.roadmap.vertices[1]);
    let executed = [(0.6, 2.1), (0.5, 1.2), (-0.2, 1.6)].map(|(x, y)| Configuration::planar(x, y, b.yaw));
    let poi = s.pois.points[0];
    let m = executed.len() as f64;
    let seen = executed.iter().filter(|c| sees(*c, poi, &s.sensor, &s.workspace)).count() as f64 / m;
    let coll = executed
        .iter()
        .filter(|c| segment_in_collision(a.position, c.position, &s.workspace))
        .count() as f64
        / m;
    let length = executed.iter().map(|c| a.position.distance(c.position)).sum::<f64>() / m;

    let samples = draw_samples(&ModelSpec::identity(), 3, 0).unwrap();
    let init = make_initial_node(&s, &samples);
    let n_b = init.advance(1, &StepEstimate { seen: vec![seen], length, coll }, no_tracks());
    let ab_ok = init.ap_ipv.probs == [0.0]
        && close(n_b.ap_ipv.probs[0], 2.0 / 3.0, EXACT_TOL)
        && close(n_b.pap_ipv.probs[0], 2.0 / 3.0, EXACT_TOL)
        && close(n_b.coll, 1.0 / 3.0, EXACT_TOL)
        && is_in_collision(&n_b, 0.0);

    let n_c = init.advance(2, &step(0.33, 1.6), no_tracks());
    let n_d2 = n_c.advance(3, &step(0.67, 1.3), no_tracks());
    let n_d1 = init.advance(3, &step(0.67, 2.4), no_tracks());
    let chain = n_d2.ap_ipv.probs[0];
    let chain_ok = close(chain, 0.7789, EXACT_TOL) && close(n_d2.ap_len, 2.9, EXACT_TOL);
    let dom_ok = !dominates(&n_d1, &n_d2) && !dominates(&n_d2, &n_d1);

    let n_d3 = subsume(&n_d1, &n_d2);
    let sub_ok = close(n_d3.ap_ipv.probs[0], 0.67, EXACT_TOL)
        && close(n_d3.ap_len, 2.4, EXACT_TOL)
        && close(n_d3.pap_ipv.probs[0], 0.7789, EXACT_TOL)
        && close(n_d3.pap_len, 2.4, EXACT_TOL)
        && is_ek_bounded(&n_d3, 0.0, 0.85);

    let mut revisit = init.clone();
    for _ in 0..3 {
        revisit = revisit.advance(2, &step(0.33, 1.0), no_tracks());
        revisit = revisit.advance(3, &step(0.67, 1.0), no_tracks());
    }
    let closed_form = 1.0 - 0.67f64.powi(3) * 0.33f64.powi(3);
    let goal_ok = !is_goal(&n_d2, 0.97, 1)
        && close(revisit.ap_ipv.probs[0], closed_form, EXACT_TOL)
        && is_goal(&revisit, 0.97, 1);

    check(
        ab_ok && chain_ok && dom_ok && sub_ok && goal_ok,
        format!(
            "A->B ap={:.6} coll={:.6} len={:.3}; A-C-D={chain:.6}; D3 pap={:.6}/{:.1}; revisits={:.6} (parts {ab_ok} {chain_ok} {dom_ok} {sub_ok} {goal_ok})",
            n_b.ap_ipv.probs[0], n_b.coll, length, n_d3.pap_ipv.probs[0], n_d3.pap_len, revisit.ap_ipv.probs[0]
        ),
    )
}

fn guideline_points() -> Check {
    let lower = cp_bounds(successes(0.99, 70), 70, 0.05).unwrap().lower;
    let upper = collision_upper_bound(0.02, 94, 0.05).unwrap();
    check(
        (0.92..=0.94).contains(&lower) && (0.06..=0.08).contains(&upper),
        format!("p-(0.99, 70)={lower:.5} in [0.92, 0.94]; p+(0.02, 94)={upper:.5} in [0.06, 0.08]"),
    )
}

fn bias_demo() -> Check {
    let r = selection_bias_demo(0.04, 120, 100).unwrap();
    check(
        close(r.per_path, 0.00747, BIAS_PER_PATH_TOL) && close(r.any_of_k, 0.52, BIAS_ANY_TOL),
        format!("per-path {:.6} (0.00747 +- {BIAS_PER_PATH_TOL}); any-of-100 {:.4} (0.52 +- {BIAS_ANY_TOL})", r.per_path, r.any_of_k),
    )
}

fn convexity() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [30, 100, 300] {
        for alpha in [0.05, 0.1] {
            let r = convexity_check(m, alpha, 999).unwrap();
            ok &= r.holds();
            parts.push(format!("({m},{alpha}):{:.1e}/{:.1e}", r.min_first_diff, r.min_second_diff));
        }
    }
    check(ok, format!("min first/second differences {}", parts.join(" ")))
}

fn m1_equivalence() -> Check {
    let mut agree = 0;
    let mut found = 0;
    let mut binary = true;
    let mut first_bad = String::new();
    let (mut steps, mut subsumed) = (0usize, 0usize);
    for seed in 1..=20u64 {
        let s = Scenario::from_json(&random_identity_scenario(seed)).unwrap();
        let reach = vertex_masks(&s).iter().fold(0u64, |a, m| a | m).count_ones();
        let k = s.pois.len();
        let kappa = if reach == 0 { 0.5 / k as f64 } else { (reach as f64 - 0.5) / k as f64 };
        let eps = [0.0, 0.5, 3.0][(seed % 3) as usize];
        let params = PlanParams {
            m: 1,
            kappa,
            eps,
            node_budget: 200_000,
            ..PlanParams::default()
        };
        let mc = plan(&s, &params).unwrap();
        let det = plan(&s, &PlanParams { algorithm: Algorithm::Iris, ..params }).unwrap();
        let reference = reference_iris(&s, kappa, eps, params.node_budget);
        let same = match (&mc, &reference) {
            (PlanOutcome::Found(p), RefOutcome::Found(r)) => {
                found += 1;
                binary &= p.ap_ipv.iter().all(|&x| x == 0.0 || x == 1.0);
                steps += p.path.len();
                subsumed += p.stats.subsumed;
                &p.path == r && det.plan().map(|d| &d.path) == Some(&p.path)
            }
            (PlanOutcome::NoSolution(_), RefOutcome::NoSolution) => true,
            (PlanOutcome::BudgetExceeded(_), RefOutcome::Budget) => true,
            _ => false,
        };
        if same {
            agree += 1;
        } else if first_bad.is_empty() {
            first_bad = format!("; first mismatch at seed {seed}");
        }
    }
    check(
        agree == 20 && found == 20 && binary,
        format!(
            "{agree}/20 identical vertex sequences, {found}/20 solved, {steps} path vertices, {subsumed} subsumes, AP entries binary: {binary}{first_bad}"
        ),
    )
}

fn lemma5_oracle() -> Check {
    let (k, m, kappa, alpha) = (20usize, 50usize, 0.9, 0.05);
    let floor = min_coverage_bound(kappa, m, alpha, k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let total = (kappa * (k * m) as f64).round() as usize;
    // integer success counts summing to kκm, i.e. estimates on the 1/m grid
    let grid: Vec<Vec<f64>> = (0..100_000)
        .map(|_| {
            let mut x = vec![total / k; k];
            for _ in 0..rng.random_range(0..200) {
                let (i, j) = (rng.random_range(0..k), rng.random_range(0..k));
                let room = x[i].min(m - x[j]);
                if i != j && room > 0 {
                    let d = rng.random_range(1..=room);
                    x[i] -= d;
                    x[j] += d;
                }
            }
            x.iter().map(|&c| c as f64 / m as f64).collect()
        })
        .collect();
    let worst = grid
        .par_iter()
        .map(|ipv| coverage_lower_bound(ipv, m, alpha).unwrap())
        .reduce(|| f64::INFINITY, f64::min);
    let cont_floor = k as f64 * cp_lower_continuous(kappa, m, alpha);
    let real: Vec<Vec<f64>> = (0..20_000)
        .map(|_| {
            let mut p = vec![kappa; k];
            for _ in 0..rng.random_range(0..200) {
                let (i, j) = (rng.random_range(0..k), rng.random_range(0..k));
                let room = (p[i] - 1e-6).min(1.0 - p[j]);
                if i != j && room > 0.0 {
                    let d = rng.random_range(0.0..=room);
                    p[i] -= d;
                    p[j] += d;
                }
            }
            p
        })
        .collect();
    let cont_worst = real
        .par_iter()
        .map(|p| p.iter().map(|&q| cp_lower_continuous(q, m, alpha)).sum::<f64>())
        .reduce(|| f64::INFINITY, f64::min);
    check(
        worst >= floor - LEMMA_TOL && cont_worst >= cont_floor - LEMMA_TOL,
        format!(
            "min over 1e5 grid IPVs {worst:.9} >= {floor:.9}; min over 2e4 real IPVs {cont_worst:.9} >= {cont_floor:.9}"
        ),
    )
}

fn cp_calibration() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let binom = Binomial::new(50, 0.3).unwrap();
    let hits = (0..2000)
        .filter(|_| {
            let b = cp_bounds(binom.sample(&mut rng) as usize, 50, 0.05).unwrap();
            b.lower <= 0.3 && 0.3 <= b.upper
        })
        .count();
    let rate = hits as f64 / 2000.0;
    check(rate >= CP_CALIBRATION_MIN, format!("interval covers p=0.3 in {:.2}% of 2000 trials", 100.0 * rate))
}

fn toy_properties() -> Check {
    let s = load_fixture("toy.scn");
    let params = PlanParams {
        m: 100,
        kappa: 0.99,
        eps: 3.0,
        rho_coll: 0.0,
        seed: 0,
        ..PlanParams::default()
    };
    let t0 = Instant::now();
    let uu = plan(&s, &params).unwrap().into_plan();
    let planning = t0.elapsed().as_secs_f64();
    let iris = plan(&s, &PlanParams { algorithm: Algorithm::Iris, ..params }).unwrap().into_plan();
    let (Some(uu), Some(iris)) = (uu, iris) else {
        return check(false, "a planner found no plan");
    };
    let r_uu = evaluate_plan(&s, &uu, 10_000, 1).unwrap();
    let r_iris = evaluate_plan(&s, &iris, 10_000, 1).unwrap();
    let bound = collision_upper_bound(params.rho_coll, 100, 0.05).unwrap();
    let v = check_bounds(&r_uu, &uu.certificate);
    let a = r_uu.coverage_mean > r_iris.coverage_mean;
    let b = r_uu.collision_rate <= bound;
    check(
        a && b && v.all_hold() && planning < 300.0,
        format!(
            "coverage {:.4} vs IRIS {:.4}; collision {:.4} <= {bound:.4}; verdict margins {:.3}/{:.4}/{:.3}; planning {planning:.2} s",
            r_uu.coverage_fraction, r_iris.coverage_fraction, r_uu.collision_rate, v.coverage.margin, v.collision.margin, v.length.margin
        ),
    )
}

fn mat_mul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn mat_vec(a: [[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2])
}

fn drift_formula() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let angle = |rng: &mut ChaCha8Rng| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let (roll, pitch, yaw) = (angle(&mut rng), angle(&mut rng), angle(&mut rng));
        let mut normal = |s: f64| s * rng.sample::<f64, _>(StandardNormal);
        let ba = [normal(0.1), normal(0.1), normal(0.1)];
        let bg = [normal(0.01), normal(0.01), normal(0.01)];
        let t = rng.random_range(0.0..60.0);

        let (sr, cr) = roll.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let (sy, cy) = yaw.sin_cos();
        let rz = [[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]];
        let ry = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
        let rx = [[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]];
        let r = mat_mul(mat_mul(rz, ry), rx);
        let g = [0.0, 0.0, -GRAVITY];
        let bxg = [bg[1] * g[2] - bg[2] * g[1], bg[2] * g[0] - bg[0] * g[2], bg[0] * g[1] - bg[1] * g[0]];
        let (ra, rg) = (mat_vec(r, ba), mat_vec(r, bxg));
        let want: [f64; 3] = [0, 1, 2].map(|i| 0.5 * ra[i] * t * t + rg[i] * t * t * t / 6.0);

        let c = Configuration::new(Vec3::zero(), roll, pitch, yaw);
        let got = drift_offset(&c, Vec3::new(ba[0], ba[1], ba[2]), Vec3::new(bg[0], bg[1], bg[2]), t);
        let diff = Vec3::new(got.x - want[0], got.y - want[1], got.z - want[2]).norm();
        let scale = Vec3::new(want[0], want[1], want[2]).norm().max(f64::MIN_POSITIVE);
        worst = worst.max(diff / scale);
    }
    check(worst <= DRIFT_REL_TOL, format!("worst relative error {worst:.2e} over 100 cases"))
}

fn random_ipv_node(template: &SearchNode, rng: &mut ChaCha8Rng, k: usize) -> SearchNode {
    let mut n = template.clone();
    let probs: Vec<f64> = (0..k).map(|_| random_prob(rng)).collect();
    n.ap_ipv.probs = probs.clone();
    n.pap_ipv.probs = probs;
    n
}

fn random_prob(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random_range(0.0..1.0),
    }
}

fn node_fuzz() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut violations = Vec::new();
    let mut ops = 0usize;
    let template = make_initial_node(&load_fixture("running_example.scn"), &[]);
    for seq in 0..10_000 {
        let k = rng.random_range(1..=6);
        let eps = rng.random_range(0.0..3.0);
        let kappa = rng.random_range(0.3..=1.0);
        let mut open = vec![random_ipv_node(&template, &mut rng, k)];
        for _ in 0..rng.random_range(1..=12) {
            ops += 1;
            let i = rng.random_range(0..open.len());
            if rng.random_bool(0.6) || open.len() < 2 {
                let parent = &open[i];
                let st = StepEstimate {
                    seen: (0..k).map(|_| random_prob(&mut rng)).collect(),
                    length: rng.random_range(0.0..3.0),
                    coll: if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..1.0) },
                };
                let child = parent.advance(rng.random_range(0..4), &st, no_tracks());
                let monotone = child.ap_ipv.covers(&parent.ap_ipv)
                    && child.pap_ipv.covers(&parent.pap_ipv)
                    && child.ap_len >= parent.ap_len
                    && child.coll >= parent.coll
                    && (0.0..=1.0).contains(&child.coll);
                if !monotone {
                    violations.push(format!("seq {seq}: IPV monotonicity"));
                }
                if !child.pap_covers_ap() {
                    violations.push(format!("seq {seq}: PAP below AP after extend"));
                }
                if !is_ek_bounded(&child, eps, kappa) {
                    violations.push(format!("seq {seq}: extend left bounded set"));
                }
                open.push(child);
            } else {
                let j = (i + rng.random_range(1..open.len())) % open.len();
                let (a, b) = (&open[i], &open[j]);
                let merged = subsume(a, b);
                let envelope = merged.pap_ipv.covers(&a.pap_ipv)
                    && merged.pap_ipv.covers(&b.pap_ipv)
                    && merged.pap_len <= a.pap_len.min(b.pap_len)
                    && merged.ap_ipv == a.ap_ipv;
                if !merged.pap_covers_ap() || !envelope {
                    violations.push(format!("seq {seq}: subsume envelope"));
                }
                if a.ap_ipv.coverage() > b.ap_ipv.coverage() && is_ek_bounded(&merged, eps, kappa) {
                    open[i] = merged;
                    open.swap_remove(j);
                }
            }
            if let Some(n) = open.iter().find(|n| !is_ek_bounded(n, eps, kappa) || !n.pap_covers_ap()) {
                violations.push(format!("seq {seq}: open member invalid (ap {:?})", n.ap_ipv.probs));
            }
        }
    }
    let mut inserts = 0usize;
    let mut unbounded = 0usize;
    let toy = load_fixture("toy.scn");
    let mut runs: Vec<(Scenario, PlanParams)> = vec![
        (toy.clone(), PlanParams { m: 100, ..PlanParams::default() }),
        (toy.clone(), PlanParams { algorithm: Algorithm::Iris, ..PlanParams::default() }),
        (toy, PlanParams { algorithm: Algorithm::Lum, lambda: 5.0, ..PlanParams::default() }),
        (load_fixture("running_example.scn"), PlanParams { m: 20, kappa: 0.9, rho_coll: 0.5, ..PlanParams::default() }),
        (load_fixture("bridge.scn"), PlanParams { m: 30, kappa: 0.9, rho_coll: 0.1, ..PlanParams::default() }),
    ];
    for seed in 1..=20 {
        let s = Scenario::from_json(&random_identity_scenario(seed)).unwrap();
        let eps = [0.0, 0.5, 3.0][(seed % 3) as usize];
        runs.push((s, PlanParams { m: 1, kappa: 0.6, eps, ..PlanParams::default() }));
    }
    for (s, p) in &runs {
        if let Some(stats) = match plan(s, p).unwrap() {
            PlanOutcome::Found(pl) => Some(pl.stats),
            PlanOutcome::NoSolution(st) | PlanOutcome::BudgetExceeded(st) => Some(st),
        } {
            inserts += stats.generated - stats.pruned_collision - stats.pruned_dominated;
            unbounded += stats.unbounded_inserts;
        }
    }
    let first = violations.first().cloned().unwrap_or_default();
    check(
        violations.is_empty() && unbounded == 0,
        format!(
            "{ops} operations in 1e4 sequences, {} violations {first}; planner: {unbounded} unbounded of ~{inserts} OPEN insertions",
            violations.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Check, f64); 10] = [
        ("running-example arithmetic", running_example, 1.0),
        ("guideline points", guideline_points, 1.0),
        ("selection-bias demo", bias_demo, f64::INFINITY),
        ("convexity and monotonicity", convexity, f64::INFINITY),
        ("m=1 equivalence with deterministic reference", m1_equivalence, f64::INFINITY),
        ("minimum-coverage oracle", lemma5_oracle, 30.0),
        ("Clopper-Pearson calibration", cp_calibration, 5.0),
        ("toy-scenario properties", toy_properties, f64::INFINITY),
        ("drift formula", drift_formula, f64::INFINITY),
        ("node-invariant fuzz", node_fuzz, f64::INFINITY),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let c = run();
        let secs = t0.elapsed().as_secs_f64();
        let ok = c.ok && secs < *limit;
        if !ok {
            failed += 1;
        }
        let budget = if limit.is_finite() { format!(", limit {limit} s") } else { String::new() };
        println!("{} {:>2} {name}: {} [{secs:.2} s{budget}]", if ok { "PASS" } else { "FAIL" }, i + 1, c.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
