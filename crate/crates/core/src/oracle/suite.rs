//! Randomized agreement checks between the main code paths and the oracles.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{
    box_polytope_vertices, brute_optimum, brute_strategy_dim, brute_vertices,
    exhaustive_min_time, mc_volume, point_set_discrepancy, OracleConfig,
};
use crate::control::{dim_of_feasible_set, min_time, sample_states, steering_matrix};
use crate::lp::{self, BoxLp, Sense};
use crate::model::LdtSystem;
use crate::region::{generator_blocks, reach_region, RegionKind};
use crate::rng::SplitMix64;
use crate::zonotope::{polygon_area, Zonotope};
use crate::{Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(crate::Error::InvalidConfig(format!("unknown level {other:?}"))),
        }
    }
}

/// Deliberate corruption of a main-path result, used to prove that the
/// suite catches disagreements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fault {
    /// Scales every combinatorial volume by 1.01.
    Volume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    /// Largest disagreement seen, in the check's own unit.
    pub discrepancy: f64,
    pub seed: u64,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub seed: u64,
    pub level: Level,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.uniform(lo, hi))
}

/// `A`, `B` with entries uniform in `[−bound, bound]`.
pub fn random_system(rng: &mut SplitMix64, n: usize, r: usize, bound: f64) -> LdtSystem {
    let a = random_matrix(rng, n, n, -bound, bound);
    let b = random_matrix(rng, n, r, -bound, bound);
    LdtSystem::new("random", a, b).expect("finite random system")
}

/// Random state of `R(k)` for a random `k ≤ max_steps`: a vertex or a
/// convex combination of vertices, sometimes pulled towards the origin.
pub fn random_region_state(rng: &mut SplitMix64, sys: &LdtSystem, max_steps: usize) -> Option<Vec<f64>> {
    let k = 1 + rng.below(max_steps);
    let fam = reach_region(sys, k).ok()?;
    let z = fam.stage(k);
    let seed = rng.next_u64();
    let states = sample_states(z, 8, seed);
    let mut x = states[rng.below(states.len())].clone();
    if rng.next_f64() < 0.5 {
        x *= rng.uniform(0.2, 1.0);
    }
    Some(x.as_slice().to_vec())
}

struct Tally {
    name: &'static str,
    seed: u64,
    cases: usize,
    worst: f64,
    tolerance: f64,
    detail: Option<String>,
}

impl Tally {
    fn new(name: &'static str, seed: u64, tolerance: f64) -> Self {
        Self {
            name,
            seed,
            cases: 0,
            worst: 0.0,
            tolerance,
            detail: None,
        }
    }

    fn record(&mut self, discrepancy: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        let bad = !(discrepancy <= self.tolerance);
        if bad && self.detail.is_none() {
            self.detail = Some(what());
        }
        if discrepancy.is_nan() || discrepancy > self.worst {
            self.worst = discrepancy;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            status: if self.detail.is_none() { Status::Pass } else { Status::Fail },
            discrepancy: self.worst,
            seed: self.seed,
            cases: self.cases,
            detail: self.detail,
        }
    }
}

fn faulty_volume(z: &Zonotope, fault: Option<Fault>) -> f64 {
    let v = z.volume();
    match fault {
        Some(Fault::Volume) => v * 1.01,
        None => v,
    }
}

/// Zonotope vertices against exhaustive sign enumeration.
pub fn check_vertices(seed: u64, cases: usize, max_horizon: usize) -> CheckResult {
    let mut rng = SplitMix64::new(seed);
    let mut t = Tally::new("vertices", seed, 1e-9);
    let cfg = OracleConfig::default();
    for _ in 0..cases {
        let n = 2 + rng.below(2);
        let horizon = 1 + rng.below(max_horizon);
        let sys = random_system(&mut rng, n, 1, 2.0);
        let Ok(fam) = reach_region(&sys, horizon) else { continue };
        let z = fam.stage(horizon);
        let main = z.vertices();
        let brute = brute_vertices(z.generators(), &cfg).expect("within the sign cap");
        let scale = z.half_widths().iter().cloned().fold(1.0, f64::max);
        let d = point_set_discrepancy(&main, &brute) / scale;
        t.record(d, || {
            format!(
                "n={n} N={horizon}: {} vs {} vertices, A={:?} B={:?}",
                main.len(),
                brute.len(),
                sys.a().as_slice(),
                sys.b().as_slice()
            )
        });
    }
    t.finish()
}

/// Planar volumes against polygon areas, for 2-D regions and every
/// coordinate projection of 3-D regions.
pub fn check_planar_volumes(seed: u64, cases: usize, fault: Option<Fault>) -> CheckResult {
    let mut rng = SplitMix64::new(seed);
    let mut t = Tally::new("planar-volume", seed, 1e-9);
    for _ in 0..cases {
        let n = 2 + rng.below(2);
        let horizon = 1 + rng.below(10);
        let sys = random_system(&mut rng, n, 1, 2.0);
        let Ok(fam) = reach_region(&sys, horizon) else { continue };
        let z = fam.stage(horizon);
        for i in 0..n {
            for j in i + 1..n {
                let rows = z.generators().select_rows([i, j].iter());
                let planar = Zonotope::new(rows).expect("finite");
                let area = polygon_area(&z.project_2d(i, j).expect("valid axes")).expect("convex");
                let vol = faulty_volume(&planar, fault);
                let d = (vol - area).abs() / area.max(1.0);
                t.record(d, || format!("axes ({i},{j}): volume {vol} vs area {area}"));
            }
        }
    }
    t.finish()
}

/// Minimum times against hull-containment sweeps.
pub fn check_min_time(seed: u64, cases: usize) -> CheckResult {
    let mut rng = SplitMix64::new(seed);
    let mut t = Tally::new("min-time", seed, 0.0);
    let max_steps = 10;
    while t.cases < cases {
        let sys = random_system(&mut rng, 2, 1, 1.5);
        let Some(x0) = random_region_state(&mut rng, &sys, max_steps) else { continue };
        let main = min_time(&sys, &x0, RegionKind::Reach, max_steps).map(|s| s.min_steps);
        let brute = exhaustive_min_time(&sys, &x0, RegionKind::Reach, max_steps);
        let d = match (&main, &brute) {
            (Ok(a), Ok(b)) => (*a as f64 - *b as f64).abs(),
            _ => f64::INFINITY,
        };
        t.record(d, || format!("x0={x0:?}: main {main:?}, oracle {brute:?}, A={:?} B={:?}", sys.a().as_slice(), sys.b().as_slice()));
    }
    t.finish()
}

/// A random box LP `G u = x0` with `m ≤ 8`; `x0` is drawn from the image of
/// the box half the time, so both verdicts occur.
pub fn random_box_lp(rng: &mut SplitMix64) -> BoxLp {
    let n = 1 + rng.below(3);
    let m = 1 + rng.below(8);
    let g = random_matrix(rng, n, m, -2.0, 2.0);
    let lower: Vec<f64> = (0..m).map(|_| rng.uniform(-2.0, 0.0)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.uniform(0.1, 2.5)).collect();
    let x0 = if rng.next_f64() < 0.5 {
        let u = DVector::from_fn(m, |j, _| rng.uniform(lower[j], upper[j]));
        &g * u
    } else {
        DVector::from_fn(n, |_, _| rng.uniform(-6.0, 6.0))
    };
    let c: Vec<f64> = (0..m).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let sense = if rng.next_f64() < 0.5 { Sense::Minimize } else { Sense::Maximize };
    BoxLp::new(g, x0).with_bounds(lower, upper).with_objective(c, sense)
}

/// LP verdicts and optima against basic-solution enumeration.
pub fn check_lp(seed: u64, cases: usize) -> CheckResult {
    let mut rng = SplitMix64::new(seed);
    let mut t = Tally::new("lp", seed, 1e-7);
    for _ in 0..cases {
        let problem = random_box_lp(&mut rng);
        let brute = brute_optimum(&problem);
        let d = match (lp::optimize(&problem), brute) {
            (Ok(opt), Some(v)) => (opt.value - v).abs() / v.abs().max(1.0),
            (Err(crate::Error::Infeasible), None) => 0.0,
            _ => f64::INFINITY,
        };
        t.record(d, || format!("{problem:?}"));
    }
    t.finish()
}

/// Strategy-space dimensions against vertex enumeration of the strategy
/// polytope.
pub fn check_strategy_dim(seed: u64, cases: usize) -> CheckResult {
    let mut rng = SplitMix64::new(seed);
    let mut t = Tally::new("strategy-dim", seed, 0.0);
    while t.cases < cases {
        let sys = random_system(&mut rng, 2, 1, 1.5);
        let horizon = 2 + rng.below(7);
        let Some(x0) = random_region_state(&mut rng, &sys, horizon) else { continue };
        let Ok(blocks) = generator_blocks(&sys, RegionKind::Reach, horizon, 1.0) else { continue };
        let g = steering_matrix(&blocks, RegionKind::Reach, horizon, 2);
        let x = DVector::from_column_slice(&x0);
        let main = dim_of_feasible_set(&g, &x);
        let brute = brute_strategy_dim(&g, &x);
        let d = match (&main, brute) {
            (Ok(Some(a)), Some(b)) => (*a as f64 - b as f64).abs(),
            _ => f64::INFINITY,
        };
        t.record(d, || format!("N={horizon} x0={x0:?}: main {main:?}, oracle {brute:?}"));
    }
    t.finish()
}

/// Combinatorial volume against Monte Carlo, within three standard errors.
pub fn check_mc_volume(seed: u64, cases: usize, samples: usize, fault: Option<Fault>, exec: Exec) -> CheckResult {
    let mut rng = SplitMix64::new(seed);
    let mut t = Tally::new("mc-volume", seed, 3.0);
    while t.cases < cases {
        let n = 2 + rng.below(2);
        let m = n + rng.below(5);
        let g = random_matrix(&mut rng, n, m, -2.0, 2.0);
        let z = Zonotope::new(g.clone()).expect("finite");
        if z.rank() < n {
            continue;
        }
        let cfg = OracleConfig {
            mc_samples: samples,
            seed: rng.next_u64(),
            ..OracleConfig::default()
        };
        let est = mc_volume(&g, &cfg, exec).expect("full rank");
        let vol = faulty_volume(&z, fault);
        let d = (est.estimate - vol).abs() / est.std_error.max(f64::MIN_POSITIVE);
        t.record(d, || format!("volume {vol} vs estimate {} ± {}", est.estimate, est.std_error));
    }
    t.finish()
}

/// Runs every check; `passed` is false if any disagrees.
pub fn run_verify(seed: u64, level: Level, fault: Option<Fault>, exec: Exec) -> VerifyReport {
    let scale = match level {
        Level::Quick => 1,
        Level::Full => 4,
    };
    let sub = |k: u64| seed.wrapping_add(k.wrapping_mul(crate::rng::GAMMA));
    let mut checks = vec![
        check_vertices(sub(1), 20 * scale, if level == Level::Full { 12 } else { 8 }),
        check_planar_volumes(sub(2), 20 * scale, fault),
        check_min_time(sub(3), 10 * scale),
        check_lp(sub(4), 50 * scale),
        check_strategy_dim(sub(5), 10 * scale),
    ];
    if level == Level::Full {
        checks.push(check_mc_volume(sub(6), 5, 200_000, fault, exec));
    }
    let passed = checks.iter().all(|c| c.status == Status::Pass);
    VerifyReport {
        seed,
        level,
        passed,
        checks,
    }
}

/// Feasibility verdicts only, for instances without an objective.
pub fn feasibility_agrees(problem: &BoxLp) -> Result<bool> {
    let main = lp::feasible(problem)?.feasible;
    let brute = box_polytope_vertices(&problem.g, &problem.x0, &problem.lower, &problem.upper).is_some();
    Ok(main == brute)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_and_is_deterministic() {
        let a = run_verify(11, Level::Quick, None, Exec::Sequential);
        assert!(a.passed, "{:#?}", a.checks);
        let b = run_verify(11, Level::Quick, None, Exec::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn injected_fault_is_caught() {
        let r = run_verify(11, Level::Quick, Some(Fault::Volume), Exec::default());
        assert!(!r.passed);
        let failing: Vec<&str> = r
            .checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(failing, vec!["planar-volume"]);
    }
}
