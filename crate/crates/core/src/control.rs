//! Minimum-time steering, strategy-space dimension and ability comparison.
//!
//! Steering `x0` in `N` steps under `‖u_k‖∞ ≤ 1` is the box LP `G z = x0`.
//! For reach problems block `k` of `G` is `A^{N−1−k}B` and `u_k = z_k`; for
//! recover problems block `k` is `A^{−k−1}B` and `u_k = −z_k`, because
//! `x_N = A^N (x0 + Σ A^{−k−1} B u_k)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{self, rank, RANK_TOL};
use crate::lp::{self, BoxLp, Sense, FEAS_TOL};
use crate::model::{matrix_to_rows, validate, LdtSystem};
use crate::region::{generator_blocks, RegionFamily, RegionKind};
use crate::rng::SplitMix64;
use crate::zonotope::{ShapeReport, Zonotope};
use crate::{ConstraintSpec, Error, Exec, Result};

/// Default step cap for minimum-time searches.
pub const DEFAULT_MAX_STEPS: usize = 50;
/// A coordinate whose range over the feasible set is at most this is fixed.
/// Vertex states of zonotopes with nearly parallel generators carry slivers
/// of width about cond(G)·eps, which reach 1e-7 on the test suite.
pub const FIXED_TOL: f64 = 1e-6;
/// Relative residual a feasible point needs before its spread counts
/// towards the strategy-space dimension.
pub const EVIDENCE_TOL: f64 = 1e-11;
/// Containment margins above this count as strict.
pub const STRICT_MARGIN: f64 = 1e-9;
/// Above this many generators containment is tested on sampled directions.
pub const EXACT_GENERATOR_LIMIT: usize = 16;
/// Number of support directions used by the sampled containment test.
pub const SAMPLED_DIRECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryStatus {
    Boundary,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ControlSolution {
    pub kind: RegionKind,
    pub x0: Vec<f64>,
    pub min_steps: usize,
    /// `u_0 … u_{N*−1}`.
    pub inputs: Vec<Vec<f64>>,
    pub strategy_dim: usize,
    /// Horizon at which `strategy_dim` was measured.
    pub horizon: usize,
    pub boundary_status: BoundaryStatus,
    /// Shrink margin of `x0` in `R(N*)`; zero on the boundary.
    pub margin: f64,
    /// Supporting direction `d` with `dᵀx0 = h_{N*}(d)` for boundary states.
    pub support_normal: Option<Vec<f64>>,
    /// Direction `d` with `dᵀx0 > h_{N*−1}(d)`, proving `x0 ∉ R(N*−1)`.
    pub minimality_certificate: Option<Vec<f64>>,
    /// `max_i |x_N − target|_i` of the simulated witness.
    pub terminal_error: f64,
}

/// `G` of the steering LP at horizon `N`, built from the generator blocks of
/// `kind`.
pub fn steering_matrix(blocks: &[DMatrix<f64>], kind: RegionKind, horizon: usize, n: usize) -> DMatrix<f64> {
    let ordered: Vec<DMatrix<f64>> = match kind {
        RegionKind::Reach => blocks[..horizon].iter().rev().cloned().collect(),
        RegionKind::Recover => blocks[..horizon].to_vec(),
    };
    linalg::hstack(&ordered, n)
}

fn inputs_from(z: &DVector<f64>, kind: RegionKind, r: usize) -> Vec<Vec<f64>> {
    let sign = match kind {
        RegionKind::Reach => 1.0,
        RegionKind::Recover => -1.0,
    };
    z.as_slice().chunks(r).map(|c| c.iter().map(|v| sign * v).collect()).collect()
}

fn check_state(sys: &LdtSystem, x0: &[f64]) -> Result<DVector<f64>> {
    if x0.len() != sys.n() {
        return Err(Error::DimensionMismatch(format!(
            "x0 has {} entries, the system has {} states",
            x0.len(),
            sys.n()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("x0"));
    }
    Ok(DVector::from_column_slice(x0))
}

/// Smallest `N ≤ max_steps` with `x0 ∈ R(N)`, with a witness input
/// sequence and the strategy-space dimension at horizon `max_steps`.
pub fn min_time(sys: &LdtSystem, x0: &[f64], kind: RegionKind, max_steps: usize) -> Result<ControlSolution> {
    let x = check_state(sys, x0)?;
    if max_steps == 0 {
        return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
    }
    let (n, r) = (sys.n(), sys.r());
    let blocks = generator_blocks(sys, kind, max_steps, 1.0)?;

    let strategy_dim_at = |x: &DVector<f64>| -> Result<usize> {
        let g = steering_matrix(&blocks, kind, max_steps, n);
        dim_of_feasible_set(&g, x)?.ok_or(Error::NotMember(max_steps))
    };

    if x.iter().all(|&v| v == 0.0) {
        return Ok(ControlSolution {
            kind,
            x0: x0.to_vec(),
            min_steps: 0,
            inputs: Vec::new(),
            strategy_dim: strategy_dim_at(&x)?,
            horizon: max_steps,
            boundary_status: BoundaryStatus::Interior,
            margin: 1.0,
            support_normal: None,
            minimality_certificate: None,
            terminal_error: 0.0,
        });
    }

    // R(0) = {0}: x0 itself separates it from the origin.
    let mut previous_certificate = Some(x.clone());
    let mut last_gap = x.norm();
    for steps in 1..=max_steps {
        let g = steering_matrix(&blocks, kind, steps, n);
        let problem = BoxLp::new(g, x.clone());
        let verdict = lp::feasible(&problem)?;
        if !verdict.feasible {
            last_gap = verdict.certificate_gap(&problem).unwrap_or(f64::NAN);
            previous_certificate = verdict.certificate;
            continue;
        }
        let witness = verdict.witness.expect("feasible LPs carry a witness");
        let margin = lp::max_margin(&problem)?;
        let boundary = margin.margin <= FEAS_TOL;
        let inputs = inputs_from(&witness, kind, r);
        let trajectory = simulate(sys, x0, &inputs, kind)?;
        return Ok(ControlSolution {
            kind,
            x0: x0.to_vec(),
            min_steps: steps,
            inputs,
            strategy_dim: strategy_dim_at(&x)?,
            horizon: max_steps,
            boundary_status: if boundary {
                BoundaryStatus::Boundary
            } else {
                BoundaryStatus::Interior
            },
            margin: margin.margin,
            support_normal: margin.normal.filter(|_| boundary).map(|d| d.as_slice().to_vec()),
            minimality_certificate: previous_certificate.map(|d| d.as_slice().to_vec()),
            terminal_error: trajectory.terminal_error,
        });
    }
    Err(Error::NotReachable {
        max_steps,
        direction: previous_certificate.map(|d| d.as_slice().to_vec()),
        gap: last_gap,
    })
}

/// Affine-hull dimension of `{U ∈ [−1, 1]^{N·r} : G U = x0}`.
pub fn strategy_space_dim(sys: &LdtSystem, x0: &[f64], horizon: usize, kind: RegionKind) -> Result<usize> {
    let x = check_state(sys, x0)?;
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    let blocks = generator_blocks(sys, kind, horizon, 1.0)?;
    let g = steering_matrix(&blocks, kind, horizon, sys.n());
    dim_of_feasible_set(&g, &x)?.ok_or(Error::NotMember(horizon))
}

/// Affine-hull dimension of the unit-box solution set of `G U = x0`, or
/// `None` when it is empty.
///
/// A coordinate is free when two feasible points differ in it by more than
/// [`FIXED_TOL`]. Every feasible point found (the initial witness and each
/// per-coordinate optimum) is kept if it meets [`EVIDENCE_TOL`], so most
/// coordinates are settled without solving their own pair of LPs. The hull is then `{G U = x0, U_fixed =
/// const}` and its dimension is `|free| − rank(G_free)`.
pub fn dim_of_feasible_set(g: &DMatrix<f64>, x0: &DVector<f64>) -> Result<Option<usize>> {
    let m = g.ncols();
    let base = BoxLp::new(g.clone(), x0.clone());
    let verdict = lp::feasible(&base)?;
    let Some(first) = verdict.witness else {
        return Ok(None);
    };
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    // An optimum is a vertex and should solve the system to round-off. One
    // that leans on the solver's residual tolerance can slide O(1) along a
    // nearly null direction of G, so it is not taken as evidence of freedom.
    let scale = g.amax().max(x0.amax()).max(1.0);
    let absorb = |p: &DVector<f64>, lo: &mut Vec<f64>, hi: &mut Vec<f64>| {
        if (g * p - x0).amax() > EVIDENCE_TOL * scale {
            return;
        }
        for j in 0..m {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    };
    absorb(&first, &mut lo, &mut hi);
    for j in 0..m {
        for sense in [Sense::Maximize, Sense::Minimize] {
            if hi[j] - lo[j] > FIXED_TOL {
                break;
            }
            let mut c = vec![0.0; m];
            c[j] = 1.0;
            let opt = lp::optimize(&base.clone().with_objective(c, sense))?;
            absorb(&opt.argument, &mut lo, &mut hi);
        }
    }
    let free: Vec<usize> = (0..m).filter(|&j| hi[j] - lo[j] > FIXED_TOL).collect();
    if free.is_empty() {
        return Ok(Some(0));
    }
    let g_free = g.select_columns(free.iter());
    Ok(Some(free.len() - rank(&g_free, RANK_TOL)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Trajectory {
    pub kind: RegionKind,
    pub states: Vec<Vec<f64>>,
    /// Distance (max norm) of the final state from the target: `x0` for
    /// reach problems, the origin for recover problems.
    pub terminal_error: f64,
    /// Largest input entry beyond the unit bound, zero when admissible.
    pub bound_violation: f64,
}

/// Iterates `x_{k+1} = A x_k + B u_k`, from the origin for reach problems
/// and from `x0` for recover problems.
pub fn simulate(sys: &LdtSystem, x0: &[f64], inputs: &[Vec<f64>], kind: RegionKind) -> Result<Trajectory> {
    let target = check_state(sys, x0)?;
    if kind == RegionKind::Recover && !validate(sys).invertible {
        return Err(Error::SingularA);
    }
    let mut bound_violation: f64 = 0.0;
    let mut x = match kind {
        RegionKind::Reach => DVector::zeros(sys.n()),
        RegionKind::Recover => target.clone(),
    };
    let mut states = vec![x.as_slice().to_vec()];
    for (k, u) in inputs.iter().enumerate() {
        if u.len() != sys.r() {
            return Err(Error::DimensionMismatch(format!(
                "input {k} has {} entries, the system has {} inputs",
                u.len(),
                sys.r()
            )));
        }
        let u = DVector::from_column_slice(u);
        bound_violation = bound_violation.max(u.amax() - 1.0);
        x = sys.a() * &x + sys.b() * &u;
        states.push(x.as_slice().to_vec());
    }
    if bound_violation > 1e-9 {
        log::warn!("input sequence exceeds the unit bound by {bound_violation:e}");
    }
    let terminal_error = match kind {
        RegionKind::Reach => (&x - &target).amax(),
        RegionKind::Recover => x.amax(),
    };
    Ok(Trajectory {
        kind,
        states,
        terminal_error,
        bound_violation: bound_violation.max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    StrictlyStronger,
    NotWeaker,
    Equal,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

/// Why `inner ⊆ outer` failed at some stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ContainmentViolation {
    pub stage: usize,
    /// Vertex of the inner stage outside the outer one (exact test).
    pub vertex: Option<Vec<f64>>,
    /// Direction with `h_inner(d) > h_outer(d)`, or the LP separation
    /// certificate for `vertex`.
    pub direction: Option<Vec<f64>>,
    pub gap: f64,
}

/// Result of testing `R^inner(k) ⊆ R^outer(k)` for `k = 1..=N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Containment {
    pub holds: bool,
    /// Every tested point strictly inside, margin above [`STRICT_MARGIN`].
    pub strict: bool,
    /// `false` when some stage was only checked on sampled directions; the
    /// verdict is then probable rather than proven.
    pub exact: bool,
    /// Smallest vertex shrink margin (exact stages) or relative support gap
    /// (sampled stages) over all stages.
    pub min_margin: f64,
    pub violation: Option<ContainmentViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AbilityVerdict {
    pub relation: Relation,
    /// The stronger system, if any.
    pub stronger: Option<Side>,
    pub at_horizon: usize,
    pub kind: RegionKind,
    pub exact: bool,
    /// Comparison assumes both systems are already normalized.
    pub assumes_normalized: bool,
    pub a_in_b: Containment,
    pub b_in_a: Containment,
    pub metrics_a: ShapeReport,
    pub metrics_b: ShapeReport,
}

fn stage_containment(inner: &Zonotope, outer: &Zonotope, stage: usize, seed: u64, exec: Exec) -> Result<Containment> {
    if inner.len() <= EXACT_GENERATOR_LIMIT {
        let vertices = inner.vertices();
        let results = exec.map(&vertices, |v| -> Result<(f64, Option<ContainmentViolation>)> {
            let problem = BoxLp::new(outer.generators().clone(), v.clone());
            let verdict = lp::feasible(&problem)?;
            if !verdict.feasible {
                let gap = verdict.certificate_gap(&problem).unwrap_or(f64::NAN);
                return Ok((
                    -1.0,
                    Some(ContainmentViolation {
                        stage,
                        vertex: Some(v.as_slice().to_vec()),
                        direction: verdict.certificate.map(|d| d.as_slice().to_vec()),
                        gap,
                    }),
                ));
            }
            Ok((lp::max_margin(&problem)?.margin, None))
        });
        let mut min_margin = f64::INFINITY;
        for res in results {
            let (margin, violation) = res?;
            if violation.is_some() {
                return Ok(Containment {
                    holds: false,
                    strict: false,
                    exact: true,
                    min_margin: margin,
                    violation,
                });
            }
            min_margin = min_margin.min(margin);
        }
        return Ok(Containment {
            holds: true,
            strict: min_margin > STRICT_MARGIN,
            exact: true,
            min_margin,
            violation: None,
        });
    }
    let n = inner.dim();
    let gaps = exec.map_range(0..SAMPLED_DIRECTIONS, |i| {
        let mut rng = SplitMix64::at(seed, (i * n) as u64);
        let d = loop {
            let d = DVector::from_fn(n, |_, _| rng.uniform(-1.0, 1.0));
            if d.norm() > 1e-3 {
                let len = d.norm();
                break d / len;
            }
        };
        let hi = inner.support(&d).expect("unit direction");
        let ho = outer.support(&d).expect("unit direction");
        (d, (ho - hi) / ho.abs().max(f64::MIN_POSITIVE))
    });
    let mut min_margin = f64::INFINITY;
    for (d, rel) in gaps {
        if rel < -1e-12 {
            return Ok(Containment {
                holds: false,
                strict: false,
                exact: false,
                min_margin: rel,
                violation: Some(ContainmentViolation {
                    stage,
                    vertex: None,
                    direction: Some(d.as_slice().to_vec()),
                    gap: -rel,
                }),
            });
        }
        min_margin = min_margin.min(rel);
    }
    Ok(Containment {
        holds: true,
        strict: min_margin > STRICT_MARGIN,
        exact: false,
        min_margin,
        violation: None,
    })
}

fn family_containment(inner: &RegionFamily, outer: &RegionFamily, exec: Exec) -> Result<Containment> {
    let mut total = Containment {
        holds: true,
        strict: true,
        exact: true,
        min_margin: f64::INFINITY,
        violation: None,
    };
    for k in 1..=inner.horizon() {
        let c = stage_containment(inner.stage(k), outer.stage(k), k, 0x5EED ^ k as u64, exec)?;
        total.exact &= c.exact;
        total.min_margin = total.min_margin.min(c.min_margin);
        if !c.holds {
            total.holds = false;
            total.strict = false;
            total.violation = c.violation;
            return Ok(total);
        }
        total.strict &= c.strict;
    }
    Ok(total)
}

/// Classifies the pair by region containment at every stage `k ≤ N`.
pub fn compare_ability(a: &LdtSystem, b: &LdtSystem, horizon: usize, kind: RegionKind) -> Result<AbilityVerdict> {
    compare_ability_with(a, b, horizon, kind, Exec::default())
}

pub fn compare_ability_with(
    a: &LdtSystem,
    b: &LdtSystem,
    horizon: usize,
    kind: RegionKind,
    exec: Exec,
) -> Result<AbilityVerdict> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(format!(
            "systems have {} and {} states",
            a.n(),
            b.n()
        )));
    }
    let spec = ConstraintSpec::default();
    let fam_a = RegionFamily::build(a, kind, horizon, &spec)?;
    let fam_b = RegionFamily::build(b, kind, horizon, &spec)?;
    let a_in_b = family_containment(&fam_a, &fam_b, exec)?;
    let b_in_a = family_containment(&fam_b, &fam_a, exec)?;
    let (relation, stronger) = match (a_in_b.holds, b_in_a.holds) {
        (true, true) => (Relation::Equal, None),
        (true, false) if a_in_b.strict => (Relation::StrictlyStronger, Some(Side::B)),
        (true, false) => (Relation::NotWeaker, Some(Side::B)),
        (false, true) if b_in_a.strict => (Relation::StrictlyStronger, Some(Side::A)),
        (false, true) => (Relation::NotWeaker, Some(Side::A)),
        (false, false) => (Relation::Incomparable, None),
    };
    Ok(AbilityVerdict {
        relation,
        stronger,
        at_horizon: horizon,
        kind,
        exact: a_in_b.exact && b_in_a.exact,
        assumes_normalized: true,
        a_in_b,
        b_in_a,
        metrics_a: fam_a.stage(horizon).shape_report_with(exec),
        metrics_b: fam_b.stage(horizon).shape_report_with(exec),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremOptions {
    pub samples: usize,
    pub kind: RegionKind,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for TheoremOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            kind: RegionKind::Reach,
            seed: 1,
            exec: Exec::default(),
        }
    }
}

/// Everything needed to replay one sampled state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplayRecord {
    pub a_matrix_a: Vec<Vec<f64>>,
    pub b_matrix_a: Vec<Vec<f64>>,
    pub a_matrix_b: Vec<Vec<f64>>,
    pub b_matrix_b: Vec<Vec<f64>>,
    pub kind: RegionKind,
    pub horizon: usize,
    pub x0: Vec<f64>,
    pub min_steps_a: Option<usize>,
    pub min_steps_b: Option<usize>,
    pub dim_a: Option<usize>,
    pub dim_b: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DimensionPair {
    pub dim_a: usize,
    pub dim_b: usize,
    pub count: usize,
}

/// Agreement of measured dimensions with the closed-form case table
/// `N − N*` (boundary) / `N − N* + 1` (interior) for single-input systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CaseTableAgreement {
    pub agree: usize,
    pub disagree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremReport {
    pub horizon: usize,
    pub kind: RegionKind,
    pub samples: usize,
    pub seed: u64,
    pub relation: Relation,
    /// States with `N*_B > N*_A` (or a failed solve).
    pub time_violations: Vec<ReplayRecord>,
    /// States with `dim U_A > dim U_B`.
    pub dimension_violations: Vec<ReplayRecord>,
    pub time_ties: usize,
    pub time_strictly_faster: usize,
    pub dimension_pairs: Vec<DimensionPair>,
    /// `None` for multi-input systems, where the table does not apply.
    pub case_table: Option<CaseTableAgreement>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.time_violations.is_empty() && self.dimension_violations.is_empty()
    }
}

/// Samples states of `R^A(N)` and checks that the containing system `B`
/// reaches each no later and with no smaller strategy space.
pub fn verify_theorem1(a: &LdtSystem, b: &LdtSystem, horizon: usize, samples: usize) -> Result<TheoremReport> {
    verify_theorem1_with(
        a,
        b,
        horizon,
        &TheoremOptions {
            samples,
            ..TheoremOptions::default()
        },
    )
}

struct SampleOutcome {
    x0: DVector<f64>,
    a: Result<ControlSolution>,
    b: Result<ControlSolution>,
}

pub fn verify_theorem1_with(
    a: &LdtSystem,
    b: &LdtSystem,
    horizon: usize,
    opts: &TheoremOptions,
) -> Result<TheoremReport> {
    let verdict = compare_ability_with(a, b, horizon, opts.kind, opts.exec)?;
    if !verdict.a_in_b.holds {
        return Err(Error::PreconditionNotMet(format!(
            "R^B(k) does not contain R^A(k) for all k ≤ {horizon}"
        )));
    }
    let fam_a = RegionFamily::build(a, opts.kind, horizon, &ConstraintSpec::default())?;
    let states = sample_states(fam_a.stage(horizon), opts.samples, opts.seed);
    let outcomes = opts.exec.map(&states, |x| SampleOutcome {
        x0: x.clone(),
        a: min_time(a, x.as_slice(), opts.kind, horizon),
        b: min_time(b, x.as_slice(), opts.kind, horizon),
    });

    let replay = |o: &SampleOutcome, error: Option<String>| ReplayRecord {
        a_matrix_a: matrix_to_rows(a.a()),
        b_matrix_a: matrix_to_rows(a.b()),
        a_matrix_b: matrix_to_rows(b.a()),
        b_matrix_b: matrix_to_rows(b.b()),
        kind: opts.kind,
        horizon,
        x0: o.x0.as_slice().to_vec(),
        min_steps_a: o.a.as_ref().ok().map(|s| s.min_steps),
        min_steps_b: o.b.as_ref().ok().map(|s| s.min_steps),
        dim_a: o.a.as_ref().ok().map(|s| s.strategy_dim),
        dim_b: o.b.as_ref().ok().map(|s| s.strategy_dim),
        error,
    };

    let single_input = a.r() == 1 && b.r() == 1;
    let mut report = TheoremReport {
        horizon,
        kind: opts.kind,
        samples: states.len(),
        seed: opts.seed,
        relation: verdict.relation,
        time_violations: Vec::new(),
        dimension_violations: Vec::new(),
        time_ties: 0,
        time_strictly_faster: 0,
        dimension_pairs: Vec::new(),
        case_table: single_input.then(CaseTableAgreement::default),
    };
    for o in &outcomes {
        let (sa, sb) = match (&o.a, &o.b) {
            (Ok(sa), Ok(sb)) => (sa, sb),
            (ea, eb) => {
                let msg = [ea.as_ref().err(), eb.as_ref().err()]
                    .into_iter()
                    .flatten()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                report.time_violations.push(replay(o, Some(msg)));
                continue;
            }
        };
        match sb.min_steps.cmp(&sa.min_steps) {
            std::cmp::Ordering::Greater => report.time_violations.push(replay(o, None)),
            std::cmp::Ordering::Equal => report.time_ties += 1,
            std::cmp::Ordering::Less => report.time_strictly_faster += 1,
        }
        if sa.strategy_dim > sb.strategy_dim {
            report.dimension_violations.push(replay(o, None));
        }
        match report
            .dimension_pairs
            .iter_mut()
            .find(|p| (p.dim_a, p.dim_b) == (sa.strategy_dim, sb.strategy_dim))
        {
            Some(p) => p.count += 1,
            None => report.dimension_pairs.push(DimensionPair {
                dim_a: sa.strategy_dim,
                dim_b: sb.strategy_dim,
                count: 1,
            }),
        }
        if let Some(table) = report.case_table.as_mut() {
            for s in [sa, sb] {
                let predicted = match s.boundary_status {
                    BoundaryStatus::Boundary => horizon - s.min_steps,
                    BoundaryStatus::Interior => horizon - s.min_steps + 1,
                };
                if predicted == s.strategy_dim {
                    table.agree += 1;
                } else {
                    table.disagree += 1;
                }
            }
        }
    }
    report
        .dimension_pairs
        .sort_by_key(|p| (p.dim_a, p.dim_b));
    Ok(report)
}

/// Vertices of `z` (evenly thinned to at most half of `count`) followed by
/// random convex combinations. Each combination mixes a random subset of
/// `2..=n+1` vertices with Dirichlet(1, …, 1) weights, which spreads the
/// samples over faces and interior alike.
pub fn sample_states(z: &Zonotope, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let vertices = z.vertices();
    if count == 0 || vertices.is_empty() {
        return Vec::new();
    }
    let keep = vertices.len().min(count / 2).max(1);
    let mut out: Vec<DVector<f64>> = (0..keep)
        .map(|i| vertices[i * vertices.len() / keep].clone())
        .collect();
    let mut rng = SplitMix64::new(seed);
    let n = z.dim();
    while out.len() < count {
        let size = 2 + rng.below(n);
        let mut x = DVector::zeros(n);
        let mut total = 0.0;
        for _ in 0..size {
            let w = -(1.0 - rng.next_f64()).ln();
            x += &vertices[rng.below(vertices.len())] * w;
            total += w;
        }
        out.push(if total > 0.0 { x / total } else { x });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, b: f64) -> LdtSystem {
        LdtSystem::from_rows("s", &[vec![a]], &[vec![b]]).unwrap()
    }

    #[test]
    fn origin_needs_no_steps() {
        let s = scalar(1.0, 1.0);
        let sol = min_time(&s, &[0.0], RegionKind::Reach, 3).unwrap();
        assert_eq!(sol.min_steps, 0);
        assert!(sol.inputs.is_empty());
        assert_eq!(sol.strategy_dim, 2);
    }

    #[test]
    fn scalar_chain_recover() {
        let s = scalar(1.0, 1.0);
        let sol = min_time(&s, &[2.5], RegionKind::Recover, 10).unwrap();
        assert_eq!(sol.min_steps, 3);
        assert!(sol.terminal_error < 1e-9);
        assert_eq!(sol.boundary_status, BoundaryStatus::Interior);
        let cert = sol.minimality_certificate.unwrap();
        assert!(cert[0] * 2.5 > 2.0 * cert[0].abs());
        let at_edge = min_time(&s, &[3.0], RegionKind::Recover, 10).unwrap();
        assert_eq!(at_edge.boundary_status, BoundaryStatus::Boundary);
        assert!(at_edge.support_normal.is_some());
    }

    #[test]
    fn not_reachable_has_certificate() {
        let s = scalar(1.0, 1.0);
        match min_time(&s, &[4.5], RegionKind::Reach, 4) {
            Err(Error::NotReachable { max_steps, direction, gap }) => {
                assert_eq!(max_steps, 4);
                assert!(direction.is_some());
                assert!(gap > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scalar_strategy_dims() {
        let s = scalar(1.0, 1.0);
        assert_eq!(strategy_space_dim(&s, &[3.0], 3, RegionKind::Reach).unwrap(), 0);
        assert_eq!(strategy_space_dim(&s, &[2.0], 3, RegionKind::Reach).unwrap(), 2);
        assert_eq!(
            strategy_space_dim(&s, &[3.5], 3, RegionKind::Reach),
            Err(Error::NotMember(3))
        );
    }

    #[test]
    fn simulate_examples() {
        let s = scalar(1.0, 1.0);
        let t = simulate(&s, &[3.0], &vec![vec![-1.0]; 3], RegionKind::Recover).unwrap();
        assert_eq!(t.terminal_error, 0.0);
        assert_eq!(t.states.len(), 4);
        let empty = simulate(&s, &[3.0], &[], RegionKind::Recover).unwrap();
        assert_eq!(empty.states, vec![vec![3.0]]);
        let singular = scalar(0.0, 1.0);
        assert_eq!(
            simulate(&singular, &[1.0], &[], RegionKind::Recover),
            Err(Error::SingularA)
        );
    }

    #[test]
    fn scalar_comparisons() {
        let one = scalar(1.0, 1.0);
        let two = scalar(1.0, 2.0);
        let v = compare_ability(&one, &one, 4, RegionKind::Reach).unwrap();
        assert_eq!(v.relation, Relation::Equal);
        let v = compare_ability(&one, &two, 4, RegionKind::Reach).unwrap();
        assert_eq!((v.relation, v.stronger), (Relation::StrictlyStronger, Some(Side::B)));
        let v = compare_ability(&two, &one, 4, RegionKind::Reach).unwrap();
        assert_eq!(v.stronger, Some(Side::A));
    }

    #[test]
    fn scalar_theorem() {
        let one = scalar(1.0, 1.0);
        let two = scalar(1.0, 2.0);
        let rep = verify_theorem1(&one, &two, 6, 100).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.samples, 100);
        assert!(matches!(
            verify_theorem1(&two, &one, 6, 10),
            Err(Error::PreconditionNotMet(_))
        ));
        let same = verify_theorem1(&one, &one, 5, 40).unwrap();
        assert_eq!(same.time_ties, 40);
        assert!(same.passed());
    }
}
