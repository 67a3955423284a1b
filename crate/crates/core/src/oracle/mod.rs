//! Brute-force reference implementations.
//!
//! Everything here is deliberately simple and independent of the main code
//! paths it checks: vertices come from exhaustive sign enumeration plus a
//! convex hull, volumes from Monte Carlo, minimum times from hull
//! containment, and LP answers from enumerating basic solutions.

pub mod hull;
pub mod suite;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::control::FIXED_TOL;
use crate::linalg::{rank, TripleSigns, RANK_TOL};
use crate::lp::{self, BoxLp};
use crate::model::LdtSystem;
use crate::region::RegionKind;
use crate::rng::SplitMix64;
use crate::{Error, Exec, Result};

pub use hull::Hull;

/// Hard cap on `maxSignBits`.
pub const SIGN_BITS_CAP: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleConfig {
    pub max_sign_bits: u32,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_sign_bits: 20,
            mc_samples: 1_000_000,
            seed: 0x5EED,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sign_bits > SIGN_BITS_CAP {
            return Err(Error::InvalidConfig(format!(
                "maxSignBits {} exceeds {SIGN_BITS_CAP}",
                self.max_sign_bits
            )));
        }
        if self.mc_samples < 1000 {
            return Err(Error::InvalidConfig("mcSamples must be at least 1000".into()));
        }
        Ok(())
    }
}

/// All `2^m` points `Σ ±g_k`, summed in generator order.
fn sign_sums(g: &DMatrix<f64>, cfg: &OracleConfig) -> Result<Vec<DVector<f64>>> {
    cfg.validate()?;
    let (n, m) = g.shape();
    if m as u32 > cfg.max_sign_bits {
        return Err(Error::TooManyGenerators(m, cfg.max_sign_bits));
    }
    Ok((0..1usize << m)
        .map(|mask| {
            let mut p = DVector::zeros(n);
            for k in 0..m {
                if mask >> k & 1 == 1 {
                    p += g.column(k);
                } else {
                    p -= g.column(k);
                }
            }
            p
        })
        .collect())
}

fn lex_sorted_unique(mut pts: Vec<DVector<f64>>, tol: f64) -> Vec<DVector<f64>> {
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<DVector<f64>> = Vec::new();
    for p in pts {
        let dup = out
            .iter()
            .rev()
            .take_while(|q| p[0] - q[0] <= tol)
            .any(|q| (&p - q).amax() <= tol);
        if !dup {
            out.push(p);
        }
    }
    out
}

/// Extreme points of `{Σ ±g_k}`, lexicographically sorted.
///
/// Planar sets go through a monotone chain in exact rational arithmetic,
/// so nearly parallel generators still contribute their vertices. In higher
/// dimension hull construction breaks down on the needle-shaped regions of
/// stiff systems, so each sign sum `p(s)` is instead tested against the hull of its
/// single-flip neighbours `p(s) − 2 s_k g_k`: it lies in that hull exactly
/// when it lies in the hull of all other sums. Points within the LP
/// feasibility tolerance of the hull do not count as extreme.
pub fn brute_vertices(g: &DMatrix<f64>, cfg: &OracleConfig) -> Result<Vec<DVector<f64>>> {
    let pts = sign_sums(g, cfg)?;
    let scale = pts.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let extreme = if g.nrows() == 2 {
        exact_planar_extreme_points(g)
    } else if g.nrows() == 3 && rank(g, RANK_TOL) == 3 {
        exact_spatial_extreme_points(g)
    } else {
        flip_extreme_points(g, &pts)?
    };
    Ok(lex_sorted_unique(extreme, 1e-12 * scale))
}

/// Strict hull vertices of the exact sign sums of planar generators.
fn exact_planar_extreme_points(g: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let m = g.ncols();
    let exact = |v: f64| BigRational::from_float(v).expect("finite generator");
    let cols: Vec<[BigRational; 2]> = (0..m).map(|k| [exact(g[(0, k)]), exact(g[(1, k)])]).collect();
    let mut pts: Vec<[BigRational; 2]> = (0..1usize << m)
        .map(|mask| {
            let mut p = [BigRational::zero(), BigRational::zero()];
            for (k, c) in cols.iter().enumerate() {
                for i in 0..2 {
                    if mask >> k & 1 == 1 {
                        p[i] += &c[i];
                    } else {
                        p[i] -= &c[i];
                    }
                }
            }
            p
        })
        .collect();
    pts.sort();
    pts.dedup();
    if pts.len() == 1 {
        return vec![DVector::zeros(2)];
    }
    let turn = |o: &[BigRational; 2], a: &[BigRational; 2], b: &[BigRational; 2]| {
        (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
    };
    let mut hull: Vec<usize> = Vec::new();
    for pass in [false, true] {
        let floor = hull.len();
        let order: Vec<usize> = if pass { (0..pts.len()).rev().collect() } else { (0..pts.len()).collect() };
        for i in order {
            while hull.len() >= floor + 2
                && !turn(&pts[hull[hull.len() - 2]], &pts[hull[hull.len() - 1]], &pts[i]).is_positive()
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull.sort_unstable();
    hull.dedup();
    hull.iter()
        .map(|&i| DVector::from_iterator(2, pts[i].iter().map(|v| v.to_f64().expect("finite"))))
        .collect()
}

/// Sign sums over the generators above `1e-12` of the largest (the rest
/// held at `+1`) that some direction sees strictly on one side of every
/// signed generator, decided from exact determinant signs.
fn exact_spatial_extreme_points(g: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let m = g.ncols();
    let norms: Vec<f64> = (0..m).map(|k| g.column(k).norm()).collect();
    let top = norms.iter().cloned().fold(0.0, f64::max);
    let live: Vec<usize> = (0..m).filter(|&k| norms[k] > 1e-12 * top).collect();
    let exact = TripleSigns::new(g);
    let mut out = Vec::new();
    for mask in 0..1usize << live.len() {
        let mut signs = vec![1i8; m];
        for (bit, &k) in live.iter().enumerate() {
            if mask >> bit & 1 == 0 {
                signs[k] = -1;
            }
        }
        if exact.one_sided(&live, &signs) {
            out.push(DVector::from_fn(3, |i, _| (0..m).map(|k| f64::from(signs[k]) * g[(i, k)]).sum()));
        }
    }
    out
}

/// `pts[mask]` is the sign sum whose bit `k` selects `+g_k`.
fn flip_extreme_points(g: &DMatrix<f64>, pts: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    let (n, m) = g.shape();
    let top = (0..m).map(|k| g.column(k).amax()).fold(0.0, f64::max);
    let live: Vec<usize> = (0..m).filter(|&k| g.column(k).amax() > 1e-12 * top).collect();
    let mut out = Vec::new();
    for (mask, p) in pts.iter().enumerate() {
        if live.is_empty() {
            out.push(p.clone());
            continue;
        }
        let mut a = DMatrix::zeros(n + 1, live.len());
        for (col, &k) in live.iter().enumerate() {
            let q = &pts[mask ^ (1 << k)];
            a.view_mut((0, col), (n, 1)).copy_from(q);
            a[(n, col)] = 1.0;
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(p);
        rhs[n] = 1.0;
        let k = live.len();
        let problem = BoxLp::new(a, rhs).with_bounds(vec![0.0; k], vec![1.0; k]);
        if !lp::feasible(&problem)?.feasible {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Largest distance from a point of either set to the nearest point of the
/// other, or infinity when the sizes differ.
pub fn point_set_discrepancy(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let one_way = |x: &[DVector<f64>], y: &[DVector<f64>]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).amax()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: usize,
    pub samples: usize,
    pub box_volume: f64,
}

/// Hit-or-miss volume in the circumscribed box. Sample `i` uses draws
/// `i·n … i·n + n − 1` of the seeded stream, so the estimate does not depend
/// on the execution mode.
///
/// Samples separated from the zonotope by one of its candidate facet normals
/// (`|dᵀx| > h(d)`) are misses without further work; every other sample is
/// decided by `lp::feasible`.
pub fn mc_volume(g: &DMatrix<f64>, cfg: &OracleConfig, exec: Exec) -> Result<VolumeEstimate> {
    cfg.validate()?;
    let n = g.nrows();
    if rank_by_elimination(g, 1e-10) < n {
        return Err(Error::DegenerateZonotope);
    }
    let half: Vec<f64> = g.row_iter().map(|r| r.iter().map(|v| v.abs()).sum()).collect();
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let samples = cfg.mc_samples;
    let (cuts, complete) = facet_normal_candidates(g);
    let hits = exec.count_range(0..samples, |i| {
        let mut rng = SplitMix64::at(cfg.seed, (i * n) as u64);
        let x = DVector::from_fn(n, |c, _| rng.uniform(-half[c], half[c]));
        let mut deep = complete;
        for (d, h) in &cuts {
            let t = d.dot(&x).abs();
            if t > h * (1.0 + 1e-9) {
                return false;
            }
            deep &= t < h * (1.0 - 1e-7);
        }
        // the cuts are the full H-description; only the boundary band needs the LP
        deep || lp::feasible(&BoxLp::new(g.clone(), x)).is_ok_and(|f| f.feasible)
    });
    let p = hits as f64 / samples as f64;
    Ok(VolumeEstimate {
        estimate: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        hits,
        samples,
        box_volume,
    })
}

/// `(d, h(d))` for the normal `d` of every hyperplane spanned by `n − 1`
/// generators (cofactor expansion), skipping dependent subsets. The flag is
/// set when nothing was skipped, in which case every facet normal is listed.
fn facet_normal_candidates(g: &DMatrix<f64>) -> (Vec<(DVector<f64>, f64)>, bool) {
    let (n, m) = g.shape();
    let mut out = Vec::new();
    let mut complete = true;
    if n < 2 {
        return (out, false);
    }
    let mut subset: Vec<usize> = (0..n - 1).collect();
    loop {
        let cols = g.select_columns(subset.iter());
        let d = DVector::from_fn(n, |i, _| {
            let minor = cols.clone().remove_row(i).determinant();
            if i % 2 == 0 { minor } else { -minor }
        });
        let len = d.norm();
        let scale: f64 = subset.iter().map(|&j| g.column(j).norm()).product();
        if len > 1e-10 * scale {
            let d = d / len;
            let h = g.tr_mul(&d).iter().map(|v| v.abs()).sum();
            out.push((d, h));
        } else {
            complete = false;
        }
        if !next_combination(&mut subset, m) {
            return (out, complete);
        }
    }
}

/// First `N ≤ max_steps` whose region hull contains `x0`. Regions are grown
/// as `vert R(N) ⊆ vert R(N−1) ± g_N`, pruned to hull vertices each step.
pub fn exhaustive_min_time(sys: &LdtSystem, x0: &[f64], kind: RegionKind, max_steps: usize) -> Result<usize> {
    let n = sys.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch("x0 length".into()));
    }
    if n > 3 {
        return Err(Error::InvalidConfig("hull containment needs n ≤ 3".into()));
    }
    let x = DVector::from_column_slice(x0);
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0);
    }
    let (step, mut block) = match kind {
        RegionKind::Reach => (sys.a().clone(), sys.b().clone()),
        RegionKind::Recover => {
            let inv = sys.a().clone().try_inverse().ok_or(Error::SingularA)?;
            let first = &inv * sys.b();
            (inv, first)
        }
    };
    let mut pts = vec![DVector::zeros(n)];
    for steps in 1..=max_steps {
        for g in block.column_iter() {
            pts = pts
                .iter()
                .flat_map(|p| [p + g, p - g])
                .collect();
        }
        let hull = Hull::build(&pts).expect("n ≤ 3");
        if hull.contains(&x) {
            return Ok(steps);
        }
        pts = hull.extreme_indices().iter().map(|&i| pts[i].clone()).collect();
        block = &step * &block;
    }
    Err(Error::NotReachable {
        max_steps,
        direction: None,
        gap: f64::NAN,
    })
}

/// Vertices of `{u : G u = x0, lower ≤ u ≤ upper}` by enumerating basic
/// solutions: `rank G` basic columns, the rest at a bound. `None` when the
/// set is empty.
pub fn box_polytope_vertices(
    g: &DMatrix<f64>,
    x0: &DVector<f64>,
    lower: &[f64],
    upper: &[f64],
) -> Option<Vec<DVector<f64>>> {
    let m = g.ncols();
    let bound = lower.iter().chain(upper).fold(1.0f64, |a, v| a.max(v.abs()));
    let scale = g.amax().max(x0.amax()).max(1.0) * bound;
    let rows = independent_rows(g, 1e-10);
    let rho = rows.len();
    let gr = g.select_rows(rows.iter());
    let xr = DVector::from_iterator(rho, rows.iter().map(|&i| x0[i]));
    let mut vertices = Vec::new();
    let mut subset: Vec<usize> = (0..rho).collect();
    loop {
        let basic = gr.select_columns(subset.iter());
        {
            let lu = basic.clone().lu();
            let nonbasic: Vec<usize> = (0..m).filter(|j| !subset.contains(j)).collect();
            for mask in 0..1usize << nonbasic.len() {
                let mut u = DVector::zeros(m);
                for (t, &j) in nonbasic.iter().enumerate() {
                    u[j] = if mask >> t & 1 == 1 { upper[j] } else { lower[j] };
                }
                let rhs = &xr - &gr * &u;
                let Some(ub) = lu.solve(&rhs) else { continue };
                for (t, &j) in subset.iter().enumerate() {
                    u[j] = ub[t];
                }
                let tol = 1e-9 * bound;
                let in_box = (0..m).all(|j| u[j] >= lower[j] - tol && u[j] <= upper[j] + tol);
                if in_box && (g * &u - x0).amax() <= 1e-8 * scale {
                    vertices.push(u);
                }
            }
        }
        if !next_combination(&mut subset, m) {
            break;
        }
    }
    if vertices.is_empty() {
        return None;
    }
    Some(lex_sorted_unique(vertices, 1e-9 * scale))
}

fn next_combination(c: &mut [usize], m: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < m - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Affine-hull dimension of `{u ∈ [−1, 1]^m : G u = x0}` from its vertices.
///
/// Coordinates are free when their range over the vertices exceeds
/// [`FIXED_TOL`]; the hull is then cut out by `G` on the free columns.
/// Ranking the vertex differences directly would count numerical slivers.
pub fn brute_strategy_dim(g: &DMatrix<f64>, x0: &DVector<f64>) -> Option<usize> {
    let m = g.ncols();
    let verts = box_polytope_vertices(g, x0, &vec![-1.0; m], &vec![1.0; m])?;
    let free: Vec<usize> = (0..m)
        .filter(|&j| {
            let (lo, hi) = verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[j]), hi.max(v[j])));
            hi - lo > FIXED_TOL
        })
        .collect();
    if free.is_empty() {
        return Some(0);
    }
    let cols = g.select_columns(free.iter()).transpose();
    Some(free.len() - rank_by_elimination(&cols, RANK_TOL))
}

/// Optimum of `c·u` over the polytope, by vertex enumeration.
pub fn brute_optimum(lp: &BoxLp) -> Option<f64> {
    let verts = box_polytope_vertices(&lp.g, &lp.x0, &lp.lower, &lp.upper)?;
    let obj = lp.objective.as_ref()?;
    let c = DVector::from_column_slice(&obj.coeffs);
    let values = verts.iter().map(|v| c.dot(v));
    Some(match obj.sense {
        lp::Sense::Minimize => values.fold(f64::INFINITY, f64::min),
        lp::Sense::Maximize => values.fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Row indices forming a basis of the row space, by Gram–Schmidt in row
/// order with a relative tolerance.
fn independent_rows(m: &DMatrix<f64>, tol: f64) -> Vec<usize> {
    let top = m.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut rows = Vec::new();
    for (i, r) in m.row_iter().enumerate() {
        let mut v = r.transpose();
        for _ in 0..2 {
            for b in &basis {
                v -= b * b.dot(&v);
            }
        }
        let norm = v.norm();
        if norm > tol * top && norm > 0.0 {
            basis.push(v / norm);
            rows.push(i);
        }
    }
    rows
}

/// Rank by row Gram–Schmidt, independent of the main linear-algebra path.
pub fn rank_by_elimination(m: &DMatrix<f64>, tol: f64) -> usize {
    independent_rows(m, tol).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_generator_and_square() {
        let cfg = OracleConfig::default();
        let g = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let v = brute_vertices(&g, &cfg).unwrap();
        assert_eq!(v.len(), 2);
        let sq = brute_vertices(&DMatrix::identity(2, 2), &cfg).unwrap();
        assert_eq!(sq.len(), 4);
    }

    #[test]
    fn too_many_generators() {
        let cfg = OracleConfig {
            max_sign_bits: 3,
            ..OracleConfig::default()
        };
        assert_eq!(
            brute_vertices(&DMatrix::identity(2, 4), &cfg),
            Err(Error::TooManyGenerators(4, 3))
        );
        assert!(OracleConfig { max_sign_bits: 25, ..cfg }.validate().is_err());
    }

    #[test]
    fn four_dimensional_uses_lp() {
        let v = brute_vertices(&DMatrix::identity(4, 4), &OracleConfig::default()).unwrap();
        assert_eq!(v.len(), 16);
    }

    #[test]
    fn square_volume_by_sampling() {
        let cfg = OracleConfig {
            mc_samples: 4000,
            ..OracleConfig::default()
        };
        let est = mc_volume(&DMatrix::identity(2, 2), &cfg, Exec::Sequential).unwrap();
        assert_eq!(est.estimate, 4.0);
        let flat = DMatrix::from_column_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(mc_volume(&flat, &cfg, Exec::Sequential), Err(Error::DegenerateZonotope));
    }

    #[test]
    fn chain_min_time() {
        let s = LdtSystem::from_rows("c", &[vec![1.0]], &[vec![1.0]]).unwrap();
        assert_eq!(exhaustive_min_time(&s, &[0.0], RegionKind::Recover, 5).unwrap(), 0);
        assert_eq!(exhaustive_min_time(&s, &[2.5], RegionKind::Recover, 5).unwrap(), 3);
        assert!(exhaustive_min_time(&s, &[5.5], RegionKind::Reach, 5).is_err());
    }

    #[test]
    fn scalar_strategy_polytopes() {
        let g = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        assert_eq!(brute_strategy_dim(&g, &DVector::from_vec(vec![3.0])), Some(0));
        assert_eq!(brute_strategy_dim(&g, &DVector::from_vec(vec![2.0])), Some(2));
        assert_eq!(brute_strategy_dim(&g, &DVector::from_vec(vec![3.5])), None);
    }
}
