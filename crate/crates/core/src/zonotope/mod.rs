//! Origin-centred zonotopes `{Σ z_k g_k : z_k ∈ [-1, 1]}`.

mod polygon;
mod vertex;

use std::cmp::Ordering;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{rank, TripleSigns, RANK_TOL};
use crate::lp::{self, BoxLp};
use crate::{Error, Exec, Result};

pub use polygon::{polygon_area, svg_document, Polygon};
pub(crate) use vertex::planar_groups;

/// Absolute coordinate tolerance for vertex deduplication, scaled by the
/// magnitude of the zonotope when that exceeds one.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    /// `n × m`, one generator per column.
    generators: DMatrix<f64>,
}

impl Zonotope {
    pub fn new(generators: DMatrix<f64>) -> Result<Self> {
        if generators.nrows() == 0 {
            return Err(Error::DimensionMismatch("ambient dimension must be positive".into()));
        }
        if generators.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("generators"));
        }
        Ok(Self { generators })
    }

    pub fn from_columns(n: usize, cols: &[DVector<f64>]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "every generator must have length {n}"
            )));
        }
        let mut g = DMatrix::zeros(n, cols.len());
        for (k, c) in cols.iter().enumerate() {
            g.set_column(k, c);
        }
        Self::new(g)
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.generators.nrows()
    }

    /// Number of generators `m`.
    pub fn len(&self) -> usize {
        self.generators.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The zonotope with one more generator.
    pub fn with_generator(&self, g: &DVector<f64>) -> Result<Self> {
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch("generator length".into()));
        }
        let m = self.len();
        let mut out = self.generators.clone().insert_column(m, 0.0);
        out.set_column(m, g);
        Self::new(out)
    }

    /// Image under `x ↦ diag(scale) x`.
    pub fn scale_state(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.dim() {
            return Err(Error::DimensionMismatch("scale length".into()));
        }
        let mut g = self.generators.clone();
        for (i, s) in scale.iter().enumerate() {
            g.row_mut(i).scale_mut(*s);
        }
        Self::new(g)
    }

    /// Linear image `M · Z`.
    pub fn transform(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("transform width".into()));
        }
        Self::new(m * &self.generators)
    }

    /// Largest absolute generator entry.
    pub fn magnitude(&self) -> f64 {
        crate::linalg::max_abs(&self.generators)
    }

    pub fn rank(&self) -> usize {
        rank(&self.generators, RANK_TOL)
    }

    /// `h(d) = Σ_k |dᵀ g_k|`.
    pub fn support(&self, d: &DVector<f64>) -> Result<f64> {
        if d.len() != self.dim() {
            return Err(Error::DimensionMismatch("direction length".into()));
        }
        if d.iter().any(|v| !v.is_finite()) || d.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(self.generators.tr_mul(d).iter().map(|v| v.abs()).sum())
    }

    /// Half side lengths of the circumscribed axis-aligned box, `h(e_i)`.
    pub fn half_widths(&self) -> Vec<f64> {
        self.generators
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum())
            .collect()
    }

    /// Sign patterns of the vertices, one `±1` entry per generator.
    pub fn vertex_signs(&self) -> Vec<Vec<i8>> {
        vertex::vertex_signs(&self.generators)
    }

    /// `Σ s_k g_k` accumulated in generator order.
    pub fn point(&self, signs: &[i8]) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        for (k, &s) in signs.iter().enumerate() {
            if s > 0 {
                v += self.generators.column(k);
            } else {
                v -= self.generators.column(k);
            }
        }
        v
    }

    /// Exact vertex set, deduplicated and sorted lexicographically. The
    /// set is centrally symmetric.
    ///
    /// Planar and full-rank 3-D sets are decided with exact predicates, so
    /// even nearly parallel generators contribute their vertices. In higher
    /// dimension a point closer than the LP feasibility tolerance to the hull
    /// of the other sign sums is not reported. Generators below `1e-12` of
    /// the largest are ignored throughout.
    pub fn vertices(&self) -> Vec<DVector<f64>> {
        let (signs, near_tie) = vertex::candidate_signs(&self.generators);
        let g = &self.generators;
        let keep: Box<dyn Fn(&[i8]) -> bool> = if g.nrows() == 3 && rank(g, RANK_TOL) == 3 {
            let exact = TripleSigns::new(g);
            let norms: Vec<f64> = g.column_iter().map(|c| c.norm()).collect();
            let top = norms.iter().cloned().fold(0.0, f64::max);
            let live: Vec<usize> = (0..g.ncols()).filter(|&k| norms[k] > 1e-12 * top).collect();
            Box::new(move |s| exact.one_sided(&live, s))
        } else if near_tie {
            Box::new(|s| !self.flat_pattern(s))
        } else {
            Box::new(|_| true)
        };
        let pts = signs.iter().filter(|s| keep(s)).map(|s| self.point(s)).collect();
        dedup_sorted(pts, self.dedup_tol())
    }

    /// `0 ∈ conv{s_k g_k}`: no direction sees every signed generator on its
    /// positive side, so `Σ s_k g_k` is not a vertex.
    fn flat_pattern(&self, signs: &[i8]) -> bool {
        let (n, m) = self.generators.shape();
        let top = self.magnitude();
        let live: Vec<usize> = (0..m)
            .filter(|&k| self.generators.column(k).amax() > 1e-12 * top)
            .collect();
        // The weight row carries half the largest half width, which puts the
        // feasibility tolerance on the same footing as a hull test among the
        // sign sums themselves.
        let c = 0.5 * self.half_widths().iter().cloned().fold(0.0, f64::max);
        let mut a = DMatrix::zeros(n + 1, live.len());
        for (col, &k) in live.iter().enumerate() {
            let s = f64::from(signs[k]);
            for i in 0..n {
                a[(i, col)] = s * self.generators[(i, k)];
            }
            a[(n, col)] = c;
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = c;
        let k = live.len();
        let problem = BoxLp::new(a, rhs).with_bounds(vec![0.0; k], vec![1.0; k]);
        lp::feasible(&problem).map(|f| f.feasible).unwrap_or(false)
    }

    fn dedup_tol(&self) -> f64 {
        DEDUP_TOL * self.half_widths().iter().cloned().fold(1.0, f64::max)
    }

    /// `2ⁿ Σ_{|S| = n} |det G_S|`.
    pub fn volume(&self) -> f64 {
        self.volume_with(Exec::default())
    }

    pub fn volume_with(&self, exec: Exec) -> f64 {
        let (n, m) = self.generators.shape();
        if m < n || self.rank() < n {
            return 0.0;
        }
        let subsets: Vec<Vec<usize>> = (0..m).combinations(n).collect();
        let dets = exec.map(&subsets, |s| {
            self.generators.select_columns(s.iter()).determinant().abs()
        });
        2f64.powi(n as i32) * dets.iter().sum::<f64>()
    }

    /// Membership by LP feasibility of `G z = x`, `‖z‖∞ ≤ 1`.
    pub fn contains(&self, x: &DVector<f64>) -> Result<bool> {
        Ok(lp::feasible(&BoxLp::new(self.generators.clone(), x.clone()))?.feasible)
    }

    /// Uniform shrink margin of `x` (zero on the boundary, one at the origin).
    pub fn margin(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(lp::max_margin(&BoxLp::new(self.generators.clone(), x.clone()))?.margin)
    }

    /// Planar zonotope obtained by keeping coordinates `i` and `j` (0-based).
    pub fn project_2d(&self, i: usize, j: usize) -> Result<Polygon> {
        let n = self.dim();
        if i == j || i >= n || j >= n {
            return Err(Error::BadAxes(i, j, n));
        }
        let pts: Vec<[f64; 2]> = (0..self.len())
            .map(|k| [self.generators[(i, k)], self.generators[(j, k)]])
            .collect();
        Ok(Polygon::from_planar_generators(&pts))
    }

    pub fn shape_report(&self) -> ShapeReport {
        self.shape_report_with(Exec::default())
    }

    pub fn shape_report_with(&self, exec: Exec) -> ShapeReport {
        let n = self.dim();
        let volume = self.volume_with(exec);
        let side_lengths = self.half_widths();
        let box_volume: f64 = side_lengths.iter().map(|f| 2.0 * f).product();
        let overall = if side_lengths.iter().all(|&f| f > 0.0) {
            (volume / box_volume).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let mut planar = Vec::new();
        for (i, j) in (0..n).tuple_combinations() {
            let (fi, fj) = (side_lengths[i], side_lengths[j]);
            let value = if fi > 0.0 && fj > 0.0 {
                let poly = self.project_2d(i, j).expect("valid axes");
                let area = polygon_area(&poly).expect("projected zonotopes are convex");
                (area / (4.0 * fi * fj)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            planar.push(PlanarShapeFactor { i, j, value });
        }
        ShapeReport {
            volume,
            side_lengths,
            overall_shape_factor: overall,
            planar_shape_factors: planar,
            rank: self.rank(),
        }
    }
}

/// `f₁,ᵢ,ⱼ` for the coordinate pair `(i, j)`, 0-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarShapeFactor {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Size and shape summary of a region.
///
/// `side_lengths[i]` is the half side `h(e_i)` of the circumscribed box,
/// `overall_shape_factor` the ratio of the volume to that box, and each
/// planar factor the ratio of a coordinate-plane projection's area to the
/// projected box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeReport {
    pub volume: f64,
    pub side_lengths: Vec<f64>,
    pub overall_shape_factor: f64,
    pub planar_shape_factors: Vec<PlanarShapeFactor>,
    pub rank: usize,
}

impl ShapeReport {
    pub fn planar(&self, i: usize, j: usize) -> Option<f64> {
        self.planar_shape_factors
            .iter()
            .find(|p| (p.i, p.j) == (i, j) || (p.i, p.j) == (j, i))
            .map(|p| p.value)
    }
}

pub(crate) fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Sorts lexicographically and drops points within `tol` (max-norm) of an
/// earlier point.
pub fn dedup_sorted(mut pts: Vec<DVector<f64>>, tol: f64) -> Vec<DVector<f64>> {
    pts.sort_by(lex_cmp);
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(pts.len());
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

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn z(n: usize, cols: &[&[f64]]) -> Zonotope {
        let c: Vec<DVector<f64>> = cols.iter().map(|c| DVector::from_column_slice(c)).collect();
        Zonotope::from_columns(n, &c).unwrap()
    }

    #[test]
    fn segment_vertices() {
        let s = z(2, &[&[1.8182, -0.8182]]);
        let v = s.vertices();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0], -&v[1]);
    }

    #[test]
    fn square() {
        let s = z(2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let v = s.vertices();
        assert_eq!(v.len(), 4);
        for p in &v {
            assert_eq!(p.amax(), 1.0);
            assert_eq!(p.iter().map(|x| x.abs()).sum::<f64>(), 2.0);
        }
        assert_eq!(s.volume(), 4.0);
        assert_eq!(s.support(&DVector::from_column_slice(&[1.0, 0.0])).unwrap(), 1.0);
        let r = s.shape_report();
        assert_eq!(r.side_lengths, vec![1.0, 1.0]);
        assert_relative_eq!(r.overall_shape_factor, 1.0);
        assert_relative_eq!(r.planar(0, 1).unwrap(), 1.0);
    }

    #[test]
    fn degenerate() {
        let s = z(2, &[&[1.0, 2.0]]);
        assert_eq!(s.volume(), 0.0);
        let r = s.shape_report();
        assert_eq!(r.overall_shape_factor, 0.0);
        assert_eq!(r.rank, 1);
        assert_eq!(
            s.support(&DVector::zeros(2)),
            Err(Error::ZeroDirection)
        );
    }

    #[test]
    fn cube_projection_drops_third_generator() {
        let c = z(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let p = c.project_2d(0, 1).unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert!(!p.degenerate);
        assert_relative_eq!(polygon_area(&p).unwrap(), 4.0);
        assert!(matches!(c.project_2d(1, 1), Err(Error::BadAxes(..))));
        assert!(matches!(c.project_2d(0, 3), Err(Error::BadAxes(..))));
    }

    #[test]
    fn dedup_keeps_distinct() {
        let pts = vec![
            DVector::from_column_slice(&[0.0, 1.0]),
            DVector::from_column_slice(&[0.0, 1.0 + 1e-12]),
            DVector::from_column_slice(&[1e-12, 0.0]),
        ];
        assert_eq!(dedup_sorted(pts, 1e-9).len(), 2);
    }
}
