//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::float::FloatCore;
use num_traits::Signed;

/// Relative tolerance used for every rank decision in the crate.
pub const RANK_TOL: f64 = 1e-9;

/// Numerical rank via column-pivoted QR: diagonal entries of `R` above
/// `tol · |R₀₀|` count.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let r = m.clone().col_piv_qr().r();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
    let lead = diag.iter().cloned().fold(0.0, f64::max);
    if lead == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&v| v > tol * lead).count()
}

/// Orthonormal basis (as columns) of the column span of `m`: left singular
/// vectors whose singular value exceeds `tol · σ_max`.
pub fn span_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| top > 0.0 && svd.singular_values[i] > tol * top)
        .collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut q = DMatrix::zeros(n, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        q.set_column(c, &u.column(i));
    }
    q
}

/// Unit vector `d` minimising `‖mᵀ d‖`, i.e. a left null direction when
/// `m` is rank deficient.
pub fn left_null_direction(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let gram = if m.ncols() == 0 {
        DMatrix::zeros(n, n)
    } else {
        m * m.transpose()
    };
    let eig = SymmetricEigen::new(gram);
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    eig.eigenvectors.column(imin).into_owned()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Horizontal concatenation of equally tall blocks.
pub fn hstack(blocks: &[DMatrix<f64>], rows: usize) -> DMatrix<f64> {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Exact signs of `det(g_i, g_j, g_k)` for the columns of a 3-row matrix.
///
/// Entries are rescaled to integers sharing one power of two, so every
/// determinant is evaluated without rounding.
pub struct TripleSigns {
    m: usize,
    signs: Vec<i8>,
}

impl TripleSigns {
    pub fn new(g: &DMatrix<f64>) -> Self {
        assert_eq!(g.nrows(), 3, "triple signs need three rows");
        let m = g.ncols();
        let parts: Vec<(u64, i16, i8)> = g.iter().map(|v| v.integer_decode()).collect();
        let floor = parts
            .iter()
            .filter(|p| p.0 != 0)
            .map(|p| p.1)
            .min()
            .unwrap_or(0);
        let ints: Vec<BigInt> = parts
            .iter()
            .map(|&(mant, exp, sign)| {
                let v = BigInt::from(mant) << ((exp - floor) as usize);
                if sign < 0 { -v } else { v }
            })
            .collect();
        let at = |i: usize, k: usize| &ints[k * 3 + i];
        let mut signs = vec![0i8; m * m * m];
        for i in 0..m {
            for j in i + 1..m {
                let c = [
                    at(1, i) * at(2, j) - at(2, i) * at(1, j),
                    at(2, i) * at(0, j) - at(0, i) * at(2, j),
                    at(0, i) * at(1, j) - at(1, i) * at(0, j),
                ];
                for k in 0..m {
                    let d = at(0, k) * &c[0] + at(1, k) * &c[1] + at(2, k) * &c[2];
                    let s = if d.is_positive() { 1 } else if d.is_negative() { -1 } else { 0 };
                    // the determinant is alternating in its three arguments
                    signs[(i * m + j) * m + k] = s;
                    signs[(j * m + i) * m + k] = -s;
                }
            }
        }
        Self { m, signs }
    }

    pub fn det_sign(&self, i: usize, j: usize, k: usize) -> i8 {
        self.signs[(i * self.m + j) * self.m + k]
    }

    /// Whether some `d` has `d·(s_k g_k) > 0` for every `k` in `live`, i.e.
    /// `Σ s_k g_k` is a vertex of the zonotope of the live columns.
    ///
    /// For full-rank columns the closure of the cone of such `d` is pointed
    /// and generated by rays `±(g_i × g_j)`; the open cone is non-empty
    /// exactly when each constraint is strict on at least one valid ray.
    pub fn one_sided(&self, live: &[usize], signs: &[i8]) -> bool {
        let mut covered = vec![false; live.len()];
        for (a, &i) in live.iter().enumerate() {
            for &j in &live[a + 1..] {
                for flip in [1i8, -1] {
                    let side = flip * signs[i] * signs[j];
                    let value = |k: usize| side * signs[k] * self.det_sign(i, j, k);
                    if live.iter().all(|&k| value(k) >= 0) {
                        for (c, &k) in covered.iter_mut().zip(live) {
                            *c |= value(k) > 0;
                        }
                    }
                }
            }
        }
        covered.iter().all(|&c| c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_basics() {
        assert_eq!(rank(&DMatrix::<f64>::zeros(3, 2), RANK_TOL), 0);
        assert_eq!(rank(&DMatrix::<f64>::identity(3, 3), RANK_TOL), 3);
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(rank(&m, RANK_TOL), 1);
    }

    #[test]
    fn null_direction_is_orthogonal() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let d = left_null_direction(&m);
        assert!((m.transpose() * &d).norm() < 1e-12);
        assert!((d.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn span_basis_dimension() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0]);
        let q = span_basis(&m, RANK_TOL);
        assert_eq!(q.ncols(), 2);
        assert!((q.transpose() * &q - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
