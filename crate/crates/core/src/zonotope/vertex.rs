//! Vertex sign patterns of origin-centred zonotopes.
//!
//! A vertex is `Σ sgn(dᵀg_k) g_k` for a direction `d` in an open cell of the
//! central arrangement `{d : dᵀg_k = 0}`. Cells are reached without sampling:
//! in the plane they are read off the angular order of the generators, and in
//! higher dimension every vertex lies on a facet whose normal is orthogonal
//! to `d−1` generators, so the facets are traversed and each facet (itself a
//! zonotope one dimension down) is solved recursively.

use std::collections::HashSet;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::linalg::{rank, span_basis, TripleSigns, RANK_TOL};

/// Relative size below which a generator is treated as zero.
const ZERO_TOL: f64 = 1e-12;
/// Relative tolerance of `gᵀν = 0` and of parallel-generator detection.
const TIE_TOL: f64 = 1e-10;
/// Below this relative offset from a facet plane a generator is close
/// enough to a tie that the traversal may emit non-vertices.
const NEAR_TIE: f64 = 1e-6;

/// Sign vectors (one entry per generator, `±1`) of all vertices.
pub(crate) fn vertex_signs(g: &DMatrix<f64>) -> Vec<Vec<i8>> {
    candidate_signs(g).0
}

/// Candidate sign vectors and whether any facet plane came close to a tie.
/// Without near-ties the candidates are exactly the vertex patterns.
pub(crate) fn candidate_signs(g: &DMatrix<f64>) -> (Vec<Vec<i8>>, bool) {
    let m = g.ncols();
    let norms: Vec<f64> = (0..m).map(|k| g.column(k).norm()).collect();
    let top = norms.iter().cloned().fold(0.0, f64::max);
    let active: Vec<usize> = (0..m).filter(|&k| norms[k] > ZERO_TOL * top).collect();
    if active.is_empty() {
        return (vec![vec![1; m]], false);
    }
    let sub = g.select_columns(active.iter());
    let full = rank(&sub, RANK_TOL) == g.nrows();
    // Raw planar generators admit exact angular comparisons; anything that
    // went through a change of basis only carries TIE_TOL accuracy.
    let tie = if full && g.nrows() == 2 { 0.0 } else { TIE_TOL };
    let coords = if full { sub } else { span_basis(&sub, RANK_TOL).tr_mul(&sub) };
    let mut near = false;
    let patterns = if full && g.nrows() == 3 {
        spatial_signs(&coords)
    } else {
        full_rank_signs(&coords, tie, &mut near)
    };
    let mut seen = HashSet::new();
    let patterns = patterns
        .into_iter()
        .map(|p| {
            let mut full = vec![1i8; m];
            for (slot, &k) in active.iter().enumerate() {
                full[k] = p[slot];
            }
            full
        })
        .filter(|p| seen.insert(p.clone()))
        .collect();
    (patterns, near)
}

/// Generators sharing one line through the origin, in angular order.
pub(crate) struct PlanarGroup {
    /// `(generator index, ±1)` so that `flip · g` points along `direction`.
    pub members: Vec<(usize, f64)>,
    /// Sum of the oriented members; its angle lies in `[0, π)`.
    pub direction: [f64; 2],
}

/// `a × b` correctly signed even for nearly parallel vectors (Kahan's
/// difference of products, accurate to a couple of ulps of the result).
pub(crate) fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    let w = a[1] * b[0];
    let e = (-a[1]).mul_add(b[0], w);
    let f = a[0].mul_add(b[1], -w);
    f + e
}

/// Groups planar vectors by line and sorts the groups by angle in `[0, π)`.
/// Vectors count as parallel when `|a × b| ≤ tie·|a||b|`; `tie = 0` keeps
/// every line that is not exactly shared. Zero vectors are skipped.
pub(crate) fn planar_groups(v: &[[f64; 2]], tie: f64) -> Vec<PlanarGroup> {
    let top = v.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    let mut canon: Vec<(usize, f64, [f64; 2])> = v
        .iter()
        .enumerate()
        .filter(|(_, p)| p[0].hypot(p[1]) > ZERO_TOL * top)
        .map(|(k, p)| {
            let flip = if p[1] < 0.0 || (p[1] == 0.0 && p[0] < 0.0) {
                -1.0
            } else {
                1.0
            };
            (k, flip, [flip * p[0], flip * p[1]])
        })
        .collect();
    // On the half-open upper half plane the sign of the cross product is a
    // consistent angular order, and unlike atan2 it does not round ties.
    canon.sort_by(|a, b| {
        let c = cross(a.2, b.2);
        0.0.partial_cmp(&c).expect("finite").then(a.0.cmp(&b.0))
    });

    let parallel = |a: [f64; 2], b: [f64; 2]| cross(a, b).abs() <= tie * a[0].hypot(a[1]) * b[0].hypot(b[1]);
    let mut groups: Vec<PlanarGroup> = Vec::new();
    let mut lead = [0.0; 2];
    for (k, flip, c) in canon {
        match groups.last_mut() {
            Some(gr) if parallel(lead, c) => {
                gr.members.push((k, flip));
                gr.direction = [gr.direction[0] + c[0], gr.direction[1] + c[1]];
            }
            _ => {
                lead = c;
                groups.push(PlanarGroup {
                    members: vec![(k, flip)],
                    direction: c,
                })
            }
        }
    }
    // Angles just below π wrap onto the first line.
    if groups.len() > 1 && parallel(groups[0].direction, groups[groups.len() - 1].direction) {
        let last = groups.pop().expect("len > 1");
        let first = &mut groups[0];
        for (k, flip) in last.members {
            first.members.push((k, -flip));
        }
        first.direction = [
            first.direction[0] - last.direction[0],
            first.direction[1] - last.direction[1],
        ];
    }
    groups
}

/// Vertex patterns of a zonotope that is full-dimensional in its coordinates.
fn full_rank_signs(c: &DMatrix<f64>, tie: f64, near: &mut bool) -> Vec<Vec<i8>> {
    let (d, k) = c.shape();
    match d {
        0 => vec![vec![1; k]],
        1 => {
            let s: Vec<i8> = (0..k).map(|j| if c[(0, j)] < 0.0 { -1 } else { 1 }).collect();
            let neg = s.iter().map(|v| -v).collect();
            vec![s, neg]
        }
        2 => planar_signs(c, tie),
        _ => facet_signs(c, near),
    }
}

fn planar_signs(c: &DMatrix<f64>, tie: f64) -> Vec<Vec<i8>> {
    let k = c.ncols();
    let pts: Vec<[f64; 2]> = (0..k).map(|j| [c[(0, j)], c[(1, j)]]).collect();
    let groups = planar_groups(&pts, tie);
    let mut out = Vec::with_capacity(2 * groups.len());
    for cut in 0..groups.len() {
        let mut s = vec![1i8; k];
        for (gi, gr) in groups.iter().enumerate() {
            let gs = if gi < cut { -1.0 } else { 1.0 };
            for &(j, flip) in &gr.members {
                s[j] = if gs * flip < 0.0 { -1 } else { 1 };
            }
        }
        let neg = s.iter().map(|v| -v).collect();
        out.push(s);
        out.push(neg);
    }
    out
}

/// Facet traversal in 3-D driven by exact determinant signs. Every vertex
/// has a normal-cone ray `±(g_i × g_j)`, so listing each plane's sign
/// pattern with the face's own patterns on the plane misses none; some
/// candidates are not vertices and are filtered by the caller.
fn spatial_signs(c: &DMatrix<f64>) -> Vec<Vec<i8>> {
    let k = c.ncols();
    let exact = TripleSigns::new(c);
    let mut seen_planes: HashSet<Vec<usize>> = HashSet::new();
    let mut seen: HashSet<Vec<i8>> = HashSet::new();
    let mut out = Vec::new();
    for (i, j) in (0..k).tuple_combinations() {
        let on_plane: Vec<usize> = (0..k).filter(|&l| exact.det_sign(i, j, l) == 0).collect();
        if on_plane.len() == k || !seen_planes.insert(on_plane.clone()) {
            continue;
        }
        let face = c.select_columns(on_plane.iter());
        let basis = span_basis(&face, RANK_TOL);
        let face_patterns = if basis.ncols() == 2 {
            planar_signs(&basis.tr_mul(&face), 0.0)
        } else {
            let mut near = false;
            full_rank_signs(&basis.tr_mul(&face), 0.0, &mut near)
        };
        for side in [1i8, -1] {
            for fp in &face_patterns {
                let mut s: Vec<i8> = (0..k)
                    .map(|l| if side * exact.det_sign(i, j, l) < 0 { -1 } else { 1 })
                    .collect();
                for (slot, &l) in on_plane.iter().enumerate() {
                    s[l] = fp[slot];
                }
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn facet_signs(c: &DMatrix<f64>, near: &mut bool) -> Vec<Vec<i8>> {
    let (d, k) = c.shape();
    let norms: Vec<f64> = (0..k).map(|j| c.column(j).norm()).collect();
    let mut seen_planes: HashSet<Vec<usize>> = HashSet::new();
    let mut seen: HashSet<Vec<i8>> = HashSet::new();
    let mut out = Vec::new();
    for subset in (0..k).combinations(d - 1) {
        let Some(normal) = hyperplane_normal(c, &subset, &norms) else {
            continue;
        };
        let dots: Vec<f64> = (0..k).map(|j| c.column(j).dot(&normal)).collect();
        let on_plane: Vec<usize> = (0..k)
            .filter(|&j| dots[j].abs() <= TIE_TOL * norms[j])
            .collect();
        if !seen_planes.insert(on_plane.clone()) {
            continue;
        }
        if on_plane.len() > d - 1
            || (0..k).any(|j| !on_plane.contains(&j) && dots[j].abs() <= NEAR_TIE * norms[j])
        {
            *near = true;
        }
        let face = c.select_columns(on_plane.iter());
        let basis = span_basis(&face, RANK_TOL);
        if basis.ncols() != d - 1 {
            continue;
        }
        let face_patterns = full_rank_signs(&basis.tr_mul(&face), TIE_TOL, near);
        for side in [1.0, -1.0] {
            for fp in &face_patterns {
                let mut s: Vec<i8> = dots
                    .iter()
                    .map(|&v| if side * v < 0.0 { -1 } else { 1 })
                    .collect();
                for (slot, &j) in on_plane.iter().enumerate() {
                    s[j] = fp[slot];
                }
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Unit normal of the hyperplane spanned by `d−1` columns, via signed
/// maximal minors; `None` when the columns are dependent.
fn hyperplane_normal(c: &DMatrix<f64>, subset: &[usize], norms: &[f64]) -> Option<DVector<f64>> {
    let d = c.nrows();
    let m = c.select_columns(subset.iter());
    let mut normal = DVector::zeros(d);
    for i in 0..d {
        let minor = m.clone().remove_row(i);
        let det = minor.determinant();
        normal[i] = if i % 2 == 0 { det } else { -det };
    }
    let scale: f64 = subset.iter().map(|&j| norms[j]).product();
    let len = normal.norm();
    if len <= TIE_TOL * scale {
        return None;
    }
    Some(normal / len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_has_eight_patterns() {
        let g = DMatrix::<f64>::identity(3, 3);
        let s = vertex_signs(&g);
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn parallel_generators_share_signs() {
        let g = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.0, 0.0, 0.0, 1.0]);
        let s = vertex_signs(&g);
        assert_eq!(s.len(), 4);
        for p in s {
            assert_eq!(p[0], -p[1]);
        }
    }

    #[test]
    fn wrapped_angles_merge() {
        let groups = planar_groups(&[[1.0, 0.0], [-1.0, 1e-14], [0.0, 1.0]], TIE_TOL);
        assert_eq!(groups.len(), 2);
        let groups = planar_groups(&[[1.0, 0.0], [-1.0, 1e-14], [0.0, 1.0]], 0.0);
        assert_eq!(groups.len(), 3);
    }
}
