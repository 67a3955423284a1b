//! Convex hulls of point clouds of dimension at most three, built without
//! the LP core: a span basis by Gram–Schmidt, Andrew's monotone chain in the
//! plane and gift wrapping over facets in space.

use std::collections::{HashSet, VecDeque};

use nalgebra::DVector;

/// Relative tolerance for span, coplanarity and containment tests.
const HULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Facet {
    /// Outward unit normal in hull coordinates.
    pub normal: [f64; 3],
    pub offset: f64,
    /// Point indices, counterclockwise seen from outside.
    pub polygon: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Shape {
    Point,
    Segment { lo: f64, hi: f64 },
    Polygon(Vec<[f64; 2]>),
    Polyhedron(Vec<Facet>),
}

/// Hull of a point set in `ℝⁿ`, stored in an orthonormal basis of the span
/// of the points (which must contain the origin in their hull's affine
/// span, as every symmetric zonotope point cloud does).
#[derive(Debug, Clone)]
pub struct Hull {
    basis: Vec<DVector<f64>>,
    scale: f64,
    shape: Shape,
    extreme: Vec<usize>,
}

impl Hull {
    /// Returns `None` when the points span more than three dimensions.
    pub fn build(points: &[DVector<f64>]) -> Option<Self> {
        let scale = points.iter().map(|p| p.amax()).fold(0.0, f64::max);
        let basis = gram_schmidt(points, HULL_TOL * scale.max(f64::MIN_POSITIVE));
        let coords: Vec<Vec<f64>> = points
            .iter()
            .map(|p| basis.iter().map(|b| b.dot(p)).collect())
            .collect();
        let tol = HULL_TOL * scale.max(f64::MIN_POSITIVE);
        let (shape, extreme) = match basis.len() {
            0 => (Shape::Point, vec![0]),
            1 => {
                let (mut lo, mut hi) = (0, 0);
                for (i, c) in coords.iter().enumerate() {
                    if c[0] < coords[lo][0] {
                        lo = i;
                    }
                    if c[0] > coords[hi][0] {
                        hi = i;
                    }
                }
                (
                    Shape::Segment {
                        lo: coords[lo][0],
                        hi: coords[hi][0],
                    },
                    vec![lo, hi],
                )
            }
            2 => {
                let pts: Vec<[f64; 2]> = coords.iter().map(|c| [c[0], c[1]]).collect();
                let idx = monotone_chain(&pts, tol);
                (Shape::Polygon(idx.iter().map(|&i| pts[i]).collect()), idx)
            }
            3 => {
                let pts: Vec<[f64; 3]> = coords.iter().map(|c| [c[0], c[1], c[2]]).collect();
                let facets = gift_wrap(&pts, tol);
                let mut extreme: Vec<usize> = facets
                    .iter()
                    .flat_map(|f| f.polygon.iter().cloned())
                    .collect::<HashSet<_>>()
                    .into_iter()
                    .collect();
                extreme.sort_unstable();
                (Shape::Polyhedron(facets), extreme)
            }
            _ => return None,
        };
        Some(Self {
            basis,
            scale,
            shape,
            extreme,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Indices of the input points that are vertices of the hull.
    pub fn extreme_indices(&self) -> &[usize] {
        &self.extreme
    }

    pub fn facets(&self) -> &[Facet] {
        match &self.shape {
            Shape::Polyhedron(f) => f,
            _ => &[],
        }
    }

    /// Half-space containment with tolerance `HULL_TOL` relative to the
    /// hull's magnitude.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        let tol = HULL_TOL * self.scale.max(x.amax()).max(f64::MIN_POSITIVE);
        let y: Vec<f64> = self.basis.iter().map(|b| b.dot(x)).collect();
        let mut rest = x.clone();
        for (b, &c) in self.basis.iter().zip(&y) {
            rest -= b * c;
        }
        if rest.amax() > tol {
            return false;
        }
        match &self.shape {
            Shape::Point => true,
            Shape::Segment { lo, hi } => y[0] >= lo - tol && y[0] <= hi + tol,
            Shape::Polygon(v) => {
                let k = v.len();
                (0..k).all(|i| {
                    let (a, b) = (v[i], v[(i + 1) % k]);
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let len = e[0].hypot(e[1]);
                    let cross = e[0] * (y[1] - a[1]) - e[1] * (y[0] - a[0]);
                    cross >= -tol * len
                })
            }
            Shape::Polyhedron(facets) => facets
                .iter()
                .all(|f| dot3(f.normal, [y[0], y[1], y[2]]) <= f.offset + tol),
        }
    }
}

fn gram_schmidt(points: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    loop {
        // Pick the point with the largest residual, so the basis is stable.
        let mut best: Option<(f64, DVector<f64>)> = None;
        for p in points {
            let mut r = p.clone();
            for _ in 0..2 {
                for b in &basis {
                    r -= b * b.dot(&r);
                }
            }
            let norm = r.norm();
            if norm > tol && best.as_ref().is_none_or(|(n, _)| norm > *n) {
                best = Some((norm, r));
            }
        }
        match best {
            Some((norm, r)) if basis.len() < points.first().map_or(0, |p| p.len()) => {
                basis.push(r / norm)
            }
            _ => return basis,
        }
    }
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counterclockwise hull vertices (indices), collinear points dropped.
pub fn monotone_chain(pts: &[[f64; 2]], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
    });
    idx.dedup_by(|a, b| (pts[*a][0] - pts[*b][0]).abs() <= tol && (pts[*a][1] - pts[*b][1]).abs() <= tol);
    if idx.len() < 3 {
        return idx;
    }
    let turn_ok = |h: &[usize], p: usize| {
        let (o, a) = (pts[h[h.len() - 2]], pts[h[h.len() - 1]]);
        let len = (pts[p][0] - o[0]).hypot(pts[p][1] - o[1]);
        cross2(o, a, pts[p]) > tol * len
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && !turn_ok(&lower, p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && !turn_ok(&upper, p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn unit3(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Rotates the supporting plane with outward normal `normal` about the line
/// through `a` along unit `u` until it hits the point set; returns the new
/// outward normal.
fn rotate_about(pts: &[[f64; 3]], a: [f64; 3], u: [f64; 3], normal: [f64; 3], tol: f64) -> [f64; 3] {
    // A facet normal is only perpendicular to its edges up to rounding, which
    // far along the axis is enough to push the edge's own end off it.
    let normal = unit3(sub3(normal, scale3(u, dot3(normal, u))));
    let v = cross3(normal, u);
    let mut best: Option<(f64, usize)> = None;
    for (i, &p) in pts.iter().enumerate() {
        let w = sub3(p, a);
        let w = sub3(w, scale3(u, dot3(w, u)));
        let (x, y) = (dot3(w, v), dot3(w, normal));
        if x.hypot(y) <= tol {
            continue;
        }
        let phi = (-y).atan2(x);
        if best.is_none_or(|(b, _)| phi > b) {
            best = Some((phi, i));
        }
    }
    let (phi, i) = best.expect("full-dimensional point set");
    let w = sub3(pts[i], a);
    let mut n = unit3(cross3(u, sub3(w, scale3(u, dot3(w, u)))));
    let expected = add3(scale3(v, -phi.sin()), scale3(normal, -phi.cos()));
    if dot3(n, expected) < 0.0 {
        n = scale3(n, -1.0);
    }
    n
}

/// Facet of the plane `{p : n·p = n·a}` from its on-plane points; `None`
/// when those points are collinear (the plane only touches an edge).
fn facet_on_plane(pts: &[[f64; 3]], a: [f64; 3], n: [f64; 3], tol: f64) -> Result<Facet, (usize, usize)> {
    let offset = dot3(n, a);
    let on: Vec<usize> = (0..pts.len())
        .filter(|&i| (dot3(n, pts[i]) - offset).abs() <= tol)
        .collect();
    // In-plane basis e1 × e2 = n.
    let far = on
        .iter()
        .cloned()
        .max_by(|&i, &j| {
            let di = sub3(pts[i], a);
            let dj = sub3(pts[j], a);
            dot3(di, di).total_cmp(&dot3(dj, dj))
        })
        .expect("plane touches the set");
    let d = sub3(pts[far], a);
    let e1 = if dot3(d, d).sqrt() > tol {
        unit3(d)
    } else {
        unit3(cross3(n, if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] }))
    };
    let e2 = cross3(n, e1);
    let flat: Vec<[f64; 2]> = on
        .iter()
        .map(|&i| {
            let w = sub3(pts[i], a);
            [dot3(w, e1), dot3(w, e2)]
        })
        .collect();
    let ring = monotone_chain(&flat, tol);
    if ring.len() < 3 {
        let ends = (on[ring[0]], on[*ring.last().expect("nonempty")]);
        return Err(ends);
    }
    Ok(Facet {
        normal: n,
        offset,
        polygon: ring.into_iter().map(|k| on[k]).collect(),
    })
}

/// Gift wrapping over facets, starting from the lexicographically smallest
/// point; every edge of a found facet is rotated about once.
pub fn gift_wrap(pts: &[[f64; 3]], tol: f64) -> Vec<Facet> {
    let start = (0..pts.len())
        .min_by(|&i, &j| {
            pts[i][0]
                .total_cmp(&pts[j][0])
                .then(pts[i][1].total_cmp(&pts[j][1]))
                .then(pts[i][2].total_cmp(&pts[j][2]))
        })
        .expect("nonempty point set");
    let a = pts[start];
    // The plane x = min is supporting and, `a` being lexicographically
    // smallest, every other point of it lies on the +y side of the z-axis
    // through `a`. Rotating about that axis reaches a facet or an edge.
    let mut normal = [-1.0, 0.0, 0.0];
    let mut axis = [0.0, 0.0, 1.0];
    let mut first = None;
    for _ in 0..4 {
        normal = rotate_about(pts, a, axis, normal, tol);
        match facet_on_plane(pts, a, normal, tol) {
            Ok(f) => {
                first = Some(f);
                break;
            }
            Err((i, j)) => {
                // Only an edge; rotate about it instead.
                let e = sub3(pts[j], pts[i]);
                axis = if dot3(e, e).sqrt() > tol {
                    unit3(e)
                } else {
                    unit3(cross3(normal, axis))
                };
            }
        }
    }
    let first = first.expect("gift wrapping found no initial facet");

    let mut facets = vec![first];
    let mut seen_facets: HashSet<Vec<usize>> = HashSet::new();
    let key = |f: &Facet| {
        let mut k = f.polygon.clone();
        k.sort_unstable();
        k
    };
    seen_facets.insert(key(&facets[0]));
    let mut done_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(fi) = queue.pop_front() {
        let poly = facets[fi].polygon.clone();
        let normal = facets[fi].normal;
        for k in 0..poly.len() {
            let (i, j) = (poly[k], poly[(k + 1) % poly.len()]);
            if !done_edges.insert((i.min(j), i.max(j))) {
                continue;
            }
            let u = unit3(sub3(pts[j], pts[i]));
            let n = rotate_about(pts, pts[i], u, normal, tol);
            let Ok(f) = facet_on_plane(pts, pts[i], n, tol) else {
                continue;
            };
            if seen_facets.insert(key(&f)) {
                facets.push(f);
                queue.push_back(facets.len() - 1);
            }
        }
    }
    facets
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        for s in 0..8 {
            let c = |b: usize| if s >> b & 1 == 1 { 1.0 } else { -1.0 };
            out.push(DVector::from_vec(vec![c(0), c(1), c(2)]));
        }
        out.push(DVector::zeros(3));
        out.push(DVector::from_vec(vec![1.0, 0.0, 0.0]));
        out
    }

    #[test]
    fn cube_hull() {
        let h = Hull::build(&cube()).unwrap();
        assert_eq!(h.dim(), 3);
        assert_eq!(h.facets().len(), 6);
        assert_eq!(h.extreme_indices(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert!(h.contains(&DVector::from_vec(vec![0.5, -1.0, 0.999])));
        assert!(!h.contains(&DVector::from_vec(vec![0.5, -1.01, 0.0])));
    }

    #[test]
    fn square_and_segment() {
        let sq: Vec<DVector<f64>> = [[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [0.0, 1.0]]
            .iter()
            .map(|p| DVector::from_column_slice(p))
            .collect();
        let h = Hull::build(&sq).unwrap();
        assert_eq!(h.extreme_indices().len(), 4);
        let seg: Vec<DVector<f64>> = [[1.0, 2.0], [-1.0, -2.0], [0.5, 1.0]]
            .iter()
            .map(|p| DVector::from_column_slice(p))
            .collect();
        let h = Hull::build(&seg).unwrap();
        assert_eq!(h.dim(), 1);
        assert!(h.contains(&DVector::from_vec(vec![0.2, 0.4])));
        assert!(!h.contains(&DVector::from_vec(vec![0.2, 0.5])));
    }

    #[test]
    fn flat_set_in_space() {
        let pts: Vec<DVector<f64>> = [[1.0, 0.0, 1.0], [-1.0, 0.0, -1.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]
            .iter()
            .map(|p| DVector::from_column_slice(p))
            .collect();
        let h = Hull::build(&pts).unwrap();
        assert_eq!(h.dim(), 2);
        assert!(h.contains(&DVector::from_vec(vec![0.25, 0.25, 0.25])));
        assert!(!h.contains(&DVector::from_vec(vec![0.25, 0.25, 0.3])));
    }
}
