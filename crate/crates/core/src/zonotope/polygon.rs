//! Planar zonotope polygons and their CSV/SVG export.

use std::fmt::Write;

use crate::{Error, Result};

use super::planar_groups;

/// Convex polygon with vertices in counterclockwise order, closing vertex
/// not repeated. A `degenerate` polygon is a point or a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
    pub degenerate: bool,
}

impl Polygon {
    /// Builds the zonotope polygon of planar generators by angular sort.
    pub(crate) fn from_planar_generators(gens: &[[f64; 2]]) -> Self {
        let groups = planar_groups(gens, 0.0);
        match groups.len() {
            0 => Self {
                vertices: vec![[0.0, 0.0]],
                degenerate: true,
            },
            1 => {
                let w = groups[0].direction;
                Self {
                    vertices: vec![[-w[0], -w[1]], w],
                    degenerate: true,
                }
            }
            p => {
                let mut cur = groups.iter().fold([0.0, 0.0], |acc, g| {
                    [acc[0] - g.direction[0], acc[1] - g.direction[1]]
                });
                let mut vertices = Vec::with_capacity(2 * p);
                for side in [2.0, -2.0] {
                    for g in &groups {
                        vertices.push(cur);
                        cur = [cur[0] + side * g.direction[0], cur[1] + side * g.direction[1]];
                    }
                }
                Self {
                    vertices,
                    degenerate: false,
                }
            }
        }
    }

    /// `x,y` header then one vertex per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for v in &self.vertices {
            writeln!(out, "{},{}", v[0], v[1]).expect("write to string");
        }
        out
    }

    fn svg_path(&self) -> String {
        let mut d = String::new();
        for (k, v) in self.vertices.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            write!(d, "{cmd}{} {} ", v[0], -v[1]).expect("write to string");
        }
        if !self.degenerate {
            d.push('Z');
        }
        d.trim_end().to_string()
    }
}

/// Shoelace area of a convex counterclockwise polygon; zero for degenerate
/// inputs.
pub fn polygon_area(poly: &Polygon) -> Result<f64> {
    let v = &poly.vertices;
    if v.len() < 3 {
        return Ok(0.0);
    }
    let scale = v
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(1.0, f64::max);
    let k = v.len();
    let mut twice = 0.0;
    for i in 0..k {
        let (a, b, c) = (v[i], v[(i + 1) % k], v[(i + 2) % k]);
        let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if turn < -1e-12 * scale * scale {
            return Err(Error::NotConvex);
        }
        twice += a[0] * b[1] - b[0] * a[1];
    }
    if twice < 0.0 {
        return Err(Error::NotConvex);
    }
    Ok(0.5 * twice)
}

/// One `<path>` per polygon (y up), with a viewBox covering all of them plus
/// a 5% margin.
pub fn svg_document(polygons: &[Polygon]) -> String {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in polygons.iter().flat_map(|p| &p.vertices) {
        xmin = xmin.min(v[0]);
        xmax = xmax.max(v[0]);
        ymin = ymin.min(-v[1]);
        ymax = ymax.max(-v[1]);
    }
    if xmin > xmax {
        (xmin, xmax, ymin, ymax) = (-1.0, 1.0, -1.0, 1.0);
    }
    let w = (xmax - xmin).max(1e-12);
    let h = (ymax - ymin).max(1e-12);
    let (mx, my) = (0.05 * w, 0.05 * h);
    let stroke = 0.003 * w.max(h);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        xmin - mx,
        ymin - my,
        w + 2.0 * mx,
        h + 2.0 * my
    )
    .expect("write to string");
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    for (k, p) in polygons.iter().enumerate() {
        writeln!(
            out,
            r#"  <path d="{}" fill="none" stroke="{}" stroke-width="{stroke}"/>"#,
            p.svg_path(),
            COLORS[k % COLORS.len()]
        )
        .expect("write to string");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_area_and_exports() {
        let p = Polygon::from_planar_generators(&[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(polygon_area(&p).unwrap(), 4.0);
        let csv = p.to_csv();
        assert!(csv.starts_with("x,y\n"));
        assert_eq!(csv.lines().count(), 5);
        let svg = svg_document(&[p]);
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains(r#"viewBox="-1.1 -1.1 2.2 2.2""#));
    }

    #[test]
    fn segment_is_degenerate() {
        let p = Polygon::from_planar_generators(&[[1.0, 2.0]]);
        assert!(p.degenerate);
        assert_eq!(p.vertices.len(), 2);
        assert_eq!(polygon_area(&p).unwrap(), 0.0);
    }

    #[test]
    fn clockwise_is_rejected() {
        let p = Polygon {
            vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]],
            degenerate: false,
        };
        assert_eq!(polygon_area(&p), Err(Error::NotConvex));
    }
}
