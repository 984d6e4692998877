//! Planar predicates used by crossing conventions and region tests.
//!
//! All predicates are closed and use an absolute tolerance of [`EPS`]:
//! a segment that touches a side within `EPS` counts as intersecting it.

use crate::lattice::Point;

pub const EPS: f64 = 1e-9;

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn sign(v: f64) -> i32 {
    if v > EPS {
        1
    } else if v < -EPS {
        -1
    } else {
        0
    }
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) - EPS && p.x <= a.x.max(b.x) + EPS && p.y >= a.y.min(b.y) - EPS && p.y <= a.y.max(b.y) + EPS
}

/// Whether closed segments `[a, b]` and `[c, d]` intersect.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = sign(orient(c, d, a));
    let d2 = sign(orient(c, d, b));
    let d3 = sign(orient(a, b, c));
    let d4 = sign(orient(a, b, d));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(c, d, a))
        || (d2 == 0 && on_segment(c, d, b))
        || (d3 == 0 && on_segment(a, b, c))
        || (d4 == 0 && on_segment(a, b, d))
}

/// Whether segment `[a, b]` meets the circular arc
/// `{center + radius·e^{iφ} : |φ − theta| ≤ half_angle}`.
pub fn segment_hits_arc(a: Point, b: Point, center: Point, radius: f64, theta: f64, half_angle: f64) -> bool {
    let d = b - a;
    let f = a - center;
    let qa = d.norm2();
    let qb = 2.0 * f.dot(d);
    let qc = f.norm2() - radius * radius;
    let disc = qb * qb - 4.0 * qa * qc;
    // tolerance in radius units, scaled for the quadratic
    let tol = 4.0 * qa * 2.0 * radius * EPS;
    if disc < -tol || qa == 0.0 {
        return false;
    }
    let s = disc.max(0.0).sqrt();
    let axis = Point::polar(1.0, theta);
    let cos_half = half_angle.cos();
    for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
        if !(-EPS..=1.0 + EPS).contains(&t) {
            continue;
        }
        let q = a + d * t.clamp(0.0, 1.0) - center;
        let n = q.norm();
        if n == 0.0 {
            continue;
        }
        if q.dot(axis) / n >= cos_half - EPS {
            return true;
        }
    }
    false
}

fn project(poly: &[Point], axis: Point) -> (f64, f64) {
    poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let v = p.dot(axis);
        (lo.min(v), hi.max(v))
    })
}

fn edge_normals(poly: &[Point]) -> impl Iterator<Item = Point> + '_ {
    (0..poly.len()).filter_map(move |i| {
        let e = poly[(i + 1) % poly.len()] - poly[i];
        let n = e.norm();
        (n > EPS).then(|| Point::new(-e.y / n, e.x / n))
    })
}

/// Whether the interior of convex polygon `open` meets the closed convex
/// polygon `closed` (separating-axis test; `open` must have nonempty interior).
pub fn convex_overlap_open_closed(open: &[Point], closed: &[Point]) -> bool {
    edge_normals(open).chain(edge_normals(closed)).all(|axis| {
        let (a0, a1) = project(open, axis);
        let (b0, b1) = project(closed, axis);
        a0 < b1 - EPS && b0 < a1 - EPS
    })
}

/// Whether two closed convex polygons intersect.
pub fn convex_overlap_closed(p: &[Point], q: &[Point]) -> bool {
    edge_normals(p).chain(edge_normals(q)).all(|axis| {
        let (a0, a1) = project(p, axis);
        let (b0, b1) = project(q, axis);
        a0 <= b1 + EPS && b0 <= a1 + EPS
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn crossing_and_touching_segments() {
        assert!(segments_intersect(p(0.0, 0.0), p(2.0, 2.0), p(0.0, 2.0), p(2.0, 0.0)));
        assert!(segments_intersect(p(0.0, 0.0), p(1.0, 0.0), p(1.0, -1.0), p(1.0, 1.0)));
        assert!(!segments_intersect(p(0.0, 0.0), p(0.9, 0.0), p(1.0, -1.0), p(1.0, 1.0)));
        // collinear overlap
        assert!(segments_intersect(p(0.0, 0.0), p(2.0, 0.0), p(1.0, 0.0), p(3.0, 0.0)));
        assert!(!segments_intersect(p(0.0, 0.0), p(1.0, 0.0), p(1.5, 0.0), p(3.0, 0.0)));
    }

    #[test]
    fn arc_hits_respect_angular_range() {
        let c = Point::ORIGIN;
        assert!(segment_hits_arc(p(0.5, 0.0), p(1.5, 0.0), c, 1.0, 0.0, PI / 4.0));
        assert!(!segment_hits_arc(p(-0.5, 0.0), p(-1.5, 0.0), c, 1.0, 0.0, PI / 4.0));
        assert!(!segment_hits_arc(p(0.2, 0.0), p(0.5, 0.0), c, 1.0, 0.0, PI / 4.0));
        // endpoint exactly on the arc
        assert!(segment_hits_arc(p(1.0, 0.0), p(2.0, 0.0), c, 1.0, 0.0, PI / 4.0));
        // 45° boundary ray is included
        let q = Point::polar(1.0, PI / 4.0);
        assert!(segment_hits_arc(q * 0.5, q * 1.5, c, 1.0, 0.0, PI / 4.0));
    }

    #[test]
    fn open_closed_overlap_excludes_edge_contact() {
        let sq = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        let right = [p(1.0, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(1.0, 1.0)];
        assert!(!convex_overlap_open_closed(&sq, &right));
        assert!(convex_overlap_closed(&sq, &right));
        let shifted = [p(0.9, 0.0), p(2.0, 0.0), p(2.0, 1.0), p(0.9, 1.0)];
        assert!(convex_overlap_open_closed(&sq, &shifted));
    }
}
