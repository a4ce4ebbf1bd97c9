//! Cluster outlines.

use std::f64::consts::TAU;

use super::Point;

/// Gap between the outermost member disc and the outline.
pub const HULL_PADDING: f64 = 8.0;
const ROUND_SEGMENTS: usize = 16;

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain. Counter-clockwise, collinear points dropped,
/// first vertex not repeated.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Outline of a cluster: the convex hull of 16-gons of radius
/// `max(radii) + 8` around every member centre. One member gives the
/// 16-gon itself, two give a capsule.
pub fn compute_hull(centers: &[Point], radii: &[f64]) -> Vec<Point> {
    let offset = radii.iter().copied().fold(0.0, f64::max) + HULL_PADDING;
    let mut ring = Vec::with_capacity(centers.len() * ROUND_SEGMENTS);
    for c in centers {
        for s in 0..ROUND_SEGMENTS {
            let a = TAU * s as f64 / ROUND_SEGMENTS as f64;
            ring.push([c[0] + offset * a.cos(), c[1] + offset * a.sin()]);
        }
    }
    convex_hull(&ring)
}

/// Strict containment in a counter-clockwise convex polygon.
pub fn point_in_convex(p: Point, polygon: &[Point]) -> bool {
    if polygon.len() < 3 {
        return false;
    }
    (0..polygon.len()).all(|i| cross(polygon[i], polygon[(i + 1) % polygon.len()], p) > 0.0)
}

/// Whether the polygon is convex and counter-clockwise.
pub fn is_convex(polygon: &[Point]) -> bool {
    let n = polygon.len();
    n >= 3 && (0..n).all(|i| cross(polygon[i], polygon[(i + 1) % n], polygon[(i + 2) % n]) > 0.0)
}
