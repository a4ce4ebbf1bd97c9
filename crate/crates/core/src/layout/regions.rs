//! Type regions, cluster arcs and radial offsets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{dist, Point};

/// Disc reserved for one node type. Serialized as `{type, cx, cy, r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeRegion {
    #[serde(rename = "type")]
    pub node_type: String,
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl TypeRegion {
    pub fn center(&self) -> Point {
        [self.cx, self.cy]
    }

    pub fn contains(&self, p: Point) -> bool {
        dist(p, self.center()) < self.r
    }
}

/// Regions around type positions.
///
/// Radius grows with the square root of the type's node count, scaled so the
/// largest type gets 0.4 × the smallest centre distance; any two regions are
/// therefore disjoint. A lone type gets a radius of `spacing`.
pub fn partition_regions(types: &[(String, Point, usize)], spacing: f64) -> Vec<TypeRegion> {
    if types.len() == 1 {
        let (t, p, _) = &types[0];
        return vec![TypeRegion {
            node_type: t.clone(),
            cx: p[0],
            cy: p[1],
            r: spacing,
        }];
    }
    let mut min_dist = f64::INFINITY;
    for i in 0..types.len() {
        for j in i + 1..types.len() {
            min_dist = min_dist.min(dist(types[i].1, types[j].1));
        }
    }
    let min_dist = min_dist.max(1e-6);
    let largest = types.iter().map(|(_, _, c)| (*c).max(1)).max().unwrap_or(1) as f64;
    let base = 0.4 * min_dist / largest.sqrt();
    types
        .iter()
        .map(|(t, p, c)| TypeRegion {
            node_type: t.clone(),
            cx: p[0],
            cy: p[1],
            r: (0.4 * min_dist).min(base * ((*c).max(1) as f64).sqrt()),
        })
        .collect()
}

/// Cluster centroids along a half-circle of radius 0.7ρ, in cluster order.
///
/// `facing` is the direction (radians) of the nearest connected region; the
/// arc runs from `facing + 90°` to `facing + 270°`, so its opening faces it.
/// A single cluster sits at the region centre.
pub fn place_cluster_centroids(k: usize, region: &TypeRegion, facing: f64) -> Vec<Point> {
    match k {
        0 => Vec::new(),
        1 => vec![region.center()],
        _ => (0..k)
            .map(|i| {
                let a = arc_angle(i, k, facing);
                [region.cx + 0.7 * region.r * a.cos(), region.cy + 0.7 * region.r * a.sin()]
            })
            .collect(),
    }
}

pub(crate) fn arc_angle(i: usize, k: usize, facing: f64) -> f64 {
    facing + PI / 2.0 + PI * i as f64 / (k - 1) as f64
}

/// Radius of the disc each cluster may occupy.
pub fn slot_radius(k: usize, region_radius: f64) -> f64 {
    if k <= 1 {
        return 0.85 * region_radius;
    }
    let step = PI / (k - 1) as f64;
    let chord = 2.0 * 0.7 * region_radius * (step / 2.0).sin();
    (0.95 * chord / 2.0).min(0.3 * region_radius)
}

/// Linear interpolation of a node's distance from its cluster centroid by
/// its share of connected nodes: `r_min + (c_i / c_max)(r_max − r_min)`.
/// With `c_max = 0` the result is `r_min`.
pub fn radial_radius(c_i: f64, c_max: f64, r_min: f64, r_max: f64) -> f64 {
    if c_max == 0.0 {
        return r_min;
    }
    r_min + (c_i / c_max) * (r_max - r_min)
}
