//! Anchored Fruchterman–Reingold refinement.
//!
//! Nodes repel each other with `k²/d`, and are attracted with `d²/k` only to
//! fixed anchor points (cluster centroids for interest nodes, mirrored
//! interest positions for connected nodes). Each step moves a node along its
//! net force by at most the current temperature, then clamps it into its
//! disc; the temperature decays geometrically.
//!
//! All nodes are updated simultaneously from the previous positions and each
//! node sums its forces in index order, so the parallel and sequential paths
//! are bit-identical.

use serde::{Deserialize, Serialize};

use crate::par::{self, ExecMode};

use super::{Disc, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    /// Initial temperature (maximum displacement in the first step).
    pub t0: f64,
    pub decay: f64,
    pub main_iterations: usize,
    pub connected_iterations: usize,
    pub connected_t_scale: f64,
    pub overlap_iterations_max: usize,
}

impl AnnealSchedule {
    /// Schedule for a region of the given radius: `t0 = (2ρ)² / 8`.
    pub fn for_radius(radius: f64) -> Self {
        AnnealSchedule {
            t0: (2.0 * radius).powi(2) / 8.0,
            decay: 0.94,
            main_iterations: 100,
            connected_iterations: 80,
            connected_t_scale: 0.2,
            overlap_iterations_max: 10,
        }
    }
}

/// One simulated body.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub pos: Point,
    pub anchors: Vec<Point>,
    /// Ideal distance constant for this body.
    pub k: f64,
    /// Disc the body is clamped into after every step.
    pub bound: Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub cap: f64,
    pub max_displacement: f64,
}

/// Deterministic direction for two coincident bodies.
fn split_direction(i: usize, j: usize) -> Point {
    let a = 2.399_963_229_728_653 * (i as f64 + 1.0) + 0.618_033_988_749_895 * (j as f64 + 1.0);
    [a.cos(), a.sin()]
}

fn net_force(bodies: &[Body], i: usize) -> Point {
    let bi = &bodies[i];
    let k2 = bi.k * bi.k;
    let mut f = [0.0, 0.0];
    for (j, bj) in bodies.iter().enumerate() {
        if j == i {
            continue;
        }
        let dx = bi.pos[0] - bj.pos[0];
        let dy = bi.pos[1] - bj.pos[1];
        let d2 = dx * dx + dy * dy;
        if d2 > 1e-18 {
            // (dx, dy)/d · k²/d
            f[0] += dx * k2 / d2;
            f[1] += dy * k2 / d2;
        } else {
            let u = split_direction(i.min(j), i.max(j));
            let s = if i < j { -1.0 } else { 1.0 };
            f[0] += s * u[0] * k2 / 1e-3;
            f[1] += s * u[1] * k2 / 1e-3;
        }
    }
    for a in &bi.anchors {
        // (a − p)/d · d²/k = (a − p)·d/k
        let dx = a[0] - bi.pos[0];
        let dy = a[1] - bi.pos[1];
        let d = (dx * dx + dy * dy).sqrt();
        f[0] += dx * d / bi.k;
        f[1] += dy * d / bi.k;
    }
    f
}

/// Runs `iterations` steps starting at temperature `t0`.
pub fn anneal(bodies: &mut [Body], t0: f64, decay: f64, iterations: usize, mode: ExecMode) -> Vec<StepRecord> {
    let mut trace = Vec::with_capacity(iterations);
    let mut t = t0;
    for _ in 0..iterations {
        let snapshot: &[Body] = bodies;
        let moved: Vec<Point> = par::map_range(mode, snapshot.len(), |i| {
            let f = net_force(snapshot, i);
            let len = (f[0] * f[0] + f[1] * f[1]).sqrt();
            let p = snapshot[i].pos;
            let next = if len > 0.0 {
                let step = len.min(t) / len;
                [p[0] + f[0] * step, p[1] + f[1] * step]
            } else {
                p
            };
            snapshot[i].bound.clamp(next)
        });
        let mut max_disp: f64 = 0.0;
        for (b, p) in bodies.iter_mut().zip(moved) {
            max_disp = max_disp.max(super::dist(b.pos, p));
            b.pos = p;
        }
        trace.push(StepRecord {
            cap: t,
            max_displacement: max_disp,
        });
        t *= decay;
    }
    trace
}
