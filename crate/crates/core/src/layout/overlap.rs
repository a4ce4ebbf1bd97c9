//! Pairwise push-apart of overlapping node discs.

use crate::par::{self, ExecMode};
use crate::text::fnv1a;

use super::{Disc, Point};

/// Extra gap required between two node discs.
pub const MARGIN: f64 = 2.0;
/// Iterations stop once no node moved more than this.
pub const SETTLE: f64 = 0.5;

fn seeded_unit(seed: u64, i: usize, j: usize) -> Point {
    let mut bytes = Vec::with_capacity(24);
    bytes.extend_from_slice(&seed.to_le_bytes());
    bytes.extend_from_slice(&(i as u64).to_le_bytes());
    bytes.extend_from_slice(&(j as u64).to_le_bytes());
    let a = (fnv1a(&bytes) as f64 / u64::MAX as f64) * std::f64::consts::TAU;
    [a.cos(), a.sin()]
}

/// Pushes apart every pair closer than `r_a + r_b + MARGIN`, each node moving
/// half the deficit. Coincident pairs separate along a seeded direction.
/// Nodes are clamped into `bounds` (when given) after each iteration.
/// Returns the maximum displacement of each iteration run.
pub fn resolve_overlaps(
    positions: &mut [Point],
    radii: &[f64],
    bounds: Option<&[Disc]>,
    seed: u64,
    max_iterations: usize,
    mode: ExecMode,
) -> Vec<f64> {
    let n = positions.len();
    let mut trace = Vec::new();
    for _ in 0..max_iterations {
        let snapshot: &[Point] = positions;
        let moved: Vec<Point> = par::map_range(mode, n, |i| {
            let p = snapshot[i];
            let mut push = [0.0, 0.0];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = snapshot[j];
                let need = radii[i] + radii[j] + MARGIN;
                let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                let d = (dx * dx + dy * dy).sqrt();
                if d >= need {
                    continue;
                }
                let dir = if d > 1e-12 {
                    [dx / d, dy / d]
                } else {
                    let u = seeded_unit(seed, i.min(j), i.max(j));
                    if i < j {
                        u
                    } else {
                        [-u[0], -u[1]]
                    }
                };
                let half = (need - d) / 2.0;
                push[0] += dir[0] * half;
                push[1] += dir[1] * half;
            }
            let next = [p[0] + push[0], p[1] + push[1]];
            match bounds {
                Some(b) => b[i].clamp(next),
                None => next,
            }
        });
        let mut max_disp: f64 = 0.0;
        for (p, m) in positions.iter_mut().zip(moved) {
            max_disp = max_disp.max(super::dist(*p, m));
            *p = m;
        }
        trace.push(max_disp);
        if max_disp < SETTLE {
            break;
        }
    }
    trace
}
