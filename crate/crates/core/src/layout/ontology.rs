//! Global arrangement of node types.
//!
//! Types are embedded in the plane so that Euclidean distances approximate
//! `spacing × hop distance`, by weighted stress majorization (SMACOF) with
//! weights `1 / target²`. Two deterministic starts are tried — a circle and
//! classical MDS — and the lower-stress result is kept.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::graph::DistanceMatrix;

use super::Point;

const MAX_SWEEPS: usize = 200;
const REL_TOL: f64 = 1e-6;

/// Σ_{x<y} (‖p_x − p_y‖ − s·d_xy)² / (s·d_xy)², skipping zero targets.
pub fn normalized_stress(dm: &DistanceMatrix, points: &[Point], spacing: f64) -> f64 {
    let n = dm.len();
    let mut stress = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let target = spacing * dm.get(i, j);
            if target > 0.0 {
                let d = dist(points[i], points[j]);
                stress += (d - target) * (d - target) / (target * target);
            }
        }
    }
    stress
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn circle_start(n: usize, spacing: f64) -> Vec<Point> {
    let radius = spacing * (n as f64) / std::f64::consts::TAU;
    (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect()
}

/// Classical (Torgerson) MDS; eigenvector signs fixed so the largest
/// component is positive.
fn classical_mds(target: &DMatrix<f64>) -> Vec<Point> {
    let n = target.nrows();
    let sq = target.map(|d| d * d);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let total_mean = sq.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + total_mean));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut coords = vec![[0.0; 2]; n];
    for (axis, &e) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[e].max(0.0);
        let v = eig.eigenvectors.column(e);
        let pivot = (0..n)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[i][axis] = sign * v[i] * lambda.sqrt();
        }
    }
    coords
}

fn weighted_stress(target: &DMatrix<f64>, weights: &DMatrix<f64>, x: &[Point]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(x[i], x[j]) - target[(i, j)];
            s += weights[(i, j)] * d * d;
        }
    }
    s
}

/// SMACOF iterations (Guttman transform with the pseudo-inverse of V).
fn smacof(target: &DMatrix<f64>, weights: &DMatrix<f64>, v_pinv: &DMatrix<f64>, start: Vec<Point>) -> (Vec<Point>, f64) {
    let n = start.len();
    let mut x = start;
    let mut stress = weighted_stress(target, weights, &x);
    for _ in 0..MAX_SWEEPS {
        let mut b = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = dist(x[i], x[j]);
                    if d > 1e-12 {
                        b[(i, j)] = -weights[(i, j)] * target[(i, j)] / d;
                    }
                }
            }
            let row_sum: f64 = (0..n).filter(|&j| j != i).map(|j| b[(i, j)]).sum();
            b[(i, i)] = -row_sum;
        }
        let z = DMatrix::from_fn(n, 2, |i, c| x[i][c]);
        let next = v_pinv * (b * z);
        let candidate: Vec<Point> = (0..n).map(|i| [next[(i, 0)], next[(i, 1)]]).collect();
        let new_stress = weighted_stress(target, weights, &candidate);
        let change = (stress - new_stress).abs() / stress.max(f64::MIN_POSITIVE);
        x = candidate;
        stress = new_stress;
        if change < REL_TOL || stress == 0.0 {
            break;
        }
    }
    (x, stress)
}

/// Positions (aligned with `dm.order`) whose distances approximate
/// `spacing × d`. The result is centred on the origin.
pub fn arrange_ontology(dm: &DistanceMatrix, spacing: f64) -> Vec<Point> {
    let n = dm.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![[0.0, 0.0]],
        _ => {}
    }
    let target = DMatrix::from_fn(n, n, |i, j| spacing * dm.get(i, j));
    let weights = DMatrix::from_fn(n, n, |i, j| {
        let t = target[(i, j)];
        if i != j && t > 0.0 {
            1.0 / (t * t)
        } else {
            0.0
        }
    });
    let mut v = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                v[(i, j)] = -weights[(i, j)];
                v[(i, i)] += weights[(i, j)];
            }
        }
    }
    let v_pinv = v
        .pseudo_inverse(1e-12)
        .expect("pseudo-inverse of a symmetric matrix exists");

    let (a, sa) = smacof(&target, &weights, &v_pinv, circle_start(n, spacing));
    let (b, sb) = smacof(&target, &weights, &v_pinv, classical_mds(&target));
    let mut best = if sb < sa { b } else { a };

    let cx = best.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let cy = best.iter().map(|p| p[1]).sum::<f64>() / n as f64;
    for p in &mut best {
        p[0] -= cx;
        p[1] -= cy;
    }
    best
}
