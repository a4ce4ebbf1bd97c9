//! Reference clusterings of 2-D points.

use crate::metrics::Point;
use crate::rng::Lcg;

fn d2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Lloyd's algorithm from `restarts` k-means++ seedings; the partition with
/// the lowest within-cluster sum of squares wins.
pub fn kmeans(points: &[Point], k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1 && k <= points.len());
    let mut rng = Lcg::new(seed);
    let mut best: (f64, Vec<usize>) = (f64::INFINITY, Vec::new());
    for _ in 0..restarts.max(1) {
        let mut centers = vec![points[rng.below(points.len())]];
        while centers.len() < k {
            let w: Vec<f64> = points
                .iter()
                .map(|&p| centers.iter().map(|&c| d2(p, c)).fold(f64::INFINITY, f64::min))
                .collect();
            let total: f64 = w.iter().sum();
            let mut pick = rng.unit() * total;
            let mut idx = points.len() - 1;
            for (i, &x) in w.iter().enumerate() {
                if pick < x {
                    idx = i;
                    break;
                }
                pick -= x;
            }
            centers.push(points[idx]);
        }
        let mut labels = vec![usize::MAX; points.len()];
        for _ in 0..300 {
            let next: Vec<usize> = points
                .iter()
                .map(|&p| {
                    (0..k)
                        .min_by(|&a, &b| d2(p, centers[a]).total_cmp(&d2(p, centers[b])))
                        .expect("k >= 1")
                })
                .collect();
            if next == labels {
                break;
            }
            labels = next;
            for (c, center) in centers.iter_mut().enumerate() {
                let members: Vec<Point> = points.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(p, _)| *p).collect();
                if !members.is_empty() {
                    let n = members.len() as f64;
                    *center = [
                        members.iter().map(|p| p[0]).sum::<f64>() / n,
                        members.iter().map(|p| p[1]).sum::<f64>() / n,
                    ];
                }
            }
        }
        let sse: f64 = points.iter().zip(&labels).map(|(&p, &l)| d2(p, centers[l])).sum();
        if sse < best.0 {
            best = (sse, labels);
        }
    }
    best.1
}

/// Agglomerative clustering with average linkage (UPGMA), cut at `k`
/// clusters.
pub fn average_linkage(points: &[Point], k: usize) -> Vec<usize> {
    let n = points.len();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    // dist[i][j] between current clusters i and j (average pairwise)
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| d2(points[i], points[j]).sqrt()).collect())
        .collect();
    let mut alive: Vec<bool> = vec![true; n];
    let mut count = n;
    while count > k {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for j in i + 1..n {
                if alive[j] && dist[i][j] < best.0 {
                    best = (dist[i][j], i, j);
                }
            }
        }
        let (_, a, b) = best;
        let (na, nb) = (members[a].len() as f64, members[b].len() as f64);
        for c in 0..n {
            if alive[c] && c != a && c != b {
                let merged = (na * dist[a][c] + nb * dist[b][c]) / (na + nb);
                dist[a][c] = merged;
                dist[c][a] = merged;
            }
        }
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        alive[b] = false;
        count -= 1;
    }
    let mut labels = vec![0; n];
    for (c, m) in members.iter().filter(|m| !m.is_empty()).enumerate() {
        for &i in m {
            labels[i] = c;
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ari;

    fn blobs() -> (Vec<Point>, Vec<usize>) {
        let mut rng = Lcg::new(4);
        let centers = [[0.0, 0.0], [50.0, 0.0], [0.0, 50.0]];
        let mut p = Vec::new();
        let mut t = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..15 {
                p.push([center[0] + rng.unit() * 4.0, center[1] + rng.unit() * 4.0]);
                t.push(c);
            }
        }
        (p, t)
    }

    #[test]
    fn kmeans_recovers_separated_blobs() {
        let (p, t) = blobs();
        assert_eq!(ari(&t, &kmeans(&p, 3, 10, 1)), 1.0);
    }

    #[test]
    fn average_linkage_recovers_separated_blobs() {
        let (p, t) = blobs();
        assert_eq!(ari(&t, &average_linkage(&p, 3)), 1.0);
    }

    #[test]
    fn average_linkage_merges_by_mean_distance() {
        // 0,1 at distance 1; 2 at 3 from 1 and 4 from 0; 3 far away
        let p = [[0.0, 0.0], [1.0, 0.0], [4.0, 0.0], [100.0, 0.0]];
        assert_eq!(average_linkage(&p, 3), vec![0, 0, 1, 2]);
        assert_eq!(average_linkage(&p, 2), vec![0, 0, 0, 1]);
    }
}
