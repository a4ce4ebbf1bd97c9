//! Partition agreement, cluster quality and rank correlation.

use std::collections::BTreeMap;

pub type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Contingency table between two labelings, with row and column sums.
fn contingency(a: &[usize], b: &[usize]) -> (BTreeMap<(usize, usize), f64>, BTreeMap<usize, f64>, BTreeMap<usize, f64>) {
    assert_eq!(a.len(), b.len());
    let mut t = BTreeMap::new();
    let mut ra = BTreeMap::new();
    let mut cb = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *t.entry((x, y)).or_insert(0.0) += 1.0;
        *ra.entry(x).or_insert(0.0) += 1.0;
        *cb.entry(y).or_insert(0.0) += 1.0;
    }
    (t, ra, cb)
}

/// Adjusted Rand index (Hubert & Arabie). Identical single-cluster
/// labelings score 1.
pub fn ari(a: &[usize], b: &[usize]) -> f64 {
    let (t, ra, cb) = contingency(a, b);
    let pairs = |x: f64| x * (x - 1.0) / 2.0;
    let index: f64 = t.values().map(|&x| pairs(x)).sum();
    let sa: f64 = ra.values().map(|&x| pairs(x)).sum();
    let sb: f64 = cb.values().map(|&x| pairs(x)).sum();
    let expected = sa * sb / pairs(a.len() as f64);
    let max = 0.5 * (sa + sb);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

fn entropy(counts: &BTreeMap<usize, f64>, n: f64) -> f64 {
    counts.values().map(|&c| -(c / n) * (c / n).ln()).sum()
}

/// Normalized mutual information with arithmetic-mean normalization.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let (t, ra, cb) = contingency(a, b);
    let mi: f64 = t
        .iter()
        .map(|(&(x, y), &c)| (c / n) * ((c * n) / (ra[&x] * cb[&y])).ln())
        .sum();
    let (ha, hb) = (entropy(&ra, n), entropy(&cb, n));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    mi / (0.5 * (ha + hb))
}

/// Mean silhouette coefficient; points in singleton clusters score 0.
pub fn silhouette(points: &[Point], labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut total = 0.0;
    for i in 0..points.len() {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in 0..points.len() {
            if i != j {
                sums[labels[j]] += dist(points[i], points[j]);
                counts[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if b.is_finite() {
            total += (b - a) / a.max(b);
        }
    }
    total / points.len() as f64
}

/// Ranks with ties sharing their average rank (1-based).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Spearman's rho: Pearson correlation of the average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Σ_{i<j} (‖p_i − p_j‖ − s·d_ij)² / (s·d_ij)².
pub fn normalized_stress(points: &[Point], d: &[Vec<f64>], spacing: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let target = spacing * d[i][j];
            s += (dist(points[i], points[j]) - target).powi(2) / (target * target);
        }
    }
    s
}

/// Shannon entropy (nats) of counts.
pub fn entropy_of_counts(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ari_known_values() {
        assert_eq!(ari(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        // sklearn: adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714
        assert!((ari(&[0, 0, 1, 1], &[0, 0, 1, 2]) - 0.571_428_571_428_571_4).abs() < 1e-12);
        assert!(ari(&[0, 1, 0, 1], &[0, 0, 1, 1]) < 0.0);
    }

    #[test]
    fn nmi_known_values() {
        assert!((nmi(&[0, 0, 1, 1], &[5, 5, 3, 3]) - 1.0).abs() < 1e-12);
        // sklearn: normalized_mutual_info_score([0,0,1,1],[0,0,1,2]) = 0.8
        assert!((nmi(&[0, 0, 1, 1], &[0, 0, 1, 2]) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn silhouette_of_two_tight_groups() {
        let p = [[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]];
        let s = silhouette(&p, &[0, 0, 1, 1]);
        let b = (10.0 + 101f64.sqrt()) / 2.0;
        assert!((s - (b - 1.0) / b).abs() < 1e-12);
    }

    #[test]
    fn spearman_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stress_of_exact_embedding_is_zero() {
        let p = [[0.0, 0.0], [300.0, 0.0], [600.0, 0.0]];
        let d = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        assert!(normalized_stress(&p, &d, 300.0) < 1e-24);
    }
}

/// Hamilton apportionment of `seats` proportional to `sizes`: floor of the
/// exact quota, then one extra seat for the largest fractional parts
/// (ties to the lower index). Exact integer arithmetic.
pub fn hamilton(seats: usize, sizes: &[usize]) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    // quota_i = seats·size_i / total = floor_i + frac_i / total
    let parts: Vec<(usize, usize)> = sizes.iter().map(|&s| ((seats * s) / total, (seats * s) % total)).collect();
    let mut out: Vec<usize> = parts.iter().map(|p| p.0).collect();
    let mut left = seats - out.iter().sum::<usize>();
    let mut taken = vec![false; sizes.len()];
    while left > 0 {
        let mut best: Option<usize> = None;
        for i in 0..sizes.len() {
            if taken[i] {
                continue;
            }
            if best.is_none_or(|b| parts[i].1 > parts[b].1) {
                best = Some(i);
            }
        }
        let b = best.expect("fewer extra seats than parties");
        taken[b] = true;
        out[b] += 1;
        left -= 1;
    }
    out
}

#[cfg(test)]
mod hamilton_tests {
    use super::hamilton;

    #[test]
    fn classic_cases() {
        assert_eq!(hamilton(6, &[10, 20, 30]), vec![1, 2, 3]);
        assert_eq!(hamilton(10, &[1, 1, 1]), vec![4, 3, 3]);
        assert_eq!(hamilton(4, &[5, 3, 2]), vec![2, 1, 1]);
        assert_eq!(hamilton(0, &[5, 3]), vec![0, 0]);
    }
}
