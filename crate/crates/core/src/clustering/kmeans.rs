//! K-means with k-means++ seeding, WCSS elbow selection, and text clustering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::par::{self, ExecMode};

use super::{term_frequency_label, Cluster, ClusterError, ClusterKind, ClusterSet, EmbedError, EmbeddingProvider};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the relative inertia decrease falls below this.
    pub tol: f64,
    /// Restarts; the lowest-inertia run wins.
    pub n_init: usize,
    pub kmax: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            seed: 7,
            max_iter: 100,
            tol: 1e-4,
            n_init: 4,
            kmax: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Within-cluster sum of squares of an assignment.
pub fn wcss(data: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    data.iter()
        .zip(assignments)
        .map(|(p, &c)| sq_dist(p, &centroids[c]))
        .sum()
}

fn plus_plus(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centroids = vec![data[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = data.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if *w > 0.0 && r < *w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|w| *w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.push(data[pick].clone());
        for (i, p) in data.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn lloyd(data: &[Vec<f64>], k: usize, params: &KMeansParams, seed: u64) -> KMeansResult {
    let dim = data[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(data, k, &mut rng);
    let mut assignments = vec![0; data.len()];
    let mut prev = f64::INFINITY;
    let mut inertia;
    let mut iterations = 0;
    loop {
        iterations += 1;
        inertia = 0.0;
        for (i, p) in data.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            assignments[i] = c;
            inertia += d;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in data.iter().zip(&assignments) {
            counts[c] += 1;
            sums[c].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // Re-seed an empty cluster at the point worst served by its centroid.
                let (far, d) = data
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, sq_dist(p, &centroids[assignments[i]])))
                    .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best });
                if d > 0.0 {
                    centroids[c] = data[far].clone();
                }
            }
        }
        let converged = inertia == 0.0 || (prev.is_finite() && (prev - inertia) <= params.tol * prev);
        prev = inertia;
        if converged || iterations >= params.max_iter.max(1) {
            break;
        }
    }
    // Final assignment against the final centroids.
    inertia = 0.0;
    for (i, p) in data.iter().enumerate() {
        let (c, d) = nearest(p, &centroids);
        assignments[i] = c;
        inertia += d;
    }
    KMeansResult {
        assignments,
        centroids,
        inertia,
        iterations,
    }
}

/// Runs `n_init` seeded restarts and keeps the lowest inertia (earliest on ties).
pub fn kmeans(data: &[Vec<f64>], k: usize, params: &KMeansParams, mode: ExecMode) -> KMeansResult {
    assert!(!data.is_empty() && k >= 1 && k <= data.len(), "k must be in 1..=n");
    let runs = par::map_range(mode, params.n_init.max(1), |r| {
        lloyd(
            data,
            k,
            params,
            params
                .seed
                .wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
                .wrapping_add(k as u64),
        )
    });
    runs.into_iter()
        .reduce(|best, r| if r.inertia < best.inertia { r } else { best })
        .expect("at least one run")
}

/// Elbow of a WCSS curve where `curve[i]` is WCSS at k = i + 1.
///
/// Picks the k maximizing WCSS(k−1) − 2·WCSS(k) + WCSS(k+1), preferring the
/// smaller k when second differences tie. With fewer than three points the
/// largest k is returned if WCSS decreased, else 1.
pub fn elbow_k(curve: &[f64]) -> usize {
    let m = curve.len();
    if m < 3 {
        return if m == 2 && curve[1] < curve[0] { 2 } else { 1 };
    }
    let second: Vec<f64> = (1..m - 1).map(|i| curve[i - 1] - 2.0 * curve[i] + curve[i + 1]).collect();
    let scale = second.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let mut best = 0;
    for (i, d) in second.iter().enumerate() {
        if *d > second[best] + 1e-9 * scale {
            best = i;
        }
    }
    best + 2
}

/// Chooses k by the WCSS elbow over k = 1..=min(kmax, n − 1).
pub fn select_k_wcss(
    data: &[Vec<f64>],
    kmax: usize,
    params: &KMeansParams,
    mode: ExecMode,
) -> Result<usize, ClusterError> {
    if data.len() < 3 {
        return Err(ClusterError::TooFewVectors(data.len()));
    }
    if kmax < 2 {
        return Err(ClusterError::KMaxTooSmall);
    }
    let kmm = kmax.min(data.len() - 1);
    let curve = par::map_range(mode, kmm, |i| kmeans(data, i + 1, params, ExecMode::Sequential).inertia);
    Ok(elbow_k(&curve))
}

/// Greedy nearest-neighbour ordering of centroids, starting from the one
/// farthest from their mean.
fn seriate(centroids: &[Vec<f64>]) -> Vec<usize> {
    let k = centroids.len();
    if k == 0 {
        return Vec::new();
    }
    let dim = centroids[0].len();
    let mean: Vec<f64> = (0..dim)
        .map(|d| centroids.iter().map(|c| c[d]).sum::<f64>() / k as f64)
        .collect();
    let mut start = 0;
    for i in 1..k {
        if sq_dist(&centroids[i], &mean) > sq_dist(&centroids[start], &mean) {
            start = i;
        }
    }
    let mut order = vec![start];
    let mut used = vec![false; k];
    used[start] = true;
    while order.len() < k {
        let last = &centroids[*order.last().expect("non-empty")];
        let next = (0..k)
            .filter(|&i| !used[i])
            .min_by(|&a, &b| sq_dist(&centroids[a], last).total_cmp(&sq_dist(&centroids[b], last)))
            .expect("unused centroid remains");
        used[next] = true;
        order.push(next);
    }
    order
}

/// Clusters `(node id, text)` pairs by embedding them and running K-means.
pub fn cluster_text(
    attribute: &str,
    texts: &[(String, String)],
    embedder: &dyn EmbeddingProvider,
    params: &KMeansParams,
    mode: ExecMode,
) -> Result<ClusterSet, ClusterError> {
    if texts.is_empty() {
        return Err(ClusterError::Empty);
    }
    let mut items: Vec<&(String, String)> = texts.iter().collect();
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let raw: Vec<String> = items.iter().map(|(_, t)| t.clone()).collect();
    let vectors = embedder.embed(&raw)?;
    if vectors.len() != raw.len() {
        return Err(EmbedError::CountMismatch {
            expected: raw.len(),
            got: vectors.len(),
        }
        .into());
    }
    let dim = embedder.dimension();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(EmbedError::DimensionMismatch {
            expected: dim,
            got: v.len(),
        }
        .into());
    }

    let all_identical = vectors.iter().all(|v| v == &vectors[0]);
    let k = if vectors.len() < 3 || all_identical {
        1
    } else {
        select_k_wcss(&vectors, params.kmax.max(2), params, mode)?
    };
    let result = kmeans(&vectors, k, params, mode);

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in result.assignments.iter().enumerate() {
        groups[c].push(i);
    }
    let live: Vec<usize> = (0..k).filter(|&c| !groups[c].is_empty()).collect();
    let centroids: Vec<Vec<f64>> = live.iter().map(|&c| result.centroids[c].clone()).collect();
    let clusters = seriate(&centroids)
        .into_iter()
        .map(|j| {
            let g = &groups[live[j]];
            let member_texts: Vec<&str> = g.iter().map(|&i| raw[i].as_str()).collect();
            Cluster {
                id: 0,
                members: g.iter().map(|&i| items[i].0.clone()).collect(),
                label: term_frequency_label(&member_texts),
                centroid: centroids[j].clone(),
            }
        })
        .collect();
    let mut set = ClusterSet {
        attribute: attribute.to_string(),
        kind: ClusterKind::Text,
        clusters,
    };
    set.renumber();
    Ok(set)
}
