//! Diversity-controlled sampling of interest nodes.
//!
//! Answer nodes are always taken first. The rest of the budget is spread
//! over clusters along a path between two allocations:
//!
//! * `t = 0`: everything to the preferred cluster (spilling over to other
//!   clusters in proportion to size once it is exhausted);
//! * `t = 1`: largest-remainder allocation proportional to cluster size.
//!
//! For `t` in between, the weight of cluster `c` is `(1 − t)·[c = preferred]
//! + t·|c|/N`. The diversity parameter σ does not map to `t` linearly:
//! rounding and capacity caps can make the quota entropy dip along the path,
//! so σ instead selects the smallest `t` whose quota entropy reaches
//! `σ · H(t = 1)`, among the `t` that do not exceed `H(t = 1)`. This keeps
//! entropy non-decreasing in σ, makes σ = 0 the concentrated allocation and
//! σ = 1 the exactly proportional one.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterKind, ClusterSet};
use crate::preference::UserPreference;
use crate::text::{parse_number, values_equal};

/// Resolution of the interpolation path.
const GRID: u128 = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub budget: usize,
    pub sigma: f64,
    pub preferred_cluster: usize,
    /// Nodes taken per cluster, answers included.
    pub quotas: Vec<usize>,
    pub seed: u64,
    /// Set when the budget was smaller than the number of answer nodes.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub ids: Vec<String>,
    pub plan: SamplePlan,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("diversity {0} outside [0, 1]")]
    SigmaOutOfRange(f64),
    #[error("cannot sample from an empty cluster set")]
    EmptySet,
}

/// Shannon entropy (nats) of a count vector.
pub fn quota_entropy(quotas: &[usize]) -> f64 {
    let total: usize = quotas.iter().sum();
    if total == 0 {
        return 0.0;
    }
    quotas
        .iter()
        .filter(|&&q| q > 0)
        .map(|&q| {
            let p = q as f64 / total as f64;
            -p * p.ln()
        })
        .sum()
}

/// Largest-remainder apportionment of `seats` by integer `weights`, ties
/// going to the earlier index.
pub fn largest_remainder(seats: usize, weights: &[u128]) -> Vec<usize> {
    let total: u128 = weights.iter().sum();
    if total == 0 {
        return vec![0; weights.len()];
    }
    let seats = seats as u128;
    let mut out: Vec<usize> = weights.iter().map(|w| (seats * w / total) as usize).collect();
    let given: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (seats * weights[b] % total).cmp(&(seats * weights[a] % total)).then(a.cmp(&b)));
    for &i in order.iter().take(seats as usize - given) {
        out[i] += 1;
    }
    out
}

/// Proportional allocation of `seats` with per-cluster capacity caps:
/// clusters whose share exceeds capacity are filled and the rest is
/// re-apportioned. Seats left once every positively weighted cluster is
/// full go to the zero-weight clusters in proportion to `fallback`.
fn capped_allocation(seats: usize, weights: &[u128], caps: &[usize], fallback: &[u128]) -> Vec<usize> {
    let n = weights.len();
    let mut out = vec![0usize; n];
    let mut remaining = seats;
    for stage in 0..2 {
        let w: Vec<u128> = (0..n)
            .map(|i| match stage {
                0 => weights[i],
                _ if weights[i] == 0 => fallback[i],
                _ => 0,
            })
            .collect();
        let mut active: Vec<usize> = (0..n).filter(|&i| w[i] > 0 && caps[i] > out[i]).collect();
        // Saturate clusters whose proportional share reaches their capacity,
        // smallest capacity/weight ratio first.
        active.sort_by(|&a, &b| {
            let (ca, cb) = ((caps[a] - out[a]) as u128, (caps[b] - out[b]) as u128);
            (ca * w[b]).cmp(&(cb * w[a])).then(a.cmp(&b))
        });
        let mut start = 0;
        while start < active.len() && remaining > 0 {
            let total: u128 = active[start..].iter().map(|&i| w[i]).sum();
            let i = active[start];
            let cap = (caps[i] - out[i]) as u128;
            if cap * total <= remaining as u128 * w[i] {
                out[i] += cap as usize;
                remaining -= cap as usize;
                start += 1;
            } else {
                break;
            }
        }
        if remaining > 0 && start < active.len() {
            let mut rest: Vec<usize> = active[start..].to_vec();
            rest.sort_unstable();
            let share = largest_remainder(remaining, &rest.iter().map(|&i| w[i]).collect::<Vec<_>>());
            for (k, &i) in rest.iter().enumerate() {
                out[i] += share[k];
            }
            remaining = 0;
        }
        if remaining == 0 {
            break;
        }
    }
    out
}

/// Preferred cluster: the one holding the most answer nodes; without
/// answers, the cluster whose label equals the preferred value, or for
/// numeric clusters the one whose mean is closest; else the first.
pub fn preferred_cluster(set: &ClusterSet, answers: &BTreeSet<String>, pref: &UserPreference) -> usize {
    let counts: Vec<usize> = set
        .clusters
        .iter()
        .map(|c| c.members.iter().filter(|m| answers.contains(*m)).count())
        .collect();
    if let Some(best) = (0..counts.len()).max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a))) {
        if counts[best] > 0 {
            return best;
        }
    }
    if let Some(i) = set.clusters.iter().position(|c| values_equal(&c.label, &pref.attribute_value)) {
        return i;
    }
    if set.kind == ClusterKind::Numeric {
        if let Some(v) = parse_number(&pref.attribute_value) {
            let dist = |i: usize| set.clusters[i].centroid.first().map_or(f64::INFINITY, |m| (m - v).abs());
            if let Some(i) = (0..set.len()).min_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b))) {
                return i;
            }
        }
    }
    0
}

fn by_degree<'a>(ids: impl Iterator<Item = &'a String>, degree: &HashMap<String, usize>) -> Vec<&'a String> {
    let mut v: Vec<&String> = ids.collect();
    v.sort_by(|a, b| {
        let (da, db) = (degree.get(*a).copied().unwrap_or(0), degree.get(*b).copied().unwrap_or(0));
        db.cmp(&da).then_with(|| a.cmp(b))
    });
    v
}

/// Samples at most `budget` interest nodes (more only when the answers alone exceed it).
///
/// Within a cluster, nodes are taken by descending `degree`, ties by id.
/// The output lists answers first, then the other picks cluster by cluster.
pub fn sample_interest_nodes(
    set: &ClusterSet,
    pref: &UserPreference,
    answers: &BTreeSet<String>,
    degree: &HashMap<String, usize>,
    budget: usize,
    sigma: f64,
    seed: u64,
) -> Result<Sample, SamplingError> {
    if budget == 0 {
        return Err(SamplingError::ZeroBudget);
    }
    if !(0.0..=1.0).contains(&sigma) {
        return Err(SamplingError::SigmaOutOfRange(sigma));
    }
    if set.is_empty() {
        return Err(SamplingError::EmptySet);
    }
    let preferred = preferred_cluster(set, answers, pref);
    let sizes: Vec<usize> = set.clusters.iter().map(|c| c.members.len()).collect();
    let n: usize = sizes.iter().sum();
    let answers_in: Vec<usize> = set
        .clusters
        .iter()
        .map(|c| c.members.iter().filter(|m| answers.contains(*m)).count())
        .collect();
    let answer_total: usize = answers_in.iter().sum();

    let mut answer_ids: Vec<&String> = Vec::new();
    for c in &set.clusters {
        answer_ids.extend(by_degree(c.members.iter().filter(|m| answers.contains(*m)), degree));
    }

    if budget < answer_total {
        return Ok(Sample {
            ids: answer_ids.into_iter().cloned().collect(),
            plan: SamplePlan {
                budget,
                sigma,
                preferred_cluster: preferred,
                quotas: answers_in,
                seed,
                truncated: true,
            },
        });
    }

    let seats = budget.min(n) - answer_total;
    let caps: Vec<usize> = sizes.iter().zip(&answers_in).map(|(s, a)| s - a).collect();
    let fallback: Vec<u128> = sizes.iter().map(|&s| s as u128).collect();
    // Integer weights at grid step j: (GRID − j)·N·[preferred] + j·|c|.
    let quotas_at = |j: u128| -> Vec<usize> {
        let weights: Vec<u128> = (0..sizes.len())
            .map(|c| {
                let pref_part = if c == preferred { (GRID - j) * n as u128 } else { 0 };
                pref_part + j * sizes[c] as u128
            })
            .collect();
        let alloc = capped_allocation(seats, &weights, &caps, &fallback);
        alloc.iter().zip(&answers_in).map(|(x, a)| x + a).collect()
    };

    let full = quotas_at(GRID);
    let quotas = if sigma >= 1.0 {
        full
    } else {
        let h_full = quota_entropy(&full);
        let target = sigma * h_full;
        (0..=GRID)
            .map(|j| quotas_at(j))
            .find(|q| {
                let h = quota_entropy(q);
                h.partial_cmp(&h_full) != Some(Ordering::Greater) && h >= target
            })
            .unwrap_or(full)
    };

    let mut ids: Vec<String> = answer_ids.iter().map(|s| s.to_string()).collect();
    for (c, cluster) in set.clusters.iter().enumerate() {
        let extra = quotas[c] - answers_in[c];
        ids.extend(
            by_degree(cluster.members.iter().filter(|m| !answers.contains(*m)), degree)
                .into_iter()
                .take(extra)
                .cloned(),
        );
    }
    Ok(Sample {
        ids,
        plan: SamplePlan {
            budget,
            sigma,
            preferred_cluster: preferred,
            quotas,
            seed,
            truncated: false,
        },
    })
}
