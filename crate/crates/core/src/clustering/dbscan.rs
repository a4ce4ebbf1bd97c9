//! One-dimensional DBSCAN.
//!
//! Values are sorted once, so every ε-neighbourhood is a contiguous window
//! found by binary search. Points are visited in (value, id) order, which
//! makes the result independent of input order — border points reachable
//! from two clusters always join the lower one.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{label::decimals, numeric_label, Cluster, ClusterError, ClusterKind, ClusterSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for DbscanParams {
    fn default() -> Self {
        DbscanParams { eps: 0.05, min_pts: 2 }
    }
}

/// DBSCAN over already-sorted values. Returns a cluster index per point, or
/// `None` for noise. Neighbourhoods include the point itself and use `≤ eps`.
pub fn dbscan_1d(sorted: &[f64], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = sorted.len();
    let window = |i: usize| {
        let lo = sorted.partition_point(|v| *v < sorted[i] - eps);
        let hi = sorted.partition_point(|v| *v <= sorted[i] + eps);
        lo..hi
    };
    let is_core = |i: usize| window(i).len() >= min_pts.max(1);
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut next = 0;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        if !is_core(i) {
            continue;
        }
        let id = next;
        next += 1;
        labels[i] = Some(id);
        let mut queue: VecDeque<usize> = window(i).collect();
        while let Some(j) = queue.pop_front() {
            if labels[j].is_none() {
                labels[j] = Some(id);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            if is_core(j) {
                queue.extend(window(j).filter(|&k| !visited[k] || labels[k].is_none()));
            }
        }
    }
    labels
}

/// Clusters `(node id, value)` pairs. Noise points become singleton clusters;
/// clusters are ordered by ascending mean (ties by first member id).
pub fn cluster_numeric(
    attribute: &str,
    values: &[(String, f64)],
    params: DbscanParams,
) -> Result<ClusterSet, ClusterError> {
    if values.is_empty() {
        return Err(ClusterError::Empty);
    }
    if let Some((id, _)) = values.iter().find(|(_, v)| !v.is_finite()) {
        return Err(ClusterError::NonFinite(id.clone()));
    }
    let mut order: Vec<&(String, f64)> = values.iter().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let lo = order[0].1;
    let hi = order[order.len() - 1].1;
    let span = hi - lo;
    let normalized: Vec<f64> = order
        .iter()
        .map(|(_, v)| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect();
    let labels = dbscan_1d(&normalized, params.eps, params.min_pts);

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of_label: Vec<Option<usize>> = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        match label {
            Some(l) => {
                if index_of_label.len() <= *l {
                    index_of_label.resize(l + 1, None);
                }
                let g = *index_of_label[*l].get_or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[g].push(i);
            }
            None => groups.push(vec![i]),
        }
    }

    let precision = values.iter().map(|(_, v)| decimals(*v)).max().unwrap_or(0);
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&i| order[i].1).sum::<f64>() / g.len() as f64;
            let mut members: Vec<String> = g.iter().map(|&i| order[i].0.clone()).collect();
            members.sort();
            Cluster {
                id: 0,
                label: numeric_label(mean, precision),
                members,
                centroid: vec![mean],
            }
        })
        .collect();
    clusters.sort_by(|a, b| a.centroid[0].total_cmp(&b.centroid[0]).then_with(|| a.members[0].cmp(&b.members[0])));
    let mut set = ClusterSet {
        attribute: attribute.to_string(),
        kind: ClusterKind::Numeric,
        clusters,
    };
    set.renumber();
    Ok(set)
}
