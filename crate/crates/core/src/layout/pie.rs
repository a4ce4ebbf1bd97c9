//! Per-node pie wedges: the share of a connected node's links per cluster.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub cluster: usize,
    pub frac: f64,
}

/// Wedges in cluster order; `links` maps a connected id to the clusters of
/// the interest nodes it links to (one entry per link).
pub fn compute_pie_wedges(links: &BTreeMap<String, Vec<usize>>) -> BTreeMap<String, Vec<Wedge>> {
    links
        .iter()
        .filter(|(_, l)| !l.is_empty())
        .map(|(id, clusters)| {
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for &c in clusters {
                *counts.entry(c).or_default() += 1;
            }
            let total = clusters.len() as f64;
            let wedges = counts
                .into_iter()
                .map(|(cluster, n)| Wedge {
                    cluster,
                    frac: n as f64 / total,
                })
                .collect();
            (id.clone(), wedges)
        })
        .collect()
}
