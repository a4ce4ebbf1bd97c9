//! Grouping interest nodes by the preferred attribute.
//!
//! Numeric attributes go through 1-D DBSCAN on min-max normalized values;
//! text attributes are embedded and clustered with K-means, with k picked by
//! the WCSS elbow. Cluster order matters downstream (it is the order along
//! the layout arc): numeric clusters ascend by mean, text clusters follow a
//! greedy nearest-neighbour walk over their centroids.

mod dbscan;
mod embed;
mod kmeans;
mod label;

use serde::{Deserialize, Serialize};

pub use dbscan::{cluster_numeric, dbscan_1d, DbscanParams};
pub use embed::{EmbedError, EmbeddingProvider, HashedTfEmbedder};
pub use kmeans::{cluster_text, elbow_k, kmeans, select_k_wcss, wcss, KMeansParams, KMeansResult};
pub use label::{label_clusters, numeric_label, term_frequency_label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKind {
    Numeric,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub members: Vec<String>,
    pub label: String,
    /// Mean value (numeric) or embedding centroid (text).
    pub centroid: Vec<f64>,
}

/// A partition of the interest nodes. Cluster ids equal their position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub attribute: String,
    pub kind: ClusterKind,
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster index of a member id.
    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.clusters
            .iter()
            .position(|c| c.members.iter().any(|m| m == id))
    }

    pub fn member_count(&self) -> usize {
        self.clusters.iter().map(|c| c.members.len()).sum()
    }

    /// Re-numbers ids to match positions after reordering or appending.
    pub fn renumber(&mut self) {
        for (i, c) in self.clusters.iter_mut().enumerate() {
            c.id = i;
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("nothing to cluster")]
    Empty,
    #[error("non-finite value for `{0}`")]
    NonFinite(String),
    #[error("k selection needs at least 3 vectors, got {0}")]
    TooFewVectors(usize),
    #[error("k-max must be at least 2")]
    KMaxTooSmall,
    #[error(transparent)]
    Embedding(#[from] EmbedError),
}
