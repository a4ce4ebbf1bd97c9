//! Engine configuration. Every section has defaults, so a partial
//! configuration file only needs the keys it overrides.

use serde::{Deserialize, Serialize};

use crate::par::ExecMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    /// DBSCAN neighbourhood radius on min-max normalized values.
    pub eps: f64,
    pub min_pts: usize,
    /// Largest k considered by the WCSS sweep.
    pub kmax: usize,
    pub seed: u64,
    /// K-means restarts per k.
    pub n_init: usize,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            eps: 0.05,
            min_pts: 2,
            kmax: 8,
            seed: 7,
            n_init: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// `"offline"` or an HTTP endpoint URL.
    pub provider: String,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            provider: "offline".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub budget: usize,
    pub sigma_default: f64,
    /// Safety limit on displayed connected nodes.
    pub connected_cap: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            budget: 300,
            sigma_default: 0.5,
            connected_cap: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    /// Layout units per ontology hop.
    pub spacing: f64,
    pub exec: ExecMode,
    /// Connected-pass ideal distance is `factor · ρ / √n`.
    pub connected_k_factor: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            spacing: 300.0,
            exec: ExecMode::default(),
            connected_k_factor: 0.2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub clustering: ClusteringConfig,
    pub embedding: EmbeddingConfig,
    pub sampling: SamplingConfig,
    pub layout: LayoutConfig,
}
