//! Text embeddings.

use crate::text::{fnv1a, terms};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("embedding provider failed: {0}")]
    Provider(String),
    #[error("embedding provider returned {got} vectors for {expected} texts")]
    CountMismatch { expected: usize, got: usize },
    #[error("embedding has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Maps texts to fixed-dimension vectors. Identical texts must map to
/// identical vectors, and `embed` must be callable concurrently.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError>;
}

/// Offline default: hashed term-frequency vectors, L2-normalized.
///
/// Each lowercase alphanumeric term is hashed with FNV-1a into one of
/// `dimension` buckets. Texts without terms map to the zero vector.
#[derive(Debug, Clone, Copy)]
pub struct HashedTfEmbedder {
    dimension: usize,
}

impl HashedTfEmbedder {
    pub const DEFAULT_DIMENSION: usize = 256;

    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        HashedTfEmbedder { dimension }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dimension];
        for term in terms(text) {
            let bucket = (fnv1a(term.as_bytes()) % self.dimension as u64) as usize;
            v[bucket] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl Default for HashedTfEmbedder {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIMENSION)
    }
}

impl EmbeddingProvider for HashedTfEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}
