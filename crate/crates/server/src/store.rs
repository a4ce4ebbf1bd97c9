//! Graph library and snapshot files.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use contextkg_core::graph::{GraphDocument, GraphError};
use contextkg_core::{derive_ontology, load_graph};

use crate::session::{GraphSource, LoadedGraph, Snapshot};

/// The graph shipped with the service.
pub const ACADEMIC: &str = include_str!("../../core/fixtures/academic.json");

pub fn load_document(source: GraphSource, doc: &GraphDocument) -> Result<LoadedGraph, GraphError> {
    let kg = load_graph(doc)?;
    let ontology = derive_ontology(&kg);
    Ok(LoadedGraph { source, kg, ontology })
}

/// Named graphs: the bundled `academic` graph plus `*.json` files of the
/// configured graph directory (by file stem).
#[derive(Default)]
pub struct GraphLibrary {
    graphs: BTreeMap<String, Arc<LoadedGraph>>,
}

impl GraphLibrary {
    pub fn load(graph_dir: Option<&Path>, max_bytes: usize) -> Result<Self, GraphError> {
        let mut lib = GraphLibrary::default();
        lib.insert("academic", ACADEMIC)?;
        let Some(dir) = graph_dir else { return Ok(lib) };
        let entries = match std::fs::read_dir(dir) {
            Ok(e) => e,
            Err(e) => {
                tracing::warn!(dir = %dir.display(), error = %e, "graph directory unreadable");
                return Ok(lib);
            }
        };
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            let size = std::fs::metadata(&path).map(|m| m.len() as usize).unwrap_or(usize::MAX);
            if size > max_bytes {
                tracing::warn!(graph = %stem, size, "graph file exceeds the size limit, skipped");
                continue;
            }
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    if let Err(e) = lib.insert(&stem, &text) {
                        tracing::warn!(graph = %stem, error = %e, "graph file rejected");
                    }
                }
                Err(e) => tracing::warn!(graph = %stem, error = %e, "graph file unreadable"),
            }
        }
        Ok(lib)
    }

    fn insert(&mut self, name: &str, text: &str) -> Result<(), GraphError> {
        let doc = GraphDocument::from_json(text)?;
        let g = load_document(GraphSource::Named(name.to_string()), &doc)?;
        self.graphs.insert(name.to_string(), Arc::new(g));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<Arc<LoadedGraph>> {
        self.graphs.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.graphs.keys().map(String::as_str)
    }
}

/// Snapshot files under `<data_dir>/sessions`.
#[derive(Debug, Clone)]
pub struct SnapshotStore {
    dir: PathBuf,
}

impl SnapshotStore {
    pub fn new(data_dir: &Path) -> Self {
        SnapshotStore {
            dir: data_dir.join("sessions"),
        }
    }

    pub fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Writes through a temporary file and a rename, so a crash never
    /// leaves a truncated snapshot.
    pub fn save(&self, snapshot: &Snapshot) -> io::Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let body = serde_json::to_vec_pretty(snapshot).map_err(io::Error::other)?;
        let tmp = self.dir.join(format!(".{}.json.tmp", snapshot.id));
        std::fs::write(&tmp, body)?;
        std::fs::rename(&tmp, self.path(&snapshot.id))
    }

    /// Every readable snapshot, in file-name order. Unreadable files are
    /// reported and skipped.
    pub fn load_all(&self) -> Vec<Snapshot> {
        let Ok(entries) = std::fs::read_dir(&self.dir) else {
            return Vec::new();
        };
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .filter(|p| !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
            .collect();
        paths.sort();
        paths
            .into_iter()
            .filter_map(|p| {
                let parsed = std::fs::read(&p)
                    .map_err(|e| e.to_string())
                    .and_then(|b| serde_json::from_slice::<Snapshot>(&b).map_err(|e| e.to_string()));
                match parsed {
                    Ok(s) => Some(s),
                    Err(e) => {
                        tracing::warn!(file = %p.display(), error = %e, "snapshot skipped");
                        None
                    }
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_has_academic() {
        let lib = GraphLibrary::load(None, usize::MAX).unwrap();
        let g = lib.get("academic").unwrap();
        assert!(g.ontology.has_type("Paper"));
        assert_eq!(g.name(), "academic");
    }

    #[test]
    fn graph_dir_by_stem_and_size_limit() {
        let dir = tempfile::tempdir().unwrap();
        let doc = r#"{"nodes":[{"id":"a","type":"T","label":"A"}],"edges":[]}"#;
        std::fs::write(dir.path().join("tiny.json"), doc).unwrap();
        std::fs::write(dir.path().join("broken.json"), "{").unwrap();
        let lib = GraphLibrary::load(Some(dir.path()), 1 << 20).unwrap();
        assert!(lib.get("tiny").is_some());
        assert!(lib.get("broken").is_none());
        let lib = GraphLibrary::load(Some(dir.path()), 10).unwrap();
        assert!(lib.get("tiny").is_none());
    }
}
