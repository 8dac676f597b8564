//! Content-addressed store for kernels and graphs.
//!
//! Layout: `objects/<sha256>.json` holds immutable payloads and
//! `index.json` maps names to revisions. Writes go through a temp file and
//! a rename.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::emit::{KernelEntry, KernelSource};
use super::ir::GraphIr;
use super::GraphError;
use crate::model::KernelSpec;

/// Hex SHA-256 of the value's JSON encoding.
pub fn revision_of<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Design the graph was generated from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_revision: Option<String>,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredGraph {
    pub name: String,
    pub ir: GraphIr,
    pub provenance: Provenance,
    pub revision: String,
}

#[derive(Serialize, Deserialize)]
struct GraphObject {
    ir: GraphIr,
    provenance: Provenance,
}

/// Revision a kernel gets when stored; independent of where it is stored.
pub(crate) fn kernel_revision(spec: &KernelSpec, source: &str) -> String {
    revision_of(&KernelObject { spec: spec.clone(), source: source.to_string() })
}

#[derive(Serialize, Deserialize)]
struct KernelObject {
    spec: KernelSpec,
    source: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Index {
    #[serde(default)]
    kernels: BTreeMap<String, String>,
    #[serde(default)]
    graphs: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct Repository {
    root: PathBuf,
    lock: Mutex<()>,
}

enum Kind {
    Kernel,
    Graph,
}

impl Repository {
    pub fn open(root: impl AsRef<Path>) -> Result<Self, GraphError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join("objects"))?;
        let repo = Repository { root, lock: Mutex::new(()) };
        if !repo.index_path().exists() {
            repo.write_index(&Index::default())?;
        }
        Ok(repo)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.json")
    }

    fn object_path(&self, rev: &str) -> PathBuf {
        self.root.join("objects").join(format!("{rev}.json"))
    }

    fn read_index(&self) -> Result<Index, GraphError> {
        let text = fs::read_to_string(self.index_path())?;
        serde_json::from_str(&text).map_err(|e| GraphError::Corrupt(format!("index.json: {e}")))
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), GraphError> {
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    fn write_index(&self, idx: &Index) -> Result<(), GraphError> {
        let mut text = serde_json::to_string_pretty(idx).expect("index serializes");
        text.push('\n');
        self.write_atomic(&self.index_path(), text.as_bytes())
    }

    fn put_object<T: Serialize>(&self, value: &T) -> Result<String, GraphError> {
        let rev = revision_of(value);
        let path = self.object_path(&rev);
        if !path.exists() {
            self.write_atomic(&path, &serde_json::to_vec(value).expect("object serializes"))?;
        }
        Ok(rev)
    }

    fn get_object<T: for<'de> Deserialize<'de> + Serialize>(&self, rev: &str) -> Result<T, GraphError> {
        let bytes = fs::read(self.object_path(rev)).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => GraphError::Corrupt(format!("missing object {rev}")),
            _ => e.into(),
        })?;
        let value: T = serde_json::from_slice(&bytes).map_err(|e| GraphError::Corrupt(format!("object {rev}: {e}")))?;
        if revision_of(&value) != rev {
            return Err(GraphError::Corrupt(format!("object {rev} hash mismatch")));
        }
        Ok(value)
    }

    fn bind(&self, kind: Kind, name: &str, rev: &str) -> Result<(), GraphError> {
        let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut idx = self.read_index()?;
        let map = match kind {
            Kind::Kernel => &mut idx.kernels,
            Kind::Graph => &mut idx.graphs,
        };
        match map.get(name) {
            Some(existing) if existing == rev => return Ok(()),
            Some(existing) => {
                return Err(GraphError::NameCollision { name: name.to_string(), existing: existing.clone() });
            }
            None => {
                map.insert(name.to_string(), rev.to_string());
            }
        }
        self.write_index(&idx)
    }

    /// Stores a kernel under its own name. Re-registering identical content
    /// is a no-op; different content under a bound name is a collision.
    pub fn register_kernel(&self, spec: KernelSpec, source: String) -> Result<KernelEntry, GraphError> {
        let obj = KernelObject { spec, source };
        let rev = self.put_object(&obj)?;
        self.bind(Kind::Kernel, &obj.spec.name, &rev)?;
        Ok(KernelEntry { name: obj.spec.name.clone(), spec: obj.spec, source: obj.source, revision: rev })
    }

    pub fn load_kernel(&self, name: &str) -> Result<KernelEntry, GraphError> {
        let rev = self.read_index()?.kernels.get(name).cloned().ok_or_else(|| GraphError::NotFound(name.to_string()))?;
        let obj: KernelObject = self.get_object(&rev)?;
        Ok(KernelEntry { name: name.to_string(), spec: obj.spec, source: obj.source, revision: rev })
    }

    pub fn save_graph(&self, name: &str, ir: &GraphIr, provenance: Provenance) -> Result<StoredGraph, GraphError> {
        let obj = GraphObject { ir: ir.clone(), provenance };
        let rev = self.put_object(&obj)?;
        self.bind(Kind::Graph, name, &rev)?;
        Ok(StoredGraph { name: name.to_string(), ir: obj.ir, provenance: obj.provenance, revision: rev })
    }

    /// Loads by name, or by revision id when no name matches.
    pub fn load_graph(&self, name_or_revision: &str) -> Result<StoredGraph, GraphError> {
        let idx = self.read_index()?;
        let (name, rev) = match idx.graphs.get(name_or_revision) {
            Some(rev) => (name_or_revision.to_string(), rev.clone()),
            None => {
                let named = idx.graphs.iter().find(|(_, r)| r.as_str() == name_or_revision);
                match named {
                    Some((n, r)) => (n.clone(), r.clone()),
                    None => return Err(GraphError::NotFound(name_or_revision.to_string())),
                }
            }
        };
        let obj: GraphObject = self.get_object(&rev)?;
        Ok(StoredGraph { name, ir: obj.ir, provenance: obj.provenance, revision: rev })
    }

    /// `(name, revision)` pairs in name order.
    pub fn list_kernels(&self) -> Result<Vec<(String, String)>, GraphError> {
        Ok(self.read_index()?.kernels.into_iter().collect())
    }

    pub fn list_graphs(&self) -> Result<Vec<(String, String)>, GraphError> {
        Ok(self.read_index()?.graphs.into_iter().collect())
    }
}

impl KernelSource for Repository {
    fn resolve_kernel(&self, name: &str) -> Option<KernelEntry> {
        self.load_kernel(name).ok()
    }
}
