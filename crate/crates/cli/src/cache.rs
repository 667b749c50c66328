//! Content-addressed on-disk cache of solver results.
//!
//! An entry is a JSON sidecar `<key>.json` holding the scalar results and
//! their digest, plus an optional field snapshot `<key>.fsnp`. Both are
//! written through a temporary file and an atomic rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use fermisurf::snapshot::Snapshot;

use crate::error::CliError;

/// Bumping this invalidates every existing entry.
pub const CACHE_VERSION: &str = concat!("fermisurf-", env!("CARGO_PKG_VERSION"), "/1");

pub struct Entry<S> {
    pub scalars: S,
    pub snapshot: Option<Snapshot>,
}

pub struct Cache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Key over the solver id, the cache version and the full numeric inputs.
pub fn cache_key(solver: &str, inputs: &Value) -> String {
    let doc = json!({ "solver": solver, "version": CACHE_VERSION, "inputs": inputs });
    sha_hex(doc.to_string().as_bytes())
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cache directory {}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        (self.dir.join(format!("{key}.json")), self.dir.join(format!("{key}.fsnp")))
    }

    /// Returns the stored entry for `(solver, inputs)` or runs `solve` and
    /// stores its result.
    pub fn get_or_solve<S, F>(&self, solver: &str, inputs: &Value, solve: F) -> Result<Entry<S>, CliError>
    where
        S: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<Entry<S>, CliError>,
    {
        let key = cache_key(solver, inputs);
        match self.load(&key) {
            Ok(Some(entry)) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(entry);
            }
            Ok(None) => {}
            Err(reason) => eprintln!("warning: cache entry {key} is corrupt ({reason}); recomputing"),
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let entry = solve()?;
        if let Err(reason) = self.store(&key, solver, inputs, &entry) {
            eprintln!("warning: cache entry {key} not written ({reason})");
        }
        Ok(entry)
    }

    fn load<S: DeserializeOwned>(&self, key: &str) -> Result<Option<Entry<S>>, String> {
        let (side, snap) = self.paths(key);
        let text = match fs::read(&side) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.to_string()),
        };
        let doc: Value = serde_json::from_slice(&text).map_err(|e| e.to_string())?;
        if doc["key"] != json!(key) || doc["version"] != json!(CACHE_VERSION) {
            return Err("key or version mismatch".into());
        }
        let scalars = &doc["scalars"];
        if doc["scalars_sha256"] != json!(sha_hex(scalars.to_string().as_bytes())) {
            return Err("scalar digest mismatch".into());
        }
        let snapshot = match &doc["snapshot_sha256"] {
            Value::Null => None,
            Value::String(want) => {
                let bytes = fs::read(&snap).map_err(|e| format!("snapshot: {e}"))?;
                if &sha_hex(&bytes) != want {
                    return Err("snapshot digest mismatch".into());
                }
                Some(Snapshot::from_bytes(&bytes).map_err(|e| e.to_string())?)
            }
            _ => return Err("malformed snapshot digest".into()),
        };
        let scalars = S::deserialize(scalars).map_err(|e| e.to_string())?;
        Ok(Some(Entry { scalars, snapshot }))
    }

    fn store<S: Serialize + DeserializeOwned>(
        &self,
        key: &str,
        solver: &str,
        inputs: &Value,
        entry: &Entry<S>,
    ) -> Result<(), String> {
        let scalars = serde_json::to_value(&entry.scalars).map_err(|e| e.to_string())?;
        // Non-finite floats do not survive JSON; such results are not cached.
        S::deserialize(&scalars).map_err(|_| "result is not representable".to_string())?;
        let (side, snap) = self.paths(key);
        let snapshot_sha = match &entry.snapshot {
            Some(s) => {
                let bytes = s.to_bytes();
                self.atomic_write(&snap, &bytes)?;
                Value::String(sha_hex(&bytes))
            }
            None => Value::Null,
        };
        let doc = json!({
            "key": key,
            "version": CACHE_VERSION,
            "solver": solver,
            "inputs": inputs,
            "scalars_sha256": sha_hex(scalars.to_string().as_bytes()),
            "scalars": scalars,
            "snapshot_sha256": snapshot_sha,
        });
        let text = serde_json::to_vec_pretty(&doc).map_err(|e| e.to_string())?;
        self.atomic_write(&side, &text)
    }

    fn atomic_write(&self, path: &Path, bytes: &[u8]) -> Result<(), String> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| e.to_string())?;
        tmp.write_all(bytes).map_err(|e| e.to_string())?;
        tmp.as_file().sync_all().map_err(|e| e.to_string())?;
        tmp.persist(path).map_err(|e| e.to_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    struct Pair {
        a: f64,
        b: f64,
    }

    #[test]
    fn hit_reproduces_scalars_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let inputs = json!({ "x": 0.1 });
        let v = Pair {
            a: 0.1 + 0.2,
            b: -1.234_567_890_123_456_7e-300,
        };
        let first = cache
            .get_or_solve("t", &inputs, || Ok(Entry { scalars: v.clone(), snapshot: None }))
            .unwrap();
        let second: Entry<Pair> = cache.get_or_solve("t", &inputs, || panic!("should hit")).unwrap();
        assert_eq!(first.scalars.a.to_bits(), second.scalars.a.to_bits());
        assert_eq!(first.scalars.b.to_bits(), second.scalars.b.to_bits());
        assert_eq!((cache.hits(), cache.misses()), (1, 1));
    }

    #[test]
    fn keys_depend_on_every_input() {
        let a = cache_key("s", &json!({ "tol": 1e-6, "h": 0.1 }));
        assert_eq!(a, cache_key("s", &json!({ "h": 0.1, "tol": 1e-6 })));
        assert_ne!(a, cache_key("s", &json!({ "tol": 1.0000000000000002e-6, "h": 0.1 })));
        assert_ne!(a, cache_key("t", &json!({ "tol": 1e-6, "h": 0.1 })));
    }

    #[test]
    fn corruption_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let inputs = json!([1, 2]);
        cache
            .get_or_solve("t", &inputs, || Ok(Entry { scalars: Pair { a: 1.0, b: 2.0 }, snapshot: None }))
            .unwrap();
        let side = cache.paths(&cache_key("t", &inputs)).0;
        let text = fs::read_to_string(&side).unwrap().replace("2.0", "3.0");
        fs::write(&side, text).unwrap();
        let e: Entry<Pair> = cache
            .get_or_solve("t", &inputs, || Ok(Entry { scalars: Pair { a: 1.0, b: 2.0 }, snapshot: None }))
            .unwrap();
        assert_eq!(e.scalars.b, 2.0);
        assert_eq!(cache.misses(), 2);
    }

    #[test]
    fn non_finite_results_are_not_stored() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let inputs = json!(0);
        for _ in 0..2 {
            cache
                .get_or_solve("t", &inputs, || Ok(Entry { scalars: Pair { a: f64::NAN, b: 0.0 }, snapshot: None }))
                .unwrap();
        }
        assert_eq!(cache.misses(), 2);
    }
}
