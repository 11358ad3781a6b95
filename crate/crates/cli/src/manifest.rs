//! Run manifests: parameters, seeds, input/output hashes.
//!
//! The manifest identifies a run completely: tool version, command, the full
//! key/value configuration, the seed and the content hashes of every input.
//! Artifacts are deterministic functions of that identity, so two manifests
//! with equal `run_hash` imply byte-identical artifacts (checked by the test
//! suite). Hashes are 64-bit FNV-1a, an integrity check against accidental
//! divergence rather than an adversarial measure.

use crate::config::Config;
use crate::{CliError, CliResult};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// 64-bit FNV-1a content hash, rendered as fixed-width hex.
pub fn fnv1a64(bytes: &[u8]) -> String {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct FileRecord {
    pub name: String,
    pub bytes: usize,
    pub hash: String,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct StageRecord {
    /// Hash of the stage's own parameter subset.
    pub params_hash: String,
    /// Hash of the stage's input artifact.
    pub input_hash: String,
    pub outputs: Vec<FileRecord>,
    /// "computed" or "resumed" (hashes matched an earlier run).
    pub status: String,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub prng: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub stages: BTreeMap<String, StageRecord>,
    /// Hash over (tool, version, command, seed, config, input hashes).
    pub run_hash: String,
}

impl Manifest {
    pub fn new(command: &str, config: &Config, seed: u64) -> Self {
        Self {
            tool: "texplane".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            prng: texplane::rng::ALGORITHM_ID.into(),
            seed,
            config: config.entries().clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            stages: BTreeMap::new(),
            run_hash: String::new(),
        }
    }

    pub fn record_input(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.push(FileRecord {
            name: name.into(),
            bytes: bytes.len(),
            hash: fnv1a64(bytes),
        });
    }

    pub fn record_output(&mut self, name: &str, bytes: &[u8]) {
        self.outputs.push(FileRecord {
            name: name.into(),
            bytes: bytes.len(),
            hash: fnv1a64(bytes),
        });
    }

    /// Seals the run hash over the identity fields.
    pub fn finalize(&mut self) {
        let identity = serde_json::json!({
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "prng": self.prng,
            "seed": self.seed,
            "config": self.config,
            "inputs": self.inputs,
        });
        self.run_hash = fnv1a64(identity.to_string().as_bytes());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization cannot fail")
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("cannot parse manifest {}: {e}", path.display())))
    }
}

/// A run directory holding artifacts, the manifest and the lock file.
pub struct RunDir {
    root: PathBuf,
    lock: PathBuf,
}

impl RunDir {
    /// Creates (if needed) and locks the directory. A left-over lock from a
    /// concurrent or crashed run is an error.
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        let lock = root.join(".lock");
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock)
        {
            Ok(_) => {}
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(CliError::Io(format!(
                    "run directory {} is locked by another run (remove {} if stale)",
                    root.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(CliError::Io(format!("cannot lock {}: {e}", root.display()))),
        }
        Ok(Self {
            root: root.to_path_buf(),
            lock,
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Writes an artifact and records it in the manifest.
    pub fn write(&self, manifest: &mut Manifest, name: &str, bytes: &[u8]) -> CliResult<()> {
        fs::write(self.root.join(name), bytes)
            .map_err(|e| CliError::Io(format!("cannot write {name}: {e}")))?;
        manifest.record_output(name, bytes);
        Ok(())
    }

    pub fn write_manifest(&self, manifest: &mut Manifest) -> CliResult<()> {
        manifest.finalize();
        fs::write(self.root.join("manifest.json"), manifest.to_json())
            .map_err(|e| CliError::Io(format!("cannot write manifest.json: {e}")))?;
        Ok(())
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        // published FNV-1a test vectors
        assert_eq!(fnv1a64(b""), "cbf29ce484222325");
        assert_eq!(fnv1a64(b"a"), "af63dc4c8601ec8c");
        assert_eq!(fnv1a64(b"foobar"), "85944171f73967e8");
    }

    #[test]
    fn run_hash_is_stable_and_sensitive() {
        let mut cfg = Config::new();
        cfg.set("camera.f", "0.98");
        let mut a = Manifest::new("simulate", &cfg, 7);
        a.record_input("in.pgm", b"xyz");
        a.finalize();
        let mut b = Manifest::new("simulate", &cfg, 7);
        b.record_input("in.pgm", b"xyz");
        b.finalize();
        assert_eq!(a.run_hash, b.run_hash);
        let mut c = Manifest::new("simulate", &cfg, 8);
        c.record_input("in.pgm", b"xyz");
        c.finalize();
        assert_ne!(a.run_hash, c.run_hash);
    }

    #[test]
    fn lock_file_blocks_concurrent_runs() {
        let dir = std::env::temp_dir().join(format!("texplane-lock-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let first = RunDir::create(&dir).unwrap();
        assert!(RunDir::create(&dir).is_err());
        drop(first);
        let second = RunDir::create(&dir).unwrap();
        drop(second);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
