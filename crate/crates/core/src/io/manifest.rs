use std::path::Path;

use serde::{Deserialize, Serialize};

use super::files::{check_version, read_json, sha256_file, write_json, FORMAT_VERSION};
use crate::error::{Error, Result};

/// A file together with its content digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRef {
    /// File name relative to the manifest's directory.
    pub file: String,
    pub sha256: String,
}

impl ArtifactRef {
    pub fn of(path: &Path) -> Result<Self> {
        let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Self { file, sha256: sha256_file(path)? })
    }
}

/// Provenance of one command's outputs. Manifests form a chain
/// dataset → repnet → policy → eval through `upstream` digests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: String,
    pub command: String,
    pub seed: u64,
    /// Digest of the effective configuration.
    pub config_sha256: String,
    pub upstream: Vec<ArtifactRef>,
    pub outputs: Vec<ArtifactRef>,
    #[serde(default)]
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config_sha256: String) -> Self {
        Self {
            format_version: FORMAT_VERSION.into(),
            command: command.into(),
            seed,
            config_sha256,
            upstream: Vec::new(),
            outputs: Vec::new(),
            details: serde_json::Map::new(),
        }
    }

    pub fn path_for(artifact: &Path) -> std::path::PathBuf {
        let mut s = artifact.as_os_str().to_owned();
        s.push(".manifest.json");
        s.into()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let m: Self = read_json(path)?;
        check_version(&m.format_version, "manifest")?;
        Ok(m)
    }

    /// Checks that `artifact` still has the digest its manifest recorded and
    /// returns a reference for downstream manifests.
    pub fn verify_artifact(artifact: &Path) -> Result<ArtifactRef> {
        let current = ArtifactRef::of(artifact)?;
        let mpath = Self::path_for(artifact);
        let m = Self::read(&mpath)?;
        match m.outputs.iter().find(|o| o.file == current.file) {
            Some(o) if o.sha256 == current.sha256 => Ok(current),
            Some(_) => Err(Error::Format(format!("{} changed after its manifest was written (stale artifact)", artifact.display()))),
            None => Err(Error::Format(format!("{} does not list {}", mpath.display(), current.file))),
        }
    }
}
