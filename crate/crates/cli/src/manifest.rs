use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const SCHEMA_ID: &str = "slelab-manifest/1";
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// One requested check and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub config: RunConfig,
    /// Derived parameters when κ lies in their domain.
    pub params: Option<slelab::SleParams64>,
    pub wall_clock_seconds: f64,
    pub stages: Vec<Stage>,
    pub assertions: Vec<Assertion>,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Output directory, artifact checksums and stage timings of one run.
pub struct Recorder {
    pub out: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
    pub artifacts: Vec<Artifact>,
    pub stages: Vec<Stage>,
    pub assertions: Vec<Assertion>,
}

impl Recorder {
    pub fn new(config: &RunConfig) -> io::Result<Self> {
        fs::create_dir_all(&config.out)?;
        Ok(Recorder {
            out: config.out.clone(),
            csv: config.csv,
            json: config.json,
            svg: config.svg,
            artifacts: Vec::new(),
            stages: Vec::new(),
            assertions: Vec::new(),
        })
    }

    pub fn write(&mut self, file: &str, bytes: &[u8]) -> io::Result<()> {
        if file == MANIFEST_NAME {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "artifact name clashes with the manifest"));
        }
        write_atomic(&self.out.join(file), bytes)?;
        self.artifacts.push(Artifact {
            file: file.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn csv(&mut self, file: &str, text: &str) -> io::Result<()> {
        if self.csv {
            self.write(file, text.as_bytes())?;
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, file: &str, value: &T) -> io::Result<()> {
        if self.json {
            let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
            self.write(file, text.as_bytes())?;
        }
        Ok(())
    }

    pub fn svg(&mut self, file: &str, make: impl FnOnce() -> String) -> io::Result<()> {
        if self.svg {
            self.write(file, make().as_bytes())?;
        }
        Ok(())
    }

    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.push(Stage {
            name: name.to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn finish(self, config: &RunConfig, started: Instant) -> io::Result<RunManifest> {
        let params = config.kappa.and_then(|k| slelab::params::derive_params(k).ok());
        let manifest = RunManifest {
            schema: SCHEMA_ID,
            config: config.clone(),
            params,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            stages: self.stages,
            assertions: self.assertions,
            artifacts: self.artifacts,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        write_atomic(&self.out.join(MANIFEST_NAME), text.as_bytes())?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
