//! Report emission: every table the CLI writes starts with a header block
//! identifying the tool version, report schema, consumed input data (as a
//! content digest), and the complete effective configuration. Two runs with
//! equal headers are guaranteed byte-identical bodies.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use sleepwake_core::evaluate::REPORT_FORMAT_VERSION;
use sleepwake_core::{Error, Result};

/// SHA-256 over the given files' contents, each framed by its little-endian
/// length so file boundaries are unambiguous. Paths themselves are not
/// hashed: equal content in different directories digests equally.
pub fn digest_files<'a>(paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<String> {
    let mut hasher = Sha256::new();
    for path in paths {
        let bytes = fs::read(path).map_err(|e| Error::io(path.clone(), e))?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(7 + digest.len() * 2);
    hex.push_str("sha256:");
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    Ok(hex)
}

/// Common report header context.
pub struct ReportContext {
    pub command: &'static str,
    pub dataset_digest: String,
    /// Effective configuration, echoed sorted by key.
    pub config: Vec<(String, String)>,
}

impl ReportContext {
    fn header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tool=sleepwake {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# report_format={REPORT_FORMAT_VERSION}");
        let _ = writeln!(out, "# command={}", self.command);
        let _ = writeln!(out, "# dataset_digest={}", self.dataset_digest);
        let mut config = self.config.clone();
        config.sort();
        for (key, value) in config {
            let _ = writeln!(out, "# config.{key}={value}");
        }
        out
    }

    /// Write `body` under this header.
    pub fn write_report(&self, path: &Path, body: &str) -> Result<()> {
        let mut out = self.header();
        out.push_str(body);
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Shorthand for building `config` entries of mixed value types.
pub fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}
