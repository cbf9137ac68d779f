use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use contextrec::ingest::sha256_hex;
use serde::Serialize;

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

/// `<path>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name: OsString = output.as_os_str().to_owned();
    name.push(MANIFEST_SUFFIX);
    PathBuf::from(name)
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a C,
    workers: Option<usize>,
    output: Output<'a>,
    #[serde(flatten)]
    extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize)]
struct Output<'a> {
    path: &'a Path,
    bytes: usize,
    sha256: String,
}

/// Writes `bytes` to `path` and a manifest echoing the resolved command
/// configuration beside it.
pub fn write_with_manifest<C: Serialize>(
    path: &Path,
    bytes: &[u8],
    command: &'static str,
    config: &C,
    workers: Option<usize>,
    extra: Option<(&str, serde_json::Value)>,
) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    let mut map = serde_json::Map::new();
    if let Some((key, value)) = extra {
        map.insert(key.to_string(), value);
    }
    let manifest = Manifest {
        tool: "contextrec",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        workers,
        output: Output {
            path,
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        },
        extra: map,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let mpath = manifest_path(path);
    fs::write(&mpath, text).with_context(|| format!("writing {}", mpath.display()))?;
    Ok(())
}
