//! On-disk mode-table cache, one file per geometry.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{Context, Result};
use geoscat::spectral::{cache_load, cache_store, enumerate_modes, read_header};
use geoscat::{ModeTable, ResonatorGeometry};

pub const CACHE_ENV: &str = "GEOSCAT_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".geoscat-cache";

/// Cache directory: command-line flag, then `GEOSCAT_CACHE_DIR`, then the
/// config file, then [`DEFAULT_CACHE_DIR`].
pub fn cache_dir(flag: Option<&Path>, configured: Option<&str>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(CACHE_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    PathBuf::from(configured.unwrap_or(DEFAULT_CACHE_DIR))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    /// Served from an existing file with a sufficient cutoff.
    Hit,
    /// Enumerated and written; no usable file existed.
    Built,
}

impl fmt::Display for CacheStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CacheStatus::Hit => "cache hit",
            CacheStatus::Built => "computed",
        })
    }
}

#[derive(Debug, Clone)]
pub struct TableStore {
    dir: PathBuf,
}

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

impl TableStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, geometry: &ResonatorGeometry) -> PathBuf {
        self.dir.join(format!("{}.gsmt", geometry.descriptor()))
    }

    /// Returns the modes of `geometry` up to `lambda_max`, reading the cache
    /// when it holds a table at least that long.
    pub fn load_or_build(
        &self,
        geometry: &ResonatorGeometry,
        lambda_max: f64,
    ) -> Result<(ModeTable, CacheStatus)> {
        let path = self.path_for(geometry);
        let usable = read_header(&path)
            .map(|h| &h.geometry == geometry && h.lambda_max >= lambda_max)
            .unwrap_or(false);
        if usable {
            if let Ok(table) = cache_load(&path, geometry, lambda_max) {
                return Ok((table, CacheStatus::Hit));
            }
        }
        let table = enumerate_modes(geometry, lambda_max)?;
        self.store(&table, &path)?;
        Ok((table, CacheStatus::Built))
    }

    fn store(&self, table: &ModeTable, path: &Path) -> Result<()> {
        std::fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating cache directory {}", self.dir.display()))?;
        // Write to a unique temporary name and rename, so concurrent runs never
        // observe a partial file.
        let tmp = path.with_extension(format!(
            "{}-{}.tmp",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        cache_store(table, &tmp).with_context(|| format!("writing {}", tmp.display()))?;
        std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
