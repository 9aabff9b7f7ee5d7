//! Reading sessions from disk and cleaning them for feature extraction.

mod manifest;
mod preprocess;
mod vaef;

use std::fs;
use std::path::{Path, PathBuf};

pub use manifest::{load_session, parse_manifest, write_manifest, EmbeddingPaths, SessionManifest};
pub use preprocess::{preprocess, preprocess_with_counts, DropCounts, TYPICAL_COMMAND_RANGE};
pub use vaef::{
    read_embedding_file, read_embedding_path, read_matrix_file, read_matrix_path, write_embedding_file,
    write_embedding_path,
    EmbeddingMatrix, PAPER_WIDTHS,
};

use crate::error::{Error, Result};
use crate::model::{Cohort, Provenance};

/// File suffix that marks a session manifest inside a cohort directory.
pub const MANIFEST_SUFFIX: &str = ".manifest.json";

/// Manifest files directly inside `dir`, sorted by name.
pub fn manifest_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::from(e).at(dir))? {
        let path = entry?.path();
        let is_manifest = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(MANIFEST_SUFFIX));
        if is_manifest && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Loads every manifest in `dir` (unpreprocessed) into a cohort.
pub fn load_cohort_dir(dir: &Path, provenance: Provenance) -> Result<Cohort> {
    let sessions = manifest_paths(dir)?
        .iter()
        .map(|p| load_session(p))
        .collect::<Result<Vec<_>>>()?;
    Cohort::new(sessions, provenance)
}
