//! Dataset manifests: a CSV of clips plus a class list fixing label order.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One clip. `frames_path` is resolved against the manifest's directory
/// when relative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub frames_path: PathBuf,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    pub classes: Vec<String>,
    /// Directory relative frame paths are resolved against.
    pub root: PathBuf,
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// One class name per line; blank lines are ignored.
pub fn read_class_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let classes: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if classes.is_empty() {
        return Err(format_err(path, "class list is empty"));
    }
    let mut seen = HashSet::new();
    for c in &classes {
        if !seen.insert(c) {
            return Err(format_err(path, format!("duplicate class `{c}`")));
        }
    }
    Ok(classes)
}

impl Manifest {
    pub fn new(entries: Vec<ManifestEntry>, classes: Vec<String>, root: PathBuf) -> Result<Self> {
        let m = Self {
            entries,
            classes,
            root,
        };
        m.check(Path::new("<manifest>"))?;
        Ok(m)
    }

    fn check(&self, path: &Path) -> Result<()> {
        let mut ids = HashSet::new();
        for (row, e) in self.entries.iter().enumerate() {
            if !ids.insert(&e.id) {
                return Err(format_err(
                    path,
                    format!("row {}: duplicate id `{}`", row + 1, e.id),
                ));
            }
            if !self.classes.contains(&e.label) {
                return Err(format_err(
                    path,
                    format!(
                        "row {}: label `{}` is not in the class list",
                        row + 1,
                        e.label
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn load(manifest: &Path, classes: &Path) -> Result<Self> {
        let class_names = read_class_list(classes)?;
        let mut reader =
            csv::Reader::from_path(manifest).map_err(|e| format_err(manifest, e.to_string()))?;
        let header = reader
            .headers()
            .map_err(|e| format_err(manifest, e.to_string()))?;
        if header != vec!["id", "frames_path", "label"] {
            return Err(format_err(
                manifest,
                "header must be `id,frames_path,label`",
            ));
        }
        let entries = reader
            .deserialize()
            .collect::<std::result::Result<Vec<ManifestEntry>, _>>()
            .map_err(|e| format_err(manifest, e.to_string()))?;
        let root = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self {
            entries,
            classes: class_names,
            root,
        };
        m.check(manifest)?;
        Ok(m)
    }

    pub fn save(&self, manifest: &Path, classes: &Path) -> Result<()> {
        let mut writer =
            csv::Writer::from_path(manifest).map_err(|e| format_err(manifest, e.to_string()))?;
        for e in &self.entries {
            writer
                .serialize(e)
                .map_err(|e| format_err(manifest, e.to_string()))?;
        }
        writer.flush().map_err(|e| Error::io(manifest, e))?;
        let mut text = self.classes.join("\n");
        text.push('\n');
        fs::write(classes, text).map_err(|e| Error::io(classes, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn frames_dir(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.frames_path)
    }

    pub fn label_index(&self, entry: &ManifestEntry) -> usize {
        self.classes
            .iter()
            .position(|c| *c == entry.label)
            .expect("labels are checked on construction")
    }

    pub fn labels(&self) -> Vec<usize> {
        self.entries.iter().map(|e| self.label_index(e)).collect()
    }
}
