//! Read-only views of a model bundle: a directory or an in-memory archive.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not valid UTF-8")]
    Utf8 { path: String },
    #[error("{path}: no such file")]
    Missing { path: String },
    #[error("archive: {0}")]
    Archive(String),
}

/// Files addressed by `/`-separated paths relative to the bundle root.
pub trait FileSource {
    fn read(&self, path: &str) -> Result<String, FileError>;
    fn exists(&self, path: &str) -> bool;
    /// Names of the direct children of `dir` (files and directories), sorted.
    fn list(&self, dir: &str) -> Vec<String>;
    fn is_dir(&self, path: &str) -> bool;
}

#[derive(Debug, Clone)]
pub struct DirSource {
    root: PathBuf,
}

impl DirSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DirSource { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, rel: &str) -> PathBuf {
        rel.split('/').filter(|s| !s.is_empty()).fold(self.root.clone(), |p, s| p.join(s))
    }
}

impl FileSource for DirSource {
    fn read(&self, path: &str) -> Result<String, FileError> {
        let bytes = std::fs::read(self.path(path)).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => FileError::Missing { path: path.to_string() },
            _ => FileError::Io {
                path: path.to_string(),
                source: e,
            },
        })?;
        String::from_utf8(bytes).map_err(|_| FileError::Utf8 { path: path.to_string() })
    }

    fn exists(&self, path: &str) -> bool {
        self.path(path).is_file()
    }

    fn list(&self, dir: &str) -> Vec<String> {
        let mut out: Vec<String> = std::fs::read_dir(self.path(dir))
            .into_iter()
            .flatten()
            .flatten()
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        out.sort();
        out
    }

    fn is_dir(&self, path: &str) -> bool {
        self.path(path).is_dir()
    }
}

/// An in-memory bundle, typically unpacked from an uploaded zip archive.
#[derive(Debug, Clone, Default)]
pub struct MemorySource {
    files: BTreeMap<String, Vec<u8>>,
}

impl MemorySource {
    pub fn new(files: BTreeMap<String, Vec<u8>>) -> Self {
        MemorySource { files }
    }

    /// Unpacks a zip archive. When every entry shares one top-level directory
    /// that directory becomes the root.
    pub fn from_zip(bytes: &[u8]) -> Result<Self, FileError> {
        let mut archive =
            zip::ZipArchive::new(std::io::Cursor::new(bytes)).map_err(|e| FileError::Archive(e.to_string()))?;
        let mut files = BTreeMap::new();
        for i in 0..archive.len() {
            let mut entry = archive.by_index(i).map_err(|e| FileError::Archive(e.to_string()))?;
            if entry.is_dir() {
                continue;
            }
            let Some(name) = entry.enclosed_name() else {
                return Err(FileError::Archive(format!("unsafe entry name `{}`", entry.name())));
            };
            let name = name
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            let mut data = Vec::new();
            entry.read_to_end(&mut data).map_err(|e| FileError::Archive(e.to_string()))?;
            files.insert(name, data);
        }
        let prefix = files.keys().next().and_then(|k| k.split_once('/')).map(|(p, _)| format!("{p}/"));
        if let Some(prefix) = prefix {
            if !files.contains_key("policy-model.json") && files.keys().all(|k| k.starts_with(&prefix)) {
                files = files
                    .into_iter()
                    .map(|(k, v)| (k[prefix.len()..].to_string(), v))
                    .collect();
            }
        }
        Ok(MemorySource { files })
    }
}

fn norm(path: &str) -> String {
    path.split('/').filter(|s| !s.is_empty() && *s != ".").collect::<Vec<_>>().join("/")
}

impl FileSource for MemorySource {
    fn read(&self, path: &str) -> Result<String, FileError> {
        let bytes = self
            .files
            .get(&norm(path))
            .ok_or_else(|| FileError::Missing { path: path.to_string() })?;
        String::from_utf8(bytes.clone()).map_err(|_| FileError::Utf8 { path: path.to_string() })
    }

    fn exists(&self, path: &str) -> bool {
        self.files.contains_key(&norm(path))
    }

    fn list(&self, dir: &str) -> Vec<String> {
        let dir = norm(dir);
        let prefix = if dir.is_empty() { String::new() } else { format!("{dir}/") };
        let mut out: Vec<String> = self
            .files
            .keys()
            .filter_map(|k| k.strip_prefix(&prefix))
            .map(|rest| rest.split('/').next().unwrap_or(rest).to_string())
            .collect();
        out.dedup();
        out
    }

    fn is_dir(&self, path: &str) -> bool {
        let prefix = format!("{}/", norm(path));
        self.files.keys().any(|k| k.starts_with(&prefix))
    }
}
