//! Append-only journals under the storage directory.
//!
//! ```text
//! sessions/<id>.jsonl   one SessionEvent per line
//! comments.jsonl        one Comment per line
//! visibility.jsonl      one VisibilityEvent per line
//! uploads/<hex>.zip     uploaded model bundles
//! ```
//!
//! Files are created on first write, so a service that never mutated
//! anything leaves the directory empty. A truncated final line, as left by a
//! crash mid-write, is ignored on load.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::Visibility;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum SessionEvent {
    #[serde(rename_all = "camelCase")]
    Create {
        model_id: String,
        version: String,
        locale: Option<String>,
    },
    #[serde(rename_all = "camelCase")]
    Answer { node_id: String, answer: String },
    Revise { index: usize, answer: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VisibilityEvent {
    pub model_id: String,
    pub version: String,
    pub visibility: Visibility,
    pub key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Comment {
    pub comment_id: String,
    pub model_id: String,
    pub version: String,
    pub locale: Option<String>,
    pub node_id: Option<String>,
    pub text: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn append<T: Serialize>(&self, rel: &str, value: &T) -> io::Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut line = serde_json::to_vec(value).map_err(io::Error::other)?;
        line.push(b'\n');
        let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
        f.write_all(&line)?;
        f.sync_data()
    }

    pub fn append_session(&self, id: &str, event: &SessionEvent) -> io::Result<()> {
        self.append(&format!("sessions/{id}.jsonl"), event)
    }

    pub fn append_comment(&self, c: &Comment) -> io::Result<()> {
        self.append("comments.jsonl", c)
    }

    pub fn append_visibility(&self, e: &VisibilityEvent) -> io::Result<()> {
        self.append("visibility.jsonl", e)
    }

    /// Stores an uploaded bundle; written to a temporary name and renamed so
    /// a crash never leaves half an archive.
    pub fn save_upload(&self, model_id: &str, version: &str, bytes: &[u8]) -> io::Result<()> {
        let dir = self.root.join("uploads");
        fs::create_dir_all(&dir)?;
        let name = hex::encode(format!("{model_id}\0{version}"));
        let tmp = dir.join(format!("{name}.tmp"));
        fs::write(&tmp, bytes)?;
        fs::File::open(&tmp)?.sync_all()?;
        fs::rename(&tmp, dir.join(format!("{name}.zip")))
    }

    pub fn load_uploads(&self) -> io::Result<Vec<Vec<u8>>> {
        let mut paths = list(&self.root.join("uploads"), "zip")?;
        paths.sort();
        paths.into_iter().map(|(_, p)| fs::read(p)).collect()
    }

    pub fn load_sessions(&self) -> io::Result<Vec<(String, Vec<SessionEvent>)>> {
        let mut out = Vec::new();
        for (id, path) in list(&self.root.join("sessions"), "jsonl")? {
            out.push((id, read_lines(&path)?));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    pub fn load_comments(&self) -> io::Result<Vec<Comment>> {
        read_lines(&self.root.join("comments.jsonl"))
    }

    pub fn load_visibility(&self) -> io::Result<Vec<VisibilityEvent>> {
        read_lines(&self.root.join("visibility.jsonl"))
    }
}

/// `(stem, path)` of the files in `dir` with extension `ext`.
fn list(dir: &Path, ext: &str) -> io::Result<Vec<(String, PathBuf)>> {
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for e in entries {
        let path = e?.path();
        if path.extension().is_some_and(|x| x == ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path.clone()));
            }
        }
    }
    Ok(out)
}

fn read_lines<T: DeserializeOwned>(path: &Path) -> io::Result<Vec<T>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(_) if i + 1 == lines.len() && !complete => break,
            Err(e) => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}:{}: {e}", path.display(), i + 1),
                ))
            }
        }
    }
    Ok(out)
}
