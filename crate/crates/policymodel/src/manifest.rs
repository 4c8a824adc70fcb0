//! `policy-model.json` manifests and loading a complete model bundle.

use std::collections::BTreeMap;

use policymodel_core::localization::{negotiate_locale, LocalizationPackage, PackageFiles};
use policymodel_core::{Diagnostic, Diagnostics, Model, ModelSources};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::files::{FileError, FileSource};

pub const MANIFEST_FILE: &str = "policy-model.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Manifest {
    pub id: String,
    pub title: String,
    pub version: String,
    pub space_file: String,
    pub graph_files: Vec<String>,
    #[serde(default)]
    pub inferencer_files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localization_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_locale: Option<String>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{MANIFEST_FILE}: {0}")]
    Manifest(String),
    #[error("{0}")]
    Model(Diagnostics),
    #[error("localization `{locale}`:\n{diagnostics}")]
    Localization { locale: String, diagnostics: Diagnostics },
}

impl LoadError {
    /// Diagnostics carried by the error, if it came from the model or its texts.
    pub fn diagnostics(&self) -> Option<&Diagnostics> {
        match self {
            LoadError::Model(d) | LoadError::Localization { diagnostics: d, .. } => Some(d),
            _ => None,
        }
    }
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Manifest, LoadError> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| LoadError::Manifest(e.to_string()))?;
        if m.id.trim().is_empty() {
            return Err(LoadError::Manifest("`id` must not be empty".into()));
        }
        if m.graph_files.is_empty() {
            return Err(LoadError::Manifest("`graphFiles` must list at least one file".into()));
        }
        Ok(m)
    }
}

/// A validated model with its localization packages.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub manifest: Manifest,
    pub model: Model,
    pub packages: BTreeMap<String, LocalizationPackage>,
    /// Warnings from localization loading (dropped entries).
    pub localization_warnings: Vec<Diagnostic>,
}

impl LoadedModel {
    pub fn locales(&self) -> Vec<&str> {
        self.packages.keys().map(String::as_str).collect()
    }

    /// The package for a requested locale, negotiated as exact tag, primary
    /// subtag, manifest default, then first available.
    pub fn package(&self, requested: Option<&str>) -> Option<&LocalizationPackage> {
        let locales = self.locales();
        let default = self.manifest.default_locale.as_deref().or(Some("en"));
        negotiate_locale(&locales, requested, default).and_then(|l| self.packages.get(l))
    }
}

pub fn load_manifest(src: &dyn FileSource) -> Result<Manifest, LoadError> {
    Manifest::parse(&src.read(MANIFEST_FILE)?)
}

/// Loads and validates a model bundle.
pub fn load_model(src: &dyn FileSource) -> Result<LoadedModel, LoadError> {
    let manifest = load_manifest(src)?;
    let space = src.read(&manifest.space_file)?;
    let graphs = manifest
        .graph_files
        .iter()
        .map(|f| Ok((f.as_str(), src.read(f)?)))
        .collect::<Result<Vec<_>, FileError>>()?;
    let inferencers = manifest
        .inferencer_files
        .iter()
        .map(|f| Ok((f.as_str(), src.read(f)?)))
        .collect::<Result<Vec<_>, FileError>>()?;
    let model = Model::build(&ModelSources {
        id: &manifest.id,
        title: &manifest.title,
        version: &manifest.version,
        space: (&manifest.space_file, &space),
        graphs: graphs.iter().map(|(n, t)| (*n, t.as_str())).collect(),
        inferencers: inferencers.iter().map(|(n, t)| (*n, t.as_str())).collect(),
    })
    .map_err(LoadError::Model)?;

    let mut packages = BTreeMap::new();
    let mut warnings = Vec::new();
    if let Some(dir) = &manifest.localization_dir {
        for locale in src.list(dir) {
            let base = format!("{dir}/{locale}");
            if !src.is_dir(&base) {
                continue;
            }
            let files = package_files(src, &base, &locale)?;
            let pkg = LocalizationPackage::build(&model, &files).map_err(|diagnostics| LoadError::Localization {
                locale: locale.clone(),
                diagnostics,
            })?;
            warnings.extend(pkg.warnings.iter().cloned());
            packages.insert(locale, pkg);
        }
    }
    Ok(LoadedModel {
        manifest,
        model,
        packages,
        localization_warnings: warnings,
    })
}

fn optional(src: &dyn FileSource, path: String) -> Result<Option<(String, String)>, FileError> {
    if src.exists(&path) {
        let text = src.read(&path)?;
        Ok(Some((path, text)))
    } else {
        Ok(None)
    }
}

/// Reads the files of one locale directory.
pub fn package_files(src: &dyn FileSource, base: &str, locale: &str) -> Result<PackageFiles, FileError> {
    let mut nodes = Vec::new();
    for name in src.list(&format!("{base}/nodes")) {
        if let Some(id) = name.strip_suffix(".md") {
            let path = format!("{base}/nodes/{name}");
            let text = src.read(&path)?;
            nodes.push((id.to_string(), path, text));
        }
    }
    Ok(PackageFiles {
        locale: locale.to_string(),
        model_md: optional(src, format!("{base}/model.md"))?,
        nodes,
        answers: optional(src, format!("{base}/answers.txt"))?,
        space_md: optional(src, format!("{base}/space.md"))?,
    })
}
