//! Interview hosting: model versions, sessions, comments and visibility.
//!
//! [`Service`] holds the state and enforces the rules; [`http`] maps it onto
//! JSON over HTTP. Every mutation is appended to the [`store`] before the
//! in-memory state changes, and [`Service::open`] rebuilds sessions by
//! replaying their answers through the engine.

pub mod config;
pub mod http;
pub mod store;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use policymodel_core::engine::AnswerRecord;
use policymodel_core::{EngineError, FinalReport, Session};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Config, HostedModel, Visibility};
pub use http::{router, serve};
use store::{Comment, SessionEvent, Store, VisibilityEvent};

use crate::files::{DirSource, MemorySource};
use crate::manifest::{load_model, LoadError, LoadedModel};
use crate::prompt::{prompt, Prompt};

#[derive(Debug, Error)]
pub enum ServiceError {
    /// Unknown model, missing or wrong key, bad admin token. Deliberately
    /// carries no detail.
    #[error("forbidden")]
    Forbidden,
    #[error("unknown session")]
    NotFound,
    #[error("{0}")]
    Stale(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Conflict(String),
    #[error("storage unavailable: {0}")]
    Storage(#[from] std::io::Error),
    #[error("{0}")]
    Fault(String),
}

impl From<EngineError> for ServiceError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::StaleNode { .. } | EngineError::Finished => ServiceError::Stale(e.to_string()),
            EngineError::NotFinished => ServiceError::Conflict(e.to_string()),
            EngineError::InvalidAnswer { .. } | EngineError::InvalidIndex { .. } | EngineError::ModelMismatch { .. } => {
                ServiceError::Invalid(e.to_string())
            }
            EngineError::CallDepthExceeded { .. } | EngineError::Fault { .. } => ServiceError::Fault(e.to_string()),
        }
    }
}

#[derive(Debug, Error)]
pub enum StartError {
    #[error("{path}: {source}")]
    Model {
        path: String,
        #[source]
        source: LoadError,
    },
    #[error("duplicate model version {0}@{1}")]
    Duplicate(String, String),
    #[error("storage: {0}")]
    Storage(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelInfo {
    pub id: String,
    pub version: String,
    pub title: String,
    pub locales: Vec<String>,
    pub default_locale: Option<String>,
}

/// Everything a client needs to show a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub session_id: String,
    pub model_id: String,
    pub version: String,
    pub locale: Option<String>,
    pub finished: bool,
    pub prompt: Option<Prompt>,
    pub transcript: Vec<AnswerRecord>,
    pub report: Option<FinalReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NewComment {
    pub model_id: String,
    pub version: String,
    pub locale: Option<String>,
    pub node_id: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Access {
    pub model_id: String,
    pub version: String,
    pub visibility: Visibility,
    /// The private link key; present only for private versions.
    pub key: Option<String>,
}

struct Hosted {
    model: Arc<LoadedModel>,
    visibility: Visibility,
    key: Option<String>,
}

struct SessionEntry {
    model: Arc<LoadedModel>,
    locale: Option<String>,
    session: Session,
}

type VersionKey = (String, String);

pub struct Service {
    store: Store,
    admin_token: Option<String>,
    models: RwLock<BTreeMap<VersionKey, Hosted>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionEntry>>>>,
    comments: Mutex<Vec<Comment>>,
    warnings: Vec<String>,
}

/// A 128-bit random token, hex encoded.
pub fn new_token() -> String {
    let mut bytes = [0u8; 16];
    getrandom::fill(&mut bytes).expect("system random source");
    hex::encode(bytes)
}

/// Compares without an early exit, so timing does not reveal a prefix match.
fn same_secret(a: &str, b: &str) -> bool {
    a.len() == b.len() && a.bytes().zip(b.bytes()).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl Service {
    /// Loads the configured models, then replays the storage journals.
    pub fn open(config: &Config) -> Result<Service, StartError> {
        let mut models = BTreeMap::new();
        for h in &config.models {
            let loaded = load_model(&DirSource::new(&h.path)).map_err(|source| StartError::Model {
                path: h.path.display().to_string(),
                source,
            })?;
            let key = (loaded.manifest.id.clone(), loaded.manifest.version.clone());
            if models.contains_key(&key) {
                return Err(StartError::Duplicate(key.0, key.1));
            }
            let secret = match h.visibility {
                Visibility::Private => Some(h.key.clone().unwrap_or_else(new_token)),
                Visibility::Public => None,
            };
            models.insert(
                key,
                Hosted {
                    model: Arc::new(loaded),
                    visibility: h.visibility,
                    key: secret,
                },
            );
        }

        let store = Store::new(&config.storage);
        let mut warnings = Vec::new();
        for bytes in store.load_uploads()? {
            match MemorySource::from_zip(&bytes).map_err(LoadError::from).and_then(|s| load_model(&s)) {
                Ok(m) => {
                    let key = (m.manifest.id.clone(), m.manifest.version.clone());
                    models.entry(key).or_insert(Hosted {
                        model: Arc::new(m),
                        visibility: Visibility::Private,
                        key: None,
                    });
                }
                Err(e) => warnings.push(format!("skipping stored upload: {e}")),
            }
        }
        for e in store.load_visibility()? {
            if let Some(h) = models.get_mut(&(e.model_id, e.version)) {
                h.visibility = e.visibility;
                h.key = e.key;
            }
        }

        let mut sessions = HashMap::new();
        for (id, events) in store.load_sessions()? {
            match replay_session(&models, &events) {
                Ok(entry) => {
                    sessions.insert(id, Arc::new(Mutex::new(entry)));
                }
                Err(e) => warnings.push(format!("skipping session {id}: {e}")),
            }
        }
        let comments = store.load_comments()?;
        Ok(Service {
            store,
            admin_token: config.admin_token.clone().filter(|t| !t.is_empty()),
            models: RwLock::new(models),
            sessions: RwLock::new(sessions),
            comments: Mutex::new(comments),
            warnings,
        })
    }

    /// Problems met while replaying storage; those records were skipped.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn list_models(&self) -> Vec<ModelInfo> {
        let models = self.models.read().unwrap_or_else(|p| p.into_inner());
        models
            .values()
            .filter(|h| h.visibility == Visibility::Public)
            .map(|h| info(&h.model))
            .collect()
    }

    /// The model behind a version the caller may open.
    fn accessible(&self, model_id: &str, version: &str, key: Option<&str>) -> Result<Arc<LoadedModel>, ServiceError> {
        let models = self.models.read().unwrap_or_else(|p| p.into_inner());
        let h = models
            .get(&(model_id.to_string(), version.to_string()))
            .ok_or(ServiceError::Forbidden)?;
        match (h.visibility, &h.key, key) {
            (Visibility::Public, _, _) => Ok(h.model.clone()),
            (Visibility::Private, Some(k), Some(given)) if same_secret(k, given) => Ok(h.model.clone()),
            _ => Err(ServiceError::Forbidden),
        }
    }

    pub fn create_session(
        &self,
        model_id: &str,
        version: &str,
        key: Option<&str>,
        locale: Option<&str>,
    ) -> Result<SessionView, ServiceError> {
        let model = self.accessible(model_id, version, key)?;
        self.start_session(model, locale, &[])
    }

    fn start_session(
        &self,
        model: Arc<LoadedModel>,
        locale: Option<&str>,
        answers: &[AnswerRecord],
    ) -> Result<SessionView, ServiceError> {
        let locale = model.package(locale).map(|p| p.locale.clone());
        let mut session = Session::start(&model.model)?;
        for a in answers {
            session.answer_at(&model.model, &a.node_id, &a.answer)?;
        }
        let id = new_token();
        self.store.append_session(
            &id,
            &SessionEvent::Create {
                model_id: model.manifest.id.clone(),
                version: model.manifest.version.clone(),
                locale: locale.clone(),
            },
        )?;
        for a in answers {
            self.store.append_session(
                &id,
                &SessionEvent::Answer {
                    node_id: a.node_id.clone(),
                    answer: a.answer.clone(),
                },
            )?;
        }
        let entry = SessionEntry { model, locale, session };
        let view = view(&id, &entry);
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(id, Arc::new(Mutex::new(entry)));
        Ok(view)
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<SessionEntry>>, ServiceError> {
        let sessions = self.sessions.read().unwrap_or_else(|p| p.into_inner());
        sessions.get(id).cloned().ok_or(ServiceError::NotFound)
    }

    pub fn session(&self, id: &str) -> Result<SessionView, ServiceError> {
        let entry = self.entry(id)?;
        let e = lock(&entry);
        Ok(view(id, &e))
    }

    /// Answers the question at `node_id`. Answers for any other node are
    /// stale and leave the session untouched.
    pub fn answer(&self, id: &str, node_id: &str, answer: &str) -> Result<SessionView, ServiceError> {
        let entry = self.entry(id)?;
        let mut e = lock(&entry);
        let mut next = e.session.clone();
        next.answer_at(&e.model.model, node_id, answer)?;
        self.store.append_session(
            id,
            &SessionEvent::Answer {
                node_id: node_id.to_string(),
                answer: answer.to_string(),
            },
        )?;
        e.session = next;
        Ok(view(id, &e))
    }

    /// Replaces answer `index` and replays the rest of the transcript.
    pub fn revise(&self, id: &str, index: usize, answer: &str) -> Result<SessionView, ServiceError> {
        let entry = self.entry(id)?;
        let mut e = lock(&entry);
        let next = e.session.revise_answer(&e.model.model, index, answer)?;
        self.store.append_session(
            id,
            &SessionEvent::Revise {
                index,
                answer: answer.to_string(),
            },
        )?;
        e.session = next;
        Ok(view(id, &e))
    }

    /// A new session in another locale with the same answers.
    pub fn relocalize(&self, id: &str, locale: Option<&str>) -> Result<SessionView, ServiceError> {
        let entry = self.entry(id)?;
        let (model, answers) = {
            let e = lock(&entry);
            (e.model.clone(), e.session.transcript().to_vec())
        };
        self.start_session(model, locale, &answers)
    }

    /// The final report serialized as JSON.
    pub fn report_json(&self, id: &str) -> Result<Vec<u8>, ServiceError> {
        let entry = self.entry(id)?;
        let e = lock(&entry);
        let report = e.session.final_report(&e.model.model, e.model.package(e.locale.as_deref()))?;
        serde_json::to_vec(&report).map_err(|err| ServiceError::Fault(err.to_string()))
    }

    pub fn add_comment(&self, c: NewComment, key: Option<&str>) -> Result<Comment, ServiceError> {
        let model = self.accessible(&c.model_id, &c.version, key)?;
        if c.text.trim().is_empty() {
            return Err(ServiceError::Invalid("comment text is empty".into()));
        }
        if let Some(l) = &c.locale {
            if !model.packages.contains_key(l) {
                return Err(ServiceError::Invalid(format!("model has no locale `{l}`")));
            }
        }
        if let Some(n) = &c.node_id {
            if model.model.graph().find(n).is_none() {
                return Err(ServiceError::Invalid(format!("model has no node `{n}`")));
            }
        }
        let comment = Comment {
            comment_id: new_token(),
            model_id: c.model_id,
            version: c.version,
            locale: c.locale,
            node_id: c.node_id,
            text: c.text,
            created: now(),
        };
        self.store.append_comment(&comment)?;
        lock(&self.comments).push(comment.clone());
        Ok(comment)
    }

    pub fn check_admin(&self, token: Option<&str>) -> Result<(), ServiceError> {
        match (&self.admin_token, token) {
            (Some(t), Some(given)) if same_secret(t, given) => Ok(()),
            _ => Err(ServiceError::Forbidden),
        }
    }

    pub fn comments(&self) -> Vec<Comment> {
        lock(&self.comments).clone()
    }

    /// Makes a version public or private. Going private keeps an existing
    /// key, so links already shared keep working.
    pub fn set_visibility(&self, model_id: &str, version: &str, visibility: Visibility) -> Result<Access, ServiceError> {
        let mut models = self.models.write().unwrap_or_else(|p| p.into_inner());
        let h = models
            .get_mut(&(model_id.to_string(), version.to_string()))
            .ok_or(ServiceError::Forbidden)?;
        let key = match visibility {
            Visibility::Public => h.key.clone(),
            Visibility::Private => Some(h.key.clone().unwrap_or_else(new_token)),
        };
        self.store.append_visibility(&VisibilityEvent {
            model_id: model_id.to_string(),
            version: version.to_string(),
            visibility,
            key: key.clone(),
        })?;
        h.visibility = visibility;
        h.key = key;
        Ok(access(model_id, version, h))
    }

    /// Hosts an uploaded bundle as a new private version.
    pub fn upload(&self, bytes: &[u8]) -> Result<Access, ServiceError> {
        let loaded = MemorySource::from_zip(bytes)
            .map_err(LoadError::from)
            .and_then(|s| load_model(&s))
            .map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let id = loaded.manifest.id.clone();
        let version = loaded.manifest.version.clone();
        let mut models = self.models.write().unwrap_or_else(|p| p.into_inner());
        if models.contains_key(&(id.clone(), version.clone())) {
            return Err(ServiceError::Conflict(format!("{id}@{version} already exists")));
        }
        let key = new_token();
        // the event goes first: without its archive it is ignored on replay
        self.store.append_visibility(&VisibilityEvent {
            model_id: id.clone(),
            version: version.clone(),
            visibility: Visibility::Private,
            key: Some(key.clone()),
        })?;
        self.store.save_upload(&id, &version, bytes)?;
        let h = Hosted {
            model: Arc::new(loaded),
            visibility: Visibility::Private,
            key: Some(key),
        };
        let out = access(&id, &version, &h);
        models.insert((id, version), h);
        Ok(out)
    }
}

fn info(m: &LoadedModel) -> ModelInfo {
    ModelInfo {
        id: m.manifest.id.clone(),
        version: m.manifest.version.clone(),
        title: m.manifest.title.clone(),
        locales: m.packages.keys().cloned().collect(),
        default_locale: m.manifest.default_locale.clone(),
    }
}

fn access(model_id: &str, version: &str, h: &Hosted) -> Access {
    Access {
        model_id: model_id.to_string(),
        version: version.to_string(),
        visibility: h.visibility,
        key: (h.visibility == Visibility::Private).then(|| h.key.clone()).flatten(),
    }
}

fn view(id: &str, e: &SessionEntry) -> SessionView {
    let model = &e.model.model;
    let pkg = e.model.package(e.locale.as_deref());
    SessionView {
        session_id: id.to_string(),
        model_id: model.id().to_string(),
        version: model.version().to_string(),
        locale: e.locale.clone(),
        finished: e.session.is_finished(),
        prompt: prompt(model, &e.session, pkg),
        transcript: e.session.transcript().to_vec(),
        report: e.session.final_report(model, pkg).ok(),
    }
}

fn replay_session(models: &BTreeMap<VersionKey, Hosted>, events: &[SessionEvent]) -> Result<SessionEntry, String> {
    let Some((SessionEvent::Create { model_id, version, locale }, rest)) = events.split_first() else {
        return Err("journal does not start with a create event".into());
    };
    let h = models
        .get(&(model_id.clone(), version.clone()))
        .ok_or_else(|| format!("model {model_id}@{version} is not hosted"))?;
    let model = h.model.clone();
    let mut session = Session::start(&model.model).map_err(|e| e.to_string())?;
    for ev in rest {
        match ev {
            SessionEvent::Answer { node_id, answer } => {
                session.answer_at(&model.model, node_id, answer).map_err(|e| e.to_string())?
            }
            SessionEvent::Revise { index, answer } => {
                session = session.revise_answer(&model.model, *index, answer).map_err(|e| e.to_string())?
            }
            SessionEvent::Create { .. } => return Err("repeated create event".into()),
        }
    }
    Ok(SessionEntry {
        model,
        locale: locale.clone(),
        session,
    })
}
