//! The study service: hands out trials in session order, validates and stores human
//! responses, and serves the stimulus images and the study UI.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, SecondsFormat, Utc};
use graphsim_core::record::{FieldError, CRITERIA};
use graphsim_core::store::{JsonlStore, StoreError};
use graphsim_core::{Choice, JudgmentRecord};
use graphsim_harness::{Session, Trial};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{mpsc, oneshot, Mutex};
use tower_http::services::{ServeDir, ServeFile};

use crate::config::ServeConfig;
use crate::layout::OutputLayout;
use crate::CliError;

struct WriteRequest {
    record: JudgmentRecord,
    ack: oneshot::Sender<Result<(), String>>,
}

/// Handle to the one task that owns the judgment file. Appends from any number of
/// callers are applied one at a time, each acknowledged after the line is flushed.
#[derive(Clone)]
pub struct RecordWriter {
    tx: mpsc::Sender<WriteRequest>,
}

impl RecordWriter {
    /// Moves `store` onto a blocking worker. Must be called inside a Tokio runtime.
    pub fn spawn(mut store: JsonlStore) -> Self {
        let (tx, mut rx) = mpsc::channel::<WriteRequest>(64);
        tokio::task::spawn_blocking(move || {
            while let Some(req) = rx.blocking_recv() {
                let _ = req.ack.send(store.append(&req.record).map_err(|e| e.to_string()));
            }
        });
        RecordWriter { tx }
    }

    pub async fn append(&self, record: JudgmentRecord) -> Result<(), StoreError> {
        let (ack, done) = oneshot::channel();
        let closed = || StoreError::Io(std::io::Error::other("record writer stopped"));
        self.tx.send(WriteRequest { record, ack }).await.map_err(|_| closed())?;
        done.await.map_err(|_| closed())?.map_err(StoreError::Invalid)
    }
}

#[derive(Default)]
struct Progress {
    answered: HashSet<String>,
    /// Server-side serve time of each trial handed out since start-up.
    served: HashMap<String, (Instant, DateTime<Utc>)>,
}

pub struct StudyState {
    sessions: BTreeMap<String, Session>,
    images: HashMap<String, [String; 3]>,
    progress: Mutex<HashMap<String, Progress>>,
    writer: RecordWriter,
    layout: OutputLayout,
    time_limit_s: u64,
    ui_dir: Option<PathBuf>,
}

impl StudyState {
    /// Opens the human judgment file (recovering a crash-truncated tail) and restores
    /// which trials each session has already answered.
    pub fn load(layout: OutputLayout, sessions: Vec<Session>, serve: &ServeConfig) -> Result<Arc<Self>, CliError> {
        let store = JsonlStore::open(layout.human())?;
        if let Some(tail) = store.recovered_tail() {
            tracing::warn!(tail, "dropped an incomplete final record from the judgment file");
        }
        let existing = store.read_all()?;
        let sessions: BTreeMap<String, Session> = sessions.into_iter().map(|s| (s.session_id.clone(), s)).collect();
        let mut progress: HashMap<String, Progress> = sessions.keys().map(|k| (k.clone(), Progress::default())).collect();
        for r in existing {
            match (progress.get_mut(&r.respondent), sessions.get(&r.respondent)) {
                (Some(p), Some(s)) if s.trial(&r.trial_id).is_some() => {
                    p.answered.insert(r.trial_id);
                }
                _ => tracing::warn!(respondent = %r.respondent, trial = %r.trial_id, "record matches no session trial"),
            }
        }
        let images = sessions
            .values()
            .flat_map(|s| &s.trials)
            .map(|t| {
                let tr = &t.triplet;
                (tr.triplet_id.clone(), [tr.query_id.clone(), tr.target_a_id.clone(), tr.target_b_id.clone()])
            })
            .collect();
        Ok(Arc::new(StudyState {
            sessions,
            images,
            progress: Mutex::new(progress),
            writer: RecordWriter::spawn(store),
            layout,
            time_limit_s: serve.time_limit_s,
            ui_dir: serve.ui_dir.clone(),
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressView {
    pub session_id: String,
    pub answered: usize,
    pub total: usize,
    pub complete: bool,
    pub next_trial_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialImages {
    pub query: String,
    pub left: String,
    pub right: String,
}

/// What the client needs to show one trial. Ground truth is withheld.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialView {
    pub session_id: String,
    pub trial_id: String,
    pub triplet_id: String,
    pub position: usize,
    pub total: usize,
    pub query_id: String,
    pub left_id: String,
    pub right_id: String,
    pub images: TrialImages,
    pub served_at: String,
    pub time_limit_s: u64,
    pub criteria: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CriteriaInput {
    /// Six 0/1 flags in the canonical criterion order.
    Flags(Vec<i64>),
    /// Selected criterion labels.
    Labels(Vec<String>),
}

/// A participant's answer. The target is given either by screen side or directly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseBody {
    pub trial_id: String,
    #[serde(default)]
    pub selected: Option<Side>,
    #[serde(default)]
    pub choice: Option<Choice>,
    #[serde(default)]
    pub criteria: Option<CriteriaInput>,
    #[serde(default)]
    pub confidence: Option<i64>,
    #[serde(default)]
    pub elapsed_ms: Option<u64>,
    #[serde(default)]
    pub rationale: Option<String>,
}

fn field(field: &str, message: impl Into<String>) -> FieldError {
    FieldError { field: field.into(), message: message.into() }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn invalid(errors: Vec<FieldError>) -> Response {
    (StatusCode::UNPROCESSABLE_ENTITY, Json(json!({ "errors": errors }))).into_response()
}

fn progress_view(session: &Session, p: &Progress) -> ProgressView {
    let next = session.trials.iter().find(|t| !p.answered.contains(&t.trial_id));
    ProgressView {
        session_id: session.session_id.clone(),
        answered: p.answered.len(),
        total: session.trials.len(),
        complete: next.is_none(),
        next_trial_id: next.map(|t| t.trial_id.clone()),
    }
}

fn image_url(triplet_id: &str, stimulus_id: &str) -> String {
    format!("/images/{triplet_id}/{stimulus_id}.png")
}

/// Turns a response body into a record for `trial`, collecting every field problem.
pub fn record_from_body(session_id: &str, trial: &Trial, body: &ResponseBody) -> Result<JudgmentRecord, Vec<FieldError>> {
    let mut errors = Vec::new();
    let t = &trial.triplet;
    let by_side = body.selected.map(|side| {
        let id = match side {
            Side::Left => &trial.placement.left_id,
            Side::Right => &trial.placement.right_id,
        };
        if *id == t.target_a_id {
            Choice::TargetA
        } else {
            Choice::TargetB
        }
    });
    let choice = match (by_side, body.choice) {
        (Some(a), Some(b)) if a != b => {
            errors.push(field("choice", "disagrees with `selected`"));
            Choice::Abstain
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => {
            errors.push(field("selected", "choose the left or right target"));
            Choice::Abstain
        }
    };
    let mut criteria = [0i8; 6];
    match &body.criteria {
        None => {}
        Some(CriteriaInput::Flags(flags)) => {
            if flags.len() != CRITERIA.len() {
                errors.push(field("criteria", format!("expected {} flags, found {}", CRITERIA.len(), flags.len())));
            }
            for (i, &f) in flags.iter().enumerate().take(CRITERIA.len()) {
                match f {
                    0 | 1 => criteria[i] = f as i8,
                    _ => errors.push(field(&format!("criteria[{i}]"), format!("{f} is not 0 or 1"))),
                }
            }
        }
        Some(CriteriaInput::Labels(labels)) => {
            for l in labels {
                match CRITERIA.iter().position(|c| c.eq_ignore_ascii_case(l.trim())) {
                    Some(i) => criteria[i] = 1,
                    None => errors.push(field("criteria", format!("unknown criterion {l:?}"))),
                }
            }
        }
    }
    let confidence = match body.confidence {
        None => None,
        Some(c @ 1..=5) => Some(c as u8),
        Some(c) => {
            errors.push(field("confidence", format!("{c} is outside 1..=5")));
            None
        }
    };
    let record = JudgmentRecord {
        criteria,
        confidence,
        rationale: body.rationale.clone().filter(|r| !r.trim().is_empty()),
        client_elapsed_ms: body.elapsed_ms,
        ..JudgmentRecord::new(session_id, &trial.trial_id, &t.triplet_id, choice)
    };
    // Skip schema errors for fields already reported above.
    let key = |f: &str| match f.split('[').next().unwrap_or(f) {
        "selected" => "choice".to_string(),
        k => k.to_string(),
    };
    if let Err(more) = record.validate_human() {
        let reported: HashSet<String> = errors.iter().map(|e| key(&e.field)).collect();
        errors.extend(more.into_iter().filter(|e| !reported.contains(&key(&e.field))));
    }
    if errors.is_empty() {
        Ok(record)
    } else {
        Err(errors)
    }
}

async fn next_trial(State(state): State<Arc<StudyState>>, Path(id): Path<String>) -> Response {
    let Some(session) = state.sessions.get(&id) else { return error(StatusCode::NOT_FOUND, format!("unknown session {id}")) };
    let mut all = state.progress.lock().await;
    let p = all.get_mut(&id).expect("progress for every session");
    let Some(trial) = session.trials.iter().find(|t| !p.answered.contains(&t.trial_id)) else {
        return (StatusCode::CONFLICT, Json(json!({ "error": "session complete", "progress": progress_view(session, p) }))).into_response();
    };
    let (_, served_at) = *p.served.entry(trial.trial_id.clone()).or_insert_with(|| (Instant::now(), Utc::now()));
    let t = &trial.triplet;
    let view = TrialView {
        session_id: id.clone(),
        trial_id: trial.trial_id.clone(),
        triplet_id: t.triplet_id.clone(),
        position: trial.position,
        total: session.trials.len(),
        query_id: t.query_id.clone(),
        left_id: trial.placement.left_id.clone(),
        right_id: trial.placement.right_id.clone(),
        images: TrialImages {
            query: image_url(&t.triplet_id, &t.query_id),
            left: image_url(&t.triplet_id, &trial.placement.left_id),
            right: image_url(&t.triplet_id, &trial.placement.right_id),
        },
        served_at: served_at.to_rfc3339_opts(SecondsFormat::Millis, true),
        time_limit_s: state.time_limit_s,
        criteria: CRITERIA.iter().map(|c| c.to_string()).collect(),
    };
    Json(view).into_response()
}

async fn submit(State(state): State<Arc<StudyState>>, Path(id): Path<String>, body: Bytes) -> Response {
    let Some(session) = state.sessions.get(&id) else { return error(StatusCode::NOT_FOUND, format!("unknown session {id}")) };
    let body: ResponseBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return invalid(vec![field("body", e.to_string())]),
    };
    let mut all = state.progress.lock().await;
    let p = all.get_mut(&id).expect("progress for every session");
    if p.answered.contains(&body.trial_id) {
        return (StatusCode::OK, Json(json!({ "status": "duplicate", "progress": progress_view(session, p) }))).into_response();
    }
    let Some(next) = session.trials.iter().find(|t| !p.answered.contains(&t.trial_id)) else {
        return error(StatusCode::CONFLICT, "session complete");
    };
    if session.trial(&body.trial_id).is_none() {
        return invalid(vec![field("trial_id", format!("{} is not in session {id}", body.trial_id))]);
    }
    if next.trial_id != body.trial_id {
        return error(StatusCode::CONFLICT, format!("{} is not the current trial ({})", body.trial_id, next.trial_id));
    }
    let Some(&(served, _)) = p.served.get(&next.trial_id) else {
        return error(StatusCode::CONFLICT, format!("{} has not been served", body.trial_id));
    };
    let mut record = match record_from_body(&id, next, &body) {
        Ok(r) => r,
        Err(errors) => return invalid(errors),
    };
    record.latency_ms = Some(served.elapsed().as_millis() as u64);
    if let Err(e) = state.writer.append(record.clone()).await {
        tracing::error!(%e, "could not store a response");
        return error(StatusCode::INTERNAL_SERVER_ERROR, "could not store the response");
    }
    p.answered.insert(record.trial_id.clone());
    p.served.remove(&record.trial_id);
    (StatusCode::OK, Json(json!({ "status": "stored", "record": record, "progress": progress_view(session, p) }))).into_response()
}

async fn progress(State(state): State<Arc<StudyState>>, Path(id): Path<String>) -> Response {
    let Some(session) = state.sessions.get(&id) else { return error(StatusCode::NOT_FOUND, format!("unknown session {id}")) };
    let all = state.progress.lock().await;
    Json(progress_view(session, &all[&id])).into_response()
}

async fn image(State(state): State<Arc<StudyState>>, Path((triplet_id, file)): Path<(String, String)>) -> Response {
    let not_found = || error(StatusCode::NOT_FOUND, "no such image");
    let Some(stimulus_id) = file.strip_suffix(".png") else { return not_found() };
    if !state.images.get(&triplet_id).is_some_and(|ids| ids.iter().any(|i| i == stimulus_id)) {
        return not_found();
    }
    let aligned = state.layout.aligned(&triplet_id, stimulus_id);
    let path = if aligned.exists() { aligned } else { state.layout.stimulus_png(stimulus_id) };
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, "image/png")], bytes).into_response(),
        Err(_) => not_found(),
    }
}

async fn placeholder(State(state): State<Arc<StudyState>>) -> Html<String> {
    let items: String = state.sessions.keys().map(|k| format!("<li><code>{k}</code></li>")).collect();
    Html(format!(
        "<!doctype html><html><head><meta charset=\"utf-8\"><title>Graph similarity study</title></head><body>\
         <h1>Graph similarity study</h1><p>No study UI bundle is configured (<code>[serve] ui_dir</code>). \
         The API is live under <code>/api/session/&lt;id&gt;/</code>.</p><ul>{items}</ul></body></html>"
    ))
}

pub fn router(state: Arc<StudyState>) -> Router {
    let api = Router::new()
        .route("/api/session/{id}/trial", get(next_trial))
        .route("/api/session/{id}/response", post(submit))
        .route("/api/session/{id}/progress", get(progress))
        .route("/images/{triplet}/{file}", get(image));
    let app = match &state.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(dir.join("index.html")))),
        None => api.route("/", get(placeholder)),
    };
    app.with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(layout: OutputLayout, cfg: &ServeConfig) -> Result<(), CliError> {
    let sessions = layout.load_sessions()?;
    let state = StudyState::load(layout, sessions, cfg)?;
    let addr = format!("{}:{}", cfg.host, cfg.port);
    let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| CliError::io(std::path::Path::new(&addr), e))?;
    tracing::info!(%addr, "study service listening");
    axum::serve(listener, router(state)).await.map_err(|e| CliError::io(std::path::Path::new(&addr), e))
}
