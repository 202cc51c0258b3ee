//! HTTP API. Every payload is JSON; meetings travel in the canonical store
//! format.
//!
//! Writes go through one store lock and are on disk before the response is
//! sent. Queries run against an immutable index snapshot that is dropped by
//! any mutation and rebuilt on the next query (or `POST /index/rebuild`).

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ibismeet_core::assist::{suggest_annotations, SuggestConfig};
use ibismeet_core::dialogue::{parse_transcript, DialogueError, TranscriptFormat, Vocabulary};
use ibismeet_core::index::{build_indexes, IndexConfig, IndexSet};
use ibismeet_core::mds::{validate, EditError, EpisodeSpec, ValidationReport, Violation};
use ibismeet_core::query::{execute, parse_query, QueryError};
use ibismeet_core::store::{Store, StoreError};
use ibismeet_core::text::Analyzer;
use ibismeet_core::{ArgLabel, EpisodeId, Execution, GrammarRuleSet, Meeting};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    NotFound,
    InvalidInput,
    ValidationFailed,
    ParseError,
    /// Storage failure on the server side.
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::InvalidInput | ErrorCode::ParseError => StatusCode::BAD_REQUEST,
            ErrorCode::ValidationFailed => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
}

impl ApiError {
    fn new(code: ErrorCode, message: impl ToString) -> Self {
        ApiError { code, message: message.to_string(), report: None }
    }

    fn rejected(report: ValidationReport) -> Self {
        let codes: Vec<&str> = report.violations.iter().map(|v| v.code.as_str()).collect();
        ApiError {
            code: ErrorCode::ValidationFailed,
            message: format!("edit refused: {}", codes.join(", ")),
            report: Some(report),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            StoreError::NotFound(_) => ErrorCode::NotFound,
            StoreError::AlreadyExists(_) | StoreError::BadId(_) | StoreError::Invalid(_) => ErrorCode::InvalidInput,
            StoreError::Grammar(_) => ErrorCode::ParseError,
            StoreError::Corrupted { .. } | StoreError::Version { .. } | StoreError::Io { .. } => ErrorCode::Internal,
        };
        ApiError::new(code, e)
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let code = match &e {
            QueryError::Syntax { .. } | QueryError::MissingArgument(_) => ErrorCode::ParseError,
            QueryError::NotFound { .. } => ErrorCode::NotFound,
            QueryError::NotADecision(_) | QueryError::Index(_) => ErrorCode::InvalidInput,
        };
        ApiError::new(code, e)
    }
}

fn edit_error(meeting: &Meeting, e: EditError) -> ApiError {
    match e {
        EditError::Violation { code, episode, message } => ApiError::rejected(ValidationReport {
            meeting: meeting.id.clone(),
            violations: vec![Violation::new(code, episode, None, message)],
        }),
        EditError::UnknownEpisode(_) => ApiError::new(ErrorCode::NotFound, e),
        _ => ApiError::new(ErrorCode::InvalidInput, e),
    }
}

type ApiResult<T> = Result<T, ApiError>;

struct Snapshot {
    corpus: Vec<Meeting>,
    index: IndexSet,
}

pub struct AppState {
    store: Mutex<Store>,
    grammar: RwLock<GrammarRuleSet>,
    snapshot: RwLock<Option<Arc<Snapshot>>>,
    vocabulary: Vocabulary,
    analyzer: Analyzer,
}

impl AppState {
    /// Serves `store`, validating with `grammar` or, if none is given, the
    /// grammar kept in the store.
    pub fn new(store: Store, grammar: Option<GrammarRuleSet>) -> Result<Self, StoreError> {
        let grammar = match grammar {
            Some(g) => g,
            None => store.grammar()?,
        };
        Ok(AppState {
            store: Mutex::new(store),
            grammar: RwLock::new(grammar),
            snapshot: RwLock::new(None),
            vocabulary: Vocabulary::default_swbd_damsl(),
            analyzer: Analyzer::default(),
        })
    }

    fn grammar(&self) -> GrammarRuleSet {
        self.grammar.read().unwrap_or_else(PoisonError::into_inner).clone()
    }

    fn with_store<T>(&self, f: impl FnOnce(&mut Store) -> Result<T, StoreError>) -> ApiResult<T> {
        let mut store = self.store.lock().unwrap_or_else(PoisonError::into_inner);
        Ok(f(&mut store)?)
    }

    fn invalidate(&self) {
        *self.snapshot.write().unwrap_or_else(PoisonError::into_inner) = None;
    }

    fn rebuild(&self) -> ApiResult<Arc<Snapshot>> {
        let corpus = self.with_store(|s| s.load_all())?;
        let index = build_indexes(&corpus, &IndexConfig::default(), Execution::default());
        self.with_store(|s| s.save_index_cache(&index))?;
        let snap = Arc::new(Snapshot { corpus, index });
        *self.snapshot.write().unwrap_or_else(PoisonError::into_inner) = Some(snap.clone());
        Ok(snap)
    }

    fn snapshot(&self) -> ApiResult<Arc<Snapshot>> {
        if let Some(s) = self.snapshot.read().unwrap_or_else(PoisonError::into_inner).clone() {
            return Ok(s);
        }
        self.rebuild()
    }

    /// Saves `updated` unless it has violations `current` does not have.
    fn commit_edit(&self, current: &Meeting, updated: Meeting) -> ApiResult<ValidationReport> {
        let grammar = self.grammar();
        let before: BTreeSet<_> = validate(current, &grammar).violations.iter().map(Violation::key).collect();
        let report = validate(&updated, &grammar);
        let added: Vec<Violation> =
            report.violations.iter().filter(|v| !before.contains(&v.key())).cloned().collect();
        if !added.is_empty() {
            return Err(ApiError::rejected(ValidationReport { meeting: updated.id.clone(), violations: added }));
        }
        self.with_store(|s| s.save_meeting(&updated, true))?;
        self.invalidate();
        Ok(report)
    }
}

fn body<T: for<'de> Deserialize<'de>>(raw: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(raw).map_err(|e| ApiError::new(ErrorCode::ParseError, e))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/meetings", get(list_meetings))
        .route("/meetings/:id", get(get_meeting).put(put_meeting))
        .route("/meetings/:id/episodes", post(add_episode))
        .route("/meetings/:id/reply-to", post(add_reply))
        .route("/meetings/:id/validate", post(validate_meeting))
        .route("/meetings/:id/suggestions", get(suggestions))
        .route("/index/rebuild", post(rebuild_index))
        .route("/query", post(run_query))
        .route("/grammar", get(get_grammar).put(put_grammar))
        .with_state(state)
}

async fn list_meetings(State(st): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    let meetings = st.with_store(|s| s.load_all())?;
    let list: Vec<_> = meetings
        .iter()
        .map(|m| {
            json!({
                "id": m.id,
                "title": m.title,
                "utterances": m.utterances.len(),
                "turns": m.turns.len(),
                "episodes": m.episodes.len(),
            })
        })
        .collect();
    Ok(Json(json!(list)))
}

async fn get_meeting(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Meeting>> {
    Ok(Json(st.with_store(|s| s.load_meeting(&id))?))
}

async fn put_meeting(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    raw: Bytes,
) -> ApiResult<Json<ValidationReport>> {
    let meeting = parse_transcript(&raw, TranscriptFormat::StructuredDoc, &st.vocabulary).map_err(|e| match e {
        DialogueError::Json(_) | DialogueError::Decode | DialogueError::EmptyTranscript => {
            ApiError::new(ErrorCode::ParseError, e)
        }
        _ => ApiError::new(ErrorCode::InvalidInput, e),
    })?;
    if meeting.id != id.as_str() {
        return Err(ApiError::new(
            ErrorCode::InvalidInput,
            format!("document is meeting {} but the path names {id}", meeting.id),
        ));
    }
    st.with_store(|s| s.save_meeting(&meeting, true))?;
    st.invalidate();
    Ok(Json(validate(&meeting, &st.grammar())))
}

#[derive(Deserialize)]
struct NewEpisode {
    parent: String,
    label: String,
    turns: String,
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    speaker: Option<String>,
    #[serde(default)]
    target: Option<String>,
    #[serde(default)]
    topic: Option<String>,
}

async fn add_episode(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    raw: Bytes,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let req: NewEpisode = body(&raw)?;
    let mut label: ArgLabel = req.label.parse().map_err(|e| ApiError::new(ErrorCode::ParseError, e))?;
    label.topic = req.topic;
    let span = req.turns.parse().map_err(|e| ApiError::new(ErrorCode::ParseError, e))?;
    let mut spec = EpisodeSpec::new(label, span);
    if let Some(i) = &req.id {
        spec = spec.id(i);
    }
    if let Some(s) = &req.speaker {
        spec = spec.speaker(s);
    }
    if let Some(t) = &req.target {
        spec = spec.target(t);
    }
    let current = st.with_store(|s| s.load_meeting(&id))?;
    let (updated, new_id) = current.insert_episode(&req.parent, spec, &st.grammar()).map_err(|e| edit_error(&current, e))?;
    let report = st.commit_edit(&current, updated)?;
    Ok((StatusCode::CREATED, Json(json!({ "episode": new_id, "report": report }))))
}

#[derive(Deserialize)]
struct NewReply {
    from: String,
    to: Vec<String>,
}

async fn add_reply(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    raw: Bytes,
) -> ApiResult<Json<ValidationReport>> {
    let req: NewReply = body(&raw)?;
    let targets: Vec<EpisodeId> = req.to.iter().map(|t| EpisodeId::new(t.as_str())).collect();
    let current = st.with_store(|s| s.load_meeting(&id))?;
    let updated = current.add_reply_to(&req.from, &targets).map_err(|e| edit_error(&current, e))?;
    Ok(Json(st.commit_edit(&current, updated)?))
}

async fn validate_meeting(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ValidationReport>> {
    let meeting = st.with_store(|s| s.load_meeting(&id))?;
    Ok(Json(validate(&meeting, &st.grammar())))
}

async fn suggestions(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    let meeting = st.with_store(|s| s.load_meeting(&id))?;
    let found = suggest_annotations(&meeting, &st.grammar(), &SuggestConfig::default(), &st.analyzer);
    Ok(Json(json!(found)))
}

async fn rebuild_index(State(st): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    let snap = st.rebuild()?;
    Ok(Json(json!({
        "meetings": snap.index.meetings.len(),
        "segments": snap.index.segments.len(),
        "stems": snap.index.stems.len(),
    })))
}

#[derive(Deserialize)]
struct QueryRequest {
    query: String,
}

async fn run_query(State(st): State<Arc<AppState>>, raw: Bytes) -> ApiResult<Json<serde_json::Value>> {
    let req: QueryRequest = body(&raw)?;
    let ast = parse_query(&req.query)?;
    let snap = st.snapshot()?;
    let answer = execute(&ast, &snap.index, &snap.corpus, &st.analyzer)?;
    Ok(Json(json!(answer)))
}

#[derive(Serialize, Deserialize)]
struct GrammarDoc {
    text: String,
}

async fn get_grammar(State(st): State<Arc<AppState>>) -> Json<GrammarDoc> {
    Json(GrammarDoc { text: st.grammar().to_text() })
}

async fn put_grammar(State(st): State<Arc<AppState>>, raw: Bytes) -> ApiResult<Json<GrammarDoc>> {
    let doc: GrammarDoc = body(&raw)?;
    let grammar = GrammarRuleSet::parse(&doc.text).map_err(|e| ApiError::new(ErrorCode::ParseError, e))?;
    st.with_store(|s| s.save_grammar(&grammar))?;
    let text = grammar.to_text();
    *st.grammar.write().unwrap_or_else(PoisonError::into_inner) = grammar;
    Ok(Json(GrammarDoc { text }))
}
