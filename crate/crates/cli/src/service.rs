//! Elicitation sessions over HTTP.
//!
//! [`Registry`] holds the sessions and does all the work synchronously so
//! the terminal loop and tests can drive it directly; [`router`] maps it
//! onto the five endpoints.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use belief_forge_core::elicitation::{Answer, HistoryEntry};
use belief_forge_core::value::render;
use belief_forge_core::{
    parse_rational, CompletionOptions, ElicitationSession, Error as CoreError, Frame, KnownBeliefs,
    SessionState, Subset,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{
    parse_spec, resolve, to_canonical, verdict_tag, ConditionEntry, DocError, Exact,
    ReportDocument, ResultDocument, SpecDocument,
};
use crate::journal::{Journal, JournalError, JournalEvent};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    NotFound(String),

    #[error("no question is pending; the session is {0}")]
    NoPendingQuestion(&'static str),

    #[error("the pending question is {pending}, not {got}")]
    WrongQuestion { pending: String, got: String },

    #[error("{reason}")]
    Rejected {
        reason: String,
        pending: Vec<String>,
        low: Exact,
        high: Exact,
    },

    #[error("the session is {0}; no result is available")]
    NotCompleted(&'static str),

    #[error(transparent)]
    Document(#[from] DocError),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Journal(#[from] JournalError),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::NoPendingQuestion(_)
            | ServiceError::WrongQuestion { .. }
            | ServiceError::NotCompleted(_) => StatusCode::CONFLICT,
            ServiceError::Rejected { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Document(_) => StatusCode::BAD_REQUEST,
            ServiceError::Core(_) | ServiceError::Journal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    error: String,
    status: u16,
    #[serde(skip_serializing_if = "Option::is_none")]
    pending: Option<&'a [String]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    admissible: Option<Range<'a>>,
}

#[derive(Debug, Serialize)]
struct Range<'a> {
    low: &'a Exact,
    high: &'a Exact,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        let (pending, admissible) = match &self {
            ServiceError::Rejected {
                pending, low, high, ..
            } => (Some(pending.as_slice()), Some(Range { low, high })),
            _ => (None, None),
        };
        let body = ErrorBody {
            error: self.to_string(),
            status: status.as_u16(),
            pending,
            admissible,
        };
        json_response(status, &body)
    }
}

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        to_canonical(body),
    )
        .into_response()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownEntry {
    pub set: Vec<String>,
    pub belief: Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingQuestion {
    pub set: Vec<String>,
    /// Values that keep the known beliefs monotone.
    pub low: Exact,
    pub high: Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryView {
    pub set: Vec<String>,
    /// The value given, or `null` when the expert could not answer.
    pub belief: Option<String>,
    pub accepted: bool,
}

/// Everything a client needs to render a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub frame: Vec<String>,
    /// `pending`, `completed`, `impossible` or `exhausted`.
    pub state: String,
    pub verdict: String,
    pub pending: Option<PendingQuestion>,
    pub impossible_at: Option<Vec<String>>,
    pub known: Vec<KnownEntry>,
    pub failed_conditions: Vec<ConditionEntry>,
    pub history: Vec<HistoryView>,
}

pub fn state_tag(state: &SessionState) -> &'static str {
    match state {
        SessionState::Pending(_) => "pending",
        SessionState::Completed(_) => "completed",
        SessionState::Impossible { .. } => "impossible",
        SessionState::Exhausted { .. } => "exhausted",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    /// Guards against answering a stale question; defaults to the pending one.
    #[serde(default)]
    pub set: Option<Vec<String>>,
    #[serde(default, deserialize_with = "optional_number_text")]
    pub belief: Option<String>,
    /// The expert cannot give a value; finish by stepwise weak focusing.
    #[serde(default)]
    pub unavailable: bool,
}

fn optional_number_text<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(serde_json::Number),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|r| match r {
        Raw::Text(s) => s,
        Raw::Number(n) => n.to_string(),
    }))
}

struct Entry {
    queries: Vec<Subset>,
    session: ElicitationSession,
}

impl Entry {
    fn frame(&self) -> &Frame {
        self.session.known().frame()
    }

    fn view(&self, id: &str) -> SessionView {
        let frame = self.frame();
        let known = self.session.known();
        let report = ReportDocument::new(frame, self.session.report());
        SessionView {
            id: id.to_string(),
            frame: frame.labels().to_vec(),
            state: state_tag(self.session.state()).into(),
            verdict: verdict_tag(self.session.report().verdict).into(),
            pending: self.session.pending().map(|s| {
                let (low, high) = known.admissible_range(s);
                PendingQuestion {
                    set: frame.labels_of(s),
                    low: Exact(low),
                    high: Exact(high),
                }
            }),
            impossible_at: match self.session.state() {
                SessionState::Impossible { at, .. } => Some(frame.labels_of(*at)),
                _ => None,
            },
            known: known
                .constraints()
                .map(|(s, v)| KnownEntry {
                    set: frame.labels_of(s),
                    belief: Exact(v.clone()),
                })
                .collect(),
            failed_conditions: report
                .conditions
                .into_iter()
                .filter(|c| !c.passed)
                .collect(),
            history: self
                .session
                .history()
                .iter()
                .map(|h| history_view(frame, h))
                .collect(),
        }
    }

    fn answer(&mut self, req: &AnswerRequest) -> Result<(Subset, Option<String>), ServiceError> {
        let frame = self.frame().clone();
        let pending = self
            .session
            .pending()
            .ok_or(ServiceError::NoPendingQuestion(state_tag(
                self.session.state(),
            )))?;
        if let Some(labels) = &req.set {
            let got = resolve(&frame, labels, "answer")?;
            if got != pending {
                return Err(ServiceError::WrongQuestion {
                    pending: frame.render(pending),
                    got: frame.render(got),
                });
            }
        }
        if req.unavailable {
            self.session.answer_unavailable()?;
            return Ok((pending, None));
        }
        let text = req.belief.clone().ok_or_else(|| {
            DocError::Invalid("an answer needs `belief` or `unavailable: true`".into())
        })?;
        let value = parse_rational(&text).map_err(DocError::from)?;
        match self.session.answer(value) {
            Ok(_) => Ok((pending, Some(text))),
            Err(
                e @ (CoreError::MonotonicityViolation { .. }
                | CoreError::ValueOutOfRange { .. }
                | CoreError::FixedValue { .. }),
            ) => {
                let (low, high) = self.session.known().admissible_range(pending);
                Err(ServiceError::Rejected {
                    reason: e.to_string(),
                    pending: frame.labels_of(pending),
                    low: Exact(low),
                    high: Exact(high),
                })
            }
            Err(e) => Err(e.into()),
        }
    }

    fn result(&self) -> Result<ResultDocument, ServiceError> {
        match self.session.result() {
            Some(r) => Ok(ResultDocument::new(r, &self.queries)),
            None => Err(ServiceError::NotCompleted(state_tag(self.session.state()))),
        }
    }
}

fn history_view(frame: &Frame, h: &HistoryEntry) -> HistoryView {
    HistoryView {
        set: frame.labels_of(h.set),
        belief: match &h.answer {
            Answer::Value(v) => Some(render(v)),
            Answer::Unavailable => None,
        },
        accepted: h.accepted,
    }
}

/// In-memory sessions with an optional journal. Each session has its own
/// lock, so answers to one session are applied one at a time while other
/// sessions proceed independently.
#[derive(Default)]
pub struct Registry {
    sessions: Mutex<HashMap<String, Arc<Mutex<Entry>>>>,
    journal: Option<Mutex<Journal>>,
    options: CompletionOptions,
}

impl Registry {
    pub fn new(options: CompletionOptions) -> Self {
        Self {
            options,
            ..Self::default()
        }
    }

    /// Replays the events already in `journal`, then appends to it.
    pub fn with_journal(
        options: CompletionOptions,
        journal: Journal,
    ) -> Result<Self, ServiceError> {
        let events = crate::journal::read_events(journal.path())?;
        let registry = Self::replay(options, &events)?;
        Ok(Self {
            journal: Some(Mutex::new(journal)),
            ..registry
        })
    }

    /// Rebuilds the sessions described by `events`.
    pub fn replay(
        options: CompletionOptions,
        events: &[JournalEvent],
    ) -> Result<Self, ServiceError> {
        let registry = Self::new(options);
        for event in events {
            match event {
                JournalEvent::Create { id, spec } => {
                    registry.insert(id.clone(), spec)?;
                }
                JournalEvent::Answer { id, set, belief } => {
                    let req = AnswerRequest {
                        set: Some(set.clone()),
                        belief: belief.clone(),
                        unavailable: belief.is_none(),
                    };
                    match registry.apply_answer(id, &req) {
                        Ok(_) | Err(ServiceError::Rejected { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                JournalEvent::Delete { id } => {
                    registry.sessions.lock().unwrap().remove(id);
                }
            }
        }
        Ok(registry)
    }

    fn log(&self, event: JournalEvent) -> Result<(), ServiceError> {
        if let Some(j) = &self.journal {
            j.lock().unwrap().append(&event)?;
        }
        Ok(())
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ServiceError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    fn insert(&self, id: String, spec: &SpecDocument) -> Result<SessionView, ServiceError> {
        let known: KnownBeliefs = spec.known_beliefs()?;
        let queries = spec.query_sets()?;
        let mut options = self.options;
        if let Some(cap) = spec.options.cap {
            options.vertex_cap = cap;
        }
        let session = ElicitationSession::start(known, options)?;
        let entry = Entry { queries, session };
        let view = entry.view(&id);
        self.sessions
            .lock()
            .unwrap()
            .insert(id, Arc::new(Mutex::new(entry)));
        Ok(view)
    }

    pub fn create(&self, spec: &SpecDocument) -> Result<SessionView, ServiceError> {
        let id = uuid::Uuid::new_v4().to_string();
        let view = self.insert(id.clone(), spec)?;
        self.log(JournalEvent::Create {
            id,
            spec: spec.clone(),
        })?;
        Ok(view)
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ServiceError> {
        Ok(self.get(id)?.lock().unwrap().view(id))
    }

    fn apply_answer(
        &self,
        id: &str,
        req: &AnswerRequest,
    ) -> Result<(SessionView, JournalEvent), ServiceError> {
        let entry = self.get(id)?;
        let mut entry = entry.lock().unwrap();
        let frame = entry.frame().clone();
        let event = |set: Subset, belief: Option<String>| JournalEvent::Answer {
            id: id.to_string(),
            set: frame.labels_of(set),
            belief,
        };
        match entry.answer(req) {
            Ok((set, belief)) => Ok((entry.view(id), event(set, belief))),
            Err(e @ ServiceError::Rejected { .. }) => {
                // rejected answers stay in the session history, so they are logged too
                let pending = entry
                    .session
                    .pending()
                    .expect("rejection keeps the question");
                self.log(event(pending, req.belief.clone()))?;
                Err(e)
            }
            Err(e) => Err(e),
        }
    }

    pub fn answer(&self, id: &str, req: &AnswerRequest) -> Result<SessionView, ServiceError> {
        let (view, event) = self.apply_answer(id, req)?;
        self.log(event)?;
        Ok(view)
    }

    pub fn result(&self, id: &str) -> Result<ResultDocument, ServiceError> {
        self.get(id)?.lock().unwrap().result()
    }

    pub fn delete(&self, id: &str) -> Result<(), ServiceError> {
        self.sessions
            .lock()
            .unwrap()
            .remove(id)
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))?;
        self.log(JournalEvent::Delete { id: id.to_string() })
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.lock().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }
}

type Shared = Arc<Registry>;

pub fn router(registry: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/:id", get(get_session).delete(delete_session))
        .route("/sessions/:id/answer", post(answer_session))
        .route("/sessions/:id/result", get(get_result))
        .with_state(registry)
}

async fn blocking<T, F>(f: F) -> Result<T, ServiceError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .expect("session worker panicked")
}

async fn create_session(State(reg): State<Shared>, body: String) -> Result<Response, ServiceError> {
    let spec = parse_spec(&body)?;
    let view = blocking(move || reg.create(&spec)).await?;
    Ok(json_response(StatusCode::CREATED, &view))
}

async fn get_session(
    State(reg): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    Ok(json_response(StatusCode::OK, &reg.view(&id)?))
}

async fn answer_session(
    State(reg): State<Shared>,
    Path(id): Path<String>,
    body: String,
) -> Result<Response, ServiceError> {
    let req: AnswerRequest = serde_json::from_str(&body).map_err(|e| DocError::Parse {
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    })?;
    let view = blocking(move || reg.answer(&id, &req)).await?;
    Ok(json_response(StatusCode::OK, &view))
}

async fn get_result(
    State(reg): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    Ok(json_response(StatusCode::OK, &reg.result(&id)?))
}

async fn delete_session(
    State(reg): State<Shared>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    reg.delete(&id)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}
