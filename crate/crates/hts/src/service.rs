//! HTTP heterogeneity service over a frozen store.
//!
//! Every route is served both under `/v1` and at the root. Errors are JSON
//! objects `{"error": {"code": ..., "message": ...}}`.

use std::collections::{BTreeMap, BTreeSet};
use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use crosswalk_core::concordance::{
    ConcordanceKey, ConcordanceStats, Mapping, MappingFilter, RelationType, Relevance, Store, StoreError,
};
use crosswalk_core::kos::{parse_concept, VocabId};
use crosswalk_core::query::{
    expand_append, parse_query, render_query, translate_replace, AppendOptions, ExpandError, ExpansionResult,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownVocabulary(_) => ApiError::not_found("unknown_vocabulary", e.to_string()),
            StoreError::UnknownConcordance(_) | StoreError::MissingConcordance(_) => {
                ApiError::not_found("unknown_concordance", e.to_string())
            }
            StoreError::AmbiguousConcordance(_) => ApiError::bad_request("ambiguous_concordance", e.to_string()),
            other => ApiError::unprocessable("invalid_request", other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type AppState = Arc<Store>;

/// Query-string parameters after checking names against `allowed`.
fn params(
    raw: Result<Query<Vec<(String, String)>>, QueryRejection>,
    allowed: &[&str],
) -> Result<BTreeMap<String, String>, ApiError> {
    let Query(pairs) = raw.map_err(|e| ApiError::bad_request("invalid_query_string", e.body_text()))?;
    let mut out = BTreeMap::new();
    for (k, v) in pairs {
        if !allowed.contains(&k.as_str()) {
            return Err(ApiError::bad_request("unknown_parameter", format!("unknown parameter {k:?}")));
        }
        if out.insert(k.clone(), v).is_some() {
            return Err(ApiError::bad_request("duplicate_parameter", format!("parameter {k:?} given twice")));
        }
    }
    Ok(out)
}

fn known_vocab(store: &Store, id: &str) -> Result<VocabId, ApiError> {
    Ok(store.vocabulary(id)?.clone())
}

#[derive(Serialize)]
struct VocabularyView {
    id: String,
    display_name: Option<String>,
    language: Option<String>,
    kind: Option<String>,
}

async fn vocabularies(State(store): State<AppState>, raw: Result<Query<Vec<(String, String)>>, QueryRejection>) -> ApiResult<serde_json::Value> {
    params(raw, &[])?;
    let list: Vec<VocabularyView> = store
        .vocabularies()
        .map(|id| {
            let meta = store.registry().get(id.as_str());
            VocabularyView {
                id: id.to_string(),
                display_name: meta.map(|v| v.display_name.clone()),
                language: meta.map(|v| v.language.clone()),
                kind: meta.map(|v| v.kind.as_str().to_string()),
            }
        })
        .collect();
    Ok(Json(json!({ "vocabularies": list })))
}

async fn concordances(State(store): State<AppState>, raw: Result<Query<Vec<(String, String)>>, QueryRejection>) -> ApiResult<serde_json::Value> {
    params(raw, &[])?;
    let list: Vec<serde_json::Value> = store
        .concordances()
        .iter()
        .map(|c| {
            json!({
                "name": c.key().to_string(),
                "source": c.source(),
                "target": c.target(),
                "mappings": c.len(),
                "metadata": c.metadata,
            })
        })
        .collect();
    Ok(Json(json!({ "concordances": list })))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingView {
    pub start_vocab: String,
    pub start_concept: String,
    pub start_canonical: String,
    pub relation: RelationType,
    pub end_vocab: String,
    pub end_concept: Option<String>,
    pub end_canonical: Option<String>,
    pub relevance: Relevance,
    pub provenance: String,
}

impl From<&Mapping> for MappingView {
    fn from(m: &Mapping) -> Self {
        MappingView {
            start_vocab: m.source().to_string(),
            start_concept: m.start().display_text(),
            start_canonical: m.start().canonical(),
            relation: m.relation(),
            end_vocab: m.target().to_string(),
            end_concept: m.end().map(|e| e.display_text()),
            end_canonical: m.end().map(|e| e.canonical()),
            relevance: m.relevance(),
            provenance: m.provenance().as_str().to_string(),
        }
    }
}

fn parse_relation(text: &str) -> Result<RelationType, ApiError> {
    RelationType::ALL
        .into_iter()
        .find(|r| r.symbol() == text || r.name().eq_ignore_ascii_case(text))
        .ok_or_else(|| ApiError::bad_request("invalid_parameter", format!("unknown relation {text:?}")))
}

async fn mappings(State(store): State<AppState>, raw: Result<Query<Vec<(String, String)>>, QueryRejection>) -> ApiResult<serde_json::Value> {
    let p = params(raw, &["start_vocab", "term", "end_vocab", "relation", "min_relevance"])?;
    let required = |name: &str| {
        p.get(name)
            .ok_or_else(|| ApiError::bad_request("missing_parameter", format!("parameter {name:?} is required")))
    };
    let start_vocab = known_vocab(&store, required("start_vocab")?)?;
    let term = required("term")?;
    let concept = parse_concept(&start_vocab, term)
        .map_err(|e| ApiError::bad_request("invalid_parameter", format!("term: {e}")))?;
    let mut filter = MappingFilter::default();
    if let Some(end) = p.get("end_vocab") {
        filter = filter.target(known_vocab(&store, end)?);
    }
    if let Some(rel) = p.get("relation") {
        filter = filter.relations([parse_relation(rel)?]);
    }
    if let Some(min) = p.get("min_relevance") {
        let r: Relevance = min
            .parse()
            .map_err(|_| ApiError::bad_request("invalid_parameter", format!("unknown relevance {min:?}")))?;
        filter = filter.min_relevance(r);
    }
    let found: Vec<MappingView> = store
        .query_mappings(start_vocab.as_str(), &concept.key(), &filter)?
        .into_iter()
        .map(MappingView::from)
        .collect();
    Ok(Json(json!({ "mappings": found })))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpandMode {
    Append,
    Replace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandRequest {
    pub query: String,
    pub mode: ExpandMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_vocab: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_vocabs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concordance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedConcept {
    pub vocab: String,
    pub concept: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstitutionView {
    pub term: String,
    pub added: Vec<AddedConcept>,
    /// Always "=": expansion follows Equivalence mappings only.
    pub relation: RelationType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandResponse {
    pub expanded_query: String,
    pub substitutions: Vec<SubstitutionView>,
    pub untranslated: Vec<String>,
}

impl From<&ExpansionResult> for ExpandResponse {
    fn from(r: &ExpansionResult) -> Self {
        ExpandResponse {
            expanded_query: render_query(&r.query.root),
            substitutions: r
                .substitutions
                .iter()
                .map(|s| SubstitutionView {
                    term: s.term.raw().to_string(),
                    added: s
                        .concepts
                        .iter()
                        .map(|c| AddedConcept {
                            vocab: c.concept.vocabulary().to_string(),
                            concept: c.concept.display_text(),
                        })
                        .collect(),
                    relation: RelationType::Equivalence,
                })
                .collect(),
            untranslated: r.untranslated.iter().map(|t| t.raw().to_string()).collect(),
        }
    }
}

/// Runs an expansion request against the store, exactly as the service does.
pub fn expand_request(store: &Store, req: &ExpandRequest) -> Result<ExpansionResult, ApiError> {
    let mut query = parse_query(&req.query).map_err(|e| {
        ApiError::unprocessable("query_syntax", format!("{e}"))
    })?;
    let source = req.source_vocab.as_deref().map(|v| known_vocab(store, v)).transpose()?;
    match req.mode {
        ExpandMode::Append => {
            if req.concordance.is_some() {
                return Err(ApiError::unprocessable("invalid_request", "concordance is only used with mode=replace"));
            }
            let targets = match &req.target_vocabs {
                Some(list) => Some(list.iter().map(|v| known_vocab(store, v)).collect::<Result<Vec<_>, _>>()?),
                None => None,
            };
            let options = AppendOptions { source, targets };
            Ok(expand_append(&query, store, &options))
        }
        ExpandMode::Replace => {
            let name = req
                .concordance
                .as_deref()
                .ok_or_else(|| ApiError::unprocessable("missing_concordance", "mode=replace needs a concordance"))?;
            if req.target_vocabs.is_some() {
                return Err(ApiError::unprocessable(
                    "invalid_request",
                    "target_vocabs is only used with mode=append",
                ));
            }
            let key: ConcordanceKey = store.resolve_concordance(name)?;
            if let Some(v) = source {
                query = query.tagged(v);
            }
            translate_replace(&query, store, &key).map_err(|e| match e {
                ExpandError::UnknownConcordance(_) => ApiError::not_found("unknown_concordance", e.to_string()),
                ExpandError::WrongConcordance { .. } => ApiError::unprocessable("wrong_concordance", e.to_string()),
            })
        }
    }
}

async fn expand(State(store): State<AppState>, body: Result<Json<ExpandRequest>, JsonRejection>) -> ApiResult<ExpandResponse> {
    let Json(req) = body.map_err(|e| ApiError::unprocessable("invalid_body", e.body_text()))?;
    let result = expand_request(&store, &req)?;
    Ok(Json(ExpandResponse::from(&result)))
}

async fn stats(State(store): State<AppState>, raw: Result<Query<Vec<(String, String)>>, QueryRejection>) -> ApiResult<ConcordanceStats> {
    let p = params(raw, &["concordance"])?;
    let key = p.get("concordance").map(|name| store.resolve_concordance(name)).transpose()?;
    Ok(Json(store.stats(key.as_ref())?))
}

async fn health(State(store): State<AppState>) -> Json<serde_json::Value> {
    let vocabularies: BTreeSet<&VocabId> = store.vocabularies().collect();
    Json(json!({
        "status": "ok",
        "vocabularies": vocabularies.len(),
        "concordances": store.concordances().len(),
        "mappings": store.mapping_count(),
    }))
}

async fn not_found() -> ApiError {
    ApiError::not_found("not_found", "no such resource")
}

pub fn router(store: Arc<Store>) -> Router {
    let api = Router::new()
        .route("/vocabularies", get(vocabularies))
        .route("/concordances", get(concordances))
        .route("/mappings", get(mappings))
        .route("/expand", post(expand))
        .route("/stats", get(stats))
        .route("/health", get(health));
    Router::new()
        .nest("/v1", api.clone())
        .merge(api)
        .fallback(not_found)
        .with_state(store)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    store: Arc<Store>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(store)).with_graceful_shutdown(shutdown).await
}
