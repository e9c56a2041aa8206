//! HTTP JSON service over a loaded model.
//!
//! * `GET /api/health`
//! * `POST /api/classify` with a stroke body
//! * `POST /api/process` with a stroke body plus optional `smooth`,
//!   `samples_per_segment` and `trace`
//! * `GET /api/config`
//!
//! Bad requests get `400 {"code": ..., "message": ...}`; bodies over 1 MiB
//! get 413.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use depthstroke_core::formats::StrokeDocument;
use depthstroke_core::mlp;
use depthstroke_core::smoothing::{SmoothingMethod, SmoothingSpec, DEFAULT_SAMPLES_PER_SEGMENT};
use depthstroke_core::{Engine, Error, RawStroke, StrokeSample};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::args::{FeatureArgs, ProjectionArgs, ServeArgs};
use crate::commands::{load_pipeline, projection_params};
use crate::error::CliError;
use crate::wire::{ClassifyResponse, ProcessResponse};

pub const MAX_BODY_BYTES: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    pub model_path: PathBuf,
    pub pipeline_config_path: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
    pub projection: ProjectionArgs,
    pub feature: FeatureArgs,
}

impl ServiceConfig {
    pub fn from_args(a: &ServeArgs) -> Self {
        Self {
            host: a.host.clone(),
            port: a.port,
            model_path: a.model.clone(),
            pipeline_config_path: a.config.clone(),
            static_dir: a.static_dir.clone(),
            projection: a.projection,
            feature: a.feature,
        }
    }

    /// Loads the model and settings into an engine.
    pub fn build_engine(&self) -> Result<Engine, CliError> {
        let model = mlp::load_model(&self.model_path)?;
        let have = model.feature_config();
        if self.feature.fft_len.is_some_and(|n| n != have.fft_len)
            || self.feature.features.is_some_and(|n| n != have.n_features)
        {
            return Err(CliError::Validation(format!(
                "feature config mismatch with model {}",
                self.model_path.display()
            )));
        }
        let pipeline = load_pipeline(self.pipeline_config_path.as_deref())?;
        Ok(Engine::new(model, pipeline, projection_params(&self.projection)?)?)
    }
}

/// Builds the router. The engine is shared read-only between requests.
pub fn app(engine: Arc<Engine>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/classify", post(classify))
        .route("/api/process", post(process))
        .route("/api/config", get(config))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(CorsLayer::permissive())
        .with_state(engine);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub fn run_blocking(cfg: ServiceConfig) -> Result<(), CliError> {
    let engine = Arc::new(cfg.build_engine()?);
    let addr: SocketAddr = format!("{}:{}", cfg.host, cfg.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid listen address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io(std::path::Path::new("<runtime>"), e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::io(std::path::Path::new(&addr.to_string()), e))?;
        log::info!("listening on http://{addr}");
        axum::serve(listener, app(engine, cfg.static_dir))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::io(std::path::Path::new(&addr.to_string()), e))
    })
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                code,
                message: message.into(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::EmptyStroke => "EMPTY_STROKE",
        Error::TooFewSamples(_) => "TOO_FEW_SAMPLES",
        Error::InvalidSample { .. } => "INVALID_STROKE",
        Error::Malformed { .. } => "MALFORMED_JSON",
        Error::VersionMismatch { .. } => "UNSUPPORTED_VERSION",
        Error::TooFewPoints { .. } => "TOO_FEW_POINTS",
        Error::Stage { .. } => "PROCESSING_FAILED",
        _ => "INVALID_REQUEST",
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::bad_request(error_code(&e), e.to_string())
    }
}

fn read_body(body: Result<Bytes, BytesRejection>) -> Result<Bytes, ApiError> {
    body.map_err(|rejection| {
        let status = rejection.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE {
            "PAYLOAD_TOO_LARGE"
        } else {
            "BAD_BODY"
        };
        ApiError {
            status,
            body: ErrorBody {
                code,
                message: rejection.body_text(),
            },
        }
    })
}

fn parse<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request("MALFORMED_JSON", e.to_string()))
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    model_topology: Vec<usize>,
}

async fn health(State(engine): State<Arc<Engine>>) -> Json<Health> {
    Json(Health {
        status: "ok",
        model_topology: engine.model().topology().sizes().to_vec(),
    })
}

async fn config(State(engine): State<Arc<Engine>>) -> Response {
    Json(*engine.pipeline()).into_response()
}

async fn classify(State(engine): State<Arc<Engine>>, body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let bytes = read_body(body)?;
    let stroke = parse::<StrokeDocument>(&bytes)?.into_stroke()?;
    let c = engine.classify(&stroke)?;
    Ok(Json(ClassifyResponse::from(&c)).into_response())
}

fn default_version() -> u64 {
    depthstroke_core::formats::STROKE_VERSION
}

#[derive(Debug, Deserialize)]
struct ProcessRequest {
    #[serde(default = "default_version")]
    version: u64,
    samples: Vec<StrokeSample>,
    #[serde(default)]
    smooth: Option<String>,
    #[serde(default)]
    samples_per_segment: Option<usize>,
    #[serde(default)]
    trace: bool,
}

fn smoothing_spec(req: &ProcessRequest) -> Result<Option<SmoothingSpec>, ApiError> {
    let samples = req.samples_per_segment.unwrap_or(DEFAULT_SAMPLES_PER_SEGMENT);
    if samples == 0 {
        return Err(ApiError::bad_request("INVALID_SMOOTHING", "samples_per_segment must be at least 1"));
    }
    match &req.smooth {
        None => Ok(None),
        Some(name) => {
            let method: SmoothingMethod = name
                .parse()
                .map_err(|e: Error| ApiError::bad_request("INVALID_SMOOTHING", e.to_string()))?;
            Ok(Some(SmoothingSpec {
                method,
                samples_per_segment: samples,
            }))
        }
    }
}

async fn process(State(engine): State<Arc<Engine>>, body: Result<Bytes, BytesRejection>) -> Result<Response, ApiError> {
    let bytes = read_body(body)?;
    let req: ProcessRequest = parse(&bytes)?;
    let spec = smoothing_spec(&req)?;
    let stroke: RawStroke = StrokeDocument {
        version: req.version,
        samples: req.samples,
    }
    .into_stroke()?;
    let (classification, result) = engine.process(&stroke, spec)?;
    let response = ProcessResponse::new(Some(classification.scores), &result, req.trace);
    Ok(Json(response).into_response())
}
