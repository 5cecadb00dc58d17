use thiserror::Error;

use crate::hierarchy::Label;
use crate::router::RouteTrace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("site list is empty")]
    Empty,
    #[error("site at index {index} has id {id}; ids must be 0..n-1 in order")]
    NonContiguousIds { index: usize, id: usize },
    #[error("site {id} has a non-finite coordinate")]
    NonFinite { id: usize },
    #[error("unit disk graph is disconnected: sites {a} and {b} lie in different components")]
    Disconnected { a: usize, b: usize },
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Error)]
pub enum WspdError {
    #[error("no pair represents ({s}, {t})")]
    NotRepresented { s: usize, t: usize },
    #[error("{count} pairs represent ({s}, {t})")]
    MultiplyRepresented { s: usize, t: usize, count: usize },
    #[error("a site is never represented together with itself")]
    Diagonal,
}

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("diameter {diameter} is below 2; use the direct next-hop scheme")]
    SmallDiameter { diameter: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("site {to} is unreachable from site {from}")]
    Unreachable { from: usize, to: usize },
    #[error("unknown scheme kind `{0}`")]
    UnknownKind(String),
    #[error("malformed scheme data: {0}")]
    Format(String),
}

impl From<serde_json::Error> for SchemeError {
    fn from(e: serde_json::Error) -> Self {
        SchemeError::Format(e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("label {0} does not name a site")]
    UnknownLabel(Label),
    #[error("site {0} does not exist")]
    UnknownSite(usize),
    #[error("global entry at label {site} matches target {target} but stores no middle site")]
    MissingMiddle { site: Label, target: Label },
    #[error("local search at label {site} ran out of levels")]
    TourExhausted { site: Label },
    #[error("hop from site {from} to site {to} is not a unit disk edge")]
    IllegalHop { from: usize, to: usize },
    #[error("sites {s} and {t} lie in different components")]
    CrossComponent { s: usize, t: usize },
    #[error("step limit {limit} exceeded after {} hops", .trace.path.len().saturating_sub(1))]
    StepLimit { limit: usize, trace: Box<RouteTrace> },
}
