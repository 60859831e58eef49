use std::path::PathBuf;

use crate::anthro::SegmentId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // ---- parsing ----
    #[error("line {line}: malformed header: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid number `{value}`")]
    InvalidNumber { line: usize, value: String },
    #[error("line {line}: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("zero frames")]
    ZeroFrames,
    #[error("unknown unit tag `{0}`")]
    UnknownUnit(String),
    #[error("file declares unit `{found}` but `{expected}` was expected")]
    UnitMismatch { expected: String, found: String },

    // ---- anthropometry / kinematics ----
    #[error("anthropometric table has no entry for {segment} ({sex})")]
    MissingSegmentEntry { segment: String, sex: String },
    #[error("anthropometric table: {0}")]
    InvalidTable(String),
    #[error("invalid subject profile: {0}")]
    InvalidSubject(String),
    #[error("segment definitions: {0}")]
    InvalidDefinitions(String),
    #[error("unknown point `{0}` (neither a marker nor a joint centre)")]
    UnknownPoint(String),
    #[error("marker `{marker}` missing at frame {frame}")]
    MissingMarker { marker: String, frame: usize },
    #[error("degenerate segment basis: {0}")]
    DegenerateBasis(String),
    #[error("coincident points: {0}")]
    CoincidentPoints(String),
    #[error("segment {segment}, frame {frame}: {source}")]
    Segment {
        segment: SegmentId,
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    // ---- signal ----
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("cutoff {cutoff_hz} Hz is at or above the Nyquist frequency {nyquist_hz} Hz")]
    CutoffAboveNyquist { cutoff_hz: f64, nyquist_hz: f64 },
    #[error("invalid filter parameter: {0}")]
    InvalidFilter(String),
    #[error("series too short: need at least {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("series mismatch: {0}")]
    SeriesMismatch(String),

    // ---- events / grf ----
    #[error("{side} foot events do not alternate near frame {frame}")]
    NonAlternating { side: String, frame: usize },
    #[error("invalid double-stance boundary: {0}")]
    InvalidBoundary(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("no complete gait cycle found")]
    NoGaitCycle,
    #[error("empty segment")]
    EmptySegment,

    // ---- pipeline ----
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(source),
        }
    }

    /// Process exit status for the CLI: 2 input/config, 3 no usable gait
    /// data, 4 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoGaitCycle => 3,
            Error::Invariant(_) => 4,
            Error::InFile { source, .. } | Error::Segment { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
