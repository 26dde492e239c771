use thiserror::Error;

use crate::fock::ModeId;

/// Errors raised by state construction, element application, measurement and
/// protocol execution.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error("mode {0} appears in both operands")]
    ModeCollision(ModeId),
    #[error("mode {0} is not in the state's registry")]
    UnknownMode(ModeId),
    #[error("mode {0} is listed more than once")]
    DuplicateMode(ModeId),
    #[error("spatial label `{0}` is used more than once")]
    DuplicateLabel(String),
    #[error("mode registries differ")]
    RegistryMismatch,
    #[error("matrix is {rows}x{cols} but the map has {codomain} output and {domain} input modes")]
    MatrixShape { rows: usize, cols: usize, domain: usize, codomain: usize },
    #[error("map is not an isometry (max deviation {deviation:.3e})")]
    NotIsometric { deviation: f64 },
    #[error("state holds {total} photons, above the cap of {cap}")]
    PhotonCapExceeded { total: u32, cap: u32 },
    #[error("invalid mode string `{0}` (expected `label:H` or `label:V`)")]
    ParseMode(String),
    #[error("empty mode list")]
    EmptyModeList,
    #[error("detector `{0}` is listed more than once")]
    DuplicateDetector(String),
    #[error("pattern {0} belongs to more than one class")]
    OverlappingClasses(String),
    #[error("watched and output labels are both `{0}`")]
    QndSameLabel(String),
    #[error("QND outcome does not act as a scaled unitary on the watched photon")]
    QndNotUnitary,
    #[error("{0}")]
    InvalidParameter(String),
    #[error("input registry does not match the {0} circuit")]
    WrongRegistry(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
