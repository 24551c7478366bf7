use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("net {net} references unknown node `{node}`")]
    UnknownNode { net: String, node: String },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("point ({x}, {y}) lies outside the {width} x {height} region")]
    OutsideRegion { x: f64, y: f64, width: f64, height: f64 },

    #[error("grid side {0} is not supported by the transform kernel (power of two >= 2 required)")]
    UnsupportedGridSize(usize),

    #[error("coefficient order {k} does not fit a {m} x {m} grid (need k <= m - 1)")]
    OrderTooLarge { k: usize, m: usize },

    #[error("non-finite gradient at iteration {iteration}: {detail}")]
    NonFiniteGradient { iteration: usize, detail: String },

    #[error("insufficient row capacity for cell `{0}`")]
    RowCapacity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
