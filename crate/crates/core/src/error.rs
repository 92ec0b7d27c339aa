use thiserror::Error;

use crate::expr::EvalError;
use crate::parse::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse {field}: {source}")]
    Parse { field: String, source: ParseError },
    #[error("evaluation failed at {point:?}: {source}")]
    Domain { point: Vec<f64>, source: EvalError },
    #[error("form degree {0} exceeds the spacetime dimension 4")]
    DegreeOverflow(usize),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("parity error: {0}")]
    Parity(String),
    #[error("degenerate level set {0}: gradient vanishes on its zero set")]
    DegenerateSurface(String),
    #[error("transversality failure: {0}")]
    Transversality(String),
    #[error("ill-defined product: level sets {0} and {1} coincide")]
    IllDefinedProduct(String, String),
    #[error("unsupported chart: {0}")]
    UnsupportedChart(String),
    #[error("collapse is singular: best axis condition {0:e} is below threshold")]
    CollapseSingular(f64),
    #[error("root solve failed at node {node:?}: {msg}")]
    RootFailure { node: Vec<f64>, msg: String },
    #[error("mollified ladder does not converge: {0:?}")]
    OracleDivergence([f64; 3]),
    #[error("form is not gauge-reduced: it has components along d{0}")]
    NotReduced(String),
    #[error("orientation error: {0}")]
    Orientation(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),
    #[error("config field `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("check `{check}` failed: {source}")]
    Check { check: String, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(point: &[f64], source: EvalError) -> Error {
        Error::Domain {
            point: point.to_vec(),
            source,
        }
    }

    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Error {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn in_check(self, check: &str) -> Error {
        Error::Check {
            check: check.to_string(),
            source: Box::new(self),
        }
    }
}
