//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories reported by problem construction, meshing and solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A mesh is malformed or incompatible with the requested scheme.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// A scheme was handed data it cannot work with.
    #[error("scheme error: {0}")]
    Scheme(String),

    /// A coefficient or datum evaluated to a non-finite value.
    #[error("non-finite {what} at (x, t) = ({x}, {t})")]
    Evaluation {
        /// Name of the offending datum.
        what: &'static str,
        /// Space coordinate of the evaluation.
        x: f64,
        /// Time coordinate of the evaluation.
        t: f64,
    },

    /// A characteristic could not be integrated.
    #[error("characteristic integration failed at (x, t) = ({x}, {t})")]
    Integration {
        /// Space coordinate where integration broke down.
        x: f64,
        /// Time coordinate where integration broke down.
        t: f64,
    },

    /// A query fell outside the rectangle covered by an interpolant.
    #[error("query ({x}, {t}) lies outside the interpolation rectangle")]
    Extrapolation {
        /// Space coordinate of the query.
        x: f64,
        /// Time coordinate of the query.
        t: f64,
    },

    /// A sub-solve of a composite pipeline failed.
    #[error("component {component}: {source}")]
    Component {
        /// Name of the failing component.
        component: &'static str,
        /// Underlying failure.
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn mesh(msg: impl Into<String>) -> Self {
        Error::Mesh(msg.into())
    }

    pub(crate) fn scheme(msg: impl Into<String>) -> Self {
        Error::Scheme(msg.into())
    }

    /// Wraps `self` with the name of the pipeline component that produced it.
    pub fn in_component(self, component: &'static str) -> Self {
        Error::Component {
            component,
            source: Box::new(self),
        }
    }

    /// True for failures caused by non-finite arithmetic rather than bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Evaluation { .. } | Error::Integration { .. } => true,
            Error::Component { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
