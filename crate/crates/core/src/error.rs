use thiserror::Error;

use crate::detection::GeometryError;
use crate::feedback::FeedbackError;
use crate::master::MasterError;
use crate::optics::PermittivityError;
use crate::rates::RateError;
use crate::scenario::ScenarioError;
use crate::thermal::ThermalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Instability,
    UnderSampled,
    Other,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Other => 1,
            ErrorClass::Validation => 2,
            ErrorClass::Instability => 3,
            ErrorClass::UnderSampled => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Validation => "validation",
            ErrorClass::Instability => "instability",
            ErrorClass::UnderSampled => "under_sampled",
            ErrorClass::Other => "error",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("scenario failed validation: {0}")]
    Invalid(String),
    #[error(transparent)]
    Permittivity(#[from] PermittivityError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Thermal(#[from] ThermalError),
    #[error(transparent)]
    Rates(#[from] RateError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use crate::oracle::OracleError;
        match self {
            Error::Scenario(_)
            | Error::Invalid(_)
            | Error::Permittivity(_)
            | Error::Geometry(_)
            | Error::Usage(_) => ErrorClass::Validation,
            Error::Rates(RateError::Unstable { .. })
            | Error::Master(MasterError::Unstable)
            | Error::Feedback(FeedbackError::Unstable { .. })
            | Error::Thermal(ThermalError::Overheats { .. }) => ErrorClass::Instability,
            Error::Feedback(FeedbackError::Conditions(_) | FeedbackError::Rule { .. }) => {
                ErrorClass::Validation
            }
            Error::Oracle(OracleError::UnderSampled(_)) => ErrorClass::UnderSampled,
            Error::Oracle(OracleError::Unstable { .. } | OracleError::NoRelaxation(_)) => ErrorClass::Instability,
            _ => ErrorClass::Other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
