use std::path::PathBuf;

use crate::specalg::SourceId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scenario or run configuration is incomplete or inconsistent.
    #[error("{}", config_message(.scenario, .key, .message))]
    Config {
        scenario: Option<String>,
        key: Option<String>,
        message: String,
    },

    /// A physical parameter is outside the domain of the formula using it.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("frequencies in normalized and SI units cannot be mixed")]
    UnitsMismatch,

    #[error("noise source `{0}` is not registered")]
    UnresolvedSource(SourceId),

    #[error("singular dynamics at omega = {omega:e} in scenario `{scenario}`: {detail}")]
    SingularDynamics {
        omega: f64,
        scenario: String,
        detail: String,
    },

    #[error("degenerate homodyne readout: sin(theta) = 0 for theta = {theta}")]
    DegenerateReadout { theta: f64 },

    #[error("numeric conditioning failure at omega = {omega:e}: {detail}")]
    Numeric { omega: f64, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed budget document: {0}")]
    Json(#[from] serde_json::Error),
}

fn config_message(scenario: &Option<String>, key: &Option<String>, message: &str) -> String {
    let mut out = String::from("config error");
    if let Some(s) = scenario {
        out.push_str(&format!(" in scenario `{s}`"));
    }
    if let Some(k) = key {
        out.push_str(&format!(" at key `{k}`"));
    }
    out.push_str(": ");
    out.push_str(message);
    out
}

impl Error {
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            scenario: None,
            key: None,
            message: message.into(),
        }
    }

    pub fn config_key(
        scenario: Option<&str>,
        key: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Config {
            scenario: scenario.map(str::to_owned),
            key: Some(key.into()),
            message: message.into(),
        }
    }

    /// Attaches a scenario name to a configuration error that lacks one.
    pub fn in_scenario(self, name: &str) -> Self {
        match self {
            Error::Config {
                scenario: None,
                key,
                message,
            } => Error::Config {
                scenario: Some(name.to_owned()),
                key,
                message,
            },
            Error::SingularDynamics { omega, detail, .. } => Error::SingularDynamics {
                omega,
                scenario: name.to_owned(),
                detail,
            },
            other => other,
        }
    }

    /// Process exit code: 2 configuration, 3 numeric, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::Domain(_)
            | Error::UnitsMismatch
            | Error::UnresolvedSource(_)
            | Error::Json(_) => 2,
            Error::SingularDynamics { .. }
            | Error::DegenerateReadout { .. }
            | Error::Numeric { .. } => 3,
            Error::Io { .. } => 4,
        }
    }
}
