use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{message}")]
    Numeric { message: String, last_good: Option<LastGood> },
}

/// Last state reached before a numeric event.
#[derive(Clone, Debug, PartialEq)]
pub struct LastGood {
    pub time: f64,
    pub state: Vec<(String, f64)>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Verify(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }

    /// Full message for the error stream.
    pub fn render(&self) -> String {
        match self {
            CliError::Numeric { message, last_good: Some(g) } => {
                let state: Vec<String> = g.state.iter().map(|(k, v)| format!("{k}={v:.16e}")).collect();
                format!("{message}\nlast good state at t = {:.16e}: {}", g.time, state.join(","))
            }
            other => other.to_string(),
        }
    }
}
