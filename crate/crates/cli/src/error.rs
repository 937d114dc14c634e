use std::path::PathBuf;

use serde::Serialize;

/// Exit codes.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{}: {1}", .0.display())]
    Io(PathBuf, std::io::Error),

    #[error("{0}")]
    Core(#[from] cylris::Error),

    #[error("{0}")]
    Numerical(String),
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    kind: &'a str,
    code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(..) => "io",
            CliError::Core(cylris::Error::BudgetExceeded { .. }) => "budget",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(cylris::Error::Dimension { .. }) => "numerical",
            CliError::Core(cylris::Error::Io { .. }) => "io",
            CliError::Core(_) => "config",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "budget" => EXIT_BUDGET,
            "numerical" => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }

    /// Single-line JSON for standard error.
    pub fn to_json_line(&self) -> String {
        let msg = self.to_string().replace('\n', " ");
        serde_json::to_string(&ErrorLine {
            error: &msg,
            kind: self.kind(),
            code: self.exit_code(),
        })
        .expect("error line serializes")
    }
}
