use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("numerical failure in {context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: susy_pert::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical { .. } | CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn numerical(context: impl Into<String>) -> impl FnOnce(susy_pert::Error) -> Self {
        let context = context.into();
        move |source| CliError::Numerical { context, source }
    }
}
