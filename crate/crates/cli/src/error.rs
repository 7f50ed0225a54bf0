use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant { invariant: String, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("computation failed: {0}")]
    Core(#[from] subweibull_core::Error),
    #[error("plot: {0}")]
    Plot(String),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }

    pub fn invariant(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        SimError::Invariant { invariant: invariant.into(), detail: detail.into() }
    }

    /// 2 config, 3 invariant or computation, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::ConfigLine { .. } | SimError::Config(_) => 2,
            SimError::Invariant { .. } | SimError::Core(_) | SimError::Plot(_) => 3,
            SimError::Io { .. } => 4,
        }
    }
}

pub type SimResult<T> = std::result::Result<T, SimError>;
