#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("model/corpus mismatch: {0}")]
    Mismatch(String),

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] wordpixel::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}
