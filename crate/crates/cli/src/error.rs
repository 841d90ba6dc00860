use std::path::{Path, PathBuf};

/// Failure classes of a run, each mapped to a distinct process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(cournot_mfg::Error),
}

impl RunError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io { path: path.to_path_buf(), source }
    }

    /// 1 for anything the caller can fix by changing inputs, 2 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<cournot_mfg::Error> for RunError {
    fn from(e: cournot_mfg::Error) -> Self {
        if e.is_numerical() {
            RunError::Numerical(e)
        } else {
            RunError::Config(e.to_string())
        }
    }
}
