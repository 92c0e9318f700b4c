//! Library side of the `graphdyn` command: loading programs and graphs,
//! running them in static or dynamic mode, and the static-vs-dynamic
//! benchmark.

pub mod bench;
pub mod manifest;
pub mod oracle;
pub mod run;

use thiserror::Error;

/// A command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compile(String),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
    #[error("{0}")]
    Mismatch(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Compile(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Runtime(e.into())
            }
        }
    )*};
}

runtime_from!(
    anyhow::Error,
    std::io::Error,
    graphdyn_core::GraphError,
    graphdyn_engine::EngineError,
    graphdyn_partition::PartitionError,
    graphdyn_oracle::OracleError
);

pub type Result<T, E = Failure> = std::result::Result<T, E>;

pub(crate) fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}
