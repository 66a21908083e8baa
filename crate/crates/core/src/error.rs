use thiserror::Error;

/// Errors raised while configuring or running a simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("task tree is not a tree: {0}")]
    Structure(String),

    #[error("non-finite motion for drone {drone} at tick {tick}: {detail}")]
    NonFinite { drone: usize, tick: u64, detail: String },

    #[error("episode seed {seed} ({controller}) aborted: {source}")]
    Episode {
        seed: u64,
        controller: String,
        #[source]
        source: Box<SimError>,
    },
}

pub type Result<T> = std::result::Result<T, SimError>;
