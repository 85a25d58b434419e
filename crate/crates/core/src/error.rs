use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("dual association needs at least 2 base stations, topology has {num_bs}")]
    DualInfeasible { num_bs: usize },

    #[error("association input is empty or malformed: {0}")]
    Association(String),

    #[error("MTs starved of throughput (x_u <= 0): {0:?}")]
    StarvedMts(Vec<usize>),

    #[error("Jain index undefined: all throughputs are zero")]
    AllZeroThroughput,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("failed to parse config: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
