use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("disconnected network: no path from source to sink")]
    DisconnectedNetwork,

    #[error("cyclic network: path enumeration requires an acyclic graph")]
    CyclicNetwork,

    #[error("path explosion: more than {cap} source-sink paths")]
    PathExplosion { cap: usize },

    #[error("unknown edge id {0}")]
    UnknownEdge(usize),

    #[error("invalid flow: {0}")]
    InvalidFlow(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("planner index {index} out of range for {planners} planners")]
    PlannerOutOfRange { index: usize, planners: usize },

    #[error("invalid bottom fraction: {0}")]
    InvalidFraction(String),

    #[error("best-response iteration did not converge after {iterations} sweeps (last iterate: {last})")]
    OracleDiverged { iterations: usize, last: String },

    #[error("invalid assignment from planner {planner} at stage {stage}: {reason}")]
    InvalidAssignment {
        planner: usize,
        stage: usize,
        reason: String,
    },

    #[error("conflicting defections for planner {planner} at stage {stage}")]
    ConflictingDefections { planner: usize, stage: usize },

    #[error("invalid defection: {0}")]
    InvalidDefection(String),

    #[error("discount factor {0} outside (0,1)")]
    InvalidDiscount(String),

    #[error("tail mode requires a sequence that is eventually {0}")]
    NonStationaryTail(&'static str),

    #[error("subset has zero measure")]
    ZeroMeasure,

    #[error("edge-case or impossible regime: F = {0} is not above 3/4")]
    EdgeCaseRegime(String),

    #[error("edge case unachievable: a planner sends all of its traffic to the bottom path")]
    EdgeCaseUnachievable,

    #[error("redemption requires identified defections")]
    RedemptionRequiresIdentification,

    #[error("strategy requires a two-path network with a constant top path: {0}")]
    NotPigou(String),

    #[error("horizon too short: {0}")]
    HorizonTooShort(String),

    #[error("segment count too small: F + 1/M = {0} is not below 3/4")]
    SegmentCountTooSmall(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{}", match .line { Some(l) => format!("line {l}: {}", .message), None => .message.clone() })]
    Config {
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }
}
