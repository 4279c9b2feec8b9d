use thiserror::Error;

/// Errors raised while building or querying the model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} minutes is not representable on the 1/1000-minute grid")]
    Unrepresentable(f64),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("unknown route `{0}`")]
    UnknownRoute(String),

    #[error("unknown demand {0}")]
    UnknownDemand(u64),

    #[error("duplicate {kind} id `{id}`")]
    Duplicate { kind: &'static str, id: String },

    #[error("edge `{edge}`: travel-time bounds must satisfy 0 < min <= max (got {min} .. {max})")]
    BadTravelTime {
        edge: String,
        min: String,
        max: String,
    },

    #[error("node `{0}` has negative service time")]
    BadServiceTime(String),

    #[error("graph contains a cycle through node `{0}`")]
    Cyclic(String),

    #[error("node `{0}` is both a source and a sink (isolated)")]
    IsolatedNode(String),

    #[error("route `{0}` is empty")]
    EmptyRoute(String),

    #[error("route `{route}` is disconnected between edges `{from}` and `{to}`")]
    DisconnectedRoute {
        route: String,
        from: String,
        to: String,
    },

    #[error("route `{route}` visits node `{node}` twice")]
    RepeatedNode { route: String, node: String },

    #[error("node `{node}` is landed at by route `{route}` but has no capacity")]
    MissingCapacity { node: String, route: String },

    #[error("route position {position} out of range 1..={len}")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("departure from route position {0} is not known yet")]
    UnknownDeparture(usize),

    #[error("realized arrivals of demand {0} are not monotone along its route")]
    NonMonotoneArrivals(u64),

    #[error("network is not a star: {0}")]
    NotAStar(String),

    #[error("flow window must have positive length")]
    EmptyWindow,

    #[error("no bottleneck: {0}")]
    NoBottleneck(String),

    #[error("oracle supports at most {max} demands, got {got}")]
    InstanceTooLarge { max: usize, got: usize },

    #[error("linear program: {0}")]
    Lp(String),

    #[error("period must be positive")]
    BadPeriod,

    #[error("json: {0}")]
    Json(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
