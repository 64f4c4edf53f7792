use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("failed to read/write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("instance schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("duplicate stop id {id}")]
    DuplicateStop { id: String },
    #[error("unknown stop {id} referenced in {context}")]
    UnknownStop { id: String, context: String },
    #[error("invalid distance entry {from}->{to}: {km}")]
    InvalidDistance { from: String, to: String, km: f64 },
    #[error("route {route} has fewer than two stops")]
    RouteTooShort { route: String },
    #[error("route {route}: {reason}")]
    InvalidRoute { route: String, reason: String },
    #[error("route {route}: arrival times must strictly increase (at t={time})")]
    NonIncreasingTimes { route: String, time: i64 },
    #[error("route {route} visits exactly one freight terminal; routes must visit zero or at least two")]
    SingleTerminalRoute { route: String },
    #[error("duplicate request id {id}")]
    DuplicateRequest { id: String },
    #[error("request {request}: earliest start must precede latest completion")]
    EmptyWindow { request: String },
    #[error("request {request}: demand must be positive")]
    NonPositiveDemand { request: String },
    #[error("cost model: {field} must be positive")]
    NonPositiveCost { field: &'static str },
    #[error("cost model: {field} must be nonnegative")]
    NegativeCost { field: &'static str },
    #[error("economic parameter {field} must be positive")]
    NonPositiveEconParam { field: &'static str },
    #[error("parameter {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("instance has freight requests but no terminals")]
    NoTerminals,
}

#[derive(Debug, Error)]
pub enum GtfsError {
    #[error("missing table {name} in {dir}")]
    MissingTable { name: &'static str, dir: String },
    #[error("failed to parse {table} row {row}: {reason}")]
    Parse { table: &'static str, row: usize, reason: String },
    #[error("{table} references unknown {kind} id {id}")]
    Dangling { table: &'static str, kind: &'static str, id: String },
    #[error("csv error in {table}: {source}")]
    Csv {
        table: &'static str,
        #[source]
        source: csv::Error,
    },
    #[error("empty time window")]
    EmptyWindow,
    #[error("capacity distribution must have positive weights")]
    BadDistribution,
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("generator config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("route {route} visits exactly one freight terminal; cannot contract segments")]
    SingleTerminalRoute { route: String },
    #[error("vehicle arc {arc} lies between terminals but has no segment image")]
    MissingSegment { arc: usize },
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("variable {index}: lower bound exceeds upper bound")]
    InconsistentBounds { index: usize },
    #[error("constraint {row} references unknown variable {var}")]
    UnknownVariable { row: usize, var: usize },
    #[error("objective coefficient of variable {index} is not finite")]
    NonFiniteObjective { index: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("lp failure in {context}: {source}")]
    Lp {
        context: String,
        #[source]
        source: LpError,
    },
    #[error("restricted master became {status:?}; dummy columns should keep it feasible")]
    MasterNotOptimal { status: crate::lp::LpStatus },
    #[error("dual {name} on row {row} violates its sign by {violation}")]
    DualSign { name: &'static str, row: usize, violation: f64 },
    #[error("lower bound requested after a partial pricing round")]
    PartialRoundBound,
    #[error("lower bound {lb} exceeds upper bound {ub}")]
    BoundCrossing { lb: f64, ub: f64 },
    #[error("solution failed the feasibility audit: {0}")]
    Audit(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
