use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("circuit has {circuit} qubits but the state has {state}")]
    QubitCountMismatch { circuit: usize, state: usize },

    #[error("circuit contains measurement or reset but no random stream was supplied")]
    MissingRng,

    #[error("circuit is not invertible: contains {0}")]
    NonUnitary(&'static str),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("empty qubit range")]
    EmptyRange,

    #[error("invalid register map: {0}")]
    Registers(String),

    #[error("{what} exceeds the simulator budget of {max} qubits (needs {needed})")]
    QubitBudget {
        what: &'static str,
        needed: usize,
        max: usize,
    },

    #[error("material `{name}`: {reason}")]
    Material { name: String, reason: String },

    #[error("cell ({x}, {y}) is outside the {width}x{height} grid")]
    CellOutOfGrid {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid source: {0}")]
    Source(String),

    #[error("invalid detector: {0}")]
    Detector(String),

    #[error("coin amplitude {value} for cell ({x}, {y}) outside [0, 1] after scaling")]
    CoinAmplitude { x: usize, y: usize, value: f64 },

    #[error("ancilla qubit {0} is not cleared")]
    AncillaNotCleared(usize),

    #[error("detector unreachable: good-state probability is zero after {steps} steps")]
    DetectorUnreachable { steps: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e}); the scattering kernel has spectral radius 1 when no cell absorbs")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("flux map is identically zero")]
    ZeroMap,

    #[error("coordinate {coordinate} cm outside the domain [0, {extent}] cm")]
    CoordinateOutOfDomain { coordinate: f64, extent: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error("solvers failed: {}", .0.join(", "))]
    SolversFailed(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
