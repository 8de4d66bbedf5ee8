use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown bank `{0}`")]
    UnknownBank(String),

    #[error("bank `{0}` declared more than once")]
    DuplicateBank(String),

    #[error("{field} must be finite and nonnegative, got {value}")]
    NegativeAmount { field: String, value: f64 },

    #[error("{name} = {value} is outside [0, 1]")]
    ParameterRange { name: &'static str, value: f64 },

    #[error("bank `{0}` cannot write a debt contract to itself")]
    SelfDebt(String),

    #[error("CDS {writer} -> {holder} (reference {reference}) uses one bank in two roles")]
    CdsRoleConflict {
        writer: String,
        holder: String,
        reference: String,
    },

    #[error("duplicate {kind} contract {key}")]
    DuplicateContract { kind: &'static str, key: String },

    #[error("recovery vector has {got} entries, network has {expected} banks")]
    LengthMismatch { expected: usize, got: usize },

    #[error("recovery rate {value} at index {index} is not in [0, 1]")]
    RecoveryRange { index: usize, value: f64 },

    #[error("network is degenerate at bank `{0}` (no assets and no liabilities)")]
    DegenerateNetwork(String),

    #[error("operation requires alpha = beta = 1, network has alpha = {alpha}, beta = {beta}")]
    DefaultCostsPresent { alpha: f64, beta: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{what} has {got} free entries, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        got: usize,
        cap: usize,
    },

    #[error("banks {0:?} have cyclic dependencies")]
    CyclicDependency(Vec<String>),

    #[error("fragment has no input handle `{0}`")]
    UnknownHandle(String),

    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("recovery vector is not {eps}-approximately clearing: {detail}")]
    NotApproxClearing { eps: f64, detail: String },

    #[error("{0}")]
    Parse(String),
}
