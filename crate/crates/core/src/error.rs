use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IlcError {
    #[error("tiles {first} and {second} overlap by {depth:.3e} (tolerance {tol:.1e})")]
    Overlap {
        first: usize,
        second: usize,
        depth: f64,
        tol: f64,
    },
    #[error("patch is not connected ({components} components)")]
    Disconnected { components: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("labels belong to different systems: {0} vs {1}")]
    SystemMismatch(&'static str, &'static str),
    #[error("window too small: {0}")]
    InsufficientWindow(String),
    #[error("value {value} outside allowed range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("size limit exceeded: {requested} > {limit}")]
    SizeLimit { requested: u64, limit: u64 },
    #[error("label not allowed: {0}")]
    LabelNotAllowed(String),
    #[error("quadrature did not converge on [{lo}, {hi}]")]
    QuadratureFailure { lo: f64, hi: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("sample budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl IlcError {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            IlcError::InsufficientWindow(_) | IlcError::SizeLimit { .. } | IlcError::BudgetExhausted(_) => 3,
            IlcError::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for IlcError {
    fn from(e: std::io::Error) -> Self {
        IlcError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, IlcError>;
