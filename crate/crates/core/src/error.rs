use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown gate kind `{name}`")]
    UnknownGate { line: usize, name: String },
    #[error("line {line}: qubit index {qubit} out of range for {n} qubits")]
    QubitOutOfRange { line: usize, qubit: usize, n: usize },
    #[error("line {line}: explicit matrix is not unitary (deviation {deviation:e})")]
    NonUnitary { line: usize, deviation: f64 },
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),
    #[error("gate set is not closed under dependency: gate {gate} depends on gate {missing}")]
    NotDependencyClosed { gate: usize, missing: usize },
    #[error("invalid output specification: {0}")]
    OutputSpec(String),
    #[error("contraction tree does not match network: {0}")]
    TreeMismatch(String),
    #[error("memory budget exceeded: needs {needed} bytes, budget is {budget} bytes")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("memory budget of {budget} bytes is unreachable by slicing: an unsliceable tensor needs {needed} bytes")]
    BudgetUnreachable { needed: u64, budget: u64 },
    #[error("slice assignment does not match the declared sliced legs: {0}")]
    SliceMismatch(String),
    #[error("partially sliced vertices violate the lightcone condition: vertex {inner} lies in the lightcone of vertex {outer}")]
    LightconeViolation { inner: usize, outer: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("oracle limit: {n} qubits exceeds the cap of {cap}")]
    OracleCap { n: usize, cap: usize },
    #[error("numerical invariant violated: {0}")]
    Numerical(String),
    #[error("malformed {kind} file at line {line}: {message}")]
    Format {
        kind: &'static str,
        line: usize,
        message: String,
    },
}

impl Error {
    /// True for failures that indicate an internal inconsistency rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
