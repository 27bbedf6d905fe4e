//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("face ({i}, {j}) outside the {m}x{n} face window")]
    FaceOutOfWindow {
        i: usize,
        j: usize,
        m: usize,
        n: usize,
    },

    #[error("height fields live on different windows: {0}x{1} vs {2}x{3}")]
    WindowMismatch(usize, usize, usize, usize),

    #[error("ordered heights required: h(p) = {r} must be below h'(p) = {r_prime}")]
    UnorderedHeights { r: i64, r_prime: i64 },

    #[error("vertex configuration ({i1},{j1};{i2},{j2}) does not conserve arrows")]
    NonConserving { i1: u8, j1: u8, i2: u8, j2: u8 },

    #[error("parameter {name} = {value} outside its admissible range")]
    ParamRange { name: &'static str, value: f64 },

    #[error("enumeration guard exceeded: M*N = {mn} > {guard}")]
    EnumerationGuard { mn: usize, guard: usize },

    #[error("equilibrium solver did not converge: {0}")]
    NoConvergence(String),

    #[error("unsupported integral identity: kind {kind} with n = {n}")]
    UnsupportedIdentity { kind: &'static str, n: u32 },

    #[error("sup attained at the edge of the y grid at s = {s}; extend the grid")]
    ArgmaxAtEdge { s: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
