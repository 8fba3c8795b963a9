use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop ({0}, {0}) is not allowed in a simple graph")]
    SelfLoop(usize),

    #[error("vertex id {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("seed set must be nonempty")]
    EmptySeedSet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The inputs are well-formed but outside the domain where the quantity
    /// is defined (parity violations, `beta * delta >= 1`, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what}: {actual} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        actual: usize,
        cap: usize,
    },

    /// `line` is 1-based; 0 when the problem is not tied to one line.
    #[error("parse error{}: {msg}", at_line(*.line))]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" on line {line}")
    }
}
