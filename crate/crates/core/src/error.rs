use thiserror::Error;

/// Which of the two mirror spot-size radicands went non-positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Radicand {
    /// ω₁⁴ expression (spot on M1).
    Mirror1,
    /// ω₂⁴ expression (spot on M2).
    Mirror2,
}

impl std::fmt::Display for Radicand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Radicand::Mirror1 => f.write_str("omega1^4"),
            Radicand::Mirror2 => f.write_str("omega2^4"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid optical element: {0}")]
    InvalidElement(String),

    #[error("invalid geometry: {field}: {reason}")]
    InvalidGeometry { field: &'static str, reason: String },

    #[error("cannot compose an empty element list")]
    EmptyChain,

    #[error("singular configuration: B1 = 0, C1 is undefined")]
    SingularConfiguration,

    #[error("unstable cavity: radicand {radicand} = {value:e} is not positive")]
    UnstableCavity { radicand: Radicand, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no stable distance in (0, {d_hi}] m")]
    NoStableRegion { d_hi: f64 },

    #[error("cavity unstable at d = {d} m inside the requested range")]
    UnstableInRange { d: f64 },

    #[error("infeasible search: {0}")]
    Infeasible(String),

    #[error("calibration anchor infeasible: required transmission loss {required_loss:e} is not positive")]
    AnchorInfeasible { required_loss: f64 },

    #[error("unknown figure id `{0}` (expected fig6..fig13)")]
    UnknownFigure(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config validation error at {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("unit error at {field}: {reason}")]
    Unit { field: String, reason: String },

    #[error("unknown config key(s): {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for failed searches, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoStableRegion { .. } | Error::Infeasible(_) | Error::AnchorInfeasible { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
