use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// The rotation angle must lie strictly inside (0, 2π).
    #[error("rotation angle {0} must lie strictly inside (0, 2π)")]
    AngleOutOfRange(f64),

    #[error("Bloch vector norm {0} exceeds 1")]
    OutsideBlochBall(f64),

    /// Noiseless dephasing: the QFI grows without bound.
    #[error("optimal step count is unbounded: without dephasing noise the QFI grows forever")]
    UnboundedSteps,

    /// Fully random rotation angle: the state carries no information.
    #[error("optimal step count is zero: with k_dephase = 0 the state carries no information about θ")]
    NoInformation,

    #[error("Fisher information undefined: deterministic outcome with nonzero derivative")]
    UndefinedFisher,

    #[error("quadrature did not converge: entry change {change:e} at {nodes} nodes per dimension")]
    NoConvergence { change: f64, nodes: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}
