use num_complex::Complex64;
use thiserror::Error;

use crate::boussinesq::WaveState;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sampled history or grid does not cover the requested point.
    #[error("range error: {0}")]
    Range(String),

    /// Floating-point overflow or loss of all significance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Newton iteration for the phase velocity did not converge.
    #[error(
        "no convergence after {iterations} iterations (best c = {best}, residual {best_residual:.3e})"
    )]
    NoConvergence {
        best: Complex64,
        best_residual: f64,
        iterations: usize,
        /// Relative residual after each iteration.
        trace: Vec<f64>,
    },

    /// Invalid solver configuration, detected before any time stepping.
    #[error("configuration error: {0}")]
    Config(String),

    /// The time integrator produced non-finite or runaway values.
    #[error("blow-up at t = {t}: {reason}")]
    Blowup {
        t: f64,
        reason: String,
        /// Last state in which every sample was finite.
        last_finite: Box<WaveState>,
    },

    /// The finite-difference oracle's far boundary was not far enough.
    #[error("far boundary too close: |f(gamma_max)| reached {value:.3e}; enlarge the domain")]
    DomainTooSmall { value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {value}")))
    }
}
