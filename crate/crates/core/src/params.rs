//! Dimensionless numbers of the viscous long-wave problem.
//!
//! Everything downstream works with the distinguished scaling
//! `alpha = a eps`, `beta = b eps`, `Re = R eps^(-5/2)`, under which the
//! viscous and gravitational corrections to the phase speed are of the
//! same order.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// Physical inputs in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalInputs {
    /// Still-water depth [m].
    pub h: f64,
    /// Horizontal length scale (wavelength) [m].
    pub l: f64,
    /// Wave amplitude [m].
    #[serde(rename = "A")]
    pub amplitude: f64,
    /// Gravitational acceleration [m/s^2].
    pub g: f64,
    /// Kinematic viscosity [m^2/s].
    pub nu: f64,
}

/// Dimensionless regime parameters.
///
/// `R` multiplies `eps^(-5/2)` in the Reynolds number; `a` and `b` multiply
/// `eps` in the nonlinearity and dispersion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub reynolds: f64,
    /// Reference phase speed `sqrt(g h)` [m/s]; 1 for purely dimensionless regimes.
    pub c0: f64,
}

/// Default dispersion coefficient used when inverting dimensional inputs.
pub const DEFAULT_B: f64 = 1.0;

impl RegimeParams {
    /// Builds the regime from `(eps, a, b, R)`.
    pub fn regime(epsilon: f64, a: f64, b: f64, r: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon must lie in (0, 1) so that alpha = a*epsilon and beta = b*epsilon are small, got {epsilon}"
            )));
        }
        ensure_positive("a", a)?;
        ensure_positive("b", b)?;
        ensure_positive("R", r)?;
        Ok(Self {
            epsilon,
            a,
            b,
            r,
            alpha: a * epsilon,
            beta: b * epsilon,
            reynolds: r * epsilon.powf(-2.5),
            c0: 1.0,
        })
    }

    /// Scales dimensional inputs with the default convention `b = 1` (so `eps = beta`).
    pub fn from_dimensional(inputs: DimensionalInputs) -> Result<Self> {
        Self::from_dimensional_with_b(inputs, DEFAULT_B)
    }

    /// Scales dimensional inputs, back-solving `eps`, `a` and `R` for a chosen `b`.
    pub fn from_dimensional_with_b(inputs: DimensionalInputs, b: f64) -> Result<Self> {
        let DimensionalInputs { h, l, amplitude, g, nu } = inputs;
        ensure_positive("h", h)?;
        ensure_positive("l", l)?;
        ensure_positive("g", g)?;
        ensure_positive("nu", nu)?;
        ensure_positive("b", b)?;
        if !(amplitude >= 0.0 && amplitude < h) {
            return Err(Error::Domain(format!(
                "amplitude must satisfy 0 <= A < h (the bottom never dries), got A = {amplitude}, h = {h}"
            )));
        }
        let c0 = (g * h).sqrt();
        let alpha = amplitude / h;
        let beta = (h / l).powi(2);
        let reynolds = c0 * h / nu;
        let epsilon = beta / b;
        if epsilon > 1.0 {
            return Err(Error::Domain(format!(
                "beta / b = {epsilon} exceeds 1: the long-wave scaling does not apply"
            )));
        }
        Ok(Self {
            epsilon,
            a: alpha / epsilon,
            b,
            r: reynolds * epsilon.powf(2.5),
            alpha,
            beta,
            reynolds,
            c0,
        })
    }

    /// `R sqrt(b)`: the inverse diffusivity of the boundary-layer heat equation.
    pub fn kappa(&self) -> f64 {
        self.r * self.b.sqrt()
    }

    /// Prefactor `1 / sqrt(pi R sqrt(b))` of the half-derivative memory term.
    pub fn memory_prefactor(&self) -> f64 {
        1.0 / (std::f64::consts::PI * self.kappa()).sqrt()
    }

    /// `Re beta^(5/2)`, equal to `R b^(5/2)` for every `eps`.
    pub fn distinguished_invariant(&self) -> f64 {
        self.reynolds * self.beta.powf(2.5)
    }

    /// Recovers `(eps, a, b, R)` from `(alpha, beta, Re)` for the stored `b`.
    pub fn rederive(&self) -> (f64, f64, f64, f64) {
        let epsilon = self.beta / self.b;
        (epsilon, self.alpha / epsilon, self.b, self.reynolds * epsilon.powf(2.5))
    }
}
