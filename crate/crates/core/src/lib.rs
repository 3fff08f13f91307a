//! Viscous long-wave hierarchy: the linearized Navier–Stokes dispersion
//! relation, the laminar bottom boundary layer, a 1-D viscous Boussinesq
//! system with a half-derivative memory term and the viscous KdV equation.
//!
//! Each solver ships with brute-force oracles (see [`oracles`]) that share
//! no kernels or weights with the code they check.

pub mod blayer;
pub mod boussinesq;
pub mod dispersion;
pub mod error;
pub mod kdv;
pub mod kernels;
pub mod oracles;
pub mod params;
mod quad;
pub mod spectral;
pub mod validate;

pub use blayer::{BoundaryLayerIC, BoundaryLayerProfile, ShearDecomposition};
pub use boussinesq::{BcsParameters, ModelSwitches, WaveState};
pub use dispersion::{Branch, DispersionPoint, DispersionResult};
pub use error::{Error, Result};
pub use kdv::{FrameMap, KdvState, KernelVariant};
pub use kernels::{HalfKernelWeights, SampledHistory};
pub use params::{DimensionalInputs, RegimeParams};

pub use num_complex::Complex64;
