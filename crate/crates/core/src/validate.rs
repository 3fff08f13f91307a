//! Runs every oracle comparison at desk scale and reports measured errors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blayer::{self, F0Preset};
use crate::dispersion::{self, DispersionPoint};
use crate::error::Result;
use crate::kdv::{KdvState, KernelVariant};
use crate::kernels::{self, SampledHistory};
use crate::oracles;
use crate::params::RegimeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, passed: measured.is_finite() && measured < tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// LU determinant of the boundary-condition matrix vs the permutation expansion.
pub fn check_determinant() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (k, beta, re, c) in [(1.0, 0.1, 300.0, Complex64::new(0.98, -0.02)), (2.0, 0.05, 50.0, Complex64::new(0.9, -0.1))] {
        let pt = DispersionPoint::new(k, beta, re)?;
        let m = dispersion::scaled_matrix(c, &pt);
        let lu = dispersion::det4_lu(&m);
        let perm = oracles::det4_permutation(&m);
        worst = worst.max((lu - perm).norm() / perm.norm().max(1e-300));
    }
    Ok(CheckOutcome::new("determinant: LU vs permutation expansion", worst, 1e-12))
}

/// Product-integration half convolution vs singularity-removed adaptive quadrature.
pub fn check_half_convolution() -> Result<CheckOutcome> {
    let h = SampledHistory::from_fn(0.0, 1e-2, 100, |s| (3.0 * s).sin() + s * s)?;
    let fast = kernels::convolve_half(&h, 100)?;
    let direct = oracles::direct_half_convolution(&h, 1.0)?;
    Ok(CheckOutcome::new("half convolution: weights vs direct quadrature", (fast - direct).abs(), 1e-9))
}

/// Closed-form boundary-layer profile vs Crank–Nicolson.
pub fn check_boundary_layer() -> Result<CheckOutcome> {
    let dt = 1e-3;
    let (fs, _) = blayer::FreestreamPreset::Step.histories(0.0, dt, 500)?;
    let cfg = oracles::FdHeatConfig { gamma_max: 12.0, n_gamma: 1201, dt, r: 1.0, b: 1.0 };
    let shape = F0Preset::Gaussian.shape();
    let fd = oracles::fd_heat(&cfg, &shape, &fs, &[0.5])?;
    let ic = F0Preset::Gaussian.ic();
    let (mut err, mut top) = (0.0f64, 0.0f64);
    for (i, &g) in fd.gamma.iter().enumerate().step_by(10).take(80) {
        let u = blayer::heat_profile(&ic, &fs, 0.0, g, 0.5, 1.0, 1.0)?;
        err = err.max((u - fd.u[0][i]).abs());
        top = top.max(u.abs());
    }
    Ok(CheckOutcome::new("boundary layer: closed form vs Crank-Nicolson", err / top, 1e-3))
}

/// Spectral infinite-horizon nonlocal term vs direct oscillatory quadrature.
pub fn check_nonlocal_term() -> Result<CheckOutcome> {
    let l = 2.0 * PI;
    let n = 64;
    let modes = [(1.0, 0.5, 0.1), (3.0, 0.2, -0.7)];
    let eta: Vec<f64> = (0..n)
        .map(|j| {
            let x = j as f64 * l / n as f64;
            modes.iter().map(|&(k, a, p)| a * (k * x + p).cos()).sum()
        })
        .collect();
    let regime = RegimeParams::regime(0.1, 1.0, 1.0, 1.0)?;
    let s = KdvState::new(l, &eta, regime, KernelVariant::KmInfinite)?;
    let nl = s.nonlocal_term();
    let scale = nl.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for (j, x) in s.x().iter().enumerate().step_by(5) {
        let direct = oracles::km_nonlocal_direct(&modes, *x, 400.0);
        worst = worst.max((nl[j] - direct).abs() / scale);
    }
    Ok(CheckOutcome::new("nonlocal term: spectral vs direct quadrature", worst, 1e-6))
}

/// Large-depth limit of the image-method double integral vs 2-D quadrature.
pub fn check_double_integral() -> Result<CheckOutcome> {
    let (t, kappa) = (0.5, 1.0);
    let ic = F0Preset::Exp.ic();
    let x = std::f64::consts::FRAC_PI_2;
    let limit = blayer::lemma_b2_limit(&ic, x, t, 1.0, 1.0)?;
    let a = (kappa / (4.0 * t)).sqrt();
    let f0x = |g: f64| (ic.f0x)(x, g);
    // int_0^inf f0x(g) int_0^inf [exp(-A^2 (y - g)^2) - exp(-A^2 (y + g)^2)] dy dg
    let kern = |g: f64, y: f64| f0x(g) * ((-(a * (y - g)).powi(2)).exp() - (-(a * (y + g)).powi(2)).exp());
    let direct = oracles::quad2d(&kern, (0.0, 45.0), &|_| (0.0, 60.0), 1e-10);
    let rel = (direct - limit).abs() / limit.abs().max(1e-300);
    Ok(CheckOutcome::new("double integral: closed limit vs 2-D quadrature", rel, 1e-6))
}

pub fn run_all() -> Result<ValidationReport> {
    let checks = vec![
        check_determinant()?,
        check_half_convolution()?,
        check_boundary_layer()?,
        check_nonlocal_term()?,
        check_double_integral()?,
    ];
    Ok(ValidationReport { checks })
}
