//! Laminar bottom boundary layer in the stretched coordinate `gamma = z / eps`.
//!
//! The defect `f = u - U` obeys `f_t = f_gg / kappa` (`kappa = R sqrt(b)`)
//! with `f(0, t) = -U(t)` and initial data `f0`. Its closed-form solution is
//! an image-method Gaussian integral over `f0` minus the free stream
//! convolved with the first-passage density of the half-line.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use libm::{erf, erfc};

use crate::error::{ensure_positive, Error, Result};
use crate::kernels::{self, SampledHistory};
use crate::params::RegimeParams;
use crate::quad;

pub type Profile2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Initial velocity defect `f0(x, gamma)` and its `x`-derivative.
#[derive(Clone)]
pub struct BoundaryLayerIC {
    pub f0: Profile2,
    pub f0x: Profile2,
    pub gamma_cut: f64,
}

impl fmt::Debug for BoundaryLayerIC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryLayerIC").field("gamma_cut", &self.gamma_cut).finish_non_exhaustive()
    }
}

impl BoundaryLayerIC {
    pub fn new(f0: Profile2, f0x: Profile2, gamma_cut: f64) -> Result<Self> {
        ensure_positive("gamma_cut", gamma_cut)?;
        Ok(Self { f0, f0x, gamma_cut })
    }

    pub fn zero() -> Self {
        Self { f0: Arc::new(|_, _| 0.0), f0x: Arc::new(|_, _| 0.0), gamma_cut: 10.0 }
    }

    /// `f0 = X(x) G(gamma)`.
    pub fn separable(
        x: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dx: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gamma_cut: f64,
    ) -> Self {
        let g = Arc::new(g);
        let g2 = Arc::clone(&g);
        Self {
            f0: Arc::new(move |xx, gg| x(xx) * g(gg)),
            f0x: Arc::new(move |xx, gg| dx(xx) * g2(gg)),
            gamma_cut,
        }
    }
}

/// Vertical shapes `G(gamma)` for separable initial defects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F0Preset {
    Zero,
    /// `gamma exp(-gamma^2)`
    Gaussian,
    /// `gamma exp(-gamma)`
    Exp,
}

impl F0Preset {
    pub fn shape(self) -> fn(f64) -> f64 {
        match self {
            F0Preset::Zero => |_| 0.0,
            F0Preset::Gaussian => |g| g * (-g * g).exp(),
            F0Preset::Exp => |g| g * (-g).exp(),
        }
    }

    /// `f0(x, gamma) = cos(x) G(gamma)`.
    pub fn ic(self) -> BoundaryLayerIC {
        let g = self.shape();
        BoundaryLayerIC::separable(f64::cos, |x| -x.sin(), g, 40.0)
    }
}

/// Time dependence `T(t)` of the free stream `U(x, t) = cos(x) T(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreestreamPreset {
    Step,
    Ramp,
    Sine,
}

impl FreestreamPreset {
    pub fn value(self, t: f64) -> f64 {
        match self {
            FreestreamPreset::Step => 1.0,
            FreestreamPreset::Ramp => t,
            FreestreamPreset::Sine => t.sin(),
        }
    }

    /// `U(x, .)` and `U_x(x, .)` sampled on `0, dt, ..., n dt`.
    pub fn histories(self, x: f64, dt: f64, n: usize) -> Result<(SampledHistory, SampledHistory)> {
        Ok((
            SampledHistory::from_fn(0.0, dt, n, |t| x.cos() * self.value(t))?,
            SampledHistory::from_fn(0.0, dt, n, |t| -x.sin() * self.value(t))?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLayerProfile {
    pub gamma_grid: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub t: f64,
}

/// Bottom shear split into the singular `1/sqrt(t)` part and the memory part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearDecomposition {
    /// Multiplies `1/sqrt(t)`.
    pub pv_coefficient: f64,
    pub convolution_part: f64,
}

impl ShearDecomposition {
    pub fn total(&self, t: f64) -> f64 {
        self.pv_coefficient / t.sqrt() + self.convolution_part
    }
}

/// Height beyond which the layer has relaxed to the free stream at time `t`.
pub fn default_gamma_cut(t: f64, kappa: f64) -> f64 {
    10.0 / (kappa / (4.0 * t)).sqrt() + 10.0
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be positive, got {t}")))
    }
}

fn kappa_of(r: f64, b: f64) -> Result<f64> {
    ensure_positive("R", r)?;
    ensure_positive("b", b)?;
    Ok(r * b.sqrt())
}

/// Breakpoints `s` of the lag variable at which `U(t - s)` has a kink, with
/// the interpolated free stream there.
fn lag_nodes(fs: &SampledHistory, t: f64) -> Result<Vec<(f64, f64)>> {
    if fs.t0 > 0.0 {
        return Err(Error::Range(format!("free stream starts at {} > 0", fs.t0)));
    }
    if t > fs.t_end() + 1e-12 * t.max(1.0) {
        return Err(Error::Range(format!(
            "free stream ends at {} but t = {t} was requested",
            fs.t_end()
        )));
    }
    let mut nodes = vec![(0.0, fs.value_at(t.min(fs.t_end()))?)];
    let top = ((t - fs.t0) / fs.dt).ceil() as usize;
    for m in (0..top.min(fs.len())).rev() {
        let tau = fs.time(m);
        if tau < t - 1e-12 * t.max(1.0) && tau >= 0.0 {
            nodes.push((t - tau, fs.values[m]));
        }
    }
    if nodes.last().map(|n| n.0) != Some(t) {
        nodes.push((t, fs.value_at(0.0)?));
    }
    Ok(nodes)
}

/// `int_0^t U(t - s) K(s) ds` for piecewise-linear `U`, given the kernel's
/// zeroth and first antiderivatives.
fn product_integrate(nodes: &[(f64, f64)], m0: impl Fn(f64) -> f64, m1: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    let (mut p0, mut q0) = (m0(nodes[0].0), m1(nodes[0].0));
    for w in nodes.windows(2) {
        let ((s0, u0), (s1, u1)) = (w[0], w[1]);
        let (p1, q1) = (m0(s1), m1(s1));
        let h = s1 - s0;
        let zeroth = p1 - p0;
        let first = (q1 - q0) - s0 * zeroth;
        total += u0 * zeroth + (u1 - u0) * first / h;
        p0 = p1;
        q0 = q1;
    }
    total
}

// Antiderivatives in s of s^(-1/2) e^{-a^2/4s} and s^(1/2) e^{-a^2/4s}.
fn p_half(a: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    2.0 * s.sqrt() * (-a * a / (4.0 * s)).exp() - a * PI.sqrt() * erfc(a / (2.0 * s.sqrt()))
}

fn q_half(a: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    (2.0 / 3.0) * (s.powf(1.5) * (-a * a / (4.0 * s)).exp() - 0.25 * a * a * p_half(a, s))
}

/// `int_0^t U(t - s) L^{-1}(e^{-sigma gamma})(s) ds`.
fn freestream_gauss_convolution(fs: &SampledHistory, gamma: f64, t: f64, kappa: f64) -> Result<f64> {
    let a = gamma * kappa.sqrt();
    if a == 0.0 {
        // The kernel collapses to a Dirac mass at s = 0.
        return fs.value_at(t);
    }
    let nodes = lag_nodes(fs, t)?;
    let m0 = |s: f64| if s <= 0.0 { 0.0 } else { erfc(a / (2.0 * s.sqrt())) };
    let m1 = |s: f64| a / (2.0 * PI.sqrt()) * p_half(a, s);
    Ok(product_integrate(&nodes, m0, m1))
}

/// `int_0^t U_x(t - s) (1 - e^{-kappa gamma^2 / 4s}) / sqrt(kappa pi s) ds`.
fn freestream_w_convolution(fs: &SampledHistory, gamma: f64, t: f64, kappa: f64) -> Result<f64> {
    let a = gamma * kappa.sqrt();
    if a == 0.0 {
        return Ok(0.0);
    }
    let nodes = lag_nodes(fs, t)?;
    let c = 1.0 / (kappa * PI).sqrt();
    let m0 = |s: f64| c * (2.0 * s.max(0.0).sqrt() - p_half(a, s));
    let m1 = |s: f64| c * ((2.0 / 3.0) * s.max(0.0).powf(1.5) - q_half(a, s));
    Ok(product_integrate(&nodes, m0, m1))
}

/// Image-method term `(A / sqrt(pi)) int f0(g') [e^{-A^2 (g'-g)^2} - e^{-A^2 (g'+g)^2}] dg'`.
fn image_integral(f0: &dyn Fn(f64) -> f64, gamma: f64, t: f64, kappa: f64) -> f64 {
    let big_a = (kappa / (4.0 * t)).sqrt();
    let cut = quad::tail_cutoff(&f0, 1e-14);
    let integrand = |g: f64| {
        f0(g) * ((-(big_a * (g - gamma)).powi(2)).exp() - (-(big_a * (g + gamma)).powi(2)).exp())
    };
    let hw = 9.0 / big_a;
    let upper = cut.max(gamma + hw);
    let mut cuts = vec![0.0, (gamma - hw).max(0.0), gamma, (gamma + hw).min(upper), upper];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let total: f64 = cuts.windows(2).map(|w| quad::integrate(integrand, w[0], w[1], 1e-15, 1e-13)).sum();
    big_a / PI.sqrt() * total
}

fn heat_profile_1d(f0: &dyn Fn(f64) -> f64, fs: &SampledHistory, gamma: f64, t: f64, kappa: f64) -> Result<f64> {
    check_t(t)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Domain(format!("gamma must be non-negative, got {gamma}")));
    }
    let u_t = fs.value_at(t)?;
    Ok(u_t + image_integral(f0, gamma, t, kappa) - freestream_gauss_convolution(fs, gamma, t, kappa)?)
}

/// Horizontal velocity `u(x, gamma, t)` in the boundary layer.
pub fn heat_profile(
    ic: &BoundaryLayerIC,
    freestream: &SampledHistory,
    x: f64,
    gamma: f64,
    t: f64,
    r: f64,
    b: f64,
) -> Result<f64> {
    let kappa = kappa_of(r, b)?;
    let f0 = |g: f64| (ic.f0)(x, g);
    heat_profile_1d(&f0, freestream, gamma, t, kappa)
}

/// Bottom shear stress `du/dgamma` at `gamma = 0`; `t` must be a sample time.
pub fn bottom_shear(freestream: &SampledHistory, t: f64, r: f64, b: f64) -> Result<ShearDecomposition> {
    check_t(t)?;
    let kappa = kappa_of(r, b)?;
    let pref = kappa.sqrt() / PI.sqrt();
    let n = freestream.index_of(t)?;
    let start = freestream.index_of(0.0)?;
    let ut = freestream.derivative()?;
    let shifted = SampledHistory::new(0.0, ut.dt, ut.values[start..].to_vec())?;
    Ok(ShearDecomposition {
        pv_coefficient: pref * freestream.values[start],
        convolution_part: pref * kernels::convolve_half(&shifted, n - start)?,
    })
}

/// Vertical velocity `w(x, gamma, t)` from the depth-integrated continuity equation.
#[allow(clippy::too_many_arguments)]
pub fn vertical_velocity(
    ic: &BoundaryLayerIC,
    freestream_x: &SampledHistory,
    x: f64,
    gamma: f64,
    t: f64,
    r: f64,
    b: f64,
    epsilon: f64,
    beta: f64,
) -> Result<f64> {
    check_t(t)?;
    let kappa = kappa_of(r, b)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::Domain(format!("gamma must be non-negative, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let big_a = (kappa / (4.0 * t)).sqrt();
    let f0x = |g: f64| (ic.f0x)(x, g);
    let cut = quad::tail_cutoff(&f0x, 1e-14);
    let defect = |g: f64| {
        f0x(g) * (2.0 * erf(big_a * g) + erf(big_a * (gamma - g)) - erf(big_a * (gamma + g)))
    };
    let upper = cut.max(gamma + 9.0 / big_a);
    let mut cuts = vec![0.0, gamma.min(upper), upper];
    cuts.dedup();
    let initial: f64 = 0.5 * cuts.windows(2).map(|w| quad::integrate(defect, w[0], w[1], 1e-15, 1e-13)).sum::<f64>();
    let linear = freestream_x.value_at(t)? * gamma;
    let memory = freestream_w_convolution(freestream_x, gamma, t, kappa)?;
    Ok(-epsilon * beta * (linear - memory + initial))
}

/// Large-`gamma` limit of the double integral of `f0x` against the
/// image-method Gaussians: `(sqrt(pi)/A) int f0x(g) erf(A g) dg`.
pub fn lemma_b2_limit(ic: &BoundaryLayerIC, x: f64, t: f64, r: f64, b: f64) -> Result<f64> {
    check_t(t)?;
    let kappa = kappa_of(r, b)?;
    let big_a = (kappa / (4.0 * t)).sqrt();
    let f0x = |g: f64| (ic.f0x)(x, g);
    Ok(PI.sqrt() / big_a * kernels::erf_weighted_integral(&f0x, big_a))
}

/// Samples `u` and `w` on a `gamma` grid at time `t`.
pub fn profile(
    ic: &BoundaryLayerIC,
    freestream: &SampledHistory,
    freestream_x: &SampledHistory,
    x: f64,
    gamma_grid: &[f64],
    t: f64,
    regime: &RegimeParams,
) -> Result<BoundaryLayerProfile> {
    let (r, b) = (regime.r, regime.b);
    let u = gamma_grid.iter().map(|&g| heat_profile(ic, freestream, x, g, t, r, b)).collect::<Result<_>>()?;
    let w = gamma_grid
        .iter()
        .map(|&g| vertical_velocity(ic, freestream_x, x, g, t, r, b, regime.epsilon, regime.beta))
        .collect::<Result<_>>()?;
    Ok(BoundaryLayerProfile { gamma_grid: gamma_grid.to_vec(), u, w, t })
}
