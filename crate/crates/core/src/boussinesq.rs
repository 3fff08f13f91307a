//! 1-D viscous Boussinesq system on a periodic box.
//!
//! ```text
//! u_t + eta_x + alpha u u_x - beta eta_xxx (z^2 - 1)/2 = 0
//! eta_t + u_x - (beta/2)(z^2 - 1/3) eta_xxt + alpha (u eta)_x
//!       - eps / sqrt(pi R sqrt(b)) (u_x * t^{-1/2}) + eps T2(x, t) = 0
//! ```
//!
//! The state is advanced in Fourier space; the mass equation is solved mode
//! by mode for `eta_t`. Each retained mode keeps its own history of
//! `u_x`-hat for the half-derivative memory term.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blayer::F0Preset;
use crate::error::{Error, Result};
use crate::kernels::{self, HalfKernelWeights};
use crate::params::RegimeParams;
use crate::quad;
use crate::spectral::Spectral;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const RUNAWAY: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSwitches {
    pub viscous_convolution: bool,
    pub ic_term: bool,
    pub nonlinear: bool,
}

impl ModelSwitches {
    pub const INVISCID_LINEAR: Self = Self { viscous_convolution: false, ic_term: false, nonlinear: false };
    pub const INVISCID: Self = Self { viscous_convolution: false, ic_term: false, nonlinear: true };
    pub const VISCOUS_LINEAR: Self = Self { viscous_convolution: true, ic_term: false, nonlinear: false };
    pub const VISCOUS: Self = Self { viscous_convolution: true, ic_term: false, nonlinear: true };
    pub const FULL: Self = Self { viscous_convolution: true, ic_term: true, nonlinear: true };

    pub fn validate(&self) -> Result<()> {
        if self.ic_term && !self.viscous_convolution {
            return Err(Error::Config(
                "the initial-boundary-layer term exists only in the viscous model: enable viscous_convolution".into(),
            ));
        }
        Ok(())
    }
}

/// Memory of a non-Euler initial boundary layer `f0 = u0(x) G(gamma)`.
#[derive(Debug, Clone)]
pub struct IcMemory {
    pub shape: F0Preset,
    /// Spectrum of `u0_x`.
    x_prime_hat: Vec<Complex64>,
    /// `int G` (the `t -> 0` value of the erf-weighted integral).
    g_integral: f64,
}

impl IcMemory {
    /// `int_0^inf G(g) erf(A(t) g) dg`.
    pub fn time_factor(&self, t: f64, regime: &RegimeParams) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.g_integral);
        }
        kernels::initial_memory_term(&self.shape.shape(), t, regime.r, regime.b)
    }
}

#[derive(Debug, Clone)]
pub struct WaveState {
    pub n: usize,
    #[doc(alias = "L")]
    pub l: f64,
    pub eta: Vec<f64>,
    pub u: Vec<f64>,
    pub z_eval: f64,
    pub t: f64,
    /// History of `u_x`-hat for modes `0..=cutoff`, one sample per step.
    pub mode_memory: Vec<Vec<Complex64>>,
    pub regime: RegimeParams,
    pub ic_memory: Option<IcMemory>,
    eta_hat: Vec<Complex64>,
    u_hat: Vec<Complex64>,
    spectral: Spectral,
    weights: Option<HalfKernelWeights>,
    steps: usize,
}

impl WaveState {
    /// Builds a state from samples; both fields are projected onto the
    /// retained (de-aliased) modes.
    pub fn new(l: f64, eta: &[f64], u: &[f64], z_eval: f64, regime: RegimeParams) -> Result<Self> {
        let n = eta.len();
        if u.len() != n {
            return Err(Error::Config(format!("eta has {n} samples but u has {}", u.len())));
        }
        let spectral = Spectral::new(n, l)?;
        if !(0.0..=1.0).contains(&z_eval) {
            return Err(Error::Config(format!("z_eval must lie in [0, 1], got {z_eval}")));
        }
        let kc = spectral.k(spectral.cutoff());
        let factor = 1.0 + 0.5 * regime.beta * (z_eval * z_eval - 1.0 / 3.0) * kc * kc;
        if factor <= 0.0 {
            return Err(Error::Config(format!(
                "mass-equation factor 1 + (beta/2)(z^2 - 1/3) k^2 = {factor:.3e} <= 0 at the cutoff k = {kc:.3}: \
                 raise z_eval, reduce n or enlarge L"
            )));
        }
        let mut eta_hat = spectral.forward(eta);
        let mut u_hat = spectral.forward(u);
        for h in [&mut eta_hat, &mut u_hat] {
            spectral.dealias(h);
            spectral.symmetrize(h);
        }
        let mut s = Self {
            n,
            l,
            eta: Vec::new(),
            u: Vec::new(),
            z_eval,
            t: 0.0,
            mode_memory: vec![Vec::new(); spectral.cutoff() + 1],
            regime,
            ic_memory: None,
            eta_hat,
            u_hat,
            spectral,
            weights: None,
            steps: 0,
        };
        s.sync_samples();
        if s.eta.iter().any(|&e| 1.0 + regime.alpha * e <= 0.0) {
            return Err(Error::Domain("1 + alpha eta must stay positive: the bottom would dry".into()));
        }
        s.record_memory();
        Ok(s)
    }

    /// Adds the memory of an initial boundary layer `f0 = u0(x) G(gamma)`.
    pub fn with_initial_boundary_layer(mut self, shape: F0Preset) -> Self {
        let g = shape.shape();
        let cut = quad::tail_cutoff(&g, 1e-12);
        let g_integral = quad::integrate(g, 0.0, cut, 1e-14, 1e-13);
        let x_prime_hat = self.spectral.differentiate_hat(&self.u_hat, 1);
        self.ic_memory = Some(IcMemory { shape, x_prime_hat, g_integral });
        self
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn eta_hat(&self) -> &[Complex64] {
        &self.eta_hat
    }

    pub fn u_hat(&self) -> &[Complex64] {
        &self.u_hat
    }

    pub fn x(&self) -> Vec<f64> {
        self.spectral.grid()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> Option<f64> {
        self.weights.as_ref().map(|w| w.dt)
    }

    /// `int eta dx`, read off the mean mode.
    pub fn mass(&self) -> f64 {
        self.eta_hat[0].re * self.l / self.n as f64
    }

    /// `int (eta^2 + u^2) dx`.
    pub fn energy(&self) -> f64 {
        let dx = self.l / self.n as f64;
        self.eta.iter().chain(&self.u).map(|v| v * v).sum::<f64>() * dx
    }

    pub fn max_abs_eta(&self) -> f64 {
        self.eta.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Modulus of Fourier mode `j` of `eta`, normalised so that
    /// `A cos(k_j x)` has amplitude `A`.
    pub fn eta_mode_amplitude(&self, j: usize) -> f64 {
        2.0 * self.eta_hat[j].norm() / self.n as f64
    }

    fn sync_samples(&mut self) {
        self.eta = self.spectral.inverse(&self.eta_hat);
        self.u = self.spectral.inverse(&self.u_hat);
    }

    fn record_memory(&mut self) {
        for (j, hist) in self.mode_memory.iter_mut().enumerate() {
            hist.push(I * self.spectral.k(j) * self.u_hat[j]);
        }
    }

    fn mass_factor(&self, j: usize) -> f64 {
        let k = self.spectral.k(j);
        1.0 + 0.5 * self.regime.beta * (self.z_eval * self.z_eval - 1.0 / 3.0) * k * k
    }

    /// `int_0^t u_x-hat_j(t - s) / sqrt(s) ds` from the recorded history,
    /// for retained modes `j <= cutoff`.
    pub fn memory_convolution(&self, j: usize) -> Complex64 {
        match &self.weights {
            Some(w) if self.steps > 0 => w.convolve_complex(&self.mode_memory[j], self.steps),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Forcing of the mass equation that is frozen over a step: memory
    /// convolution and initial-layer term.
    fn frozen_forcing(&self, switches: &ModelSwitches) -> Result<Vec<Complex64>> {
        let n = self.n;
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        let eps = self.regime.epsilon;
        if switches.viscous_convolution {
            let p = eps * self.regime.memory_prefactor();
            for j in 1..=self.spectral.cutoff() {
                let c = p * self.memory_convolution(j);
                f[j] += c;
                f[n - j] += c.conj();
            }
        }
        if switches.ic_term {
            if let Some(ic) = &self.ic_memory {
                let tf = ic.time_factor(self.t, &self.regime)?;
                for (fj, xp) in f.iter_mut().zip(&ic.x_prime_hat) {
                    *fj -= eps * tf * xp;
                }
            }
        }
        Ok(f)
    }

    fn tendencies(
        &self,
        eta_hat: &[Complex64],
        u_hat: &[Complex64],
        forcing: &[Complex64],
        switches: &ModelSwitches,
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let sp = &self.spectral;
        let n = self.n;
        let (alpha, beta, z) = (self.regime.alpha, self.regime.beta, self.z_eval);
        let (mut uu_x, mut ueta) = (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]);
        if switches.nonlinear {
            let u = sp.inverse(u_hat);
            let eta = sp.inverse(eta_hat);
            let ux = sp.inverse(&sp.differentiate_hat(u_hat, 1));
            uu_x = sp.product_hat(&u, &ux);
            ueta = sp.product_hat(&u, &eta);
        }
        let mut eta_t = vec![Complex64::new(0.0, 0.0); n];
        let mut u_t = vec![Complex64::new(0.0, 0.0); n];
        let disp = beta * (z * z - 1.0) / 2.0;
        for j in 0..n {
            if !sp.retained(j) {
                continue;
            }
            let ik = I * sp.k(j);
            u_t[j] = -ik * eta_hat[j] - alpha * uu_x[j] + disp * ik * ik * ik * eta_hat[j];
            let rhs = -ik * (u_hat[j] + alpha * ueta[j]) + forcing[j];
            eta_t[j] = rhs / self.mass_factor(j);
        }
        (eta_t, u_t)
    }

    /// Time derivatives `(eta_t, u_t)` as grid samples.
    pub fn rhs(&self, switches: &ModelSwitches) -> Result<(Vec<f64>, Vec<f64>)> {
        switches.validate()?;
        let (e, u) = self.rhs_hat(switches)?;
        Ok((self.spectral.inverse(&e), self.spectral.inverse(&u)))
    }

    pub fn rhs_hat(&self, switches: &ModelSwitches) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let forcing = self.frozen_forcing(switches)?;
        Ok(self.tendencies(&self.eta_hat, &self.u_hat, &forcing, switches))
    }

    /// One explicit midpoint (RK2) step with the memory forcing frozen at
    /// the step start. The first call fixes the memory ledger's `dt`.
    pub fn step(&mut self, dt: f64, switches: &ModelSwitches) -> Result<()> {
        switches.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        match &mut self.weights {
            None => self.weights = Some(HalfKernelWeights::new(dt, 1024)?),
            Some(w) if (w.dt - dt).abs() > 1e-14 * dt => {
                return Err(Error::Config(format!(
                    "dt = {dt} differs from the memory ledger's dt = {}",
                    w.dt
                )))
            }
            Some(_) => {}
        }
        if let Some(w) = &mut self.weights {
            if w.panels() < self.steps + 1 {
                w.ensure((self.steps + 1).next_power_of_two());
            }
        }
        let forcing = self.frozen_forcing(switches)?;
        let (e1, u1) = self.tendencies(&self.eta_hat, &self.u_hat, &forcing, switches);
        let eta_mid: Vec<_> = self.eta_hat.iter().zip(&e1).map(|(a, b)| a + 0.5 * dt * b).collect();
        let u_mid: Vec<_> = self.u_hat.iter().zip(&u1).map(|(a, b)| a + 0.5 * dt * b).collect();
        let (e2, u2) = self.tendencies(&eta_mid, &u_mid, &forcing, switches);

        let previous = self.clone();
        for (a, b) in self.eta_hat.iter_mut().zip(&e2) {
            *a += dt * b;
        }
        for (a, b) in self.u_hat.iter_mut().zip(&u2) {
            *a += dt * b;
        }
        self.spectral.symmetrize(&mut self.eta_hat);
        self.spectral.symmetrize(&mut self.u_hat);
        self.steps += 1;
        self.t = self.steps as f64 * dt;
        self.sync_samples();
        self.record_memory();

        let bad = self.eta.iter().chain(&self.u).any(|v| !v.is_finite() || v.abs() > RUNAWAY);
        if bad {
            return Err(Error::Blowup {
                t: self.t,
                reason: "non-finite or runaway values (check dt against the CFL limit)".into(),
                last_finite: Box::new(previous),
            });
        }
        if self.eta.iter().any(|&e| 1.0 + self.regime.alpha * e <= 0.0) {
            return Err(Error::Blowup {
                t: self.t,
                reason: "1 + alpha eta <= 0: the bottom dries".into(),
                last_finite: Box::new(previous),
            });
        }
        Ok(())
    }

    /// `u` transferred from `z_eval` to `z'`: `u(z') = u(z) + beta eta_xt (z'^2 - z^2)/2`.
    pub fn transfer_velocity(&self, eta_t: &[f64], z_prime: f64) -> Vec<f64> {
        let eta_xt = self.spectral.derivative(eta_t, 1);
        let c = self.regime.beta * (z_prime * z_prime - self.z_eval * self.z_eval) / 2.0;
        self.u.iter().zip(&eta_xt).map(|(u, e)| u + c * e).collect()
    }
}

/// Functional form of [`WaveState::step`].
pub fn step(state: &WaveState, dt: f64, switches: &ModelSwitches) -> Result<WaveState> {
    let mut s = state.clone();
    s.step(dt, switches)?;
    Ok(s)
}

/// Coefficients of the BCS family obtained by interpolating the velocity
/// between heights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcsParameters {
    pub a_int: f64,
    /// Has no role in one horizontal dimension.
    pub b_int: f64,
    pub c_int: f64,
    pub z: f64,
    pub beta: f64,
    pub a_bcs: f64,
    pub b_bcs: f64,
    pub c_bcs: f64,
    pub d_bcs: f64,
}

impl BcsParameters {
    pub fn sum(&self) -> f64 {
        self.a_bcs + self.b_bcs + self.c_bcs + self.d_bcs
    }
}

pub fn bcs_map(a_int: f64, c_int: f64, z: f64, beta: f64) -> Result<BcsParameters> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("z must lie in [0, 1], got {z}")));
    }
    crate::error::ensure_positive("beta", beta)?;
    let m = z * z - 1.0 / 3.0;
    let d = z * z - 1.0;
    Ok(BcsParameters {
        a_int,
        b_int: 0.0,
        c_int,
        z,
        beta,
        a_bcs: 0.5 * beta * (1.0 - c_int) * m,
        b_bcs: 0.5 * beta * c_int * m,
        c_bcs: -beta * a_int * d / 2.0,
        d_bcs: -beta * (1.0 - a_int) * d / 2.0,
    })
}

/// Least-squares fit of `log(amplitude)` against `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// False when the local maxima of the envelope ever increase.
    pub monotone_envelope: bool,
}

pub fn measure_decay(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.len() < 3 {
        return Err(Error::Domain("decay fit needs at least three samples".into()));
    }
    if samples.iter().any(|&(_, a)| a.is_nan() || a <= 0.0) {
        return Err(Error::Domain("amplitudes must be positive for a log fit".into()));
    }
    let n = samples.len() as f64;
    let (st, sy) = samples.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t, b + y.ln()));
    let (mt, my) = (st / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, y) in samples {
        sxx += (t - mt) * (t - mt);
        sxy += (t - mt) * (y.ln() - my);
    }
    let slope = sxy / sxx;
    let peaks: Vec<f64> = samples
        .windows(3)
        .filter(|w| w[1].1 >= w[0].1 && w[1].1 >= w[2].1)
        .map(|w| w[1].1)
        .collect();
    let monotone_envelope = peaks.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12));
    if !monotone_envelope {
        log::warn!("decay fit: envelope is not monotone; the slope may be unreliable");
    }
    Ok(DecayFit { slope, intercept: my - slope * mt, monotone_envelope })
}

/// Right-going linear eigenmode `eta = A cos(k x)` with the matching
/// velocity, on a grid of `n` points over `[0, 2 pi m / k)`.
pub fn linear_mode(state_n: usize, l: f64, mode: usize, amplitude: f64, z_eval: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let k = 2.0 * std::f64::consts::PI * mode as f64 / l;
    let m = 1.0 + 0.5 * beta * (z_eval * z_eval - 1.0 / 3.0) * k * k;
    let d = 1.0 + beta * (z_eval * z_eval - 1.0) / 2.0 * k * k;
    // omega^2 = k^2 d / m; u-hat = (k d / omega) eta-hat
    let ratio = (d * m).sqrt();
    let x: Vec<f64> = (0..state_n).map(|j| j as f64 * l / state_n as f64).collect();
    let eta = x.iter().map(|&x| amplitude * (k * x).cos()).collect();
    let u = x.iter().map(|&x| ratio * amplitude * (k * x).cos()).collect();
    (eta, u)
}

/// Runs a small-amplitude mode and returns `(t, |eta-hat_mode|)` after every step.
pub fn mode_amplitude_run(
    regime: RegimeParams,
    n: usize,
    mode: usize,
    amplitude: f64,
    dt: f64,
    t_end: f64,
    switches: &ModelSwitches,
) -> Result<Vec<(f64, f64)>> {
    let l = 2.0 * std::f64::consts::PI;
    let (eta, u) = linear_mode(n, l, mode, amplitude, 1.0, regime.beta);
    let mut s = WaveState::new(l, &eta, &u, 1.0, regime)?;
    let steps = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, s.eta_mode_amplitude(mode)));
    for _ in 0..steps {
        s.step(dt, switches)?;
        out.push((s.t, s.eta_mode_amplitude(mode)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn regime(eps: f64) -> RegimeParams {
        RegimeParams::regime(eps, 1.0, 1.0, 1.0).unwrap()
    }

    fn wave(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect()
    }

    #[test]
    fn flat_state_is_steady() {
        let s = WaveState::new(2.0 * PI, &vec![0.3; 32], &vec![0.0; 32], 1.0, regime(0.1)).unwrap();
        let (e, u) = s.rhs(&ModelSwitches::INVISCID_LINEAR).unwrap();
        assert!(e.iter().chain(&u).all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn single_mode_linear_rhs() {
        let r = regime(0.1);
        let s = WaveState::new(2.0 * PI, &wave(32, |x| (2.0 * x).cos()), &vec![0.0; 32], 1.0, r).unwrap();
        let (e, u) = s.rhs(&ModelSwitches::INVISCID_LINEAR).unwrap();
        for (j, (ej, uj)) in e.iter().zip(&u).enumerate() {
            let x = 2.0 * PI * j as f64 / 32.0;
            assert!((uj - 2.0 * (2.0 * x).sin()).abs() < 1e-13);
            assert!(ej.abs() < 1e-13);
        }
        // u = cos(2x): eta_t = 2 sin(2x) / (1 + beta/3 * 4)
        let s = WaveState::new(2.0 * PI, &vec![0.0; 32], &wave(32, |x| (2.0 * x).cos()), 1.0, r).unwrap();
        let (e, _) = s.rhs(&ModelSwitches::INVISCID_LINEAR).unwrap();
        let m = 1.0 + r.beta / 3.0 * 4.0;
        for (j, ej) in e.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 32.0;
            assert!((ej - 2.0 * (2.0 * x).sin() / m).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_invertible_factor() {
        let r = RegimeParams::regime(0.5, 1.0, 1.0, 1.0).unwrap();
        let err = WaveState::new(2.0 * PI, &vec![0.0; 64], &vec![0.0; 64], 0.0, r).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(ModelSwitches { viscous_convolution: false, ic_term: true, nonlinear: false }.validate().is_err());
    }

    #[test]
    fn rejects_dry_bottom() {
        let r = RegimeParams::regime(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(WaveState::new(2.0 * PI, &[-3.0; 16], &[0.0; 16], 1.0, r).is_err());
    }

    #[test]
    fn zero_state_stays_zero() {
        let mut s = WaveState::new(2.0 * PI, &[0.0; 16], &[0.0; 16], 1.0, regime(0.1)).unwrap();
        for _ in 0..10 {
            s.step(0.5, &ModelSwitches::VISCOUS).unwrap();
        }
        assert!(s.eta.iter().chain(&s.u).all(|&v| v == 0.0));
    }

    #[test]
    fn inviscid_mode_keeps_its_amplitude() {
        let run = mode_amplitude_run(regime(0.1), 32, 1, 1e-3, 1e-3, 1.0, &ModelSwitches::INVISCID_LINEAR).unwrap();
        let a0 = run[0].1;
        assert!(run.iter().all(|&(_, a)| ((a - a0) / a0).abs() < 1e-6));
        let fit = measure_decay(&run).unwrap();
        assert!(fit.slope.abs() < 1e-6);
    }

    #[test]
    fn memory_matches_direct_quadrature() {
        let r = regime(0.1);
        let (eta, u) = linear_mode(16, 2.0 * PI, 1, 1e-2, 1.0, r.beta);
        let mut s = WaveState::new(2.0 * PI, &eta, &u, 1.0, r).unwrap();
        let dt = 1e-2;
        for step in 1..=300 {
            s.step(dt, &ModelSwitches::VISCOUS).unwrap();
            if step % 100 == 0 {
                let re: Vec<f64> = s.mode_memory[1].iter().map(|c| c.re).collect();
                let im: Vec<f64> = s.mode_memory[1].iter().map(|c| c.im).collect();
                let h = |v: Vec<f64>| crate::kernels::SampledHistory::new(0.0, dt, v).unwrap();
                let t = s.t;
                let direct = Complex64::new(
                    crate::oracles::direct_half_convolution(&h(re), t).unwrap(),
                    crate::oracles::direct_half_convolution(&h(im), t).unwrap(),
                );
                let c = s.memory_convolution(1);
                assert!((c - direct).norm() <= 1e-10 * direct.norm().max(1e-300), "{c} vs {direct}");
            }
        }
    }

    #[test]
    fn reversibility() {
        let r = regime(0.1);
        let eta0 = wave(32, |x| 1e-3 * (x.cos() + 0.5 * (2.0 * x).sin()));
        let u0 = wave(32, |x| 1e-3 * (0.3 * x.sin()));
        let mut s = WaveState::new(2.0 * PI, &eta0, &u0, 1.0, r).unwrap();
        let dt = 1e-4;
        for _ in 0..10_000 {
            s.step(dt, &ModelSwitches::INVISCID_LINEAR).unwrap();
        }
        let u_neg: Vec<f64> = s.u.iter().map(|v| -v).collect();
        let mut back = WaveState::new(2.0 * PI, &s.eta, &u_neg, 1.0, r).unwrap();
        for _ in 0..10_000 {
            back.step(dt, &ModelSwitches::INVISCID_LINEAR).unwrap();
        }
        let ref_eta = WaveState::new(2.0 * PI, &eta0, &u0, 1.0, r).unwrap();
        for (a, b) in back.eta.iter().zip(&ref_eta.eta) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in back.u.iter().zip(&ref_eta.u) {
            assert!((a + b).abs() < 1e-8);
        }
    }

    #[test]
    fn blowup_reports_last_finite_state() {
        let r = regime(0.1);
        let eta = wave(64, |x| 0.5 * (5.0 * x).cos());
        let mut s = WaveState::new(2.0 * PI, &eta, &vec![0.0; 64], 1.0, r).unwrap();
        let mut result = Ok(());
        for _ in 0..2000 {
            result = s.step(5.0, &ModelSwitches::INVISCID);
            if result.is_err() {
                break;
            }
        }
        match result {
            Err(Error::Blowup { last_finite, .. }) => {
                assert!(last_finite.eta.iter().all(|v| v.is_finite()));
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn ic_memory_term_enters_mass_equation() {
        let r = regime(0.1);
        let u0 = wave(32, |x| 0.1 * x.cos());
        let s = WaveState::new(2.0 * PI, &vec![0.0; 32], &u0, 1.0, r).unwrap().with_initial_boundary_layer(F0Preset::Exp);
        let (with, _) = s.rhs(&ModelSwitches::FULL).unwrap();
        let (without, _) = s.rhs(&ModelSwitches::VISCOUS).unwrap();
        // f0x = -0.1 sin(x) G(gamma), int G = 1 for G = g e^{-g}
        let m = 1.0 + r.beta / 3.0;
        for (j, (a, b)) in with.iter().zip(&without).enumerate() {
            let x = 2.0 * PI * j as f64 / 32.0;
            assert!(((a - b) - r.epsilon * 0.1 * x.sin() / m).abs() < 1e-12);
        }
    }

    #[test]
    fn bcs_examples() {
        let p = bcs_map(1.0, 1.0, 1.0, 0.3).unwrap();
        assert_eq!((p.a_bcs, p.c_bcs, p.d_bcs), (0.0, 0.0, 0.0));
        assert!((p.b_bcs - 0.1).abs() < 1e-16);
        let p = bcs_map(0.2, 0.7, 1.0 / 3f64.sqrt(), 0.3).unwrap();
        assert!(p.a_bcs.abs() < 1e-16 && p.b_bcs.abs() < 1e-16);
    }

    #[test]
    fn transfer_is_identity_at_same_height() {
        let r = regime(0.1);
        let s = WaveState::new(2.0 * PI, &wave(16, f64::cos), &wave(16, f64::sin), 1.0, r).unwrap();
        let (e, _) = s.rhs(&ModelSwitches::INVISCID).unwrap();
        assert_eq!(s.transfer_velocity(&e, 1.0), s.u);
    }

    proptest::proptest! {
        #[test]
        fn bcs_sum_identity(a in -3.0f64..3.0, c in -3.0f64..3.0, z in 0.0f64..1.0, beta in 1e-4f64..1.0) {
            let p = bcs_map(a, c, z, beta).unwrap();
            proptest::prop_assert!((p.sum() - beta / 3.0).abs() < 1e-15);
        }
    }
}
