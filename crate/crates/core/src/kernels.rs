//! Singular-kernel machinery shared by the boundary layer, Boussinesq and
//! KdV solvers.
//!
//! Convolutions against `s^(-1/2)` use product integration: the sampled
//! signal is interpolated linearly and each panel is integrated against the
//! kernel exactly, so the singularity at `s = 0` is never sampled.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use libm::erf;

use crate::error::{ensure_positive, Error, Result};
use crate::quad;

/// Uniformly sampled scalar signal; sample `j` sits at `t0 + j dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledHistory {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl SampledHistory {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        ensure_positive("dt", dt)?;
        if values.is_empty() {
            return Err(Error::Domain("history must hold at least one sample".into()));
        }
        Ok(Self { t0, dt, values })
    }

    /// Samples `f` at `t0, t0 + dt, ..., t0 + n dt`.
    pub fn from_fn(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(t0, dt, (0..=n).map(|j| f(t0 + j as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    /// Index of the sample at time `t`, if `t` is (to rounding) a grid point.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.t0) / self.dt;
        let j = x.round();
        if (x - j).abs() > 1e-8 * x.abs().max(1.0) || j < 0.0 || j as usize >= self.values.len() {
            return Err(Error::Range(format!(
                "t = {t} is not a sample time of the history on [{}, {}] with dt = {}",
                self.t0,
                self.t_end(),
                self.dt
            )));
        }
        Ok(j as usize)
    }

    /// Piecewise-linear interpolant at `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let x = (t - self.t0) / self.dt;
        let last = (self.values.len() - 1) as f64;
        if !(x >= -1e-9 && x <= last + 1e-9) {
            return Err(Error::Range(format!(
                "t = {t} outside sampled range [{}, {}]",
                self.t0,
                self.t_end()
            )));
        }
        let x = x.clamp(0.0, last);
        let j = (x.floor() as usize).min(self.values.len().saturating_sub(2));
        if self.values.len() == 1 {
            return Ok(self.values[0]);
        }
        let w = x - j as f64;
        Ok(self.values[j] * (1.0 - w) + self.values[j + 1] * w)
    }

    /// Centred differences inside, second-order one-sided at the ends.
    pub fn derivative(&self) -> Result<SampledHistory> {
        let v = &self.values;
        let n = v.len();
        if n < 3 {
            return Err(Error::Range("differentiation needs at least three samples".into()));
        }
        let h = self.dt;
        let mut d = Vec::with_capacity(n);
        d.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h));
        for j in 1..n - 1 {
            d.push((v[j + 1] - v[j - 1]) / (2.0 * h));
        }
        d.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h));
        SampledHistory::new(self.t0, self.dt, d)
    }
}

/// Product-integration weights for `int_0^t g(t - s) s^(-1/2) ds`.
///
/// Panel `j` covers `s in [j dt, (j+1) dt]`; `a[j]` multiplies the sample at
/// its left end (`g(t - j dt)`) and `b[j]` the one at its right end.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfKernelWeights {
    pub dt: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl HalfKernelWeights {
    pub fn new(dt: f64, panels: usize) -> Result<Self> {
        ensure_positive("dt", dt)?;
        let mut w = Self { dt, a: Vec::new(), b: Vec::new() };
        w.ensure(panels);
        Ok(w)
    }

    pub fn panels(&self) -> usize {
        self.a.len()
    }

    /// Grows the tables to cover at least `panels` panels.
    pub fn ensure(&mut self, panels: usize) {
        for j in self.a.len()..panels {
            // Rationalised forms of
            //   a_j = 2(j+1)(r1 - r0) - (2/3)(r1^3 - r0^3),
            //   b_j = (2/3)(r1^3 - r0^3) - 2j(r1 - r0),
            // which cancel badly for large j.
            let jf = j as f64;
            let (r0, r1) = (jf.sqrt(), (jf + 1.0).sqrt());
            let a = (2.0 / 3.0) * (3.0 * jf + 4.0) / ((r1 + r0) * (jf + 2.0 + r0 * r1));
            let tail = if j == 0 { 0.0 } else { jf / (r0 * r1 + jf) };
            let b = (2.0 / 3.0) * (1.0 + tail) / (r1 + r0);
            self.a.push(a * self.dt.sqrt());
            self.b.push(b * self.dt.sqrt());
        }
    }

    /// Left/right weights of panel `j` (already scaled by `sqrt(dt)`).
    pub fn panel(&self, j: usize) -> (f64, f64) {
        (self.a[j], self.b[j])
    }

    /// Convolution up to sample `n` of `values` (which starts at time 0).
    pub fn convolve(&self, values: &[f64], n: usize) -> f64 {
        assert!(n < values.len() && n <= self.a.len(), "weights or samples too short");
        (0..n).map(|j| self.a[j] * values[n - j] + self.b[j] * values[n - j - 1]).sum()
    }

    pub fn convolve_complex(&self, values: &[Complex64], n: usize) -> Complex64 {
        assert!(n < values.len() && n <= self.a.len(), "weights or samples too short");
        (0..n).map(|j| self.a[j] * values[n - j] + self.b[j] * values[n - j - 1]).sum()
    }
}

/// `int_0^t g(t - s) / sqrt(s) ds` with `t = t_index dt` measured from the
/// first sample.
pub fn convolve_half(history: &SampledHistory, t_index: usize) -> Result<f64> {
    if t_index >= history.len() {
        return Err(Error::Range(format!(
            "t_index {t_index} beyond history of length {}",
            history.len()
        )));
    }
    let w = HalfKernelWeights::new(history.dt, t_index)?;
    Ok(w.convolve(&history.values, t_index))
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be positive, got t = {t}")))
    }
}

/// Inverse Laplace transform of `exp(-a sqrt(p))`.
pub fn inv_laplace_gauss(a: f64, t: f64) -> Result<f64> {
    ensure_positive("a", a)?;
    check_time(t)?;
    Ok(a / (2.0 * PI.sqrt() * t.powf(1.5)) * (-a * a / (4.0 * t)).exp())
}

/// Inverse Laplace transform of `exp(-a sqrt(p)) / sqrt(p)`; `a = 0` is allowed.
pub fn inv_laplace_gauss_over_sqrtp(a: f64, t: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("a must be non-negative, got {a}")));
    }
    check_time(t)?;
    Ok((-a * a / (4.0 * t)).exp() / (PI * t).sqrt())
}

/// `int_0^inf f0x(g) erf(A(t) g) dg` with `A(t) = sqrt(R sqrt(b) / (4 t))`: the
/// memory of a non-Euler initial boundary layer.
pub fn initial_memory_term(f0x: &dyn Fn(f64) -> f64, t: f64, r: f64, b: f64) -> Result<f64> {
    check_time(t)?;
    ensure_positive("R", r)?;
    ensure_positive("b", b)?;
    let big_a = (r * b.sqrt() / (4.0 * t)).sqrt();
    Ok(erf_weighted_integral(f0x, big_a))
}

/// `int_0^inf f(g) erf(A g) dg`, truncated where `|f| < 1e-12`.
pub(crate) fn erf_weighted_integral(f: &dyn Fn(f64) -> f64, big_a: f64) -> f64 {
    let cut = quad::tail_cutoff(&f, 1e-12);
    // erf(A g) turns over on the scale 1/A; split there so small t stays cheap.
    let knee = (4.0 / big_a).min(cut);
    let g = |x: f64| f(x) * erf(big_a * x);
    quad::integrate(g, 0.0, knee, 1e-14, 1e-13) + quad::integrate(g, knee, cut, 1e-14, 1e-13)
}

/// Fourier multiplier of `eta -> int_0^inf eta_xi(xi + s) / sqrt(s) ds`.
pub fn half_derivative_symbol(k: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = Complex64::from_polar(1.0, k.signum() * FRAC_PI_4);
    Complex64::new(0.0, k) * (PI / k.abs()).sqrt() * phase
}

/// Fourier multiplier of `eta -> int eta_xi(xi') sgn(xi - xi') / sqrt|xi - xi'| dxi'`.
///
/// It is real and positive: `sqrt(2 pi |k|)`.
pub fn ott_sudan_symbol(k: f64) -> Complex64 {
    Complex64::new((2.0 * PI * k.abs()).sqrt(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use proptest::prelude::*;

    fn hist(dt: f64, t: f64, f: impl Fn(f64) -> f64) -> (SampledHistory, usize) {
        let n = (t / dt).round() as usize;
        (SampledHistory::from_fn(0.0, dt, n, f).unwrap(), n)
    }

    #[test]
    fn closed_form_convolutions() {
        let (h, n) = hist(1e-2, 1.0, |_| 1.0);
        assert!((convolve_half(&h, n).unwrap() - 2.0).abs() < 1e-13);
        let (h, n) = hist(1e-2, 1.0, |s| s);
        assert!((convolve_half(&h, n).unwrap() - 4.0 / 3.0).abs() < 1e-13);
        let (h, n) = hist(1e-3, 1.0, f64::sqrt);
        assert!((convolve_half(&h, n).unwrap() - PI / 2.0).abs() < 1e-3);
        let (h, _) = hist(0.1, 1.0, |_| 1.0);
        assert_eq!(convolve_half(&h, 0).unwrap(), 0.0);
        assert!(convolve_half(&h, 11).is_err());
    }

    #[test]
    fn weights_match_naive_moments() {
        let w = HalfKernelWeights::new(1.0, 40).unwrap();
        assert!((w.panel(0).0 - 4.0 / 3.0).abs() < 1e-15);
        assert!((w.panel(0).1 - 2.0 / 3.0).abs() < 1e-15);
        for j in 1..40 {
            let (r0, r1) = ((j as f64).sqrt(), (j as f64 + 1.0).sqrt());
            let a = 2.0 * (j as f64 + 1.0) * (r1 - r0) - 2.0 / 3.0 * (r1.powi(3) - r0.powi(3));
            let b = 2.0 / 3.0 * (r1.powi(3) - r0.powi(3)) - 2.0 * j as f64 * (r1 - r0);
            assert!((w.panel(j).0 - a).abs() < 1e-12 * a);
            assert!((w.panel(j).1 - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn sqrt_signal_converges_faster_than_first_order() {
        let err = |dt: f64| {
            let (h, n) = hist(dt, 1.0, f64::sqrt);
            (convolve_half(&h, n).unwrap() - PI / 2.0).abs()
        };
        let order = (err(1e-2) / err(1e-3)).log10();
        assert!(order >= 1.5, "observed order {order}");
    }

    #[test]
    fn agrees_with_direct_quadrature() {
        let (h, n) = hist(1e-2, 0.7, |s| (3.0 * s).sin() + s * s);
        let direct = oracles::direct_half_convolution(&h, 0.7).unwrap();
        assert!((convolve_half(&h, n).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn gauss_kernel_values() {
        assert!((inv_laplace_gauss(2.0, 1.0).unwrap() - (-1f64).exp() / PI.sqrt()).abs() < 1e-15);
        assert!((inv_laplace_gauss(2.0, 1.0).unwrap() - 0.20755).abs() < 1e-5);
        assert!(inv_laplace_gauss(1.0, 1e12).unwrap() < 1e-17);
        assert!(inv_laplace_gauss(1.0, 0.0).is_err());
        assert!(inv_laplace_gauss(0.0, 1.0).is_err());
        assert!((inv_laplace_gauss_over_sqrtp(1e-12, 1.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((inv_laplace_gauss_over_sqrtp(1.0, 0.25).unwrap() - 0.41511).abs() < 1e-5);
        assert!(inv_laplace_gauss_over_sqrtp(1.0, -1.0).is_err());
    }

    #[test]
    fn gauss_kernel_has_unit_mass() {
        for a in [0.3, 1.0, 4.0] {
            let m = quad::integrate(|x: f64| inv_laplace_gauss(a, x.exp()).unwrap() * x.exp(), -30.0, 70.0, 1e-12, 1e-12);
            assert!((m - 1.0).abs() < 1e-8, "a = {a}: {m}");
        }
    }

    #[test]
    fn a_derivative_links_the_two_kernels() {
        let h = 1e-5;
        for (a, t) in [(0.5, 0.3), (1.0, 1.0), (2.0, 4.0)] {
            let d = (inv_laplace_gauss_over_sqrtp(a + h, t).unwrap() - inv_laplace_gauss_over_sqrtp(a - h, t).unwrap()) / (2.0 * h);
            assert!((-d - inv_laplace_gauss(a, t).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn initial_memory_term_values() {
        assert_eq!(initial_memory_term(&|_| 0.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
        let f = |g: f64| (-g).exp();
        assert!((initial_memory_term(&f, 1e-10, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-4);
        // A(t) = 1 at t = R sqrt(b) / 4.
        let v = initial_memory_term(&f, 0.25, 1.0, 1.0).unwrap();
        let closed = 0.25f64.exp() * libm::erfc(0.5);
        assert!((v - closed).abs() < 1e-12);
        let two_d = oracles::quad2d(
            &|g2: f64, g1: f64| 2.0 / PI.sqrt() * (-g2).exp() * (-g1 * g1).exp(),
            (0.0, 40.0),
            &|g2| (0.0, g2),
            1e-11,
        );
        assert!((v - two_d).abs() < 1e-8, "{v} vs {two_d}");
        assert!(initial_memory_term(&f, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn symbols() {
        assert_eq!(half_derivative_symbol(0.0), Complex64::new(0.0, 0.0));
        assert!((half_derivative_symbol(1.0).norm() - PI.sqrt()).abs() < 1e-15);
        for k in [0.5, 1.0, 3.0] {
            assert!((half_derivative_symbol(-k) - half_derivative_symbol(k).conj()).norm() < 1e-15);
        }
        let osc = oracles::oscillatory_half_integral(1.0, 200.0);
        let expect = half_derivative_symbol(1.0) / Complex64::new(0.0, 1.0);
        assert!((osc - expect).norm() < 1e-6);
    }

    proptest! {
        #[test]
        fn convolution_is_linear(xs in proptest::collection::vec(-1.0f64..1.0, 30),
                                 ys in proptest::collection::vec(-1.0f64..1.0, 30),
                                 lam in -3.0f64..3.0) {
            let w = HalfKernelWeights::new(0.05, 29).unwrap();
            let zs: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x + lam * y).collect();
            let lhs = w.convolve(&zs, 29);
            let rhs = w.convolve(&xs, 29) + lam * w.convolve(&ys, 29);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn linear_histories_are_exact(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, n in 1usize..200) {
            let dt = 1.0 / n as f64;
            let h = SampledHistory::from_fn(0.0, dt, n, |s| c0 + c1 * s).unwrap();
            let t: f64 = 1.0;
            let exact = c0 * 2.0 * t.sqrt() + c1 * 4.0 / 3.0 * t.powf(1.5);
            prop_assert!((convolve_half(&h, n).unwrap() - exact).abs() < 1e-13);
        }

        #[test]
        fn memory_term_decreases_in_time(t1 in 0.01f64..5.0, dt in 0.01f64..5.0, lam in 0.3f64..3.0) {
            let f = move |g: f64| (-lam * g).exp() * g;
            let a = initial_memory_term(&f, t1, 1.0, 1.0).unwrap();
            let b = initial_memory_term(&f, t1 + dt, 1.0, 1.0).unwrap();
            prop_assert!(b <= a + 1e-13);
        }
    }
}
