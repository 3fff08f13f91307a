//! Fourier pseudospectral helpers on a periodic grid of `n = 2^m` points.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Spectral {
    n: usize,
    l: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    cutoff: usize,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).field("l", &self.l).finish()
    }
}

impl Spectral {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size must be a power of two >= 4, got {n}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Config(format!("domain length must be positive, got {l}")));
        }
        let mut planner = FftPlanner::new();
        let k = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * m / l
            })
            .collect();
        Ok(Self {
            n,
            l,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            k,
            cutoff: n / 3,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.l
    }

    /// Signed wavenumber of FFT slot `j`.
    pub fn k(&self, j: usize) -> f64 {
        self.k[j]
    }

    /// Largest retained mode index under the 2/3 rule.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn retained(&self, j: usize) -> bool {
        let m = if j <= self.n / 2 { j } else { self.n - j };
        m <= self.cutoff
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 * self.l / self.n as f64).collect()
    }

    /// Unnormalised forward transform.
    pub fn forward(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform (divides by `n`), keeping the real part.
    pub fn inverse(&self, xh: &[Complex64]) -> Vec<f64> {
        let mut buf = xh.to_vec();
        self.inverse.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    /// Zeroes every mode above the 2/3 cutoff, and the Nyquist mode.
    pub fn dealias(&self, xh: &mut [Complex64]) {
        for (j, v) in xh.iter_mut().enumerate() {
            if !self.retained(j) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Restores exact Hermitian symmetry of a real field's spectrum.
    pub fn symmetrize(&self, xh: &mut [Complex64]) {
        let n = self.n;
        xh[0].im = 0.0;
        xh[n / 2] = Complex64::new(xh[n / 2].re, 0.0);
        for j in 1..n / 2 {
            let v = 0.5 * (xh[j] + xh[n - j].conj());
            xh[j] = v;
            xh[n - j] = v.conj();
        }
    }

    /// Multiplies slot `j` by `(i k_j)^order`.
    pub fn differentiate_hat(&self, xh: &[Complex64], order: u32) -> Vec<Complex64> {
        xh.iter()
            .enumerate()
            .map(|(j, &v)| {
                if j == self.n / 2 && order % 2 == 1 {
                    return Complex64::new(0.0, 0.0);
                }
                v * Complex64::new(0.0, self.k[j]).powu(order)
            })
            .collect()
    }

    pub fn derivative(&self, x: &[f64], order: u32) -> Vec<f64> {
        self.inverse(&self.differentiate_hat(&self.forward(x), order))
    }

    /// Spectrum of `a b` with everything above the cutoff removed.
    pub fn product_hat(&self, a: &[f64], b: &[f64]) -> Vec<Complex64> {
        let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        let mut ph = self.forward(&p);
        self.dealias(&mut ph);
        ph
    }

    /// Shifts a periodic field by `shift` (positive moves it right) via the
    /// Fourier shift theorem.
    pub fn shift(&self, x: &[f64], shift: f64) -> Vec<f64> {
        let xh = self.forward(x);
        let shifted: Vec<Complex64> = xh
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                if j == self.n / 2 {
                    // Nyquist: keep the real, shift-consistent part.
                    v * (self.k[j] * shift).cos()
                } else {
                    v * Complex64::from_polar(1.0, -self.k[j] * shift)
                }
            })
            .collect();
        self.inverse(&shifted)
    }
}
