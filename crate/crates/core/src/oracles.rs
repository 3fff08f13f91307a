//! Brute-force validators. None of these share kernels, weights or
//! quadrature rules with the solvers they check: integrals go through
//! adaptive Simpson or Gauss–Legendre panels, the heat equation through
//! Crank–Nicolson.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::Matrix4;
use crate::error::{ensure_positive, Error, Result};
use crate::kernels::SampledHistory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdHeatConfig {
    pub gamma_max: f64,
    /// Number of grid points including both boundaries.
    pub n_gamma: usize,
    pub dt: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub b: f64,
}

/// Boundary-layer velocity on the finite-difference grid at the requested times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdHeatField {
    pub gamma: Vec<f64>,
    pub times: Vec<f64>,
    /// `u[time][gamma]`.
    pub u: Vec<Vec<f64>>,
}

const FAR_FIELD_LIMIT: f64 = 1e-10;
const STARTUP_STEPS: usize = 2;

fn thomas(sub: f64, diag: f64, sup: f64, rhs: &mut [f64]) {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    c[0] = sup / diag;
    rhs[0] /= diag;
    for i in 1..n {
        let m = diag - sub * c[i - 1];
        c[i] = sup / m;
        rhs[i] = (rhs[i] - sub * rhs[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Solves `f_t = f_gg / (R sqrt(b))` with `f(0, t) = -U(t)`, `f(gamma_max, t) = 0`,
/// `f(g, 0) = f0(g)` by Crank–Nicolson, and returns `u = f + U`.
///
/// The first two steps are replaced by four implicit-Euler half steps so
/// that the jump between `f0(0)` and `-U(0+)` does not excite the
/// undamped high-frequency CN modes.
pub fn fd_heat(
    cfg: &FdHeatConfig,
    f0: &dyn Fn(f64) -> f64,
    freestream: &SampledHistory,
    output_times: &[f64],
) -> Result<FdHeatField> {
    ensure_positive("gamma_max", cfg.gamma_max)?;
    ensure_positive("dt", cfg.dt)?;
    ensure_positive("R", cfg.r)?;
    ensure_positive("b", cfg.b)?;
    if cfg.n_gamma < 3 {
        return Err(Error::Domain("n_gamma must be at least 3".into()));
    }
    let kappa = cfg.r * cfg.b.sqrt();
    let n = cfg.n_gamma - 1;
    let dg = cfg.gamma_max / n as f64;
    let gamma: Vec<f64> = (0..=n).map(|i| i as f64 * dg).collect();
    let mut f: Vec<f64> = gamma.iter().map(|&g| f0(g)).collect();
    f[n] = 0.0;

    let targets: Vec<usize> = output_times
        .iter()
        .map(|&t| {
            let s = t / cfg.dt;
            if t < 0.0 || (s - s.round()).abs() > 1e-8 * s.max(1.0) {
                Err(Error::Domain(format!("output time {t} is not a multiple of dt = {}", cfg.dt)))
            } else {
                Ok(s.round() as usize)
            }
        })
        .collect::<Result<_>>()?;
    let last = targets.iter().copied().max().unwrap_or(0);
    let u_at = |t: f64| freestream.value_at(t);

    let mut out = vec![Vec::new(); targets.len()];
    // u(0, 0) is the initial profile; the no-slip value only holds for t > 0.
    for (slot, &s) in out.iter_mut().zip(&targets) {
        if s == 0 {
            let uu = u_at(0.0)?;
            *slot = f.iter().map(|v| v + uu).collect();
        }
    }
    let mut record = |step: usize, f: &[f64]| -> Result<()> {
        for (slot, &s) in out.iter_mut().zip(&targets) {
            if s == step {
                let uu = u_at(step as f64 * cfg.dt)?;
                *slot = f.iter().map(|v| v + uu).collect();
                if f[n - 1].abs() > FAR_FIELD_LIMIT {
                    return Err(Error::DomainTooSmall { value: f[n - 1].abs() });
                }
            }
        }
        Ok(())
    };

    let mut rhs = vec![0.0; n - 1];
    let implicit_euler = |f: &mut Vec<f64>, rhs: &mut Vec<f64>, h: f64, t_new: f64| -> Result<()> {
        let lam = h / (kappa * dg * dg);
        let bottom = -u_at(t_new)?;
        rhs.copy_from_slice(&f[1..n]);
        rhs[0] += lam * bottom;
        thomas(-lam, 1.0 + 2.0 * lam, -lam, rhs);
        f[0] = bottom;
        f[1..n].copy_from_slice(rhs);
        Ok(())
    };
    let lam = cfg.dt / (kappa * dg * dg);
    for step in 1..=last {
        let t_new = step as f64 * cfg.dt;
        if step <= STARTUP_STEPS {
            implicit_euler(&mut f, &mut rhs, 0.5 * cfg.dt, t_new - 0.5 * cfg.dt)?;
            implicit_euler(&mut f, &mut rhs, 0.5 * cfg.dt, t_new)?;
        } else {
            let bottom = -u_at(t_new)?;
            for i in 1..n {
                rhs[i - 1] = (1.0 - lam) * f[i] + 0.5 * lam * (f[i - 1] + f[i + 1]);
            }
            rhs[0] += 0.5 * lam * bottom;
            thomas(-0.5 * lam, 1.0 + lam, -0.5 * lam, &mut rhs);
            f[0] = bottom;
            f[1..n].copy_from_slice(&rhs);
        }
        record(step, &f)?;
    }
    Ok(FdHeatField { gamma, times: output_times.to_vec(), u: out })
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // A few fixed panels first, so narrow features are not stepped over.
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_rec(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// `int_0^t g(t - s) / sqrt(s) ds` for the piecewise-linear interpolant of
/// `g`, by the substitution `s = v^2` (which removes the singularity) and
/// adaptive Simpson on each interpolation panel.
pub fn direct_half_convolution(g: &SampledHistory, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("t must be non-negative, got {t}")));
    }
    let t_abs = g.t0 + t;
    if t_abs > g.t_end() + 1e-12 * t_abs.abs().max(1.0) {
        return Err(Error::Range(format!("t = {t} beyond the sampled history")));
    }
    // Breakpoints of the interpolant in s, mapped to v = sqrt(s).
    let mut cuts = vec![0.0];
    let nodes = (t / g.dt).floor() as usize;
    for m in 0..=nodes {
        let s = t - m as f64 * g.dt;
        if s > 0.0 {
            cuts.push(s.sqrt());
        }
    }
    cuts.push(t.sqrt());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let f = |v: f64| 2.0 * g.value_at(g.t0 + (t - v * v).max(0.0)).unwrap_or(0.0);
    Ok(cuts.windows(2).map(|w| adaptive_simpson(f, w[0], w[1], 1e-14)).sum())
}

/// Leibniz expansion over the 24 permutations.
pub fn det4_permutation(m: &Matrix4) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    let mut p = [0usize, 1, 2, 3];
    // Heap's algorithm; the sign flips with every swap.
    let mut c = [0usize; 4];
    let mut sign = 1.0;
    let term = |p: &[usize; 4]| m[0][p[0]] * m[1][p[1]] * m[2][p[2]] * m[3][p[3]];
    total += sign * term(&p);
    let mut i = 0;
    while i < 4 {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            sign = -sign;
            total += sign * term(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

/// Nested adaptive Simpson over `{(x, y): x in x_range, y in y_limits(x)}`.
pub fn quad2d(
    f: &dyn Fn(f64, f64) -> f64,
    x_range: (f64, f64),
    y_limits: &dyn Fn(f64) -> (f64, f64),
    tol: f64,
) -> f64 {
    let width = (x_range.1 - x_range.0).abs().max(1.0);
    adaptive_simpson(
        |x| {
            let (lo, hi) = y_limits(x);
            adaptive_simpson(|y| f(x, y), lo, hi, tol / width)
        },
        x_range.0,
        x_range.1,
        tol,
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `int_0^inf e^{i k s} / sqrt(s) ds` by Gauss–Legendre panels on `(0, X)`
/// (after `s = v^2`) plus an integration-by-parts expansion of the tail.
pub fn oscillatory_half_integral(k: f64, x_max: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let (nodes, weights) = gauss_legendre(16);
    let v_max = x_max.sqrt();
    let panel = 0.25 / (k.abs() * v_max).max(1.0);
    let panels = (v_max / panel).ceil() as usize;
    let h = v_max / panels as f64;
    let mut body = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let c = (p as f64 + 0.5) * h;
        for (xn, wn) in nodes.iter().zip(&weights) {
            let v = c + 0.5 * h * xn;
            body += 0.5 * h * wn * 2.0 * (i * k * v * v).exp();
        }
    }
    // T(nu) = -e^{ikX} X^{-nu} / (ik) + nu / (ik) T(nu + 1)
    let ik = i * k;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut nu = 0.5;
    for _ in 0..12 {
        tail += coeff * (-(ik * x_max).exp() * x_max.powf(-nu) / ik);
        coeff *= nu / ik;
        nu += 1.0;
    }
    body + tail
}

/// `int_0^inf eta_xi(xi + s) / sqrt(s) ds` for `eta = sum_m amp_m cos(k_m xi + phase_m)`,
/// mode by mode through [`oscillatory_half_integral`].
pub fn km_nonlocal_direct(modes: &[(f64, f64, f64)], xi: f64, x_max: f64) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    modes
        .iter()
        .map(|&(k, amp, phase)| {
            if k == 0.0 {
                return 0.0;
            }
            let lead = i * amp * k * (i * (k * xi + phase)).exp();
            (lead * oscillatory_half_integral(k, x_max)).re
        })
        .sum()
}
