//! Linear dispersion relation of the viscous layer over a flat bottom.
//!
//! The determinant condition is evaluated after dividing by
//! `cosh(mu) cosh(k sqrt(beta))`, which keeps every term O(1) even when
//! `|mu| ~ sqrt(Re sqrt(beta))` is in the hundreds.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub k: f64,
    pub beta: f64,
    pub reynolds: f64,
}

impl DispersionPoint {
    pub fn new(k: f64, beta: f64, reynolds: f64) -> Result<Self> {
        ensure_positive("k", k)?;
        ensure_positive("beta", beta)?;
        ensure_positive("reynolds", reynolds)?;
        Ok(Self { k, beta, reynolds })
    }

    fn kb(&self) -> f64 {
        self.k * self.beta.sqrt()
    }
}

/// Which physical branch a root belongs to: mostly propagating or mostly damped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Gravity,
    Shear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    pub c: Complex64,
    pub mu: Complex64,
    /// `|residual|` relative to the sum of the magnitudes of its terms.
    pub residual_norm: f64,
    pub iterations: usize,
    pub branch: Branch,
}

/// Selects the residual Newton works on; `Raw` exists to check that the
/// rescaling moves no roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualForm {
    Rescaled,
    Raw,
}

pub fn mu_of(c: Complex64, pt: &DispersionPoint) -> Complex64 {
    let kb = pt.kb();
    let m2 = Complex64::new(kb * kb, 0.0) - I * (pt.reynolds * pt.beta.sqrt() * pt.k) * c;
    let m = m2.sqrt();
    if m.re < 0.0 || (m.re == 0.0 && m.im < 0.0) {
        -m
    } else {
        m
    }
}

// tanh and sech for Re(z) >= 0, safe against overflow.
fn tanh_c(z: Complex64) -> Complex64 {
    if z.re > 20.0 {
        let e = (-2.0 * z).exp();
        (1.0 - e) / (1.0 + e)
    } else {
        z.tanh()
    }
}

fn sech_c(z: Complex64) -> Complex64 {
    if z.re > 20.0 {
        let e = (-z).exp();
        2.0 * e / (1.0 + e * e)
    } else {
        1.0 / z.cosh()
    }
}

// Taylor coefficients of tanh(sqrt(y)) / sqrt(y).
const G_SERIES: [f64; 9] = [
    1.0,
    -1.0 / 3.0,
    2.0 / 15.0,
    -17.0 / 315.0,
    62.0 / 2835.0,
    -1382.0 / 155_925.0,
    21844.0 / 6_081_075.0,
    -929_569.0 / 638_512_875.0,
    6_404_582.0 / 10_854_718_875.0,
];
const SERIES_RADIUS: f64 = 0.05;

/// `mu tanh(K) - K tanh(mu)`, free of cancellation when both are small.
fn cross_bracket(mu: Complex64, kb: f64, tk: f64, tm: Complex64, k2_minus_mu2: Complex64) -> Complex64 {
    let y1 = Complex64::new(kb * kb, 0.0);
    let y2 = mu * mu;
    if y1.norm() <= SERIES_RADIUS && y2.norm() <= SERIES_RADIUS {
        // divided difference of the series: sum_n c_n (y1^n - y2^n)/(y1 - y2)
        let mut h = Complex64::new(1.0, 0.0);
        let mut y2n = y2;
        let mut dd = Complex64::new(0.0, 0.0);
        for &cn in &G_SERIES[1..] {
            dd += cn * h;
            h = y1 * h + y2n;
            y2n *= y2;
        }
        mu * kb * k2_minus_mu2 * dd
    } else {
        mu * tk - kb * tm
    }
}

struct Terms {
    sum: Complex64,
    scale: f64,
    mu: Complex64,
}

fn terms(c: Complex64, pt: &DispersionPoint) -> Terms {
    let mu = mu_of(c, pt);
    let (k, beta, re) = (pt.k, pt.beta, pt.reynolds);
    let kb = pt.kb();
    let bk2 = beta * k * k;
    let tk = kb.tanh();
    let sk = 1.0 / kb.cosh();
    let tm = tanh_c(mu);
    let sm = sech_c(mu);
    let mu2 = mu * mu;
    let k2_minus_mu2 = I * (re * beta.sqrt() * k) * c;
    let t1 = 4.0 * bk2 * mu * (bk2 + mu2) * sm * sk;
    let t2 = 4.0 * mu * k.powi(3) * beta.powf(1.5) * (mu * tk * tm - kb);
    let t3 = -(bk2 + mu2) * (bk2 + mu2) * (mu - kb * tk * tm);
    let t4 = -kb * re * re * cross_bracket(mu, kb, tk, tm, k2_minus_mu2);
    Terms {
        sum: t1 + t2 + t3 + t4,
        scale: t1.norm() + t2.norm() + t3.norm() + t4.norm(),
        mu,
    }
}

/// The dispersion relation divided by `cosh(mu) cosh(k sqrt(beta))`.
pub fn residual(c: Complex64, pt: &DispersionPoint) -> Result<Complex64> {
    let t = terms(c, pt);
    if t.sum.re.is_finite() && t.sum.im.is_finite() {
        Ok(t.sum)
    } else {
        Err(Error::Numeric(format!(
            "residual not finite at c = {c}, mu = {}, k = {}, beta = {}, Re = {}",
            t.mu, pt.k, pt.beta, pt.reynolds
        )))
    }
}

/// The dispersion relation without rescaling; fails once `cosh(mu)` overflows.
pub fn raw_residual(c: Complex64, pt: &DispersionPoint) -> Result<Complex64> {
    let mu = mu_of(c, pt);
    let kb = pt.kb();
    let scale = mu.cosh() * kb.cosh();
    let r = residual(c, pt)? * scale;
    if r.re.is_finite() && r.im.is_finite() {
        Ok(r)
    } else {
        Err(Error::Numeric(format!("raw residual overflows at mu = {mu}")))
    }
}

pub type Matrix4 = [[Complex64; 4]; 4];

/// The 4x4 boundary-condition matrix for the coefficients of
/// `cosh/sinh(k sqrt(beta) z)` and `cosh/sinh(mu z)` in the stream function.
pub fn raw_matrix(c: Complex64, pt: &DispersionPoint) -> Result<Matrix4> {
    let mu = mu_of(c, pt);
    if mu.re > 700.0 {
        return Err(Error::Numeric(format!("cosh(mu) overflows for mu = {mu}")));
    }
    let (k, beta, re) = (pt.k, pt.beta, pt.reynolds);
    let kb = pt.kb();
    let sb = beta.sqrt();
    let r = |x: f64| Complex64::new(x, 0.0);
    Ok([
        [r(kb * kb.sinh()), r(-kb * kb.cosh()), mu * mu.sinh(), -mu * mu.cosh()],
        [r(kb.cosh()), r(-kb.sinh()), mu.cosh(), -mu.sinh()],
        [r(2.0 * k * k * beta), r(0.0), mu * mu + beta * k * k, r(0.0)],
        [
            r(-k * k),
            sb * k.powi(3) * c * c + 2.0 * I * beta * k.powi(4) * c / re,
            r(-k * k),
            2.0 * I * mu * sb * k.powi(3) * c / re,
        ],
    ])
}

/// [`raw_matrix`] with the `k sqrt(beta)` columns divided by `cosh(k sqrt(beta))`
/// and the `mu` columns by `cosh(mu)`.
pub fn scaled_matrix(c: Complex64, pt: &DispersionPoint) -> Matrix4 {
    let mu = mu_of(c, pt);
    let (k, beta, re) = (pt.k, pt.beta, pt.reynolds);
    let kb = pt.kb();
    let sb = beta.sqrt();
    let (tk, sk) = (kb.tanh(), 1.0 / kb.cosh());
    let (tm, sm) = (tanh_c(mu), sech_c(mu));
    let r = |x: f64| Complex64::new(x, 0.0);
    [
        [r(kb * tk), r(-kb), mu * tm, -mu],
        [r(1.0), r(-tk), r(1.0), -tm],
        [r(2.0 * k * k * beta * sk), r(0.0), (mu * mu + beta * k * k) * sm, r(0.0)],
        [
            r(-k * k * sk),
            (sb * k.powi(3) * c * c + 2.0 * I * beta * k.powi(4) * c / re) * sk,
            -k * k * sm,
            2.0 * I * mu * sb * k.powi(3) * c / re * sm,
        ],
    ]
}

/// Determinant by LU factorisation with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn det4_lu(m: &Matrix4) -> Complex64 {
    let mut a = *m;
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..4 {
        let p = (col..4)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .expect("non-empty range");
        if a[p][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let piv = a[col][col];
        det *= piv;
        for row in col + 1..4 {
            let f = a[row][col] / piv;
            for j in col..4 {
                let v = a[col][j];
                a[row][j] -= f * v;
            }
        }
    }
    det
}

/// Determinant of [`scaled_matrix`]. Both column pairs are rescaled, so this is
/// `det(raw) / (cosh(mu) cosh(k sqrt(beta)))^2`, i.e.
/// `(i k^2 c / Re) sech(mu) sech(k sqrt(beta))` times [`residual`].
pub fn scaled_determinant(c: Complex64, pt: &DispersionPoint) -> Result<Complex64> {
    let d = det4_lu(&scaled_matrix(c, pt));
    if d.re.is_finite() && d.im.is_finite() {
        Ok(d)
    } else {
        Err(Error::Numeric(format!("scaled determinant not finite at c = {c}")))
    }
}

/// Newton on the rescaled residual starting from `guess`.
pub fn solve_c(pt: &DispersionPoint, guess: Complex64, tol: f64) -> Result<DispersionResult> {
    solve_c_with(pt, guess, tol, ResidualForm::Rescaled)
}

pub fn solve_c_with(
    pt: &DispersionPoint,
    guess: Complex64,
    tol: f64,
    form: ResidualForm,
) -> Result<DispersionResult> {
    if !(guess.re.is_finite() && guess.im.is_finite()) {
        return Err(Error::Domain(format!("guess must be finite, got {guess}")));
    }
    ensure_positive("tol", tol)?;
    // The relation is odd in mu; dividing by mu gives a function that is even
    // in mu and hence holomorphic in c across the branch cut of mu.
    let f = |c: Complex64| -> Result<Complex64> {
        let r = match form {
            ResidualForm::Rescaled => residual(c, pt)?,
            ResidualForm::Raw => raw_residual(c, pt)?,
        };
        Ok(r / mu_of(c, pt))
    };
    let relative = |c: Complex64| {
        let t = terms(c, pt);
        let r = t.sum.norm() / t.scale;
        if r.is_finite() {
            r
        } else if t.sum.norm() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };

    let mut c = guess;
    let mut trace = Vec::new();
    let mut best = (c, f64::INFINITY);
    for it in 0..MAX_ITER {
        let rel = relative(c);
        trace.push(rel);
        if rel < best.1 {
            best = (c, rel);
        }
        if rel < tol {
            return Ok(finish(pt, c, rel, it));
        }
        let h = 1e-7 * c.norm().max(1.0);
        let fc = f(c)?;
        let d = (f(c + h)? - f(c - h)?) / (2.0 * h);
        let dc = fc / d;
        if !(dc.re.is_finite() && dc.im.is_finite()) {
            break;
        }
        c -= dc;
        if dc.norm() <= tol * c.norm() {
            let rel = relative(c);
            trace.push(rel);
            return Ok(finish(pt, c, rel, it + 1));
        }
    }
    log::debug!("solve_c: no convergence at {pt:?}, best residual {:.3e}", best.1);
    Err(Error::NoConvergence { best: best.0, best_residual: best.1, iterations: trace.len(), trace })
}

fn finish(pt: &DispersionPoint, c: Complex64, rel: f64, iterations: usize) -> DispersionResult {
    DispersionResult {
        c,
        mu: mu_of(c, pt),
        residual_norm: rel,
        iterations,
        branch: if c.re.abs() >= c.im.abs() { Branch::Gravity } else { Branch::Shear },
    }
}

/// Solves along `points`, seeding each Newton run with the previous root.
pub fn sweep(points: &[DispersionPoint], first_guess: Complex64, tol: f64) -> Vec<Result<DispersionResult>> {
    let mut guess = first_guess;
    points
        .iter()
        .map(|pt| {
            let r = solve_c(pt, guess, tol);
            if let Ok(res) = &r {
                guess = res.c;
            }
            r
        })
        .collect()
}

/// Inviscid phase speed `sqrt(tanh(K)/K)`, `K = k sqrt(beta)`.
pub fn inviscid_c(pt: &DispersionPoint) -> f64 {
    let kb = pt.kb();
    (kb.tanh() / kb).sqrt()
}

/// Large-Reynolds expansion: inviscid speed plus the boundary-layer correction.
pub fn asymptotic_large_re(pt: &DispersionPoint) -> Complex64 {
    let kb = pt.kb();
    let t = kb.tanh();
    let corr = pt.reynolds.powf(-0.5) * kb.powf(0.25) / (2.0 * t.powf(0.75));
    Complex64::new(inviscid_c(pt), 0.0) - Complex64::from_polar(corr, FRAC_PI_4)
}

/// `Im(k c)` of the large-Reynolds expansion.
pub fn decay_rate(pt: &DispersionPoint) -> f64 {
    let kb = pt.kb();
    -pt.k.powf(1.25) * pt.beta.powf(0.125) / (2.0 * SQRT_2 * pt.reynolds.sqrt() * kb.tanh().powf(0.75))
}

/// Long-wave form of [`decay_rate`] when `Re = R eps^(-5/2)`, `beta = b eps`.
pub fn decay_rate_regime(k: f64, epsilon: f64, r: f64, b: f64) -> f64 {
    -k.sqrt() * epsilon / (2.0 * SQRT_2 * (r * b.sqrt()).sqrt())
}

/// Moderate-Reynolds expansion, valid as `sqrt(beta) Re -> 0`; purely imaginary.
pub fn asymptotic_moderate_re(pt: &DispersionPoint) -> Complex64 {
    let (k, beta, re) = (pt.k, pt.beta, pt.reynolds);
    -I * (k * beta.sqrt() * re / 3.0) - I * (19.0 * k.powi(3) * beta.powf(1.5) * re.powi(3) / 90.0)
}
