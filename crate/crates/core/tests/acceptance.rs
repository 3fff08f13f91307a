//! Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{rngs::StdRng, Rng, SeedableRng};

use viscid_waves::blayer::{self, F0Preset, FreestreamPreset};
use viscid_waves::boussinesq::{self, ModelSwitches, WaveState};
use viscid_waves::dispersion::{self, DispersionPoint};
use viscid_waves::kdv::{self, KdvState, KernelVariant};
use viscid_waves::kernels::{convolve_half, SampledHistory};
use viscid_waves::oracles::{self, FdHeatConfig};
use viscid_waves::{validate, BoundaryLayerIC, RegimeParams, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

// 1. |c - c_large| / (beta^{-1/4} Re^{-1/2}) decreases along the distinguished sweep.
fn large_re() -> Result<Outcome> {
    let mut errs = Vec::new();
    for eps in [0.1f64, 0.05, 0.025] {
        let p = DispersionPoint::new(1.0, eps, eps.powf(-2.5))?;
        let guess = dispersion::asymptotic_large_re(&p);
        let c = dispersion::solve_c(&p, guess, 1e-13)?.c;
        errs.push((c - guess).norm() / (p.beta.powf(-0.25) / p.reynolds.sqrt()));
    }
    Ok(Outcome { pass: strictly_decreasing(&errs), detail: format!("scaled errors {errs:.6?}") })
}

// 2. |c - c_moderate| / (beta^{3/2} Re^3) decreases for sqrt(beta) Re -> 0 at Re = 10.
fn moderate_re() -> Result<Outcome> {
    let re = 10.0;
    let mut errs = Vec::new();
    for s in [0.1f64, 0.05, 0.025] {
        let beta = (s / re).powi(2);
        let p = DispersionPoint::new(1.0, beta, re)?;
        let guess = dispersion::asymptotic_moderate_re(&p);
        let c = dispersion::solve_c(&p, guess, 1e-13)?.c;
        errs.push((c - guess).norm() / (beta.powf(1.5) * re.powi(3)));
    }
    Ok(Outcome { pass: strictly_decreasing(&errs), detail: format!("scaled errors {errs:.6?}") })
}

fn layer_error(dg: f64, dt: f64) -> Result<f64> {
    let gamma_max = 12.0;
    let t = 0.5;
    let (fs, _) = FreestreamPreset::Step.histories(0.0, dt, (t / dt).round() as usize)?;
    let cfg = FdHeatConfig { gamma_max, n_gamma: (gamma_max / dg).round() as usize + 1, dt, r: 1.0, b: 1.0 };
    let shape = F0Preset::Gaussian.shape();
    let fd = oracles::fd_heat(&cfg, &shape, &fs, &[t])?;
    let ic = F0Preset::Gaussian.ic();
    let stride = (0.1 / dg).round() as usize;
    let (mut err, mut top) = (0.0f64, 0.0f64);
    for (i, &g) in fd.gamma.iter().enumerate().step_by(stride) {
        let u = blayer::heat_profile(&ic, &fs, 0.0, g, t, 1.0, 1.0)?;
        err = err.max((u - fd.u[0][i]).abs());
        top = top.max(u.abs());
    }
    Ok(err / top)
}

// 3. Closed-form profile vs Crank-Nicolson.
fn boundary_layer() -> Result<Outcome> {
    let coarse = layer_error(1e-2, 1e-3)?;
    let fine = layer_error(5e-3, 5e-4)?;
    let ratio = coarse / fine;
    Ok(Outcome {
        pass: coarse < 1e-3 && ratio >= 3.0,
        detail: format!("rel Linf {coarse:.3e}, refined {fine:.3e}, ratio {ratio:.2}"),
    })
}

// 4. Bottom shear stress.
fn shear() -> Result<Outcome> {
    let (r, b, u0, t): (f64, f64, f64, f64) = (4.0, 0.25, 1.5, 0.81);
    let fs = SampledHistory::from_fn(0.0, 0.01, 100, |_| u0)?;
    let exact = (r * b.sqrt()).sqrt() / PI.sqrt() * u0 / t.sqrt();
    let rayleigh = (blayer::bottom_shear(&fs, t, r, b)?.total(t) - exact).abs();

    let fs = SampledHistory::from_fn(0.0, 1e-4, 10_000, |s| s.sin() + 0.3 * s * s)?;
    let ic = BoundaryLayerIC::zero();
    let h = 1e-4;
    let u = |g: f64| blayer::heat_profile(&ic, &fs, 0.0, g, 1.0, 1.0, 1.0);
    let slope = (-3.0 * u(0.0)? + 4.0 * u(h)? - u(2.0 * h)?) / (2.0 * h);
    let s = blayer::bottom_shear(&fs, 1.0, 1.0, 1.0)?.total(1.0);
    let general = ((slope - s) / s).abs();
    Ok(Outcome {
        pass: rayleigh < 1e-10 && general < 1e-3,
        detail: format!("Rayleigh abs err {rayleigh:.3e}, smooth rel err {general:.3e}"),
    })
}

// 5. Closed-form half convolutions.
fn convolution() -> Result<Outcome> {
    let conv = |dt: f64, g: fn(f64) -> f64| -> Result<f64> {
        let n = (1.0 / dt).round() as usize;
        convolve_half(&SampledHistory::from_fn(0.0, dt, n, g)?, n)
    };
    let e_one = (conv(1e-2, |_| 1.0)? - 2.0).abs();
    let e_lin = (conv(1e-2, |s| s)? - 4.0 / 3.0).abs();
    let e1 = (conv(1e-2, f64::sqrt)? - PI / 2.0).abs();
    let e2 = (conv(5e-3, f64::sqrt)? - PI / 2.0).abs();
    let order = (e1 / e2).log2();
    Ok(Outcome {
        pass: e_one < 1e-13 && e_lin < 1e-13 && order >= 1.5,
        detail: format!("1: {e_one:.1e}, s: {e_lin:.1e}, sqrt(s) order {order:.3}"),
    })
}

// 6. Mass conservation over 1e4 steps.
fn conservation() -> Result<Outcome> {
    let regime = RegimeParams::regime(0.1, 1.0, 1.0, 1.0)?;
    let l = 2.0 * PI;
    let n = 64;
    let eta: Vec<f64> = (0..n).map(|j| 0.5 * (-4.0 * (j as f64 * l / n as f64 - PI).powi(2)).exp()).collect();
    let mut worst = Vec::new();
    for sw in [ModelSwitches::INVISCID, ModelSwitches::VISCOUS] {
        let mut s = WaveState::new(l, &eta, &eta, 1.0, regime)?;
        let m0 = s.mass();
        let mut drift = 0.0f64;
        for _ in 0..10_000 {
            s.step(1e-3, &sw)?;
            drift = drift.max((s.mass() - m0).abs());
        }
        worst.push(drift);
    }
    Ok(Outcome {
        pass: worst.iter().all(|&d| d <= 1e-12),
        detail: format!("max drift inviscid {:.2e}, viscous {:.2e}", worst[0], worst[1]),
    })
}

// 7. Decay of a small k = 1 mode.
fn linear_decay() -> Result<Outcome> {
    let rate = |eps: f64| -> Result<f64> {
        let regime = RegimeParams::regime(eps, 1.0, 1.0, 1.0)?;
        let run = boussinesq::mode_amplitude_run(regime, 16, 1, 1e-3, 0.01, 100.0, &ModelSwitches::VISCOUS_LINEAR)?;
        Ok(boussinesq::measure_decay(&run)?.slope)
    };
    let (r10, r05) = (rate(0.1)?, rate(0.05)?);
    let expect = -0.05 / (2.0 * 2f64.sqrt() * 1.0f64.sqrt());
    let rel = (r05 / expect - 1.0).abs();
    let ratio = r10 / r05;
    Ok(Outcome {
        pass: rel < 0.15 && (ratio / 2.0 - 1.0).abs() < 0.10,
        detail: format!("rate(0.05) {r05:.5} vs {expect:.5} ({:.1}%), rate ratio {ratio:.3}", 100.0 * rel),
    })
}

// 8. BCS coefficient identity.
fn bcs() -> Result<Outcome> {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a, c, z, beta) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..=1.0), rng.gen_range(1e-4..1.0));
        let p = boussinesq::bcs_map(a, c, z, beta)?;
        worst = worst.max((p.sum() - beta / 3.0).abs());
    }
    Ok(Outcome { pass: worst <= 1e-15, detail: format!("max |sum - beta/3| {worst:.2e}") })
}

// 9. Boussinesq solution in the KdV frame.
fn kdv_consistency() -> Result<Outcome> {
    let mut scaled = Vec::new();
    for eps in [0.1, 0.05] {
        let regime = RegimeParams::regime(eps, 1.0, 1.0, 1.0)?;
        let r = kdv::boussinesq_consistency(regime, 40.0, 256, 1.0, 0.5, 2e-3, KernelVariant::PaperFinite)?;
        scaled.push(r.residual_l2 / eps);
    }
    let ratio = scaled[0].max(scaled[1]) / scaled[0].min(scaled[1]);
    Ok(Outcome { pass: ratio <= 2.0, detail: format!("residual/eps {scaled:.4?}, ratio {ratio:.3}") })
}

// 10. Nonlocal term vs quadrature; finite horizon -> infinite.
fn nonlocal() -> Result<Outcome> {
    let check = validate::check_nonlocal_term()?;
    let regime = RegimeParams::regime(0.1, 1.0, 1.0, 1.0)?;
    let (l, n) = (40.0, 256);
    let eta: Vec<f64> = (0..n).map(|j| (-(j as f64 * l / n as f64 - 20.0).powi(2)).exp()).collect();
    let km = KdvState::new(l, &eta, regime, KernelVariant::KmInfinite)?.nonlocal_term();
    let mut diffs = Vec::new();
    for f in [0.25, 0.5, 1.0] {
        let mut s = KdvState::new(l, &eta, regime, KernelVariant::PaperFinite)?;
        s.tau = f * l * regime.epsilon;
        diffs.push(s.nonlocal_term().iter().zip(&km).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
    }
    Ok(Outcome {
        pass: check.measured < 1e-6 && strictly_decreasing(&diffs),
        detail: format!("spectral vs quadrature rel {:.2e}; finite-horizon Linf gaps {diffs:.4?}", check.measured),
    })
}

// 11. Limits of the boundary-layer profile.
fn limits() -> Result<Outcome> {
    let fs = SampledHistory::from_fn(0.0, 1e-5, 1000, |_| 1.0)?;
    let ic = F0Preset::Gaussian.ic();
    let g: f64 = 0.8;
    let target = 1.0 + g * (-g * g).exp();
    let mut errs = Vec::new();
    for t in [1e-2, 1e-3, 1e-4] {
        errs.push((blayer::heat_profile(&ic, &fs, 0.0, g, t, 1.0, 1.0)? - target).abs());
    }
    let fs = SampledHistory::from_fn(0.0, 1e-3, 1000, |t| 1.0 + 0.5 * t)?;
    let cut = blayer::default_gamma_cut(1.0, 1.0);
    let far = (blayer::heat_profile(&ic, &fs, 0.0, cut, 1.0, 1.0, 1.0)? - 1.5).abs();
    Ok(Outcome {
        pass: strictly_decreasing(&errs) && far < 1e-6,
        detail: format!("t -> 0 errors {errs:?}, far field {far:.2e}"),
    })
}

type Criterion = (&'static str, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("dispersion, large Re", Duration::from_secs(1), large_re),
        ("dispersion, moderate Re", Duration::from_secs(1), moderate_re),
        ("boundary layer vs Crank-Nicolson", Duration::from_secs(30), boundary_layer),
        ("bottom shear stress", Duration::from_secs(10), shear),
        ("half-kernel convolution", Duration::from_secs(1), convolution),
        ("Boussinesq mass conservation", Duration::from_secs(60), conservation),
        ("linear viscous decay", Duration::from_secs(60), linear_decay),
        ("BCS identity", Duration::from_secs(1), bcs),
        ("Boussinesq/KdV consistency", Duration::from_secs(120), kdv_consistency),
        ("nonlocal-term oracle", Duration::from_secs(10), nonlocal),
        ("boundary-layer limits", Duration::from_secs(10), limits),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(o) => (o.pass && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.2}s / {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion(s) failed");
        ExitCode::FAILURE
    }
}
