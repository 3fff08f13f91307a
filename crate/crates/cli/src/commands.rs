use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use viscid_waves::blayer::{self, F0Preset};
use viscid_waves::boussinesq::{self, WaveState};
use viscid_waves::dispersion::{self, DispersionPoint};
use viscid_waves::kdv::{self, KdvSnapshot, KdvState, KernelVariant};
use viscid_waves::spectral::Spectral;
use viscid_waves::{validate as oracle_suite, Complex64, Error, RegimeParams};

use crate::config::{
    parse_config, BlayerConfig, BoussinesqConfig, DispersionConfig, GuessKind, InitialConfig, InitialKind, KdvConfig,
};
use crate::output::{fmt_f64 as f, OutDir, RunManifest, Table};
use crate::CliError;

fn finish(
    out: &mut OutDir,
    command: &str,
    config: Value,
    regime: Option<RegimeParams>,
    start: Instant,
    summary: Value,
) -> Result<(), CliError> {
    let mut outputs = out.written.clone();
    outputs.push("manifest.json".into());
    let manifest = RunManifest {
        command: command.into(),
        config,
        regime,
        code_version: env!("CARGO_PKG_VERSION"),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
        summary,
    };
    out.json("manifest.json", &manifest)
}

pub fn dispersion(path: &Path, out: &mut OutDir) -> Result<(), CliError> {
    let start = Instant::now();
    let (cfg, raw): (DispersionConfig, _) = parse_config("dispersion", path)?;
    let points = cfg
        .k
        .iter()
        .map(|&k| DispersionPoint::new(k, cfg.beta, cfg.reynolds))
        .collect::<Result<Vec<_>, _>>()?;
    // Independent points: one Newton run each, seeded from the chosen asymptote.
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|p| {
            let large = dispersion::asymptotic_large_re(p);
            let moderate = dispersion::asymptotic_moderate_re(p);
            let guess = match cfg.guess {
                GuessKind::LargeRe => large,
                GuessKind::ModerateRe => moderate,
                GuessKind::Inviscid => Complex64::new(dispersion::inviscid_c(p), 0.0),
            };
            let (c, mu, res, it, branch, status) = match dispersion::solve_c(p, guess, cfg.tol) {
                Ok(r) => (r.c, r.mu, r.residual_norm, r.iterations, format!("{:?}", r.branch).to_lowercase(), "ok".to_string()),
                Err(e) => {
                    let nan = Complex64::new(f64::NAN, f64::NAN);
                    (nan, nan, f64::NAN, 0, String::new(), e.to_string())
                }
            };
            vec![
                f(p.k),
                f(p.beta),
                f(p.reynolds),
                f(c.re),
                f(c.im),
                f(mu.re),
                f(mu.im),
                f(res),
                it.to_string(),
                branch,
                f(large.re),
                f(large.im),
                f(moderate.re),
                f(moderate.im),
                f(dispersion::decay_rate(p)),
                status,
            ]
        })
        .collect();
    let failures = rows.iter().filter(|r| r[15] != "ok").count();
    let mut table = Table::new(&[
        "k", "beta", "reynolds", "c_re", "c_im", "mu_re", "mu_im", "residual", "iterations", "branch", "c_large_re",
        "c_large_im", "c_moderate_re", "c_moderate_im", "decay_rate_large_re", "status",
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    out.csv("dispersion.csv", &table)?;
    finish(out, "dispersion", raw, None, start, json!({ "points": cfg.k.len(), "failures": failures }))
}

pub fn blayer(path: &Path, out: &mut OutDir) -> Result<(), CliError> {
    let start = Instant::now();
    let (cfg, raw): (BlayerConfig, _) = parse_config("blayer", path)?;
    let regime = cfg.regime.build()?;
    if cfg.times.is_empty() {
        return Err(CliError::Config("times must not be empty".into()));
    }
    if cfg.n_gamma < 2 {
        return Err(CliError::Config("n_gamma must be at least 2".into()));
    }
    let t_max = cfg.times.iter().cloned().fold(0.0, f64::max);
    let samples = (t_max / cfg.dt).ceil() as usize;
    let (fs, fs_x) = cfg.freestream.histories(cfg.x, cfg.dt, samples.max(1))?;
    let ic = cfg.f0.ic();
    let grid: Vec<f64> =
        (0..cfg.n_gamma).map(|i| cfg.gamma_max * i as f64 / (cfg.n_gamma - 1) as f64).collect();
    let results = cfg
        .times
        .par_iter()
        .map(|&t| {
            let prof = blayer::profile(&ic, &fs, &fs_x, cfg.x, &grid, t, &regime)?;
            let shear = blayer::bottom_shear(&fs, t, regime.r, regime.b)?;
            Ok((prof, shear))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut profile = Table::new(&["t", "gamma", "u", "w"]);
    let mut shear = Table::new(&["t", "pv_coefficient", "convolution_part", "total"]);
    for (p, s) in &results {
        for i in 0..grid.len() {
            profile.push(vec![f(p.t), f(p.gamma_grid[i]), f(p.u[i]), f(p.w[i])]);
        }
        shear.push(vec![f(p.t), f(s.pv_coefficient), f(s.convolution_part), f(s.total(p.t))]);
    }
    out.csv("profile.csv", &profile)?;
    out.csv("shear.csv", &shear)?;
    finish(out, "blayer", raw, Some(regime), start, Value::Null)
}

/// Initial surface and the matching right-going velocity
/// `u = eta - eps [ (a/4) eta^2 + (b/6) eta_xx ]`.
fn initial_fields(init: &InitialConfig, n: usize, l: f64, regime: &RegimeParams) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let sp = Spectral::new(n, l)?;
    let x = sp.grid();
    let centre = init.center * l;
    let eta = match init.kind {
        InitialKind::Soliton => {
            if init.amplitude <= 0.0 {
                return Err(CliError::Config("a soliton needs a positive amplitude".into()));
            }
            kdv::soliton(&x, l, init.amplitude, centre, regime.a, regime.b)
        }
        InitialKind::Gaussian => x
            .iter()
            .map(|&x| {
                let d = (x - centre).rem_euclid(l);
                let d = if d > 0.5 * l { d - l } else { d };
                init.amplitude * (-(d / init.width).powi(2)).exp()
            })
            .collect(),
        InitialKind::Mode => {
            return Ok(boussinesq::linear_mode(n, l, init.mode, init.amplitude, 1.0, regime.beta));
        }
    };
    let exx = sp.derivative(&eta, 2);
    let eps = regime.epsilon;
    let u = eta.iter().zip(&exx).map(|(e, xx)| e - eps * (0.25 * regime.a * e * e + regime.b / 6.0 * xx)).collect();
    Ok((eta, u))
}

fn check_every(every: usize) -> Result<(), CliError> {
    if every == 0 {
        return Err(CliError::Config("output_every must be at least 1".into()));
    }
    Ok(())
}

pub fn boussinesq(path: &Path, out: &mut OutDir) -> Result<(), CliError> {
    let start = Instant::now();
    let (cfg, raw): (BoussinesqConfig, _) = parse_config("boussinesq", path)?;
    let regime = cfg.regime.build()?;
    check_every(cfg.output_every)?;
    cfg.switches.validate()?;
    let (eta, u) = initial_fields(&cfg.initial, cfg.n, cfg.l, &regime)?;
    let mut state = WaveState::new(cfg.l, &eta, &u, cfg.z_eval, regime)?;
    if cfg.switches.ic_term {
        state = state.with_initial_boundary_layer(cfg.f0);
    }
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut snaps = Table::new(&["t", "x", "eta", "u"]);
    let mut diag = Table::new(&["t", "mass", "energy", "max_abs_eta"]);
    let record = |s: &WaveState, snaps: &mut Table, diag: &mut Table| {
        for (j, x) in s.x().iter().enumerate() {
            snaps.push(vec![f(s.t), f(*x), f(s.eta[j]), f(s.u[j])]);
        }
        diag.push(vec![f(s.t), f(s.mass()), f(s.energy()), f(s.max_abs_eta())]);
    };
    record(&state, &mut snaps, &mut diag);
    let mut failure = None;
    for i in 1..=steps {
        if let Err(e) = state.step(cfg.dt, &cfg.switches) {
            if let Error::Blowup { last_finite, .. } = &e {
                record(last_finite, &mut snaps, &mut diag);
            }
            failure = Some(e);
            break;
        }
        if i % cfg.output_every == 0 || i == steps {
            record(&state, &mut snaps, &mut diag);
        }
    }
    out.csv("snapshots.csv", &snaps)?;
    out.csv("diagnostics.csv", &diag)?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    finish(out, "boussinesq", raw, Some(regime), start, json!({ "steps": steps, "final_mass": state.mass() }))
}

fn kdv_initial(cfg: &KdvConfig, variant: KernelVariant) -> Result<KdvState, CliError> {
    let regime = cfg.regime.build()?;
    check_every(cfg.output_every)?;
    if cfg.f0 != F0Preset::Zero {
        if cfg.tau_start <= 0.0 {
            log::warn!(
                "an initial boundary-layer defect adds a memory term that is only small in L1 once tau is not too \
                 small; the KdV model drops it"
            );
            return Err(CliError::Config(
                "tau_start = 0 with a nonzero f0: start the KdV run at tau_start > 0, where the initial-layer memory \
                 term is negligible"
                    .into(),
            ));
        }
        log::info!("f0 = {:?}: its memory term is dropped for tau >= {}", cfg.f0, cfg.tau_start);
    }
    if cfg.tau_start < 0.0 {
        return Err(CliError::Config("tau_start must be non-negative".into()));
    }
    let (eta, _) = initial_fields(&cfg.initial, cfg.n, cfg.l, &regime)?;
    let mut s = KdvState::new(cfg.l, &eta, regime, variant)?;
    s.tau = cfg.tau_start;
    Ok(s)
}

fn run_kdv(cfg: &KdvConfig, variant: KernelVariant) -> Result<(KdvState, Vec<KdvSnapshot>), CliError> {
    let mut s = kdv_initial(cfg, variant)?;
    let snaps = kdv::simulate_kdv(&mut s, cfg.dt, cfg.tau_end - cfg.tau_start, cfg.output_every)?;
    Ok((s, snaps))
}

pub fn kdv(path: &Path, out: &mut OutDir) -> Result<(), CliError> {
    let start = Instant::now();
    let (cfg, raw): (KdvConfig, _) = parse_config("kdv", path)?;
    let (state, snaps) = run_kdv(&cfg, cfg.variant)?;
    let x = state.x();
    let mut table = Table::new(&["tau", "xi", "eta"]);
    let mut env = Table::new(&["tau", "max_abs", "mass"]);
    for s in &snaps {
        for (xi, e) in x.iter().zip(&s.eta) {
            table.push(vec![f(s.tau), f(*xi), f(*e)]);
        }
        env.push(vec![f(s.tau), f(s.max_abs), f(s.mass)]);
    }
    out.csv("snapshots.csv", &table)?;
    out.csv("envelope.csv", &env)?;
    let samples: Vec<(f64, f64)> = snaps.iter().map(|s| (s.tau, s.max_abs)).collect();
    let summary = match boussinesq::measure_decay(&samples) {
        Ok(fit) => json!({ "envelope_slope": fit.slope, "monotone_envelope": fit.monotone_envelope }),
        Err(_) => Value::Null,
    };
    finish(out, "kdv", raw, Some(state.regime), start, summary)
}

pub fn kdv_compare(path: &Path, out: &mut OutDir) -> Result<(), CliError> {
    let start = Instant::now();
    let (cfg, raw): (KdvConfig, _) = parse_config("kdv", path)?;
    let runs = KernelVariant::ALL
        .par_iter()
        .map(|&v| run_kdv(&cfg, v).map(|(_, snaps)| (v, snaps)))
        .collect::<Result<Vec<_>, _>>()?;
    let reference = &runs.iter().find(|(v, _)| *v == KernelVariant::PaperFinite).expect("all variants run").1;
    let mut table = Table::new(&["tau", "variant", "max_abs", "mass", "linf_vs_paper_finite"]);
    for (i, r) in reference.iter().enumerate() {
        for (v, snaps) in &runs {
            let s = &snaps[i];
            let d = s.eta.iter().zip(&r.eta).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            table.push(vec![f(s.tau), v.name().into(), f(s.max_abs), f(s.mass), f(d)]);
        }
    }
    out.csv("compare.csv", &table)?;
    let regime = cfg.regime.build()?;
    finish(out, "kdv compare", raw, Some(regime), start, Value::Null)
}

pub fn validate(out: &mut OutDir) -> Result<(), CliError> {
    let start = Instant::now();
    let report = oracle_suite::run_all()?;
    let mut table = Table::new(&["check", "measured", "tolerance", "passed"]);
    for c in &report.checks {
        println!("{} {}: {:.3e} (tolerance {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.tolerance);
        table.push(vec![c.name.clone(), f(c.measured), f(c.tolerance), c.passed.to_string()]);
    }
    out.csv("validation.csv", &table)?;
    out.json("validation.json", &report)?;
    finish(out, "validate", Value::Null, None, start, json!({ "all_passed": report.all_passed() }))?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Validation("one or more oracle checks failed".into()))
    }
}
