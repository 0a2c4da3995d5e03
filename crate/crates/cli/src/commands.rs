use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use qlangevin::dispersion::{
    detailed_balance_residual, fdt_residual, induced_mass_thermal, induced_mass_vacuum, kk_transform,
};
use qlangevin::dynamics::{
    estimate_diffusion, estimate_equilibrium_variance, run_ensemble, spectral_position_variance, symmetrize_spectrum,
};
use qlangevin::radiation_pressure::{
    force_spectrum, momentum_diffusion, perfect_reflector_diffusion, quasistatic_coefficients, response_spectra,
    thermal_susceptibility, vacuum_force_commutator,
};
use qlangevin::stability::classify_motion;
use qlangevin::{
    ComplexSpectrum, DetailedBalance, EnsembleConfig, Error, FrequencyGrid, ImpedanceModel, SMatrixModel, ThermalState,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::CliError;

pub const UNITS: &str = "hbar = k_B = c = 1";

type Meta = Vec<(String, String)>;

fn base_meta(command: &str) -> Meta {
    vec![
        ("tool".into(), "qlangevin".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("command".into(), command.into()),
        ("units".into(), UNITS.into()),
    ]
}

fn meta_json(meta: &Meta) -> Value {
    Value::Object(meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let file = File::create(path).map_err(Error::from)?;
    serde_json::to_writer_pretty(BufWriter::new(file), value).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn write_spectrum(dir: &Path, name: &str, s: &ComplexSpectrum, meta: &Meta, json: bool) -> Result<Vec<PathBuf>, CliError> {
    let mut meta = meta.clone();
    meta.push(("quantity".into(), name.into()));
    let csv = dir.join(format!("{name}.csv"));
    s.write_csv(BufWriter::new(File::create(&csv).map_err(Error::from)?), &meta)?;
    let mut out = vec![csv];
    if json {
        let path = dir.join(format!("{name}.json"));
        write_json(&path, &s.to_json(Some(meta_json(&meta))))?;
        out.push(path);
    }
    Ok(out)
}

fn state_for(temp: f64) -> Result<ThermalState, CliError> {
    ThermalState::new(temp).map_err(|e| CliError::Usage(format!("--temp: {e}")))
}

fn model_scale(model: &SMatrixModel) -> f64 {
    model.cutoff().unwrap_or(1.0)
}

pub fn response(args: ResponseArgs) -> Result<Value, CliError> {
    let args = args.resolve()?;
    let model_s = require(args.model, "model")?;
    let model = parse_model(&model_s)?;
    let temp = args.temp.unwrap_or(0.0);
    let state = state_for(temp)?;
    let grid_s = require(args.grid, "grid")?;
    let grid = parse_grid(&grid_s)?;
    let out = args.out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(Error::from)?;

    let mut meta = base_meta("response");
    meta.extend([
        ("model".into(), model_s.clone()),
        ("temperature".into(), temp.to_string()),
        ("grid".into(), grid_s.clone()),
    ]);

    let spectra = response_spectra(&model, &state, grid)?;
    let mut files = Vec::new();
    files.extend(write_spectrum(&out, "chi", &spectra.susceptibility, &meta, args.json)?);
    files.extend(write_spectrum(&out, "xi", &spectra.commutator, &meta, args.json)?);
    files.extend(write_spectrum(&out, "cff", &spectra.force_spectrum, &meta, args.json)?);

    let quasi = match model {
        SMatrixModel::PerfectReflector => None,
        _ => Some(quasistatic_coefficients(&model, &state)?),
    };
    let diffusion = match model {
        SMatrixModel::PerfectReflector => perfect_reflector_diffusion(&state),
        _ => momentum_diffusion(&model, &state)?,
    };
    let summary = json!({
        "meta": meta_json(&meta),
        "friction": quasi.map(|q| q.friction),
        "half_curvature": quasi.map(|q| q.half_curvature),
        "diffusion": diffusion,
        "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Outcome of the `kk` command; `passed == false` maps to its own exit code.
pub struct KkOutcome {
    pub report: Value,
    pub passed: bool,
}

pub fn kk(args: KkArgs) -> Result<KkOutcome, CliError> {
    let args = args.resolve()?;
    let model_s = require(args.model, "model")?;
    let model = parse_model(&model_s)?;
    let temp = args.temp.unwrap_or(0.0);
    let state = state_for(temp)?;
    let scale = model_scale(&model);
    let subtractions = args.subtractions.unwrap_or(3);
    if subtractions > 3 {
        return Err(CliError::Usage("--subtractions must be between 0 and 3".into()));
    }
    let tail = parse_tail(args.tail.as_deref())?;
    let tol = args.tol.unwrap_or(1e-4);
    let (band_lo, band_hi) = match &args.band {
        Some(b) => parse_pair(b, "band")?,
        None => (0.1, 5.0),
    };

    let mut meta = base_meta("kk");
    meta.extend([
        ("model".into(), model_s.clone()),
        ("temperature".into(), temp.to_string()),
        ("subtractions".into(), subtractions.to_string()),
        ("tail".into(), format!("{tail:?}")),
    ]);

    let xi = match &args.xi {
        Some(path) => {
            meta.push(("xi_input".into(), path.display().to_string()));
            let file = File::open(path).map_err(|e| CliError::Usage(format!("--xi {}: {e}", path.display())))?;
            ComplexSpectrum::read_csv(file)?
        }
        None => {
            let grid = match &args.grid {
                Some(g) => parse_grid(g)?,
                None => FrequencyGrid::new(scale / 40.0, 4000)?,
            };
            let values: Vec<f64> = grid
                .points()
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|w| qlangevin::radiation_pressure::force_commutator(&model, &state, w))
                .collect::<Result<_, _>>()?;
            ComplexSpectrum::from_real(grid, values)?
        }
    };
    let grid = *xi.grid();
    meta.push(("grid".into(), format!("{}:{}", grid.delta(), grid.half_count())));

    let mut report = serde_json::Map::new();

    if args.induced_mass {
        let xi_0 = ComplexSpectrum::try_from_fn(grid, |w| Ok(Complex::new(vacuum_force_commutator(&model, w)?, 0.0)))?;
        let mass = if state.is_vacuum() {
            let mu = induced_mass_vacuum(&xi_0, tail)?;
            json!({ "mu_0": mu.value() })
        } else {
            let friction = quasistatic_coefficients(&model, &state)?.friction;
            let m = induced_mass_thermal(&xi, &xi_0, friction, tail)?;
            json!({
                "mu_0": m.mu_0.value(),
                "mu_T": m.mu_t.value(),
                "mu_T_minus_mu_0": m.half_curvature.value(),
            })
        };
        report.insert("induced_mass".into(), mass);
    }

    let coeffs: Vec<Complex<f64>> = {
        let q = quasistatic_coefficients(&model, &state)?;
        [Complex::new(0.0, q.friction), Complex::new(q.half_curvature, 0.0)]
            .into_iter()
            .take(subtractions.saturating_sub(1))
            .collect()
    };
    let chi_kk = kk_transform(&xi, subtractions, &coeffs, tail)?;

    let band_points: Vec<isize> = grid
        .indices()
        .filter(|&j| {
            let w = grid.omega(j);
            w >= band_lo * scale && w <= band_hi * scale
        })
        .collect();
    if band_points.is_empty() {
        return Err(CliError::Usage("--band selects no grid points".into()));
    }
    let direct: Vec<Complex<f64>> = band_points
        .par_iter()
        .map(|&j| thermal_susceptibility(&model, &state, grid.omega(j)))
        .collect::<Result<_, _>>()?;
    let kk_residual = band_points
        .iter()
        .zip(&direct)
        .map(|(&j, d)| (chi_kk.at(j) - d).norm() / d.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);

    let spectra = response_spectra(&model, &state, grid)?;
    let fdt = fdt_residual(&spectra.susceptibility, &xi)?;
    let balance = detailed_balance_residual(&spectra.force_spectrum, &xi, temp)?;
    let (balance_kind, balance_ok) = match balance {
        DetailedBalance::Thermal { residual } => ("thermal", residual <= tol),
        DetailedBalance::Vacuum { negative_frequency_max } => ("vacuum", negative_frequency_max <= 1e-10),
    };
    let passed = kk_residual <= tol && fdt <= tol && balance_ok;

    report.insert("meta".into(), meta_json(&meta));
    report.insert("tol".into(), json!(tol));
    report.insert("band".into(), json!([band_lo * scale, band_hi * scale]));
    report.insert("kk_residual".into(), json!(kk_residual));
    report.insert("fdt_residual".into(), json!(fdt));
    report.insert(
        "detailed_balance".into(),
        json!({ "kind": balance_kind, "value": balance.value() }),
    );
    report.insert("passed".into(), json!(passed));
    let report = Value::Object(report);
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    Ok(KkOutcome { report, passed })
}

pub fn stability(args: StabilityArgs) -> Result<Value, CliError> {
    let args = args.resolve()?;
    let chosen = [args.abraham_lorentz.is_some(), args.scatterer.is_some(), args.brownian.is_some()]
        .iter()
        .filter(|x| **x)
        .count();
    if chosen != 1 {
        return Err(CliError::Usage(
            "give exactly one of --abraham-lorentz, --scatterer, --brownian".into(),
        ));
    }
    let mut meta = base_meta("stability");
    let model = if let Some(kv) = &args.abraham_lorentz {
        let p = parse_kv(kv, &["M", "e2", "K"], "abraham-lorentz")?;
        meta.push(("model".into(), format!("abraham-lorentz M={} e2={} K={}", p["M"], p["e2"], p["K"])));
        ImpedanceModel::abraham_lorentz(p["M"], p["e2"], p["K"])?
    } else if let Some(kv) = &args.brownian {
        let p = parse_kv(kv, &["m", "K", "D", "T"], "brownian")?;
        meta.push(("model".into(), format!("brownian m={} K={} D={} T={}", p["m"], p["K"], p["D"], p["T"])));
        ImpedanceModel::brownian(p["m"], p["K"], p["D"], p["T"])?
    } else {
        let s = args.scatterer.as_deref().unwrap_or_default();
        let sm = parse_model(s)?;
        let temp = args.temp.unwrap_or(0.0);
        let state = state_for(temp)?;
        let mass = require(args.mass, "mass")?;
        let spring = args.spring.unwrap_or(0.0);
        meta.extend([
            ("model".into(), format!("scatterer {s}")),
            ("temperature".into(), temp.to_string()),
            ("vacuum_mass".into(), mass.to_string()),
            ("spring".into(), spring.to_string()),
        ]);
        let grid = ImpedanceModel::default_scatterer_grid(&sm, &state)?;
        ImpedanceModel::scatterer(mass, spring, &sm, &state, grid)?
    };
    let report = classify_motion(&model)?;
    let value = json!({
        "meta": meta_json(&meta),
        "induced_mass": model.induced_mass(),
        "report": report,
    });
    if let Some(path) = &args.out {
        write_json(path, &value)?;
    }
    Ok(value)
}

fn band_grid(band: f64) -> Result<FrequencyGrid, CliError> {
    Ok(FrequencyGrid::new(band / 1000.0, 1000)?)
}

fn sampled_force_spectrum(model: &SMatrixModel, state: &ThermalState, grid: FrequencyGrid) -> Result<ComplexSpectrum, CliError> {
    let values: Vec<f64> = grid
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|w| force_spectrum(model, state, w))
        .collect::<Result<_, _>>()?;
    Ok(symmetrize_spectrum(&ComplexSpectrum::from_real(grid, values)?)?)
}

pub fn simulate(args: SimulateArgs) -> Result<Value, CliError> {
    let args = args.resolve()?;
    let model_s = require(args.model, "model")?;
    let temp = args.temp.unwrap_or(0.0);
    let state = state_for(temp)?;
    let mass = require(args.mass, "mass")?;
    let spring = args.spring.unwrap_or(0.0);
    let dt = args.dt.unwrap_or(0.25);
    let duration = args.duration.unwrap_or(2000.0);
    let band = args.band.unwrap_or(0.8 * std::f64::consts::PI / dt);
    let seed = args.seed.unwrap_or(0);
    let first_stream = args.first_stream.unwrap_or(0);
    let n_traj = args.n_traj.unwrap_or(200);
    let (tau_lo, tau_hi) = match &args.window {
        Some(w) => parse_pair(w, "window")?,
        None => (5.0, 20.0),
    };
    let discard = args.discard.unwrap_or(0.0);
    let out = args.out.unwrap_or_else(|| PathBuf::from("."));
    if !(band > 0.0 && band <= std::f64::consts::PI / dt) {
        return Err(CliError::Usage(format!("--band must lie in (0, π/dt] = (0, {}]", std::f64::consts::PI / dt)));
    }

    let mut meta = base_meta("simulate");
    meta.extend([
        ("model".into(), model_s.clone()),
        ("temperature".into(), temp.to_string()),
        ("mass".into(), mass.to_string()),
        ("spring".into(), spring.to_string()),
        ("seed".into(), seed.to_string()),
        ("first_stream".into(), first_stream.to_string()),
        ("n_traj".into(), n_traj.to_string()),
        ("duration".into(), duration.to_string()),
        ("dt".into(), dt.to_string()),
        ("band".into(), band.to_string()),
    ]);

    let grid = band_grid(band)?;
    let (model, c_sym, expected_d) = match model_s.as_str() {
        "perfect" => {
            let d = perfect_reflector_diffusion(&state);
            let imp = if state.is_vacuum() {
                ImpedanceModel::new(mass, spring, 0.0, None, 0.0)?
            } else {
                ImpedanceModel::brownian(mass, spring, d, temp)?
            };
            let c = sampled_force_spectrum(&SMatrixModel::PerfectReflector, &state, grid)?;
            (imp, c, Some(d))
        }
        "brownian" => {
            let d = require(args.diffusion, "diffusion")?;
            meta.push(("diffusion".into(), d.to_string()));
            let imp = ImpedanceModel::brownian(mass, spring, d, temp)?;
            let c = ComplexSpectrum::from_fn(grid, |_| Complex::new(2.0 * d, 0.0));
            (imp, c, Some(d))
        }
        "abraham-lorentz" => {
            let e2 = require(args.charge_squared, "charge-squared")?;
            meta.push(("charge_squared".into(), e2.to_string()));
            let imp = ImpedanceModel::abraham_lorentz(mass, e2, spring)?;
            let c = ComplexSpectrum::from_fn(grid, |w| {
                let a = w.abs();
                let coth = if temp > 0.0 && a > 0.0 { 1.0 / (a / (2.0 * temp)).tanh() } else { 1.0 };
                Complex::new(2.0 / 3.0 * e2 * a.powi(3) * coth, 0.0)
            });
            (imp, c, None)
        }
        other => {
            let sm = parse_model(other)?;
            let g = ImpedanceModel::default_scatterer_grid(&sm, &state)?;
            let imp = ImpedanceModel::scatterer(mass, spring, &sm, &state, g)?;
            let c = sampled_force_spectrum(&sm, &state, grid)?;
            (imp, c, Some(momentum_diffusion(&sm, &state)?))
        }
    };

    let cfg = EnsembleConfig { n_traj, duration, dt, master_seed: seed, first_stream };
    let ensemble = run_ensemble(&model, &c_sym, cfg)?;

    let mut value = serde_json::Map::new();
    value.insert("meta".into(), meta_json(&meta));
    if spring == 0.0 {
        let d = estimate_diffusion(&ensemble, tau_lo, tau_hi)?;
        value.insert(
            "diffusion".into(),
            json!({ "estimate": d.value, "std_error": d.std_error, "expected": expected_d, "window": [tau_lo, tau_hi] }),
        );
    } else {
        let v = estimate_equilibrium_variance(&ensemble, discard)?;
        let spectral = spectral_position_variance(&model, &c_sym)?;
        value.insert(
            "position_variance".into(),
            json!({
                "estimate": v.value,
                "std_error": v.std_error,
                "spectral": spectral,
                "classical": if temp > 0.0 { Some(temp / spring) } else { None },
            }),
        );
    }
    value.insert("ensemble".into(), serde_json::to_value(ensemble.summary(50)).map_err(|e| Error::Io(e.to_string()))?);
    std::fs::create_dir_all(&out).map_err(Error::from)?;
    if args.write_trajectories {
        let files = ensemble.write_trajectories(&out, &meta)?;
        value.insert("trajectory_files".into(), json!(files.len()));
    }
    let value = Value::Object(value);
    write_json(&out.join("summary.json"), &value)?;
    Ok(value)
}
