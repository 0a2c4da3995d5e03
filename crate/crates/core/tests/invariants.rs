use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use qlangevin::dispersion::{kk_transform, laplace_continuation};
use qlangevin::dynamics::{
    estimate_diffusion, estimate_equilibrium_variance, run_ensemble, spectral_position_variance, synthesize_noise,
    welch,
};
use qlangevin::radiation_pressure::{force_commutator, quasistatic_coefficients};
use qlangevin::stability::{admittance, classify_motion, find_upper_half_poles, impedance, impedance_at_frequency};
use qlangevin::{
    ComplexSpectrum, EnsembleConfig, FrequencyGrid, ImpedanceModel, MotionClass, Rect, SMatrixModel, TailModel,
    ThermalState,
};

#[test]
fn impedance_matches_laplace_continued_susceptibility() {
    let model = SMatrixModel::resonance(1.0).unwrap();
    let state = ThermalState::new(0.2).unwrap();
    let grid = FrequencyGrid::new(0.025, 4000).unwrap();
    let xi = ComplexSpectrum::try_from_fn(grid, |w| Ok(Complex::new(force_commutator(&model, &state, w)?, 0.0))).unwrap();
    let q = quasistatic_coefficients(&model, &state).unwrap();
    let coeffs = [Complex::new(0.0, q.friction), Complex::new(q.half_curvature, 0.0)];
    let vacuum_mass = 1.0;
    let imp = ImpedanceModel::scatterer(vacuum_mass, 0.0, &model, &state, grid).unwrap();
    for p in [Complex::new(0.3, 0.0), Complex::new(1.0, 0.5), Complex::new(0.05, 2.0), Complex::new(2.0, -1.0)] {
        let chi = laplace_continuation(&xi, 3, &coeffs, TailModel::LogLinear, p).unwrap();
        let z = impedance(&imp, p).unwrap();
        let err = (z - p * vacuum_mass + chi / p).norm();
        assert!(err < 1e-5, "p = {p}: mismatch {err:e}");
    }
}

/// `χ = iω/(1 − iω)`, causal with `Im χ = ω/(1 + ω²)`.
fn lorentzian_error(delta: f64) -> f64 {
    let grid = FrequencyGrid::new(delta, (40.0 / delta).round() as usize).unwrap();
    let xi = ComplexSpectrum::from_fn(grid, |w| Complex::new(w / (1.0 + w * w), 0.0));
    let chi = kk_transform(&xi, 1, &[], TailModel::PowerLaw).unwrap();
    let j = (1.0 / delta).round() as isize;
    let w = grid.omega(j);
    let exact = Complex::new(0.0, w) / Complex::new(1.0, -w);
    (chi.at(j) - exact).norm()
}

#[test]
fn principal_value_converges_at_least_at_second_order() {
    let errors: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|d| lorentzian_error(*d)).collect();
    for pair in errors.windows(2) {
        assert!(pair[0] / pair[1] > 3.5, "errors {errors:?}");
    }
    assert!(errors[2] < 1e-6, "errors {errors:?}");
}

#[test]
fn abraham_lorentz_pole_sweep() {
    for mass in [0.5, 1.0, 2.0] {
        for e2 in [0.5, 1.0, 2.0] {
            let model = ImpedanceModel::abraham_lorentz(mass, e2, 0.0).unwrap();
            let report = classify_motion(&model).unwrap();
            assert_eq!(report.class, MotionClass::Runaway);
            assert_eq!(report.poles.len(), 1, "M = {mass}, e² = {e2}");
            let expected = 3.0 * mass / (2.0 * e2);
            let p = report.poles[0];
            assert!(p.re.abs() < 1e-9 && (p.im - expected).abs() < 1e-9 * expected, "M = {mass}, e² = {e2}: {p:?}");
        }
    }
}

#[test]
fn bound_abraham_lorentz_keeps_one_runaway_pole() {
    for spring in [0.0, 0.5, 2.0, 8.0] {
        let model = ImpedanceModel::abraham_lorentz(1.0, 1.0, spring).unwrap();
        let rect = Rect::new(-20.0, 20.0, 1e-3, 20.0).unwrap();
        let poles = find_upper_half_poles(&model, &rect).unwrap();
        assert_eq!(poles.len(), 1, "K = {spring}");
        let z = impedance_at_frequency(&model, poles[0].omega).unwrap();
        assert!(z.norm() < 1e-9);
        assert!(poles[0].omega.re.abs() < 1e-9);
    }
}

#[test]
fn injected_white_noise_is_recovered() {
    let d0 = 0.8;
    let model = ImpedanceModel::brownian(200.0, 0.0, d0, 1.0).unwrap();
    let grid = FrequencyGrid::new(0.01, 1000).unwrap();
    let c = ComplexSpectrum::from_fn(grid, |_| Complex::new(2.0 * d0, 0.0));
    let cfg = EnsembleConfig { n_traj: 100, duration: 1000.0, dt: 0.25, master_seed: 5, first_stream: 0 };
    let ens = run_ensemble(&model, &c, cfg).unwrap();
    let d = estimate_diffusion(&ens, 5.0, 20.0).unwrap();
    assert!((d.value - d0).abs() < 4.0 * d.std_error, "{} ± {}", d.value, d.std_error);
}

#[test]
fn doubling_the_spring_halves_the_variance() {
    let grid = FrequencyGrid::new(0.03, 1000).unwrap();
    let c = ComplexSpectrum::from_fn(grid, |_| Complex::new(0.5, 0.0));
    let variance = |spring: f64| {
        let model = ImpedanceModel::brownian(1.0, spring, 0.25, 0.5).unwrap();
        let cfg = EnsembleConfig { n_traj: 80, duration: 400.0, dt: 0.1, master_seed: 9, first_stream: 0 };
        let ens = run_ensemble(&model, &c, cfg).unwrap();
        (estimate_equilibrium_variance(&ens, 0.0).unwrap(), spectral_position_variance(&model, &c).unwrap())
    };
    let (v1, s1) = variance(1.0);
    let (v2, s2) = variance(2.0);
    assert!((s1 / s2 - 2.0).abs() < 1e-3, "spectral ratio {}", s1 / s2);
    let ratio = v1.value / v2.value;
    let ratio_err = ratio * ((v1.std_error / v1.value).powi(2) + (v2.std_error / v2.value).powi(2)).sqrt();
    assert!((ratio - 2.0).abs() < 4.0 * ratio_err, "ensemble ratio {ratio} ± {ratio_err}");
}

fn welch_deviation(realizations: u64) -> f64 {
    let grid = FrequencyGrid::new(0.01, 1000).unwrap();
    let target = |w: f64| 1.0 / (1.0 + w * w);
    let c = ComplexSpectrum::from_fn(grid, |w| Complex::new(target(w), 0.0));
    let dt = 0.25;
    let mut mean: Option<(Vec<f64>, Vec<f64>)> = None;
    for stream in 0..realizations {
        let noise = synthesize_noise(&c, 1024.0, dt, 3, stream).unwrap();
        let (w, s) = welch(&noise.samples, dt, 256).unwrap();
        mean = Some(match mean {
            None => (w, s),
            Some((w0, acc)) => (w0, acc.iter().zip(&s).map(|(a, b)| a + b).collect()),
        });
    }
    let (w, acc) = mean.unwrap();
    let n = realizations as f64;
    let mut sq = 0.0;
    let mut count = 0.0;
    for (w, s) in w.iter().zip(&acc) {
        if *w > 0.1 && *w < 3.0 {
            sq += (s / n / target(*w) - 1.0).powi(2);
            count += 1.0;
        }
    }
    (sq / count).sqrt()
}

#[test]
fn synthesized_spectrum_converges_with_realizations() {
    let few = welch_deviation(25);
    let many = welch_deviation(100);
    assert!(many < few, "{many} vs {few}");
    assert!(many < 0.06, "rms deviation {many}");
    assert!(few / many > 1.4, "ratio {}", few / many);
}

#[test]
fn runs_are_bit_identical_across_thread_counts() {
    let model = ImpedanceModel::brownian(1.0, 1.0, 0.3, 0.7).unwrap();
    let grid = FrequencyGrid::new(0.01, 1000).unwrap();
    let c = ComplexSpectrum::from_fn(grid, |w| Complex::new(0.6 / (1.0 + 0.1 * w * w), 0.0));
    let cfg = EnsembleConfig { n_traj: 12, duration: 200.0, dt: 0.25, master_seed: 123, first_stream: 7 };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_ensemble(&model, &c, cfg).unwrap())
    };
    let reference = run(1);
    for threads in [2, 5] {
        assert!(run(threads) == reference, "{threads} threads");
    }
    let shifted = run_ensemble(&model, &c, EnsembleConfig { first_stream: 8, ..cfg }).unwrap();
    assert_eq!(shifted.trajectories[0], reference.trajectories[1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brownian_impedance_is_positive_real(
        mass in 0.01f64..10.0,
        spring in 0.0f64..10.0,
        diffusion in 0.01f64..5.0,
        temperature in 0.05f64..5.0,
        re in 1e-4f64..50.0,
        im in -50.0f64..50.0,
    ) {
        let model = ImpedanceModel::brownian(mass, spring, diffusion, temperature).unwrap();
        let p = Complex::new(re, im);
        let z = impedance(&model, p).unwrap();
        prop_assert!(z.re > 0.0);
        let zc = impedance(&model, p.conj()).unwrap();
        prop_assert!((zc - z.conj()).norm() <= 1e-12 * z.norm());
        let y = admittance(&model, p).unwrap();
        prop_assert!((y * z - 1.0).norm() < 1e-12);
    }

    #[test]
    fn abraham_lorentz_pole_scales(mass in 0.1f64..5.0, e2 in 0.1f64..5.0) {
        let model = ImpedanceModel::abraham_lorentz(mass, e2, 0.0).unwrap();
        let expected = 1.5 * mass / e2;
        let rect = Rect::new(-expected, expected, 0.25 * expected, 2.0 * expected).unwrap();
        let poles = find_upper_half_poles(&model, &rect).unwrap();
        prop_assert_eq!(poles.len(), 1);
        prop_assert!((poles[0].omega - Complex::new(0.0, expected)).norm() < 1e-9 * expected);
        // Z′[ω] = −i(M − 4e²p/3) at p = 3M/2e², so the residue is −i/M.
        let residue = Complex::new(0.0, -1.0 / mass);
        prop_assert!((poles[0].residue - residue).norm() < 1e-6 * residue.norm());
    }

    #[test]
    fn boxes_without_poles_report_none(re0 in -5.0f64..5.0, im0 in 0.05f64..1.0) {
        let model = ImpedanceModel::abraham_lorentz(1.0, 1.0, 0.0).unwrap();
        let rect = Rect::new(re0, re0 + 1.0, im0, im0 + 0.5).unwrap();
        prop_assert!(find_upper_half_poles(&model, &rect).unwrap().is_empty());
    }
}

#[test]
fn equilibrium_variance_matches_classical_value_for_white_noise() {
    let (t, k) = (2.0, 3.0);
    let model = ImpedanceModel::brownian(1.0, k, 1.0, t).unwrap();
    let grid = FrequencyGrid::new(0.04, 1000).unwrap();
    let c = ComplexSpectrum::from_fn(grid, |_| Complex::new(2.0, 0.0));
    let spectral = spectral_position_variance(&model, &c).unwrap();
    let tail = 2.0 / (PI * 3.0 * 40f64.powi(3));
    assert!((spectral + tail - t / k).abs() < 1e-4 * t / k, "{spectral} vs {}", t / k);
}
