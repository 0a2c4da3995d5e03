//! Stationary Gaussian force noise and linear response in the time domain.
//!
//! Noise is synthesised on a periodic time grid of `n` samples: each
//! frequency bin `ω_k = 2πk/(n dt)` gets an independent Gaussian amplitude of
//! variance `C_sym[ω_k]/(n dt)`, so that `⟨F(t)²⟩ = Σ_k C_sym[ω_k]/(n dt)`,
//! the Riemann sum of `∫dω/2π C_sym[ω]`. A white spectrum `2D` therefore gives
//! a lag-zero autocovariance `2D/dt`. Motions are the periodic stationary
//! solutions `v[ω] = Y[ω]F[ω]` of that noise.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_points, Tolerance};
use crate::real::{CompensatedSum, Real};
use crate::spectrum::ComplexSpectrum;
use crate::stability::{impedance, passivity_test, ImpedanceModel, SampleBox};

/// `C_sym[ω] = (C_FF[ω] + C_FF[−ω])/2`.
pub fn symmetrize_spectrum<T: Real>(c_ff: &ComplexSpectrum<T>) -> Result<ComplexSpectrum<T>> {
    let scale = c_ff.max_magnitude();
    let tol = T::lit(1e-9) * scale;
    if c_ff.values().iter().any(|v| v.im.abs() > tol || v.re < -tol) {
        return Err(invalid("force spectrum must be real and non-negative"));
    }
    let g = *c_ff.grid();
    let values = g
        .indices()
        .map(|j| Complex::new((c_ff.at(j).re + c_ff.at(-j).re) * T::lit(0.5), T::zero()))
        .collect();
    ComplexSpectrum::from_values(g, values)
}

/// One realisation of the force on a periodic time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization<T> {
    pub dt: T,
    pub samples: Vec<T>,
    pub master_seed: u64,
    pub stream: u64,
}

fn rng_for(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

fn sample_count<T: Real>(duration: T, dt: T) -> Result<usize> {
    if !(dt > T::zero() && duration >= dt * T::lit(2.0)) || !duration.is_finite() {
        return Err(invalid("need dt > 0 and a duration of at least two steps"));
    }
    (duration / dt)
        .round()
        .to_usize()
        .ok_or_else(|| invalid("duration/dt does not fit in usize"))
}

fn bin_omega<T: Real>(k: usize, n: usize, dt: T) -> T {
    let kk = if k <= n / 2 { k as isize } else { k as isize - n as isize };
    T::lit(2.0) * T::PI() * T::from_isize_lossy(kk) / (T::from_usize_lossy(n) * dt)
}

fn check_nyquist<T: Real>(c_sym: &ComplexSpectrum<T>, dt: T) -> Result<()> {
    let nyquist = T::PI() / dt;
    let peak = c_sym.max_magnitude();
    let beyond = c_sym
        .iter()
        .filter(|(w, _)| w.abs() > nyquist)
        .map(|(_, v)| v.norm())
        .fold(T::zero(), T::max);
    if beyond > T::lit(1e-6) * peak {
        return Err(invalid(format!(
            "time step {} does not resolve the spectrum: Nyquist frequency {} lies inside its support",
            dt.as_f64(),
            nyquist.as_f64()
        )));
    }
    Ok(())
}

/// Gaussian series with spectrum `C_sym`, reproducible from
/// `(master_seed, stream)`.
pub fn synthesize_noise<T: Real>(
    c_sym: &ComplexSpectrum<T>,
    duration: T,
    dt: T,
    master_seed: u64,
    stream: u64,
) -> Result<NoiseRealization<T>> {
    let n = sample_count(duration, dt)?;
    check_nyquist(c_sym, dt)?;
    let mut rng = rng_for(master_seed, stream);
    let norm = T::one() / (T::from_usize_lossy(n) * dt);
    let zero = Complex::new(T::zero(), T::zero());
    let mut amps = vec![zero; n];
    for k in 0..=n / 2 {
        let s = c_sym.interpolate(bin_omega(k, n, dt)).re.max(T::zero());
        let var = s * norm;
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        if k == 0 || 2 * k == n {
            amps[k] = Complex::new(var.sqrt() * T::lit(g1), T::zero());
        } else {
            let a = (var * T::lit(0.5)).sqrt();
            amps[k] = Complex::new(a * T::lit(g1), a * T::lit(g2));
            amps[n - k] = amps[k].conj();
        }
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut amps);
    Ok(NoiseRealization {
        dt,
        samples: amps.into_iter().map(|c| c.re).collect(),
        master_seed,
        stream,
    })
}

/// Position and velocity of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub stream: u64,
    pub dt: T,
    pub q: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    /// `t,q,v` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[(String, String)]) -> Result<()> {
        for (k, v) in meta {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "t,q,v")?;
        for (j, (q, v)) in self.q.iter().zip(&self.v).enumerate() {
            let t = self.dt * T::from_usize_lossy(j);
            writeln!(w, "{:.16e},{:.16e},{:.16e}", t.as_f64(), q.as_f64(), v.as_f64())?;
        }
        Ok(())
    }
}

/// Admittance sampled on the FFT bins of an `n`-point grid.
struct ResponseTable<T> {
    n: usize,
    dt: T,
    y: Vec<Complex<T>>,
    spring: T,
    static_velocity_gain: T,
}

impl<T: Real> ResponseTable<T> {
    fn new(model: &ImpedanceModel<T>, n: usize, dt: T) -> Result<Self> {
        if !model.is_structurally_passive() {
            return Err(Error::Stability(
                "the impedance is not positive real; runaway kernels are not simulated".into(),
            ));
        }
        let eps = T::lit(1e-12) * model.frequency_scale();
        let zero = Complex::new(T::zero(), T::zero());
        let y = (0..n)
            .into_par_iter()
            .map(|k| {
                if k == 0 || 2 * k == n {
                    return Ok(zero);
                }
                let w = bin_omega(k, n, dt);
                let z = impedance(model, Complex::new(eps, -w))?;
                Ok(z.inv())
            })
            .collect::<Result<Vec<_>>>()?;
        let z0 = if model.spring() > T::zero() {
            T::zero()
        } else {
            impedance(model, Complex::new(eps, T::zero()))?.re
        };
        Ok(Self {
            n,
            dt,
            y,
            spring: model.spring(),
            static_velocity_gain: if z0 > T::zero() { z0.recip() } else { T::zero() },
        })
    }

    fn solve(&self, noise: &NoiseRealization<T>, planner: &mut FftPlanner<T>) -> Result<Trajectory<T>> {
        let n = self.n;
        if noise.samples.len() != n || noise.dt != self.dt {
            return Err(invalid("noise realisation does not match the response grid"));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let mut amps: Vec<Complex<T>> = noise.samples.iter().map(|x| Complex::new(*x, T::zero())).collect();
        planner.plan_fft_inverse(n).process(&mut amps);
        let inv_n = T::one() / T::from_usize_lossy(n);
        let mut vhat = vec![zero; n];
        let mut qhat = vec![zero; n];
        for k in 0..n {
            let a = amps[k] * inv_n;
            if k == 0 {
                if self.spring > T::zero() {
                    qhat[0] = a / self.spring;
                } else {
                    vhat[0] = a * self.static_velocity_gain;
                }
                continue;
            }
            vhat[k] = self.y[k] * a;
            let w = bin_omega(k, n, self.dt);
            qhat[k] = vhat[k] / Complex::new(T::zero(), -w);
        }
        let fwd = planner.plan_fft_forward(n);
        fwd.process(&mut vhat);
        let v: Vec<T> = vhat.iter().map(|c| c.re).collect();
        let q = if self.spring > T::zero() {
            fwd.process(&mut qhat);
            qhat.iter().map(|c| c.re).collect()
        } else {
            let mut q = Vec::with_capacity(n);
            let mut acc = CompensatedSum::new();
            q.push(T::zero());
            for j in 1..n {
                acc.add((v[j] + v[j - 1]) * self.dt * T::lit(0.5));
                q.push(acc.value());
            }
            q
        };
        Ok(Trajectory {
            stream: noise.stream,
            dt: self.dt,
            q,
            v,
        })
    }
}

/// Periodic stationary response `v[ω] = Y[ω]F[ω]`. The zero-frequency bin
/// sets `q = F/K` for a bound particle; free particles integrate the velocity
/// from `q(0) = 0`. Models that are not positive real are refused.
pub fn solve_motion_frequency<T: Real>(model: &ImpedanceModel<T>, noise: &NoiseRealization<T>) -> Result<Trajectory<T>> {
    let table = ResponseTable::new(model, noise.samples.len(), noise.dt)?;
    table.solve(noise, &mut FftPlanner::new())
}

/// Ensemble settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig<T> {
    pub n_traj: usize,
    pub duration: T,
    pub dt: T,
    pub master_seed: u64,
    pub first_stream: u64,
}

/// Independent trajectories driven by streams
/// `first_stream, first_stream + 1, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEnsemble<T> {
    pub config: EnsembleConfig<T>,
    /// Mass used for momenta, `p = m v`.
    pub mass: T,
    pub spring: T,
    pub trajectories: Vec<Trajectory<T>>,
}

/// Runs an ensemble after checking passivity of the model.
pub fn run_ensemble<T: Real>(model: &ImpedanceModel<T>, c_sym: &ComplexSpectrum<T>, config: EnsembleConfig<T>) -> Result<TrajectoryEnsemble<T>> {
    if config.n_traj == 0 {
        return Err(invalid("ensemble needs at least one trajectory"));
    }
    let pass = passivity_test(model, &SampleBox::default_for(model))?;
    if !pass.passes {
        return Err(Error::Stability(format!(
            "model is not passive (min Re Z = {:e}); runaway kernels are not simulated",
            pass.min_re_z.as_f64()
        )));
    }
    let n = sample_count(config.duration, config.dt)?;
    check_nyquist(c_sym, config.dt)?;
    let table = ResponseTable::new(model, n, config.dt)?;
    let trajectories = (0..config.n_traj as u64)
        .into_par_iter()
        .map_init(FftPlanner::new, |planner, i| {
            let noise = synthesize_noise(c_sym, config.duration, config.dt, config.master_seed, config.first_stream + i)?;
            table.solve(&noise, planner)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryEnsemble {
        config,
        mass: model.high_frequency_mass(),
        spring: model.spring(),
        trajectories,
    })
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatEstimate<T> {
    pub value: T,
    pub std_error: T,
    pub samples: usize,
}

fn mean_and_error<T: Real>(xs: &[T]) -> StatEstimate<T> {
    let n = T::from_usize_lossy(xs.len());
    let mut s = CompensatedSum::new();
    xs.iter().for_each(|x| s.add(*x));
    let mean = s.value() / n;
    let mut ss = CompensatedSum::new();
    xs.iter().for_each(|x| ss.add((*x - mean) * (*x - mean)));
    let std_error = if xs.len() > 1 {
        (ss.value() / (n - T::one()) / n).sqrt()
    } else {
        T::infinity()
    };
    StatEstimate {
        value: mean,
        std_error,
        samples: xs.len(),
    }
}

/// Momentum diffusion from `⟨(p(t+τ) − p(t))²⟩ ≈ 2Dτ`: the slope over lags
/// in `[tau_min, tau_max]`, halved. Each trajectory gives one slope, averaged
/// over all time origins; the spread between trajectories gives the error.
/// The window should sit below the relaxation time `m/ξ′[0]`.
pub fn estimate_diffusion<T: Real>(ensemble: &TrajectoryEnsemble<T>, tau_min: T, tau_max: T) -> Result<StatEstimate<T>> {
    if ensemble.spring != T::zero() {
        return Err(invalid("diffusion is estimated for free particles only"));
    }
    let dt = ensemble.config.dt;
    let n = ensemble.trajectories[0].v.len();
    let lo = (tau_min / dt).ceil().to_usize().unwrap_or(0).max(1);
    let hi = (tau_max / dt).floor().to_usize().unwrap_or(0).min(n / 2);
    if hi <= lo {
        return Err(invalid("diffusion window holds fewer than two lags"));
    }
    let count = (hi - lo + 1).min(64);
    let lags: Vec<usize> = (0..count).map(|i| lo + (hi - lo) * i / (count - 1).max(1)).collect();
    let m = ensemble.mass;
    let slopes: Vec<T> = ensemble
        .trajectories
        .par_iter()
        .map(|tr| {
            let pts: Vec<(T, T)> = lags
                .iter()
                .map(|&l| {
                    let mut s = CompensatedSum::new();
                    for j in 0..n {
                        let d = (tr.v[(j + l) % n] - tr.v[j]) * m;
                        s.add(d * d);
                    }
                    (dt * T::from_usize_lossy(l), s.value() / T::from_usize_lossy(n))
                })
                .collect();
            fit_slope(&pts) * T::lit(0.5)
        })
        .collect();
    Ok(mean_and_error(&slopes))
}

fn fit_slope<T: Real>(pts: &[(T, T)]) -> T {
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    sxy / sxx
}

/// `⟨q²⟩` from the time average of each trajectory after `discard`.
pub fn estimate_equilibrium_variance<T: Real>(ensemble: &TrajectoryEnsemble<T>, discard: T) -> Result<StatEstimate<T>> {
    if !(ensemble.spring > T::zero()) {
        return Err(invalid("equilibrium variance needs a bound particle (K > 0)"));
    }
    let skip = (discard / ensemble.config.dt).ceil().to_usize().unwrap_or(0);
    let per: Vec<T> = ensemble
        .trajectories
        .iter()
        .map(|tr| {
            let tail = &tr.q[skip.min(tr.q.len() - 1)..];
            let mut s = CompensatedSum::new();
            tail.iter().for_each(|q| s.add(*q * *q));
            s.value() / T::from_usize_lossy(tail.len())
        })
        .collect();
    Ok(mean_and_error(&per))
}

/// `∫dω/2π |Y[ω]/ω|² C_sym[ω]` over the sampled band.
pub fn spectral_position_variance<T: Real>(model: &ImpedanceModel<T>, c_sym: &ComplexSpectrum<T>) -> Result<T> {
    if !(model.spring() > T::zero()) {
        return Err(invalid("position variance needs K > 0"));
    }
    let eps = T::lit(1e-12) * model.frequency_scale();
    let f = |w: T| -> T {
        if w == T::zero() {
            return T::zero();
        }
        match impedance(model, Complex::new(eps, -w)) {
            Ok(z) => c_sym.interpolate(w).re / (z.norm_sqr() * w * w),
            Err(_) => T::nan(),
        }
    };
    let knots: Vec<T> = (0..=c_sym.grid().half_count() as isize).map(|j| c_sym.grid().omega(j)).collect();
    // Piecewise integration on grid cells keeps the linear interpolation exact.
    let tol = Tolerance::new(T::lit(1e-16), T::lit(1e-10)).with_max_intervals(4 * knots.len() + 4000);
    let v = integrate_points(f, &knots, tol)?.value;
    if !v.is_finite() {
        return Err(Error::Domain("impedance evaluation failed inside the band".into()));
    }
    Ok(v * T::lit(2.0) / (T::lit(2.0) * T::PI()))
}

/// Two-sided periodogram `(ω_k, |Σ F_j e^{iω_k t_j}|² dt/n)` for
/// `k = 0..=n/2`; its mean is the spectrum.
pub fn periodogram<T: Real>(samples: &[T], dt: T) -> (Vec<T>, Vec<T>) {
    let n = samples.len();
    let mut buf: Vec<Complex<T>> = samples.iter().map(|x| Complex::new(*x, T::zero())).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = dt / T::from_usize_lossy(n);
    (0..=n / 2).map(|k| (bin_omega(k, n, dt), buf[k].norm_sqr() * scale)).unzip()
}

/// Welch estimate with Hann windows of `segment` samples and 50% overlap.
pub fn welch<T: Real>(samples: &[T], dt: T, segment: usize) -> Result<(Vec<T>, Vec<T>)> {
    if segment < 4 || segment > samples.len() {
        return Err(invalid("Welch segment must hold at least four samples and fit in the series"));
    }
    let window: Vec<T> = (0..segment)
        .map(|j| {
            let x = T::lit(2.0) * T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(segment);
            T::lit(0.5) * (T::one() - x.cos())
        })
        .collect();
    let w2: T = window.iter().map(|w| *w * *w).sum();
    let fft = FftPlanner::new().plan_fft_inverse(segment);
    let step = segment / 2;
    let mut acc = vec![CompensatedSum::new(); segment / 2 + 1];
    let mut count = 0usize;
    let mut start = 0;
    while start + segment <= samples.len() {
        let mut buf: Vec<Complex<T>> = samples[start..start + segment]
            .iter()
            .zip(&window)
            .map(|(x, w)| Complex::new(*x * *w, T::zero()))
            .collect();
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            a.add(buf[k].norm_sqr() * dt / w2);
        }
        count += 1;
        start += step;
    }
    let c = T::from_usize_lossy(count);
    Ok((
        (0..=segment / 2).map(|k| bin_omega(k, segment, dt)).collect(),
        acc.iter().map(|a| a.value() / c).collect(),
    ))
}

/// Statistics of an ensemble at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSample {
    pub t: f64,
    pub var_q: f64,
    pub var_p: f64,
}

/// JSON summary of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_traj: usize,
    pub dt: f64,
    pub duration: f64,
    pub master_seed: u64,
    pub first_stream: u64,
    pub mass: f64,
    pub spring: f64,
    pub variance_vs_time: Vec<VarianceSample>,
}

impl<T: Real> TrajectoryEnsemble<T> {
    /// Ensemble variances of `q(t) − q(0)` and `p(t) − p(0)` at `points`
    /// evenly spaced times.
    pub fn summary(&self, points: usize) -> EnsembleSummary {
        let n = self.trajectories[0].q.len();
        let points = points.clamp(2, n);
        let nt = T::from_usize_lossy(self.trajectories.len());
        let variance_vs_time = (0..points)
            .map(|i| {
                let j = i * (n - 1) / (points - 1);
                let mut sq = CompensatedSum::new();
                let mut sp = CompensatedSum::new();
                for tr in &self.trajectories {
                    let dq = tr.q[j] - tr.q[0];
                    let dp = (tr.v[j] - tr.v[0]) * self.mass;
                    sq.add(dq * dq);
                    sp.add(dp * dp);
                }
                VarianceSample {
                    t: (self.config.dt * T::from_usize_lossy(j)).as_f64(),
                    var_q: (sq.value() / nt).as_f64(),
                    var_p: (sp.value() / nt).as_f64(),
                }
            })
            .collect();
        EnsembleSummary {
            n_traj: self.trajectories.len(),
            dt: self.config.dt.as_f64(),
            duration: self.config.duration.as_f64(),
            master_seed: self.config.master_seed,
            first_stream: self.config.first_stream,
            mass: self.mass.as_f64(),
            spring: self.spring.as_f64(),
            variance_vs_time,
        }
    }

    /// Writes `traj_<stream>.csv` for every trajectory into `dir`.
    pub fn write_trajectories(&self, dir: &Path, meta: &[(String, String)]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.trajectories
            .iter()
            .map(|tr| {
                let path = dir.join(format!("traj_{}.csv", tr.stream));
                let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                let mut meta = meta.to_vec();
                meta.push(("stream".into(), tr.stream.to_string()));
                tr.write_csv(file, &meta)?;
                Ok(path)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::FrequencyGrid;

    fn white(level: f64, half_band: f64) -> ComplexSpectrum<f64> {
        let g = FrequencyGrid::new(half_band / 400.0, 400).unwrap();
        ComplexSpectrum::from_fn(g, |_| Complex::new(level, 0.0))
    }

    #[test]
    fn symmetrization() {
        let g = FrequencyGrid::new(0.1, 50).unwrap();
        let c = ComplexSpectrum::from_fn(g, |w: f64| Complex::new(if w > 0.0 { 2.0 * w } else { 0.0 }, 0.0));
        let s = symmetrize_spectrum(&c).unwrap();
        for (w, v) in s.iter() {
            assert!((v.re - w.abs()).abs() < 1e-15);
        }
        assert_eq!(s.hermitian_residual(), 0.0);
        let bad = ComplexSpectrum::from_fn(g, |_| Complex::new(-1.0, 0.0));
        assert!(symmetrize_spectrum(&bad).is_err());
    }

    #[test]
    fn noise_is_reproducible_and_zero_spectrum_is_silent() {
        let c = white(2.0, 10.0);
        let a = synthesize_noise(&c, 50.0, 0.1, 7, 3).unwrap();
        let b = synthesize_noise(&c, 50.0, 0.1, 7, 3).unwrap();
        let d = synthesize_noise(&c, 50.0, 0.1, 7, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, d.samples);
        let z = synthesize_noise(&white(0.0, 10.0), 50.0, 0.1, 7, 3).unwrap();
        assert!(z.samples.iter().all(|x| *x == 0.0));
        assert!(synthesize_noise(&c, 50.0, 0.5, 7, 3).is_err());
    }

    #[test]
    fn white_noise_autocovariance() {
        // Band reaching Nyquist: C = 2D up to π/dt.
        let (d, dt) = (0.5, 0.1);
        let c = white(2.0 * d, std::f64::consts::PI / dt);
        let x = synthesize_noise(&c, 2000.0, dt, 11, 0).unwrap().samples;
        let n = x.len() as f64;
        let c0 = x.iter().map(|v| v * v).sum::<f64>() / n;
        let c1 = x.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / n;
        let expect = 2.0 * d / dt;
        let sigma = expect * (2.0 / n).sqrt();
        assert!((c0 - expect).abs() < 4.0 * sigma, "{c0} vs {expect}");
        assert!(c1.abs() < 4.0 * sigma, "{c1}");
    }

    #[test]
    fn monochromatic_drive() {
        let z = ImpedanceModel::brownian(1.0, 2.0, 0.3, 1.0).unwrap();
        let (n, dt) = (256usize, 0.05);
        let k0 = 5;
        let w0 = 2.0 * std::f64::consts::PI * k0 as f64 / (n as f64 * dt);
        let noise = NoiseRealization {
            dt,
            samples: (0..n).map(|j| (w0 * j as f64 * dt).cos()).collect(),
            master_seed: 0,
            stream: 0,
        };
        let tr = solve_motion_frequency(&z, &noise).unwrap();
        let y = impedance(&z, Complex::new(1e-12, -w0)).unwrap().inv();
        for j in 0..n {
            let t = j as f64 * dt;
            let expect = y.norm() * (w0 * t - y.arg()).cos();
            assert!((tr.v[j] - expect).abs() < 1e-10, "{j}");
        }
        let silent = NoiseRealization { samples: vec![0.0; n], ..noise };
        let tr = solve_motion_frequency(&z, &silent).unwrap();
        assert!(tr.q.iter().chain(&tr.v).all(|x| *x == 0.0));
    }

    #[test]
    fn runaway_models_are_refused() {
        let al = ImpedanceModel::abraham_lorentz(1.0, 1.0, 0.0).unwrap();
        let noise = NoiseRealization {
            dt: 0.1,
            samples: vec![0.0; 64],
            master_seed: 0,
            stream: 0,
        };
        assert!(matches!(solve_motion_frequency(&al, &noise), Err(Error::Stability(_))));
    }

    #[test]
    fn periodogram_normalisation() {
        let c = white(3.0, std::f64::consts::PI / 0.2);
        let mut acc = vec![0.0; 129];
        for s in 0..200 {
            let x = synthesize_noise(&c, 51.2, 0.2, 5, s).unwrap().samples;
            let (_, p) = periodogram(&x, 0.2);
            acc.iter_mut().zip(p).for_each(|(a, v)| *a += v / 200.0);
        }
        let mean = acc[1..128].iter().sum::<f64>() / 127.0;
        assert!((mean - 3.0).abs() < 0.1, "{mean}");
        let x = synthesize_noise(&c, 2000.0, 0.2, 5, 0).unwrap().samples;
        let (_, p) = welch(&x, 0.2, 256).unwrap();
        let mean = p[1..128].iter().sum::<f64>() / 127.0;
        assert!((mean - 3.0).abs() < 0.15, "{mean}");
    }
}
