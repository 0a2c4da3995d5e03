//! Mechanical impedance, passivity and admittance poles.
//!
//! Impedances are written in the Laplace variable `p = −iω`:
//! `Z{p} = m p + K/p + R{p} − a p²`, where
//! `R{p} = ∫₀^∞ (dk/π) ρ(k) 2p/(p² + k²)` is the spectral part built from
//! `ρ(k) = ξ[k]/k` and `a` is the radiation-reaction coefficient `(2/3)e²`.
//! `ρ(0)` is the friction coefficient `ξ′[0]`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{winding_number, Rect, WindingOptions};
use crate::dispersion::{induced_mass_vacuum, TailFit, TailModel};
use crate::error::{invalid, Error, Result};
use crate::linear_coupling::{charge_force_commutator, induced_mass_charge, LinearCoupling};
use crate::quadrature::{integrate_points, integrate_to_infinity, Tolerance};
use crate::radiation_pressure::{force_commutator, quasistatic_coefficients, vacuum_force_commutator};
use crate::real::{CompensatedSum, Real};
use crate::smatrix::SMatrixModel;
use crate::spectrum::{ComplexSpectrum, FrequencyGrid};
use crate::system::{Coupling, MechanicalSystem, ThermalState};

/// Samples of `ρ(k) = ξ[k]/k` on `k_j = jΔ`, linearly interpolated and
/// continued by a fitted tail.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure<T> {
    delta: T,
    values: Vec<T>,
    tail: TailFit<T>,
}

impl<T: Real> SpectralMeasure<T> {
    pub fn new(delta: T, values: Vec<T>, tail: TailModel) -> Result<Self> {
        if !(delta > T::zero()) || values.len() < 16 {
            return Err(invalid("spectral measure needs a positive step and at least 16 samples"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("spectral measure samples must be finite"));
        }
        let k: Vec<T> = (1..values.len()).map(|j| delta * T::from_usize_lossy(j)).collect();
        let tail = TailFit::fit(tail, &k, &values[1..])?;
        if tail.model != TailModel::Truncate && tail.exponent >= T::one() {
            return Err(Error::Divergence("spectral measure grows too fast".into()));
        }
        Ok(Self { delta, values, tail })
    }

    /// `ρ_j = ξ_j/k_j` from the positive half of a sampled commutator, with
    /// `ρ(0)` set to `friction`.
    pub fn from_commutator(xi: &ComplexSpectrum<T>, friction: T, tail: TailModel) -> Result<Self> {
        let g = xi.grid();
        let n = g.half_count() as isize;
        let mut values: Vec<T> = (0..=n).map(|j| if j == 0 { friction } else { xi.at(j).re / g.omega(j) }).collect();
        values[0] = friction;
        Self::new(g.delta(), values, tail)
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    fn max_k(&self) -> T {
        self.delta * T::from_usize_lossy(self.values.len() - 1)
    }

    /// `R{p}` for `Re p > 0`.
    pub fn transform(&self, p: Complex<T>) -> Result<Complex<T>> {
        let i = Complex::new(T::zero(), T::one());
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        let log_pair = |k: T| ((p + i * k).ln(), (p - i * k).ln());
        let (mut lp0, mut lm0) = log_pair(T::zero());
        for j in 0..self.values.len() - 1 {
            let k0 = self.delta * T::from_usize_lossy(j);
            let (r0, r1) = (self.values[j], self.values[j + 1]);
            let slope = (r1 - r0) / self.delta;
            let alpha = r0 - slope * k0;
            let (lp1, lm1) = log_pair(k0 + self.delta);
            let (dp, dm) = (lp1 - lp0, lm1 - lm0);
            let term = (dp - dm) * (-i) * alpha + p * (dp + dm) * slope;
            re.add(term.re);
            im.add(term.im);
            lp0 = lp1;
            lm0 = lm1;
        }
        let body = Complex::new(re.value(), im.value());
        Ok((body + self.tail_part(p)?) / T::PI())
    }

    fn tail_part(&self, p: Complex<T>) -> Result<Complex<T>> {
        if self.tail.model == TailModel::Truncate {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let l = self.max_k();
        let f = |k: T| p * T::lit(2.0) / (p * p + k * k) * self.tail.eval(k);
        let tol = Tolerance::new(T::lit(1e-16), T::lit(1e-11));
        let reach = l.max(T::lit(4.0) * p.norm());
        let mut points = vec![l];
        if p.im.abs() > l && p.im.abs() < reach {
            points.push(p.im.abs());
        }
        points.push(reach);
        let near = if reach > l {
            integrate_points(f, &points, tol)?.value
        } else {
            Complex::new(T::zero(), T::zero())
        };
        let far = integrate_to_infinity(f, reach, reach, tol)?.value;
        Ok(near + far)
    }
}

/// Impedance `Z{p} = m p + K/p + R{p} − a p²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceModel<T> {
    high_frequency_mass: T,
    spring: T,
    friction: T,
    /// `None` stands for the flat measure `ρ ≡ friction`, whose spectral part
    /// is the constant `friction`.
    measure: Option<SpectralMeasure<T>>,
    radiation_reaction: T,
    induced_mass: T,
    scale: T,
}

impl<T: Real> ImpedanceModel<T> {
    pub fn new(
        high_frequency_mass: T,
        spring: T,
        friction: T,
        measure: Option<SpectralMeasure<T>>,
        radiation_reaction: T,
    ) -> Result<Self> {
        if !high_frequency_mass.is_finite() || !spring.is_finite() || !friction.is_finite() || !radiation_reaction.is_finite() {
            return Err(invalid("impedance parameters must be finite"));
        }
        let scale = if radiation_reaction != T::zero() && high_frequency_mass != T::zero() {
            (high_frequency_mass / radiation_reaction).abs()
        } else if let Some(m) = &measure {
            m.max_k() / T::lit(100.0)
        } else if high_frequency_mass > T::zero() && friction > T::zero() {
            friction / high_frequency_mass
        } else if high_frequency_mass > T::zero() && spring > T::zero() {
            (spring / high_frequency_mass).sqrt()
        } else {
            T::one()
        };
        Ok(Self {
            high_frequency_mass,
            spring,
            friction,
            measure,
            radiation_reaction,
            induced_mass: T::zero(),
            scale,
        })
    }

    /// Same field coupling with quasistatic mass `M`, so that `m = M − μ`.
    pub fn with_quasistatic_mass(&self, mass: T) -> Self {
        Self {
            high_frequency_mass: mass - self.induced_mass,
            ..self.clone()
        }
    }

    /// Induced mass `μ` subtracted from the quasistatic mass (zero when the
    /// model was given its high-frequency mass directly).
    pub fn induced_mass(&self) -> T {
        self.induced_mass
    }

    /// Particle with white-noise coupling: `Z = m p + K/p + D/T`.
    pub fn brownian(mass: T, spring: T, diffusion: T, temperature: T) -> Result<Self> {
        if !(temperature > T::zero()) {
            return Err(invalid("a Brownian impedance needs T > 0"));
        }
        Self::new(mass, spring, diffusion / temperature, None, T::zero())
    }

    /// Renormalised point charge: `Z[ω] = −iMω + iK/ω + (2/3)e²ω²`.
    pub fn abraham_lorentz(mass: T, charge_squared: T, spring: T) -> Result<Self> {
        Self::new(mass, spring, T::zero(), None, T::lit(2.0 / 3.0) * charge_squared)
    }

    /// Regulated point charge with quasistatic mass `M`: `m = M − μ`.
    pub fn linear_charge(mass: T, spring: T, coupling: &LinearCoupling<T>, grid: FrequencyGrid<T>) -> Result<Self> {
        let mu = induced_mass_charge(coupling)?;
        let xi = ComplexSpectrum::from_fn(grid, |w| Complex::new(charge_force_commutator(coupling, w), T::zero()));
        let measure = SpectralMeasure::from_commutator(&xi, T::zero(), TailModel::PowerLaw)?;
        let mut z = Self::new(mass - mu, spring, T::zero(), Some(measure), T::zero())?;
        z.scale = coupling.regulator().scale();
        z.induced_mass = mu;
        Ok(z)
    }

    /// Scatterer of vacuum quasistatic mass `M_0`: `m = M_0 − μ_0`, with the
    /// measure sampled on `grid` (which must reach well into the transparent
    /// band).
    pub fn scatterer(vacuum_mass: T, spring: T, model: &SMatrixModel<T>, state: &ThermalState<T>, grid: FrequencyGrid<T>) -> Result<Self> {
        let xi_0 = ComplexSpectrum::try_from_fn(grid, |w| {
            let v = vacuum_force_commutator(model, w.abs())?;
            Ok(Complex::new(if w < T::zero() { -v } else { v }, T::zero()))
        })?;
        let mu_0 = induced_mass_vacuum(&xi_0, TailModel::LogLinear)?.value();
        let friction = quasistatic_coefficients(model, state)?.friction;
        let xi_t = if state.is_vacuum() {
            xi_0
        } else {
            ComplexSpectrum::try_from_fn(grid, |w| {
                let v = force_commutator(model, state, w.abs())?;
                Ok(Complex::new(if w < T::zero() { -v } else { v }, T::zero()))
            })?
        };
        let measure = SpectralMeasure::from_commutator(&xi_t, friction, TailModel::LogLinear)?;
        let mut z = Self::new(vacuum_mass - mu_0, spring, friction, Some(measure), T::zero())?;
        if let Some(c) = model.cutoff() {
            z.scale = c;
        }
        z.induced_mass = mu_0;
        Ok(z)
    }

    /// Default grid for [`ImpedanceModel::scatterer`]: up to `100Ω` with step
    /// `min(Ω/20, T/8)`, at most 20000 points.
    pub fn default_scatterer_grid(model: &SMatrixModel<T>, state: &ThermalState<T>) -> Result<FrequencyGrid<T>> {
        match model {
            SMatrixModel::PerfectReflector => Err(Error::Divergence(
                "a perfect reflector has an infinite induced mass".into(),
            )),
            SMatrixModel::ResonanceCutoff { cutoff } => {
                let mut step = *cutoff / T::lit(20.0);
                if !state.is_vacuum() {
                    step = step.min(state.temperature() / T::lit(8.0));
                }
                let n = (T::lit(100.0) * *cutoff / step).ceil().min(T::lit(20000.0));
                let n = n.to_usize().unwrap_or(20000);
                FrequencyGrid::new(T::lit(100.0) * *cutoff / T::from_usize_lossy(n), n)
            }
            SMatrixModel::Tabulated { r, .. } => Ok(*r.grid()),
        }
    }

    /// Builds the impedance of a mechanical system. Scatterers use
    /// [`ImpedanceModel::default_scatterer_grid`]; regulated charges use
    /// `Δ = Ω/20` up to `100Ω`.
    pub fn from_system(system: &MechanicalSystem<T>) -> Result<Self> {
        let (m, k) = (system.quasistatic_mass(), system.spring());
        match system.coupling() {
            Coupling::BrownianKernel { diffusion, state } => {
                if state.is_vacuum() {
                    Self::new(m, k, T::zero(), None, T::zero())
                } else {
                    Self::brownian(m, k, *diffusion, state.temperature())
                }
            }
            Coupling::RadiationReaction { charge_squared } => Self::abraham_lorentz(m, *charge_squared, k),
            Coupling::LinearCharge(c) => {
                let grid = FrequencyGrid::new(c.regulator().scale() / T::lit(20.0), 2000)?;
                Self::linear_charge(m, k, c, grid)
            }
            Coupling::Scatterer { model, state } => {
                let grid = Self::default_scatterer_grid(model, state)?;
                Self::scatterer(m, k, model, state, grid)
            }
        }
    }

    pub fn high_frequency_mass(&self) -> T {
        self.high_frequency_mass
    }

    pub fn spring(&self) -> T {
        self.spring
    }

    pub fn friction(&self) -> T {
        self.friction
    }

    pub fn measure(&self) -> Option<&SpectralMeasure<T>> {
        self.measure.as_ref()
    }

    pub fn radiation_reaction(&self) -> T {
        self.radiation_reaction
    }

    /// Characteristic frequency of the model.
    pub fn frequency_scale(&self) -> T {
        self.scale
    }

    /// Smallest sample of the spectral measure.
    pub fn measure_min(&self) -> T {
        self.measure.as_ref().map_or(self.friction, |m| m.min_value())
    }

    /// Sign conditions of a positive-real decomposition.
    pub fn is_structurally_passive(&self) -> bool {
        let tol = self.measure.as_ref().map_or(T::zero(), |m| {
            T::lit(1e-12) * m.values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
        });
        self.high_frequency_mass >= T::zero()
            && self.spring >= T::zero()
            && self.friction >= T::zero()
            && self.measure_min() >= -tol
            && self.radiation_reaction == T::zero()
    }
}

/// `Z{p}` for `Re p > 0`.
pub fn impedance<T: Real>(model: &ImpedanceModel<T>, p: Complex<T>) -> Result<Complex<T>> {
    if !(p.re > T::zero()) {
        return Err(Error::Domain("impedance needs Re p > 0".into()));
    }
    let spectral = match &model.measure {
        Some(m) => m.transform(p)?,
        None => Complex::new(model.friction, T::zero()),
    };
    let mut z = p * model.high_frequency_mass + spectral - p * p * model.radiation_reaction;
    if model.spring != T::zero() {
        z = z + Complex::new(model.spring, T::zero()) / p;
    }
    Ok(z)
}

/// `Z` as a function of frequency, `Z[ω] = Z{−iω}` for `Im ω > 0`.
pub fn impedance_at_frequency<T: Real>(model: &ImpedanceModel<T>, omega: Complex<T>) -> Result<Complex<T>> {
    impedance(model, Complex::new(omega.im, -omega.re))
}

/// `Y{p} = 1/Z{p}`; a vanishing impedance is reported as
/// [`Error::Stability`].
pub fn admittance<T: Real>(model: &ImpedanceModel<T>, p: Complex<T>) -> Result<Complex<T>> {
    let z = impedance(model, p)?;
    if z.norm() == T::zero() {
        return Err(Error::Stability(format!("admittance pole at p = {}", p.as_f64_pair())));
    }
    Ok(z.inv())
}

trait PairDisplay {
    fn as_f64_pair(&self) -> String;
}

impl<T: Real> PairDisplay for Complex<T> {
    fn as_f64_pair(&self) -> String {
        format!("{}{:+}i", self.re.as_f64(), self.im.as_f64())
    }
}

/// Sampling region `Re p ∈ [ε, P]`, `|Im p| ≤ P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox<T> {
    pub epsilon: T,
    pub extent: T,
    pub re_samples: usize,
    pub im_samples: usize,
}

impl<T: Real> SampleBox<T> {
    pub fn new(epsilon: T, extent: T) -> Result<Self> {
        if !(epsilon > T::zero() && extent > epsilon) {
            return Err(invalid("sample box needs 0 < ε < P"));
        }
        Ok(Self {
            epsilon,
            extent,
            re_samples: 24,
            im_samples: 49,
        })
    }

    /// `ε = 10⁻³·scale`, `P = 10·scale`.
    pub fn default_for(model: &ImpedanceModel<T>) -> Self {
        let s = model.frequency_scale();
        Self {
            epsilon: T::lit(1e-3) * s,
            extent: T::lit(10.0) * s,
            re_samples: 24,
            im_samples: 49,
        }
    }

    fn points(&self) -> Vec<Complex<T>> {
        let ratio = (self.extent / self.epsilon).ln();
        let nr = self.re_samples.max(2);
        let ni = self.im_samples.max(2);
        let mut pts = Vec::with_capacity(nr * ni);
        for a in 0..nr {
            let re = self.epsilon * (ratio * T::from_usize_lossy(a) / T::from_usize_lossy(nr - 1)).exp();
            for b in 0..ni {
                let im = -self.extent + T::lit(2.0) * self.extent * T::from_usize_lossy(b) / T::from_usize_lossy(ni - 1);
                pts.push(Complex::new(re, im));
            }
        }
        pts
    }
}

/// Result of a passivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Passivity<T> {
    pub passes: bool,
    pub structural: bool,
    pub min_re_z: T,
    pub argmin: Complex<T>,
}

/// Structural sign test together with `min Re Z > 0` over the sampled box.
pub fn passivity_test<T: Real>(model: &ImpedanceModel<T>, region: &SampleBox<T>) -> Result<Passivity<T>> {
    let values: Vec<(Complex<T>, T)> = region
        .points()
        .into_par_iter()
        .map(|p| impedance(model, p).map(|z| (p, z.re)))
        .collect::<Result<_>>()?;
    let (argmin, min_re_z) = values
        .into_iter()
        .fold((Complex::new(T::nan(), T::nan()), T::infinity()), |acc, v| if v.1 < acc.1 { v } else { acc });
    let structural = model.is_structurally_passive();
    Ok(Passivity {
        passes: structural && min_re_z > T::zero(),
        structural,
        min_re_z,
        argmin,
    })
}

/// A zero of `Z[ω]` in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole<T> {
    pub omega: Complex<T>,
    /// Residue of `Y[ω]`, `1/Z′[ω]`.
    pub residue: Complex<T>,
    pub abs_z: T,
}

const SPLIT_OFFSETS: [f64; 4] = [0.5, 0.4863, 0.5291, 0.4417];

/// Zeros of `Z[ω]` inside `rect` (which must lie in `Im ω > 0`), by recursive
/// bisection with the argument principle and Newton refinement.
pub fn find_upper_half_poles<T: Real>(model: &ImpedanceModel<T>, rect: &Rect<T>) -> Result<Vec<Pole<T>>> {
    if !(rect.im_min > T::zero()) {
        return Err(Error::Domain("pole search box must lie strictly above the real axis".into()));
    }
    let mut poles = search(model, *rect, 0)?;
    poles.sort_by(|a, b| {
        (a.omega.im, a.omega.re)
            .partial_cmp(&(b.omega.im, b.omega.re))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    // Newton from neighbouring cells can land on the same zero.
    let mut unique: Vec<Pole<T>> = Vec::new();
    for p in poles {
        let tol = T::lit(1e-7) * p.omega.norm().max(model.frequency_scale());
        if !unique.iter().any(|q| (q.omega - p.omega).norm() < tol) {
            unique.push(p);
        }
    }
    Ok(unique)
}

fn count_zeros<T: Real>(model: &ImpedanceModel<T>, rect: &Rect<T>) -> Result<i64> {
    winding_number(|w| impedance_at_frequency(model, w), rect, WindingOptions::default())
}

fn search<T: Real>(model: &ImpedanceModel<T>, rect: Rect<T>, depth: usize) -> Result<Vec<Pole<T>>> {
    let n = count_zeros(model, &rect)?;
    if n <= 0 {
        return Ok(Vec::new());
    }
    if n == 1 || depth >= 48 {
        if let Some(p) = newton(model, rect.center(), &rect)? {
            return Ok(vec![p]);
        }
        if depth >= 48 {
            return Err(Error::NotConverged("pole refinement failed".into()));
        }
    }
    let mut last_err = None;
    for off in SPLIT_OFFSETS {
        let (a, b) = rect.split(T::lit(off));
        let halves = rayon::join(|| search(model, a, depth + 1), || search(model, b, depth + 1));
        match halves {
            (Ok(mut x), Ok(y)) => {
                x.extend(y);
                return Ok(x);
            }
            (Err(e @ Error::ContourTooClose(_)), _) | (_, Err(e @ Error::ContourTooClose(_))) => last_err = Some(e),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::ContourTooClose("no admissible split".into())))
}

fn derivative<T: Real>(model: &ImpedanceModel<T>, w: Complex<T>, h: T) -> Result<Complex<T>> {
    let hc = Complex::new(h, T::zero());
    let hi = Complex::new(T::zero(), h);
    let d_re = (impedance_at_frequency(model, w + hc)? - impedance_at_frequency(model, w - hc)?) / (hc * T::lit(2.0));
    let d_im = (impedance_at_frequency(model, w + hi)? - impedance_at_frequency(model, w - hi)?) / (hi * T::lit(2.0));
    Ok((d_re + d_im) * T::lit(0.5))
}

fn z_scale<T: Real>(model: &ImpedanceModel<T>, w: Complex<T>) -> T {
    let p = w.norm();
    let mut s = model.high_frequency_mass.abs() * p + model.radiation_reaction.abs() * p * p + model.friction.abs();
    if p > T::zero() {
        s = s + model.spring.abs() / p;
    }
    s.max(T::min_positive_value())
}

fn newton<T: Real>(model: &ImpedanceModel<T>, start: Complex<T>, rect: &Rect<T>) -> Result<Option<Pole<T>>> {
    let mut w = start;
    let h = T::lit(1e-5) * rect.diameter().max(T::lit(1e-3) * w.norm()).max(T::min_positive_value());
    for _ in 0..100 {
        let z = impedance_at_frequency(model, w)?;
        let scale = z_scale(model, w);
        let dz = derivative(model, w, h.min(T::lit(1e-3) * w.im))?;
        if z.norm() < T::lit(1e-10) * scale {
            if !rect.contains(w) {
                return Ok(None);
            }
            return Ok(Some(Pole {
                omega: w,
                residue: dz.inv(),
                abs_z: z.norm(),
            }));
        }
        if dz.norm() == T::zero() {
            return Ok(None);
        }
        let step = z / dz;
        w = w - step;
        if !(w.im > T::zero()) || !w.re.is_finite() {
            return Ok(None);
        }
        if step.norm() < T::epsilon() * w.norm() {
            break;
        }
    }
    let z = impedance_at_frequency(model, w)?;
    if z.norm() < T::lit(1e-10) * z_scale(model, w) && rect.contains(w) {
        let dz = derivative(model, w, h.min(T::lit(1e-3) * w.im))?;
        return Ok(Some(Pole {
            omega: w,
            residue: dz.inv(),
            abs_z: z.norm(),
        }));
    }
    Ok(None)
}

/// Qualitative behaviour of the motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionClass {
    StableCausal,
    Runaway,
    /// The same model with runaway modes removed by boundary conditions.
    NoncausalPreacceleration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub re: f64,
    pub im: f64,
    #[serde(rename = "abs_Z")]
    pub abs_z: f64,
    pub residue_re: f64,
    pub residue_im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub m: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub friction: f64,
    pub measure_min: f64,
}

/// Classification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionReport {
    pub class: MotionClass,
    /// Set for runaway models: excluding the runaway modes yields
    /// pre-acceleration.
    pub noncausal_variant: Option<MotionClass>,
    #[serde(rename = "min_re_Z")]
    pub min_re_z: f64,
    pub argmin_re_z: [f64; 2],
    pub poles: Vec<PoleReport>,
    pub structural: StructuralReport,
}

/// Stable and causal iff the passivity test passes; otherwise the upper half
/// plane is searched in boxes growing by factors of four up to `10⁶` times
/// the model scale.
pub fn classify_motion<T: Real>(model: &ImpedanceModel<T>) -> Result<MotionReport> {
    let region = SampleBox::default_for(model);
    let pass = passivity_test(model, &region)?;
    let structural = StructuralReport {
        m: model.high_frequency_mass.as_f64(),
        k: model.spring.as_f64(),
        friction: model.friction.as_f64(),
        measure_min: model.measure_min().as_f64(),
    };
    let scale = model.frequency_scale();
    let mut poles = Vec::new();
    if !pass.passes {
        let mut extent = T::lit(10.0) * scale;
        let mut inner = T::zero();
        while extent <= T::lit(1e6) * scale {
            let lo = if inner == T::zero() { region.epsilon } else { inner };
            // Annular search: the new strip above the previous box plus the two flanks.
            let mut boxes = vec![Rect::new(-extent, extent, lo, extent)?];
            if inner > T::zero() {
                boxes.push(Rect::new(-extent, -inner, region.epsilon, inner)?);
                boxes.push(Rect::new(inner, extent, region.epsilon, inner)?);
            }
            for b in boxes {
                poles.extend(find_upper_half_poles(model, &b)?);
            }
            if !poles.is_empty() {
                break;
            }
            inner = extent;
            extent = extent * T::lit(4.0);
        }
    }
    let class = if pass.passes { MotionClass::StableCausal } else { MotionClass::Runaway };
    Ok(MotionReport {
        class,
        noncausal_variant: (class == MotionClass::Runaway).then_some(MotionClass::NoncausalPreacceleration),
        min_re_z: pass.min_re_z.as_f64(),
        argmin_re_z: [pass.argmin.re.as_f64(), pass.argmin.im.as_f64()],
        poles: poles
            .iter()
            .map(|p| PoleReport {
                re: p.omega.re.as_f64(),
                im: p.omega.im.as_f64(),
                abs_z: p.abs_z.as_f64(),
                residue_re: p.residue.re.as_f64(),
                residue_im: p.residue.im.as_f64(),
            })
            .collect(),
        structural,
    })
}
