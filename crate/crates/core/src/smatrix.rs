//! Reflection and transmission amplitudes of a point scatterer.
//!
//! The amplitudes `(r, s)` are retarded functions of frequency. Closed-form
//! models can be evaluated anywhere in the upper half plane; tabulated
//! models only on their own real frequency grid.

use std::io::Read;
use std::path::Path;

use num_complex::Complex;

use crate::contour::{winding_number, Rect, WindingOptions};
use crate::error::{invalid, Error, Result};
use crate::real::Real;
use crate::spectrum::{ComplexSpectrum, FrequencyGrid};

/// Reflection/transmission model.
#[derive(Debug, Clone, PartialEq)]
pub enum SMatrixModel<T> {
    /// `r = −1`, `s = 0` at every frequency.
    PerfectReflector,
    /// `r = −iΩ/(ω + iΩ)`, `s = 1 + r = ω/(ω + iΩ)`.
    ResonanceCutoff { cutoff: T },
    /// Samples of `r` and `s` on a common grid.
    Tabulated {
        r: ComplexSpectrum<T>,
        s: ComplexSpectrum<T>,
    },
}

/// Value, first and second frequency derivative of an amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub value: Complex<T>,
    pub d1: Complex<T>,
    pub d2: Complex<T>,
}

impl<T: Real> SMatrixModel<T> {
    pub fn resonance(cutoff: T) -> Result<Self> {
        if !(cutoff > T::zero() && cutoff.is_finite()) {
            return Err(invalid("resonance cutoff must be positive and finite"));
        }
        Ok(Self::ResonanceCutoff { cutoff })
    }

    pub fn tabulated(r: ComplexSpectrum<T>, s: ComplexSpectrum<T>) -> Result<Self> {
        if r.grid() != s.grid() {
            return Err(invalid("r and s must share the same frequency grid"));
        }
        Ok(Self::Tabulated { r, s })
    }

    /// Loads a tabulated model from two `omega,re,im` CSV streams.
    pub fn from_csv_readers<R1: Read, R2: Read>(r: R1, s: R2) -> Result<Self> {
        Self::tabulated(ComplexSpectrum::read_csv(r)?, ComplexSpectrum::read_csv(s)?)
    }

    pub fn from_csv_files(r: impl AsRef<Path>, s: impl AsRef<Path>) -> Result<Self> {
        let fr = std::fs::File::open(r.as_ref())?;
        let fs = std::fs::File::open(s.as_ref())?;
        Self::from_csv_readers(fr, fs)
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Self::Tabulated { .. })
    }

    /// Characteristic frequency of the model, if it has one.
    pub fn cutoff(&self) -> Option<T> {
        match self {
            Self::ResonanceCutoff { cutoff } => Some(*cutoff),
            _ => None,
        }
    }

    /// `(r, s)` at a complex frequency.
    pub fn eval_rs(&self, omega: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
        match self {
            Self::PerfectReflector => Ok((-Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()))),
            Self::ResonanceCutoff { cutoff } => {
                let i_cut = Complex::new(T::zero(), *cutoff);
                let r = -i_cut / (omega + i_cut);
                Ok((r, r + T::one()))
            }
            Self::Tabulated { r, s } => {
                if omega.im != T::zero() {
                    return Err(Error::UnsupportedContinuation(
                        "tabulated amplitudes are only known on the real axis".into(),
                    ));
                }
                let j = r.grid().index_of(omega.re).ok_or_else(|| {
                    Error::UnsupportedContinuation(format!(
                        "ω = {} is not a point of the tabulated grid",
                        omega.re.as_f64()
                    ))
                })?;
                Ok((r.at(j), s.at(j)))
            }
        }
    }

    /// `(r, s)` at a real frequency.
    pub fn eval_real(&self, omega: T) -> Result<(Complex<T>, Complex<T>)> {
        self.eval_rs(Complex::new(omega, T::zero()))
    }

    /// Value and first two derivatives of `r` and `s` at a real frequency.
    pub fn jets(&self, omega: T) -> Result<(Jet<T>, Jet<T>)> {
        let zero = Complex::new(T::zero(), T::zero());
        match self {
            Self::PerfectReflector => Ok((
                Jet {
                    value: -Complex::new(T::one(), T::zero()),
                    d1: zero,
                    d2: zero,
                },
                Jet {
                    value: zero,
                    d1: zero,
                    d2: zero,
                },
            )),
            Self::ResonanceCutoff { cutoff } => {
                let i_cut = Complex::new(T::zero(), *cutoff);
                let den = Complex::new(omega, T::zero()) + i_cut;
                let r = -i_cut / den;
                let d1 = i_cut / (den * den);
                let d2 = -(i_cut * T::lit(2.0)) / (den * den * den);
                Ok((
                    Jet { value: r, d1, d2 },
                    Jet {
                        value: r + T::one(),
                        d1,
                        d2,
                    },
                ))
            }
            Self::Tabulated { .. } => Err(Error::UnsupportedContinuation(
                "derivatives of tabulated amplitudes are not available".into(),
            )),
        }
    }
}

/// Amplitudes that can be evaluated off the real axis.
pub trait AnalyticAmplitudes<T: Real> {
    fn amplitudes(&self, omega: Complex<T>) -> Result<(Complex<T>, Complex<T>)>;
}

impl<T: Real> AnalyticAmplitudes<T> for SMatrixModel<T> {
    fn amplitudes(&self, omega: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
        if !self.is_closed_form() {
            return Err(Error::UnsupportedContinuation(
                "causality of tabulated amplitudes cannot be checked by continuation".into(),
            ));
        }
        self.eval_rs(omega)
    }
}

/// Maximum of `| |r|² + |s|² − 1 |` over the grid.
pub fn check_unitarity<T: Real>(model: &SMatrixModel<T>, grid: &FrequencyGrid<T>) -> Result<T> {
    let mut worst = T::zero();
    for w in grid.points() {
        let (r, s) = model.eval_real(w)?;
        worst = worst.max((r.norm_sqr() + s.norm_sqr() - T::one()).abs());
    }
    Ok(worst)
}

/// Largest reality residual `|f[−ω] − f*[ω]|` of `r` and `s` over the grid.
pub fn reality_residual<T: Real>(model: &SMatrixModel<T>, grid: &FrequencyGrid<T>) -> Result<T> {
    let r = ComplexSpectrum::try_from_fn(*grid, |w| Ok(model.eval_real(w)?.0))?;
    let s = ComplexSpectrum::try_from_fn(*grid, |w| Ok(model.eval_real(w)?.1))?;
    Ok(r.hermitian_residual().max(s.hermitian_residual()))
}

/// Largest `|r[ω]|` for `ω` in `[band_factor·ω_c, 10·band_factor·ω_c]`.
///
/// Closed-form models are sampled at 2001 points; tabulated models use
/// their grid points inside the band.
pub fn check_transparency<T: Real>(model: &SMatrixModel<T>, omega_c: T, band_factor: T) -> Result<T> {
    if !(omega_c > T::zero()) {
        return Err(invalid("transparency cutoff must be positive"));
    }
    if !(band_factor >= T::one()) {
        return Err(invalid("band factor must be at least 1"));
    }
    let lo = band_factor * omega_c;
    let hi = lo * T::lit(10.0);
    let mut worst = T::zero();
    match model {
        SMatrixModel::Tabulated { r, .. } => {
            let mut any = false;
            for (w, v) in r.iter() {
                if w.abs() >= lo && w.abs() <= hi {
                    any = true;
                    worst = worst.max(v.norm());
                }
            }
            if !any {
                return Err(invalid("no tabulated frequencies inside the transparency band"));
            }
        }
        _ => {
            let n = 2000;
            for k in 0..=n {
                let w = lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(n);
                worst = worst.max(model.eval_real(w)?.0.norm());
            }
        }
    }
    Ok(worst)
}

/// Number of poles of `r` or `s` inside a box of the upper half plane.
///
/// The count is `max(0, −W)` over the two amplitudes, `W` being the winding
/// number of the amplitude around the box boundary.
pub fn check_causality<T, M>(model: &M, rect: &Rect<T>) -> Result<usize>
where
    T: Real,
    M: AnalyticAmplitudes<T> + ?Sized,
{
    if !(rect.im_min > T::zero()) {
        return Err(invalid("causality box must lie strictly inside Im ω > 0"));
    }
    let opts = WindingOptions::default();
    model.amplitudes(rect.center())?;
    let mut poles = 0usize;
    for pick in [0usize, 1] {
        let probe = |w: Complex<T>| -> Result<Complex<T>> {
            let (r, s) = model.amplitudes(w)?;
            Ok(if pick == 0 { r } else { s })
        };
        // Identically vanishing amplitudes carry no poles.
        if is_identically_zero(&probe, rect)? {
            continue;
        }
        let w = winding_number(probe, rect, opts)?;
        poles = poles.max((-w).max(0) as usize);
    }
    Ok(poles)
}

fn is_identically_zero<T: Real, F>(f: &F, rect: &Rect<T>) -> Result<bool>
where
    F: Fn(Complex<T>) -> Result<Complex<T>>,
{
    for z in rect.corners().into_iter().chain(std::iter::once(rect.center())) {
        if f(z)?.norm() != T::zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
