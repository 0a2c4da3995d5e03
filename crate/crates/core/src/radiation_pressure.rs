//! Radiation pressure on a point scatterer in a thermal field.
//!
//! Kernels `α`, `β`, `γ` built from the scattering amplitudes, the thermal
//! field spectra, and the resulting susceptibility `χ_T`, force commutator
//! `ξ_T` and force spectrum `C_FF`.
//!
//! Susceptibilities are normalised so that `Im χ_T = ξ_T` with `ξ_T` real
//! and odd. Closed-form models are integrated by adaptive quadrature;
//! tabulated models by trapezoidal sums over their own grid, so they can
//! only be evaluated at grid frequencies.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{breakpoints, central_derivatives, exponential_cutoff, integrate_points, QuadValue, Tolerance};
use crate::real::Real;
use crate::smatrix::SMatrixModel;
use crate::spectrum::{ComplexSpectrum, FrequencyGrid};
use crate::system::ThermalState;

fn tol<T: Real>() -> Tolerance<T> {
    Tolerance::new(T::lit(1e-16), T::lit(1e-10))
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `α = 1 − s[ω]s[ω′] + r[ω]r[ω′]`, `β = s[ω]r[ω′] − r[ω]s[ω′]` and
/// `γ = |α|² + |β|²`.
pub fn alpha_beta_gamma<T: Real>(model: &SMatrixModel<T>, omega: T, omega_prime: T) -> Result<(Complex<T>, Complex<T>, T)> {
    let (ra, sa) = model.eval_real(omega)?;
    let (rb, sb) = model.eval_real(omega_prime)?;
    Ok(abg(ra, sa, rb, sb))
}

#[inline]
fn abg<T: Real>(ra: Complex<T>, sa: Complex<T>, rb: Complex<T>, sb: Complex<T>) -> (Complex<T>, Complex<T>, T) {
    let alpha = Complex::new(T::one(), T::zero()) - sa * sb + ra * rb;
    let beta = sa * rb - ra * sb;
    (alpha, beta, alpha.norm_sqr() + beta.norm_sqr())
}

/// Field commutator spectrum `ω/4`, independent of the state.
pub fn field_commutator<T: Real>(omega: T) -> T {
    omega / T::lit(4.0)
}

/// Symmetric field spectrum `σ[ω] = (ω/4) coth(ω/2T)`, with `σ[0] = T/2`.
pub fn thermal_sigma<T: Real>(state: &ThermalState<T>, omega: T) -> T {
    let t = state.temperature();
    let x = omega.abs();
    if state.is_vacuum() {
        return x / T::lit(4.0);
    }
    if x == T::zero() {
        return t / T::lit(2.0);
    }
    x / T::lit(4.0) + x / T::lit(2.0) * state.occupation(x)
}

/// Field correlation spectrum `c[ω] = ω/4 + σ[ω]`, with `c[0] = T/2`.
pub fn thermal_c<T: Real>(state: &ThermalState<T>, omega: T) -> T {
    let x = omega.abs();
    if state.is_vacuum() {
        return if omega > T::zero() { omega / T::lit(2.0) } else { T::zero() };
    }
    if x == T::zero() {
        return state.temperature() / T::lit(2.0);
    }
    let n = state.occupation(x);
    if omega > T::zero() {
        x / T::lit(2.0) * (T::one() + n)
    } else {
        x / T::lit(2.0) * n
    }
}

/// `u·n(u)`, continuous at `u = 0` where it equals `T`.
fn u_bose<T: Real>(state: &ThermalState<T>, u: T) -> T {
    if u == T::zero() {
        state.temperature()
    } else {
        u * state.occupation(u)
    }
}

/// Integral of a Bose-weighted integrand over `[0, ∞)`, truncated where it
/// has decayed by 16 orders of magnitude.
fn bose_integral<T: Real, V: QuadValue<T>, F: FnMut(T) -> V>(mut f: F, state: &ThermalState<T>, marks: &[T]) -> Result<V> {
    let t = state.temperature();
    let cut = exponential_cutoff(&mut f, T::zero(), t).max(T::lit(40.0) * t);
    let pts = breakpoints(T::zero(), cut, marks);
    Ok(integrate_points(f, &pts, tol())?.value)
}

/// Evaluation on the grid of a tabulated model.
struct GridKernel<'a, T> {
    grid: FrequencyGrid<T>,
    r: &'a ComplexSpectrum<T>,
    s: &'a ComplexSpectrum<T>,
}

impl<'a, T: Real> GridKernel<'a, T> {
    fn new(model: &'a SMatrixModel<T>) -> Option<Self> {
        match model {
            SMatrixModel::Tabulated { r, s } => Some(Self { grid: *r.grid(), r, s }),
            _ => None,
        }
    }

    fn index(&self, omega: T) -> Result<isize> {
        self.grid.index_of(omega).ok_or_else(|| {
            Error::UnsupportedContinuation(format!(
                "ω = {} is not a point of the tabulated grid",
                omega.as_f64()
            ))
        })
    }

    fn abg(&self, i: isize, j: isize) -> (Complex<T>, Complex<T>, T) {
        abg(self.r.at(i), self.s.at(i), self.r.at(j), self.s.at(j))
    }

    fn n(&self) -> isize {
        self.grid.half_count() as isize
    }

    /// Trapezoidal sum of `f(i)` for `i` from `lo` to `hi` inclusive.
    fn trapezoid<V: QuadValue<T>>(&self, lo: isize, hi: isize, mut f: impl FnMut(isize) -> V) -> V {
        if hi <= lo {
            return V::zero();
        }
        let half = T::lit(0.5);
        let mut acc = (f(lo) + f(hi)) * half;
        for i in lo + 1..hi {
            acc = acc + f(i);
        }
        acc * self.grid.delta()
    }
}

/// Vacuum susceptibility `χ_0[ω] = i∫₀^ω (dω′/2π) ω′(ω−ω′) α[ω′, ω−ω′]`.
pub fn vacuum_susceptibility<T: Real>(model: &SMatrixModel<T>, omega: T) -> Result<Complex<T>> {
    let two_pi = T::lit(2.0) * T::PI();
    if omega == T::zero() {
        return Ok(czero());
    }
    if let Some(g) = GridKernel::new(model) {
        let j = g.index(omega)?;
        let (lo, hi, sign) = if j > 0 { (0, j, T::one()) } else { (j, 0, -T::one()) };
        let sum: Complex<T> = g.trapezoid(lo, hi, |i| {
            let u = g.grid.omega(i);
            g.abg(i, j - i).0 * (u * (omega - u))
        });
        return Ok(i_unit::<T>() * sum * (sign / two_pi));
    }
    let (f, err) = fallible(|u: T| Ok(alpha_beta_gamma(model, u, omega - u)?.0 * (u * (omega - u))));
    let v: Complex<T> = integrate_points(f, &[T::zero(), omega], tol())?.value;
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    Ok(i_unit::<T>() * v / two_pi)
}

// Integration with fallible integrands: errors are collected on the side.
fn fallible<T, V, F>(mut f: F) -> (impl FnMut(T) -> V, std::rc::Rc<std::cell::RefCell<Option<Error>>>)
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> Result<V>,
{
    let slot = std::rc::Rc::new(std::cell::RefCell::new(None));
    let s2 = slot.clone();
    (
        move |u: T| match f(u) {
            Ok(v) => v,
            Err(e) => {
                s2.borrow_mut().get_or_insert(e);
                V::zero()
            }
        },
        slot,
    )
}

/// Vacuum force commutator `ξ_0[ω] = ∫₀^ω (dω′/4π) ω′(ω−ω′) γ[ω′, ω−ω′]`.
pub fn vacuum_force_commutator<T: Real>(model: &SMatrixModel<T>, omega: T) -> Result<T> {
    let four_pi = T::lit(4.0) * T::PI();
    if omega == T::zero() {
        return Ok(T::zero());
    }
    if let Some(g) = GridKernel::new(model) {
        let j = g.index(omega)?;
        let (lo, hi, sign) = if j > 0 { (0, j, T::one()) } else { (j, 0, -T::one()) };
        let sum: T = g.trapezoid(lo, hi, |i| {
            let u = g.grid.omega(i);
            g.abg(i, j - i).2 * (u * (omega - u))
        });
        return Ok(sum * sign / four_pi);
    }
    let (f, err) = fallible(|u: T| Ok(alpha_beta_gamma(model, u, omega - u)?.2 * (u * (omega - u))));
    let v = integrate_points(f, &[T::zero(), omega], tol())?.value;
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    Ok(v / four_pi)
}

/// Thermal susceptibility: `χ_0` plus
/// `2i∫₀^∞ (dω′/2π) ω′n(ω′){(ω+ω′)α[−ω′,ω+ω′] + (ω−ω′)α[ω′,ω−ω′]}`.
pub fn thermal_susceptibility<T: Real>(model: &SMatrixModel<T>, state: &ThermalState<T>, omega: T) -> Result<Complex<T>> {
    let vacuum = vacuum_susceptibility(model, omega)?;
    if state.is_vacuum() {
        return Ok(vacuum);
    }
    let two_pi = T::lit(2.0) * T::PI();
    let thermal: Complex<T> = if let Some(g) = GridKernel::new(model) {
        let j = g.index(omega)?;
        let top = g.n() - j.abs();
        g.trapezoid(0, top, |i| {
            let u = g.grid.omega(i);
            let a_plus = g.abg(-i, j + i).0;
            let a_minus = g.abg(i, j - i).0;
            (a_plus * (omega + u) + a_minus * (omega - u)) * u_bose(state, u)
        })
    } else {
        let (f, err) = fallible(|u: T| {
            let a_plus = alpha_beta_gamma(model, -u, omega + u)?.0;
            let a_minus = alpha_beta_gamma(model, u, omega - u)?.0;
            Ok((a_plus * (omega + u) + a_minus * (omega - u)) * u_bose(state, u))
        });
        let v = bose_integral(f, state, &[omega.abs()])?;
        if let Some(e) = err.borrow_mut().take() {
            return Err(e);
        }
        v
    };
    Ok(vacuum + i_unit::<T>() * thermal * (T::lit(2.0) / two_pi))
}

/// Force commutator `ξ_T`: `ξ_0` plus
/// `∫₀^∞ (dω′/2π) ω′n(ω′){(ω−ω′)γ[ω′,ω−ω′] + (ω+ω′)γ[−ω′,ω+ω′]}`.
pub fn force_commutator<T: Real>(model: &SMatrixModel<T>, state: &ThermalState<T>, omega: T) -> Result<T> {
    let vacuum = vacuum_force_commutator(model, omega)?;
    if state.is_vacuum() {
        return Ok(vacuum);
    }
    let two_pi = T::lit(2.0) * T::PI();
    let thermal: T = if let Some(g) = GridKernel::new(model) {
        let j = g.index(omega)?;
        let top = g.n() - j.abs();
        g.trapezoid(0, top, |i| {
            let u = g.grid.omega(i);
            let g_plus = g.abg(-i, j + i).2;
            let g_minus = g.abg(i, j - i).2;
            (g_plus * (omega + u) + g_minus * (omega - u)) * u_bose(state, u)
        })
    } else {
        let (f, err) = fallible(|u: T| {
            let g_plus = alpha_beta_gamma(model, -u, omega + u)?.2;
            let g_minus = alpha_beta_gamma(model, u, omega - u)?.2;
            Ok((g_plus * (omega + u) + g_minus * (omega - u)) * u_bose(state, u))
        });
        let v = bose_integral(f, state, &[omega.abs()])?;
        if let Some(e) = err.borrow_mut().take() {
            return Err(e);
        }
        v
    };
    Ok(vacuum + thermal / two_pi)
}

/// Force commutator from the convolution
/// `∫(dω′/2π) [(ω−ω′)σ[ω′] + ω′σ[ω−ω′]] γ[ω′, ω−ω′]` over `|ω′| ≤ band`.
///
/// The bracket is the symmetrised form of `2(ω−ω′)σ[ω′]`; it decays
/// exponentially outside `[0, ω]`, so the band only needs to exceed `ω`
/// and a few tens of `T`.
pub fn force_commutator_convolution<T: Real>(
    model: &SMatrixModel<T>,
    state: &ThermalState<T>,
    omega: T,
    band: T,
) -> Result<T> {
    if !(band > omega.abs()) {
        return Err(Error::InvalidArgument("convolution band must exceed |ω|".into()));
    }
    let two_pi = T::lit(2.0) * T::PI();
    let kernel = |u: T| -> Result<T> {
        let weight = (omega - u) * thermal_sigma(state, u) + u * thermal_sigma(state, omega - u);
        Ok(weight * alpha_beta_gamma(model, u, omega - u)?.2)
    };
    if let Some(g) = GridKernel::new(model) {
        let j = g.index(omega)?;
        let lim = g.index(band.min(g.grid.max_omega())).unwrap_or(g.n());
        let lo = (-lim).max(j - g.n());
        let hi = lim.min(j + g.n());
        let v: T = g.trapezoid(lo, hi, |i| {
            let u = g.grid.omega(i);
            let weight = (omega - u) * thermal_sigma(state, u) + u * thermal_sigma(state, omega - u);
            weight * g.abg(i, j - i).2
        });
        return Ok(v / two_pi);
    }
    let t = state.temperature();
    let mut marks = vec![T::zero(), omega];
    for m in [1.0, 5.0, 20.0, 50.0] {
        marks.push(T::lit(m) * t);
        marks.push(-T::lit(m) * t);
        marks.push(omega + T::lit(m) * t);
        marks.push(omega - T::lit(m) * t);
    }
    let pts = breakpoints(-band, band, &marks);
    let (f, err) = fallible(kernel);
    let v = integrate_points(f, &pts, tol())?.value;
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    Ok(v / two_pi)
}

/// Force spectrum `C_FF[ω] = ∫(dω′/2π) 4c[ω′]c[ω−ω′]γ[ω′, ω−ω′]`.
pub fn force_spectrum<T: Real>(model: &SMatrixModel<T>, state: &ThermalState<T>, omega: T) -> Result<T> {
    let two_pi = T::lit(2.0) * T::PI();
    let four = T::lit(4.0);
    if let Some(g) = GridKernel::new(model) {
        let j = g.index(omega)?;
        let (lo, hi) = if state.is_vacuum() {
            if j <= 0 {
                return Ok(T::zero());
            }
            (0, j)
        } else {
            ((-g.n()).max(j - g.n()), g.n().min(j + g.n()))
        };
        let v: T = g.trapezoid(lo, hi, |i| {
            let u = g.grid.omega(i);
            four * thermal_c(state, u) * thermal_c(state, omega - u) * g.abg(i, j - i).2
        });
        return Ok(v / two_pi);
    }
    if state.is_vacuum() {
        // Only 0 < ω′ < ω contributes: C_FF = 2θ(ω)ξ_0.
        if omega <= T::zero() {
            return Ok(T::zero());
        }
        return Ok(T::lit(2.0) * vacuum_force_commutator(model, omega)?);
    }
    let (f, err) = fallible(|u: T| {
        let w = four * thermal_c(state, u) * thermal_c(state, omega - u);
        if w == T::zero() {
            return Ok(T::zero());
        }
        Ok(w * alpha_beta_gamma(model, u, omega - u)?.2)
    });
    let mut f = f;
    let lo = omega.min(T::zero());
    let hi = omega.max(T::zero());
    let t = state.temperature();
    let upper = exponential_cutoff(&mut f, hi, t).max(hi + T::lit(40.0) * t);
    let lower = -exponential_cutoff(|u: T| f(-u), -lo, t).max(-lo + T::lit(40.0) * t);
    let mut marks = vec![lo, hi];
    for m in [1.0, 5.0, 20.0] {
        marks.push(hi + T::lit(m) * t);
        marks.push(lo - T::lit(m) * t);
    }
    let pts = breakpoints(lower, upper, &marks);
    let v = integrate_points(f, &pts, tol())?.value;
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    Ok(v / two_pi)
}

/// Low-frequency expansion `χ_T[ω] = iξ′ω + μ_c ω² + …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasistaticCoefficients<T> {
    /// `ξ_T′[0] = Im χ_T′[0]` (the derivative itself is purely imaginary).
    pub friction: T,
    /// `χ_T″[0]/2`, the thermal correction to the quasistatic mass.
    pub half_curvature: T,
}

/// Friction and half-curvature of `χ_T` at zero frequency.
///
/// Closed-form models use exact derivatives of the amplitudes under a Bose
/// integral; tabulated models use Richardson-extrapolated differences on
/// the grid.
pub fn quasistatic_coefficients<T: Real>(model: &SMatrixModel<T>, state: &ThermalState<T>) -> Result<QuasistaticCoefficients<T>> {
    if state.is_vacuum() {
        return Ok(QuasistaticCoefficients {
            friction: T::zero(),
            half_curvature: T::zero(),
        });
    }
    if let Some(g) = GridKernel::new(model) {
        if g.n() < 2 {
            return Err(Error::InvalidArgument("grid too small for finite differences".into()));
        }
        let mut failure = None;
        let (d1, half) = central_derivatives(
            |w: T| match thermal_susceptibility(model, state, w) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    czero()
                }
            },
            T::zero(),
            T::lit(2.0) * g.grid.delta(),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        return Ok(QuasistaticCoefficients {
            friction: d1.im,
            half_curvature: half.re,
        });
    }
    let pi = T::PI();
    let two = T::lit(2.0);
    let (f1, e1) = fallible(|u: T| -> Result<Complex<T>> {
        let (rp, sp) = model.jets(u)?;
        let (rm, sm) = model.jets(-u)?;
        let a_pm = abg(rp.value, sp.value, rm.value, sm.value).0;
        let a_mp = abg(rm.value, sm.value, rp.value, sp.value).0;
        // ∂₂α[a, b] = −s[a]s′[b] + r[a]r′[b]
        let d_mp = -sm.value * sp.d1 + rm.value * rp.d1;
        let d_pm = -sp.value * sm.d1 + rp.value * rm.d1;
        Ok((a_pm + a_mp + (d_mp - d_pm) * u) * u_bose(state, u))
    });
    let (f2, e2) = fallible(|u: T| -> Result<Complex<T>> {
        let (rp, sp) = model.jets(u)?;
        let (rm, sm) = model.jets(-u)?;
        let d_pm = -sp.value * sm.d1 + rp.value * rm.d1;
        let dd_pm = -sp.value * sm.d2 + rp.value * rm.d2;
        let d_mp = -sm.value * sp.d1 + rm.value * rp.d1;
        let dd_mp = -sm.value * sp.d2 + rm.value * rp.d2;
        Ok((d_pm * two - dd_pm * u + d_mp * two + dd_mp * u) * u_bose(state, u))
    });
    let i1: Complex<T> = bose_integral(f1, state, &[])?;
    let i2: Complex<T> = bose_integral(f2, state, &[])?;
    for slot in [e1, e2] {
        if let Some(e) = slot.borrow_mut().take() {
            return Err(e);
        }
    }
    // χ′[0] = 2i·I₁/2π and χ″[0]/2 = i·I₂/2π
    let chi1 = i_unit::<T>() * i1 / pi;
    let half = i_unit::<T>() * i2 / (two * pi);
    Ok(QuasistaticCoefficients {
        friction: chi1.im,
        half_curvature: half.re,
    })
}

/// Leading low-temperature correction `(iπT²/3) ω α[0, ω]` to `χ_T − χ_0`.
pub fn small_t_correction<T: Real>(model: &SMatrixModel<T>, state: &ThermalState<T>, omega: T) -> Result<Complex<T>> {
    let t = state.temperature();
    if state.is_vacuum() {
        return Ok(czero());
    }
    let alpha = alpha_beta_gamma(model, T::zero(), omega)?.0;
    Ok(i_unit::<T>() * alpha * (T::PI() * t * t / T::lit(3.0) * omega))
}

/// Momentum diffusion coefficient `D = T ξ_T′[0]`.
pub fn momentum_diffusion<T: Real>(model: &SMatrixModel<T>, state: &ThermalState<T>) -> Result<T> {
    if state.is_vacuum() {
        return Ok(T::zero());
    }
    Ok(state.temperature() * quasistatic_coefficients(model, state)?.friction)
}

/// Perfect-reflector closed form `ξ_T[ω] = ω³/6π + 2πT²ω/3`.
pub fn perfect_reflector_commutator<T: Real>(state: &ThermalState<T>, omega: T) -> T {
    let t = state.temperature();
    omega.powi(3) / (T::lit(6.0) * T::PI()) + T::lit(2.0) * T::PI() * t * t * omega / T::lit(3.0)
}

/// Perfect-reflector closed form `D = 2πT³/3`.
pub fn perfect_reflector_diffusion<T: Real>(state: &ThermalState<T>) -> T {
    T::lit(2.0) * T::PI() * state.temperature().powi(3) / T::lit(3.0)
}

/// `χ_T`, `ξ_T` and `C_FF` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSpectra<T> {
    pub susceptibility: ComplexSpectrum<T>,
    pub commutator: ComplexSpectrum<T>,
    pub force_spectrum: ComplexSpectrum<T>,
}

/// Samples the response functions on every point of `grid`, using the
/// symmetries `χ[−ω] = χ*[ω]` and `ξ[−ω] = −ξ[ω]` for the negative half.
pub fn response_spectra<T: Real>(model: &SMatrixModel<T>, state: &ThermalState<T>, grid: FrequencyGrid<T>) -> Result<ResponseSpectra<T>> {
    use rayon::prelude::*;
    let n = grid.half_count() as isize;
    let pos: Vec<(Complex<T>, T, T, T)> = (0..=n)
        .into_par_iter()
        .map(|j| {
            let w = grid.omega(j);
            let chi = thermal_susceptibility(model, state, w)?;
            let xi = force_commutator(model, state, w)?;
            let cp = force_spectrum(model, state, w)?;
            let cm = force_spectrum(model, state, -w)?;
            Ok((chi, xi, cp, cm))
        })
        .collect::<Result<_>>()?;
    let len = grid.len();
    let mut chi = vec![czero(); len];
    let mut xi = vec![czero(); len];
    let mut cff = vec![czero(); len];
    for (j, (c, x, cp, cm)) in pos.into_iter().enumerate() {
        let j = j as isize;
        chi[grid.position(j)] = c;
        chi[grid.position(-j)] = c.conj();
        xi[grid.position(j)] = Complex::new(x, T::zero());
        xi[grid.position(-j)] = Complex::new(-x, T::zero());
        cff[grid.position(j)] = Complex::new(cp, T::zero());
        cff[grid.position(-j)] = Complex::new(cm, T::zero());
    }
    Ok(ResponseSpectra {
        susceptibility: ComplexSpectrum::from_values(grid, chi)?,
        commutator: ComplexSpectrum::from_values(grid, xi)?,
        force_spectrum: ComplexSpectrum::from_values(grid, cff)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(cutoff: f64) -> SMatrixModel<f64> {
        SMatrixModel::resonance(cutoff).unwrap()
    }

    fn temp(t: f64) -> ThermalState<f64> {
        ThermalState::new(t).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let (a, b, g) = alpha_beta_gamma(&SMatrixModel::PerfectReflector, 0.3, -1.1).unwrap();
        assert_eq!((a, b, g), (Complex::new(2.0, 0.0), Complex::new(0.0, 0.0), 4.0));
        let m = res(1.5);
        for &w in &[0.0, 0.4, 2.0, -3.0] {
            let (a, b, g) = alpha_beta_gamma(&m, w, -w).unwrap();
            let d = w * w + 2.25;
            assert!((a - Complex::new(2.0 * 2.25 / d, 0.0)).norm() < 1e-14);
            assert!((b - Complex::new(0.0, 2.0 * 1.5 * w / d)).norm() < 1e-14);
            assert!((g - 4.0 * 2.25 / d).abs() < 1e-14);
        }
        for &(x, y) in &[(0.3, 1.7), (-2.0, 0.5), (4.0, -4.0)] {
            let (a, _, g) = alpha_beta_gamma(&m, x, y).unwrap();
            assert!((g - 2.0 * a.re).abs() < 1e-12);
            let g2 = alpha_beta_gamma(&m, y, x).unwrap().2;
            let g3 = alpha_beta_gamma(&m, -x, -y).unwrap().2;
            assert_eq!(g, g2);
            assert!((g - g3).abs() <= 1e-15 * g);
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(thermal_sigma(&temp(0.0), 2.0), 0.5);
        assert!((thermal_sigma(&temp(1.0), 2.0) - 0.5 / 1f64.tanh()).abs() < 1e-15);
        assert_eq!(thermal_sigma(&temp(1.0), 0.0), 0.5);
        let s = temp(0.7);
        for &w in &[0.1, 1.0, 3.0] {
            assert_eq!(thermal_sigma(&s, w), thermal_sigma(&s, -w));
            assert!(thermal_sigma(&s, w) >= w / 4.0);
            let ratio = thermal_c(&s, w) / thermal_c(&s, -w);
            assert!((ratio - (w / 0.7).exp()).abs() < 1e-12 * ratio);
        }
    }

    #[test]
    fn perfect_reflector_closed_forms() {
        let p = SMatrixModel::PerfectReflector;
        let s = temp(0.8);
        for &w in &[0.2, 1.0, 3.0] {
            let exact = perfect_reflector_commutator(&s, w);
            let chi = thermal_susceptibility(&p, &s, w).unwrap();
            assert!(chi.re.abs() < 1e-14);
            assert!((chi.im - exact).abs() < 1e-9 * exact);
            assert!((force_commutator(&p, &s, w).unwrap() - exact).abs() < 1e-9 * exact);
        }
        let q = quasistatic_coefficients(&p, &s).unwrap();
        assert!((q.friction - 2.0 * std::f64::consts::PI * 0.64 / 3.0).abs() < 1e-10);
        assert_eq!(q.half_curvature, 0.0);
        let d = momentum_diffusion(&p, &temp(1.0)).unwrap();
        assert!((d - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn reference_values_at_t_02() {
        let m = res(1.0);
        let s = temp(0.2);
        let chi = thermal_susceptibility(&m, &s, 0.5).unwrap();
        assert!((chi - Complex::new(-0.00695536384236, 0.03853242552803)).norm() < 1e-11);
        let chi = thermal_susceptibility(&m, &s, 2.0).unwrap();
        assert!((chi - Complex::new(-0.21649414810538, 0.31999749367506)).norm() < 1e-10);
        let q = quasistatic_coefficients(&m, &s).unwrap();
        assert!((q.friction - 0.0689301632921268).abs() < 1e-12, "{q:?}");
        assert!((q.half_curvature + 0.0250222190086182).abs() < 1e-12);
    }

    #[test]
    fn vacuum_identities() {
        let m = res(1.0);
        let v = temp(0.0);
        for &w in &[-2.0, 0.3, 1.0, 4.0] {
            let chi = thermal_susceptibility(&m, &v, w).unwrap();
            let xi = force_commutator(&m, &v, w).unwrap();
            assert!((chi.im - xi).abs() < 1e-10 * xi.abs());
            let c = force_spectrum(&m, &v, w).unwrap();
            if w < 0.0 {
                assert_eq!(c, 0.0);
            } else {
                assert!((c - 2.0 * xi).abs() < 1e-12 * c);
            }
        }
        let q = quasistatic_coefficients(&m, &v).unwrap();
        assert_eq!((q.friction, q.half_curvature), (0.0, 0.0));
    }

    #[test]
    fn detailed_balance_thermal() {
        let m = res(1.0);
        let s = temp(0.5);
        for &w in &[0.1, 0.8, 2.5] {
            let cp = force_spectrum(&m, &s, w).unwrap();
            let cm = force_spectrum(&m, &s, -w).unwrap();
            let xi = force_commutator(&m, &s, w).unwrap();
            assert!((cp - cm - 2.0 * xi).abs() < 1e-8 * xi);
            assert!(((1.0 - (-w / 0.5f64).exp()) * cp - 2.0 * xi).abs() < 1e-8 * xi);
        }
    }

    #[test]
    fn convolution_route_matches_decomposition() {
        let m = res(1.0);
        let s = temp(0.3);
        for &w in &[0.2, 1.3] {
            let a = force_commutator(&m, &s, w).unwrap();
            let b = force_commutator_convolution(&m, &s, w, 60.0).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn small_temperature_expansion_converges() {
        let m = res(1.0);
        let w = 0.3;
        let chi0 = vacuum_susceptibility(&m, w).unwrap();
        let err = |t: f64| {
            let s = temp(t);
            (thermal_susceptibility(&m, &s, w).unwrap() - chi0 - small_t_correction(&m, &s, w).unwrap()).norm()
        };
        let (e1, e2) = (err(0.05), err(0.025));
        assert!(e2 < e1 / 4.0, "{e1} {e2}");
        assert_eq!(small_t_correction(&m, &temp(0.0), w).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn tabulated_matches_closed_form() {
        let m = res(1.0);
        let grid = FrequencyGrid::new(0.01, 3000).unwrap();
        let r = ComplexSpectrum::from_fn(grid, |w| m.eval_real(w).unwrap().0);
        let sm = ComplexSpectrum::from_fn(grid, |w| m.eval_real(w).unwrap().1);
        let t = SMatrixModel::tabulated(r, sm).unwrap();
        let s = temp(0.2);
        for &w in &[0.5, 2.0, -1.0] {
            let a = thermal_susceptibility(&t, &s, w).unwrap();
            let b = thermal_susceptibility(&m, &s, w).unwrap();
            assert!((a - b).norm() < 1e-4 * b.norm(), "{a} vs {b}");
            let a = force_spectrum(&t, &s, w).unwrap();
            let b = force_spectrum(&m, &s, w).unwrap();
            assert!((a - b).abs() < 1e-4 * b, "{a} vs {b}");
        }
        let qa = quasistatic_coefficients(&t, &s).unwrap();
        let qb = quasistatic_coefficients(&m, &s).unwrap();
        assert!((qa.friction - qb.friction).abs() < 1e-3 * qb.friction);
        assert!(thermal_susceptibility(&t, &s, 0.005).is_err());
    }
}
