//! Linearly coupled particles: the regulated point charge, the generic
//! one-dimensional coupling table and the renormalised radiation reaction
//! limit.

use std::io::Read;

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{
    breakpoints, central_derivatives, integrate_points, integrate_to_infinity, principal_value_resonant, Tolerance,
};
use crate::real::Real;
use crate::spectrum::{ComplexSpectrum, FrequencyGrid};
use crate::system::{Coupling, MechanicalSystem};

/// Form factor `Ω[k]` sampled on a `k` grid.
///
/// Linear interpolation between samples; beyond the last sample the form
/// factor continues as the power law fitted over the last decade.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedRegulator<T> {
    k: Vec<T>,
    values: Vec<T>,
    tail_exponent: T,
}

impl<T: Real> TabulatedRegulator<T> {
    pub fn new(k: Vec<T>, values: Vec<T>) -> Result<Self> {
        if k.len() != values.len() || k.len() < 2 {
            return Err(invalid("regulator needs at least two (k, value) samples"));
        }
        if !(k[0] >= T::zero()) || k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("regulator k grid must start at k >= 0 and increase strictly"));
        }
        if values.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(invalid("regulator values must lie in [0, 1]"));
        }
        let tail_exponent = fit_tail_exponent(&k, &values);
        Ok(Self {
            k,
            values,
            tail_exponent,
        })
    }

    /// Reads a `k,value` CSV table.
    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "k" || &headers[1] != "value" {
            return Err(Error::Parse("regulator table must have columns `k,value`".into()));
        }
        let mut k = Vec::new();
        let mut values = Vec::new();
        for row in reader.records() {
            let row = row?;
            let parse = |s: &str| -> Result<T> {
                let x: f64 = s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
                Ok(T::lit(x))
            };
            k.push(parse(&row[0])?);
            values.push(parse(&row[1])?);
        }
        Self::new(k, values)
    }

    pub fn knots(&self) -> &[T] {
        &self.k
    }

    pub fn tail_exponent(&self) -> T {
        self.tail_exponent
    }

    pub fn eval(&self, k: T) -> T {
        let k = k.abs();
        let n = self.k.len();
        if k <= self.k[0] {
            return self.values[0];
        }
        if k >= self.k[n - 1] {
            let last = self.values[n - 1];
            if last == T::zero() {
                return T::zero();
            }
            return last * (k / self.k[n - 1]).powf(-self.tail_exponent);
        }
        let i = self.k.partition_point(|x| *x <= k);
        let (k0, k1) = (self.k[i - 1], self.k[i]);
        let t = (k - k0) / (k1 - k0);
        self.values[i - 1] + (self.values[i] - self.values[i - 1]) * t
    }
}

fn fit_tail_exponent<T: Real>(k: &[T], v: &[T]) -> T {
    let k_max = k[k.len() - 1];
    let pts: Vec<(T, T)> = k
        .iter()
        .zip(v)
        .filter(|(k, v)| **k >= k_max * T::lit(0.1) && **k > T::zero() && **v > T::zero())
        .map(|(k, v)| (k.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return T::infinity();
    }
    let n = T::from_usize_lossy(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    if sxx == T::zero() {
        return T::infinity();
    }
    -(sxy / sxx)
}

/// Form factor of the charge distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Regulator<T> {
    /// `Ω[k] = (Ω²/(Ω² + k²))²`.
    ModelFormFactor { cutoff: T },
    Tabulated(TabulatedRegulator<T>),
}

impl<T: Real> Regulator<T> {
    pub fn model(cutoff: T) -> Result<Self> {
        if !(cutoff > T::zero() && cutoff.is_finite()) {
            return Err(invalid("regulator cutoff must be positive and finite"));
        }
        Ok(Self::ModelFormFactor { cutoff })
    }

    pub fn eval(&self, k: T) -> T {
        match self {
            Self::ModelFormFactor { cutoff } => {
                let c2 = *cutoff * *cutoff;
                let x = c2 / (c2 + k * k);
                x * x
            }
            Self::Tabulated(t) => t.eval(k),
        }
    }

    fn knots(&self) -> &[T] {
        match self {
            Self::ModelFormFactor { .. } => &[],
            Self::Tabulated(t) => t.knots(),
        }
    }

    /// Frequency scale used for quadrature panels and difference steps.
    pub fn scale(&self) -> T {
        match self {
            Self::ModelFormFactor { cutoff } => *cutoff,
            Self::Tabulated(t) => {
                // Width of the form factor from its half-height point.
                let knots = t.knots();
                knots
                    .iter()
                    .zip(&t.values)
                    .find(|(_, v)| **v <= T::lit(0.5))
                    .map(|(k, _)| *k)
                    .unwrap_or(knots[knots.len() - 1])
                    .max(T::epsilon())
            }
        }
    }
}

/// Point charge `e²` with a form factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCoupling<T> {
    charge_squared: T,
    regulator: Regulator<T>,
}

impl<T: Real> LinearCoupling<T> {
    pub fn new(charge_squared: T, regulator: Regulator<T>) -> Result<Self> {
        if !(charge_squared > T::zero() && charge_squared.is_finite()) {
            return Err(invalid("charge squared must be positive"));
        }
        Ok(Self {
            charge_squared,
            regulator,
        })
    }

    pub fn charge_squared(&self) -> T {
        self.charge_squared
    }

    pub fn regulator(&self) -> &Regulator<T> {
        &self.regulator
    }

    /// `ξ_FF[k]/k`, the weight of the one-subtraction dispersion integral.
    fn spectral_weight(&self, k: T) -> T {
        T::lit(2.0 / 3.0) * self.charge_squared * k * k * self.regulator.eval(k)
    }
}

/// Force commutator `ξ_FF[ω] = (2/3) e² ω³ Ω[ω]`.
pub fn charge_force_commutator<T: Real>(c: &LinearCoupling<T>, omega: T) -> T {
    T::lit(2.0 / 3.0) * c.charge_squared * omega * omega * omega * c.regulator.eval(omega)
}

/// Motional susceptibility of the point charge at `Im ω ≥ 0`.
pub fn charge_susceptibility<T: Real>(c: &LinearCoupling<T>, omega: Complex<T>) -> Result<Complex<T>> {
    if omega.im < T::zero() {
        return Err(Error::Domain("the susceptibility is retarded: Im ω must be >= 0".into()));
    }
    let e2 = c.charge_squared;
    match &c.regulator {
        Regulator::ModelFormFactor { cutoff } => {
            let den = omega + Complex::new(T::zero(), *cutoff);
            Ok(-(omega * omega) * (e2 * cutoff.powi(3) / T::lit(3.0)) / (den * den))
        }
        Regulator::Tabulated(_) => tabulated_susceptibility(c, omega),
    }
}

fn tabulated_susceptibility<T: Real>(c: &LinearCoupling<T>, omega: Complex<T>) -> Result<Complex<T>> {
    let knots = c.regulator.knots();
    let tol = Tolerance::standard().with_max_intervals(4 * knots.len() + 4000);
    let scale = c.regulator.scale();
    let pref = T::lit(2.0) / T::PI();
    if omega.im == T::zero() {
        let w = omega.re;
        if w == T::zero() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let pv = principal_value_resonant(|k| c.spectral_weight(k), w.abs(), None, knots, tol)?;
        return Ok(Complex::new(pref * w * w * pv, charge_force_commutator(c, w)));
    }
    let w2 = omega * omega;
    let f = |k: T| Complex::new(c.spectral_weight(k), T::zero()) / (Complex::new(k * k, T::zero()) - w2);
    let far = knots.last().copied().unwrap_or(T::zero()).max(omega.norm() * T::lit(4.0));
    let pts = breakpoints(T::zero(), far, &[knots, &[omega.re.abs()]].concat());
    let head = integrate_points(f, &pts, tol)?.value;
    let tail = integrate_to_infinity(f, far, far.max(scale), tol)?.value;
    Ok(w2 * (head + tail) * pref)
}

/// Induced mass `μ = 2∫₀^∞ dk ξ_FF[k]/(π k³) = (4e²/3π)∫₀^∞ Ω[k] dk`.
///
/// A form factor that does not decay fast enough makes the tail panels
/// stall, which is reported as a divergence.
pub fn induced_mass_charge<T: Real>(c: &LinearCoupling<T>) -> Result<T> {
    let reg = &c.regulator;
    let knots = reg.knots();
    let tol = Tolerance::new(T::lit(1e-15), T::lit(1e-12)).with_max_intervals(4 * knots.len() + 4000);
    let far = knots.last().copied().unwrap_or(T::zero());
    let head = if far > T::zero() {
        integrate_points(|k| reg.eval(k), &breakpoints(T::zero(), far, knots), tol)?.value
    } else {
        T::zero()
    };
    let tail = integrate_to_infinity(|k| reg.eval(k), far, reg.scale(), tol)?.value;
    Ok(T::lit(4.0 / 3.0) * c.charge_squared / T::PI() * (head + tail))
}

/// `χ″[0]/2` by Richardson-extrapolated central differences of the
/// susceptibility on the real axis; the default step is `10⁻³` times the
/// regulator scale.
pub fn half_curvature_at_zero<T: Real>(c: &LinearCoupling<T>, step: Option<T>) -> Result<T> {
    let h = step.unwrap_or(T::lit(1e-3) * c.regulator.scale());
    let mut failure = None;
    let (_, half) = central_derivatives(
        |w: T| match charge_susceptibility(c, Complex::new(w, T::zero())) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                Complex::new(T::zero(), T::zero())
            }
        },
        T::zero(),
        h,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(half.re),
    }
}

/// Coupling `e[ω,k] = ω² a[k] − iω b[k] + d[k]` of a particle to a 1D
/// field, with `a`, `b`, `d` sampled on a symmetric `k` grid.
///
/// The coupling vanishes outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable<T> {
    a: ComplexSpectrum<T>,
    b: ComplexSpectrum<T>,
    d: ComplexSpectrum<T>,
}

impl<T: Real> CouplingTable<T> {
    /// Checks the reality condition `e[ω,k]* = e[−ω,−k]`, i.e. hermitian
    /// symmetry of each of `a`, `b`, `d` in `k`.
    pub fn new(a: ComplexSpectrum<T>, b: ComplexSpectrum<T>, d: ComplexSpectrum<T>) -> Result<Self> {
        if a.grid() != b.grid() || a.grid() != d.grid() {
            return Err(invalid("coupling components must share one k grid"));
        }
        for (name, s) in [("a", &a), ("b", &b), ("d", &d)] {
            let tol = T::lit(1e-12) * s.max_magnitude().max(T::min_positive_value());
            if s.hermitian_residual() > tol {
                return Err(invalid(format!(
                    "coupling component {name} violates e[ω,k]* = e[−ω,−k]"
                )));
            }
        }
        Ok(Self { a, b, d })
    }

    pub fn zero(grid: FrequencyGrid<T>) -> Self {
        let z = ComplexSpectrum::from_fn(grid, |_| Complex::new(T::zero(), T::zero()));
        Self {
            a: z.clone(),
            b: z.clone(),
            d: z,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        self.a.grid()
    }

    pub fn eval(&self, omega: T, k: T) -> Complex<T> {
        let i = Complex::new(T::zero(), T::one());
        self.a.interpolate(k) * (omega * omega) - i * self.b.interpolate(k) * omega + self.d.interpolate(k)
    }

    /// `e[ω,k] e[−ω,−k]`, real for real `ω`.
    fn product(&self, omega: T, k: T) -> T {
        (self.eval(omega, k) * self.eval(-omega, -k)).re
    }

    /// `ξ_FF[ω] = (e[ω,ω]e[−ω,−ω] + e[ω,−ω]e[−ω,ω]) / 4ω`.
    pub fn force_commutator(&self, omega: T) -> T {
        if omega == T::zero() {
            return T::zero();
        }
        (self.product(omega, omega) + self.product(omega, -omega)) / (T::lit(4.0) * omega)
    }
}

/// `χ[ω] = −∫dk/2π e[ω,k]e[−ω,−k]/((ω+iε)² − k²)` on the real axis: the
/// real part as a principal value, the imaginary part from the residues.
pub fn generic_linear_susceptibility<T: Real>(table: &CouplingTable<T>, omega: T) -> Result<Complex<T>> {
    let k_max = table.grid().max_omega();
    let knots: Vec<T> = table.grid().points().filter(|k| *k >= T::zero()).collect();
    let tol = Tolerance::standard().with_max_intervals(4 * knots.len() + 4000);
    let g = |k: T| table.product(omega, k) + table.product(omega, -k);
    let two_pi = T::lit(2.0) * T::PI();
    if omega == T::zero() {
        let g0 = g(T::zero());
        if g0.abs() > T::epsilon() * g(table.grid().delta()).abs().max(T::min_positive_value()) {
            return Err(Error::Divergence("static coupling d[0] != 0 gives an infrared divergence".into()));
        }
        let pts = breakpoints(T::zero(), k_max, &knots);
        let v = integrate_points(|k: T| if k == T::zero() { T::zero() } else { g(k) / (k * k) }, &pts, tol)?.value;
        return Ok(Complex::new(v / two_pi, T::zero()));
    }
    let pv = principal_value_resonant(g, omega.abs(), Some(k_max), &knots, tol)?;
    Ok(Complex::new(pv / two_pi, table.force_commutator(omega)))
}

/// Renormalised radiation-reaction system `Mq̈ − (2/3)e² q⃛ = −Kq + F`.
///
/// A negative spring constant is accepted and reported as unbound.
pub fn abraham_lorentz_system<T: Real>(mass: T, charge_squared: T, spring: T) -> Result<MechanicalSystem<T>> {
    if !(charge_squared > T::zero()) {
        return Err(invalid("charge squared must be positive"));
    }
    MechanicalSystem::with_any_spring(mass, spring, Coupling::RadiationReaction { charge_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Binding;

    fn model(e2: f64, cutoff: f64) -> LinearCoupling<f64> {
        LinearCoupling::new(e2, Regulator::model(cutoff).unwrap()).unwrap()
    }

    fn cr(w: f64) -> Complex<f64> {
        Complex::new(w, 0.0)
    }

    #[test]
    fn closed_form_anchors() {
        let c = model(1.0, 1.0);
        assert_eq!(charge_susceptibility(&c, cr(0.0)).unwrap(), Complex::new(0.0, 0.0));
        let far = charge_susceptibility(&c, cr(1e6)).unwrap();
        assert!((far.re + 1.0 / 3.0).abs() < 1e-5);
        assert!(charge_susceptibility(&c, Complex::new(1.0, -0.1)).is_err());
        assert!((charge_force_commutator(&c, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(charge_force_commutator(&c, 0.0), 0.0);
        assert_eq!(charge_force_commutator(&c, -0.7), -charge_force_commutator(&c, 0.7));
    }

    #[test]
    fn fdt_and_parity() {
        let c = model(1.7, 0.8);
        for &w in &[0.01, 0.3, 1.0, 2.5, 40.0] {
            let chi = charge_susceptibility(&c, cr(w)).unwrap();
            let xi = charge_force_commutator(&c, w);
            assert!((chi.im - xi).abs() <= 1e-12 * xi.abs());
            let m = charge_susceptibility(&c, cr(-w)).unwrap();
            assert!((m - chi.conj()).norm() <= 1e-14 * chi.norm());
        }
    }

    #[test]
    fn induced_mass_model() {
        let mu = induced_mass_charge(&model(1.0, 1.0)).unwrap();
        assert!((mu - 1.0 / 3.0).abs() <= 1e-8 / 3.0);
        let mu = induced_mass_charge(&model(3.0, 2.0)).unwrap();
        assert!((mu - 2.0).abs() <= 2e-8);
        let h = half_curvature_at_zero(&model(1.0, 1.0), None).unwrap();
        assert!((h - 1.0 / 3.0).abs() <= 1e-6 / 3.0);
    }

    fn sampled_model(cutoff: f64, k_max: f64, n: usize) -> TabulatedRegulator<f64> {
        let reg = Regulator::model(cutoff).unwrap();
        let k: Vec<f64> = (0..=n).map(|i| k_max * i as f64 / n as f64).collect();
        let v = k.iter().map(|k| reg.eval(*k)).collect();
        TabulatedRegulator::new(k, v).unwrap()
    }

    #[test]
    fn tabulated_regulator_tracks_model() {
        let t = sampled_model(1.0, 50.0, 5000);
        assert!((t.tail_exponent() - 4.0).abs() < 0.05);
        let tab = LinearCoupling::new(1.0, Regulator::Tabulated(t)).unwrap();
        let exact = model(1.0, 1.0);
        assert!((induced_mass_charge(&tab).unwrap() - 1.0 / 3.0).abs() < 1e-5);
        for &w in &[0.1, 0.5, 1.0, 3.0] {
            let a = charge_susceptibility(&tab, cr(w)).unwrap();
            let b = charge_susceptibility(&exact, cr(w)).unwrap();
            assert!((a - b).norm() < 1e-4 * b.norm(), "ω = {w}: {a} vs {b}");
            let z = Complex::new(w, 0.5);
            let a = charge_susceptibility(&tab, z).unwrap();
            let b = charge_susceptibility(&exact, z).unwrap();
            assert!((a - b).norm() < 1e-4 * b.norm(), "ω = {z}: {a} vs {b}");
        }
    }

    #[test]
    fn unregulated_mass_diverges() {
        let k: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let flat = TabulatedRegulator::new(k.clone(), vec![1.0; k.len()]).unwrap();
        let c = LinearCoupling::new(1.0, Regulator::Tabulated(flat)).unwrap();
        assert!(matches!(induced_mass_charge(&c), Err(Error::Divergence(_))));
    }

    #[test]
    fn regulator_csv() {
        let text = "k,value\n0,1\n1,0.25\n2,0.0625\n";
        let t = TabulatedRegulator::<f64>::from_csv(text.as_bytes()).unwrap();
        assert_eq!(t.eval(0.5), 0.625);
        assert!((t.tail_exponent() - 2.0).abs() < 1e-12);
        assert!(TabulatedRegulator::<f64>::from_csv("q,value\n0,1\n".as_bytes()).is_err());
        assert!(TabulatedRegulator::<f64>::new(vec![0.0, 1.0], vec![1.0, 1.5]).is_err());
    }

    #[test]
    fn velocity_coupling_reproduces_charge() {
        let c = model(1.0, 1.0);
        let grid = FrequencyGrid::new(0.01, 10_000).unwrap();
        let amp = (4.0f64 / 3.0).sqrt();
        let b = ComplexSpectrum::from_fn(grid, |k: f64| Complex::new(amp * k.abs() * c.regulator().eval(k).sqrt(), 0.0));
        let zero = ComplexSpectrum::from_fn(grid, |_| Complex::new(0.0, 0.0));
        let table = CouplingTable::new(zero.clone(), b, zero).unwrap();
        for &w in &[0.2, 0.7, 1.5] {
            let g = generic_linear_susceptibility(&table, w).unwrap();
            let e = charge_susceptibility(&c, cr(w)).unwrap();
            assert!((g - e).norm() < 1e-4 * e.norm(), "ω = {w}: {g} vs {e}");
        }
        assert_eq!(generic_linear_susceptibility(&table, 0.0).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn zero_and_unreal_coupling() {
        let grid = FrequencyGrid::new(0.1, 50).unwrap();
        let t = CouplingTable::zero(grid);
        assert_eq!(generic_linear_susceptibility(&t, 0.7).unwrap(), Complex::new(0.0, 0.0));
        let bad = ComplexSpectrum::from_fn(grid, |k| Complex::new(k, 0.0));
        let zero = ComplexSpectrum::from_fn(grid, |_| Complex::new(0.0, 0.0));
        assert!(CouplingTable::new(zero.clone(), bad, zero).is_err());
    }

    #[test]
    fn abraham_lorentz_flags() {
        let s = abraham_lorentz_system(1.0, 1.0, 0.0).unwrap();
        assert_eq!(s.binding(), Binding::Free);
        assert_eq!(abraham_lorentz_system(1.0, 1.0, -0.2).unwrap().binding(), Binding::Unbound);
        assert!(abraham_lorentz_system(1.0, 0.0, 0.0).is_err());
    }
}
