//! Subtracted dispersion relations, fluctuation–dissipation checks and
//! induced-mass integrals on uniform frequency grids.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_to_infinity, Tolerance};
use crate::real::{CompensatedSum, Real};
use crate::spectrum::ComplexSpectrum;

/// Extension of a sampled spectrum beyond the last grid point, fitted over
/// the last decade of positive frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModel {
    /// Nothing beyond the grid.
    Truncate,
    /// `v(u) ≈ a·u^q`.
    PowerLaw,
    /// `v(u) ≈ u^m (a + b ln u + c/u)` with integer `m` from the log-log slope.
    LogLinear,
}

/// A fitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit<T> {
    pub model: TailModel,
    pub exponent: T,
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> TailFit<T> {
    fn zero(model: TailModel) -> Self {
        Self {
            model,
            exponent: T::zero(),
            a: T::zero(),
            b: T::zero(),
            c: T::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.a == T::zero() && self.b == T::zero() && self.c == T::zero()
    }

    pub fn eval(&self, u: T) -> T {
        match self.model {
            TailModel::Truncate => T::zero(),
            TailModel::PowerLaw => self.a * u.powf(self.exponent),
            TailModel::LogLinear => u.powf(self.exponent) * (self.a + self.b * u.ln() + self.c / u),
        }
    }

    /// Fits `values` sampled at `u` (positive, increasing) over the last decade.
    pub fn fit(model: TailModel, u: &[T], values: &[T]) -> Result<Self> {
        let u_max = *u.last().ok_or_else(|| invalid("empty tail data"))?;
        let pts: Vec<(T, T)> = u
            .iter()
            .zip(values)
            .filter(|(x, _)| **x >= u_max * T::lit(0.1) && **x > T::zero())
            .map(|(x, v)| (*x, *v))
            .collect();
        if model == TailModel::Truncate {
            return Ok(Self::zero(model));
        }
        if pts.len() < 3 {
            return Err(invalid("tail fit needs at least three samples in the last decade"));
        }
        let scale = pts.iter().map(|p| p.1.abs()).fold(T::zero(), T::max);
        if scale == T::zero() {
            return Ok(Self::zero(model));
        }
        let same_sign = pts.iter().all(|p| p.1 > T::zero()) || pts.iter().all(|p| p.1 < T::zero());
        let slope = if same_sign {
            let (q, _) = least_squares(pts.iter().map(|p| (p.0.ln(), p.1.abs().ln())));
            Some(q)
        } else {
            None
        };
        match model {
            TailModel::PowerLaw => {
                let q = slope.ok_or_else(|| invalid("power-law tail needs samples of one sign"))?;
                let (_, c) = least_squares(pts.iter().map(|p| (p.0.ln(), p.1.abs().ln())));
                let sign = if pts[0].1 > T::zero() { T::one() } else { -T::one() };
                Ok(Self {
                    model,
                    exponent: q,
                    a: sign * c.exp(),
                    b: T::zero(),
                    c: T::zero(),
                })
            }
            TailModel::LogLinear => {
                let q = slope.unwrap_or(T::zero());
                let candidate = |m: T| {
                    let [a, b, c] = least_squares3(pts.iter().map(|p| ([T::one(), p.0.ln(), p.0.recip()], p.1 / p.0.powf(m))));
                    let fit = Self {
                        model,
                        exponent: m,
                        a,
                        b,
                        c,
                    };
                    let err = pts.iter().map(|p| ((fit.eval(p.0) - p.1) / scale).powi(2)).sum::<T>();
                    (fit, err)
                };
                let (lo, e_lo) = candidate(q.floor());
                let (hi, e_hi) = candidate(q.ceil());
                Ok(if e_hi < e_lo { hi } else { lo })
            }
            TailModel::Truncate => unreachable!(),
        }
    }
}

/// Least-squares line `y = slope·x + intercept`.
fn least_squares<T: Real>(pts: impl Iterator<Item = (T, T)> + Clone) -> (T, T) {
    let n = T::from_usize_lossy(pts.clone().count());
    let mx = pts.clone().map(|p| p.0).sum::<T>() / n;
    let my = pts.clone().map(|p| p.1).sum::<T>() / n;
    let sxx = pts.clone().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let sxy = pts.map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    (slope, my - slope * mx)
}

/// Least squares for `y ≈ Σ β_i x_i` with three regressors, by Gaussian
/// elimination with partial pivoting on the normal equations.
fn least_squares3<T: Real>(rows: impl Iterator<Item = ([T; 3], T)>) -> [T; 3] {
    let mut m = [[T::zero(); 4]; 3];
    for (x, y) in rows {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = m[i][j] + x[i] * x[j];
            }
            m[i][3] = m[i][3] + x[i] * y;
        }
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap_or(std::cmp::Ordering::Equal)).unwrap_or(col);
        m.swap(col, piv);
        if m[col][col] == T::zero() {
            return [T::zero(); 3];
        }
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..4 {
                    m[r][k] = m[r][k] - f * m[col][k];
                }
            }
        }
    }
    [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
}

fn tail_tol<T: Real>() -> Tolerance<T> {
    Tolerance::new(T::lit(1e-16), T::lit(1e-10))
}

/// Positive-frequency real parts `(u_j, Re s_j)` for `j = 0..=N`.
fn positive_half<T: Real>(s: &ComplexSpectrum<T>) -> (Vec<T>, Vec<T>) {
    let g = s.grid();
    let n = g.half_count() as isize;
    (0..=n).map(|j| (g.omega(j), s.at(j).re)).unzip()
}

fn check_real_odd<T: Real>(xi: &ComplexSpectrum<T>) -> Result<()> {
    let g = xi.grid();
    let scale = xi.max_magnitude().max(T::min_positive_value());
    let n = g.half_count() as isize;
    for j in 0..=n {
        let (p, m) = (xi.at(j), xi.at(-j));
        if p.im.abs() > T::lit(1e-9) * scale || (p.re + m.re).abs() > T::lit(1e-9) * scale {
            return Err(invalid("ξ must be real and odd"));
        }
    }
    Ok(())
}

/// Octave test on a positive integrand sampled on `[0, L]`: the last octave
/// must be clearly smaller than the one before it.
fn check_decay<T: Real>(u: &[T], h: &[T], what: &str) -> Result<()> {
    let n = u.len() - 1;
    if n < 8 {
        return Ok(());
    }
    let octave = |lo: usize, hi: usize| -> T {
        let mut s = CompensatedSum::new();
        for j in lo..=hi {
            let w = if j == lo || j == hi { T::lit(0.5) } else { T::one() };
            s.add(h[j].abs() * w);
        }
        s.value()
    };
    let last = octave(n / 2, n);
    let before = octave(n / 4, n / 2);
    let total = octave(0, n).max(T::min_positive_value());
    if last >= T::lit(0.95) * before && last > T::lit(1e-12) * total {
        return Err(Error::Divergence(format!(
            "{what}: integrand does not decay over the last octave (ratio {:.3})",
            (last / before.max(T::min_positive_value())).as_f64()
        )));
    }
    Ok(())
}

/// Causal function rebuilt from real odd samples of `ξ = Im χ`:
/// `χ[ω] = Σ_{m<n} c_m ω^m + ωⁿ ∫(dω′/π) g(ω′)/(ω′ − ω − iε)` with
/// `g = (ξ − Im Σ c_m ω^m)/ωⁿ` and subtractions at zero (`χ[0] = 0`).
///
/// `taylor_coeffs` are `(χ′[0], χ″[0]/2, …)`, `n − 1` of them. The outermost
/// grid samples are extrapolated from their neighbours.
pub fn kk_transform<T: Real>(
    xi: &ComplexSpectrum<T>,
    subtractions: usize,
    taylor_coeffs: &[Complex<T>],
    tail: TailModel,
) -> Result<ComplexSpectrum<T>> {
    let kk = Subtracted::new(xi, subtractions, taylor_coeffs, tail)?;
    let grid = *xi.grid();
    let n = grid.half_count() as isize;
    let mut half: Vec<Complex<T>> = (0..n).into_par_iter().map(|k| kk.on_grid(k)).collect::<Result<_>>()?;
    // Linear extrapolation to the edge, where the log term is singular.
    let edge = half[(n - 1) as usize] * T::lit(2.0) - half[(n - 2) as usize];
    half.push(Complex::new(edge.re, xi.at(n).re));
    let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for (k, v) in half.iter().enumerate() {
        let k = k as isize;
        values[grid.position(k)] = *v;
        values[grid.position(-k)] = v.conj();
    }
    ComplexSpectrum::from_values(grid, values)
}

/// `χ{p} = χ[ip]` for `Re p > 0` from the same subtracted dispersion
/// integral as [`kk_transform`], evaluated off the real axis.
pub fn laplace_continuation<T: Real>(
    xi: &ComplexSpectrum<T>,
    subtractions: usize,
    taylor_coeffs: &[Complex<T>],
    tail: TailModel,
    p: Complex<T>,
) -> Result<Complex<T>> {
    if !(p.re > T::zero()) {
        return Err(Error::Domain("Laplace variable needs Re p > 0".into()));
    }
    let kk = Subtracted::new(xi, subtractions, taylor_coeffs, tail)?;
    kk.off_axis(Complex::new(-p.im, p.re))
}

struct Subtracted<T> {
    n: usize,
    coeffs: Vec<Complex<T>>,
    parity: T,
    delta: T,
    half_count: isize,
    // g on j = 0..=N
    g: Vec<T>,
    tail: TailFit<T>,
}

impl<T: Real> Subtracted<T> {
    fn new(xi: &ComplexSpectrum<T>, n: usize, coeffs: &[Complex<T>], tail: TailModel) -> Result<Self> {
        if n > 3 {
            return Err(invalid("at most three subtractions are supported"));
        }
        if coeffs.len() != n.saturating_sub(1) {
            return Err(invalid(format!(
                "{n} subtractions need {} Taylor coefficients, got {}",
                n.saturating_sub(1),
                coeffs.len()
            )));
        }
        if xi.grid().half_count() < 8 {
            return Err(invalid("grid too small for a dispersion transform"));
        }
        check_real_odd(xi)?;
        let (u, x) = positive_half(xi);
        let parity = if n % 2 == 1 { T::one() } else { -T::one() };
        let im_poly = |w: T| {
            coeffs
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (m, c)| acc + c.im * w.powi(m as i32 + 1))
        };
        let mut g: Vec<T> = u
            .iter()
            .zip(&x)
            .map(|(w, v)| if *w == T::zero() { T::zero() } else { (*v - im_poly(*w)) / w.powi(n as i32) })
            .collect();
        if n == 0 {
            g[0] = x[0];
        } else if parity > T::zero() {
            g[0] = (T::lit(4.0) * g[1] - g[2]) / T::lit(3.0);
        }
        let h: Vec<T> = u
            .iter()
            .zip(&g)
            .map(|(w, gv)| {
                let p = if parity > T::zero() { 2 } else { 1 };
                if *w == T::zero() {
                    T::zero()
                } else {
                    *gv / w.max(u[1]).powi(p)
                }
            })
            .collect();
        check_decay(&u, &h, "dispersion integral")?;
        let fit = TailFit::fit(tail, &u[1..], &x[1..])?;
        let sub = Self {
            n,
            coeffs: coeffs.to_vec(),
            parity,
            delta: xi.grid().delta(),
            half_count: xi.grid().half_count() as isize,
            g,
            tail: fit,
        };
        Ok(sub)
    }

    fn im_poly(&self, w: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (m, c)| acc + c.im * w.powi(m as i32 + 1))
    }

    fn g_at(&self, j: isize) -> T {
        let v = self.g[j.unsigned_abs()];
        if j < 0 {
            v * self.parity
        } else {
            v
        }
    }

    fn g_tail(&self, u: T) -> T {
        (self.tail.eval(u) - self.im_poly(u)) / u.powi(self.n as i32)
    }

    fn poly(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut zp = z;
        for c in &self.coeffs {
            acc = acc + *c * zp;
            zp = zp * z;
        }
        acc
    }

    fn l(&self) -> T {
        self.delta * T::from_isize_lossy(self.half_count)
    }

    fn tail_integral(&self, z: Complex<T>) -> Result<Complex<T>> {
        if self.tail.model == TailModel::Truncate || self.tail.is_zero() {
            // Only the polynomial part can survive in the tail.
            if self.coeffs.iter().all(|c| c.im == T::zero()) {
                return Ok(Complex::new(T::zero(), T::zero()));
            }
        }
        let p = self.parity;
        let l = self.l();
        let f = |u: T| {
            let uc = Complex::new(u, T::zero());
            let k = Complex::new(T::one(), T::zero()) / (uc - z) - Complex::new(p, T::zero()) / (uc + z);
            k * self.g_tail(u)
        };
        Ok(integrate_to_infinity(f, l, l, tail_tol())?.value)
    }

    fn on_grid(&self, k: isize) -> Result<Complex<T>> {
        let n = self.half_count;
        let w = self.delta * T::from_isize_lossy(k);
        let gk = self.g_at(k);
        let deriv = (self.g_at(k + 1) - self.g_at(k - 1)) / (T::lit(2.0) * self.delta);
        let mut s = CompensatedSum::new();
        for j in -n..=n {
            let term = if j == k {
                deriv
            } else {
                (self.g_at(j) - gk) / (self.delta * T::from_isize_lossy(j - k))
            };
            let wgt = if j == -n || j == n { T::lit(0.5) } else { T::one() };
            s.add(term * wgt);
        }
        let l = self.l();
        let log_term = gk * ((l - w) / (l + w)).ln();
        let tail = self.tail_integral(Complex::new(w, T::zero()))?.re;
        let re_f = (s.value() * self.delta + log_term + tail) / T::PI();
        let f = Complex::new(re_f, gk);
        let wc = Complex::new(w, T::zero());
        Ok(self.poly(wc) + wc.powi(self.n as i32) * f)
    }

    /// Piecewise-linear `g` integrated exactly against `1/(u − z)`.
    fn off_axis(&self, z: Complex<T>) -> Result<Complex<T>> {
        let n = self.half_count;
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        let at = |j: isize| Complex::new(self.delta * T::from_isize_lossy(j), T::zero()) - z;
        let mut l0 = at(-n).ln();
        for j in -n..n {
            let (g0, g1) = (self.g_at(j), self.g_at(j + 1));
            let slope = (g1 - g0) / self.delta;
            let u0 = self.delta * T::from_isize_lossy(j);
            let l1 = at(j + 1).ln();
            // g = g0 + slope (u − u0) = slope (u − z) + (g0 + slope (z − u0))
            let v = (l1 - l0) * (Complex::new(g0 - slope * u0, T::zero()) + z * slope) + Complex::new(slope * self.delta, T::zero());
            re.add(v.re);
            im.add(v.im);
            l0 = l1;
        }
        let body = Complex::new(re.value(), im.value());
        let f = (body + self.tail_integral(z)?) / T::PI();
        Ok(self.poly(z) + z.powi(self.n as i32) * f)
    }
}

fn same_grid<T: Real>(a: &ComplexSpectrum<T>, b: &ComplexSpectrum<T>) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(invalid("spectra are sampled on different grids"));
    }
    Ok(())
}

/// `max_j |Im χ_j − ξ_j| / max_j |Im χ_j|`.
pub fn fdt_residual<T: Real>(chi: &ComplexSpectrum<T>, xi: &ComplexSpectrum<T>) -> Result<T> {
    same_grid(chi, xi)?;
    let scale = chi.values().iter().map(|v| v.im.abs()).fold(T::zero(), T::max);
    let worst = chi
        .values()
        .iter()
        .zip(xi.values())
        .map(|(c, x)| (c.im - x.re).abs())
        .fold(T::zero(), T::max);
    if scale == T::zero() {
        return Ok(worst);
    }
    Ok(worst / scale)
}

/// Outcome of a detailed-balance check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum DetailedBalance<T> {
    /// `max |(1 − e^{−ω/T}) C_FF[ω] − 2ξ[ω]| / max |2ξ|`, with both sides
    /// multiplied by `e^{ω/T}` for `ω < 0`.
    Thermal { residual: T },
    /// Vacuum: `max_{ω<0} |C_FF[ω]|`, which must vanish.
    Vacuum { negative_frequency_max: T },
}

impl<T: Real> DetailedBalance<T> {
    pub fn value(&self) -> T {
        match self {
            Self::Thermal { residual } => *residual,
            Self::Vacuum { negative_frequency_max } => *negative_frequency_max,
        }
    }
}

/// Checks `2ξ[ω] = (1 − e^{−ω/T}) C_FF[ω]`, or `C_FF[ω < 0] = 0` at `T = 0`.
pub fn detailed_balance_residual<T: Real>(c_ff: &ComplexSpectrum<T>, xi: &ComplexSpectrum<T>, temperature: T) -> Result<DetailedBalance<T>> {
    same_grid(c_ff, xi)?;
    if !(temperature >= T::zero()) {
        return Err(invalid("temperature must be non-negative"));
    }
    if temperature == T::zero() {
        let worst = c_ff
            .iter()
            .filter(|(w, _)| *w < T::zero())
            .map(|(_, c)| c.norm())
            .fold(T::zero(), T::max);
        return Ok(DetailedBalance::Vacuum {
            negative_frequency_max: worst,
        });
    }
    let scale = xi.values().iter().map(|v| T::lit(2.0) * v.re.abs()).fold(T::zero(), T::max);
    let mut worst = T::zero();
    for ((w, c), x) in c_ff.iter().zip(xi.values()) {
        // Below zero both sides are scaled by e^{ω/T} to keep the factor bounded.
        let (factor, rhs) = if w < T::zero() {
            ((w / temperature).exp_m1(), T::lit(2.0) * x.re * (w / temperature).exp())
        } else {
            (-(-w / temperature).exp_m1(), T::lit(2.0) * x.re)
        };
        let lhs = if c.re == T::zero() { T::zero() } else { factor * c.re };
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(DetailedBalance::Thermal {
        residual: if scale > T::zero() { worst / scale } else { worst },
    })
}

/// Classical limit `Im χ[ω] = (ω/2T) C_FF[ω]` for `0 < |ω| ≤ omega_max`:
/// largest relative deviation.
pub fn classical_fdt_residual<T: Real>(chi: &ComplexSpectrum<T>, c_ff: &ComplexSpectrum<T>, temperature: T, omega_max: T) -> Result<T> {
    same_grid(chi, c_ff)?;
    if !(temperature > T::zero()) {
        return Err(invalid("the classical limit needs T > 0"));
    }
    let mut worst = T::zero();
    for ((w, x), c) in chi.iter().zip(c_ff.values()) {
        if w == T::zero() || w.abs() > omega_max {
            continue;
        }
        let classical = w / (T::lit(2.0) * temperature) * c.re;
        worst = worst.max(((x.im - classical) / x.im).abs());
    }
    Ok(worst)
}

/// An induced-mass integral split into its sampled and extrapolated parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassIntegral<T> {
    pub grid_part: T,
    pub tail_part: T,
}

impl<T: Real> MassIntegral<T> {
    pub fn value(&self) -> T {
        self.grid_part + self.tail_part
    }
}

/// `2∫₀^∞ dk d(k)/(π k³)` with `d` sampled at `k_j = jΔ`.
fn mass_integral<T: Real>(k: &[T], d: &[T], tail: TailModel, what: &str) -> Result<MassIntegral<T>> {
    let n = k.len() - 1;
    let mut f: Vec<T> = k
        .iter()
        .zip(d)
        .map(|(k, d)| if *k == T::zero() { T::zero() } else { *d / (*k * *k * *k) })
        .collect();
    // The integrand is even in k: quadratic extrapolation to k = 0.
    f[0] = (T::lit(4.0) * f[1] - f[2]) / T::lit(3.0);
    check_decay(k, &f, what)?;
    let delta = k[1] - k[0];
    let mut s = CompensatedSum::new();
    for (j, v) in f.iter().enumerate() {
        let w = if j == 0 || j == n { T::lit(0.5) } else { T::one() };
        s.add(*v * w);
    }
    let two_over_pi = T::lit(2.0) / T::PI();
    let grid_part = s.value() * delta * two_over_pi;
    let fit = TailFit::fit(tail, &k[1..], &d[1..])?;
    let tail_part = if fit.model == TailModel::Truncate || fit.is_zero() {
        T::zero()
    } else {
        let l = k[n];
        integrate_to_infinity(|u: T| fit.eval(u) / (u * u * u), l, l, tail_tol())
            .map_err(|e| match e {
                Error::Divergence(m) => Error::Divergence(format!("{what}: {m}")),
                other => other,
            })?
            .value
            * two_over_pi
    };
    Ok(MassIntegral { grid_part, tail_part })
}

/// Vacuum induced mass `μ_0 = 2∫₀^∞ dk ξ_0[k]/(π k³)`.
pub fn induced_mass_vacuum<T: Real>(xi_0: &ComplexSpectrum<T>, tail: TailModel) -> Result<MassIntegral<T>> {
    check_real_odd(xi_0)?;
    if xi_0.grid().half_count() < 8 {
        return Err(invalid("grid too small for an induced-mass integral"));
    }
    let (k, d) = positive_half(xi_0);
    mass_integral(&k, &d, tail, "vacuum induced mass")
}

/// Induced masses in a thermal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalMass<T> {
    pub mu_0: MassIntegral<T>,
    /// `μ_T = 2∫₀^∞ dk (ξ_T[k] − ξ_T′[0]k)/(π k³)`.
    pub mu_t: MassIntegral<T>,
    /// `μ_T − μ_0 = χ_T″[0]/2`, integrated from the difference of the
    /// spectra.
    pub half_curvature: MassIntegral<T>,
}

/// `μ_T`, `μ_0` and their difference from sampled `ξ_T`, `ξ_0` and the
/// friction `ξ_T′[0]`.
pub fn induced_mass_thermal<T: Real>(
    xi_t: &ComplexSpectrum<T>,
    xi_0: &ComplexSpectrum<T>,
    friction: T,
    tail: TailModel,
) -> Result<ThermalMass<T>> {
    same_grid(xi_t, xi_0)?;
    check_real_odd(xi_t)?;
    let mu_0 = induced_mass_vacuum(xi_0, tail)?;
    let (k, dt) = positive_half(xi_t);
    let (_, d0) = positive_half(xi_0);
    let sub: Vec<T> = k.iter().zip(&dt).map(|(k, v)| *v - friction * *k).collect();
    let diff: Vec<T> = sub.iter().zip(&d0).map(|(a, b)| *a - *b).collect();
    let mu_t = mass_integral(&k, &sub, tail, "thermal induced mass")?;
    let half_curvature = mass_integral(&k, &diff, tail, "thermal mass correction")?;
    Ok(ThermalMass {
        mu_0,
        mu_t,
        half_curvature,
    })
}
