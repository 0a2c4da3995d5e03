//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature for real and
//! complex valued integrands, with helpers for semi-infinite ranges.

use std::ops::{Add, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::real::Real;

/// Values that can be integrated: real scalars and complex numbers.
pub trait QuadValue<T: Real>:
    Copy + Add<Output = Self> + Sub<Output = Self> + std::ops::Mul<T, Output = Self> + Zero
{
    fn magnitude(self) -> T;
}

impl<T: Real> QuadValue<T> for T {
    #[inline]
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Real> QuadValue<T> for Complex<T> {
    #[inline]
    fn magnitude(self) -> T {
        self.norm()
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_452,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Result of a quadrature: value and estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<V, T> {
    pub value: V,
    pub error: T,
}

/// Tolerances and limits for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }

    /// Library default: 1e-8 relative, matching the documented tolerance
    /// for quadrature-derived quantities.
    pub fn standard() -> Self {
        Self::new(T::lit(1e-14), T::lit(1e-8))
    }

    /// Tighter setting used where results feed into differences.
    pub fn fine() -> Self {
        Self::new(T::lit(1e-15), T::lit(1e-11))
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

struct Panel<V, T> {
    a: T,
    b: T,
    value: V,
    error: T,
}

fn gk21<T: Real, V: QuadValue<T>, F: FnMut(T) -> V>(f: &mut F, a: T, b: T) -> Panel<V, T> {
    let center = (a + b) * T::lit(0.5);
    let half = (b - a) * T::lit(0.5);
    let f_center = f(center);
    let mut kronrod = f_center * T::lit(WGK[10]);
    let mut gauss = V::zero();
    let mut fv1 = [V::zero(); 10];
    let mut fv2 = [V::zero(); 10];
    let mut res_abs = f_center.magnitude() * T::lit(WGK[10]);
    for j in 0..10 {
        let x = half * T::lit(XGK[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * T::lit(WGK[j]);
        res_abs = res_abs + (f1.magnitude() + f2.magnitude()) * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * T::lit(WG[j / 2]);
        }
    }
    let mean = kronrod * T::lit(0.5);
    let mut res_asc = (f_center - mean).magnitude() * T::lit(WGK[10]);
    for j in 0..10 {
        res_asc = res_asc + ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude()) * T::lit(WGK[j]);
    }
    let abs_half = half.abs();
    res_asc = res_asc * abs_half;
    res_abs = res_abs * abs_half;

    let mut err = ((kronrod - gauss) * half).magnitude();
    if res_asc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let roundoff = T::lit(50.0) * T::epsilon() * res_abs;
    if roundoff > err {
        err = roundoff;
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: err,
    }
}

/// Integrates `f` over the consecutive intervals defined by `points`
/// (at least two, monotone), adaptively refining the worst panel.
pub fn integrate_points<T, V, F>(mut f: F, points: &[T], tol: Tolerance<T>) -> Result<Estimate<V, T>>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    if points.len() < 2 {
        return Err(Error::InvalidArgument("quadrature needs two endpoints".into()));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("non-finite integration limit".into()));
    }
    let mut panels: Vec<Panel<V, T>> = points
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| gk21(&mut f, w[0], w[1]))
        .collect();
    if panels.is_empty() {
        return Ok(Estimate {
            value: V::zero(),
            error: T::zero(),
        });
    }
    loop {
        let total = panels.iter().fold(V::zero(), |acc, p| acc + p.value);
        let err: T = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * total.magnitude());
        if !total.magnitude().is_finite() || !err.is_finite() {
            return Err(Error::NotConverged("integrand produced a non-finite value".into()));
        }
        if err <= target {
            return Ok(Estimate { value: total, error: err });
        }
        if panels.len() >= tol.max_intervals {
            return Err(Error::NotConverged(format!(
                "error estimate {:e} above target {:e} after {} panels",
                err.as_f64(),
                target.as_f64(),
                panels.len()
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, p)| if p.error > be { (i, p.error) } else { (bi, be) });
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) * T::lit(0.5);
        if mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            // Interval exhausted at machine resolution; accept as is.
            panels.push(p);
            let total = panels.iter().fold(V::zero(), |acc, p| acc + p.value);
            let err: T = panels.iter().map(|p| p.error).sum();
            return Ok(Estimate { value: total, error: err });
        }
        panels.push(gk21(&mut f, p.a, mid));
        panels.push(gk21(&mut f, mid, p.b));
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<T, V, F>(f: F, a: T, b: T, tol: Tolerance<T>) -> Result<Estimate<V, T>>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    integrate_points(f, &[a, b], tol)
}

/// Builds a sorted breakpoint list inside `[a, b]` from candidate points.
pub fn breakpoints<T: Real>(a: T, b: T, candidates: &[T]) -> Vec<T> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut pts: Vec<T> = vec![lo, hi];
    pts.extend(candidates.iter().copied().filter(|c| c.is_finite() && *c > lo && *c < hi));
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    pts.dedup();
    if a > b {
        pts.reverse();
    }
    pts
}

/// Integrates `f` over `[a, ∞)` by summing panels `[a, a+s]`, `[a+s, a+2s]`,
/// `[a+2s, a+4s]`, … until the panels decay below tolerance.
///
/// Successive panels that fail to shrink signal a divergent integral. Once
/// the panels decay geometrically the remainder is estimated from the last
/// ratio.
pub fn integrate_to_infinity<T, V, F>(mut f: F, a: T, scale: T, tol: Tolerance<T>) -> Result<Estimate<V, T>>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    if !(scale > T::zero()) {
        return Err(Error::InvalidArgument("semi-infinite quadrature needs a positive scale".into()));
    }
    let head = integrate(&mut f, a, a + scale, tol)?;
    let mut total = head.value;
    let mut error = head.error;
    let mut lo = a + scale;
    let mut width = scale;
    let mut previous: Option<T> = None;
    let mut stalled = 0usize;
    for _ in 0..400 {
        let piece = integrate(&mut f, lo, lo + width, tol)?;
        total = total + piece.value;
        error = error + piece.error;
        let m = piece.value.magnitude();
        let target = tol.abs.max(tol.rel * total.magnitude());
        if let Some(prev) = previous {
            let ratio = if prev > T::zero() { m / prev } else { T::zero() };
            if ratio >= T::lit(0.95) && m > target {
                stalled += 1;
                if stalled >= 6 {
                    return Err(Error::Divergence(format!(
                        "tail contributions do not decay (ratio {:.3} near x = {:e})",
                        ratio.as_f64(),
                        lo.as_f64()
                    )));
                }
            } else {
                stalled = 0;
            }
            if m <= target && ratio < T::lit(0.9) {
                // Geometric remainder of the tail beyond the last panel.
                let remainder = piece.value * (ratio / (T::one() - ratio));
                total = total + remainder;
                error = error + remainder.magnitude();
                return Ok(Estimate { value: total, error });
            }
        } else if m == T::zero() && head.value.magnitude() == T::zero() {
            return Ok(Estimate { value: total, error });
        }
        previous = Some(m);
        lo = lo + width;
        width = width + width;
        if !lo.is_finite() {
            break;
        }
    }
    Err(Error::Divergence("tail did not converge before overflow".into()))
}

/// Finds a truncation point for an integrand that decays exponentially:
/// the first point beyond the running peak at which `|f|` falls below
/// `1e-16` of that peak (two consecutive probes), probing in steps of `scale`.
pub fn exponential_cutoff<T, V, F>(mut f: F, start: T, scale: T) -> T
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    let mut peak = f(start).magnitude();
    let mut x = start;
    let mut quiet = 0;
    for _ in 0..100_000 {
        x = x + scale;
        let m = f(x).magnitude();
        if m > peak {
            peak = m;
            quiet = 0;
        } else if m <= T::lit(1e-16) * peak {
            quiet += 1;
            if quiet >= 2 {
                return x;
            }
        } else {
            quiet = 0;
        }
    }
    x
}

/// Principal value of `∫ g(k)/(k² − a²) dk` over `[0, upper]` (or
/// `[0, ∞)` when `upper` is `None`), for `a > 0`.
///
/// The pole at `k = a` is removed by subtracting `g(a)` on a window
/// symmetric about `a` and adding the window's logarithm analytically.
/// `knots` are extra breakpoints (kinks of tabulated data).
pub fn principal_value_resonant<T, F>(g: F, a: T, upper: Option<T>, knots: &[T], tol: Tolerance<T>) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(a > T::zero()) {
        return Err(Error::InvalidArgument("resonance must be at a positive frequency".into()));
    }
    let two = T::lit(2.0);
    let regular = |lo: T, hi: T| -> Result<T> {
        if hi <= lo {
            return Ok(T::zero());
        }
        let pts = breakpoints(lo, hi, knots);
        Ok(integrate_points(|k: T| g(k) / (k * k - a * a), &pts, tol)?.value)
    };
    if let Some(u) = upper {
        if (u - a).abs() <= T::lit(1e-12) * a {
            return Err(Error::Domain("principal value with the pole at the integration limit".into()));
        }
        if u < a {
            return regular(T::zero(), u);
        }
    }
    let w = match upper {
        Some(u) => a.min(u - a),
        None => a,
    };
    let ga = g(a);
    let window = breakpoints(a - w, a + w, &[knots, &[a]].concat());
    let core = integrate_points(
        |k: T| {
            let d = k * k - a * a;
            if d == T::zero() {
                T::zero()
            } else {
                (g(k) - ga) / d
            }
        },
        &window,
        tol,
    )?
    .value;
    let log_term = ga * ((two * a - w) / (two * a + w)).ln() / (two * a);
    let left = regular(T::zero(), a - w)?;
    let right = match upper {
        Some(u) => regular(a + w, u)?,
        None => {
            let far = knots.iter().copied().filter(|k| *k > a + w).fold(a + w, T::max);
            let near = regular(a + w, far)?;
            near + integrate_to_infinity(|k: T| g(k) / (k * k - a * a), far, a.max(far - a - w).max(a), tol)?.value
        }
    };
    Ok(core + log_term + left + right)
}

/// Central-difference estimates of `f′(x)` and `f″(x)/2` with one
/// Richardson step (steps `h` and `h/2`).
pub fn central_derivatives<T, V, F>(mut f: F, x: T, h: T) -> (V, V)
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    let mut stencil = |h: T| {
        let fp = f(x + h);
        let fm = f(x - h);
        let f0 = f(x);
        let d1 = (fp - fm) * (T::one() / (T::lit(2.0) * h));
        let d2 = (fp + fm - f0 - f0) * (T::one() / (T::lit(2.0) * h * h));
        (d1, d2)
    };
    let (a1, a2) = stencil(h);
    let (b1, b2) = stencil(h * T::lit(0.5));
    let third = T::one() / T::lit(3.0);
    ((b1 * T::lit(4.0) - a1) * third, (b2 * T::lit(4.0) - a2) * third)
}
