//! Winding numbers of analytic functions around rectangular contours.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::Real;

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

impl<T: Real> Rect<T> {
    pub fn new(re_min: T, re_max: T, im_min: T, im_max: T) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::InvalidArgument("degenerate rectangle".into()));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn center(&self) -> Complex<T> {
        let h = T::lit(0.5);
        Complex::new((self.re_min + self.re_max) * h, (self.im_min + self.im_max) * h)
    }

    pub fn width(&self) -> T {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> T {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> T {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Corners in counter-clockwise order starting bottom-left.
    pub fn corners(&self) -> [Complex<T>; 4] {
        [
            Complex::new(self.re_min, self.im_min),
            Complex::new(self.re_max, self.im_min),
            Complex::new(self.re_max, self.im_max),
            Complex::new(self.re_min, self.im_max),
        ]
    }

    /// Splits across the longer side at fraction `at` of that side.
    pub fn split(&self, at: T) -> (Self, Self) {
        if self.width() >= self.height() {
            let x = self.re_min + self.width() * at;
            (
                Self { re_max: x, ..*self },
                Self { re_min: x, ..*self },
            )
        } else {
            let y = self.im_min + self.height() * at;
            (
                Self { im_max: y, ..*self },
                Self { im_min: y, ..*self },
            )
        }
    }
}

/// Sampling controls for [`winding_number`].
#[derive(Debug, Clone, Copy)]
pub struct WindingOptions {
    /// Initial samples per edge.
    pub initial_samples: usize,
    /// Largest phase step accepted between neighbouring samples.
    pub max_phase_step: f64,
    /// Maximum recursive bisection depth of an edge segment.
    pub max_depth: usize,
    /// The winding number must be this close to an integer.
    pub integer_tolerance: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self {
            initial_samples: 32,
            max_phase_step: std::f64::consts::FRAC_PI_4,
            max_depth: 40,
            integer_tolerance: 1e-3,
        }
    }
}

struct Walker<'a, T, F> {
    f: &'a mut F,
    opts: WindingOptions,
    min_abs: T,
    max_abs: T,
}

impl<T, F> Walker<'_, T, F>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    fn eval(&mut self, z: Complex<T>) -> Result<Complex<T>> {
        let v = (self.f)(z)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::ContourTooClose(format!(
                "function is not finite at {}{:+}i",
                z.re.as_f64(),
                z.im.as_f64()
            )));
        }
        let m = v.norm();
        self.min_abs = self.min_abs.min(m);
        self.max_abs = self.max_abs.max(m);
        Ok(v)
    }

    fn segment(&mut self, za: Complex<T>, fa: Complex<T>, zb: Complex<T>, fb: Complex<T>, depth: usize) -> Result<T> {
        let step = (fb / fa).arg();
        if step.abs() <= T::lit(self.opts.max_phase_step) {
            return Ok(step);
        }
        if depth >= self.opts.max_depth {
            return Err(Error::ContourTooClose(format!(
                "phase does not resolve near {}{:+}i",
                za.re.as_f64(),
                za.im.as_f64()
            )));
        }
        let zm = (za + zb) * T::lit(0.5);
        let fm = self.eval(zm)?;
        Ok(self.segment(za, fa, zm, fm, depth + 1)? + self.segment(zm, fm, zb, fb, depth + 1)?)
    }

    fn total_phase(&mut self, rect: &Rect<T>, samples: usize) -> Result<T> {
        let corners = rect.corners();
        let mut total = T::zero();
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            let mut zp = a;
            let mut fp = self.eval(zp)?;
            for k in 1..=samples {
                let t = T::from_usize_lossy(k) / T::from_usize_lossy(samples);
                let z = a + (b - a) * t;
                let fz = self.eval(z)?;
                total = total + self.segment(zp, fp, z, fz, 0)?;
                zp = z;
                fp = fz;
            }
        }
        Ok(total)
    }
}

/// Winding number of `f` around the boundary of `rect` (counter-clockwise),
/// i.e. zeros minus poles enclosed.
///
/// The edge sampling is doubled until two successive passes agree on an
/// integer within `integer_tolerance`.
pub fn winding_number<T, F>(mut f: F, rect: &Rect<T>, opts: WindingOptions) -> Result<i64>
where
    T: Real,
    F: FnMut(Complex<T>) -> Result<Complex<T>>,
{
    let mut samples = opts.initial_samples.max(4);
    let mut previous: Option<i64> = None;
    for _ in 0..6 {
        let mut walker = Walker {
            f: &mut f,
            opts,
            min_abs: T::infinity(),
            max_abs: T::zero(),
        };
        let phase = walker.total_phase(rect, samples)?;
        if walker.min_abs <= T::lit(1e-13) * walker.max_abs || walker.min_abs == T::zero() {
            return Err(Error::ContourTooClose(format!(
                "|f| drops to {:e} on the contour",
                walker.min_abs.as_f64()
            )));
        }
        let w = phase.as_f64() / std::f64::consts::TAU;
        let n = w.round();
        if (w - n).abs() <= opts.integer_tolerance {
            let n = n as i64;
            if previous == Some(n) {
                return Ok(n);
            }
            previous = Some(n);
        } else {
            previous = None;
        }
        samples *= 2;
    }
    Err(Error::ContourTooClose("winding number did not stabilise to an integer".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(a: f64, b: f64, c: f64, d: f64) -> Rect<f64> {
        Rect::new(a, b, c, d).unwrap()
    }

    #[test]
    fn counts_zeros_and_poles() {
        let z0 = Complex::new(0.3, 1.2);
        let p0 = Complex::new(-0.5, 0.8);
        let f = |z: Complex<f64>| Ok((z - z0) * (z - z0) / (z - p0));
        let r = rect(-2.0, 2.0, 0.1, 3.0);
        assert_eq!(winding_number(f, &r, WindingOptions::default()).unwrap(), 1);
        let only_zero = rect(0.0, 1.0, 1.0, 2.0);
        assert_eq!(winding_number(f, &only_zero, WindingOptions::default()).unwrap(), 2);
        let only_pole = rect(-1.0, -0.1, 0.5, 1.0);
        assert_eq!(winding_number(f, &only_pole, WindingOptions::default()).unwrap(), -1);
    }

    #[test]
    fn partition_conserves_count() {
        let roots = [Complex::new(0.1, 0.4), Complex::new(-0.7, 1.9), Complex::new(1.3, 0.9)];
        let f = |z: Complex<f64>| Ok(roots.iter().fold(Complex::new(1.0, 0.0), |acc, r| acc * (z - r)));
        let whole = rect(-2.0, 2.0, 0.05, 2.5);
        let total = winding_number(f, &whole, WindingOptions::default()).unwrap();
        let (a, b) = whole.split(0.37);
        let parts = winding_number(f, &a, WindingOptions::default()).unwrap()
            + winding_number(f, &b, WindingOptions::default()).unwrap();
        assert_eq!(total, 3);
        assert_eq!(parts, total);
    }

    #[test]
    fn zero_on_contour_is_reported() {
        let f = |z: Complex<f64>| Ok(z - Complex::new(0.0, 1.0));
        let r = rect(-1.0, 1.0, 1.0, 2.0);
        assert!(matches!(
            winding_number(f, &r, WindingOptions::default()),
            Err(Error::ContourTooClose(_))
        ));
    }

    #[test]
    fn high_order_zero() {
        let z0 = Complex::new(0.2, 0.5);
        let f = |z: Complex<f64>| Ok((z - z0).powi(7));
        let r = rect(-1.0, 1.0, 0.1, 1.0);
        assert_eq!(winding_number(f, &r, WindingOptions::default()).unwrap(), 7);
    }
}
