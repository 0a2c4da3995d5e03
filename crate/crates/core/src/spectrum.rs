//! Symmetric frequency grids and complex spectra sampled on them.
//!
//! Fourier convention: `f(t) = ∫ dω/2π f[ω] e^{-iωt}`, so a real signal has
//! a hermitian spectrum `f[-ω] = f[ω]*`.

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::real::Real;

/// Uniform grid `ω_j = j·Δω`, `j ∈ {-N, …, N}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid<T> {
    delta: T,
    half_count: usize,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(delta: T, half_count: usize) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(invalid(format!("grid step must be positive, got {delta}")));
        }
        if half_count == 0 {
            return Err(invalid("grid half count must be at least 1"));
        }
        Ok(Self { delta, half_count })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn half_count(&self) -> usize {
        self.half_count
    }

    /// Number of points, `2N + 1`.
    pub fn len(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_omega(&self) -> T {
        self.omega(self.half_count as isize)
    }

    /// Frequency of signed index `j`.
    #[inline]
    pub fn omega(&self, j: isize) -> T {
        T::from_isize_lossy(j) * self.delta
    }

    /// Storage position of signed index `j`.
    #[inline]
    pub fn position(&self, j: isize) -> usize {
        debug_assert!(j.unsigned_abs() <= self.half_count);
        (j + self.half_count as isize) as usize
    }

    /// Signed index of storage position `i`.
    #[inline]
    pub fn index(&self, i: usize) -> isize {
        i as isize - self.half_count as isize
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<isize> {
        let n = self.half_count as isize;
        -n..=n
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        self.indices().map(move |j| self.omega(j))
    }

    /// Signed index of `omega` if it lies on the grid (within 1e-9 of a step).
    pub fn index_of(&self, omega: T) -> Option<isize> {
        let x = omega / self.delta;
        let j = x.round();
        if (x - j).abs() > T::lit(1e-9) {
            return None;
        }
        let j = j.to_isize()?;
        (j.unsigned_abs() <= self.half_count).then_some(j)
    }

    pub fn contains(&self, omega: T) -> bool {
        omega.abs() <= self.max_omega() * (T::one() + T::lit(1e-12))
    }
}

/// Complex samples on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum<T> {
    grid: FrequencyGrid<T>,
    values: Vec<Complex<T>>,
    hermitian: bool,
}

impl<T: Real> ComplexSpectrum<T> {
    pub fn from_values(grid: FrequencyGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "spectrum has {} samples, grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            hermitian: false,
        })
    }

    pub fn from_fn<F: FnMut(T) -> Complex<T>>(grid: FrequencyGrid<T>, mut f: F) -> Self {
        let values = grid.points().map(&mut f).collect();
        Self {
            grid,
            values,
            hermitian: false,
        }
    }

    pub fn try_from_fn<F: FnMut(T) -> Result<Complex<T>>>(grid: FrequencyGrid<T>, mut f: F) -> Result<Self> {
        let values = grid.points().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            values,
            hermitian: false,
        })
    }

    /// Real samples stored with zero imaginary part.
    pub fn from_real(grid: FrequencyGrid<T>, values: Vec<T>) -> Result<Self> {
        Self::from_values(grid, values.into_iter().map(|v| Complex::new(v, T::zero())).collect())
    }

    /// Asserts time-domain reality: fails unless the hermitian residual is
    /// within `tol` relative to the largest magnitude.
    pub fn assert_hermitian(mut self, tol: T) -> Result<Self> {
        let r = self.relative_hermitian_residual();
        if r > tol {
            return Err(invalid(format!(
                "spectrum is not hermitian: relative residual {:e} > {:e}",
                r.as_f64(),
                tol.as_f64()
            )));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn hermitian_flag(&self) -> bool {
        self.hermitian
    }

    #[inline]
    pub fn at(&self, j: isize) -> Complex<T> {
        self.values[self.grid.position(j)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, Complex<T>)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<T> {
        self.values.iter().map(|v| v.im).collect()
    }

    pub fn map<F: FnMut(T, Complex<T>) -> Complex<T>>(&self, mut f: F) -> Self {
        let values = self.iter().map(|(w, v)| f(w, v)).collect();
        Self {
            grid: self.grid,
            values,
            hermitian: false,
        }
    }

    pub fn max_magnitude(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// `max_j |s[-ω_j] - s[ω_j]*|`.
    pub fn hermitian_residual(&self) -> T {
        let n = self.grid.half_count() as isize;
        (0..=n).fold(T::zero(), |m, j| m.max((self.at(-j) - self.at(j).conj()).norm()))
    }

    pub fn relative_hermitian_residual(&self) -> T {
        let scale = self.max_magnitude();
        if scale == T::zero() {
            T::zero()
        } else {
            self.hermitian_residual() / scale
        }
    }

    /// Linear interpolation at real `omega`; zero outside the grid.
    pub fn interpolate(&self, omega: T) -> Complex<T> {
        let x = omega / self.grid.delta();
        let n = T::from_usize_lossy(self.grid.half_count());
        if !(x.abs() <= n) {
            return Complex::new(T::zero(), T::zero());
        }
        let lo = x.floor();
        let frac = x - lo;
        let j = lo.to_isize().unwrap_or(0);
        let a = self.at(j);
        if frac == T::zero() || j == self.grid.half_count() as isize {
            return a;
        }
        let b = self.at(j + 1);
        a * (T::one() - frac) + b * frac
    }

    /// Writes `omega,re,im` CSV with 17 significant digits, preceded by
    /// `# key: value` metadata lines.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[(String, String)]) -> Result<()> {
        for (k, v) in meta {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "omega,re,im")?;
        for (omega, v) in self.iter() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", omega.as_f64(), v.re.as_f64(), v.im.as_f64())?;
        }
        Ok(())
    }

    /// Reads the CSV written by [`Self::write_csv`]; the omega column must
    /// describe a symmetric uniform grid.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers()?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        if cols != ["omega", "re", "im"] {
            return Err(Error::Parse(format!("expected columns omega,re,im, found {}", cols.join(","))));
        }
        let mut omegas = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<T> {
                let s = rec.get(i).ok_or_else(|| Error::Parse("short CSV row".into()))?;
                let x: f64 = s.parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))?;
                Ok(T::lit(x))
            };
            omegas.push(parse(0)?);
            values.push(Complex::new(parse(1)?, parse(2)?));
        }
        let grid = grid_from_points(&omegas)?;
        Self::from_values(grid, values)
    }

    pub fn to_json(&self, meta: Option<serde_json::Value>) -> serde_json::Value {
        let doc = SpectrumJson {
            grid: GridJson {
                delta: self.grid.delta().as_f64(),
                half_count: self.grid.half_count(),
            },
            values: self.values.iter().map(|v| [v.re.as_f64(), v.im.as_f64()]).collect(),
            meta,
        };
        serde_json::to_value(doc).expect("spectrum serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: SpectrumJson = serde_json::from_value(value.clone())?;
        let grid = FrequencyGrid::new(T::lit(doc.grid.delta), doc.grid.half_count)?;
        let values = doc.values.iter().map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im))).collect();
        Self::from_values(grid, values)
    }
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    delta: f64,
    half_count: usize,
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    grid: GridJson,
    values: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

/// Recovers a symmetric uniform grid from its listed points.
pub fn grid_from_points<T: Real>(points: &[T]) -> Result<FrequencyGrid<T>> {
    if points.len() < 3 || points.len() % 2 == 0 {
        return Err(Error::Parse(format!(
            "a symmetric grid needs an odd number (≥ 3) of points, found {}",
            points.len()
        )));
    }
    let n = points.len() / 2;
    let delta = (points[points.len() - 1] - points[0]) / T::from_usize_lossy(2 * n);
    let grid = FrequencyGrid::new(delta, n).map_err(|e| Error::Parse(e.to_string()))?;
    for (i, &w) in points.iter().enumerate() {
        let expected = grid.omega(grid.index(i));
        if (w - expected).abs() > T::lit(1e-9) * delta.max(expected.abs()) {
            return Err(Error::Parse(format!(
                "frequency column is not a symmetric uniform grid at row {i}"
            )));
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_grid_examples() {
        let g = FrequencyGrid::<f64>::new(0.01, 1000).unwrap();
        assert_eq!(g.len(), 2001);
        assert!((g.omega(-1000) + 10.0).abs() < 1e-12);
        assert!((g.max_omega() - 10.0).abs() < 1e-12);

        let g = FrequencyGrid::new(1.0, 1).unwrap();
        assert_eq!(g.points().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0]);

        assert!(matches!(FrequencyGrid::new(0.0, 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(FrequencyGrid::new(-0.1, 10), Err(Error::InvalidArgument(_))));
        assert!(matches!(FrequencyGrid::new(0.1, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn grid_reflection_is_exact() {
        let g = FrequencyGrid::new(0.037, 500).unwrap();
        for j in g.indices() {
            assert_eq!(g.omega(-j), -g.omega(j));
        }
        assert_eq!(g.omega(0), 0.0);
        let pts: Vec<f64> = g.points().collect();
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn hermitian_residual_examples() {
        let g = FrequencyGrid::new(0.1, 50).unwrap();
        let odd_imag = ComplexSpectrum::from_fn(g, |w| Complex::new(0.0, w));
        assert_eq!(odd_imag.hermitian_residual(), 0.0);
        let const_imag = ComplexSpectrum::from_fn(g, |_| Complex::new(0.0, 1.0));
        assert_eq!(const_imag.hermitian_residual(), 2.0);
        let even_real = ComplexSpectrum::from_fn(g, |w| Complex::new(w * w, 0.0));
        assert_eq!(even_real.hermitian_residual(), 0.0);
        assert!(const_imag.clone().assert_hermitian(1e-12).is_err());
        assert!(odd_imag.assert_hermitian(1e-12).unwrap().hermitian_flag());
    }

    #[test]
    fn index_lookup() {
        let g = FrequencyGrid::new(0.25, 8).unwrap();
        assert_eq!(g.index_of(0.75), Some(3));
        assert_eq!(g.index_of(-2.0), Some(-8));
        assert_eq!(g.index_of(0.3), None);
        assert_eq!(g.index_of(2.25), None);
    }

    #[test]
    fn interpolation() {
        let g = FrequencyGrid::new(1.0, 3).unwrap();
        let s = ComplexSpectrum::from_fn(g, |w| Complex::new(w, -2.0 * w));
        assert_eq!(s.interpolate(0.5), Complex::new(0.5, -1.0));
        assert_eq!(s.interpolate(3.0), Complex::new(3.0, -6.0));
        assert_eq!(s.interpolate(3.5), Complex::new(0.0, 0.0));
    }

    #[test]
    fn csv_layout_and_precision() {
        let g = FrequencyGrid::<f64>::new(0.1, 2).unwrap();
        let s = ComplexSpectrum::from_fn(g, |w| Complex::new(w.sin(), 1.0 / 3.0));
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &[("units".into(), "hbar = k_B = c = 1".into())]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# units: hbar = k_B = c = 1");
        assert_eq!(lines.next().unwrap(), "omega,re,im");
        let back = ComplexSpectrum::<f64>::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.grid().half_count(), 2);
        for (a, b) in s.values().iter().zip(back.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn csv_rejects_bad_grids() {
        let text = "omega,re,im\n-1,0,0\n0,0,0\n2,0,0\n";
        assert!(ComplexSpectrum::<f64>::read_csv(text.as_bytes()).is_err());
        let text = "w,re,im\n-1,0,0\n0,0,0\n1,0,0\n";
        assert!(ComplexSpectrum::<f64>::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn json_layout() {
        let g = FrequencyGrid::new(0.5, 1).unwrap();
        let s = ComplexSpectrum::from_fn(g, |w| Complex::new(w, 1.0));
        let v = s.to_json(None);
        assert_eq!(v["grid"]["delta"], 0.5);
        assert_eq!(v["grid"]["half_count"], 1);
        assert_eq!(v["values"][0], serde_json::json!([-0.5, 1.0]));
        let back = ComplexSpectrum::<f64>::from_json(&v).unwrap();
        assert_eq!(back, s);
    }
}
