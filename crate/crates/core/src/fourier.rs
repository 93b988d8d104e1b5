//! The discrete Fourier transform on `Z_N^d` with the normalization
//!
//! ```text
//!   F(m) = N^-d * sum_x chi(-x.m) f(x),      chi(t) = exp(2 pi i t / N)
//!   f(x) =        sum_m chi(+x.m) F(m)
//! ```
//!
//! so the `N^-d` factor sits on the forward transform. The default
//! implementation applies the transform matrix directly; an equivalent
//! per-axis FFT path ([`forward_dft_fft`], [`inverse_dft_fft`]) is provided
//! for larger grids and the two must agree to within 1e-10.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Grid, LatticeSet};

/// Complex-valued function on `Z_N^d` in the space domain, stored densely in
/// canonical (row-major) order.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: Grid,
    values: Vec<Complex64>,
}

/// Complex-valued function on the (self-dual) frequency domain of `Z_N^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    values: Vec<Complex64>,
}

fn check_dense(grid: &Grid, values: &[Complex64], what: &'static str) -> Result<()> {
    if values.len() != grid.size() {
        return Err(Error::InvalidParameter(format!(
            "{what} has {} values but the grid has {} points",
            values.len(),
            grid.size()
        )));
    }
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

macro_rules! dense_impl {
    ($ty:ident, $what:literal) => {
        impl $ty {
            pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
                check_dense(&grid, &values, $what)?;
                Ok(Self { grid, values })
            }

            pub fn zero(grid: Grid) -> Self {
                let values = vec![Complex64::new(0.0, 0.0); grid.size()];
                Self { grid, values }
            }

            pub fn grid(&self) -> Grid {
                self.grid
            }

            /// Values in canonical order.
            pub fn values(&self) -> &[Complex64] {
                &self.values
            }

            pub fn value_at(&self, index: usize) -> Complex64 {
                self.values[index]
            }

            /// Serialize to the `{"N", "d", "values": [[re, im], ...]}` JSON form.
            pub fn to_json(&self) -> String {
                serde_json::to_string(&DenseJson::from_parts(self.grid, &self.values))
                    .expect("dense json never fails to serialize")
            }

            /// Parse the `{"N", "d", "values": [[re, im], ...]}` JSON form.
            pub fn from_json(text: &str) -> Result<Self> {
                let dto: DenseJson = serde_json::from_str(text)?;
                let (grid, values) = dto.into_parts()?;
                Self::new(grid, values)
            }
        }
    };
}

dense_impl!(Signal, "signal");
dense_impl!(Spectrum, "spectrum");

impl Signal {
    /// The indicator function `1_E`.
    pub fn indicator(set: &LatticeSet) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); set.grid().size()];
        for &i in set.indices() {
            values[i] = Complex64::new(1.0, 0.0);
        }
        Self { grid: set.grid(), values }
    }
}

#[derive(Serialize, Deserialize)]
struct DenseJson {
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    values: Vec<[f64; 2]>,
}

impl DenseJson {
    fn from_parts(grid: Grid, values: &[Complex64]) -> Self {
        Self {
            n: grid.modulus(),
            d: grid.dimension(),
            values: values.iter().map(|v| [v.re, v.im]).collect(),
        }
    }

    fn into_parts(self) -> Result<(Grid, Vec<Complex64>)> {
        let grid = Grid::new(self.n, self.d)?;
        let values = self.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok((grid, values))
    }
}

/// Table of `chi(t) = exp(2 pi i t / N)` for `t` in `[0, N)`.
pub(crate) fn chi_table(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|t| {
            let angle = 2.0 * std::f64::consts::PI * t as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Fill `out[x] = (x . m) mod N` for every point index `x` in canonical order.
///
/// Built axis by axis so the whole table costs `O(N^d)` additions.
pub(crate) fn phase_dots(grid: &Grid, m_index: usize, out: &mut Vec<usize>) {
    let n = grid.modulus();
    let d = grid.dimension();
    let mut m_coords = vec![0usize; d];
    let mut rest = m_index;
    for k in (0..d).rev() {
        m_coords[k] = rest % n;
        rest /= n;
    }

    out.clear();
    out.resize(grid.size(), 0);
    let mut len = 1usize;
    for &mk in &m_coords {
        for i in (0..len).rev() {
            let base = out[i];
            let mut t = base;
            let row = i * n;
            for c in 0..n {
                out[row + c] = t;
                t += mk;
                if t >= n {
                    t -= n;
                }
            }
        }
        len *= n;
    }
}

/// Forward transform by direct summation: `F(m) = N^-d sum_x chi(-x.m) f(x)`.
pub fn forward_dft(f: &Signal) -> Spectrum {
    let grid = f.grid;
    let n = grid.modulus();
    let s = grid.size();
    let table = chi_table(n);
    let scale = 1.0 / s as f64;
    let mut dots = Vec::new();
    let mut values = Vec::with_capacity(s);
    for m in 0..s {
        phase_dots(&grid, m, &mut dots);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &t) in dots.iter().enumerate() {
            // chi(-x.m) = conj(chi(x.m))
            acc += table[t].conj() * f.values[x];
        }
        values.push(acc * scale);
    }
    Spectrum { grid, values }
}

/// Inverse transform by direct summation: `f(x) = sum_m chi(x.m) F(m)`.
pub fn inverse_dft(spectrum: &Spectrum) -> Signal {
    let grid = spectrum.grid;
    let n = grid.modulus();
    let s = grid.size();
    let table = chi_table(n);
    let mut dots = Vec::new();
    let mut values = Vec::with_capacity(s);
    for x in 0..s {
        phase_dots(&grid, x, &mut dots);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &t) in dots.iter().enumerate() {
            acc += table[t] * spectrum.values[m];
        }
        values.push(acc);
    }
    Signal { grid, values }
}

enum Direction {
    Forward,
    Inverse,
}

fn fft_all_axes(grid: &Grid, values: &mut [Complex64], direction: Direction) {
    let n = grid.modulus();
    let d = grid.dimension();
    let mut planner = FftPlanner::<f64>::new();
    let fft = match direction {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        let blocks = grid.size() / block;
        for hi in 0..blocks {
            for lo in 0..stride {
                let start = hi * block + lo;
                for c in 0..n {
                    line[c] = values[start + c * stride];
                }
                fft.process(&mut line);
                for c in 0..n {
                    values[start + c * stride] = line[c];
                }
            }
        }
    }
}

/// Per-axis FFT version of [`forward_dft`]; same normalization, same result
/// within 1e-10.
pub fn forward_dft_fft(f: &Signal) -> Spectrum {
    let mut values = f.values.clone();
    fft_all_axes(&f.grid, &mut values, Direction::Forward);
    let scale = 1.0 / f.grid.size() as f64;
    for v in &mut values {
        *v *= scale;
    }
    Spectrum { grid: f.grid, values }
}

/// Per-axis FFT version of [`inverse_dft`].
pub fn inverse_dft_fft(spectrum: &Spectrum) -> Signal {
    let mut values = spectrum.values.clone();
    fft_all_axes(&spectrum.grid, &mut values, Direction::Inverse);
    Signal { grid: spectrum.grid, values }
}

/// Relative defect of the Plancherel identity
/// `sum_x |f(x)|^2 = N^d sum_m |F(m)|^2`:
/// returns `|lhs - rhs| / max(1, lhs)`, zero in exact arithmetic.
pub fn plancherel_defect(f: &Signal) -> f64 {
    let spectrum = forward_dft(f);
    let lhs: f64 = f.values.iter().map(|v| v.norm_sqr()).sum();
    let rhs: f64 = f.grid.size() as f64 * spectrum.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
    (lhs - rhs).abs() / lhs.max(1.0)
}

/// The frequency-limiting projection `(P_Sigma f)(x) = sum_{m in Sigma} chi(x.m) F(m)`.
pub fn frequency_limit(f: &Signal, sigma: &LatticeSet) -> Result<Signal> {
    f.grid.check_same(&sigma.grid())?;
    let mut spectrum = forward_dft(f);
    let mask = sigma.mask();
    for (m, v) in spectrum.values.iter_mut().enumerate() {
        if !mask[m] {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    Ok(inverse_dft(&spectrum))
}

/// Numerical support extraction: `{ m : |F(m)| > tol }`.
pub fn spectrum_support(spectrum: &Spectrum, tol: f64) -> Result<LatticeSet> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("support tolerance must be >= 0, got {tol}")));
    }
    let indices = spectrum
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > tol)
        .map(|(m, _)| m)
        .collect();
    LatticeSet::from_indices(spectrum.grid, indices)
}

/// Default tolerance used when extracting numerical spectrum supports.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-9;
