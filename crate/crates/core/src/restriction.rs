//! Estimation of `(p, q)`-restriction constants for frequency sets.
//!
//! A `(p, q)`-restriction estimate for a set `S` is a constant `C` with
//!
//! ```text
//!   (1/|S| sum_{m in S} |F(m)|^q)^(1/q)  <=  C * N^-d * (sum_x |f(x)|^p)^(1/p)
//! ```
//!
//! for every signal `f`. Only `p = q = 2` admits an exact constant (via the
//! largest singular value of the sampled transform); every other pair is
//! reported as an empirical lower bound with a recorded witness signal.
//! The module also samples generic frequency sets of size `ceil(N^(2d/q))`
//! and estimates the `Lambda_q` constant of a set, which translates into a
//! `(q', 2)`-restriction bound.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fourier::{chi_table, forward_dft_fft, inverse_dft_fft, phase_dots, Signal, Spectrum};
use crate::lattice::{Grid, LatticeSet};
use crate::seeding::derive_seed;

/// How a restriction constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Exact linear-algebra computation (only `p = q = 2`).
    Exact,
    /// Maximum ratio observed over randomized witnesses; a valid lower bound
    /// on the best constant, not an upper bound.
    EmpiricalLowerBound,
    /// A constant with a proof, e.g. `C_{1,q} = 1`.
    Analytic,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::EmpiricalLowerBound => "empirical-lower-bound",
            Provenance::Analytic => "analytic",
        }
    }
}

/// A `(p, q)`-restriction constant for a frequency set.
#[derive(Debug, Clone)]
pub struct RestrictionEstimate {
    p: f64,
    q: f64,
    sigma: LatticeSet,
    constant: f64,
    provenance: Provenance,
    seed: Option<u64>,
    witness: Option<Signal>,
}

impl RestrictionEstimate {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sigma(&self) -> &LatticeSet {
        &self.sigma
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// For empirical estimates, a signal attaining the stated ratio.
    pub fn witness(&self) -> Option<&Signal> {
        self.witness.as_ref()
    }

    /// Serialize with fields `(p, q, C, provenance, seed, witness)` plus the
    /// grid and frequency set. Infinite exponents appear as the string "inf".
    pub fn to_json(&self) -> String {
        let exponent = |v: f64| {
            if v.is_finite() {
                serde_json::json!(v)
            } else {
                serde_json::json!("inf")
            }
        };
        let grid = self.sigma.grid();
        serde_json::json!({
            "p": exponent(self.p),
            "q": exponent(self.q),
            "C": self.constant,
            "provenance": self.provenance.as_str(),
            "seed": self.seed,
            "witness": self.witness.as_ref().map(|w| serde_json::from_str::<serde_json::Value>(&w.to_json()).unwrap()),
            "N": grid.modulus(),
            "d": grid.dimension(),
            "set": self.sigma.coord_rows(),
        })
        .to_string()
    }
}

/// Empirical lower bound for the `Lambda_q` constant of a set: the largest
/// observed `||f||_{L^q(mu)} / ||f||_{L^2(mu)}` over spectral polynomials
/// supported on the set, with normalized norms
/// `||f||_{L^p(mu)} = (N^-d sum_x |f(x)|^p)^(1/p)`.
#[derive(Debug, Clone)]
pub struct LambdaQEstimate {
    q: f64,
    sigma: LatticeSet,
    constant: f64,
    seed: u64,
    witness_coefficients: Vec<Complex64>,
}

impl LambdaQEstimate {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sigma(&self) -> &LatticeSet {
        &self.sigma
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Spectrum coefficients (in set order) of the maximizing polynomial.
    pub fn witness_coefficients(&self) -> &[Complex64] {
        &self.witness_coefficients
    }
}

fn validate_exponents(p: f64, q: f64) -> Result<()> {
    let ok_p = p >= 1.0 || p.is_infinite();
    let ok_q = q >= p || q.is_infinite();
    if p.is_nan() || q.is_nan() || !ok_p || !ok_q {
        return Err(Error::InvalidParameter(format!(
            "restriction exponents need 1 <= p <= q (suprema allowed), got p={p}, q={q}"
        )));
    }
    Ok(())
}

/// The ratio whose supremum over nonzero signals is the best `(p, q)`
/// constant for `sigma`. Infinite `p` or `q` switch the corresponding norm
/// to a supremum. Returns 0 for the zero signal.
pub fn restriction_ratio(f: &Signal, sigma: &LatticeSet, p: f64, q: f64) -> Result<f64> {
    validate_exponents(p, q)?;
    f.grid().check_same(&sigma.grid())?;
    if sigma.is_empty() {
        return Err(Error::EmptySet("restriction ratio needs a nonempty frequency set"));
    }
    let spectrum = forward_dft_fft(f);
    let lhs = if q.is_infinite() {
        sigma.indices().iter().map(|&m| spectrum.value_at(m).norm()).fold(0.0, f64::max)
    } else {
        let mean: f64 = sigma
            .indices()
            .iter()
            .map(|&m| spectrum.value_at(m).norm().powf(q))
            .sum::<f64>()
            / sigma.len() as f64;
        mean.powf(1.0 / q)
    };
    let signal_norm = if p.is_infinite() {
        f.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        f.values().iter().map(|v| v.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    };
    let rhs = signal_norm / f.grid().size() as f64;
    if rhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / rhs)
}

/// The `(1, q)`-restriction estimate that holds for every nonempty set with
/// constant 1.
pub fn trivial_c1q(sigma: &LatticeSet, q: f64) -> Result<RestrictionEstimate> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    if sigma.is_empty() {
        return Err(Error::EmptySet("restriction estimates need a nonempty frequency set"));
    }
    Ok(RestrictionEstimate {
        p: 1.0,
        q,
        sigma: sigma.clone(),
        constant: 1.0,
        provenance: Provenance::Analytic,
        seed: None,
        witness: None,
    })
}

/// Default bound on `N^d` for the exact singular-value computation.
pub const DEFAULT_LINALG_CAP: usize = 4096;

/// The smallest valid `C_{2,2}` for `sigma`: the largest singular value of
/// `f -> |S|^(-1/2) (F(m))_{m in S}`, divided by `N^-d`. Computed from the
/// eigenvalues of the map's Gram matrix.
pub fn exact_c22(sigma: &LatticeSet) -> Result<RestrictionEstimate> {
    exact_c22_with_cap(sigma, DEFAULT_LINALG_CAP)
}

/// [`exact_c22`] with an explicit cap on `N^d`.
pub fn exact_c22_with_cap(sigma: &LatticeSet, cap: usize) -> Result<RestrictionEstimate> {
    if sigma.is_empty() {
        return Err(Error::EmptySet("exact constant needs a nonempty frequency set"));
    }
    let grid = sigma.grid();
    let s = grid.size();
    if s > cap {
        return Err(Error::CapExceeded {
            what: "exact restriction constant",
            needed: s as u128,
            cap: cap as u128,
        });
    }

    let k = sigma.len();
    let table = chi_table(grid.modulus());
    let scale_sq = 1.0 / (k as f64 * (s as f64) * (s as f64)); // (|S|^(-1/2) N^-d)^2
    let mut gram = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
    let mut dots_a = Vec::new();
    let mut dots_b = Vec::new();
    for (ai, &ma) in sigma.indices().iter().enumerate() {
        phase_dots(&grid, ma, &mut dots_a);
        for (bi, &mb) in sigma.indices().iter().enumerate().skip(ai) {
            phase_dots(&grid, mb, &mut dots_b);
            // <row_a, row_b> with row_m[x] proportional to chi(-x.m)
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..s {
                acc += table[dots_a[x]].conj() * table[dots_b[x]];
            }
            let entry = acc * scale_sq;
            gram[(ai, bi)] = entry;
            gram[(bi, ai)] = entry.conj();
        }
    }

    let eigen = SymmetricEigen::new(gram);
    let lambda_max = eigen.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let constant = lambda_max.max(0.0).sqrt() * s as f64;
    Ok(RestrictionEstimate {
        p: 2.0,
        q: 2.0,
        sigma: sigma.clone(),
        constant,
        provenance: Provenance::Exact,
        seed: None,
        witness: None,
    })
}

/// Finite-difference step for the gradient refinement.
const GRAD_FD_STEP: f64 = 1e-5;
/// Number of normalized-gradient ascent iterations.
const GRAD_ITERS: usize = 100;

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A box of random extents per axis, modulated by the character of `m0`.
fn modulated_box(grid: &Grid, m0: usize, rng: &mut ChaCha8Rng) -> Signal {
    let n = grid.modulus();
    let d = grid.dimension();
    let starts: Vec<usize> = (0..d).map(|_| rng.gen_range(0..n)).collect();
    let lens: Vec<usize> = (0..d).map(|_| rng.gen_range(1..=n)).collect();
    let table = chi_table(n);
    let mut dots = Vec::new();
    phase_dots(grid, m0, &mut dots);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.size()];
    for (x, value) in values.iter_mut().enumerate() {
        let coords = grid.point_at(x);
        let inside = coords
            .coords()
            .iter()
            .zip(starts.iter().zip(&lens))
            .all(|(&c, (&start, &len))| (c + n - start) % n < len);
        if inside {
            *value = table[dots[x]];
        }
    }
    Signal::new(*grid, values).expect("modulated box values are finite")
}

fn signal_l2(f: &Signal) -> f64 {
    f.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximize the restriction ratio over random signal families, then refine
/// the best candidate with normalized-gradient ascent (central differences,
/// step 1e-5, 100 iterations). The result is an empirical lower bound with a
/// recorded witness and seed; given a seed the output is deterministic.
///
/// Families, cycled per trial: complex Gaussian noise, k-sparse spikes for
/// k in {1, 2, 4}, and modulated box indicators with the modulating frequency
/// drawn from `sigma` or from the whole grid.
pub fn empirical_cpq(
    sigma: &LatticeSet,
    p: f64,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<RestrictionEstimate> {
    validate_exponents(p, q)?;
    if sigma.is_empty() {
        return Err(Error::EmptySet("restriction estimates need a nonempty frequency set"));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let grid = sigma.grid();
    let s = grid.size();

    let mut best_ratio = f64::NEG_INFINITY;
    let mut best_signal: Option<Signal> = None;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
        let f = match t % 4 {
            0 => {
                let values = (0..s).map(|_| gaussian(&mut rng)).collect();
                Signal::new(grid, values)?
            }
            1 => {
                let k = [1usize, 2, 4][(t / 4) % 3].min(s);
                let mut values = vec![Complex64::new(0.0, 0.0); s];
                for i in sample_indices(&mut rng, s, k) {
                    values[i] = gaussian(&mut rng);
                }
                Signal::new(grid, values)?
            }
            2 => {
                let m0 = sigma.indices()[rng.gen_range(0..sigma.len())];
                modulated_box(&grid, m0, &mut rng)
            }
            _ => {
                let m0 = rng.gen_range(0..s);
                modulated_box(&grid, m0, &mut rng)
            }
        };
        let ratio = restriction_ratio(&f, sigma, p, q)?;
        if ratio > best_ratio {
            best_ratio = ratio;
            best_signal = Some(f);
        }
    }

    let mut witness = best_signal.expect("at least one trial ran");
    let mut ratio = best_ratio;
    let mut step = 1e-2 * signal_l2(&witness).max(1e-6);
    'ascent: for _ in 0..GRAD_ITERS {
        let mut grad = vec![Complex64::new(0.0, 0.0); s];
        let mut grad_norm_sq = 0.0;
        for i in 0..s {
            let diff = |delta: Complex64| -> Result<f64> {
                let mut values = witness.values().to_vec();
                values[i] += delta;
                let plus = restriction_ratio(&Signal::new(grid, values.clone())?, sigma, p, q)?;
                values[i] -= delta + delta;
                let minus = restriction_ratio(&Signal::new(grid, values)?, sigma, p, q)?;
                Ok((plus - minus) / (2.0 * GRAD_FD_STEP))
            };
            let g_re = diff(Complex64::new(GRAD_FD_STEP, 0.0))?;
            let g_im = diff(Complex64::new(0.0, GRAD_FD_STEP))?;
            grad[i] = Complex64::new(g_re, g_im);
            grad_norm_sq += g_re * g_re + g_im * g_im;
        }
        let grad_norm = grad_norm_sq.sqrt();
        if grad_norm == 0.0 {
            break;
        }
        loop {
            let scale = step / grad_norm;
            let values: Vec<Complex64> = witness
                .values()
                .iter()
                .zip(&grad)
                .map(|(v, g)| v + g * scale)
                .collect();
            let candidate = Signal::new(grid, values)?;
            let candidate_ratio = restriction_ratio(&candidate, sigma, p, q)?;
            if candidate_ratio > ratio {
                witness = candidate;
                ratio = candidate_ratio;
                break;
            }
            step /= 2.0;
            if step < 1e-12 {
                break 'ascent;
            }
        }
    }

    Ok(RestrictionEstimate {
        p,
        q,
        sigma: sigma.clone(),
        constant: ratio,
        provenance: Provenance::EmpiricalLowerBound,
        seed: Some(seed),
        witness: Some(witness),
    })
}

/// A uniformly random subset of size `ceil(N^(2d/q))`, sampled without
/// replacement; deterministic for a given seed. Requires `q > 2`.
pub fn bourgain_generic_set(grid: Grid, q: f64, seed: u64) -> Result<LatticeSet> {
    if !(q > 2.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("generic sets need finite q > 2, got {q}")));
    }
    let s = grid.size();
    let raw = (s as f64).powf(2.0 / q);
    // Snap near-integers before taking the ceiling so float noise in powf
    // cannot inflate the size by one.
    let size = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() } as usize;
    let size = size.clamp(1, s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LatticeSet::from_indices(grid, sample_indices(&mut rng, s, size).into_vec())
}

/// Estimate the `Lambda_q` constant of a set: the largest observed
/// `||f||_{L^q(mu)} / ||f||_{L^2(mu)}` over random spectral polynomials
/// `f = sum_{m in Sigma} c_m chi(x.m)`. Trial 0 uses the all-ones
/// coefficient vector; later trials draw complex Gaussian coefficients.
pub fn empirical_lambda_q(
    sigma: &LatticeSet,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<LambdaQEstimate> {
    if !(q > 2.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("Lambda_q needs finite q > 2, got {q}")));
    }
    if sigma.is_empty() {
        return Err(Error::EmptySet("Lambda_q estimates need a nonempty frequency set"));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let grid = sigma.grid();
    let s = grid.size();

    let mut best = f64::NEG_INFINITY;
    let mut best_coeffs = Vec::new();
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
        let coeffs: Vec<Complex64> = if t == 0 {
            vec![Complex64::new(1.0, 0.0); sigma.len()]
        } else {
            (0..sigma.len()).map(|_| gaussian(&mut rng)).collect()
        };
        let mut spectrum_values = vec![Complex64::new(0.0, 0.0); s];
        for (&m, &c) in sigma.indices().iter().zip(&coeffs) {
            spectrum_values[m] = c;
        }
        let f = inverse_dft_fft(&Spectrum::new(grid, spectrum_values)?);
        let mean_q: f64 =
            f.values().iter().map(|v| v.norm().powf(q)).sum::<f64>() / s as f64;
        let mean_2: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / s as f64;
        if mean_2 == 0.0 {
            continue;
        }
        let ratio = mean_q.powf(1.0 / q) / mean_2.sqrt();
        if ratio > best {
            best = ratio;
            best_coeffs = coeffs;
        }
    }

    Ok(LambdaQEstimate {
        q,
        sigma: sigma.clone(),
        constant: best,
        seed,
        witness_coefficients: best_coeffs,
    })
}

/// Translate a `Lambda_q` bound into a `(q', 2)`-restriction estimate with
/// `q' = q/(q-1)` and constant `C(q) * (N^(2d/q) / |Sigma|)^(1/2)`. The
/// result inherits the empirical-lower-bound provenance of its input.
pub fn lambda_to_restriction(est: &LambdaQEstimate, grid: Grid) -> Result<RestrictionEstimate> {
    grid.check_same(&est.sigma.grid())?;
    let q = est.q;
    let s = grid.size() as f64;
    let factor = (s.powf(2.0 / q) / est.sigma.len() as f64).sqrt();
    Ok(RestrictionEstimate {
        p: q / (q - 1.0),
        q: 2.0,
        sigma: est.sigma.clone(),
        constant: est.constant * factor,
        provenance: Provenance::EmpiricalLowerBound,
        seed: Some(est.seed),
        witness: None,
    })
}
