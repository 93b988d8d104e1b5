//! The frequency-erasure channel and recovery of Dirac combs from partial
//! spectra.
//!
//! Three reconstruction routes are provided:
//!
//! - [`dra_recover`]: direct rounding. Synthesize `I(x)` from the surviving
//!   frequencies and round each value to the nearest member of the known
//!   coefficient set; exact whenever every rounding margin stays strictly
//!   below `delta / 2`.
//! - [`ls_support_search`]: solve a least-squares problem over every
//!   candidate support of a fixed size and keep the global minimizer.
//! - [`brute_force_unique`]: enumerate every comb over a coefficient family
//!   and return all that are consistent with the observed frequencies. This
//!   enumeration shares no logic with the two algorithms above and serves as
//!   their ground-truth oracle.
//!
//! Condition checkers report, for each recovery theorem variant, the exact
//! left and right sides of its strict inequality.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{seq::index::sample as sample_indices, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::comb::{part_mass, CoefficientSet, DiracComb};
use crate::error::{Error, Result};
use crate::fourier::{chi_table, forward_dft, inverse_dft, phase_dots, Signal, Spectrum};
use crate::lattice::{Grid, LatticeSet};

/// A spectrum with the frequencies in an erasure set `S` dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSpectrum {
    grid: Grid,
    erased: LatticeSet,
    /// One entry per canonical frequency index; `None` exactly on `S`.
    values: Vec<Option<Complex64>>,
}

impl ObservedSpectrum {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn erased(&self) -> &LatticeSet {
        &self.erased
    }

    /// Value at frequency `m`, or `None` if `m` was erased.
    pub fn value_at(&self, m: usize) -> Option<Complex64> {
        self.values[m]
    }

    /// Canonical indices of the surviving frequencies.
    pub fn observed_indices(&self) -> Vec<usize> {
        (0..self.grid.size()).filter(|&m| self.values[m].is_some()).collect()
    }

    /// The spectrum with zeros substituted on the erasure set; its inverse
    /// transform is the partial reconstruction `I(x)`.
    pub fn zero_filled(&self) -> Spectrum {
        let values = self
            .values
            .iter()
            .map(|v| v.unwrap_or(Complex64::new(0.0, 0.0)))
            .collect();
        Spectrum::new(self.grid, values).expect("observed values are finite")
    }

    /// Largest `|G(m) - observed(m)|` over surviving frequencies.
    pub fn spectral_distance(&self, spectrum: &Spectrum) -> Result<f64> {
        self.grid.check_same(&spectrum.grid())?;
        let mut max = 0.0f64;
        for (m, v) in self.values.iter().enumerate() {
            if let Some(v) = v {
                max = max.max((spectrum.value_at(m) - v).norm());
            }
        }
        Ok(max)
    }

    pub fn to_json(&self) -> String {
        let observed: Vec<serde_json::Value> = (0..self.grid.size())
            .filter_map(|m| {
                self.values[m].map(|v| {
                    serde_json::json!({
                        "m": self.grid.point_at(m).coords(),
                        "value": [v.re, v.im],
                    })
                })
            })
            .collect();
        serde_json::json!({
            "N": self.grid.modulus(),
            "d": self.grid.dimension(),
            "erased": self.erased.coord_rows(),
            "observed": observed,
        })
        .to_string()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct ObservedEntry {
            m: Vec<i64>,
            value: [f64; 2],
        }
        #[derive(Deserialize)]
        struct Dto {
            #[serde(rename = "N")]
            n: usize,
            d: usize,
            erased: Vec<Vec<i64>>,
            observed: Vec<ObservedEntry>,
        }
        let dto: Dto = serde_json::from_str(text)?;
        let grid = Grid::new(dto.n, dto.d)?;
        let erased = LatticeSet::from_coords(grid, &dto.erased)?;
        let mut values = vec![None; grid.size()];
        for entry in &dto.observed {
            let m = grid.point(&entry.m)?.index();
            if erased.contains_index(m) {
                return Err(Error::Json(format!("frequency index {m} is both erased and observed")));
            }
            if values[m].is_some() {
                return Err(Error::Json(format!("frequency index {m} observed twice")));
            }
            values[m] = Some(Complex64::new(entry.value[0], entry.value[1]));
        }
        for (m, v) in values.iter().enumerate() {
            if v.is_none() && !erased.contains_index(m) {
                return Err(Error::Json(format!(
                    "frequency index {m} is neither erased nor observed"
                )));
            }
        }
        if erased.len() == grid.size() {
            return Err(Error::TotalErasure);
        }
        Ok(Self { grid, erased, values })
    }
}

/// Drop the frequencies in `s`; lossless elsewhere. `s` must be a proper
/// subset of the grid.
pub fn erase(spectrum: &Spectrum, s: &LatticeSet) -> Result<ObservedSpectrum> {
    spectrum.grid().check_same(&s.grid())?;
    if s.len() == spectrum.grid().size() {
        return Err(Error::TotalErasure);
    }
    let mask = s.mask();
    let values = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(m, &v)| if mask[m] { None } else { Some(v) })
        .collect();
    Ok(ObservedSpectrum { grid: spectrum.grid(), erased: s.clone(), values })
}

/// Uniformly random erasure set of the given size, without replacement;
/// deterministic for a given seed.
pub fn sample_erasure_set(grid: Grid, size: usize, seed: u64) -> Result<LatticeSet> {
    if size > grid.size() {
        return Err(Error::InvalidParameter(format!(
            "erasure size {size} exceeds grid size {}",
            grid.size()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LatticeSet::from_indices(grid, sample_indices(&mut rng, grid.size(), size).into_vec())
}

// ---------------------------------------------------------------------------
// Recovery conditions
// ---------------------------------------------------------------------------

/// The strict-inequality recovery conditions. Names describe the shape of
/// the right-hand side rather than any source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryCondition {
    /// `|E| * |S| < N^d / 2` for plainly supported signals.
    #[serde(rename = "classical")]
    Classical,
    /// `|A_1| * |S| < N^d / (4 (g^2 + 2g)) * (delta/M)^2`, known effective mass, p = 2.
    #[serde(rename = "comb-squared")]
    CombSquared,
    /// `|A_1|^(1/p) * |S| < N^d / (2 C (g^2 + 2g)^(1/p)) * (delta/M)`, restriction on `S`.
    #[serde(rename = "comb-restricted")]
    CombRestricted,
    /// `|A_1| * |S| < N^d / (4g) * (delta/M)^2`, known coefficients, p = 2.
    #[serde(rename = "dra-squared")]
    DraSquared,
    /// `|A_1| * |S| < N^d / (2g) * (delta/M)`, known coefficients, p = 1.
    #[serde(rename = "dra-linear")]
    DraLinear,
    /// `|A_1|^(1/p) * |S| < N^d / (2 C g^(1/p)) * (delta/M)`, restriction on `S`.
    #[serde(rename = "dra-restricted")]
    DraRestricted,
}

impl RecoveryCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecoveryCondition::Classical => "classical",
            RecoveryCondition::CombSquared => "comb-squared",
            RecoveryCondition::CombRestricted => "comb-restricted",
            RecoveryCondition::DraSquared => "dra-squared",
            RecoveryCondition::DraLinear => "dra-linear",
            RecoveryCondition::DraRestricted => "dra-restricted",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "classical" => Ok(RecoveryCondition::Classical),
            "comb-squared" => Ok(RecoveryCondition::CombSquared),
            "comb-restricted" => Ok(RecoveryCondition::CombRestricted),
            "dra-squared" => Ok(RecoveryCondition::DraSquared),
            "dra-linear" => Ok(RecoveryCondition::DraLinear),
            "dra-restricted" => Ok(RecoveryCondition::DraRestricted),
            other => Err(Error::InvalidParameter(format!("unknown condition variant '{other}'"))),
        }
    }
}

/// Everything a condition checker looks at.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionInputs {
    pub n: usize,
    pub d: usize,
    pub gamma: usize,
    pub delta: f64,
    pub m_bound: f64,
    pub p: f64,
    /// Effective-support size (total support size for the classical check).
    pub a1_size: usize,
    pub s_size: usize,
    /// Restriction constant for the erasure set, required by the restricted
    /// variants.
    pub restriction_constant: Option<f64>,
}

impl ConditionInputs {
    /// Extract the inputs from a comb: `gamma`, `delta`, `M` from the comb,
    /// `a1_size` from its `p`-effective support.
    pub fn for_comb(comb: &DiracComb, p: f64, s_size: usize) -> Result<Self> {
        let triple = comb.effective_triple(p)?;
        Ok(Self {
            n: comb.grid().modulus(),
            d: comb.grid().dimension(),
            gamma: comb.gamma(),
            delta: comb.delta(),
            m_bound: comb.m_bound(),
            p,
            a1_size: triple.support.len(),
            s_size,
            restriction_constant: None,
        })
    }

    pub fn with_restriction_constant(mut self, c: f64) -> Self {
        self.restriction_constant = Some(c);
        self
    }

    fn grid_size(&self) -> u128 {
        (self.n as u128).pow(self.d as u32)
    }
}

/// Advisory bounds under which a comb condition can hold at all: the largest
/// meaningful complexity and the smallest meaningful `delta / M`. Reported,
/// never enforced.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeaningfulnessBounds {
    pub gamma_max: f64,
    pub min_delta_ratio: f64,
    pub gamma_within: bool,
    pub ratio_within: bool,
}

/// The evaluated inequality of one condition variant.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: RecoveryCondition,
    pub inputs: ConditionInputs,
    pub lhs: f64,
    pub rhs: f64,
    /// Strictly `lhs < rhs`; the classical variant is compared in exact
    /// integer arithmetic.
    pub holds: bool,
    pub advisory: Option<MeaningfulnessBounds>,
}

/// The baseline support-size condition `|E| * |S| < N^d / 2`, compared
/// exactly in integers.
pub fn check_classical(e_size: usize, s_size: usize, grid: Grid) -> ConditionReport {
    let inputs = ConditionInputs {
        n: grid.modulus(),
        d: grid.dimension(),
        gamma: 1,
        delta: 1.0,
        m_bound: 1.0,
        p: 1.0,
        a1_size: e_size,
        s_size,
        restriction_constant: None,
    };
    let product = e_size as u128 * s_size as u128;
    let holds = 2 * product < inputs.grid_size();
    ConditionReport {
        condition: RecoveryCondition::Classical,
        inputs: inputs.clone(),
        lhs: product as f64,
        rhs: inputs.grid_size() as f64 / 2.0,
        holds,
        advisory: None,
    }
}

/// Variant selector for the known-effective-mass conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombRecoveryVariant {
    /// p = 2, no restriction estimate.
    MassSquared,
    /// `(p, q)`-restriction estimate for the erasure set.
    Restricted,
}

/// Variant selector for the known-coefficient-set conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DraVariant {
    /// p = 2, no restriction estimate.
    Squared,
    /// p = 1, no restriction estimate.
    Linear,
    /// `(p, q)`-restriction estimate for the erasure set.
    Restricted,
}

/// Check a known-effective-mass recovery condition; also reports the
/// advisory meaningfulness bounds on `gamma` and `delta / M`.
pub fn check_comb_recovery(
    inputs: &ConditionInputs,
    variant: CombRecoveryVariant,
) -> Result<ConditionReport> {
    let condition = match variant {
        CombRecoveryVariant::MassSquared => RecoveryCondition::CombSquared,
        CombRecoveryVariant::Restricted => RecoveryCondition::CombRestricted,
    };
    check_condition(inputs, condition)
}

/// Check a known-coefficient-set recovery condition.
pub fn check_dra(inputs: &ConditionInputs, variant: DraVariant) -> Result<ConditionReport> {
    let condition = match variant {
        DraVariant::Squared => RecoveryCondition::DraSquared,
        DraVariant::Linear => RecoveryCondition::DraLinear,
        DraVariant::Restricted => RecoveryCondition::DraRestricted,
    };
    check_condition(inputs, condition)
}

/// Evaluate any condition variant against the inputs.
pub fn check_condition(
    inputs: &ConditionInputs,
    condition: RecoveryCondition,
) -> Result<ConditionReport> {
    if condition == RecoveryCondition::Classical {
        let grid = Grid::new(inputs.n, inputs.d)?;
        return Ok(check_classical(inputs.a1_size, inputs.s_size, grid));
    }
    if inputs.gamma == 0 {
        return Err(Error::ZeroComb);
    }
    if !(inputs.delta > 0.0) || !(inputs.m_bound > 0.0) {
        return Err(Error::InvalidParameter("delta and M must be positive".into()));
    }
    let needs_c = matches!(
        condition,
        RecoveryCondition::CombRestricted | RecoveryCondition::DraRestricted
    );
    let c = match (needs_c, inputs.restriction_constant) {
        (true, Some(c)) if c > 0.0 => Some(c),
        (true, _) => {
            return Err(Error::InvalidParameter(format!(
                "{} requires a positive restriction constant for the erasure set",
                condition.as_str()
            )))
        }
        (false, _) => None,
    };
    let expected_p = match condition {
        RecoveryCondition::CombSquared | RecoveryCondition::DraSquared => Some(2.0),
        RecoveryCondition::DraLinear => Some(1.0),
        _ => None,
    };
    if let Some(expected) = expected_p {
        if inputs.p != expected {
            return Err(Error::InvalidParameter(format!(
                "{} uses the p = {expected} effective support, inputs carry p = {}",
                condition.as_str(),
                inputs.p
            )));
        }
    }

    let nd = inputs.grid_size() as f64;
    let gamma = inputs.gamma as f64;
    let ratio = inputs.delta / inputs.m_bound;
    let a1 = inputs.a1_size as f64;
    let s = inputs.s_size as f64;
    let p = inputs.p;

    let (lhs, rhs, advisory) = match condition {
        RecoveryCondition::CombSquared => {
            let pigeon = gamma * gamma + 2.0 * gamma;
            let rhs = nd / (4.0 * pigeon) * ratio * ratio;
            let advisory = MeaningfulnessBounds {
                gamma_max: (nd / 4.0 * ratio * ratio + 1.0).sqrt() - 1.0,
                min_delta_ratio: (nd / 12.0).powf(-0.5),
                gamma_within: gamma <= (nd / 4.0 * ratio * ratio + 1.0).sqrt() - 1.0,
                ratio_within: ratio >= (nd / 12.0).powf(-0.5),
            };
            (a1 * s, rhs, Some(advisory))
        }
        RecoveryCondition::CombRestricted => {
            let c = c.unwrap();
            let pigeon = gamma * gamma + 2.0 * gamma;
            let rhs = nd / (2.0 * c * pigeon.powf(1.0 / p)) * ratio;
            let gamma_max = ((nd / (2.0 * c) * ratio).powf(p) + 1.0).sqrt() - 1.0;
            let min_ratio = 2.0 / nd * c * 3.0f64.powf(1.0 / p);
            let advisory = MeaningfulnessBounds {
                gamma_max,
                min_delta_ratio: min_ratio,
                gamma_within: gamma <= gamma_max,
                ratio_within: ratio >= min_ratio,
            };
            (a1.powf(1.0 / p) * s, rhs, Some(advisory))
        }
        RecoveryCondition::DraSquared => (a1 * s, nd / (4.0 * gamma) * ratio * ratio, None),
        RecoveryCondition::DraLinear => (a1 * s, nd / (2.0 * gamma) * ratio, None),
        RecoveryCondition::DraRestricted => {
            let c = c.unwrap();
            (a1.powf(1.0 / p) * s, nd / (2.0 * c * gamma.powf(1.0 / p)) * ratio, None)
        }
        RecoveryCondition::Classical => unreachable!("handled above"),
    };

    Ok(ConditionReport { condition, inputs: inputs.clone(), lhs, rhs, holds: lhs < rhs, advisory })
}

// ---------------------------------------------------------------------------
// Recovery outcomes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryStatus {
    #[serde(rename = "recovered")]
    Recovered,
    #[serde(rename = "ambiguous")]
    Ambiguous,
    #[serde(rename = "failed")]
    Failed,
}

impl RecoveryStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecoveryStatus::Recovered => "recovered",
            RecoveryStatus::Ambiguous => "ambiguous",
            RecoveryStatus::Failed => "failed",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "recovered" => Ok(RecoveryStatus::Recovered),
            "ambiguous" => Ok(RecoveryStatus::Ambiguous),
            "failed" => Ok(RecoveryStatus::Failed),
            other => Err(Error::InvalidParameter(format!("unknown recovery status '{other}'"))),
        }
    }
}

/// One evaluated least-squares candidate.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateFit {
    /// Support as coordinate rows.
    pub support: Vec<Vec<usize>>,
    pub residual: f64,
    pub underdetermined: bool,
}

/// Evidence attached to a [`RecoveryOutcome`].
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Direct rounding: the worst rounding margin against the `delta / 2`
    /// limit, plus the spectral residual of the reconstruction.
    Rounding {
        max_margin: f64,
        margin_limit: f64,
        spectral_residual: Option<f64>,
        /// Points whose nearest coefficient was an exact tie.
        tie_points: Vec<Vec<usize>>,
    },
    /// Least squares: the best fit, the runner-up, and every near-tie.
    LeastSquares {
        best: CandidateFit,
        runner_up: Option<CandidateFit>,
        near_ties: Vec<CandidateFit>,
        /// Near-ties beyond the stored list.
        near_tie_overflow: usize,
        evaluated: u64,
    },
    /// Oracle enumeration: how many candidates were consistent.
    Enumeration { consistent: usize, candidates: u128 },
}

/// Result of a recovery attempt.
#[derive(Debug, Clone)]
pub struct RecoveryOutcome {
    pub status: RecoveryStatus,
    /// The reconstruction; present exactly when `status` is `Recovered`, in
    /// which case its spectrum matches the observed frequencies within 1e-8.
    pub result: Option<DiracComb>,
    pub certificate: Certificate,
}

impl RecoveryOutcome {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "status": self.status.as_str(),
            "result": self.result.as_ref().map(|c| {
                serde_json::from_str::<serde_json::Value>(&c.to_json()).unwrap()
            }),
            "certificate": self.certificate,
        })
        .to_string()
    }
}

/// Spectral residual below which a reconstruction counts as matching the
/// observed frequencies.
pub const RECOVERY_RESIDUAL_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Direct rounding
// ---------------------------------------------------------------------------

/// Reconstruct by rounding: compute `I(x)` from the surviving frequencies
/// and round each value to the nearest member of `coefficients`.
///
/// Recovered only if every rounding margin is strictly below `delta / 2`
/// and the rounded comb reproduces the observed frequencies within
/// [`RECOVERY_RESIDUAL_TOL`]. A margin at or above `delta / 2`, or an exact
/// nearest-coefficient tie, is reported as ambiguous rather than guessed.
pub fn dra_recover(obs: &ObservedSpectrum, coefficients: &CoefficientSet) -> Result<RecoveryOutcome> {
    let grid = obs.grid();
    let partial = inverse_dft(&obs.zero_filled());
    let margin_limit = coefficients.delta() / 2.0;

    let mut max_margin = 0.0f64;
    let mut tie_points = Vec::new();
    let mut rounded = Vec::with_capacity(grid.size());
    for (x, &value) in partial.values().iter().enumerate() {
        let nearest = coefficients.nearest(value);
        max_margin = max_margin.max(nearest.distance);
        if nearest.tie {
            tie_points.push(grid.point_at(x).coords().to_vec());
        }
        rounded.push(nearest.value);
    }

    if max_margin >= margin_limit || !tie_points.is_empty() {
        return Ok(RecoveryOutcome {
            status: RecoveryStatus::Ambiguous,
            result: None,
            certificate: Certificate::Rounding {
                max_margin,
                margin_limit,
                spectral_residual: None,
                tie_points,
            },
        });
    }

    let mut groups: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (x, &value) in rounded.iter().enumerate() {
        if value.norm() == 0.0 {
            continue;
        }
        match groups.iter_mut().find(|(v, _)| *v == value) {
            Some((_, indices)) => indices.push(x),
            None => groups.push((value, vec![x])),
        }
    }
    let parts = groups
        .into_iter()
        .map(|(v, indices)| Ok((v, LatticeSet::from_indices(grid, indices)?)))
        .collect::<Result<Vec<_>>>()?;
    let comb = DiracComb::build(grid, parts, Some(coefficients.clone()))?;

    let residual = obs.spectral_distance(&forward_dft(&comb.to_signal()))?;
    let certificate = Certificate::Rounding {
        max_margin,
        margin_limit,
        spectral_residual: Some(residual),
        tie_points: Vec::new(),
    };
    if residual <= RECOVERY_RESIDUAL_TOL {
        Ok(RecoveryOutcome { status: RecoveryStatus::Recovered, result: Some(comb), certificate })
    } else {
        Ok(RecoveryOutcome { status: RecoveryStatus::Failed, result: None, certificate })
    }
}

// ---------------------------------------------------------------------------
// Least-squares support search
// ---------------------------------------------------------------------------

/// Tuning knobs for [`ls_support_search`].
#[derive(Debug, Clone)]
pub struct LsOptions {
    /// Search all supports of size `1..=k` instead of exactly `k`.
    pub all_sizes_up_to: bool,
    /// Cap on the number of candidate supports.
    pub candidate_cap: u128,
    /// The runner-up residual must exceed the best by this factor.
    pub separation_factor: f64,
    /// Residual below which a fit counts as exact (signal-space 2-norm).
    pub residual_tol: f64,
    /// Singular values below this count as rank-deficient.
    pub rank_eps: f64,
    /// Clustering tolerance when decomposing the reconstruction into a comb.
    pub decompose_tol: f64,
    /// How many near-ties to keep in the certificate.
    pub near_tie_limit: usize,
}

impl Default for LsOptions {
    fn default() -> Self {
        Self {
            all_sizes_up_to: false,
            candidate_cap: 1_000_000,
            separation_factor: 10.0,
            residual_tol: RECOVERY_RESIDUAL_TOL,
            rank_eps: 1e-10,
            decompose_tol: 1e-9,
            near_tie_limit: 16,
        }
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// For every candidate support `tau` of size `k` (or of every size up to `k`
/// with the `all_sizes_up_to` option), solve the least-squares problem for a
/// signal supported on `tau` matching the observed frequencies, and keep the
/// global minimizer.
///
/// Recovered only when the best residual is below `residual_tol`, the best
/// system has full column rank, and the runner-up residual exceeds the best
/// by the separation factor; otherwise ambiguous, with the near-tie list in
/// the certificate. Residuals are reported in the signal-space 2-norm
/// `||P_{S^c} f - P_{S^c} s||_2`.
pub fn ls_support_search(
    obs: &ObservedSpectrum,
    k: usize,
    options: &LsOptions,
) -> Result<RecoveryOutcome> {
    let grid = obs.grid();
    let s = grid.size();
    if k < 1 || k > s {
        return Err(Error::InvalidParameter(format!(
            "support size must be between 1 and {s}, got {k}"
        )));
    }
    let sizes: Vec<usize> = if options.all_sizes_up_to { (1..=k).collect() } else { vec![k] };
    let mut total: u128 = 0;
    for &j in &sizes {
        total = total
            .checked_add(binomial(s as u128, j as u128).unwrap_or(u128::MAX))
            .unwrap_or(u128::MAX);
    }
    if total > options.candidate_cap {
        return Err(Error::CapExceeded {
            what: "least-squares support search",
            needed: total,
            cap: options.candidate_cap,
        });
    }

    let observed = obs.observed_indices();
    let rows = observed.len();
    let table = chi_table(grid.modulus());
    let scale = 1.0 / s as f64;
    // Column of the sampled transform for a point, over observed rows.
    let mut dot_tables: Vec<Vec<usize>> = Vec::with_capacity(rows);
    let mut scratch = Vec::new();
    for &m in &observed {
        phase_dots(&grid, m, &mut scratch);
        dot_tables.push(scratch.clone());
    }
    let b = DVector::from_iterator(rows, observed.iter().map(|&m| obs.value_at(m).unwrap()));
    let signal_norm_factor = (s as f64).sqrt();

    struct Best {
        indices: Vec<usize>,
        residual: f64,
        underdetermined: bool,
        solution: Vec<Complex64>,
    }
    let mut best: Option<Best> = None;
    let mut runner_up: Option<(Vec<usize>, f64, bool)> = None;
    let mut near_ties: Vec<(Vec<usize>, f64, bool)> = Vec::new();
    let mut near_tie_overflow = 0usize;
    let mut evaluated = 0u64;

    for &size in &sizes {
        for tau in (0..s).combinations(size) {
            evaluated += 1;
            let mut a = DMatrix::from_element(rows, size, Complex64::new(0.0, 0.0));
            for (col, &x) in tau.iter().enumerate() {
                for row in 0..rows {
                    a[(row, col)] = table[dot_tables[row][x]].conj() * scale;
                }
            }
            let svd = a.clone().svd(true, true);
            let rank = svd.rank(options.rank_eps);
            let underdetermined = rank < size;
            let z = svd
                .solve(&b, options.rank_eps)
                .map_err(|e| Error::InvalidParameter(format!("least-squares solve failed: {e}")))?;
            let residual = (&a * &z - &b).norm() * signal_norm_factor;

            let better = match &best {
                None => true,
                Some(current) => residual < current.residual,
            };
            if better {
                if let Some(current) = best.take() {
                    runner_up = Some((current.indices, current.residual, current.underdetermined));
                }
                best = Some(Best {
                    indices: tau.clone(),
                    residual,
                    underdetermined,
                    solution: z.iter().copied().collect(),
                });
            } else if runner_up.as_ref().map_or(true, |(_, r, _)| residual < *r) {
                runner_up = Some((tau.clone(), residual, underdetermined));
            }

            // Near-tie threshold only shrinks as the best improves, so this
            // collects a superset of the final near-tie set.
            let threshold = match &best {
                Some(current) => {
                    options.residual_tol.max(options.separation_factor * current.residual)
                }
                None => options.residual_tol,
            };
            if residual <= threshold {
                if near_ties.len() < options.near_tie_limit * 4 {
                    near_ties.push((tau, residual, underdetermined));
                } else {
                    near_tie_overflow += 1;
                }
            }
        }
    }

    let best = best.expect("at least one candidate support exists");
    let final_threshold = options.residual_tol.max(options.separation_factor * best.residual);
    near_ties.retain(|(tau, r, _)| *r <= final_threshold && *tau != best.indices);
    let shown: Vec<CandidateFit> = near_ties
        .iter()
        .take(options.near_tie_limit)
        .map(|(tau, r, u)| CandidateFit {
            support: tau.iter().map(|&x| grid.point_at(x).coords().to_vec()).collect(),
            residual: *r,
            underdetermined: *u,
        })
        .collect();
    near_tie_overflow += near_ties.len().saturating_sub(options.near_tie_limit);

    let as_fit = |indices: &[usize], residual: f64, underdetermined: bool| CandidateFit {
        support: indices.iter().map(|&x| grid.point_at(x).coords().to_vec()).collect(),
        residual,
        underdetermined,
    };
    let best_fit = as_fit(&best.indices, best.residual, best.underdetermined);
    let runner_fit = runner_up.as_ref().map(|(tau, r, u)| as_fit(tau, *r, *u));

    let separated = match &runner_up {
        Some((_, r, _)) => *r > options.separation_factor * best.residual,
        None => true,
    };
    let certificate = Certificate::LeastSquares {
        best: best_fit,
        runner_up: runner_fit,
        near_ties: shown,
        near_tie_overflow,
        evaluated,
    };

    if best.residual < options.residual_tol && !best.underdetermined && separated {
        let mut values = vec![Complex64::new(0.0, 0.0); s];
        for (&x, &v) in best.indices.iter().zip(&best.solution) {
            values[x] = v;
        }
        let signal = Signal::new(grid, values)?;
        let comb = crate::comb::decompose(&signal, options.decompose_tol)?;
        let check = obs.spectral_distance(&forward_dft(&comb.to_signal()))?;
        if check <= RECOVERY_RESIDUAL_TOL {
            return Ok(RecoveryOutcome {
                status: RecoveryStatus::Recovered,
                result: Some(comb),
                certificate,
            });
        }
        return Ok(RecoveryOutcome { status: RecoveryStatus::Failed, result: None, certificate });
    }
    Ok(RecoveryOutcome { status: RecoveryStatus::Ambiguous, result: None, certificate })
}

// ---------------------------------------------------------------------------
// Brute-force uniqueness oracle
// ---------------------------------------------------------------------------

/// Default cap on enumerated oracle candidates.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Constrain oracle candidates to a fixed `p`-effective mass.
#[derive(Debug, Clone, Copy)]
pub struct EqualMassConstraint {
    pub p: f64,
    pub mass: f64,
    /// Relative tolerance for the mass comparison.
    pub relative_tol: f64,
}

impl EqualMassConstraint {
    pub fn new(p: f64, mass: f64) -> Self {
        Self { p, mass, relative_tol: 1e-9 }
    }
}

/// The comb family an oracle enumerates: every assignment of family
/// coefficients to grid points with at most `max_gamma` distinct nonzero
/// values, optionally restricted to a fixed effective mass.
#[derive(Debug, Clone)]
pub struct OracleFamily {
    pub coefficients: CoefficientSet,
    pub max_gamma: usize,
    pub equal_mass: Option<EqualMassConstraint>,
    pub candidate_cap: u128,
    /// Per-frequency tolerance for spectral consistency.
    pub match_tol: f64,
}

impl OracleFamily {
    pub fn new(coefficients: CoefficientSet, max_gamma: usize) -> Self {
        Self {
            coefficients,
            max_gamma,
            equal_mass: None,
            candidate_cap: DEFAULT_ENUMERATION_CAP,
            match_tol: 1e-9,
        }
    }

    pub fn with_equal_mass(mut self, constraint: EqualMassConstraint) -> Self {
        self.equal_mass = Some(constraint);
        self
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.candidate_cap = cap;
        self
    }
}

/// All combs in a family consistent with the observed spectrum.
#[derive(Debug)]
pub struct OracleResult {
    /// Consistent combs in enumeration (canonical) order.
    pub consistent: Vec<DiracComb>,
    /// Total candidates enumerated.
    pub candidates: u128,
    /// Candidates rejected by the equal-mass constraint whose mass was
    /// nevertheless within 1e-6 relative of the target.
    pub near_mass_boundary: usize,
}

/// Enumerate every value assignment from the coefficient family and return
/// those whose spectrum matches the observed frequencies within
/// `family.match_tol` at every surviving frequency.
///
/// The enumeration evaluates candidates directly from the channel definition
/// and shares no logic with [`dra_recover`] or [`ls_support_search`], so it
/// serves as their ground-truth oracle. Candidate evaluation is pure and the
/// output order is the enumeration order regardless of scheduling.
pub fn brute_force_unique(obs: &ObservedSpectrum, family: &OracleFamily) -> Result<OracleResult> {
    let grid = obs.grid();
    let s = grid.size();
    let values = family.coefficients.values().to_vec();
    let base = values.len() as u128;
    let mut candidates: u128 = 1;
    for _ in 0..s {
        candidates = candidates.checked_mul(base).unwrap_or(u128::MAX);
        if candidates > family.candidate_cap {
            return Err(Error::CapExceeded {
                what: "oracle enumeration",
                needed: candidates,
                cap: family.candidate_cap,
            });
        }
    }

    let observed = obs.observed_indices();
    let table = chi_table(grid.modulus());
    let scale = 1.0 / s as f64;
    let mut dot_tables: Vec<Vec<usize>> = Vec::with_capacity(observed.len());
    let mut scratch = Vec::new();
    for &m in &observed {
        phase_dots(&grid, m, &mut scratch);
        dot_tables.push(scratch.clone());
    }
    let targets: Vec<Complex64> = observed.iter().map(|&m| obs.value_at(m).unwrap()).collect();

    let base_u = values.len() as u64;
    let mut powers = Vec::with_capacity(s);
    let mut acc = 1u64;
    for _ in 0..s {
        powers.push(acc);
        acc = acc.saturating_mul(base_u);
    }
    let digit = |idx: u64, x: usize| ((idx / powers[x]) % base_u) as usize;
    let zero_digit = values
        .iter()
        .position(|v| v.norm() == 0.0)
        .expect("coefficient sets always contain zero");

    let near_boundary = AtomicUsize::new(0);
    let total = candidates as u64;
    let consistent: Vec<DiracComb> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            // Complexity filter: distinct nonzero digits used.
            let mut used = vec![0usize; values.len()];
            for x in 0..s {
                used[digit(idx, x)] += 1;
            }
            let gamma = used
                .iter()
                .enumerate()
                .filter(|&(v, &count)| v != zero_digit && count > 0)
                .count();
            if gamma > family.max_gamma {
                return None;
            }

            if let Some(constraint) = &family.equal_mass {
                if gamma == 0 {
                    return None;
                }
                let mass = used
                    .iter()
                    .enumerate()
                    .filter(|&(v, &count)| v != zero_digit && count > 0)
                    .map(|(v, &count)| part_mass(values[v], count, constraint.p))
                    .fold(0.0f64, f64::max);
                let err = (mass - constraint.mass).abs();
                let tol = constraint.relative_tol * constraint.mass.abs().max(1.0);
                if err > tol {
                    if err <= 1e-6 * constraint.mass.abs().max(1.0) {
                        near_boundary.fetch_add(1, Ordering::Relaxed);
                    }
                    return None;
                }
            }

            // Spectral consistency at every observed frequency, straight from
            // the transform definition, with early abort.
            for (dots, &target) in dot_tables.iter().zip(&targets) {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..s {
                    let v = digit(idx, x);
                    if v != zero_digit {
                        acc += table[dots[x]].conj() * values[v];
                    }
                }
                if (acc * scale - target).norm() > family.match_tol {
                    return None;
                }
            }

            let mut groups: Vec<(Complex64, Vec<usize>)> = Vec::new();
            for x in 0..s {
                let v = digit(idx, x);
                if v == zero_digit {
                    continue;
                }
                match groups.iter_mut().find(|(value, _)| *value == values[v]) {
                    Some((_, indices)) => indices.push(x),
                    None => groups.push((values[v], vec![x])),
                }
            }
            let parts = groups
                .into_iter()
                .map(|(value, indices)| {
                    (value, LatticeSet::from_indices(grid, indices).expect("indices in range"))
                })
                .collect();
            Some(
                DiracComb::build(grid, parts, Some(family.coefficients.clone()))
                    .expect("enumerated parts are disjoint family members"),
            )
        })
        .collect();

    Ok(OracleResult {
        consistent,
        candidates,
        near_mass_boundary: near_boundary.into_inner(),
    })
}

// ---------------------------------------------------------------------------
// Difference decomposition
// ---------------------------------------------------------------------------

/// Write `f - g` as a comb whose parts are drawn from
/// `{A_i intersect B_j, A_i \ B, B_j \ A}` with coefficients
/// `{a_i - b_j, a_i, -b_j}`; zero coefficients and empty pieces are dropped,
/// so the part count is at most `gamma_f * gamma_g + gamma_f + gamma_g`.
/// The result evaluates pointwise to exactly `f(x) - g(x)`.
pub fn difference_decomposition(f: &DiracComb, g: &DiracComb) -> Result<DiracComb> {
    f.grid().check_same(&g.grid())?;
    let b_union = g.support();
    let a_union = f.support();
    let mut parts: Vec<(Complex64, LatticeSet)> = Vec::new();
    for fp in f.parts() {
        for gp in g.parts() {
            parts.push((
                fp.coefficient - gp.coefficient,
                fp.support.intersection(&gp.support)?,
            ));
        }
    }
    for fp in f.parts() {
        parts.push((fp.coefficient, fp.support.difference(&b_union)?));
    }
    for gp in g.parts() {
        parts.push((-gp.coefficient, gp.support.difference(&a_union)?));
    }
    DiracComb::build(f.grid(), parts, None)
}
