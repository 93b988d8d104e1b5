//! Experiment configuration: grid, comb family, erasure model, condition
//! variant, algorithm, trials, seed, and caps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::comb::CoefficientSet;
use crate::error::{Error, Result};
use crate::lattice::Grid;
use crate::recovery::RecoveryCondition;

/// Caps on the exhaustive components. The `COMBREC_CAP` environment
/// variable, when set, overrides the two enumeration caps (`enumeration`
/// and `support_search`); the grid and linear-algebra caps are untouched.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Largest allowed `N^d`.
    pub grid: usize,
    /// Largest `N^d` for exact restriction constants.
    pub linalg: usize,
    /// Largest number of least-squares candidate supports.
    pub support_search: u64,
    /// Largest number of oracle candidates.
    pub enumeration: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            grid: Grid::DEFAULT_SIZE_LIMIT,
            linalg: crate::restriction::DEFAULT_LINALG_CAP,
            support_search: 1_000_000,
            enumeration: 10_000_000,
        }
    }
}

impl Caps {
    fn validate(&self) -> Result<()> {
        if self.grid == 0 || self.linalg == 0 || self.support_search == 0 || self.enumeration == 0
        {
            return Err(Error::InvalidParameter("caps must be positive".into()));
        }
        Ok(())
    }

    /// Apply the `COMBREC_CAP` override to the enumeration caps.
    pub fn with_env_override(mut self) -> Self {
        if let Ok(text) = std::env::var("COMBREC_CAP") {
            if let Ok(cap) = text.trim().parse::<u64>() {
                if cap > 0 {
                    self.enumeration = cap;
                    self.support_search = cap;
                }
            }
        }
        self
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
}

/// The comb family a sweep samples from: `gamma` parts of `part_size`
/// points each, with coefficients drawn (distinct per comb) from the listed
/// nonzero values. Zero joins the coefficient set automatically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    /// Nonzero coefficient values as `[re, im]` pairs.
    pub coefficients: Vec<[f64; 2]>,
    pub gamma: usize,
    #[serde(default = "default_part_size")]
    pub part_size: usize,
}

fn default_part_size() -> usize {
    1
}

impl FamilySpec {
    pub fn coefficient_set(&self) -> Result<CoefficientSet> {
        let values: Vec<Complex64> =
            self.coefficients.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        CoefficientSet::new(&values)
    }
}

/// How the erasure set is chosen. Sizes are swept in order; each size group
/// runs `trials` independent trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ErasureModel {
    /// Uniform without replacement, fresh per trial.
    RandomUniform { sizes: Vec<usize> },
    /// Arithmetic progression `{start + k step}` in canonical index space
    /// (fixed within a size group).
    Progression { start: usize, step: usize, sizes: Vec<usize> },
    /// A fixed explicit set, given as coordinate tuples.
    Explicit { points: Vec<Vec<i64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dra,
    Ls,
    Oracle,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Dra => "dra",
            Algorithm::Ls => "ls",
            Algorithm::Oracle => "oracle",
        }
    }
}

/// A full sweep description; serializable to and from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub family: FamilySpec,
    pub erasure: ErasureModel,
    #[serde(default = "default_p")]
    pub p: f64,
    pub variant: RecoveryCondition,
    pub algorithm: Algorithm,
    /// Trials per erasure-size group.
    pub trials: usize,
    pub seed: u64,
    /// When false (the default), the `runtime_ms` column is written as zero
    /// so re-runs are byte-identical.
    #[serde(default)]
    pub record_timings: bool,
    #[serde(default)]
    pub caps: Caps,
}

fn default_p() -> f64 {
    2.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The resolved grid.
    pub fn build_grid(&self) -> Result<Grid> {
        Grid::with_limit(self.grid.n, self.grid.d, self.caps.grid)
    }

    /// Erasure sizes swept, one group per entry.
    pub fn erasure_sizes(&self, grid: Grid) -> Result<Vec<usize>> {
        let sizes = match &self.erasure {
            ErasureModel::RandomUniform { sizes } | ErasureModel::Progression { sizes, .. } => {
                sizes.clone()
            }
            ErasureModel::Explicit { points } => {
                vec![crate::lattice::LatticeSet::from_coords(grid, points)?.len()]
            }
        };
        for &size in &sizes {
            if size >= grid.size() {
                return Err(Error::InvalidParameter(format!(
                    "erasure size {size} is not a proper subset of a grid with {} points",
                    grid.size()
                )));
            }
        }
        Ok(sizes)
    }

    pub fn validate(&self) -> Result<()> {
        self.caps.validate()?;
        let grid = self.build_grid()?;
        let family_set = self.family.coefficient_set()?;
        let nonzero = family_set.nonzero_values().count();
        if self.family.gamma == 0 || self.family.gamma > nonzero {
            return Err(Error::InvalidParameter(format!(
                "family gamma {} needs between 1 and {nonzero} distinct nonzero coefficients",
                self.family.gamma
            )));
        }
        if self.family.part_size == 0
            || self.family.gamma * self.family.part_size > grid.size()
        {
            return Err(Error::InvalidParameter(format!(
                "gamma * part_size = {} does not fit a grid with {} points",
                self.family.gamma * self.family.part_size,
                grid.size()
            )));
        }
        self.erasure_sizes(grid)?;
        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::InvalidParameter(format!("p must be finite and positive, got {}", self.p)));
        }
        let required_p = match self.variant {
            RecoveryCondition::CombSquared | RecoveryCondition::DraSquared => Some(2.0),
            RecoveryCondition::DraLinear => Some(1.0),
            // The sweep backs restricted variants with the exact (2,2)
            // constant, so they run at p = 2.
            RecoveryCondition::CombRestricted | RecoveryCondition::DraRestricted => Some(2.0),
            RecoveryCondition::Classical => None,
        };
        if let Some(required) = required_p {
            if self.p != required {
                return Err(Error::InvalidParameter(format!(
                    "variant {} runs at p = {required}, config has p = {}",
                    self.variant.as_str(),
                    self.p
                )));
            }
        }
        if let ErasureModel::Progression { step, .. } = self.erasure {
            if step == 0 {
                return Err(Error::InvalidParameter("progression step must be nonzero".into()));
            }
        }
        Ok(())
    }
}
