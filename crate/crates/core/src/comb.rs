//! Dirac combs: piecewise-constant signals `f = sum_i a_i 1_{A_i}` with
//! disjoint parts and coefficients drawn from a finite set containing zero.
//!
//! The complexity `gamma` is the number of parts in normalized form (equal
//! coefficients merged, zero coefficients and empty supports dropped), which
//! is the minimal number of parts representing the function. The module also
//! computes the mass-ordered effective triple, `L^p` concentration levels,
//! and uncertainty-product reports for the spectrum support.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{forward_dft, spectrum_support, Signal};
use crate::lattice::{Grid, LatticeSet};
use crate::restriction::RestrictionEstimate;

/// `|a|^p * |A|`, the single mass convention shared by every module.
pub(crate) fn part_mass(coefficient: Complex64, support_size: usize, p: f64) -> f64 {
    coefficient.norm().powf(p) * support_size as f64
}

/// Principal argument in `[0, 2 pi)`, with `arg(positive real) = 0`.
pub(crate) fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

fn validate_p(p: f64) -> Result<()> {
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "p must be finite and positive (p = infinity is excluded), got {p}"
        )));
    }
    Ok(())
}

fn validate_coefficient(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite("coefficient"));
    }
    Ok(())
}

/// Key for exact complex grouping; folds `-0.0` into `+0.0`.
fn value_key(z: Complex64) -> (u64, u64) {
    let norm = |x: f64| if x == 0.0 { 0.0f64.to_bits() } else { x.to_bits() };
    (norm(z.re), norm(z.im))
}

fn lex_complex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
}

/// A finite coefficient family `{alpha_i}` containing zero, with separation
/// `delta` (every distinct pair at distance >= delta) and bound `M`
/// (every member has modulus <= M).
///
/// [`CoefficientSet::new`] stores the tight parameters (`delta` equals the
/// minimum pairwise distance, `M` the maximum modulus);
/// [`CoefficientSet::with_parameters`] accepts any dominated pair, which is
/// what a wider family or a deserialized comb supplies.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    values: Vec<Complex64>,
    delta: f64,
    m_bound: f64,
}

/// Result of rounding a complex value to the nearest coefficient.
#[derive(Debug, Clone, Copy)]
pub struct NearestCoefficient {
    pub value: Complex64,
    pub distance: f64,
    /// Another member sits at exactly the same distance.
    pub tie: bool,
}

impl CoefficientSet {
    /// Build the tight family for `values` (zero is added if absent).
    /// At least one nonzero member is required so that `delta` and `M` are
    /// well defined and positive.
    pub fn new(values: &[Complex64]) -> Result<Self> {
        let mut members: Vec<Complex64> = Vec::with_capacity(values.len() + 1);
        for &v in values {
            validate_coefficient(v)?;
            members.push(v);
        }
        members.push(Complex64::new(0.0, 0.0));
        members.sort_by(lex_complex);
        members.dedup_by(|a, b| value_key(*a) == value_key(*b));
        if members.iter().all(|v| v.norm() == 0.0) {
            return Err(Error::InvalidParameter(
                "coefficient set needs at least one nonzero member".into(),
            ));
        }
        let delta = min_pairwise_distance(&members);
        let m_bound = members.iter().map(|v| v.norm()).fold(0.0, f64::max);
        Ok(Self { values: members, delta, m_bound })
    }

    /// Build a family with explicit `(delta, M)` parameters, which must be
    /// dominated by the members: `delta` no larger than the minimum pairwise
    /// distance and `M` no smaller than the maximum modulus.
    pub fn with_parameters(values: &[Complex64], delta: f64, m_bound: f64) -> Result<Self> {
        let tight = Self::new(values)?;
        if !(delta > 0.0 && delta.is_finite()) || !(m_bound > 0.0 && m_bound.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta and M must be positive and finite, got delta={delta}, M={m_bound}"
            )));
        }
        if delta > tight.delta {
            return Err(Error::InvalidParameter(format!(
                "delta={delta} exceeds the minimum pairwise distance {}",
                tight.delta
            )));
        }
        if m_bound < tight.m_bound {
            return Err(Error::InvalidParameter(format!(
                "M={m_bound} is below the maximum member modulus {}",
                tight.m_bound
            )));
        }
        Ok(Self { values: tight.values, delta, m_bound })
    }

    /// The degenerate family `{0}` used by the zero comb, which belongs to
    /// every family; the conventional parameters are `delta = M = 1`.
    pub fn zero_only() -> Self {
        Self { values: vec![Complex64::new(0.0, 0.0)], delta: 1.0, m_bound: 1.0 }
    }

    /// Members in canonical order (sorted by real part, then imaginary part).
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Members with nonzero modulus.
    pub fn nonzero_values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.values.iter().copied().filter(|v| v.norm() > 0.0)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    /// Exact membership test.
    pub fn contains(&self, z: Complex64) -> bool {
        self.values.iter().any(|&v| value_key(v) == value_key(z))
    }

    /// Nearest member to `z`; ties are broken toward smaller modulus, then
    /// smaller principal argument, and reported via the `tie` flag.
    pub fn nearest(&self, z: Complex64) -> NearestCoefficient {
        let mut best = self.values[0];
        let mut best_dist = (z - best).norm();
        let mut tie = false;
        for &v in &self.values[1..] {
            let dist = (z - v).norm();
            if dist < best_dist {
                best = v;
                best_dist = dist;
                tie = false;
            } else if dist == best_dist {
                tie = true;
                let better_modulus = v.norm() < best.norm()
                    || (v.norm() == best.norm() && principal_arg(v) < principal_arg(best));
                if better_modulus {
                    best = v;
                }
            }
        }
        NearestCoefficient { value: best, distance: best_dist, tie }
    }
}

fn min_pairwise_distance(values: &[Complex64]) -> f64 {
    let mut min = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            min = min.min((a - b).norm());
        }
    }
    min
}

/// One part `a_i 1_{A_i}` of a comb.
#[derive(Debug, Clone)]
pub struct CombPart {
    pub coefficient: Complex64,
    pub support: LatticeSet,
}

/// A Dirac comb in normalized form: pairwise-disjoint nonempty supports,
/// pairwise-distinct nonzero coefficients, `gamma = parts.len()` minimal for
/// the represented function. Parts are sorted by coefficient (real part, then
/// imaginary part) so every downstream iteration is reproducible.
#[derive(Debug, Clone)]
pub struct DiracComb {
    grid: Grid,
    parts: Vec<CombPart>,
    coefficients: CoefficientSet,
}

impl PartialEq for DiracComb {
    /// Equality of the represented function: same grid, same normalized
    /// parts. Family parameters are not compared.
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.parts.len() == other.parts.len()
            && self.parts.iter().zip(&other.parts).all(|(a, b)| {
                value_key(a.coefficient) == value_key(b.coefficient) && a.support == b.support
            })
    }
}

impl DiracComb {
    /// Normalize `parts` into a comb: drops zero coefficients and empty
    /// supports, merges parts with equal coefficients, and checks
    /// disjointness. When `coefficients` is supplied every surviving
    /// coefficient must be a member; otherwise the tight family of the
    /// part values (plus zero) is synthesized.
    pub fn build(
        grid: Grid,
        parts: Vec<(Complex64, LatticeSet)>,
        coefficients: Option<CoefficientSet>,
    ) -> Result<Self> {
        let mut seen = vec![false; grid.size()];
        let mut kept: Vec<(Complex64, Vec<usize>)> = Vec::new();
        for (coeff, support) in parts {
            validate_coefficient(coeff)?;
            grid.check_same(&support.grid())?;
            for &i in support.indices() {
                if seen[i] {
                    return Err(Error::OverlappingParts { index: i });
                }
                seen[i] = true;
            }
            if coeff.norm() == 0.0 || support.is_empty() {
                continue;
            }
            match kept.iter_mut().find(|(c, _)| value_key(*c) == value_key(coeff)) {
                Some((_, indices)) => indices.extend_from_slice(support.indices()),
                None => kept.push((coeff, support.indices().to_vec())),
            }
        }

        if let Some(set) = &coefficients {
            for (coeff, _) in &kept {
                if !set.contains(*coeff) {
                    return Err(Error::CoefficientNotInSet { re: coeff.re, im: coeff.im });
                }
            }
        }

        let coefficients = match coefficients {
            Some(set) => set,
            None if kept.is_empty() => CoefficientSet::zero_only(),
            None => {
                let values: Vec<Complex64> = kept.iter().map(|(c, _)| *c).collect();
                CoefficientSet::new(&values)?
            }
        };

        let mut parts = kept
            .into_iter()
            .map(|(coefficient, indices)| {
                Ok(CombPart { coefficient, support: LatticeSet::from_indices(grid, indices)? })
            })
            .collect::<Result<Vec<_>>>()?;
        parts.sort_by(|a, b| lex_complex(&a.coefficient, &b.coefficient));

        Ok(Self { grid, parts, coefficients })
    }

    /// The zero comb, of complexity zero.
    pub fn zero(grid: Grid) -> Self {
        Self { grid, parts: Vec::new(), coefficients: CoefficientSet::zero_only() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn parts(&self) -> &[CombPart] {
        &self.parts
    }

    pub fn coefficient_set(&self) -> &CoefficientSet {
        &self.coefficients
    }

    /// The complexity `gamma = number of parts`.
    pub fn gamma(&self) -> usize {
        self.parts.len()
    }

    pub fn delta(&self) -> f64 {
        self.coefficients.delta()
    }

    pub fn m_bound(&self) -> f64 {
        self.coefficients.m_bound()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Union of the part supports (the support of the function).
    pub fn support(&self) -> LatticeSet {
        let mut indices = Vec::new();
        for part in &self.parts {
            indices.extend_from_slice(part.support.indices());
        }
        LatticeSet::from_indices(self.grid, indices).expect("part indices are in range")
    }

    /// Pointwise evaluation `f = sum_i a_i 1_{A_i}`.
    pub fn to_signal(&self) -> Signal {
        let mut values = vec![Complex64::new(0.0, 0.0); self.grid.size()];
        for part in &self.parts {
            for &i in part.support.indices() {
                values[i] = part.coefficient;
            }
        }
        Signal::new(self.grid, values).expect("comb coefficients are finite")
    }

    /// The first part under the mass ordering: `|a|^p |A|` descending, ties
    /// broken by smaller `|A|`, then by smaller principal argument of the
    /// coefficient. In normalized form the ordering has no full ties, so the
    /// triple is unique.
    pub fn effective_triple(&self, p: f64) -> Result<EffectiveTriple> {
        validate_p(p)?;
        if self.parts.is_empty() {
            return Err(Error::ZeroComb);
        }
        let mut order: Vec<usize> = (0..self.parts.len()).collect();
        order.sort_by(|&i, &j| {
            let a = &self.parts[i];
            let b = &self.parts[j];
            let mass_a = part_mass(a.coefficient, a.support.len(), p);
            let mass_b = part_mass(b.coefficient, b.support.len(), p);
            mass_b
                .partial_cmp(&mass_a)
                .unwrap()
                .then(a.support.len().cmp(&b.support.len()))
                .then(
                    principal_arg(a.coefficient)
                        .partial_cmp(&principal_arg(b.coefficient))
                        .unwrap(),
                )
        });
        let first = &self.parts[order[0]];
        Ok(EffectiveTriple {
            p,
            weight: first.coefficient,
            support: first.support.clone(),
            mass: part_mass(first.coefficient, first.support.len(), p),
        })
    }

    /// Serialize to the documented comb JSON form.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&CombJson::from_comb(self)).expect("comb json never fails")
    }

    /// Parse the comb JSON form, re-normalizing and validating `gamma`,
    /// `delta`, and `M` against the parts.
    pub fn from_json(text: &str) -> Result<Self> {
        CombJson::into_comb(serde_json::from_str(text)?)
    }
}

/// The `p`-effective weight `a_1`, support `A_1`, and mass `|a_1|^p |A_1|`.
#[derive(Debug, Clone)]
pub struct EffectiveTriple {
    pub p: f64,
    pub weight: Complex64,
    pub support: LatticeSet,
    pub mass: f64,
}

#[derive(Serialize, Deserialize)]
struct CombPartJson {
    coeff: [f64; 2],
    support: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct CombJson {
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    parts: Vec<CombPartJson>,
    delta: f64,
    #[serde(rename = "M")]
    m: f64,
    gamma: usize,
}

impl CombJson {
    fn from_comb(comb: &DiracComb) -> Self {
        Self {
            n: comb.grid.modulus(),
            d: comb.grid.dimension(),
            parts: comb
                .parts
                .iter()
                .map(|p| CombPartJson {
                    coeff: [p.coefficient.re, p.coefficient.im],
                    support: p
                        .support
                        .coord_rows()
                        .into_iter()
                        .map(|row| row.into_iter().map(|c| c as i64).collect())
                        .collect(),
                })
                .collect(),
            delta: comb.delta(),
            m: comb.m_bound(),
            gamma: comb.gamma(),
        }
    }

    fn into_comb(self) -> Result<DiracComb> {
        let grid = Grid::new(self.n, self.d)?;
        let mut parts = Vec::with_capacity(self.parts.len());
        let mut values = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            let coeff = Complex64::new(p.coeff[0], p.coeff[1]);
            values.push(coeff);
            parts.push((coeff, LatticeSet::from_coords(grid, &p.support)?));
        }
        let coefficients = if parts.is_empty() {
            CoefficientSet::zero_only()
        } else {
            CoefficientSet::with_parameters(&values, self.delta, self.m)?
        };
        let comb = DiracComb::build(grid, parts, Some(coefficients))?;
        if comb.gamma() != self.gamma {
            return Err(Error::Json(format!(
                "gamma field is {} but the normalized comb has {} parts",
                self.gamma,
                comb.gamma()
            )));
        }
        Ok(comb)
    }
}

/// Decompose an arbitrary signal into a comb by grouping points with equal
/// values.
///
/// With `tol = 0` values are grouped exactly. With `tol > 0` the distinct
/// values are sorted by real then imaginary part and chain-merged whenever
/// consecutive values are closer than `tol`; each cluster is represented by
/// its point-count-weighted centroid. Clusters whose representative has
/// modulus <= `tol` count as zero and are dropped.
pub fn decompose(f: &Signal, tol: f64) -> Result<DiracComb> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("decompose tolerance must be >= 0, got {tol}")));
    }
    // Exact grouping first.
    let mut groups: Vec<(Complex64, Vec<usize>)> = Vec::new();
    let mut lookup = std::collections::HashMap::new();
    for (i, &v) in f.values().iter().enumerate() {
        let slot = *lookup.entry(value_key(v)).or_insert_with(|| {
            groups.push((v, Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(i);
    }
    groups.sort_by(|a, b| lex_complex(&a.0, &b.0));

    // Chain-merge consecutive groups closer than tol.
    let mut clusters: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (value, indices) in groups {
        match clusters.last_mut() {
            Some((rep, members)) if (value - *rep).norm() < tol => {
                let total = (members.len() + indices.len()) as f64;
                *rep = (*rep * members.len() as f64 + value * indices.len() as f64) / total;
                members.extend(indices);
            }
            _ => clusters.push((value, indices)),
        }
    }

    let grid = f.grid();
    let parts = clusters
        .into_iter()
        .filter(|(rep, _)| rep.norm() > tol)
        .map(|(rep, indices)| Ok((rep, LatticeSet::from_indices(grid, indices)?)))
        .collect::<Result<Vec<_>>>()?;
    DiracComb::build(grid, parts, None)
}

/// The smallest level `lambda` with `||f||_p <= lambda ||f 1_E||_p`.
///
/// Returns 1 for the zero signal and infinity when the numerator is positive
/// but `f` vanishes on `E`.
pub fn concentration_level(f: &Signal, e: &LatticeSet, p: f64) -> Result<f64> {
    validate_p(p)?;
    f.grid().check_same(&e.grid())?;
    let total: f64 = f.values().iter().map(|v| v.norm().powf(p)).sum();
    let on_e: f64 = e.indices().iter().map(|&i| f.value_at(i).norm().powf(p)).sum();
    if total == 0.0 {
        return Ok(1.0);
    }
    if on_e == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(total.powf(1.0 / p) / on_e.powf(1.0 / p))
}

/// The uncertainty product for a nonzero comb and its spectrum support.
#[derive(Debug, Clone)]
pub struct UncertaintyReport {
    pub p: f64,
    pub gamma: usize,
    /// Numerical support of the transform at the requested tolerance.
    pub sigma: LatticeSet,
    pub effective: EffectiveTriple,
    /// Exponent applied to `|A_1|` in the product: 1 without a restriction
    /// estimate, `1/p` with one.
    pub support_exponent: f64,
    /// Size of the frequency set entering the product (the estimate's set
    /// when one is supplied, otherwise the computed support).
    pub product_set_size: usize,
    pub product: f64,
    pub lower_bound: f64,
    pub restriction_constant: Option<f64>,
    pub holds: bool,
}

/// Compute the applicable uncertainty product and lower bound.
///
/// Without a restriction estimate the product is `|A_1| * |Sigma|` with lower
/// bound `N^d / gamma`, valid for `p` equal to 1 or 2. With an estimate whose
/// frequency set contains the computed support, the product is
/// `|A_1|^(1/p) * |Sigma|` over the estimate's set, with lower bound
/// `N^d / (C_pq * gamma^(1/p))`.
pub fn uncertainty_report(
    comb: &DiracComb,
    p: f64,
    restriction: Option<&RestrictionEstimate>,
    tol: f64,
) -> Result<UncertaintyReport> {
    validate_p(p)?;
    if comb.is_zero() {
        return Err(Error::ZeroComb);
    }
    let sigma = spectrum_support(&forward_dft(&comb.to_signal()), tol)?;
    let effective = comb.effective_triple(p)?;
    let nd = comb.grid().size() as f64;
    let gamma = comb.gamma() as f64;
    let a1 = effective.support.len() as f64;

    let (support_exponent, product_set_size, product, lower_bound, constant) = match restriction {
        Some(est) => {
            comb.grid().check_same(&est.sigma().grid())?;
            if (est.p() - p).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "restriction estimate is for p = {}, report requested p = {p}",
                    est.p()
                )));
            }
            if sigma.difference(est.sigma())?.len() > 0 {
                return Err(Error::InvalidParameter(
                    "restriction estimate's frequency set must contain the spectrum support".into(),
                ));
            }
            let set_size = est.sigma().len();
            let product = a1.powf(1.0 / p) * set_size as f64;
            let bound = nd / (est.constant() * gamma.powf(1.0 / p));
            (1.0 / p, set_size, product, bound, Some(est.constant()))
        }
        None => {
            if p != 1.0 && p != 2.0 {
                return Err(Error::InvalidParameter(format!(
                    "without a restriction estimate the bound applies only to p = 1 or p = 2, got {p}"
                )));
            }
            let product = a1 * sigma.len() as f64;
            (1.0, sigma.len(), product, nd / gamma, None)
        }
    };

    Ok(UncertaintyReport {
        p,
        gamma: comb.gamma(),
        sigma,
        effective,
        support_exponent,
        product_set_size,
        product,
        lower_bound,
        restriction_constant: constant,
        holds: product >= lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::DEFAULT_SUPPORT_TOL;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize, d: usize) -> Grid {
        Grid::new(n, d).unwrap()
    }

    fn set(g: Grid, indices: &[usize]) -> LatticeSet {
        LatticeSet::from_indices(g, indices.to_vec()).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// The two-part comb pictured on Z_8: height 5 on {3,4,5}, height 1 on {2,6}.
    fn figure_comb() -> DiracComb {
        let g = grid(8, 1);
        DiracComb::build(g, vec![(re(5.0), set(g, &[3, 4, 5])), (re(1.0), set(g, &[2, 6]))], None)
            .unwrap()
    }

    #[test]
    fn build_two_part_comb() {
        let comb = figure_comb();
        assert_eq!(comb.gamma(), 2);
        assert_eq!(comb.delta(), 1.0);
        assert_eq!(comb.m_bound(), 5.0);
    }

    #[test]
    fn build_merges_equal_coefficients() {
        let g = grid(4, 1);
        let comb = DiracComb::build(
            g,
            vec![(re(1.0), set(g, &[0])), (re(1.0), set(g, &[2]))],
            None,
        )
        .unwrap();
        assert_eq!(comb.gamma(), 1);
        assert_eq!(comb.parts()[0].support.indices(), &[0, 2]);
    }

    #[test]
    fn build_empty_is_zero_comb() {
        let comb = DiracComb::build(grid(4, 1), vec![], None).unwrap();
        assert_eq!(comb.gamma(), 0);
        assert!(comb.is_zero());
        assert!(comb.to_signal().values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn build_rejects_overlap_and_foreign_coefficients() {
        let g = grid(4, 1);
        let overlap = DiracComb::build(
            g,
            vec![(re(1.0), set(g, &[0, 1])), (re(2.0), set(g, &[1, 2]))],
            None,
        );
        assert!(matches!(overlap, Err(Error::OverlappingParts { index: 1 })));

        let family = CoefficientSet::new(&[re(1.0)]).unwrap();
        let foreign = DiracComb::build(g, vec![(re(2.0), set(g, &[0]))], Some(family));
        assert!(matches!(foreign, Err(Error::CoefficientNotInSet { .. })));
    }

    #[test]
    fn coefficient_set_parameters() {
        let family = CoefficientSet::new(&[re(1.0), re(5.0)]).unwrap();
        assert_eq!(family.delta(), 1.0); // distance 1 to 0 included
        assert_eq!(family.m_bound(), 5.0);
        assert!(family.contains(re(0.0)));

        assert!(CoefficientSet::new(&[re(0.0)]).is_err());
        assert!(CoefficientSet::with_parameters(&[re(1.0)], 2.0, 1.0).is_err());
        assert!(CoefficientSet::with_parameters(&[re(1.0)], 0.5, 3.0).is_ok());
    }

    #[test]
    fn nearest_reports_exact_ties() {
        let family = CoefficientSet::new(&[re(1.0)]).unwrap();
        let hit = family.nearest(re(0.2));
        assert_eq!(hit.value, re(0.0));
        assert!(!hit.tie);
        let tie = family.nearest(re(0.5));
        assert!(tie.tie);
        assert_eq!(tie.value, re(0.0)); // smaller modulus wins the tie-break
    }

    #[test]
    fn decompose_indicator() {
        let g = grid(6, 1);
        let f = Signal::indicator(&set(g, &[1, 4]));
        let comb = decompose(&f, 0.0).unwrap();
        assert_eq!(comb.gamma(), 1);
        assert_eq!(comb.delta(), 1.0);
        assert_eq!(comb.m_bound(), 1.0);
        assert_eq!(comb.parts()[0].support.indices(), &[1, 4]);
    }

    #[test]
    fn decompose_zero_signal() {
        let comb = decompose(&Signal::zero(grid(5, 1)), 0.0).unwrap();
        assert_eq!(comb.gamma(), 0);
    }

    #[test]
    fn decompose_lattice_valued_complexity_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let delta = 0.25;
        let m = 1.5;
        let k_max = (m / delta) as i64;
        for _ in 0..50 {
            let g = grid(16, 1);
            let values: Vec<Complex64> = (0..16)
                .map(|_| re(delta * rng.gen_range(-k_max..=k_max) as f64))
                .collect();
            let f = Signal::new(g, values).unwrap();
            let comb = decompose(&f, 0.0).unwrap();
            assert!(comb.gamma() as f64 <= 2.0 * m / delta + 1.0);
        }
    }

    #[test]
    fn decompose_with_tolerance_clusters_noisy_values() {
        let g = grid(6, 1);
        let values = vec![re(1.0), re(1.0 + 1e-7), re(0.0), re(1e-8), re(2.0), re(1.0 - 1e-7)];
        let f = Signal::new(g, values).unwrap();
        let comb = decompose(&f, 1e-6).unwrap();
        assert_eq!(comb.gamma(), 2);
        let sizes: Vec<usize> = comb.parts().iter().map(|p| p.support.len()).collect();
        assert_eq!(sizes, vec![3, 1]);
    }

    #[test]
    fn to_signal_figure_values() {
        let f = figure_comb().to_signal();
        let expected = [0.0, 0.0, 1.0, 5.0, 5.0, 5.0, 1.0, 0.0];
        for (v, &want) in f.values().iter().zip(&expected) {
            assert_eq!(*v, re(want));
        }

        let g = grid(4, 1);
        let comb = DiracComb::build(g, vec![(re(1.0), set(g, &[0, 2]))], None).unwrap();
        assert_eq!(comb.to_signal().values(), &[re(1.0), re(0.0), re(1.0), re(0.0)]);
    }

    #[test]
    fn decompose_inverts_to_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let g = grid(12, 1);
            let coeffs: Vec<Complex64> = (0..3)
                .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                .collect();
            let comb = DiracComb::build(
                g,
                vec![
                    (coeffs[0], set(g, &[0, 5])),
                    (coeffs[1], set(g, &[1, 2])),
                    (coeffs[2], set(g, &[7])),
                ],
                None,
            )
            .unwrap();
            let back = decompose(&comb.to_signal(), 0.0).unwrap();
            assert_eq!(comb, back);
        }
    }

    #[test]
    fn effective_support_depends_on_p() {
        // (N-1)/4 at 0 and 1/2 elsewhere, N = 7.
        let g = grid(7, 1);
        let comb = DiracComb::build(
            g,
            vec![(re(1.5), set(g, &[0])), (re(0.5), set(g, &[1, 2, 3, 4, 5, 6]))],
            None,
        )
        .unwrap();
        let t1 = comb.effective_triple(1.0).unwrap();
        assert_eq!(t1.support.indices(), &[1, 2, 3, 4, 5, 6]);
        assert!((t1.mass - 3.0).abs() < 1e-12);
        let t2 = comb.effective_triple(2.0).unwrap();
        assert_eq!(t2.support.indices(), &[0]);
        assert!((t2.mass - 2.25).abs() < 1e-12);
    }

    #[test]
    fn figure_comb_two_effective_support() {
        let t = figure_comb().effective_triple(2.0).unwrap();
        assert_eq!(t.support.indices(), &[3, 4, 5]);
        assert!((t.mass - 75.0).abs() < 1e-12);
    }

    #[test]
    fn effective_triple_tie_breaks() {
        // Equal masses 2.0 at p = 1: coefficient 2 on one point vs 1 on two
        // points; the smaller support wins.
        let g = grid(6, 1);
        let comb = DiracComb::build(
            g,
            vec![(re(2.0), set(g, &[0])), (re(1.0), set(g, &[1, 2]))],
            None,
        )
        .unwrap();
        let t = comb.effective_triple(1.0).unwrap();
        assert_eq!(t.support.indices(), &[0]);

        // Equal mass, equal size, distinct arguments: smaller argument first.
        let comb = DiracComb::build(
            g,
            vec![(Complex64::new(0.0, 1.0), set(g, &[0])), (re(-1.0), set(g, &[1]))],
            None,
        )
        .unwrap();
        let t = comb.effective_triple(2.0).unwrap();
        assert_eq!(principal_arg(t.weight), std::f64::consts::FRAC_PI_2);

        assert!(DiracComb::zero(g).effective_triple(2.0).is_err());
        assert!(comb.effective_triple(f64::INFINITY).is_err());
    }

    #[test]
    fn concentration_examples() {
        let g = grid(2, 1);
        let f = Signal::new(g, vec![re(1.0), re(1.0)]).unwrap();
        let level = concentration_level(&f, &set(g, &[0]), 2.0).unwrap();
        assert!((level - 2.0f64.sqrt()).abs() < 1e-12);

        // E containing the support gives level 1.
        let e = set(g, &[0, 1]);
        assert!((concentration_level(&f, &e, 1.0).unwrap() - 1.0).abs() < 1e-12);

        assert_eq!(concentration_level(&Signal::zero(g), &set(g, &[0]), 2.0).unwrap(), 1.0);
        let off = Signal::new(g, vec![re(0.0), re(1.0)]).unwrap();
        assert_eq!(concentration_level(&off, &set(g, &[0]), 2.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn comb_concentrated_on_effective_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let g = grid(16, 1);
            let a = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let b = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if a.norm() == 0.0 || b.norm() == 0.0 || value_key(a) == value_key(b) {
                continue;
            }
            let comb = DiracComb::build(
                g,
                vec![(a, set(g, &[0, 3, 4])), (b, set(g, &[7, 9]))],
                None,
            )
            .unwrap();
            for p in [0.5, 1.0, 2.0, 3.0] {
                let triple = comb.effective_triple(p).unwrap();
                let level =
                    concentration_level(&comb.to_signal(), &triple.support, p).unwrap();
                assert!(level <= (comb.gamma() as f64).powf(1.0 / p) + 1e-12);
            }
        }
    }

    #[test]
    fn uncertainty_report_examples() {
        let g = grid(8, 1);
        let delta_comb = DiracComb::build(g, vec![(re(1.0), set(g, &[0]))], None).unwrap();
        let report = uncertainty_report(&delta_comb, 2.0, None, DEFAULT_SUPPORT_TOL).unwrap();
        assert_eq!(report.product, 8.0);
        assert_eq!(report.lower_bound, 8.0);
        assert!(report.holds);

        let g4 = grid(4, 1);
        let subgroup = DiracComb::build(g4, vec![(re(1.0), set(g4, &[0, 2]))], None).unwrap();
        let report = uncertainty_report(&subgroup, 2.0, None, DEFAULT_SUPPORT_TOL).unwrap();
        assert_eq!(report.sigma.indices(), &[0, 2]);
        assert_eq!(report.product, 4.0);
        assert_eq!(report.lower_bound, 4.0);
        assert!(report.holds);

        assert!(uncertainty_report(&subgroup, 3.0, None, DEFAULT_SUPPORT_TOL).is_err());
        assert!(uncertainty_report(&DiracComb::zero(g4), 2.0, None, 0.0).is_err());
    }

    #[test]
    fn comb_json_round_trip() {
        let comb = figure_comb();
        let text = comb.to_json();
        let back = DiracComb::from_json(&text).unwrap();
        assert_eq!(comb, back);
        assert_eq!(back.delta(), comb.delta());
        assert_eq!(back.m_bound(), comb.m_bound());

        // A wider family's parameters survive the round trip.
        let g = grid(8, 1);
        let family = CoefficientSet::new(&[re(1.0), re(5.0)]).unwrap();
        let narrow =
            DiracComb::build(g, vec![(re(5.0), set(g, &[1]))], Some(family)).unwrap();
        let back = DiracComb::from_json(&narrow.to_json()).unwrap();
        assert_eq!(back.delta(), 1.0);
        assert_eq!(back.m_bound(), 5.0);
    }
}
