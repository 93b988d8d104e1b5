//! Ambient-space bookkeeping for `Z_N^d`: point encoding, dot products,
//! enumeration, and subset representation shared by every other module.
//!
//! Points are encoded in row-major order: the point with coordinates
//! `(c_0, ..., c_{d-1})` has index `sum_k c_k * N^(d-1-k)`. Every set iterates
//! in this order so downstream tie-breaks are reproducible.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// The ambient description `(N, d)` of `Z_N^d`.
///
/// Constructors reject grids whose total size `N^d` overflows `usize` or
/// exceeds the configured limit (default [`Grid::DEFAULT_SIZE_LIMIT`]), which
/// keeps exhaustive searches bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    modulus: usize,
    dimension: usize,
    size: usize,
}

impl Grid {
    /// Default bound on `N^d`.
    pub const DEFAULT_SIZE_LIMIT: usize = 1 << 20;

    /// Create a grid for `Z_N^d` with the default size limit.
    pub fn new(modulus: usize, dimension: usize) -> Result<Self> {
        Self::with_limit(modulus, dimension, Self::DEFAULT_SIZE_LIMIT)
    }

    /// Create a grid with an explicit bound on `N^d`.
    pub fn with_limit(modulus: usize, dimension: usize, limit: usize) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::GridSize(format!("modulus must be >= 2, got {modulus}")));
        }
        if dimension < 1 {
            return Err(Error::GridSize("dimension must be >= 1".into()));
        }
        let mut size: usize = 1;
        for _ in 0..dimension {
            size = size
                .checked_mul(modulus)
                .ok_or_else(|| Error::GridSize(format!("{modulus}^{dimension} overflows")))?;
        }
        if size > limit {
            return Err(Error::GridSize(format!(
                "{modulus}^{dimension} = {size} exceeds the size limit {limit}"
            )));
        }
        Ok(Self { modulus, dimension, size })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Total number of points, `N^d`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Build a point from signed coordinates, reducing each into `[0, N)`.
    ///
    /// Negative inputs are accepted and reduced canonically, so `-x` can be
    /// formed by negating coordinates.
    pub fn point(&self, coords: &[i64]) -> Result<LatticePoint> {
        if coords.len() != self.dimension {
            return Err(Error::Dimension { expected: self.dimension, got: coords.len() });
        }
        let n = self.modulus as i64;
        let reduced = coords.iter().map(|&c| c.rem_euclid(n) as usize).collect();
        Ok(LatticePoint { grid: *self, coords: reduced })
    }

    /// Decode the point at a canonical (row-major) index.
    ///
    /// Panics if `index >= self.size()`.
    pub fn point_at(&self, index: usize) -> LatticePoint {
        assert!(index < self.size, "point index {index} out of range for grid of size {}", self.size);
        let mut coords = vec![0usize; self.dimension];
        let mut rest = index;
        for k in (0..self.dimension).rev() {
            coords[k] = rest % self.modulus;
            rest /= self.modulus;
        }
        LatticePoint { grid: *self, coords }
    }

    /// Row-major index of a coordinate tuple already reduced into `[0, N)`.
    pub(crate) fn index_of_coords(&self, coords: &[usize]) -> usize {
        let mut idx = 0usize;
        for &c in coords {
            idx = idx * self.modulus + c;
        }
        idx
    }

    /// Yield all `N^d` points exactly once, in row-major order.
    pub fn enumerate(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.size).map(move |i| self.point_at(i))
    }

    /// The set containing every point of the grid.
    pub fn full_set(&self) -> LatticeSet {
        LatticeSet { grid: *self, indices: (0..self.size).collect() }
    }

    /// The empty set on this grid.
    pub fn empty_set(&self) -> LatticeSet {
        LatticeSet { grid: *self, indices: Vec::new() }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                expected_n: self.modulus,
                expected_d: self.dimension,
                got_n: other.modulus,
                got_d: other.dimension,
            });
        }
        Ok(())
    }
}

/// An element of `Z_N^d`, stored with every coordinate reduced into `[0, N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    grid: Grid,
    coords: Vec<usize>,
}

impl LatticePoint {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// Canonical row-major index of this point.
    pub fn index(&self) -> usize {
        self.grid.index_of_coords(&self.coords)
    }

    /// `(x . m) mod N = (sum_k x_k m_k) mod N`, in `[0, N)`.
    pub fn dot(&self, other: &LatticePoint) -> Result<usize> {
        self.grid.check_same(&other.grid)?;
        let n = self.grid.modulus as u64;
        let mut acc: u64 = 0;
        for (&a, &b) in self.coords.iter().zip(other.coords.iter()) {
            acc = (acc + (a as u64 * b as u64) % n) % n;
        }
        Ok(acc as usize)
    }
}

/// A subset of a grid, kept sorted by canonical index (row-major on
/// coordinates) with no duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSet {
    grid: Grid,
    indices: Vec<usize>,
}

impl LatticeSet {
    /// Build a set from points, all of which must live on `grid`.
    pub fn new(grid: Grid, points: impl IntoIterator<Item = LatticePoint>) -> Result<Self> {
        let mut indices = Vec::new();
        for p in points {
            grid.check_same(&p.grid)?;
            indices.push(p.index());
        }
        Self::from_indices(grid, indices)
    }

    /// Build a set from canonical indices; sorts and deduplicates.
    pub fn from_indices(grid: Grid, mut indices: Vec<usize>) -> Result<Self> {
        for &i in &indices {
            if i >= grid.size() {
                return Err(Error::InvalidParameter(format!(
                    "point index {i} out of range for grid of size {}",
                    grid.size()
                )));
            }
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Self { grid, indices })
    }

    /// Build a set from signed coordinate tuples (reduced like [`Grid::point`]).
    pub fn from_coords(grid: Grid, rows: &[Vec<i64>]) -> Result<Self> {
        let mut indices = Vec::with_capacity(rows.len());
        for row in rows {
            indices.push(grid.point(row)?.index());
        }
        Self::from_indices(grid, indices)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Sorted canonical indices of the members.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.grid == p.grid && self.contains_index(p.index())
    }

    /// Members as points, in canonical order.
    pub fn points(&self) -> Vec<LatticePoint> {
        self.indices.iter().map(|&i| self.grid.point_at(i)).collect()
    }

    /// Coordinate rows `[[c_0, ..., c_{d-1}], ...]` in canonical order,
    /// matching the JSON representation.
    pub fn coord_rows(&self) -> Vec<Vec<usize>> {
        self.indices
            .iter()
            .map(|&i| self.grid.point_at(i).coords().to_vec())
            .collect()
    }

    /// Dense membership mask over canonical indices.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.grid.size()];
        for &i in &self.indices {
            mask[i] = true;
        }
        mask
    }

    pub fn union(&self, other: &LatticeSet) -> Result<LatticeSet> {
        self.grid.check_same(&other.grid)?;
        let mut indices = Vec::with_capacity(self.len() + other.len());
        indices.extend_from_slice(&self.indices);
        indices.extend_from_slice(&other.indices);
        LatticeSet::from_indices(self.grid, indices)
    }

    pub fn intersection(&self, other: &LatticeSet) -> Result<LatticeSet> {
        self.grid.check_same(&other.grid)?;
        let indices = self
            .indices
            .iter()
            .copied()
            .filter(|&i| other.contains_index(i))
            .collect();
        Ok(LatticeSet { grid: self.grid, indices })
    }

    /// Set difference `self \ other`.
    pub fn difference(&self, other: &LatticeSet) -> Result<LatticeSet> {
        self.grid.check_same(&other.grid)?;
        let indices = self
            .indices
            .iter()
            .copied()
            .filter(|&i| !other.contains_index(i))
            .collect();
        Ok(LatticeSet { grid: self.grid, indices })
    }

    /// Complement within the grid.
    pub fn complement(&self) -> LatticeSet {
        let mask = self.mask();
        let indices = (0..self.grid.size()).filter(|&i| !mask[i]).collect();
        LatticeSet { grid: self.grid, indices }
    }
}

// Serializes as a sorted array of coordinate tuples. Deserialization needs
// grid context, so parent structures carry N and d and call `from_coords`.
impl Serialize for LatticeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.coord_rows();
        let mut seq = serializer.serialize_seq(Some(rows.len()))?;
        for row in rows {
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, d: usize) -> Grid {
        Grid::new(n, d).unwrap()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(1, 1).is_err());
        assert!(Grid::new(0, 1).is_err());
        assert!(Grid::new(2, 0).is_err());
        assert!(Grid::new(2, 21).is_err()); // 2^21 over the default limit
        assert!(Grid::with_limit(2, 21, 1 << 22).is_ok());
    }

    #[test]
    fn dot_examples() {
        let g = grid(8, 1);
        let x = g.point(&[3]).unwrap();
        let m = g.point(&[5]).unwrap();
        assert_eq!(x.dot(&m).unwrap(), 7); // 15 mod 8

        let g = grid(4, 2);
        let x = g.point(&[1, 2]).unwrap();
        let m = g.point(&[2, 3]).unwrap();
        assert_eq!(x.dot(&m).unwrap(), 0); // 8 mod 4

        let g = grid(5, 1);
        let zero = g.point(&[0]).unwrap();
        for m in g.enumerate() {
            assert_eq!(zero.dot(&m).unwrap(), 0);
        }
    }

    #[test]
    fn dot_rejects_grid_mismatch() {
        let a = grid(8, 1).point(&[1]).unwrap();
        let b = grid(4, 1).point(&[1]).unwrap();
        assert!(a.dot(&b).is_err());
    }

    #[test]
    fn negative_coordinates_reduce() {
        let g = grid(8, 1);
        assert_eq!(g.point(&[-1]).unwrap().coords(), &[7]);
        assert_eq!(g.point(&[-8]).unwrap().coords(), &[0]);
        assert_eq!(g.point(&[-17]).unwrap().coords(), &[7]);
    }

    #[test]
    fn enumerate_row_major() {
        let g = grid(2, 1);
        let pts: Vec<_> = g.enumerate().map(|p| p.coords().to_vec()).collect();
        assert_eq!(pts, vec![vec![0], vec![1]]);

        let g = grid(2, 2);
        let pts: Vec<_> = g.enumerate().map(|p| p.coords().to_vec()).collect();
        assert_eq!(pts, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        let g = grid(3, 1);
        assert_eq!(g.enumerate().count(), 3);
    }

    #[test]
    fn index_roundtrip() {
        let g = grid(5, 3);
        for i in 0..g.size() {
            assert_eq!(g.point_at(i).index(), i);
        }
    }

    #[test]
    fn set_ops_examples() {
        let g = grid(4, 1);
        let a = LatticeSet::from_indices(g, vec![0, 2]).unwrap();
        let b = LatticeSet::from_indices(g, vec![2, 3]).unwrap();
        assert_eq!(a.intersection(&b).unwrap().indices(), &[2]);
        assert_eq!(a.difference(&b).unwrap().indices(), &[0]);
        assert!(g.full_set().complement().is_empty());
    }

    #[test]
    fn set_serializes_to_sorted_coord_rows() {
        let g = grid(4, 2);
        let s = LatticeSet::from_coords(g, &[vec![3, 1], vec![0, 2]]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[[0,2],[3,1]]");
    }
}
