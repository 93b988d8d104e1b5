//! Property tests for the algebraic invariants: dot-product bilinearity,
//! set cardinalities, transform round trips and linearity, comb
//! normalization, the pigeonhole concentration bound, and difference
//! decomposition.

use combrec_core::{
    decompose, difference_decomposition, forward_dft, forward_dft_fft, inverse_dft,
    uncertainty_report, DiracComb, Grid, LatticeSet, Signal,
};
use num_complex::Complex64;
use proptest::collection::vec;
use proptest::prelude::*;

fn grid_and_values() -> impl Strategy<Value = (Grid, Vec<Complex64>)> {
    (2usize..=12, 1usize..=2)
        .prop_flat_map(|(n, d)| {
            let grid = Grid::new(n, d).unwrap();
            let size = grid.size();
            (
                Just(grid),
                vec((-2.0f64..2.0, -2.0f64..2.0), size..=size)
                    .prop_map(|pairs| pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()),
            )
        })
}

/// Grid plus a signal whose values come from a three-element palette
/// `{0, a, b}`, so decomposing it yields a small comb.
fn palette_signal() -> impl Strategy<Value = (Grid, Vec<Complex64>)> {
    (2usize..=16,)
        .prop_flat_map(|(n,)| {
            let grid = Grid::new(n, 1).unwrap();
            (
                Just(grid),
                (-3.0f64..3.0, -3.0f64..3.0),
                (-3.0f64..3.0, -3.0f64..3.0),
                vec(0usize..3, n..=n),
            )
        })
        .prop_map(|(grid, a, b, picks)| {
            let palette =
                [Complex64::new(0.0, 0.0), Complex64::new(a.0, a.1), Complex64::new(b.0, b.1)];
            (grid, picks.into_iter().map(|i| palette[i]).collect())
        })
}

fn comb_from_values(grid: Grid, values: Vec<Complex64>) -> DiracComb {
    decompose(&Signal::new(grid, values).unwrap(), 0.0).unwrap()
}

proptest! {
    #[test]
    fn dot_is_bilinear_mod_n(
        n in 2usize..=32,
        x in vec(-100i64..100, 2),
        y in vec(-100i64..100, 2),
        m in vec(-100i64..100, 2),
    ) {
        let grid = Grid::new(n, 2).unwrap();
        let xs = grid.point(&x).unwrap();
        let ys = grid.point(&y).unwrap();
        let ms = grid.point(&m).unwrap();
        let sum: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let sum_point = grid.point(&sum).unwrap();
        prop_assert_eq!(
            sum_point.dot(&ms).unwrap(),
            (xs.dot(&ms).unwrap() + ys.dot(&ms).unwrap()) % n
        );
    }

    #[test]
    fn enumerate_is_complete_and_duplicate_free(n in 2usize..=8, d in 1usize..=3) {
        let grid = Grid::new(n, d).unwrap();
        let mut indices: Vec<usize> = grid.enumerate().map(|p| p.index()).collect();
        prop_assert_eq!(indices.len(), grid.size());
        indices.sort_unstable();
        indices.dedup();
        prop_assert_eq!(indices.len(), grid.size());
    }

    #[test]
    fn set_cardinalities_split(
        n in 2usize..=32,
        a_bits in vec(any::<bool>(), 32),
        b_bits in vec(any::<bool>(), 32),
    ) {
        let grid = Grid::new(n, 1).unwrap();
        let pick = |bits: &[bool]| {
            LatticeSet::from_indices(
                grid,
                (0..n).filter(|&i| bits[i]).collect(),
            )
            .unwrap()
        };
        let a = pick(&a_bits);
        let b = pick(&b_bits);
        prop_assert_eq!(
            a.intersection(&b).unwrap().len() + a.difference(&b).unwrap().len(),
            a.len()
        );
        prop_assert_eq!(a.union(&b).unwrap().len() + a.intersection(&b).unwrap().len(),
            a.len() + b.len());
        prop_assert_eq!(a.complement().len(), n - a.len());
    }

    #[test]
    fn dft_round_trip_and_fft_agreement((grid, values) in grid_and_values()) {
        let f = Signal::new(grid, values).unwrap();
        let peak = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let spectrum = forward_dft(&f);
        let back = inverse_dft(&spectrum);
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).norm() <= 1e-12 * peak.max(1.0));
        }
        let fast = forward_dft_fft(&f);
        for (a, b) in spectrum.values().iter().zip(fast.values()) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
    }

    #[test]
    fn dft_is_linear(
        (grid, values_a) in grid_and_values(),
        scale_re in -2.0f64..2.0,
        scale_im in -2.0f64..2.0,
    ) {
        let a = Signal::new(grid, values_a.clone()).unwrap();
        let scale = Complex64::new(scale_re, scale_im);
        let scaled =
            Signal::new(grid, values_a.iter().map(|v| v * scale).collect()).unwrap();
        let fa = forward_dft(&a);
        let fs = forward_dft(&scaled);
        for (x, y) in fa.values().iter().zip(fs.values()) {
            prop_assert!((x * scale - y).norm() <= 1e-10);
        }
    }

    #[test]
    fn decompose_then_evaluate_is_identity((grid, values) in palette_signal()) {
        let f = Signal::new(grid, values).unwrap();
        let comb = decompose(&f, 0.0).unwrap();
        let evaluated = comb.to_signal();
        prop_assert_eq!(evaluated.values(), f.values());
        // And the decomposition of the evaluation is the same comb.
        prop_assert_eq!(&decompose(&comb.to_signal(), 0.0).unwrap(), &comb);
    }

    #[test]
    fn pigeonhole_concentration_literal((grid, values) in palette_signal()) {
        let f = Signal::new(grid, values).unwrap();
        let comb = comb_from_values(grid, f.values().to_vec());
        prop_assume!(!comb.is_zero());
        for p in [0.5, 1.0, 2.0, 3.0] {
            let triple = comb.effective_triple(p).unwrap();
            let total: f64 = f.values().iter().map(|v| v.norm().powf(p)).sum();
            let on_a1: f64 =
                triple.support.indices().iter().map(|&i| f.value_at(i).norm().powf(p)).sum();
            prop_assert!(total <= comb.gamma() as f64 * on_a1);
        }
    }

    #[test]
    fn uncertainty_products_hold((grid, values) in palette_signal()) {
        let comb = comb_from_values(grid, values);
        prop_assume!(!comb.is_zero());
        for p in [1.0, 2.0] {
            let report = uncertainty_report(&comb, p, None, 1e-9).unwrap();
            prop_assert!(report.holds, "p={p}: {} < {}", report.product, report.lower_bound);
        }
    }

    #[test]
    fn difference_matches_pointwise_subtraction(
        (grid, values_f) in palette_signal(),
    ) {
        let values_g: Vec<Complex64> = values_f.iter().rev().copied().collect();
        let f = comb_from_values(grid, values_f.clone());
        let g = comb_from_values(grid, values_g.clone());
        let h = difference_decomposition(&f, &g).unwrap();
        let hs = h.to_signal();
        for (i, (a, b)) in values_f.iter().zip(&values_g).enumerate() {
            prop_assert_eq!(hs.value_at(i), a - b);
        }
        let bound = f.gamma() * g.gamma() + f.gamma() + g.gamma();
        prop_assert!(h.gamma() <= bound);
    }
}
