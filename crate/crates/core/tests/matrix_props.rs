//! Property tests for the exact linear-algebra layer: determinant laws,
//! solve/inverse round-trips, and annihilator orthogonality hold verbatim
//! (no tolerance) on the rational backend for arbitrary small matrices.

use kptau::{Matrix, Scalar, CQ};
use proptest::prelude::*;

/// Small complex rationals: numerators in [-4, 4], denominators in [1, 4].
fn cq() -> impl Strategy<Value = CQ> {
    (-4i64..=4, 1i64..=4, -4i64..=4, 1i64..=4).prop_map(|(nr, dr, ni, di)| {
        CQ::from_ratio(nr, dr) + CQ::from_ratio(ni, di) * CQ::from_re_im(0.0, 1.0)
    })
}

fn square(n: usize) -> impl Strategy<Value = Matrix<CQ>> {
    prop::collection::vec(cq(), n * n).prop_map(move |d| Matrix::new(n, n, d))
}

fn wide(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<CQ>> {
    prop::collection::vec(cq(), rows * cols).prop_map(move |d| Matrix::new(rows, cols, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_is_multiplicative(n in 1usize..=4, seed in prop::collection::vec(cq(), 32)) {
        let a = Matrix::from_fn(n, n, |i, j| seed[i * n + j].clone());
        let b = Matrix::from_fn(n, n, |i, j| seed[16 + i * n + j].clone());
        let lhs = a.mul(&b).det().unwrap();
        let rhs = a.det().unwrap() * b.det().unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn determinant_survives_transposition(a in square(3)) {
        prop_assert_eq!(a.det().unwrap(), a.transpose().det().unwrap());
    }

    #[test]
    fn solve_round_trips_exactly(a in square(3), b in wide(3, 2)) {
        prop_assume!(a.det().unwrap() != CQ::from_i64(0));
        let x = a.solve(&b).unwrap();
        prop_assert_eq!(a.mul(&x), b);
    }

    #[test]
    fn inverse_round_trips_exactly(a in square(3)) {
        prop_assume!(a.det().unwrap() != CQ::from_i64(0));
        let inv = a.inverse().unwrap();
        prop_assert_eq!(a.mul(&inv), Matrix::identity(3));
        prop_assert_eq!(inv.mul(&a), Matrix::identity(3));
    }

    #[test]
    fn row_annihilator_is_orthogonal_to_the_row_space(a in wide(2, 4)) {
        let perp = a.row_annihilator(1e-12).unwrap();
        prop_assert_eq!(perp.rows() + a.rank(1e-12), 4);
        let product = a.mul(&perp.transpose());
        prop_assert_eq!(product.max_abs(), 0.0);
    }
}
