use aqec_core::gf2::{BitMatrix, BitVec, EchelonBasis};
use aqec_core::stream_rng;
use proptest::prelude::*;

/// Textbook elimination over `Vec<Vec<bool>>`.
fn naive_rank(mut m: Vec<Vec<bool>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c]) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[c] {
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn to_bools(m: &BitMatrix) -> Vec<Vec<bool>> {
    (0..m.rows()).map(|r| m.row(r).to_bools()).collect()
}

fn matrix() -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1usize..40, 1usize..140)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(any::<bool>(), c), r))
}

#[test]
fn rank_of_small_matrices() {
    assert_eq!(BitMatrix::identity(70).rank(), 70);
    assert_eq!(BitMatrix::zeros(5, 9).rank(), 0);
    let m = BitMatrix::from_bools(&[
        vec![true, true, false],
        vec![false, true, true],
        vec![true, false, true],
    ]);
    assert_eq!(m.rank(), 2);
}

#[test]
fn rank_matches_naive_elimination_on_word_boundaries() {
    let mut rng = stream_rng(11, 0);
    for &(r, c) in &[(1, 63), (2, 64), (65, 65), (64, 128), (130, 129), (40, 200)] {
        let m = BitMatrix::random(r, c, &mut rng);
        assert_eq!(m.rank(), naive_rank(to_bools(&m)), "{r}x{c}");
    }
}

#[test]
fn inconsistent_system_has_no_solution() {
    let m = BitMatrix::from_bools(&[vec![true, true], vec![true, true]]);
    let b = BitVec::from_bools(&[true, false]);
    assert_eq!(m.solve(&b).unwrap(), None);
}

#[test]
fn solve_rejects_wrong_length() {
    let m = BitMatrix::identity(3);
    assert!(m.solve(&BitVec::zeros(4)).is_err());
}

#[test]
fn mul_checks_inner_dimension() {
    assert!(BitMatrix::zeros(2, 3).mul(&BitMatrix::zeros(2, 3)).is_err());
}

#[test]
fn bitvec_set_operations() {
    let a = BitVec::from_bools(&[true, false, true, false]);
    let b = BitVec::from_bools(&[false, false, true, true]);
    assert!(a.intersects(&b));
    assert!(a.dot(&b));
    let mut c = a.clone();
    c.or_assign(&b);
    assert_eq!(c.iter_ones().collect::<Vec<_>>(), vec![0, 2, 3]);
    let mut d = a.clone();
    d.xor_assign(&b);
    assert_eq!(d.iter_ones().collect::<Vec<_>>(), vec![0, 3]);
    assert_eq!(d.first_one(), Some(0));
    assert!(BitVec::zeros(130).is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_agrees_with_naive(rows in matrix()) {
        let m = BitMatrix::from_bools(&rows);
        prop_assert_eq!(m.rank(), naive_rank(rows));
    }

    #[test]
    fn rank_is_transpose_invariant(rows in matrix()) {
        let m = BitMatrix::from_bools(&rows);
        prop_assert_eq!(m.rank(), m.transpose().rank());
        prop_assert!(m.rank() <= m.rows().min(m.cols()));
    }

    #[test]
    fn solve_returns_a_solution_of_consistent_systems(rows in matrix(), seed in any::<u64>()) {
        let m = BitMatrix::from_bools(&rows);
        let mut rng = stream_rng(seed, 0);
        let x = BitMatrix::random(1, m.cols(), &mut rng).row(0);
        let b = m.mul_vec(&x).unwrap();
        let y = m.solve(&b).unwrap().expect("consistent by construction");
        prop_assert_eq!(m.mul_vec(&y).unwrap(), b);
    }

    #[test]
    fn echelon_basis_tracks_rank(rows in matrix()) {
        let m = BitMatrix::from_bools(&rows);
        let mut basis = EchelonBasis::new(m.cols());
        let mut independent = 0;
        for r in 0..m.rows() {
            if basis.insert(&m.row(r)) {
                independent += 1;
            }
            prop_assert!(basis.contains(&m.row(r)));
        }
        prop_assert_eq!(independent, m.rank());
        prop_assert_eq!(basis.rank(), m.rank());
    }

    #[test]
    fn product_is_associative_with_vectors(a in matrix(), seed in any::<u64>()) {
        let m = BitMatrix::from_bools(&a);
        let mut rng = stream_rng(seed, 1);
        let n = BitMatrix::random(m.cols(), 17, &mut rng);
        let x = BitMatrix::random(1, 17, &mut rng).row(0);
        let left = m.mul(&n).unwrap().mul_vec(&x).unwrap();
        let right = m.mul_vec(&n.mul_vec(&x).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn hstack_rank_bounds(a in matrix(), seed in any::<u64>()) {
        let m = BitMatrix::from_bools(&a);
        let mut rng = stream_rng(seed, 2);
        let other = BitMatrix::random(m.rows(), 9, &mut rng);
        let joined = m.hstack(&other);
        prop_assert!(joined.rank() >= m.rank().max(other.rank()));
        prop_assert!(joined.rank() <= m.rank() + other.rank());
    }
}
