mod common;

use proptest::prelude::*;
use saf_relay::channel::RateMatrix;
use saf_relay::solve_pairing;

use common::brute_force_pairing;

fn table(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_n).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0.0..10.0f64, n), n))
}

fn delay_bound(n: usize) -> impl Strategy<Value = Option<usize>> {
    prop_oneof![Just(None), (0..n).prop_map(Some)]
}

proptest! {
    #[test]
    fn matches_exhaustive_search(values in table(7)) {
        let rates = RateMatrix::causal(&values, None).unwrap();
        let got = solve_pairing(&rates).unwrap().value(&rates);
        let want = brute_force_pairing(&values, None);
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn result_is_causal_and_one_to_one(
        (values, bound) in table(12).prop_flat_map(|v| { let n = v.len(); (Just(v), delay_bound(n)) })
    ) {
        let n = values.len();
        let rates = RateMatrix::causal(&values, bound).unwrap();
        let p = solve_pairing(&rates).unwrap();
        let (mut recv, mut send) = (vec![false; n], vec![false; n]);
        for &(i, j) in &p.pairs {
            prop_assert!(i <= j);
            prop_assert!(bound.is_none_or(|d| j - i <= d));
            prop_assert!(!recv[i] && !send[j]);
            recv[i] = true;
            send[j] = true;
            prop_assert!(values[i][j] > 0.0);
        }
    }

    #[test]
    fn value_grows_with_delay_bound(values in table(10)) {
        let n = values.len();
        let mut last = 0.0;
        for d in 0..n {
            let rates = RateMatrix::causal(&values, Some(d)).unwrap();
            // Score every bound on the unrestricted matrix.
            let full = RateMatrix::causal(&values, None).unwrap();
            let v = solve_pairing(&rates).unwrap().value(&full);
            prop_assert!(v >= last - 1e-9, "bound {d}: {v} < {last}");
            last = v;
        }
        let unbounded = RateMatrix::causal(&values, None).unwrap();
        let v = solve_pairing(&unbounded).unwrap().value(&unbounded);
        prop_assert!((v - last).abs() <= 1e-9 * v.max(1.0));
    }

    #[test]
    fn zero_bound_is_the_positive_diagonal(values in table(10)) {
        let n = values.len();
        let rates = RateMatrix::causal(&values, Some(0)).unwrap();
        let p = solve_pairing(&rates).unwrap();
        let expected: Vec<(usize, usize)> = (0..n).filter(|&k| values[k][k] > 0.0).map(|k| (k, k)).collect();
        prop_assert_eq!(p.pairs, expected);
    }

    #[test]
    fn solving_twice_gives_the_same_pairs(values in table(10)) {
        let rates = RateMatrix::causal(&values, None).unwrap();
        prop_assert_eq!(solve_pairing(&rates).unwrap(), solve_pairing(&rates).unwrap());
    }
}

#[test]
fn partial_matching_beats_perfect_matching() {
    let rates = RateMatrix::causal(&[vec![1.0, 10.0], vec![0.0, 1.0]], None).unwrap();
    let p = solve_pairing(&rates).unwrap();
    assert_eq!(p.pairs, vec![(0, 1)]);
    assert_eq!(p.value(&rates), 10.0);
}

#[test]
fn ties_prefer_shorter_delay() {
    let rates = RateMatrix::causal(&[vec![5.0, 5.0], vec![0.0, 0.0]], None).unwrap();
    assert_eq!(solve_pairing(&rates).unwrap().pairs, vec![(0, 0)]);
}
