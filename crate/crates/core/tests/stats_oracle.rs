//! Rank tests checked against literal enumeration and hand-derived values.

use proptest::prelude::*;
use sentiscope_core::stats::{kruskal_wallis, rank_sum_test, TestMethod};

/// Every size-`k` subset of `0..n`, lexicographic.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Two-sided exact p for distinct values: enumerate every arrangement of ranks
/// `1..=n`, compute U for the first group, double the smaller tail.
fn brute_force_p(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let rank = |v: f64| pooled.iter().position(|&p| p == v).unwrap() + 1;
    let na = a.len();
    let n = na + b.len();
    let u_of = |rank_sum: usize| rank_sum as f64 - (na * (na + 1)) as f64 / 2.0;
    let observed = u_of(a.iter().map(|&v| rank(v)).sum());
    let arrangements = combinations(n, na);
    let total = arrangements.len() as f64;
    let mut le = 0usize;
    let mut ge = 0usize;
    for subset in &arrangements {
        let u = u_of(subset.iter().map(|i| i + 1).sum());
        if u <= observed {
            le += 1;
        }
        if u >= observed {
            ge += 1;
        }
    }
    (observed, (2.0 * le.min(ge) as f64 / total).min(1.0))
}

#[test]
fn exact_path_equals_enumeration_for_all_small_partitions() {
    let mut checked = 0;
    for n in 2..=10usize {
        let values: Vec<f64> = (1..=n).map(|v| v as f64 * 1.5 - 4.0).collect();
        for na in 1..n {
            for subset in combinations(n, na) {
                let a: Vec<f64> = subset.iter().map(|&i| values[i]).collect();
                let b: Vec<f64> = (0..n).filter(|i| !subset.contains(i)).map(|i| values[i]).collect();
                let r = rank_sum_test(&a, &b).unwrap();
                let (u, p) = brute_force_p(&a, &b);
                assert_eq!(r.method, TestMethod::Exact);
                assert_eq!(r.statistic, u);
                assert!((r.p_value - p).abs() < 1e-12, "a={a:?} b={b:?}: {} vs {p}", r.p_value);
                checked += 1;
            }
        }
    }
    assert_eq!(checked, (2..=10).map(|n: u32| 2usize.pow(n) - 2).sum::<usize>());
}

#[test]
fn fully_separated_six_and_seven() {
    let achievers = [-220.0, -230.0, -210.0, -225.0, -240.0, -215.0];
    let explorers = [100.0, 110.0, 120.0, 105.0, 99.0, 130.0, 101.0];
    let r = rank_sum_test(&achievers, &explorers).unwrap();
    assert_eq!(combinations(13, 6).len(), 1716);
    assert!((r.p_value - 2.0 / 1716.0).abs() < 1e-15);
    assert_eq!(r.statistic, 0.0);
}

#[test]
fn kruskal_wallis_hand_derived() {
    // rank sums 6, 15, 24: 12/90·(12 + 75 + 192) − 30
    let r = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]]).unwrap();
    assert!((r.statistic - 7.2).abs() < 1e-12);
}

#[test]
fn kruskal_wallis_detects_strong_shift() {
    let groups: Vec<Vec<f64>> = (0..3)
        .map(|g| (0..13).map(|i| 1000.0 * g as f64 + (i * 7 % 13) as f64).collect())
        .collect();
    let r = kruskal_wallis(&groups).unwrap();
    assert!(r.p_value < 0.05);
    assert!(r.statistic > 30.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kruskal_wallis_rank_invariant(
        groups in prop::collection::vec(prop::collection::vec(-50i32..50, 1..8), 2..5),
        transform in 0usize..3,
    ) {
        let values: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|&v| f64::from(v)).collect()).collect();
        let f = |x: f64| match transform {
            0 => x * x * x + 7.0,
            1 => (x / 10.0).exp(),
            _ => 3.0 * x - 100.0,
        };
        let mapped: Vec<Vec<f64>> = values.iter().map(|g| g.iter().map(|&v| f(v)).collect()).collect();
        match (kruskal_wallis(&values), kruskal_wallis(&mapped)) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.statistic, y.statistic);
                prop_assert_eq!(x.p_value, y.p_value);
                prop_assert!((0.0..=1.0).contains(&x.p_value));
            }
            (Err(x), Err(y)) => prop_assert_eq!(x, y),
            (x, y) => prop_assert!(false, "diverged: {:?} vs {:?}", x, y),
        }
    }

    #[test]
    fn rank_sum_p_in_unit_interval(
        a in prop::collection::vec(-20i32..20, 1..16),
        b in prop::collection::vec(-20i32..20, 1..16),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let ab = rank_sum_test(&a, &b).unwrap();
        let ba = rank_sum_test(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert!((ab.statistic + ba.statistic - (a.len() * b.len()) as f64).abs() < 1e-9);
    }
}
