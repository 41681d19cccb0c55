//! Rank-based hypothesis tests and the special functions they need.
//!
//! The chi-squared tail comes from the regularized upper incomplete gamma
//! function (series below `a + 1`, Lentz continued fraction above), so no
//! external statistics library is involved.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Exact rank-sum enumeration is used while both groups have at most this many values.
pub const EXACT_MAX_GROUP: usize = 10;

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    Exact,
    NormalApproximation,
    ChiSquaredApproximation,
}

impl TestMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TestMethod::Exact => "exact",
            TestMethod::NormalApproximation => "normal-approximation",
            TestMethod::ChiSquaredApproximation => "chi-squared-approximation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatTestResult {
    /// `K` for Kruskal-Wallis, `U` of the first group for the rank-sum test.
    pub statistic: f64,
    pub p_value: f64,
    pub method: TestMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    EmptyGroup,
    TooFewGroups,
    TooFewObservations,
    NonFinite,
    /// Every observation shares one value, so the tie correction vanishes.
    AllTied,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::EmptyGroup => f.write_str("every group needs at least one observation"),
            StatsError::TooFewGroups => f.write_str("at least two groups are required"),
            StatsError::TooFewObservations => f.write_str("at least three observations are required"),
            StatsError::NonFinite => f.write_str("observations must be finite"),
            StatsError::AllTied => f.write_str("degenerate: all tied"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Midranks (1-based, ties averaged) and the sizes of every tie block.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

fn tie_sum(ties: &[usize]) -> f64 {
    ties.iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum()
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = core::f64::consts::PI;
        return libm::log(pi / libm::sin(pi * x).abs()) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * libm::log(2.0 * core::f64::consts::PI) + (x + 0.5) * libm::log(t) - t + libm::log(acc)
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - ln_gamma(a))
}

fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - ln_gamma(a)) * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x).clamp(0.0, 1.0)
    } else {
        (1.0 - upper_continued_fraction(a, x)).clamp(0.0, 1.0)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - lower_series(a, x)).clamp(0.0, 1.0)
    } else {
        upper_continued_fraction(a, x).clamp(0.0, 1.0)
    }
}

/// Upper tail `P(X ≥ x)` of a chi-squared variable with `df` degrees of freedom.
pub fn chi_squared_sf(x: f64, df: f64) -> f64 {
    gamma_q(df / 2.0, x / 2.0)
}

/// Two-sided standard normal tail `P(|Z| ≥ z)`.
pub fn normal_two_sided(z: f64) -> f64 {
    libm::erfc(z.abs() / core::f64::consts::SQRT_2).min(1.0)
}

/// Kruskal-Wallis H with tie correction; p from chi-squared with `groups − 1` df.
pub fn kruskal_wallis<G: AsRef<[f64]>>(groups: &[G]) -> Result<StatTestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups);
    }
    if groups.iter().any(|g| g.as_ref().is_empty()) {
        return Err(StatsError::EmptyGroup);
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = pooled.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations);
    }
    let (ranks, ties) = midranks(&pooled);
    let nf = n as f64;
    let correction = 1.0 - tie_sum(&ties) / (nf * nf * nf - nf);
    if correction <= 0.0 {
        return Err(StatsError::AllTied);
    }
    let mut offset = 0;
    let mut weighted = 0.0;
    for g in groups {
        let len = g.as_ref().len();
        let rank_sum: f64 = ranks[offset..offset + len].iter().sum();
        weighted += rank_sum * rank_sum / len as f64;
        offset += len;
    }
    let h = 12.0 / (nf * (nf + 1.0)) * weighted - 3.0 * (nf + 1.0);
    let k = (h / correction).max(0.0);
    Ok(StatTestResult {
        statistic: k,
        p_value: chi_squared_sf(k, (groups.len() - 1) as f64),
        method: TestMethod::ChiSquaredApproximation,
    })
}

/// Two-sided Wilcoxon rank-sum (Mann–Whitney U) test of `a` against `b`.
///
/// While both groups hold at most [`EXACT_MAX_GROUP`] values the p-value is
/// exact: the observed rank sum is compared against every way of choosing
/// `|a|` of the pooled midranks. Ties are handled by permuting the midranks
/// themselves. Larger samples use the normal approximation with tie-corrected
/// variance and a continuity correction.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<StatTestResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyGroup);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let na = a.len();
    let nb = b.len();
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;

    if na.max(nb) <= EXACT_MAX_GROUP {
        // midranks are multiples of 1/2, so doubled ranks are exact integers
        let doubled: Vec<usize> = ranks.iter().map(|&r| libm::round(2.0 * r) as usize).collect();
        let observed: usize = doubled[..na].iter().sum();
        let p = exact_two_sided(&doubled, na, observed);
        return Ok(StatTestResult {
            statistic: u,
            p_value: p,
            method: TestMethod::Exact,
        });
    }

    let (naf, nbf) = (na as f64, nb as f64);
    let n = naf + nbf;
    let mean = naf * nbf / 2.0;
    let variance = naf * nbf / 12.0 * ((n + 1.0) - tie_sum(&ties) / (n * (n - 1.0)));
    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / libm::sqrt(variance);
        normal_two_sided(z)
    };
    Ok(StatTestResult {
        statistic: u,
        p_value: p,
        method: TestMethod::NormalApproximation,
    })
}

/// Counts size-`k` subsets of `weights` by total weight and doubles the smaller tail.
fn exact_two_sided(weights: &[usize], k: usize, observed: usize) -> f64 {
    let max_sum: usize = weights.iter().sum();
    // counts[j][s]: subsets of size j with weight s among the items seen so far
    let mut counts = vec![vec![0u64; max_sum + 1]; k + 1];
    counts[0][0] = 1;
    for (seen, &w) in weights.iter().enumerate() {
        for j in (1..=k.min(seen + 1)).rev() {
            let (lower, upper) = counts.split_at_mut(j);
            let from = &lower[j - 1];
            let to = &mut upper[0];
            for s in (w..=max_sum).rev() {
                to[s] += from[s - w];
            }
        }
    }
    let dist = &counts[k];
    let total: u64 = dist.iter().sum();
    let lower: u64 = dist[..=observed].iter().sum();
    let upper: u64 = dist[observed..].iter().sum();
    let tail = lower.min(upper) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}

/// Per-comparison significance level after Bonferroni correction.
pub fn bonferroni_threshold(alpha: f64, comparisons: usize) -> f64 {
    alpha / comparisons.max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_average_ties() {
        let (r, t) = midranks(&[1.0, 2.0, 2.0, 4.0, 5.0, 6.0, 7.0, 7.0, 9.0, 10.0]);
        assert_eq!(r, [1.0, 2.5, 2.5, 4.0, 5.0, 6.0, 7.5, 7.5, 9.0, 10.0]);
        assert_eq!(t, [2, 2]);
    }

    #[test]
    fn ln_gamma_at_integers() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - libm::log(fact)).abs() < 1e-12, "n={n}");
            fact *= n as f64;
        }
        // Γ(1/2) = √π
        assert!((ln_gamma(0.5) - 0.5 * libm::log(core::f64::consts::PI)).abs() < 1e-13);
    }

    #[test]
    fn chi_squared_closed_forms() {
        // df = 2: exp(-x/2); df = 1: erfc(sqrt(x/2))
        for &x in &[0.01, 0.5, 1.0, 3.0, 7.2, 15.0, 40.0] {
            let two = chi_squared_sf(x, 2.0);
            assert!((two - libm::exp(-x / 2.0)).abs() < 1e-10, "df2 x={x}");
            let one = chi_squared_sf(x, 1.0);
            assert!((one - libm::erfc(libm::sqrt(x / 2.0))).abs() < 1e-10, "df1 x={x}");
        }
        assert_eq!(chi_squared_sf(0.0, 2.0), 1.0);
    }

    #[test]
    fn gamma_p_and_q_sum_to_one() {
        for &a in &[0.5, 1.0, 2.5, 10.0] {
            for &x in &[0.1, 1.0, 3.5, 12.0] {
                assert!((gamma_p(a, x) + gamma_q(a, x) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kruskal_wallis_separated_groups() {
        let r = kruskal_wallis(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]).unwrap();
        assert!((r.statistic - 7.2).abs() < 1e-12);
        assert!((r.p_value - libm::exp(-3.6)).abs() < 1e-10);
    }

    #[test]
    fn kruskal_wallis_mixed_groups() {
        // ranks {1,3} and {2,4}: H = 12/20·(16/2 + 36/2) − 15 = 0.6
        let r = kruskal_wallis(&[[1.0, 3.0], [2.0, 4.0]]).unwrap();
        assert!((r.statistic - 0.6).abs() < 1e-12);
        assert!(r.p_value > 0.3);
    }

    #[test]
    fn kruskal_wallis_errors() {
        assert_eq!(kruskal_wallis(&[[1.0, 1.0], [1.0, 1.0]]), Err(StatsError::AllTied));
        assert_eq!(kruskal_wallis(&[[1.0, 2.0, 3.0]]), Err(StatsError::TooFewGroups));
        let empty: [&[f64]; 2] = [&[1.0, 2.0], &[]];
        assert_eq!(kruskal_wallis(&empty), Err(StatsError::EmptyGroup));
        assert_eq!(kruskal_wallis(&[[1.0], [2.0]]), Err(StatsError::TooFewObservations));
    }

    #[test]
    fn rank_sum_small_exact() {
        let r = rank_sum_test(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.method, TestMethod::Exact);
        assert!((r.p_value - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn rank_sum_identical_samples() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0];
        let r = rank_sum_test(&a, &a).unwrap();
        assert_eq!(r.method, TestMethod::Exact);
        assert_eq!(r.p_value, 1.0);
        let c = [2.0; 6];
        assert_eq!(rank_sum_test(&c, &[2.0; 7]).unwrap().p_value, 1.0);
    }

    #[test]
    fn rank_sum_fully_separated_six_seven() {
        let a: [f64; 6] = core::array::from_fn(|i| i as f64);
        let b: [f64; 7] = core::array::from_fn(|i| 100.0 + i as f64);
        let r = rank_sum_test(&a, &b).unwrap();
        assert!((r.p_value - 2.0 / 1716.0).abs() < 1e-15);
        assert!((r.p_value - 0.00117).abs() < 1e-5);
    }

    #[test]
    fn rank_sum_large_uses_normal() {
        let a: Vec<f64> = (0..15).map(f64::from).collect();
        let b: Vec<f64> = (0..15).map(|i| f64::from(i) + 0.5).collect();
        let r = rank_sum_test(&a, &b).unwrap();
        assert_eq!(r.method, TestMethod::NormalApproximation);
        assert!(r.p_value > 0.5 && r.p_value <= 1.0);
        assert_eq!(rank_sum_test(&[], &b), Err(StatsError::EmptyGroup));
    }

    #[test]
    fn bonferroni_values() {
        assert!((bonferroni_threshold(0.05, 3) - 0.05 / 3.0).abs() < 1e-18);
        assert!(bonferroni_threshold(0.05, 3) < 0.017);
        assert_eq!(bonferroni_threshold(0.05, 1), 0.05);
        assert_eq!(bonferroni_threshold(0.01, 2), 0.005);
    }
}
