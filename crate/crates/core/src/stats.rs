//! Closed-form recovery statistics in exact rational arithmetic.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seedtree::{leaf_count, leaf_span};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("context invalid: {0}")]
    BadContext(String),
    #[error("enumeration of {0} digests exceeds the budget of {1}")]
    TooLarge(u128, u128),
    #[error("probability {0} outside (0, 1]")]
    BadProbability(f64),
}

/// `ell` counts subtree leaves among the first `t` leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeContext {
    pub t: usize,
    pub w: usize,
    pub s: usize,
    pub ell: usize,
}

impl NodeContext {
    pub fn new(t: usize, w: usize, s: usize, ell: usize) -> Result<Self, StatsError> {
        let ctx = Self { t, w, s, ell };
        ctx.validate()?;
        Ok(ctx)
    }

    /// Context for a fault at `node` in the tree over `t` rounds.
    pub fn for_node(t: usize, w: usize, s: usize, node: usize) -> Result<Self, StatsError> {
        let l2 = leaf_count(t);
        if node >= 2 * l2 - 1 {
            return Err(StatsError::BadContext(format!("node {node} outside tree")));
        }
        let (lo, hi) = leaf_span(node, l2);
        let ell = hi.min(t).saturating_sub(lo);
        Self::new(t, w, s, ell)
    }

    fn validate(&self) -> Result<(), StatsError> {
        if self.w > self.t || self.ell > self.t || self.s < 2 {
            return Err(StatsError::BadContext(format!("{self:?}")));
        }
        Ok(())
    }
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * big((n - i) as u64) / big((i + 1) as u64);
    }
    acc
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |a, i| a * big(i))
}

pub fn stirling2(r: usize, m: usize) -> BigUint {
    if m > r {
        return BigUint::zero();
    }
    let mut row = vec![BigUint::zero(); m + 1];
    row[0] = BigUint::one();
    for i in 1..=r {
        for j in (1..=m.min(i)).rev() {
            row[j] = &row[j] * big(j as u64) + &row[j - 1];
        }
        row[0] = BigUint::zero();
    }
    row[m].clone()
}

/// Hypergeometric law of the number of nonzero digest entries inside the subtree.
pub fn prob_w(ctx: &NodeContext, r: usize) -> BigRational {
    if r > ctx.w || r > ctx.ell || ctx.w - r > ctx.t - ctx.ell {
        return BigRational::zero();
    }
    ratio(
        binomial(ctx.ell, r) * binomial(ctx.t - ctx.ell, ctx.w - r),
        binomial(ctx.t, ctx.w),
    )
}

/// Probability of exactly `m` distinct values among `r` uniform draws from `s-1` symbols.
pub fn prob_x_given_w(ctx: &NodeContext, m: usize, r: usize) -> BigRational {
    let k = ctx.s - 1;
    if m > k || m > r {
        return BigRational::zero();
    }
    let num = factorial(m) * binomial(k, m) * stirling2(r, m);
    ratio(num, big(k as u64).pow(r as u32))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryDistribution {
    /// `Pr[X = m]` for `m = 0 ..= s-1`.
    pub probabilities: Vec<BigRational>,
    pub expectation: BigRational,
}

pub fn recovery_distribution(ctx: &NodeContext) -> RecoveryDistribution {
    let pw: Vec<BigRational> = (0..=ctx.w).map(|r| prob_w(ctx, r)).collect();
    let probabilities: Vec<BigRational> = (0..ctx.s)
        .map(|m| {
            (0..=ctx.w)
                .map(|r| prob_x_given_w(ctx, m, r) * &pw[r])
                .fold(BigRational::zero(), |a, b| a + b)
        })
        .collect();
    let expectation = probabilities
        .iter()
        .enumerate()
        .fold(BigRational::zero(), |a, (m, p)| {
            a + p * BigRational::from_integer(m.into())
        });
    RecoveryDistribution {
        probabilities,
        expectation,
    }
}

/// Unconditional `E[X]`.
pub fn expected_recovered(ctx: &NodeContext) -> BigRational {
    let mut e = BigRational::zero();
    for m in 1..ctx.s {
        let inner = (m..=ctx.w)
            .map(|r| prob_x_given_w(ctx, m, r) * prob_w(ctx, r))
            .fold(BigRational::zero(), |a, b| a + b);
        e += inner * BigRational::from_integer(m.into());
    }
    e
}

/// Probability that a fault at the node is effective: nonzero entries both inside and outside.
pub fn prob_effective(ctx: &NodeContext) -> BigRational {
    (1..ctx.w)
        .map(|r| prob_w(ctx, r))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `E[X | effective]`, conditioning on `1 <= W <= w-1`.
pub fn expected_recovered_effective(ctx: &NodeContext) -> Option<BigRational> {
    let pe = prob_effective(ctx);
    if pe.is_zero() {
        return None;
    }
    let mut e = BigRational::zero();
    for r in 1..ctx.w {
        let pw = prob_w(ctx, r);
        for m in 1..ctx.s {
            e += prob_x_given_w(ctx, m, r) * &pw * BigRational::from_integer(m.into());
        }
    }
    Some(e / pe)
}

pub const BRUTE_FORCE_BUDGET: u128 = 5_000_000;

/// `E[X]` by enumerating every fixed-weight digest, counting distinct nonzero
/// values among the first `ell` positions.
pub fn brute_force_expectation(ctx: &NodeContext) -> Result<BigRational, StatsError> {
    brute_force_with_budget(ctx, BRUTE_FORCE_BUDGET)
}

pub fn brute_force_with_budget(ctx: &NodeContext, budget: u128) -> Result<BigRational, StatsError> {
    let supports = binomial(ctx.t, ctx.w);
    let total = supports.clone() * big((ctx.s - 1) as u64).pow(ctx.w as u32);
    let count = total.to_u128().unwrap_or(u128::MAX);
    if count > budget {
        return Err(StatsError::TooLarge(count, budget));
    }
    let mut sum = 0u64;
    let mut support = Vec::with_capacity(ctx.w);
    enumerate_supports(ctx, 0, &mut support, &mut sum);
    Ok(ratio(big(sum), total))
}

fn enumerate_supports(ctx: &NodeContext, start: usize, support: &mut Vec<usize>, sum: &mut u64) {
    if support.len() == ctx.w {
        let mut values = vec![0usize; ctx.w];
        loop {
            let mut seen = vec![false; ctx.s - 1];
            for (&p, &v) in support.iter().zip(&values) {
                if p < ctx.ell {
                    seen[v] = true;
                }
            }
            *sum += seen.iter().filter(|&&b| b).count() as u64;
            let mut i = 0;
            while i < ctx.w {
                values[i] += 1;
                if values[i] < ctx.s - 1 {
                    break;
                }
                values[i] = 0;
                i += 1;
            }
            if i == ctx.w {
                break;
            }
        }
        return;
    }
    for p in start..ctx.t {
        if ctx.t - p < ctx.w - support.len() {
            break;
        }
        support.push(p);
        enumerate_supports(ctx, p + 1, support, sum);
        support.pop();
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `(n_trial, n_total) = (1/p, n_avg/p)`.
pub fn trial_budget(n_avg: f64, p: f64) -> Result<(f64, f64), StatsError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(StatsError::BadProbability(p));
    }
    Ok((1.0 / p, n_avg / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Set partitions of `{0..r}` into exactly `m` blocks via restricted growth strings.
    fn partitions_oracle(r: usize, m: usize) -> u64 {
        fn go(i: usize, r: usize, max: usize, m: usize) -> u64 {
            if i == r {
                return u64::from(max == m);
            }
            (0..=max.min(m - 1))
                .map(|b| go(i + 1, r, max.max(b + 1), m))
                .sum()
        }
        if r == 0 {
            return u64::from(m == 0);
        }
        if m == 0 {
            return 0;
        }
        go(0, r, 0, m)
    }

    #[test]
    fn stirling_values() {
        assert_eq!(stirling2(0, 0), big(1));
        assert_eq!(stirling2(4, 0), big(0));
        assert_eq!(stirling2(3, 2), big(3));
        assert_eq!(stirling2(5, 3), big(25));
        for r in 0..9 {
            for m in 0..=r + 1 {
                assert_eq!(stirling2(r, m), big(partitions_oracle(r, m)), "S({r},{m})");
            }
        }
    }

    #[test]
    fn hypergeometric_examples() {
        let c = NodeContext::new(4, 2, 2, 2).unwrap();
        assert_eq!(prob_w(&c, 1), q(2, 3));
        let full = NodeContext::new(10, 3, 2, 10).unwrap();
        assert_eq!(prob_w(&full, 3), q(1, 1));
        let none = NodeContext::new(10, 3, 2, 0).unwrap();
        assert_eq!(prob_w(&none, 0), q(1, 1));
        assert!(prob_w(&c, 3).is_zero());
    }

    #[test]
    fn distinct_values_examples() {
        let c = NodeContext::new(8, 4, 2, 4).unwrap();
        for r in 1..5 {
            assert_eq!(prob_x_given_w(&c, 1, r), q(1, 1));
        }
        let c4 = NodeContext::new(8, 4, 4, 4).unwrap();
        assert_eq!(prob_x_given_w(&c4, 2, 2), q(2, 3));
        assert_eq!(prob_x_given_w(&c4, 1, 1), q(1, 1));
        assert!(prob_x_given_w(&c4, 3, 2).is_zero());
    }

    #[test]
    fn small_brute_force_cases() {
        let c = NodeContext::new(6, 2, 3, 3).unwrap();
        assert_eq!(expected_recovered(&c), brute_force_expectation(&c).unwrap());
        let c = NodeContext::new(6, 2, 3, 0).unwrap();
        assert!(brute_force_expectation(&c).unwrap().is_zero());
        let c = NodeContext::new(5, 5, 2, 1).unwrap();
        assert_eq!(brute_force_expectation(&c).unwrap(), q(1, 1));
        let c = NodeContext::new(40, 20, 8, 3).unwrap();
        assert!(matches!(
            brute_force_expectation(&c),
            Err(StatsError::TooLarge(..))
        ));
    }

    #[test]
    fn binary_sets_condition_to_one() {
        let c = NodeContext::for_node(247, 30, 2, 1).unwrap();
        assert_eq!(c.ell, 128);
        assert_eq!(expected_recovered_effective(&c).unwrap(), q(1, 1));
        assert!(expected_recovered(&c) <= q(1, 1));
    }

    #[test]
    fn table_values() {
        let i = NodeContext::for_node(244, 20, 4, 1).unwrap();
        assert!((to_f64(&expected_recovered(&i)) - 2.91).abs() < 0.03);
    }

    #[test]
    fn budget_examples() {
        assert_eq!(trial_budget(1.0, 0.01).unwrap(), (100.0, 100.0));
        assert_eq!(trial_budget(3.0, 1.0).unwrap(), (1.0, 3.0));
        let (a, b) = trial_budget(2.09, 0.01).unwrap();
        assert!((a - 100.0).abs() < 1e-9 && (b - 209.0).abs() < 1e-9);
        assert!(trial_budget(1.0, 0.0).is_err());
        assert!(trial_budget(1.0, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn distribution_sums_to_one(t in 1usize..30, wf in 0.0f64..1.0, s in 2usize..9, ef in 0.0f64..=1.0) {
            let w = ((t as f64) * wf) as usize;
            let ell = ((t as f64) * ef) as usize;
            let c = NodeContext::new(t, w, s, ell).unwrap();
            let d = recovery_distribution(&c);
            let total = d.probabilities.iter().fold(BigRational::zero(), |a, b| a + b);
            prop_assert_eq!(total, q(1, 1));
            prop_assert_eq!(d.expectation, expected_recovered(&c));
        }

        #[test]
        fn monotone_in_ell_and_s(t in 2usize..25, wf in 0.0f64..1.0, s in 2usize..8, ell in 0usize..24) {
            let w = ((t as f64) * wf) as usize;
            let ell = ell.min(t - 1);
            let a = expected_recovered(&NodeContext::new(t, w, s, ell).unwrap());
            let b = expected_recovered(&NodeContext::new(t, w, s, ell + 1).unwrap());
            let c = expected_recovered(&NodeContext::new(t, w, s + 1, ell).unwrap());
            prop_assert!(a <= b);
            prop_assert!(a <= c);
        }
    }
}
