//! Exact laws of `Z1(n)` and `Z2(n)` for laws with bounded offspring support.
//!
//! The distribution of `Z1` is propagated generation by generation by
//! convolving the offspring mass function with itself once per parent; `Z2(n)`
//! is the binomial thinning of `Z1(n - 1)` with the registration probability.
//! Both floating point and exact rational arithmetic are supported.

use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{InitialPopulation, ModelError, OffspringLaw};

/// Largest tolerated probability mass lying beyond the support cap.
pub const MAX_DEFICIT: f64 = 1e-9;

/// Number type the exact propagation can run on.
pub trait Probability:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + ToPrimitive
{
}

impl<T> Probability for T where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + ToPrimitive
{
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution<T> {
    /// `z1[i] = P(Z1(n) = i)`.
    pub z1: Vec<T>,
    /// `z2[i] = P(Z2(n) = i)`, absent for `n = 0`.
    pub z2: Option<Vec<T>>,
    /// Mass of `Z1(n)` dropped beyond the support cap.
    pub deficit: f64,
}

impl ExactDistribution<f64> {
    pub fn mean_z1(&self) -> f64 {
        weighted_mean(&self.z1)
    }

    pub fn mean_z2(&self) -> Option<f64> {
        self.z2.as_deref().map(weighted_mean)
    }
}

fn weighted_mean(dist: &[f64]) -> f64 {
    dist.iter().enumerate().map(|(i, p)| i as f64 * p).sum()
}

/// Evaluates `sum_i dist[i] s^i`.
pub fn pgf_of(dist: &[f64], s: f64) -> f64 {
    dist.iter().rev().fold(0.0, |acc, &p| acc * s + p)
}

fn convolve_capped<T: Probability>(a: &[T], b: &[T], cap: usize) -> Vec<T> {
    let len = (a.len() + b.len() - 1).min(cap);
    let mut out = vec![T::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    out
}

fn total<T: Probability>(v: &[T]) -> T {
    v.iter().cloned().fold(T::zero(), |acc, x| acc + x)
}

fn accumulate<T: Probability>(acc: &mut Vec<T>, weight: &T, v: &[T]) {
    if acc.len() < v.len() {
        acc.resize(v.len(), T::zero());
    }
    for (a, x) in acc.iter_mut().zip(v) {
        *a = a.clone() + weight.clone() * x.clone();
    }
}

/// Mixture `sum_l parent[l] * offspring^{*l}`, truncated to `cap` points.
fn next_generation<T: Probability>(parent: &[T], offspring: &[T], cap: usize) -> Vec<T> {
    let mut out = Vec::new();
    let mut power = vec![T::one()];
    for (l, w) in parent.iter().enumerate() {
        if l > 0 {
            power = convolve_capped(&power, offspring, cap);
        }
        if !w.is_zero() {
            accumulate(&mut out, w, &power);
        }
    }
    if out.is_empty() {
        out.push(T::zero());
    }
    out
}

/// Mixture of `Binomial(l, q)` over `l ~ parent`.
fn thin<T: Probability>(parent: &[T], q: &T) -> Vec<T> {
    let bernoulli = [T::one() - q.clone(), q.clone()];
    let mut out = Vec::new();
    let mut row = vec![T::one()];
    for (l, w) in parent.iter().enumerate() {
        if l > 0 {
            row = convolve_capped(&row, &bernoulli, usize::MAX);
        }
        if !w.is_zero() {
            accumulate(&mut out, w, &row);
        }
    }
    out
}

/// Generic propagation. `offspring[j]` is the probability of `j` new type-1
/// individuals, `init` lists the support of `Z1(0)`.
pub fn propagate<T: Probability>(
    offspring: &[T],
    q: &T,
    init: &[(u64, T)],
    n: usize,
    support_cap: usize,
) -> Result<ExactDistribution<T>, ModelError> {
    if support_cap == 0 {
        return Err(ModelError::Domain("support cap must be positive".into()));
    }
    let mut dist = vec![T::zero(); 1];
    for (k, p) in init {
        let k = *k as usize;
        if k < support_cap {
            if dist.len() <= k {
                dist.resize(k + 1, T::zero());
            }
            dist[k] = dist[k].clone() + p.clone();
        }
    }
    let deficit_of = |d: &[T]| (T::one() - total(d)).to_f64().unwrap_or(f64::NAN);
    let check = |d: &[T]| {
        let deficit = deficit_of(d);
        if deficit > MAX_DEFICIT {
            Err(ModelError::Truncation { cap: support_cap, deficit })
        } else {
            Ok(())
        }
    };
    check(&dist)?;

    let mut z2 = None;
    for generation in 1..=n {
        if generation == n {
            z2 = Some(thin(&dist, q));
        }
        dist = next_generation(&dist, offspring, support_cap);
        check(&dist)?;
    }
    let deficit = deficit_of(&dist).max(0.0);
    Ok(ExactDistribution { z1: dist, z2, deficit })
}

/// Exact laws of `Z1(n)` and `Z2(n)` in double precision.
///
/// Only laws with bounded offspring (finite or truncated families) qualify.
/// Fails with [`ModelError::Truncation`] when more than [`MAX_DEFICIT`] of the
/// mass of `Z1(n)` would fall at or beyond `support_cap`.
pub fn exact_distribution(
    law: &OffspringLaw,
    init: &InitialPopulation,
    n: usize,
    support_cap: usize,
) -> Result<ExactDistribution<f64>, ModelError> {
    let offspring = law.offspring_pmf().ok_or_else(|| {
        ModelError::Unsupported(format!(
            "exact distribution needs bounded offspring support, {} law is unbounded",
            law.family()
        ))
    })?;
    propagate(&offspring, &law.q(), &init.pmf(), n, support_cap)
}

/// Finite offspring law with rational masses, for exact golden values.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalLaw {
    offspring: Vec<BigRational>,
    q: BigRational,
}

impl RationalLaw {
    /// `p0 + sum p_j + q` must be exactly one.
    pub fn new(
        p0: BigRational,
        contamination: Vec<BigRational>,
        q: BigRational,
    ) -> Result<Self, ModelError> {
        let nonneg = |x: &BigRational| *x >= BigRational::zero() && *x <= BigRational::one();
        if contamination.is_empty()
            || !nonneg(&p0)
            || !nonneg(&q)
            || !contamination.iter().all(nonneg)
        {
            return Err(ModelError::InvalidLaw("masses must lie in [0, 1]".into()));
        }
        let sum = contamination.iter().fold(p0.clone() + q.clone(), |a, x| a + x);
        if !sum.is_one() {
            return Err(ModelError::InvalidLaw(format!("total mass {sum} is not 1")));
        }
        let mut offspring = Vec::with_capacity(contamination.len() + 1);
        offspring.push(p0 + q.clone());
        offspring.extend(contamination);
        Ok(Self { offspring, q })
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_ratios(p0: (i64, i64), contamination: &[(i64, i64)], q: (i64, i64)) -> Result<Self, ModelError> {
        let r = |(a, b): (i64, i64)| BigRational::new(BigInt::from(a), BigInt::from(b));
        Self::new(r(p0), contamination.iter().copied().map(r).collect(), r(q))
    }
}

/// Exact laws of `Z1(n)` and `Z2(n)` in rational arithmetic, starting from a
/// fixed population of `n0` individuals.
pub fn exact_distribution_rational(
    law: &RationalLaw,
    n0: u64,
    n: usize,
    support_cap: usize,
) -> Result<ExactDistribution<BigRational>, ModelError> {
    propagate(&law.offspring, &law.q, &[(n0, BigRational::one())], n, support_cap)
}
