//! Aggregation operators: OWA, weighted sum (MAUT) and the discrete Choquet
//! integral, plus the capacities that make the Choquet integral collapse onto
//! the first two.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance on `Σ w = 1` and on `μ(full) = 1`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Slack below zero still accepted as a non-negative weight.
pub const VALIDITY_TOLERANCE: f64 = 1e-9;

fn check_sum(w: &[f64]) -> Result<()> {
    let s: f64 = w.iter().sum();
    if !s.is_finite() || libm::fabs(s - 1.0) > SUM_TOLERANCE {
        return Err(Error::WeightSum(s));
    }
    Ok(())
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// OWA weights indexed by performance rank: `w[0]` multiplies the best utility.
///
/// Weights always sum to one. Identified weights may be negative, in which
/// case [`OwaWeights::is_valid`] is false.
#[derive(Debug, Clone, PartialEq)]
pub struct OwaWeights(Vec<f64>);

impl OwaWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        check_sum(&w)?;
        Ok(OwaWeights(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&w| w >= -VALIDITY_TOLERANCE)
    }
}

/// MAUT weights indexed by criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct MautWeights(Vec<f64>);

impl MautWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        check_sum(&w)?;
        Ok(MautWeights(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&w| w >= -VALIDITY_TOLERANCE)
    }
}

/// Ordering of a product's criteria by performance. Indices are 0-based.
///
/// `sigma[j]` is the criterion holding the (j+1)-th best utility and
/// `rho[k]` the criterion holding the (k+1)-th worst, so `rho` is `sigma`
/// reversed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerformancePermutation {
    pub sigma: Vec<usize>,
    pub rho: Vec<usize>,
}

/// Sorts criteria by decreasing utility; ties go to the lower criterion index.
pub fn sort_performances(u: &[f64]) -> PerformancePermutation {
    let mut sigma: Vec<usize> = (0..u.len()).collect();
    // stable sort keeps ascending index order among ties
    sigma.sort_by(|&a, &b| u[b].total_cmp(&u[a]));
    let rho = sigma.iter().rev().copied().collect();
    PerformancePermutation { sigma, rho }
}

/// `Σ_j w_j u_σ(j)`.
pub fn score_owa(w: &OwaWeights, u: &[f64]) -> Result<f64> {
    check_len(w.len(), u.len())?;
    let p = sort_performances(u);
    Ok(p.sigma.iter().zip(w.as_slice()).map(|(&c, wj)| wj * u[c]).sum())
}

/// `Σ_j w_j u_j`.
pub fn score_maut(w: &MautWeights, u: &[f64]) -> Result<f64> {
    check_len(w.len(), u.len())?;
    Ok(w.as_slice().iter().zip(u).map(|(a, b)| a * b).sum())
}

/// A set of criteria, stored as a bitmask (bit j = criterion j, 0-based).
///
/// Displays with 1-based digits in ascending order, e.g. `{0, 2, 3}` is `"134"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u32) -> Self {
        Coalition(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn full(m: usize) -> Self {
        Coalition(((1u64 << m) - 1) as u32)
    }

    pub fn singleton(criterion: usize) -> Self {
        Coalition(1 << criterion)
    }

    pub fn from_criteria<I: IntoIterator<Item = usize>>(criteria: I) -> Self {
        Coalition(criteria.into_iter().fold(0, |acc, c| acc | (1 << c)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, criterion: usize) -> bool {
        self.0 & (1 << criterion) != 0
    }

    pub fn with(self, criterion: usize) -> Self {
        Coalition(self.0 | (1 << criterion))
    }

    pub fn criteria(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&c| self.contains(c))
    }

    /// All nonempty subsets of `m` criteria, by size then lexicographically
    /// ("1", "2", …, "12", "13", …, "1234").
    pub fn all_nonempty(m: usize) -> Vec<Coalition> {
        let mut all: Vec<Coalition> = (1..(1u32 << m)).map(Coalition).collect();
        all.sort();
        all
    }
}

impl Ord for Coalition {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            // lexicographic on the ascending member lists
            let a = self.criteria();
            let b = other.criteria();
            a.cmp(b)
        })
    }
}

impl PartialOrd for Coalition {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.criteria() {
            write!(f, "{}", c + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Coalition {
    type Err = ();

    /// Parses keys such as `"134"` (1-based, order-insensitive, criteria 1–9).
    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        if s.is_empty() {
            return Err(());
        }
        let mut bits = 0u32;
        for ch in s.chars() {
            let d = ch.to_digit(10).ok_or(())?;
            if d == 0 || bits & (1 << (d - 1)) != 0 {
                return Err(());
            }
            bits |= 1 << (d - 1);
        }
        Ok(Coalition(bits))
    }
}

/// Set function on criterion subsets with `μ(full) = 1`.
///
/// Monotonicity is not required; see [`ChoquetCapacity::is_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChoquetCapacity {
    m: usize,
    values: BTreeMap<Coalition, f64>,
}

impl ChoquetCapacity {
    /// Wraps explicit values. The full set must be present and equal to one;
    /// other subsets may be missing (evaluation then fails only if it needs them).
    pub fn new(m: usize, values: BTreeMap<Coalition, f64>) -> Result<Self> {
        let full = Coalition::full(m);
        match values.get(&full) {
            None => return Err(Error::CapacityIncomplete(full)),
            Some(&v) if libm::fabs(v - 1.0) > SUM_TOLERANCE => return Err(Error::WeightSum(v)),
            _ => {}
        }
        if let Some(k) = values.keys().find(|k| k.bits() & !full.bits() != 0) {
            return Err(Error::Dimension { expected: m, found: 32 - k.bits().leading_zeros() as usize });
        }
        Ok(ChoquetCapacity { m, values })
    }

    pub fn criteria_count(&self) -> usize {
        self.m
    }

    pub fn get(&self, a: Coalition) -> Option<f64> {
        self.values.get(&a).copied()
    }

    fn require(&self, a: Coalition) -> Result<f64> {
        self.get(a).ok_or(Error::CapacityIncomplete(a))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coalition, f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    /// Singleton values `μ({1}), …, μ({m})`, if all present.
    pub fn singletons(&self) -> Option<Vec<f64>> {
        (0..self.m).map(|c| self.get(Coalition::singleton(c))).collect()
    }

    /// True when every subset is defined and `A ⊆ B ⇒ μ(A) ≤ μ(B)`.
    pub fn is_monotone(&self) -> bool {
        let all = Coalition::all_nonempty(self.m);
        if all.iter().any(|a| self.get(*a).is_none()) {
            return false;
        }
        all.iter().all(|&a| {
            let va = self.values[&a];
            va >= -VALIDITY_TOLERANCE
                && (0..self.m).filter(|&c| !a.contains(c)).all(|c| self.values[&a.with(c)] >= va - VALIDITY_TOLERANCE)
        })
    }
}

/// Upper sets `{ρ(k), …, ρ(m)}` for k = 1..m, in that order.
fn upper_sets(rho: &[usize]) -> Vec<Coalition> {
    let mut sets = Vec::with_capacity(rho.len());
    let mut acc = Coalition::EMPTY;
    for &c in rho.iter().rev() {
        acc = acc.with(c);
        sets.push(acc);
    }
    sets.reverse();
    sets
}

/// Discrete Choquet integral, increment form:
/// `Σ_k μ({ρ(k)…ρ(m)}) (u_ρ(k) − u_ρ(k−1))` with `u_ρ(0) = 0`.
pub fn choquet_value(cap: &ChoquetCapacity, u: &[f64]) -> Result<f64> {
    check_len(cap.m, u.len())?;
    let rho = sort_performances(u).rho;
    let sets = upper_sets(&rho);
    let mut prev = 0.0;
    let mut total = 0.0;
    for (k, &c) in rho.iter().enumerate() {
        total += cap.require(sets[k])? * (u[c] - prev);
        prev = u[c];
    }
    Ok(total)
}

/// Discrete Choquet integral, utility form:
/// `Σ_{k<m} u_ρ(k) (μ({ρ(k)…}) − μ({ρ(k+1)…})) + u_ρ(m) μ({ρ(m)})`.
pub fn choquet_value_by_utilities(cap: &ChoquetCapacity, u: &[f64]) -> Result<f64> {
    check_len(cap.m, u.len())?;
    let rho = sort_performances(u).rho;
    let sets = upper_sets(&rho);
    let m = rho.len();
    let mut total = 0.0;
    for k in 0..m {
        let here = cap.require(sets[k])?;
        let next = if k + 1 < m { cap.require(sets[k + 1])? } else { 0.0 };
        total += u[rho[k]] * (here - next);
    }
    Ok(total)
}

/// Symmetric capacity reproducing an OWA operator: `μ(A) = Σ_{j ≤ |A|} w_j`.
pub fn capacity_from_owa(w: &OwaWeights) -> ChoquetCapacity {
    let m = w.len();
    let mut cumulative = Vec::with_capacity(m + 1);
    cumulative.push(0.0);
    for (j, wj) in w.as_slice().iter().enumerate() {
        cumulative.push(cumulative[j] + wj);
    }
    let values = Coalition::all_nonempty(m)
        .into_iter()
        .map(|a| (a, if a.len() == m { 1.0 } else { cumulative[a.len()] }))
        .collect();
    ChoquetCapacity { m, values }
}

/// Additive capacity reproducing a weighted sum: `μ(A) = Σ_{j ∈ A} w_j`.
pub fn capacity_from_maut(w: &MautWeights) -> ChoquetCapacity {
    additive(w.as_slice())
}

/// Additive closure of singleton values, which must sum to one.
pub fn capacity_from_singletons(mu: &[f64]) -> Result<ChoquetCapacity> {
    check_sum(mu)?;
    Ok(additive(mu))
}

fn additive(w: &[f64]) -> ChoquetCapacity {
    let m = w.len();
    let values = Coalition::all_nonempty(m)
        .into_iter()
        .map(|a| {
            let v = if a.len() == m { 1.0 } else { a.criteria().map(|c| w[c]).sum() };
            (a, v)
        })
        .collect();
    ChoquetCapacity { m, values }
}
