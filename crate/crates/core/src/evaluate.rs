//! Fit and recovery metrics.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::dataset::{Cohort, Sample};
use crate::error::{Error, Result};
use crate::identify::{choquet_full_columns, design_row_choquet_full};
use crate::models::Coalition;

/// Coefficients at or below this magnitude count as absent.
pub const COVERAGE_TOLERANCE: f64 = 1e-12;

/// `sqrt(mean((w − w*)²))`.
pub fn rms_weight_deviation(identified: &[f64], reference: &[f64]) -> Result<f64> {
    if identified.len() != reference.len() {
        return Err(Error::Dimension { expected: reference.len(), found: identified.len() });
    }
    if identified.is_empty() {
        return Err(Error::TooFew { needed: 1, found: 0 });
    }
    let sq: f64 = identified.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(libm::sqrt(sq / identified.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualVariance {
    pub variance: f64,
    pub std_dev: f64,
}

/// `SSE / (n − 1)` and its square root.
pub fn residual_variance(predicted: &[f64], observed: &[f64]) -> Result<ResidualVariance> {
    let n = observed.len();
    if predicted.len() != n {
        return Err(Error::Dimension { expected: n, found: predicted.len() });
    }
    if n < 2 {
        return Err(Error::TooFew { needed: 2, found: n });
    }
    let sse: f64 = predicted.iter().zip(observed).map(|(p, o)| (p - o) * (p - o)).sum();
    let variance = sse / (n - 1) as f64;
    Ok(ResidualVariance { variance, std_dev: libm::sqrt(variance) })
}

/// Union of sample ids, each once, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationSet {
    pub product_ids: Vec<u32>,
}

impl ValidationSet {
    pub fn len(&self) -> usize {
        self.product_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.product_ids.is_empty()
    }

    pub fn as_sample(&self, name: &str) -> Sample {
        Sample::new(name, self.product_ids.clone()).expect("ids are distinct")
    }
}

pub fn build_validation_set<'a>(samples: impl IntoIterator<Item = &'a Sample>) -> ValidationSet {
    let ids: BTreeSet<u32> = samples.into_iter().flat_map(|s| s.ids().iter().copied()).collect();
    ValidationSet { product_ids: ids.into_iter().collect() }
}

/// How often each coefficient of the full Choquet design is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageCounts {
    /// Every proper nonempty subset, including those never covered.
    pub per_capacity: BTreeMap<Coalition, usize>,
    /// Count for the intercept and scale columns (every product).
    pub anchor: usize,
}

pub fn coverage_counts(cohort: &Cohort) -> CoverageCounts {
    let columns = choquet_full_columns(cohort.criteria_count());
    let mut per_capacity: BTreeMap<Coalition, usize> = columns.iter().map(|&c| (c, 0)).collect();
    for p in cohort.products() {
        let row = design_row_choquet_full(&p.utilities);
        for (key, coef) in columns.iter().zip(&row[2..]) {
            if libm::fabs(*coef) > COVERAGE_TOLERANCE {
                *per_capacity.get_mut(key).expect("column key") += 1;
            }
        }
    }
    CoverageCounts { per_capacity, anchor: cohort.len() }
}
