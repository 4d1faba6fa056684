//! Products, cohorts and named samples.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Noise level of the virtual decider, selecting one of a product's notes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseLevel {
    V01,
    V05,
    V1,
}

impl NoiseLevel {
    pub const ALL: [NoiseLevel; 3] = [NoiseLevel::V01, NoiseLevel::V05, NoiseLevel::V1];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn variance(self) -> f64 {
        match self {
            NoiseLevel::V01 => 0.1,
            NoiseLevel::V05 => 0.5,
            NoiseLevel::V1 => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NoiseLevel::V01 => "0.1",
            NoiseLevel::V05 => "0.5",
            NoiseLevel::V1 => "1",
        }
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NoiseLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0.1" | ".1" => Ok(NoiseLevel::V01),
            "0.5" | ".5" => Ok(NoiseLevel::V05),
            "1" | "1.0" => Ok(NoiseLevel::V1),
            other => Err(Error::VarianceLabel(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub id: u32,
    pub utilities: Vec<f64>,
    /// Notes for variances 0.1, 0.5 and 1, in that order.
    pub notes: [f64; 3],
    pub true_score: Option<f64>,
}

impl Product {
    pub fn new(id: u32, utilities: Vec<f64>, notes: [f64; 3], true_score: Option<f64>) -> Result<Self> {
        for (criterion, &value) in utilities.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::UtilityRange { id, criterion: criterion + 1, value });
            }
        }
        Ok(Product { id, utilities, notes, true_score })
    }

    pub fn note(&self, level: NoiseLevel) -> f64 {
        self.notes[level.index()]
    }
}

/// A validated set of products sharing one criteria count.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    products: Vec<Product>,
    criteria: usize,
}

impl Cohort {
    pub fn new(products: Vec<Product>) -> Result<Self> {
        let criteria = products.first().map_or(0, |p| p.utilities.len());
        let mut seen = BTreeSet::new();
        for p in &products {
            if p.utilities.len() != criteria {
                return Err(Error::CriteriaCount { id: p.id, expected: criteria, found: p.utilities.len() });
            }
            if !seen.insert(p.id) {
                return Err(Error::DuplicateId(p.id));
            }
            for (c, &v) in p.utilities.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::UtilityRange { id: p.id, criterion: c + 1, value: v });
                }
            }
        }
        Ok(Cohort { products, criteria })
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn criteria_count(&self) -> usize {
        self.criteria
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&Product> {
        self.products.iter().find(|p| p.id == id)
    }

    pub fn ids(&self) -> Vec<u32> {
        self.products.iter().map(|p| p.id).collect()
    }

    /// Cohort restricted to the given ids, in the order given.
    pub fn subset(&self, ids: &[u32]) -> Result<Cohort> {
        let products =
            ids.iter().map(|&id| self.get(id).cloned().ok_or(Error::UnknownId(id))).collect::<Result<Vec<_>>>()?;
        Cohort::new(products)
    }

    /// Cohort minus the given ids (unknown ids are ignored).
    pub fn without(&self, ids: &[u32]) -> Cohort {
        Cohort {
            products: self.products.iter().filter(|p| !ids.contains(&p.id)).cloned().collect(),
            criteria: self.criteria,
        }
    }
}

/// Named, ordered list of distinct product ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    name: String,
    ids: Vec<u32>,
}

impl Sample {
    pub fn new(name: impl Into<String>, ids: Vec<u32>) -> Result<Self> {
        let name = name.into();
        let mut seen = BTreeSet::new();
        for &id in &ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateInSample { sample: name, id });
            }
        }
        Ok(Sample { name, ids })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.contains(&id)
    }

    /// Replaces `out` by `incoming` at the same position.
    pub fn swap(&mut self, out: u32, incoming: u32) -> Result<()> {
        if self.contains(incoming) {
            return Err(Error::DuplicateInSample { sample: self.name.clone(), id: incoming });
        }
        let slot = self.ids.iter().position(|&id| id == out).ok_or(Error::UnknownId(out))?;
        self.ids[slot] = incoming;
        Ok(())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Products of `sample`, in sample order.
pub fn resolve<'a>(sample: &Sample, cohort: &'a Cohort) -> Result<Vec<&'a Product>> {
    sample.ids().iter().map(|&id| cohort.get(id).ok_or(Error::UnknownId(id))).collect()
}

/// Replacement of one utility value, keyed by product id and 1-based criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub id: u32,
    pub criterion: usize,
    pub printed: f64,
    pub corrected: f64,
}

/// Applies corrections; each printed value must match what the cohort holds.
pub fn apply_corrections(cohort: &Cohort, corrections: &[Correction]) -> Result<Cohort> {
    let mut products = cohort.products.clone();
    for c in corrections {
        let p = products.iter_mut().find(|p| p.id == c.id).ok_or(Error::UnknownId(c.id))?;
        let slot = c
            .criterion
            .checked_sub(1)
            .filter(|&i| i < p.utilities.len())
            .ok_or(Error::Dimension { expected: p.utilities.len(), found: c.criterion })?;
        if libm::fabs(p.utilities[slot] - c.printed) > 1e-12 {
            return Err(Error::StaleCorrection {
                id: c.id,
                criterion: c.criterion,
                expected: c.printed,
                found: p.utilities[slot],
            });
        }
        p.utilities[slot] = c.corrected;
    }
    Cohort::new(products)
}

const TEST_SAMPLES: [(&str, [u32; 5]); 8] = [
    ("E1", [613, 2573, 292, 162, 3062]),
    ("E2", [1853, 2663, 733, 2972, 1103]),
    ("E3", [1853, 613, 162, 1103, 3262]),
    ("E4", [1323, 703, 2902, 1103, 2083]),
    ("E5", [1853, 592, 2922, 2663, 162]),
    ("E6", [2922, 2663, 1793, 1813, 3112]),
    ("E7", [3062, 2343, 2902, 592, 292]),
    ("E8", [813, 1433, 1923, 2483, 3472]),
];

const OWA_IMPROVED: [(&str, [u32; 5]); 9] = [
    ("E'1", [592, 813, 292, 162, 3162]),
    ("E'2", [292, 592, 813, 3162, 162]),
    ("E'3", [813, 613, 162, 3162, 292]),
    ("E'4", [813, 292, 592, 162, 3162]),
    ("E'5", [292, 592, 3162, 813, 162]),
    ("E'6", [3162, 813, 592, 292, 162]),
    ("E'7", [162, 813, 3162, 592, 292]),
    ("E'8", [813, 162, 3162, 592, 292]),
    ("E'", [162, 292, 592, 813, 3162]),
];

const MAUT_IMPROVED: [(&str, [u32; 5]); 8] = [
    ("E''1", [1193, 733, 1323, 162, 3062]),
    ("E''2", [2343, 3062, 733, 162, 1103]),
    ("E''3", [3162, 613, 162, 1103, 2663]),
    ("E''4", [1323, 733, 162, 1103, 3062]),
    ("E''5", [733, 592, 1103, 2663, 162]),
    ("E''6", [3162, 2663, 1193, 733, 162]),
    ("E''7", [3062, 162, 733, 592, 1103]),
    ("E''8", [813, 3062, 162, 733, 3472]),
];

/// The optimal OWA sample joined with the optimal MAUT sample, shared product once.
pub const COMBINED_NAME: &str = "E'+E''4";
const COMBINED: [u32; 9] = [813, 162, 3162, 592, 292, 733, 1103, 1323, 3062];

fn build(table: &[(&str, [u32; 5])]) -> Vec<Sample> {
    table.iter().map(|(n, ids)| Sample { name: (*n).into(), ids: ids.to_vec() }).collect()
}

/// The eight five-product test samples E1–E8.
pub fn builtin_samples() -> Vec<Sample> {
    build(&TEST_SAMPLES)
}

/// Samples reached by the exchange algorithm on the OWA design (E'1–E'8, then E').
pub fn owa_improved_samples() -> Vec<Sample> {
    build(&OWA_IMPROVED)
}

/// Samples reached by the exchange algorithm on the MAUT design (E''1–E''8).
pub fn maut_improved_samples() -> Vec<Sample> {
    build(&MAUT_IMPROVED)
}

pub fn combined_sample() -> Sample {
    Sample { name: COMBINED_NAME.into(), ids: COMBINED.to_vec() }
}

/// Every named sample known to the crate.
pub fn named_samples() -> Vec<Sample> {
    let mut all = builtin_samples();
    all.extend(owa_improved_samples());
    all.extend(maut_improved_samples());
    all.push(combined_sample());
    all
}

/// Looks a sample up by name. Typographic primes are accepted for `'`.
pub fn find_sample(name: &str) -> Option<Sample> {
    let normalized: String = name.trim().replace('′', "'").replace('″', "''");
    named_samples().into_iter().find(|s| s.name == normalized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn product(id: u32, u: [f64; 4]) -> Product {
        Product::new(id, u.to_vec(), [0.0; 3], None).unwrap()
    }

    #[test]
    fn utility_range_checked() {
        assert!(matches!(
            Product::new(1, vec![0.1, 1.2, 0.3, 0.4], [0.0; 3], None),
            Err(Error::UtilityRange { id: 1, criterion: 2, .. })
        ));
    }

    #[test]
    fn duplicates_rejected() {
        let a = product(7, [0.1; 4]);
        assert_eq!(Cohort::new(vec![a.clone(), a]).unwrap_err(), Error::DuplicateId(7));
        assert!(matches!(Sample::new("x", vec![1, 2, 1]), Err(Error::DuplicateInSample { id: 1, .. })));
    }

    #[test]
    fn criteria_count_must_agree() {
        let b = Product::new(2, vec![0.1, 0.2], [0.0; 3], None).unwrap();
        assert!(matches!(Cohort::new(vec![product(1, [0.1; 4]), b]), Err(Error::CriteriaCount { .. })));
    }

    #[test]
    fn builtin_sample_contents() {
        let s = builtin_samples();
        assert_eq!(s.len(), 8);
        assert_eq!(s[0].ids(), &[613, 2573, 292, 162, 3062]);
        assert_eq!(s[7].ids(), &[813, 1433, 1923, 2483, 3472]);
        for x in named_samples() {
            assert!(Sample::new(x.name(), x.ids().to_vec()).is_ok());
        }
        for x in &s {
            assert_eq!(x.len(), 5);
        }
    }

    #[test]
    fn sample_lookup_accepts_primes() {
        assert_eq!(find_sample("E″4").unwrap().ids(), &[1323, 733, 162, 1103, 3062]);
        assert_eq!(find_sample("E′").unwrap().ids(), &[162, 292, 592, 813, 3162]);
        assert!(find_sample("E9").is_none());
    }

    #[test]
    fn resolve_in_order() {
        let c = Cohort::new(vec![product(5, [0.5; 4]), product(3, [0.3; 4])]).unwrap();
        let s = Sample::new("s", vec![3, 5]).unwrap();
        let r = resolve(&s, &c).unwrap();
        assert_eq!(r[0].id, 3);
        assert!(resolve(&Sample::new("e", vec![]).unwrap(), &c).unwrap().is_empty());
        let bad = Sample::new("b", vec![9999]).unwrap();
        assert_eq!(resolve(&bad, &c).unwrap_err(), Error::UnknownId(9999));
    }

    #[test]
    fn swap_keeps_position() {
        let mut s = Sample::new("s", vec![1, 2, 3]).unwrap();
        s.swap(2, 9).unwrap();
        assert_eq!(s.ids(), &[1, 9, 3]);
        assert!(s.swap(1, 3).is_err());
    }

    #[test]
    fn corrections_check_printed_value() {
        let c = Cohort::new(vec![product(1, [0.1, 0.2, 0.3, 0.4])]).unwrap();
        let fix = Correction { id: 1, criterion: 4, printed: 0.4, corrected: 0.9 };
        assert_eq!(apply_corrections(&c, core::slice::from_ref(&fix)).unwrap().get(1).unwrap().utilities[3], 0.9);
        let stale = Correction { printed: 0.5, ..fix };
        assert!(apply_corrections(&c, &[stale]).is_err());
    }

    #[test]
    fn noise_labels() {
        assert_eq!("0.5".parse::<NoiseLevel>().unwrap(), NoiseLevel::V05);
        assert_eq!("1".parse::<NoiseLevel>().unwrap().variance(), 1.0);
        assert!(matches!("2".parse::<NoiseLevel>(), Err(Error::VarianceLabel(_))));
    }
}
