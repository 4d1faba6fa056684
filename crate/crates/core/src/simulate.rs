//! Virtual decision-maker: OWA scores mapped to notes, plus Gaussian noise.

use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::dataset::{Cohort, Product, Sample};
use crate::error::{Error, Result};
use crate::identify::NotePredictor;
use crate::models::{score_owa, OwaWeights};

/// Reference weights of the virtual decider, best performance first.
pub const REFERENCE_WEIGHTS: [f64; 4] = [0.4, 0.3, 0.15, 0.15];
pub const REFERENCE_SCALE: f64 = 30.0;
pub const REFERENCE_OFFSET: f64 = -15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualDecider {
    pub weights: OwaWeights,
    pub a: f64,
    pub b: f64,
    pub variance: f64,
    pub seed: u64,
}

impl VirtualDecider {
    pub fn new(weights: OwaWeights, a: f64, b: f64, variance: f64, seed: u64) -> Result<Self> {
        if variance.is_nan() || variance < 0.0 {
            return Err(Error::NegativeVariance(variance));
        }
        if !weights.is_valid() {
            return Err(Error::WeightSum(weights.as_slice().iter().sum()));
        }
        Ok(VirtualDecider { weights, a, b, variance, seed })
    }

    /// Reference decider (`30·score − 15`) with the given noise.
    pub fn reference(variance: f64, seed: u64) -> Result<Self> {
        let w = OwaWeights::new(REFERENCE_WEIGHTS.to_vec())?;
        Self::new(w, REFERENCE_SCALE, REFERENCE_OFFSET, variance, seed)
    }

    pub fn noiseless_note(&self, u: &[f64]) -> Result<f64> {
        Ok(self.a * score_owa(&self.weights, u)? + self.b)
    }

    /// One noisy note per cohort product, in cohort order.
    pub fn noisy_notes(&self, cohort: &Cohort) -> Result<Vec<f64>> {
        let mut noise = GaussianStream::new(self.seed);
        let sd = libm::sqrt(self.variance);
        cohort.products().iter().map(|p| Ok(self.noiseless_note(&p.utilities)? + sd * noise.next_standard())).collect()
    }
}

impl NotePredictor for VirtualDecider {
    fn predict(&self, u: &[f64]) -> Result<f64> {
        self.noiseless_note(u)
    }
}

/// Standard normal draws: Xoshiro256++ seeded through SplitMix64, turned into
/// pairs by the Box–Muller transform. Both values of a pair are used, cosine
/// branch first.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream { rng: Xoshiro256PlusPlus::seed_from_u64(seed), spare: None }
    }

    /// Uniform in (0, 1]: the top 53 bits, shifted off zero.
    fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = libm::sqrt(-2.0 * libm::log(self.uniform()));
        let theta = 2.0 * core::f64::consts::PI * self.uniform();
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}

/// Sample products ordered by decreasing note; equal notes by ascending id.
pub fn rank_by_notes<'a>(
    sample: &Sample,
    cohort: &'a Cohort,
    notes: impl Fn(&Product) -> Option<f64>,
) -> Result<Vec<&'a Product>> {
    let mut keyed = sample
        .ids()
        .iter()
        .map(|&id| {
            let p = cohort.get(id).ok_or(Error::UnknownId(id))?;
            let n = notes(p).ok_or(Error::MissingNote(id))?;
            Ok((n, p))
        })
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|(na, pa), (nb, pb)| nb.total_cmp(na).then(pa.id.cmp(&pb.id)));
    Ok(keyed.into_iter().map(|(_, p)| p).collect())
}
