//! One-for-one exchange algorithm maximizing `det(XᵀX)` over samples of a
//! fixed size.

use alloc::vec::Vec;

use crate::dataset::{resolve, Cohort, Sample};
use crate::error::{Error, Result};
use crate::identify::Design;
use crate::linalg::Matrix;

/// Hard limit on accepted swaps.
pub const MAX_SWAPS: usize = 100;

/// Scores closer than this are treated as tied; ties go to the lowest id.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeStep {
    pub swapped_in: u32,
    pub swapped_out: u32,
    /// `yᵀ(XᵀX)⁻¹y` of the incoming product.
    pub u1: f64,
    /// `zᵀ(XᵀX)⁻¹z − (yᵀ(XᵀX)⁻¹z)² / (1 + u1)` of the outgoing product.
    pub u2: f64,
    pub det_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeTrace {
    pub start_sample: Sample,
    pub final_sample: Sample,
    pub initial_det: f64,
    pub final_det: f64,
    pub steps: Vec<ExchangeStep>,
}

impl ExchangeTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// `det(XᵀX)` of the sample's design matrix.
pub fn fisher_det(sample: &Sample, cohort: &Cohort, design: Design) -> Result<f64> {
    let products = resolve(sample, cohort)?;
    if products.is_empty() {
        return Ok(0.0);
    }
    design.matrix(&products)?.gram().determinant()
}

fn information(sample: &Sample, cohort: &Cohort, design: Design) -> Result<Matrix> {
    let products = resolve(sample, cohort)?;
    let q = design.width(cohort.criteria_count());
    if products.len() < q {
        return Err(Error::Underdetermined { rows: products.len(), columns: q });
    }
    Ok(design.matrix(&products)?.gram())
}

/// Picks the best score; `better(a, b)` means a beats b by more than the tie
/// tolerance. Equal scores keep the lower id.
fn pick(candidates: impl Iterator<Item = (u32, f64)>, better: impl Fn(f64, f64) -> bool) -> Option<(u32, f64)> {
    candidates.fold(None, |best, (id, v)| match best {
        None => Some((id, v)),
        Some((bid, bv)) => {
            if better(v, bv) || (!better(bv, v) && id < bid) {
                Some((id, v))
            } else {
                Some((bid, bv))
            }
        }
    })
}

/// How the exchange picks the pair to swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExchangeRule {
    /// Bring in the outside product of largest `u1`, drop the sample product
    /// of smallest `u2` for it, stop when that pair does not raise the
    /// determinant. May stop while some other pair would still improve.
    #[default]
    Leverage,
    /// Evaluate every (in, out) pair and apply the best one; stops only at a
    /// sample no single swap improves.
    BestPair,
}

/// Improves `start` by single swaps with products of `pool` using
/// [`ExchangeRule::Leverage`].
///
/// Each round brings in the outside product `y` maximizing `u1` and drops the
/// sample product `z` minimizing `u2`; it stops once `(1 + u1)(1 − u2) ≤ 1`,
/// i.e. when that swap would not increase the determinant. `pool` must
/// contain the start sample.
pub fn improve_sample(start: &Sample, pool: &Cohort, design: Design) -> Result<ExchangeTrace> {
    improve_sample_with(start, pool, design, ExchangeRule::Leverage)
}

struct Candidate {
    y_id: u32,
    z_id: u32,
    u1: f64,
    u2: f64,
}

fn u2_of(inv: &Matrix, y: &[f64], z: &[f64], u1: f64) -> f64 {
    let cross = inv.bilinear(y, z);
    inv.bilinear(z, z) - cross * cross / (1.0 + u1)
}

fn leverage_candidate(inv: &Matrix, sample: &Sample, pool: &Cohort, design: Design) -> Result<Option<Candidate>> {
    let outside = pool.products().iter().filter(|p| !sample.contains(p.id));
    let best_in = pick(
        outside.map(|p| {
            let y = design.row(&p.utilities);
            (p.id, inv.bilinear(&y, &y))
        }),
        |a, b| a > b + TIE_TOLERANCE,
    );
    let Some((y_id, u1)) = best_in else { return Ok(None) };
    let y = design.row(&pool.get(y_id).expect("pool member").utilities);
    let inside = resolve(sample, pool)?;
    let (z_id, u2) = pick(inside.iter().map(|p| (p.id, u2_of(inv, &y, &design.row(&p.utilities), u1))), |a, b| {
        a < b - TIE_TOLERANCE
    })
    .expect("nonempty sample");
    Ok(Some(Candidate { y_id, z_id, u1, u2 }))
}

fn best_pair_candidate(inv: &Matrix, sample: &Sample, pool: &Cohort, design: Design) -> Result<Option<Candidate>> {
    let inside = resolve(sample, pool)?;
    let mut best: Option<(f64, Candidate)> = None;
    // pool order is arbitrary; visit ids ascending so ties keep the lowest
    let mut outside: Vec<_> = pool.products().iter().filter(|p| !sample.contains(p.id)).collect();
    outside.sort_by_key(|p| p.id);
    let mut inside_sorted = inside.clone();
    inside_sorted.sort_by_key(|p| p.id);
    for p in outside {
        let y = design.row(&p.utilities);
        let u1 = inv.bilinear(&y, &y);
        for q in &inside_sorted {
            let u2 = u2_of(inv, &y, &design.row(&q.utilities), u1);
            let gain = (1.0 + u1) * (1.0 - u2);
            if best.as_ref().is_none_or(|(g, _)| gain > g + TIE_TOLERANCE) {
                best = Some((gain, Candidate { y_id: p.id, z_id: q.id, u1, u2 }));
            }
        }
    }
    Ok(best.map(|(_, c)| c))
}

pub fn improve_sample_with(start: &Sample, pool: &Cohort, design: Design, rule: ExchangeRule) -> Result<ExchangeTrace> {
    let mut sample = start.clone();
    let mut info = information(&sample, pool, design)?;
    let initial_det = info.determinant()?;
    let mut det = initial_det;
    let mut steps = Vec::new();
    loop {
        let inv = info.inverse()?;
        let candidate = match rule {
            ExchangeRule::Leverage => leverage_candidate(&inv, &sample, pool, design)?,
            ExchangeRule::BestPair => best_pair_candidate(&inv, &sample, pool, design)?,
        };
        let Some(Candidate { y_id, z_id, u1, u2 }) = candidate else { break };
        let gain = (1.0 + u1) * (1.0 - u2);
        let threshold = match rule {
            ExchangeRule::Leverage => 1.0,
            ExchangeRule::BestPair => 1.0 + TIE_TOLERANCE,
        };
        if gain <= threshold {
            break;
        }
        if steps.len() == MAX_SWAPS {
            return Err(Error::NonConvergence(MAX_SWAPS));
        }
        sample.swap(z_id, y_id)?;
        info = information(&sample, pool, design)?;
        det = info.determinant()?;
        steps.push(ExchangeStep { swapped_in: y_id, swapped_out: z_id, u1, u2, det_after: det });
    }
    Ok(ExchangeTrace { start_sample: start.clone(), final_sample: sample, initial_det, final_det: det, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Product;
    use alloc::vec;

    fn cohort() -> Cohort {
        let us = [
            [0.9, 0.1, 0.4, 0.2],
            [0.3, 0.8, 0.5, 0.6],
            [0.2, 0.4, 0.9, 0.1],
            [0.7, 0.6, 0.2, 0.95],
            [0.05, 0.3, 0.35, 0.5],
            [0.6, 0.61, 0.1, 0.0],
            [0.33, 0.9, 0.8, 0.7],
            [0.12, 0.5, 0.66, 0.44],
            [0.81, 0.27, 0.03, 0.58],
            [0.4, 0.45, 0.71, 0.92],
        ];
        let ps = us.iter().enumerate().map(|(i, u)| Product::new(i as u32 + 1, u.to_vec(), [0.0; 3], None).unwrap());
        Cohort::new(ps.collect()).unwrap()
    }

    #[test]
    fn determinant_grows_by_update_identity() {
        let c = cohort();
        let start = Sample::new("s", vec![1, 2, 3, 4, 5, 6]).unwrap();
        let trace = improve_sample(&start, &c, Design::Maut { intercept: true }).unwrap();
        let mut prev = trace.initial_det;
        for s in &trace.steps {
            assert!(s.det_after > prev);
            let predicted = prev * (1.0 + s.u1) * (1.0 - s.u2);
            assert!((predicted - s.det_after).abs() <= 1e-6 * s.det_after.abs());
            prev = s.det_after;
        }
        assert_eq!(trace.final_det, prev);
        assert_eq!(trace.start_sample, start);
        assert_eq!(fisher_det(&trace.final_sample, &c, Design::Maut { intercept: true }).unwrap(), trace.final_det);
    }

    #[test]
    fn identical_rows_have_zero_det() {
        let ps = vec![
            Product::new(1, vec![0.5, 0.2], [0.0; 3], None).unwrap(),
            Product::new(2, vec![0.5, 0.2], [0.0; 3], None).unwrap(),
        ];
        let c = Cohort::new(ps).unwrap();
        let s = Sample::new("s", vec![1, 2]).unwrap();
        assert_eq!(fisher_det(&s, &c, Design::Maut { intercept: false }).unwrap(), 0.0);
        assert!(matches!(improve_sample(&s, &c, Design::Maut { intercept: false }), Err(Error::Singular { .. })));
    }

    #[test]
    fn too_small_start_is_underdetermined() {
        let s = Sample::new("s", vec![1, 2, 3]).unwrap();
        assert_eq!(
            improve_sample(&s, &cohort(), Design::Maut { intercept: true }).unwrap_err(),
            Error::Underdetermined { rows: 3, columns: 5 }
        );
    }

    #[test]
    fn whole_pool_sample_stops_at_once() {
        let c = cohort();
        let s = Sample::new("all", c.ids()).unwrap();
        let trace = improve_sample(&s, &c, Design::Owa { intercept: false }).unwrap();
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn ties_pick_lowest_id() {
        let picked = pick([(5, 1.0), (3, 1.0), (9, 0.5)].into_iter(), |a, b| a > b + TIE_TOLERANCE);
        assert_eq!(picked, Some((3, 1.0)));
        let picked = pick([(5, 0.2), (3, 0.2 + 1e-14), (9, 0.5)].into_iter(), |a, b| a < b - TIE_TOLERANCE);
        assert_eq!(picked.unwrap().0, 3);
    }
}
