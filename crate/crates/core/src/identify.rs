//! Design matrices and parameter identification for the note models
//! `note = a·score + b`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dataset::Product;
use crate::error::{Error, Result};
use crate::linalg::{dot, solve_normal, Matrix};
use crate::models::{sort_performances, Coalition, MautWeights, OwaWeights, VALIDITY_TOLERANCE};

/// Smallest |Σ(o − m)²| accepted when fitting the hybrid mixing factor.
pub const MIXING_TOLERANCE: f64 = 1e-12;

/// Smallest `zᵀ(XᵀX)⁻¹z` accepted by the constrained Choquet fit.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-12;

/// `(1, u_σ(1), …, u_σ(m))`: utilities best first.
pub fn design_row_owa(u: &[f64]) -> Vec<f64> {
    let sigma = sort_performances(u).sigma;
    let mut row = Vec::with_capacity(u.len() + 1);
    row.push(1.0);
    row.extend(sigma.iter().map(|&c| u[c]));
    row
}

/// `(1, u_1, …, u_m)`.
pub fn design_row_maut(u: &[f64]) -> Vec<f64> {
    let mut row = Vec::with_capacity(u.len() + 1);
    row.push(1.0);
    row.extend_from_slice(u);
    row
}

/// `(1, u_ρ(1), c_1, …, c_m)` for parameters `(b, a, aμ_1, …, aμ_m)`, where
/// `c_j = u_j − u_ρ(1)` and the worst criterion's coefficient is zero.
pub fn design_row_choquet_reduced(u: &[f64]) -> Vec<f64> {
    let worst = sort_performances(u).rho[0];
    let mut row = Vec::with_capacity(u.len() + 2);
    row.push(1.0);
    row.push(u[worst]);
    row.extend(u.iter().enumerate().map(|(j, &v)| if j == worst { 0.0 } else { v - u[worst] }));
    row
}

/// Capacity keys of the full Choquet design, in column order: every proper
/// nonempty subset by size then lexicographically.
pub fn choquet_full_columns(m: usize) -> Vec<Coalition> {
    let full = Coalition::full(m);
    Coalition::all_nonempty(m).into_iter().filter(|&a| a != full).collect()
}

/// `(1, u_ρ(1), capacity coefficients…)` with one coefficient per key of
/// [`choquet_full_columns`]. The column of `{ρ(k), …, ρ(m)}` holds
/// `u_ρ(k) − u_ρ(k−1)` for k ≥ 2; the full set is absorbed into `a`.
pub fn design_row_choquet_full(u: &[f64]) -> Vec<f64> {
    let m = u.len();
    let columns = choquet_full_columns(m);
    let rho = sort_performances(u).rho;
    let mut row = vec![0.0; 2 + columns.len()];
    row[0] = 1.0;
    row[1] = u[rho[0]];
    for k in 1..m {
        let set = Coalition::from_criteria(rho[k..].iter().copied());
        let col = columns.iter().position(|&c| c == set).expect("proper subset");
        row[2 + col] = u[rho[k]] - u[rho[k - 1]];
    }
    row
}

/// `(1, u_σ(1), …, u_σ(m), u_1, …, u_m)`: OWA and MAUT terms side by side.
pub fn design_row_combined(u: &[f64]) -> Vec<f64> {
    let mut row = design_row_owa(u);
    row.extend_from_slice(u);
    row
}

/// Which row builder to use for a design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Design {
    Owa { intercept: bool },
    Maut { intercept: bool },
    ChoquetReduced,
    ChoquetFull,
    Combined,
}

impl Design {
    pub fn row(self, u: &[f64]) -> Vec<f64> {
        match self {
            Design::Owa { intercept } => strip(design_row_owa(u), intercept),
            Design::Maut { intercept } => strip(design_row_maut(u), intercept),
            Design::ChoquetReduced => design_row_choquet_reduced(u),
            Design::ChoquetFull => design_row_choquet_full(u),
            Design::Combined => design_row_combined(u),
        }
    }

    pub fn width(self, m: usize) -> usize {
        match self {
            Design::Owa { intercept } | Design::Maut { intercept } => m + usize::from(intercept),
            Design::ChoquetReduced => m + 2,
            Design::ChoquetFull => 1usize << m,
            Design::Combined => 2 * m + 1,
        }
    }

    pub fn matrix(self, products: &[&Product]) -> Result<Matrix> {
        let rows: Vec<Vec<f64>> = products.iter().map(|p| self.row(&p.utilities)).collect();
        if rows.is_empty() {
            return Matrix::new(0, 0, Vec::new());
        }
        Matrix::from_rows(&rows)
    }
}

fn strip(mut row: Vec<f64>, intercept: bool) -> Vec<f64> {
    if !intercept {
        row.remove(0);
    }
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Owa,
    Maut,
    Choquet,
    Combined,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Owa => "owa",
            ModelKind::Maut => "maut",
            ModelKind::Choquet => "choquet",
            ModelKind::Combined => "combined",
        }
    }

    /// Design used for least-squares identification (always with intercept).
    pub fn design(self) -> Design {
        match self {
            ModelKind::Owa => Design::Owa { intercept: true },
            ModelKind::Maut => Design::Maut { intercept: true },
            ModelKind::Choquet => Design::ChoquetReduced,
            ModelKind::Combined => Design::Combined,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "owa" => Ok(ModelKind::Owa),
            "maut" => Ok(ModelKind::Maut),
            "choquet" => Ok(ModelKind::Choquet),
            "combined" => Ok(ModelKind::Combined),
            _ => Err(()),
        }
    }
}

/// Anything that predicts a note from a utility vector.
pub trait NotePredictor {
    fn predict(&self, u: &[f64]) -> Result<f64>;

    fn predict_all(&self, products: &[&Product]) -> Result<Vec<f64>> {
        products.iter().map(|p| self.predict(&p.utilities)).collect()
    }
}

/// `note = a·score + b`. For the Choquet kind the weights are the singleton
/// capacities of an additive capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct NoteModel {
    pub kind: ModelKind,
    pub a: f64,
    pub b: f64,
    pub weights: Vec<f64>,
}

impl NoteModel {
    /// Score without the affine map.
    pub fn score(&self, u: &[f64]) -> Result<f64> {
        let m = u.len();
        let expected = match self.kind {
            ModelKind::Combined => 2 * m,
            _ => m,
        };
        if self.weights.len() != expected {
            return Err(Error::Dimension { expected, found: self.weights.len() });
        }
        let features = match self.kind {
            ModelKind::Owa => design_row_owa(u),
            ModelKind::Maut | ModelKind::Choquet => design_row_maut(u),
            ModelKind::Combined => design_row_combined(u),
        };
        Ok(dot(&features[1..], &self.weights))
    }

    pub fn owa_weights(&self) -> Option<Result<OwaWeights>> {
        (self.kind == ModelKind::Owa).then(|| OwaWeights::new(self.weights.clone()))
    }

    pub fn maut_weights(&self) -> Option<Result<MautWeights>> {
        matches!(self.kind, ModelKind::Maut | ModelKind::Choquet).then(|| MautWeights::new(self.weights.clone()))
    }
}

impl NotePredictor for NoteModel {
    fn predict(&self, u: &[f64]) -> Result<f64> {
        Ok(self.a * self.score(u)? + self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationReport {
    pub model: NoteModel,
    pub theta: Vec<f64>,
    pub valid: bool,
    pub rms_weight_dev: Option<f64>,
    pub residual_sse: f64,
}

impl IdentificationReport {
    fn new(model: NoteModel, theta: Vec<f64>, x: &Matrix, notes: &[f64]) -> Result<Self> {
        let fitted = x.mul_vec(&theta)?;
        let residual_sse = fitted.iter().zip(notes).map(|(f, s)| (f - s) * (f - s)).sum();
        let valid = model.weights.iter().all(|&w| w >= -VALIDITY_TOLERANCE);
        Ok(IdentificationReport { model, theta, valid, rms_weight_dev: None, residual_sse })
    }

    /// Records the RMS deviation from `reference`; left empty for invalid fits.
    pub fn with_reference(mut self, reference: &[f64]) -> Result<Self> {
        let dev = crate::evaluate::rms_weight_deviation(&self.model.weights, reference)?;
        self.rms_weight_dev = self.valid.then_some(dev);
        Ok(self)
    }
}

fn check_notes(x: &Matrix, notes: &[f64]) -> Result<()> {
    if notes.len() != x.rows() {
        return Err(Error::Dimension { expected: x.rows(), found: notes.len() });
    }
    Ok(())
}

/// Unconstrained least squares on the rows of `x` (intercept first, then one
/// column per weighted term). Weights are the slope coefficients normalized
/// by their sum, `a` is that sum and `b` the intercept.
pub fn ls_identify(kind: ModelKind, x: &Matrix, notes: &[f64]) -> Result<IdentificationReport> {
    check_notes(x, notes)?;
    let theta = solve_normal(x, notes)?;
    let b = theta[0];
    let a: f64 = theta[1..].iter().sum();
    let weights = theta[1..].iter().map(|t| t / a).collect();
    IdentificationReport::new(NoteModel { kind, a, b, weights }, theta, x, notes)
}

/// Least squares of the chosen model on `products` against their notes.
pub fn identify_products(kind: ModelKind, products: &[&Product], notes: &[f64]) -> Result<IdentificationReport> {
    if kind == ModelKind::Choquet {
        return constrained_ls_choquet(&Design::ChoquetReduced.matrix(products)?, notes);
    }
    ls_identify(kind, &kind.design().matrix(products)?, notes)
}

/// Least squares on the reduced Choquet design under `Σ aμ_j = a`.
///
/// The unconstrained optimum θ⁰ is projected along `(XᵀX)⁻¹z` with
/// `z = (0, −1, 1, …, 1)`.
pub fn constrained_ls_choquet(x: &Matrix, notes: &[f64]) -> Result<IdentificationReport> {
    check_notes(x, notes)?;
    let q = x.cols();
    if q < 3 {
        return Err(Error::TooFew { needed: 3, found: q });
    }
    if x.rows() < q {
        return Err(Error::Underdetermined { rows: x.rows(), columns: q });
    }
    let inv = x.gram().inverse()?;
    let theta0 = inv.mul_vec(&x.tr_mul_vec(notes)?)?;
    let mut z = vec![1.0; q];
    z[0] = 0.0;
    z[1] = -1.0;
    let z0 = inv.mul_vec(&z)?;
    let denom = dot(&z, &z0);
    if denom.abs() <= CONSTRAINT_TOLERANCE {
        return Err(Error::DegenerateConstraint(denom));
    }
    let step = dot(&z, &theta0) / denom;
    let theta: Vec<f64> = theta0.iter().zip(&z0).map(|(t, d)| t - step * d).collect();
    let a = theta[1];
    let weights = theta[2..].iter().map(|t| t / a).collect();
    IdentificationReport::new(NoteModel { kind: ModelKind::Choquet, a, b: theta[0], weights }, theta, x, notes)
}

/// Weights from a ranking under equally spaced consecutive scores.
///
/// `ranked` holds the feature vectors of m+1 products, best first. Rows
/// `k = 1..m−1` of the system are second differences
/// `x^k − 2x^{k+1} + x^{k+2}`; the last row forces `Σw = 1`.
pub fn rank_identify(ranked: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = ranked.first().map_or(0, Vec::len);
    if m < 2 {
        return Err(Error::TooFew { needed: 2, found: m });
    }
    if ranked.len() != m + 1 {
        return Err(Error::RankSampleSize { expected: m + 1, found: ranked.len() });
    }
    if let Some(bad) = ranked.iter().find(|r| r.len() != m) {
        return Err(Error::Dimension { expected: m, found: bad.len() });
    }
    let mut rows: Vec<Vec<f64>> = (0..m - 1)
        .map(|k| (0..m).map(|j| ranked[k][j] - 2.0 * ranked[k + 1][j] + ranked[k + 2][j]).collect())
        .collect();
    rows.push(vec![1.0; m]);
    let mut rhs = vec![0.0; m];
    rhs[m - 1] = 1.0;
    Matrix::from_rows(&rows)?.solve(&rhs)
}

/// OWA weights from products ranked best first (utilities sorted per product).
pub fn rank_identify_owa(ranked: &[&Product]) -> Result<OwaWeights> {
    let rows: Vec<Vec<f64>> = ranked.iter().map(|p| design_row_owa(&p.utilities)[1..].to_vec()).collect();
    OwaWeights::new(rank_identify(&rows)?)
}

/// MAUT weights from products ranked best first (utilities in criterion order).
pub fn rank_identify_maut(ranked: &[&Product]) -> Result<MautWeights> {
    let rows: Vec<Vec<f64>> = ranked.iter().map(|p| p.utilities.clone()).collect();
    MautWeights::new(rank_identify(&rows)?)
}

/// Least-squares ω for `note ≈ ω·owa + (1 − ω)·maut`.
pub fn hybrid_omega(owa_notes: &[f64], maut_notes: &[f64], observed: &[f64]) -> Result<f64> {
    let n = observed.len();
    if n == 0 {
        return Err(Error::TooFew { needed: 1, found: 0 });
    }
    for len in [owa_notes.len(), maut_notes.len()] {
        if len != n {
            return Err(Error::Dimension { expected: n, found: len });
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let d = owa_notes[i] - maut_notes[i];
        num += d * (observed[i] - maut_notes[i]);
        den += d * d;
    }
    if den <= MIXING_TOLERANCE {
        return Err(Error::DegenerateMixing);
    }
    Ok(num / den)
}

/// `ω·note_OWA + (1 − ω)·note_MAUT`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    pub omega: f64,
    pub owa: NoteModel,
    pub maut: NoteModel,
}

impl HybridModel {
    /// Fits ω on `products` against `observed` with both sub-models fixed.
    pub fn fit(owa: NoteModel, maut: NoteModel, products: &[&Product], observed: &[f64]) -> Result<Self> {
        let o = owa.predict_all(products)?;
        let m = maut.predict_all(products)?;
        let omega = hybrid_omega(&o, &m, observed)?;
        Ok(HybridModel { omega, owa, maut })
    }
}

impl NotePredictor for HybridModel {
    fn predict(&self, u: &[f64]) -> Result<f64> {
        Ok(self.omega * self.owa.predict(u)? + (1.0 - self.omega) * self.maut.predict(u)?)
    }
}

/// Determinant of `XᵀX` with the singularity verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantReport {
    pub det: f64,
    /// Scale the determinant is compared against.
    pub scale: f64,
    pub singular: bool,
}

/// Determinant diagnostic of a design's information matrix. Never fails on
/// well-formed products; an empty design reports singular.
pub fn design_diagnostic(design: Design, products: &[&Product]) -> Result<DeterminantReport> {
    if products.is_empty() {
        return Ok(DeterminantReport { det: 0.0, scale: 0.0, singular: true });
    }
    let info = design.matrix(products)?.gram();
    let det = info.determinant()?;
    let scale = info.determinant_scale();
    Ok(DeterminantReport { det, scale, singular: info.is_singular()? })
}

/// Diagnostic for the design with both OWA and MAUT columns, whose columns
/// are linearly dependent since `Σ u_σ(j) = Σ u_j`.
pub fn combined_full_diagnostic(products: &[&Product]) -> Result<DeterminantReport> {
    design_diagnostic(Design::Combined, products)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    const U1813: [f64; 4] = [0.465, 0.705, 0.700, 0.946];
    const U162: [f64; 4] = [0.774, 0.824, 0.734, 0.000];

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn prod(id: u32, u: &[f64]) -> Product {
        Product::new(id, u.to_vec(), [0.0; 3], None).unwrap()
    }

    #[test]
    fn owa_rows() {
        assert_eq!(design_row_owa(&U1813), [1.0, 0.946, 0.705, 0.700, 0.465]);
        assert_eq!(design_row_owa(&[0.0; 4]), [1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(design_row_owa(&U162), [1.0, 0.824, 0.774, 0.734, 0.0]);
        assert_eq!(Design::Owa { intercept: false }.row(&U162), [0.824, 0.774, 0.734, 0.0]);
    }

    #[test]
    fn maut_rows() {
        assert_eq!(design_row_maut(&U1813), [1.0, 0.465, 0.705, 0.700, 0.946]);
        assert_eq!(design_row_maut(&U162), [1.0, 0.774, 0.824, 0.734, 0.0]);
    }

    #[test]
    fn reduced_choquet_rows() {
        assert_eq!(design_row_choquet_reduced(&[0.5; 4]), [1.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
        let r = design_row_choquet_reduced(&U1813);
        assert!(close(&r, &[1.0, 0.465, 0.0, 0.240, 0.235, 0.481], 1e-12));
        // additive capacity: row · (b, a, aμ) = a·maut + b
        let w = [0.1, 0.2, 0.3, 0.4];
        let (a, b) = (25.0, -10.0);
        let theta = [b, a, a * w[0], a * w[1], a * w[2], a * w[3]];
        let maut = dot(&w, &U1813);
        assert!((dot(&r, &theta) - (a * maut + b)).abs() < 1e-12);
    }

    #[test]
    fn full_choquet_rows() {
        let keys: Vec<_> = choquet_full_columns(4).iter().map(|c| c.to_string()).collect();
        assert_eq!(keys.len(), 14);
        let r = design_row_choquet_full(&U1813);
        assert_eq!(r.len(), 16);
        assert_eq!(r[1], 0.465);
        let nonzero: Vec<_> = (2..16).filter(|&i| r[i].abs() > 1e-12).map(|i| keys[i - 2].as_str()).collect();
        assert_eq!(nonzero, ["4", "24", "234"]);
        let flat = design_row_choquet_full(&[0.3; 4]);
        assert_eq!(flat.iter().filter(|v| **v != 0.0).count(), 2);
        assert_eq!(flat[1], 0.3);
    }

    #[test]
    fn ls_interpolates_square_systems() {
        let ps = [
            prod(1, &[0.9, 0.1, 0.4, 0.2]),
            prod(2, &[0.3, 0.8, 0.5, 0.6]),
            prod(3, &[0.2, 0.4, 0.9, 0.1]),
            prod(4, &[0.7, 0.6, 0.2, 0.95]),
            prod(5, &[0.05, 0.3, 0.35, 0.5]),
        ];
        let refs: Vec<&Product> = ps.iter().collect();
        let notes = [3.0, 7.5, -1.0, 4.2, 0.3];
        let rep = identify_products(ModelKind::Maut, &refs, &notes).unwrap();
        let pred = rep.model.predict_all(&refs).unwrap();
        assert!(close(&pred, &notes, 1e-9));
        assert!(rep.residual_sse < 1e-18);
        assert!((rep.model.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ls_recovers_exact_owa_model() {
        let w = [0.4, 0.3, 0.15, 0.15];
        let us = [
            [0.9, 0.1, 0.4, 0.2],
            [0.3, 0.8, 0.5, 0.6],
            [0.2, 0.4, 0.9, 0.1],
            [0.7, 0.6, 0.2, 0.95],
            [0.05, 0.3, 0.35, 0.5],
            [0.6, 0.61, 0.1, 0.0],
            [0.33, 0.9, 0.8, 0.7],
        ];
        let ps: Vec<Product> = us.iter().enumerate().map(|(i, u)| prod(i as u32, u)).collect();
        let refs: Vec<&Product> = ps.iter().collect();
        let notes: Vec<f64> = us.iter().map(|u| 30.0 * dot(&design_row_owa(u)[1..], &w) - 15.0).collect();
        let rep = identify_products(ModelKind::Owa, &refs, &notes).unwrap();
        assert!(close(&rep.model.weights, &w, 1e-9));
        assert!((rep.model.a - 30.0).abs() < 1e-8 && (rep.model.b + 15.0).abs() < 1e-8);
        assert!(rep.valid);
        let rep = rep.with_reference(&w).unwrap();
        assert!(rep.rms_weight_dev.unwrap() < 1e-9);
    }

    #[test]
    fn invalid_fit_has_no_rms() {
        let m = NoteModel { kind: ModelKind::Owa, a: 1.0, b: 0.0, weights: vec![1.2, -0.2, 0.0, 0.0] };
        let x = Matrix::identity(5);
        let rep = IdentificationReport::new(m, vec![0.0; 5], &x, &[0.0; 5]).unwrap();
        assert!(!rep.valid);
        assert_eq!(rep.with_reference(&[0.25; 4]).unwrap().rms_weight_dev, None);
    }

    #[test]
    fn ranking_solution_satisfies_system() {
        let ranked = vec![
            vec![0.9, 0.8, 0.7, 0.3],
            vec![0.85, 0.6, 0.5, 0.4],
            vec![0.8, 0.7, 0.3, 0.1],
            vec![0.6, 0.5, 0.45, 0.2],
            vec![0.55, 0.3, 0.2, 0.15],
        ];
        let w = rank_identify(&ranked).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..3 {
            let r: f64 = (0..4).map(|j| (ranked[k][j] - 2.0 * ranked[k + 1][j] + ranked[k + 2][j]) * w[j]).sum();
            assert!(r.abs() < 1e-9);
        }
    }

    #[test]
    fn ranking_rejects_bad_sizes_and_identical_products() {
        let same = vec![vec![0.5; 4]; 5];
        assert!(matches!(rank_identify(&same), Err(Error::Singular { .. })));
        let four = vec![vec![0.5; 4]; 4];
        assert_eq!(rank_identify(&four).unwrap_err(), Error::RankSampleSize { expected: 5, found: 4 });
    }

    #[test]
    fn constrained_fit_is_feasible() {
        let us = [
            [0.9, 0.1, 0.4, 0.2],
            [0.3, 0.8, 0.5, 0.6],
            [0.2, 0.4, 0.9, 0.1],
            [0.7, 0.6, 0.2, 0.95],
            [0.05, 0.3, 0.35, 0.5],
            [0.6, 0.61, 0.1, 0.0],
            [0.33, 0.9, 0.8, 0.7],
        ];
        let ps: Vec<Product> = us.iter().enumerate().map(|(i, u)| prod(i as u32, u)).collect();
        let refs: Vec<&Product> = ps.iter().collect();
        let notes = [1.0, 5.0, -2.0, 8.0, -6.0, 0.5, 7.0];
        let rep = identify_products(ModelKind::Choquet, &refs, &notes).unwrap();
        let t = &rep.theta;
        assert!((t[2] + t[3] + t[4] + t[5] - t[1]).abs() < 1e-9);
        assert!((rep.model.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let pred = rep.model.predict_all(&refs).unwrap();
        let x = Design::ChoquetReduced.matrix(&refs).unwrap();
        assert!(close(&pred, &x.mul_vec(t).unwrap(), 1e-9));
    }

    #[test]
    fn constrained_fit_keeps_feasible_optimum() {
        // notes generated by an additive model: the unconstrained optimum is feasible
        let w = [0.1, 0.2, 0.3, 0.4];
        let us = [
            [0.9, 0.1, 0.4, 0.2],
            [0.3, 0.8, 0.5, 0.6],
            [0.2, 0.4, 0.9, 0.1],
            [0.7, 0.6, 0.2, 0.95],
            [0.05, 0.3, 0.35, 0.5],
            [0.6, 0.61, 0.1, 0.0],
        ];
        let ps: Vec<Product> = us.iter().enumerate().map(|(i, u)| prod(i as u32, u)).collect();
        let refs: Vec<&Product> = ps.iter().collect();
        let notes: Vec<f64> = us.iter().map(|u| 20.0 * dot(u, &w) - 4.0).collect();
        let rep = identify_products(ModelKind::Choquet, &refs, &notes).unwrap();
        assert!(close(&rep.model.weights, &w, 1e-9));
        assert!((rep.model.a - 20.0).abs() < 1e-9 && (rep.model.b + 4.0).abs() < 1e-9);
    }

    #[test]
    fn omega_cases() {
        let o = [1.0, 2.0, 3.0];
        let m = [0.0, 1.0, 1.0];
        assert!((hybrid_omega(&o, &m, &o).unwrap() - 1.0).abs() < 1e-15);
        assert!(hybrid_omega(&o, &m, &m).unwrap().abs() < 1e-15);
        assert_eq!(hybrid_omega(&o, &o, &m).unwrap_err(), Error::DegenerateMixing);
    }

    #[test]
    fn hybrid_blends_predictions() {
        let owa = NoteModel { kind: ModelKind::Owa, a: 30.0, b: -15.0, weights: vec![0.4, 0.3, 0.15, 0.15] };
        let maut = NoteModel { kind: ModelKind::Maut, a: 20.0, b: -5.0, weights: vec![0.25; 4] };
        let h = HybridModel { omega: 0.25, owa: owa.clone(), maut: maut.clone() };
        let expect = 0.25 * owa.predict(&U162).unwrap() + 0.75 * maut.predict(&U162).unwrap();
        assert!((h.predict(&U162).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn unit_affine_map_predicts_score() {
        let m = NoteModel { kind: ModelKind::Owa, a: 1.0, b: 0.0, weights: vec![0.4, 0.3, 0.15, 0.15] };
        assert!((m.predict(&U162).unwrap() - 0.6719).abs() < 1e-12);
    }

    #[test]
    fn combined_design_is_singular() {
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
        let ps: Vec<Product> = us.iter().enumerate().map(|(i, u)| prod(i as u32, u)).collect();
        let refs: Vec<&Product> = ps.iter().collect();
        assert!(combined_full_diagnostic(&refs).unwrap().singular);
        let notes = [0.0; 10];
        assert!(matches!(
            ls_identify(ModelKind::Combined, &Design::Combined.matrix(&refs).unwrap(), &notes),
            Err(Error::Singular { .. })
        ));
        assert!(!design_diagnostic(Design::Owa { intercept: true }, &refs).unwrap().singular);
    }
}
