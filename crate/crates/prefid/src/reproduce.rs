//! Regenerates the case-study tables from the bundled cohort and compares
//! every cell with the reference value.

use prefid_core::dataset::{
    builtin_samples, combined_sample, find_sample, maut_improved_samples, owa_improved_samples, resolve, Cohort,
    NoiseLevel, Product, Sample,
};
use prefid_core::doptimal::{improve_sample, ExchangeTrace};
use prefid_core::evaluate::{
    build_validation_set, coverage_counts, residual_variance, rms_weight_deviation, ValidationSet,
};
use prefid_core::identify::{identify_products, Design, HybridModel, IdentificationReport, ModelKind, NotePredictor};
use prefid_core::identify::{rank_identify_maut, rank_identify_owa};
use prefid_core::models::{
    capacity_from_maut, capacity_from_owa, capacity_from_singletons, MautWeights, OwaWeights, VALIDITY_TOLERANCE,
};
use prefid_core::simulate::{rank_by_notes, REFERENCE_WEIGHTS};

use crate::error::{Error, Result};
use crate::io::Reference;
use crate::report::{capacity_table, traces_table, Cell, Table};

/// Products kept out of the exchange candidate pool. Product 2693 never
/// appears in any of the improved reference samples, while with it in the pool every
/// start admits it.
pub const EXCHANGE_EXCLUDED: [u32; 1] = [2693];

/// Numbers of the tables that can be regenerated.
pub const TABLES: [u32; 24] =
    [4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27];

/// Design used for the OWA exchange runs: sorted utilities without intercept.
pub const OWA_EXCHANGE_DESIGN: Design = Design::Owa { intercept: false };
/// Design used for the MAUT exchange runs.
pub const MAUT_EXCHANGE_DESIGN: Design = Design::Maut { intercept: true };

fn level_col(level: NoiseLevel) -> String {
    format!("v{}", level.label())
}

fn sample(name: &str) -> Sample {
    find_sample(name).expect("named sample")
}

fn is_valid(w: &[f64]) -> bool {
    w.iter().all(|&x| x >= -VALIDITY_TOLERANCE)
}

/// The case study on one cohort.
#[derive(Debug, Clone)]
pub struct Study {
    pub cohort: Cohort,
    pub pool: Cohort,
}

impl Study {
    pub fn new(cohort: Cohort) -> Self {
        let pool = cohort.without(&EXCHANGE_EXCLUDED);
        Study { cohort, pool }
    }

    pub fn products(&self, sample: &Sample) -> Result<Vec<&Product>> {
        Ok(resolve(sample, &self.cohort)?)
    }

    pub fn notes(&self, sample: &Sample, level: NoiseLevel) -> Result<Vec<f64>> {
        Ok(self.products(sample)?.iter().map(|p| p.note(level)).collect())
    }

    /// Least squares on the sample's notes; OWA fits carry the RMS deviation
    /// from the reference weights.
    pub fn identify(&self, kind: ModelKind, sample: &Sample, level: NoiseLevel) -> Result<IdentificationReport> {
        let rep = identify_products(kind, &self.products(sample)?, &self.notes(sample, level)?)?;
        if kind == ModelKind::Owa {
            return Ok(rep.with_reference(&REFERENCE_WEIGHTS)?);
        }
        Ok(rep)
    }

    pub fn ranked(&self, sample: &Sample, level: NoiseLevel) -> Result<Vec<&Product>> {
        Ok(rank_by_notes(sample, &self.cohort, |p| Some(p.note(level)))?)
    }

    pub fn rank_owa(&self, sample: &Sample, level: NoiseLevel) -> Result<OwaWeights> {
        Ok(rank_identify_owa(&self.ranked(sample, level)?)?)
    }

    pub fn rank_maut(&self, sample: &Sample, level: NoiseLevel) -> Result<MautWeights> {
        Ok(rank_identify_maut(&self.ranked(sample, level)?)?)
    }

    pub fn exchange(&self, start: &Sample, design: Design) -> Result<ExchangeTrace> {
        Ok(improve_sample(start, &self.pool, design)?)
    }

    /// OWA fitted on E', MAUT fitted on E''4, ω fitted on their union.
    pub fn hybrid(&self, level: NoiseLevel) -> Result<HybridModel> {
        let owa = self.identify(ModelKind::Owa, &sample("E'"), level)?.model;
        let maut = self.identify(ModelKind::Maut, &sample("E''4"), level)?.model;
        let nine = combined_sample();
        Ok(HybridModel::fit(owa, maut, &self.products(&nine)?, &self.notes(&nine, level)?)?)
    }

    /// Additive-capacity Choquet model fitted on the nine-product union.
    pub fn choquet(&self, level: NoiseLevel) -> Result<IdentificationReport> {
        self.identify(ModelKind::Choquet, &combined_sample(), level)
    }

    /// All products of E1–E8, E'1–E'8, E' and E''1–E''8.
    pub fn validation_set(&self) -> ValidationSet {
        let mut all = builtin_samples();
        all.extend(owa_improved_samples());
        all.extend(maut_improved_samples());
        build_validation_set(&all)
    }

    /// Residual variance of `model` over the validation set at `level`.
    pub fn validation_variance(&self, model: &dyn NotePredictor, level: NoiseLevel) -> Result<(f64, f64)> {
        let set = self.validation_set().as_sample("validation");
        let products = self.products(&set)?;
        let predicted = model.predict_all(&products)?;
        let observed: Vec<f64> = products.iter().map(|p| p.note(level)).collect();
        let r = residual_variance(&predicted, &observed)?;
        Ok((r.variance, r.std_dev))
    }

    pub fn table(&self, number: u32) -> Result<Table> {
        self.build(number).map_err(|e| Error::Table { table: number, source: Box::new(e) })
    }

    fn build(&self, number: u32) -> Result<Table> {
        let level = |i: u32| NoiseLevel::ALL[i as usize];
        match number {
            4..=6 => self.ls_owa_table(number, level(number - 4)),
            7..=9 => self.rank_owa_table(number, level(number - 7)),
            10 => Ok(self.exchange_table("Table 10: OWA exchange runs", OWA_EXCHANGE_DESIGN)?),
            11 => self.weights_by_level(11, ModelKind::Owa, "E'"),
            12 => self.affine_by_level(12, ModelKind::Owa, "E'"),
            13 => self.maut_samples_table(),
            14 => Ok(self.exchange_table("Table 14: MAUT exchange runs", MAUT_EXCHANGE_DESIGN)?),
            15 => self.weights_by_level(15, ModelKind::Maut, "E''4"),
            16 => self.affine_by_level(16, ModelKind::Maut, "E''4"),
            17 => self.nine_predictions_table(),
            18 => self.omega_table(),
            19 => self.hybrid_variance_table(),
            20 => {
                let w = OwaWeights::new(self.identify(ModelKind::Owa, &sample("E'"), NoiseLevel::V1)?.model.weights)?;
                Ok(capacity_table("Table 20: symmetric capacity of the OWA fit (v=1)", &capacity_from_owa(&w)))
            }
            21 => {
                let w =
                    MautWeights::new(self.identify(ModelKind::Maut, &sample("E''4"), NoiseLevel::V1)?.model.weights)?;
                Ok(capacity_table("Table 21: additive capacity of the MAUT fit (v=1)", &capacity_from_maut(&w)))
            }
            22 => Ok(self.coverage_table()),
            23 => self.choquet_affine_table(),
            24..=26 => {
                let lv = level(number - 24);
                let fit = self.choquet(lv)?;
                let cap = capacity_from_singletons(&fit.model.weights)?;
                Ok(capacity_table(&format!("Table {number}: Choquet capacity (v={lv})"), &cap))
            }
            27 => self.choquet_variance_table(),
            _ => Err(Error::Usage(format!("no reproducible table {number}; choose 4-27"))),
        }
    }

    fn weight_rows(t: &mut Table, per_col: &[Option<Vec<f64>>], rms: Option<&[Option<f64>]>) {
        let m = per_col.iter().flatten().map(Vec::len).max().unwrap_or(0);
        for j in 0..m {
            t.push(format!("w{}", j + 1), per_col.iter().map(|w| w.as_ref().map(|w| w[j]).into()).collect());
        }
        if let Some(rms) = rms {
            t.push("rms", rms.iter().map(|r| (*r).into()).collect());
        }
    }

    fn ls_owa_table(&self, number: u32, lv: NoiseLevel) -> Result<Table> {
        let samples = builtin_samples();
        let mut t = Table::new(
            format!("Table {number}: OWA least squares (v={lv})"),
            samples.iter().map(|s| s.name().to_string()),
        );
        let reps = samples.iter().map(|s| self.identify(ModelKind::Owa, s, lv)).collect::<Result<Vec<_>>>()?;
        let weights: Vec<_> = reps.iter().map(|r| Some(r.model.weights.clone())).collect();
        let rms: Vec<_> = reps.iter().map(|r| r.rms_weight_dev).collect();
        Self::weight_rows(&mut t, &weights, Some(&rms));
        Ok(t)
    }

    fn rank_owa_table(&self, number: u32, lv: NoiseLevel) -> Result<Table> {
        let samples = builtin_samples();
        let mut t = Table::new(
            format!("Table {number}: OWA from rankings (v={lv})"),
            samples.iter().map(|s| s.name().to_string()),
        );
        let ws = samples.iter().map(|s| self.rank_owa(s, lv)).collect::<Result<Vec<_>>>()?;
        let weights: Vec<_> = ws.iter().map(|w| Some(w.as_slice().to_vec())).collect();
        let rms = ws
            .iter()
            .map(|w| Ok(w.is_valid().then_some(rms_weight_deviation(w.as_slice(), &REFERENCE_WEIGHTS)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::weight_rows(&mut t, &weights, Some(&rms));
        Ok(t)
    }

    fn exchange_table(&self, title: &str, design: Design) -> Result<Table> {
        let traces = builtin_samples().iter().map(|s| self.exchange(s, design)).collect::<Result<Vec<_>>>()?;
        Ok(traces_table(title, &traces))
    }

    /// Weights per noise level plus a ranking column (v=0.1 notes).
    fn weights_by_level(&self, number: u32, kind: ModelKind, name: &str) -> Result<Table> {
        let s = sample(name);
        let mut cols: Vec<String> = NoiseLevel::ALL.iter().map(|&l| level_col(l)).collect();
        cols.push("ranking".into());
        let mut t = Table::new(format!("Table {number}: {kind} weights on {name}"), cols);
        let mut weights = Vec::new();
        let mut rms = Vec::new();
        for lv in NoiseLevel::ALL {
            let r = self.identify(kind, &s, lv)?;
            rms.push(r.rms_weight_dev);
            weights.push(Some(r.model.weights));
        }
        let ranked = match kind {
            ModelKind::Owa => self.rank_owa(&s, NoiseLevel::V01)?.as_slice().to_vec(),
            _ => self.rank_maut(&s, NoiseLevel::V01)?.as_slice().to_vec(),
        };
        rms.push(is_valid(&ranked).then(|| rms_weight_deviation(&ranked, &REFERENCE_WEIGHTS)).transpose()?);
        weights.push(Some(ranked));
        Self::weight_rows(&mut t, &weights, (kind == ModelKind::Owa).then_some(rms.as_slice()));
        Ok(t)
    }

    fn affine_by_level(&self, number: u32, kind: ModelKind, name: &str) -> Result<Table> {
        let s = sample(name);
        let mut t = Table::new(format!("Table {number}: {kind} note map on {name}"), NoiseLevel::ALL.map(level_col));
        let reps = NoiseLevel::ALL.iter().map(|&l| self.identify(kind, &s, l)).collect::<Result<Vec<_>>>()?;
        t.push("b", reps.iter().map(|r| Cell::Num(r.model.b)).collect());
        t.push("a", reps.iter().map(|r| Cell::Num(r.model.a)).collect());
        Ok(t)
    }

    fn maut_samples_table(&self) -> Result<Table> {
        let mut cols: Vec<String> = NoiseLevel::ALL.iter().map(|l| format!("notes_{}", level_col(*l))).collect();
        cols.extend(NoiseLevel::ALL.iter().map(|l| format!("rank_{}", level_col(*l))));
        let mut t = Table::new("Table 13: MAUT on the test samples, from notes and from rankings", cols);
        for s in builtin_samples() {
            let fits =
                NoiseLevel::ALL.iter().map(|&l| self.identify(ModelKind::Maut, &s, l)).collect::<Result<Vec<_>>>()?;
            let ranks = NoiseLevel::ALL.iter().map(|&l| self.rank_maut(&s, l)).collect::<Result<Vec<_>>>()?;
            let blanks = || std::iter::repeat_n(Cell::Empty, 3);
            t.push(format!("{}.b", s.name()), fits.iter().map(|r| Cell::Num(r.model.b)).chain(blanks()).collect());
            t.push(format!("{}.a", s.name()), fits.iter().map(|r| Cell::Num(r.model.a)).chain(blanks()).collect());
            for j in 0..4 {
                let notes = fits.iter().map(|r| Cell::Num(r.model.weights[j]));
                let ranked = ranks.iter().map(|w| Cell::Num(w.as_slice()[j]));
                t.push(format!("{}.w{}", s.name(), j + 1), notes.chain(ranked).collect());
            }
        }
        Ok(t)
    }

    fn nine_predictions_table(&self) -> Result<Table> {
        let nine = combined_sample();
        let products = self.products(&nine)?;
        let mut cols = Vec::new();
        let mut preds = Vec::new();
        for (kind, name) in [(ModelKind::Owa, "E'"), (ModelKind::Maut, "E''4")] {
            for lv in NoiseLevel::ALL {
                cols.push(format!("{kind}_{}", level_col(lv)));
                preds.push(self.identify(kind, &sample(name), lv)?.model.predict_all(&products)?);
            }
        }
        let mut t = Table::new("Table 17: predicted notes on E'+E''4", cols);
        for (i, p) in products.iter().enumerate() {
            t.push(p.id.to_string(), preds.iter().map(|col| Cell::Num(col[i])).collect());
        }
        Ok(t)
    }

    fn omega_table(&self) -> Result<Table> {
        let mut t = Table::new("Table 18: hybrid mixing factor", NoiseLevel::ALL.map(level_col));
        let hs = NoiseLevel::ALL.iter().map(|&l| self.hybrid(l)).collect::<Result<Vec<_>>>()?;
        t.push("omega", hs.iter().map(|h| Cell::Num(h.omega)).collect());
        t.push("one_minus_omega", hs.iter().map(|h| Cell::Num(1.0 - h.omega)).collect());
        Ok(t)
    }

    fn hybrid_variance_table(&self) -> Result<Table> {
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for family in ["owa", "maut", "hybrid"] {
            for lv in NoiseLevel::ALL {
                cols.push(format!("{family}_{}", level_col(lv)));
                let h = self.hybrid(lv)?;
                let model: &dyn NotePredictor = match family {
                    "owa" => &h.owa,
                    "maut" => &h.maut,
                    _ => &h,
                };
                vals.push(self.validation_variance(model, lv)?);
            }
        }
        let mut t = Table::new("Table 19: residual variance on the validation set", cols);
        t.push("var", vals.iter().map(|v| Cell::Num(v.0)).collect());
        t.push("std", vals.iter().map(|v| Cell::Num(v.1)).collect());
        Ok(t)
    }

    fn coverage_table(&self) -> Table {
        let c = coverage_counts(&self.cohort);
        let mut t = Table::new("Table 22: nonzero coefficients of the full Choquet design", ["count"]);
        for (k, n) in &c.per_capacity {
            t.push(k.to_string(), vec![Cell::Int(*n as i64)]);
        }
        t.push("a_b", vec![Cell::Int(c.anchor as i64)]);
        t
    }

    fn choquet_affine_table(&self) -> Result<Table> {
        let mut t = Table::new("Table 23: Choquet note map on E'+E''4", NoiseLevel::ALL.map(level_col));
        let fits = NoiseLevel::ALL.iter().map(|&l| self.choquet(l)).collect::<Result<Vec<_>>>()?;
        t.push("b", fits.iter().map(|r| Cell::Num(r.model.b)).collect());
        t.push("a", fits.iter().map(|r| Cell::Num(r.model.a)).collect());
        Ok(t)
    }

    fn choquet_variance_table(&self) -> Result<Table> {
        let mut t =
            Table::new("Table 27: Choquet residual variance on the validation set", NoiseLevel::ALL.map(level_col));
        let vals = NoiseLevel::ALL
            .iter()
            .map(|&l| self.validation_variance(&self.choquet(l)?.model, l))
            .collect::<Result<Vec<_>>>()?;
        t.push("var", vals.iter().map(|v| Cell::Num(v.0)).collect());
        t.push("std", vals.iter().map(|v| Cell::Num(v.1)).collect());
        Ok(t)
    }
}

/// One compared cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Delta {
    pub table: u32,
    pub row: String,
    pub col: String,
    pub computed: f64,
    pub reference: f64,
}

impl Delta {
    pub fn abs(&self) -> f64 {
        (self.computed - self.reference).abs()
    }
}

/// Reference cells that have a numeric counterpart in `table`.
pub fn compare(number: u32, table: &Table, reference: &Reference) -> Vec<Delta> {
    reference
        .table(number)
        .filter_map(|cell| {
            let computed = table.get(&cell.row, &cell.col)?.as_f64()?;
            Some(Delta { table: number, row: cell.row.clone(), col: cell.col.clone(), computed, reference: cell.value })
        })
        .collect()
}

/// Per-table summary of [`compare`].
pub fn summary_table(tables: &[(u32, Table)], reference: &Reference) -> Table {
    let mut t = Table::new("Deltas against reference values", ["reference_cells", "compared", "max_abs_delta"]);
    for (n, table) in tables {
        let deltas = compare(*n, table, reference);
        let max = deltas.iter().map(Delta::abs).fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
        t.push(
            format!("table_{n}"),
            vec![Cell::Int(reference.table(*n).count() as i64), Cell::Int(deltas.len() as i64), max.into()],
        );
    }
    t
}

pub fn deltas_table(tables: &[(u32, Table)], reference: &Reference) -> Table {
    let mut t = Table::new("Cell deltas", ["table", "cell_row", "cell_col", "computed", "reference", "delta"]);
    let mut i = 0;
    for (n, table) in tables {
        for d in compare(*n, table, reference) {
            i += 1;
            t.push(
                i.to_string(),
                vec![
                    Cell::Int(*n as i64),
                    Cell::Text(d.row.clone()),
                    Cell::Text(d.col.clone()),
                    Cell::Num(d.computed),
                    Cell::Num(d.reference),
                    Cell::Num(d.computed - d.reference),
                ],
            );
        }
    }
    t
}
