//! Command-line front end.
//!
//! Errors go to stderr as a single line
//! `error kind=<kind> exit=<code> message="<text>"`; the exit status is 0 on
//! success, 1 for validation, parse and I/O failures, 2 for numerical ones.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use prefid_core::dataset::{combined_sample, find_sample, Cohort, NoiseLevel, Sample};
use prefid_core::doptimal::{improve_sample_with, ExchangeRule};
use prefid_core::evaluate::{coverage_counts, rms_weight_deviation};
use prefid_core::identify::{HybridModel, IdentificationReport, ModelKind};
use prefid_core::models::capacity_from_singletons;
use prefid_core::simulate::{VirtualDecider, REFERENCE_WEIGHTS};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{self, DataSource};
use crate::report::{self, Cell, Table};
use crate::reproduce::{self, Study, EXCHANGE_EXCLUDED, MAUT_EXCHANGE_DESIGN, OWA_EXCHANGE_DESIGN, TABLES};

#[derive(Debug, Parser)]
#[command(name = "prefid", version, about = "Identify multicriteria preference models and pick informative samples")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Cohort CSV (id,u1..um[,score],note_v01,note_v05,note_v1); bundled data when omitted.
    #[arg(long, global = true)]
    pub cohort: Option<PathBuf>,
    /// Use the bundled utilities exactly as printed, without the errata.
    #[arg(long, global = true)]
    pub as_printed: bool,
    /// Extra named samples, one `name,id;id;...` per line.
    #[arg(long, global = true)]
    pub samples: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (a directory for `reproduce`); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Owa,
    Maut,
    Choquet,
}

impl Model {
    fn kind(self) -> ModelKind {
        match self {
            Model::Owa => ModelKind::Owa,
            Model::Maut => ModelKind::Maut,
            Model::Choquet => ModelKind::Choquet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    /// Largest leverage in, smallest leverage out.
    Leverage,
    /// Best determinant gain over every pair.
    BestPair,
}

fn parse_level(raw: &str) -> std::result::Result<NoiseLevel, String> {
    raw.parse().map_err(|_| format!("unknown variance `{raw}`; expected 0.1, 0.5 or 1"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Least-squares identification from notes.
    Identify {
        #[arg(long, value_enum, default_value_t = Model::Owa)]
        model: Model,
        /// Sample name (E1, E', E''4, ...) or comma-separated ids.
        #[arg(long)]
        sample: String,
        #[arg(long, value_parser = parse_level, default_value = "0.1")]
        variance: NoiseLevel,
    },
    /// Identification from the ranking implied by the notes.
    RankIdentify {
        #[arg(long, value_enum, default_value_t = Model::Owa)]
        model: Model,
        #[arg(long)]
        sample: String,
        #[arg(long, value_parser = parse_level, default_value = "0.1")]
        variance: NoiseLevel,
    },
    /// D-optimal exchange from one or more start samples (E1..E8 by default).
    Doptimal {
        #[arg(long, value_enum, default_value_t = Model::Owa)]
        model: Model,
        #[arg(long)]
        sample: Vec<String>,
        /// Product ids kept out of the candidate pool (defaults to 2693).
        #[arg(long, value_delimiter = ',')]
        exclude: Option<Vec<u32>>,
        #[arg(long, value_enum, default_value_t = Rule::Leverage)]
        rule: Rule,
    },
    /// Choquet model with additive-capacity constraint, or the coverage counts.
    Choquet {
        #[arg(long)]
        sample: Option<String>,
        #[arg(long, value_parser = parse_level, default_value = "0.1")]
        variance: NoiseLevel,
        /// Count nonzero coefficients of the full capacity design instead.
        #[arg(long)]
        coverage: bool,
    },
    /// OWA/MAUT mixture: OWA from one sample, MAUT from another, ω from a third.
    Hybrid {
        #[arg(long, value_parser = parse_level, default_value = "0.1")]
        variance: NoiseLevel,
        #[arg(long, default_value = "E'")]
        owa_sample: String,
        #[arg(long, default_value = "E''4")]
        maut_sample: String,
        /// Sample ω is fitted on (E'+E''4 by default).
        #[arg(long)]
        sample: Option<String>,
    },
    /// Notes from the reference virtual decider with fresh Gaussian noise.
    Simulate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Only this variance; all three when omitted.
        #[arg(long, value_parser = parse_level)]
        variance: Option<NoiseLevel>,
    },
    /// Residual variance of every model on the validation set.
    Evaluate {
        #[arg(long, value_parser = parse_level, default_value = "0.1")]
        variance: NoiseLevel,
    },
    /// Regenerate the case-study tables and compare them with the reference values.
    Reproduce {
        #[arg(long)]
        table: Option<u32>,
    },
}

/// Parses `args`, runs, reports errors on stderr; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", 1, first));
            return 1;
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("{}", error_line(e.kind(), code, &e.to_string()));
            code
        }
    }
}

fn error_line(kind: &str, code: i32, message: &str) -> String {
    let flat = message.replace('\n', " ").replace('"', "'");
    format!("error kind={kind} exit={code} message=\"{flat}\"")
}

struct Context {
    cohort: Cohort,
    extra: Vec<Sample>,
}

impl Context {
    fn load(g: &Global) -> Result<Self> {
        let cohort = match &g.cohort {
            Some(path) => io::load_cohort_file(path)?,
            None => DataSource::from_env().cohort(g.as_printed)?,
        };
        let extra = match &g.samples {
            Some(path) => io::read_samples(io::read_text(path)?.as_bytes())?,
            None => Vec::new(),
        };
        Ok(Context { cohort, extra })
    }

    /// A name from `--samples`, a built-in name, or an id list.
    fn sample(&self, raw: &str) -> Result<Sample> {
        if let Some(s) = self.extra.iter().find(|s| s.name() == raw) {
            return Ok(s.clone());
        }
        if let Some(s) = find_sample(raw) {
            return Ok(s);
        }
        let ids = io::parse_id_list(raw, ',').map_err(|m| Error::Usage(format!("sample `{raw}`: {m}")))?;
        Ok(Sample::new(raw, ids)?)
    }

    fn study(&self) -> Study {
        Study::new(self.cohort.clone())
    }
}

/// Runs a parsed command, writing the report to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let g = &cli.global;
    if let Command::Reproduce { table } = cli.command {
        return run_reproduce(g, table, stdout);
    }
    let ctx = Context::load(g)?;
    let (table, doc) = match &cli.command {
        Command::Identify { model, sample, variance } => {
            let s = ctx.sample(sample)?;
            let rep = ctx.study().identify(model.kind(), &s, *variance)?;
            identify_report(&rep, &s, *variance)
        }
        Command::RankIdentify { model, sample, variance } => {
            let s = ctx.sample(sample)?;
            rank_report(&ctx.study(), *model, &s, *variance)?
        }
        Command::Doptimal { model, sample, exclude, rule } => {
            let design = match model {
                Model::Owa => OWA_EXCHANGE_DESIGN,
                Model::Maut => MAUT_EXCHANGE_DESIGN,
                Model::Choquet => return Err(Error::Usage("doptimal supports --model owa or maut".into())),
            };
            let rule = match rule {
                Rule::Leverage => ExchangeRule::Leverage,
                Rule::BestPair => ExchangeRule::BestPair,
            };
            let starts = if sample.is_empty() {
                prefid_core::dataset::builtin_samples()
            } else {
                sample.iter().map(|s| ctx.sample(s)).collect::<Result<_>>()?
            };
            let pool = ctx.cohort.without(exclude.as_deref().unwrap_or(&EXCHANGE_EXCLUDED));
            let traces = starts
                .iter()
                .map(|s| improve_sample_with(s, &pool, design, rule))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let title = format!("{} exchange runs", model.kind());
            (report::traces_table(&title, &traces), Value::Array(traces.iter().map(report::trace_json).collect()))
        }
        Command::Choquet { sample, variance, coverage } => {
            if *coverage {
                coverage_report(&ctx.cohort)
            } else {
                let s = match sample {
                    Some(raw) => ctx.sample(raw)?,
                    None => combined_sample(),
                };
                choquet_report(&ctx.study(), &s, *variance)?
            }
        }
        Command::Hybrid { variance, owa_sample, maut_sample, sample } => {
            let study = ctx.study();
            let owa = study.identify(ModelKind::Owa, &ctx.sample(owa_sample)?, *variance)?.model;
            let maut = study.identify(ModelKind::Maut, &ctx.sample(maut_sample)?, *variance)?.model;
            let fit_on = match sample {
                Some(raw) => ctx.sample(raw)?,
                None => combined_sample(),
            };
            let h = HybridModel::fit(owa, maut, &study.products(&fit_on)?, &study.notes(&fit_on, *variance)?)?;
            hybrid_report(&h)
        }
        Command::Simulate { seed, variance } => simulate_report(&ctx.cohort, *seed, *variance)?,
        Command::Evaluate { variance } => evaluate_report(&ctx.study(), *variance)?,
        Command::Reproduce { .. } => unreachable!("handled above"),
    };
    match &g.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            emit(g.format, &table, &doc, std::io::BufWriter::new(file), path)
        }
        None => emit(g.format, &table, &doc, stdout, Path::new("<stdout>")),
    }
}

fn emit<W: Write>(format: Format, table: &Table, doc: &Value, mut sink: W, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    match format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, doc)?;
            writeln!(sink).map_err(io_err)?;
        }
    }
    sink.flush().map_err(io_err)
}

fn identify_report(rep: &IdentificationReport, s: &Sample, lv: NoiseLevel) -> (Table, Value) {
    let mut doc = report::identification_json(rep);
    doc["sample"] = json!(s.name());
    doc["variance"] = json!(lv.label());
    (report::identification_table(rep), doc)
}

fn rank_report(study: &Study, model: Model, s: &Sample, lv: NoiseLevel) -> Result<(Table, Value)> {
    let (weights, valid, rms) = match model {
        Model::Owa => {
            let w = study.rank_owa(s, lv)?;
            let rms = if w.is_valid() { Some(rms_weight_deviation(w.as_slice(), &REFERENCE_WEIGHTS)?) } else { None };
            (w.as_slice().to_vec(), w.is_valid(), rms)
        }
        Model::Maut => {
            let w = study.rank_maut(s, lv)?;
            (w.as_slice().to_vec(), w.is_valid(), None)
        }
        Model::Choquet => return Err(Error::Usage("rank-identify supports --model owa or maut".into())),
    };
    let kind = model.kind();
    let mut t = Table::new(format!("{kind} identification from ranking"), ["value"]);
    for (j, w) in weights.iter().enumerate() {
        t.push(format!("w{}", j + 1), vec![Cell::Num(*w)]);
    }
    t.push("valid", vec![Cell::Text(valid.to_string())]);
    if model == Model::Owa {
        t.push("rms_weight_dev", vec![rms.into()]);
    }
    let mut doc = report::ranking_json(kind.name(), &weights, valid, rms);
    doc["sample"] = json!(s.name());
    doc["variance"] = json!(lv.label());
    Ok((t, doc))
}

fn choquet_report(study: &Study, s: &Sample, lv: NoiseLevel) -> Result<(Table, Value)> {
    let rep = study.identify(ModelKind::Choquet, s, lv)?;
    let cap = capacity_from_singletons(&rep.model.weights)?;
    let mut t = Table::new("Choquet identification", ["value"]);
    t.push("b", vec![Cell::Num(rep.model.b)]);
    t.push("a", vec![Cell::Num(rep.model.a)]);
    for (k, v) in cap.iter() {
        t.push(format!("mu_{k}"), vec![Cell::Num(v)]);
    }
    t.push("residual_sse", vec![Cell::Num(rep.residual_sse)]);
    let doc = json!({
        "sample": s.name(),
        "variance": lv.label(),
        "a": rep.model.a,
        "b": rep.model.b,
        "capacity": report::capacity_json(&cap),
        "residual_sse": rep.residual_sse,
    });
    Ok((t, doc))
}

fn coverage_report(cohort: &Cohort) -> (Table, Value) {
    let c = coverage_counts(cohort);
    let mut t = Table::new("Nonzero coefficients per capacity", ["count"]);
    let mut map = indexmap::IndexMap::new();
    for (k, n) in &c.per_capacity {
        t.push(k.to_string(), vec![Cell::Int(*n as i64)]);
        map.insert(k.to_string(), *n);
    }
    t.push("a_b", vec![Cell::Int(c.anchor as i64)]);
    map.insert("a_b".into(), c.anchor);
    (t, json!(map))
}

fn model_json(m: &prefid_core::identify::NoteModel) -> Value {
    json!({ "kind": m.kind.name(), "a": m.a, "b": m.b, "weights": m.weights })
}

fn hybrid_report(h: &HybridModel) -> (Table, Value) {
    let mut t = Table::new("Hybrid OWA/MAUT model", ["value"]);
    t.push("omega", vec![Cell::Num(h.omega)]);
    t.push("one_minus_omega", vec![Cell::Num(1.0 - h.omega)]);
    for (tag, m) in [("owa", &h.owa), ("maut", &h.maut)] {
        t.push(format!("{tag}_b"), vec![Cell::Num(m.b)]);
        t.push(format!("{tag}_a"), vec![Cell::Num(m.a)]);
        for (j, w) in m.weights.iter().enumerate() {
            t.push(format!("{tag}_w{}", j + 1), vec![Cell::Num(*w)]);
        }
    }
    let doc = json!({ "omega": h.omega, "owa": model_json(&h.owa), "maut": model_json(&h.maut) });
    (t, doc)
}

fn simulate_report(cohort: &Cohort, seed: u64, only: Option<NoiseLevel>) -> Result<(Table, Value)> {
    let levels: Vec<NoiseLevel> = only.map_or(NoiseLevel::ALL.to_vec(), |l| vec![l]);
    let mut cols = vec!["score".to_string()];
    cols.extend(levels.iter().map(|l| io::NOTE_COLUMNS[l.index()].to_string()));
    let base = VirtualDecider::reference(0.0, seed)?;
    let notes = levels
        .iter()
        .map(|l| VirtualDecider::reference(l.variance(), seed)?.noisy_notes(cohort))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut t = Table::new("Simulated notes", cols).with_row_header("id");
    let mut rows = Vec::new();
    for (i, p) in cohort.products().iter().enumerate() {
        let score = prefid_core::models::score_owa(&base.weights, &p.utilities)?;
        let mut cells = vec![Cell::Num(score)];
        cells.extend(notes.iter().map(|n| Cell::Num(n[i])));
        let mut obj = indexmap::IndexMap::new();
        obj.insert("id".to_string(), json!(p.id));
        obj.insert("score".to_string(), json!(score));
        for (l, n) in levels.iter().zip(&notes) {
            obj.insert(io::NOTE_COLUMNS[l.index()].to_string(), json!(n[i]));
        }
        rows.push(json!(obj));
        t.push(p.id.to_string(), cells);
    }
    Ok((t, json!({ "seed": seed, "products": rows })))
}

fn evaluate_report(study: &Study, lv: NoiseLevel) -> Result<(Table, Value)> {
    let h = study.hybrid(lv)?;
    let choquet = study.choquet(lv)?.model;
    let set = study.validation_set();
    let mut t = Table::new(format!("Residual variance on the {}-product validation set", set.len()), ["var", "std"]);
    let mut doc = indexmap::IndexMap::new();
    doc.insert("variance".to_string(), json!(lv.label()));
    doc.insert("validation_ids".to_string(), json!(set.product_ids));
    let models: [(&str, &dyn prefid_core::identify::NotePredictor); 4] =
        [("owa", &h.owa), ("maut", &h.maut), ("hybrid", &h), ("choquet", &choquet)];
    for (name, m) in models {
        let (var, std) = study.validation_variance(m, lv)?;
        t.push(name, vec![Cell::Num(var), Cell::Num(std)]);
        doc.insert(name.to_string(), json!({ "var": var, "std": std }));
    }
    Ok((t, json!(doc)))
}

fn run_reproduce(g: &Global, only: Option<u32>, stdout: &mut dyn Write) -> Result<()> {
    let source = DataSource::from_env();
    let cohort = match &g.cohort {
        Some(path) => io::load_cohort_file(path)?,
        None => source.cohort(g.as_printed)?,
    };
    let reference = source.reference()?;
    let numbers: Vec<u32> = match only {
        Some(n) if TABLES.contains(&n) => vec![n],
        Some(n) => return Err(Error::Usage(format!("no reproducible table {n}; choose 4-27"))),
        None => TABLES.to_vec(),
    };
    let study = Study::new(cohort);
    let tables = numbers.iter().map(|&n| Ok((n, study.table(n)?))).collect::<Result<Vec<_>>>()?;
    let deltas = reproduce::deltas_table(&tables, &reference);
    let summary = reproduce::summary_table(&tables, &reference);

    let Some(dir) = &g.out else {
        return write_bundle(g.format, &tables, &deltas, &summary, stdout);
    };
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    let ext = match g.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut files: Vec<(String, &Table)> = tables.iter().map(|(n, t)| (format!("table_{n:02}.{ext}"), t)).collect();
    files.push((format!("deltas.{ext}"), &deltas));
    files.push((format!("summary.{ext}"), &summary));
    for (name, table) in files {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|source| Error::Io { path: path.clone(), source })?;
        emit(g.format, table, &table.to_json(), std::io::BufWriter::new(file), &path)?;
    }
    Ok(())
}

/// Everything in one stream: CSV blocks separated by `# title` lines, or one JSON document.
fn write_bundle(
    format: Format,
    tables: &[(u32, Table)],
    deltas: &Table,
    summary: &Table,
    out: &mut dyn Write,
) -> Result<()> {
    let io_err = |source| Error::Io { path: PathBuf::from("<stdout>"), source };
    match format {
        Format::Json => {
            let doc = json!({
                "tables": tables.iter().map(|(_, t)| t.to_json()).collect::<Vec<_>>(),
                "deltas": deltas.to_json(),
                "summary": summary.to_json(),
            });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out).map_err(io_err)?;
        }
        Format::Csv => {
            let blocks = tables.iter().map(|(_, t)| t).chain([deltas, summary]);
            for (i, t) in blocks.enumerate() {
                if i > 0 {
                    writeln!(out).map_err(io_err)?;
                }
                writeln!(out, "# {}", t.title).map_err(io_err)?;
                t.write_csv(&mut *out)?;
            }
        }
    }
    out.flush().map_err(io_err)
}
