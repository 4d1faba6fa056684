//! CSV formats and the bundled data set.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use csv::StringRecord;
use prefid_core::dataset::{apply_corrections, Cohort, Correction, Product, Sample};

use crate::error::{Error, Result};

/// Environment variable pointing at a directory that replaces the bundled data.
pub const DATA_ENV: &str = "PREFID_DATA";

pub const COHORT_FILE: &str = "cohort.csv";
pub const ERRATA_FILE: &str = "errata.csv";
pub const REFERENCE_FILE: &str = "reference.csv";

const BUNDLED_COHORT: &str = include_str!("../data/cohort.csv");
const BUNDLED_ERRATA: &str = include_str!("../data/errata.csv");
const BUNDLED_REFERENCE: &str = include_str!("../data/reference.csv");

/// Note column names in cohort files, by noise level.
pub const NOTE_COLUMNS: [&str; 3] = ["note_v01", "note_v05", "note_v1"];

fn line_of(record: &StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::parse(line, e.to_string())
}

fn column(headers: &StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::parse(1, format!("missing column {name:?}")))
}

fn columns<const N: usize>(headers: &StringRecord, names: [&str; N]) -> Result<[usize; N]> {
    let mut idx = [0; N];
    for (slot, name) in idx.iter_mut().zip(names) {
        *slot = column(headers, name)?;
    }
    Ok(idx)
}

fn field(record: &StringRecord, idx: usize) -> Result<&str> {
    record.get(idx).map(str::trim).ok_or_else(|| Error::parse(line_of(record), format!("missing field {}", idx + 1)))
}

fn number<T: std::str::FromStr>(record: &StringRecord, idx: usize, what: &str) -> Result<T> {
    let raw = field(record, idx)?;
    raw.parse().map_err(|_| Error::parse(line_of(record), format!("invalid {what} {raw:?}")))
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(source)
}

/// Reads `id,u1..um,score,note_v01,note_v05,note_v1`. The criteria count is
/// the number of `u<k>` columns; `score` may be empty or absent.
pub fn read_cohort<R: Read>(source: R) -> Result<Cohort> {
    let mut rdr = reader(source);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let id_col = column(&headers, "id")?;
    let mut u_cols = Vec::new();
    while let Ok(c) = column(&headers, &format!("u{}", u_cols.len() + 1)) {
        u_cols.push(c);
    }
    if u_cols.is_empty() {
        return Err(Error::parse(1, "no utility columns (u1, u2, …)"));
    }
    let score_col = column(&headers, "score").ok();
    let note_cols = NOTE_COLUMNS.iter().map(|n| column(&headers, n)).collect::<Result<Vec<_>>>()?;

    let mut products = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        let id: u32 = number(&record, id_col, "id")?;
        let utilities = u_cols.iter().map(|&c| number(&record, c, "utility")).collect::<Result<Vec<f64>>>()?;
        let true_score = match score_col {
            Some(c) if !field(&record, c)?.is_empty() => Some(number(&record, c, "score")?),
            _ => None,
        };
        let mut notes = [0.0; 3];
        for (slot, &c) in notes.iter_mut().zip(&note_cols) {
            *slot = number(&record, c, "note")?;
        }
        let product = Product::new(id, utilities, notes, true_score).map_err(|e| Error::parse(line, e.to_string()))?;
        if products.iter().any(|p: &Product| p.id == id) {
            return Err(Error::parse(line, prefid_core::Error::DuplicateId(id).to_string()));
        }
        products.push(product);
    }
    Ok(Cohort::new(products)?)
}

/// Writes a cohort in the format read by [`read_cohort`], with values in
/// shortest round-trip form.
pub fn write_cohort<W: Write>(cohort: &Cohort, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["id".to_string()];
    header.extend((1..=cohort.criteria_count()).map(|k| format!("u{k}")));
    header.push("score".into());
    header.extend(NOTE_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for p in cohort.products() {
        let mut row = vec![p.id.to_string()];
        row.extend(p.utilities.iter().map(f64::to_string));
        row.push(p.true_score.map(|s| s.to_string()).unwrap_or_default());
        row.extend(p.notes.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| Error::Io { path: PathBuf::from("<output>"), source })?;
    Ok(())
}

/// Reads `name,ids` with ids separated by `;`.
pub fn read_samples<R: Read>(source: R) -> Result<Vec<Sample>> {
    let mut rdr = reader(source);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let (name_col, ids_col) = (column(&headers, "name")?, column(&headers, "ids")?);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        let name = field(&record, name_col)?.to_string();
        let ids = parse_id_list(field(&record, ids_col)?, ';').map_err(|m| Error::parse(line, m))?;
        out.push(Sample::new(name, ids).map_err(|e| Error::parse(line, e.to_string()))?);
    }
    Ok(out)
}

/// Parses `"613;2573;292"` style lists.
pub fn parse_id_list(raw: &str, sep: char) -> std::result::Result<Vec<u32>, String> {
    raw.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("invalid product id {s:?}")))
        .collect()
}

/// Reads `id,field,printed,corrected` where `field` is `u<k>`.
pub fn read_errata<R: Read>(source: R) -> Result<Vec<Correction>> {
    let mut rdr = reader(source);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let [id_c, field_c, printed_c, corrected_c] = columns(&headers, ["id", "field", "printed", "corrected"])?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let name = field(&record, field_c)?;
        let criterion = name
            .strip_prefix('u')
            .and_then(|k| k.parse().ok())
            .ok_or_else(|| Error::parse(line_of(&record), format!("unknown field {name:?}")))?;
        out.push(Correction {
            id: number(&record, id_c, "id")?,
            criterion,
            printed: number(&record, printed_c, "value")?,
            corrected: number(&record, corrected_c, "value")?,
        });
    }
    Ok(out)
}

/// One reference value: table number, row label, column label.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCell {
    pub table: u32,
    pub row: String,
    pub col: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Reference {
    pub cells: Vec<ReferenceCell>,
}

impl Reference {
    pub fn get(&self, table: u32, row: &str, col: &str) -> Option<f64> {
        self.cells.iter().find(|c| c.table == table && c.row == row && c.col == col).map(|c| c.value)
    }

    pub fn table(&self, table: u32) -> impl Iterator<Item = &ReferenceCell> {
        self.cells.iter().filter(move |c| c.table == table)
    }
}

pub fn read_reference<R: Read>(source: R) -> Result<Reference> {
    let mut rdr = reader(source);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let idx = columns(&headers, ["table", "row", "col", "value"])?;
    let mut cells = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        cells.push(ReferenceCell {
            table: number(&record, idx[0], "table")?,
            row: field(&record, idx[1])?.to_string(),
            col: field(&record, idx[2])?.to_string(),
            value: number(&record, idx[3], "value")?,
        });
    }
    Ok(Reference { cells })
}

/// Where data files come from: the compiled-in copies or a directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataSource {
    Bundled,
    Directory(PathBuf),
}

impl DataSource {
    /// The directory named by `PREFID_DATA` if set, else the bundled data.
    pub fn from_env() -> Self {
        match std::env::var_os(DATA_ENV) {
            Some(dir) if !dir.is_empty() => DataSource::Directory(dir.into()),
            _ => DataSource::Bundled,
        }
    }

    fn text(&self, file: &str, bundled: &'static str) -> Result<String> {
        match self {
            DataSource::Bundled => Ok(bundled.to_string()),
            DataSource::Directory(dir) => read_text(&dir.join(file)),
        }
    }

    pub fn cohort_as_printed(&self) -> Result<Cohort> {
        read_cohort(self.text(COHORT_FILE, BUNDLED_COHORT)?.as_bytes())
    }

    /// Corrections shipped with the data; a directory without an errata file has none.
    pub fn errata(&self) -> Result<Vec<Correction>> {
        if let DataSource::Directory(dir) = self {
            if !dir.join(ERRATA_FILE).exists() {
                return Ok(Vec::new());
            }
        }
        read_errata(self.text(ERRATA_FILE, BUNDLED_ERRATA)?.as_bytes())
    }

    /// Cohort with the errata applied unless `as_printed`.
    pub fn cohort(&self, as_printed: bool) -> Result<Cohort> {
        let printed = self.cohort_as_printed()?;
        if as_printed {
            return Ok(printed);
        }
        Ok(apply_corrections(&printed, &self.errata()?)?)
    }

    pub fn reference(&self) -> Result<Reference> {
        read_reference(self.text(REFERENCE_FILE, BUNDLED_REFERENCE)?.as_bytes())
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    match std::fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::MissingData(path.to_path_buf())),
        Err(source) => Err(Error::Io { path: path.to_path_buf(), source }),
    }
}

/// Cohort from an explicit file, as written.
pub fn load_cohort_file(path: &Path) -> Result<Cohort> {
    read_cohort(read_text(path)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "id,u1,u2,u3,u4,score,note_v01,note_v05,note_v1\n";

    #[test]
    fn parses_a_row() {
        let text = format!("{HEADER}1813,0.465,0.705,0.700,0.946,0.765,7.68,6.63,9.09\n");
        let c = read_cohort(text.as_bytes()).unwrap();
        let p = c.get(1813).unwrap();
        assert_eq!(p.utilities, [0.465, 0.705, 0.700, 0.946]);
        assert_eq!(p.notes, [7.68, 6.63, 9.09]);
        assert_eq!(p.true_score, Some(0.765));
    }

    #[test]
    fn range_error_names_the_line() {
        let text = format!("{HEADER}1,0.1,0.2,0.3,0.4,,1,2,3\n2,0.1,1.2,0.3,0.4,,1,2,3\n");
        match read_cohort(text.as_bytes()).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("outside"), "{message}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn malformed_number_and_duplicate() {
        let bad = format!("{HEADER}1,0.1,x,0.3,0.4,,1,2,3\n");
        assert!(matches!(read_cohort(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let dup = format!("{HEADER}1,0.1,0.2,0.3,0.4,,1,2,3\n1,0.1,0.2,0.3,0.4,,1,2,3\n");
        assert!(matches!(read_cohort(dup.as_bytes()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn samples_file() {
        let s = read_samples("name,ids\nA,613;2573; 292\n".as_bytes()).unwrap();
        assert_eq!(s[0].name(), "A");
        assert_eq!(s[0].ids(), &[613, 2573, 292]);
        assert!(read_samples("name,ids\nB,1;1\n".as_bytes()).is_err());
    }

    #[test]
    fn errata_file() {
        let e = read_errata("id,field,printed,corrected\n2663,u4,0.526,0.473\n".as_bytes()).unwrap();
        assert_eq!(e, [Correction { id: 2663, criterion: 4, printed: 0.526, corrected: 0.473 }]);
    }

    #[test]
    fn missing_directory_file() {
        let src = DataSource::Directory("/nonexistent/prefid".into());
        assert!(matches!(src.cohort_as_printed(), Err(Error::MissingData(_))));
    }
}
