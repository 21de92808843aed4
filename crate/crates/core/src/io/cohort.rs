//! Cohort ingestion: a CSV of reading records and JSONL lesion outlines.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::Candidacy;
use crate::model::lexicon::*;
use crate::model::{BiradsDescriptors, BiradsRecord};
use crate::morphometry::{LesionContour, Point};

/// Header of the records file, in order.
pub const RECORD_COLUMNS: [&str; 20] = [
    "patient_id",
    "cohort",
    "tissue_composition",
    "shape",
    "orientation",
    "margin",
    "echo_pattern",
    "posterior",
    "calcifications",
    "architectural_distortion",
    "clustered_microcysts",
    "complicated_cyst",
    "birads_category",
    "pathology",
    "biopsy_vote_1",
    "biopsy_vote_2",
    "biopsy_vote_3",
    "malignancy_vote_1",
    "malignancy_vote_2",
    "malignancy_vote_3",
];

/// One line of the contours file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourLine {
    pub patient_id: String,
    pub rater_id: String,
    /// Outline vertices in millimetres.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub file: String,
    pub line: usize,
    pub patient_id: Option<String>,
    pub field: Option<String>,
    pub reason: String,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.file, self.line)?;
        if let Some(p) = &self.patient_id {
            write!(f, " patient {p}")?;
        }
        if let Some(fl) = &self.field {
            write!(f, " field {fl}")?;
        }
        write!(f, ": {}", self.reason)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records: usize,
    pub contours: usize,
    pub rejected: Vec<Rejection>,
    /// Records with no outline; usable only for descriptor models.
    pub without_contours: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CohortError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{} schema violation(s); first: {}", .0.rejected.len(), .0.rejected[0])]
    SchemaViolation(ValidationReport),
    #[error("{} join error(s); first: {}", .0.rejected.len(), .0.rejected[0])]
    JoinError(ValidationReport),
}

impl CohortError {
    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            Self::SchemaViolation(r) | Self::JoinError(r) => Some(r),
            Self::Parse { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortDataset {
    pub records: Vec<BiradsRecord>,
    /// patient → rater → outline.
    pub contours: BTreeMap<String, BTreeMap<String, LesionContour>>,
    pub report: ValidationReport,
}

impl CohortDataset {
    /// Rater ids in sorted order; the first is the primary reader.
    pub fn raters(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.contours.values().flat_map(|m| m.keys()).collect();
        set.into_iter().cloned().collect()
    }
}

struct RowParser<'a> {
    file: &'a str,
    line: usize,
    patient: Option<String>,
    errors: Vec<Rejection>,
}

impl RowParser<'_> {
    fn lex<L: Lexicon>(&mut self, field: &str, raw: &str) -> Option<L> {
        match L::parse(raw) {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(Rejection {
                    file: self.file.to_string(),
                    line: self.line,
                    patient_id: self.patient.clone(),
                    field: Some(field.to_string()),
                    reason: format!("unknown level {:?}; expected one of {:?}", e.token, L::tokens()),
                });
                None
            }
        }
    }
}

fn parse_record(p: &mut RowParser<'_>, row: &csv::StringRecord) -> Option<BiradsRecord> {
    let get = |i: usize| row.get(i).unwrap_or("");
    let pid = get(0).trim().to_string();
    p.patient = Some(pid.clone());
    if pid.is_empty() {
        p.errors.push(Rejection { file: p.file.into(), line: p.line, patient_id: None, field: Some("patient_id".into()), reason: "empty".into() });
    }
    let cohort = p.lex::<Cohort>(RECORD_COLUMNS[1], get(1));
    let tissue = p.lex(RECORD_COLUMNS[2], get(2));
    let shape = p.lex(RECORD_COLUMNS[3], get(3));
    let orientation = p.lex(RECORD_COLUMNS[4], get(4));
    let margin = p.lex(RECORD_COLUMNS[5], get(5));
    let echo = p.lex(RECORD_COLUMNS[6], get(6));
    let posterior = p.lex(RECORD_COLUMNS[7], get(7));
    let calc = p.lex(RECORD_COLUMNS[8], get(8));
    let ad = p.lex(RECORD_COLUMNS[9], get(9));
    let cm = p.lex(RECORD_COLUMNS[10], get(10));
    let cc = p.lex(RECORD_COLUMNS[11], get(11));
    let cat = p.lex::<BiradsCategory>(RECORD_COLUMNS[12], get(12));
    let path = p.lex::<Pathology>(RECORD_COLUMNS[13], get(13));
    let bv: Vec<Option<Candidacy>> = (14..17).map(|i| p.lex(RECORD_COLUMNS[i], get(i))).collect();
    let mv: Vec<Option<MalignancyCall>> = (17..20).map(|i| p.lex(RECORD_COLUMNS[i], get(i))).collect();
    if pid.is_empty() {
        return None;
    }
    Some(BiradsRecord {
        patient_id: pid,
        cohort: cohort?,
        descriptors: BiradsDescriptors {
            tissue_composition: tissue?,
            shape: shape?,
            orientation: orientation?,
            margin: margin?,
            echo_pattern: echo?,
            posterior: posterior?,
            calcifications: calc?,
            architectural_distortion: ad?,
            clustered_microcysts: cm?,
            complicated_cyst: cc?,
        },
        birads_category: cat?,
        pathology: path?,
        biopsy_votes: [bv[0]?, bv[1]?, bv[2]?],
        malignancy_votes: [mv[0]?, mv[1]?, mv[2]?],
    })
}

/// Parses a records CSV; all rows are checked before failing.
pub fn parse_records(text: &str, file: &str) -> Result<(Vec<BiradsRecord>, Vec<Rejection>), CohortError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| CohortError::Parse { path: file.into(), message: e.to_string() })?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != RECORD_COLUMNS {
        return Err(CohortError::Parse { path: file.into(), message: format!("header must be {}", RECORD_COLUMNS.join(",")) });
    }
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CohortError::Parse { path: file.into(), message: format!("line {line}: {e}") })?;
        let mut p = RowParser { file, line, patient: None, errors: Vec::new() };
        if let Some(r) = parse_record(&mut p, &row) {
            records.push((line, r));
        }
        errors.extend(p.errors);
    }
    let mut seen = BTreeMap::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, r) in records {
        if let Some(first) = seen.insert(r.patient_id.clone(), line) {
            errors.push(Rejection {
                file: file.into(),
                line,
                patient_id: Some(r.patient_id.clone()),
                field: Some("patient_id".into()),
                reason: format!("duplicate patient_id (first on line {first})"),
            });
        } else {
            out.push(r);
        }
    }
    Ok((out, errors))
}

pub fn records_to_csv(records: &[BiradsRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_COLUMNS).expect("in-memory write");
    for r in records {
        let d = &r.descriptors;
        let mut row: Vec<&str> = vec![
            &r.patient_id,
            r.cohort.token(),
            d.tissue_composition.token(),
            d.shape.token(),
            d.orientation.token(),
            d.margin.token(),
            d.echo_pattern.token(),
            d.posterior.token(),
            d.calcifications.token(),
            d.architectural_distortion.token(),
            d.clustered_microcysts.token(),
            d.complicated_cyst.token(),
            r.birads_category.token(),
            r.pathology.token(),
        ];
        row.extend(r.biopsy_votes.iter().map(|v| v.token()));
        row.extend(r.malignancy_votes.iter().map(|v| v.token()));
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("tokens are UTF-8")
}

pub fn contours_to_jsonl(contours: &BTreeMap<String, BTreeMap<String, LesionContour>>) -> String {
    let mut s = String::new();
    for (pid, raters) in contours {
        for (rid, c) in raters {
            let line = ContourLine { patient_id: pid.clone(), rater_id: rid.clone(), points: c.vertices().iter().map(|p| [p.x, p.y]).collect() };
            s.push_str(&serde_json::to_string(&line).expect("finite outline"));
            s.push('\n');
        }
    }
    s
}

/// Validates and joins records with outlines.
pub fn join_cohort(records: Vec<BiradsRecord>, mut rejected: Vec<Rejection>, contours_text: &str, contours_file: &str) -> Result<CohortDataset, CohortError> {
    let ids: BTreeSet<&str> = records.iter().map(|r| r.patient_id.as_str()).collect();
    let mut contours: BTreeMap<String, BTreeMap<String, LesionContour>> = BTreeMap::new();
    let mut schema_bad = !rejected.iter().all(|r| r.reason.starts_with("duplicate"));
    let mut join_bad = rejected.iter().any(|r| r.reason.starts_with("duplicate"));
    let mut n = 0;
    for (i, raw) in contours_text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        n += 1;
        let rej = |pid: Option<&str>, field: &str, reason: String| Rejection {
            file: contours_file.into(),
            line,
            patient_id: pid.map(String::from),
            field: Some(field.into()),
            reason,
        };
        let c: ContourLine = match serde_json::from_str(raw) {
            Ok(c) => c,
            Err(e) => {
                rejected.push(rej(None, "line", e.to_string()));
                schema_bad = true;
                continue;
            }
        };
        if !ids.contains(c.patient_id.as_str()) {
            rejected.push(rej(Some(&c.patient_id), "patient_id", "outline has no matching record".into()));
            join_bad = true;
            continue;
        }
        let outline = match LesionContour::new(c.points.iter().map(|p| Point::new(p[0], p[1])).collect()) {
            Ok(o) => o,
            Err(e) => {
                rejected.push(rej(Some(&c.patient_id), "points", e.to_string()));
                schema_bad = true;
                continue;
            }
        };
        if contours.entry(c.patient_id.clone()).or_default().insert(c.rater_id.clone(), outline).is_some() {
            rejected.push(rej(Some(&c.patient_id), "rater_id", format!("second outline from rater {:?}; one lesion per patient", c.rater_id)));
            join_bad = true;
        }
    }
    let report = ValidationReport {
        records: records.len(),
        contours: n,
        without_contours: records.iter().filter(|r| !contours.contains_key(&r.patient_id)).map(|r| r.patient_id.clone()).collect(),
        rejected,
    };
    if schema_bad {
        return Err(CohortError::SchemaViolation(report));
    }
    if join_bad {
        return Err(CohortError::JoinError(report));
    }
    Ok(CohortDataset { records, contours, report })
}

fn read(path: &Path) -> Result<String, CohortError> {
    std::fs::read_to_string(path).map_err(|e| CohortError::Parse { path: path.display().to_string(), message: e.to_string() })
}

/// Loads and validates a cohort from a records CSV and a contours JSONL file.
pub fn load_cohort(records: &Path, contours: &Path) -> Result<CohortDataset, CohortError> {
    let rfile = records.display().to_string();
    let (recs, rejected) = parse_records(&read(records)?, &rfile)?;
    join_cohort(recs, rejected, &read(contours)?, &contours.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "P1,train,fat,oval,parallel,circumscribed,hypoechoic,none,none,no,no,no,3,benign,not_candid,not_candid,candid,benign,benign,n/a";

    fn csv(rows: &[&str]) -> String {
        let mut s = RECORD_COLUMNS.join(",");
        for r in rows {
            s.push('\n');
            s.push_str(r);
        }
        s
    }

    #[test]
    fn unknown_token_names_row_and_field() {
        let bad = GOOD.replace("P1", "P2").replace("circumscribed", "speculated");
        let (recs, errs) = parse_records(&csv(&[GOOD, &bad]), "r.csv").unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(errs.len(), 1);
        assert_eq!((errs[0].line, errs[0].field.as_deref()), (3, Some("margin")));
        let e = join_cohort(recs, errs, "", "c.jsonl").unwrap_err();
        assert!(matches!(e, CohortError::SchemaViolation(_)));
    }

    #[test]
    fn duplicates_and_orphans_are_join_errors() {
        let (recs, errs) = parse_records(&csv(&[GOOD, GOOD]), "r.csv").unwrap();
        assert!(matches!(join_cohort(recs, errs, "", "c").unwrap_err(), CohortError::JoinError(_)));
        let (recs, errs) = parse_records(&csv(&[GOOD]), "r.csv").unwrap();
        let orphan = r#"{"patient_id":"P9","rater_id":"A","points":[[0,0],[1,0],[0,1]]}"#;
        let e = join_cohort(recs, errs, orphan, "c").unwrap_err();
        assert_eq!(e.report().unwrap().rejected[0].field.as_deref(), Some("patient_id"));
    }

    #[test]
    fn csv_round_trip() {
        let (recs, errs) = parse_records(&csv(&[GOOD]), "r.csv").unwrap();
        assert!(errs.is_empty());
        let (back, _) = parse_records(&records_to_csv(&recs), "again").unwrap();
        assert_eq!(back, recs);
        let ds = join_cohort(recs, vec![], r#"{"patient_id":"P1","rater_id":"A","points":[[0,0],[2,0],[0,2]]}"#, "c").unwrap();
        assert_eq!(ds.raters(), vec!["A"]);
        assert!(ds.report.without_contours.is_empty());
    }
}
