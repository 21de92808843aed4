//! Cohort files, configuration, synthetic data and nomogram documents.

mod cohort;
mod config;
mod document;
mod synthetic;

pub use cohort::{
    contours_to_jsonl, join_cohort, load_cohort, parse_records, records_to_csv, CohortDataset, CohortError, ContourLine, Rejection, ValidationReport,
    RECORD_COLUMNS,
};
pub use config::{ConfigError, PipelineConfig, ThresholdRule};
pub use document::{
    export_nomogram, import_nomogram, read_nomogram, seal_document, verify_checksum, write_nomogram, DocumentError, ImportedNomogram, FORMAT_MAJOR,
    FORMAT_MINOR,
};
pub use synthetic::{synthetic_cohort, SyntheticSpec};
