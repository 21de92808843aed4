//! End-to-end run: extract, select, fit, evaluate.
//!
//! Selection, fitting and threshold choice only ever see the training view.
//! Every artifact is stamped with the config hash and seed; on failure the
//! artifacts produced so far are returned together with the manifest.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::io::{export_nomogram, CohortDataset, PipelineConfig, ThresholdRule};
use crate::metrics::{evaluate, youden_threshold, EvalReport, MethodScores};
use crate::model::lexicon::Cohort;
use crate::model::{
    build_nomogram, fit_logistic, fit_multivariable, screen_univariable, AxisSpec, Band, BiradsRecord, Design, EncodingSpec, LogisticModel,
    MultivariableFit, Nomogram, ScreenReport, Task, DESCRIPTOR_NAMES,
};
use crate::morphometry::{extract_features, ShapeFeatureVector};
use crate::selection::{run_selection, LassoConfig, SelectionConfig, SelectionReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Extract,
    Select,
    Fit,
    Evaluate,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Extract => "extract",
            Self::Select => "select",
            Self::Fit => "fit",
            Self::Evaluate => "evaluate",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    /// patient → rater → features.
    pub features: BTreeMap<String, BTreeMap<String, ShapeFeatureVector>>,
    /// `(patient, rater, reason)` for outlines whose features could not be computed.
    pub failures: Vec<(String, String, String)>,
}

/// Per-lesion feature extraction, run concurrently; output order is fixed.
pub fn extract_stage(ds: &CohortDataset) -> FeatureTable {
    let jobs: Vec<(&String, &String, _)> = ds.contours.iter().flat_map(|(p, m)| m.iter().map(move |(r, c)| (p, r, c))).collect();
    let results: Vec<_> = jobs.par_iter().map(|(p, r, c)| ((*p).clone(), (*r).clone(), extract_features(c))).collect();
    let mut t = FeatureTable::default();
    for (p, r, res) in results {
        match res {
            Ok(f) => {
                t.features.entry(p).or_default().insert(r, f);
            }
            Err(e) => t.failures.push((p, r, e.to_string())),
        }
    }
    t
}

/// Training rows of one task.
#[derive(Debug, Clone)]
pub struct TrainView {
    pub birads: Design,
    pub y: Vec<bool>,
    /// Training rows with outlines from both raters.
    pub morph_rows: Vec<usize>,
    pub morph_a: Design,
    pub morph_b: Option<Design>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModels {
    pub screening: ScreenReport,
    pub birads: MultivariableFit,
    pub morphometric: LogisticModel,
    pub fused: LogisticModel,
    /// Locked decision thresholds on predicted probability.
    pub thresholds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: Task,
    pub selection: Option<SelectionReport>,
    pub models: Option<FittedModels>,
    pub nomograms: Vec<Nomogram>,
    pub evaluation: Vec<EvalReport>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub status: String,
    pub completed: Vec<String>,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    /// File name → SHA-256.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub files: BTreeMap<String, Vec<u8>>,
    pub manifest: RunManifest,
    pub features: FeatureTable,
    pub tasks: Vec<TaskResult>,
}

impl RunArtifacts {
    /// Writes every file plus `manifest.json` under `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        let manifest = ("manifest.json".to_string(), self.manifest_bytes());
        for (name, bytes) in self.files.iter().chain(std::iter::once((&manifest.0, &manifest.1))) {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, bytes)?;
        }
        Ok(())
    }

    pub fn manifest_bytes(&self) -> Vec<u8> {
        let mut b = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
        b.push(b'\n');
        b
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} failed: {message}")]
pub struct PipelineFailure {
    pub stage: String,
    pub message: String,
    pub artifacts: Box<RunArtifacts>,
}

struct Run<'a> {
    ds: &'a CohortDataset,
    cfg: &'a PipelineConfig,
    hash: String,
    out: RunArtifacts,
}

impl Run<'_> {
    fn stamp(&mut self, name: String, kind: &str, data: impl Serialize) {
        let doc = json!({ "kind": kind, "config_hash": self.hash, "seed": self.cfg.seed, "data": data });
        let mut b = serde_json::to_vec_pretty(&doc).expect("artifacts serialize");
        b.push(b'\n');
        self.put(name, b);
    }

    fn put(&mut self, name: String, bytes: Vec<u8>) {
        self.out.manifest.files.insert(name.clone(), hex::encode(Sha256::digest(&bytes)));
        self.out.files.insert(name, bytes);
    }

    fn fail(mut self, stage: String, message: String) -> PipelineFailure {
        self.out.manifest.status = "failed".into();
        self.out.manifest.failed_stage = Some(stage.clone());
        self.out.manifest.error = Some(message.clone());
        PipelineFailure { stage, message, artifacts: Box::new(self.out) }
    }
}

fn feature_design(rows: &[&BiradsRecord], table: &FeatureTable, rater: &str) -> Design {
    let names: Vec<String> = ShapeFeatureVector::NAMES.iter().map(|s| s.to_string()).collect();
    let mut cols = vec![Vec::with_capacity(rows.len()); names.len()];
    for r in rows {
        let f = table.features[&r.patient_id][rater].to_array();
        for (c, v) in cols.iter_mut().zip(f) {
            c.push(v);
        }
    }
    Design::new(names, cols)
}

fn has_features(table: &FeatureTable, pid: &str, rater: &str) -> bool {
    table.features.get(pid).is_some_and(|m| m.contains_key(rater))
}

fn fit_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn axes_for(model: &LogisticModel, x: &Design) -> Vec<AxisSpec> {
    model
        .predictors
        .iter()
        .map(|name| {
            if DESCRIPTOR_NAMES.contains(&name.as_str()) {
                AxisSpec::descriptor(name).expect("descriptor")
            } else {
                let c = x.column(name).expect("model predictors come from the design");
                let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                AxisSpec::continuous(lo, hi)
            }
        })
        .collect()
}

fn bands(task: Task, threshold: f64) -> Vec<Band> {
    let (lo, hi) = match task {
        Task::Biopsy => ("follow-up", "biopsy advised"),
        Task::Malignancy => ("likely benign", "suspicious for malignancy"),
    };
    vec![Band { label: lo.into(), min_probability: 0.0 }, Band { label: hi.into(), min_probability: threshold }]
}

fn predict(model: &LogisticModel, x: &Design) -> Vec<f64> {
    let sub = x.select(&model.predictors).expect("predictors present");
    (0..sub.n_rows()).map(|i| model.probability(&sub.row(i))).collect()
}

fn threshold(rule: ThresholdRule, p: &[f64], y: &[bool]) -> Result<f64, String> {
    match rule {
        ThresholdRule::Fixed(t) => Ok(t),
        ThresholdRule::Youden => youden_threshold(p, y).map(|c| c.threshold).map_err(fit_err),
    }
}

/// Fits the three models on the training view only.
pub fn fit_stage(task: Task, view: &TrainView, selected: &[String], cfg: &PipelineConfig) -> Result<FittedModels, String> {
    let screening = screen_univariable(&view.birads, &view.y, cfg.alpha);
    let kept = screening.kept();
    if kept.is_empty() {
        return Err(format!("{}: no descriptor passed univariable screening", task.as_str()));
    }
    let birads = fit_multivariable(&view.birads.select(&kept).expect("kept columns exist"), &view.y, cfg.alpha).map_err(fit_err)?;
    if selected.is_empty() {
        return Err(format!("{}: LASSO selected no morphometric feature", task.as_str()));
    }
    let ym: Vec<bool> = view.morph_rows.iter().map(|&i| view.y[i]).collect();
    let morph_x = view.morph_a.select(selected).expect("selected columns exist");
    let morphometric = fit_logistic(&morph_x, &ym).map_err(|e| format!("morphometric model: {e}"))?;
    let fused_x = view.birads.rows(&view.morph_rows).select(&birads.model.predictors).expect("kept").join(&morph_x);
    let fused = fit_logistic(&fused_x, &ym).map_err(|e| format!("fused model: {e}"))?;
    let mut thresholds = BTreeMap::new();
    thresholds.insert("birads".into(), threshold(cfg.threshold_rule, &predict(&birads.model, &view.birads), &view.y)?);
    thresholds.insert("morphometric".into(), threshold(cfg.threshold_rule, &predict(&morphometric, &morph_x), &ym)?);
    thresholds.insert("fused".into(), threshold(cfg.threshold_rule, &predict(&fused, &fused_x), &ym)?);
    Ok(FittedModels { screening, birads, morphometric, fused, thresholds })
}

/// Runs every stage.
pub fn run_pipeline(ds: &CohortDataset, cfg: &PipelineConfig) -> Result<RunArtifacts, PipelineFailure> {
    run_until(ds, cfg, Stage::Evaluate)
}

pub fn run_until(ds: &CohortDataset, cfg: &PipelineConfig, last: Stage) -> Result<RunArtifacts, PipelineFailure> {
    let hash = cfg.hash();
    let mut run = Run {
        ds,
        cfg,
        out: RunArtifacts {
            files: BTreeMap::new(),
            manifest: RunManifest {
                config_hash: hash.clone(),
                seed: cfg.seed,
                status: "complete".into(),
                completed: Vec::new(),
                failed_stage: None,
                error: None,
                files: BTreeMap::new(),
            },
            features: FeatureTable::default(),
            tasks: Vec::new(),
        },
        hash,
    };
    if let Err(e) = cfg.validate() {
        return Err(run.fail("config".into(), e.to_string()));
    }
    run.put("config.txt".into(), cfg.to_text().into_bytes());
    run.stamp("validation.json".into(), "validation_report", &ds.report);

    let table = extract_stage(run.ds);
    run.stamp("features.json".into(), "features", &table);
    run.out.manifest.completed.push("extract".into());
    run.out.features = table.clone();
    if last == Stage::Extract {
        return Ok(run.out);
    }

    let raters = ds.raters();
    let spec = EncodingSpec::new(cfg.encoding);
    for task in cfg.tasks() {
        let ts = task.as_str();
        let rows: Vec<(&BiradsRecord, bool)> = ds.records.iter().filter_map(|r| r.label(task).map(|y| (r, y))).collect();
        let train: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].0.cohort == Cohort::Train).collect();
        if train.is_empty() {
            return Err(run.fail(format!("{ts}/select"), "no training rows".into()));
        }
        let train_recs: Vec<BiradsRecord> = train.iter().map(|&i| rows[i].0.clone()).collect();
        let y: Vec<bool> = train.iter().map(|&i| rows[i].1).collect();
        let Some(primary) = raters.first() else {
            return Err(run.fail(format!("{ts}/select"), "no outlines loaded".into()));
        };
        let second = raters.get(1);
        let morph_rows: Vec<usize> = (0..train_recs.len())
            .filter(|&i| {
                let p = &train_recs[i].patient_id;
                has_features(&table, p, primary) && second.is_none_or(|r| has_features(&table, p, r))
            })
            .collect();
        let morph_recs: Vec<&BiradsRecord> = morph_rows.iter().map(|&i| &train_recs[i]).collect();
        let view = TrainView {
            birads: Design::from_records(&train_recs, &spec),
            morph_a: feature_design(&morph_recs, &table, primary),
            morph_b: second.map(|r| feature_design(&morph_recs, &table, r)),
            morph_rows,
            y,
        };
        let mut result = TaskResult { task, selection: None, models: None, nomograms: Vec::new(), evaluation: Vec::new(), notes: Vec::new() };
        result.notes.push(format!("{} training rows, {} with outlines for selection", train.len(), view.morph_rows.len()));

        let Some(morph_b) = &view.morph_b else {
            return Err(run.fail(format!("{ts}/select"), "the reproducibility filter needs outlines from two raters".into()));
        };
        let ym: Vec<bool> = view.morph_rows.iter().map(|&i| view.y[i]).collect();
        let scfg = SelectionConfig {
            icc_threshold: cfg.icc_threshold,
            corr_threshold: cfg.corr_threshold,
            lasso: LassoConfig { folds: cfg.cv_folds, rule: cfg.lambda_rule, seed: cfg.seed, ..Default::default() },
        };
        let selection = match run_selection(&view.morph_a, morph_b, &ym, &scfg) {
            Ok(s) => s,
            Err(e) => return Err(run.fail(format!("{ts}/select"), e.to_string())),
        };
        run.stamp(format!("{ts}/selection.json"), "selection_report", &selection);
        run.out.manifest.completed.push(format!("{ts}/select"));
        let selected = selection.selected.clone();
        result.selection = Some(selection);
        if last == Stage::Select {
            run.out.tasks.push(result);
            continue;
        }

        let models = match fit_stage(task, &view, &selected, cfg) {
            Ok(m) => m,
            Err(e) => return Err(run.fail(format!("{ts}/fit"), e)),
        };
        let fused_x = view.birads.rows(&view.morph_rows).join(&view.morph_a);
        let morph_x = view.morph_a.clone();
        let mut nomograms = Vec::new();
        for (kind, model, x) in [("birads", &models.birads.model, &view.birads), ("morphometric", &models.morphometric, &morph_x), ("fused", &models.fused, &fused_x)] {
            let mut n = match build_nomogram(&format!("{ts}-{kind}"), task, model, axes_for(model, x)) {
                Ok(n) => n,
                Err(e) => return Err(run.fail(format!("{ts}/fit"), format!("{kind} nomogram: {e}"))),
            };
            n.bands = bands(task, models.thresholds[kind]);
            n.provenance.config_hash = Some(run.hash.clone());
            n.provenance.seed = Some(cfg.seed);
            run.put(format!("{ts}/nomograms/{}.json", n.id), export_nomogram(&n));
            nomograms.push(n);
        }
        run.stamp(format!("{ts}/models.json"), "fitted_models", &models);
        run.out.manifest.completed.push(format!("{ts}/fit"));
        result.nomograms = nomograms;
        if last == Stage::Fit {
            result.models = Some(models);
            run.out.tasks.push(result);
            continue;
        }

        // evaluation rows: every labelled lesion with a primary outline
        let eval: Vec<(&BiradsRecord, bool)> = rows.iter().copied().filter(|(r, _)| has_features(&table, &r.patient_id, primary)).collect();
        result.notes.push(format!("{} labelled rows without a primary outline excluded from evaluation", rows.len() - eval.len()));
        let eval_recs: Vec<BiradsRecord> = eval.iter().map(|(r, _)| (*r).clone()).collect();
        let eval_refs: Vec<&BiradsRecord> = eval_recs.iter().collect();
        let bx = Design::from_records(&eval_recs, &spec);
        let mx = feature_design(&eval_refs, &table, primary);
        let fx = bx.join(&mx);
        let probs = [
            ("birads", predict(&models.birads.model, &bx)),
            ("morphometric", predict(&models.morphometric, &mx)),
            ("fused", predict(&models.fused, &fx)),
        ];
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for c in [Cohort::Train, Cohort::Internal, Cohort::External1, Cohort::External2] {
            let idx: Vec<usize> = (0..eval.len()).filter(|&i| eval[i].0.cohort == c).collect();
            if !idx.is_empty() {
                groups.push((crate::model::lexicon::Lexicon::token(c).to_string(), idx));
            }
        }
        let pooled: Vec<usize> = (0..eval.len()).filter(|&i| eval[i].0.cohort != Cohort::Train).collect();
        if !pooled.is_empty() {
            groups.push(("pooled_validation".into(), pooled));
        }
        for (name, idx) in groups {
            let labels: Vec<bool> = idx.iter().map(|&i| eval[i].1).collect();
            let mut methods: Vec<MethodScores> = probs
                .iter()
                .map(|(k, p)| MethodScores { name: (*k).into(), scores: idx.iter().map(|&i| p[i]).collect(), threshold: models.thresholds[*k] })
                .collect();
            for k in 0..3 {
                methods.push(MethodScores {
                    name: format!("radiologist_{}", k + 1),
                    scores: idx.iter().map(|&i| if eval[i].0.reader_call(task, k) { 1.0 } else { 0.0 }).collect(),
                    threshold: 0.5,
                });
            }
            match evaluate(&name, &methods, &labels) {
                Ok(r) => result.evaluation.push(r),
                Err(e) => result.notes.push(format!("{name}: not evaluated ({e})")),
            }
        }
        run.stamp(format!("{ts}/evaluation.json"), "evaluation", json!({ "reports": &result.evaluation, "notes": &result.notes }));
        run.out.manifest.completed.push(format!("{ts}/evaluate"));
        result.models = Some(models);
        run.out.tasks.push(result);
    }
    Ok(run.out)
}

/// Pairwise DeLong p-values of an evaluation report keyed by method pair.
pub fn comparison_table(r: &EvalReport) -> Value {
    let mut rows = Vec::new();
    for i in 0..r.methods.len() {
        for j in i + 1..r.methods.len() {
            rows.push(json!({ "a": r.methods[i], "b": r.methods[j], "p": r.pairwise_p[i][j] }));
        }
    }
    json!({ "partition": r.partition, "pairs": rows })
}
