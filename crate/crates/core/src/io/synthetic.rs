//! Seeded synthetic cohorts with planted descriptor and shape signal.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::cohort::{CohortDataset, ValidationReport};
use crate::metrics::Candidacy;
use crate::model::lexicon::*;
use crate::model::{BiradsDescriptors, BiradsRecord};
use crate::morphometry::{shapes, LesionContour, Point};
use crate::stats::sigmoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub cohorts: Vec<(Cohort, usize)>,
    /// Log-odds per unit of the descriptor latent.
    pub descriptor_signal: f64,
    /// Log-odds per unit of the shape latent.
    pub shape_signal: f64,
    /// Number of independent outlines per lesion.
    pub raters: usize,
    /// Relative amplitude of the between-rater boundary wobble.
    pub rater_noise: f64,
    pub missing_contour_rate: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            cohorts: vec![(Cohort::Train, 400), (Cohort::Internal, 150), (Cohort::External1, 100), (Cohort::External2, 100)],
            descriptor_signal: 1.2,
            shape_signal: 1.2,
            raters: 2,
            rater_noise: 0.01,
            missing_contour_rate: 0.0,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Level drawn from `k` ordered bins of a noisy latent; `rising` puts high
/// latents on the last level.
fn binned<L: Lexicon>(rng: &mut ChaCha8Rng, latent: f64, rising: bool) -> L {
    let k = L::ALL.len();
    let t = sigmoid(1.5 * latent + 0.8 * normal(rng));
    let idx = ((t * k as f64) as usize).min(k - 1);
    L::ALL[if rising { idx } else { k - 1 - idx }]
}

fn uniform<L: Lexicon>(rng: &mut ChaCha8Rng) -> L {
    L::ALL[rng.gen_range(0..L::ALL.len())]
}

fn outline(rng: &mut ChaCha8Rng, latent: f64, raters: usize, noise: f64) -> Vec<LesionContour> {
    let radius = 4.0 + 8.0 * rng.gen::<f64>();
    let roughness = 0.1 + 0.8 * sigmoid(1.5 * latent + 0.3 * normal(rng));
    let stretch = 1.0 + 1.2 * sigmoid(1.5 * latent + 0.3 * normal(rng));
    let base = shapes::random_blob(rng.gen(), 120, radius, roughness);
    let angle = rng.gen_range(0.0..PI);
    let (s, c) = angle.sin_cos();
    let shaped: Vec<Point> = base.vertices().iter().map(|p| Point::new(p.x * stretch, p.y)).map(|p| Point::new(c * p.x - s * p.y, s * p.x + c * p.y)).collect();
    (0..raters)
        .map(|r| {
            if r == 0 {
                return LesionContour::new(shaped.clone()).expect("stretched star-shaped blob is simple");
            }
            // smooth radial wobble about the blob center keeps the outline star-shaped
            let (a2, p2, a3, p3) = (noise * normal(rng), rng.gen_range(0.0..2.0 * PI), noise * normal(rng), rng.gen_range(0.0..2.0 * PI));
            let pts = shaped
                .iter()
                .map(|p| {
                    let t = p.y.atan2(p.x);
                    let f = 1.0 + (a2 * (2.0 * t + p2).cos() + a3 * (3.0 * t + p3).cos()).clamp(-0.2, 0.2);
                    p.scale(f)
                })
                .collect();
            LesionContour::new(pts).expect("small radial wobble keeps the outline simple")
        })
        .collect()
}

pub fn synthetic_cohort(spec: &SyntheticSpec) -> CohortDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    let mut contours = BTreeMap::new();
    let mut id = 0;
    for &(cohort, n) in &spec.cohorts {
        for _ in 0..n {
            id += 1;
            let patient_id = format!("P{id:05}");
            let zb = normal(&mut rng);
            let zm = normal(&mut rng);
            let eta = -0.3 + spec.descriptor_signal * zb + spec.shape_signal * zm;
            let malignant = rng.gen::<f64>() < sigmoid(eta);
            let pathology = if malignant {
                Pathology::Malignant
            } else if rng.gen::<f64>() < 0.15 {
                Pathology::None
            } else {
                Pathology::Benign
            };
            let descriptors = BiradsDescriptors {
                tissue_composition: uniform(&mut rng),
                shape: binned(&mut rng, zb, false),
                orientation: binned(&mut rng, zb, true),
                margin: binned(&mut rng, zb, true),
                echo_pattern: uniform(&mut rng),
                posterior: binned(&mut rng, zb, true),
                calcifications: binned(&mut rng, zb, false),
                architectural_distortion: binned(&mut rng, zb - 1.0, true),
                clustered_microcysts: uniform(&mut rng),
                complicated_cyst: uniform(&mut rng),
            };
            let mut votes = || {
                let s = zb + 0.4 * zm + 0.6 * normal(&mut rng);
                (if s > 0.2 { Candidacy::Candid } else { Candidacy::NotCandid }, s)
            };
            let v: Vec<(Candidacy, f64)> = (0..3).map(|_| votes()).collect();
            let call = |s: f64, p: Pathology| match p {
                Pathology::None if s < -0.5 => MalignancyCall::NotApplicable,
                _ if s > 0.5 => MalignancyCall::Malignant,
                _ => MalignancyCall::Benign,
            };
            let cat_idx = ((sigmoid(1.3 * zb + 0.5 * normal(&mut rng)) * 6.0) as usize).min(5);
            records.push(BiradsRecord {
                patient_id: patient_id.clone(),
                cohort,
                descriptors,
                birads_category: BiradsCategory::ALL[cat_idx],
                pathology,
                biopsy_votes: [v[0].0, v[1].0, v[2].0],
                malignancy_votes: [call(v[0].1, pathology), call(v[1].1, pathology), call(v[2].1, pathology)],
            });
            let outlines = outline(&mut rng, zm, spec.raters, spec.rater_noise);
            if rng.gen::<f64>() >= spec.missing_contour_rate {
                let by_rater: BTreeMap<String, LesionContour> =
                    outlines.into_iter().enumerate().map(|(r, c)| (char::from(b'A' + r as u8).to_string(), c)).collect();
                contours.insert(patient_id, by_rater);
            }
        }
    }
    let report = ValidationReport {
        records: records.len(),
        contours: contours.values().map(BTreeMap::len).sum(),
        rejected: Vec::new(),
        without_contours: records.iter().filter(|r| !contours.contains_key(&r.patient_id)).map(|r| r.patient_id.clone()).collect(),
    };
    CohortDataset { records, contours, report }
}
