//! BI-RADS records and their numeric encoding.

use serde::{Deserialize, Serialize};

use super::lexicon::*;
use crate::metrics::{consensus_reference, Candidacy};

/// The ten categorical ultrasound descriptors of one lesion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiradsDescriptors {
    pub tissue_composition: TissueComposition,
    pub shape: Shape,
    pub orientation: Orientation,
    pub margin: Margin,
    pub echo_pattern: EchoPattern,
    pub posterior: Posterior,
    pub calcifications: Calcifications,
    pub architectural_distortion: YesNo,
    pub clustered_microcysts: YesNo,
    pub complicated_cyst: YesNo,
}

/// Descriptor names in encoding order.
pub const DESCRIPTOR_NAMES: [&str; 10] = [
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
];

impl BiradsDescriptors {
    /// `(token, code)` of a descriptor by name.
    pub fn level(&self, name: &str) -> Option<(&'static str, usize)> {
        fn tc<L: Lexicon>(l: L) -> Option<(&'static str, usize)> {
            Some((l.token(), l.code()))
        }
        match name {
            "tissue_composition" => tc(self.tissue_composition),
            "shape" => tc(self.shape),
            "orientation" => tc(self.orientation),
            "margin" => tc(self.margin),
            "echo_pattern" => tc(self.echo_pattern),
            "posterior" => tc(self.posterior),
            "calcifications" => tc(self.calcifications),
            "architectural_distortion" => tc(self.architectural_distortion),
            "clustered_microcysts" => tc(self.clustered_microcysts),
            "complicated_cyst" => tc(self.complicated_cyst),
            _ => None,
        }
    }
}

/// Ordered level tokens of a descriptor.
pub fn descriptor_levels(name: &str) -> Option<Vec<&'static str>> {
    Some(match name {
        "tissue_composition" => TissueComposition::tokens(),
        "shape" => Shape::tokens(),
        "orientation" => Orientation::tokens(),
        "margin" => Margin::tokens(),
        "echo_pattern" => EchoPattern::tokens(),
        "posterior" => Posterior::tokens(),
        "calcifications" => Calcifications::tokens(),
        "architectural_distortion" | "clustered_microcysts" | "complicated_cyst" => YesNo::tokens(),
        _ => return None,
    })
}

/// One lesion's reading record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiradsRecord {
    pub patient_id: String,
    pub cohort: Cohort,
    pub descriptors: BiradsDescriptors,
    pub birads_category: BiradsCategory,
    pub pathology: Pathology,
    pub biopsy_votes: [Candidacy; 3],
    pub malignancy_votes: [MalignancyCall; 3],
}

/// Prediction target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Majority recommendation of three readers; rows = all lesions.
    Biopsy,
    /// Histopathology; rows = lesions with a benign or malignant result.
    Malignancy,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Biopsy => "biopsy",
            Task::Malignancy => "malignancy",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "biopsy" => Ok(Task::Biopsy),
            "malignancy" => Ok(Task::Malignancy),
            other => Err(format!("unknown task {other:?} (expected biopsy or malignancy)")),
        }
    }
}

impl BiradsRecord {
    /// Reference label for a task, or `None` when the row is not part of it.
    pub fn label(&self, task: Task) -> Option<bool> {
        match task {
            Task::Biopsy => Some(consensus_reference(self.biopsy_votes) == Candidacy::Candid),
            Task::Malignancy => match self.pathology {
                Pathology::Malignant => Some(true),
                Pathology::Benign => Some(false),
                Pathology::None => None,
            },
        }
    }

    /// Reader `k`'s binary call for a task; `n/a` malignancy calls count as benign.
    pub fn reader_call(&self, task: Task, k: usize) -> bool {
        match task {
            Task::Biopsy => self.biopsy_votes[k] == Candidacy::Candid,
            Task::Malignancy => self.malignancy_votes[k] == MalignancyCall::Malignant,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingScheme {
    /// One column per descriptor holding its 1-based level code.
    #[default]
    Ordinal,
    /// One indicator column per non-reference level (reference = first level).
    OneHot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub name: String,
    pub descriptor: String,
    /// For one-hot columns, the level this indicator marks.
    pub level: Option<String>,
}

/// Encoding of descriptors into numeric columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub scheme: EncodingScheme,
    pub descriptors: Vec<(String, Vec<String>)>,
}

impl EncodingSpec {
    pub fn new(scheme: EncodingScheme) -> Self {
        Self {
            scheme,
            descriptors: DESCRIPTOR_NAMES
                .iter()
                .map(|&n| (n.to_string(), descriptor_levels(n).expect("known").into_iter().map(String::from).collect()))
                .collect(),
        }
    }

    pub fn columns(&self) -> Vec<EncodedColumn> {
        let mut out = Vec::new();
        for (name, levels) in &self.descriptors {
            match self.scheme {
                EncodingScheme::Ordinal => out.push(EncodedColumn { name: name.clone(), descriptor: name.clone(), level: None }),
                EncodingScheme::OneHot => {
                    for l in levels.iter().skip(1) {
                        out.push(EncodedColumn {
                            name: format!("{name}={l}"),
                            descriptor: name.clone(),
                            level: Some(l.clone()),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn encode(&self, d: &BiradsDescriptors) -> Vec<f64> {
        let mut out = Vec::new();
        for (name, levels) in &self.descriptors {
            let (token, code) = d.level(name).expect("spec built from known descriptors");
            match self.scheme {
                EncodingScheme::Ordinal => out.push(code as f64),
                EncodingScheme::OneHot => out.extend(levels.iter().skip(1).map(|l| if l == token { 1.0 } else { 0.0 })),
            }
        }
        out
    }

    pub fn decode(&self, v: &[f64]) -> Result<BiradsDescriptors, UnknownLevel> {
        let mut tokens: Vec<String> = Vec::with_capacity(self.descriptors.len());
        let mut k = 0;
        for (name, levels) in &self.descriptors {
            let idx = match self.scheme {
                EncodingScheme::Ordinal => {
                    let c = v.get(k).copied().unwrap_or(f64::NAN);
                    k += 1;
                    if c.fract() != 0.0 || c < 1.0 || c as usize > levels.len() {
                        return Err(UnknownLevel { field: "code", token: format!("{name}={c}") });
                    }
                    c as usize - 1
                }
                EncodingScheme::OneHot => {
                    let w = levels.len() - 1;
                    let slice = v.get(k..k + w).unwrap_or(&[]);
                    k += w;
                    let hot: Vec<usize> = slice.iter().enumerate().filter(|(_, &x)| x == 1.0).map(|(i, _)| i).collect();
                    match hot.as_slice() {
                        [] => 0,
                        [i] => i + 1,
                        _ => return Err(UnknownLevel { field: "code", token: format!("{name}: several indicators set") }),
                    }
                }
            };
            tokens.push(levels[idx].clone());
        }
        let t = |i: usize| tokens[i].as_str();
        Ok(BiradsDescriptors {
            tissue_composition: Lexicon::parse(t(0))?,
            shape: Lexicon::parse(t(1))?,
            orientation: Lexicon::parse(t(2))?,
            margin: Lexicon::parse(t(3))?,
            echo_pattern: Lexicon::parse(t(4))?,
            posterior: Lexicon::parse(t(5))?,
            calcifications: Lexicon::parse(t(6))?,
            architectural_distortion: Lexicon::parse(t(7))?,
            clustered_microcysts: Lexicon::parse(t(8))?,
            complicated_cyst: Lexicon::parse(t(9))?,
        })
    }
}

/// Named numeric columns over a common set of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(names.len(), columns.len());
        Self { names, columns }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    /// Sub-design keeping the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Option<Design> {
        let cols = names.iter().map(|n| self.column(n).map(<[f64]>::to_vec)).collect::<Option<Vec<_>>>()?;
        Some(Design::new(names.to_vec(), cols))
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Keeps only the listed rows.
    pub fn rows(&self, idx: &[usize]) -> Design {
        Design::new(self.names.clone(), self.columns.iter().map(|c| idx.iter().map(|&i| c[i]).collect()).collect())
    }

    /// Column-wise concatenation.
    pub fn join(&self, other: &Design) -> Design {
        let mut d = self.clone();
        d.names.extend(other.names.iter().cloned());
        d.columns.extend(other.columns.iter().cloned());
        d
    }

    pub fn from_records(records: &[BiradsRecord], spec: &EncodingSpec) -> Design {
        let cols = spec.columns();
        let mut columns = vec![Vec::with_capacity(records.len()); cols.len()];
        for r in records {
            for (c, v) in columns.iter_mut().zip(spec.encode(&r.descriptors)) {
                c.push(v);
            }
        }
        Design::new(cols.into_iter().map(|c| c.name).collect(), columns)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sample_descriptors() -> BiradsDescriptors {
        BiradsDescriptors {
            tissue_composition: TissueComposition::Fibroglandular,
            shape: Shape::Oval,
            orientation: Orientation::Parallel,
            margin: Margin::Circumscribed,
            echo_pattern: EchoPattern::Hypoechoic,
            posterior: Posterior::None,
            calcifications: Calcifications::None,
            architectural_distortion: YesNo::No,
            clustered_microcysts: YesNo::No,
            complicated_cyst: YesNo::Yes,
        }
    }

    #[test]
    fn ordinal_codes() {
        let spec = EncodingSpec::new(EncodingScheme::Ordinal);
        let mut d = sample_descriptors();
        let v = spec.encode(&d);
        assert_eq!(v[3], 1.0);
        d.margin = Margin::Spiculated;
        assert_eq!(spec.encode(&d)[3], 5.0);
        assert_eq!(v, vec![2., 2., 1., 1., 5., 2., 3., 1., 1., 2.]);
    }

    #[test]
    fn round_trips_both_schemes() {
        for scheme in [EncodingScheme::Ordinal, EncodingScheme::OneHot] {
            let spec = EncodingSpec::new(scheme);
            let d = sample_descriptors();
            let v = spec.encode(&d);
            assert_eq!(v.len(), spec.columns().len());
            assert_eq!(spec.decode(&v).unwrap(), d);
        }
        let spec = EncodingSpec::new(EncodingScheme::Ordinal);
        let mut v = spec.encode(&sample_descriptors());
        v[3] = 6.0;
        assert!(spec.decode(&v).is_err());
    }

    #[test]
    fn consensus_label() {
        let r = BiradsRecord {
            patient_id: "p1".into(),
            cohort: Cohort::Train,
            descriptors: sample_descriptors(),
            birads_category: BiradsCategory::C4A,
            pathology: Pathology::None,
            biopsy_votes: [Candidacy::Candid, Candidacy::NotCandid, Candidacy::Candid],
            malignancy_votes: [MalignancyCall::Malignant, MalignancyCall::NotApplicable, MalignancyCall::Benign],
        };
        assert_eq!(r.label(Task::Biopsy), Some(true));
        assert_eq!(r.label(Task::Malignancy), None);
        assert!(r.reader_call(Task::Malignancy, 0));
        assert!(!r.reader_call(Task::Malignancy, 1));
    }
}
