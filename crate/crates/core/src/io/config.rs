//! Flat `key = value` pipeline configuration.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{EncodingScheme, Task};
use crate::selection::LambdaRule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    Youden,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub icc_threshold: f64,
    pub corr_threshold: f64,
    pub alpha: f64,
    pub cv_folds: usize,
    pub lambda_rule: LambdaRule,
    pub seed: u64,
    /// `None` runs both tasks.
    pub task: Option<Task>,
    pub encoding: EncodingScheme,
    pub threshold_rule: ThresholdRule,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            icc_threshold: 0.85,
            corr_threshold: 0.85,
            alpha: 0.05,
            cv_folds: 10,
            lambda_rule: LambdaRule::Min,
            seed: 20_240_601,
            task: None,
            encoding: EncodingScheme::Ordinal,
            threshold_rule: ThresholdRule::Youden,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), message: message.into() }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| invalid(key, format!("cannot parse {v:?}")))
}

impl PipelineConfig {
    pub fn tasks(&self) -> Vec<Task> {
        match self.task {
            Some(t) => vec![t],
            None => vec![Task::Biopsy, Task::Malignancy],
        }
    }

    /// Applies one setting; keys mirror the field names.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "icc_threshold" => self.icc_threshold = parse_num(key, v)?,
            "corr_threshold" => self.corr_threshold = parse_num(key, v)?,
            "alpha" => self.alpha = parse_num(key, v)?,
            "cv_folds" => self.cv_folds = parse_num(key, v)?,
            "lambda_rule" => self.lambda_rule = v.parse().map_err(|e: String| invalid(key, e))?,
            "seed" => self.seed = parse_num(key, v)?,
            "task" => {
                self.task = match v {
                    "both" => None,
                    t => Some(t.parse().map_err(|e: String| invalid(key, e))?),
                }
            }
            "encoding" => {
                self.encoding = match v {
                    "ordinal" => EncodingScheme::Ordinal,
                    "one_hot" => EncodingScheme::OneHot,
                    _ => return Err(invalid(key, format!("{v:?} is not ordinal or one_hot"))),
                }
            }
            "threshold_rule" => {
                self.threshold_rule = match v.split_once(':') {
                    None if v == "youden" => ThresholdRule::Youden,
                    Some(("fixed", t)) => ThresholdRule::Fixed(parse_num(key, t)?),
                    _ => return Err(invalid(key, format!("{v:?} is not youden or fixed:<probability>"))),
                }
            }
            _ => return Err(invalid(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (k, v) in [("icc_threshold", self.icc_threshold), ("corr_threshold", self.corr_threshold), ("alpha", self.alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(k, "must lie strictly between 0 and 1"));
            }
        }
        if let ThresholdRule::Fixed(t) = self.threshold_rule {
            if !(t > 0.0 && t < 1.0) {
                return Err(invalid("threshold_rule", "fixed threshold must lie strictly between 0 and 1"));
            }
        }
        if self.cv_folds < 2 {
            return Err(invalid("cv_folds", "need at least 2 folds"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, message: format!("expected key = value, got {line:?}") })?;
            c.set(k.trim(), v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Canonical rendering: every key, fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let task = self.task.map_or("both", Task::as_str);
        let encoding = match self.encoding {
            EncodingScheme::Ordinal => "ordinal",
            EncodingScheme::OneHot => "one_hot",
        };
        let rule = match self.threshold_rule {
            ThresholdRule::Youden => "youden".to_string(),
            ThresholdRule::Fixed(t) => format!("fixed:{t:?}"),
        };
        for (k, v) in [
            ("icc_threshold", format!("{:?}", self.icc_threshold)),
            ("corr_threshold", format!("{:?}", self.corr_threshold)),
            ("alpha", format!("{:?}", self.alpha)),
            ("cv_folds", self.cv_folds.to_string()),
            ("lambda_rule", self.lambda_rule.to_string()),
            ("seed", self.seed.to_string()),
            ("task", task.to_string()),
            ("encoding", encoding.to_string()),
            ("threshold_rule", rule),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// SHA-256 of the canonical rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = PipelineConfig::parse("# nothing set\n").unwrap();
        assert_eq!(c, PipelineConfig::default());
        let c = PipelineConfig::parse("alpha = 0.1\nlambda_rule=1se\ntask = malignancy # comment\nthreshold_rule = fixed:0.3\n").unwrap();
        assert_eq!(c.lambda_rule, LambdaRule::OneSe);
        assert_eq!(c.threshold_rule, ThresholdRule::Fixed(0.3));
        assert_eq!(PipelineConfig::parse(&c.to_text()).unwrap(), c);
        assert_ne!(c.hash(), PipelineConfig::default().hash());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(PipelineConfig::parse("alpha"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(PipelineConfig::parse("cv_folds = 1"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(PipelineConfig::parse("icc_threshold = 1.0"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(PipelineConfig::parse("colour = red"), Err(ConfigError::Invalid { .. })));
    }
}
