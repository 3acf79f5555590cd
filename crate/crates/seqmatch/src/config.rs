//! Declarative experiment configs: a single TOML file naming the model, the
//! test, and the campaign. All randomness flows from the mandatory
//! `master_seed`; omitting it is an error, never an implicit time seed.
//!
//! ```toml
//! master_seed = 7
//!
//! [model]
//! m1 = 2
//! m2 = 1
//! alpha = 1.0
//! beta = 1.0
//! left = ["bern:0.2", "bern:0.8"]   # or explicit arrays like [[0.8, 0.2]]
//! right = ["bern:0.2"]
//! truth = { pairs = [[1, 1]] }      # or "reject"
//!
//! [test]
//! kind = "seq_known"                # seq_known | fl_known | fl_zhou
//!                                   # | seq_unknown | fl_unknown
//! horizon = [20, 40]
//! # lambda = 0.05                   # fl_zhou only
//! # lambda1/lambda2/lambda3 = ...   # unknown-count tests
//!
//! [campaign]
//! trials = 1000
//! parallelism = 2
//!
//! [output]
//! json = "report.json"
//! csv = "report.csv"
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Rates};
use crate::error::{Error, Result};
use crate::hypothesis::{check_enumerable, index_of, HypothesisIndex, MatchingSet, ProblemDims};
use crate::model::SourceModel;
use crate::seq_unknown::Thresholds;
use crate::simulator::{CampaignOptions, TestKind};

/// A distribution entry: the `"bern:<p>"` shorthand expanding to `[1-p, p]`,
/// or an explicit weight array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSpec {
    Shorthand(String),
    Weights(Vec<f64>),
}

impl DistSpec {
    pub fn build(&self) -> Result<Distribution> {
        match self {
            DistSpec::Weights(w) => Distribution::new(w.clone()),
            DistSpec::Shorthand(s) => {
                let rest = s.strip_prefix("bern:").ok_or_else(|| {
                    Error::Config(format!("unknown distribution shorthand {s:?}"))
                })?;
                let p: f64 = rest
                    .parse()
                    .map_err(|e| Error::Config(format!("bad bernoulli parameter {rest:?}: {e}")))?;
                Distribution::bernoulli(p).map_err(|e| Error::Config(e.to_string()))
            }
        }
    }
}

/// The true hypothesis: `"reject"` or the list of 1-based matched pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TruthSpec {
    Tag(String),
    Pairs { pairs: Vec<[usize; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub m1: usize,
    pub m2: usize,
    pub alpha: f64,
    pub beta: f64,
    pub left: Vec<DistSpec>,
    pub right: Vec<DistSpec>,
    pub truth: TruthSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub kind: String,
    pub horizon: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub trials: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub model: ModelSpec,
    pub test: TestSpec,
    pub campaign: CampaignSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Parses and fully validates a config: model membership, hypothesis
    /// space size, threshold invariants, and test/model consistency.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.build_model()?;
        check_enumerable(&model.dims)?;
        let test = self.build_test()?;
        if self.campaign.trials == 0 {
            return Err(Error::Config("campaign.trials must be at least 1".into()));
        }
        if self.test.horizon.is_empty() {
            return Err(Error::Config("test.horizon must list at least one N".into()));
        }
        if self.test.horizon.iter().any(|&n| n < 2) {
            return Err(Error::Config("every horizon must be at least 2".into()));
        }
        match (&test, &model.truth) {
            (TestKind::SeqKnown | TestKind::FlKnown | TestKind::FlZhou { .. }, HypothesisIndex::Reject) => {
                Err(Error::Config(
                    "known-count tests need a model with a true matching".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn build_model(&self) -> Result<SourceModel> {
        let spec = &self.model;
        let dims = ProblemDims::new(spec.m1, spec.m2).map_err(|e| Error::Config(e.to_string()))?;
        if spec.left.len() != spec.m1 || spec.right.len() != spec.m2 {
            return Err(Error::Config(format!(
                "model lists {} left and {} right distributions for dims ({}, {})",
                spec.left.len(),
                spec.right.len(),
                spec.m1,
                spec.m2
            )));
        }
        let left = spec.left.iter().map(|d| d.build()).collect::<Result<Vec<_>>>()?;
        let right = spec.right.iter().map(|d| d.build()).collect::<Result<Vec<_>>>()?;
        let truth = match &spec.truth {
            TruthSpec::Tag(tag) if tag == "reject" => HypothesisIndex::Reject,
            TruthSpec::Tag(tag) => {
                return Err(Error::Config(format!("unknown truth tag {tag:?}")))
            }
            TruthSpec::Pairs { pairs } => {
                let zero_based: Vec<(usize, usize)> = pairs
                    .iter()
                    .map(|&[i, j]| {
                        if i == 0 || j == 0 {
                            Err(Error::Config("truth pairs are 1-based".into()))
                        } else {
                            Ok((i - 1, j - 1))
                        }
                    })
                    .collect::<Result<_>>()?;
                let m = MatchingSet::new(zero_based).map_err(|e| Error::Config(e.to_string()))?;
                if !m.fits(&dims) {
                    return Err(Error::Config("truth pairs exceed database sizes".into()));
                }
                index_of(&dims, &m)?
            }
        };
        let rates = Rates::new(spec.alpha, spec.beta).map_err(|e| Error::Config(e.to_string()))?;
        SourceModel::new(dims, left, right, truth, rates)
            .map_err(|e| Error::Config(format!("model membership: {e}")))
    }

    /// Unknown-count thresholds, with the documented defaults: `lambda3` is
    /// required, `lambda1` defaults to `lambda3`, and `lambda2` to
    /// `0.1 · lambda3`.
    fn thresholds(&self) -> Result<Thresholds> {
        let l3 = self.test.lambda3.ok_or_else(|| {
            Error::Config("unknown-count tests need test.lambda3 (lambda1/lambda2 default from it)".into())
        })?;
        let l1 = self.test.lambda1.unwrap_or(l3);
        let l2 = self.test.lambda2.unwrap_or(0.1 * l3);
        Thresholds::new(l1, l2, l3).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_test(&self) -> Result<TestKind> {
        match self.test.kind.as_str() {
            "seq_known" => Ok(TestKind::SeqKnown),
            "fl_known" => Ok(TestKind::FlKnown),
            "fl_zhou" => {
                let lambda = self
                    .test
                    .lambda
                    .ok_or_else(|| Error::Config("fl_zhou needs test.lambda".into()))?;
                if lambda < 0.0 {
                    return Err(Error::Config("test.lambda must be non-negative".into()));
                }
                Ok(TestKind::FlZhou { lambda })
            }
            "seq_unknown" => Ok(TestKind::SeqUnknown {
                thresholds: self.thresholds()?,
            }),
            "fl_unknown" => Ok(TestKind::FlUnknown {
                thresholds: self.thresholds()?,
            }),
            other => Err(Error::Config(format!("unknown test kind {other:?}"))),
        }
    }

    pub fn campaign_options(&self) -> CampaignOptions {
        CampaignOptions {
            n_grid: self.test.horizon.clone(),
            trials_per_n: self.campaign.trials,
            parallelism: self.campaign.parallelism,
            master_seed: self.master_seed,
            max_steps: self.test.max_steps,
        }
    }
}
