//! JSON study and truth files.
//!
//! Study file:
//!
//! ```json
//! {
//!   "benefit_vector": {"complier": 1, "always_taker": -1, "never_taker": -1, "defier": -1},
//!   "groups": [
//!     {"id": "c1",
//!      "experimental": {"counts": {"treated_n": 750, "treated_y": 450, "control_n": 750, "control_y": 225}},
//!      "observational": {"probabilities": {"xy": 0.2, "xyp": 0.3, "xpy": 0.1, "xpyp": 0.4}}}
//!   ]
//! }
//! ```
//!
//! Each data block carries exactly one of `probabilities` or `counts`.
//! Errors name the JSON path of the offending value.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ArmCounts, BenefitVector, CellCounts, ExperimentalData, GroupData, ObservationalData, Study,
};
use crate::oracle::{GroundTruth, ResponseTypeDistribution};
use crate::simulate::FlaggedGroup;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenefitVectorSpec {
    pub complier: f64,
    pub always_taker: f64,
    pub never_taker: f64,
    pub defier: f64,
}

impl From<&BenefitVector<f64>> for BenefitVectorSpec {
    fn from(bv: &BenefitVector<f64>) -> Self {
        Self {
            complier: bv.complier(),
            always_taker: bv.always_taker(),
            never_taker: bv.never_taker(),
            defier: bv.defier(),
        }
    }
}

impl BenefitVectorSpec {
    pub fn to_model(&self, path: &str) -> Result<BenefitVector<f64>> {
        BenefitVector::new(self.complier, self.always_taker, self.never_taker, self.defier)
            .map_err(|e| schema(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentalProbabilities {
    pub p_y_do_x: f64,
    pub p_y_do_xp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentalCounts {
    pub treated_n: u64,
    pub treated_y: u64,
    pub control_n: u64,
    pub control_y: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentalBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<ExperimentalProbabilities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<ExperimentalCounts>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cells<T> {
    pub xy: T,
    pub xyp: T,
    pub xpy: T,
    pub xpyp: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationalBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Cells<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Cells<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub id: String,
    pub experimental: ExperimentalBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observational: Option<ObservationalBlock>,
}

/// Provenance written by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationMetadata {
    pub generator: String,
    pub seed: u64,
    pub n_per_arm: u64,
    pub n_observational: u64,
    pub exact: bool,
    #[serde(default)]
    pub flagged_groups: Vec<FlaggedGroupSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlaggedGroupSpec {
    pub id: String,
    pub reason: String,
}

impl From<&FlaggedGroup> for FlaggedGroupSpec {
    fn from(f: &FlaggedGroup) -> Self {
        Self {
            id: f.id.clone(),
            reason: f.reason.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFile {
    pub benefit_vector: BenefitVectorSpec,
    pub groups: Vec<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationMetadata>,
}

fn schema(path: &str, err: impl std::fmt::Display) -> Error {
    Error::Schema {
        path: path.to_owned(),
        message: err.to_string(),
    }
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, e.into_inner())
    })
}

impl ExperimentalBlock {
    fn to_model(&self, path: &str) -> Result<ExperimentalData<f64>> {
        match (self.probabilities, self.counts) {
            (Some(p), None) => ExperimentalData::new(p.p_y_do_x, p.p_y_do_xp)
                .map_err(|e| schema(&format!("{path}.probabilities"), e)),
            (None, Some(c)) => ExperimentalData::from_counts(ArmCounts {
                treated_n: c.treated_n,
                treated_y: c.treated_y,
                control_n: c.control_n,
                control_y: c.control_y,
            })
            .map_err(|e| schema(&format!("{path}.counts"), e)),
            _ => Err(schema(path, "expected exactly one of `probabilities` or `counts`")),
        }
    }

    fn from_model(exp: &ExperimentalData<f64>) -> Self {
        match exp.counts() {
            Some(c) => Self {
                probabilities: None,
                counts: Some(ExperimentalCounts {
                    treated_n: c.treated_n,
                    treated_y: c.treated_y,
                    control_n: c.control_n,
                    control_y: c.control_y,
                }),
            },
            None => Self {
                probabilities: Some(ExperimentalProbabilities {
                    p_y_do_x: exp.p_y_do_x(),
                    p_y_do_xp: exp.p_y_do_xp(),
                }),
                counts: None,
            },
        }
    }
}

impl ObservationalBlock {
    fn to_model(&self, path: &str) -> Result<ObservationalData<f64>> {
        match (self.probabilities, self.counts) {
            (Some(p), None) => ObservationalData::new(p.xy, p.xyp, p.xpy, p.xpyp)
                .map_err(|e| schema(&format!("{path}.probabilities"), e)),
            (None, Some(c)) => ObservationalData::from_counts(CellCounts {
                xy: c.xy,
                xyp: c.xyp,
                xpy: c.xpy,
                xpyp: c.xpyp,
            })
            .map_err(|e| schema(&format!("{path}.counts"), e)),
            _ => Err(schema(path, "expected exactly one of `probabilities` or `counts`")),
        }
    }

    fn from_model(obs: &ObservationalData<f64>) -> Self {
        match obs.counts() {
            Some(c) => Self {
                probabilities: None,
                counts: Some(Cells {
                    xy: c.xy,
                    xyp: c.xyp,
                    xpy: c.xpy,
                    xpyp: c.xpyp,
                }),
            },
            None => Self {
                probabilities: Some(Cells {
                    xy: obs.p_xy(),
                    xyp: obs.p_xyp(),
                    xpy: obs.p_xpy(),
                    xpyp: obs.p_xpyp(),
                }),
                counts: None,
            },
        }
    }
}

impl StudyFile {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("study files serialize");
        s.push('\n');
        s
    }

    pub fn to_study(&self) -> Result<Study<f64>> {
        let bv = self.benefit_vector.to_model("benefit_vector")?;
        let groups = self
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let path = format!("groups[{i}]");
                let exp = g.experimental.to_model(&format!("{path}.experimental"))?;
                let obs = g
                    .observational
                    .as_ref()
                    .map(|o| o.to_model(&format!("{path}.observational")))
                    .transpose()?;
                GroupData::new(g.id.clone(), exp, obs).map_err(|e| schema(&format!("{path}.id"), e))
            })
            .collect::<Result<Vec<_>>>()?;
        Study::new(bv, groups).map_err(|e| schema("groups", e))
    }

    pub fn from_study(study: &Study<f64>) -> Self {
        Self {
            benefit_vector: study.benefit_vector().into(),
            groups: study
                .groups()
                .iter()
                .map(|g| GroupSpec {
                    id: g.id.clone(),
                    experimental: ExperimentalBlock::from_model(&g.experimental),
                    observational: g.observational.as_ref().map(ObservationalBlock::from_model),
                })
                .collect(),
            simulation: None,
        }
    }
}

/// Parses and validates a study file in one step.
pub fn parse_study(text: &str) -> Result<Study<f64>> {
    StudyFile::from_json(text)?.to_study()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseTypeSpec {
    pub complier: f64,
    pub always_taker: f64,
    pub never_taker: f64,
    pub defier: f64,
}

/// Mass of one response type split by natural choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceSplit {
    /// Would take treatment when left alone.
    pub x: f64,
    /// Would not.
    pub xp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub complier: ChoiceSplit,
    pub always_taker: ChoiceSplit,
    pub never_taker: ChoiceSplit,
    pub defier: ChoiceSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthGroupSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_types: Option<ResponseTypeSpec>,
    /// Probability of choosing treatment, per response type; 0.5 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub natural_choice_given_type: Option<ResponseTypeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointSpec>,
}

/// Ground truths per group, input to the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthFile {
    /// Written into generated study files; defaults to `(1, 0, 0, -1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit_vector: Option<BenefitVectorSpec>,
    pub groups: Vec<TruthGroupSpec>,
}

impl TruthGroupSpec {
    fn to_model(&self, path: &str) -> Result<GroundTruth<f64>> {
        match (&self.response_types, &self.joint) {
            (Some(rt), None) => {
                let dist = ResponseTypeDistribution::new(
                    rt.complier,
                    rt.always_taker,
                    rt.never_taker,
                    rt.defier,
                )
                .map_err(|e| schema(&format!("{path}.response_types"), e))?;
                let split = self
                    .natural_choice_given_type
                    .map(|q| [q.complier, q.always_taker, q.never_taker, q.defier])
                    .unwrap_or([0.5; 4]);
                GroundTruth::from_response_types(&dist, split)
                    .map_err(|e| schema(&format!("{path}.natural_choice_given_type"), e))
            }
            (None, Some(j)) => {
                if self.natural_choice_given_type.is_some() {
                    return Err(schema(
                        &format!("{path}.natural_choice_given_type"),
                        "only allowed together with `response_types`",
                    ));
                }
                let row = |s: &ChoiceSplit| [s.x, s.xp];
                GroundTruth::new([
                    row(&j.complier),
                    row(&j.always_taker),
                    row(&j.never_taker),
                    row(&j.defier),
                ])
                .map_err(|e| schema(&format!("{path}.joint"), e))
            }
            _ => Err(schema(path, "expected exactly one of `response_types` or `joint`")),
        }
    }
}

impl TruthFile {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("truth files serialize")
    }

    pub fn ground_truths(&self) -> Result<Vec<(String, GroundTruth<f64>)>> {
        if self.groups.is_empty() {
            return Err(schema("groups", "at least one group is required"));
        }
        self.groups
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let path = format!("groups[{i}]");
                if g.id.is_empty() {
                    return Err(schema(&format!("{path}.id"), "group id must not be empty"));
                }
                Ok((g.id.clone(), g.to_model(&path)?))
            })
            .collect()
    }

    pub fn benefit_vector(&self) -> Result<BenefitVector<f64>> {
        match &self.benefit_vector {
            Some(spec) => spec.to_model("benefit_vector"),
            None => BenefitVector::new(1.0, 0.0, 0.0, -1.0),
        }
    }
}
