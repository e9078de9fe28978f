//! Report objects. Table and JSON output are both rendered from these.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use unitselect_core::format::BenefitVectorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbWeights {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBounds {
    pub id: String,
    pub compatible: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
    pub sigma: f64,
    pub w: f64,
    pub l: f64,
    pub u: f64,
    /// Absent for incompatible groups.
    pub bounds: Option<Interval>,
    pub estimate: Option<f64>,
    pub point_identified: Option<bool>,
    pub gain_equality: bool,
    pub ab_expressible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub id: String,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub benefit_vector: BenefitVectorSpec,
    pub estimator: String,
    /// A/B weights reproducing the benefit vector, when they exist.
    pub ab_representation: Option<AbWeights>,
    /// Input order.
    pub groups: Vec<GroupBounds>,
    /// Compatible groups, best first.
    pub ranking: Vec<RankEntry>,
    pub incompatible_groups: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Treat,
    Skip,
}

impl Decision {
    /// Positive scores are treated; zero is not.
    pub fn from_score(score: f64) -> Self {
        if score > 0.0 {
            Decision::Treat
        } else {
            Decision::Skip
        }
    }

    fn label(self) -> &'static str {
        match self {
            Decision::Treat => "treat",
            Decision::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub id: String,
    pub heuristic_value: f64,
    pub heuristic_decision: Decision,
    pub compatible: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
    pub bounds: Option<Interval>,
    pub estimate: Option<f64>,
    pub benefit_decision: Option<Decision>,
    pub disagreement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub heuristic: AbWeights,
    pub benefit_vector: BenefitVectorSpec,
    pub estimator: String,
    pub groups: Vec<GroupComparison>,
    pub disagreements: usize,
    pub incompatible_groups: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerifyStatus {
    Pass,
    Fail,
    Incompatible,
    NoFeasiblePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub n_feasible: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupVerification {
    pub id: String,
    pub status: VerifyStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub closed_form: Option<Interval>,
    pub brute_force: Option<GridRange>,
    pub max_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub benefit_vector: BenefitVectorSpec,
    pub grid_step: f64,
    pub tolerance: f64,
    pub groups: Vec<GroupVerification>,
    pub all_passed: bool,
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "-".into())
}

fn interval(i: Option<Interval>) -> String {
    i.map(|i| format!("[{}, {}]", num(i.lower), num(i.upper)))
        .unwrap_or_else(|| "-".into())
}

fn bv_line(bv: &BenefitVectorSpec) -> String {
    format!(
        "benefit vector (complier, always-taker, never-taker, defier) = ({}, {}, {}, {})",
        bv.complier, bv.always_taker, bv.never_taker, bv.defier
    )
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub trait Render: Serialize {
    fn table(&self) -> String;

    fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

impl Render for BoundsReport {
    fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", bv_line(&self.benefit_vector));
        let _ = writeln!(
            out,
            "estimator: {}   A/B expressible: {}",
            self.estimator,
            match self.ab_representation {
                Some(w) => format!("yes (a = {}, b = {})", w.a, w.b),
                None => "no".into(),
            }
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>10} {:>10} {:>10} {:>24} {:>10} {:>6} {:>6}",
            "group", "sigma", "W", "L", "U", "bounds", "estimate", "point", "gain="
        );
        for g in &self.groups {
            let _ = writeln!(
                out,
                "{:<12} {:>10} {:>10} {:>10} {:>10} {:>24} {:>10} {:>6} {:>6}",
                g.id,
                num(g.sigma),
                num(g.w),
                num(g.l),
                num(g.u),
                interval(g.bounds),
                opt(g.estimate),
                g.point_identified.map(yes_no).unwrap_or("-"),
                yes_no(g.gain_equality),
            );
            for v in &g.violations {
                let _ = writeln!(out, "  INCOMPATIBLE: {v}");
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "ranking:");
        for r in &self.ranking {
            let _ = writeln!(out, "  {}. {} ({})", r.rank, r.id, num(r.estimate));
        }
        if self.incompatible_groups > 0 {
            let _ = writeln!(out, "{} incompatible group(s) excluded", self.incompatible_groups);
        }
        out
    }
}

impl Render for CompareReport {
    fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "heuristic: {}·P(y_x) - {}·P(y_x')",
            self.heuristic.a, self.heuristic.b
        );
        let _ = writeln!(out, "{}", bv_line(&self.benefit_vector));
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>9} {:>24} {:>10} {:>9} {:>8}",
            "group", "heuristic", "decision", "bounds", "estimate", "decision", "agree"
        );
        for g in &self.groups {
            let _ = writeln!(
                out,
                "{:<12} {:>10} {:>9} {:>24} {:>10} {:>9} {:>8}",
                g.id,
                num(g.heuristic_value),
                g.heuristic_decision.label(),
                interval(g.bounds),
                opt(g.estimate),
                g.benefit_decision.map(Decision::label).unwrap_or("-"),
                if !g.compatible {
                    "-"
                } else if g.disagreement {
                    "NO"
                } else {
                    "yes"
                },
            );
            for v in &g.violations {
                let _ = writeln!(out, "  INCOMPATIBLE: {v}");
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{} disagreement(s) across {} group(s)",
            self.disagreements,
            self.groups.len()
        );
        out
    }
}

impl Render for VerifyReport {
    fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", bv_line(&self.benefit_vector));
        let _ = writeln!(
            out,
            "grid step {}   tolerance {}",
            self.grid_step,
            num(self.tolerance)
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:>24} {:>24} {:>10} {:>10}  status",
            "group", "closed form", "brute force", "feasible", "deviation"
        );
        for g in &self.groups {
            let _ = writeln!(
                out,
                "{:<12} {:>24} {:>24} {:>10} {:>10}  {}",
                g.id,
                interval(g.closed_form),
                g.brute_force
                    .map(|r| format!("[{}, {}]", num(r.min), num(r.max)))
                    .unwrap_or_else(|| "-".into()),
                g.brute_force
                    .map(|r| r.n_feasible.to_string())
                    .unwrap_or_else(|| "-".into()),
                opt(g.max_deviation),
                match g.status {
                    VerifyStatus::Pass => "PASS",
                    VerifyStatus::Fail => "FAIL",
                    VerifyStatus::Incompatible => "INCOMPATIBLE",
                    VerifyStatus::NoFeasiblePoint => "NO FEASIBLE POINT",
                }
            );
            if let Some(m) = &g.message {
                let _ = writeln!(out, "  {m}");
            }
        }
        out
    }
}
