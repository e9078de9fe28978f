//! Domain types: payoffs, experimental and observational data, groups and
//! studies, plus the data-compatibility check.

use std::collections::BTreeSet;
use std::fmt;

use crate::bounds::complier_interval;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance on the four observational cells summing to one.
pub const CELL_SUM_TOLERANCE: f64 = 1e-9;
/// Tolerance for comparing bound terms.
pub const BOUND_TOLERANCE: f64 = 1e-12;

/// Counterfactual response type of a unit under binary treatment and outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResponseType {
    /// `y` if treated, `y'` otherwise.
    Complier,
    /// `y` either way.
    AlwaysTaker,
    /// `y'` either way.
    NeverTaker,
    /// `y'` if treated, `y` otherwise.
    Defier,
}

impl ResponseType {
    pub const ALL: [ResponseType; 4] = [
        ResponseType::Complier,
        ResponseType::AlwaysTaker,
        ResponseType::NeverTaker,
        ResponseType::Defier,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Outcome `y` under treatment.
    pub fn responds_if_treated(self) -> bool {
        matches!(self, ResponseType::Complier | ResponseType::AlwaysTaker)
    }

    /// Outcome `y` without treatment.
    pub fn responds_if_untreated(self) -> bool {
        matches!(self, ResponseType::AlwaysTaker | ResponseType::Defier)
    }

    pub fn name(self) -> &'static str {
        match self {
            ResponseType::Complier => "complier",
            ResponseType::AlwaysTaker => "always_taker",
            ResponseType::NeverTaker => "never_taker",
            ResponseType::Defier => "defier",
        }
    }
}

impl fmt::Display for ResponseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Payoff of selecting one unit of each response type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenefitVector<S = f64> {
    payoffs: [S; 4],
}

impl<S: Scalar> BenefitVector<S> {
    pub fn new(complier: S, always_taker: S, never_taker: S, defier: S) -> Result<Self> {
        let payoffs = [complier, always_taker, never_taker, defier];
        for (p, t) in payoffs.iter().zip(ResponseType::ALL) {
            if !p.is_finite_scalar() {
                return Err(Error::NonFinitePayoff(t.name()));
            }
        }
        Ok(Self { payoffs })
    }

    /// Builds a vector without the finiteness check; callers guarantee it.
    pub(crate) fn from_parts(complier: S, always_taker: S, never_taker: S, defier: S) -> Self {
        Self {
            payoffs: [complier, always_taker, never_taker, defier],
        }
    }

    pub fn complier(&self) -> S {
        self.payoffs[0]
    }

    pub fn always_taker(&self) -> S {
        self.payoffs[1]
    }

    pub fn never_taker(&self) -> S {
        self.payoffs[2]
    }

    pub fn defier(&self) -> S {
        self.payoffs[3]
    }

    pub fn payoff(&self, t: ResponseType) -> S {
        self.payoffs[t.index()]
    }

    /// Sum of absolute payoffs; the scale used by relative tolerances.
    pub fn l1_norm(&self) -> S {
        self.payoffs.iter().fold(S::zero(), |acc, p| acc + p.abs())
    }

    /// Multiplies every payoff by `k`.
    pub fn scaled(&self, k: S) -> Result<Self> {
        Self::new(
            self.payoffs[0] * k,
            self.payoffs[1] * k,
            self.payoffs[2] * k,
            self.payoffs[3] * k,
        )
    }
}

/// Raw counts from the two arms of a randomized experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArmCounts {
    pub treated_n: u64,
    pub treated_y: u64,
    pub control_n: u64,
    pub control_y: u64,
}

/// Causal-effect probabilities `P(y_x|c)` and `P(y_{x'}|c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentalData<S = f64> {
    p_y_do_x: S,
    p_y_do_xp: S,
    counts: Option<ArmCounts>,
}

fn check_probability<S: Scalar>(name: &'static str, p: S) -> Result<S> {
    let tol = S::tolerance(BOUND_TOLERANCE);
    if !p.is_finite_scalar() || p < -tol || p > S::one() + tol {
        return Err(Error::InvalidProbability {
            name,
            value: p.to_f64_lossy(),
        });
    }
    Ok(p.max_of(S::zero()).min_of(S::one()))
}

impl<S: Scalar> ExperimentalData<S> {
    /// Values within 1e-12 outside `[0, 1]` are clamped; anything further
    /// out is rejected.
    pub fn new(p_y_do_x: S, p_y_do_xp: S) -> Result<Self> {
        Ok(Self {
            p_y_do_x: check_probability("p_y_do_x", p_y_do_x)?,
            p_y_do_xp: check_probability("p_y_do_xp", p_y_do_xp)?,
            counts: None,
        })
    }

    /// Probabilities are the exact count ratios; the counts are retained.
    pub fn from_counts(counts: ArmCounts) -> Result<Self> {
        let ArmCounts {
            treated_n,
            treated_y,
            control_n,
            control_y,
        } = counts;
        if treated_n == 0 || control_n == 0 {
            return Err(Error::InvalidCounts("arm sizes must be positive".into()));
        }
        if treated_y > treated_n {
            return Err(Error::InvalidCounts(format!(
                "treated_y = {treated_y} exceeds treated_n = {treated_n}"
            )));
        }
        if control_y > control_n {
            return Err(Error::InvalidCounts(format!(
                "control_y = {control_y} exceeds control_n = {control_n}"
            )));
        }
        let ratio = |num, den| {
            S::ratio(num, den)
                .ok_or_else(|| Error::InvalidCounts(format!("{num}/{den} is not representable")))
        };
        Ok(Self {
            p_y_do_x: ratio(treated_y, treated_n)?,
            p_y_do_xp: ratio(control_y, control_n)?,
            counts: Some(counts),
        })
    }

    /// `P(y_x|c)`.
    pub fn p_y_do_x(&self) -> S {
        self.p_y_do_x
    }

    /// `P(y_{x'}|c)`.
    pub fn p_y_do_xp(&self) -> S {
        self.p_y_do_xp
    }

    /// `P(y'_{x'}|c) = 1 - P(y_{x'}|c)`.
    pub fn p_yp_do_xp(&self) -> S {
        S::one() - self.p_y_do_xp
    }

    pub fn counts(&self) -> Option<ArmCounts> {
        self.counts
    }
}

/// Shorthand for [`ExperimentalData::from_counts`].
pub fn experimental_from_counts<S: Scalar>(
    treated_n: u64,
    treated_y: u64,
    control_n: u64,
    control_y: u64,
) -> Result<ExperimentalData<S>> {
    ExperimentalData::from_counts(ArmCounts {
        treated_n,
        treated_y,
        control_n,
        control_y,
    })
}

/// Counts of the four observational cells `(x,y), (x,y'), (x',y), (x',y')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CellCounts {
    pub xy: u64,
    pub xyp: u64,
    pub xpy: u64,
    pub xpyp: u64,
}

impl CellCounts {
    pub fn total(&self) -> Option<u64> {
        self.xy
            .checked_add(self.xyp)?
            .checked_add(self.xpy)?
            .checked_add(self.xpyp)
    }
}

/// Joint distribution `P(X, Y | c)` under natural treatment selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationalData<S = f64> {
    xy: S,
    xyp: S,
    xpy: S,
    xpyp: S,
    counts: Option<CellCounts>,
}

impl<S: Scalar> ObservationalData<S> {
    pub fn new(xy: S, xyp: S, xpy: S, xpyp: S) -> Result<Self> {
        let xy = check_probability("xy", xy)?;
        let xyp = check_probability("xyp", xyp)?;
        let xpy = check_probability("xpy", xpy)?;
        let xpyp = check_probability("xpyp", xpyp)?;
        let sum = xy + xyp + xpy + xpyp;
        if (sum - S::one()).abs() > S::tolerance(CELL_SUM_TOLERANCE) {
            return Err(Error::BadSum {
                what: "observational cells",
                sum: sum.to_f64_lossy(),
            });
        }
        Ok(Self {
            xy,
            xyp,
            xpy,
            xpyp,
            counts: None,
        })
    }

    pub fn from_counts(counts: CellCounts) -> Result<Self> {
        let total = counts
            .total()
            .ok_or_else(|| Error::InvalidCounts("observational total overflows".into()))?;
        if total == 0 {
            return Err(Error::InvalidCounts(
                "observational counts must not all be zero".into(),
            ));
        }
        let ratio = |num| {
            S::ratio(num, total)
                .ok_or_else(|| Error::InvalidCounts(format!("{num}/{total} is not representable")))
        };
        let mut obs = Self::new(
            ratio(counts.xy)?,
            ratio(counts.xyp)?,
            ratio(counts.xpy)?,
            ratio(counts.xpyp)?,
        )?;
        obs.counts = Some(counts);
        Ok(obs)
    }

    /// `P(x, y | c)`.
    pub fn p_xy(&self) -> S {
        self.xy
    }

    /// `P(x, y' | c)`.
    pub fn p_xyp(&self) -> S {
        self.xyp
    }

    /// `P(x', y | c)`.
    pub fn p_xpy(&self) -> S {
        self.xpy
    }

    /// `P(x', y' | c)`.
    pub fn p_xpyp(&self) -> S {
        self.xpyp
    }

    /// `P(y | c)`.
    pub fn p_y(&self) -> S {
        self.xy + self.xpy
    }

    /// `P(x | c)`.
    pub fn p_x(&self) -> S {
        self.xy + self.xyp
    }

    pub fn cells(&self) -> [S; 4] {
        [self.xy, self.xyp, self.xpy, self.xpyp]
    }

    pub fn counts(&self) -> Option<CellCounts> {
        self.counts
    }
}

/// Data for one population group `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupData<S = f64> {
    pub id: String,
    pub experimental: ExperimentalData<S>,
    pub observational: Option<ObservationalData<S>>,
}

impl<S: Scalar> GroupData<S> {
    pub fn new(
        id: impl Into<String>,
        experimental: ExperimentalData<S>,
        observational: Option<ObservationalData<S>>,
    ) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidStudy("group id must not be empty".into()));
        }
        Ok(Self {
            id,
            experimental,
            observational,
        })
    }

    pub fn compatibility(&self) -> CompatibilityReport<S> {
        check_compatibility(&self.experimental, self.observational.as_ref())
    }
}

/// A benefit vector and the groups it is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct Study<S = f64> {
    benefit_vector: BenefitVector<S>,
    groups: Vec<GroupData<S>>,
}

impl<S: Scalar> Study<S> {
    pub fn new(benefit_vector: BenefitVector<S>, groups: Vec<GroupData<S>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidStudy("a study needs at least one group".into()));
        }
        let mut seen = BTreeSet::new();
        for g in &groups {
            if g.id.is_empty() {
                return Err(Error::InvalidStudy("group id must not be empty".into()));
            }
            if !seen.insert(g.id.as_str()) {
                return Err(Error::InvalidStudy(format!("duplicate group id `{}`", g.id)));
            }
        }
        Ok(Self {
            benefit_vector,
            groups,
        })
    }

    pub fn benefit_vector(&self) -> &BenefitVector<S> {
        &self.benefit_vector
    }

    pub fn groups(&self) -> &[GroupData<S>] {
        &self.groups
    }

    /// Same groups under a different benefit vector.
    pub fn with_benefit_vector(&self, benefit_vector: BenefitVector<S>) -> Self {
        Self {
            benefit_vector,
            groups: self.groups.clone(),
        }
    }
}

/// A single violated compatibility constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation<S = f64> {
    /// Lower complier bound exceeds the upper one.
    BoundsCrossed { l: S, u: S },
    /// `P(y_x) < P(x, y)`.
    TreatedBelowObserved { p_y_do_x: S, p_xy: S },
    /// `P(y_x) > 1 - P(x, y')`.
    TreatedAboveObserved { p_y_do_x: S, ceiling: S },
    /// `P(y_{x'}) < P(x', y)`.
    ControlBelowObserved { p_y_do_xp: S, p_xpy: S },
    /// `P(y_{x'}) > 1 - P(x', y')`.
    ControlAboveObserved { p_y_do_xp: S, ceiling: S },
}

impl<S: Scalar> fmt::Display for Violation<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |s: &S| s.to_f64_lossy();
        match self {
            Violation::BoundsCrossed { l, u } => {
                write!(f, "complier bounds cross: L = {} > U = {}", v(l), v(u))
            }
            Violation::TreatedBelowObserved { p_y_do_x, p_xy } => write!(
                f,
                "P(y_x) = {} is below P(x,y) = {}",
                v(p_y_do_x),
                v(p_xy)
            ),
            Violation::TreatedAboveObserved { p_y_do_x, ceiling } => write!(
                f,
                "P(y_x) = {} is above 1 - P(x,y') = {}",
                v(p_y_do_x),
                v(ceiling)
            ),
            Violation::ControlBelowObserved { p_y_do_xp, p_xpy } => write!(
                f,
                "P(y_x') = {} is below P(x',y) = {}",
                v(p_y_do_xp),
                v(p_xpy)
            ),
            Violation::ControlAboveObserved { p_y_do_xp, ceiling } => write!(
                f,
                "P(y_x') = {} is above 1 - P(x',y') = {}",
                v(p_y_do_xp),
                v(ceiling)
            ),
        }
    }
}

/// Outcome of [`check_compatibility`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport<S = f64> {
    pub l: S,
    pub u: S,
    pub violations: Vec<Violation<S>>,
}

impl<S: Scalar> CompatibilityReport<S> {
    pub fn is_compatible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self) -> String {
        self.violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_compatible() {
            Ok(self)
        } else {
            Err(Error::incompatible(self.describe()))
        }
    }
}

/// Checks whether some structural model reproduces both data regimes.
///
/// Reports crossed complier bounds (`L > U`) and, when observational data is
/// present, the four consistency constraints linking the regimes:
/// `P(x,y) <= P(y_x) <= 1 - P(x,y')` and `P(x',y) <= P(y_{x'}) <= 1 - P(x',y')`.
/// The latter are exactly the conditions under which a joint over
/// (response type, natural choice) exists; `L <= U` alone is weaker.
pub fn check_compatibility<S: Scalar>(
    exp: &ExperimentalData<S>,
    obs: Option<&ObservationalData<S>>,
) -> CompatibilityReport<S> {
    let tol = S::tolerance(BOUND_TOLERANCE);
    let (l, u) = complier_interval(exp, obs);
    let mut violations = Vec::new();
    if l > u + tol {
        violations.push(Violation::BoundsCrossed { l, u });
    }
    if let Some(obs) = obs {
        let (px, pxp) = (exp.p_y_do_x(), exp.p_y_do_xp());
        if px + tol < obs.p_xy() {
            violations.push(Violation::TreatedBelowObserved {
                p_y_do_x: px,
                p_xy: obs.p_xy(),
            });
        }
        let ceiling = S::one() - obs.p_xyp();
        if px > ceiling + tol {
            violations.push(Violation::TreatedAboveObserved {
                p_y_do_x: px,
                ceiling,
            });
        }
        if pxp + tol < obs.p_xpy() {
            violations.push(Violation::ControlBelowObserved {
                p_y_do_xp: pxp,
                p_xpy: obs.p_xpy(),
            });
        }
        let ceiling = S::one() - obs.p_xpyp();
        if pxp > ceiling + tol {
            violations.push(Violation::ControlAboveObserved {
                p_y_do_xp: pxp,
                ceiling,
            });
        }
    }
    CompatibilityReport { l, u, violations }
}
