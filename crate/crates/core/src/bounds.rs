//! Closed-form bounds on the benefit function
//! `f(c) = β·P(complier) + γ·P(always-taker) + θ·P(never-taker) + δ·P(defier)`.
//!
//! Writing `L <= P(complier) <= U` for the complier bounds, every payoff
//! vector reduces to `f = W + σ·P(complier)` once the experimental margins
//! are fixed, with `σ = β - γ - θ + δ`. The interval on `f` is therefore the
//! image of `[L, U]` under that affine map.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    BenefitVector, ExperimentalData, ObservationalData, Study, BOUND_TOLERANCE,
};
use crate::scalar::{max_all, min_all, Scalar};

/// Relative tolerance for gain equality and A/B expressibility.
pub const RELATIVE_PAYOFF_TOLERANCE: f64 = 1e-9;

/// Interval on `f(c)` together with the quantities that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenefitBounds<S = f64> {
    pub lower: S,
    pub upper: S,
    pub sigma: S,
    pub w: S,
    /// Lower bound on `P(complier | c)`.
    pub l: S,
    /// Upper bound on `P(complier | c)`.
    pub u: S,
    pub point_identified: bool,
}

impl<S: Scalar> BenefitBounds<S> {
    pub fn midpoint(&self) -> S {
        midpoint_estimate(self)
    }

    pub fn width(&self) -> S {
        self.upper - self.lower
    }

    pub fn contains(&self, value: S, tol: S) -> bool {
        value >= self.lower - tol && value <= self.upper + tol
    }

    pub fn estimate(&self, estimator: Estimator) -> S {
        match estimator {
            Estimator::Midpoint => self.midpoint(),
            Estimator::Lower => self.lower,
            Estimator::Upper => self.upper,
        }
    }
}

/// `σ = β - γ - θ + δ`.
pub fn sigma<S: Scalar>(bv: &BenefitVector<S>) -> S {
    bv.complier() - bv.always_taker() - bv.never_taker() + bv.defier()
}

/// `W = (γ - δ)·P(y_x) + δ·P(y_{x'}) + θ·P(y'_{x'})`.
pub fn w_term<S: Scalar>(bv: &BenefitVector<S>, exp: &ExperimentalData<S>) -> S {
    (bv.always_taker() - bv.defier()) * exp.p_y_do_x()
        + bv.defier() * exp.p_y_do_xp()
        + bv.never_taker() * exp.p_yp_do_xp()
}

/// Complier bounds without the crossing check.
pub(crate) fn complier_interval<S: Scalar>(
    exp: &ExperimentalData<S>,
    obs: Option<&ObservationalData<S>>,
) -> (S, S) {
    let px = exp.p_y_do_x();
    let pxp = exp.p_y_do_xp();
    let mut lower = vec![S::zero(), px - pxp];
    let mut upper = vec![px, exp.p_yp_do_xp()];
    if let Some(obs) = obs {
        let py = obs.p_y();
        lower.push(py - pxp);
        lower.push(px - py);
        upper.push(obs.p_xy() + obs.p_xpyp());
        upper.push(px - pxp + obs.p_xpy() + obs.p_xyp());
    }
    // Both lists are non-empty.
    (
        max_all(lower).unwrap_or_else(S::zero),
        min_all(upper).unwrap_or_else(S::one),
    )
}

/// Bounds `(L, U)` on `P(complier | c)`.
///
/// Without observational data only the experimental terms enter.
pub fn complier_bounds<S: Scalar>(
    exp: &ExperimentalData<S>,
    obs: Option<&ObservationalData<S>>,
) -> Result<(S, S)> {
    let (l, u) = complier_interval(exp, obs);
    if l > u + S::tolerance(BOUND_TOLERANCE) {
        return Err(Error::incompatible(format!(
            "complier bounds cross: L = {} > U = {}",
            l.to_f64_lossy(),
            u.to_f64_lossy()
        )));
    }
    Ok((l, u))
}

/// Tight bounds on the benefit function for one group.
///
/// Gain-equal vectors (σ = 0) give the degenerate interval `[W, W]`.
pub fn benefit_bounds<S: Scalar>(
    bv: &BenefitVector<S>,
    exp: &ExperimentalData<S>,
    obs: Option<&ObservationalData<S>>,
) -> Result<BenefitBounds<S>> {
    let (l, u) = complier_bounds(exp, obs)?;
    let s = sigma(bv);
    let w = w_term(bv, exp);
    let (lower, upper) = if gain_equality_check(bv) {
        (w, w)
    } else if s > S::zero() {
        (w + s * l, w + s * u)
    } else {
        (w + s * u, w + s * l)
    };
    Ok(BenefitBounds {
        lower,
        upper,
        sigma: s,
        w,
        l,
        u,
        point_identified: (upper - lower).abs() <= S::tolerance(BOUND_TOLERANCE),
    })
}

fn relative_tolerance<S: Scalar>(bv: &BenefitVector<S>) -> S {
    S::tolerance(RELATIVE_PAYOFF_TOLERANCE) * bv.l1_norm().max_of(S::one())
}

/// `β + δ = γ + θ`, up to a tolerance relative to the payoff scale.
pub fn gain_equality_check<S: Scalar>(bv: &BenefitVector<S>) -> bool {
    let gap = (bv.complier() + bv.defier()) - (bv.always_taker() + bv.never_taker());
    gap.abs() <= relative_tolerance(bv)
}

/// Result of [`point_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate<S = f64> {
    pub value: S,
    /// Set when the vector is not gain-equal: the value is only valid if
    /// the population is known to contain no defiers.
    pub assumption_required: bool,
}

/// `(β - θ)·P(y_x) + (γ - β)·P(y_{x'}) + θ`.
///
/// Exact under gain equality or monotonicity; computed unconditionally.
pub fn point_estimate<S: Scalar>(
    bv: &BenefitVector<S>,
    exp: &ExperimentalData<S>,
) -> PointEstimate<S> {
    let value = (bv.complier() - bv.never_taker()) * exp.p_y_do_x()
        + (bv.always_taker() - bv.complier()) * exp.p_y_do_xp()
        + bv.never_taker();
    PointEstimate {
        value,
        assumption_required: !gain_equality_check(bv),
    }
}

pub fn midpoint_estimate<S: Scalar>(b: &BenefitBounds<S>) -> S {
    (b.lower + b.upper).half()
}

/// Which point of the interval is used to score a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    Midpoint,
    /// Conservative: worst case over compatible models.
    Lower,
    Upper,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Midpoint => "midpoint",
            Estimator::Lower => "lower",
            Estimator::Upper => "upper",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "midpoint" => Ok(Estimator::Midpoint),
            "lower" => Ok(Estimator::Lower),
            "upper" => Ok(Estimator::Upper),
            other => Err(format!(
                "unknown estimator `{other}` (expected midpoint, lower or upper)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedGroup<S = f64> {
    pub id: String,
    pub estimate: S,
    pub bounds: BenefitBounds<S>,
}

/// Bounds every group and sorts by the chosen estimate, best first.
///
/// Ties go to the lexicographically smaller group id. Any incompatible group
/// fails the whole ranking and is named in the error.
pub fn rank_groups<S: Scalar>(study: &Study<S>, estimator: Estimator) -> Result<Vec<RankedGroup<S>>> {
    let bv = study.benefit_vector();
    let mut ranked = study
        .groups()
        .iter()
        .map(|g| {
            g.compatibility()
                .into_result()
                .and_then(|_| benefit_bounds(bv, &g.experimental, g.observational.as_ref()))
                .map(|bounds| RankedGroup {
                    id: g.id.clone(),
                    estimate: bounds.estimate(estimator),
                    bounds,
                })
                .map_err(|e| e.in_group(&g.id))
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        b.estimate
            .partial_cmp(&a.estimate)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.id.cmp(&b.id))
    });
    Ok(ranked)
}
