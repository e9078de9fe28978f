//! Ground-truth structural model and brute-force checks of the closed-form
//! bounds.
//!
//! A [`GroundTruth`] is a joint distribution over (response type, natural
//! treatment choice). The response type fixes both potential outcomes; the
//! natural choice is what a unit does when left alone, so the pair generates
//! the experimental margins and the observational joint at once.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    BenefitVector, ExperimentalData, ObservationalData, ResponseType, CELL_SUM_TOLERANCE,
};
use crate::scalar::Scalar;

/// Treatment a unit would take absent intervention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NaturalChoice {
    Treated,
    Untreated,
}

impl NaturalChoice {
    pub const ALL: [NaturalChoice; 2] = [NaturalChoice::Treated, NaturalChoice::Untreated];

    pub fn index(self) -> usize {
        self as usize
    }
}

fn check_unit<S: Scalar>(what: &'static str, p: S) -> Result<()> {
    if !p.is_finite_scalar() || p < S::zero() || p > S::one() {
        return Err(Error::InvalidProbability {
            name: what,
            value: p.to_f64_lossy(),
        });
    }
    Ok(())
}

fn check_sum<S: Scalar>(what: &'static str, sum: S) -> Result<()> {
    if (sum - S::one()).abs() > S::tolerance(CELL_SUM_TOLERANCE) {
        return Err(Error::BadSum {
            what,
            sum: sum.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Shares of compliers, always-takers, never-takers and defiers in a group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseTypeDistribution<S = f64> {
    mass: [S; 4],
}

impl<S: Scalar> ResponseTypeDistribution<S> {
    pub fn new(complier: S, always_taker: S, never_taker: S, defier: S) -> Result<Self> {
        let mass = [complier, always_taker, never_taker, defier];
        for (m, t) in mass.iter().zip(ResponseType::ALL) {
            check_unit(t.name(), *m)?;
        }
        check_sum("response types", mass.iter().fold(S::zero(), |a, m| a + *m))?;
        Ok(Self { mass })
    }

    pub fn mass(&self, t: ResponseType) -> S {
        self.mass[t.index()]
    }

    pub fn complier(&self) -> S {
        self.mass[0]
    }

    pub fn always_taker(&self) -> S {
        self.mass[1]
    }

    pub fn never_taker(&self) -> S {
        self.mass[2]
    }

    pub fn defier(&self) -> S {
        self.mass[3]
    }
}

/// Joint over (response type, natural choice): eight cells summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth<S = f64> {
    joint: [[S; 2]; 4],
}

impl<S: Scalar> GroundTruth<S> {
    /// `joint[t][c]` is the mass of response type `t` (see
    /// [`ResponseType::index`]) with natural choice `c`.
    pub fn new(joint: [[S; 2]; 4]) -> Result<Self> {
        let mut sum = S::zero();
        for row in &joint {
            for &p in row {
                check_unit("ground truth cell", p)?;
                sum = sum + p;
            }
        }
        check_sum("ground truth cells", sum)?;
        Ok(Self { joint })
    }

    /// Splits each response type by its probability of choosing treatment.
    /// `choose_treatment` is indexed like [`ResponseType::ALL`].
    pub fn from_response_types(
        rt: &ResponseTypeDistribution<S>,
        choose_treatment: [S; 4],
    ) -> Result<Self> {
        let mut joint = [[S::zero(); 2]; 4];
        for t in ResponseType::ALL {
            let q = choose_treatment[t.index()];
            check_unit("natural choice probability", q)?;
            let m = rt.mass(t);
            joint[t.index()] = [m * q, m - m * q];
        }
        Ok(Self { joint })
    }

    pub fn cell(&self, t: ResponseType, c: NaturalChoice) -> S {
        self.joint[t.index()][c.index()]
    }

    pub fn joint(&self) -> [[S; 2]; 4] {
        self.joint
    }

    /// Marginal over natural choice.
    pub fn response_types(&self) -> ResponseTypeDistribution<S> {
        let m = |t: ResponseType| self.joint[t.index()][0] + self.joint[t.index()][1];
        ResponseTypeDistribution {
            mass: ResponseType::ALL.map(m),
        }
    }
}

/// Average payoff per selected unit under a known response-type mix.
pub fn exact_benefit<S: Scalar>(bv: &BenefitVector<S>, rt: &ResponseTypeDistribution<S>) -> S {
    ResponseType::ALL
        .iter()
        .fold(S::zero(), |acc, &t| acc + bv.payoff(t) * rt.mass(t))
}

/// `P(y_x) = complier + always-taker`, `P(y_{x'}) = always-taker + defier`.
pub fn ground_truth_to_experimental<S: Scalar>(g: &GroundTruth<S>) -> ExperimentalData<S> {
    let rt = g.response_types();
    // Cells may sum to 1 + 1e-9; clamp the margins back into [0, 1].
    let clamp = |p: S| p.min_of(S::one());
    ExperimentalData::new(
        clamp(rt.complier() + rt.always_taker()),
        clamp(rt.always_taker() + rt.defier()),
    )
    .expect("margins of a valid ground truth are probabilities")
}

/// Observed outcome equals the potential outcome under the natural choice.
pub fn ground_truth_to_observational<S: Scalar>(g: &GroundTruth<S>) -> ObservationalData<S> {
    let [mut xy, mut xyp, mut xpy, mut xpyp] = [S::zero(); 4];
    for t in ResponseType::ALL {
        let treated = g.cell(t, NaturalChoice::Treated);
        let untreated = g.cell(t, NaturalChoice::Untreated);
        if t.responds_if_treated() {
            xy = xy + treated;
        } else {
            xyp = xyp + treated;
        }
        if t.responds_if_untreated() {
            xpy = xpy + untreated;
        } else {
            xpyp = xpyp + untreated;
        }
    }
    let clamp = |p: S| p.min_of(S::one());
    ObservationalData::new(clamp(xy), clamp(xyp), clamp(xpy), clamp(xpyp))
        .expect("cells of a valid ground truth form a distribution")
}

/// No defiers.
pub fn is_monotonic<S: Scalar>(rt: &ResponseTypeDistribution<S>) -> bool {
    rt.defier() <= S::tolerance(1e-12)
}

/// Extremes of the exact benefit over grid ground truths matching the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceRange {
    pub min: f64,
    pub max: f64,
    pub n_feasible: u64,
}

#[derive(Clone, Copy)]
struct Extremes {
    min: f64,
    max: f64,
    n: u64,
}

impl Extremes {
    const EMPTY: Extremes = Extremes {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        n: 0,
    };

    fn push(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        self.n += 1;
    }

    fn merge(self, other: Extremes) -> Extremes {
        Extremes {
            min: self.min.min(other.min),
            max: self.max.max(other.max),
            n: self.n + other.n,
        }
    }
}

/// Enumerates ground truths on a simplex grid and returns the range of the
/// exact benefit over those whose induced data match `exp` (and `obs`, when
/// given) within `grid_step`.
///
/// The grid has `ceil(1 / grid_step)` units per probability. Without
/// observational data the natural choice cannot affect any constraint, so
/// only the four response-type cells are enumerated and `n_feasible` counts
/// response-type mixes.
pub fn brute_force_benefit_range(
    bv: &BenefitVector<f64>,
    exp: &ExperimentalData<f64>,
    obs: Option<&ObservationalData<f64>>,
    grid_step: f64,
) -> Result<BruteForceRange> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::InvalidGridStep(grid_step));
    }
    let k = (1.0 / grid_step - 1e-9).ceil() as u32;
    let kf = f64::from(k);
    let tol = grid_step + 1e-12;
    let near = |units: u32, target: f64| (f64::from(units) / kf - target).abs() <= tol;
    let payoff = [
        bv.complier(),
        bv.always_taker(),
        bv.never_taker(),
        bv.defier(),
    ];
    let value = |c: u32, a: u32, n: u32, d: u32| {
        (payoff[0] * f64::from(c)
            + payoff[1] * f64::from(a)
            + payoff[2] * f64::from(n)
            + payoff[3] * f64::from(d))
            / kf
    };
    let (px, pxp) = (exp.p_y_do_x(), exp.p_y_do_xp());

    let found = match obs {
        None => (0..=k)
            .into_par_iter()
            .map(|c| {
                let mut acc = Extremes::EMPTY;
                for a in 0..=k - c {
                    if !near(c + a, px) {
                        continue;
                    }
                    for n in 0..=k - c - a {
                        let d = k - c - a - n;
                        if near(a + d, pxp) {
                            acc.push(value(c, a, n, d));
                        }
                    }
                }
                acc
            })
            .reduce(|| Extremes::EMPTY, Extremes::merge),
        Some(obs) => {
            let [oxy, oxyp, oxpy, oxpyp] = obs.cells();
            (0..=k)
                .into_par_iter()
                .map(|cx| {
                    let mut acc = Extremes::EMPTY;
                    // Treated units show y iff complier or always-taker;
                    // untreated units show y iff always-taker or defier.
                    for ax in 0..=k - cx {
                        if !near(cx + ax, oxy) {
                            continue;
                        }
                        for nx in 0..=k - cx - ax {
                            for dx in 0..=k - cx - ax - nx {
                                if !near(nx + dx, oxyp) {
                                    continue;
                                }
                                let rest = k - cx - ax - nx - dx;
                                for au in 0..=rest {
                                    for du in 0..=rest - au {
                                        if !near(au + du, oxpy) {
                                            continue;
                                        }
                                        let last = rest - au - du;
                                        if !near(last, oxpyp) {
                                            continue;
                                        }
                                        for cu in 0..=last {
                                            let nu = last - cu;
                                            let (c, a) = (cx + cu, ax + au);
                                            let (n, d) = (nx + nu, dx + du);
                                            if near(c + a, px) && near(a + d, pxp) {
                                                acc.push(value(c, a, n, d));
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    acc
                })
                .reduce(|| Extremes::EMPTY, Extremes::merge)
        }
    };

    if found.n == 0 {
        return Err(Error::NoFeasiblePoint);
    }
    Ok(BruteForceRange {
        min: found.min,
        max: found.max,
        n_feasible: found.n,
    })
}
