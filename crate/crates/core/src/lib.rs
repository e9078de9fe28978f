//! Unit selection under counterfactual response types.
//!
//! Given a payoff for selecting each response type (complier, always-taker,
//! never-taker, defier), this crate bounds the expected payoff per selected
//! unit from randomized-experiment data and, optionally, observational data
//! for the same population. It also recognizes when the payoff is point
//! identified, relates A/B-test scores to payoff vectors, and ships a
//! ground-truth model with a brute-force oracle and a seeded simulator for
//! checking all of it.
//!
//! The numeric kernel ([`model`], [`bounds`], [`heuristics`] and the exact
//! parts of [`oracle`]) is generic over [`Scalar`], implemented for `f64`,
//! `f32` and [`Rational64`]. Aliases for the common instantiations live at the
//! crate root.

pub mod bounds;
pub mod error;
pub mod format;
pub mod heuristics;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod simulate;

pub use num_rational::Rational64;

pub use bounds::{
    benefit_bounds, complier_bounds, gain_equality_check, midpoint_estimate, point_estimate,
    rank_groups, sigma, w_term, BenefitBounds, Estimator, PointEstimate, RankedGroup,
};
pub use error::{Error, Result};
pub use heuristics::{ab_representation, evaluate, induced_benefit_vector, ABHeuristic};
pub use model::{
    check_compatibility, experimental_from_counts, ArmCounts, BenefitVector, CellCounts,
    CompatibilityReport, ExperimentalData, GroupData, ObservationalData, ResponseType, Study,
    Violation,
};
pub use oracle::{
    brute_force_benefit_range, exact_benefit, ground_truth_to_experimental,
    ground_truth_to_observational, is_monotonic, BruteForceRange, GroundTruth, NaturalChoice,
    ResponseTypeDistribution,
};
pub use scalar::Scalar;

pub type BenefitVectorF64 = BenefitVector<f64>;
pub type BenefitVectorF32 = BenefitVector<f32>;
pub type ExactBenefitVector = BenefitVector<Rational64>;

pub type ExperimentalDataF64 = ExperimentalData<f64>;
pub type ExperimentalDataF32 = ExperimentalData<f32>;
pub type ExactExperimentalData = ExperimentalData<Rational64>;

pub type ObservationalDataF64 = ObservationalData<f64>;
pub type ObservationalDataF32 = ObservationalData<f32>;
pub type ExactObservationalData = ObservationalData<Rational64>;

pub type BenefitBoundsF64 = BenefitBounds<f64>;
pub type BenefitBoundsF32 = BenefitBounds<f32>;
pub type ExactBenefitBounds = BenefitBounds<Rational64>;

pub type GroundTruthF64 = GroundTruth<f64>;
pub type ExactGroundTruth = GroundTruth<Rational64>;

pub type StudyF64 = Study<f64>;
pub type ExactStudy = Study<Rational64>;
