//! A/B-test heuristics `a·P(y_x|c) - b·P(y_{x'}|c)` viewed as benefit vectors.
//!
//! Splitting each effective rate into response types,
//! `P(y_x) = P(complier) + P(always-taker)` and
//! `P(y_{x'}) = P(always-taker) + P(defier)`, gives
//! `a·P(complier) + (a - b)·P(always-taker) - b·P(defier)`: a benefit vector
//! with no never-taker payoff and `γ = β + δ`.

use crate::bounds::RELATIVE_PAYOFF_TOLERANCE;
use crate::error::{Error, Result};
use crate::model::{BenefitVector, ExperimentalData};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ABHeuristic<S = f64> {
    /// Weight on the treated effective rate.
    pub a: S,
    /// Weight on the untreated effective rate (subtracted).
    pub b: S,
}

impl<S: Scalar> ABHeuristic<S> {
    pub fn new(a: S, b: S) -> Result<Self> {
        if !a.is_finite_scalar() || !b.is_finite_scalar() {
            return Err(Error::InvalidStudy("heuristic weights must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn evaluate(&self, exp: &ExperimentalData<S>) -> S {
        evaluate(self, exp)
    }
}

pub fn evaluate<S: Scalar>(h: &ABHeuristic<S>, exp: &ExperimentalData<S>) -> S {
    h.a * exp.p_y_do_x() - h.b * exp.p_y_do_xp()
}

/// `(β, γ, θ, δ) = (a, a - b, 0, -b)`.
pub fn induced_benefit_vector<S: Scalar>(h: &ABHeuristic<S>) -> BenefitVector<S> {
    BenefitVector::from_parts(h.a, h.a - h.b, S::zero(), -h.b)
}

/// The heuristic equivalent to `bv`, if any.
///
/// Exists iff `θ = 0` and `γ = β + δ`, both up to a tolerance relative to
/// the payoff scale.
pub fn ab_representation<S: Scalar>(bv: &BenefitVector<S>) -> Option<ABHeuristic<S>> {
    let tol = S::tolerance(RELATIVE_PAYOFF_TOLERANCE) * bv.l1_norm().max_of(S::one());
    let never_taker_free = bv.never_taker().abs() <= tol;
    let additive = (bv.always_taker() - bv.complier() - bv.defier()).abs() <= tol;
    (never_taker_free && additive).then(|| ABHeuristic {
        a: bv.complier(),
        b: -bv.defier(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::gain_equality_check;

    fn exp(px: f64, pxp: f64) -> ExperimentalData {
        ExperimentalData::new(px, pxp).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let h = ABHeuristic::new(1.0, 1.0).unwrap();
        assert!((h.evaluate(&exp(0.6, 0.3)) - 0.3).abs() < 1e-15);
        assert!((h.evaluate(&exp(0.7, 0.3)) - 0.4).abs() < 1e-15);
        let revenue = ABHeuristic::new(45000.0, 50000.0).unwrap();
        assert!((evaluate(&revenue, &exp(0.6, 0.3)) - 12000.0).abs() < 1e-9);
    }

    #[test]
    fn induced_vectors() {
        let v = induced_benefit_vector(&ABHeuristic::new(1.0, 1.0).unwrap());
        assert_eq!(v, BenefitVector::new(1.0, 0.0, 0.0, -1.0).unwrap());
        let v = induced_benefit_vector(&ABHeuristic::new(45000.0, 50000.0).unwrap());
        assert_eq!(v, BenefitVector::new(45000.0, -5000.0, 0.0, -50000.0).unwrap());
        let v = induced_benefit_vector(&ABHeuristic::new(0.0, 0.0).unwrap());
        assert_eq!(v.l1_norm(), 0.0);
        assert!(gain_equality_check(&v));
    }

    #[test]
    fn representation_examples() {
        let bv = |b, g, t, d| BenefitVector::new(b, g, t, d).unwrap();
        assert_eq!(
            ab_representation(&bv(45000.0, -5000.0, 0.0, -50000.0)),
            Some(ABHeuristic { a: 45000.0, b: 50000.0 })
        );
        assert_eq!(ab_representation(&bv(45000.0, -7000.0, 0.0, -50000.0)), None);
        assert_eq!(ab_representation(&bv(1.0, -1.0, -1.0, -1.0)), None);
        assert_eq!(ab_representation(&bv(2.0, -1.0, -1.0, -2.0)), None);
        // Gain-equal but with a never-taker payoff: not a two-weight heuristic.
        assert_eq!(ab_representation(&bv(1.0, 1.0, 1.0, 1.0)), None);
    }

    #[test]
    fn weights_must_be_finite() {
        assert!(ABHeuristic::new(f64::NAN, 1.0).is_err());
        assert!(ABHeuristic::new(-2.0, 3.0).is_ok());
    }
}
