//! Dirichlet experience counts over action outcomes.
//!
//! Each pick action carries a `(success, failure)` count pair. The expected
//! outcome distribution is the normalised pair and every observed outcome adds
//! exactly one to the matching cell.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ActionOutcome, AgentAction, ItemId, TrueCapability};
use crate::error::{Result, TiccError};
use crate::scalar::Real;

const SUCCESS: usize = 0;
const FAILURE: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CapabilityCounts<T> {
    counts: Vec<[T; 2]>,
}

impl<T: Real> CapabilityCounts<T> {
    pub fn new(counts: Vec<[T; 2]>) -> Result<Self> {
        for c in &counts {
            if c[0] < T::zero() || c[1] < T::zero() || c[0] + c[1] <= T::zero() {
                return Err(TiccError::Config(format!("invalid count pair ({}, {})", c[0], c[1])));
            }
        }
        Ok(CapabilityCounts { counts })
    }

    /// One success and zero failures per item: expectation exactly 1.
    pub fn perfect(num_items: usize) -> Self {
        CapabilityCounts { counts: vec![[T::one(), T::zero()]; num_items] }
    }

    pub fn num_items(&self) -> usize {
        self.counts.len()
    }

    pub fn pair(&self, item: ItemId) -> [T; 2] {
        self.counts[item]
    }

    pub fn total(&self) -> T {
        self.counts.iter().fold(T::zero(), |acc, c| acc + c[0] + c[1])
    }

    #[inline]
    pub fn success_prob(&self, item: ItemId) -> T {
        let [s, f] = self.counts[item];
        s / (s + f)
    }

    pub fn expected_outcome_prob(&self, action: AgentAction) -> Result<[T; 2]> {
        match action {
            AgentAction::Pick(item) => {
                action.check_item(self.num_items())?;
                let p = self.success_prob(item);
                let [s, f] = self.counts[item];
                Ok([p, f / (s + f)])
            }
            other => Err(TiccError::NotApplicable(other.to_string())),
        }
    }

    pub fn update_counts(&self, action: AgentAction, outcome: ActionOutcome) -> Result<Self> {
        action.check_item(self.num_items())?;
        if !action.admits(outcome) {
            return Err(TiccError::OutcomeMismatch { action: action.to_string(), outcome: outcome.to_string() });
        }
        let mut next = self.clone();
        next.observe(outcome);
        Ok(next)
    }

    /// In-place one-hot increment. Signals arrive here as `Failure(i)`.
    #[inline]
    pub fn observe(&mut self, outcome: ActionOutcome) {
        match outcome {
            ActionOutcome::Success(i) => self.counts[i][SUCCESS] = self.counts[i][SUCCESS] + T::one(),
            ActionOutcome::Failure(i) => self.counts[i][FAILURE] = self.counts[i][FAILURE] + T::one(),
            ActionOutcome::None => {}
        }
    }

    /// Mean area overlap with `truth` across all pick actions.
    pub fn correctness(&self, truth: &TrueCapability<T>) -> T {
        let n = self.num_items();
        let sum = (0..n).fold(T::zero(), |acc, i| acc + binary_overlap(self.success_prob(i), truth.success_prob[i]));
        sum / T::from_usize(n).unwrap()
    }
}

/// Anything that assigns a success probability to `Pick(item)`.
pub trait OutcomeModel<T> {
    fn pick_success(&self, item: ItemId) -> T;
}

impl<T: Real> OutcomeModel<T> for CapabilityCounts<T> {
    #[inline]
    fn pick_success(&self, item: ItemId) -> T {
        self.success_prob(item)
    }
}

impl<T: Real> OutcomeModel<T> for TrueCapability<T> {
    #[inline]
    fn pick_success(&self, item: ItemId) -> T {
        self.success_prob[item]
    }
}

/// Model in which every pick succeeds.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysSucceeds;

impl<T: Real> OutcomeModel<T> for AlwaysSucceeds {
    #[inline]
    fn pick_success(&self, _item: ItemId) -> T {
        T::one()
    }
}

/// Draws an outcome: picks are Bernoulli, signals always fail, no-op has none.
#[inline]
pub fn sample_outcome<T: Real, M: OutcomeModel<T> + ?Sized, R: Rng + ?Sized>(
    model: &M,
    action: AgentAction,
    rng: &mut R,
) -> ActionOutcome {
    match action {
        AgentAction::Pick(i) => {
            let p = model.pick_success(i).as_f64();
            // degenerate probabilities do not consume randomness
            let success = if p >= 1.0 {
                true
            } else if p <= 0.0 {
                false
            } else {
                rng.gen::<f64>() < p
            };
            if success {
                ActionOutcome::Success(i)
            } else {
                ActionOutcome::Failure(i)
            }
        }
        AgentAction::SignalIncapable(i) => ActionOutcome::Failure(i),
        AgentAction::NoOp => ActionOutcome::None,
    }
}

/// `Σ min(p_i, q_i)`.
pub fn area_overlap<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(TiccError::LengthMismatch(p.len(), q.len()));
    }
    Ok(p.iter().zip(q).fold(T::zero(), |acc, (&a, &b)| acc + a.min(b)))
}

/// Area overlap of two Bernoulli distributions given their success probabilities.
#[inline]
pub fn binary_overlap<T: Real>(p: T, q: T) -> T {
    p.min(q) + (T::one() - p).min(T::one() - q)
}

/// `weight × mean_a AO(E[φ](a), P*(a))`.
pub fn calibration_reward<T: Real>(phi: &CapabilityCounts<T>, truth: &TrueCapability<T>, weight: T) -> T {
    weight * phi.correctness(truth)
}
