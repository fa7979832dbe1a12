//! Particle belief over the augmented state.
//!
//! World, ψ and φ are deterministic functions of the observable history, so
//! after every real update all particles agree on them and differ only in the
//! intent index θ. θ is filtered by rejection against a human action model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::capability::CapabilityCounts;
use crate::domain::{apply_outcomes, ActionOutcome, AgentAction, ShoppingDomain, TrueCapability, WorldState};
use crate::error::{Result, TiccError};
use crate::scalar::Real;

/// World state extended with intent and both capability beliefs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedState<T> {
    pub world: WorldState,
    pub theta: usize,
    /// Robot's belief over the human's capability.
    pub psi: CapabilityCounts<T>,
    /// Human's belief over the robot's capability.
    pub phi: CapabilityCounts<T>,
}

/// Everything the robot sees after its own action in one turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub robot_outcome: ActionOutcome,
    pub human_action: AgentAction,
    pub human_outcome: ActionOutcome,
}

/// Which capability counts move on an observed turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountPolicy {
    /// False for models without capability parameters: counts stay at the prior.
    pub track: bool,
    /// Whether a human signal counts as a failure observation for ψ.
    pub signal_updates_psi: bool,
}

impl Default for CountPolicy {
    fn default() -> Self {
        CountPolicy { track: true, signal_updates_psi: true }
    }
}

impl CountPolicy {
    pub fn untracked() -> Self {
        CountPolicy { track: false, signal_updates_psi: false }
    }

    /// Applies one turn to `state` in place: physics plus one-hot count increments.
    #[inline]
    pub fn advance<T: Real>(
        &self,
        state: &mut AugmentedState<T>,
        robot_outcome: ActionOutcome,
        human_action: AgentAction,
        human_outcome: ActionOutcome,
    ) {
        apply_outcomes(&mut state.world, robot_outcome, human_outcome);
        if self.track {
            state.phi.observe(robot_outcome);
            if self.signal_updates_psi || !human_action.is_signal() {
                state.psi.observe(human_outcome);
            }
        }
    }
}

/// Probability of an observed human action under a given intent.
pub trait HumanLikelihood<T> {
    /// `None` when the model has no information for this θ; treated as uniform.
    fn likelihood(&self, theta: usize, human_action: AgentAction) -> Option<T>;
}

impl<T, F> HumanLikelihood<T> for F
where
    F: Fn(usize, AgentAction) -> Option<T>,
{
    fn likelihood(&self, theta: usize, human_action: AgentAction) -> Option<T> {
        self(theta, human_action)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief<T> {
    pub particles: Vec<AugmentedState<T>>,
    pub history: Vec<(AgentAction, Observation)>,
    pub num_lists: usize,
    pub target_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UpdateReport {
    /// Every particle was rejected and θ was redrawn uniformly.
    pub degenerate: bool,
    pub survivors: usize,
}

/// Belief snapshot for external consumers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub theta_marginal: Vec<f64>,
    pub psi_expectation: Vec<f64>,
    pub phi_expectation: Vec<f64>,
}

impl<T: Real> Belief<T> {
    /// Uniform over θ, stratified so each list gets an equal share.
    pub fn init(
        domain: &ShoppingDomain<T>,
        psi: CapabilityCounts<T>,
        phi: CapabilityCounts<T>,
        num_particles: usize,
    ) -> Result<Self> {
        if num_particles == 0 {
            return Err(TiccError::Config("belief needs at least one particle".into()));
        }
        let m = domain.num_lists();
        let template = AugmentedState { world: domain.initial_state(), theta: 0, psi, phi };
        let particles = (0..num_particles)
            .map(|k| AugmentedState { theta: k % m, ..template.clone() })
            .collect();
        Ok(Belief { particles, history: Vec::new(), num_lists: m, target_count: num_particles })
    }

    pub fn template(&self) -> &AugmentedState<T> {
        &self.particles[0]
    }

    pub fn world(&self) -> &WorldState {
        &self.particles[0].world
    }

    pub fn psi(&self) -> &CapabilityCounts<T> {
        &self.particles[0].psi
    }

    pub fn phi(&self) -> &CapabilityCounts<T> {
        &self.particles[0].phi
    }

    pub fn theta_marginal(&self) -> Vec<T> {
        let mut counts = vec![0usize; self.num_lists];
        for p in &self.particles {
            counts[p.theta] += 1;
        }
        let total = T::from_usize(self.particles.len()).unwrap();
        counts.into_iter().map(|c| T::from_usize(c).unwrap() / total).collect()
    }

    pub fn theta_likelihood(&self, true_theta: usize) -> T {
        let hits = self.particles.iter().filter(|p| p.theta == true_theta).count();
        T::from_usize(hits).unwrap() / T::from_usize(self.particles.len()).unwrap()
    }

    pub fn snapshot(&self) -> BeliefSnapshot {
        let psi = self.psi();
        let phi = self.phi();
        BeliefSnapshot {
            theta_marginal: self.theta_marginal().into_iter().map(Real::as_f64).collect(),
            psi_expectation: (0..psi.num_items()).map(|i| psi.success_prob(i).as_f64()).collect(),
            phi_expectation: (0..phi.num_items()).map(|i| phi.success_prob(i).as_f64()).collect(),
        }
    }

    pub fn sample<'a, R: Rng + ?Sized>(&'a self, rng: &mut R) -> &'a AugmentedState<T> {
        &self.particles[rng.gen_range(0..self.particles.len())]
    }

    /// Advances every particle by the observed turn and filters θ by rejection.
    pub fn update<R: Rng + ?Sized>(
        &self,
        domain: &ShoppingDomain<T>,
        robot_action: AgentAction,
        obs: Observation,
        human_model: &dyn HumanLikelihood<T>,
        policy: CountPolicy,
        rng: &mut R,
    ) -> Result<(Belief<T>, UpdateReport)> {
        if self.particles.is_empty() {
            return Err(TiccError::Config("cannot update an empty belief".into()));
        }
        robot_action.check_item(domain.num_items)?;
        obs.human_action.check_item(domain.num_items)?;
        for (a, o) in [(robot_action, obs.robot_outcome), (obs.human_action, obs.human_outcome)] {
            if !a.admits(o) {
                return Err(TiccError::OutcomeMismatch { action: a.to_string(), outcome: o.to_string() });
            }
        }
        // validates the step and item indices
        domain.world_transition(self.world(), obs.robot_outcome, obs.human_outcome)?;

        let uniform = T::one() / T::from_usize(domain.num_actions()).unwrap();
        let weights: Vec<T> = (0..self.num_lists)
            .map(|theta| human_model.likelihood(theta, obs.human_action).unwrap_or(uniform))
            .collect();
        let max_weight = weights.iter().copied().fold(T::zero(), T::max);

        let mut survivors: Vec<usize> = Vec::with_capacity(self.particles.len());
        if max_weight > T::zero() {
            for (k, p) in self.particles.iter().enumerate() {
                let accept = (weights[p.theta] / max_weight).as_f64();
                if accept >= 1.0 || rng.gen::<f64>() < accept {
                    survivors.push(k);
                }
            }
        }

        let mut template = self.template().clone();
        policy.advance(&mut template, obs.robot_outcome, obs.human_action, obs.human_outcome);

        let report = UpdateReport { degenerate: survivors.is_empty(), survivors: survivors.len() };
        let thetas: Vec<usize> = if survivors.is_empty() {
            (0..self.target_count).map(|k| k % self.num_lists).collect()
        } else {
            let mut kept: Vec<usize> = survivors.iter().map(|&k| self.particles[k].theta).collect();
            while kept.len() < self.target_count {
                let pick = survivors[rng.gen_range(0..survivors.len())];
                kept.push(self.particles[pick].theta);
            }
            kept
        };

        let particles = thetas.into_iter().map(|theta| AugmentedState { theta, ..template.clone() }).collect();
        let mut history = self.history.clone();
        history.push((robot_action, obs));
        Ok((Belief { particles, history, num_lists: self.num_lists, target_count: self.target_count }, report))
    }
}

pub fn psi_correctness<T: Real>(psi: &CapabilityCounts<T>, truth: &TrueCapability<T>) -> T {
    psi.correctness(truth)
}

pub fn phi_correctness<T: Real>(phi: &CapabilityCounts<T>, truth: &TrueCapability<T>) -> T {
    phi.correctness(truth)
}
