//! Simulated human partner for closed-loop experiments.

use serde::{Deserialize, Serialize};

use crate::capability::CapabilityCounts;
use crate::domain::{ActionOutcome, AgentAction, ItemId, ShoppingDomain, TrueCapability, WorldState};
use crate::error::{Result, TiccError};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanPolicy {
    /// Picks what it does best, leaves to the robot what the robot seems
    /// better at, and signals when only hopeless items remain.
    RationalMyopic,
    /// Always picks the needed item it is best at; ignores φ.
    Greedy,
    /// Replays a fixed action list, then does nothing.
    Scripted(Vec<AgentAction>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanAgent<T> {
    pub true_capability: TrueCapability<T>,
    pub theta: usize,
    /// The human's belief over the robot's capability.
    pub phi: CapabilityCounts<T>,
    pub policy: HumanPolicy,
    pub signal_threshold: T,
    cursor: usize,
}

impl<T: Real> HumanAgent<T> {
    pub fn new(true_capability: TrueCapability<T>, theta: usize, phi: CapabilityCounts<T>, policy: HumanPolicy) -> Self {
        HumanAgent { true_capability, theta, phi, policy, signal_threshold: T::of(0.1), cursor: 0 }
    }

    pub fn with_threshold(mut self, tau: T) -> Self {
        self.signal_threshold = tau;
        self
    }

    /// Starts a new round with intent `theta`; φ carries over.
    pub fn begin_round(&mut self, theta: usize) {
        self.theta = theta;
    }

    pub fn act(&mut self, domain: &ShoppingDomain<T>, state: &WorldState) -> Result<AgentAction> {
        if domain.is_terminal(state) {
            return Err(TiccError::EpisodeOver { step: state.step, horizon: domain.horizon });
        }
        let list = &domain.lists[self.theta];
        let needed: Vec<ItemId> = (0..domain.num_items).filter(|&i| list.remaining(&state.bag, i) > 0).collect();
        let own = |i: ItemId| self.true_capability.success_prob[i];
        let robot = |i: ItemId| self.phi.success_prob(i);

        let action = match &self.policy {
            HumanPolicy::Scripted(script) => {
                let a = script.get(self.cursor).copied().unwrap_or(AgentAction::NoOp);
                self.cursor += 1;
                a.check_item(domain.num_items)?;
                a
            }
            _ if needed.is_empty() => AgentAction::NoOp,
            HumanPolicy::Greedy => AgentAction::Pick(best_by(&needed, |a, b| own(b).partial_cmp(&own(a)))),
            HumanPolicy::RationalMyopic => {
                let best_own = needed.iter().map(|&i| own(i)).fold(T::neg_infinity(), T::max);
                let teachable: Vec<ItemId> = needed.iter().copied().filter(|&i| robot(i) > own(i)).collect();
                if best_own < self.signal_threshold && !teachable.is_empty() {
                    let remaining = |i: ItemId| list.remaining(&state.bag, i);
                    AgentAction::SignalIncapable(best_by(&teachable, |a, b| Some(remaining(b).cmp(&remaining(a)))))
                } else {
                    AgentAction::Pick(best_by(&needed, |a, b| {
                        own(b).partial_cmp(&own(a)).map(|o| o.then(robot(a).partial_cmp(&robot(b)).unwrap()))
                    }))
                }
            }
        };
        Ok(action)
    }

    /// Updates φ from the robot's observed action and outcome.
    pub fn observe_robot(&mut self, robot_action: AgentAction, robot_outcome: ActionOutcome) -> Result<()> {
        self.phi = self.phi.update_counts(robot_action, robot_outcome)?;
        Ok(())
    }
}

/// First item (lowest index) that no other item strictly beats under `cmp`,
/// where `cmp(a, b) == Less` means `a` ranks ahead of `b`.
fn best_by<F>(items: &[ItemId], cmp: F) -> ItemId
where
    F: Fn(ItemId, ItemId) -> Option<std::cmp::Ordering>,
{
    let mut best = items[0];
    for &i in &items[1..] {
        if cmp(i, best) == Some(std::cmp::Ordering::Less) {
            best = i;
        }
    }
    best
}
