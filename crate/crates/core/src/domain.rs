//! The collaborative shopping world: item bag, actions, outcomes and physics.
//!
//! Both agents share one bag. Each turn the robot acts first and the human
//! second; a successful pick adds one item, anything else leaves the bag alone.
//! The task reward compares the final bag against the active shopping list.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TiccError};
use crate::scalar::Real;

pub type ItemId = usize;

/// What an agent attempts on its turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "item", rename_all = "snake_case")]
pub enum AgentAction {
    Pick(ItemId),
    #[serde(rename = "noop")]
    NoOp,
    /// Deliberate, communicative failure on an item.
    SignalIncapable(ItemId),
}

impl AgentAction {
    /// Dense index: picks `0..n`, no-op `n`, signals `n+1..2n+1`.
    #[inline]
    pub fn index(self, num_items: usize) -> usize {
        match self {
            AgentAction::Pick(i) => i,
            AgentAction::NoOp => num_items,
            AgentAction::SignalIncapable(i) => num_items + 1 + i,
        }
    }

    #[inline]
    pub fn from_index(index: usize, num_items: usize) -> AgentAction {
        if index < num_items {
            AgentAction::Pick(index)
        } else if index == num_items {
            AgentAction::NoOp
        } else {
            AgentAction::SignalIncapable(index - num_items - 1)
        }
    }

    pub fn item(self) -> Option<ItemId> {
        match self {
            AgentAction::Pick(i) | AgentAction::SignalIncapable(i) => Some(i),
            AgentAction::NoOp => None,
        }
    }

    pub fn is_signal(self) -> bool {
        matches!(self, AgentAction::SignalIncapable(_))
    }

    pub fn check_item(self, num_items: usize) -> Result<()> {
        match self.item() {
            Some(item) if item >= num_items => Err(TiccError::ItemOutOfRange { item, num_items }),
            _ => Ok(()),
        }
    }

    /// The only outcomes this action can produce.
    pub fn admits(self, outcome: ActionOutcome) -> bool {
        match (self, outcome) {
            (AgentAction::Pick(i), ActionOutcome::Success(j))
            | (AgentAction::Pick(i), ActionOutcome::Failure(j))
            | (AgentAction::SignalIncapable(i), ActionOutcome::Failure(j)) => i == j,
            (AgentAction::NoOp, ActionOutcome::None) => true,
            _ => false,
        }
    }
}

impl fmt::Display for AgentAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentAction::Pick(i) => write!(f, "pick({i})"),
            AgentAction::NoOp => write!(f, "noop"),
            AgentAction::SignalIncapable(i) => write!(f, "signal({i})"),
        }
    }
}

/// Realised result of an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "item", rename_all = "snake_case")]
pub enum ActionOutcome {
    Success(ItemId),
    Failure(ItemId),
    None,
}

impl ActionOutcome {
    pub fn is_success(self) -> bool {
        matches!(self, ActionOutcome::Success(_))
    }
}

impl fmt::Display for ActionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionOutcome::Success(i) => write!(f, "success({i})"),
            ActionOutcome::Failure(i) => write!(f, "failure({i})"),
            ActionOutcome::None => write!(f, "none"),
        }
    }
}

/// Observable part of the state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldState {
    pub bag: Vec<u32>,
    pub step: u32,
}

impl WorldState {
    pub fn empty(num_items: usize) -> Self {
        WorldState { bag: vec![0; num_items], step: 0 }
    }
}

/// Required quantity per item type. One list per intent value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShoppingList {
    pub required: Vec<u32>,
}

impl ShoppingList {
    pub fn new(required: Vec<u32>) -> Result<Self> {
        if required.iter().all(|&q| q == 0) {
            return Err(TiccError::Config("shopping list must require at least one item".into()));
        }
        Ok(ShoppingList { required })
    }

    pub fn total(&self) -> u32 {
        self.required.iter().sum()
    }

    pub fn remaining(&self, bag: &[u32], item: ItemId) -> u32 {
        self.required[item].saturating_sub(bag[item])
    }
}

/// Per-item success probability of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrueCapability<T> {
    pub success_prob: Vec<T>,
}

impl<T: Real> TrueCapability<T> {
    pub fn new(success_prob: Vec<T>) -> Result<Self> {
        if let Some(p) = success_prob.iter().find(|p| !(**p >= T::zero() && **p <= T::one())) {
            return Err(TiccError::Config(format!("capability {p} outside [0, 1]")));
        }
        Ok(TrueCapability { success_prob })
    }

    pub fn perfect(num_items: usize) -> Self {
        TrueCapability { success_prob: vec![T::one(); num_items] }
    }

    /// (success, failure) probabilities of `Pick(item)`.
    pub fn outcome_probs(&self, item: ItemId) -> [T; 2] {
        let p = self.success_prob[item];
        [p, T::one() - p]
    }
}

/// Static description of the world: item count, horizon, candidate lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShoppingDomain<T> {
    pub num_items: usize,
    pub horizon: u32,
    pub lists: Vec<ShoppingList>,
    pub excess_penalty: T,
}

impl<T: Real> ShoppingDomain<T> {
    pub fn new(num_items: usize, horizon: u32, lists: Vec<ShoppingList>) -> Result<Self> {
        if num_items == 0 {
            return Err(TiccError::Config("at least one item type is required".into()));
        }
        if lists.is_empty() {
            return Err(TiccError::Config("at least one shopping list is required".into()));
        }
        if let Some(l) = lists.iter().find(|l| l.required.len() != num_items) {
            return Err(TiccError::LengthMismatch(l.required.len(), num_items));
        }
        Ok(ShoppingDomain { num_items, horizon, lists, excess_penalty: T::of(0.5) })
    }

    pub fn with_excess_penalty(mut self, alpha: T) -> Self {
        self.excess_penalty = alpha;
        self
    }

    pub fn num_lists(&self) -> usize {
        self.lists.len()
    }

    /// Picks, no-op and signals for every item.
    #[inline]
    pub fn num_actions(&self) -> usize {
        2 * self.num_items + 1
    }

    pub fn initial_state(&self) -> WorldState {
        WorldState::empty(self.num_items)
    }

    pub fn is_terminal(&self, state: &WorldState) -> bool {
        state.step >= self.horizon
    }

    fn ensure_live(&self, state: &WorldState) -> Result<()> {
        if self.is_terminal(state) {
            return Err(TiccError::EpisodeOver { step: state.step, horizon: self.horizon });
        }
        Ok(())
    }

    /// Same set for both agents; items never run out.
    pub fn legal_actions(&self, state: &WorldState) -> Result<Vec<AgentAction>> {
        self.ensure_live(state)?;
        Ok((0..self.num_actions()).map(|k| AgentAction::from_index(k, self.num_items)).collect())
    }

    fn check_outcome(&self, outcome: ActionOutcome) -> Result<()> {
        match outcome {
            ActionOutcome::Success(item) | ActionOutcome::Failure(item) if item >= self.num_items => {
                Err(TiccError::ItemOutOfRange { item, num_items: self.num_items })
            }
            _ => Ok(()),
        }
    }

    pub fn world_transition(
        &self,
        state: &WorldState,
        robot_outcome: ActionOutcome,
        human_outcome: ActionOutcome,
    ) -> Result<WorldState> {
        self.ensure_live(state)?;
        self.check_outcome(robot_outcome)?;
        self.check_outcome(human_outcome)?;
        let mut next = state.clone();
        apply_outcomes(&mut next, robot_outcome, human_outcome);
        Ok(next)
    }

    pub fn task_reward(&self, state: &WorldState, list: &ShoppingList) -> T {
        task_reward(&state.bag, &list.required, self.excess_penalty)
    }

    /// Task reward paid on entering `state`: the normalised bag match at the
    /// horizon, zero before.
    pub fn step_reward(&self, state: &WorldState, theta: usize) -> T {
        if state.step == self.horizon {
            self.task_reward(state, &self.lists[theta])
        } else {
            T::zero()
        }
    }
}

/// Unchecked in-place physics, used on hot paths after validation.
#[inline]
pub(crate) fn apply_outcomes(state: &mut WorldState, robot: ActionOutcome, human: ActionOutcome) {
    if let ActionOutcome::Success(i) = robot {
        state.bag[i] += 1;
    }
    if let ActionOutcome::Success(i) = human {
        state.bag[i] += 1;
    }
    state.step += 1;
}

/// `(Σ min(bag, req) − α Σ max(bag − req, 0)) / Σ req`.
pub fn task_reward<T: Real>(bag: &[u32], required: &[u32], excess_penalty: T) -> T {
    let mut matched = 0u32;
    let mut excess = 0u32;
    let mut total = 0u32;
    for (&have, &need) in bag.iter().zip(required) {
        matched += have.min(need);
        excess += have.saturating_sub(need);
        total += need;
    }
    (T::from_u32(matched).unwrap() - excess_penalty * T::from_u32(excess).unwrap())
        / T::from_u32(total).unwrap()
}
