//! Online Monte-Carlo planner over the augmented state.
//!
//! Each tree node stores the usual POMCP statistics for robot actions plus a
//! per-θ table of human action statistics. Simulated humans act by a UCB1 link
//! over those tables, simulated robot outcomes come from the robot's true
//! capability and simulated human outcomes from ψ. The standard-POMCP baseline
//! runs the same machinery with perfect-success outcome models, no capability
//! counts and no calibration reward.

mod search;
mod tree;

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use search::{human_action_probs, sample_human_action};
pub use tree::{EdgeKey, HumanStat, Node, RobotEdge};

use crate::belief::{AugmentedState, Belief, CountPolicy, HumanLikelihood, Observation};
use crate::domain::{AgentAction, ShoppingDomain, TrueCapability};
use crate::error::{Result, TiccError};
use crate::scalar::Real;
use search::Simulator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerMode {
    Ticc,
    Std,
}

impl std::fmt::Display for PlannerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlannerMode::Ticc => "ticc",
            PlannerMode::Std => "std",
        })
    }
}

impl std::str::FromStr for PlannerMode {
    type Err = TiccError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ticc" => Ok(PlannerMode::Ticc),
            "std" => Ok(PlannerMode::Std),
            other => Err(TiccError::Config(format!("unknown planner mode `{other}`"))),
        }
    }
}

/// Maps human UCB1 scores to action probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HumanLink {
    Softmax,
    Argmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct PlannerConfig<T> {
    pub num_samples: usize,
    pub ucb_c: T,
    pub gamma: T,
    pub epsilon: T,
    pub human_temp: T,
    pub human_link: HumanLink,
    /// Link used when the belief filter reads π_H off the tree. The filter
    /// scores by value alone (`filter_ucb_c` defaults to 0) at a sharper
    /// temperature than the simulated human.
    pub filter_temp: T,
    pub filter_ucb_c: T,
    /// Share of filter probability spread uniformly over human actions, so a
    /// human who departs from the modelled policy does not wipe out the
    /// correct θ.
    pub filter_floor: T,
    pub mode: PlannerMode,
    pub calibration_weight: T,
    /// Whether the robot may choose signal actions.
    pub robot_signals: bool,
    /// Whether an observed human signal is a failure observation for ψ.
    pub signal_updates_psi: bool,
    /// When false the simulated human always does nothing.
    pub human_present: bool,
    /// Independent root-parallel trees; the sample budget is split across them.
    pub workers: usize,
}

impl<T: Real> Default for PlannerConfig<T> {
    fn default() -> Self {
        PlannerConfig {
            num_samples: 10_000,
            ucb_c: T::one(),
            gamma: T::of(0.95),
            epsilon: T::of(0.01),
            human_temp: T::one(),
            human_link: HumanLink::Softmax,
            filter_temp: T::of(0.03),
            filter_ucb_c: T::zero(),
            filter_floor: T::of(0.1),
            mode: PlannerMode::Ticc,
            calibration_weight: T::of(0.05),
            robot_signals: true,
            signal_updates_psi: true,
            human_present: true,
            workers: 1,
        }
    }
}

impl<T: Real> PlannerConfig<T> {
    /// The standard-POMCP baseline: no capability model, no calibration
    /// reward, and no communicative robot actions.
    pub fn standard(mut self) -> Self {
        self.mode = PlannerMode::Std;
        self.calibration_weight = T::zero();
        self.robot_signals = false;
        self
    }

    pub fn with_mode(self, mode: PlannerMode) -> Self {
        match mode {
            PlannerMode::Ticc => PlannerConfig { mode, ..self },
            PlannerMode::Std => self.standard(),
        }
    }

    pub fn count_policy(&self) -> CountPolicy {
        match self.mode {
            PlannerMode::Ticc => CountPolicy { track: true, signal_updates_psi: self.signal_updates_psi },
            PlannerMode::Std => CountPolicy::untracked(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(TiccError::Config(what.to_string()));
        if self.num_samples == 0 {
            return bad("num_samples must be at least 1");
        }
        if self.ucb_c < T::zero() {
            return bad("ucb_c must be non-negative");
        }
        if !(self.gamma > T::zero() && self.gamma <= T::one()) {
            return bad("gamma must lie in (0, 1]");
        }
        if self.epsilon <= T::zero() {
            return bad("epsilon must be positive");
        }
        if self.human_temp <= T::zero() || self.filter_temp <= T::zero() {
            return bad("human_temp and filter_temp must be positive");
        }
        if !(self.filter_floor >= T::zero() && self.filter_floor <= T::one()) {
            return bad("filter_floor must lie in [0, 1]");
        }
        if self.filter_ucb_c < T::zero() {
            return bad("filter_ucb_c must be non-negative");
        }
        if self.calibration_weight < T::zero() {
            return bad("calibration_weight must be non-negative");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        Ok(())
    }
}

/// Merged statistics of one root robot action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootStat<T> {
    pub action: AgentAction,
    pub visits: u32,
    pub value: T,
}

/// π_H at the root edge of the executed robot action, one row per θ.
#[derive(Debug, Clone)]
pub struct TreeHumanModel<T> {
    human_actions: Vec<AgentAction>,
    rows: Vec<Option<Vec<T>>>,
}

impl<T: Real> TreeHumanModel<T> {
    pub fn probabilities(&self, theta: usize) -> Option<&[T]> {
        self.rows.get(theta).and_then(|r| r.as_deref())
    }
}

impl<T: Real> HumanLikelihood<T> for TreeHumanModel<T> {
    fn likelihood(&self, theta: usize, human_action: AgentAction) -> Option<T> {
        let row = self.probabilities(theta)?;
        Some(match self.human_actions.iter().position(|&a| a == human_action) {
            Some(k) => row[k],
            None => T::zero(),
        })
    }
}

pub struct Planner<T> {
    domain: Arc<ShoppingDomain<T>>,
    robot_truth: TrueCapability<T>,
    config: PlannerConfig<T>,
    robot_actions: Vec<AgentAction>,
    human_actions: Vec<AgentAction>,
    roots: Vec<Node<T>>,
    trace: Option<Box<dyn Write + Send>>,
}

impl<T: Real> Planner<T> {
    pub fn new(domain: Arc<ShoppingDomain<T>>, robot_truth: TrueCapability<T>, config: PlannerConfig<T>) -> Result<Self> {
        config.validate()?;
        if robot_truth.success_prob.len() != domain.num_items {
            return Err(TiccError::LengthMismatch(robot_truth.success_prob.len(), domain.num_items));
        }
        let n = domain.num_items;
        let robot_count = if config.robot_signals { domain.num_actions() } else { n + 1 };
        let robot_actions = (0..robot_count).map(|k| AgentAction::from_index(k, n)).collect();
        let human_actions = if config.human_present {
            (0..domain.num_actions()).map(|k| AgentAction::from_index(k, n)).collect()
        } else {
            vec![AgentAction::NoOp]
        };
        let roots = (0..config.workers).map(|_| Node::new()).collect();
        Ok(Planner { domain, robot_truth, config, robot_actions, human_actions, roots, trace: None })
    }

    pub fn config(&self) -> &PlannerConfig<T> {
        &self.config
    }

    pub fn domain(&self) -> &ShoppingDomain<T> {
        &self.domain
    }

    pub fn robot_actions(&self) -> &[AgentAction] {
        &self.robot_actions
    }

    pub fn human_actions(&self) -> &[AgentAction] {
        &self.human_actions
    }

    /// Root of the first worker's tree.
    pub fn root(&self) -> &Node<T> {
        &self.roots[0]
    }

    pub fn roots(&self) -> &[Node<T>] {
        &self.roots
    }

    /// Line-delimited per-iteration trace (first worker only).
    pub fn set_trace(&mut self, out: Option<Box<dyn Write + Send>>) {
        self.trace = out;
    }

    /// Discards all trees, e.g. at the start of a new round.
    pub fn reset(&mut self) {
        self.roots.iter_mut().for_each(|r| *r = Node::new());
    }

    fn check_robot_action(&self, action: AgentAction) -> Option<usize> {
        self.robot_actions.iter().position(|&a| a == action)
    }

    /// Runs the configured number of simulations and returns the robot action
    /// with the highest root value. Ties are broken uniformly at random.
    pub fn search<R: Rng + ?Sized>(&mut self, belief: &Belief<T>, rng: &mut R) -> Result<AgentAction> {
        if belief.particles.is_empty() {
            return Err(TiccError::Config("cannot search from an empty belief".into()));
        }
        let world = belief.world();
        if self.domain.is_terminal(world) {
            return Err(TiccError::EpisodeOver { step: world.step, horizon: self.domain.horizon });
        }
        let workers = self.config.workers;
        let per_worker = self.config.num_samples.div_ceil(workers);
        let num_lists = self.domain.num_lists();
        let from_prior = belief.history.is_empty();

        let domain = &*self.domain;
        let truth = &self.robot_truth;
        let config = &self.config;
        let robot_actions = &self.robot_actions[..];
        let human_actions = &self.human_actions[..];

        if workers == 1 {
            let mut sim = Simulator::new(domain, truth, config, robot_actions, human_actions);
            let trace = self.trace.as_mut();
            sim.run(&mut self.roots[0], per_worker, |r: &mut R| draw_start(belief, from_prior, num_lists, r), rng, trace);
        } else {
            let seeds: Vec<u64> = (0..workers).map(|_| rng.gen()).collect();
            let trace = self.trace.as_mut();
            let (first, rest) = self.roots.split_first_mut().unwrap();
            let mut first_rng = ChaCha8Rng::seed_from_u64(seeds[0]);
            rayon::join(
                || {
                    let mut sim = Simulator::new(domain, truth, config, robot_actions, human_actions);
                    sim.run(first, per_worker, |r: &mut ChaCha8Rng| draw_start(belief, from_prior, num_lists, r), &mut first_rng, trace);
                },
                || {
                    rest.par_iter_mut().zip(&seeds[1..]).for_each(|(root, &seed)| {
                        let mut worker_rng = ChaCha8Rng::seed_from_u64(seed);
                        let mut sim = Simulator::new(domain, truth, config, robot_actions, human_actions);
                        sim.run(root, per_worker, |r: &mut ChaCha8Rng| draw_start(belief, from_prior, num_lists, r), &mut worker_rng, None);
                    });
                },
            );
        }

        let stats = self.root_stats();
        let best = stats
            .iter()
            .filter(|s| s.visits > 0)
            .map(|s| s.value)
            .fold(T::neg_infinity(), T::max);
        let ties: Vec<AgentAction> =
            stats.iter().filter(|s| s.visits > 0 && s.value == best).map(|s| s.action).collect();
        Ok(if ties.len() == 1 { ties[0] } else { ties[rng.gen_range(0..ties.len())] })
    }

    /// Root robot-action statistics merged across workers by visit-weighted averaging.
    pub fn root_stats(&self) -> Vec<RootStat<T>> {
        self.robot_actions
            .iter()
            .enumerate()
            .map(|(k, &action)| {
                let mut visits = 0u32;
                let mut weighted = T::zero();
                for root in &self.roots {
                    if let Some(e) = root.edge(k) {
                        visits += e.visits;
                        weighted = weighted + e.value * T::from_u32(e.visits).unwrap();
                    }
                }
                let value = if visits > 0 { weighted / T::from_u32(visits).unwrap() } else { T::zero() };
                RootStat { action, visits, value }
            })
            .collect()
    }

    /// The human model implied by the root statistics below `robot_action`.
    pub fn human_model(&self, robot_action: AgentAction) -> TreeHumanModel<T> {
        let h = self.human_actions.len();
        let m = self.domain.num_lists();
        let mut rows = vec![None; m];
        if let Some(k) = self.check_robot_action(robot_action) {
            for (theta, row) in rows.iter_mut().enumerate() {
                let mut merged = vec![HumanStat::<T>::default(); h];
                let mut theta_visits = 0u32;
                for root in &self.roots {
                    let Some(edge) = root.edge(k) else { continue };
                    let stats = edge.human_stats(theta, h);
                    if stats.is_empty() {
                        continue;
                    }
                    theta_visits += edge.theta_visits(theta);
                    for (acc, s) in merged.iter_mut().zip(stats) {
                        acc.value = acc.value + s.value * T::from_u32(s.visits).unwrap();
                        acc.visits += s.visits;
                    }
                }
                if merged.iter().any(|s| s.visits == 0) {
                    continue;
                }
                for s in merged.iter_mut() {
                    s.value = s.value / T::from_u32(s.visits).unwrap();
                }
                let mut probs = Vec::with_capacity(h);
                human_action_probs(
                    &merged,
                    theta_visits,
                    self.config.filter_ucb_c,
                    self.config.filter_temp,
                    self.config.human_link,
                    &mut probs,
                );
                let floor = self.config.filter_floor;
                let share = floor / T::from_usize(h).unwrap();
                for p in probs.iter_mut() {
                    *p = (T::one() - floor) * *p + share;
                }
                *row = Some(probs);
            }
        }
        TreeHumanModel { human_actions: self.human_actions.clone(), rows }
    }

    /// Re-roots every tree at the observed edge. Unseen edges give a fresh root.
    pub fn advance(&mut self, robot_action: AgentAction, obs: &Observation) {
        let robot_idx = self.check_robot_action(robot_action);
        let human_idx = self.human_actions.iter().position(|&a| a == obs.human_action);
        for root in self.roots.iter_mut() {
            let old = std::mem::take(root);
            *root = match (robot_idx, human_idx) {
                (Some(r), Some(h)) => old.take_child(
                    r,
                    &EdgeKey { robot_outcome: obs.robot_outcome, human_action: h as u16, human_outcome: obs.human_outcome },
                ),
                _ => Node::new(),
            };
        }
    }
}

/// Start state of one simulation: the round's prior when nothing has been
/// observed yet, otherwise a particle of the current belief.
fn draw_start<T: Real, R: Rng + ?Sized>(
    belief: &Belief<T>,
    from_prior: bool,
    num_lists: usize,
    rng: &mut R,
) -> AugmentedState<T> {
    if from_prior {
        AugmentedState { theta: rng.gen_range(0..num_lists), ..belief.template().clone() }
    } else {
        belief.sample(rng).clone()
    }
}

#[cfg(test)]
mod tests;
