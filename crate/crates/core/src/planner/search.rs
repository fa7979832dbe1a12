use std::io::Write;

use rand::Rng;

use super::tree::{EdgeKey, HumanStat, Node, RobotEdge};
use super::{HumanLink, PlannerConfig, PlannerMode};
use crate::belief::{AugmentedState, CountPolicy};
use crate::capability::{sample_outcome, AlwaysSucceeds};
use crate::domain::{AgentAction, ShoppingDomain, TrueCapability};
use crate::scalar::Real;

/// π_H over the actions of one θ at one robot edge.
///
/// Unvisited actions take all the mass, uniformly. Otherwise each action is
/// scored by its UCB1 value and the link turns scores into probabilities.
pub fn human_action_probs<T: Real>(
    stats: &[HumanStat<T>],
    theta_visits: u32,
    ucb_c: T,
    temperature: T,
    link: HumanLink,
    out: &mut Vec<T>,
) {
    out.clear();
    let unvisited = stats.iter().filter(|s| s.visits == 0).count();
    if unvisited > 0 || stats.is_empty() {
        let share = if stats.is_empty() { T::zero() } else { T::one() / T::from_usize(unvisited).unwrap() };
        out.extend(stats.iter().map(|s| if s.visits == 0 { share } else { T::zero() }));
        return;
    }
    let log_n = T::from_u32(theta_visits.max(1)).unwrap().ln();
    out.extend(stats.iter().map(|s| s.value + ucb_c * (log_n / T::from_u32(s.visits).unwrap()).sqrt()));
    let best = out.iter().copied().fold(T::neg_infinity(), T::max);
    match link {
        HumanLink::Softmax => {
            let mut total = T::zero();
            for u in out.iter_mut() {
                *u = ((*u - best) / temperature).exp();
                total = total + *u;
            }
            for u in out.iter_mut() {
                *u = *u / total;
            }
        }
        HumanLink::Argmax => {
            let ties = T::from_usize(out.iter().filter(|&&u| u == best).count()).unwrap();
            for u in out.iter_mut() {
                *u = if *u == best { T::one() / ties } else { T::zero() };
            }
        }
    }
}

/// Draws an index from an unnormalised weight vector.
pub(crate) fn sample_index<T: Real, R: Rng + ?Sized>(weights: &[T], rng: &mut R) -> usize {
    let total: f64 = weights.iter().map(|w| w.as_f64()).sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (k, w) in weights.iter().enumerate() {
        let w = w.as_f64();
        if w > 0.0 {
            last = k;
            if u < w {
                return k;
            }
            u -= w;
        }
    }
    last
}

/// Samples a human action for `theta` from the statistics at `edge`.
pub fn sample_human_action<T: Real, R: Rng + ?Sized>(
    edge: &RobotEdge<T>,
    theta: usize,
    human_actions: &[AgentAction],
    config: &PlannerConfig<T>,
    rng: &mut R,
) -> AgentAction {
    let stats = edge.human_stats(theta, human_actions.len());
    if stats.is_empty() {
        return human_actions[rng.gen_range(0..human_actions.len())];
    }
    let mut probs = Vec::with_capacity(stats.len());
    human_action_probs(stats, edge.theta_visits(theta), config.ucb_c, config.human_temp, config.human_link, &mut probs);
    human_actions[sample_index(&probs, rng)]
}

/// One worker's view of the search problem.
pub(crate) struct Simulator<'a, T> {
    pub domain: &'a ShoppingDomain<T>,
    pub robot_truth: &'a TrueCapability<T>,
    pub config: &'a PlannerConfig<T>,
    pub robot_actions: &'a [AgentAction],
    pub human_actions: &'a [AgentAction],
    pub policy: CountPolicy,
    pub deepest: u32,
    scratch: Vec<T>,
}

impl<'a, T: Real> Simulator<'a, T> {
    pub fn new(
        domain: &'a ShoppingDomain<T>,
        robot_truth: &'a TrueCapability<T>,
        config: &'a PlannerConfig<T>,
        robot_actions: &'a [AgentAction],
        human_actions: &'a [AgentAction],
    ) -> Self {
        Simulator {
            domain,
            robot_truth,
            config,
            robot_actions,
            human_actions,
            policy: config.count_policy(),
            deepest: 0,
            scratch: Vec::with_capacity(human_actions.len()),
        }
    }

    #[inline]
    fn cut_off(&self, state: &AugmentedState<T>, depth: u32) -> bool {
        self.domain.is_terminal(&state.world) || self.config.gamma.powi(depth as i32) < self.config.epsilon
    }

    /// Reward on entering `state`: terminal task reward plus, in TICC mode,
    /// the calibration bonus for the current φ.
    #[inline]
    fn reward(&self, state: &AugmentedState<T>) -> T {
        let task = self.domain.step_reward(&state.world, state.theta);
        if self.config.mode == PlannerMode::Ticc && self.config.calibration_weight > T::zero() {
            task + self.config.calibration_weight * state.phi.correctness(self.robot_truth)
        } else {
            task
        }
    }

    /// Samples both outcomes and advances `state` in place.
    #[inline]
    fn step<R: Rng + ?Sized>(
        &self,
        state: &mut AugmentedState<T>,
        robot: AgentAction,
        human: AgentAction,
        rng: &mut R,
    ) -> EdgeKey {
        let (robot_outcome, human_outcome) = match self.config.mode {
            PlannerMode::Ticc => (sample_outcome(self.robot_truth, robot, rng), sample_outcome(&state.psi, human, rng)),
            PlannerMode::Std => (
                sample_outcome::<T, _, _>(&AlwaysSucceeds, robot, rng),
                sample_outcome::<T, _, _>(&AlwaysSucceeds, human, rng),
            ),
        };
        self.policy.advance(state, robot_outcome, human, human_outcome);
        EdgeKey {
            robot_outcome,
            human_action: self.human_actions.iter().position(|&a| a == human).unwrap() as u16,
            human_outcome,
        }
    }

    /// Uniform random play for both agents.
    pub fn rollout<R: Rng + ?Sized>(&mut self, state: &mut AugmentedState<T>, depth: u32, rng: &mut R) -> T {
        let mut total = T::zero();
        let mut discount = T::one();
        let mut d = depth;
        while !self.cut_off(state, d) {
            let robot = self.robot_actions[rng.gen_range(0..self.robot_actions.len())];
            let human = self.human_actions[rng.gen_range(0..self.human_actions.len())];
            self.step(state, robot, human, rng);
            total = total + discount * self.reward(state);
            discount = discount * self.config.gamma;
            d += 1;
        }
        self.deepest = self.deepest.max(d);
        total
    }

    fn select_robot<R: Rng + ?Sized>(&self, node: &Node<T>, rng: &mut R) -> usize {
        let unvisited = node.edges.iter().filter(|e| e.visits == 0).count();
        if unvisited > 0 {
            let nth = rng.gen_range(0..unvisited);
            return node.edges.iter().enumerate().filter(|(_, e)| e.visits == 0).nth(nth).unwrap().0;
        }
        let log_n = T::from_u32(node.visits.max(1)).unwrap().ln();
        let c = self.config.ucb_c;
        let mut best = 0;
        let mut best_score = T::neg_infinity();
        for (k, e) in node.edges.iter().enumerate() {
            let score = e.value + c * (log_n / T::from_u32(e.visits).unwrap()).sqrt();
            if score > best_score {
                best_score = score;
                best = k;
            }
        }
        best
    }

    fn select_human<R: Rng + ?Sized>(&mut self, edge: &RobotEdge<T>, theta: usize, rng: &mut R) -> usize {
        let h = self.human_actions.len();
        if h == 1 {
            return 0;
        }
        let stats = edge.human_stats(theta, h);
        human_action_probs(
            stats,
            edge.theta_visits(theta),
            self.config.ucb_c,
            self.config.human_temp,
            self.config.human_link,
            &mut self.scratch,
        );
        sample_index(&self.scratch, rng)
    }

    /// One traversal from `node` (already in the tree) with `state` drawn from its history.
    pub fn simulate<R: Rng + ?Sized>(
        &mut self,
        state: &mut AugmentedState<T>,
        node: &mut Node<T>,
        depth: u32,
        rng: &mut R,
    ) -> T {
        if self.cut_off(state, depth) {
            self.deepest = self.deepest.max(depth);
            return T::zero();
        }
        node.ensure_edges(self.robot_actions.len());
        let before = state.clone();
        let theta = state.theta;
        let num_thetas = self.domain.num_lists();
        let num_human = self.human_actions.len();

        let robot_idx = self.select_robot(node, rng);
        let edge = &mut node.edges[robot_idx];
        edge.ensure_stats(num_thetas, num_human);
        let human_idx = self.select_human(edge, theta, rng);

        let key = self.step(state, self.robot_actions[robot_idx], self.human_actions[human_idx], rng);
        let reward = self.reward(state);
        let future = match edge.child_index(&key) {
            Some(idx) => self.simulate(state, &mut edge.children[idx].1, depth + 1, rng),
            None => {
                edge.children.push((key, Node::new()));
                self.rollout(state, depth + 1, rng)
            }
        };
        let ret = reward + self.config.gamma * future;

        node.particles.push(before);
        node.visits += 1;
        edge.theta_visits[theta] += 1;
        let stat = &mut edge.human[theta * num_human + human_idx];
        stat.visits += 1;
        edge.visits += 1;
        edge.value = edge.value + (ret - edge.value) / T::from_u32(edge.visits).unwrap();
        stat.value = stat.value + (ret - stat.value) / T::from_u32(stat.visits).unwrap();
        ret
    }

    /// Runs `iterations` traversals from `root`, drawing start states with `draw`.
    pub fn run<R, F>(
        &mut self,
        root: &mut Node<T>,
        iterations: usize,
        mut draw: F,
        rng: &mut R,
        mut trace: Option<&mut Box<dyn Write + Send>>,
    ) where
        R: Rng + ?Sized,
        F: FnMut(&mut R) -> AugmentedState<T>,
    {
        for iteration in 0..iterations {
            let mut state = draw(rng);
            self.deepest = 0;
            self.simulate(&mut state, root, 0, rng);
            if let Some(out) = trace.as_deref_mut() {
                let values: Vec<String> = root
                    .edges
                    .iter()
                    .zip(self.robot_actions)
                    .filter(|(e, _)| e.visits > 0)
                    .map(|(e, a)| format!("{a}:{}:{}", e.value, e.visits))
                    .collect();
                // tracing is best effort
                let _ = writeln!(out, "iter={iteration} depth={} values={}", self.deepest, values.join(","));
            }
        }
    }
}
