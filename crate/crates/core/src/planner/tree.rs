use serde::Serialize;

use crate::belief::AugmentedState;
use crate::domain::ActionOutcome;
use crate::scalar::Real;

/// Observable continuation after a robot action: robot outcome, human action
/// and human outcome. Together with the robot action it labels a tree edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct EdgeKey {
    pub robot_outcome: ActionOutcome,
    pub human_action: u16,
    pub human_outcome: ActionOutcome,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct HumanStat<T> {
    pub visits: u32,
    pub value: T,
}

/// Statistics of `ha^R` plus the per-θ human statistics below it.
#[derive(Debug, Clone, Default)]
pub struct RobotEdge<T> {
    pub visits: u32,
    pub value: T,
    /// `N_θ(ha^R)`, allocated on first visit.
    pub theta_visits: Vec<u32>,
    /// `V_θ(ha^R a^H)` and `N_θ(ha^R a^H)`, row-major by θ.
    pub human: Vec<HumanStat<T>>,
    pub children: Vec<(EdgeKey, Node<T>)>,
}

impl<T: Real> RobotEdge<T> {
    pub(crate) fn ensure_stats(&mut self, num_thetas: usize, num_human_actions: usize) {
        if self.theta_visits.is_empty() {
            self.theta_visits = vec![0; num_thetas];
            self.human = vec![HumanStat::default(); num_thetas * num_human_actions];
        }
    }

    /// Human statistics for one θ; empty if the edge was never visited.
    pub fn human_stats(&self, theta: usize, num_human_actions: usize) -> &[HumanStat<T>] {
        if self.human.is_empty() {
            return &[];
        }
        &self.human[theta * num_human_actions..(theta + 1) * num_human_actions]
    }

    pub fn theta_visits(&self, theta: usize) -> u32 {
        self.theta_visits.get(theta).copied().unwrap_or(0)
    }

    pub fn child(&self, key: &EdgeKey) -> Option<&Node<T>> {
        self.children.iter().find(|(k, _)| k == key).map(|(_, n)| n)
    }

    pub(crate) fn child_index(&self, key: &EdgeKey) -> Option<usize> {
        self.children.iter().position(|(k, _)| k == key)
    }
}

/// One history `h` in the search tree.
#[derive(Debug, Clone, Default)]
pub struct Node<T> {
    pub visits: u32,
    /// `B(h)`: states that passed through this history during search.
    pub particles: Vec<AugmentedState<T>>,
    /// One entry per robot action; empty until the node is first traversed.
    pub edges: Vec<RobotEdge<T>>,
}

impl<T: Real> Node<T> {
    pub fn new() -> Self {
        Node { visits: 0, particles: Vec::new(), edges: Vec::new() }
    }

    pub(crate) fn ensure_edges(&mut self, num_robot_actions: usize) {
        if self.edges.is_empty() {
            self.edges = (0..num_robot_actions).map(|_| RobotEdge::default()).collect();
        }
    }

    pub fn edge(&self, robot_action: usize) -> Option<&RobotEdge<T>> {
        self.edges.get(robot_action)
    }

    /// Number of nodes in this subtree, including `self`.
    pub fn size(&self) -> usize {
        1 + self
            .edges
            .iter()
            .flat_map(|e| e.children.iter())
            .map(|(_, child)| child.size())
            .sum::<usize>()
    }

    /// Detaches the child at `(robot_action, key)`; a fresh node if it was never simulated.
    pub(crate) fn take_child(mut self, robot_action: usize, key: &EdgeKey) -> Node<T> {
        match self.edges.get_mut(robot_action) {
            Some(edge) => match edge.child_index(key) {
                Some(idx) => edge.children.swap_remove(idx).1,
                None => Node::new(),
            },
            None => Node::new(),
        }
    }
}
