//! Small fixed games for checking the planner against expectimax.

#![allow(dead_code)]

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ticc_core::belief::Belief;
use ticc_core::capability::CapabilityCounts;
use ticc_core::domain::{AgentAction, ShoppingDomain, ShoppingList, TrueCapability};
use ticc_core::planner::{Planner, PlannerConfig};

use super::expectimax::{Game, Move};

pub struct Micro {
    pub name: &'static str,
    pub game: Game,
    /// Human takes part but every pick fails.
    pub human_present: bool,
}

fn game(lists: Vec<Vec<u32>>, horizon: u32, robot: Vec<f64>, calibration_weight: f64) -> Game {
    Game { lists, horizon, robot, gamma: 0.95, calibration_weight, excess_penalty: 0.5, signals: true }
}

/// Deterministic robot, searched greedily (c = 0).
pub fn instances() -> Vec<Micro> {
    vec![
        Micro { name: "teach-or-pick", game: game(vec![vec![2, 1]], 2, vec![1.0, 0.0], 0.05), human_present: false },
        Micro {
            name: "two-lists",
            game: game(vec![vec![2, 0], vec![2, 1]], 2, vec![1.0, 1.0], 0.0),
            human_present: false,
        },
        Micro { name: "three-steps", game: game(vec![vec![3, 0]], 3, vec![1.0, 0.0], 0.05), human_present: false },
    ]
}

/// Stochastic outcomes or a sampled human; greedy search can lock onto a
/// child whose first return was lucky, so these need exploration.
pub fn stochastic_instances() -> Vec<Micro> {
    vec![
        Micro {
            name: "unreliable-robot",
            game: game(vec![vec![2, 0], vec![1, 1], vec![0, 2]], 3, vec![0.7, 0.3], 0.05),
            human_present: false,
        },
        Micro {
            name: "helpless-human",
            game: game(vec![vec![1, 1], vec![2, 0]], 2, vec![1.0, 0.0], 0.05),
            human_present: true,
        },
    ]
}

pub fn to_action(m: Move) -> AgentAction {
    match m {
        Move::Pick(i) => AgentAction::Pick(i),
        Move::Idle => AgentAction::NoOp,
        Move::Signal(i) => AgentAction::SignalIncapable(i),
    }
}

/// One seeded search from the empty bag: chosen action and its root value.
pub fn search(micro: &Micro, samples: usize, seed: u64) -> (AgentAction, f64) {
    search_with(micro, samples, seed, 0.0)
}

/// As [`search`] with exploration constant `ucb_c`.
pub fn search_with(micro: &Micro, samples: usize, seed: u64, ucb_c: f64) -> (AgentAction, f64) {
    let g = &micro.game;
    let n = g.robot.len();
    let lists = g.lists.iter().map(|l| ShoppingList::new(l.clone()).unwrap()).collect();
    let domain = Arc::new(ShoppingDomain::<f64>::new(n, g.horizon, lists).unwrap().with_excess_penalty(g.excess_penalty));
    let config = PlannerConfig {
        num_samples: samples,
        ucb_c,
        gamma: g.gamma,
        calibration_weight: g.calibration_weight,
        robot_signals: g.signals,
        human_present: micro.human_present,
        ..Default::default()
    };
    let psi = if micro.human_present {
        CapabilityCounts::new(vec![[0.0, 1.0]; n]).unwrap()
    } else {
        CapabilityCounts::perfect(n)
    };
    let belief = Belief::init(&domain, psi, CapabilityCounts::perfect(n), 300).unwrap();
    let mut planner = Planner::new(domain, TrueCapability::new(g.robot.clone()).unwrap(), config).unwrap();
    let action = planner.search(&belief, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let value = planner.root_stats().into_iter().find(|s| s.action == action).unwrap().value;
    (action, value)
}
