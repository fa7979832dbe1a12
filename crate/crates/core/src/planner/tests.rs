use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::search::Simulator;
use super::*;
use crate::capability::CapabilityCounts;
use crate::domain::{ActionOutcome, ShoppingList};

fn domain(num_items: usize, horizon: u32, lists: &[&[u32]]) -> Arc<ShoppingDomain<f64>> {
    let lists = lists.iter().map(|l| ShoppingList::new(l.to_vec()).unwrap()).collect();
    Arc::new(ShoppingDomain::new(num_items, horizon, lists).unwrap())
}

fn belief(d: &ShoppingDomain<f64>) -> Belief<f64> {
    let n = d.num_items;
    Belief::init(d, CapabilityCounts::perfect(n), CapabilityCounts::perfect(n), 100).unwrap()
}

fn solo(samples: usize) -> PlannerConfig<f64> {
    PlannerConfig { num_samples: samples, human_present: false, calibration_weight: 0.0, ..Default::default() }
}

fn visited(n: u32, value: f64) -> HumanStat<f64> {
    HumanStat { visits: n, value }
}

#[test]
fn softmax_over_two_scores() {
    let mut p = Vec::new();
    human_action_probs(&[visited(4, 1.0), visited(4, 0.0)], 8, 0.0, 1.0, HumanLink::Softmax, &mut p);
    assert!((p[0] - 0.731_058_6).abs() < 1e-6);
    assert!((p[1] - 0.268_941_4).abs() < 1e-6);

    human_action_probs(&[visited(3, 0.2), visited(3, 0.2)], 6, 1.0, 1.0, HumanLink::Softmax, &mut p);
    assert_eq!(p, vec![0.5, 0.5]);
}

#[test]
fn low_temperature_approaches_argmax() {
    let stats = [visited(5, 0.4), visited(5, 0.1), visited(5, 0.3)];
    let mut soft = Vec::new();
    let mut hard = Vec::new();
    human_action_probs(&stats, 15, 0.5, 1e-3, HumanLink::Softmax, &mut soft);
    human_action_probs(&stats, 15, 0.5, 1.0, HumanLink::Argmax, &mut hard);
    assert_eq!(hard, vec![1.0, 0.0, 0.0]);
    for (s, h) in soft.iter().zip(&hard) {
        assert!((s - h).abs() < 1e-9);
    }
}

#[test]
fn unvisited_human_actions_share_the_mass() {
    let mut p = Vec::new();
    human_action_probs(&[visited(2, 9.0), visited(0, 0.0), visited(0, 0.0)], 2, 1.0, 1.0, HumanLink::Softmax, &mut p);
    assert_eq!(p, vec![0.0, 0.5, 0.5]);
}

#[test]
fn traversal_past_the_discount_horizon_returns_zero() {
    let d = domain(1, 10, &[&[1]]);
    let truth = TrueCapability::perfect(1);
    let config = PlannerConfig { gamma: 0.5, epsilon: 0.3, ..solo(1) };
    let robot = [AgentAction::Pick(0), AgentAction::NoOp];
    let human = [AgentAction::NoOp];
    let mut sim = Simulator::new(&d, &truth, &config, &robot, &human);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = belief(&d).template().clone();
    let mut node = Node::new();
    assert_eq!(sim.simulate(&mut state, &mut node, 2, &mut rng), 0.0);
    assert_eq!(node.visits, 0);
    assert!(node.edges.is_empty());
}

#[test]
fn first_visit_expands_one_child_and_rolls_out() {
    let d = domain(2, 4, &[&[1, 1]]);
    let mut planner = Planner::new(d.clone(), TrueCapability::perfect(2), solo(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    planner.search(&belief(&d), &mut rng).unwrap();
    let root = planner.root();
    assert_eq!(root.visits, 1);
    assert_eq!(root.particles.len(), 1);
    let expanded: Vec<_> = root.edges.iter().filter(|e| e.visits > 0).collect();
    assert_eq!(expanded.len(), 1);
    assert_eq!(expanded[0].children.len(), 1);
    let child = &expanded[0].children[0].1;
    assert_eq!(child.visits, 0);
    assert!(child.edges.is_empty());
    assert_eq!(root.size(), 2);
}

#[test]
fn visit_counts_are_consistent() {
    let d = domain(2, 3, &[&[1, 0], &[0, 2]]);
    let mut planner = Planner::new(d.clone(), TrueCapability::new(vec![0.7, 0.4]).unwrap(), PlannerConfig {
        num_samples: 2000,
        ..Default::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    planner.search(&belief(&d), &mut rng).unwrap();
    let root = planner.root();
    let h = planner.human_actions().len();
    assert_eq!(root.visits, 2000);
    assert_eq!(root.particles.len(), 2000);
    assert_eq!(root.edges.iter().map(|e| e.visits).sum::<u32>(), 2000);
    for edge in root.edges.iter().filter(|e| e.visits > 0) {
        assert_eq!(edge.theta_visits.iter().sum::<u32>(), edge.visits);
        for theta in 0..d.num_lists() {
            let stats = edge.human_stats(theta, h);
            assert_eq!(stats.iter().map(|s| s.visits).sum::<u32>(), edge.theta_visits(theta));
        }
        // the edge value is the mean of all returns, so the visit-weighted
        // mean of its human-action values
        let total: f64 = edge.human.iter().map(|s| s.value * s.visits as f64).sum();
        assert!((edge.value - total / edge.visits as f64).abs() < 1e-9);
        let below: u32 = edge.children.iter().map(|(_, c)| c.visits).sum();
        assert!(below <= edge.visits);
    }
}

#[test]
fn one_step_values_are_exact_rewards() {
    // with a deterministic robot and no human, every return below a robot
    // action is the same, so V must equal that reward exactly
    let d = domain(2, 1, &[&[1, 0]]);
    let mut planner = Planner::new(d.clone(), TrueCapability::perfect(2), solo(500)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let action = planner.search(&belief(&d), &mut rng).unwrap();
    assert_eq!(action, AgentAction::Pick(0));
    for stat in planner.root_stats() {
        let expected = match stat.action {
            AgentAction::Pick(0) => 1.0,
            AgentAction::Pick(1) => -0.5,
            _ => 0.0,
        };
        assert!(stat.visits > 0);
        assert_eq!(stat.value, expected, "{}", stat.action);
    }
}

#[test]
fn prefers_the_needed_item_with_a_capable_robot() {
    let d = domain(2, 2, &[&[2, 0]]);
    let mut planner = Planner::new(d.clone(), TrueCapability::perfect(2), solo(2000)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    assert_eq!(planner.search(&belief(&d), &mut rng).unwrap(), AgentAction::Pick(0));
}

#[test]
fn single_sample_search_returns_the_only_visited_action() {
    let d = domain(2, 3, &[&[1, 1]]);
    let mut planner = Planner::new(d.clone(), TrueCapability::perfect(2), PlannerConfig {
        num_samples: 1,
        ..Default::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let action = planner.search(&belief(&d), &mut rng).unwrap();
    let visited: Vec<_> = planner.root_stats().into_iter().filter(|s| s.visits > 0).collect();
    assert_eq!(visited.len(), 1);
    assert_eq!(visited[0].action, action);
}

#[test]
fn modes_agree_when_capabilities_are_perfect() {
    let d = domain(2, 3, &[&[1, 1], &[2, 0]]);
    let base = PlannerConfig {
        num_samples: 3000,
        calibration_weight: 0.0,
        robot_signals: false,
        signal_updates_psi: false,
        ..Default::default()
    };
    let std = PlannerConfig { mode: PlannerMode::Std, ..base.clone() };
    let b = belief(&d);
    let mut ticc = Planner::new(d.clone(), TrueCapability::perfect(2), base).unwrap();
    let mut standard = Planner::new(d.clone(), TrueCapability::perfect(2), std).unwrap();
    let a = ticc.search(&b, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
    let s = standard.search(&b, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
    assert_eq!(a, s);
    assert_eq!(ticc.root_stats(), standard.root_stats());
}

#[test]
fn standard_baseline_has_no_signals() {
    let d = domain(3, 3, &[&[1, 1, 1]]);
    let p = Planner::new(d, TrueCapability::perfect(3), PlannerConfig::<f64>::default().standard()).unwrap();
    assert_eq!(p.robot_actions().len(), 4);
    assert!(p.robot_actions().iter().all(|a| !a.is_signal()));
    assert_eq!(p.human_actions().len(), 7);
}

#[test]
fn advance_keeps_the_observed_subtree() {
    let d = domain(2, 3, &[&[1, 1]]);
    let mut planner = Planner::new(d.clone(), TrueCapability::perfect(2), PlannerConfig {
        num_samples: 3000,
        ..Default::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let action = planner.search(&belief(&d), &mut rng).unwrap();
    let k = planner.robot_actions().iter().position(|&a| a == action).unwrap();
    let (key, child) = planner.root().edges[k]
        .children
        .iter()
        .max_by_key(|(_, c)| c.visits)
        .map(|(key, c)| (*key, c.visits))
        .unwrap();
    let obs = Observation {
        robot_outcome: key.robot_outcome,
        human_action: planner.human_actions()[key.human_action as usize],
        human_outcome: key.human_outcome,
    };
    planner.advance(action, &obs);
    assert_eq!(planner.root().visits, child);
    assert!(child > 0);

    // an observation the search never produced starts over
    let unseen = Observation {
        robot_outcome: ActionOutcome::Failure(0),
        human_action: AgentAction::NoOp,
        human_outcome: ActionOutcome::None,
    };
    planner.advance(AgentAction::Pick(0), &unseen);
    assert_eq!(planner.root().visits, 0);
}

#[test]
fn human_model_is_uniform_until_every_action_was_tried() {
    let d = domain(2, 2, &[&[1, 0], &[0, 1]]);
    let mut planner = Planner::new(d.clone(), TrueCapability::perfect(2), PlannerConfig {
        num_samples: 4,
        ..Default::default()
    })
    .unwrap();
    planner.search(&belief(&d), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let model = planner.human_model(AgentAction::Pick(0));
    assert_eq!(model.likelihood(0, AgentAction::NoOp), None);
    assert_eq!(model.likelihood(1, AgentAction::Pick(1)), None);
}

#[test]
fn rollout_matches_uniform_play_expectation() {
    // one item, list [1], horizon 2, robot alone with {pick, noop, signal}:
    // each step picks with probability 1/3, reward arrives one step later
    let d = domain(1, 2, &[&[1]]);
    let truth = TrueCapability::perfect(1);
    let config = solo(1);
    let robot: Vec<_> = (0..3).map(|k| AgentAction::from_index(k, 1)).collect();
    let human = [AgentAction::NoOp];
    let mut sim = Simulator::new(&d, &truth, &config, &robot, &human);
    let start = belief(&d).template().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 60_000;
    let mean: f64 = (0..n)
        .map(|_| {
            let mut s = start.clone();
            sim.rollout(&mut s, 0, &mut rng)
        })
        .sum::<f64>()
        / n as f64;
    let p1 = 4.0 / 9.0;
    let p2 = 1.0 / 9.0;
    let expected = 0.95 * (p1 * 1.0 + p2 * 0.5);
    assert!((mean - expected).abs() < 0.01, "{mean} vs {expected}");
}

#[test]
fn parallel_workers_split_the_budget() {
    let d = domain(2, 3, &[&[1, 1]]);
    let mut planner = Planner::new(d.clone(), TrueCapability::perfect(2), PlannerConfig {
        num_samples: 1000,
        workers: 2,
        ..Default::default()
    })
    .unwrap();
    planner.search(&belief(&d), &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    assert_eq!(planner.roots().iter().map(|r| r.visits).sum::<u32>(), 1000);
    assert_eq!(planner.root_stats().iter().map(|s| s.visits).sum::<u32>(), 1000);
}
