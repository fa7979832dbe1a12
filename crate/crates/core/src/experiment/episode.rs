use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Observation};
use crate::capability::{sample_outcome, CapabilityCounts};
use crate::domain::{ActionOutcome, AgentAction, ShoppingDomain, TrueCapability, WorldState};
use crate::error::{Result, TiccError};
use crate::planner::{Planner, PlannerConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Learning,
    Evaluation,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Learning => "learning",
            Stage::Evaluation => "evaluation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    pub robot_action: AgentAction,
    pub robot_outcome: ActionOutcome,
    pub human_action: AgentAction,
    pub human_outcome: ActionOutcome,
    /// Bag after the step.
    pub bag: Vec<u32>,
    pub theta_likelihood: f64,
    pub degenerate_update: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub round: usize,
    pub stage: Stage,
    pub theta: usize,
    pub steps: Vec<StepRecord>,
    pub task_reward: f64,
    /// Likelihood of the true θ before the first step and after each step.
    pub theta_likelihood: Vec<f64>,
    pub psi_correctness: f64,
    pub phi_correctness: f64,
}

impl EpisodeLog {
    pub fn final_bag(&self) -> Option<&[u32]> {
        self.steps.last().map(|s| s.bag.as_slice())
    }

    pub fn robot_signals(&self) -> usize {
        self.steps.iter().filter(|s| s.robot_action.is_signal()).count()
    }
}

/// Where a round is in its turn cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnPhase {
    RobotTurn,
    HumanTurn,
    RoundOver,
}

/// One round of play between the planner and a human whose actions are
/// supplied from outside, either by a simulated agent or a live player.
///
/// Randomness is consumed in a fixed order per step: search, robot outcome,
/// human outcome, belief filtering. Any driver that feeds the same human
/// actions with the same generator reproduces the same round.
pub struct Episode<T> {
    domain: Arc<ShoppingDomain<T>>,
    human_truth: TrueCapability<T>,
    robot_truth: TrueCapability<T>,
    planner: Planner<T>,
    belief: Belief<T>,
    round: usize,
    stage: Stage,
    theta: usize,
    steps: Vec<StepRecord>,
    theta_curve: Vec<f64>,
    pending_robot: Option<(AgentAction, ActionOutcome)>,
}

impl<T: Real> Episode<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn begin(
        domain: Arc<ShoppingDomain<T>>,
        human_truth: TrueCapability<T>,
        robot_truth: TrueCapability<T>,
        planner_config: PlannerConfig<T>,
        psi: CapabilityCounts<T>,
        phi: CapabilityCounts<T>,
        num_particles: usize,
        theta: usize,
        round: usize,
        stage: Stage,
    ) -> Result<Self> {
        if theta >= domain.num_lists() {
            return Err(TiccError::Config(format!("θ index {theta} out of range")));
        }
        let belief = Belief::init(&domain, psi, phi, num_particles)?;
        let planner = Planner::new(domain.clone(), robot_truth.clone(), planner_config)?;
        let theta_curve = vec![belief.theta_likelihood(theta).as_f64()];
        Ok(Episode {
            domain,
            human_truth,
            robot_truth,
            planner,
            belief,
            round,
            stage,
            theta,
            steps: Vec::new(),
            theta_curve,
            pending_robot: None,
        })
    }

    pub fn phase(&self) -> TurnPhase {
        if self.domain.is_terminal(self.belief.world()) {
            TurnPhase::RoundOver
        } else if self.pending_robot.is_some() {
            TurnPhase::HumanTurn
        } else {
            TurnPhase::RobotTurn
        }
    }

    pub fn world(&self) -> &WorldState {
        self.belief.world()
    }

    pub fn belief(&self) -> &Belief<T> {
        &self.belief
    }

    pub fn planner(&self) -> &Planner<T> {
        &self.planner
    }

    pub fn planner_mut(&mut self) -> &mut Planner<T> {
        &mut self.planner
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn pending_robot(&self) -> Option<(AgentAction, ActionOutcome)> {
        self.pending_robot
    }

    /// Plans, executes and reveals the robot's move.
    pub fn robot_turn<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(AgentAction, ActionOutcome)> {
        match self.phase() {
            TurnPhase::RobotTurn => {}
            TurnPhase::HumanTurn => return Err(TiccError::Config("waiting for the human's move".into())),
            TurnPhase::RoundOver => {
                let w = self.world();
                return Err(TiccError::EpisodeOver { step: w.step, horizon: self.domain.horizon });
            }
        }
        let action = self.planner.search(&self.belief, rng)?;
        let outcome = sample_outcome(&self.robot_truth, action, rng);
        self.pending_robot = Some((action, outcome));
        Ok((action, outcome))
    }

    /// Executes the human's move, filters the belief and re-roots the tree.
    pub fn human_turn<R: Rng + ?Sized>(&mut self, action: AgentAction, rng: &mut R) -> Result<ActionOutcome> {
        let Some((robot_action, robot_outcome)) = self.pending_robot else {
            return match self.phase() {
                TurnPhase::RoundOver => {
                    let w = self.world();
                    Err(TiccError::EpisodeOver { step: w.step, horizon: self.domain.horizon })
                }
                _ => Err(TiccError::Config("waiting for the robot's move".into())),
            };
        };
        action.check_item(self.domain.num_items)?;
        let human_outcome = sample_outcome(&self.human_truth, action, rng);
        let obs = Observation { robot_outcome, human_action: action, human_outcome };
        let model = self.planner.human_model(robot_action);
        let policy = self.planner.config().count_policy();
        let (belief, report) = self.belief.update(&self.domain, robot_action, obs, &model, policy, rng)?;
        self.belief = belief;
        self.planner.advance(robot_action, &obs);
        self.pending_robot = None;

        let likelihood = self.belief.theta_likelihood(self.theta).as_f64();
        self.theta_curve.push(likelihood);
        self.steps.push(StepRecord {
            step: self.belief.world().step - 1,
            robot_action,
            robot_outcome,
            human_action: action,
            human_outcome,
            bag: self.belief.world().bag.clone(),
            theta_likelihood: likelihood,
            degenerate_update: report.degenerate,
        });
        Ok(human_outcome)
    }

    pub fn task_reward(&self) -> T {
        self.domain.task_reward(self.world(), &self.domain.lists[self.theta])
    }

    pub fn psi(&self) -> &CapabilityCounts<T> {
        self.belief.psi()
    }

    pub fn phi(&self) -> &CapabilityCounts<T> {
        self.belief.phi()
    }

    /// Log of the round so far; complete once the phase is `RoundOver`.
    pub fn log(&self) -> EpisodeLog {
        EpisodeLog {
            round: self.round,
            stage: self.stage,
            theta: self.theta,
            steps: self.steps.clone(),
            task_reward: self.task_reward().as_f64(),
            theta_likelihood: self.theta_curve.clone(),
            psi_correctness: self.psi().correctness(&self.human_truth).as_f64(),
            phi_correctness: self.phi().correctness(&self.robot_truth).as_f64(),
        }
    }
}
