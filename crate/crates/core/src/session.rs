//! Turn-by-turn play against a live human.
//!
//! A session wraps the same [`Episode`] stepping the experiment harness uses,
//! with the human's actions supplied by a client instead of a simulated agent.
//! The true outcome of every human action is drawn here, never reported by
//! the client.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capability::CapabilityCounts;
use crate::domain::{ActionOutcome, AgentAction};
use crate::error::TiccError;
use crate::experiment::{Carryover, Episode, EpisodeLog, ExperimentConfig, RunContext, ScenarioRef, StepRecord};
use crate::planner::PlannerMode;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Invalid(String),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::NotFound(_) => "not_found",
            SessionError::Conflict(_) => "conflict",
            SessionError::Invalid(_) => "invalid",
        }
    }
}

impl From<TiccError> for SessionError {
    fn from(e: TiccError) -> Self {
        match e {
            TiccError::UnknownScenario { .. } => SessionError::NotFound(e.to_string()),
            other => SessionError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionPhase {
    RobotTurn,
    HumanTurn,
    RoundOver,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewRole {
    Human,
    Spectator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSettings {
    pub scenario: String,
    pub mode: PlannerMode,
    pub samples: usize,
    pub seed: u64,
    pub rounds: usize,
}

impl SessionSettings {
    pub fn new(scenario: &str, mode: PlannerMode, samples: usize, seed: u64) -> Self {
        SessionSettings { scenario: scenario.to_string(), mode, samples, seed, rounds: 5 }
    }

    /// The equivalent single-run harness configuration.
    pub fn experiment_config<T: Real>(&self) -> ExperimentConfig<T> {
        let mut cfg = ExperimentConfig::<T> {
            scenario: ScenarioRef::Named(self.scenario.clone()),
            learning_rounds: self.rounds,
            evaluation_rounds: 0,
            num_runs: 1,
            seed: self.seed,
            ..Default::default()
        }
        .with_mode(self.mode);
        cfg.planner.num_samples = self.samples;
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveView {
    pub action: AgentAction,
    pub outcome: ActionOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub round: usize,
    pub task_reward: f64,
    pub psi_correctness: f64,
    pub phi_correctness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueCapabilities {
    pub human: Vec<f64>,
    pub robot: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub role: ViewRole,
    pub scenario: String,
    pub mode: PlannerMode,
    pub items: Vec<String>,
    pub horizon: u32,
    pub round: usize,
    pub total_rounds: usize,
    pub step: u32,
    pub phase: SessionPhase,
    pub bag: Vec<u32>,
    /// Only in the human's view.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shopping_list: Option<Vec<u32>>,
    pub theta_marginal: Vec<f64>,
    pub psi_expectation: Vec<f64>,
    pub phi_expectation: Vec<f64>,
    /// Revealed once the session is done.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_capabilities: Option<TrueCapabilities>,
    pub last_robot: Option<MoveView>,
    pub last_human: Option<MoveView>,
    pub ledger: Vec<RoundResult>,
    pub action_log: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Created { settings: SessionSettings },
    RoundStarted { round: usize },
    RobotStep { round: usize, step: u32, action: AgentAction, outcome: ActionOutcome },
    HumanStep { round: usize, step: u32, action: AgentAction, outcome: ActionOutcome },
    RoundClosed { round: usize, theta: usize, task_reward: f64 },
}

pub struct Session<T> {
    id: String,
    settings: SessionSettings,
    ctx: RunContext<T>,
    rng: ChaCha8Rng,
    psi: CapabilityCounts<T>,
    phi: CapabilityCounts<T>,
    episode: Episode<T>,
    phase: SessionPhase,
    last_robot: Option<MoveView>,
    last_human: Option<MoveView>,
    ledger: Vec<RoundResult>,
    logs: Vec<EpisodeLog>,
    events: Vec<SessionEvent>,
}

impl<T: Real> Session<T> {
    pub fn create(id: String, settings: SessionSettings) -> Result<Self, SessionError> {
        if settings.rounds == 0 {
            return Err(SessionError::Invalid("rounds must be at least 1".into()));
        }
        let ctx = RunContext::new(&settings.experiment_config::<T>())?;
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let Carryover { psi, phi, .. } = ctx.initial_carryover();
        let episode = ctx.begin_round(&psi, &phi, 0, &mut rng)?;
        let events = vec![SessionEvent::Created { settings: settings.clone() }, SessionEvent::RoundStarted { round: 0 }];
        Ok(Session {
            id,
            settings,
            ctx,
            rng,
            psi,
            phi,
            episode,
            phase: SessionPhase::RobotTurn,
            last_robot: None,
            last_human: None,
            ledger: Vec::new(),
            logs: Vec::new(),
            events,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn phase(&self) -> SessionPhase {
        self.phase
    }

    pub fn settings(&self) -> &SessionSettings {
        &self.settings
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    /// Logs of completed rounds.
    pub fn logs(&self) -> &[EpisodeLog] {
        &self.logs
    }

    pub fn robot_step(&mut self) -> Result<MoveView, SessionError> {
        match self.phase {
            SessionPhase::RobotTurn | SessionPhase::RoundOver => {}
            SessionPhase::HumanTurn => return Err(SessionError::Conflict("it is the human's turn".into())),
            SessionPhase::Done => return Err(SessionError::Conflict("session is finished".into())),
        }
        let step = self.episode.world().step;
        let (action, outcome) = self.episode.robot_turn(&mut self.rng)?;
        let mv = MoveView { action, outcome };
        self.last_robot = Some(mv);
        self.last_human = None;
        self.phase = SessionPhase::HumanTurn;
        self.events.push(SessionEvent::RobotStep { round: self.episode.round(), step, action, outcome });
        Ok(mv)
    }

    pub fn human_step(&mut self, action: AgentAction) -> Result<(ActionOutcome, Option<RoundResult>), SessionError> {
        if self.phase != SessionPhase::HumanTurn {
            return Err(SessionError::Conflict(format!("human moves are not accepted in phase {:?}", self.phase)));
        }
        action.check_item(self.ctx.domain.num_items).map_err(|e| SessionError::Invalid(e.to_string()))?;
        let round = self.episode.round();
        let step = self.episode.world().step;
        let outcome = self.episode.human_turn(action, &mut self.rng)?;
        self.last_human = Some(MoveView { action, outcome });
        self.events.push(SessionEvent::HumanStep { round, step, action, outcome });

        if !self.ctx.domain.is_terminal(self.episode.world()) {
            self.phase = SessionPhase::RobotTurn;
            return Ok((outcome, None));
        }

        let log = self.episode.log();
        let result = RoundResult {
            round,
            task_reward: log.task_reward,
            psi_correctness: log.psi_correctness,
            phi_correctness: log.phi_correctness,
        };
        self.events.push(SessionEvent::RoundClosed { round, theta: log.theta, task_reward: log.task_reward });
        self.psi = self.episode.psi().clone();
        self.phi = self.episode.phi().clone();
        self.ledger.push(result.clone());
        self.logs.push(log);

        if round + 1 < self.settings.rounds {
            self.episode = self.ctx.begin_round(&self.psi, &self.phi, round + 1, &mut self.rng)?;
            self.events.push(SessionEvent::RoundStarted { round: round + 1 });
            self.phase = SessionPhase::RoundOver;
        } else {
            self.phase = SessionPhase::Done;
        }
        Ok((outcome, Some(result)))
    }

    pub fn view(&self, role: ViewRole) -> SessionView {
        let snapshot = self.episode.belief().snapshot();
        let world = self.episode.world();
        SessionView {
            session_id: self.id.clone(),
            role,
            scenario: self.ctx.scenario.name.clone(),
            mode: self.settings.mode,
            items: self.ctx.scenario.items.clone(),
            horizon: self.ctx.domain.horizon,
            round: self.episode.round(),
            total_rounds: self.settings.rounds,
            step: world.step,
            phase: self.phase,
            bag: world.bag.clone(),
            shopping_list: match role {
                ViewRole::Human => Some(self.ctx.domain.lists[self.episode.theta()].required.clone()),
                ViewRole::Spectator => None,
            },
            theta_marginal: snapshot.theta_marginal,
            psi_expectation: snapshot.psi_expectation,
            phi_expectation: snapshot.phi_expectation,
            true_capabilities: (self.phase == SessionPhase::Done).then(|| TrueCapabilities {
                human: self.ctx.scenario.human_capability.clone(),
                robot: self.ctx.scenario.robot_capability.clone(),
            }),
            last_robot: self.last_robot,
            last_human: self.last_human,
            ledger: self.ledger.clone(),
            action_log: self.episode.steps().to_vec(),
        }
    }
}
