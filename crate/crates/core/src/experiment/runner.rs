use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::episode::{Episode, EpisodeLog, Stage};
use super::metrics::{MetricsSummary, Record};
use crate::capability::CapabilityCounts;
use crate::domain::{ShoppingDomain, TrueCapability};
use crate::error::{Result, TiccError};
use crate::human::HumanAgent;
use crate::planner::PlannerMode;
use crate::scalar::Real;
use crate::scenario::Scenario;

/// Capability beliefs that survive from one round to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Carryover<T> {
    /// Robot's ψ and tracked φ.
    pub psi: CapabilityCounts<T>,
    pub phi: CapabilityCounts<T>,
    pub human: HumanAgent<T>,
}

/// Everything a run needs that does not change between rounds.
pub struct RunContext<T> {
    pub config: ExperimentConfig<T>,
    pub scenario: Scenario,
    pub domain: Arc<ShoppingDomain<T>>,
    pub human_truth: TrueCapability<T>,
    pub robot_truth: TrueCapability<T>,
}

impl<T: Real> RunContext<T> {
    pub fn new(config: &ExperimentConfig<T>) -> Result<Self> {
        config.validate()?;
        let scenario = config.resolved_scenario()?;
        let domain = Arc::new(scenario.domain::<T>()?.with_excess_penalty(config.excess_penalty));
        Ok(RunContext {
            config: config.clone(),
            human_truth: scenario.human_truth(),
            robot_truth: scenario.robot_truth(),
            scenario,
            domain,
        })
    }

    pub fn initial_carryover(&self) -> Carryover<T> {
        let n = self.domain.num_items;
        let human = HumanAgent::new(
            self.human_truth.clone(),
            0,
            CapabilityCounts::perfect(n),
            self.config.human_policy.clone(),
        )
        .with_threshold(self.config.signal_threshold);
        Carryover { psi: CapabilityCounts::perfect(n), phi: CapabilityCounts::perfect(n), human }
    }

    pub fn stage_of(&self, round: usize) -> Stage {
        if round < self.config.learning_rounds {
            Stage::Learning
        } else {
            Stage::Evaluation
        }
    }

    /// Starts round `round` with a freshly drawn θ.
    pub fn begin_round<R: Rng + ?Sized>(
        &self,
        psi: &CapabilityCounts<T>,
        phi: &CapabilityCounts<T>,
        round: usize,
        rng: &mut R,
    ) -> Result<Episode<T>> {
        let theta = rng.gen_range(0..self.domain.num_lists());
        Episode::begin(
            self.domain.clone(),
            self.human_truth.clone(),
            self.robot_truth.clone(),
            self.config.planner.clone(),
            psi.clone(),
            phi.clone(),
            self.config.num_particles,
            theta,
            round,
            self.stage_of(round),
        )
    }
}

/// Plays one round against the simulated human and updates the carryover.
pub fn run_round<T: Real, R: Rng + ?Sized>(
    ctx: &RunContext<T>,
    carry: &mut Carryover<T>,
    round: usize,
    rng: &mut R,
) -> Result<EpisodeLog> {
    let mut episode = ctx.begin_round(&carry.psi, &carry.phi, round, rng)?;
    carry.human.begin_round(episode.theta());
    while !ctx.domain.is_terminal(episode.world()) {
        let (robot_action, robot_outcome) = episode.robot_turn(rng)?;
        carry.human.observe_robot(robot_action, robot_outcome)?;
        let human_action = carry.human.act(&ctx.domain, episode.world())?;
        episode.human_turn(human_action, rng)?;
    }
    carry.psi = episode.psi().clone();
    carry.phi = episode.phi().clone();
    Ok(episode.log())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub run_id: usize,
    pub seed: u64,
    pub mode: PlannerMode,
    pub rounds: Vec<EpisodeLog>,
    /// Diagnostic if the run was aborted; completed rounds are kept.
    pub aborted: Option<String>,
}

/// Per-run seed derived from the master seed (SplitMix64 of master + run index).
pub fn run_seed(master: u64, run_id: usize) -> u64 {
    let mut z = master.wrapping_add((run_id as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One run: learning then evaluation rounds with carried-over capability beliefs.
pub fn run_single<T: Real>(ctx: &RunContext<T>, run_id: usize, seed: u64) -> RunLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut carry = ctx.initial_carryover();
    let mut rounds = Vec::with_capacity(ctx.config.total_rounds());
    let mut aborted = None;
    for round in 0..ctx.config.total_rounds() {
        match run_round(ctx, &mut carry, round, &mut rng) {
            Ok(log) => rounds.push(log),
            Err(e) => {
                aborted = Some(format!("round {round}: {e}"));
                break;
            }
        }
    }
    RunLog { run_id, seed, mode: ctx.config.planner.mode, rounds, aborted }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub runs: Vec<RunLog>,
    pub summary: MetricsSummary,
}

impl ExperimentResult {
    pub fn completed(&self) -> impl Iterator<Item = &RunLog> {
        self.runs.iter().filter(|r| r.aborted.is_none())
    }

    pub fn aborted_seeds(&self) -> Vec<u64> {
        self.runs.iter().filter(|r| r.aborted.is_some()).map(|r| r.seed).collect()
    }

    pub fn records(&self) -> Vec<Record> {
        self.completed().flat_map(Record::from_run).collect()
    }

    pub fn to_csv(&self) -> String {
        super::metrics::records_to_csv(&self.records())
    }
}

/// Runs `num_runs` independent seeded runs; runs execute in parallel but the
/// result depends only on the configuration.
pub fn run_experiment<T: Real>(config: &ExperimentConfig<T>) -> Result<ExperimentResult> {
    let ctx = RunContext::new(config)?;
    let runs: Vec<RunLog> = (0..config.num_runs)
        .into_par_iter()
        .map(|run_id| run_single(&ctx, run_id, run_seed(config.seed, run_id)))
        .collect();
    let records: Vec<Record> = runs.iter().filter(|r| r.aborted.is_none()).flat_map(Record::from_run).collect();
    let summary = MetricsSummary::from_records(&records);
    Ok(ExperimentResult { runs, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Samples,
    Items,
    Lists,
}

impl std::str::FromStr for SweepAxis {
    type Err = TiccError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "samples" => Ok(SweepAxis::Samples),
            "items" => Ok(SweepAxis::Items),
            "lists" => Ok(SweepAxis::Lists),
            other => Err(TiccError::Config(format!("unknown sweep axis `{other}` (samples|items|lists)"))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Samples => "samples",
            SweepAxis::Items => "items",
            SweepAxis::Lists => "lists",
        })
    }
}

/// The configuration for one cell of a sweep.
pub fn sweep_cell<T: Real>(base: &ExperimentConfig<T>, axis: SweepAxis, value: usize, mode: PlannerMode) -> Result<ExperimentConfig<T>> {
    let mut cfg = base.clone().with_mode(mode);
    match axis {
        SweepAxis::Samples => {
            if !(5_000..=50_000).contains(&value) {
                return Err(TiccError::Config(format!("samples {value} outside 5000..=50000")));
            }
            cfg.planner.num_samples = value;
        }
        SweepAxis::Items => {
            if !(2..=5).contains(&value) {
                return Err(TiccError::Config(format!("item types {value} outside 2..=5")));
            }
            cfg.scenario = super::config::ScenarioRef::Named(format!("setup2-{value}"));
        }
        SweepAxis::Lists => {
            if !(5..=10).contains(&value) {
                return Err(TiccError::Config(format!("lists {value} outside 5..=10")));
            }
            cfg.scenario = super::config::ScenarioRef::Named(format!("setup3-{value}"));
        }
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub value: usize,
    pub mode: PlannerMode,
    pub result: ExperimentResult,
}

/// One experiment per (value, mode).
pub fn sweep<T: Real>(
    base: &ExperimentConfig<T>,
    axis: SweepAxis,
    values: &[usize],
    modes: &[PlannerMode],
) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    for &value in values {
        for &mode in modes {
            let cfg = sweep_cell(base, axis, value, mode)?;
            cells.push(SweepCell { value, mode, result: run_experiment(&cfg)? });
        }
    }
    Ok(cells)
}

pub fn sweep_csv(axis: SweepAxis, cells: &[SweepCell]) -> String {
    let mut out = String::from("axis,value,mode,stage,round,step,metric,n,mean,stderr\n");
    for cell in cells {
        for row in &cell.result.summary.rows {
            out.push_str(&format!("{axis},{},{},{}\n", cell.value, cell.mode, row.csv_fields()));
        }
    }
    out
}

/// Outcome of re-executing a recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub identical: bool,
    /// First differing round, if any.
    pub first_difference: Option<usize>,
    pub replayed: RunLog,
}

/// Re-runs `log` from its seed under `config` and compares round by round.
pub fn replay<T: Real>(config: &ExperimentConfig<T>, log: &RunLog) -> Result<ReplayReport> {
    let ctx = RunContext::new(config)?;
    let replayed = run_single(&ctx, log.run_id, log.seed);
    let first_difference = (0..log.rounds.len().max(replayed.rounds.len()))
        .find(|&k| log.rounds.get(k) != replayed.rounds.get(k));
    Ok(ReplayReport { identical: first_difference.is_none() && log.aborted == replayed.aborted, first_difference, replayed })
}

/// Self-contained record of a run, suitable for `replay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct RunFile<T> {
    pub config: ExperimentConfig<T>,
    pub run: RunLog,
}
