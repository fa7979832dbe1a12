use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::episode::Stage;
use super::runner::RunLog;
use crate::planner::PlannerMode;

pub const TASK_REWARD: &str = "task_reward";
pub const THETA_LIKELIHOOD: &str = "theta_likelihood";
pub const PSI_CORRECTNESS: &str = "psi_correctness";
pub const PHI_CORRECTNESS: &str = "phi_correctness";
pub const ROBOT_SIGNALS: &str = "robot_signals";

pub const CSV_HEADER: &str = "run_id,seed,mode,stage,round,step,metric,value";

/// One tidy observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub run_id: usize,
    pub seed: u64,
    pub mode: PlannerMode,
    pub stage: Stage,
    pub round: usize,
    pub step: Option<u32>,
    pub metric: String,
    pub value: f64,
}

impl Record {
    pub fn from_run(run: &RunLog) -> Vec<Record> {
        let mut out = Vec::new();
        for log in &run.rounds {
            let rec = |step: Option<u32>, metric: &str, value: f64| Record {
                run_id: run.run_id,
                seed: run.seed,
                mode: run.mode,
                stage: log.stage,
                round: log.round,
                step,
                metric: metric.to_string(),
                value,
            };
            out.push(rec(None, TASK_REWARD, log.task_reward));
            out.push(rec(None, PSI_CORRECTNESS, log.psi_correctness));
            out.push(rec(None, PHI_CORRECTNESS, log.phi_correctness));
            out.push(rec(None, ROBOT_SIGNALS, log.robot_signals() as f64));
            for (step, &l) in log.theta_likelihood.iter().enumerate() {
                out.push(rec(Some(step as u32), THETA_LIKELIHOOD, l));
            }
        }
        out
    }

    pub fn to_csv_line(&self) -> String {
        let step = self.step.map(|s| s.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.run_id, self.seed, self.mode, self.stage, self.round, step, self.metric, self.value
        )
    }
}

pub fn records_to_csv(records: &[Record]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Sample mean and standard error; the error is absent for a single value.
pub fn mean_stderr(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mode: PlannerMode,
    pub stage: Stage,
    pub round: usize,
    pub step: Option<u32>,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub stderr: Option<f64>,
}

impl SummaryRow {
    pub fn csv_fields(&self) -> String {
        let step = self.step.map(|s| s.to_string()).unwrap_or_default();
        let se = self.stderr.map(|s| s.to_string()).unwrap_or_default();
        format!("{},{},{},{},{},{},{}", self.stage, self.round, step, self.metric, self.n, self.mean, se)
    }
}

/// Per-round (and per-step) mean and standard error over runs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub rows: Vec<SummaryRow>,
}

type GroupKey = (PlannerMode, usize, Option<u32>, String, Stage);

impl MetricsSummary {
    pub fn from_records(records: &[Record]) -> Self {
        let mut groups: BTreeMap<GroupKey, Vec<f64>> = BTreeMap::new();
        for r in records {
            let key = (r.mode, r.round, r.step, r.metric.clone(), r.stage);
            groups.entry(key).or_default().push(r.value);
        }
        let rows = groups
            .into_iter()
            .map(|((mode, round, step, metric, stage), values)| {
                let (mean, stderr) = mean_stderr(&values);
                SummaryRow { mode, stage, round, step, metric, n: values.len(), mean, stderr }
            })
            .collect();
        MetricsSummary { rows }
    }

    pub fn get(&self, metric: &str, round: usize, step: Option<u32>) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.metric == metric && r.round == round && r.step == step)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,stage,round,step,metric,n,mean,stderr\n");
        for row in &self.rows {
            out.push_str(&format!("{},{}\n", row.mode, row.csv_fields()));
        }
        out
    }
}

/// Mean over runs of each run's average `metric` within `stage`.
pub fn stage_mean(records: &[Record], metric: &str, stage: Stage) -> (f64, Option<f64>) {
    let mut per_run: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.metric == metric && r.stage == stage) {
        let e = per_run.entry(r.run_id).or_insert((0.0, 0));
        e.0 += r.value;
        e.1 += 1;
    }
    let means: Vec<f64> = per_run.values().map(|(s, n)| s / *n as f64).collect();
    mean_stderr(&means)
}

/// Per-step mean of `metric` pooled over every run and round of `stage`.
/// Standard errors use per-run averages as the independent unit.
pub fn step_curve(records: &[Record], metric: &str, stage: Stage) -> Vec<(u32, f64, Option<f64>)> {
    let mut by_step: BTreeMap<u32, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.metric == metric && r.stage == stage) {
        if let Some(step) = r.step {
            let e = by_step.entry(step).or_default().entry(r.run_id).or_insert((0.0, 0));
            e.0 += r.value;
            e.1 += 1;
        }
    }
    by_step
        .into_iter()
        .map(|(step, runs)| {
            let means: Vec<f64> = runs.values().map(|(s, n)| s / *n as f64).collect();
            let (m, se) = mean_stderr(&means);
            (step, m, se)
        })
        .collect()
}

/// Per-round mean of a per-round metric over runs.
pub fn round_curve(records: &[Record], metric: &str) -> Vec<(usize, f64, Option<f64>)> {
    let mut by_round: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.metric == metric && r.step.is_none()) {
        by_round.entry(r.round).or_default().push(r.value);
    }
    by_round
        .into_iter()
        .map(|(round, v)| {
            let (m, se) = mean_stderr(&v);
            (round, m, se)
        })
        .collect()
}
