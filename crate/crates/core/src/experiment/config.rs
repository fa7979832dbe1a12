use serde::{Deserialize, Serialize};

use crate::error::{Result, TiccError};
use crate::human::HumanPolicy;
use crate::planner::{PlannerConfig, PlannerMode};
use crate::scalar::Real;
use crate::scenario::Scenario;

/// A bundled scenario by name, or a full inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Named(String),
    Inline(Scenario),
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<Scenario> {
        match self {
            ScenarioRef::Named(name) => Scenario::named(name),
            ScenarioRef::Inline(s) => {
                s.validate()?;
                Ok(s.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ExperimentConfig<T> {
    pub scenario: ScenarioRef,
    /// Overrides the scenario's horizon.
    pub horizon: Option<u32>,
    pub excess_penalty: T,
    pub learning_rounds: usize,
    pub evaluation_rounds: usize,
    pub num_runs: usize,
    pub seed: u64,
    pub num_particles: usize,
    pub human_policy: HumanPolicy,
    pub signal_threshold: T,
    pub planner: PlannerConfig<T>,
}

impl<T: Real> Default for ExperimentConfig<T> {
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioRef::Named("setup1".into()),
            horizon: None,
            excess_penalty: T::of(0.5),
            learning_rounds: 5,
            evaluation_rounds: 5,
            num_runs: 50,
            seed: 0,
            num_particles: 1000,
            human_policy: HumanPolicy::RationalMyopic,
            signal_threshold: T::of(0.1),
            planner: PlannerConfig::default(),
        }
    }
}

impl<T: Real> ExperimentConfig<T> {
    pub fn for_scenario(name: &str) -> Self {
        ExperimentConfig { scenario: ScenarioRef::Named(name.to_string()), ..Default::default() }
    }

    /// Reduced-fidelity preset: 10 runs at 10k samples.
    pub fn quick(mut self) -> Self {
        self.num_runs = 10;
        self.planner.num_samples = 10_000;
        self
    }

    pub fn with_mode(mut self, mode: PlannerMode) -> Self {
        self.planner = self.planner.with_mode(mode);
        self
    }

    pub fn total_rounds(&self) -> usize {
        self.learning_rounds + self.evaluation_rounds
    }

    pub fn from_toml(text: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let cfg: Self = toml::from_str(text).map_err(|e| TiccError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String
    where
        T: Serialize,
    {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.resolve()?;
        self.planner.validate()?;
        if self.num_runs == 0 {
            return Err(TiccError::Config("num_runs must be at least 1".into()));
        }
        if self.total_rounds() == 0 {
            return Err(TiccError::Config("at least one round is required".into()));
        }
        if self.num_particles == 0 {
            return Err(TiccError::Config("num_particles must be at least 1".into()));
        }
        if self.horizon == Some(0) {
            return Err(TiccError::Config("horizon must be positive".into()));
        }
        Ok(())
    }

    pub fn resolved_scenario(&self) -> Result<Scenario> {
        let mut s = self.scenario.resolve()?;
        if let Some(h) = self.horizon {
            s.horizon = h;
        }
        Ok(s)
    }
}
