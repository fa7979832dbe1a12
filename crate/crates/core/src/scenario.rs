//! Named scenario fixtures: item types, candidate lists, true capabilities.
//!
//! The data lives in `fixtures/*.toml`. `setup3-<n>` scenarios are derived
//! from `setup1` by keeping its first `n` lists.

use serde::{Deserialize, Serialize};

use crate::domain::{ShoppingDomain, ShoppingList, TrueCapability};
use crate::error::{Result, TiccError};
use crate::scalar::Real;

const BUNDLED: &[(&str, &str)] = &[
    ("setup1", include_str!("../fixtures/setup1.toml")),
    ("setup2-2", include_str!("../fixtures/setup2-2.toml")),
    ("setup2-3", include_str!("../fixtures/setup2-3.toml")),
    ("setup2-4", include_str!("../fixtures/setup2-4.toml")),
    ("setup2-5", include_str!("../fixtures/setup2-5.toml")),
    ("human-study", include_str!("../fixtures/human-study.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub horizon: u32,
    pub items: Vec<String>,
    pub lists: Vec<Vec<u32>>,
    pub human_capability: Vec<f64>,
    pub robot_capability: Vec<f64>,
}

impl Scenario {
    pub fn known_names() -> Vec<String> {
        let mut names: Vec<String> = BUNDLED.iter().map(|(n, _)| n.to_string()).collect();
        names.extend((5..=10).map(|n| format!("setup3-{n}")));
        names
    }

    pub fn named(name: &str) -> Result<Self> {
        if let Some((_, text)) = BUNDLED.iter().find(|(n, _)| *n == name) {
            return Self::from_toml(text);
        }
        if let Some(n) = name.strip_prefix("setup3-").and_then(|n| n.parse::<usize>().ok()) {
            if (5..=10).contains(&n) {
                return Self::named("setup1").map(|s| s.first_lists(n, name));
            }
        }
        Err(TiccError::UnknownScenario { name: name.to_string(), known: Self::known_names().join(", ") })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| TiccError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    fn first_lists(mut self, n: usize, name: &str) -> Self {
        self.lists.truncate(n);
        self.name = name.to_string();
        self
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.items.len();
        for len in [self.human_capability.len(), self.robot_capability.len()] {
            if len != n {
                return Err(TiccError::LengthMismatch(len, n));
            }
        }
        self.domain::<f64>()?;
        TrueCapability::new(self.human_capability.clone())?;
        TrueCapability::new(self.robot_capability.clone())?;
        Ok(())
    }

    pub fn domain<T: Real>(&self) -> Result<ShoppingDomain<T>> {
        let lists = self.lists.iter().cloned().map(ShoppingList::new).collect::<Result<Vec<_>>>()?;
        ShoppingDomain::new(self.items.len(), self.horizon, lists)
    }

    pub fn human_truth<T: Real>(&self) -> TrueCapability<T> {
        TrueCapability { success_prob: self.human_capability.iter().map(|&p| T::of(p)).collect() }
    }

    pub fn robot_truth<T: Real>(&self) -> TrueCapability<T> {
        TrueCapability { success_prob: self.robot_capability.iter().map(|&p| T::of(p)).collect() }
    }
}
