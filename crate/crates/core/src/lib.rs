//! Planning for human-robot collaboration when neither partner knows the
//! other's capabilities.
//!
//! The robot keeps a particle belief over the human's hidden goal (which
//! shopping list is active) together with Dirichlet counts over the human's
//! capability and over what the human believes about the robot. An online
//! Monte-Carlo tree search plans over that augmented state, rewarding both
//! task progress and keeping the human's picture of the robot accurate.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod belief;
pub mod capability;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod human;
pub mod planner;
pub mod scalar;
pub mod scenario;
pub mod session;

pub use domain::{ActionOutcome, AgentAction, ItemId, ShoppingList, WorldState};
pub use error::{Result, TiccError};
pub use planner::{HumanLink, PlannerMode};
pub use scalar::Real;
pub use scenario::Scenario;

pub type ShoppingDomain = domain::ShoppingDomain<f64>;
pub type TrueCapability = domain::TrueCapability<f64>;
pub type CapabilityCounts = capability::CapabilityCounts<f64>;
pub type AugmentedState = belief::AugmentedState<f64>;
pub type Belief = belief::Belief<f64>;
pub type Planner = planner::Planner<f64>;
pub type PlannerConfig = planner::PlannerConfig<f64>;
pub type HumanAgent = human::HumanAgent<f64>;
pub type ExperimentConfig = experiment::ExperimentConfig<f64>;
pub type Episode = experiment::Episode<f64>;
pub type Session = session::Session<f64>;
