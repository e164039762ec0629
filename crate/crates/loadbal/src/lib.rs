//! Simulation and verification library for online load balancing mechanisms
//! on related machines with strategic jobs: a dynamic posted-price mechanism
//! with rounded speed announcements, naive truthful baselines, an offline
//! optimum oracle, machine payments from workload curves, and checkers for
//! well-behavior, fairness, anonymity, monotonicity, and truthfulness.

pub mod baselines;
pub mod core;
pub mod error;
pub mod generators;
pub mod jsonio;
pub mod mechanism;
pub mod opt;
pub mod outcome;
pub mod payments;
pub mod ppr;
pub mod rational;
pub mod verify;

pub use crate::core::{fixed_ordering, Instance, Job, Machine, ScheduleState, SpeedBasis, TieBreakOrder};
pub use crate::error::{Error, Result};
pub use crate::mechanism::Mechanism;
pub use crate::outcome::MechanismOutcome;
pub use crate::ppr::{CostTieRule, PprConfig};
pub use crate::rational::Rational;
