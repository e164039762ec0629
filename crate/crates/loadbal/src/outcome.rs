//! Full run traces: per-step prices, choices, charges, and final makespans.

use crate::core::{ScheduleState, SpeedBasis};
use crate::rational::Rational;

/// Posted prices at one step. `None` encodes an infinite price (the machine
/// is closed to the next job).
#[derive(Clone, Debug, PartialEq)]
pub struct PriceVector {
    pub prices: Vec<Option<Rational>>,
    /// Adjacent-pair increments `(machine, pi)` over the active machines,
    /// sorted by announced speed ascending.
    pub increments: Vec<(usize, Rational)>,
}

impl PriceVector {
    pub fn zero(m: usize) -> Self {
        PriceVector {
            prices: vec![Some(Rational::from_integer(0.into())); m],
            increments: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub job: usize,
    pub reported_size: Rational,
    pub prices: PriceVector,
    pub chosen: usize,
    pub charge: Rational,
    /// Realized cost of the job: completion time with its true size on the
    /// chosen machine (announced speed) plus the charge.
    pub cost: Rational,
    /// Announced-speed makespans after the assignment.
    pub makespans: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MechanismOutcome {
    pub state: ScheduleState,
    pub steps: Vec<StepTrace>,
    /// VCG winner payment `(machine, amount)`; absent for other mechanisms
    /// and for m = 1 (no second-highest speed).
    pub winner_payment: Option<(usize, Rational)>,
}

impl MechanismOutcome {
    pub fn alg(&self, basis: SpeedBasis) -> Rational {
        self.state.makespan(basis)
    }

    pub fn assignments(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.chosen).collect()
    }

    pub fn job_cost(&self, job: usize) -> Option<&Rational> {
        self.steps.iter().find(|s| s.job == job).map(|s| &s.cost)
    }
}
