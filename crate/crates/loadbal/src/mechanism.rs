//! Uniform dispatch over the implemented mechanisms, used by the verifiers,
//! the payment curves, and the CLI.

use crate::baselines::{run_greedy_identical, run_greedy_true, run_vcg};
use crate::core::{fixed_ordering, Instance, TieBreakOrder};
use crate::error::{Error, Result};
use crate::outcome::MechanismOutcome;
use crate::ppr::{run_ppr_with_order, PprConfig};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Mechanism {
    Ppr(PprConfig),
    Vcg,
    GreedyIdentical,
    GreedyTrue,
}

impl Mechanism {
    pub fn ppr_default() -> Self {
        Mechanism::Ppr(PprConfig::default())
    }

    pub fn ppr_with_base(base: Rational) -> Self {
        Mechanism::Ppr(PprConfig::with_base(base))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Ppr(_) => "ppr",
            Mechanism::Vcg => "vcg",
            Mechanism::GreedyIdentical => "greedy-identical",
            Mechanism::GreedyTrue => "greedy-true",
        }
    }

    /// Rounding base of the announcement step, when the mechanism has one.
    pub fn rounding_base(&self) -> Option<&Rational> {
        match self {
            Mechanism::Ppr(cfg) => Some(&cfg.rounding_base),
            _ => None,
        }
    }

    pub fn parse(name: &str, base: Rational) -> Result<Self> {
        match name {
            "ppr" => Ok(Mechanism::Ppr(PprConfig::with_base(base))),
            "vcg" => Ok(Mechanism::Vcg),
            "greedy-identical" => Ok(Mechanism::GreedyIdentical),
            "greedy-true" => Ok(Mechanism::GreedyTrue),
            other => Err(Error::Parse(format!("unknown mechanism {other:?}"))),
        }
    }

    /// Runs with the tie-break ordering fixed by the instance seed.
    pub fn run(&self, instance: &Instance) -> Result<MechanismOutcome> {
        let order = fixed_ordering(instance.seed, instance.num_machines());
        self.run_with_order(instance, &order)
    }

    pub fn run_with_order(
        &self,
        instance: &Instance,
        order: &TieBreakOrder,
    ) -> Result<MechanismOutcome> {
        match self {
            Mechanism::Ppr(cfg) => run_ppr_with_order(instance, cfg, order),
            Mechanism::Vcg => run_vcg(instance, order),
            Mechanism::GreedyIdentical => run_greedy_identical(instance, order),
            Mechanism::GreedyTrue => run_greedy_true(instance),
        }
    }
}
