//! The dynamic posted-price mechanism: speeds are announced rounded down to
//! powers of a configurable base, prices are recomputed from the current
//! makespans before every arrival, and each job picks the machine minimizing
//! its own cost (completion time plus price).
//!
//! With base 1 the rounding is the identity and the run is the strictly
//! well-behaved variant; base 4 is the two-machine truthful variant.

use num_traits::{One, Zero};

use crate::core::{fixed_ordering, Instance, ScheduleState, SpeedBasis, TieBreakOrder};
use crate::error::{Error, Result};
use crate::outcome::{MechanismOutcome, PriceVector, StepTrace};
use crate::rational::{rat_int, Rational};

/// How exact cost ties in the job's choice are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostTieRule {
    /// Higher announced speed wins, then the pre-fixed ordering.
    PreferFaster,
    /// Lower announced speed wins, then the pre-fixed ordering.
    PreferSlower,
    /// The pre-fixed ordering alone.
    PreferOrder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PprConfig {
    /// Rounding base, >= 1. Base 1 means no rounding.
    pub rounding_base: Rational,
    pub cost_tie: CostTieRule,
}

impl Default for PprConfig {
    fn default() -> Self {
        PprConfig {
            rounding_base: rat_int(2),
            cost_tie: CostTieRule::PreferFaster,
        }
    }
}

impl PprConfig {
    pub fn with_base(base: Rational) -> Self {
        PprConfig {
            rounding_base: base,
            ..Default::default()
        }
    }
}

/// Largest integer power of `base` that is <= `s`; `s` itself when base = 1.
pub fn round_speed(s: &Rational, base: &Rational) -> Rational {
    assert!(*s > Rational::zero(), "speed must be positive");
    assert!(*base >= Rational::one(), "rounding base must be >= 1");
    if base.is_one() {
        return s.clone();
    }
    let mut p = Rational::one();
    if *s >= Rational::one() {
        loop {
            let next = &p * base;
            if next > *s {
                return p;
            }
            p = next;
        }
    } else {
        while p > *s {
            p /= base;
        }
        p
    }
}

/// One machine per announced-speed class is open to the next job: the one
/// with minimum makespan, ties by the pre-fixed ordering. Returned sorted by
/// announced speed ascending, so the active speeds are pairwise distinct.
pub fn active_machines(state: &ScheduleState, order: &TieBreakOrder) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for (i, m) in state.machines.iter().enumerate() {
        match best
            .iter()
            .position(|&b| state.machines[b].announced_speed == m.announced_speed)
        {
            None => best.push(i),
            Some(pos) => {
                let b = best[pos];
                let cb = state.machines[b].makespan(SpeedBasis::Announced);
                let ci = m.makespan(SpeedBasis::Announced);
                if (ci.clone(), order.rank(i)) < (cb, order.rank(b)) {
                    best[pos] = i;
                }
            }
        }
    }
    best.sort_by(|&a, &b| {
        state.machines[a]
            .announced_speed
            .cmp(&state.machines[b].announced_speed)
    });
    best
}

/// Dynamic prices from the current makespans: over active machines sorted by
/// announced speed, `pi_i = (s_i/s_{i+1}) * (C_{i+1} - C_i)` and
/// `rho_i = sum of pi_l for l >= i`, with the fastest active machine priced 0
/// and inactive machines priced infinity. Depends only on the state, never on
/// the incoming job.
pub fn compute_prices(state: &ScheduleState, order: &TieBreakOrder) -> Result<PriceVector> {
    let active = active_machines(state, order);
    let mut increments: Vec<(usize, Rational)> = Vec::with_capacity(active.len());
    for w in active.windows(2) {
        let (i, next) = (w[0], w[1]);
        let si = &state.machines[i].announced_speed;
        let sn = &state.machines[next].announced_speed;
        let ci = state.machines[i].makespan(SpeedBasis::Announced);
        let cn = state.machines[next].makespan(SpeedBasis::Announced);
        let pi = si / sn * (cn - ci);
        if pi < Rational::zero() {
            return Err(Error::NotWellBehaved { machine: i });
        }
        increments.push((i, pi));
    }
    if let Some(&last) = active.last() {
        increments.push((last, Rational::zero()));
    }
    let mut prices: Vec<Option<Rational>> = vec![None; state.num_machines()];
    let mut suffix = Rational::zero();
    for (i, pi) in increments.iter().rev() {
        suffix += pi;
        prices[*i] = Some(suffix.clone());
    }
    Ok(PriceVector { prices, increments })
}

/// Argmin over finite-price machines of `C_i + p/s_i + rho_i` on announced
/// speeds, exact ties resolved by `rule`.
pub fn selfish_choice(
    state: &ScheduleState,
    prices: &PriceVector,
    reported_size: &Rational,
    rule: CostTieRule,
    order: &TieBreakOrder,
) -> Result<usize> {
    // Under PreferFaster, a faster active machine with no larger completion
    // time dominates: its completion term and its price surcharge are both
    // no larger, and ties resolve toward it. Pruning dominated machines
    // keeps the scan linear in the number of distinct completion times.
    let candidates: Vec<usize> = if rule == CostTieRule::PreferFaster {
        let mut active: Vec<usize> = (0..prices.prices.len())
            .filter(|&i| prices.prices[i].is_some())
            .collect();
        active.sort_by(|&a, &b| {
            state.machines[b]
                .announced_speed
                .cmp(&state.machines[a].announced_speed)
        });
        let mut keep = Vec::new();
        let mut min_c: Option<Rational> = None;
        for i in active {
            let c = state.machines[i].makespan(SpeedBasis::Announced);
            if min_c.as_ref().map_or(true, |mc| c < *mc) {
                keep.push(i);
                min_c = Some(c);
            }
        }
        keep
    } else {
        (0..prices.prices.len())
            .filter(|&i| prices.prices[i].is_some())
            .collect()
    };
    let mut best: Option<(Rational, usize)> = None;
    for i in candidates {
        let rho = prices.prices[i].as_ref().unwrap();
        let m = &state.machines[i];
        let cost = m.makespan(SpeedBasis::Announced) + reported_size / &m.announced_speed + rho;
        let better = match &best {
            None => true,
            Some((bc, bi)) => match cost.cmp(bc) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => {
                    let (si, sb) = (
                        &state.machines[i].announced_speed,
                        &state.machines[*bi].announced_speed,
                    );
                    match rule {
                        CostTieRule::PreferFaster => {
                            si > sb || (si == sb && order.rank(i) < order.rank(*bi))
                        }
                        CostTieRule::PreferSlower => {
                            si < sb || (si == sb && order.rank(i) < order.rank(*bi))
                        }
                        CostTieRule::PreferOrder => order.rank(i) < order.rank(*bi),
                    }
                }
            },
        };
        if better {
            best = Some((cost, i));
        }
    }
    best.map(|(_, i)| i).ok_or(Error::NoFinitePrice)
}

/// Full online run of the posted-price mechanism.
pub fn run_ppr(instance: &Instance, config: &PprConfig) -> Result<MechanismOutcome> {
    let order = fixed_ordering(instance.seed, instance.num_machines());
    run_ppr_with_order(instance, config, &order)
}

pub fn run_ppr_with_order(
    instance: &Instance,
    config: &PprConfig,
    order: &TieBreakOrder,
) -> Result<MechanismOutcome> {
    instance.validate()?;
    let speeds: Vec<(Rational, Rational)> = instance
        .machines
        .iter()
        .map(|m| {
            (
                m.true_speed.clone(),
                round_speed(&m.claimed_speed, &config.rounding_base),
            )
        })
        .collect();
    let mut state = ScheduleState::new(speeds);
    let mut steps = Vec::with_capacity(instance.num_jobs());
    for (j, job) in instance.jobs.iter().enumerate() {
        let prices = compute_prices(&state, order)?;
        let chosen = selfish_choice(&state, &prices, &job.reported_size, config.cost_tie, order)?;
        let charge = prices.prices[chosen]
            .clone()
            .ok_or(Error::NoFinitePrice)?;
        let machine = &state.machines[chosen];
        let cost = machine.makespan(SpeedBasis::Announced)
            + &job.true_size / &machine.announced_speed
            + &charge;
        state.apply_assignment(
            j,
            chosen,
            job.reported_size.clone(),
            job.true_size.clone(),
            charge.clone(),
        )?;
        steps.push(StepTrace {
            job: j,
            reported_size: job.reported_size.clone(),
            prices,
            chosen,
            charge,
            cost,
            makespans: state.makespans(SpeedBasis::Announced),
        });
    }
    Ok(MechanismOutcome {
        state,
        steps,
        winner_payment: None,
    })
}
