//! Naive truthful mechanisms: the second-price VCG-style allocation, Greedy
//! pretending all machines are identical, and Greedy on true speeds (the
//! non-well-behaved foil).

use num_traits::Zero;

use crate::core::{Instance, ScheduleState, SpeedBasis, TieBreakOrder};
use crate::error::Result;
use crate::outcome::{MechanismOutcome, PriceVector, StepTrace};
use crate::rational::{rat_int, Rational};

/// All jobs go to the highest-claimed-speed machine (ties by the pre-fixed
/// ordering); the winner is paid the total reported size divided by the
/// second-highest claimed speed. Jobs are never charged.
pub fn run_vcg(instance: &Instance, order: &TieBreakOrder) -> Result<MechanismOutcome> {
    instance.validate()?;
    let m = instance.num_machines();
    let winner = (0..m)
        .min_by(|&a, &b| {
            instance.machines[b]
                .claimed_speed
                .cmp(&instance.machines[a].claimed_speed)
                .then(order.rank(a).cmp(&order.rank(b)))
        })
        .expect("at least one machine");
    let speeds = instance
        .machines
        .iter()
        .map(|mm| (mm.true_speed.clone(), mm.claimed_speed.clone()))
        .collect();
    let mut state = ScheduleState::new(speeds);
    let mut steps = Vec::with_capacity(instance.num_jobs());
    for (j, job) in instance.jobs.iter().enumerate() {
        let before = state.machines[winner].makespan(SpeedBasis::Announced);
        state.apply_assignment(
            j,
            winner,
            job.reported_size.clone(),
            job.true_size.clone(),
            rat_int(0),
        )?;
        steps.push(StepTrace {
            job: j,
            reported_size: job.reported_size.clone(),
            prices: PriceVector::zero(m),
            chosen: winner,
            charge: rat_int(0),
            cost: before + &job.true_size / &state.machines[winner].announced_speed,
            makespans: state.makespans(SpeedBasis::Announced),
        });
    }
    let winner_payment = if m >= 2 {
        let mut others: Vec<&Rational> = instance
            .machines
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != winner)
            .map(|(_, mm)| &mm.claimed_speed)
            .collect();
        others.sort();
        let second = others.last().expect("m >= 2");
        let total: Rational = instance
            .jobs
            .iter()
            .fold(Rational::zero(), |acc, j| acc + &j.reported_size);
        Some((winner, total / *second))
    } else {
        None
    };
    Ok(MechanismOutcome {
        state,
        steps,
        winner_payment,
    })
}

/// Announces speed 1 for every machine and runs Greedy on identical machines:
/// each job to the machine with minimum current workload, ties by the
/// pre-fixed ordering.
pub fn run_greedy_identical(instance: &Instance, order: &TieBreakOrder) -> Result<MechanismOutcome> {
    instance.validate()?;
    let m = instance.num_machines();
    let speeds = instance
        .machines
        .iter()
        .map(|mm| (mm.true_speed.clone(), rat_int(1)))
        .collect();
    let mut state = ScheduleState::new(speeds);
    let mut steps = Vec::with_capacity(instance.num_jobs());
    for (j, job) in instance.jobs.iter().enumerate() {
        let chosen = (0..m)
            .min_by(|&a, &b| {
                state.machines[a]
                    .workload
                    .cmp(&state.machines[b].workload)
                    .then(order.rank(a).cmp(&order.rank(b)))
            })
            .expect("at least one machine");
        let before = state.machines[chosen].makespan(SpeedBasis::Announced);
        state.apply_assignment(
            j,
            chosen,
            job.reported_size.clone(),
            job.true_size.clone(),
            rat_int(0),
        )?;
        steps.push(StepTrace {
            job: j,
            reported_size: job.reported_size.clone(),
            prices: PriceVector::zero(m),
            chosen,
            charge: rat_int(0),
            cost: before + &job.true_size,
            makespans: state.makespans(SpeedBasis::Announced),
        });
    }
    Ok(MechanismOutcome {
        state,
        steps,
        winner_payment: None,
    })
}

/// Greedy on true (claimed) speeds: each job to the machine that finishes it
/// the earliest, ties broken by machine identity.
pub fn run_greedy_true(instance: &Instance) -> Result<MechanismOutcome> {
    instance.validate()?;
    let m = instance.num_machines();
    let speeds = instance
        .machines
        .iter()
        .map(|mm| (mm.true_speed.clone(), mm.claimed_speed.clone()))
        .collect();
    let mut state = ScheduleState::new(speeds);
    let mut steps = Vec::with_capacity(instance.num_jobs());
    for (j, job) in instance.jobs.iter().enumerate() {
        let chosen = (0..m)
            .min_by(|&a, &b| {
                let fa = state.machines[a].makespan(SpeedBasis::Announced)
                    + &job.reported_size / &state.machines[a].announced_speed;
                let fb = state.machines[b].makespan(SpeedBasis::Announced)
                    + &job.reported_size / &state.machines[b].announced_speed;
                fa.cmp(&fb).then(a.cmp(&b))
            })
            .expect("at least one machine");
        let before = state.machines[chosen].makespan(SpeedBasis::Announced);
        state.apply_assignment(
            j,
            chosen,
            job.reported_size.clone(),
            job.true_size.clone(),
            rat_int(0),
        )?;
        steps.push(StepTrace {
            job: j,
            reported_size: job.reported_size.clone(),
            prices: PriceVector::zero(m),
            chosen,
            charge: rat_int(0),
            cost: before + &job.true_size / &state.machines[chosen].announced_speed,
            makespans: state.makespans(SpeedBasis::Announced),
        });
    }
    Ok(MechanismOutcome {
        state,
        steps,
        winner_payment: None,
    })
}
