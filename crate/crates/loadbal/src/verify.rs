//! Property checkers: well-behavior (strong and weak), fairness between
//! equal-speed machines, anonymity under machine relabeling, machine-bid
//! monotonicity scans, and job-misreport deviation search.

use num_traits::Zero;

use crate::core::{fixed_ordering, replay_log, Instance, ScheduleState, SpeedBasis};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::outcome::MechanismOutcome;
use crate::ppr::round_speed;
use crate::rational::{rat, rat_int, rational_to_string, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub property: String,
    pub verdict: Verdict,
    pub counterexample: Option<String>,
}

impl VerificationReport {
    fn pass(property: &str) -> Self {
        VerificationReport {
            property: property.into(),
            verdict: Verdict::Pass,
            counterexample: None,
        }
    }

    fn fail(property: &str, counterexample: String) -> Self {
        VerificationReport {
            property: property.into(),
            verdict: Verdict::Fail,
            counterexample: Some(counterexample),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WellBehavedMode {
    /// Makespans non-decreasing in speed (this library's primary notion).
    Strong,
    /// Workloads non-decreasing in speed.
    Weak,
}

/// Checks that among machines with strictly different speeds (on the chosen
/// basis) the faster one has no smaller makespan (strong) or workload (weak).
/// Equal-speed machines are mutually unconstrained.
pub fn check_well_behaved(
    state: &ScheduleState,
    mode: WellBehavedMode,
    basis: SpeedBasis,
) -> VerificationReport {
    let property = match (mode, basis) {
        (WellBehavedMode::Strong, SpeedBasis::Announced) => "wb-strong-announced",
        (WellBehavedMode::Strong, SpeedBasis::True) => "wb-strong-true",
        (WellBehavedMode::Weak, SpeedBasis::Announced) => "wb-weak-announced",
        (WellBehavedMode::Weak, SpeedBasis::True) => "wb-weak-true",
    };
    match wb_violation(state, mode, basis, &speed_order(state, basis)) {
        None => VerificationReport::pass(property),
        Some((i, j)) => {
            let metric = |k: usize| match mode {
                WellBehavedMode::Strong => state.machines[k].makespan(basis),
                WellBehavedMode::Weak => state.machines[k].workload.clone(),
            };
            VerificationReport::fail(
                property,
                format!(
                    "machine {i} (speed {}) has metric {} < machine {j} (speed {}) metric {}",
                    rational_to_string(state.machines[i].speed(basis)),
                    rational_to_string(&metric(i)),
                    rational_to_string(state.machines[j].speed(basis)),
                    rational_to_string(&metric(j)),
                ),
            )
        }
    }
}

/// Machine indices sorted by speed ascending on the chosen basis.
fn speed_order(state: &ScheduleState, basis: SpeedBasis) -> Vec<usize> {
    let mut order: Vec<usize> = (0..state.num_machines()).collect();
    order.sort_by(|&a, &b| state.machines[a].speed(basis).cmp(state.machines[b].speed(basis)));
    order
}

/// Finds a pair (faster machine i, slower machine j) with metric_i < metric_j,
/// if one exists. `order` must be sorted by speed ascending.
fn wb_violation(
    state: &ScheduleState,
    mode: WellBehavedMode,
    basis: SpeedBasis,
    order: &[usize],
) -> Option<(usize, usize)> {
    let metric = |k: usize| match mode {
        WellBehavedMode::Strong => state.machines[k].makespan(basis),
        WellBehavedMode::Weak => state.machines[k].workload.clone(),
    };
    // prefix max over strictly slower machines; equal speeds are unconstrained
    let mut slower_max: Option<(Rational, usize)> = None;
    let mut g = 0;
    while g < order.len() {
        let mut h = g;
        while h < order.len()
            && state.machines[order[h]].speed(basis) == state.machines[order[g]].speed(basis)
        {
            h += 1;
        }
        let mut group_max: Option<(Rational, usize)> = None;
        for &i in &order[g..h] {
            let v = metric(i);
            if let Some((max_v, j)) = &slower_max {
                if v < *max_v {
                    return Some((i, *j));
                }
            }
            if group_max.as_ref().map_or(true, |(mv, _)| v > *mv) {
                group_max = Some((v, i));
            }
        }
        if let Some(gm) = group_max {
            if slower_max.as_ref().map_or(true, |(mv, _)| gm.0 > *mv) {
                slower_max = Some(gm);
            }
        }
        g = h;
    }
    None
}

/// Replays the outcome log and runs [`check_well_behaved`] after every single
/// assignment.
pub fn check_well_behaved_trace(
    outcome: &MechanismOutcome,
    mode: WellBehavedMode,
    basis: SpeedBasis,
) -> Result<VerificationReport> {
    let speeds: Vec<(Rational, Rational)> = outcome
        .state
        .machines
        .iter()
        .map(|m| (m.true_speed.clone(), m.announced_speed.clone()))
        .collect();
    let mut state = ScheduleState::new(speeds.clone());
    let order = speed_order(&state, basis);
    for (step, a) in outcome.state.log.iter().enumerate() {
        state.apply_assignment(
            a.job,
            a.machine,
            a.reported_size.clone(),
            a.true_size.clone(),
            a.charge.clone(),
        )?;
        if wb_violation(&state, mode, basis, &order).is_some() {
            let report = check_well_behaved(&state, mode, basis);
            return Ok(VerificationReport::fail(
                &report.property,
                format!("after step {step}: {}", report.counterexample.unwrap()),
            ));
        }
    }
    // the replayed final state must reproduce the recorded one bit-exactly
    let replayed = replay_log(speeds, &outcome.state.log)?;
    if replayed != outcome.state {
        return Err(Error::Internal("replay mismatch".into()));
    }
    Ok(check_well_behaved(&outcome.state, mode, basis))
}

/// For every pair of machines with equal announced speed, the workload of one
/// is at least the workload of the other minus that machine's last job.
pub fn check_fairness(state: &ScheduleState) -> VerificationReport {
    let m = state.num_machines();
    let mut applicable = false;
    for i in 0..m {
        for j in 0..m {
            if i == j || state.machines[i].announced_speed != state.machines[j].announced_speed {
                continue;
            }
            applicable = true;
            let slack = state
                .last_job_size(j)
                .cloned()
                .unwrap_or_else(|| rat_int(0));
            if state.machines[i].workload < &state.machines[j].workload - &slack {
                return VerificationReport::fail(
                    "fair",
                    format!(
                        "machine {i} workload {} < machine {j} workload {} minus its last job {}",
                        rational_to_string(&state.machines[i].workload),
                        rational_to_string(&state.machines[j].workload),
                        rational_to_string(&slack),
                    ),
                );
            }
        }
    }
    if applicable {
        VerificationReport::pass("fair")
    } else {
        VerificationReport {
            property: "fair".into(),
            verdict: Verdict::Inapplicable,
            counterexample: None,
        }
    }
}

/// Runs the mechanism on the sigma-relabeled machine list (tie-break ordering
/// relabeled identically) and checks that per-machine job sets are the
/// sigma-image of the original run's job sets.
pub fn check_anonymity(
    instance: &Instance,
    mechanism: &Mechanism,
    sigma: &[usize],
) -> Result<VerificationReport> {
    let m = instance.num_machines();
    if sigma.len() != m {
        return Err(Error::Internal("sigma length mismatch".into()));
    }
    let order = fixed_ordering(instance.seed, m);
    let base = mechanism.run_with_order(instance, &order)?;

    let mut permuted = instance.clone();
    for (i, &target) in sigma.iter().enumerate() {
        permuted.machines[target] = instance.machines[i].clone();
    }
    let permuted_order = order.relabel(sigma);
    let image = mechanism.run_with_order(&permuted, &permuted_order)?;

    for i in 0..m {
        let expected = base.state.jobs_on(i);
        let got = image.state.jobs_on(sigma[i]);
        if expected != got {
            return Ok(VerificationReport::fail(
                "anon",
                format!(
                    "machine {i} -> {}: jobs {expected:?} became {got:?}",
                    sigma[i]
                ),
            ));
        }
    }
    Ok(VerificationReport::pass("anon"))
}

/// Reruns the mechanism for each claimed speed in the grid (ascending) and
/// checks that the machine's final workload is non-decreasing.
pub fn scan_machine_monotonicity(
    instance: &Instance,
    mechanism: &Mechanism,
    machine: usize,
    bid_grid: &[Rational],
) -> Result<VerificationReport> {
    if machine >= instance.num_machines() {
        return Err(Error::UnknownMachine(machine));
    }
    let mut grid = bid_grid.to_vec();
    grid.sort();
    grid.dedup();
    let mut prev: Option<(Rational, Rational)> = None;
    for bid in grid {
        let mut probe = instance.clone();
        probe.machines[machine].claimed_speed = bid.clone();
        let outcome = mechanism.run(&probe)?;
        let w = outcome.state.machines[machine].workload.clone();
        if let Some((pb, pw)) = &prev {
            if w < *pw {
                return Ok(VerificationReport::fail(
                    "mono-machine",
                    format!(
                        "machine {machine}: workload {} at bid {} dropped to {} at bid {}",
                        rational_to_string(pw),
                        rational_to_string(pb),
                        rational_to_string(&w),
                        rational_to_string(&bid),
                    ),
                ));
            }
        }
        prev = Some((bid, w));
    }
    Ok(VerificationReport::pass("mono-machine"))
}

/// All rounding breakpoints of `base` between `min claimed speed / 4` and
/// `max claimed speed * 4`; a dyadic grid for unrounded mechanisms.
pub fn default_bid_grid(instance: &Instance, base: &Rational) -> Vec<Rational> {
    let base = if *base > rat_int(1) {
        base.clone()
    } else {
        rat_int(2)
    };
    let lo = instance
        .machines
        .iter()
        .map(|m| m.claimed_speed.clone())
        .min()
        .expect("at least one machine")
        / rat_int(4);
    let hi = instance
        .machines
        .iter()
        .map(|m| m.claimed_speed.clone())
        .max()
        .expect("at least one machine")
        * rat_int(4);
    let mut p = rat_int(1);
    while p > lo {
        p /= &base;
    }
    let mut grid = Vec::new();
    while p <= hi {
        if p >= lo {
            grid.push(p.clone());
        }
        p *= &base;
    }
    grid
}

/// Misreport grid for a job: `{true * 2^k : k in -6..=6}` plus every true job
/// size in the instance.
pub fn default_misreport_grid(instance: &Instance, job: usize) -> Vec<Rational> {
    let truth = &instance.jobs[job].true_size;
    let mut grid: Vec<Rational> = Vec::new();
    for k in -6i32..=6 {
        let factor = if k >= 0 {
            rat_int(1 << k as u32)
        } else {
            rat(1, 1 << (-k) as u32)
        };
        grid.push(truth * factor);
    }
    for j in &instance.jobs {
        grid.push(j.true_size.clone());
    }
    grid.sort();
    grid.dedup();
    grid
}

/// For each misreport, reruns the sequence with the job reporting it and
/// compares the job's realized cost (true size on the chosen machine, plus
/// the charge) against the truthful run.
pub fn scan_job_truthfulness(
    instance: &Instance,
    mechanism: &Mechanism,
    job: usize,
    misreport_grid: &[Rational],
) -> Result<VerificationReport> {
    if job >= instance.num_jobs() {
        return Err(Error::UnknownJob(job));
    }
    let truthful = mechanism.run(instance)?;
    let truthful_cost = truthful.steps[job].cost.clone();
    for q in misreport_grid {
        if *q <= Rational::zero() || *q == instance.jobs[job].true_size {
            continue;
        }
        let mut probe = instance.clone();
        probe.jobs[job].reported_size = q.clone();
        let outcome = mechanism.run(&probe)?;
        let lied_cost = &outcome.steps[job].cost;
        if *lied_cost < truthful_cost {
            return Ok(VerificationReport::fail(
                "truth-job",
                format!(
                    "job {job}: reporting {} costs {} < truthful cost {}",
                    rational_to_string(q),
                    rational_to_string(lied_cost),
                    rational_to_string(&truthful_cost),
                ),
            ));
        }
    }
    Ok(VerificationReport::pass("truth-job"))
}

/// Grid of powers of `base` for monotonicity scans of rounding mechanisms.
pub fn power_grid(base: &Rational, lo: &Rational, hi: &Rational) -> Vec<Rational> {
    let mut p = rat_int(1);
    while p > *lo {
        p /= base;
    }
    let mut grid = Vec::new();
    while p <= *hi {
        if p >= *lo {
            grid.push(p.clone());
        }
        p *= base;
    }
    grid
}

/// Convenience: rounds a speed the way the mechanism would announce it.
pub fn announced_speed(mechanism: &Mechanism, speed: &Rational) -> Rational {
    match mechanism.rounding_base() {
        Some(base) => round_speed(speed, base),
        None => speed.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::run_greedy_true;
    use crate::core::TieBreakOrder;
    use crate::ppr::{run_ppr_with_order, PprConfig};

    fn identity_order(m: usize) -> TieBreakOrder {
        TieBreakOrder::from_permutation((0..m).collect(), 0)
    }

    fn state_with(speeds: &[i64], workloads: &[Rational]) -> ScheduleState {
        let mut s = ScheduleState::new(
            speeds
                .iter()
                .map(|&v| (rat_int(v), rat_int(v)))
                .collect(),
        );
        for (i, w) in workloads.iter().enumerate() {
            if *w > Rational::zero() {
                s.apply_assignment(i, i, w.clone(), w.clone(), rat_int(0))
                    .unwrap();
            }
        }
        s
    }

    #[test]
    fn strong_well_behaved_pass_and_fail() {
        let s = state_with(&[1, 2, 4], &[rat_int(0), rat(8, 5), rat_int(10)]);
        assert!(check_well_behaved(&s, WellBehavedMode::Strong, SpeedBasis::Announced).passed());

        let s = state_with(&[1, 2], &[rat_int(1), rat_int(1)]);
        // C = (1, 0.5): faster machine behind
        let r = check_well_behaved(&s, WellBehavedMode::Strong, SpeedBasis::Announced);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.counterexample.is_some());
    }

    #[test]
    fn weak_well_behavior_catches_greedy_true() {
        let inst = Instance::new(
            vec![rat_int(1), rat(5, 4)],
            vec![rat_int(1), rat_int(4)],
            0,
        );
        let out = run_greedy_true(&inst).unwrap();
        let r = check_well_behaved(&out.state, WellBehavedMode::Weak, SpeedBasis::True);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn fairness_on_equal_speed_pair() {
        // two speed-1 machines, five unit jobs under the posted-price rule
        let inst = Instance::new(vec![rat_int(1), rat_int(1)], vec![rat_int(1); 5], 0);
        let out = run_ppr_with_order(&inst, &PprConfig::default(), &identity_order(2)).unwrap();
        let mut loads: Vec<Rational> = out
            .state
            .machines
            .iter()
            .map(|m| m.workload.clone())
            .collect();
        assert!(check_fairness(&out.state).passed());
        loads.sort();
        assert_eq!(loads, vec![rat_int(2), rat_int(3)]);
    }

    #[test]
    fn fairness_inapplicable_without_equal_speeds() {
        let s = state_with(&[1, 2], &[rat_int(0), rat_int(0)]);
        assert_eq!(check_fairness(&s).verdict, Verdict::Inapplicable);
    }

    #[test]
    fn fairness_fails_on_lopsided_equal_speeds() {
        let mut s = state_with(&[1, 1], &[Rational::zero(), Rational::zero()]);
        s.apply_assignment(0, 0, rat_int(4), rat_int(4), rat_int(0))
            .unwrap();
        s.apply_assignment(1, 0, rat_int(1), rat_int(1), rat_int(0))
            .unwrap();
        s.apply_assignment(2, 1, rat_int(1), rat_int(1), rat_int(0))
            .unwrap();
        let r = check_fairness(&s);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn anonymity_identity_and_swap() {
        let inst = Instance::new(
            vec![rat_int(1), rat_int(1), rat_int(4)],
            vec![rat_int(3), rat_int(1), rat_int(2)],
            5,
        );
        let mech = Mechanism::ppr_default();
        assert!(check_anonymity(&inst, &mech, &[0, 1, 2]).unwrap().passed());
        assert!(check_anonymity(&inst, &mech, &[1, 0, 2]).unwrap().passed());
        assert!(check_anonymity(&inst, &mech, &[2, 1, 0]).unwrap().passed());
    }

    #[test]
    fn unit_job_monotonicity_scan() {
        let inst = Instance::new(vec![rat_int(1), rat_int(1)], vec![rat_int(1); 5], 0);
        let mech = Mechanism::ppr_default();
        let grid = vec![rat_int(1), rat_int(2), rat_int(4)];
        let r = scan_machine_monotonicity(&inst, &mech, 0, &grid).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn job_truthfulness_on_worked_instance() {
        let inst = Instance::new(
            vec![rat_int(1), rat_int(2), rat_int(4)],
            vec![rat_int(6), rat_int(4), rat_int(1), rat(3, 5)],
            0,
        );
        for mech in [
            Mechanism::ppr_default(),
            Mechanism::Vcg,
            Mechanism::GreedyIdentical,
            Mechanism::GreedyTrue,
        ] {
            for job in 0..inst.num_jobs() {
                let grid = default_misreport_grid(&inst, job);
                let r = scan_job_truthfulness(&inst, &mech, job, &grid).unwrap();
                assert!(r.passed(), "{} job {job}", mech.name());
            }
        }
        // truthful cost of the first job is its completion time on the fast machine
        let out = Mechanism::ppr_default().run(&inst).unwrap();
        assert_eq!(out.steps[0].cost, rat(3, 2));
    }
}
