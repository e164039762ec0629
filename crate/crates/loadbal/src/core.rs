//! Domain types shared by every mechanism: machines, jobs, instances, the
//! pre-fixed tie-break ordering, and the schedule state machine.
//!
//! Workload accounting uses reported job sizes (what the mechanism sees);
//! true sizes travel alongside in the assignment log for cost accounting.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{rat_int, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Machine {
    /// Actual processing speed (work units per time unit).
    pub true_speed: Rational,
    /// Speed submitted to the mechanism; equals `true_speed` unless a scan
    /// overrides it.
    pub claimed_speed: Rational,
}

impl Machine {
    pub fn new(speed: Rational) -> Self {
        Machine {
            claimed_speed: speed.clone(),
            true_speed: speed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub true_size: Rational,
    /// Size submitted to the mechanism; equals `true_size` unless a scan
    /// overrides it.
    pub reported_size: Rational,
}

impl Job {
    pub fn new(size: Rational) -> Self {
        Job {
            reported_size: size.clone(),
            true_size: size,
        }
    }
}

/// A problem instance: machine speeds plus the online job sequence
/// (arrival order = list order). The seed fixes the tie-break ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub machines: Vec<Machine>,
    pub jobs: Vec<Job>,
    pub seed: u64,
}

impl Instance {
    pub fn new(speeds: Vec<Rational>, sizes: Vec<Rational>, seed: u64) -> Self {
        Instance {
            machines: speeds.into_iter().map(Machine::new).collect(),
            jobs: sizes.into_iter().map(Job::new).collect(),
            seed,
        }
    }

    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.machines.is_empty() {
            return Err(Error::NoMachines);
        }
        for m in &self.machines {
            if m.true_speed <= Rational::zero() || m.claimed_speed <= Rational::zero() {
                return Err(Error::NonPositive("machine speed".into()));
            }
        }
        for j in &self.jobs {
            if j.true_size <= Rational::zero() || j.reported_size <= Rational::zero() {
                return Err(Error::NonPositive("job size".into()));
            }
        }
        Ok(())
    }
}

/// Pre-fixed ordering of machines used to break ties, determined by
/// `(seed, machine count)` alone.
#[derive(Clone, Debug, PartialEq)]
pub struct TieBreakOrder {
    perm: Vec<usize>,
    rank: Vec<usize>,
    pub seed: u64,
}

impl TieBreakOrder {
    pub fn from_permutation(perm: Vec<usize>, seed: u64) -> Self {
        let mut rank = vec![0usize; perm.len()];
        for (pos, &id) in perm.iter().enumerate() {
            rank[id] = pos;
        }
        TieBreakOrder { perm, rank, seed }
    }

    /// Position of a machine in the ordering; lower wins ties.
    pub fn rank(&self, machine: usize) -> usize {
        self.rank[machine]
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Relabels the ordering through `sigma`, where machine `i` becomes
    /// machine `sigma[i]`.
    pub fn relabel(&self, sigma: &[usize]) -> Self {
        let perm: Vec<usize> = self.perm.iter().map(|&id| sigma[id]).collect();
        TieBreakOrder::from_permutation(perm, self.seed)
    }
}

/// Deterministic permutation of `0..m` from a seed.
pub fn fixed_ordering(seed: u64, m: usize) -> TieBreakOrder {
    let mut ids: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    TieBreakOrder::from_permutation(ids, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpeedBasis {
    Announced,
    True,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MachineState {
    pub true_speed: Rational,
    pub announced_speed: Rational,
    /// Sum of reported sizes of jobs assigned here.
    pub workload: Rational,
}

impl MachineState {
    pub fn speed(&self, basis: SpeedBasis) -> &Rational {
        match basis {
            SpeedBasis::Announced => &self.announced_speed,
            SpeedBasis::True => &self.true_speed,
        }
    }

    pub fn makespan(&self, basis: SpeedBasis) -> Rational {
        &self.workload / self.speed(basis)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub job: usize,
    pub machine: usize,
    pub reported_size: Rational,
    pub true_size: Rational,
    pub charge: Rational,
}

/// Evolving schedule: per-machine workload plus the full assignment log.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleState {
    pub machines: Vec<MachineState>,
    pub log: Vec<Assignment>,
}

impl ScheduleState {
    /// Fresh state from `(true_speed, announced_speed)` pairs.
    pub fn new(speeds: Vec<(Rational, Rational)>) -> Self {
        ScheduleState {
            machines: speeds
                .into_iter()
                .map(|(true_speed, announced_speed)| MachineState {
                    true_speed,
                    announced_speed,
                    workload: Rational::zero(),
                })
                .collect(),
            log: Vec::new(),
        }
    }

    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn apply_assignment(
        &mut self,
        job: usize,
        machine: usize,
        reported_size: Rational,
        true_size: Rational,
        charge: Rational,
    ) -> Result<()> {
        if machine >= self.machines.len() {
            return Err(Error::UnknownMachine(machine));
        }
        if reported_size <= Rational::zero() || true_size <= Rational::zero() {
            return Err(Error::NonPositive("job size".into()));
        }
        if charge < Rational::zero() {
            return Err(Error::NegativeCharge);
        }
        self.machines[machine].workload += &reported_size;
        self.log.push(Assignment {
            job,
            machine,
            reported_size,
            true_size,
            charge,
        });
        Ok(())
    }

    pub fn makespans(&self, basis: SpeedBasis) -> Vec<Rational> {
        self.machines.iter().map(|m| m.makespan(basis)).collect()
    }

    /// Maximum completion time over machines; 0 on an empty schedule.
    pub fn makespan(&self, basis: SpeedBasis) -> Rational {
        self.machines
            .iter()
            .map(|m| m.makespan(basis))
            .max()
            .unwrap_or_else(|| rat_int(0))
    }

    pub fn jobs_on(&self, machine: usize) -> Vec<usize> {
        self.log
            .iter()
            .filter(|a| a.machine == machine)
            .map(|a| a.job)
            .collect()
    }

    pub fn job_count(&self, machine: usize) -> usize {
        self.log.iter().filter(|a| a.machine == machine).count()
    }

    /// Reported size of the last job assigned to `machine`, if any.
    pub fn last_job_size(&self, machine: usize) -> Option<&Rational> {
        self.log
            .iter()
            .rev()
            .find(|a| a.machine == machine)
            .map(|a| &a.reported_size)
    }
}

/// Rebuilds a state from an assignment log over the given speeds.
pub fn replay_log(speeds: Vec<(Rational, Rational)>, log: &[Assignment]) -> Result<ScheduleState> {
    let mut state = ScheduleState::new(speeds);
    for a in log {
        state.apply_assignment(
            a.job,
            a.machine,
            a.reported_size.clone(),
            a.true_size.clone(),
            a.charge.clone(),
        )?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn fresh(speeds: &[(i64, i64)]) -> ScheduleState {
        ScheduleState::new(
            speeds
                .iter()
                .map(|&(t, a)| (rat_int(t), rat_int(a)))
                .collect(),
        )
    }

    #[test]
    fn apply_assignment_updates_one_machine() {
        let mut state = fresh(&[(1, 1), (2, 2)]);
        state
            .apply_assignment(0, 1, rat_int(6), rat_int(6), rat_int(0))
            .unwrap();
        assert_eq!(state.machines[0].workload, rat_int(0));
        assert_eq!(state.machines[1].workload, rat_int(6));
        assert_eq!(state.machines[1].makespan(SpeedBasis::Announced), rat_int(3));
        assert_eq!(state.log.len(), 1);
    }

    #[test]
    fn zero_size_job_rejected() {
        let mut state = fresh(&[(1, 1)]);
        let err = state.apply_assignment(0, 0, rat_int(0), rat_int(0), rat_int(0));
        assert!(err.is_err());
    }

    #[test]
    fn unknown_machine_rejected() {
        let mut state = fresh(&[(1, 1)]);
        assert!(matches!(
            state.apply_assignment(0, 3, rat_int(1), rat_int(1), rat_int(0)),
            Err(Error::UnknownMachine(3))
        ));
    }

    #[test]
    fn two_jobs_on_speed_four_machine() {
        // after sizes 6 and 4 land on the speed-4 machine: W=10, C=2.5
        let mut state = fresh(&[(1, 1), (2, 2), (4, 4)]);
        state
            .apply_assignment(0, 2, rat_int(6), rat_int(6), rat_int(0))
            .unwrap();
        state
            .apply_assignment(1, 2, rat_int(4), rat_int(4), rat_int(0))
            .unwrap();
        assert_eq!(state.machines[2].workload, rat_int(10));
        assert_eq!(state.machines[2].makespan(SpeedBasis::Announced), rat(5, 2));
    }

    #[test]
    fn makespan_examples() {
        let mut state = fresh(&[(1, 1), (2, 2), (4, 4)]);
        state
            .apply_assignment(0, 1, rat(8, 5), rat(8, 5), rat_int(0))
            .unwrap();
        state
            .apply_assignment(1, 2, rat_int(10), rat_int(10), rat_int(0))
            .unwrap();
        assert_eq!(state.makespan(SpeedBasis::Announced), rat(5, 2));

        assert_eq!(fresh(&[(1, 1)]).makespan(SpeedBasis::Announced), rat_int(0));

        // W=(3,3), true speeds (1,3), announced (1,2): machine 1 dominates both ways
        let mut state = fresh(&[(1, 1), (3, 2)]);
        state
            .apply_assignment(0, 0, rat_int(3), rat_int(3), rat_int(0))
            .unwrap();
        state
            .apply_assignment(1, 1, rat_int(3), rat_int(3), rat_int(0))
            .unwrap();
        assert_eq!(state.makespan(SpeedBasis::Announced), rat_int(3));
        assert_eq!(state.makespan(SpeedBasis::True), rat_int(3));
    }

    #[test]
    fn fixed_ordering_deterministic() {
        assert_eq!(fixed_ordering(7, 1).permutation(), &[0]);
        let a = fixed_ordering(42, 5);
        let b = fixed_ordering(42, 5);
        assert_eq!(a, b);
        let mut sorted = a.permutation().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
        // different seeds go through the generator independently
        let c = fixed_ordering(43, 5);
        let mut sorted_c = c.permutation().to_vec();
        sorted_c.sort_unstable();
        assert_eq!(sorted_c, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn replay_reproduces_state() {
        let mut state = fresh(&[(1, 1), (2, 2)]);
        state
            .apply_assignment(0, 0, rat_int(2), rat_int(2), rat_int(0))
            .unwrap();
        state
            .apply_assignment(1, 1, rat(1, 2), rat(1, 2), rat(1, 4))
            .unwrap();
        let speeds = vec![
            (rat_int(1), rat_int(1)),
            (rat_int(2), rat_int(2)),
        ];
        let replayed = replay_log(speeds, &state.log).unwrap();
        assert_eq!(replayed, state);
    }
}
