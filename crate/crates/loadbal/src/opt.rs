//! Offline makespan oracles: an exact branch-and-bound search for desk-scale
//! instances, an LPT-based bracketing fallback, and the rounded-speed
//! sandwich check.

use num_traits::Zero;

use crate::core::Instance;
use crate::error::{Error, Result};
use crate::ppr::round_speed;
use crate::rational::{rat_int, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum SpeedMode {
    True,
    Rounded(Rational),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub value: Rational,
    pub exact: bool,
    /// Job -> machine map when exact (also carries the LPT assignment when
    /// inexact).
    pub witness: Option<Vec<usize>>,
    pub lower_bound: Rational,
    pub upper_bound: Rational,
}

#[derive(Clone, Copy, Debug)]
pub struct OptBudget {
    /// Maximum number of jobs the exact search accepts before falling back.
    pub max_jobs: usize,
}

impl Default for OptBudget {
    fn default() -> Self {
        OptBudget { max_jobs: 18 }
    }
}

fn effective_speeds(instance: &Instance, mode: &SpeedMode) -> Vec<Rational> {
    instance
        .machines
        .iter()
        .map(|m| match mode {
            SpeedMode::True => m.true_speed.clone(),
            SpeedMode::Rounded(base) => round_speed(&m.true_speed, base),
        })
        .collect()
}

fn true_sizes(instance: &Instance) -> Vec<Rational> {
    instance.jobs.iter().map(|j| j.true_size.clone()).collect()
}

fn lower_bound(sizes: &[Rational], speeds: &[Rational]) -> Rational {
    let total: Rational = sizes.iter().fold(Rational::zero(), |a, p| a + p);
    let speed_sum: Rational = speeds.iter().fold(Rational::zero(), |a, s| a + s);
    let s_max = speeds.iter().max().expect("at least one machine");
    let avg = total / speed_sum;
    let big = sizes
        .iter()
        .max()
        .map(|p| p / s_max)
        .unwrap_or_else(|| rat_int(0));
    avg.max(big)
}

/// LPT list scheduling on related machines: jobs in non-increasing size order,
/// each to the machine minimizing its completion time.
fn lpt(sizes: &[Rational], speeds: &[Rational]) -> (Rational, Vec<usize>) {
    let m = speeds.len();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut workloads = vec![Rational::zero(); m];
    let mut assign = vec![0usize; sizes.len()];
    for &j in &order {
        let chosen = (0..m)
            .min_by(|&a, &b| {
                let fa = (&workloads[a] + &sizes[j]) / &speeds[a];
                let fb = (&workloads[b] + &sizes[j]) / &speeds[b];
                fa.cmp(&fb).then(speeds[b].cmp(&speeds[a])).then(a.cmp(&b))
            })
            .expect("at least one machine");
        workloads[chosen] += &sizes[j];
        assign[j] = chosen;
    }
    let makespan = (0..m)
        .map(|i| &workloads[i] / &speeds[i])
        .max()
        .unwrap_or_else(|| rat_int(0));
    (makespan, assign)
}

/// Bracketing fallback: LPT upper bound plus the standard lower bounds
/// (average load over total speed, largest job on the fastest machine).
pub fn opt_approx(instance: &Instance, mode: &SpeedMode) -> Result<OptResult> {
    instance.validate()?;
    let speeds = effective_speeds(instance, mode);
    let sizes = true_sizes(instance);
    if sizes.is_empty() {
        return Ok(OptResult {
            value: rat_int(0),
            exact: true,
            witness: Some(Vec::new()),
            lower_bound: rat_int(0),
            upper_bound: rat_int(0),
        });
    }
    let lb = lower_bound(&sizes, &speeds);
    let (ub, assign) = lpt(&sizes, &speeds);
    let exact = speeds.len() == 1 || lb == ub;
    Ok(OptResult {
        value: ub.clone(),
        exact,
        witness: Some(assign),
        lower_bound: lb,
        upper_bound: ub,
    })
}

struct Search<'a> {
    sizes: &'a [Rational],
    speeds: &'a [Rational],
    job_order: &'a [usize],
    best: Rational,
    best_assign: Vec<usize>,
    global_lb: Rational,
    workloads: Vec<Rational>,
    assign: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, depth: usize, current_max: &Rational) {
        if *current_max >= self.best {
            return;
        }
        if depth == self.job_order.len() {
            self.best = current_max.clone();
            self.best_assign = self.assign.clone();
            return;
        }
        let j = self.job_order[depth];
        let m = self.speeds.len();
        for i in 0..m {
            // identical machines with identical workloads are interchangeable
            if (0..i).any(|k| {
                self.speeds[k] == self.speeds[i] && self.workloads[k] == self.workloads[i]
            }) {
                continue;
            }
            self.workloads[i] += &self.sizes[j];
            let completion = &self.workloads[i] / &self.speeds[i];
            let child_max = completion.max(current_max.clone());
            if child_max < self.best {
                self.assign[j] = i;
                self.dfs(depth + 1, &child_max);
            }
            self.workloads[i] -= &self.sizes[j];
            if self.best <= self.global_lb {
                return;
            }
        }
    }
}

/// Exact minimum makespan by branch-and-bound (jobs in non-increasing size
/// order, equal machines deduplicated, LPT seed). Falls back to
/// [`opt_approx`] beyond the job budget.
pub fn opt_exact(instance: &Instance, mode: &SpeedMode, budget: &OptBudget) -> Result<OptResult> {
    instance.validate()?;
    if instance.num_jobs() > budget.max_jobs {
        return opt_approx(instance, mode);
    }
    let speeds = effective_speeds(instance, mode);
    let sizes = true_sizes(instance);
    if sizes.is_empty() {
        return Ok(OptResult {
            value: rat_int(0),
            exact: true,
            witness: Some(Vec::new()),
            lower_bound: rat_int(0),
            upper_bound: rat_int(0),
        });
    }
    let lb = lower_bound(&sizes, &speeds);
    let (ub, seed_assign) = lpt(&sizes, &speeds);
    let mut job_order: Vec<usize> = (0..sizes.len()).collect();
    job_order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut machine_order: Vec<usize> = (0..speeds.len()).collect();
    machine_order.sort_by(|&a, &b| speeds[b].cmp(&speeds[a]));
    // search over machines in decreasing speed order for earlier pruning
    let speeds_sorted: Vec<Rational> = machine_order.iter().map(|&i| speeds[i].clone()).collect();
    let mut search = Search {
        sizes: &sizes,
        speeds: &speeds_sorted,
        job_order: &job_order,
        best: ub.clone(),
        best_assign: seed_assign
            .iter()
            .map(|&mi| machine_order.iter().position(|&x| x == mi).unwrap())
            .collect(),
        global_lb: lb.clone(),
        workloads: vec![Rational::zero(); speeds.len()],
        assign: vec![0usize; sizes.len()],
    };
    search.dfs(0, &rat_int(0));
    let assign: Vec<usize> = search.best_assign.iter().map(|&k| machine_order[k]).collect();
    Ok(OptResult {
        value: search.best.clone(),
        exact: true,
        witness: Some(assign),
        lower_bound: lb,
        upper_bound: search.best,
    })
}

/// Computes OPT on true speeds and OPT on base-rounded speeds and checks
/// `OPT <= OPT_b <= base * OPT` when both are exact.
pub fn opt2_sandwich(
    instance: &Instance,
    base: &Rational,
    budget: &OptBudget,
) -> Result<(OptResult, OptResult)> {
    let opt = opt_exact(instance, &SpeedMode::True, budget)?;
    let opt2 = opt_exact(instance, &SpeedMode::Rounded(base.clone()), budget)?;
    if opt.exact && opt2.exact {
        let scaled = &opt.value * base;
        if !(opt.value <= opt2.value && opt2.value <= scaled) {
            return Err(Error::Internal(format!(
                "sandwich violated: OPT={} OPT_b={} base={}",
                opt.value, opt2.value, base
            )));
        }
    }
    Ok((opt, opt2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn worked_instance() -> Instance {
        Instance::new(
            vec![rat_int(1), rat_int(2), rat_int(4)],
            vec![rat_int(6), rat_int(4), rat_int(1), rat(3, 5)],
            0,
        )
    }

    /// Independent oracle: full enumeration over all m^n assignments.
    fn enumerate_opt(sizes: &[Rational], speeds: &[Rational]) -> Rational {
        let m = speeds.len();
        let n = sizes.len();
        let mut best: Option<Rational> = None;
        let mut assign = vec![0usize; n];
        loop {
            let mut workloads = vec![Rational::zero(); m];
            for (j, &i) in assign.iter().enumerate() {
                workloads[i] += &sizes[j];
            }
            let mk = (0..m)
                .map(|i| &workloads[i] / &speeds[i])
                .max()
                .unwrap();
            best = Some(match best {
                None => mk,
                Some(b) => b.min(mk),
            });
            // next assignment in base-m counting
            let mut k = 0;
            loop {
                if k == n {
                    return best.unwrap();
                }
                assign[k] += 1;
                if assign[k] < m {
                    break;
                }
                assign[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn opt_exact_worked_instance() {
        let inst = worked_instance();
        let r = opt_exact(&inst, &SpeedMode::True, &OptBudget::default()).unwrap();
        assert_eq!(r.value, rat_int(2));
        assert!(r.exact);
        // witness achieves the value
        let w = r.witness.unwrap();
        let mut workloads = vec![Rational::zero(); 3];
        for (j, &i) in w.iter().enumerate() {
            workloads[i] += &inst.jobs[j].true_size;
        }
        let mk = (0..3)
            .map(|i| &workloads[i] / &inst.machines[i].true_speed)
            .max()
            .unwrap();
        assert_eq!(mk, rat_int(2));
    }

    #[test]
    fn opt_exact_single_job() {
        let inst = Instance::new(
            vec![rat_int(1), rat_int(3), rat_int(2)],
            vec![rat_int(6)],
            0,
        );
        let r = opt_exact(&inst, &SpeedMode::True, &OptBudget::default()).unwrap();
        assert_eq!(r.value, rat_int(2));
    }

    #[test]
    fn opt_exact_one_unit_job_per_machine() {
        let inst = Instance::new(vec![rat_int(1); 4], vec![rat_int(1); 4], 0);
        let r = opt_exact(&inst, &SpeedMode::True, &OptBudget::default()).unwrap();
        assert_eq!(r.value, rat_int(1));
    }

    #[test]
    fn opt_approx_brackets_worked_instance() {
        let inst = worked_instance();
        let r = opt_approx(&inst, &SpeedMode::True).unwrap();
        assert_eq!(r.lower_bound, rat(58, 35)); // max(11.6/7, 6/4)
        assert!(r.lower_bound <= rat_int(2) && rat_int(2) <= r.upper_bound);
    }

    #[test]
    fn opt_approx_single_machine_is_exact() {
        let inst = Instance::new(vec![rat_int(2)], vec![rat_int(3), rat_int(1)], 0);
        let r = opt_approx(&inst, &SpeedMode::True).unwrap();
        assert!(r.exact);
        assert_eq!(r.value, rat_int(2));
        assert_eq!(r.lower_bound, r.upper_bound);
    }

    #[test]
    fn opt_approx_identical_jobs_and_machines_coincides() {
        let inst = Instance::new(vec![rat_int(1); 3], vec![rat_int(1); 6], 0);
        let r = opt_approx(&inst, &SpeedMode::True).unwrap();
        assert_eq!(r.lower_bound, r.upper_bound);
    }

    #[test]
    fn budget_exceeded_falls_back() {
        let inst = Instance::new(vec![rat_int(1); 2], vec![rat_int(1); 5], 0);
        let r = opt_exact(&inst, &SpeedMode::True, &OptBudget { max_jobs: 3 }).unwrap();
        assert!(!r.exact);
        assert!(r.lower_bound <= r.value && r.value <= r.upper_bound);
    }

    #[test]
    fn sandwich_on_power_of_two_speeds_is_tight() {
        let inst = worked_instance();
        let (opt, opt2) = opt2_sandwich(&inst, &rat_int(2), &OptBudget::default()).unwrap();
        assert_eq!(opt.value, opt2.value);
    }

    #[test]
    fn sandwich_with_rounded_slower_speeds() {
        let inst = Instance::new(
            vec![rat_int(1), rat_int(3)],
            vec![rat_int(3), rat_int(1)],
            0,
        );
        let (opt, opt2) = opt2_sandwich(&inst, &rat_int(2), &OptBudget::default()).unwrap();
        assert!(opt2.value >= opt.value);
        assert!(opt2.value <= opt.value * rat_int(2));
    }

    #[test]
    fn matches_enumeration_on_random_small_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(0..=6);
            let speeds: Vec<Rational> =
                (0..m).map(|_| rat(rng.gen_range(1..=8), 1)).collect();
            let sizes: Vec<Rational> =
                (0..n).map(|_| rat(rng.gen_range(1..=16), 2)).collect();
            let inst = Instance::new(speeds.clone(), sizes.clone(), 0);
            let r = opt_exact(&inst, &SpeedMode::True, &OptBudget::default()).unwrap();
            if n == 0 {
                assert_eq!(r.value, rat_int(0));
            } else {
                assert_eq!(r.value, enumerate_opt(&sizes, &speeds));
            }
            let ap = opt_approx(&inst, &SpeedMode::True).unwrap();
            assert!(ap.lower_bound <= r.value && r.value <= ap.upper_bound);
        }
    }
}
