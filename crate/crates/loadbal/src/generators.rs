//! Instance families: the square-root hardness construction, the two-machine
//! greedy counterexample, and seeded random / bounded / unit families.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{rat, rat_int, Rational};
use crate::core::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Hardness,
    GreedyCounter,
    Random,
    Bounded,
    Unit,
}

impl Family {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "hardness" => Ok(Family::Hardness),
            "greedy-counter" => Ok(Family::GreedyCounter),
            "random" => Ok(Family::Random),
            "bounded" => Ok(Family::Bounded),
            "unit" => Ok(Family::Unit),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Hardness => "hardness",
            Family::GreedyCounter => "greedy-counter",
            Family::Random => "random",
            Family::Bounded => "bounded",
            Family::Unit => "unit",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub family: Family,
    pub machines: usize,
    pub jobs: usize,
    pub seed: u64,
    /// Greedy counterexample parameter, in (0, 1).
    pub eps: Rational,
    pub p_min: Rational,
    pub p_max: Rational,
    /// Draw arbitrary dyadic speeds instead of powers of 2.
    pub raw_speeds: bool,
    /// Speeds live in [1, 2^speed_exp_max].
    pub speed_exp_max: u32,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            family: Family::Random,
            machines: 4,
            jobs: 10,
            seed: 0,
            eps: rat(1, 4),
            p_min: rat_int(1),
            p_max: rat_int(8),
            raw_speeds: false,
            speed_exp_max: 10,
        }
    }
}

/// Machines with speeds `1 + 2^{i-m}` for `i = 1..=m` and jobs of exactly
/// those sizes arriving in increasing order. The assignment job `i` to
/// machine `i` finishes everything by time 1, so OPT <= 1.
pub fn gen_hardness(m: usize) -> Result<Instance> {
    if m < 1 {
        return Err(Error::NoMachines);
    }
    let speeds: Vec<Rational> = (1..=m)
        .map(|i| {
            let denom = BigInt::one() << (m - i);
            Rational::one() + Rational::new(BigInt::one(), denom)
        })
        .collect();
    let sizes = speeds.clone();
    Ok(Instance::new(speeds, sizes, 0))
}

/// Two machines with speeds `1` and `1 + eps`; jobs of size `1` then `1/eps`.
pub fn gen_greedy_counter(eps: &Rational) -> Result<Instance> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(Error::Parse("eps must lie in (0, 1)".into()));
    }
    let speeds = vec![rat_int(1), Rational::one() + eps];
    let sizes = vec![rat_int(1), Rational::one() / eps];
    Ok(Instance::new(speeds, sizes, 0))
}

fn draw_size(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Rational {
    // dyadic points between lo and hi so arithmetic stays cheap
    const STEPS: i64 = 64;
    let t = rng.gen_range(0..=STEPS);
    lo + (hi - lo) * rat(t, STEPS)
}

/// Seeded random instance. Speeds default to powers of 2 in
/// `[1, 2^speed_exp_max]`; sizes are dyadic rationals, with the minimum speed
/// and minimum size normalized to 1 for the random and unit families.
pub fn generate(spec: &FamilySpec) -> Result<Instance> {
    match spec.family {
        Family::Hardness => return gen_hardness(spec.machines),
        Family::GreedyCounter => return gen_greedy_counter(&spec.eps),
        _ => {}
    }
    if spec.machines < 1 {
        return Err(Error::NoMachines);
    }
    if spec.p_min <= Rational::zero() || spec.p_min > spec.p_max {
        return Err(Error::Parse("need 0 < p_min <= p_max".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut speeds: Vec<Rational> = (0..spec.machines)
        .map(|_| {
            if spec.raw_speeds {
                let cap = 8i64 << spec.speed_exp_max;
                rat(rng.gen_range(8..=cap), 8)
            } else {
                let e = rng.gen_range(0..=spec.speed_exp_max);
                rat_int(1i64 << e)
            }
        })
        .collect();
    let min_speed = speeds.iter().min().cloned().expect("m >= 1");
    for s in &mut speeds {
        *s /= &min_speed;
    }
    let sizes: Vec<Rational> = match spec.family {
        Family::Unit => vec![rat_int(1); spec.jobs],
        Family::Bounded => {
            let mut v: Vec<Rational> = (0..spec.jobs)
                .map(|_| draw_size(&mut rng, &spec.p_min, &spec.p_max))
                .collect();
            // anchor the minimum at p_min so the normalization convention
            // holds when p_min = 1
            if let Some(first) = v.first_mut() {
                *first = spec.p_min.clone();
            }
            v
        }
        _ => {
            let v: Vec<Rational> = (0..spec.jobs)
                .map(|_| draw_size(&mut rng, &spec.p_min, &spec.p_max))
                .collect();
            if v.is_empty() {
                v
            } else {
                let min = v.iter().min().cloned().unwrap();
                v.into_iter().map(|p| p / &min).collect()
            }
        }
    };
    Ok(Instance {
        seed: spec.seed,
        ..Instance::new(speeds, sizes, spec.seed)
    })
}
