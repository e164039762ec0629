//! Machine-side payments computed from the workload curve L(b), where b is
//! the claimed inverse speed: P(b) = b*L(b) + integral of L from b to the
//! end of the curve domain. The integral to infinity is truncated at the
//! domain edge; curves that are still loaded there are flagged divergent.

use num_traits::{One, Zero};

use crate::core::Instance;
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::rational::{Rational};

/// Piecewise-constant workload curve. Each piece carries the final workload
/// of the scanned machine for every claimed inverse speed in `(lo, hi]`
/// (the first piece also covers its own `lo`).
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePiece {
    pub lo: Rational,
    pub hi: Rational,
    pub load: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadCurve {
    pub pieces: Vec<CurvePiece>,
    /// Set when the workload is still positive at the domain edge, i.e. the
    /// true integral to infinity would diverge.
    pub divergent: bool,
}

impl WorkloadCurve {
    pub fn b_min(&self) -> &Rational {
        &self.pieces.first().expect("non-empty curve").lo
    }

    pub fn b_max(&self) -> &Rational {
        &self.pieces.last().expect("non-empty curve").hi
    }

    pub fn load_at(&self, b: &Rational) -> Result<&Rational> {
        if b < self.b_min() || b > self.b_max() {
            return Err(Error::OutOfDomain);
        }
        for p in &self.pieces {
            if b <= &p.hi {
                return Ok(&p.load);
            }
        }
        Err(Error::OutOfDomain)
    }

    pub fn non_increasing(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].load >= w[1].load)
    }
}

/// Builds a curve for a constructed step function; used by checkers that
/// need a curve not backed by mechanism reruns.
pub fn curve_from_pieces(pieces: Vec<CurvePiece>) -> Result<WorkloadCurve> {
    if pieces.is_empty() {
        return Err(Error::Internal("empty workload curve".into()));
    }
    for w in pieces.windows(2) {
        if w[0].hi != w[1].lo {
            return Err(Error::Internal("workload curve pieces not contiguous".into()));
        }
    }
    let divergent = pieces.last().unwrap().load > Rational::zero();
    Ok(WorkloadCurve { pieces, divergent })
}

/// Reruns the mechanism with `machine`'s claimed speed set to `1/b` for each
/// breakpoint. For a rounding-base-beta mechanism the workload is constant
/// between consecutive powers of beta, so the breakpoints are exact and there
/// is no sampling error; otherwise a caller-supplied grid is required.
pub fn workload_curve(
    instance: &Instance,
    mechanism: &Mechanism,
    machine: usize,
    b_min: &Rational,
    b_max: &Rational,
    grid: Option<&[Rational]>,
) -> Result<WorkloadCurve> {
    if machine >= instance.num_machines() {
        return Err(Error::UnknownMachine(machine));
    }
    if *b_min <= Rational::zero() || b_min >= b_max {
        return Err(Error::NonPositive("curve domain".into()));
    }
    let mut bounds: Vec<Rational> = vec![b_min.clone(), b_max.clone()];
    match mechanism.rounding_base() {
        Some(base) if !base.is_one() => {
            // powers of the base inside (b_min, b_max)
            let mut p = Rational::one();
            while p > *b_min {
                p /= base;
            }
            while p < *b_max {
                p *= base;
                if p > *b_min && p < *b_max {
                    bounds.push(p.clone());
                }
            }
        }
        _ => {
            let grid = grid.ok_or_else(|| {
                Error::Internal("unrounded mechanism needs an explicit grid".into())
            })?;
            for g in grid {
                if g > b_min && g < b_max {
                    bounds.push(g.clone());
                }
            }
        }
    }
    bounds.sort();
    bounds.dedup();
    let mut pieces = Vec::with_capacity(bounds.len() - 1);
    for w in bounds.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        // sample at the right endpoint: the announced speed is constant on (lo, hi]
        let mut probe = instance.clone();
        probe.machines[machine].claimed_speed = Rational::one() / hi;
        let outcome = mechanism.run(&probe)?;
        pieces.push(CurvePiece {
            lo: lo.clone(),
            hi: hi.clone(),
            load: outcome.state.machines[machine].workload.clone(),
        });
    }
    curve_from_pieces(pieces)
}

/// `P(b) = b*L(b) + integral of L over [b, b_max]`, exact on the
/// piecewise-constant curve. The flag marks a truncated (divergent) tail.
pub fn payment(curve: &WorkloadCurve, b: &Rational) -> Result<(Rational, bool)> {
    let load = curve.load_at(b)?.clone();
    let mut integral = Rational::zero();
    for p in &curve.pieces {
        if &p.hi <= b {
            continue;
        }
        let lo = if &p.lo > b { p.lo.clone() } else { b.clone() };
        integral += (&p.hi - lo) * &p.load;
    }
    Ok((b * load + integral, curve.divergent))
}

/// Utility of claiming `b_claimed` with true inverse speed `b_true`:
/// `P(b_claimed) - b_true * L(b_claimed)`.
pub fn utility(curve: &WorkloadCurve, b_claimed: &Rational, b_true: &Rational) -> Result<Rational> {
    let (pay, _) = payment(curve, b_claimed)?;
    let load = curve.load_at(b_claimed)?;
    Ok(pay - b_true * load)
}
