//! JSON wire formats. Rationals travel as `"p/q"` strings (integers allowed
//! on input); outputs also carry decimal fields for plotting.

use serde_json::{json, Value};

use crate::core::Instance;
use crate::error::{Error, Result};
use crate::opt::OptResult;
use crate::outcome::MechanismOutcome;
use crate::rational::{parse_rational, rational_to_f64, rational_to_string, Rational};
use crate::verify::{Verdict, VerificationReport};

pub const SCHEMA_VERSION: u32 = 1;

fn rational_field(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => Err(Error::Parse(format!("{what}: expected rational, got {v}"))),
    }
}

/// Parses `{"machines":[{"speed":...}],"jobs":[{"size":...}],"seed":n}`.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let machines = v
        .get("machines")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing field \"machines\"".into()))?;
    let jobs = v
        .get("jobs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing field \"jobs\"".into()))?;
    let seed = v.get("seed").and_then(Value::as_u64).unwrap_or(0);
    let speeds = machines
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let s = m
                .get("speed")
                .ok_or_else(|| Error::Parse(format!("machine {i}: missing \"speed\"")))?;
            rational_field(s, &format!("machine {i} speed"))
        })
        .collect::<Result<Vec<_>>>()?;
    let sizes = jobs
        .iter()
        .enumerate()
        .map(|(i, j)| {
            let s = j
                .get("size")
                .ok_or_else(|| Error::Parse(format!("job {i}: missing \"size\"")))?;
            rational_field(s, &format!("job {i} size"))
        })
        .collect::<Result<Vec<_>>>()?;
    let instance = Instance::new(speeds, sizes, seed);
    instance.validate()?;
    Ok(instance)
}

pub fn instance_to_json(instance: &Instance) -> Value {
    json!({
        "machines": instance
            .machines
            .iter()
            .map(|m| json!({"speed": rational_to_string(&m.true_speed)}))
            .collect::<Vec<_>>(),
        "jobs": instance
            .jobs
            .iter()
            .map(|j| json!({"size": rational_to_string(&j.true_size)}))
            .collect::<Vec<_>>(),
        "seed": instance.seed,
    })
}

fn price_to_json(p: &Option<Rational>) -> Value {
    match p {
        Some(r) => Value::String(rational_to_string(r)),
        None => Value::String("inf".into()),
    }
}

/// Trace: one entry per step with prices, the chosen machine, the charge, and
/// the announced-speed makespans after the assignment.
pub fn outcome_to_json(outcome: &MechanismOutcome, mechanism: &str) -> Value {
    use crate::core::SpeedBasis;
    let steps: Vec<Value> = outcome
        .steps
        .iter()
        .map(|s| {
            json!({
                "job": s.job,
                "reported_size": rational_to_string(&s.reported_size),
                "prices": s.prices.prices.iter().map(price_to_json).collect::<Vec<_>>(),
                "chosen": s.chosen,
                "charge": rational_to_string(&s.charge),
                "cost": rational_to_string(&s.cost),
                "makespans": s.makespans.iter().map(|m| rational_to_string(m)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let alg_announced = outcome.alg(SpeedBasis::Announced);
    let alg_true = outcome.alg(SpeedBasis::True);
    json!({
        "schema_version": SCHEMA_VERSION,
        "mechanism": mechanism,
        "steps": steps,
        "announced_speeds": outcome.state.machines.iter()
            .map(|m| rational_to_string(&m.announced_speed)).collect::<Vec<_>>(),
        "workloads": outcome.state.machines.iter()
            .map(|m| rational_to_string(&m.workload)).collect::<Vec<_>>(),
        "alg_makespan_announced": rational_to_string(&alg_announced),
        "alg_makespan_true": rational_to_string(&alg_true),
        "alg_makespan_true_dec": rational_to_f64(&alg_true),
        "winner_payment": outcome.winner_payment.as_ref().map(|(i, p)| json!({
            "machine": i,
            "amount": rational_to_string(p),
        })),
    })
}

pub fn opt_result_to_json(r: &OptResult) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "value": rational_to_string(&r.value),
        "value_dec": rational_to_f64(&r.value),
        "exact": r.exact,
        "witness": r.witness,
        "lower_bound": rational_to_string(&r.lower_bound),
        "upper_bound": rational_to_string(&r.upper_bound),
    })
}

pub fn report_to_json(r: &VerificationReport) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "property": r.property,
        "verdict": match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inapplicable => "inapplicable",
        },
        "counterexample": r.counterexample,
    })
}
