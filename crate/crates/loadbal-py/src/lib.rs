//! Python bindings: instances, mechanism runs, the offline optimum, and the
//! property checkers. Structured results cross the boundary as JSON strings
//! so Python sees exactly what the CLI emits.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use loadbal::core::SpeedBasis;
use loadbal::generators::{generate, Family, FamilySpec};
use loadbal::jsonio::{
    instance_from_json, instance_to_json, opt_result_to_json, outcome_to_json, report_to_json,
};
use loadbal::mechanism::Mechanism;
use loadbal::opt::{opt_exact, OptBudget, SpeedMode};
use loadbal::rational::{parse_rational, rational_to_f64, rational_to_string};
use loadbal::verify::{
    check_anonymity, check_fairness, check_well_behaved_trace, default_bid_grid,
    default_misreport_grid, scan_job_truthfulness, scan_machine_monotonicity, WellBehavedMode,
};

fn err(e: loadbal::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mechanism(name: &str, rounding_base: &str) -> PyResult<Mechanism> {
    let base = parse_rational(rounding_base).map_err(err)?;
    Mechanism::parse(name, base).map_err(err)
}

/// A load-balancing instance: machine speeds, job sizes, and the seed that
/// fixes the tie-break ordering.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Instance {
    inner: loadbal::core::Instance,
}

#[pymethods]
impl Instance {
    /// Build from explicit speeds and sizes, given as rational strings
    /// ("3/2", "6", "0.6").
    #[new]
    #[pyo3(signature = (speeds, sizes, seed = 0))]
    fn new(speeds: Vec<String>, sizes: Vec<String>, seed: u64) -> PyResult<Self> {
        let speeds = speeds
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let sizes = sizes
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let inner = loadbal::core::Instance::new(speeds, sizes, seed);
        inner.validate().map_err(err)?;
        Ok(Instance { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Instance {
            inner: instance_from_json(text).map_err(err)?,
        })
    }

    /// Instance from a built-in family: "hardness", "greedy-counter",
    /// "random", "bounded", or "unit".
    #[staticmethod]
    #[pyo3(signature = (family, m = 4, n = 10, seed = 0, eps = "1/4"))]
    fn generate(family: &str, m: usize, n: usize, seed: u64, eps: &str) -> PyResult<Self> {
        let spec = FamilySpec {
            family: Family::parse(family).map_err(err)?,
            machines: m,
            jobs: n,
            seed,
            eps: parse_rational(eps).map_err(err)?,
            ..Default::default()
        };
        Ok(Instance {
            inner: generate(&spec).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        instance_to_json(&self.inner).to_string()
    }

    #[getter]
    fn num_machines(&self) -> usize {
        self.inner.num_machines()
    }

    #[getter]
    fn num_jobs(&self) -> usize {
        self.inner.num_jobs()
    }

    #[getter]
    fn speeds(&self) -> Vec<String> {
        self.inner
            .machines
            .iter()
            .map(|m| rational_to_string(&m.true_speed))
            .collect()
    }

    #[getter]
    fn sizes(&self) -> Vec<String> {
        self.inner
            .jobs
            .iter()
            .map(|j| rational_to_string(&j.true_size))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(machines={}, jobs={}, seed={})",
            self.inner.num_machines(),
            self.inner.num_jobs(),
            self.inner.seed,
        )
    }
}

/// Run a mechanism ("ppr", "vcg", "greedy-identical", "greedy-true") and
/// return the full trace as a JSON string.
#[pyfunction]
#[pyo3(signature = (instance, mechanism = "ppr", rounding_base = "2"))]
fn run(instance: &Instance, mechanism: &str, rounding_base: &str) -> PyResult<String> {
    let mech = parse_mechanism(mechanism, rounding_base)?;
    let outcome = mech.run(&instance.inner).map_err(err)?;
    Ok(outcome_to_json(&outcome, mech.name()).to_string())
}

/// The mechanism's final makespan on true speeds, as a float.
#[pyfunction]
#[pyo3(signature = (instance, mechanism = "ppr", rounding_base = "2"))]
fn alg_makespan(instance: &Instance, mechanism: &str, rounding_base: &str) -> PyResult<f64> {
    let mech = parse_mechanism(mechanism, rounding_base)?;
    let outcome = mech.run(&instance.inner).map_err(err)?;
    Ok(rational_to_f64(&outcome.alg(SpeedBasis::True)))
}

/// Offline optimal makespan as a JSON string; speeds are first rounded down
/// to powers of `rounded` when given.
#[pyfunction]
#[pyo3(signature = (instance, rounded = None, budget = 18))]
fn opt(instance: &Instance, rounded: Option<&str>, budget: usize) -> PyResult<String> {
    let mode = match rounded {
        None => SpeedMode::True,
        Some(b) => SpeedMode::Rounded(parse_rational(b).map_err(err)?),
    };
    let r = opt_exact(&instance.inner, &mode, &OptBudget { max_jobs: budget }).map_err(err)?;
    Ok(opt_result_to_json(&r).to_string())
}

/// Check one property and return the report as a JSON string. Properties:
/// "wb-strong", "wb-weak", "fair", "anon", "mono-machine", "truth-job".
#[pyfunction]
#[pyo3(signature = (instance, property, mechanism = "ppr", rounding_base = "2", machine = 0, job = 0))]
fn verify(
    instance: &Instance,
    property: &str,
    mechanism: &str,
    rounding_base: &str,
    machine: usize,
    job: usize,
) -> PyResult<String> {
    let mech = parse_mechanism(mechanism, rounding_base)?;
    let inst = &instance.inner;
    let report = match property {
        "wb-strong" | "wb-weak" => {
            let mode = if property == "wb-strong" {
                WellBehavedMode::Strong
            } else {
                WellBehavedMode::Weak
            };
            let outcome = mech.run(inst).map_err(err)?;
            check_well_behaved_trace(&outcome, mode, SpeedBasis::True).map_err(err)?
        }
        "fair" => {
            let outcome = mech.run(inst).map_err(err)?;
            check_fairness(&outcome.state)
        }
        "anon" => {
            let sigma: Vec<usize> = (0..inst.num_machines()).rev().collect();
            check_anonymity(inst, &mech, &sigma).map_err(err)?
        }
        "mono-machine" => {
            let base = parse_rational(rounding_base).map_err(err)?;
            let grid = default_bid_grid(inst, &base);
            scan_machine_monotonicity(inst, &mech, machine, &grid).map_err(err)?
        }
        "truth-job" => {
            let grid = default_misreport_grid(inst, job);
            scan_job_truthfulness(inst, &mech, job, &grid).map_err(err)?
        }
        other => return Err(PyValueError::new_err(format!("unknown property {other:?}"))),
    };
    Ok(report_to_json(&report).to_string())
}

#[pymodule]
fn loadbal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(alg_makespan, m)?)?;
    m.add_function(wrap_pyfunction!(opt, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
