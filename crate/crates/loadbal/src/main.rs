//! Experiment runner: generate instances, run mechanisms, compute optima,
//! verify properties, build payment curves, and sweep families for ratio
//! tables. Exit codes: 0 ok, 1 verification failure, 2 usage/parse error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::One;
use rayon::prelude::*;
use serde_json::json;

use loadbal::core::{Instance, SpeedBasis};
use loadbal::error::Error;
use loadbal::generators::{self, Family, FamilySpec};
use loadbal::jsonio::{
    self, instance_from_json, instance_to_json, opt_result_to_json, outcome_to_json,
    report_to_json,
};
use loadbal::mechanism::Mechanism;
use loadbal::opt::{opt2_sandwich, opt_exact, OptBudget, SpeedMode};
use loadbal::payments::{payment, utility, workload_curve};
use loadbal::rational::{parse_rational, rat_int, rational_to_f64, rational_to_string, Rational};
use loadbal::verify::{
    check_anonymity, check_fairness, check_well_behaved_trace, default_bid_grid,
    default_misreport_grid, scan_job_truthfulness, scan_machine_monotonicity, Verdict,
    VerificationReport, WellBehavedMode,
};

#[derive(Parser)]
#[command(name = "loadbal", about = "Online load balancing mechanism simulator")]
struct Cli {
    /// Override the instance seed (tie-break ordering and generators).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rounding base for the posted-price mechanism.
    #[arg(long, global = true, default_value = "2")]
    rounding_base: String,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArg {
    /// Path to an instance JSON file ("-" for stdin).
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Emit an instance from one of the built-in families.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Greedy counterexample parameter.
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[arg(long, default_value = "1")]
        p_min: String,
        #[arg(long, default_value = "8")]
        p_max: String,
        /// Draw arbitrary dyadic speeds instead of powers of 2.
        #[arg(long)]
        raw_speeds: bool,
    },
    /// Run a mechanism on an instance and emit the full trace.
    Run {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value = "ppr")]
        mechanism: String,
    },
    /// Offline optimal makespan (exact when within budget).
    Opt {
        #[command(flatten)]
        instance: InstanceArg,
        /// Round speeds down to powers of this base first.
        #[arg(long)]
        rounded: Option<String>,
        #[arg(long, default_value_t = 18)]
        budget: usize,
    },
    /// Check a property of a mechanism on an instance, or run the full suite.
    Verify {
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value = "ppr")]
        mechanism: String,
        /// wb-strong | wb-weak | fair | anon | mono-machine | truth-job | suite
        #[arg(long, default_value = "suite")]
        property: String,
        /// Machine index for mono-machine.
        #[arg(long, default_value_t = 0)]
        machine: usize,
        /// Job index for truth-job; all jobs when omitted.
        #[arg(long)]
        job: Option<usize>,
        /// Seeds for the suite battery.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
    /// Workload curve, payments, and utilities for one machine.
    Payments {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value = "ppr")]
        mechanism: String,
        #[arg(long, default_value_t = 0)]
        machine: usize,
    },
    /// Ratio experiments over a family: CSV of per-(m, seed) rows.
    Sweep {
        #[arg(long, default_value = "random")]
        family: String,
        #[arg(long, default_value = "ppr")]
        mechanism: String,
        /// Comma-separated machine counts.
        #[arg(long, default_value = "2,4,8,16")]
        m_list: String,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("LOADBAL_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_instance(path: &PathBuf, seed_override: Option<u64>) -> Result<Instance, Error> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        std::fs::read_to_string(path)?
    };
    let mut inst = instance_from_json(&text)?;
    if let Some(seed) = seed_override {
        inst.seed = seed;
    }
    Ok(inst)
}

fn emit(cli: &Cli, text: &str) -> Result<(), Error> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    match &cli.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            writeln!(f, "{text}")?;
        }
        None => {
            // tolerate a closed pipe (e.g. `loadbal sweep | head`)
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{text}");
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    let base = parse_rational(&cli.rounding_base)?;
    if base < Rational::one() {
        return Err(Error::Parse("rounding base must be >= 1".into()));
    }
    match &cli.command {
        Command::Gen {
            family,
            m,
            n,
            eps,
            p_min,
            p_max,
            raw_speeds,
        } => {
            let spec = FamilySpec {
                family: Family::parse(family)?,
                machines: *m,
                jobs: *n,
                seed: cli.seed.unwrap_or(0),
                eps: parse_rational(eps)?,
                p_min: parse_rational(p_min)?,
                p_max: parse_rational(p_max)?,
                raw_speeds: *raw_speeds,
                ..Default::default()
            };
            let inst = generators::generate(&spec)?;
            emit(cli, &instance_to_json(&inst).to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            instance,
            mechanism,
        } => {
            let inst = read_instance(&instance.instance, cli.seed)?;
            let mech = Mechanism::parse(mechanism, base)?;
            let outcome = mech.run(&inst)?;
            emit(cli, &outcome_to_json(&outcome, mech.name()).to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Opt {
            instance,
            rounded,
            budget,
        } => {
            let inst = read_instance(&instance.instance, cli.seed)?;
            let mode = match rounded {
                Some(b) => SpeedMode::Rounded(parse_rational(b)?),
                None => SpeedMode::True,
            };
            let r = opt_exact(&inst, &mode, &OptBudget { max_jobs: *budget })?;
            emit(cli, &opt_result_to_json(&r).to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            instance,
            mechanism,
            property,
            machine,
            job,
            seeds,
        } => {
            let mech = Mechanism::parse(mechanism, base.clone())?;
            let reports = if property == "suite" {
                run_suite(&mech, &base, *seeds)?
            } else {
                let inst = match instance {
                    Some(p) => read_instance(p, cli.seed)?,
                    None => {
                        return Err(Error::Parse(
                            "--instance is required unless --property suite".into(),
                        ))
                    }
                };
                run_single_property(&inst, &mech, &base, property, *machine, *job)?
            };
            let all_pass = reports.iter().all(|r| r.passed());
            let body = json!({
                "schema_version": jsonio::SCHEMA_VERSION,
                "reports": reports.iter().map(report_to_json).collect::<Vec<_>>(),
                "pass": all_pass,
            });
            emit(cli, &body.to_string())?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Payments {
            instance,
            mechanism,
            machine,
        } => {
            let inst = read_instance(&instance.instance, cli.seed)?;
            let mech = Mechanism::parse(mechanism, base)?;
            let csv = payments_csv(&inst, &mech, *machine)?;
            emit(cli, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            family,
            mechanism,
            m_list,
            seeds,
            n,
        } => {
            let mech = Mechanism::parse(mechanism, base)?;
            let family = Family::parse(family)?;
            let ms: Vec<usize> = m_list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad machine count {s:?}")))
                })
                .collect::<Result<_, _>>()?;
            let csv = sweep_csv(family, &mech, &ms, *seeds, *n)?;
            emit(cli, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_single_property(
    inst: &Instance,
    mech: &Mechanism,
    base: &Rational,
    property: &str,
    machine: usize,
    job: Option<usize>,
) -> Result<Vec<VerificationReport>, Error> {
    let reports = match property {
        "wb-strong" | "wb-weak" => {
            let mode = if property == "wb-strong" {
                WellBehavedMode::Strong
            } else {
                WellBehavedMode::Weak
            };
            let outcome = mech.run(inst)?;
            let basis = match mech {
                Mechanism::GreedyTrue => SpeedBasis::True,
                _ => SpeedBasis::Announced,
            };
            vec![check_well_behaved_trace(&outcome, mode, basis)?]
        }
        "fair" => {
            let outcome = mech.run(inst)?;
            vec![check_fairness(&outcome.state)]
        }
        "anon" => {
            // reversal permutation exercises every position
            let m = inst.num_machines();
            let sigma: Vec<usize> = (0..m).rev().collect();
            vec![check_anonymity(inst, mech, &sigma)?]
        }
        "mono-machine" => {
            let grid = default_bid_grid(inst, base);
            vec![scan_machine_monotonicity(inst, mech, machine, &grid)?]
        }
        "truth-job" => {
            let jobs: Vec<usize> = match job {
                Some(j) => vec![j],
                None => (0..inst.num_jobs()).collect(),
            };
            jobs.into_iter()
                .map(|j| {
                    let grid = default_misreport_grid(inst, j);
                    scan_job_truthfulness(inst, mech, j, &grid)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        other => return Err(Error::Parse(format!("unknown property {other:?}"))),
    };
    Ok(reports)
}

/// Property battery over seeded random instances: per-step well-behavior,
/// fairness, anonymity, and a job-truthfulness sample for each seed.
fn run_suite(
    mech: &Mechanism,
    base: &Rational,
    seeds: u64,
) -> Result<Vec<VerificationReport>, Error> {
    if seeds == 0 {
        eprintln!("warning: empty seed list, suite passes vacuously");
        return Ok(Vec::new());
    }
    let results: Vec<Result<Vec<VerificationReport>, Error>> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let spec = FamilySpec {
                machines: 2 + (seed as usize % 6),
                jobs: 8 + (seed as usize % 8),
                seed,
                ..Default::default()
            };
            let inst = generators::generate(&spec)?;
            let mut reports = Vec::new();
            let outcome = mech.run(&inst)?;
            reports.push(check_well_behaved_trace(
                &outcome,
                WellBehavedMode::Strong,
                SpeedBasis::Announced,
            )?);
            reports.push(check_fairness(&outcome.state));
            let sigma: Vec<usize> = (0..inst.num_machines()).rev().collect();
            reports.push(check_anonymity(&inst, mech, &sigma)?);
            let job = seed as usize % inst.num_jobs();
            let grid = default_misreport_grid(&inst, job);
            reports.push(scan_job_truthfulness(&inst, mech, job, &grid)?);
            let bid_grid = default_bid_grid(&inst, base);
            if inst.num_machines() == 2 {
                reports.push(scan_machine_monotonicity(&inst, mech, 0, &bid_grid)?);
            }
            Ok(reports)
        })
        .collect();
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    Ok(all)
}

/// CSV columns: b, L, P, utility_truth, utility_best_lie. The truthful bid is
/// the machine's current inverse claimed speed.
fn payments_csv(inst: &Instance, mech: &Mechanism, machine: usize) -> Result<String, Error> {
    if machine >= inst.num_machines() {
        return Err(Error::UnknownMachine(machine));
    }
    let b_true = Rational::one() / &inst.machines[machine].claimed_speed;
    let b_min = &b_true / rat_int(16);
    let b_max = &b_true * rat_int(1 << 20);
    let grid: Vec<Rational> = (0..=24).map(|k| &b_min * rat_int(1 << k.min(40))).collect();
    let curve = workload_curve(inst, mech, machine, &b_min, &b_max, Some(&grid))?;
    let utility_truth = utility(&curve, &b_true, &b_true)?;
    let mut best_lie: Option<Rational> = None;
    let mut rows = Vec::new();
    for piece in &curve.pieces {
        let b = piece.hi.clone();
        let (pay, _) = payment(&curve, &b)?;
        let u = utility(&curve, &b, &b_true)?;
        if b != b_true {
            best_lie = Some(match best_lie {
                None => u.clone(),
                Some(x) => x.max(u.clone()),
            });
        }
        rows.push((b, piece.load.clone(), pay, u));
    }
    let best_lie = best_lie.unwrap_or_else(|| utility_truth.clone());
    let mut out = String::from("b,L,P,utility_truth,utility_best_lie\n");
    for (b, load, pay, _) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rational_to_string(&b),
            rational_to_string(&load),
            rational_to_string(&pay),
            rational_to_string(&utility_truth),
            rational_to_string(&best_lie),
        ));
    }
    Ok(out)
}

fn sweep_csv(
    family: Family,
    mech: &Mechanism,
    ms: &[usize],
    seeds: u64,
    n: usize,
) -> Result<String, Error> {
    let mut cells: Vec<(usize, u64)> = Vec::new();
    for &m in ms {
        for seed in 0..seeds {
            cells.push((m, seed));
        }
    }
    let rows: Vec<Result<String, Error>> = cells
        .par_iter()
        .map(|&(m, seed)| {
            let start = Instant::now();
            let spec = FamilySpec {
                family,
                machines: m,
                jobs: n,
                seed,
                ..Default::default()
            };
            let inst = generators::generate(&spec)?;
            let outcome = mech.run(&inst)?;
            let alg = outcome.alg(SpeedBasis::True);
            let budget = OptBudget::default();
            let (opt, opt2) = match mech.rounding_base() {
                Some(b) if !b.is_one() => {
                    let (o, o2) = opt2_sandwich(&inst, b, &budget)?;
                    (o, Some(o2))
                }
                _ => (opt_exact(&inst, &SpeedMode::True, &budget)?, None),
            };
            let wb_strong = check_well_behaved_trace(
                &outcome,
                WellBehavedMode::Strong,
                SpeedBasis::Announced,
            )?;
            let wb_weak = check_well_behaved_trace(
                &outcome,
                WellBehavedMode::Weak,
                SpeedBasis::Announced,
            )?;
            let fair = check_fairness(&outcome.state);
            let sigma: Vec<usize> = (0..m).rev().collect();
            let anon = check_anonymity(&inst, mech, &sigma)?;
            let ratio = if opt.exact {
                format!("{:.6}", rational_to_f64(&alg) / rational_to_f64(&opt.value))
            } else {
                "inexact".into()
            };
            let verdict = |r: &VerificationReport| match r.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
                Verdict::Inapplicable => "n/a",
            };
            Ok(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                mech.name(),
                family.name(),
                m,
                n,
                seed,
                rational_to_string(&alg),
                rational_to_f64(&alg),
                rational_to_string(&opt.value),
                opt2.as_ref()
                    .map(|o| rational_to_string(&o.value))
                    .unwrap_or_default(),
                ratio,
                verdict(&wb_strong),
                verdict(&wb_weak),
                verdict(&fair),
                verdict(&anon),
                start.elapsed().as_millis(),
            ))
        })
        .collect();
    let mut out = String::from(
        "mechanism,family,m,n,seed,alg_makespan,alg_makespan_dec,opt,opt2,ratio,\
         wb_strong,wb_weak,fair,anonymous,runtime_ms\n",
    );
    for r in rows {
        out.push_str(&r?);
    }
    Ok(out)
}
