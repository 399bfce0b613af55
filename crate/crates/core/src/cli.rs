//! Command-line surface of the `mfg` binary.
//!
//! Each subcommand reads an instance, runs one solver family and writes its
//! results into the output directory. Exit codes: 0 success, 2 bad input,
//! 3 solver failure, 4 nonexistence certified, 5 equilibrium search
//! inconclusive.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{self, RestPoint, Stability};
use crate::equilibrium::{self, CaseLabel, FixedPointOptions};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::game::{
    Discount, EquilibriumReport, GameInstance, MassDistribution, ResourceModel, Verdict,
};
use crate::io;
use crate::sojourn::{self, KktResidual};
use crate::utility;
use crate::welfare;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_NONEXISTENCE: i32 = 4;
pub const EXIT_UNKNOWN: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "mfg",
    version,
    about = "Solver for stateless mean-field congestion games"
)]
pub struct RunConfig {
    /// Game instance JSON file.
    #[arg(long = "instance", global = true, value_name = "PATH")]
    pub instance_path: Option<PathBuf>,
    /// Directory receiving the output files.
    #[arg(long = "out", global = true, default_value = ".", value_name = "DIR")]
    pub output_dir: PathBuf,
    /// Overrides the instance's equilibrium tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sojourn times, rates and waits for one distribution (sojourn.json).
    Sojourn {
        /// Mass on action 1 of a two-action instance.
        #[arg(long, conflicts_with = "mu")]
        mu1: Option<f64>,
        /// Comma-separated masses, one per action (default: even split).
        #[arg(long, value_delimiter = ',')]
        mu: Option<Vec<f64>>,
    },
    /// Stationary equilibrium (equilibrium.json).
    Equilibrium,
    /// Projection-dynamics trace and rest points (trace.csv, rest_points.json).
    Dynamics {
        /// Initial mass on action 1 (default: m / 2).
        #[arg(long)]
        start: Option<f64>,
        /// Euler step (default: 1e-3 * max(t_1, t_2)).
        #[arg(long)]
        step: Option<f64>,
        /// Integration horizon (default: 200 * max(t_1, t_2)).
        #[arg(long)]
        t_end: Option<f64>,
        /// Write every k-th step to trace.csv.
        #[arg(long, default_value_t = 100)]
        stride: usize,
        /// Also write the drift sampled on a grid (field.csv).
        #[arg(long)]
        field: bool,
        /// Grid cells for the rest-point scan.
        #[arg(long, default_value_t = dynamics::DEFAULT_GRID)]
        grid: usize,
    },
    /// Social optimum, equilibrium welfare and price of anarchy (poa.json).
    Poa,
    /// Characteristic number of an exponential instance (chi.json).
    Chi,
    /// Constructed witness instances (instance.json, witness.json).
    Witness {
        #[arg(long, value_enum)]
        kind: WitnessKind,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1e-4)]
        t1: f64,
        #[arg(long, default_value_t = 1.0)]
        t2: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
    },
    /// Regenerates the bundled worked examples and a seeded sweep.
    Reproduce {
        /// Instances in the randomized sweep.
        #[arg(long, default_value_t = 100)]
        sweep: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Exponential,
    Powerlaw,
    Switching,
}

/// Files written and the exit code to report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(files: Vec<PathBuf>) -> Self {
        Self {
            files,
            exit_code: 0,
        }
    }
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Solver(_) | Error::SlackConstraint { .. } | Error::Io(_) => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        Self { code, error }
    }
}

type CmdResult = std::result::Result<Outcome, Failure>;

pub fn run(config: &RunConfig) -> CmdResult {
    match &config.command {
        Command::Sojourn { mu1, mu } => cmd_sojourn(config, *mu1, mu.as_deref()),
        Command::Equilibrium => cmd_equilibrium(config),
        Command::Dynamics {
            start,
            step,
            t_end,
            stride,
            field,
            grid,
        } => cmd_dynamics(
            config,
            DynamicsArgs {
                start: *start,
                step: *step,
                t_end: *t_end,
                stride: *stride,
                field: *field,
                grid: *grid,
            },
        ),
        Command::Poa => cmd_poa(config),
        Command::Chi => cmd_chi(config),
        Command::Witness {
            kind,
            beta,
            t1,
            t2,
            alpha,
            epsilon,
        } => cmd_witness(
            config,
            WitnessArgs {
                kind: *kind,
                beta: *beta,
                t1: *t1,
                t2: *t2,
                alpha: *alpha,
                epsilon: *epsilon,
            },
        ),
        Command::Reproduce { sweep } => cmd_reproduce(config, *sweep),
    }
}

/// Loads the instance (exit 2 on any failure) and applies `--tol`.
fn load(config: &RunConfig) -> std::result::Result<GameInstance, Failure> {
    let input = |error| Failure {
        code: EXIT_INPUT,
        error,
    };
    let path = config
        .instance_path
        .as_ref()
        .ok_or_else(|| input(Error::Precondition("--instance PATH is required".into())))?;
    let mut instance = io::read_instance(path).map_err(input)?;
    if let Some(tol) = config.tol {
        if !(tol > 0.0) {
            return Err(input(Error::Precondition(format!(
                "--tol {tol} must be positive"
            ))));
        }
        instance.tolerances.equilibrium = tol;
    }
    Ok(instance)
}

fn out(config: &RunConfig, name: &str) -> PathBuf {
    config.output_dir.join(name)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    io::write_json(path, value)?;
    log::info!("wrote {}", path.display());
    Ok(path.to_path_buf())
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    io::write_atomic(path, text.as_bytes())?;
    log::info!("wrote {}", path.display());
    Ok(path.to_path_buf())
}

#[derive(Debug, Serialize)]
struct SojournOutput<'a> {
    distribution: &'a MassDistribution,
    taus: &'a [f64],
    rates: &'a [f64],
    waits: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    multiplier: Option<f64>,
    kkt: KktResidual,
}

pub fn cmd_sojourn(config: &RunConfig, mu1: Option<f64>, mu: Option<&[f64]>) -> CmdResult {
    let instance = load(config)?;
    let n = instance.n_actions();
    let m = instance.total_mass;
    let distribution = match (mu1, mu) {
        (Some(mu1), _) => {
            if n != 2 {
                return Err(Error::Precondition("--mu1 needs a two-action instance".into()).into());
            }
            if !(0.0..=m).contains(&mu1) {
                return Err(Error::InvalidDistribution(format!(
                    "--mu1 {mu1} lies outside [0, {m}]"
                ))
                .into());
            }
            instance.split(mu1)
        }
        (None, Some(masses)) => MassDistribution::new(masses.to_vec())?,
        (None, None) => MassDistribution::new(vec![m / n as f64; n])?,
    };
    let profile = sojourn::solve(&instance, &distribution)?;
    let kkt = sojourn::kkt_residual(&instance, &distribution, &profile)?;
    let output = SojournOutput {
        distribution: &distribution,
        taus: &profile.taus,
        rates: &profile.rates,
        waits: &profile.waits,
        multiplier: profile.multiplier,
        kkt,
    };
    Ok(Outcome::ok(vec![write_json(
        &out(config, "sojourn.json"),
        &output,
    )?]))
}

/// Equilibrium search result with the method that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumOutput {
    pub method: &'static str,
    pub report: EquilibriumReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseLabel>,
    /// Every equilibrium found (the rest-point scan can find several).
    pub equilibria: Vec<EquilibriumReport>,
}

/// Picks the solver matching the instance: closed forms for constant
/// execution times, candidate enumeration for steep power-law discounting,
/// the rest-point scan for the shared model, the fixed point otherwise.
pub fn solve_equilibrium(instance: &GameInstance) -> Result<EquilibriumOutput> {
    let tol = instance.tolerances.equilibrium;
    let constant = matches!(
        instance.resource_model,
        ResourceModel::ParallelConstant { .. }
    );
    let steep = matches!(instance.discount, Discount::PowerLaw { alpha } if alpha > 1.0);
    if let ResourceModel::SharedTwoAction { .. } = instance.resource_model {
        let points = dynamics::find_rest_points(instance, dynamics::DEFAULT_GRID)?;
        let equilibria = points
            .iter()
            .map(|p| rest_point_report(instance, p))
            .collect::<Result<Vec<_>>>()?;
        let primary = points
            .iter()
            .position(|p| p.stability == Stability::Stable)
            .unwrap_or(0);
        let report = equilibria
            .get(primary)
            .cloned()
            .ok_or_else(|| Error::Solver("the rest-point scan found no equilibrium".into()))?;
        return Ok(EquilibriumOutput {
            method: "rest_point_scan",
            report,
            case: None,
            equilibria,
        });
    }
    if steep {
        if constant && instance.n_actions() == 2 {
            let report = equilibrium::detect_nonexistence_two_action(instance)?;
            return Ok(single("candidate_enumeration", report, None));
        }
        let mut report = equilibrium::verify_equilibrium(instance, &instance.concentrated(0), tol)?;
        report.verdict = Verdict::Unknown;
        return Ok(single("unsupported", report, None));
    }
    if constant {
        let closed = match instance.discount {
            Discount::Exponential { .. } => equilibrium::solve_constant_exponential(instance),
            Discount::PowerLaw { .. } => equilibrium::solve_constant_powerlaw(instance),
        };
        match closed {
            Ok(s) => return Ok(single("closed_form", s.report, Some(s.case))),
            Err(Error::Precondition(reason)) => {
                log::info!("closed form unavailable ({reason}); using the fixed point")
            }
            Err(e) => return Err(e),
        }
    }
    let opts = FixedPointOptions {
        tol,
        ..Default::default()
    };
    let report = equilibrium::solve_fixed_point(instance, &opts)?;
    Ok(single("fixed_point", report, None))
}

fn single(
    method: &'static str,
    report: EquilibriumReport,
    case: Option<CaseLabel>,
) -> EquilibriumOutput {
    let equilibria = if report.verdict == Verdict::Equilibrium {
        vec![report.clone()]
    } else {
        Vec::new()
    };
    EquilibriumOutput {
        method,
        report,
        case,
        equilibria,
    }
}

fn rest_point_report(instance: &GameInstance, p: &RestPoint) -> Result<EquilibriumReport> {
    // Interior roots are located to 1e-10 in mass, so their payoff gap is
    // checked against a tolerance scaled by the local slope.
    let slope = p.derivative.unwrap_or(0.0).abs();
    let tol = instance.tolerances.equilibrium.max(1e-9 * slope);
    equilibrium::verify_equilibrium(instance, &instance.split(p.mu1), tol)
}

pub fn cmd_equilibrium(config: &RunConfig) -> CmdResult {
    let instance = load(config)?;
    let output = solve_equilibrium(&instance)?;
    let file = write_json(&out(config, "equilibrium.json"), &output)?;
    let exit_code = match output.report.verdict {
        Verdict::NonexistenceCertified => EXIT_NONEXISTENCE,
        Verdict::Unknown | Verdict::NotEquilibrium => EXIT_UNKNOWN,
        Verdict::Equilibrium => 0,
    };
    Ok(Outcome {
        files: vec![file],
        exit_code,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DynamicsArgs {
    pub start: Option<f64>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub stride: usize,
    pub field: bool,
    pub grid: usize,
}

#[derive(Debug, Serialize)]
struct RestPointsOutput<'a> {
    instance_digest: String,
    rest_points: &'a [RestPoint],
}

pub fn cmd_dynamics(config: &RunConfig, args: DynamicsArgs) -> CmdResult {
    let instance = load(config)?;
    if instance.n_actions() != 2 {
        return Err(Error::UnsupportedModel {
            operation: "dynamics",
            requirement: "exactly two actions",
        }
        .into());
    }
    let m = instance.total_mass;
    let start = args.start.unwrap_or(0.5 * m);
    let h = args
        .step
        .unwrap_or_else(|| dynamics::default_step(&instance));
    let scale = instance
        .resource_model
        .base_time(0)
        .max(instance.resource_model.base_time(1));
    let t_end = args.t_end.unwrap_or(200.0 * scale);
    if args.stride == 0 {
        return Err(Error::Precondition("--stride must be at least 1".into()).into());
    }
    let trace = dynamics::integrate(&instance, start, h, t_end)?;
    let last = trace.samples.len() - 1;
    let rows = trace
        .samples
        .iter()
        .enumerate()
        .filter(|(k, _)| k % args.stride == 0 || *k == last)
        .map(|(_, s)| {
            vec![
                s.time,
                s.mu1,
                s.mu2,
                s.drift,
                s.payoffs[0],
                s.payoffs[1],
                s.welfare,
            ]
        });
    let csv = io::csv_string(&["t", "mu1", "mu2", "drift", "F1", "F2", "SW"], rows);
    let mut files = vec![write_text(&out(config, "trace.csv"), &csv)?];
    let points = dynamics::find_rest_points(&instance, args.grid)?;
    let rest = RestPointsOutput {
        instance_digest: trace.instance_digest.clone(),
        rest_points: &points,
    };
    files.push(write_json(&out(config, "rest_points.json"), &rest)?);
    if args.field {
        let field = dynamics::drift_field(&instance, args.grid)?;
        let csv = io::csv_string(
            &["mu1", "drift"],
            field.into_iter().map(|(x, g)| vec![x, g]),
        );
        files.push(write_text(&out(config, "field.csv"), &csv)?);
    }
    Ok(Outcome::ok(files))
}

pub fn cmd_poa(config: &RunConfig) -> CmdResult {
    let instance = load(config)?;
    let found = solve_equilibrium(&instance)?;
    if found.equilibria.is_empty() {
        return Err(Failure {
            code: match found.report.verdict {
                Verdict::NonexistenceCertified => EXIT_NONEXISTENCE,
                _ => EXIT_UNKNOWN,
            },
            error: Error::Solver("no verified equilibrium to compare against".into()),
        });
    }
    let equilibria: Vec<MassDistribution> = found
        .equilibria
        .iter()
        .map(|r| r.distribution.clone())
        .collect();
    let report = welfare::price_of_anarchy(&instance, &equilibria)?;
    Ok(Outcome::ok(vec![write_json(
        &out(config, "poa.json"),
        &report,
    )?]))
}

pub fn cmd_chi(config: &RunConfig) -> CmdResult {
    let instance = load(config)?;
    let chi = welfare::characteristic_number(&instance)?;
    Ok(Outcome::ok(vec![write_json(
        &out(config, "chi.json"),
        &chi,
    )?]))
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessArgs {
    pub kind: WitnessKind,
    pub beta: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

#[derive(Debug, Serialize)]
struct WitnessOutput {
    kind: &'static str,
    equilibrium: MassDistribution,
    predicted_ratio: f64,
    limit: f64,
}

pub fn cmd_witness(config: &RunConfig, args: WitnessArgs) -> CmdResult {
    let instance_file = out(config, "instance.json");
    let witness_file = out(config, "witness.json");
    match args.kind {
        WitnessKind::Exponential | WitnessKind::Powerlaw => {
            let (kind, w) = if args.kind == WitnessKind::Exponential {
                (
                    "exponential",
                    welfare::witness_exponential(args.beta, args.t2, args.t1)?,
                )
            } else {
                ("powerlaw", welfare::witness_powerlaw(args.t1)?)
            };
            let output = WitnessOutput {
                kind,
                equilibrium: w.equilibrium,
                predicted_ratio: w.predicted_ratio,
                limit: w.limit,
            };
            Ok(Outcome::ok(vec![
                write_json(&instance_file, &w.instance)?,
                write_json(&witness_file, &output)?,
            ]))
        }
        WitnessKind::Switching => {
            let c = utility::build_switching_counterexample(args.alpha, args.epsilon)?;
            Ok(Outcome::ok(vec![
                write_json(&instance_file, &c.instance)?,
                write_json(&witness_file, &c)?,
            ]))
        }
    }
}

#[derive(Debug, Serialize)]
struct FixtureSummary {
    name: &'static str,
    method: &'static str,
    verdict: Verdict,
    equilibria: Vec<MassDistribution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rest_points: Option<Vec<RestPoint>>,
}

/// Random constant-time instance with exponential discounting, used by the
/// reproduction sweep.
pub fn random_sweep_instance(rng: &mut ChaCha8Rng) -> GameInstance {
    let n = rng.gen_range(1..=6);
    GameInstance {
        total_mass: rng.gen_range(0.1..10.0),
        rewards: (0..n).map(|_| rng.gen_range(0.2..5.0)).collect(),
        resource_model: ResourceModel::ParallelConstant {
            exec_times: (0..n).map(|_| rng.gen_range(0.1..3.0)).collect(),
            supply_rates: (0..n)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        f64::INFINITY
                    } else {
                        rng.gen_range(0.1..3.0)
                    }
                })
                .collect(),
        },
        discount: Discount::Exponential {
            beta: rng.gen_range(0.1..2.0),
        },
        tolerances: Default::default(),
    }
}

pub fn cmd_reproduce(config: &RunConfig, sweep: usize) -> CmdResult {
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for (name, instance) in fixtures::all() {
        files.push(write_json(
            &out(config, &format!("fixtures/{name}.json")),
            &instance,
        )?);
        let found = solve_equilibrium(&instance)?;
        let rest_points = match instance.resource_model {
            ResourceModel::SharedTwoAction { .. } => Some(dynamics::find_rest_points(
                &instance,
                dynamics::DEFAULT_GRID,
            )?),
            _ => None,
        };
        summaries.push(FixtureSummary {
            name,
            method: found.method,
            verdict: found.report.verdict,
            equilibria: found
                .equilibria
                .iter()
                .map(|r| r.distribution.clone())
                .collect(),
            rest_points,
        });
    }
    files.push(write_json(&out(config, "summary.json"), &summaries)?);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(sweep);
    for k in 0..sweep {
        let instance = random_sweep_instance(&mut rng);
        let closed = equilibrium::solve_constant_exponential(&instance);
        let fixed = equilibrium::solve_fixed_point(&instance, &FixedPointOptions::default())?;
        let (mu, gap) = match closed {
            Ok(s) => {
                let gap = s.report.distribution.max_abs_diff(&fixed.distribution);
                (s.report.distribution, gap)
            }
            Err(_) => (fixed.distribution.clone(), f64::NAN),
        };
        let poa = welfare::price_of_anarchy(&instance, &[mu])?;
        rows.push(vec![
            k as f64,
            instance.n_actions() as f64,
            instance.total_mass,
            poa.chi.unwrap_or(f64::NAN),
            poa.worst_ratio,
            gap,
        ]);
    }
    let csv = io::csv_string(
        &[
            "index",
            "n",
            "total_mass",
            "chi",
            "worst_ratio",
            "fixed_point_gap",
        ],
        rows,
    );
    files.push(write_text(&out(config, "sweep.csv"), &csv)?);
    Ok(Outcome::ok(files))
}

/// Configures logging from `MFG_LOG` (quiet, info or debug; default warn).
pub fn init_logging() {
    let level = match std::env::var("MFG_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
}
