//! Domain types shared by every solver: the game instance, mass
//! distributions, sojourn profiles and equilibrium reports.
//!
//! A game is the tuple `(m, A, r, tau, u)`: a mass `m` of nonatomic agents
//! repeatedly picks one of `n` actions, action `i` pays `r_i` when it
//! completes after the sojourn time `tau_i`, and rewards are discounted by
//! `u`. Sojourn times depend on how the mass is spread over the actions
//! through one of the [`ResourceModel`] variants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances carried by an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Accepted KKT / Little's-law residual of a sojourn profile.
    pub kkt: f64,
    /// Accepted equilibrium residual (payoff units).
    pub equilibrium: f64,
    /// Absolute bracket width for scalar bisections.
    pub bisection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kkt: 1e-10,
            equilibrium: 1e-8,
            bisection: 1e-12,
        }
    }
}

/// Monotone piecewise-linear execution time curve `t(x)` given as
/// `(rate, time)` knots. The first knot sits at rate 0; beyond the last knot
/// the final segment is extended (a single knot is a constant curve).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExecTimeCurve {
    pub knots: Vec<(f64, f64)>,
}

impl ExecTimeCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Self {
        Self { knots }
    }

    pub fn constant(time: f64) -> Self {
        Self {
            knots: vec![(0.0, time)],
        }
    }

    /// `t(x) = intercept + slope * x` sampled on `[0, upto]`.
    pub fn affine(intercept: f64, slope: f64, upto: f64) -> Self {
        Self {
            knots: vec![(0.0, intercept), (upto, intercept + slope * upto)],
        }
    }

    pub fn eval(&self, rate: f64) -> f64 {
        let k = &self.knots;
        if k.len() == 1 || rate <= k[0].0 {
            return k[0].1;
        }
        let seg = k
            .windows(2)
            .position(|w| rate <= w[1].0)
            .unwrap_or(k.len() - 2);
        let (x0, y0) = k[seg];
        let (x1, y1) = k[seg + 1];
        y0 + (y1 - y0) * (rate - x0) / (x1 - x0)
    }

    fn violations(&self, path: &str, out: &mut Vec<Violation>) {
        let k = &self.knots;
        if k.is_empty() {
            out.push(Violation::new(path, "curve needs at least one knot"));
            return;
        }
        if k[0].0 != 0.0 {
            out.push(Violation::new(path, "first knot must be at rate 0"));
        }
        if !(k[0].1 > 0.0) || !k[0].1.is_finite() {
            out.push(Violation::new(
                path,
                "execution time at rate 0 must be positive",
            ));
        }
        for (j, w) in k.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                out.push(Violation::new(
                    &format!("{path}[{}]", j + 1),
                    "knot rates must be finite and strictly increasing",
                ));
            }
            if !(w[1].1 >= w[0].1) || !w[1].1.is_finite() {
                out.push(Violation::new(
                    &format!("{path}[{}]", j + 1),
                    "execution times must be finite and nondecreasing",
                ));
            }
        }
    }
}

/// How sojourn times arise from a mass distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResourceModel {
    /// Independent resources, constant execution times `t_i`, supply rates
    /// `b_i` (possibly infinite).
    ParallelConstant {
        exec_times: Vec<f64>,
        #[serde(with = "crate::io::inf_vec")]
        supply_rates: Vec<f64>,
    },
    /// Independent resources whose execution times grow with the rate.
    ParallelIncreasing {
        exec_time_curves: Vec<ExecTimeCurve>,
        #[serde(with = "crate::io::inf_vec")]
        supply_rates: Vec<f64>,
    },
    /// Two actions drawing `gamma_i` units per completion from one resource
    /// replenished at rate `b`.
    SharedTwoAction {
        exec_times: [f64; 2],
        gammas: [f64; 2],
        supply_rate: f64,
    },
}

impl ResourceModel {
    pub fn is_parallel(&self) -> bool {
        !matches!(self, ResourceModel::SharedTwoAction { .. })
    }

    /// Execution time of action `i` at rate zero.
    pub fn base_time(&self, i: usize) -> f64 {
        match self {
            ResourceModel::ParallelConstant { exec_times, .. } => exec_times[i],
            ResourceModel::ParallelIncreasing {
                exec_time_curves, ..
            } => exec_time_curves[i].eval(0.0),
            ResourceModel::SharedTwoAction { exec_times, .. } => exec_times[i],
        }
    }
}

/// Discounting of a reward collected `t` time units after the start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discount {
    /// `u(r, t) = r e^{-beta t}`.
    Exponential { beta: f64 },
    /// `u(r, t) = r t^{-alpha}`; `alpha = 0` is the average-reward regime.
    PowerLaw { alpha: f64 },
}

impl Discount {
    /// Rate-form payoffs `r_i / tau_i` describe equilibria for power-law
    /// discounting with any alpha; exponential uses the discounted value.
    pub fn uses_reward_rate(&self) -> bool {
        matches!(self, Discount::PowerLaw { .. })
    }

    pub fn utility(&self, reward: f64, time: f64) -> f64 {
        match *self {
            Discount::Exponential { beta } => reward * (-beta * time).exp(),
            Discount::PowerLaw { alpha } => reward * time.powf(-alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    pub total_mass: f64,
    pub rewards: Vec<f64>,
    pub resource_model: ResourceModel,
    pub discount: Discount,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// One failed invariant, with the JSON-style path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: &str, message: &str) -> Self {
        Self {
            path: path.to_string(),
            message: message.to_string(),
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

fn positive_or_inf(x: f64) -> bool {
    x > 0.0 && !x.is_nan()
}

impl GameInstance {
    pub fn n_actions(&self) -> usize {
        self.rewards.len()
    }

    /// Enumerate every violated invariant. An empty list means the instance
    /// is valid.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.rewards.len();
        if !(self.total_mass >= 0.0) || !self.total_mass.is_finite() {
            out.push(Violation::new(
                "total_mass",
                "total mass must be nonnegative and finite",
            ));
        }
        if n == 0 {
            out.push(Violation::new("rewards", "at least one action is required"));
        }
        for (i, r) in self.rewards.iter().enumerate() {
            if !positive(*r) {
                out.push(Violation::new(
                    &format!("rewards[{i}]"),
                    "rewards must be positive",
                ));
            }
        }
        let arity = |out: &mut Vec<Violation>, path: &str, len: usize| {
            if len != n {
                out.push(Violation::new(
                    path,
                    &format!("expected {n} entries (one per action), found {len}"),
                ));
            }
        };
        match &self.resource_model {
            ResourceModel::ParallelConstant {
                exec_times,
                supply_rates,
            } => {
                arity(&mut out, "resource_model.exec_times", exec_times.len());
                arity(&mut out, "resource_model.supply_rates", supply_rates.len());
                for (i, t) in exec_times.iter().enumerate() {
                    if !positive(*t) {
                        out.push(Violation::new(
                            &format!("resource_model.exec_times[{i}]"),
                            "execution times must be positive",
                        ));
                    }
                }
                supply_violations(supply_rates, &mut out);
            }
            ResourceModel::ParallelIncreasing {
                exec_time_curves,
                supply_rates,
            } => {
                arity(
                    &mut out,
                    "resource_model.exec_time_curves",
                    exec_time_curves.len(),
                );
                arity(&mut out, "resource_model.supply_rates", supply_rates.len());
                for (i, c) in exec_time_curves.iter().enumerate() {
                    c.violations(&format!("resource_model.exec_time_curves[{i}]"), &mut out);
                }
                supply_violations(supply_rates, &mut out);
            }
            ResourceModel::SharedTwoAction {
                exec_times,
                gammas,
                supply_rate,
            } => {
                if n != 2 {
                    out.push(Violation::new(
                        "rewards",
                        "SharedTwoAction requires exactly 2 actions",
                    ));
                }
                for (i, t) in exec_times.iter().enumerate() {
                    if !positive(*t) {
                        out.push(Violation::new(
                            &format!("resource_model.exec_times[{i}]"),
                            "execution times must be positive",
                        ));
                    }
                }
                for (i, g) in gammas.iter().enumerate() {
                    if !positive(*g) {
                        out.push(Violation::new(
                            &format!("resource_model.gammas[{i}]"),
                            "resource usage must be positive",
                        ));
                    }
                }
                if !positive(*supply_rate) {
                    out.push(Violation::new(
                        "resource_model.supply_rate",
                        "shared supply rate must be positive and finite",
                    ));
                }
            }
        }
        match self.discount {
            Discount::Exponential { beta } if !positive(beta) => {
                out.push(Violation::new("discount.beta", "beta must be positive"));
            }
            Discount::PowerLaw { alpha } if !(alpha >= 0.0) || !alpha.is_finite() => {
                out.push(Violation::new(
                    "discount.alpha",
                    "alpha must be nonnegative",
                ));
            }
            _ => {}
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("kkt", tol.kkt),
            ("equilibrium", tol.equilibrium),
            ("bisection", tol.bisection),
        ] {
            if !positive(v) {
                out.push(Violation::new(
                    &format!("tolerances.{name}"),
                    "tolerances must be positive",
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(v))
        }
    }

    /// Checks that `mu` belongs to this instance: one entry per action and
    /// total mass at most `m` (up to rounding).
    pub fn check_distribution(&self, mu: &MassDistribution) -> Result<()> {
        if mu.len() != self.n_actions() {
            return Err(Error::DimensionMismatch {
                expected: self.n_actions(),
                got: mu.len(),
            });
        }
        let slack = 1e-12 * self.total_mass.max(1.0);
        if mu.mass() > self.total_mass + slack {
            return Err(Error::InvalidDistribution(format!(
                "mass {} exceeds total mass {}",
                mu.mass(),
                self.total_mass
            )));
        }
        Ok(())
    }

    /// Full-mass distribution concentrated on one action.
    pub fn concentrated(&self, action: usize) -> MassDistribution {
        let mut masses = vec![0.0; self.n_actions()];
        masses[action] = self.total_mass;
        MassDistribution { masses }
    }

    /// Two-action distribution `(mu1, m - mu1)`.
    pub fn split(&self, mu1: f64) -> MassDistribution {
        MassDistribution {
            masses: vec![mu1, (self.total_mass - mu1).max(0.0)],
        }
    }
}

fn supply_violations(rates: &[f64], out: &mut Vec<Violation>) {
    for (i, b) in rates.iter().enumerate() {
        if !positive_or_inf(*b) {
            out.push(Violation::new(
                &format!("resource_model.supply_rates[{i}]"),
                "supply rates must be positive (or \"inf\")",
            ));
        }
    }
}

/// Checks every instance invariant; violations are returned as data.
pub fn validate_instance(instance: &GameInstance) -> std::result::Result<(), Vec<Violation>> {
    let v = instance.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Nonnegative mass per action. Its total is the declared mass `m' <= m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MassDistribution {
    pub masses: Vec<f64>,
}

impl MassDistribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(**m >= 0.0) || !m.is_finite())
        {
            return Err(Error::InvalidDistribution(format!(
                "mass on action {i} is {m}; masses must be finite and nonnegative"
            )));
        }
        Ok(Self { masses })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.masses.len())
            .filter(|&i| self.masses[i] > 0.0)
            .collect()
    }

    pub fn max_abs_diff(&self, other: &MassDistribution) -> f64 {
        self.masses
            .iter()
            .zip(&other.masses)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for MassDistribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.masses[i]
    }
}

/// Sojourn times, completion rates and waiting times for one distribution.
///
/// For the shared two-action model `waits[i] = gamma_i * w` and `multiplier`
/// holds the common waiting time `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SojournProfile {
    pub taus: Vec<f64>,
    pub rates: Vec<f64>,
    pub waits: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub multiplier: Option<f64>,
}

/// Per-action stationary payoffs `F_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscountedPayoffVector {
    pub values: Vec<f64>,
    /// Set where `beta * tau` overflowed and the payoff was saturated to 0.
    #[serde(default)]
    pub saturated: Vec<bool>,
}

impl DiscountedPayoffVector {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equilibrium,
    NotEquilibrium,
    NonexistenceCertified,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub distribution: MassDistribution,
    pub support: Vec<usize>,
    pub strategy: Vec<f64>,
    pub payoffs: Vec<f64>,
    pub residual: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<usize>,
}

/// Little's law: `x_i = mu_i / tau_i`.
pub fn rates_from(mu: &MassDistribution, profile: &SojournProfile) -> Result<Vec<f64>> {
    if profile.taus.len() != mu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            got: profile.taus.len(),
        });
    }
    if let Some(t) = profile.taus.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::Precondition(format!(
            "sojourn time {t} is not positive"
        )));
    }
    Ok(mu
        .masses
        .iter()
        .zip(&profile.taus)
        .map(|(m, t)| m / t)
        .collect())
}

/// The stationary strategy compatible with `mu`: each action is chosen with
/// probability proportional to its completion rate.
pub fn strategy_from_distribution(
    mu: &MassDistribution,
    profile: &SojournProfile,
) -> Result<Vec<f64>> {
    let rates = rates_from(mu, profile)?;
    let total: f64 = rates.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Precondition(
            "strategy is undefined for an all-zero distribution".into(),
        ));
    }
    Ok(rates.iter().map(|x| x / total).collect())
}
