//! Projection dynamics for two-action games.
//!
//! Mass flows toward the better action at a rate equal to the payoff gap
//! `g(mu1) = F_1 - F_2`, clamped so the state stays in `[0, m]`. Rest points
//! are the interior roots of `g` plus any boundary where the clamp holds the
//! state in place.

use serde::{Deserialize, Serialize};

use crate::equilibrium::payoff_vector;
use crate::error::{Error, Result};
use crate::game::{Discount, GameInstance, ResourceModel, Tolerances};
use crate::numeric::bisect;
use crate::sojourn;
use crate::welfare::social_welfare;

/// Derivatives inside `[-MARGINAL_BAND, MARGINAL_BAND]` are inconclusive.
pub const MARGINAL_BAND: f64 = 1e-6;

/// Default number of grid cells for the rest-point scan.
pub const DEFAULT_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub time: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub drift: f64,
    pub payoffs: [f64; 2],
    pub welfare: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsTrace {
    pub samples: Vec<TraceSample>,
    pub step: f64,
    /// FNV-1a hash of the instance JSON, to tie a trace to its input.
    pub instance_digest: String,
}

impl DynamicsTrace {
    pub fn last(&self) -> &TraceSample {
        self.samples.last().expect("traces hold at least the start")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestKind {
    Interior,
    LowerBoundary,
    UpperBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestPoint {
    pub mu1: f64,
    pub kind: RestKind,
    pub stability: Stability,
    /// Finite-difference slope of the raw payoff gap at the point.
    pub derivative: Option<f64>,
}

fn require_two_actions(instance: &GameInstance) -> Result<()> {
    if instance.n_actions() != 2 {
        return Err(Error::UnsupportedModel {
            operation: "projection dynamics",
            requirement: "exactly two actions",
        });
    }
    Ok(())
}

/// Unclamped payoff gap `F_1(mu1) - F_2(mu1)` with `mu2 = m - mu1`.
pub fn raw_drift(instance: &GameInstance, mu1: f64) -> Result<f64> {
    require_two_actions(instance)?;
    let m = instance.total_mass;
    if !(0.0..=m).contains(&mu1) {
        return Err(Error::InvalidDistribution(format!(
            "mu1 = {mu1} lies outside [0, {m}]"
        )));
    }
    let f = payoff_vector(instance, &instance.split(mu1))?.values;
    Ok(f[0] - f[1])
}

/// Projected drift: the payoff gap, clamped at the boundaries so mass never
/// leaves `[0, m]`.
pub fn drift(instance: &GameInstance, mu1: f64) -> Result<f64> {
    let g = raw_drift(instance, mu1)?;
    Ok(clamp_drift(g, mu1, instance.total_mass))
}

fn clamp_drift(g: f64, mu1: f64, m: f64) -> f64 {
    let mut g = g;
    if mu1 <= 0.0 {
        g = g.max(0.0);
    }
    if mu1 >= m {
        g = g.min(0.0);
    }
    g
}

/// Default Euler step `1e-3 * max(t_1, t_2)`.
pub fn default_step(instance: &GameInstance) -> f64 {
    1e-3 * instance
        .resource_model
        .base_time(0)
        .max(instance.resource_model.base_time(1))
}

pub fn instance_digest(instance: &GameInstance) -> String {
    let bytes = serde_json::to_vec(instance).unwrap_or_default();
    let hash = bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    });
    format!("{hash:016x}")
}

fn sample(instance: &GameInstance, time: f64, mu1: f64) -> Result<TraceSample> {
    let m = instance.total_mass;
    let mu = instance.split(mu1);
    let f = payoff_vector(instance, &mu)?.values;
    Ok(TraceSample {
        time,
        mu1,
        mu2: mu[1],
        drift: clamp_drift(f[0] - f[1], mu1, m),
        payoffs: [f[0], f[1]],
        welfare: social_welfare(instance, &mu)?,
    })
}

/// Explicit Euler integration `mu1 <- clamp(mu1 + h g, 0, m)`, recording
/// every step.
pub fn integrate(
    instance: &GameInstance,
    mu1_start: f64,
    h: f64,
    t_end: f64,
) -> Result<DynamicsTrace> {
    require_two_actions(instance)?;
    let m = instance.total_mass;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Precondition(format!("step {h} must be positive")));
    }
    if !(0.0..=m).contains(&mu1_start) {
        return Err(Error::InvalidDistribution(format!(
            "start mu1 = {mu1_start} lies outside [0, {m}]"
        )));
    }
    let steps = (t_end / h).ceil().max(0.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut current = sample(instance, 0.0, mu1_start)?;
    samples.push(current);
    for k in 1..=steps {
        let mu1 = (current.mu1 + h * current.drift).clamp(0.0, m);
        current = sample(instance, k as f64 * h, mu1)?;
        samples.push(current);
    }
    Ok(DynamicsTrace {
        samples,
        step: h,
        instance_digest: instance_digest(instance),
    })
}

/// The clamped drift on `grid_n + 1` evenly spaced points, for phase plots.
pub fn drift_field(instance: &GameInstance, grid_n: usize) -> Result<Vec<(f64, f64)>> {
    let m = instance.total_mass;
    (0..=grid_n)
        .map(|k| {
            let mu1 = m * k as f64 / grid_n as f64;
            Ok((mu1, drift(instance, mu1)?))
        })
        .collect()
}

/// All rest points of the projection dynamics, each classified.
///
/// Interior roots come from sign changes of the raw gap on a uniform grid,
/// refined by bisection; boundaries are rest points when the clamp pins them.
pub fn find_rest_points(instance: &GameInstance, grid_n: usize) -> Result<Vec<RestPoint>> {
    require_two_actions(instance)?;
    if grid_n < 16 {
        return Err(Error::Precondition(format!(
            "grid_n = {grid_n} must be at least 16"
        )));
    }
    let m = instance.total_mass;
    let xs: Vec<f64> = (0..=grid_n).map(|k| m * k as f64 / grid_n as f64).collect();
    let gs = xs
        .iter()
        .map(|&x| raw_drift(instance, x))
        .collect::<Result<Vec<_>>>()?;

    let mut found: Vec<(f64, RestKind)> = Vec::new();
    if gs[0] <= 0.0 {
        found.push((0.0, RestKind::LowerBoundary));
    }
    for k in 0..grid_n {
        let (a, b) = (gs[k], gs[k + 1]);
        if k > 0 && a == 0.0 {
            found.push((xs[k], RestKind::Interior));
        }
        if a * b < 0.0 {
            let g = |x: f64| raw_drift(instance, x).unwrap_or(f64::NAN);
            let root = bisect(g, xs[k], xs[k + 1], 1e-10).mid();
            found.push((root, RestKind::Interior));
        }
    }
    if gs[grid_n] >= 0.0 {
        found.push((m, RestKind::UpperBoundary));
    }

    let mut points: Vec<RestPoint> = Vec::new();
    for (mu1, kind) in found {
        if points.iter().any(|p| (p.mu1 - mu1).abs() <= 1e-8) {
            continue;
        }
        let mut p = RestPoint {
            mu1,
            kind,
            stability: Stability::Marginal,
            derivative: None,
        };
        let (stability, derivative) = classify(instance, &p)?;
        p.stability = stability;
        p.derivative = Some(derivative);
        points.push(p);
    }
    Ok(points)
}

/// Stability of a rest point under the projection dynamics.
pub fn classify_stability(instance: &GameInstance, rest_point: &RestPoint) -> Result<Stability> {
    Ok(classify(instance, rest_point)?.0)
}

fn classify(instance: &GameInstance, p: &RestPoint) -> Result<(Stability, f64)> {
    let m = instance.total_mass;
    let delta = 1e-6 * m;
    let g = |x: f64| raw_drift(instance, x.clamp(0.0, m));
    match p.kind {
        RestKind::Interior => {
            let (lo, hi) = ((p.mu1 - delta).max(0.0), (p.mu1 + delta).min(m));
            let d = (g(hi)? - g(lo)?) / (hi - lo);
            let s = if d < -MARGINAL_BAND {
                Stability::Stable
            } else if d > MARGINAL_BAND {
                Stability::Unstable
            } else {
                Stability::Marginal
            };
            Ok((s, d))
        }
        RestKind::LowerBoundary => {
            // Stable when the gap pushes mass back down just inside.
            let inside = g(delta)?;
            let d = (inside - g(0.0)?) / delta;
            Ok((sign_stability(-inside), d))
        }
        RestKind::UpperBoundary => {
            let inside = g(m - delta)?;
            let d = (g(m)? - inside) / delta;
            Ok((sign_stability(inside), d))
        }
    }
}

fn sign_stability(restoring: f64) -> Stability {
    if restoring > 0.0 {
        Stability::Stable
    } else if restoring < 0.0 {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

/// Closed-form slope of the payoff gap for the shared two-action model
/// while the resource constraint is tight.
///
/// Differentiating `gamma_1 mu_1 / tau_1 + gamma_2 mu_2 / tau_2 = b` gives
/// `w' = tau_1 tau_2 (gamma_1 tau_2 - gamma_2 tau_1) /
/// (gamma_1^2 mu_1 tau_2^2 + gamma_2^2 mu_2 tau_1^2)`, and each payoff moves
/// with `tau_i' = gamma_i w'`. A slack constraint leaves `tau` constant, so
/// that branch reports `SlackConstraint` with derivative 0.
pub fn analytic_drift_derivative(instance: &GameInstance, mu1: f64) -> Result<f64> {
    let ResourceModel::SharedTwoAction {
        gammas: [g1, g2], ..
    } = instance.resource_model
    else {
        return Err(Error::UnsupportedModel {
            operation: "analytic_drift_derivative",
            requirement: "a SharedTwoAction resource model",
        });
    };
    let p = sojourn::solve_shared_two_action(instance, mu1)?;
    let w = p.multiplier.unwrap_or(0.0);
    if w <= 0.0 {
        return Err(Error::SlackConstraint {
            mu1,
            derivative: 0.0,
        });
    }
    let mu2 = instance.total_mass - mu1;
    let (tau1, tau2) = (p.taus[0], p.taus[1]);
    let w_prime = tau1 * tau2 * (g1 * tau2 - g2 * tau1)
        / (g1 * g1 * mu1 * tau2 * tau2 + g2 * g2 * mu2 * tau1 * tau1);
    let (r1, r2) = (instance.rewards[0], instance.rewards[1]);
    // -dF_i/dtau_i for each payoff family.
    let sensitivity = |r: f64, tau: f64| match instance.discount {
        Discount::Exponential { beta } => {
            let e = (beta * tau).exp();
            r * beta * e / ((e - 1.0) * (e - 1.0))
        }
        Discount::PowerLaw { .. } => r / (tau * tau),
    };
    Ok(w_prime * (g2 * sensitivity(r2, tau2) - g1 * sensitivity(r1, tau1)))
}

/// Parameters of an interior equilibrium candidate of the shared model
/// under exponential discounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnstableParams {
    pub m: f64,
    pub mu1: f64,
    pub t1: f64,
    pub t2: f64,
    pub r1: f64,
    pub r2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub b: f64,
    pub beta: f64,
}

impl UnstableParams {
    pub fn from_instance(instance: &GameInstance, mu1: f64) -> Result<Self> {
        match (&instance.resource_model, instance.discount) {
            (
                ResourceModel::SharedTwoAction {
                    exec_times: [t1, t2],
                    gammas: [gamma1, gamma2],
                    supply_rate,
                },
                Discount::Exponential { beta },
            ) => Ok(Self {
                m: instance.total_mass,
                mu1,
                t1: *t1,
                t2: *t2,
                r1: instance.rewards[0],
                r2: instance.rewards[1],
                gamma1: *gamma1,
                gamma2: *gamma2,
                b: *supply_rate,
                beta,
            }),
            _ => Err(Error::UnsupportedModel {
                operation: "check_unstable_conditions",
                requirement: "a SharedTwoAction model with exponential discounting",
            }),
        }
    }

    fn instance(&self) -> GameInstance {
        GameInstance {
            total_mass: self.m,
            rewards: vec![self.r1, self.r2],
            resource_model: ResourceModel::SharedTwoAction {
                exec_times: [self.t1, self.t2],
                gammas: [self.gamma1, self.gamma2],
                supply_rate: self.b,
            },
            discount: Discount::Exponential { beta: self.beta },
            tolerances: Tolerances::default(),
        }
    }
}

/// Outcome of the instability test with every sub-condition reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnstableCheck {
    /// `gamma_1/gamma_2 > t_1/t_2` and `gamma_1/gamma_2 < (e^{beta t_1} - 1)/e^{beta t_1}`.
    pub ratio_above_bound: bool,
    /// `gamma_1/gamma_2 < t_1/t_2` and `gamma_1/gamma_2 > e^{beta t_2}/(e^{beta t_2} - 1)`.
    pub ratio_below_bound: bool,
    /// Discounted payoffs agree at `mu1` within 1e-8.
    pub payoffs_equal: bool,
    /// `b < gamma_1 mu1 / t_1 + gamma_2 (m - mu1) / t_2`.
    pub congested: bool,
    /// `(gamma_1 t_2 - gamma_2 t_1)(gamma_2 h(tau_2) - gamma_1 h(tau_1)) > 0`
    /// with `h(tau) = e^{beta tau}/(e^{beta tau} - 1)`: the exact sign of the
    /// gap's slope at an interior equilibrium.
    pub slope_positive: bool,
    pub certified: bool,
}

/// Tests whether `mu1` is an unstable interior equilibrium of the shared
/// two-action model under exponential discounting.
///
/// The two ratio conditions are sufficient for a positive slope; the
/// slope sign itself is evaluated exactly, and certification requires the
/// equilibrium and congestion conditions together with it.
pub fn check_unstable_conditions(p: &UnstableParams) -> Result<UnstableCheck> {
    let positive = [p.m, p.t1, p.t2, p.r1, p.r2, p.gamma1, p.gamma2, p.b, p.beta];
    if positive.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::Precondition(
            "all parameters must be positive".into(),
        ));
    }
    if !(p.mu1 > 0.0 && p.mu1 < p.m) {
        return Err(Error::Precondition(format!(
            "mu1 = {} must lie in (0, m)",
            p.mu1
        )));
    }
    let ratio = p.gamma1 / p.gamma2;
    let time_ratio = p.t1 / p.t2;
    let e1 = (p.beta * p.t1).exp();
    let e2 = (p.beta * p.t2).exp();
    let ratio_above_bound = ratio > time_ratio && ratio < (e1 - 1.0) / e1;
    let ratio_below_bound = ratio < time_ratio && ratio > e2 / (e2 - 1.0);

    let instance = p.instance();
    let profile = sojourn::solve_shared_two_action(&instance, p.mu1)?;
    let (tau1, tau2) = (profile.taus[0], profile.taus[1]);
    let f1 = p.r1 / (p.beta * tau1).exp_m1();
    let f2 = p.r2 / (p.beta * tau2).exp_m1();
    let payoffs_equal = (f1 - f2).abs() <= 1e-8;
    let congested = p.b < p.gamma1 * p.mu1 / p.t1 + p.gamma2 * (p.m - p.mu1) / p.t2;
    let h = |tau: f64| {
        let e = (p.beta * tau).exp();
        e / (e - 1.0)
    };
    let slope_positive =
        (p.gamma1 * p.t2 - p.gamma2 * p.t1) * (p.gamma2 * h(tau2) - p.gamma1 * h(tau1)) > 0.0;
    Ok(UnstableCheck {
        ratio_above_bound,
        ratio_below_bound,
        payoffs_equal,
        congested,
        slope_positive,
        certified: payoffs_equal && congested && slope_positive,
    })
}
