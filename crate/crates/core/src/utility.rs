//! Discounted utilities of individual agents: stationary values, zeta sums,
//! finite-horizon totals, schedules and best stationary actions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Discount, GameInstance, ResourceModel, SojournProfile, Tolerances};
use crate::numeric::nearly_equal;

/// Beyond this exponent `e^{beta tau}` is treated as overflowing.
pub const EXP_SATURATION: f64 = 700.0;

/// Relative tolerance used when comparing payoffs for ties.
pub const TIE_REL: f64 = 1e-12;

/// A series value together with a rigorous bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub value: f64,
    pub truncation_error_bound: f64,
}

/// Whether `r / (e^{beta tau} - 1)` is saturated to 0.
pub fn exp_saturates(tau: f64, beta: f64) -> bool {
    beta * tau > EXP_SATURATION
}

/// Total discounted utility `r / (e^{beta tau} - 1)` of repeating one action
/// forever under exponential discounting.
pub fn exp_stationary_value(r: f64, tau: f64, beta: f64) -> f64 {
    if exp_saturates(tau, beta) {
        log::warn!(
            "beta * tau = {} overflows; payoff saturated to 0",
            beta * tau
        );
        return 0.0;
    }
    r / (beta * tau).exp_m1()
}

/// Hurwitz zeta `sum_{k>=0} (k + q)^{-alpha}` for `alpha > 1`, `q > 0`.
///
/// A partial sum is followed by the integral, half-term and first
/// derivative corrections of the Euler-Maclaurin formula for the tail. The
/// remainder is bounded by `2 zeta(3) / (2 pi)^3 * |f''(a)|` where `a` is the
/// first omitted point; terms are added until that bound drops below
/// `rel_tol * value`.
pub fn hurwitz_zeta(alpha: f64, q: f64, rel_tol: f64) -> Result<ZetaValue> {
    if !(alpha > 1.0) {
        return Err(Error::Diverges { alpha });
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Precondition(format!(
            "zeta offset q = {q} must be positive"
        )));
    }
    // 2 zeta(3) / (2 pi)^3
    const REMAINDER: f64 = 2.0 * 1.202_056_903_159_594 / 248.050_213_442_398_6;
    let term = |x: f64| x.powf(-alpha);
    let mut partial = 0.0;
    let mut k = 0u64;
    let mut target = 16u64;
    loop {
        while k < target {
            partial += term(k as f64 + q);
            k += 1;
        }
        let a = k as f64 + q;
        let tail = a.powf(1.0 - alpha) / (alpha - 1.0)
            + 0.5 * term(a)
            + alpha * a.powf(-alpha - 1.0) / 12.0;
        let value = partial + tail;
        let bound = REMAINDER * alpha * (alpha + 1.0) * a.powf(-alpha - 2.0);
        if bound <= rel_tol * value || target >= 1 << 40 {
            return Ok(ZetaValue {
                value,
                truncation_error_bound: bound,
            });
        }
        target *= 2;
    }
}

/// Riemann zeta `zeta(alpha)` to relative accuracy 1e-10 (as a bound).
pub fn zeta(alpha: f64) -> Result<ZetaValue> {
    hurwitz_zeta(alpha, 1.0, 1e-12)
}

/// `r tau^{-alpha} zeta(alpha)`: utility of repeating one action forever
/// under power-law discounting with `alpha > 1`.
pub fn powerlaw_stationary_value(r: f64, tau: f64, alpha: f64) -> Result<ZetaValue> {
    let z = zeta(alpha)?;
    let scale = r * tau.powf(-alpha);
    Ok(ZetaValue {
        value: scale * z.value,
        truncation_error_bound: scale * z.truncation_error_bound,
    })
}

/// Utility collected by time `horizon` when repeating one action:
/// `r tau^{-alpha} sum_{n=1}^{floor(T/tau)} n^{-alpha}`, for `0 <= alpha <= 1`.
pub fn truncated_value(r: f64, tau: f64, alpha: f64, horizon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Precondition(format!(
            "finite-horizon totals are defined for 0 <= alpha <= 1, got {alpha}"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::Precondition(format!(
            "sojourn time {tau} is not positive"
        )));
    }
    if horizon < tau {
        return Ok(0.0);
    }
    let count = (horizon / tau).floor() as u64;
    let sum: f64 = (1..=count).map(|n| (n as f64).powf(-alpha)).sum();
    Ok(r * tau.powf(-alpha) * sum)
}

/// A deterministic schedule: `prefix` runs each `(action, repeats)` pair in
/// order, then `terminal` is repeated forever.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchedule {
    pub prefix: Vec<(usize, u64)>,
    pub terminal: usize,
}

impl ActionSchedule {
    pub fn stationary(action: usize) -> Self {
        Self {
            prefix: Vec::new(),
            terminal: action,
        }
    }
}

/// Value of a schedule with its tail error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleValue {
    pub value: f64,
    pub tail_error_bound: f64,
}

/// Total discounted utility of a schedule: the prefix summed term by term,
/// the terminal repetition in closed form.
pub fn evaluate_schedule(
    schedule: &ActionSchedule,
    rewards: &[f64],
    taus: &[f64],
    discount: Discount,
    tail_tolerance: f64,
) -> Result<ScheduleValue> {
    let n = rewards.len();
    if taus.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: taus.len(),
        });
    }
    let valid = |a: usize| {
        if a < n {
            Ok(())
        } else {
            Err(Error::Precondition(format!("action {a} out of range")))
        }
    };
    for &(a, count) in &schedule.prefix {
        valid(a)?;
        if count == 0 {
            return Err(Error::Precondition(
                "repeat counts must be at least 1".into(),
            ));
        }
    }
    valid(schedule.terminal)?;
    if let Discount::PowerLaw { alpha } = discount {
        if alpha <= 1.0 {
            return Err(Error::Diverges { alpha });
        }
    }
    if !(tail_tolerance > 0.0) {
        return Err(Error::Precondition(
            "tail tolerance must be positive".into(),
        ));
    }

    let mut elapsed = 0.0;
    let mut value = 0.0;
    for &(a, count) in &schedule.prefix {
        for _ in 0..count {
            elapsed += taus[a];
            value += discount.utility(rewards[a], elapsed);
        }
    }
    let (r, tau) = (rewards[schedule.terminal], taus[schedule.terminal]);
    let (tail, bound) = match discount {
        Discount::Exponential { beta } => {
            (r * (-beta * elapsed).exp() / (beta * tau).exp_m1(), 0.0)
        }
        Discount::PowerLaw { alpha } => {
            // Completions at elapsed + k tau, k >= 1:
            // r tau^{-alpha} sum_{k>=0} (k + 1 + elapsed/tau)^{-alpha}.
            let scale = r * tau.powf(-alpha);
            let mut rel = 1e-12;
            loop {
                let z = hurwitz_zeta(alpha, 1.0 + elapsed / tau, rel)?;
                if scale * z.truncation_error_bound <= tail_tolerance || rel < 1e-15 {
                    break (scale * z.value, scale * z.truncation_error_bound);
                }
                rel *= 0.1;
            }
        }
    };
    Ok(ScheduleValue {
        value: value + tail,
        tail_error_bound: bound,
    })
}

/// Best action among the stationary "always play i" strategies.
///
/// Exponential discounting maximises `r_i / (e^{beta tau_i} - 1)`. Power-law
/// discounting (any alpha) maximises the reward rate `r_i / tau_i`; ties go
/// to the smaller sojourn time, then to the smaller index.
pub fn best_stationary_action(instance: &GameInstance, profile: &SojournProfile) -> usize {
    best_stationary_action_for(&instance.rewards, &profile.taus, instance.discount)
}

pub fn best_stationary_action_for(rewards: &[f64], taus: &[f64], discount: Discount) -> usize {
    let score = |i: usize| match discount {
        Discount::Exponential { beta } => exp_stationary_value(rewards[i], taus[i], beta),
        Discount::PowerLaw { .. } => rewards[i] / taus[i],
    };
    let mut best = 0;
    for i in 1..rewards.len() {
        let (si, sb) = (score(i), score(best));
        if nearly_equal(si, sb, TIE_REL) {
            if taus[i] < taus[best] {
                best = i;
            }
        } else if si > sb {
            best = i;
        }
    }
    best
}

/// `|v - max_i e^{-beta tau_i} (r_i + v)|` at `v = max_i r_i / (e^{beta tau_i} - 1)`.
pub fn bellman_residual(rewards: &[f64], taus: &[f64], beta: f64) -> f64 {
    let v = rewards
        .iter()
        .zip(taus)
        .map(|(r, t)| exp_stationary_value(*r, *t, beta))
        .fold(f64::NEG_INFINITY, f64::max);
    let rhs = rewards
        .iter()
        .zip(taus)
        .map(|(r, t)| (-beta * t).exp() * (r + v))
        .fold(f64::NEG_INFINITY, f64::max);
    (v - rhs).abs()
}

/// A two-action instance on which switching actions once beats every
/// stationary strategy under power-law discounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingCounterexample {
    pub instance: GameInstance,
    pub schedule: ActionSchedule,
    /// Number of completions of action 1 before the switch.
    pub switch_after: u64,
    pub stationary_value: ZetaValue,
    pub switching_value: ScheduleValue,
    pub margin: f64,
}

/// Builds the switching counterexample for `alpha > 1` and
/// `0 < epsilon < 1 - 1/zeta(alpha)`.
///
/// With `r_1 = t_1 = 1` and infinite supplies, `N` is the smallest integer
/// whose zeta tail `sum_{n>=N} n^{-alpha}` is below `epsilon`; action 2 takes
/// `t_2 = N` and pays `r_2 = N^alpha - 1`, so always playing action 1 is the
/// best stationary strategy, yet playing action 1 `N` times and then action 2
/// forever is worth more.
pub fn build_switching_counterexample(alpha: f64, epsilon: f64) -> Result<SwitchingCounterexample> {
    let z = zeta(alpha)?;
    let limit = 1.0 - 1.0 / z.value;
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(Error::Precondition(format!(
            "epsilon = {epsilon} must lie in (0, 1 - 1/zeta(alpha)) = (0, {limit})"
        )));
    }
    let mut n = 1u64;
    let mut head = 0.0;
    while z.value - head >= epsilon {
        head += (n as f64).powf(-alpha);
        n += 1;
    }
    // Here sum_{k<n} k^{-alpha} = head and the tail from n is below epsilon.
    let big_n = n as f64;
    let r2 = big_n.powf(alpha) - 1.0;
    let instance = GameInstance {
        total_mass: 1.0,
        rewards: vec![1.0, r2],
        resource_model: ResourceModel::ParallelConstant {
            exec_times: vec![1.0, big_n],
            supply_rates: vec![f64::INFINITY, f64::INFINITY],
        },
        discount: Discount::PowerLaw { alpha },
        tolerances: Tolerances::default(),
    };
    let taus = [1.0, big_n];
    let schedule = ActionSchedule {
        prefix: vec![(0, n)],
        terminal: 1,
    };
    let stationary_value = powerlaw_stationary_value(1.0, 1.0, alpha)?;
    let switching_value = evaluate_schedule(
        &schedule,
        &instance.rewards,
        &taus,
        instance.discount,
        1e-12,
    )?;
    Ok(SwitchingCounterexample {
        margin: switching_value.value - stationary_value.value,
        instance,
        schedule,
        switch_after: n,
        stationary_value,
        switching_value,
    })
}
