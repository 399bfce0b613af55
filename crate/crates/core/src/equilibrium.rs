//! Stationary equilibria: payoff fields, verification, closed-form case
//! machines for constant execution times, a best-response fixed-point
//! solver, and the nonexistence detector for steep power-law discounting.
//!
//! Under exponential discounting the stationary payoff of action `i` is
//! `F_i = r_i / (e^{beta tau_i} - 1)`; under power-law discounting it is the
//! reward rate `r_i / tau_i`. A distribution is an equilibrium when every
//! supported action attains the maximal payoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    strategy_from_distribution, Discount, DiscountedPayoffVector, EquilibriumReport, GameInstance,
    MassDistribution, ResourceModel, SojournProfile, Verdict,
};
use crate::numeric::{bisect, nearly_equal};
use crate::sojourn;
use crate::utility::{exp_saturates, exp_stationary_value, TIE_REL};

/// Which branch of a closed-form case machine produced an equilibrium.
/// `case_index` counts actions in decreasing payoff order, starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseLabel {
    pub case_index: usize,
    pub subcase: Subcase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcase {
    /// The marginal action `i` runs below its supply rate without waiting.
    BelowSaturation,
    /// Actions `1..=i` are all saturated and share one payoff level.
    Saturated,
}

/// Output of a closed-form solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSolution {
    pub report: EquilibriumReport,
    pub case: CaseLabel,
    /// Rates and waits as given by the case formulas.
    pub profile: SojournProfile,
}

/// Stationary payoffs for a given sojourn profile.
pub fn payoffs_from_profile(
    instance: &GameInstance,
    profile: &SojournProfile,
) -> DiscountedPayoffVector {
    let r = &instance.rewards;
    match instance.discount {
        Discount::Exponential { beta } => DiscountedPayoffVector {
            values: (0..r.len())
                .map(|i| exp_stationary_value(r[i], profile.taus[i], beta))
                .collect(),
            saturated: profile
                .taus
                .iter()
                .map(|&t| exp_saturates(t, beta))
                .collect(),
        },
        Discount::PowerLaw { .. } => DiscountedPayoffVector {
            values: (0..r.len()).map(|i| r[i] / profile.taus[i]).collect(),
            saturated: vec![false; r.len()],
        },
    }
}

/// The payoff field `F(mu)`.
pub fn payoff_vector(
    instance: &GameInstance,
    mu: &MassDistribution,
) -> Result<DiscountedPayoffVector> {
    let profile = sojourn::solve(instance, mu)?;
    Ok(payoffs_from_profile(instance, &profile))
}

/// `max_{i in support, j} (F_j - F_i)_+`.
pub fn equilibrium_residual(payoffs: &[f64], support: &[usize]) -> f64 {
    let best = payoffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    support
        .iter()
        .map(|&i| (best - payoffs[i]).max(0.0))
        .fold(0.0, f64::max)
}

fn check_full_mass(instance: &GameInstance, mu: &MassDistribution) -> Result<()> {
    instance.check_distribution(mu)?;
    let m = instance.total_mass;
    if (mu.mass() - m).abs() > 1e-9 * m.max(1.0) {
        return Err(Error::InvalidDistribution(format!(
            "equilibrium candidates must carry the full mass {m}, got {}",
            mu.mass()
        )));
    }
    Ok(())
}

fn report_from(
    mu: &MassDistribution,
    profile: &SojournProfile,
    payoffs: Vec<f64>,
    tol: f64,
) -> EquilibriumReport {
    let support = mu.support();
    let residual = equilibrium_residual(&payoffs, &support);
    let strategy = strategy_from_distribution(mu, profile).unwrap_or_else(|_| vec![0.0; mu.len()]);
    EquilibriumReport {
        distribution: mu.clone(),
        support,
        strategy,
        payoffs,
        residual,
        verdict: if residual <= tol {
            Verdict::Equilibrium
        } else {
            Verdict::NotEquilibrium
        },
        iterations: None,
    }
}

/// Checks the stationary-equilibrium condition at `mu` (which must carry
/// the full mass).
pub fn verify_equilibrium(
    instance: &GameInstance,
    mu: &MassDistribution,
    tol: f64,
) -> Result<EquilibriumReport> {
    check_full_mass(instance, mu)?;
    let profile = sojourn::solve(instance, mu)?;
    let payoffs = payoffs_from_profile(instance, &profile).values;
    Ok(report_from(mu, &profile, payoffs, tol))
}

fn constant_parameters(
    instance: &GameInstance,
    operation: &'static str,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match &instance.resource_model {
        ResourceModel::ParallelConstant {
            exec_times,
            supply_rates,
        } => Ok((exec_times.clone(), supply_rates.clone())),
        _ => Err(Error::UnsupportedModel {
            operation,
            requirement: "a ParallelConstant resource model",
        }),
    }
}

/// Indices sorted by decreasing `score`; adjacent ties are an error.
fn strict_order(score: &[f64], what: &str) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..score.len()).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]));
    for w in order.windows(2) {
        if nearly_equal(score[w[0]], score[w[1]], TIE_REL) {
            return Err(Error::Precondition(format!(
                "actions {} and {} tie in {what}; use the fixed-point solver",
                w[0], w[1]
            )));
        }
    }
    Ok(order)
}

/// Assembles the solution from per-action masses, rates and waits in the
/// original action order.
fn finish(
    instance: &GameInstance,
    masses: Vec<f64>,
    rates: Vec<f64>,
    waits: Vec<f64>,
    exec_times: &[f64],
    case: CaseLabel,
) -> Result<ClosedFormSolution> {
    let mu = MassDistribution::new(masses)?;
    let profile = SojournProfile {
        taus: exec_times.iter().zip(&waits).map(|(t, w)| t + w).collect(),
        rates,
        waits,
        multiplier: None,
    };
    let report = verify_equilibrium(instance, &mu, instance.tolerances.equilibrium)?;
    Ok(ClosedFormSolution {
        report,
        case,
        profile,
    })
}

/// Closed-form equilibrium for constant execution times under exponential
/// discounting.
///
/// Actions are ranked by `V_i = r_i / (e^{beta t_i} - 1)` (ties rejected).
/// With `f_i = 1 / V_i`, the better actions `k < i` each hold
/// `b_k ln(r_k f_i + 1) / beta` mass when action `i` just starts to receive
/// mass. Walking `i = 1..n` against those thresholds, either action `i`
/// absorbs the remainder below its supply rate, or actions `1..=i` are all
/// saturated at a common payoff level `1 / psi` with
/// `sum_{k<=i} b_k ln(r_k psi + 1) = beta m`.
pub fn solve_constant_exponential(instance: &GameInstance) -> Result<ClosedFormSolution> {
    let (t, b) = constant_parameters(instance, "solve_constant_exponential")?;
    let Discount::Exponential { beta } = instance.discount else {
        return Err(Error::UnsupportedModel {
            operation: "solve_constant_exponential",
            requirement: "exponential discounting",
        });
    };
    instance.validate()?;
    let r = &instance.rewards;
    let n = r.len();
    let v: Vec<f64> = (0..n)
        .map(|i| exp_stationary_value(r[i], t[i], beta))
        .collect();
    let order = strict_order(&v, "stationary value")?;
    let m = instance.total_mass;
    let bm = beta * m;
    let f = |p: usize| (beta * t[order[p]]).exp_m1() / r[order[p]];
    // Mass-weighted log level of the first `upto` actions at payoff 1/psi.
    let level = |upto: usize, psi: f64| -> f64 {
        (0..upto)
            .map(|k| {
                let a = order[k];
                b[a] * (r[a] * psi).ln_1p()
            })
            .sum()
    };

    let mut masses = vec![0.0; n];
    let mut rates = vec![0.0; n];
    let mut waits = vec![0.0; n];
    for p in 0..n {
        let a = order[p];
        let fp = f(p);
        let lower = level(p, fp);
        let split = lower + beta * b[a] * t[a];
        if bm <= split {
            for &ak in &order[..p] {
                let w = (r[ak] * fp).ln_1p() / beta - t[ak];
                waits[ak] = w.max(0.0);
                rates[ak] = b[ak];
                masses[ak] = b[ak] * (t[ak] + waits[ak]);
            }
            masses[a] = m - lower / beta;
            rates[a] = masses[a] / t[a];
            let case = CaseLabel {
                case_index: p + 1,
                subcase: Subcase::BelowSaturation,
            };
            return finish(instance, masses, rates, waits, &t, case);
        }
        let upper = if p + 1 < n {
            level(p + 1, f(p + 1))
        } else {
            f64::INFINITY
        };
        if bm <= upper {
            let mut hi = if p + 1 < n { f(p + 1) } else { 2.0 * fp };
            while level(p + 1, hi) < bm {
                hi *= 2.0;
            }
            let psi = bisect(|psi| level(p + 1, psi) - bm, fp, hi, 0.0).mid();
            for &ak in &order[..=p] {
                let w = (r[ak] * psi).ln_1p() / beta - t[ak];
                waits[ak] = w.max(0.0);
                rates[ak] = b[ak];
                masses[ak] = b[ak] * (t[ak] + waits[ak]);
            }
            let case = CaseLabel {
                case_index: p + 1,
                subcase: Subcase::Saturated,
            };
            return finish(instance, masses, rates, waits, &t, case);
        }
    }
    unreachable!("the last action has an infinite upper threshold")
}

/// Closed-form equilibrium for constant execution times under power-law
/// discounting with `0 <= alpha <= 1` (reward-rate payoffs).
///
/// Actions are ranked by `r_i / t_i` (ties rejected). Action `i` starts to
/// receive mass once each better action `k` waits `t_i r_k / r_i - t_k`;
/// between thresholds either action `i` runs below its supply rate or
/// actions `1..=i` share the rate level `sum_{k<=i} r_k b_k / m`.
pub fn solve_constant_powerlaw(instance: &GameInstance) -> Result<ClosedFormSolution> {
    let (t, b) = constant_parameters(instance, "solve_constant_powerlaw")?;
    match instance.discount {
        Discount::PowerLaw { alpha } if alpha <= 1.0 => {}
        _ => {
            return Err(Error::UnsupportedModel {
                operation: "solve_constant_powerlaw",
                requirement: "power-law discounting with alpha <= 1",
            })
        }
    }
    instance.validate()?;
    let r = &instance.rewards;
    let n = r.len();
    let rate: Vec<f64> = (0..n).map(|i| r[i] / t[i]).collect();
    let order = strict_order(&rate, "reward rate")?;
    let m = instance.total_mass;
    // Mass held by the first `upto` actions when they all sit at `level`.
    let held = |upto: usize, level: f64| -> f64 {
        (0..upto)
            .map(|k| {
                let a = order[k];
                b[a] * r[a] / level
            })
            .sum()
    };

    let mut masses = vec![0.0; n];
    let mut rates = vec![0.0; n];
    let mut waits = vec![0.0; n];
    for p in 0..n {
        let a = order[p];
        let lower = held(p, rate[a]);
        let split = lower + b[a] * t[a];
        if m <= split {
            for &ak in &order[..p] {
                waits[ak] = (t[a] * r[ak] / r[a] - t[ak]).max(0.0);
                rates[ak] = b[ak];
                masses[ak] = b[ak] * (t[ak] + waits[ak]);
            }
            masses[a] = m - lower;
            rates[a] = masses[a] / t[a];
            let case = CaseLabel {
                case_index: p + 1,
                subcase: Subcase::BelowSaturation,
            };
            return finish(instance, masses, rates, waits, &t, case);
        }
        let upper = if p + 1 < n {
            held(p + 1, rate[order[p + 1]])
        } else {
            f64::INFINITY
        };
        if m <= upper {
            let weight: f64 = (0..=p).map(|k| r[order[k]] * b[order[k]]).sum();
            for &ak in &order[..=p] {
                waits[ak] = (m * r[ak] / weight - t[ak]).max(0.0);
                rates[ak] = b[ak];
                masses[ak] = b[ak] * (t[ak] + waits[ak]);
            }
            let case = CaseLabel {
                case_index: p + 1,
                subcase: Subcase::Saturated,
            };
            return finish(instance, masses, rates, waits, &t, case);
        }
    }
    unreachable!("the last action has an infinite upper threshold")
}

/// Options for [`solve_fixed_point`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Starting distribution; uniform over actions when absent.
    #[serde(default)]
    pub start: Option<MassDistribution>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            tol: 1e-8,
            start: None,
        }
    }
}

/// Best-response fixed point by pairwise mass transfer.
///
/// Each round moves mass from the worst supported action to the best
/// action (lowest index among ties) until their payoffs meet, or until the
/// worst action is emptied. For stable payoff fields the transfers settle
/// on an equilibrium; otherwise the report comes back `Unknown`.
pub fn solve_fixed_point(
    instance: &GameInstance,
    opts: &FixedPointOptions,
) -> Result<EquilibriumReport> {
    instance.validate()?;
    let n = instance.n_actions();
    let m = instance.total_mass;
    let mut mu = match &opts.start {
        Some(start) => {
            check_full_mass(instance, start)?;
            start.clone()
        }
        None => MassDistribution::new(vec![m / n as f64; n])?,
    };
    let width = instance.tolerances.bisection * m.max(1.0) * 1e-3;
    let mut iterations = 0;
    loop {
        let profile = sojourn::solve(instance, &mu)?;
        let payoffs = payoffs_from_profile(instance, &profile).values;
        let mut report = report_from(&mu, &profile, payoffs.clone(), opts.tol);
        report.iterations = Some(iterations);
        if report.verdict == Verdict::Equilibrium {
            return Ok(report);
        }
        if iterations >= opts.max_iters {
            log::warn!("fixed point did not converge after {iterations} rounds");
            report.verdict = Verdict::Unknown;
            return Ok(report);
        }
        iterations += 1;

        let best = (0..n).fold(0, |acc, i| if payoffs[i] > payoffs[acc] { i } else { acc });
        let worst = report
            .support
            .iter()
            .copied()
            .fold(None, |acc: Option<usize>, i| match acc {
                Some(w) if payoffs[w] <= payoffs[i] => Some(w),
                _ => Some(i),
            })
            .expect("a residual above tolerance implies nonempty support");
        let available = mu[worst];
        let moved = |h: f64| {
            let mut next = mu.clone();
            next.masses[worst] = (available - h).max(0.0);
            next.masses[best] += h;
            next
        };
        let gap = |h: f64| -> f64 {
            let f = payoff_vector(instance, &moved(h)).map(|p| p.values);
            match f {
                Ok(f) => f[best] - f[worst],
                Err(_) => f64::NAN,
            }
        };
        let h = if gap(available) >= 0.0 {
            available
        } else {
            let bracket = bisect(gap, 0.0, available, width);
            // Transfer the midpoint unless that fails to make progress.
            if bracket.hi > 0.0 {
                bracket.mid().max(bracket.lo)
            } else {
                available
            }
        };
        mu = moved(h);
        if h == available {
            mu.masses[worst] = 0.0;
        }
    }
}

/// Candidate enumeration for two actions, constant execution times and
/// power-law discounting with `alpha > 1`.
///
/// Here the long-run best response is the stationary action with the
/// largest reward rate, ties going to the shorter sojourn time. A
/// concentrated distribution is an equilibrium iff its action wins that
/// comparison; an interior one would need equal rates and equal sojourn
/// times, hence equal rewards, which the precondition excludes.
pub fn detect_nonexistence_two_action(instance: &GameInstance) -> Result<EquilibriumReport> {
    let (t, b) = constant_parameters(instance, "detect_nonexistence_two_action")?;
    instance.validate()?;
    let alpha = match instance.discount {
        Discount::PowerLaw { alpha } if alpha > 1.0 => alpha,
        _ => {
            return Err(Error::UnsupportedModel {
                operation: "detect_nonexistence_two_action",
                requirement: "power-law discounting with alpha > 1",
            })
        }
    };
    let r = &instance.rewards;
    if r.len() != 2 {
        return Err(Error::Precondition(
            "the detector handles exactly two actions".into(),
        ));
    }
    if !(r[0] / t[0] > r[1] / t[1]) {
        return Err(Error::Precondition("requires r1/t1 > r2/t2".into()));
    }
    if r[0] == r[1] {
        return Err(Error::Precondition("requires r1 != r2".into()));
    }
    log::debug!("enumerating candidates for alpha = {alpha}");
    let m = instance.total_mass;
    let wins = |me: usize, tau_me: f64| {
        let other = 1 - me;
        let (mine, theirs) = (r[me] / tau_me, r[other] / t[other]);
        if nearly_equal(mine, theirs, TIE_REL) {
            tau_me <= t[other]
        } else {
            mine > theirs
        }
    };
    let tol = instance.tolerances.equilibrium;
    for me in 0..2 {
        let tau = t[me].max(m / b[me]);
        if wins(me, tau) {
            let mu = instance.concentrated(me);
            let mut report = verify_equilibrium(instance, &mu, tol)?;
            report.verdict = Verdict::Equilibrium;
            return Ok(report);
        }
    }
    let mut report = verify_equilibrium(instance, &instance.concentrated(0), tol)?;
    report.verdict = Verdict::NonexistenceCertified;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::Tolerances;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist(v: &[f64]) -> MassDistribution {
        MassDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn shared_example_payoffs_at_full_mass() {
        let g = fixtures::figure2_discounted();
        let f = payoff_vector(&g, &dist(&[2.0, 0.0])).unwrap();
        assert!(f.values[0] > f.values[1]);
    }

    #[test]
    fn symmetric_payoffs_are_equal() {
        let mut g = fixtures::exponential_pair(2.0);
        g.rewards = vec![1.0, 1.0];
        let f = payoff_vector(&g, &dist(&[1.0, 1.0])).unwrap();
        assert_eq!(f.values[0], f.values[1]);
    }

    #[test]
    fn small_beta_approaches_reward_rate() {
        let mut g = fixtures::exponential_pair(1.6);
        g.discount = Discount::Exponential { beta: 1e-8 };
        let mu = dist(&[1.2, 0.4]);
        let f = payoff_vector(&g, &mu).unwrap();
        let p = sojourn::solve(&g, &mu).unwrap();
        for i in 0..2 {
            assert!((1e-8 * f.values[i] - g.rewards[i] / p.taus[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn verification_examples() {
        let g = fixtures::figure2_discounted();
        let r = verify_equilibrium(&g, &g.split(0.0), 1e-8).unwrap();
        assert_eq!(r.verdict, Verdict::Equilibrium);
        assert_eq!(r.support, vec![1]);
        let r = verify_equilibrium(&g, &g.split(1.5), 1e-8).unwrap();
        assert_eq!(r.verdict, Verdict::NotEquilibrium);
        assert!(r.residual > 0.0);
        let single = fixtures::single_action(3.0, Discount::Exponential { beta: 1.0 });
        let r = verify_equilibrium(&single, &dist(&[3.0]), 1e-8).unwrap();
        assert_eq!(r.verdict, Verdict::Equilibrium);
        assert_eq!(r.strategy, vec![1.0]);
        let mut short = g.split(0.5);
        short.masses[1] *= 0.5;
        assert!(verify_equilibrium(&g, &short, 1e-8).is_err());
    }

    #[test]
    fn exponential_case_machine_examples() {
        let s = solve_constant_exponential(&fixtures::exponential_pair(1.0)).unwrap();
        assert_eq!(
            s.case,
            CaseLabel {
                case_index: 1,
                subcase: Subcase::BelowSaturation
            }
        );
        assert_eq!(s.report.distribution.masses, vec![1.0, 0.0]);
        assert_eq!(s.profile.rates, vec![1.0, 0.0]);
        assert_eq!(s.profile.waits, vec![0.0, 0.0]);
        assert_eq!(s.report.verdict, Verdict::Equilibrium);

        let s = solve_constant_exponential(&fixtures::exponential_pair(1.6)).unwrap();
        assert_eq!(
            s.case,
            CaseLabel {
                case_index: 2,
                subcase: Subcase::BelowSaturation
            }
        );
        let threshold = (2.0 * std::f64::consts::E - 1.0).ln();
        let mu = &s.report.distribution.masses;
        assert!((mu[0] - threshold).abs() < 1e-12);
        assert!((mu[1] - (1.6 - threshold)).abs() < 1e-12);
        assert!((mu[0] - 1.4899).abs() < 1e-4 && (mu[1] - 0.1101).abs() < 1e-4);
        assert!((s.profile.waits[0] - 0.4899).abs() < 1e-4);
        assert_eq!(s.profile.rates[0], 1.0);
        assert!((s.profile.rates[1] - 0.1101).abs() < 1e-4);
        let f = &s.report.payoffs;
        assert!((f[0] - f[1]).abs() < 1e-12 && (f[0] - 0.582).abs() < 1e-3);
        assert!(s.report.residual <= 1e-8);

        let single = fixtures::single_action(2.0, Discount::Exponential { beta: 1.0 });
        let s = solve_constant_exponential(&single).unwrap();
        assert_eq!(s.report.distribution.masses, vec![2.0]);
    }

    #[test]
    fn exponential_case_machine_rejects_ties() {
        let mut g = fixtures::exponential_pair(1.0);
        g.rewards = vec![1.0, 1.0];
        assert!(matches!(
            solve_constant_exponential(&g),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn powerlaw_case_machine_examples() {
        let s = solve_constant_powerlaw(&fixtures::reward_rate_pair(2.0)).unwrap();
        assert_eq!(
            s.case,
            CaseLabel {
                case_index: 1,
                subcase: Subcase::Saturated
            }
        );
        assert_eq!(s.report.distribution.masses, vec![2.0, 0.0]);
        assert_eq!((s.profile.rates[0], s.profile.waits[0]), (1.0, 1.0));
        assert_eq!(s.report.payoffs, vec![1.0, 0.5]);

        let s = solve_constant_powerlaw(&fixtures::reward_rate_pair(6.0)).unwrap();
        assert_eq!(
            s.case,
            CaseLabel {
                case_index: 2,
                subcase: Subcase::BelowSaturation
            }
        );
        assert_eq!(s.report.distribution.masses, vec![4.0, 2.0]);
        assert_eq!(s.profile.rates, vec![1.0, 1.0]);
        assert_eq!(s.profile.waits, vec![3.0, 0.0]);
        assert_eq!(s.report.payoffs, vec![0.5, 0.5]);

        let single = fixtures::single_action(2.0, Discount::PowerLaw { alpha: 0.5 });
        assert_eq!(
            solve_constant_powerlaw(&single)
                .unwrap()
                .report
                .distribution
                .masses,
            vec![2.0]
        );
    }

    #[test]
    fn fixed_point_examples() {
        let g = fixtures::exponential_pair(1.6);
        let closed = solve_constant_exponential(&g).unwrap().report.distribution;
        let fp = solve_fixed_point(&g, &FixedPointOptions::default()).unwrap();
        assert_eq!(fp.verdict, Verdict::Equilibrium);
        assert!(fp.distribution.max_abs_diff(&closed) < 1e-6);

        let g = fixtures::figure2_discounted();
        let opts = FixedPointOptions {
            start: Some(g.split(1.9)),
            ..Default::default()
        };
        let fp = solve_fixed_point(&g, &opts).unwrap();
        assert_eq!(fp.distribution.masses, vec![2.0, 0.0]);

        let single = fixtures::single_action(2.0, Discount::PowerLaw { alpha: 0.0 });
        let fp = solve_fixed_point(&single, &FixedPointOptions::default()).unwrap();
        assert_eq!(fp.iterations, Some(0));
    }

    #[test]
    fn nonexistence_examples() {
        let r = detect_nonexistence_two_action(&fixtures::nonexistence_pair(10.0)).unwrap();
        assert_eq!(r.verdict, Verdict::NonexistenceCertified);
        let r = detect_nonexistence_two_action(&fixtures::nonexistence_pair(1.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Equilibrium);
        assert_eq!(r.distribution.masses, vec![1.0, 0.0]);
        let mut g = fixtures::nonexistence_pair(1.0);
        g.rewards = vec![1.0, 1.0];
        if let ResourceModel::ParallelConstant { exec_times, .. } = &mut g.resource_model {
            exec_times[1] = 2.0;
        }
        assert!(matches!(
            detect_nonexistence_two_action(&g),
            Err(Error::Precondition(_))
        ));
    }

    fn random_parallel(rng: &mut ChaCha8Rng, discount: Discount) -> GameInstance {
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
            discount,
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn closed_forms_pass_verification_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let beta = rng.gen_range(0.1..2.0);
            let g = random_parallel(&mut rng, Discount::Exponential { beta });
            let s = solve_constant_exponential(&g).unwrap();
            assert!(s.report.residual <= 1e-8, "{g:?}");
            let alpha = rng.gen_range(0.0..=1.0);
            let g = random_parallel(&mut rng, Discount::PowerLaw { alpha });
            let s = solve_constant_powerlaw(&g).unwrap();
            assert!(s.report.residual <= 1e-8, "{g:?}");
        }
    }

    #[test]
    fn fixed_point_ignores_reward_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = random_parallel(&mut rng, Discount::PowerLaw { alpha: 0.5 });
            let mut scaled = g.clone();
            let c = rng.gen_range(0.5..4.0);
            scaled.rewards.iter_mut().for_each(|r| *r *= c);
            let a = solve_fixed_point(&g, &FixedPointOptions::default()).unwrap();
            let b = solve_fixed_point(&scaled, &FixedPointOptions::default()).unwrap();
            assert!(
                a.distribution.max_abs_diff(&b.distribution) <= 1e-6,
                "{g:?}"
            );
        }
    }

    fn stable_pair_sum(g: &GameInstance, a: &[f64], b: &[f64]) -> f64 {
        let fa = payoff_vector(g, &dist(a)).unwrap().values;
        let fb = payoff_vector(g, &dist(b)).unwrap().values;
        (0..a.len()).map(|i| (fa[i] - fb[i]) * (a[i] - b[i])).sum()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn parallel_payoffs_form_a_stable_game(
            seed in any::<u64>(), w1 in prop::collection::vec(0.0f64..1.0, 6),
            w2 in prop::collection::vec(0.0f64..1.0, 6), exponential in any::<bool>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let discount = if exponential {
                Discount::Exponential { beta: rng.gen_range(0.1..2.0) }
            } else {
                Discount::PowerLaw { alpha: rng.gen_range(0.0..=1.0) }
            };
            let g = random_parallel(&mut rng, discount);
            let n = g.n_actions();
            let norm = |w: &[f64]| {
                let s: f64 = w[..n].iter().sum::<f64>().max(1e-9);
                w[..n].iter().map(|x| x / s * g.total_mass).collect::<Vec<_>>()
            };
            prop_assert!(stable_pair_sum(&g, &norm(&w1), &norm(&w2)) <= 1e-12);
        }
    }
}
