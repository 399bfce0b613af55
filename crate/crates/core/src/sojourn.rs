//! Fluid queueing model: sojourn times, completion rates and waiting times
//! induced by a mass distribution.
//!
//! For parallel resources the convex program decouples per action, and each
//! action is a scalar monotone root find. The shared two-action model
//! reduces to one equation in the common waiting-time multiplier `w`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ExecTimeCurve, GameInstance, MassDistribution, ResourceModel, SojournProfile};
use crate::numeric::bisect;

/// Residuals of the optimality conditions of the fluid program.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResidual {
    /// `max_i |mu_i - x_i tau_i|`.
    pub littles_law: f64,
    /// `max_i |tau_i - t_i(x_i) - w_i|`.
    pub decomposition: f64,
    /// Largest violation of `x <= b`, `x >= 0`, `w >= 0`.
    pub feasibility: f64,
    /// Largest `|w * slack|`; with infinite supply this is `|w|`.
    pub slackness: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.littles_law
            .max(self.decomposition)
            .max(self.feasibility)
            .max(self.slackness)
    }

    pub fn accepted(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Dispatches on the resource model. For the shared model the distribution
/// may carry less than the total mass.
pub fn solve(instance: &GameInstance, mu: &MassDistribution) -> Result<SojournProfile> {
    match instance.resource_model {
        ResourceModel::ParallelConstant { .. } => solve_parallel_constant(instance, mu),
        ResourceModel::ParallelIncreasing { .. } => solve_parallel_increasing(instance, mu),
        ResourceModel::SharedTwoAction { .. } => {
            instance.check_distribution(mu)?;
            shared_profile(instance, mu[0], mu[1])
        }
    }
}

pub fn solve_parallel_constant(
    instance: &GameInstance,
    mu: &MassDistribution,
) -> Result<SojournProfile> {
    let ResourceModel::ParallelConstant {
        exec_times,
        supply_rates,
    } = &instance.resource_model
    else {
        return Err(Error::UnsupportedModel {
            operation: "solve_parallel_constant",
            requirement: "a ParallelConstant resource model",
        });
    };
    instance.check_distribution(mu)?;
    let n = mu.len();
    let mut profile = empty_profile(n);
    for i in 0..n {
        let (t, b, m) = (exec_times[i], supply_rates[i], mu[i]);
        let queue = m / b;
        if queue > t {
            // Saturated: the supply rate is the completion rate.
            profile.taus[i] = queue;
            profile.rates[i] = b;
            profile.waits[i] = queue - t;
        } else {
            profile.taus[i] = t;
            profile.rates[i] = m / t;
        }
    }
    Ok(profile)
}

pub fn solve_parallel_increasing(
    instance: &GameInstance,
    mu: &MassDistribution,
) -> Result<SojournProfile> {
    let ResourceModel::ParallelIncreasing {
        exec_time_curves,
        supply_rates,
    } = &instance.resource_model
    else {
        return Err(Error::UnsupportedModel {
            operation: "solve_parallel_increasing",
            requirement: "a ParallelIncreasing resource model",
        });
    };
    instance.check_distribution(mu)?;
    let width = instance.tolerances.bisection;
    let n = mu.len();
    let mut profile = empty_profile(n);
    for i in 0..n {
        let (tau, x, w) = increasing_action(&exec_time_curves[i], supply_rates[i], mu[i], width);
        profile.taus[i] = tau;
        profile.rates[i] = x;
        profile.waits[i] = w;
    }
    Ok(profile)
}

/// One action of the increasing-curve model: `(tau, x, w)`.
fn increasing_action(curve: &ExecTimeCurve, b: f64, mu: f64, width: f64) -> (f64, f64, f64) {
    let t0 = curve.eval(0.0);
    if mu == 0.0 {
        return (t0, 0.0, 0.0);
    }
    if b.is_finite() && b * curve.eval(b) <= mu {
        let tau = mu / b;
        return (tau, b, tau - curve.eval(b));
    }
    // x t(x) >= x t(0), so mu / t(0) already brackets the root.
    let hi = (mu / t0).min(b);
    let bracket = bisect(|x| x * curve.eval(x) - mu, 0.0, hi, width);
    // The upper end satisfies x t(x) >= mu, so mu / t(x) stays below it and
    // below the supply rate; Little's law then holds to rounding.
    let tau = curve.eval(bracket.hi);
    (tau, mu / tau, 0.0)
}

/// Shared two-action model with `mu2 = m - mu1`.
pub fn solve_shared_two_action(instance: &GameInstance, mu1: f64) -> Result<SojournProfile> {
    let m = instance.total_mass;
    if !(0.0..=m).contains(&mu1) {
        return Err(Error::InvalidDistribution(format!(
            "mu1 = {mu1} lies outside [0, {m}]"
        )));
    }
    shared_profile(instance, mu1, (m - mu1).max(0.0))
}

fn shared_profile(instance: &GameInstance, mu1: f64, mu2: f64) -> Result<SojournProfile> {
    let ResourceModel::SharedTwoAction {
        exec_times: [t1, t2],
        gammas: [g1, g2],
        supply_rate: b,
    } = instance.resource_model
    else {
        return Err(Error::UnsupportedModel {
            operation: "solve_shared_two_action",
            requirement: "a SharedTwoAction resource model",
        });
    };
    let load = |w: f64| g1 * mu1 / (t1 + g1 * w) + g2 * mu2 / (t2 + g2 * w);
    let w = if load(0.0) <= b {
        0.0
    } else {
        let mut w_max = t1.max(t2);
        while load(w_max) > b {
            w_max *= 2.0;
        }
        // The upper end keeps the resource constraint feasible.
        bisect(|w| load(w) - b, 0.0, w_max, instance.tolerances.bisection).hi
    };
    let taus = vec![t1 + g1 * w, t2 + g2 * w];
    Ok(SojournProfile {
        rates: vec![mu1 / taus[0], mu2 / taus[1]],
        taus,
        waits: vec![g1 * w, g2 * w],
        multiplier: Some(w),
    })
}

fn empty_profile(n: usize) -> SojournProfile {
    SojournProfile {
        taus: vec![0.0; n],
        rates: vec![0.0; n],
        waits: vec![0.0; n],
        multiplier: None,
    }
}

pub fn kkt_residual(
    instance: &GameInstance,
    mu: &MassDistribution,
    profile: &SojournProfile,
) -> Result<KktResidual> {
    let n = mu.len();
    for len in [profile.taus.len(), profile.rates.len(), profile.waits.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let (tau, x, w) = (&profile.taus, &profile.rates, &profile.waits);
    let mut r = KktResidual::default();
    for i in 0..n {
        r.littles_law = r.littles_law.max((mu[i] - x[i] * tau[i]).abs());
        r.feasibility = r.feasibility.max(-x[i]);
    }
    match &instance.resource_model {
        ResourceModel::ParallelConstant {
            exec_times,
            supply_rates,
        } => {
            for i in 0..n {
                parallel_terms(&mut r, tau[i], exec_times[i], x[i], w[i], supply_rates[i]);
            }
        }
        ResourceModel::ParallelIncreasing {
            exec_time_curves,
            supply_rates,
        } => {
            for i in 0..n {
                let t = exec_time_curves[i].eval(x[i]);
                parallel_terms(&mut r, tau[i], t, x[i], w[i], supply_rates[i]);
            }
        }
        ResourceModel::SharedTwoAction {
            exec_times,
            gammas,
            supply_rate,
        } => {
            let common = profile.multiplier.unwrap_or(w[0] / gammas[0]);
            for i in 0..2 {
                r.decomposition = r
                    .decomposition
                    .max((tau[i] - exec_times[i] - gammas[i] * common).abs());
            }
            let slack = supply_rate - gammas[0] * x[0] - gammas[1] * x[1];
            r.feasibility = r.feasibility.max(-slack).max(-common);
            r.slackness = (common * slack).abs();
        }
    }
    Ok(r)
}

fn parallel_terms(r: &mut KktResidual, tau: f64, t: f64, x: f64, w: f64, b: f64) {
    r.decomposition = r.decomposition.max((tau - t - w).abs());
    r.feasibility = r.feasibility.max(x - b).max(-w);
    let slack = if b.is_finite() { w * (b - x) } else { w };
    r.slackness = r.slackness.max(slack.abs());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Discount, Tolerances};
    use proptest::prelude::*;

    const INF: f64 = f64::INFINITY;

    fn constant(t: Vec<f64>, b: Vec<f64>) -> GameInstance {
        GameInstance {
            total_mass: 1e6,
            rewards: vec![1.0; t.len()],
            resource_model: ResourceModel::ParallelConstant {
                exec_times: t,
                supply_rates: b,
            },
            discount: Discount::Exponential { beta: 1.0 },
            tolerances: Tolerances::default(),
        }
    }

    fn increasing(curves: Vec<ExecTimeCurve>, b: Vec<f64>) -> GameInstance {
        GameInstance {
            total_mass: 1e6,
            rewards: vec![1.0; curves.len()],
            resource_model: ResourceModel::ParallelIncreasing {
                exec_time_curves: curves,
                supply_rates: b,
            },
            discount: Discount::Exponential { beta: 1.0 },
            tolerances: Tolerances::default(),
        }
    }

    fn figure2_shared() -> GameInstance {
        crate::fixtures::figure2_discounted()
    }

    fn dist(v: &[f64]) -> MassDistribution {
        MassDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constant_model_examples() {
        let g = constant(vec![1.0, 1.0, 1.0], vec![1.0, 1.0, INF]);
        let p = solve_parallel_constant(&g, &dist(&[0.5, 2.0, 7.0])).unwrap();
        assert_eq!(p.taus, vec![1.0, 2.0, 1.0]);
        assert_eq!(p.rates, vec![0.5, 1.0, 7.0]);
        assert_eq!(p.waits, vec![0.0, 1.0, 0.0]);
        let r = kkt_residual(&g, &dist(&[0.5, 2.0, 7.0]), &p).unwrap();
        assert!(r.max() <= 1e-10);
    }

    #[test]
    fn increasing_model_examples() {
        let g = increasing(
            vec![
                ExecTimeCurve::constant(1.0),
                ExecTimeCurve::affine(1.0, 1.0, 2.0),
                ExecTimeCurve::affine(1.0, 1.0, 2.0),
            ],
            vec![1.0, 2.0, 1.0],
        );
        let mu = dist(&[0.5, 2.0, 5.0]);
        let p = solve_parallel_increasing(&g, &mu).unwrap();
        assert_eq!((p.taus[0], p.rates[0], p.waits[0]), (1.0, 0.5, 0.0));
        assert!((p.rates[1] - 1.0).abs() < 1e-11);
        assert!((p.taus[1] - 2.0).abs() < 1e-11);
        assert_eq!(p.waits[1], 0.0);
        assert_eq!((p.taus[2], p.rates[2], p.waits[2]), (5.0, 1.0, 3.0));
        assert!(kkt_residual(&g, &mu, &p).unwrap().max() <= 1e-10);
    }

    #[test]
    fn shared_model_examples() {
        let g = figure2_shared();
        let p = solve_shared_two_action(&g, 0.0).unwrap();
        let w = p.multiplier.unwrap();
        assert!((w - 1.5).abs() < 1e-11);
        assert!((p.taus[0] - 6.0).abs() < 1e-10 && (p.taus[1] - 2.0).abs() < 1e-10);
        assert_eq!(p.rates[0], 0.0);
        assert!((p.rates[1] - 1.0).abs() < 1e-10);

        let p = solve_shared_two_action(&g, 0.5).unwrap();
        let w = p.multiplier.unwrap();
        // Independent check: w solves 1/(3+2w) + 1.5/(0.5+w) = 1.
        assert!((1.0 / (3.0 + 2.0 * w) + 1.5 / (0.5 + w) - 1.0).abs() < 1e-11);
        assert!((w - 1.32).abs() < 0.01);
        assert!((p.taus[0] - 5.65).abs() < 0.01 && (p.taus[1] - 1.82).abs() < 0.01);
        let r = kkt_residual(&g, &g.split(0.5), &p).unwrap();
        assert!(r.slackness <= 1e-10 && r.max() <= 1e-10);

        let mut slack = g.clone();
        slack.resource_model = ResourceModel::SharedTwoAction {
            exec_times: [1.0, 1.0],
            gammas: [1.0, 1.0],
            supply_rate: 10.0,
        };
        let p = solve_shared_two_action(&slack, 1.0).unwrap();
        assert_eq!(p.multiplier, Some(0.0));
        assert_eq!(p.taus, vec![1.0, 1.0]);
    }

    #[test]
    fn perturbed_tau_shows_in_littles_law() {
        let g = constant(vec![1.0, 1.0], vec![1.0, 1.0]);
        let mu = dist(&[2.0, 0.5]);
        let mut p = solve_parallel_constant(&g, &mu).unwrap();
        p.taus[0] += 0.1;
        let r = kkt_residual(&g, &mu, &p).unwrap();
        assert!((r.littles_law - 0.1 * p.rates[0]).abs() < 1e-12);
    }

    #[test]
    fn wrong_model_is_rejected() {
        let g = figure2_shared();
        assert!(matches!(
            solve_parallel_constant(&g, &dist(&[1.0, 1.0])),
            Err(Error::UnsupportedModel { .. })
        ));
        assert!(solve_shared_two_action(&g, 2.5).is_err());
    }

    fn random_curve() -> impl Strategy<Value = ExecTimeCurve> {
        (
            0.1f64..3.0,
            prop::collection::vec((0.05f64..2.0, 0.0f64..2.0), 0..4),
        )
            .prop_map(|(t0, segs)| {
                let mut knots = vec![(0.0, t0)];
                for (dx, dy) in segs {
                    let (x, y) = *knots.last().unwrap();
                    knots.push((x + dx, y + dy));
                }
                ExecTimeCurve::new(knots)
            })
    }

    fn supply() -> impl Strategy<Value = f64> {
        prop_oneof![Just(INF), 0.1f64..5.0]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn increasing_model_is_rate_monotone(
            curve in random_curve(), b in supply(), m1 in 0.0f64..10.0, m2 in 0.0f64..10.0
        ) {
            let g = increasing(vec![curve], vec![b]);
            let p1 = solve_parallel_increasing(&g, &dist(&[m1])).unwrap();
            let p2 = solve_parallel_increasing(&g, &dist(&[m2])).unwrap();
            if p1.rates[0] < p2.rates[0] {
                prop_assert!(p1.taus[0] <= p2.taus[0] + 1e-10);
            }
            prop_assert!(kkt_residual(&g, &dist(&[m1]), &p1).unwrap().max() <= 1e-8);
        }

        #[test]
        fn constant_model_is_rate_monotone(
            t in 0.1f64..3.0, b in supply(), m1 in 0.0f64..10.0, m2 in 0.0f64..10.0
        ) {
            let g = constant(vec![t], vec![b]);
            let p1 = solve_parallel_constant(&g, &dist(&[m1])).unwrap();
            let p2 = solve_parallel_constant(&g, &dist(&[m2])).unwrap();
            if p1.rates[0] < p2.rates[0] {
                prop_assert!(p1.taus[0] <= p2.taus[0] + 1e-10);
            }
            if m1 <= m2 {
                prop_assert!(p1.taus[0] <= p2.taus[0]);
            }
        }

        #[test]
        fn constant_curves_match_constant_model(
            t in prop::collection::vec(0.1f64..3.0, 1..6),
            b in prop::collection::vec(supply(), 6),
            mu in prop::collection::vec(0.0f64..10.0, 6),
        ) {
            let n = t.len();
            let b = b[..n].to_vec();
            let mu = dist(&mu[..n]);
            let pc = solve_parallel_constant(&constant(t.clone(), b.clone()), &mu).unwrap();
            let curves = t.iter().map(|&t| ExecTimeCurve::constant(t)).collect();
            let pi = solve_parallel_increasing(&increasing(curves, b), &mu).unwrap();
            for i in 0..n {
                prop_assert!((pc.taus[i] - pi.taus[i]).abs() <= 1e-10 * pc.taus[i].max(1.0));
                prop_assert!((pc.rates[i] - pi.rates[i]).abs() <= 1e-10 * pc.rates[i].max(1.0));
            }
        }

        #[test]
        fn shared_multiplier_grows_with_congestion(
            t1 in 0.1f64..3.0, t2 in 0.1f64..3.0, g1 in 0.1f64..3.0, g2 in 0.1f64..3.0,
            b in 0.1f64..3.0, m1 in 0.0f64..5.0, m2 in 0.0f64..5.0,
            d1 in 0.0f64..1.0, d2 in 0.0f64..1.0,
        ) {
            let mut g = figure2_shared();
            g.total_mass = 20.0;
            g.resource_model = ResourceModel::SharedTwoAction {
                exec_times: [t1, t2], gammas: [g1, g2], supply_rate: b,
            };
            let w = |a: f64, c: f64| shared_profile(&g, a, c).unwrap().multiplier.unwrap();
            prop_assert!(w(m1, m2) <= w(m1 + d1, m2 + d2) + 1e-10);
            let p = shared_profile(&g, m1, m2).unwrap();
            prop_assert!(kkt_residual(&g, &dist(&[m1, m2]), &p).unwrap().max() <= 1e-8);
        }
    }
}
