//! Social welfare, social optimum, price of anarchy and the characteristic
//! number, plus the witness instances that drive the ratio toward its bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Discount, GameInstance, MassDistribution, ResourceModel, Tolerances};
use crate::numeric::golden_max;
use crate::sojourn;

/// Reward collected per unit time, `sum_i r_i x_i(mu)`.
pub fn social_welfare(instance: &GameInstance, mu: &MassDistribution) -> Result<f64> {
    let profile = sojourn::solve(instance, mu)?;
    Ok(instance
        .rewards
        .iter()
        .zip(&profile.rates)
        .map(|(r, x)| r * x)
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialOptimum {
    /// Best distribution found; it may carry less than the total mass.
    pub distribution: MassDistribution,
    pub welfare: f64,
    /// True when the optimum is exact (greedy on constant execution times).
    pub certified: bool,
}

/// Maximum welfare over distributions of total mass at most `m`.
///
/// With constant execution times each unit of mass on action `i` earns
/// `r_i / t_i` until the action saturates at mass `b_i t_i` and nothing
/// after, so filling actions in decreasing `r_i / t_i` order is exact. Other
/// models use a grid over the sub-mass simplex (for up to three actions)
/// followed by pairwise line searches; those results are not certified.
pub fn social_optimum(instance: &GameInstance) -> Result<SocialOptimum> {
    instance.validate()?;
    if let ResourceModel::ParallelConstant {
        exec_times,
        supply_rates,
    } = &instance.resource_model
    {
        let r = &instance.rewards;
        let mut order: Vec<usize> = (0..r.len()).collect();
        order.sort_by(|&a, &b| (r[b] / exec_times[b]).total_cmp(&(r[a] / exec_times[a])));
        let mut remaining = instance.total_mass;
        let mut masses = vec![0.0; r.len()];
        for i in order {
            let take = remaining.min(supply_rates[i] * exec_times[i]);
            masses[i] = take;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        let distribution = MassDistribution::new(masses)?;
        return Ok(SocialOptimum {
            welfare: social_welfare(instance, &distribution)?,
            distribution,
            certified: true,
        });
    }
    let resolution = match instance.n_actions() {
        1 | 2 => 128,
        3 => 48,
        _ => 0,
    };
    let mut best = if resolution > 0 {
        grid_optimum(instance, resolution)?
    } else {
        starting_points(instance)
            .into_iter()
            .map(|mu| Ok((social_welfare(instance, &mu)?, mu)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(
                None,
                |acc: Option<SocialOptimum>, (welfare, distribution)| match acc {
                    Some(a) if a.welfare >= welfare => Some(a),
                    _ => Some(SocialOptimum {
                        distribution,
                        welfare,
                        certified: false,
                    }),
                },
            )
            .expect("at least one starting point")
    };
    refine(instance, &mut best)?;
    Ok(best)
}

fn starting_points(instance: &GameInstance) -> Vec<MassDistribution> {
    let n = instance.n_actions();
    let mut out: Vec<MassDistribution> = (0..n).map(|i| instance.concentrated(i)).collect();
    out.push(MassDistribution {
        masses: vec![instance.total_mass / n as f64; n],
    });
    out
}

/// Best welfare on the grid `{k / resolution * m : sum k <= resolution}`.
pub fn grid_optimum(instance: &GameInstance, resolution: usize) -> Result<SocialOptimum> {
    let n = instance.n_actions();
    let m = instance.total_mass;
    let mut best = SocialOptimum {
        distribution: MassDistribution {
            masses: vec![0.0; n],
        },
        welfare: 0.0,
        certified: false,
    };
    let mut counts = vec![0usize; n];
    loop {
        let used: usize = counts.iter().sum();
        if used <= resolution {
            let mu = MassDistribution {
                masses: counts
                    .iter()
                    .map(|&k| m * k as f64 / resolution as f64)
                    .collect(),
            };
            let w = social_welfare(instance, &mu)?;
            if w > best.welfare {
                best.welfare = w;
                best.distribution = mu;
            }
        }
        // Odometer over counts with pruning on the running sum.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(best);
            }
            counts[i] += 1;
            if counts.iter().sum::<usize>() <= resolution {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// Line searches along single coordinates and pairwise transfers until no
/// move improves welfare.
fn refine(instance: &GameInstance, best: &mut SocialOptimum) -> Result<()> {
    let n = instance.n_actions();
    let m = instance.total_mass;
    let welfare = |mu: &MassDistribution| social_welfare(instance, mu).unwrap_or(f64::NEG_INFINITY);
    for _ in 0..100 {
        let before = best.welfare;
        for i in 0..n {
            // Vary the mass on i alone within the remaining budget.
            let others = best.distribution.mass() - best.distribution[i];
            let cap = (m - others).max(0.0);
            let base = best.distribution.clone();
            let line = |v: f64| {
                let mut mu = base.clone();
                mu.masses[i] = v;
                welfare(&mu)
            };
            let (v, w) = golden_max(line, 0.0, cap, 1e-12 * m.max(1.0));
            if w > best.welfare {
                best.distribution.masses[i] = v;
                best.welfare = w;
            }
            for j in 0..n {
                if j == i {
                    continue;
                }
                let base = best.distribution.clone();
                let total = base[i] + base[j];
                let line = |v: f64| {
                    let mut mu = base.clone();
                    mu.masses[i] = v;
                    mu.masses[j] = (total - v).max(0.0);
                    welfare(&mu)
                };
                let (v, w) = golden_max(line, 0.0, total, 1e-12 * m.max(1.0));
                if w > best.welfare {
                    best.distribution.masses[i] = v;
                    best.distribution.masses[j] = (total - v).max(0.0);
                    best.welfare = w;
                }
            }
        }
        if best.welfare - before <= 1e-13 * best.welfare.abs().max(1.0) {
            break;
        }
    }
    Ok(())
}

/// `(e^x - 1) / x`, continuous at 0.
fn growth(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicNumber {
    pub chi_per_action: Vec<f64>,
    pub chi: f64,
}

/// `chi_i = sup (e^{beta tau_i} - 1) / (beta tau_i)` over full-mass
/// distributions and `chi = max_i chi_i`.
///
/// The map is increasing in `tau`, so for parallel models the sup sits at the
/// largest sojourn time, reached with all mass on `i`. The shared model is
/// scanned over `mu1` and refined by golden section.
pub fn characteristic_number(instance: &GameInstance) -> Result<CharacteristicNumber> {
    let Discount::Exponential { beta } = instance.discount else {
        return Err(Error::UnsupportedModel {
            operation: "characteristic_number",
            requirement: "exponential discounting",
        });
    };
    instance.validate()?;
    let n = instance.n_actions();
    let m = instance.total_mass;
    let chi_per_action = match &instance.resource_model {
        ResourceModel::ParallelConstant {
            exec_times,
            supply_rates,
        } => (0..n)
            .map(|i| growth(beta * exec_times[i].max(m / supply_rates[i])))
            .collect(),
        ResourceModel::ParallelIncreasing { .. } => (0..n)
            .map(|i| {
                let p = sojourn::solve(instance, &instance.concentrated(i))?;
                Ok(growth(beta * p.taus[i]))
            })
            .collect::<Result<Vec<_>>>()?,
        ResourceModel::SharedTwoAction { .. } => (0..2)
            .map(|i| {
                let value = |mu1: f64| {
                    sojourn::solve_shared_two_action(instance, mu1.clamp(0.0, m))
                        .map(|p| growth(beta * p.taus[i]))
                        .unwrap_or(f64::NEG_INFINITY)
                };
                let grid = 1024;
                let (mut arg, mut best) = (0.0, value(0.0));
                for k in 1..=grid {
                    let mu1 = m * k as f64 / grid as f64;
                    let v = value(mu1);
                    if v > best {
                        arg = mu1;
                        best = v;
                    }
                }
                let cell = m / grid as f64;
                let (_, refined) = golden_max(
                    value,
                    (arg - cell).max(0.0),
                    (arg + cell).min(m),
                    1e-12 * m.max(1.0),
                );
                Ok(best.max(refined))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let chi = chi_per_action.iter().copied().fold(1.0, f64::max);
    Ok(CharacteristicNumber {
        chi_per_action,
        chi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumWelfare {
    pub distribution: MassDistribution,
    pub welfare: f64,
    /// `SW* / SW`; infinite when the equilibrium earns nothing.
    #[serde(with = "crate::io::inf_f64")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoaReport {
    pub optimum: SocialOptimum,
    pub equilibria: Vec<EquilibriumWelfare>,
    #[serde(with = "crate::io::inf_f64")]
    pub worst_ratio: f64,
    /// Present under exponential discounting only.
    pub chi: Option<f64>,
    pub chi_per_action: Option<Vec<f64>>,
    pub certified: bool,
}

/// Welfare ratios `SW* / SW(mu)` for the given equilibria.
pub fn price_of_anarchy(
    instance: &GameInstance,
    equilibria: &[MassDistribution],
) -> Result<PoaReport> {
    let optimum = social_optimum(instance)?;
    let mut rows = Vec::with_capacity(equilibria.len());
    for mu in equilibria {
        let welfare = social_welfare(instance, mu)?;
        let ratio = if welfare > 0.0 {
            optimum.welfare / welfare
        } else if optimum.welfare > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        rows.push(EquilibriumWelfare {
            distribution: mu.clone(),
            welfare,
            ratio,
        });
    }
    let worst_ratio = rows.iter().map(|r| r.ratio).fold(1.0, f64::max);
    let chi = match instance.discount {
        Discount::Exponential { .. } => Some(characteristic_number(instance)?),
        Discount::PowerLaw { .. } => None,
    };
    Ok(PoaReport {
        certified: optimum.certified,
        optimum,
        equilibria: rows,
        worst_ratio,
        chi: chi.as_ref().map(|c| c.chi),
        chi_per_action: chi.map(|c| c.chi_per_action),
    })
}

/// A constructed instance together with its equilibrium and the ratio the
/// construction predicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub instance: GameInstance,
    pub equilibrium: MassDistribution,
    pub predicted_ratio: f64,
    /// The value the ratio approaches along the family.
    pub limit: f64,
}

/// Two actions with `b_1 = 1`, `b_2 = inf`, wait `w_1 = sqrt(t_1)` on
/// action 1 and mass `m = b_1 (t_1 + w_1)`. Rewards are tuned so that all
/// mass on action 1 is an equilibrium; the optimum moves the queued mass to
/// action 2. The ratio approaches `M + 1` with `M = (e^{beta t_2} - 1)/(beta t_2)`
/// as `t_1 -> 0`, and grows without bound in `t_2`.
pub fn witness_exponential(beta: f64, t2: f64, t1: f64) -> Result<Witness> {
    for (name, v) in [("beta", beta), ("t2", t2), ("t1", t1)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Precondition(format!(
                "{name} = {v} must be positive"
            )));
        }
    }
    let b1 = 1.0;
    let w1 = t1.sqrt();
    let tau1 = t1 + w1;
    let m = b1 * tau1;
    let r2 = 1.0;
    let r1 = r2 * (beta * tau1).exp_m1() / (beta * t2).exp_m1();
    let instance = GameInstance {
        total_mass: m,
        rewards: vec![r1, r2],
        resource_model: ResourceModel::ParallelConstant {
            exec_times: vec![t1, t2],
            supply_rates: vec![b1, f64::INFINITY],
        },
        discount: Discount::Exponential { beta },
        tolerances: Tolerances::default(),
    };
    let big_m = growth(beta * t2);
    let predicted_ratio = 1.0 + big_m / (growth(beta * tau1) * tau1 / w1);
    Ok(Witness {
        equilibrium: instance.concentrated(0),
        instance,
        predicted_ratio,
        limit: big_m + 1.0,
    })
}

/// Two actions, average reward: `r = (1, 2)`, `t = (t_1, 1)`, `b = (2, inf)`,
/// `m = 1`. All mass on action 1 ties the reward rates and is an
/// equilibrium; the optimum earns `2 - 2 t_1` times more.
pub fn witness_powerlaw(t1: f64) -> Result<Witness> {
    if !(t1 > 0.0 && t1 < 0.5) {
        return Err(Error::Precondition(format!(
            "t1 = {t1} must lie in (0, 0.5) so that r1 < r2"
        )));
    }
    let (r2, t2, m, b1) = (2.0, 1.0, 1.0, 2.0);
    let tau1 = m / b1;
    let r1 = r2 * tau1 / t2;
    let instance = GameInstance {
        total_mass: m,
        rewards: vec![r1, r2],
        resource_model: ResourceModel::ParallelConstant {
            exec_times: vec![t1, t2],
            supply_rates: vec![b1, f64::INFINITY],
        },
        discount: Discount::PowerLaw { alpha: 0.0 },
        tolerances: Tolerances::default(),
    };
    Ok(Witness {
        equilibrium: instance.concentrated(0),
        instance,
        predicted_ratio: 2.0 - b1 / m * t1,
        limit: 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::verify_equilibrium;
    use crate::fixtures;
    use proptest::prelude::*;

    fn dist(v: &[f64]) -> MassDistribution {
        MassDistribution::new(v.to_vec()).unwrap()
    }

    fn pair(m: f64) -> GameInstance {
        let mut g = fixtures::exponential_pair(m);
        if let ResourceModel::ParallelConstant { supply_rates, .. } = &mut g.resource_model {
            supply_rates[1] = f64::INFINITY;
        }
        g
    }

    #[test]
    fn welfare_examples() {
        let g = pair(3.0);
        assert_eq!(social_welfare(&g, &dist(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(social_welfare(&g, &dist(&[1.0, 1.0])).unwrap(), 3.0);
        let f = fixtures::figure2_discounted();
        let p = sojourn::solve_shared_two_action(&f, 2.0).unwrap();
        let sw = social_welfare(&f, &f.split(2.0)).unwrap();
        assert!((sw - f.rewards[0] * p.rates[0]).abs() < 1e-12);
    }

    #[test]
    fn greedy_optimum_examples() {
        let o = social_optimum(&pair(1.0)).unwrap();
        assert_eq!(
            (o.distribution.masses.clone(), o.welfare, o.certified),
            (vec![1.0, 0.0], 2.0, true)
        );
        let o = social_optimum(&pair(3.0)).unwrap();
        assert_eq!(
            (o.distribution.masses.clone(), o.welfare),
            (vec![1.0, 2.0], 4.0)
        );
        assert_eq!(social_optimum(&pair(0.0)).unwrap().welfare, 0.0);
    }

    #[test]
    fn chi_examples() {
        let single = fixtures::single_action(1.0, Discount::Exponential { beta: 1.0 });
        let c = characteristic_number(&single).unwrap();
        assert!((c.chi - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        let mut tiny = single.clone();
        tiny.discount = Discount::Exponential { beta: 1e-9 };
        assert!((characteristic_number(&tiny).unwrap().chi - 1.0).abs() < 1e-8);
        let mut capped = single;
        capped.total_mass = 2.0;
        if let ResourceModel::ParallelConstant { supply_rates, .. } = &mut capped.resource_model {
            supply_rates[0] = 1.0;
        }
        let c = characteristic_number(&capped).unwrap();
        assert!((c.chi - (2f64.exp() - 1.0) / 2.0).abs() < 1e-12);
        assert!((c.chi - 3.1945).abs() < 1e-4);
        let shared = characteristic_number(&fixtures::figure2_discounted()).unwrap();
        // Action 1 waits longest with all mass on it: tau_1 = 3 + 2 w at mu1 = 2.
        let p = sojourn::solve_shared_two_action(&fixtures::figure2_discounted(), 2.0).unwrap();
        assert!(shared.chi_per_action[0] >= growth(p.taus[0]) - 1e-9);
    }

    #[test]
    fn poa_of_an_efficient_equilibrium_is_one() {
        let g = pair(1.0);
        let r = price_of_anarchy(&g, &[dist(&[1.0, 0.0])]).unwrap();
        assert_eq!(r.worst_ratio, 1.0);
        assert!(r.chi.unwrap() >= 1.0);
    }

    #[test]
    fn exponential_witness_matches_measured_ratio() {
        for t1 in [1e-2, 1e-3, 1e-4, 1e-5] {
            let w = witness_exponential(1.0, 1.0, t1).unwrap();
            let v = verify_equilibrium(&w.instance, &w.equilibrium, 1e-8).unwrap();
            assert_eq!(v.verdict, crate::game::Verdict::Equilibrium);
            let poa = price_of_anarchy(&w.instance, std::slice::from_ref(&w.equilibrium)).unwrap();
            assert!((poa.worst_ratio - w.predicted_ratio).abs() <= 1e-8 * w.predicted_ratio);
            assert!(w.predicted_ratio <= w.limit);
        }
        let w = witness_exponential(1.0, 1.0, 1e-4).unwrap();
        assert!((w.predicted_ratio - 2.69).abs() < 0.01);
        let w = witness_exponential(1.0, 10.0, 1e-4).unwrap();
        assert!(w.predicted_ratio > 100.0);
        assert!((w.limit - 1.0 - 2202.5).abs() < 0.1);
    }

    #[test]
    fn powerlaw_witness_matches_measured_ratio() {
        for (t1, expected) in [(0.01, 1.98), (0.25, 1.5)] {
            let w = witness_powerlaw(t1).unwrap();
            assert!(w.instance.rewards[0] < w.instance.rewards[1]);
            let poa = price_of_anarchy(&w.instance, std::slice::from_ref(&w.equilibrium)).unwrap();
            assert!((poa.worst_ratio - expected).abs() < 1e-12);
            assert!((w.predicted_ratio - expected).abs() < 1e-12);
        }
        assert!(witness_powerlaw(0.5).is_err());
    }

    #[test]
    fn shared_optimum_is_at_least_any_equilibrium() {
        let g = fixtures::figure2_discounted();
        let o = social_optimum(&g).unwrap();
        assert!(!o.certified);
        for mu1 in [0.0, 0.5, 1.0, 2.0] {
            assert!(o.welfare >= social_welfare(&g, &g.split(mu1)).unwrap() - 1e-12);
        }
    }

    fn random_constant(r: &[f64], t: &[f64], b: &[f64], m: f64) -> GameInstance {
        GameInstance {
            total_mass: m,
            rewards: r.to_vec(),
            resource_model: ResourceModel::ParallelConstant {
                exec_times: t.to_vec(),
                supply_rates: b.to_vec(),
            },
            discount: Discount::Exponential { beta: 1.0 },
            tolerances: Tolerances::default(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_beats_grid_by_at_most_resolution(
            r in prop::collection::vec(0.2f64..5.0, 3), t in prop::collection::vec(0.2f64..3.0, 3),
            b in prop::collection::vec(0.2f64..3.0, 3), m in 0.1f64..6.0,
        ) {
            let g = random_constant(&r, &t, &b, m);
            let greedy = social_optimum(&g).unwrap().welfare;
            let mut grid = grid_optimum(&g, 40).unwrap();
            prop_assert!(grid.welfare <= greedy + 1e-12);
            let max_rate = (0..3).map(|i| r[i] / t[i]).fold(0.0, f64::max);
            prop_assert!(greedy - grid.welfare <= 3.0 * max_rate * m / 40.0 + 1e-12);
            refine(&g, &mut grid).unwrap();
            prop_assert!((greedy - grid.welfare).abs() <= 1e-6 * greedy.max(1.0));
        }

        #[test]
        fn chi_is_monotone_in_mass(
            r in prop::collection::vec(0.2f64..5.0, 3), t in prop::collection::vec(0.2f64..3.0, 3),
            b in prop::collection::vec(0.2f64..3.0, 3), m in 0.1f64..6.0, extra in 0.0f64..3.0,
        ) {
            let small = characteristic_number(&random_constant(&r, &t, &b, m)).unwrap().chi;
            let large = characteristic_number(&random_constant(&r, &t, &b, m + extra)).unwrap().chi;
            prop_assert!(small <= large);
        }
    }
}
