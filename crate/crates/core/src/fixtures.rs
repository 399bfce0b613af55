//! Worked instances bundled with the crate: the two-action shared-resource
//! example and the small parallel instances used throughout the docs.

use crate::game::{Discount, GameInstance, ResourceModel, Tolerances};

const INF: f64 = f64::INFINITY;

fn shared_example(discount: Discount) -> GameInstance {
    GameInstance {
        total_mass: 2.0,
        rewards: vec![5f64.exp(), 1f64.exp()],
        resource_model: ResourceModel::SharedTwoAction {
            exec_times: [3.0, 0.5],
            gammas: [2.0, 1.0],
            supply_rate: 1.0,
        },
        discount,
        tolerances: Tolerances::default(),
    }
}

/// Shared resource, `m = 2`, `t = (3, 0.5)`, `r = (e^5, e)`, `gamma = (2, 1)`,
/// `b = 1`, exponential discount `beta = 1`. Three rest points.
pub fn figure2_discounted() -> GameInstance {
    shared_example(Discount::Exponential { beta: 1.0 })
}

/// Same parameters without discounting (average reward).
pub fn figure2_undiscounted() -> GameInstance {
    shared_example(Discount::PowerLaw { alpha: 0.0 })
}

fn parallel(
    m: f64,
    rewards: Vec<f64>,
    exec_times: Vec<f64>,
    supply_rates: Vec<f64>,
    discount: Discount,
) -> GameInstance {
    GameInstance {
        total_mass: m,
        rewards,
        resource_model: ResourceModel::ParallelConstant {
            exec_times,
            supply_rates,
        },
        discount,
        tolerances: Tolerances::default(),
    }
}

/// `r = (2, 1)`, `t = (1, 1)`, `b = (1, 1)`, `beta = 1`. All mass stays on
/// action 1 up to `m = ln(2e - 1)`; beyond it action 2 enters.
pub fn exponential_pair(m: f64) -> GameInstance {
    parallel(
        m,
        vec![2.0, 1.0],
        vec![1.0, 1.0],
        vec![1.0, 1.0],
        Discount::Exponential { beta: 1.0 },
    )
}

/// `r = (2, 1)`, `t = (1, 2)`, `b = (1, inf)`, average reward. Action 2
/// enters once `m > 4`.
pub fn reward_rate_pair(m: f64) -> GameInstance {
    parallel(
        m,
        vec![2.0, 1.0],
        vec![1.0, 2.0],
        vec![1.0, INF],
        Discount::PowerLaw { alpha: 0.0 },
    )
}

/// `r = (2, 1)`, `t = (1, 1)`, `b = (1, inf)`, power-law `alpha = 2`. No
/// stationary equilibrium exists for `m = 10`.
pub fn nonexistence_pair(m: f64) -> GameInstance {
    parallel(
        m,
        vec![2.0, 1.0],
        vec![1.0, 1.0],
        vec![1.0, INF],
        Discount::PowerLaw { alpha: 2.0 },
    )
}

/// Single action with unit time and infinite supply.
pub fn single_action(m: f64, discount: Discount) -> GameInstance {
    parallel(m, vec![1.0], vec![1.0], vec![INF], discount)
}

/// Every bundled fixture with a stable name, in a fixed order.
pub fn all() -> Vec<(&'static str, GameInstance)> {
    vec![
        ("shared_discounted", figure2_discounted()),
        ("shared_undiscounted", figure2_undiscounted()),
        ("exponential_pair_m1", exponential_pair(1.0)),
        ("exponential_pair_m1.6", exponential_pair(1.6)),
        ("reward_rate_pair_m2", reward_rate_pair(2.0)),
        ("reward_rate_pair_m6", reward_rate_pair(6.0)),
        ("nonexistence_pair_m10", nonexistence_pair(10.0)),
        ("nonexistence_pair_m1", nonexistence_pair(1.0)),
    ]
}
