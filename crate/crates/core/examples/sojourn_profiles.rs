//! Sojourn times, completion rates and waits under each resource model.

use mfg_core::sojourn;
use mfg_core::{fixtures, Discount, ExecTimeCurve, GameInstance, MassDistribution, ResourceModel};

fn main() -> mfg_core::Result<()> {
    // Two parallel resources; the first saturates once its mass exceeds b t = 1.
    let g = fixtures::exponential_pair(3.0);
    for mu1 in [0.5, 1.0, 2.0, 3.0] {
        let mu = g.split(mu1);
        let p = sojourn::solve(&g, &mu)?;
        let kkt = sojourn::kkt_residual(&g, &mu, &p)?;
        println!(
            "constant   mu = {:?}  tau = {:.3?}  x = {:.3?}  w = {:.3?}  kkt = {:.1e}",
            mu.masses,
            p.taus,
            p.rates,
            p.waits,
            kkt.max()
        );
    }

    // Execution time grows with throughput until the supply rate binds.
    let g = GameInstance {
        total_mass: 4.0,
        rewards: vec![1.0, 1.0],
        resource_model: ResourceModel::ParallelIncreasing {
            exec_time_curves: vec![
                ExecTimeCurve::affine(1.0, 0.5, 2.0),
                ExecTimeCurve::constant(2.0),
            ],
            supply_rates: vec![1.5, f64::INFINITY],
        },
        discount: Discount::Exponential { beta: 0.5 },
        tolerances: Default::default(),
    };
    for mu1 in [0.5, 1.5, 3.0, 4.0] {
        let p = sojourn::solve(&g, &g.split(mu1))?;
        println!(
            "increasing mu1 = {mu1}  tau = {:.3?}  x = {:.3?}  w = {:.3?}",
            p.taus, p.rates, p.waits
        );
    }

    // One shared resource: both actions wait on a common multiplier.
    let g = fixtures::figure2_discounted();
    for mu1 in [0.0, 0.5, 1.0, 2.0] {
        let p = sojourn::solve(&g, &MassDistribution::new(vec![mu1, 2.0 - mu1])?)?;
        println!(
            "shared     mu1 = {mu1}  tau = {:.3?}  w = {:.3?}  multiplier = {:.4}",
            p.taus,
            p.waits,
            p.multiplier.unwrap_or(0.0)
        );
    }
    Ok(())
}
