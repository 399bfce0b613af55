//! Equilibrium of a game with load-dependent execution times, where no
//! closed form applies, found by best-response mass transfers.

use mfg_core::equilibrium::{solve_fixed_point, verify_equilibrium, FixedPointOptions};
use mfg_core::{Discount, ExecTimeCurve, GameInstance, ResourceModel};

fn main() -> mfg_core::Result<()> {
    let g = GameInstance {
        total_mass: 5.0,
        rewards: vec![3.0, 2.0, 1.0],
        resource_model: ResourceModel::ParallelIncreasing {
            exec_time_curves: vec![
                ExecTimeCurve::affine(1.0, 1.0, 4.0),
                ExecTimeCurve::new(vec![(0.0, 0.8), (1.0, 1.0), (2.0, 3.0)]),
                ExecTimeCurve::constant(0.5),
            ],
            supply_rates: vec![2.0, 3.0, 1.0],
        },
        discount: Discount::Exponential { beta: 0.3 },
        tolerances: Default::default(),
    };
    let report = solve_fixed_point(&g, &FixedPointOptions::default())?;
    println!("mu        = {:.6?}", report.distribution.masses);
    println!("payoffs   = {:.6?}", report.payoffs);
    println!("strategy  = {:.4?}", report.strategy);
    println!(
        "verdict   = {:?} after {:?} transfers",
        report.verdict, report.iterations
    );

    let check = verify_equilibrium(&g, &report.distribution, 1e-8)?;
    println!(
        "independent check: {:?}, residual {:.1e}",
        check.verdict, check.residual
    );
    Ok(())
}
