//! Projection dynamics on one shared resource: rest points, their stability
//! and a few trajectories. Discounting creates an unstable interior
//! equilibrium that average-reward play does not have.

use mfg_core::dynamics::{self, RestKind, UnstableParams};
use mfg_core::fixtures;

fn main() -> mfg_core::Result<()> {
    for (name, g) in [
        ("discounted", fixtures::figure2_discounted()),
        ("undiscounted", fixtures::figure2_undiscounted()),
    ] {
        println!("{name}");
        let points = dynamics::find_rest_points(&g, dynamics::DEFAULT_GRID)?;
        for p in &points {
            println!(
                "  rest point mu1 = {:.6}  {:?} {:?}",
                p.mu1, p.kind, p.stability
            );
            if p.kind == RestKind::Interior {
                let check = dynamics::check_unstable_conditions(&UnstableParams::from_instance(
                    &g, p.mu1,
                )?)?;
                let slope = dynamics::analytic_drift_derivative(&g, p.mu1)?;
                println!(
                    "    slope {slope:.4}, instability certified: {}",
                    check.certified
                );
            }
        }
        let h = dynamics::default_step(&g);
        for start in [0.3, 0.6, 1.5] {
            let trace = dynamics::integrate(&g, start, h, 40.0)?;
            println!("  from {start}: mu1(40) = {:.6}", trace.last().mu1);
        }
    }
    Ok(())
}
