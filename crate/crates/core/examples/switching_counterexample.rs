//! Under power-law discounting with alpha > 1 a single switch between
//! actions can beat every stationary strategy.

use mfg_core::utility::build_switching_counterexample;

fn main() -> mfg_core::Result<()> {
    for (alpha, eps) in [(2.0, 0.3), (1.5, 0.3), (3.0, 0.1)] {
        let c = build_switching_counterexample(alpha, eps)?;
        println!(
            "alpha {alpha}: play action 1 {} times then action 2 (r2 = {:.3}, t2 = {})",
            c.switch_after, c.instance.rewards[1], c.switch_after
        );
        println!(
            "  stationary {:.6}  switching {:.6}  margin {:.6}",
            c.stationary_value.value, c.switching_value.value, c.margin
        );
    }
    Ok(())
}
