//! With steep power-law discounting a crowded game can have no stationary
//! equilibrium at all; a lightly loaded one still does.

use mfg_core::equilibrium::detect_nonexistence_two_action;
use mfg_core::fixtures;

fn main() -> mfg_core::Result<()> {
    for m in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let report = detect_nonexistence_two_action(&fixtures::nonexistence_pair(m))?;
        println!(
            "m = {m:<4} {:?}  candidate {:?}  payoffs {:.3?}",
            report.verdict, report.distribution.masses, report.payoffs
        );
    }
    Ok(())
}
