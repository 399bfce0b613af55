//! Equilibria of constant-execution-time games as the population grows,
//! from the closed-form case machines.

use mfg_core::equilibrium::{solve_constant_exponential, solve_constant_powerlaw};
use mfg_core::fixtures;

fn main() -> mfg_core::Result<()> {
    println!("exponential discounting, r = (2, 1), t = (1, 1), b = (1, 1)");
    for m in [0.5, 1.0, 1.5, 1.6, 2.5, 4.0] {
        let s = solve_constant_exponential(&fixtures::exponential_pair(m))?;
        println!(
            "  m = {m:<4} mu = {:.4?}  case {} {:?}  residual {:.1e}",
            s.report.distribution.masses, s.case.case_index, s.case.subcase, s.report.residual
        );
    }

    println!("average reward, r = (2, 1), t = (1, 2), b = (1, inf)");
    for m in [0.5, 2.0, 4.0, 6.0, 10.0] {
        let s = solve_constant_powerlaw(&fixtures::reward_rate_pair(m))?;
        println!(
            "  m = {m:<4} mu = {:.4?}  case {} {:?}  payoffs {:.4?}",
            s.report.distribution.masses, s.case.case_index, s.case.subcase, s.report.payoffs
        );
    }
    Ok(())
}
