//! Welfare loss at equilibrium: the characteristic-number bound and the
//! witness families that push the ratio toward it.

use mfg_core::equilibrium::solve_constant_exponential;
use mfg_core::fixtures;
use mfg_core::welfare::{price_of_anarchy, witness_exponential, witness_powerlaw};

fn main() -> mfg_core::Result<()> {
    let g = fixtures::exponential_pair(1.6);
    let eq = solve_constant_exponential(&g)?.report.distribution;
    let poa = price_of_anarchy(&g, &[eq])?;
    println!(
        "pair m = 1.6: SW* = {:.4}, ratio {:.4}, chi + 1 = {:.4}",
        poa.optimum.welfare,
        poa.worst_ratio,
        poa.chi.unwrap() + 1.0
    );

    println!("exponential witness, t2 = 1 (limit e)");
    for t1 in [1e-2, 1e-3, 1e-4, 1e-5] {
        let w = witness_exponential(1.0, 1.0, t1)?;
        let r = price_of_anarchy(&w.instance, std::slice::from_ref(&w.equilibrium))?.worst_ratio;
        println!(
            "  t1 = {t1:.0e}: ratio {r:.4} (predicted {:.4})",
            w.predicted_ratio
        );
    }
    println!("exponential witness, growing t2");
    for t2 in [2.0, 4.0, 6.0, 8.0, 10.0] {
        let w = witness_exponential(1.0, t2, 1e-4)?;
        let r = price_of_anarchy(&w.instance, std::slice::from_ref(&w.equilibrium))?.worst_ratio;
        println!("  t2 = {t2}: ratio {r:.1} (M + 1 = {:.1})", w.limit);
    }
    println!("average-reward witness (limit 2)");
    for t1 in [0.25, 0.1, 0.01, 0.001] {
        let w = witness_powerlaw(t1)?;
        let r = price_of_anarchy(&w.instance, std::slice::from_ref(&w.equilibrium))?.worst_ratio;
        println!("  t1 = {t1}: ratio {r:.6}");
    }
    Ok(())
}
