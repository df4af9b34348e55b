//! Normalization, locality and factorizability checks, including what a
//! hand-made signaling distribution looks like to them.

use epr_game::probability::{
    check_locality, check_normalization, from_coins, try_factorize, CoinParams, JointDistribution,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = from_coins(&CoinParams::new(0.3, 0.7, 0.6, 0.4)?);
    let f = try_factorize(&d, 1e-12)?;
    println!(
        "coins (0.3, 0.7, 0.6, 0.4) -> recovered {:?}",
        f.coins.map(|c| c.as_array())
    );

    // Swap two outcomes of block (S1,S2'): Alice cannot tell, Bob can.
    let mut p = *d.as_array();
    p.swap(4, 5);
    let tampered = JointDistribution::new(p)?;
    println!(
        "normalization passes: {}",
        check_normalization(&tampered, 1e-9).passes()
    );
    for c in check_locality(&tampered, 1e-9).checks {
        let flag = if c.residual > 1e-9 { "violated" } else { "ok" };
        println!("  {:<16} residual {:.3}  {flag}", c.label, c.residual);
    }
    Ok(())
}
