//! Four independent biased coins reproduce the classical game: with
//! `r + s = 1` and `r' + s' = 1` the only equilibrium is (1/2, 1/2).

use epr_game::game::{cell_payoffs, expected_payoffs, matching_pennies, StrategyProfile};
use epr_game::nash::find_nash;
use epr_game::probability::{check_embedding, chsh, from_coins, CoinParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (r, rp) in [(0.3, 0.6), (0.9, 0.2), (0.05, 0.75)] {
        let coins = CoinParams::new(r, 1.0 - r, rp, 1.0 - rp)?;
        let d = from_coins(&coins);
        assert!(check_embedding(&d, 1e-12).passes());

        let table = cell_payoffs(&matching_pennies(), &d)?;
        let report = find_nash(&table)?;
        let eq = &report.components[0];
        let pay = expected_payoffs(&table, &StrategyProfile::new(eq.x.lo, eq.y.lo)?);
        println!(
            "r={r:<4} r'={rp:<4}  Δ={:+.4}  NE=({:.6}, {:.6})  Π_A={:+.1e}",
            chsh(&d)?.delta,
            eq.x.lo,
            eq.y.lo,
            pay.alice
        );
    }
    Ok(())
}
