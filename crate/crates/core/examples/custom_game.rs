//! The equilibrium solver on games other than matching pennies, played
//! classically through a deterministic distribution.

use epr_game::game::{cell_payoffs, GameMatrix};
use epr_game::nash::find_nash;
use epr_game::probability::{from_coins, CoinParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Outcome (+,+) under (S1,S1'), (+,−) under (S1,S2'), and so on, so each
    // setting pair selects one matrix cell.
    let d = from_coins(&CoinParams::new(1.0, 0.0, 1.0, 0.0)?);
    let games = [
        (
            "prisoner's dilemma",
            [(3.0, 3.0), (0.0, 5.0), (5.0, 0.0), (1.0, 1.0)],
        ),
        (
            "battle of the sexes",
            [(2.0, 1.0), (0.0, 0.0), (0.0, 0.0), (1.0, 2.0)],
        ),
        (
            "coordination with indifferent Bob",
            [(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)],
        ),
    ];
    for (name, cells) in games {
        let table = cell_payoffs(&GameMatrix::new(cells)?, &d)?;
        println!("{name}:");
        for c in find_nash(&table)?.components {
            println!(
                "  {:?} x∈[{:.4}, {:.4}] y∈[{:.4}, {:.4}]  payoffs ({:.4}, {:.4}) .. ({:.4}, {:.4})",
                c.shape, c.x.lo, c.x.hi, c.y.lo, c.y.hi,
                c.payoffs.alice, c.payoffs.bob, c.payoffs_end.alice, c.payoffs_end.bob
            );
        }
    }
    Ok(())
}
