//! The two maximally Bell-violating distributions move the matching-pennies
//! equilibrium off the centre onto an edge of the strategy square.

use epr_game::game::{cell_payoffs, matching_pennies, nash_from_mu_form};
use epr_game::nash::find_nash;
use epr_game::probability::{canonical_set, chsh, try_factorize, CanonicalSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for set in [
        CanonicalSet::First,
        CanonicalSet::Second,
        CanonicalSet::Uniform,
    ] {
        let d = canonical_set(set);
        let table = cell_payoffs(&matching_pennies(), &d)?;
        let report = find_nash(&table)?.classify(&d)?;
        let mu = nash_from_mu_form(&d)?;
        println!(
            "{set:?}: Δ = {:+.6}, factorizable = {}",
            chsh(&d)?.delta,
            try_factorize(&d, 1e-9)?.is_factorizable()
        );
        println!(
            "  Alice bracket {:?}, Bob bracket {:?}",
            mu.alice_line(),
            mu.bob_line()
        );
        for c in &report.components {
            println!(
                "  {:?} x∈[{}, {}] y∈[{}, {}]  Π_A={:+.6}  {} (Δ_r = {:?})",
                c.shape,
                c.x.lo,
                c.x.hi,
                c.y.lo,
                c.y.hi,
                c.payoffs.alice,
                c.classification.class,
                c.classification.delta_r
            );
        }
    }
    Ok(())
}
