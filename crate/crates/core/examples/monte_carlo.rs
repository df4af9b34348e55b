//! The referee protocol run many times: empirical payoffs approach the
//! analytic ones at rate 1/√n, and the same seed replays the same log.

use std::f64::consts::FRAC_1_SQRT_2;

use epr_game::formats::write_run_log;
use epr_game::game::{matching_pennies, StrategyProfile};
use epr_game::probability::{canonical_set, CanonicalSet};
use epr_game::simulator::{simulate_runs, SimulationConfig, Source};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = Source::Distribution(canonical_set(CanonicalSet::First));
    let profile = StrategyProfile::new(1.0, 0.0)?;
    for n in [1_000u64, 10_000, 100_000, 1_000_000] {
        let config = SimulationConfig {
            profile,
            runs: n,
            seed: 42,
            record_runs: false,
        };
        let sim = simulate_runs(&source, &matching_pennies(), &config)?;
        let err = sim.empirical.payoffs.alice - FRAC_1_SQRT_2;
        println!(
            "n={n:>8}  Π_A={:.5}  error={err:+.5}  error·√n={:+.3}",
            sim.empirical.payoffs.alice,
            err * (n as f64).sqrt()
        );
    }

    let config = SimulationConfig {
        profile: StrategyProfile::new(0.5, 0.5)?,
        runs: 3,
        seed: 7,
        record_runs: true,
    };
    let sim = simulate_runs(&source, &matching_pennies(), &config)?;
    println!("run log:");
    write_run_log(std::io::stdout().lock(), &sim)?;
    Ok(())
}
