mod common;

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::io::BufReader;

use epr_game::formats::{read_run_log, write_run_log};
use epr_game::game::{matching_pennies, StrategyProfile};
use epr_game::probability::*;
use epr_game::quantum::{singlet, MeasurementSettings};
use epr_game::simulator::*;

fn run(source: &Source, x: f64, y: f64, runs: u64, seed: u64) -> Simulation {
    let config = SimulationConfig {
        profile: StrategyProfile::new(x, y).unwrap(),
        runs,
        seed,
        record_runs: false,
    };
    simulate_runs(source, &matching_pennies(), &config).unwrap()
}

fn fair_coins() -> Source {
    Source::Coins(CoinParams::new(0.5, 0.5, 0.5, 0.5).unwrap())
}

#[test]
fn uniform_coins_hit_every_cell_at_one_sixteenth() {
    let n = 100_000;
    let sim = run(&fair_coins(), 0.5, 0.5, n, 2024);
    let band = 4.0 * common::binomial_se(1.0 / 16.0, n as f64);
    assert!((band - 0.0031).abs() < 1e-4);
    for (i, f) in sim.log.overall_frequencies().iter().enumerate() {
        assert!((f - 1.0 / 16.0).abs() <= band, "p{} frequency {f}", i + 1);
    }
}

#[test]
fn first_set_empirical_payoff_converges() {
    let sim = run(
        &Source::Distribution(canonical_set(CanonicalSet::First)),
        1.0,
        0.0,
        100_000,
        9,
    );
    assert!((sim.empirical.payoffs.alice - FRAC_1_SQRT_2).abs() <= 0.01);
    assert!((sim.empirical.payoffs.alice + sim.empirical.payoffs.bob).abs() < 1e-12);
    assert!(sim.empirical.partial);
    assert_eq!(sim.log.pair_total(SettingPair::S1S2p), 100_000);
}

#[test]
fn single_run_at_pure_profile() {
    let config = SimulationConfig {
        profile: StrategyProfile::new(1.0, 1.0).unwrap(),
        runs: 1,
        seed: 5,
        record_runs: true,
    };
    let sim = simulate_runs(&fair_coins(), &matching_pennies(), &config).unwrap();
    let recs = sim.log.records.unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].pair, SettingPair::S1S1p);
}

#[test]
fn estimated_coin_distribution_is_local_within_five_standard_errors() {
    let src = Source::Coins(CoinParams::new(0.3, 0.7, 0.6, 0.4).unwrap());
    let sim = run(&src, 0.5, 0.5, 200_000, 77);
    let est = empirical_to_distribution(&sim.log).unwrap();
    let tol = 5.0 * est.max_std_error();
    assert!(check_locality(&est.distribution, tol).passes(), "tol {tol}");
    assert!(check_normalization(&est.distribution, 1e-12).passes());
}

#[test]
fn estimated_singlet_distribution_violates_bell_at_five_sigma() {
    let src = Source::Quantum {
        state: singlet(),
        settings: MeasurementSettings::chsh_optimal(),
    };
    let sim = run(&src, 0.5, 0.5, 500_000, 31);
    let est = empirical_to_distribution(&sim.log).unwrap();
    let e = common::correlators(est.distribution.as_array());
    let totals = sim.log.pair_totals();
    let se = e
        .iter()
        .zip(totals)
        .map(|(ei, n)| (1.0 - ei * ei) / n as f64)
        .sum::<f64>()
        .sqrt();
    let delta = common::chsh_sum(est.distribution.as_array());
    assert!(
        delta.abs() > 2.0 + 5.0 * se,
        "|Δ̂| = {} se {se}",
        delta.abs()
    );
    assert!((delta.abs() - 2.0 * SQRT_2).abs() <= 0.03 + 5.0 * se);
}

#[test]
fn single_run_log_estimates_are_degenerate() {
    let sim = run(&fair_coins(), 0.0, 0.0, 1, 3);
    let f = sim.log.block_frequencies(SettingPair::S2S2p).unwrap();
    assert_eq!(f.iter().filter(|&&v| v == 1.0).count(), 1);
    assert!(matches!(
        empirical_to_distribution(&sim.log),
        Err(SimulationError::EmptyBucket(_))
    ));
}

#[test]
fn seed_determinism_is_bit_exact() {
    let src = Source::Distribution(canonical_set(CanonicalSet::Second));
    let a = run(&src, 0.4, 0.7, 30_000, 123);
    let b = run(&src, 0.4, 0.7, 30_000, 123);
    assert_eq!(a, b);
    assert_eq!(
        a.empirical.payoffs.alice.to_bits(),
        b.empirical.payoffs.alice.to_bits()
    );
    let c = run(&src, 0.4, 0.7, 30_000, 124);
    assert_ne!(a.log.counts, c.log.counts);
    // A prefix of runs is unaffected by how many runs follow.
    let short = simulate_runs(
        &src,
        &matching_pennies(),
        &SimulationConfig {
            profile: StrategyProfile::new(0.4, 0.7).unwrap(),
            runs: 100,
            seed: 123,
            record_runs: true,
        },
    )
    .unwrap();
    let long = simulate_runs(
        &src,
        &matching_pennies(),
        &SimulationConfig {
            profile: StrategyProfile::new(0.4, 0.7).unwrap(),
            runs: 1000,
            seed: 123,
            record_runs: true,
        },
    )
    .unwrap();
    assert_eq!(
        short.log.records.unwrap()[..],
        long.log.records.unwrap()[..100]
    );
}

#[test]
fn frequencies_converge_at_root_n() {
    let src = Source::Coins(CoinParams::new(0.3, 0.7, 0.6, 0.4).unwrap());
    let p = *src.distribution().unwrap().as_array();
    let seeds = 0..8u64;
    let mut mean_err = Vec::new();
    for k in 0..4 {
        let n = 4u64.pow(k) * 1000;
        let mut total = 0.0;
        for seed in seeds.clone() {
            let sim = run(&src, 0.5, 0.5, n, seed);
            let est = empirical_to_distribution(&sim.log).unwrap();
            for (i, (ph, pi)) in est.distribution.as_array().iter().zip(p).enumerate() {
                let npair = sim.log.pair_total(SettingPair::ALL[i / 4]) as f64;
                let se = common::binomial_se(pi, npair);
                // 16 cells × 8 seeds × 4 sizes: 4.5σ keeps the family-wise
                // false-alarm rate well under 1%.
                assert!((ph - pi).abs() <= 4.5 * se, "n={n} seed={seed} p{}", i + 1);
            }
            total += est
                .distribution
                .as_array()
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        }
        mean_err.push(total / seeds.clone().count() as f64);
    }
    // Each fourfold increase in n should halve the error.
    for w in mean_err.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.2..=3.5).contains(&ratio), "errors {mean_err:?}");
    }
    let overall = mean_err[0] / mean_err[3];
    assert!((4.0..=16.0).contains(&overall), "errors {mean_err:?}");
}

#[test]
fn run_log_round_trips_through_jsonl() {
    let src = Source::Quantum {
        state: singlet(),
        settings: MeasurementSettings::new(0.1, 0.9, 0.4, -0.5),
    };
    let config = SimulationConfig {
        profile: StrategyProfile::new(0.5, 0.3).unwrap(),
        runs: 2_000,
        seed: 8,
        record_runs: true,
    };
    let sim = simulate_runs(&src, &matching_pennies(), &config).unwrap();
    let mut buf = Vec::new();
    write_run_log(&mut buf, &sim).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().count(), 2_001);
    let schema = common::validator("run-log-line.schema.json");
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(schema.is_valid(&v), "{line}");
    }
    let back = read_run_log(BufReader::new(&buf[..])).unwrap();
    assert_eq!(back, sim.log);
}
