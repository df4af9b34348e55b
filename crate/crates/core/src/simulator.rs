//! Seeded Monte Carlo of the referee protocol: per run, each player picks a
//! setting, the referee samples an outcome pair for that setting pair, and
//! the outcomes are tallied.
//!
//! Run `k` draws from its own ChaCha8 stream: the generator is seeded with
//! the user seed and switched to stream `k`. Runs are independent of
//! batching, so the parallel tally is bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::game::{GameError, GameMatrix, Payoffs, StrategyProfile};
use crate::probability::{
    from_coins, CoinParams, JointDistribution, ModelError, SettingPair, OUTCOME_ORDER,
};
use crate::quantum::{quantum_joint_distribution, BipartiteState, MeasurementSettings, StateError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("number of runs must be at least 1")]
    NoRuns,
    #[error("setting pair {0} was never chosen")]
    EmptyBucket(SettingPair),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Where the outcome statistics come from.
#[derive(Debug, Clone)]
pub enum Source {
    Coins(CoinParams),
    Quantum {
        state: BipartiteState,
        settings: MeasurementSettings,
    },
    Distribution(JointDistribution),
}

impl Source {
    pub fn distribution(&self) -> Result<JointDistribution, SimulationError> {
        Ok(match self {
            Self::Coins(c) => from_coins(c),
            Self::Quantum { state, settings } => quantum_joint_distribution(state, settings)?,
            Self::Distribution(d) => *d,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub run: u64,
    pub pair: SettingPair,
    pub a: i8,
    pub b: i8,
}

/// The referee's tally.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunLog {
    pub seed: u64,
    pub runs: u64,
    /// Outcome counts in distribution order (p1..p16).
    pub counts: [u64; 16],
    /// Per-run records, when requested.
    #[serde(skip)]
    pub records: Option<Vec<RunRecord>>,
}

impl RunLog {
    pub fn pair_total(&self, pair: SettingPair) -> u64 {
        let o = 4 * pair.index();
        self.counts[o..o + 4].iter().sum()
    }

    pub fn pair_totals(&self) -> [u64; 4] {
        SettingPair::ALL.map(|p| self.pair_total(p))
    }

    /// Per-pair outcome frequencies; `None` for pairs never chosen.
    pub fn block_frequencies(&self, pair: SettingPair) -> Option<[f64; 4]> {
        let n = self.pair_total(pair);
        (n > 0).then(|| {
            let o = 4 * pair.index();
            std::array::from_fn(|k| self.counts[o + k] as f64 / n as f64)
        })
    }

    /// `count_i / runs`: the joint frequency of (setting pair, outcome).
    pub fn overall_frequencies(&self) -> [f64; 16] {
        self.counts.map(|c| c as f64 / self.runs as f64)
    }
}

/// Empirical payoffs; `partial` is set when some setting pair was never
/// visited and the payoff only averages over visited pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalPayoffs {
    pub payoffs: Payoffs,
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub log: RunLog,
    pub profile: StrategyProfile,
    pub empirical: EmpiricalPayoffs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub profile: StrategyProfile,
    pub runs: u64,
    pub seed: u64,
    pub record_runs: bool,
}

fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

fn draw_run(
    d: &JointDistribution,
    profile: &StrategyProfile,
    seed: u64,
    run: u64,
) -> (usize, RunRecord) {
    let mut rng = run_rng(seed, run);
    let alice_first = rng.random::<f64>() < profile.x;
    let bob_first = rng.random::<f64>() < profile.y;
    let pair = SettingPair::from_choices(alice_first, bob_first);
    let block = d.block(pair);
    let u = rng.random::<f64>() * block.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut k = 3;
    for (i, p) in block.iter().enumerate() {
        acc += p;
        if u < acc {
            k = i;
            break;
        }
    }
    // Guard against landing on a zero-probability tail through rounding.
    while block[k] == 0.0 && k > 0 {
        k -= 1;
    }
    let (a, b) = OUTCOME_ORDER[k];
    (4 * pair.index() + k, RunRecord { run, pair, a, b })
}

/// Simulates `config.runs` rounds and scores them with `matrix`.
pub fn simulate_runs(
    source: &Source,
    matrix: &GameMatrix,
    config: &SimulationConfig,
) -> Result<Simulation, SimulationError> {
    if config.runs == 0 {
        return Err(SimulationError::NoRuns);
    }
    let d = source.distribution()?;
    d.require_normalized(crate::probability::PROB_TOL)?;
    let profile = config.profile;
    let (counts, records) = if config.record_runs {
        let records: Vec<(usize, RunRecord)> = (0..config.runs)
            .into_par_iter()
            .map(|k| draw_run(&d, &profile, config.seed, k))
            .collect();
        let mut counts = [0u64; 16];
        for (slot, _) in &records {
            counts[*slot] += 1;
        }
        (counts, Some(records.into_iter().map(|(_, r)| r).collect()))
    } else {
        let counts = (0..config.runs)
            .into_par_iter()
            .fold(
                || [0u64; 16],
                |mut acc, k| {
                    acc[draw_run(&d, &profile, config.seed, k).0] += 1;
                    acc
                },
            )
            .reduce(
                || [0u64; 16],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        (counts, None)
    };
    let log = RunLog {
        seed: config.seed,
        runs: config.runs,
        counts,
        records,
    };
    let empirical = empirical_payoffs(&log, matrix, &profile);
    Ok(Simulation {
        log,
        profile,
        empirical,
    })
}

/// Cell payoffs from the observed frequencies of each visited pair,
/// combined with the profile's pair weights.
pub fn empirical_payoffs(
    log: &RunLog,
    matrix: &GameMatrix,
    profile: &StrategyProfile,
) -> EmpiricalPayoffs {
    let weights = profile.pair_weights();
    let mut total_w = 0.0;
    let (mut alice, mut bob) = (0.0, 0.0);
    let mut partial = false;
    for pair in SettingPair::ALL {
        let Some(freq) = log.block_frequencies(pair) else {
            partial = true;
            continue;
        };
        let w = weights[pair.index()];
        let (mut ca, mut cb) = (0.0, 0.0);
        for ((a, b), f) in matrix.cells().iter().zip(freq) {
            ca += a * f;
            cb += b * f;
        }
        alice += w * ca;
        bob += w * cb;
        total_w += w;
    }
    if total_w > 0.0 {
        alice /= total_w;
        bob /= total_w;
    }
    EmpiricalPayoffs {
        payoffs: Payoffs { alice, bob },
        partial,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub distribution: JointDistribution,
    /// Binomial standard errors `√(p̂(1−p̂)/n_pair)`.
    pub std_errors: [f64; 16],
}

impl EmpiricalDistribution {
    pub fn max_std_error(&self) -> f64 {
        self.std_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Frequency estimate of the sixteen probabilities; every pair must have
/// been visited.
pub fn empirical_to_distribution(log: &RunLog) -> Result<EmpiricalDistribution, SimulationError> {
    let mut p = [0.0; 16];
    let mut se = [0.0; 16];
    for pair in SettingPair::ALL {
        let n = log.pair_total(pair);
        let freq = log
            .block_frequencies(pair)
            .ok_or(SimulationError::EmptyBucket(pair))?;
        let o = 4 * pair.index();
        for (k, f) in freq.into_iter().enumerate() {
            p[o + k] = f;
            se[o + k] = (f * (1.0 - f) / n as f64).sqrt();
        }
    }
    Ok(EmpiricalDistribution {
        distribution: JointDistribution::new(p)?,
        std_errors: se,
    })
}
