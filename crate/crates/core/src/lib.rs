//! Two-player 2×2 games played with the sixteen joint outcome probabilities
//! of an EPR-Bohm experiment.
//!
//! Players choose between two measurement settings; a referee samples an
//! outcome pair from the joint distribution and pays each player according
//! to the game matrix. Classical (factorizable) distributions recover the
//! classical game, while Bell-violating ones can shift its Nash equilibria.
//!
//! - [`probability`]: the distribution, its constraints, CHSH.
//! - [`game`]: payoff tables, expected payoffs, equilibrium classification.
//! - [`nash`]: exact equilibrium sets of 2×2 bimatrix games.
//! - [`quantum`]: distributions realized by two-qubit states.
//! - [`simulator`]: seeded Monte Carlo of the referee protocol.
//! - [`formats`]: JSON document formats.
//!
//! ```
//! use epr_game::game::{cell_payoffs, matching_pennies};
//! use epr_game::nash::find_nash;
//! use epr_game::probability::{canonical_set, chsh, CanonicalSet};
//!
//! let d = canonical_set(CanonicalSet::First);
//! assert!((chsh(&d).unwrap().delta - 2.0 * 2f64.sqrt()).abs() < 1e-12);
//!
//! let table = cell_payoffs(&matching_pennies(), &d).unwrap();
//! let report = find_nash(&table).unwrap();
//! assert!(report.contains(1.0, 0.0) && report.contains(1.0, 1.0));
//! ```

pub mod cli;
pub mod formats;
pub mod game;
pub mod nash;
pub mod probability;
pub mod quantum;
pub mod reproduce;
pub mod simulator;

pub use game::{GameMatrix, PayoffTable, Payoffs, StrategyProfile};
pub use nash::{find_nash, NashComponent, NashReport};
pub use probability::{CanonicalSet, CoinParams, JointDistribution, SettingPair};
