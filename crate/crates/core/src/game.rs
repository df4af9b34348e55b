//! Payoff structures built by the referee from a 2×2 game matrix and a
//! joint distribution, plus the Bell-based classification of equilibria.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::probability::{
    check_embedding, chsh, JointDistribution, ModelError, SettingPair, IDENTITY_TOL, PROB_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("payoff entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("strategy probability {name} = {value} lies outside [0, 1]")]
    InvalidProfile { name: &'static str, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("embedding constraints violated (max residual {max_residual:e})")]
    EmbeddingViolated { max_residual: f64 },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// Cell payoffs `((a1,b1),(a2,b2);(a3,b3),(a4,b4))` for
/// `(H,H), (H,T), (T,H), (T,T)`; Alice plays rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameMatrix {
    cells: [(f64, f64); 4],
}

impl GameMatrix {
    pub fn new(cells: [(f64, f64); 4]) -> Result<Self, GameError> {
        for (i, (a, b)) in cells.iter().enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(GameError::NonFinite { index: i + 1 });
            }
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[(f64, f64); 4] {
        &self.cells
    }

    /// Entry at 1-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> (f64, f64) {
        self.cells[2 * (row - 1) + (col - 1)]
    }

    pub fn is_zero_sum(&self) -> bool {
        self.cells.iter().all(|(a, b)| a + b == 0.0)
    }
}

/// `((+1,−1),(−1,+1);(−1,+1),(+1,−1))`
pub fn matching_pennies() -> GameMatrix {
    GameMatrix {
        cells: [(1.0, -1.0), (-1.0, 1.0), (-1.0, 1.0), (1.0, -1.0)],
    }
}

/// Alice's and Bob's payoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Payoffs {
    pub alice: f64,
    pub bob: f64,
}

/// Per-setting-pair payoffs `Π_{A,B}(S_i, S_j')`, in [`SettingPair::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    pub alice: [f64; 4],
    pub bob: [f64; 4],
}

impl PayoffTable {
    pub fn get(&self, pair: SettingPair) -> Payoffs {
        Payoffs {
            alice: self.alice[pair.index()],
            bob: self.bob[pair.index()],
        }
    }

    /// Cells sum to zero within `tol`.
    pub fn is_zero_sum(&self, tol: f64) -> bool {
        self.alice
            .iter()
            .zip(&self.bob)
            .all(|(a, b)| (a + b).abs() <= tol * (1.0 + a.abs()))
    }

    /// Largest absolute cell payoff (at least 1), used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.alice
            .iter()
            .chain(&self.bob)
            .fold(1.0, |m: f64, v| m.max(v.abs()))
    }
}

/// Referee's per-pair payoffs: the game matrix weighted by the outcome
/// probabilities of each block.
pub fn cell_payoffs(matrix: &GameMatrix, d: &JointDistribution) -> Result<PayoffTable, GameError> {
    d.require_normalized(PROB_TOL)?;
    let mut alice = [0.0; 4];
    let mut bob = [0.0; 4];
    for pair in SettingPair::ALL {
        let block = d.block(pair);
        let i = pair.index();
        for ((a, b), p) in matrix.cells.iter().zip(block) {
            alice[i] += a * p;
            bob[i] += b * p;
        }
    }
    Ok(PayoffTable { alice, bob })
}

/// Probability `x` that Alice chooses S1 and `y` that Bob chooses S1'.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub x: f64,
    pub y: f64,
}

impl StrategyProfile {
    pub fn new(x: f64, y: f64) -> Result<Self, GameError> {
        for (name, value) in [("x", x), ("y", y)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GameError::InvalidProfile { name, value });
            }
        }
        Ok(Self { x, y })
    }

    /// Probability of each setting pair under independent choices.
    pub fn pair_weights(&self) -> [f64; 4] {
        let (x, y) = (self.x, self.y);
        [x * y, x * (1.0 - y), (1.0 - x) * y, (1.0 - x) * (1.0 - y)]
    }
}

pub(crate) fn bilinear(cells: &[f64; 4], x: f64, y: f64) -> f64 {
    let [c11, c12, c21, c22] = *cells;
    x * (y * c11 + (1.0 - y) * c12) + (1.0 - x) * (y * c21 + (1.0 - y) * c22)
}

pub fn expected_payoffs(table: &PayoffTable, profile: &StrategyProfile) -> Payoffs {
    Payoffs {
        alice: bilinear(&table.alice, profile.x, profile.y),
        bob: bilinear(&table.bob, profile.x, profile.y),
    }
}

/// Whether the distribution behind an equilibrium violates the CHSH bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumClass {
    /// `|Δ_r| ≤ 1`
    Pseudoclassical,
    /// `|Δ_r| > 1`
    BonaFideQuantum,
    /// No generating distribution attached.
    NotApplicable,
}

impl fmt::Display for EquilibriumClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pseudoclassical => "pseudoclassical",
            Self::BonaFideQuantum => "bona fide quantum",
            Self::NotApplicable => "n/a",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub class: EquilibriumClass,
    /// `Δ_r = p1 + p4 + 3p5 − p8 + 2p9 + 2p14 − 2`
    pub delta_r: Option<f64>,
}

impl Classification {
    pub fn not_applicable() -> Self {
        Self {
            class: EquilibriumClass::NotApplicable,
            delta_r: None,
        }
    }
}

/// `Δ_r` without precondition checks.
pub fn delta_r(d: &JointDistribution) -> f64 {
    d.p(1) + d.p(4) + 3.0 * d.p(5) - d.p(8) + 2.0 * d.p(9) + 2.0 * d.p(14) - 2.0
}

/// Classifies the distribution behind an equilibrium of the embedded game.
///
/// Under the embedding constraints the CHSH sum reduces to `Δ = 2Δ_r`, so
/// the Bell bound `|Δ| ≤ 2` becomes `|Δ_r| ≤ 1`. The identity is checked.
pub fn classify_equilibrium(d: &JointDistribution) -> Result<Classification, GameError> {
    require_embedded(d)?;
    let dr = delta_r(d);
    let delta = chsh(d)?.delta;
    if (delta - 2.0 * dr).abs() > IDENTITY_TOL.max(4.0 * PROB_TOL) {
        return Err(GameError::Internal(format!(
            "CHSH sum {delta} differs from 2·Δ_r = {}",
            2.0 * dr
        )));
    }
    let class = if dr.abs() > 1.0 + PROB_TOL {
        EquilibriumClass::BonaFideQuantum
    } else {
        EquilibriumClass::Pseudoclassical
    };
    Ok(Classification {
        class,
        delta_r: Some(dr),
    })
}

fn require_embedded(d: &JointDistribution) -> Result<(), GameError> {
    d.require_local(PROB_TOL)?;
    let e = check_embedding(d, PROB_TOL);
    if !e.passes() {
        return Err(GameError::EmbeddingViolated {
            max_residual: e.constraints.max_residual(),
        });
    }
    Ok(())
}

/// The matching-pennies NE brackets written in the six free probabilities
/// p1, p4, p5, p8, p9, p14.
///
/// Alice: `2[y·C + alice_offset](x* − x) ≥ 0`;
/// Bob: `−2[x·C + bob_offset](y* − y) ≥ 0`, with
/// `C = (1+p1+p4+p8) − (3p5+2p9+2p14)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuFormCoefficients {
    pub common: f64,
    pub alice_offset: f64,
    pub bob_offset: f64,
}

impl MuFormCoefficients {
    /// `(slope, intercept)` of Alice's bracket in `y`.
    pub fn alice_line(&self) -> (f64, f64) {
        (2.0 * self.common, 2.0 * self.alice_offset)
    }

    /// `(slope, intercept)` of Bob's bracket in `x`.
    pub fn bob_line(&self) -> (f64, f64) {
        (-2.0 * self.common, -2.0 * self.bob_offset)
    }
}

/// Computes the reduced NE coefficients for the matching-pennies game and
/// checks them against the brackets derived from the full payoff table.
pub fn nash_from_mu_form(d: &JointDistribution) -> Result<MuFormCoefficients, GameError> {
    require_embedded(d)?;
    let p = |i| d.p(i);
    let coeffs = MuFormCoefficients {
        common: (1.0 + p(1) + p(4) + p(8)) - (3.0 * p(5) + 2.0 * p(9) + 2.0 * p(14)),
        alice_offset: 2.0 * (p(5) + p(14)) - 1.0,
        bob_offset: 2.0 * (p(5) - p(8) + p(9) + p(14)) - 1.0,
    };
    let table = cell_payoffs(&matching_pennies(), d)?;
    let lines = crate::nash::best_response_lines(&table);
    // The reduction uses the embedding constraints, so agreement is only as
    // good as their residuals.
    let tol = 16.0 * PROB_TOL;
    let pairs = [
        (coeffs.alice_line().0, lines.alice.slope),
        (coeffs.alice_line().1, lines.alice.intercept),
        (coeffs.bob_line().0, lines.bob.slope),
        (coeffs.bob_line().1, lines.bob.intercept),
    ];
    if pairs.iter().any(|(a, b)| (a - b).abs() > tol) {
        return Err(GameError::Internal(format!(
            "reduced coefficients {pairs:?} disagree with the payoff-table brackets"
        )));
    }
    Ok(coeffs)
}
