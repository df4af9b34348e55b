//! The sixteen joint probabilities of a two-party, two-setting, two-outcome
//! experiment, and the constraint algebra over them.
//!
//! Layout of [`JointDistribution`] (1-based indices, as used throughout the
//! crate and in the `epr-joint-v1` JSON document):
//!
//! ```text
//!              Bob S1'        Bob S2'
//!             +1    -1       +1    -1
//! Alice S1 +1  p1    p2       p5    p6
//!          -1  p3    p4       p7    p8
//! Alice S2 +1  p9    p10      p13   p14
//!          -1  p11   p12      p15   p16
//! ```
//!
//! Each setting pair owns a contiguous block of four entries, with outcome
//! order `(+1,+1), (+1,-1), (-1,+1), (-1,-1)`:
//! `(S1,S1')` → p1..p4, `(S1,S2')` → p5..p8, `(S2,S1')` → p9..p12,
//! `(S2,S2')` → p13..p16.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for range and constraint validation of external inputs.
pub const PROB_TOL: f64 = 1e-9;
/// Tolerance for identities that hold algebraically on generated data.
pub const IDENTITY_TOL: f64 = 1e-12;

/// 1-based indices of the independent set μ.
pub const MU_INDICES: [usize; 8] = [1, 4, 5, 8, 9, 12, 14, 15];
/// 1-based indices of the dependent set υ.
pub const UPSILON_INDICES: [usize; 8] = [2, 3, 6, 7, 10, 11, 13, 16];

/// Coefficients of μ (in [`MU_INDICES`] order) for each dependent
/// probability: `p_k = (1 + Σ c_j μ_j) / 2`.
const DEPENDENT_COEFFS: [[f64; 8]; 8] = [
    [-1., -1., 1., -1., -1., 1., 1., -1.], // p2
    [-1., -1., -1., 1., 1., -1., -1., 1.], // p3
    [1., -1., -1., -1., -1., 1., 1., -1.], // p6
    [-1., 1., -1., -1., 1., -1., -1., 1.], // p7
    [-1., 1., 1., -1., -1., -1., 1., -1.], // p10
    [1., -1., -1., 1., -1., -1., -1., 1.], // p11
    [-1., 1., 1., -1., 1., -1., -1., -1.], // p13
    [1., -1., -1., 1., -1., 1., -1., -1.], // p16
];

/// The eight no-signaling equalities, as pairs of 1-based index sums.
const LOCALITY_EQUALITIES: [([usize; 2], [usize; 2]); 8] = [
    ([1, 2], [5, 6]),
    ([1, 3], [9, 11]),
    ([9, 10], [13, 14]),
    ([5, 7], [13, 15]),
    ([3, 4], [7, 8]),
    ([11, 12], [15, 16]),
    ([2, 4], [10, 12]),
    ([6, 8], [14, 16]),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("p{index} is not a finite number")]
    NonFinite { index: usize },
    #[error("p{index} = {value} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("coin probability {name} = {value} lies outside [0, 1]")]
    InvalidCoin { name: &'static str, value: f64 },
    #[error("octet entry {index} = {value} lies outside [0, 1]")]
    InvalidOctet { index: usize, value: f64 },
    #[error("inadmissible octet: dependent probabilities out of range: {}", fmt_violations(.violations))]
    Inadmissible { violations: Vec<(usize, f64)> },
    #[error("precondition failed: {constraint} violated (max residual {max_residual:e}, tolerance {tolerance:e})")]
    Precondition {
        constraint: &'static str,
        max_residual: f64,
        tolerance: f64,
    },
}

fn fmt_violations(v: &[(usize, f64)]) -> String {
    v.iter()
        .map(|(i, x)| format!("p{i}={x}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// One of the four setting pairs chosen by the players in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SettingPair {
    S1S1p,
    S1S2p,
    S2S1p,
    S2S2p,
}

impl SettingPair {
    pub const ALL: [SettingPair; 4] = [Self::S1S1p, Self::S1S2p, Self::S2S1p, Self::S2S2p];

    /// Block position, 0..4.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Pair chosen when Alice picks S1 (`alice_first`) or S2, and Bob S1' or S2'.
    pub fn from_choices(alice_first: bool, bob_first: bool) -> Self {
        match (alice_first, bob_first) {
            (true, true) => Self::S1S1p,
            (true, false) => Self::S1S2p,
            (false, true) => Self::S2S1p,
            (false, false) => Self::S2S2p,
        }
    }

    pub fn alice_first(self) -> bool {
        matches!(self, Self::S1S1p | Self::S1S2p)
    }

    pub fn bob_first(self) -> bool {
        matches!(self, Self::S1S1p | Self::S2S1p)
    }

    /// Wire token used by the run-log format.
    pub fn token(self) -> &'static str {
        match self {
            Self::S1S1p => "S1S1p",
            Self::S1S2p => "S1S2p",
            Self::S2S1p => "S2S1p",
            Self::S2S2p => "S2S2p",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.token() == token)
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::S1S1p => "(S1,S1')",
            Self::S1S2p => "(S1,S2')",
            Self::S2S1p => "(S2,S1')",
            Self::S2S2p => "(S2,S2')",
        })
    }
}

/// Outcome pairs `(a, b)` in block order.
pub const OUTCOME_ORDER: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Position of an outcome pair within its block.
pub fn outcome_offset(a: i8, b: i8) -> usize {
    match (a > 0, b > 0) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

/// Human-readable labels in vector order, e.g. `"S1S2p:+-"`.
pub fn entry_labels() -> Vec<String> {
    SettingPair::ALL
        .iter()
        .flat_map(|pair| {
            OUTCOME_ORDER.iter().map(move |&(a, b)| {
                let sign = |v: i8| if v > 0 { '+' } else { '-' };
                format!("{}:{}{}", pair.token(), sign(a), sign(b))
            })
        })
        .collect()
}

/// The sixteen joint probabilities p1..p16.
///
/// Construction only checks that every entry is a probability (within
/// [`PROB_TOL`]). Normalization and locality are not enforced, so that
/// violating inputs can still be reported on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    p: [f64; 16],
}

impl JointDistribution {
    pub fn new(p: [f64; 16]) -> Result<Self, ModelError> {
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() {
                return Err(ModelError::NonFinite { index: i + 1 });
            }
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&v) {
                return Err(ModelError::OutOfRange {
                    index: i + 1,
                    value: v,
                });
            }
        }
        Ok(Self { p })
    }

    /// Like [`JointDistribution::new`], additionally requiring every block
    /// to sum to one within `tol`.
    pub fn validated(p: [f64; 16], tol: f64) -> Result<Self, ModelError> {
        let d = Self::new(p)?;
        d.require_normalized(tol)?;
        Ok(d)
    }

    pub fn uniform() -> Self {
        Self { p: [0.25; 16] }
    }

    /// Entry `p{index}`, with `index` in `1..=16`.
    pub fn p(&self, index: usize) -> f64 {
        self.p[index - 1]
    }

    pub fn as_array(&self) -> &[f64; 16] {
        &self.p
    }

    pub fn block(&self, pair: SettingPair) -> [f64; 4] {
        let o = 4 * pair.index();
        [self.p[o], self.p[o + 1], self.p[o + 2], self.p[o + 3]]
    }

    pub fn get(&self, pair: SettingPair, a: i8, b: i8) -> f64 {
        self.p[4 * pair.index() + outcome_offset(a, b)]
    }

    /// The independent set μ in [`MU_INDICES`] order.
    pub fn mu(&self) -> [f64; 8] {
        MU_INDICES.map(|i| self.p(i))
    }

    /// The correlator `<A B>` for one setting pair.
    pub fn correlator(&self, pair: SettingPair) -> f64 {
        let [pp, pm, mp, mm] = self.block(pair);
        pp - pm - mp + mm
    }

    /// Probability that Alice obtains +1 under the given pair.
    pub fn alice_plus(&self, pair: SettingPair) -> f64 {
        let [pp, pm, _, _] = self.block(pair);
        pp + pm
    }

    /// Probability that Bob obtains +1 under the given pair.
    pub fn bob_plus(&self, pair: SettingPair) -> f64 {
        let [pp, _, mp, _] = self.block(pair);
        pp + mp
    }

    pub(crate) fn require_normalized(&self, tol: f64) -> Result<(), ModelError> {
        check_normalization(self, tol).require("normalization")
    }

    pub(crate) fn require_local(&self, tol: f64) -> Result<(), ModelError> {
        self.require_normalized(tol)?;
        check_locality(self, tol).require("locality")
    }
}

/// Head probabilities of the four coins S1, S2, S1', S2'.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinParams {
    pub r: f64,
    pub s: f64,
    pub r_prime: f64,
    pub s_prime: f64,
}

impl CoinParams {
    pub fn new(r: f64, s: f64, r_prime: f64, s_prime: f64) -> Result<Self, ModelError> {
        for (name, value) in [("r", r), ("s", s), ("r'", r_prime), ("s'", s_prime)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::InvalidCoin { name, value });
            }
        }
        Ok(Self {
            r,
            s,
            r_prime,
            s_prime,
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r, self.s, self.r_prime, self.s_prime]
    }
}

/// Factorizable distribution of four independent biased coins.
pub fn from_coins(c: &CoinParams) -> JointDistribution {
    let alice = [c.r, c.s];
    let bob = [c.r_prime, c.s_prime];
    let mut p = [0.0; 16];
    for pair in SettingPair::ALL {
        let ha = alice[usize::from(!pair.alice_first())];
        let hb = bob[usize::from(!pair.bob_first())];
        let o = 4 * pair.index();
        p[o] = ha * hb;
        p[o + 1] = ha * (1.0 - hb);
        p[o + 2] = (1.0 - ha) * hb;
        p[o + 3] = (1.0 - ha) * (1.0 - hb);
    }
    JointDistribution { p }
}

/// A single labelled residual within a [`ConstraintReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub label: String,
    pub residual: f64,
}

/// Residuals of a family of equality constraints against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub tolerance: f64,
    pub checks: Vec<ConstraintCheck>,
}

impl ConstraintReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.residual <= self.tolerance)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn failing(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| c.residual > self.tolerance)
    }

    fn require(&self, constraint: &'static str) -> Result<(), ModelError> {
        if self.passes() {
            Ok(())
        } else {
            Err(ModelError::Precondition {
                constraint,
                max_residual: self.max_residual(),
                tolerance: self.tolerance,
            })
        }
    }
}

/// `|Σ block − 1|` for each of the four setting pairs.
pub fn check_normalization(d: &JointDistribution, tol: f64) -> ConstraintReport {
    let checks = SettingPair::ALL
        .iter()
        .map(|&pair| {
            let o = 4 * pair.index() + 1;
            ConstraintCheck {
                label: format!("p{}+p{}+p{}+p{}=1", o, o + 1, o + 2, o + 3),
                residual: (d.block(pair).iter().sum::<f64>() - 1.0).abs(),
            }
        })
        .collect();
    ConstraintReport {
        tolerance: tol,
        checks,
    }
}

/// Residuals of the eight no-signaling equalities.
pub fn check_locality(d: &JointDistribution, tol: f64) -> ConstraintReport {
    let checks = LOCALITY_EQUALITIES
        .iter()
        .map(|&([a, b], [c, e])| ConstraintCheck {
            label: format!("p{a}+p{b}=p{c}+p{e}"),
            residual: ((d.p(a) + d.p(b)) - (d.p(c) + d.p(e))).abs(),
        })
        .collect();
    ConstraintReport {
        tolerance: tol,
        checks,
    }
}

/// Outcome of [`try_factorize`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Factorization {
    /// Marginal coin probabilities, present iff the reconstruction matched.
    pub coins: Option<CoinParams>,
    /// Candidate coins extracted from the marginals, whether or not they fit.
    pub candidate: [f64; 4],
    /// `|p_i − reconstructed_i|` for i = 1..16.
    pub residuals: [f64; 16],
    pub tolerance: f64,
}

impl Factorization {
    pub fn is_factorizable(&self) -> bool {
        self.coins.is_some()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Extracts `r = p1+p2, s = p9+p10, r' = p1+p3, s' = p5+p7` and checks
/// whether their products reproduce every entry.
pub fn try_factorize(d: &JointDistribution, tol: f64) -> Result<Factorization, ModelError> {
    d.require_local(tol)?;
    let clamp = |v: f64| v.clamp(0.0, 1.0);
    let candidate = [
        clamp(d.p(1) + d.p(2)),
        clamp(d.p(9) + d.p(10)),
        clamp(d.p(1) + d.p(3)),
        clamp(d.p(5) + d.p(7)),
    ];
    let coins = CoinParams::new(candidate[0], candidate[1], candidate[2], candidate[3])?;
    let rebuilt = from_coins(&coins);
    let mut residuals = [0.0; 16];
    for (i, r) in residuals.iter_mut().enumerate() {
        *r = (d.p[i] - rebuilt.p[i]).abs();
    }
    let fits = residuals.iter().all(|&r| r <= tol);
    Ok(Factorization {
        coins: fits.then_some(coins),
        candidate,
        residuals,
        tolerance: tol,
    })
}

/// The eight independent probabilities p1, p4, p5, p8, p9, p12, p14, p15.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependentOctet {
    mu: [f64; 8],
}

impl IndependentOctet {
    pub fn new(mu: [f64; 8]) -> Result<Self, ModelError> {
        for (k, &v) in mu.iter().enumerate() {
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&v) {
                return Err(ModelError::InvalidOctet {
                    index: MU_INDICES[k],
                    value: v,
                });
            }
        }
        Ok(Self { mu })
    }

    pub fn values(&self) -> &[f64; 8] {
        &self.mu
    }
}

impl From<&JointDistribution> for IndependentOctet {
    fn from(d: &JointDistribution) -> Self {
        Self { mu: d.mu() }
    }
}

/// Completes a distribution from its independent octet using the affine
/// solution of the normalization + locality system.
///
/// Dependent values within `PROB_TOL` below zero (or above one) are clamped;
/// anything further out makes the octet inadmissible.
pub fn complete_from_independent(
    octet: &IndependentOctet,
) -> Result<JointDistribution, ModelError> {
    let mu = octet.mu;
    let mut p = [0.0; 16];
    for (&i, &v) in MU_INDICES.iter().zip(mu.iter()) {
        p[i - 1] = v;
    }
    let mut violations = Vec::new();
    for (&k, coeffs) in UPSILON_INDICES.iter().zip(DEPENDENT_COEFFS.iter()) {
        let acc = coeffs
            .iter()
            .zip(mu.iter())
            .fold(1.0, |acc, (c, m)| acc + c * m);
        let v = acc / 2.0;
        if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&v) {
            violations.push((k, v));
        }
        p[k - 1] = v.clamp(0.0, 1.0);
    }
    if !violations.is_empty() {
        return Err(ModelError::Inadmissible { violations });
    }
    Ok(JointDistribution { p })
}

/// Which side of the Bell and Cirel'son bounds a CHSH value lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellRegime {
    /// `|Δ| ≤ 2`
    BellSatisfying,
    /// `2 < |Δ| ≤ 2√2`
    BellViolating,
    /// `|Δ| > 2√2`
    SuperQuantum,
}

impl BellRegime {
    pub fn of(delta: f64) -> Self {
        let m = delta.abs();
        if m <= 2.0 + PROB_TOL {
            Self::BellSatisfying
        } else if m <= 2.0 * SQRT_2 + PROB_TOL {
            Self::BellViolating
        } else {
            Self::SuperQuantum
        }
    }
}

impl fmt::Display for BellRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BellSatisfying => "Bell-satisfying",
            Self::BellViolating => "Bell-violating",
            Self::SuperQuantum => "super-quantum",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshReport {
    /// `<S1S1'>, <S1S2'>, <S2S1'>, <S2S2'>`
    pub correlators: [f64; 4],
    pub delta: f64,
    pub regime: BellRegime,
}

/// Correlators and CHSH sum `Δ = <S1S1'> + <S1S2'> + <S2S1'> − <S2S2'>`.
pub fn chsh(d: &JointDistribution) -> Result<ChshReport, ModelError> {
    d.require_normalized(PROB_TOL)?;
    let correlators = SettingPair::ALL.map(|pair| d.correlator(pair));
    let delta = correlators[0] + correlators[1] + correlators[2] - correlators[3];
    Ok(ChshReport {
        correlators,
        delta,
        regime: BellRegime::of(delta),
    })
}

/// `Δ = 2(p1+p4+p5+p8+p9+p12+p14+p15 − 2)`, valid under normalization and
/// locality.
pub fn delta_mu(d: &JointDistribution) -> Result<f64, ModelError> {
    d.require_local(PROB_TOL)?;
    Ok(2.0 * (d.mu().iter().sum::<f64>() - 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    /// `p1+p3+p5+p7 = 1` and `p1+p2+p9+p10 = 1`.
    pub constraints: ConstraintReport,
    /// `p9+p15 = p12+p14` and `p5+p14 = p8+p15`; only meaningful (and only
    /// present) when locality holds.
    pub reduced: Option<ConstraintReport>,
}

impl EmbeddingReport {
    pub fn passes(&self) -> bool {
        self.constraints.passes()
    }
}

/// Constraints that make the classical game reappear when the
/// distribution factorizes (`r + s = 1`, `r' + s' = 1` in coin form).
pub fn check_embedding(d: &JointDistribution, tol: f64) -> EmbeddingReport {
    let constraints = ConstraintReport {
        tolerance: tol,
        checks: vec![
            ConstraintCheck {
                label: "p1+p3+p5+p7=1".into(),
                residual: (d.p(1) + d.p(3) + d.p(5) + d.p(7) - 1.0).abs(),
            },
            ConstraintCheck {
                label: "p1+p2+p9+p10=1".into(),
                residual: (d.p(1) + d.p(2) + d.p(9) + d.p(10) - 1.0).abs(),
            },
        ],
    };
    let local = check_normalization(d, tol).passes() && check_locality(d, tol).passes();
    let reduced = local.then(|| ConstraintReport {
        tolerance: tol,
        checks: vec![
            ConstraintCheck {
                label: "p9+p15=p12+p14".into(),
                residual: ((d.p(9) + d.p(15)) - (d.p(12) + d.p(14))).abs(),
            },
            ConstraintCheck {
                label: "p5+p14=p8+p15".into(),
                residual: ((d.p(5) + d.p(14)) - (d.p(8) + d.p(15))).abs(),
            },
        ],
    });
    EmbeddingReport {
        constraints,
        reduced,
    }
}

/// Named distributions: the two maximal CHSH violators and the uniform one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CanonicalSet {
    First,
    Second,
    Uniform,
}

impl std::str::FromStr for CanonicalSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" => Ok(Self::First),
            "second" => Ok(Self::Second),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!(
                "unknown canonical set `{other}` (expected first|second|uniform)"
            )),
        }
    }
}

/// `(2+√2)/8`
pub const HIGH: f64 = (2.0 + SQRT_2) / 8.0;
/// `(2−√2)/8`
pub const LOW: f64 = (2.0 - SQRT_2) / 8.0;

pub fn canonical_set(which: CanonicalSet) -> JointDistribution {
    let (mu, upsilon) = match which {
        CanonicalSet::First => (HIGH, LOW),
        CanonicalSet::Second => (LOW, HIGH),
        CanonicalSet::Uniform => (0.25, 0.25),
    };
    let mut p = [0.0; 16];
    for i in MU_INDICES {
        p[i - 1] = mu;
    }
    for i in UPSILON_INDICES {
        p[i - 1] = upsilon;
    }
    JointDistribution { p }
}
