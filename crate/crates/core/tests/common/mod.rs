//! Reference oracles written from first principles. They deliberately avoid
//! the crate's formula tables so tests compare two independent derivations.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde_json::Value;

/// Setting pairs (Alice first?, Bob first?) in block order.
pub const PAIRS: [(bool, bool); 4] = [(true, true), (true, false), (false, true), (false, false)];
/// Outcome pairs in within-block order.
pub const OUTCOMES: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Products of independent coins: heads (+1) with the given probability.
pub fn coin_products(r: f64, s: f64, rp: f64, sp: f64) -> [f64; 16] {
    let mut p = [0.0; 16];
    for (b, &(af, bf)) in PAIRS.iter().enumerate() {
        let pa = if af { r } else { s };
        let pb = if bf { rp } else { sp };
        for (k, &(a, o)) in OUTCOMES.iter().enumerate() {
            let qa = if a > 0.0 { pa } else { 1.0 - pa };
            let qb = if o > 0.0 { pb } else { 1.0 - pb };
            p[4 * b + k] = qa * qb;
        }
    }
    p
}

/// Correlators `Σ a·b·p` per block, by brute-force summation.
pub fn correlators(p: &[f64; 16]) -> [f64; 4] {
    std::array::from_fn(|b| {
        (0..4)
            .map(|k| OUTCOMES[k].0 * OUTCOMES[k].1 * p[4 * b + k])
            .sum()
    })
}

/// `E11 + E12 + E21 − E22`.
pub fn chsh_sum(p: &[f64; 16]) -> f64 {
    let e = correlators(p);
    e[0] + e[1] + e[2] - e[3]
}

/// Marginal probability of `+1` for one party in block `b`.
fn marginal(p: &[f64; 16], b: usize, alice: bool) -> f64 {
    (0..4)
        .filter(|&k| {
            if alice {
                OUTCOMES[k].0 > 0.0
            } else {
                OUTCOMES[k].1 > 0.0
            }
        })
        .map(|k| p[4 * b + k])
        .sum()
}

/// Largest no-signaling violation: each party's marginals must not depend
/// on the other party's setting. `+1` marginals suffice once blocks are
/// normalized; `−1` marginals are added so the check stands on its own.
pub fn signaling(p: &[f64; 16]) -> f64 {
    let minus = |b: usize, alice: bool| {
        (0..4)
            .filter(|&k| {
                if alice {
                    OUTCOMES[k].0 < 0.0
                } else {
                    OUTCOMES[k].1 < 0.0
                }
            })
            .map(|k| p[4 * b + k])
            .sum::<f64>()
    };
    // Alice's setting fixed: blocks (0,1) and (2,3). Bob's fixed: (0,2) and (1,3).
    let mut worst = 0.0f64;
    for (u, v, alice) in [(0, 1, true), (2, 3, true), (0, 2, false), (1, 3, false)] {
        worst = worst.max((marginal(p, u, alice) - marginal(p, v, alice)).abs());
        worst = worst.max((minus(u, alice) - minus(v, alice)).abs());
    }
    worst
}

pub fn normalization_error(p: &[f64; 16]) -> f64 {
    (0..4)
        .map(|b| (p[4 * b..4 * b + 4].iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Solves normalization + no-signaling for the eight dependent entries
/// given the eight independent ones, by least squares on the full system.
pub fn complete_by_linear_solve(mu: [f64; 8]) -> [f64; 16] {
    const MU: [usize; 8] = [0, 3, 4, 7, 8, 11, 13, 14];
    const UP: [usize; 8] = [1, 2, 5, 6, 9, 10, 12, 15];
    // Rows: coefficient vector over p1..p16 and right-hand side.
    let mut rows: Vec<([f64; 16], f64)> = Vec::new();
    for b in 0..4 {
        let mut c = [0.0; 16];
        c[4 * b..4 * b + 4].fill(1.0);
        rows.push((c, 1.0));
    }
    for (u, v, alice) in [(0, 1, true), (2, 3, true), (0, 2, false), (1, 3, false)] {
        for sign in [1.0, -1.0] {
            let mut c = [0.0; 16];
            for k in 0..4 {
                let o = if alice { OUTCOMES[k].0 } else { OUTCOMES[k].1 };
                if o == sign {
                    c[4 * u + k] += 1.0;
                    c[4 * v + k] -= 1.0;
                }
            }
            rows.push((c, 0.0));
        }
    }
    let a = DMatrix::from_fn(rows.len(), 8, |i, j| rows[i].0[UP[j]]);
    let rhs = DVector::from_fn(rows.len(), |i, _| {
        rows[i].1
            - MU.iter()
                .zip(mu)
                .map(|(&k, m)| rows[i].0[k] * m)
                .sum::<f64>()
    });
    let sol = a.svd(true, true).solve(&rhs, 1e-12).expect("solvable");
    let mut p = [0.0; 16];
    for (j, &k) in MU.iter().enumerate() {
        p[k] = mu[j];
    }
    for (j, &k) in UP.iter().enumerate() {
        p[k] = sol[j];
    }
    p
}

/// Spin eigenvector along angle θ in the x–z plane: `+1` ↦ (cos θ/2, sin θ/2),
/// `−1` ↦ (−sin θ/2, cos θ/2).
fn eigvec(theta: f64, outcome: f64) -> [f64; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    if outcome > 0.0 {
        [c, s]
    } else {
        [-s, c]
    }
}

/// Outcome probabilities `|⟨e_a ⊗ e_b|ψ⟩|²` for a pure state with amplitudes
/// on |++⟩, |+−⟩, |−+⟩, |−−⟩; angles are (S1, S2, S1′, S2′).
pub fn pure_state_probs(psi: [Complex64; 4], angles: [f64; 4]) -> [f64; 16] {
    let mut p = [0.0; 16];
    for (b, &(af, bf)) in PAIRS.iter().enumerate() {
        let ta = if af { angles[0] } else { angles[1] };
        let tb = if bf { angles[2] } else { angles[3] };
        for (k, &(a, o)) in OUTCOMES.iter().enumerate() {
            let ea = eigvec(ta, a);
            let eb = eigvec(tb, o);
            let mut amp = Complex64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    amp += psi[2 * i + j] * (ea[i] * eb[j]);
                }
            }
            p[4 * b + k] = amp.norm_sqr();
        }
    }
    p
}

/// Singlet correlator `E(θa, θb) = −cos(θa − θb)`.
pub fn singlet_correlator(ta: f64, tb: f64) -> f64 {
    -(ta - tb).cos()
}

pub fn singlet_amplitudes() -> [Complex64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [0.0, h, -h, 0.0].map(|v| Complex64::new(v, 0.0))
}

/// `(1−x)`-weighted bilinear payoff with cells ordered (S1,S1′), (S1,S2′),
/// (S2,S1′), (S2,S2′).
pub fn mixed_payoff(cells: &[f64; 4], x: f64, y: f64) -> f64 {
    x * y * cells[0]
        + x * (1.0 - y) * cells[1]
        + (1.0 - x) * y * cells[2]
        + (1.0 - x) * (1.0 - y) * cells[3]
}

/// Best unilateral gain over all mixed deviations. A payoff linear in the
/// deviator's own probability peaks at a pure strategy, so 0 and 1 suffice.
pub fn regret(alice: &[f64; 4], bob: &[f64; 4], x: f64, y: f64) -> f64 {
    let ga =
        mixed_payoff(alice, 0.0, y).max(mixed_payoff(alice, 1.0, y)) - mixed_payoff(alice, x, y);
    let gb = mixed_payoff(bob, x, 0.0).max(mixed_payoff(bob, x, 1.0)) - mixed_payoff(bob, x, y);
    ga.max(gb).max(0.0)
}

/// Grid indices `(i, j)` of the `n × n` lattice whose regret is at most `eps`.
pub fn grid_equilibria(
    alice: &[f64; 4],
    bob: &[f64; 4],
    n: usize,
    eps: f64,
) -> Vec<(usize, usize)> {
    let h = 1.0 / (n - 1) as f64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if regret(alice, bob, i as f64 * h, j as f64 * h) <= eps {
                out.push((i, j));
            }
        }
    }
    out
}

/// Binomial standard error of a frequency estimate.
pub fn binomial_se(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

pub fn schemas_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

pub const SCHEMA_BASE: &str = "https://epr-game.invalid/schemas/";

/// All shipped schemas, keyed by file name.
pub fn load_schemas() -> HashMap<String, Value> {
    std::fs::read_dir(schemas_dir())
        .expect("schemas directory")
        .map(|e| {
            let path = e.expect("entry").path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
            (name, v)
        })
        .collect()
}

/// Compiled validator for the named schema, resolving cross-file
/// references within the shipped set.
pub fn validator(schema: &str) -> jsonschema::Validator {
    let all = load_schemas();
    let registry = jsonschema::Registry::new()
        .extend(
            all.iter()
                .map(|(n, v)| (format!("{SCHEMA_BASE}{n}"), v.clone())),
        )
        .expect("valid uris")
        .prepare()
        .expect("registry");
    jsonschema::options()
        .with_registry(&registry)
        .build(&all[schema])
        .expect("schema compiles")
}

/// Validation error messages for `instance` against the named schema.
pub fn schema_errors(schema: &str, instance: &Value) -> Vec<String> {
    validator(schema)
        .iter_errors(instance)
        .map(|e| e.to_string())
        .collect()
}

/// Chebyshev distance from `(x, y)` to the rectangle `[x0, x1] × [y0, y1]`.
pub fn rect_distance(rect: [f64; 4], x: f64, y: f64) -> f64 {
    let [x0, x1, y0, y1] = rect;
    let dx = (x0 - x).max(x - x1).max(0.0);
    let dy = (y0 - y).max(y - y1).max(0.0);
    dx.max(dy)
}

/// Compares an analytic equilibrium set (as rectangles) with the grid
/// ε-equilibrium oracle.
///
/// - No false negatives: every grid ε-equilibrium lies within one grid step
///   of a reported rectangle.
/// - No false positives: every reported rectangle, sampled on a 5 × 5
///   lattice, has zero regret up to rounding, and its nearest grid point has
///   regret within the Lipschitz bound for one grid step.
pub fn compare_with_grid(
    alice: &[f64; 4],
    bob: &[f64; 4],
    rects: &[[f64; 4]],
    n: usize,
    eps: f64,
) -> Result<(), String> {
    let h = 1.0 / (n - 1) as f64;
    for (i, j) in grid_equilibria(alice, bob, n, eps) {
        let (x, y) = (i as f64 * h, j as f64 * h);
        if !rects.iter().any(|&r| rect_distance(r, x, y) <= h + 1e-12) {
            return Err(format!(
                "grid equilibrium ({x}, {y}) is missing from {rects:?}"
            ));
        }
    }
    let scale = alice.iter().chain(bob).fold(1.0f64, |m, v| m.max(v.abs()));
    // |∂ payoff / ∂ x| ≤ 2·max|cell|, and regret moves at most twice that.
    let lipschitz = 8.0 * scale;
    for &[x0, x1, y0, y1] in rects {
        for fx in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for fy in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let (x, y) = (x0 + fx * (x1 - x0), y0 + fy * (y1 - y0));
                let r = regret(alice, bob, x, y);
                if r > 1e-9 * scale {
                    return Err(format!("reported ({x}, {y}) has regret {r:e}"));
                }
                let (gx, gy) = ((x / h).round() * h, (y / h).round() * h);
                let rg = regret(alice, bob, gx, gy);
                if rg > lipschitz * h {
                    return Err(format!(
                        "grid neighbour ({gx}, {gy}) of ({x}, {y}) has regret {rg:e}"
                    ));
                }
            }
        }
    }
    Ok(())
}
