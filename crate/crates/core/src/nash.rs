//! Complete Nash-equilibrium sets of 2×2 bimatrix games by best-response
//! sign analysis.
//!
//! For a payoff table the unilateral-deviation gains are
//! `Π_A(x*,y*) − Π_A(x,y*) = g_A(y*)·(x* − x)` and
//! `Π_B(x*,y*) − Π_B(x*,y) = g_B(x*)·(y* − y)`, with `g_A`, `g_B` affine.
//! Each player's best-response graph is therefore a union of at most
//! three axis-aligned closed pieces, and the equilibrium set is the union of
//! their pairwise intersections: points, segments, or the whole square.

use serde::Serialize;

use crate::game::{
    bilinear, classify_equilibrium, Classification, GameError, PayoffTable, Payoffs,
};
use crate::probability::{JointDistribution, SettingPair};

/// Coefficients below this magnitude are treated as zero.
pub const ZERO_TOL: f64 = 1e-10;
/// Points of the deviation grid used to re-verify every component.
pub const VERIFY_GRID: usize = 1001;
/// Regret allowed by the verification, relative to the table's scale.
pub const VERIFY_TOL: f64 = 1e-10;

const SNAP: f64 = 1e-12;

/// `g(t) = slope·t + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineCoefficient {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineCoefficient {
    pub fn at(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }

    fn identically_zero(&self) -> bool {
        self.slope.abs() <= ZERO_TOL && self.intercept.abs() <= ZERO_TOL
    }
}

/// Alice's bracket as a function of `y`, Bob's as a function of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponseLines {
    pub alice: AffineCoefficient,
    pub bob: AffineCoefficient,
}

pub fn best_response_lines(table: &PayoffTable) -> BestResponseLines {
    let a = |p: SettingPair| table.alice[p.index()];
    let b = |p: SettingPair| table.bob[p.index()];
    use SettingPair::*;
    BestResponseLines {
        alice: AffineCoefficient {
            slope: a(S1S1p) - a(S2S1p) - a(S1S2p) + a(S2S2p),
            intercept: a(S1S2p) - a(S2S2p),
        },
        bob: AffineCoefficient {
            slope: b(S1S1p) - b(S1S2p) - b(S2S1p) + b(S2S2p),
            intercept: b(S2S1p) - b(S2S2p),
        },
    }
}

/// Closed interval `[lo, hi]` within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi - self.lo <= SNAP
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lo - tol && v <= self.hi + tol
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi + SNAP {
            None
        } else {
            Some(Interval { lo, hi: hi.max(lo) })
        }
    }

    fn covers(&self, other: &Interval) -> bool {
        other.lo >= self.lo - SNAP && other.hi <= self.hi + SNAP
    }

    fn same(&self, other: &Interval) -> bool {
        (self.lo - other.lo).abs() <= SNAP && (self.hi - other.hi).abs() <= SNAP
    }

    fn touches(&self, other: &Interval) -> bool {
        self.lo <= other.hi + SNAP && other.lo <= self.hi + SNAP
    }

    fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentShape {
    Point,
    Segment,
    Square,
}

/// A connected piece of the equilibrium set: `x ∈ x_range, y ∈ y_range`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashComponent {
    pub shape: ComponentShape,
    pub x: Interval,
    pub y: Interval,
    /// Payoffs at `(x.lo, y.lo)`.
    pub payoffs: Payoffs,
    /// Payoffs at `(x.hi, y.hi)`; equal to `payoffs` for zero-sum tables.
    pub payoffs_end: Payoffs,
    pub classification: Classification,
}

impl NashComponent {
    pub fn contains(&self, x: f64, y: f64, tol: f64) -> bool {
        self.x.contains(x, tol) && self.y.contains(y, tol)
    }

    pub fn has_constant_payoffs(&self, tol: f64) -> bool {
        (self.payoffs.alice - self.payoffs_end.alice).abs() <= tol
            && (self.payoffs.bob - self.payoffs_end.bob).abs() <= tol
    }

    /// Sample profiles along the component (corners and interior points).
    fn samples(&self) -> Vec<(f64, f64)> {
        let xs = sample_interval(&self.x);
        let ys = sample_interval(&self.y);
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .collect()
    }
}

fn sample_interval(i: &Interval) -> Vec<f64> {
    if i.is_degenerate() {
        vec![i.lo]
    } else {
        [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|f| i.lo + f * (i.hi - i.lo))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashReport {
    pub lines: BestResponseLines,
    pub components: Vec<NashComponent>,
}

impl NashReport {
    /// Whether `(x, y)` lies on some reported component.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.component_containing(x, y).is_some()
    }

    pub fn component_containing(&self, x: f64, y: f64) -> Option<&NashComponent> {
        self.components.iter().find(|c| c.contains(x, y, 1e-9))
    }

    /// Attaches the Bell classification of the generating distribution to
    /// every component.
    pub fn classify(mut self, d: &JointDistribution) -> Result<Self, GameError> {
        let c = classify_equilibrium(d)?;
        for comp in &mut self.components {
            comp.classification = c;
        }
        Ok(self)
    }
}

/// A closed axis-aligned rectangle in the `(x, y)` square.
#[derive(Debug, Clone, Copy)]
struct Rect {
    x: Interval,
    y: Interval,
}

impl Rect {
    fn intersect(&self, o: &Rect) -> Option<Rect> {
        Some(Rect {
            x: self.x.intersect(&o.x)?,
            y: self.y.intersect(&o.y)?,
        })
    }

    fn covers(&self, o: &Rect) -> bool {
        self.x.covers(&o.x) && self.y.covers(&o.y)
    }

    fn merge(&self, o: &Rect) -> Option<Rect> {
        if self.x.same(&o.x) && self.y.touches(&o.y) {
            Some(Rect {
                x: self.x,
                y: self.y.hull(&o.y),
            })
        } else if self.y.same(&o.y) && self.x.touches(&o.x) {
            Some(Rect {
                x: self.x.hull(&o.x),
                y: self.y,
            })
        } else {
            None
        }
    }
}

/// Pieces `(opponent interval, own best-response interval)` of one player's
/// best-response graph.
fn best_response_pieces(g: &AffineCoefficient) -> Vec<(Interval, Interval)> {
    if g.identically_zero() {
        return vec![(Interval::UNIT, Interval::UNIT)];
    }
    let respond = |t: f64| {
        let v = g.at(t);
        if v > 0.0 {
            Interval::point(1.0)
        } else if v < 0.0 {
            Interval::point(0.0)
        } else {
            Interval::UNIT
        }
    };
    let root = if g.slope.abs() > ZERO_TOL {
        let r = -g.intercept / g.slope;
        let r = if r.abs() <= SNAP {
            0.0
        } else if (r - 1.0).abs() <= SNAP {
            1.0
        } else {
            r
        };
        (0.0..=1.0).contains(&r).then_some(r)
    } else {
        None
    };
    match root {
        None => vec![(Interval::UNIT, respond(0.5))],
        Some(r) => {
            let mut pieces = Vec::with_capacity(3);
            for span in [Interval { lo: 0.0, hi: r }, Interval { lo: r, hi: 1.0 }] {
                if !span.is_degenerate() {
                    pieces.push((span, respond(span.mid())));
                }
            }
            pieces.push((Interval::point(r), Interval::UNIT));
            pieces
        }
    }
}

fn simplify(mut rects: Vec<Rect>) -> Vec<Rect> {
    loop {
        let mut changed = false;
        'outer: for i in 0..rects.len() {
            for j in 0..rects.len() {
                if i == j {
                    continue;
                }
                if rects[i].covers(&rects[j]) {
                    rects.remove(j);
                    changed = true;
                    break 'outer;
                }
                if let Some(m) = rects[i].merge(&rects[j]) {
                    rects[i] = m;
                    rects.remove(j);
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            return rects;
        }
    }
}

/// All Nash equilibria of the game defined by `table`.
///
/// The result is exhaustive: every profile satisfying the NE inequalities
/// lies on some component. Each component is re-verified against a
/// [`VERIFY_GRID`]-point deviation grid; a failure is reported as
/// [`GameError::Internal`].
pub fn find_nash(table: &PayoffTable) -> Result<NashReport, GameError> {
    for (i, v) in table.alice.iter().chain(&table.bob).enumerate() {
        if !v.is_finite() {
            return Err(GameError::NonFinite { index: i + 1 });
        }
    }
    let lines = best_response_lines(table);
    let alice: Vec<Rect> = best_response_pieces(&lines.alice)
        .into_iter()
        .map(|(y, x)| Rect { x, y })
        .collect();
    let bob: Vec<Rect> = best_response_pieces(&lines.bob)
        .into_iter()
        .map(|(x, y)| Rect { x, y })
        .collect();
    let mut rects = Vec::new();
    for a in &alice {
        for b in &bob {
            if let Some(r) = a.intersect(b) {
                rects.push(r);
            }
        }
    }
    let mut rects = simplify(rects);
    if rects.is_empty() {
        return Err(GameError::Internal(
            "sign analysis produced no equilibrium".into(),
        ));
    }
    rects.sort_by(|a, b| {
        (a.x.lo, a.y.lo, a.x.hi, a.y.hi)
            .partial_cmp(&(b.x.lo, b.y.lo, b.x.hi, b.y.hi))
            .expect("finite coordinates")
    });

    let zero_sum = table.is_zero_sum(1e-12);
    let scale = table.scale();
    let components = rects
        .into_iter()
        .map(|r| {
            let shape = match (r.x.is_degenerate(), r.y.is_degenerate()) {
                (true, true) => ComponentShape::Point,
                (false, false) => ComponentShape::Square,
                _ => ComponentShape::Segment,
            };
            let at = |x, y| Payoffs {
                alice: bilinear(&table.alice, x, y),
                bob: bilinear(&table.bob, x, y),
            };
            let comp = NashComponent {
                shape,
                x: r.x,
                y: r.y,
                payoffs: at(r.x.lo, r.y.lo),
                payoffs_end: at(r.x.hi, r.y.hi),
                classification: Classification::not_applicable(),
            };
            if zero_sum && !comp.has_constant_payoffs(1e-9 * scale) {
                return Err(GameError::Internal(format!(
                    "zero-sum payoffs vary along component {comp:?}"
                )));
            }
            verify_component(table, &comp)?;
            Ok(comp)
        })
        .collect::<Result<Vec<_>, GameError>>()?;
    Ok(NashReport { lines, components })
}

/// Largest gain either player obtains by a unilateral deviation from
/// `(x, y)` to any point of an `n`-point grid.
pub fn grid_regret(table: &PayoffTable, x: f64, y: f64, n: usize) -> f64 {
    let here_a = bilinear(&table.alice, x, y);
    let here_b = bilinear(&table.bob, x, y);
    (0..n)
        .map(|k| k as f64 / (n - 1) as f64)
        .map(|t| {
            let gain_a = bilinear(&table.alice, t, y) - here_a;
            let gain_b = bilinear(&table.bob, x, t) - here_b;
            gain_a.max(gain_b)
        })
        .fold(0.0, f64::max)
}

fn verify_component(table: &PayoffTable, comp: &NashComponent) -> Result<(), GameError> {
    let tol = VERIFY_TOL * table.scale();
    for (x, y) in comp.samples() {
        let regret = grid_regret(table, x, y, VERIFY_GRID);
        if regret > tol {
            return Err(GameError::Internal(format!(
                "profile ({x}, {y}) on a reported component has deviation gain {regret:e}"
            )));
        }
    }
    Ok(())
}
