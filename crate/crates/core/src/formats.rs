//! JSON documents read and written by the library and the CLI.
//!
//! | format tag       | contents                                           |
//! |------------------|----------------------------------------------------|
//! | `epr-joint-v1`   | `{"p": [p1, …, p16]}`, optional `"labels"`          |
//! | `epr-octet-v1`   | `{"mu": [p1, p4, p5, p8, p9, p12, p14, p15]}`       |
//! | `game-2x2-v1`    | `{"cells": [[a1,b1],[a2,b2],[a3,b3],[a4,b4]]}`      |
//! | `state2q-v1`     | `{"kind": "pure"|"mixed", "data": [[re,im], …]}`    |
//!
//! Run logs are line-delimited JSON: one `{"run", "pair", "a", "b"}` object
//! per run followed by a `{"summary": …}` object.

use std::io::{self, BufRead, Write};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::game::{GameError, GameMatrix, Payoffs};
use crate::nash::{ComponentShape, Interval, NashComponent, NashReport};
use crate::probability::{
    entry_labels, IndependentOctet, JointDistribution, ModelError, SettingPair,
};
use crate::quantum::{BipartiteState, StateError};
use crate::simulator::{RunLog, RunRecord, Simulation};

pub const DISTRIBUTION_FORMAT: &str = "epr-joint-v1";
pub const OCTET_FORMAT: &str = "epr-octet-v1";
pub const GAME_FORMAT: &str = "game-2x2-v1";
pub const STATE_FORMAT: &str = "state2q-v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected format `{expected}`, found `{found}`")]
    WrongFormat {
        expected: &'static str,
        found: String,
    },
    #[error("expected {expected} {what}, found {found}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("entry {index} is not a finite number")]
    NonFinite { index: usize },
    #[error("unknown state kind `{0}` (expected pure|mixed)")]
    UnknownKind(String),
    #[error("run log line {line}: {message}")]
    RunLog { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn check_format(found: &str, expected: &'static str) -> Result<(), FormatError> {
    if found == expected {
        Ok(())
    } else {
        Err(FormatError::WrongFormat {
            expected,
            found: found.to_string(),
        })
    }
}

fn fixed<const N: usize>(v: &[f64], what: &'static str) -> Result<[f64; N], FormatError> {
    if v.len() != N {
        return Err(FormatError::WrongLength {
            what,
            expected: N,
            found: v.len(),
        });
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(FormatError::NonFinite { index: i + 1 });
    }
    Ok(std::array::from_fn(|i| v[i]))
}

#[derive(Debug, Serialize, Deserialize)]
struct DistributionDoc {
    format: String,
    p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// Parses an `epr-joint-v1` document. Length and finiteness problems are
/// [`FormatError::WrongLength`] / [`FormatError::NonFinite`]; out-of-range
/// probabilities surface as [`FormatError::Model`].
pub fn parse_distribution(text: &str) -> Result<JointDistribution, FormatError> {
    let doc: DistributionDoc = serde_json::from_str(text)?;
    check_format(&doc.format, DISTRIBUTION_FORMAT)?;
    let p = fixed::<16>(&doc.p, "probabilities")?;
    Ok(JointDistribution::new(p)?)
}

pub fn distribution_json(d: &JointDistribution, with_labels: bool) -> Value {
    let doc = DistributionDoc {
        format: DISTRIBUTION_FORMAT.into(),
        p: d.as_array().to_vec(),
        labels: with_labels.then(entry_labels),
    };
    serde_json::to_value(doc).expect("serializable")
}

#[derive(Debug, Serialize, Deserialize)]
struct OctetDoc {
    format: String,
    mu: Vec<f64>,
}

pub fn parse_octet(text: &str) -> Result<IndependentOctet, FormatError> {
    let doc: OctetDoc = serde_json::from_str(text)?;
    check_format(&doc.format, OCTET_FORMAT)?;
    Ok(IndependentOctet::new(fixed::<8>(
        &doc.mu,
        "octet entries",
    )?)?)
}

pub fn octet_json(o: &IndependentOctet) -> Value {
    json!({ "format": OCTET_FORMAT, "mu": o.values() })
}

#[derive(Debug, Serialize, Deserialize)]
struct GameDoc {
    format: String,
    cells: Vec<[f64; 2]>,
}

pub fn parse_game(text: &str) -> Result<GameMatrix, FormatError> {
    let doc: GameDoc = serde_json::from_str(text)?;
    check_format(&doc.format, GAME_FORMAT)?;
    if doc.cells.len() != 4 {
        return Err(FormatError::WrongLength {
            what: "cells",
            expected: 4,
            found: doc.cells.len(),
        });
    }
    let cells = std::array::from_fn(|i| (doc.cells[i][0], doc.cells[i][1]));
    Ok(GameMatrix::new(cells)?)
}

pub fn game_json(m: &GameMatrix) -> Value {
    json!({
        "format": GAME_FORMAT,
        "cells": m.cells().iter().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct StateDoc {
    format: String,
    kind: String,
    data: Vec<[f64; 2]>,
}

/// Parses a `state2q-v1` document: 4 amplitudes (pure) or 16 row-major
/// density-matrix entries (mixed), each as `[re, im]`.
pub fn parse_state(text: &str) -> Result<BipartiteState, FormatError> {
    let doc: StateDoc = serde_json::from_str(text)?;
    check_format(&doc.format, STATE_FORMAT)?;
    let expected = match doc.kind.as_str() {
        "pure" => 4,
        "mixed" => 16,
        other => return Err(FormatError::UnknownKind(other.to_string())),
    };
    if doc.data.len() != expected {
        return Err(FormatError::WrongLength {
            what: "complex entries",
            expected,
            found: doc.data.len(),
        });
    }
    let z: Vec<Complex64> = doc
        .data
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    Ok(if expected == 4 {
        BipartiteState::pure([z[0], z[1], z[2], z[3]])?
    } else {
        BipartiteState::mixed(Matrix4::from_row_slice(&z))?
    })
}

pub fn state_json(state: &BipartiteState) -> Value {
    let pair = |z: &Complex64| [z.re, z.im];
    let (kind, data): (&str, Vec<[f64; 2]>) = match state {
        BipartiteState::Pure(v) => ("pure", v.iter().map(pair).collect()),
        BipartiteState::Mixed(rho) => (
            "mixed",
            (0..4)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .map(|(i, j)| pair(&rho[(i, j)]))
                .collect(),
        ),
    };
    json!({ "format": STATE_FORMAT, "kind": kind, "data": data })
}

/// Rounds to 12 significant digits and prints the shortest form; magnitudes
/// below 1e-4 or from 1e12 up use exponent notation.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("valid float");
    if rounded == 0.0 {
        "0".into()
    } else if rounded.abs() < 1e-4 || rounded.abs() >= 1e12 {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

/// `sig12` as a number.
pub fn round12(v: f64) -> f64 {
    sig12(v).parse().unwrap_or(v)
}

fn endpoint(x: f64, y: f64) -> Value {
    json!({ "x": sig12(x), "y": sig12(y), "x_f64": x, "y_f64": y })
}

fn payoffs_json(p: &Payoffs) -> Value {
    json!({ "alice": p.alice, "bob": p.bob })
}

fn interval_json(i: &Interval) -> Value {
    json!({ "lo": sig12(i.lo), "hi": sig12(i.hi), "lo_f64": i.lo, "hi_f64": i.hi })
}

pub fn component_json(c: &NashComponent) -> Value {
    let mut v = match c.shape {
        ComponentShape::Point => json!({ "type": "point", "at": endpoint(c.x.lo, c.y.lo) }),
        ComponentShape::Segment => json!({
            "type": "segment",
            "from": endpoint(c.x.lo, c.y.lo),
            "to": endpoint(c.x.hi, c.y.hi),
        }),
        ComponentShape::Square => json!({
            "type": "square",
            "x": interval_json(&c.x),
            "y": interval_json(&c.y),
        }),
    };
    let obj = v.as_object_mut().expect("object");
    obj.insert("payoffs".into(), payoffs_json(&c.payoffs));
    if c.shape != ComponentShape::Point {
        obj.insert("payoffs_end".into(), payoffs_json(&c.payoffs_end));
    }
    obj.insert("classification".into(), json!(c.classification.class));
    obj.insert("delta_r".into(), json!(c.classification.delta_r));
    v
}

pub fn nash_report_json(r: &NashReport) -> Value {
    json!({
        "best_response": {
            "alice": { "slope": r.lines.alice.slope, "intercept": r.lines.alice.intercept },
            "bob": { "slope": r.lines.bob.slope, "intercept": r.lines.bob.intercept },
        },
        "components": r.components.iter().map(component_json).collect::<Vec<_>>(),
    })
}

fn record_json(r: &RunRecord) -> Value {
    json!({ "run": r.run, "pair": r.pair.token(), "a": r.a, "b": r.b })
}

pub fn simulation_summary_json(sim: &Simulation) -> Value {
    let log = &sim.log;
    let blocks: serde_json::Map<String, Value> = SettingPair::ALL
        .iter()
        .map(|&p| (p.token().to_string(), json!(log.block_frequencies(p))))
        .collect();
    json!({
        "seed": log.seed,
        "runs": log.runs,
        "profile": { "x": sim.profile.x, "y": sim.profile.y },
        "counts": log.counts,
        "pair_totals": log.pair_totals(),
        "frequencies": blocks,
        "empirical_payoffs": payoffs_json(&sim.empirical.payoffs),
        "partial": sim.empirical.partial,
    })
}

/// Writes one line per recorded run, then the summary line.
pub fn write_run_log<W: Write>(mut w: W, sim: &Simulation) -> io::Result<()> {
    if let Some(records) = &sim.log.records {
        for r in records {
            serde_json::to_writer(&mut w, &record_json(r))?;
            w.write_all(b"\n")?;
        }
    }
    serde_json::to_writer(&mut w, &json!({ "summary": simulation_summary_json(sim) }))?;
    w.write_all(b"\n")
}

/// Reads a run log back into a [`RunLog`], recounting from the records.
pub fn read_run_log<R: BufRead>(r: R) -> Result<RunLog, FormatError> {
    let mut records = Vec::new();
    let mut counts = [0u64; 16];
    let mut seed = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| FormatError::RunLog {
            line: i + 1,
            message,
        };
        let v: Value = serde_json::from_str(&line)?;
        if let Some(summary) = v.get("summary") {
            seed = summary.get("seed").and_then(Value::as_u64);
            continue;
        }
        let run = v
            .get("run")
            .and_then(Value::as_u64)
            .ok_or_else(|| err("missing run".into()))?;
        let token = v
            .get("pair")
            .and_then(Value::as_str)
            .ok_or_else(|| err("missing pair".into()))?;
        let pair =
            SettingPair::from_token(token).ok_or_else(|| err(format!("bad pair `{token}`")))?;
        let outcome = |key: &str| match v.get(key).and_then(Value::as_i64) {
            Some(1) => Ok(1i8),
            Some(-1) => Ok(-1i8),
            _ => Err(err(format!("`{key}` must be +1 or -1"))),
        };
        let (a, b) = (outcome("a")?, outcome("b")?);
        counts[4 * pair.index() + crate::probability::outcome_offset(a, b)] += 1;
        records.push(RunRecord { run, pair, a, b });
    }
    Ok(RunLog {
        seed: seed.unwrap_or(0),
        runs: records.len() as u64,
        counts,
        records: Some(records),
    })
}
