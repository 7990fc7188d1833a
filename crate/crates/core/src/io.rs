//! JSON MDP file format.
//!
//! ```json
//! {
//!   "states": ["s0", "s1"],
//!   "actions": ["stay", "go"],
//!   "transitions": [[[1, 0], [0, 1]], [["1/2", "1/2"], [0, 1]]],
//!   "rewards": [[0, 1], [0, 0]],
//!   "gamma": "9/10",
//!   "initial_state": "s0",
//!   "mode": "rational"
//! }
//! ```
//!
//! `transitions` is indexed `[action][from][to]`, `rewards` `[state][action]`.
//! Probabilities may be numbers or `"p/q"` strings. Unknown fields are rejected.

use std::fs;
use std::path::Path;

use num_rational::BigRational;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mdp::{RationalMdp, TabularMdp};
use crate::scalar::{NumericMode, Scalar};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MdpFile {
    states: Vec<String>,
    actions: Vec<String>,
    transitions: Vec<Vec<Vec<Value>>>,
    rewards: Vec<Vec<Value>>,
    #[serde(default)]
    gamma: Option<Value>,
    #[serde(default)]
    initial_state: Option<String>,
    #[serde(default)]
    mode: Option<NumericMode>,
}

/// An MDP in whichever numeric mode its file declared.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyMdp {
    Float(TabularMdp<f64>),
    Rational(RationalMdp),
}

impl AnyMdp {
    pub fn mode(&self) -> NumericMode {
        match self {
            AnyMdp::Float(_) => NumericMode::Float,
            AnyMdp::Rational(_) => NumericMode::Rational,
        }
    }

    pub fn to_f64(&self) -> TabularMdp<f64> {
        match self {
            AnyMdp::Float(m) => m.clone(),
            AnyMdp::Rational(m) => m.to_f64(),
        }
    }
}

fn literal<T: Scalar>(value: &Value, location: impl Fn() -> String) -> Result<T> {
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => {
            return Err(Error::Parse { location: location(), message: format!("expected number or fraction, got {other}") })
        }
    };
    T::parse_literal(&text).map_err(|message| Error::Parse { location: location(), message })
}

fn json_error(err: serde_json::Error) -> Error {
    Error::Parse { location: format!("line {} column {}", err.line(), err.column()), message: err.to_string() }
}

fn parse_file(text: &str) -> Result<MdpFile> {
    serde_json::from_str(text).map_err(json_error)
}

fn build<T: Scalar>(file: MdpFile) -> Result<TabularMdp<T>> {
    let n = file.states.len();
    let k = file.actions.len();
    if file.transitions.len() != k {
        return Err(Error::Schema(format!("`transitions` has {} action blocks, expected {k}", file.transitions.len())));
    }
    let mut kernel = Vec::with_capacity(k);
    for (a, block) in file.transitions.iter().enumerate() {
        if block.len() != n {
            return Err(Error::Schema(format!("`transitions[{a}]` has {} rows, expected {n}", block.len())));
        }
        let mut rows = Vec::with_capacity(n);
        for (s, row) in block.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Schema(format!("`transitions[{a}][{s}]` has {} entries, expected {n}", row.len())));
            }
            let mut sparse = Vec::new();
            for (t, v) in row.iter().enumerate() {
                let p: T = literal(v, || format!("transitions[{a}][{s}][{t}]"))?;
                if !p.is_zero() {
                    sparse.push((t, p));
                }
            }
            rows.push(sparse);
        }
        kernel.push(rows);
    }
    if file.rewards.len() != n {
        return Err(Error::Schema(format!("`rewards` has {} rows, expected {n}", file.rewards.len())));
    }
    let mut rewards = Vec::with_capacity(n);
    for (s, row) in file.rewards.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Schema(format!("`rewards[{s}]` has {} entries, expected {k}", row.len())));
        }
        rewards.push(
            row.iter()
                .enumerate()
                .map(|(a, v)| literal(v, || format!("rewards[{s}][{a}]")))
                .collect::<Result<Vec<T>>>()?,
        );
    }
    let mut mdp = TabularMdp::from_sparse_unchecked(file.states, file.actions, kernel, rewards);
    if let Some(g) = &file.gamma {
        mdp = mdp.with_discount(literal(g, || "gamma".to_string())?);
    }
    if let Some(name) = &file.initial_state {
        let s0 = mdp
            .state_index(name)
            .map_err(|_| Error::Schema(format!("`initial_state` names unknown state `{name}`")))?;
        mdp = mdp.with_initial_state(s0);
    }
    Ok(mdp)
}

/// Parses an MDP document in the mode it declares (float by default).
/// Only the file structure is checked here; see [`crate::mdp::validate_mdp`].
pub fn parse_mdp(text: &str) -> Result<AnyMdp> {
    let file = parse_file(text)?;
    match file.mode.unwrap_or(NumericMode::Float) {
        NumericMode::Float => build::<f64>(file).map(AnyMdp::Float),
        NumericMode::Rational => build::<BigRational>(file).map(AnyMdp::Rational),
    }
}

/// Parses an MDP document, interpreting every literal in the field `T`.
pub fn parse_mdp_as<T: Scalar>(text: &str) -> Result<TabularMdp<T>> {
    build(parse_file(text)?)
}

pub fn load_mdp(path: impl AsRef<Path>) -> Result<AnyMdp> {
    parse_mdp(&fs::read_to_string(path)?)
}

pub fn load_mdp_as<T: Scalar>(path: impl AsRef<Path>) -> Result<TabularMdp<T>> {
    parse_mdp_as(&fs::read_to_string(path)?)
}

/// JSON document for an MDP, in the mode of `T`.
pub fn mdp_to_json<T: Scalar>(mdp: &TabularMdp<T>) -> Value {
    let mut doc = serde_json::Map::new();
    doc.insert("states".into(), Value::from(mdp.states().to_vec()));
    doc.insert("actions".into(), Value::from(mdp.actions().to_vec()));
    let transitions: Vec<Value> = (0..mdp.n_actions())
        .map(|a| {
            Value::Array(
                (0..mdp.n_states())
                    .map(|s| Value::Array(mdp.dense_row(a, s).iter().map(Scalar::to_json).collect()))
                    .collect(),
            )
        })
        .collect();
    doc.insert("transitions".into(), Value::Array(transitions));
    let rewards: Vec<Value> =
        mdp.rewards().iter().map(|row| Value::Array(row.iter().map(Scalar::to_json).collect())).collect();
    doc.insert("rewards".into(), Value::Array(rewards));
    if let Some(g) = mdp.discount() {
        doc.insert("gamma".into(), g.to_json());
    }
    if let Some(s0) = mdp.initial_state() {
        doc.insert("initial_state".into(), Value::from(mdp.state_name(s0)));
    }
    doc.insert("mode".into(), Value::from(T::MODE.as_str()));
    Value::Object(doc)
}

pub fn mdp_to_string<T: Scalar>(mdp: &TabularMdp<T>) -> String {
    let mut text = serde_json::to_string_pretty(&mdp_to_json(mdp)).expect("MDP serializes");
    text.push('\n');
    text
}

pub fn save_mdp<T: Scalar>(mdp: &TabularMdp<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, mdp_to_string(mdp))?;
    Ok(())
}
