//! The built-in command-line algebras.
//!
//! `int` interprets `+`, `*` and `-` on 64-bit integers (`-` is negation
//! at arity one, subtraction at arity two); `rat` interprets `+`, `*`,
//! `-` and `/` on doubles and carries the fixpoint solver. Constants
//! (arity-0 operations) are bound with `--const name=value`; anything
//! else is reported when evaluation first needs it.

use crate::error::CliError;
use std::collections::BTreeMap;
use tg_core::semantics::{Algebra, FixpointSolver};
use tg_core::Signature;

pub fn parse_assignments(spec: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for piece in spec.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let (key, value) = piece
            .split_once('=')
            .ok_or_else(|| CliError::Other(format!("expected name=value, found {piece:?}")))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

pub fn int_algebra(sig: &Signature, consts: &BTreeMap<String, String>) -> Result<Algebra<i64>, CliError> {
    let mut alg = Algebra::<i64>::default();
    for op in sig.ops() {
        let name = op.name().to_string();
        match (name.as_str(), op.arity()) {
            ("+", 2) => alg = alg.op(name, |a: &[i64]| a[0] + a[1]),
            ("*", 2) => alg = alg.op(name, |a: &[i64]| a[0] * a[1]),
            ("-", 2) | ("−", 2) => alg = alg.op(name, |a: &[i64]| a[0] - a[1]),
            ("-", 1) | ("−", 1) => alg = alg.op(name, |a: &[i64]| -a[0]),
            (_, 0) => {
                if let Some(value) = consts.get(&name) {
                    let parsed: i64 = value
                        .parse()
                        .map_err(|_| CliError::Other(format!("{value:?} is not an integer")))?;
                    alg = alg.op(name, move |_| parsed);
                }
            }
            _ => {}
        }
    }
    Ok(alg)
}

pub fn rat_algebra(
    sig: &Signature,
    consts: &BTreeMap<String, String>,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Algebra<f64>, CliError> {
    let mut alg = Algebra::<f64>::new(move |a: &f64, b: &f64| (a - b).abs() <= tolerance)
        .with_solver(FixpointSolver::numeric_with(tolerance, max_iterations));
    for op in sig.ops() {
        let name = op.name().to_string();
        match (name.as_str(), op.arity()) {
            ("+", 2) => alg = alg.op(name, |a: &[f64]| a[0] + a[1]),
            ("*", 2) => alg = alg.op(name, |a: &[f64]| a[0] * a[1]),
            ("-", 2) | ("−", 2) => alg = alg.op(name, |a: &[f64]| a[0] - a[1]),
            ("-", 1) | ("−", 1) => alg = alg.op(name, |a: &[f64]| -a[0]),
            ("/", 2) => alg = alg.op(name, |a: &[f64]| a[0] / a[1]),
            (_, 0) => {
                if let Some(value) = consts.get(&name) {
                    let parsed: f64 = value
                        .parse()
                        .map_err(|_| CliError::Other(format!("{value:?} is not a number")))?;
                    alg = alg.op(name, move |_| parsed);
                }
            }
            _ => {}
        }
    }
    Ok(alg)
}

pub fn parse_env<V: std::str::FromStr>(spec: &str) -> Result<BTreeMap<String, V>, CliError> {
    parse_assignments(spec)?
        .into_iter()
        .map(|(k, v)| match v.parse::<V>() {
            Ok(v) => Ok((k, v)),
            Err(_) => Err(CliError::Other(format!(
                "cannot parse value in --env for {k:?}"
            ))),
        })
        .collect()
}
