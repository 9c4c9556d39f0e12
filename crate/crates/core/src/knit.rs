//! Knitting frieze arrays slice by slice along the transjective component,
//! and rendering them.
//!
//! Column `c + 1` is obtained from column `c` by mutating at every vertex of
//! the slice quiver in source order. The value at `(v, c + 1)` satisfies the
//! mesh relation
//!
//! ```text
//! F(v, c) * F(v, c + 1) = prod_{v -> j} F(j, c) * prod_{j -> v} F(j, c + 1) + 1
//! ```
//!
//! with arrow multiplicities as exponents.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::ExchangeValue;
use crate::laurent::{LaurentError, LaurentPolynomial};
use crate::quiver::{Quiver, QuiverError};
use crate::rings::{RingElement, RingError};

/// Columns searched for a repeat by [`knit_period`].
pub const PERIOD_SEARCH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnitError {
    #[error("slice quiver must be acyclic")]
    NotAcyclic,
    #[error("expected {expected} start values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("start values must lie in one ring")]
    MixedRings,
    #[error("knitting undefined: use symbolic evaluation")]
    ZeroDivisor { column: i64, vertex: usize },
    #[error("mesh quotient at vertex {vertex}, column {column} is not in the ring")]
    Inexact { column: i64, vertex: usize },
    #[error("mesh relation fails at vertex {vertex}, column {column}")]
    MeshViolation { column: i64, vertex: usize },
    #[error("no period within {0} columns")]
    NoPeriod(usize),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// A window of a frieze on the transjective component: `columns[i]` is the
/// slice at column `first + i`, indexed by the vertices of `quiver`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FriezeArray {
    pub quiver: Quiver,
    pub first: i64,
    pub columns: Vec<Vec<RingElement>>,
    /// Smallest shift under which the window repeats, if it does.
    pub period: Option<usize>,
}

enum Direction {
    Forward,
    Backward,
}

fn power_product<V: ExchangeValue>(acc: V, v: &V, m: u32) -> Result<V, V::Error> {
    (0..m).try_fold(acc, |a, _| a.times(v))
}

/// One slice step. Forward mutates at sources and yields column `c + 1`;
/// backward mutates at sinks and yields column `c - 1`.
fn step<V>(q: &Quiver, order: &[usize], cur: &[V], dir: &Direction, column: i64) -> Result<Vec<V>, KnitError>
where
    V: ExchangeValue,
    KnitError: From<V::Error>,
{
    let mut next = cur.to_vec();
    for &v in order {
        let one = cur[v].unit_like();
        let mut prod = one.clone();
        match dir {
            Direction::Forward => {
                for (j, m) in q.out_arrows(v) {
                    prod = power_product(prod, &cur[j], m)?;
                }
                for (j, m) in q.in_arrows(v) {
                    prod = power_product(prod, &next[j], m)?;
                }
            }
            Direction::Backward => {
                for (j, m) in q.out_arrows(v) {
                    prod = power_product(prod, &next[j], m)?;
                }
                for (j, m) in q.in_arrows(v) {
                    prod = power_product(prod, &cur[j], m)?;
                }
            }
        }
        if cur[v].is_zero_value() {
            return Err(KnitError::ZeroDivisor { column, vertex: v });
        }
        next[v] = prod.plus(&one)?.divide(&cur[v])?.ok_or(KnitError::Inexact { column, vertex: v })?;
    }
    Ok(next)
}

/// Columns `-backward..=forward` of the frieze with column 0 equal to
/// `start`, over any exchange-value type.
pub fn knit_columns<V>(q: &Quiver, start: &[V], forward: usize, backward: usize) -> Result<Vec<Vec<V>>, KnitError>
where
    V: ExchangeValue,
    KnitError: From<V::Error>,
{
    if start.len() != q.len() {
        return Err(KnitError::Length { expected: q.len(), got: start.len() });
    }
    if !q.is_acyclic() {
        return Err(KnitError::NotAcyclic);
    }
    let sources = q.source_order()?;
    let sinks = q.sink_order()?;
    let mut before = Vec::with_capacity(backward);
    let mut cur = start.to_vec();
    for c in 0..backward {
        cur = step(q, &sinks, &cur, &Direction::Backward, -(c as i64) - 1)?;
        before.push(cur.clone());
    }
    before.reverse();
    let mut cur = start.to_vec();
    before.push(cur.clone());
    for c in 0..forward {
        cur = step(q, &sources, &cur, &Direction::Forward, c as i64 + 1)?;
        before.push(cur.clone());
    }
    Ok(before)
}

fn ring_of(start: &[RingElement]) -> Result<(), KnitError> {
    match start.first() {
        Some(first) if start.iter().any(|v| v.kind() != first.kind()) => Err(KnitError::MixedRings),
        _ => Ok(()),
    }
}

fn array(q: &Quiver, first: i64, columns: Vec<Vec<RingElement>>) -> FriezeArray {
    let period = detect_period(&columns);
    FriezeArray { quiver: q.clone(), first, columns, period }
}

fn detect_period(columns: &[Vec<RingElement>]) -> Option<usize> {
    (1..columns.len()).find(|&p| (0..columns.len() - p).all(|i| columns[i] == columns[i + p]))
}

/// Knits numerically in the ring of `start`.
pub fn knit(q: &Quiver, start: &[RingElement], forward: usize, backward: usize) -> Result<FriezeArray, KnitError> {
    ring_of(start)?;
    let columns = knit_columns(q, start, forward, backward)?;
    Ok(array(q, -(backward as i64), columns))
}

/// Knits the cluster variables themselves and specializes them at `start`.
/// Works whenever `start` has no zero entry, even if the frieze does.
pub fn knit_symbolic(q: &Quiver, start: &[RingElement], forward: usize, backward: usize) -> Result<FriezeArray, KnitError> {
    ring_of(start)?;
    if start.len() != q.len() {
        return Err(KnitError::Length { expected: q.len(), got: start.len() });
    }
    let n = q.len();
    let vars: Vec<LaurentPolynomial> = (0..n).map(|i| LaurentPolynomial::var(n, i)).collect();
    let symbolic = knit_columns(q, &vars, forward, backward)?;
    let first = -(backward as i64);
    let mut columns = Vec::with_capacity(symbolic.len());
    for (i, col) in symbolic.iter().enumerate() {
        let mut out = Vec::with_capacity(n);
        for (v, u) in col.iter().enumerate() {
            let value = u.specialize(start).map_err(|e| match e {
                LaurentError::ZeroDenominator(_) => KnitError::ZeroDivisor { column: first + i as i64, vertex: v },
                e => e.into(),
            })?;
            out.push(value.ok_or(KnitError::Inexact { column: first + i as i64, vertex: v })?);
        }
        columns.push(out);
    }
    Ok(array(q, first, columns))
}

/// [`knit`], falling back to [`knit_symbolic`] when a zero value blocks
/// the recurrence.
pub fn knit_auto(q: &Quiver, start: &[RingElement], forward: usize, backward: usize) -> Result<FriezeArray, KnitError> {
    match knit(q, start, forward, backward) {
        Err(KnitError::ZeroDivisor { .. }) => knit_symbolic(q, start, forward, backward),
        other => other,
    }
}

/// Knits forward until column 0 recurs and returns one full period plus
/// the repeated column.
pub fn knit_period(q: &Quiver, start: &[RingElement]) -> Result<FriezeArray, KnitError> {
    let probe = knit_auto(q, start, PERIOD_SEARCH, 0)?;
    let p = (1..probe.columns.len()).find(|&p| probe.columns[p] == probe.columns[0]).ok_or(KnitError::NoPeriod(PERIOD_SEARCH))?;
    let mut columns = probe.columns;
    columns.truncate(p + 1);
    Ok(FriezeArray { quiver: q.clone(), first: 0, columns, period: Some(p) })
}

/// Checks every mesh inside the window and returns how many there were.
pub fn verify_mesh(arr: &FriezeArray) -> Result<usize, KnitError> {
    let q = &arr.quiver;
    let mut checked = 0;
    for c in 0..arr.columns.len().saturating_sub(1) {
        let (left, right) = (&arr.columns[c], &arr.columns[c + 1]);
        for v in 0..q.len() {
            let column = arr.first + c as i64 + 1;
            let one = left[v].kind().one();
            let mut middle = one.clone();
            for (j, m) in q.out_arrows(v) {
                middle = middle.mul(&left[j].pow(m))?;
            }
            for (j, m) in q.in_arrows(v) {
                middle = middle.mul(&right[j].pow(m))?;
            }
            if left[v].mul(&right[v])? != middle.add(&one)? {
                return Err(KnitError::MeshViolation { column, vertex: v });
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Length of the longest path ending at each vertex.
fn depths(q: &Quiver) -> Vec<usize> {
    let mut depth = vec![0; q.len()];
    if let Ok(order) = q.source_order() {
        for v in order {
            for (t, _) in q.out_arrows(v) {
                depth[t] = depth[t].max(depth[v] + 1);
            }
        }
    }
    depth
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Json,
}

/// Staggered text grid, one row per vertex, or the JSON form of the array.
/// In the grid, vertex `v` of column `c` sits at `c * (D + 1) + depth(v)`,
/// where `D` is the largest depth.
pub fn render_frieze(arr: &FriezeArray, format: RenderFormat) -> String {
    match format {
        RenderFormat::Json => serde_json::to_string_pretty(arr).unwrap_or_else(|e| unreachable!("frieze array JSON: {e}")),
        RenderFormat::Text => render_text(arr),
    }
}

fn render_text(arr: &FriezeArray) -> String {
    let n = arr.quiver.len();
    let depth = depths(&arr.quiver);
    let stride = depth.iter().max().copied().unwrap_or(0) + 1;
    let slots = arr.columns.len() * stride;
    let mut cells = vec![vec![String::new(); slots]; n];
    for (c, col) in arr.columns.iter().enumerate() {
        for (v, value) in col.iter().enumerate() {
            cells[v][c * stride + depth[v]] = value.to_string();
        }
    }
    let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        let line: String = row.iter().map(|s| format!("{s:>width$} ")).collect();
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}

/// Parses the JSON written by [`render_frieze`].
pub fn parse_frieze(json: &str) -> Result<FriezeArray, serde_json::Error> {
    serde_json::from_str(json)
}
