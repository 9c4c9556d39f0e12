//! Snake graphs of diagonals in a triangulated polygon.
//!
//! The snake graph of a diagonal `γ` has one square tile per diagonal of
//! the triangulation crossed by `γ`. Its perfect matchings give the Laurent
//! expansion of `x_γ` in the cluster of the triangulation.
//!
//! Tile `k` is the quadrilateral around the `k`-th crossed diagonal `τ_k`,
//! drawn so that `τ_k` runs from the north-west to the south-east corner,
//! the triangle `γ` leaves behind is the south-west half and the triangle it
//! enters next is the north-east half. Consecutive tiles share the third
//! side of the triangle between them, which is the north or east edge of
//! the earlier tile.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::laurent::LaurentPolynomial;
use crate::quiver::Quiver;

/// Largest graph on which [`count_matchings`] also enumerates matchings.
pub const BRUTE_FORCE_TILES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnakeError {
    #[error("a triangulated polygon needs at least 4 vertices")]
    PolygonTooSmall,
    #[error("({0}, {1}) is not a diagonal of the polygon")]
    NotADiagonal(usize, usize),
    #[error("diagonals ({0}, {1}) and ({2}, {3}) cross")]
    Crossing(usize, usize, usize, usize),
    #[error("a triangulation of a {m}-gon has {expected} diagonals, got {got}")]
    Count { m: usize, expected: usize, got: usize },
    #[error("label x{} is used twice", .0 + 1)]
    DuplicateLabel(usize),
    #[error("zero graph: variable is in the cluster")]
    ZeroGraph,
    #[error("label x{} does not occur in the snake graph", .0 + 1)]
    LabelAbsent(usize),
    #[error("exchange data does not match the snake graph")]
    ExchangeMismatch,
    #[error("diagonal index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("bad label {0:?}")]
    BadLabel(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Label of a snake-graph edge: a cluster variable or the constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    One,
    Var(usize),
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::One => write!(f, "1"),
            EdgeLabel::Var(i) => write!(f, "x{}", i + 1),
        }
    }
}

impl FromStr for EdgeLabel {
    type Err = SnakeError;

    fn from_str(s: &str) -> Result<Self, SnakeError> {
        let t = s.trim();
        if t == "1" {
            return Ok(EdgeLabel::One);
        }
        t.strip_prefix('x')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .map(|i| EdgeLabel::Var(i - 1))
            .ok_or_else(|| SnakeError::BadLabel(s.to_string()))
    }
}

impl Serialize for EdgeLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EdgeLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod var_label {
    use super::EdgeLabel;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
        EdgeLabel::Var(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        match EdgeLabel::deserialize(d)? {
            EdgeLabel::Var(i) => Ok(i),
            EdgeLabel::One => Err(serde::de::Error::custom("tile label must be a variable")),
        }
    }
}

/// Gluing direction: the next tile sits north or east of the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Turn {
    E,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileEdges {
    pub n: EdgeLabel,
    pub e: EdgeLabel,
    pub s: EdgeLabel,
    pub w: EdgeLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tile {
    #[serde(with = "var_label")]
    pub label: usize,
    pub edges: TileEdges,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SnakeGraph {
    tiles: Vec<Tile>,
    turns: Vec<Turn>,
}

impl PartialOrd for SnakeGraph {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SnakeGraph {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.turns, &self.tiles).cmp(&(&other.turns, &other.tiles))
    }
}

impl SnakeGraph {
    pub fn new(tiles: Vec<Tile>, turns: Vec<Turn>) -> Result<Self, SnakeError> {
        if tiles.is_empty() || turns.len() + 1 != tiles.len() {
            return Err(SnakeError::Invariant("a snake graph has one turn fewer than tiles".into()));
        }
        let g = SnakeGraph { tiles, turns };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<(), SnakeError> {
        let mut seen = BTreeSet::new();
        for t in &self.tiles {
            if !seen.insert(t.label) {
                return Err(SnakeError::DuplicateLabel(t.label));
            }
        }
        let mut interior = BTreeSet::new();
        for (k, turn) in self.turns.iter().enumerate() {
            let (a, b) = (&self.tiles[k].edges, &self.tiles[k + 1].edges);
            let (mine, theirs) = match turn {
                Turn::N => (a.n, b.s),
                Turn::E => (a.e, b.w),
            };
            if mine != theirs {
                return Err(SnakeError::Invariant(format!("tiles {k} and {} disagree on their shared edge", k + 1)));
            }
            if let EdgeLabel::Var(i) = mine {
                if !interior.insert(i) {
                    return Err(SnakeError::DuplicateLabel(i));
                }
            }
        }
        Ok(())
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Mirror image in the diagonal `y = x`.
    fn reflect(&self) -> SnakeGraph {
        SnakeGraph {
            tiles: self
                .tiles
                .iter()
                .map(|t| Tile { label: t.label, edges: TileEdges { n: t.edges.e, e: t.edges.n, s: t.edges.w, w: t.edges.s } })
                .collect(),
            turns: self.turns.iter().map(|t| if *t == Turn::N { Turn::E } else { Turn::N }).collect(),
        }
    }

    /// Rotation by a half turn, which reverses the order of the tiles.
    fn reverse(&self) -> SnakeGraph {
        SnakeGraph {
            tiles: self
                .tiles
                .iter()
                .rev()
                .map(|t| Tile { label: t.label, edges: TileEdges { n: t.edges.s, e: t.edges.w, s: t.edges.n, w: t.edges.e } })
                .collect(),
            turns: self.turns.iter().rev().copied().collect(),
        }
    }

    /// The smallest of the four planar images of the graph. Where possible
    /// the first gluing points east.
    pub fn canonical(&self) -> SnakeGraph {
        let r = self.reverse();
        [self.reflect(), r.reflect(), r, self.clone()].into_iter().min().unwrap_or_else(|| self.clone())
    }

    pub fn is_equivalent(&self, other: &SnakeGraph) -> bool {
        self.canonical() == other.canonical()
    }

    /// Whether tiles `k-1`, `k`, `k+1` lie on a line.
    pub fn is_straight_at(&self, k: usize) -> bool {
        k >= 1 && k + 1 < self.tiles.len() && self.turns[k - 1] == self.turns[k]
    }

    /// Lower-left corner of every tile.
    fn positions(&self) -> Vec<(i64, i64)> {
        let mut pos = vec![(0, 0)];
        for t in &self.turns {
            let (x, y) = pos[pos.len() - 1];
            pos.push(if *t == Turn::E { (x + 1, y) } else { (x, y + 1) });
        }
        pos
    }

    /// Vertices and labelled edges of the planar graph.
    fn graph(&self) -> (usize, Vec<(usize, usize, EdgeLabel)>) {
        let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        let mut edges: BTreeMap<(usize, usize), EdgeLabel> = BTreeMap::new();
        for (t, (x, y)) in self.tiles.iter().zip(self.positions()) {
            let mut id = |p: (i64, i64)| {
                let n = index.len();
                *index.entry(p).or_insert(n)
            };
            let (sw, se, nw, ne) = (id((x, y)), id((x + 1, y)), id((x, y + 1)), id((x + 1, y + 1)));
            for (a, b, l) in [(nw, ne, t.edges.n), (ne, se, t.edges.e), (sw, se, t.edges.s), (sw, nw, t.edges.w)] {
                edges.insert((a.min(b), a.max(b)), l);
            }
        }
        (index.len(), edges.into_iter().map(|((a, b), l)| (a, b, l)).collect())
    }

    /// Perfect matchings as lists of edge labels.
    pub fn matchings(&self) -> Vec<Vec<EdgeLabel>> {
        let (n, edges) = self.graph();
        let mut adj: Vec<Vec<(usize, EdgeLabel)>> = vec![Vec::new(); n];
        for &(a, b, l) in &edges {
            adj[a].push((b, l));
            adj[b].push((a, l));
        }
        let mut out = Vec::new();
        let mut current = Vec::new();
        enumerate_matchings(&adj, &mut vec![false; n], &mut current, &mut out);
        out
    }

    pub fn render_text(&self) -> String {
        let pos = self.positions();
        let width = self.tiles.iter().map(|t| EdgeLabel::Var(t.label).to_string().len()).max().unwrap_or(1) + 2;
        let (cols, rows) = pos.iter().fold((0, 0), |(c, r), &(x, y)| (c.max(x + 1), r.max(y + 1)));
        let (cols, rows) = (cols as usize, rows as usize);
        let (w, h) = (cols * (width + 1) + 1, rows * 2 + 1);
        let mut grid = vec![vec![' '; w]; h];
        for (t, &(x, y)) in self.tiles.iter().zip(&pos) {
            let (x0, y0) = (x as usize * (width + 1), (rows - 1 - y as usize) * 2);
            for c in x0..=x0 + width + 1 {
                for r in [y0, y0 + 2] {
                    grid[r][c] = if c == x0 || c == x0 + width + 1 { '+' } else { '-' };
                }
            }
            grid[y0 + 1][x0] = '|';
            grid[y0 + 1][x0 + width + 1] = '|';
            let label = EdgeLabel::Var(t.label).to_string();
            let start = x0 + 1 + (width - label.len()) / 2;
            for (i, ch) in label.chars().enumerate() {
                grid[y0 + 1][start + i] = ch;
            }
        }
        let mut out: Vec<String> = grid.into_iter().map(|r| r.into_iter().collect::<String>().trim_end().to_string()).collect();
        for t in &self.tiles {
            out.push(format!(
                "{}: n={} e={} s={} w={}",
                EdgeLabel::Var(t.label),
                t.edges.n,
                t.edges.e,
                t.edges.s,
                t.edges.w
            ));
        }
        out.join("\n")
    }
}

fn enumerate_matchings(
    adj: &[Vec<(usize, EdgeLabel)>],
    used: &mut Vec<bool>,
    current: &mut Vec<EdgeLabel>,
    out: &mut Vec<Vec<EdgeLabel>>,
) {
    let Some(v) = used.iter().position(|u| !u) else {
        out.push(current.clone());
        return;
    };
    used[v] = true;
    for &(w, l) in &adj[v] {
        if !used[w] {
            used[w] = true;
            current.push(l);
            enumerate_matchings(adj, used, current, out);
            current.pop();
            used[w] = false;
        }
    }
    used[v] = false;
}

fn count_by_enumeration(adj: &[Vec<usize>], used: &mut Vec<bool>) -> u64 {
    let Some(v) = used.iter().position(|u| !u) else {
        return 1;
    };
    used[v] = true;
    let mut total = 0;
    for &w in &adj[v] {
        if !used[w] {
            used[w] = true;
            total += count_by_enumeration(adj, used);
            used[w] = false;
        }
    }
    used[v] = false;
    total
}

/// Number of perfect matchings by exhaustive search.
pub fn count_matchings_brute_force(g: &SnakeGraph) -> u64 {
    let (n, edges) = g.graph();
    let mut adj = vec![Vec::new(); n];
    for (a, b, _) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    count_by_enumeration(&adj, &mut vec![false; n])
}

/// Number of perfect matchings by the transfer recurrence: with `m_k`
/// matchings of the first `k` tiles and `h_k` of them containing the edge
/// the next tile is glued to, `m_{k+1} = m_k + h_k`, and `h_{k+1}` is `m_k`
/// if the gluing continues straight and `h_k` if it turns.
pub fn count_matchings_transfer(g: &SnakeGraph) -> BigInt {
    let (mut prev, mut m, mut h) = (BigInt::one(), BigInt::from(2), BigInt::one());
    for k in 0..g.turns.len() {
        if k >= 1 && g.turns[k] == g.turns[k - 1] {
            h = prev.clone();
        }
        let next = &m + &h;
        prev = std::mem::replace(&mut m, next);
    }
    m
}

/// Number of perfect matchings; on graphs of at most
/// [`BRUTE_FORCE_TILES`] tiles the recurrence is checked by enumeration.
pub fn count_matchings(g: &SnakeGraph) -> Result<BigInt, SnakeError> {
    let m = count_matchings_transfer(g);
    if g.len() <= BRUTE_FORCE_TILES && BigInt::from(count_matchings_brute_force(g)) != m {
        return Err(SnakeError::Invariant("matching counts disagree".into()));
    }
    Ok(m)
}

/// Sum over perfect matchings of the product of edge labels, divided by the
/// product of tile labels, in `nvars` variables.
pub fn snake_laurent(g: &SnakeGraph, nvars: usize) -> LaurentPolynomial {
    let mut denom = vec![0u32; nvars];
    for t in &g.tiles {
        denom[t.label] += 1;
    }
    let terms = g.matchings().into_iter().map(|labels| {
        let mut exps = vec![0u32; nvars];
        for l in labels {
            if let EdgeLabel::Var(i) = l {
                exps[i] += 1;
            }
        }
        (exps, BigInt::one())
    });
    LaurentPolynomial::from_terms(nvars, terms, denom)
}

pub type Diagonal = (usize, usize);

fn normalized((a, b): Diagonal) -> Diagonal {
    (a.min(b), a.max(b))
}

fn diagonals_cross(d: Diagonal, e: Diagonal) -> bool {
    let ((a, b), (c, d)) = (normalized(d), normalized(e));
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

/// A triangulated polygon with labelled diagonals. Polygon sides are
/// labelled too; for a whole polygon they are all 1, for the piece of a
/// polygon a snake graph lives on they may be variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonTriangulation {
    m: usize,
    diagonals: Vec<Diagonal>,
    labels: Vec<usize>,
    sides: Vec<EdgeLabel>,
}

impl PolygonTriangulation {
    /// Diagonal `k` labelled `x_{k+1}`.
    pub fn new(m: usize, diagonals: Vec<Diagonal>) -> Result<Self, SnakeError> {
        let labels = (0..diagonals.len()).collect();
        Self::with_labels(m, diagonals, labels)
    }

    pub fn with_labels(m: usize, diagonals: Vec<Diagonal>, labels: Vec<usize>) -> Result<Self, SnakeError> {
        if m < 4 {
            return Err(SnakeError::PolygonTooSmall);
        }
        if diagonals.len() != m - 3 {
            return Err(SnakeError::Count { m, expected: m - 3, got: diagonals.len() });
        }
        Self::assemble(m, diagonals, labels, vec![EdgeLabel::One; m])
    }

    fn assemble(m: usize, diagonals: Vec<Diagonal>, labels: Vec<usize>, sides: Vec<EdgeLabel>) -> Result<Self, SnakeError> {
        if labels.len() != diagonals.len() {
            return Err(SnakeError::Invariant("one label per diagonal".into()));
        }
        let diagonals: Vec<Diagonal> = diagonals.into_iter().map(normalized).collect();
        for &(a, b) in &diagonals {
            if b >= m || a == b || is_side(m, a, b) {
                return Err(SnakeError::NotADiagonal(a, b));
            }
        }
        for (i, &d) in diagonals.iter().enumerate() {
            for &e in &diagonals[i + 1..] {
                if d == e || diagonals_cross(d, e) {
                    return Err(SnakeError::Crossing(d.0, d.1, e.0, e.1));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for &l in &labels {
            if !seen.insert(l) {
                return Err(SnakeError::DuplicateLabel(l));
            }
        }
        Ok(PolygonTriangulation { m, diagonals, labels, sides })
    }

    /// All diagonals from vertex 0.
    pub fn fan(m: usize) -> Result<Self, SnakeError> {
        Self::new(m, (2..m.saturating_sub(1)).map(|j| (0, j)).collect())
    }

    pub fn vertices(&self) -> usize {
        self.m
    }

    pub fn diagonals(&self) -> &[Diagonal] {
        &self.diagonals
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn contains(&self, d: Diagonal) -> bool {
        self.diagonals.contains(&normalized(d))
    }

    fn label(&self, u: usize, v: usize) -> Option<EdgeLabel> {
        if is_side(self.m, u, v) {
            let i = if (u + 1) % self.m == v { u } else { v };
            return Some(self.sides[i]);
        }
        let k = self.diagonals.iter().position(|&d| d == normalized((u, v)))?;
        Some(EdgeLabel::Var(self.labels[k]))
    }

    fn connected(&self, u: usize, v: usize) -> bool {
        is_side(self.m, u, v) || self.diagonals.contains(&normalized((u, v)))
    }

    /// The third vertices of the two triangles on diagonal `k`, the first
    /// one inside `(a, b)`.
    fn apexes(&self, k: usize) -> Result<(usize, usize), SnakeError> {
        let (a, b) = self.diagonals[k];
        let candidates: Vec<usize> = (0..self.m).filter(|&w| w != a && w != b && self.connected(a, w) && self.connected(w, b)).collect();
        let inside: Vec<usize> = candidates.iter().copied().filter(|&w| a < w && w < b).collect();
        let outside: Vec<usize> = candidates.iter().copied().filter(|&w| w < a || w > b).collect();
        match (&inside[..], &outside[..]) {
            ([i], [o]) => Ok((*i, *o)),
            _ => Err(SnakeError::Invariant(format!("diagonal ({a}, {b}) does not bound two triangles"))),
        }
    }

    fn check_index(&self, k: usize) -> Result<(), SnakeError> {
        if k < self.diagonals.len() {
            Ok(())
        } else {
            Err(SnakeError::IndexOutOfRange(k))
        }
    }

    /// Replaces diagonal `k` by the other diagonal of its quadrilateral,
    /// labelled `label`.
    pub fn flip_relabel(&self, k: usize, label: usize) -> Result<Self, SnakeError> {
        self.check_index(k)?;
        let (wa, wb) = self.apexes(k)?;
        let mut next = self.clone();
        next.diagonals[k] = normalized((wa, wb));
        next.labels[k] = label;
        if next.labels.iter().filter(|&&l| l == label).count() > 1 {
            return Err(SnakeError::DuplicateLabel(label));
        }
        Ok(next)
    }

    /// Flip keeping the label.
    pub fn flip(&self, k: usize) -> Result<Self, SnakeError> {
        self.check_index(k)?;
        self.flip_relabel(k, self.labels[k])
    }

    /// Opposite sides of the quadrilateral around diagonal `k`, the two
    /// monomials of its exchange relation.
    pub fn exchange_data(&self, k: usize) -> Result<[[EdgeLabel; 2]; 2], SnakeError> {
        self.check_index(k)?;
        let (u, v) = self.diagonals[k];
        let (wa, wb) = self.apexes(k)?;
        let l = |a, b| self.label(a, b).ok_or_else(|| SnakeError::Invariant("unlabelled side".into()));
        Ok([[l(u, wa)?, l(v, wb)?], [l(wa, v)?, l(wb, u)?]])
    }

    /// One vertex per diagonal, a 3-cycle of arrows in each triangle.
    pub fn quiver(&self) -> Quiver {
        let n = self.diagonals.len();
        let mut triangles = BTreeSet::new();
        for k in 0..n {
            let (a, b) = self.diagonals[k];
            if let Ok((wa, wb)) = self.apexes(k) {
                for w in [wa, wb] {
                    let mut t = [a, b, w];
                    t.sort_unstable();
                    triangles.insert(t);
                }
            }
        }
        let mut mat = vec![vec![0i64; n]; n];
        for [a, b, c] in triangles {
            let side = |u: usize, v: usize| self.diagonals.iter().position(|&d| d == normalized((u, v)));
            let s = [side(a, b), side(b, c), side(c, a)];
            for i in 0..3 {
                if let (Some(x), Some(y)) = (s[i], s[(i + 1) % 3]) {
                    mat[x][y] += 1;
                    mat[y][x] -= 1;
                }
            }
        }
        Quiver::from_matrix(mat).unwrap_or_else(|e| unreachable!("polygon quiver: {e}"))
    }
}

fn is_side(m: usize, u: usize, v: usize) -> bool {
    (u + 1) % m == v || (v + 1) % m == u
}

/// The snake graph of `gamma` with respect to `t`.
pub fn build_snake_graph(gamma: Diagonal, t: &PolygonTriangulation) -> Result<SnakeGraph, SnakeError> {
    let (a, b) = gamma;
    let m = t.m;
    if a >= m || b >= m || a == b || is_side(m, a, b) {
        return Err(SnakeError::NotADiagonal(a, b));
    }
    if t.contains(gamma) {
        return Err(SnakeError::ZeroGraph);
    }
    let on_left = |v: usize| {
        let r = (v + m - a) % m;
        r > 0 && r < (b + m - a) % m
    };
    // crossed diagonals as (left end, right end, label), in the order gamma meets them
    let mut crossed: Vec<(usize, usize, usize)> = t
        .diagonals
        .iter()
        .zip(&t.labels)
        .filter(|(d, _)| diagonals_cross(**d, gamma))
        .map(|(&(c, d), &l)| if on_left(c) { (c, d, l) } else { (d, c, l) })
        .collect();
    crossed.sort_by_key(|&(l, r, _)| ((l + m - a) % m, (a + m - r) % m));
    if crossed.is_empty() {
        return Err(SnakeError::Invariant("diagonal crosses nothing".into()));
    }
    let label = |u: usize, v: usize| t.label(u, v).ok_or_else(|| SnakeError::Invariant(format!("({u}, {v}) is not a side")));
    let d = crossed.len();
    let ends = |k: usize| [crossed[k].0, crossed[k].1];
    let (mut nw, mut se, mut sw) = if d >= 2 && ends(1).contains(&crossed[0].1) {
        (crossed[0].1, crossed[0].0, a)
    } else {
        (crossed[0].0, crossed[0].1, a)
    };
    let mut tiles = Vec::with_capacity(d);
    let mut turns = Vec::with_capacity(d - 1);
    for k in 0..d {
        let ne = if k + 1 < d {
            ends(k + 1).into_iter().find(|v| !ends(k).contains(v)).ok_or_else(|| SnakeError::Invariant("crossed diagonals share both ends".into()))?
        } else {
            b
        };
        tiles.push(Tile {
            label: crossed[k].2,
            edges: TileEdges { n: label(nw, ne)?, e: label(ne, se)?, s: label(sw, se)?, w: label(nw, sw)? },
        });
        if k + 1 < d {
            if ends(k + 1).contains(&se) {
                turns.push(Turn::N);
                (nw, se, sw) = (se, ne, nw);
            } else {
                turns.push(Turn::E);
                (nw, se, sw) = (ne, nw, se);
            }
        }
    }
    SnakeGraph::new(tiles, turns)
}

/// The triangulated polygon piece a snake graph lives on, recovered from
/// the graph, with `gamma = (0, end)`.
struct Piece {
    polygon: PolygonTriangulation,
    end: usize,
    /// Diagonal index of each tile.
    tile_diagonal: Vec<usize>,
}

fn recover_piece(g: &SnakeGraph) -> Result<Piece, SnakeError> {
    let d = g.tiles.len();
    // abstract corners: 0 is the start of gamma, 1 and 2 the ends of the first crossed diagonal
    let (mut nw, mut se, mut sw) = (1usize, 2usize, 0usize);
    let mut left = vec![1usize];
    let mut right = vec![2usize];
    let mut is_left: HashMap<usize, bool> = HashMap::from([(1, true), (2, false)]);
    let mut sides: HashMap<(usize, usize), EdgeLabel> = HashMap::new();
    let mut diagonals = Vec::with_capacity(d);
    let mut end = 0;
    for k in 0..d {
        let ne = k + 3;
        let tile = &g.tiles[k];
        for ((u, v), l) in [((nw, ne), tile.edges.n), ((ne, se), tile.edges.e), ((sw, se), tile.edges.s), ((nw, sw), tile.edges.w)] {
            let key = (u.min(v), u.max(v));
            if sides.insert(key, l).is_some_and(|old| old != l) {
                return Err(SnakeError::Invariant("inconsistent edge labels".into()));
            }
        }
        diagonals.push(((nw, se), tile.label));
        if k + 1 < d {
            let partner = if g.turns[k] == Turn::N { se } else { nw };
            let side = !is_left[&partner];
            is_left.insert(ne, side);
            if side {
                left.push(ne);
            } else {
                right.push(ne);
            }
            (nw, se, sw) = if g.turns[k] == Turn::N { (se, ne, nw) } else { (ne, nw, se) };
        } else {
            end = ne;
        }
    }
    let order: Vec<usize> = std::iter::once(0).chain(left.iter().copied()).chain([end]).chain(right.iter().rev().copied()).collect();
    let m = order.len();
    let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut side_labels = Vec::with_capacity(m);
    for i in 0..m {
        let (u, v) = (order[i], order[(i + 1) % m]);
        let l = sides.get(&(u.min(v), u.max(v))).copied().ok_or_else(|| SnakeError::Invariant("missing side".into()))?;
        side_labels.push(l);
    }
    let (diags, labels): (Vec<Diagonal>, Vec<usize>) = diagonals.into_iter().map(|((u, v), l)| ((pos[&u], pos[&v]), l)).unzip();
    let polygon = PolygonTriangulation::assemble(m, diags, labels, side_labels)?;
    Ok(Piece { polygon, end: pos[&end], tile_diagonal: (0..d).collect() })
}

/// A mutation `x_old -> x_new`. `exchange` holds the opposite sides of the
/// quadrilateral being flipped; they are needed when `x_old` labels an
/// edge, because the triangle beyond that edge is not part of the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnakeMutation {
    pub old: usize,
    pub new: usize,
    pub exchange: [[EdgeLabel; 2]; 2],
}

/// Which local move a snake mutation made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationRule {
    /// A first or last tile was removed.
    Rule1Remove,
    /// A tile was glued to a terminal edge.
    Rule1Glue,
    /// The middle of a straight three-tile piece was replaced.
    Rule2aStraight,
    /// The middle of a bent three-tile piece was removed.
    Rule2bRemove,
    /// A tile was inserted at an interior edge.
    Rule2bInsert,
}

fn normalized_exchange(x: [[EdgeLabel; 2]; 2]) -> [[EdgeLabel; 2]; 2] {
    let mut pairs = x.map(|mut p| {
        p.sort();
        p
    });
    pairs.sort();
    pairs
}

/// The snake graph of the same diagonal after mutating the cluster at
/// `mu.old`.
pub fn mutate_snake(g: &SnakeGraph, mu: &SnakeMutation) -> Result<(SnakeGraph, MutationRule), SnakeError> {
    let piece = recover_piece(g)?;
    let d = g.len();
    let gamma = (0, piece.end);
    if let Some(k) = g.tiles.iter().position(|t| t.label == mu.old) {
        if d == 1 {
            return Err(SnakeError::ZeroGraph);
        }
        let di = piece.tile_diagonal[k];
        if normalized_exchange(piece.polygon.exchange_data(di)?) != normalized_exchange(mu.exchange) {
            return Err(SnakeError::ExchangeMismatch);
        }
        let flipped = piece.polygon.flip_relabel(di, mu.new)?;
        let h = build_snake_graph(gamma, &flipped)?;
        let rule = if h.len() == d {
            MutationRule::Rule2aStraight
        } else if k == 0 || k + 1 == d {
            MutationRule::Rule1Remove
        } else {
            MutationRule::Rule2bRemove
        };
        return Ok((h, rule));
    }
    let p = &piece.polygon;
    let j = (0..p.m).find(|&i| p.sides[i] == EdgeLabel::Var(mu.old)).ok_or(SnakeError::LabelAbsent(mu.old))?;
    let terminal = j == 0 || j + 1 == p.m || j + 1 == piece.end || j == piece.end;
    // insert a vertex z after j; the old side (j, j+1) becomes the diagonal (j, j+2)
    let m = p.m + 1;
    let z = j + 1;
    let shift = |v: usize| if v > j { v + 1 } else { v };
    let mut diagonals: Vec<Diagonal> = p.diagonals.iter().map(|&(u, v)| (shift(u), shift(v))).collect();
    let mut labels = p.labels.clone();
    diagonals.push((j, (z + 1) % m));
    labels.push(mu.old);
    let mut sides: Vec<EdgeLabel> = Vec::with_capacity(m);
    sides.extend_from_slice(&p.sides[..=j]);
    sides.push(EdgeLabel::One);
    sides.extend_from_slice(&p.sides[j + 1..]);
    let mut extended = PolygonTriangulation::assemble(m, diagonals, labels, sides)?;
    let k = extended.diagonals.len() - 1;
    let (u, v) = extended.diagonals[k];
    let (wa, wb) = extended.apexes(k)?;
    let w = if wa == z { wb } else { wa };
    let (luw, lwv) = (extended.label(u, w), extended.label(w, v));
    let (Some(luw), Some(lwv)) = (luw, lwv) else {
        return Err(SnakeError::Invariant("unlabelled side".into()));
    };
    let other = |p: [EdgeLabel; 2], x: EdgeLabel| {
        if p[0] == x {
            Some(p[1])
        } else if p[1] == x {
            Some(p[0])
        } else {
            None
        }
    };
    let (lvz, lzu) = (0..2)
        .find_map(|i| Some((other(mu.exchange[i], luw)?, other(mu.exchange[1 - i], lwv)?)))
        .ok_or(SnakeError::ExchangeMismatch)?;
    // sides (u, z) and (z, v) in boundary order
    let (first, second) = if u == j { (lzu, lvz) } else { (lvz, lzu) };
    extended.sides[j] = first;
    extended.sides[z] = second;
    let flipped = extended.flip_relabel(k, mu.new)?;
    let h = build_snake_graph((shift(gamma.0), shift(gamma.1)), &flipped)?;
    let rule = if terminal { MutationRule::Rule1Glue } else { MutationRule::Rule2bInsert };
    Ok((h, rule))
}

/// All triangulations of the `m`-gon reachable by flips from `t`, with the
/// flip path to each.
pub fn triangulations_from(t: &PolygonTriangulation) -> Result<Vec<(PolygonTriangulation, Vec<usize>)>, SnakeError> {
    let key = |t: &PolygonTriangulation| {
        let mut d = t.diagonals.clone();
        d.sort_unstable();
        d
    };
    let mut seen = BTreeSet::from([key(t)]);
    let mut queue = VecDeque::from([(t.clone(), Vec::new())]);
    let mut out = Vec::new();
    while let Some((s, path)) = queue.pop_front() {
        for k in 0..s.diagonals.len() {
            let next = s.flip(k)?;
            if seen.insert(key(&next)) {
                let mut p: Vec<usize> = path.clone();
                p.push(k);
                queue.push_back((next, p));
            }
        }
        out.push((s, path));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{ExchangeWalk, Seed};
    use proptest::prelude::*;

    fn hexagon() -> PolygonTriangulation {
        PolygonTriangulation::new(6, vec![(1, 3), (0, 3), (0, 4)]).unwrap()
    }

    fn fib(n: usize) -> u64 {
        let (mut a, mut b) = (0u64, 1u64);
        for _ in 0..n {
            (a, b) = (b, a + b);
        }
        a
    }

    fn straight(k: usize) -> SnakeGraph {
        let tiles = (0..k)
            .map(|i| {
                let prev = if i == 0 { EdgeLabel::One } else { EdgeLabel::Var(100 + i) };
                let next = if i + 1 == k { EdgeLabel::One } else { EdgeLabel::Var(101 + i) };
                Tile { label: i, edges: TileEdges { n: EdgeLabel::One, e: next, s: EdgeLabel::One, w: prev } }
            })
            .collect();
        SnakeGraph::new(tiles, vec![Turn::E; k - 1]).unwrap()
    }

    #[test]
    fn base_hexagon_quiver() {
        assert_eq!(hexagon().quiver(), Quiver::from_arrows(3, &[(0, 1, 1), (2, 1, 1)]).unwrap());
    }

    #[test]
    fn polygon_validation() {
        assert_eq!(PolygonTriangulation::new(3, vec![]), Err(SnakeError::PolygonTooSmall));
        assert!(matches!(PolygonTriangulation::new(6, vec![(0, 2), (1, 3), (0, 4)]), Err(SnakeError::Crossing(..))));
        assert!(matches!(PolygonTriangulation::new(6, vec![(0, 1), (0, 3), (0, 4)]), Err(SnakeError::NotADiagonal(..))));
        assert!(matches!(PolygonTriangulation::new(6, vec![(0, 3)]), Err(SnakeError::Count { .. })));
    }

    #[test]
    fn fan_examples() {
        let fan = PolygonTriangulation::fan(6).unwrap();
        assert_eq!(fan.diagonals(), &[(0, 2), (0, 3), (0, 4)]);
        let one = build_snake_graph((1, 3), &fan).unwrap();
        assert_eq!((one.len(), count_matchings(&one).unwrap()), (1, BigInt::from(2)));
        let two = build_snake_graph((1, 4), &fan).unwrap();
        assert_eq!((two.len(), count_matchings(&two).unwrap()), (2, BigInt::from(3)));
        let three = build_snake_graph((1, 5), &fan).unwrap();
        assert_eq!(three.len(), 3);
        assert_ne!(three.turns()[0], three.turns()[1]);
        assert_eq!(count_matchings(&three).unwrap(), BigInt::from(4));
        let u = snake_laurent(&three, 3);
        assert_eq!(BigInt::from(u.num_terms()), count_matchings(&three).unwrap());
        assert_eq!(build_snake_graph((0, 3), &fan), Err(SnakeError::ZeroGraph));
        assert_eq!(build_snake_graph((0, 1), &fan), Err(SnakeError::NotADiagonal(0, 1)));
    }

    #[test]
    fn single_tile_shape() {
        let g = build_snake_graph((1, 4), &hexagon()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(snake_laurent(&g, 3), LaurentPolynomial::parse("(x1*x3+1)/x2", 3).unwrap());
    }

    #[test]
    fn straight_strips_count_fibonacci() {
        for k in 1..=20 {
            let g = straight(k);
            assert_eq!(count_matchings_brute_force(&g), fib(k + 2), "{k}");
            assert_eq!(count_matchings(&g).unwrap(), BigInt::from(fib(k + 2)));
        }
    }

    #[test]
    fn zigzag_counts() {
        // a staircase of k tiles has k+1 matchings
        for k in 1..=12 {
            let mut tiles = Vec::new();
            let mut turns = Vec::new();
            for i in 0..k {
                let mut e = TileEdges { n: EdgeLabel::One, e: EdgeLabel::One, s: EdgeLabel::One, w: EdgeLabel::One };
                if i + 1 < k {
                    let t = if i % 2 == 0 { Turn::E } else { Turn::N };
                    if t == Turn::E {
                        e.e = EdgeLabel::Var(100 + i);
                    } else {
                        e.n = EdgeLabel::Var(100 + i);
                    }
                    turns.push(t);
                }
                if i > 0 {
                    let prev = turns[i - 1];
                    if prev == Turn::E {
                        e.w = EdgeLabel::Var(99 + i);
                    } else {
                        e.s = EdgeLabel::Var(99 + i);
                    }
                }
                tiles.push(Tile { label: i, edges: e });
            }
            let g = SnakeGraph::new(tiles, turns).unwrap();
            assert_eq!(count_matchings_brute_force(&g), k as u64 + 1);
            assert_eq!(count_matchings_transfer(&g), BigInt::from(k + 1));
        }
    }

    #[test]
    fn canonical_form() {
        let g = build_snake_graph((1, 5), &PolygonTriangulation::fan(6).unwrap()).unwrap();
        assert!(g.is_equivalent(&g.reflect()));
        assert!(g.is_equivalent(&g.reverse()));
        assert_eq!(g.canonical(), g.reverse().reflect().canonical());
        assert_eq!(g.canonical().turns()[0], Turn::E);
    }

    #[test]
    fn json_shape() {
        let g = build_snake_graph((1, 4), &PolygonTriangulation::fan(6).unwrap()).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["turns"].as_array().unwrap().len(), 1);
        assert!(v["tiles"][0]["label"].as_str().unwrap().starts_with('x'));
        assert!(v["tiles"][0]["edges"]["n"].is_string());
        assert_eq!(serde_json::from_value::<SnakeGraph>(v).unwrap(), g);
    }

    #[test]
    fn ascii_rendering() {
        let g = build_snake_graph((1, 5), &hexagon()).unwrap();
        let text = g.render_text();
        assert!(text.contains('+') && text.contains("x1"));
        assert_eq!(text.lines().filter(|l| l.contains(": n=")).count(), g.len());
    }

    /// Expansion of every diagonal in the cluster of `t`, by walking the
    /// exchange graph in step with flips.
    fn expansions(t: &PolygonTriangulation) -> BTreeMap<Diagonal, LaurentPolynomial> {
        let n = t.diagonals().len();
        let mut out = BTreeMap::new();
        for seed in ExchangeWalk::new(&Seed::base(t.quiver())) {
            let seed = seed.unwrap();
            let mut s = t.clone();
            for &k in seed.path() {
                s = s.flip(k).unwrap();
            }
            assert_eq!(s.quiver(), *seed.quiver());
            for (d, u) in s.diagonals().iter().zip(seed.vars()) {
                assert_eq!(u.nvars(), n);
                if let Some(old) = out.insert(*d, u.clone()) {
                    assert_eq!(&old, u);
                }
            }
        }
        out
    }

    #[test]
    fn laurent_expansions_match_cluster_mutation() {
        let all = triangulations_from(&hexagon()).unwrap();
        assert_eq!(all.len(), 14);
        for (t, _) in &all {
            let exp = expansions(t);
            assert_eq!(exp.len(), 9);
            for (&d, u) in &exp {
                if t.contains(d) {
                    continue;
                }
                let g = build_snake_graph(d, t).unwrap();
                assert_eq!(&snake_laurent(&g, 3), u, "{d:?} in {:?}", t.diagonals());
                let ones = vec![crate::rings::RingElement::int(1); 3];
                assert_eq!(u.specialize(&ones).unwrap().unwrap(), crate::rings::RingElement::int(count_matchings(&g).unwrap()));
            }
        }
    }

    #[test]
    fn larger_polygons_match_cluster_mutation() {
        for m in [7, 8] {
            let t = PolygonTriangulation::new(m, {
                let mut d = vec![(1, 3), (0, 3)];
                d.extend((4..m - 1).map(|j| (0, j)));
                d
            })
            .unwrap();
            let exp = expansions(&t);
            assert_eq!(exp.len(), m * (m - 3) / 2);
            for (&d, u) in &exp {
                if !t.contains(d) {
                    assert_eq!(&snake_laurent(&build_snake_graph(d, &t).unwrap(), m - 3), u);
                }
            }
        }
    }

    fn mutation_for(t: &PolygonTriangulation, k: usize, new: usize) -> SnakeMutation {
        SnakeMutation { old: t.labels()[k], new, exchange: t.exchange_data(k).unwrap() }
    }

    fn check_mutation_oracle(m: usize) -> BTreeMap<MutationRuleKey, usize> {
        let mut seen = BTreeMap::new();
        let base = PolygonTriangulation::fan(m).unwrap();
        let n = m - 3;
        for (t, _) in triangulations_from(&base).unwrap() {
            for k in 0..n {
                let flipped = t.flip_relabel(k, n).unwrap();
                for a in 0..m {
                    for b in a + 2..m {
                        if is_side(m, a, b) || t.contains((a, b)) {
                            continue;
                        }
                        let g = build_snake_graph((a, b), &t).unwrap();
                        let result = mutate_snake(&g, &mutation_for(&t, k, n));
                        let old = t.labels()[k];
                        let mentioned = g.tiles().iter().any(|x| {
                            x.label == old || [x.edges.n, x.edges.e, x.edges.s, x.edges.w].contains(&EdgeLabel::Var(old))
                        });
                        if !mentioned {
                            assert_eq!(result, Err(SnakeError::LabelAbsent(old)));
                            assert_eq!(build_snake_graph((a, b), &flipped).unwrap(), g);
                            continue;
                        }
                        match build_snake_graph((a, b), &flipped) {
                            Ok(want) => {
                                let (got, rule) = result.clone().unwrap_or_else(|e| panic!("{e} on {a},{b} k={k} {:?}", t.diagonals()));
                                assert!(got.is_equivalent(&want), "{a},{b} k={k} {:?}\n{got:?}\n{want:?}", t.diagonals());
                                match rule {
                                    MutationRule::Rule2aStraight => {
                                        let i = g.tiles().iter().position(|x| x.label == t.labels()[k]).unwrap();
                                        assert!(g.is_straight_at(i));
                                    }
                                    MutationRule::Rule2bRemove => {
                                        let i = g.tiles().iter().position(|x| x.label == t.labels()[k]).unwrap();
                                        assert!(!g.is_straight_at(i));
                                    }
                                    MutationRule::Rule2bInsert => {
                                        let i = got.tiles().iter().position(|x| x.label == n).unwrap();
                                        assert!(!got.is_straight_at(i));
                                    }
                                    MutationRule::Rule1Remove => assert_eq!(got.len() + 1, g.len()),
                                    MutationRule::Rule1Glue => assert_eq!(got.len(), g.len() + 1),
                                }
                                *seen.entry(MutationRuleKey(rule)).or_insert(0) += 1;
                            }
                            Err(SnakeError::ZeroGraph) => assert_eq!(result, Err(SnakeError::ZeroGraph)),
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
        seen
    }

    #[derive(Debug, PartialEq, Eq)]
    struct MutationRuleKey(MutationRule);

    impl PartialOrd for MutationRuleKey {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    impl Ord for MutationRuleKey {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            (self.0 as u8).cmp(&(other.0 as u8))
        }
    }

    #[test]
    fn mutation_agrees_with_flipping_in_the_hexagon() {
        let seen = check_mutation_oracle(6);
        assert_eq!(seen.len(), 5, "{seen:?}");
    }

    #[test]
    fn mutation_agrees_with_flipping_in_the_octagon() {
        check_mutation_oracle(8);
    }

    #[test]
    fn terminal_mutation_round_trip() {
        let t = hexagon();
        let g = build_snake_graph((2, 5), &t).unwrap();
        let k = t.labels().iter().position(|&l| l == g.tiles()[0].label).unwrap();
        let (h, rule) = mutate_snake(&g, &mutation_for(&t, k, 3)).unwrap();
        assert_eq!(rule, MutationRule::Rule1Remove);
        let flipped = t.flip_relabel(k, 3).unwrap();
        let back = SnakeMutation { old: 3, new: t.labels()[k], exchange: flipped.exchange_data(k).unwrap() };
        let (g2, rule) = mutate_snake(&h, &back).unwrap();
        assert_eq!(rule, MutationRule::Rule1Glue);
        assert!(g2.is_equivalent(&g));
    }

    #[test]
    fn mutating_an_absent_label_is_an_error() {
        let t = PolygonTriangulation::fan(8).unwrap();
        let g = build_snake_graph((1, 3), &t).unwrap();
        let mu = SnakeMutation { old: 4, new: 5, exchange: [[EdgeLabel::One; 2]; 2] };
        assert_eq!(mutate_snake(&g, &mu), Err(SnakeError::LabelAbsent(4)));
    }

    proptest! {
        #[test]
        fn transfer_matches_enumeration(turns in prop::collection::vec(prop::bool::ANY, 0..14)) {
            let k = turns.len() + 1;
            let turns: Vec<Turn> = turns.into_iter().map(|t| if t { Turn::N } else { Turn::E }).collect();
            let mut tiles = Vec::new();
            for i in 0..k {
                let mut e = TileEdges { n: EdgeLabel::One, e: EdgeLabel::One, s: EdgeLabel::One, w: EdgeLabel::One };
                if i + 1 < k {
                    if turns[i] == Turn::E { e.e = EdgeLabel::Var(100 + i) } else { e.n = EdgeLabel::Var(100 + i) }
                }
                if i > 0 {
                    if turns[i - 1] == Turn::E { e.w = EdgeLabel::Var(99 + i) } else { e.s = EdgeLabel::Var(99 + i) }
                }
                tiles.push(Tile { label: i, edges: e });
            }
            let g = SnakeGraph::new(tiles, turns).unwrap();
            prop_assert_eq!(BigInt::from(count_matchings_brute_force(&g)), count_matchings_transfer(&g));
            prop_assert_eq!(g.matchings().len() as u64, count_matchings_brute_force(&g));
        }
    }
}
