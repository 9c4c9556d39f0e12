//! Triangulations of the annulus with `p` marked points on the outer
//! boundary and `q` on the inner one, and the descent that flips a
//! positive integral frieze down to a cluster of ones.
//!
//! Everything is computed on the universal cover, a strip whose top edge
//! is the outer boundary and whose bottom edge is the inner one. Outer
//! point `o` lifts to `x = o/p + m`, inner point `i` to `x = i/q + m`. All
//! coordinates are scaled by `pq` so they stay integral.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quiver::Quiver;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnnulusError {
    #[error("annulus needs at least one marked point on each boundary")]
    EmptyBoundary,
    #[error("arc {0} is not valid on this annulus")]
    InvalidArc(Arc),
    #[error("a triangulation of this annulus has {expected} arcs, got {got}")]
    ArcCount { expected: usize, got: usize },
    #[error("arc {0} appears twice")]
    Duplicate(Arc),
    #[error("arcs {0} and {1} cross")]
    Crossing(Arc, Arc),
    #[error("a triangulation needs at least two bridging arcs")]
    TooFewBridging,
    #[error("arc index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("expected {expected} values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("starting triangulation must consist of bridging arcs only")]
    NotAllBridging,
    #[error("input is not a positive integral frieze vector: {0}")]
    NotFrieze(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkedAnnulus {
    p: usize,
    q: usize,
}

impl MarkedAnnulus {
    pub fn new(p: usize, q: usize) -> Result<Self, AnnulusError> {
        if p == 0 || q == 0 {
            return Err(AnnulusError::EmptyBoundary);
        }
        Ok(MarkedAnnulus { p, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn rank(&self) -> usize {
        self.p + self.q
    }

    fn cover(&self) -> Cover {
        Cover { p: self.p as i64, q: self.q as i64 }
    }
}

/// An arc up to isotopy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Arc {
    /// From outer point `outer` to inner point `inner`, turning `winding`
    /// times around the core.
    Bridging { outer: usize, inner: usize, winding: i64 },
    /// From outer point `start` to `start + span`, cutting off the points
    /// in between.
    PeripheralOuter { start: usize, span: usize },
    PeripheralInner { start: usize, span: usize },
}

impl Arc {
    pub fn bridging(outer: usize, inner: usize, winding: i64) -> Arc {
        Arc::Bridging { outer, inner, winding }
    }

    pub fn is_bridging(&self) -> bool {
        matches!(self, Arc::Bridging { .. })
    }

    pub fn validate(&self, a: &MarkedAnnulus) -> Result<(), AnnulusError> {
        let ok = match *self {
            Arc::Bridging { outer, inner, .. } => outer < a.p && inner < a.q,
            Arc::PeripheralOuter { start, span } => start < a.p && (2..=a.p).contains(&span),
            Arc::PeripheralInner { start, span } => start < a.q && (2..=a.q).contains(&span),
        };
        if ok {
            Ok(())
        } else {
            Err(AnnulusError::InvalidArc(*self))
        }
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arc::Bridging { outer, inner, winding } => write!(f, "B({outer},{inner},{winding})"),
            Arc::PeripheralOuter { start, span } => write!(f, "PO({start},{span})"),
            Arc::PeripheralInner { start, span } => write!(f, "PI({start},{span})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcClass {
    Transjective,
    Regular,
}

pub fn classify_arc(arc: &Arc) -> ArcClass {
    if arc.is_bridging() {
        ArcClass::Transjective
    } else {
        ArcClass::Regular
    }
}

/// A lifted marked point: the `idx`-th point on the top or bottom line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Pt {
    top: bool,
    idx: i64,
}

#[derive(Debug, Clone, Copy)]
struct Cover {
    p: i64,
    q: i64,
}

impl Cover {
    fn period(&self) -> i64 {
        self.p * self.q
    }

    fn x(&self, pt: Pt) -> i64 {
        if pt.top {
            pt.idx * self.q
        } else {
            pt.idx * self.p
        }
    }

    /// Position along the boundary of the strip read as a circle: the top
    /// line left to right, then the bottom line right to left.
    fn key(&self, pt: Pt) -> (u8, i64) {
        if pt.top {
            (0, self.x(pt))
        } else {
            (1, -self.x(pt))
        }
    }

    fn shift(&self, pt: Pt, m: i64) -> Pt {
        let step = if pt.top { self.p } else { self.q };
        Pt { top: pt.top, idx: pt.idx + m * step }
    }

    fn lift(&self, arc: &Arc) -> (Pt, Pt) {
        match *arc {
            Arc::Bridging { outer, inner, winding } => {
                (Pt { top: true, idx: outer as i64 }, Pt { top: false, idx: inner as i64 + winding * self.q })
            }
            Arc::PeripheralOuter { start, span } => {
                (Pt { top: true, idx: start as i64 }, Pt { top: true, idx: (start + span) as i64 })
            }
            Arc::PeripheralInner { start, span } => {
                (Pt { top: false, idx: start as i64 }, Pt { top: false, idx: (start + span) as i64 })
            }
        }
    }

    fn range(&self, (a, b): (Pt, Pt)) -> (i64, i64) {
        let (xa, xb) = (self.x(a), self.x(b));
        (xa.min(xb), xa.max(xb))
    }

    /// The arc a lifted chord projects to, `None` for boundary segments and
    /// chords that are not simple arcs.
    fn arc_of(&self, a: Pt, b: Pt) -> Option<Arc> {
        match (a.top, b.top) {
            (true, false) | (false, true) => {
                let (t, s) = if a.top { (a, b) } else { (b, a) };
                let m = t.idx.div_euclid(self.p);
                let bottom = s.idx - m * self.q;
                Some(Arc::Bridging {
                    outer: t.idx.rem_euclid(self.p) as usize,
                    inner: bottom.rem_euclid(self.q) as usize,
                    winding: bottom.div_euclid(self.q),
                })
            }
            (top, _) => {
                let n = if top { self.p } else { self.q };
                let (lo, hi) = (a.idx.min(b.idx), a.idx.max(b.idx));
                let span = hi - lo;
                if span < 2 || span > n {
                    return None;
                }
                let start = lo.rem_euclid(n) as usize;
                let span = span as usize;
                Some(if top { Arc::PeripheralOuter { start, span } } else { Arc::PeripheralInner { start, span } })
            }
        }
    }

    /// Whether two lifted chords cross in the interior of the strip.
    fn chords_cross(&self, (a, b): (Pt, Pt), (c, d): (Pt, Pt)) -> bool {
        let (mut k1, mut k2) = (self.key(a), self.key(b));
        let (mut k3, mut k4) = (self.key(c), self.key(d));
        if k1 > k2 {
            std::mem::swap(&mut k1, &mut k2);
        }
        if k3 > k4 {
            std::mem::swap(&mut k3, &mut k4);
        }
        (k1 < k3 && k3 < k2 && k2 < k4) || (k3 < k1 && k1 < k4 && k4 < k2)
    }

    /// Deck translates `m` for which `chord` shifted by `m` may meet the
    /// x-interval `[lo, hi]`.
    fn translates(&self, chord: (Pt, Pt), lo: i64, hi: i64) -> std::ops::RangeInclusive<i64> {
        let (a, b) = self.range(chord);
        let l = self.period();
        (lo - b).div_euclid(l) - 1..=ceil_div(hi - a, l) + 1
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -(-a).div_euclid(b)
}

/// Whether two arcs cross in the annulus.
pub fn arcs_cross(alpha: &Arc, beta: &Arc, annulus: &MarkedAnnulus) -> Result<bool, AnnulusError> {
    alpha.validate(annulus)?;
    beta.validate(annulus)?;
    let cover = annulus.cover();
    let fixed = cover.lift(beta);
    let moving = cover.lift(alpha);
    let (lo, hi) = cover.range(fixed);
    Ok(cover
        .translates(moving, lo, hi)
        .any(|m| cover.chords_cross((cover.shift(moving.0, m), cover.shift(moving.1, m)), fixed)))
}

/// A side of a triangle or quadrilateral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Arc(usize),
    Boundary,
}

/// The quadrilateral around an arc `u v`, with the two triangles
/// `u v w_a` and `v u w_b`. Sides are listed as `u w_a`, `w_a v`, `v w_b`,
/// `w_b u`, so sides 0, 2 and sides 1, 3 are the opposite pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quadrilateral {
    pub sides: [Side; 4],
    /// Arcs of the four sides, `None` for boundary segments.
    pub side_arcs: [Option<Arc>; 4],
    /// The other diagonal.
    pub flipped: Arc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TriangulationRepr", into = "TriangulationRepr")]
pub struct Triangulation {
    annulus: MarkedAnnulus,
    arcs: Vec<Arc>,
}

#[derive(Serialize, Deserialize)]
struct TriangulationRepr {
    p: usize,
    q: usize,
    arcs: Vec<Arc>,
}

impl TryFrom<TriangulationRepr> for Triangulation {
    type Error = AnnulusError;

    fn try_from(r: TriangulationRepr) -> Result<Self, AnnulusError> {
        Triangulation::new(MarkedAnnulus::new(r.p, r.q)?, r.arcs)
    }
}

impl From<Triangulation> for TriangulationRepr {
    fn from(t: Triangulation) -> Self {
        TriangulationRepr { p: t.annulus.p, q: t.annulus.q, arcs: t.arcs }
    }
}

/// Lifted edges near one fundamental domain.
struct Faces {
    cover: Cover,
    sides: HashMap<(Pt, Pt), Side>,
    adjacent: HashMap<Pt, Vec<Pt>>,
}

fn ordered(a: Pt, b: Pt) -> (Pt, Pt) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Faces {
    fn new(t: &Triangulation) -> Faces {
        let cover = t.annulus.cover();
        let l = cover.period();
        let extent = t
            .arcs
            .iter()
            .map(|a| {
                let (lo, hi) = cover.range(cover.lift(a));
                hi - lo
            })
            .max()
            .unwrap_or(0)
            .max(l);
        let (lo, hi) = (-2 * extent - l, 3 * extent + 2 * l);
        let mut faces = Faces { cover, sides: HashMap::new(), adjacent: HashMap::new() };
        for (k, arc) in t.arcs.iter().enumerate() {
            let chord = cover.lift(arc);
            for m in cover.translates(chord, lo, hi) {
                faces.insert(cover.shift(chord.0, m), cover.shift(chord.1, m), Side::Arc(k));
            }
        }
        for (top, step) in [(true, cover.q), (false, cover.p)] {
            for idx in lo.div_euclid(step) - 1..=ceil_div(hi, step) + 1 {
                faces.insert(Pt { top, idx }, Pt { top, idx: idx + 1 }, Side::Boundary);
            }
        }
        faces
    }

    fn insert(&mut self, a: Pt, b: Pt, side: Side) {
        self.sides.insert(ordered(a, b), side);
        self.adjacent.entry(a).or_default().push(b);
        self.adjacent.entry(b).or_default().push(a);
    }

    fn side(&self, a: Pt, b: Pt) -> Option<Side> {
        self.sides.get(&ordered(a, b)).copied()
    }

    /// The apex of the triangle on edge `u v` (with `key(u) < key(v)`)
    /// lying between them in boundary order (`inside`) or outside.
    fn apex(&self, u: Pt, v: Pt, inside: bool) -> Result<Pt, AnnulusError> {
        let (ku, kv) = (self.cover.key(u), self.cover.key(v));
        let mut found = None;
        for &w in self.adjacent.get(&u).into_iter().flatten() {
            let kw = self.cover.key(w);
            let between = ku < kw && kw < kv;
            if between == inside && w != v && self.side(w, v).is_some() {
                if found.is_some_and(|f| f != w) {
                    return Err(AnnulusError::Invariant("two triangles on one side of an arc".into()));
                }
                found = Some(w);
            }
        }
        found.ok_or_else(|| AnnulusError::Invariant("no triangle on one side of an arc".into()))
    }

    /// The arc `k` lifted with its left end in `[0, period)`, oriented by
    /// boundary order.
    fn base_chord(&self, arc: &Arc) -> (Pt, Pt) {
        let cover = self.cover;
        let chord = cover.lift(arc);
        let (lo, _) = cover.range(chord);
        let m = -lo.div_euclid(cover.period());
        let (a, b) = (cover.shift(chord.0, m), cover.shift(chord.1, m));
        if cover.key(a) < cover.key(b) {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn sides_of(&self, a: Pt, b: Pt) -> Result<Side, AnnulusError> {
        self.side(a, b).ok_or_else(|| AnnulusError::Invariant("missing triangle side".into()))
    }
}

impl Triangulation {
    pub fn new(annulus: MarkedAnnulus, arcs: Vec<Arc>) -> Result<Self, AnnulusError> {
        if arcs.len() != annulus.rank() {
            return Err(AnnulusError::ArcCount { expected: annulus.rank(), got: arcs.len() });
        }
        for a in &arcs {
            a.validate(&annulus)?;
        }
        for (i, a) in arcs.iter().enumerate() {
            for b in &arcs[i + 1..] {
                if a == b {
                    return Err(AnnulusError::Duplicate(*a));
                }
                if arcs_cross(a, b, &annulus)? {
                    return Err(AnnulusError::Crossing(*a, *b));
                }
            }
        }
        if arcs.iter().filter(|a| a.is_bridging()).count() < 2 {
            return Err(AnnulusError::TooFewBridging);
        }
        Ok(Triangulation { annulus, arcs })
    }

    pub fn annulus(&self) -> &MarkedAnnulus {
        &self.annulus
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn is_all_bridging(&self) -> bool {
        self.arcs.iter().all(Arc::is_bridging)
    }

    fn check_index(&self, k: usize) -> Result<(), AnnulusError> {
        if k < self.arcs.len() {
            Ok(())
        } else {
            Err(AnnulusError::IndexOutOfRange(k))
        }
    }

    fn quadrilateral_in(&self, faces: &Faces, k: usize) -> Result<Quadrilateral, AnnulusError> {
        let (u, v) = faces.base_chord(&self.arcs[k]);
        let wa = faces.apex(u, v, true)?;
        let wb = faces.apex(u, v, false)?;
        let sides = [faces.sides_of(u, wa)?, faces.sides_of(wa, v)?, faces.sides_of(v, wb)?, faces.sides_of(wb, u)?];
        let flipped = faces
            .cover
            .arc_of(wa, wb)
            .ok_or_else(|| AnnulusError::Invariant("flipped diagonal is not an arc".into()))?;
        let side_arcs = sides.map(|s| match s {
            Side::Arc(j) => Some(self.arcs[j]),
            Side::Boundary => None,
        });
        Ok(Quadrilateral { sides, side_arcs, flipped })
    }

    pub fn quadrilateral(&self, k: usize) -> Result<Quadrilateral, AnnulusError> {
        self.check_index(k)?;
        self.quadrilateral_in(&Faces::new(self), k)
    }

    /// Replaces arc `k` by the other diagonal of its quadrilateral.
    pub fn flip(&self, k: usize) -> Result<(Triangulation, Arc), AnnulusError> {
        let quad = self.quadrilateral(k)?;
        let mut arcs = self.arcs.clone();
        arcs[k] = quad.flipped;
        Ok((Triangulation { annulus: self.annulus, arcs }, quad.flipped))
    }

    /// The quiver with one vertex per arc and a 3-cycle of arrows in each
    /// triangle, boundary segments left out.
    pub fn quiver(&self) -> Quiver {
        let faces = Faces::new(self);
        let cover = faces.cover;
        let l = cover.period();
        let mut triangles: BTreeMap<[Pt; 3], [Side; 3]> = BTreeMap::new();
        for arc in &self.arcs {
            let (u, v) = faces.base_chord(arc);
            for inside in [true, false] {
                let Ok(w) = faces.apex(u, v, inside) else {
                    unreachable!("triangulation has an arc without two triangles")
                };
                let mut pts = [u, v, w];
                let lo = pts.iter().map(|&p| cover.x(p)).min().unwrap_or(0);
                let m = -lo.div_euclid(l);
                pts = pts.map(|p| cover.shift(p, m));
                pts.sort_by_key(|&p| cover.key(p));
                let [a, b, c] = pts;
                triangles.entry(pts).or_insert_with(|| {
                    [a, b, c]
                        .iter()
                        .zip([b, c, a])
                        .map(|(&s, t)| faces.side(cover.shift(s, -m), cover.shift(t, -m)).unwrap_or(Side::Boundary))
                        .collect::<Vec<_>>()
                        .try_into()
                        .unwrap_or([Side::Boundary; 3])
                });
            }
        }
        let n = self.arcs.len();
        let mut b = vec![vec![0i64; n]; n];
        for sides in triangles.values() {
            for i in 0..3 {
                if let (Side::Arc(s), Side::Arc(t)) = (sides[i], sides[(i + 1) % 3]) {
                    if s != t {
                        b[s][t] += 1;
                        b[t][s] -= 1;
                    }
                }
            }
        }
        Quiver::from_matrix(b).unwrap_or_else(|e| unreachable!("triangulation quiver: {e}"))
    }
}

pub fn quiver_of(t: &Triangulation) -> Quiver {
    t.quiver()
}

/// The all-bridging triangulation fanning out from outer point 0 to every
/// inner point, then from every outer point to the last inner point.
pub fn fan_triangulation(annulus: &MarkedAnnulus) -> Triangulation {
    let cover = annulus.cover();
    let (p, q) = (annulus.p as i64, annulus.q as i64);
    let path = (0..=q).map(|b| (0, b)).chain((1..p).map(|t| (t, q)));
    let arcs = path
        .map(|(t, b)| cover.arc_of(Pt { top: true, idx: t }, Pt { top: false, idx: b }).unwrap_or_else(|| unreachable!()))
        .collect();
    Triangulation { annulus: *annulus, arcs }
}

fn side_value(side: Side, values: &[BigInt]) -> BigInt {
    match side {
        Side::Arc(j) => values[j].clone(),
        Side::Boundary => BigInt::one(),
    }
}

/// One flip together with the exchanged value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exchange {
    pub triangulation: Triangulation,
    pub quadrilateral: Quadrilateral,
    pub value: BigInt,
}

/// Flips arc `k` and computes its new value from
/// `x_k x_k' = x(u w_a) x(v w_b) + x(w_a v) x(w_b u)`, boundary sides
/// counting as 1.
pub fn exchange(t: &Triangulation, values: &[BigInt], k: usize) -> Result<Exchange, AnnulusError> {
    if values.len() != t.len() {
        return Err(AnnulusError::ValueCount { expected: t.len(), got: values.len() });
    }
    let quadrilateral = t.quadrilateral(k)?;
    let s = quadrilateral.sides.map(|s| side_value(s, values));
    let num = &s[0] * &s[2] + &s[1] * &s[3];
    if values[k].is_zero() {
        return Err(AnnulusError::NotFrieze(format!("zero value on arc {k}")));
    }
    let (value, rem) = num.div_rem(&values[k]);
    if !rem.is_zero() {
        return Err(AnnulusError::NotFrieze(format!("exchange at arc {k} is not integral")));
    }
    let mut arcs = t.arcs.clone();
    arcs[k] = quadrilateral.flipped;
    Ok(Exchange { triangulation: Triangulation { annulus: t.annulus, arcs }, quadrilateral, value })
}

/// Applies a path of flips, carrying the frieze values along.
pub fn transport(
    t: &Triangulation,
    values: &[BigInt],
    path: &[usize],
) -> Result<(Triangulation, Vec<BigInt>), AnnulusError> {
    let mut t = t.clone();
    let mut values = values.to_vec();
    for &k in path {
        let ex = exchange(&t, &values, k)?;
        t = ex.triangulation;
        values[k] = ex.value;
    }
    Ok((t, values))
}

/// Whether peripheral arc `a` lies strictly inside peripheral arc `b`.
fn nested_in(cover: &Cover, a: &Arc, b: &Arc) -> bool {
    let ((a0, a1), (b0, b1)) = (cover.lift(a), cover.lift(b));
    if a0.top != b0.top || a == b {
        return false;
    }
    let (lo, hi) = cover.range((b0, b1));
    cover.translates((a0, a1), lo, hi).any(|m| {
        let (s, e) = cover.range((cover.shift(a0, m), cover.shift(a1, m)));
        lo <= s && e <= hi
    })
}

/// Flips peripheral arcs not nested inside any other peripheral arc until
/// only bridging arcs remain. Returns the flips made.
pub fn reduce_to_bridging(
    t: &Triangulation,
    values: &[BigInt],
) -> Result<(Triangulation, Vec<BigInt>, Vec<usize>), AnnulusError> {
    let cover = t.annulus.cover();
    let mut t = t.clone();
    let mut values = values.to_vec();
    let mut flips = Vec::new();
    loop {
        let outermost = (0..t.len()).find(|&k| {
            !t.arcs[k].is_bridging() && !t.arcs.iter().any(|b| !b.is_bridging() && nested_in(&cover, &t.arcs[k], b))
        });
        let Some(k) = outermost else {
            return Ok((t, values, flips));
        };
        let ex = exchange(&t, &values, k)?;
        if !ex.quadrilateral.flipped.is_bridging() {
            return Err(AnnulusError::Invariant("outermost peripheral arc flipped to a peripheral arc".into()));
        }
        if !ex.value.is_positive() {
            return Err(AnnulusError::NotFrieze(format!("non-positive value at arc {k}")));
        }
        t = ex.triangulation;
        values[k] = ex.value;
        flips.push(k);
    }
}

/// Result of the descent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unitarization {
    /// The triangulation on which every value is 1.
    pub triangulation: Triangulation,
    pub flips: Vec<usize>,
    /// The arc created by each flip.
    pub new_arcs: Vec<Arc>,
    /// Values before the first flip and after each flip.
    #[serde(serialize_with = "serialize_trace")]
    pub trace: Vec<Vec<BigInt>>,
}

fn serialize_trace<S: serde::Serializer>(trace: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
    let text: Vec<Vec<String>> = trace.iter().map(|row| row.iter().map(BigInt::to_string).collect()).collect();
    text.serialize(s)
}

/// Repeatedly flips an arc of maximal value (lowest index on ties) until
/// every value is 1. Each flip must strictly lower the value, and a flip
/// producing a peripheral arc must produce the value 1.
pub fn unitarize(t0: &Triangulation, values: &[BigInt]) -> Result<Unitarization, AnnulusError> {
    if !t0.is_all_bridging() {
        return Err(AnnulusError::NotAllBridging);
    }
    if values.len() != t0.len() {
        return Err(AnnulusError::ValueCount { expected: t0.len(), got: values.len() });
    }
    if let Some(k) = values.iter().position(|v| !v.is_positive()) {
        return Err(AnnulusError::NotFrieze(format!("value on arc {k} is not positive")));
    }
    let mut t = t0.clone();
    let mut values = values.to_vec();
    let mut out = Unitarization { triangulation: t0.clone(), flips: Vec::new(), new_arcs: Vec::new(), trace: vec![values.clone()] };
    loop {
        let (k, max) = values
            .iter()
            .enumerate()
            .fold((0, &values[0]), |best, (i, v)| if v > best.1 { (i, v) } else { best });
        if max.is_one() {
            out.triangulation = t;
            return Ok(out);
        }
        if !t.arcs[k].is_bridging() {
            return Err(AnnulusError::NotFrieze(format!("peripheral arc {k} carries a value above 1")));
        }
        let ex = exchange(&t, &values, k)?;
        check_descent_step(&ex, &values, k)?;
        if !ex.value.is_positive() || ex.value >= values[k] {
            return Err(AnnulusError::NotFrieze(format!("flip at arc {k} does not decrease its value")));
        }
        if !ex.quadrilateral.flipped.is_bridging() && !ex.value.is_one() {
            return Err(AnnulusError::NotFrieze(format!("new peripheral arc at {k} has value {}", ex.value)));
        }
        out.new_arcs.push(ex.quadrilateral.flipped);
        out.flips.push(k);
        t = ex.triangulation;
        values[k] = ex.value;
        out.trace.push(values.clone());
    }
}

/// For a bridging arc with exactly two bridging sides: the new arc is
/// bridging iff those sides are opposite, and then the new value is
/// `(F(a) F(c) + 1) / F(x)`.
fn check_descent_step(ex: &Exchange, values: &[BigInt], k: usize) -> Result<(), AnnulusError> {
    let bridging: Vec<usize> =
        (0..4).filter(|&i| ex.quadrilateral.side_arcs[i].is_some_and(|a| a.is_bridging())).collect();
    let [i, j] = bridging[..] else {
        return Err(AnnulusError::Invariant(format!("arc {k} has {} bridging sides", bridging.len())));
    };
    let opposite = (j - i) % 2 == 0;
    if opposite != ex.quadrilateral.flipped.is_bridging() {
        return Err(AnnulusError::Invariant(format!("flip at arc {k} contradicts the side classification")));
    }
    if opposite {
        let s = ex.quadrilateral.sides;
        let prod = side_value(s[i], values) * side_value(s[j], values) + 1;
        if prod != &ex.value * &values[k] {
            return Err(AnnulusError::NotFrieze(format!("flip at arc {k}: regular sides are not 1")));
        }
    }
    Ok(())
}
