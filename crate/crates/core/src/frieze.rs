//! Friezes as ring homomorphisms fixed by their values on one cluster.
//!
//! A [`FriezeAssignment`] sends the cluster variables of a seed to nonzero
//! ring elements; every other cluster variable is evaluated through its
//! Laurent expansion. On top of that sit the frieze-vector tests, the
//! box enumeration, and the bijection between clusters and positive
//! frieze vectors together with its inverse.

use num_bigint::BigInt;
use thiserror::Error;

use crate::annulus::{fan_triangulation, unitarize, AnnulusError, MarkedAnnulus, Unitarization};

use crate::cluster::{enumerate_clusters, exchange_binomial, ClusterError, ExchangeWalk, Seed};
use crate::laurent::{LaurentError, LaurentPolynomial};
use crate::rings::{RingElement, RingError, RingKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FriezeError {
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("value {0} is zero")]
    ZeroValue(usize),
    #[error("values live in different rings")]
    MixedRings,
    #[error("base quiver is not acyclic")]
    NotAcyclic,
    #[error("not a frieze vector")]
    NotFriezeVector,
    #[error("target seed is not reachable from the base seed")]
    Unreachable,
    #[error("no cluster with all values 1 among the first {0} clusters")]
    NoUnitCluster(usize),
    #[error("bound must be at least 1")]
    Bound,
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Values `a_1..a_n` on the cluster of `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FriezeAssignment {
    base: Seed,
    values: Vec<RingElement>,
}

impl FriezeAssignment {
    pub fn new(base: Seed, values: Vec<RingElement>) -> Result<Self, FriezeError> {
        if values.len() != base.rank() {
            return Err(FriezeError::Length { expected: base.rank(), got: values.len() });
        }
        if let Some(i) = values.iter().position(RingElement::is_zero) {
            return Err(FriezeError::ZeroValue(i));
        }
        if values.windows(2).any(|w| w[0].kind() != w[1].kind()) {
            return Err(FriezeError::MixedRings);
        }
        Ok(FriezeAssignment { base, values })
    }

    /// Integer values on `base`.
    pub fn integral(base: Seed, values: &[i64]) -> Result<Self, FriezeError> {
        Self::new(base, values.iter().map(|&v| RingElement::int(v)).collect())
    }

    pub fn base(&self) -> &Seed {
        &self.base
    }

    pub fn values(&self) -> &[RingElement] {
        &self.values
    }

    pub fn ring(&self) -> RingKind {
        self.values[0].kind()
    }
}

/// `F(u)` for `u` written in the variables of `F.base`; `None` when the
/// value leaves the ring.
pub fn evaluate_frieze(f: &FriezeAssignment, u: &LaurentPolynomial) -> Result<Option<RingElement>, FriezeError> {
    Ok(u.specialize(&f.values)?)
}

fn binomials(f: &FriezeAssignment) -> Result<Vec<RingElement>, FriezeError> {
    let q = f.base.quiver();
    if !q.is_acyclic() {
        return Err(FriezeError::NotAcyclic);
    }
    (0..q.len()).map(|i| Ok(exchange_binomial(q, &f.values, i)?)).collect()
}

/// Divisibility test for acyclic seeds: `a_i` divides
/// `prod_{i->j} a_j + prod_{j->i} a_j` for every `i`.
pub fn is_frieze_vector_acyclic(f: &FriezeAssignment) -> Result<bool, FriezeError> {
    for (a, num) in f.values.iter().zip(binomials(f)?) {
        if num.exact_div(a)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether every cluster variable reachable from the base takes a value in
/// the ring. Searches at most `limit` clusters.
pub fn is_frieze_vector_exhaustive(f: &FriezeAssignment, limit: usize) -> Result<bool, FriezeError> {
    for (cluster, _) in enumerate_clusters(&f.base, limit)? {
        for u in cluster.vars() {
            if evaluate_frieze(f, u)?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The divisibility test on acyclic seeds, exhaustive search otherwise.
pub fn is_frieze_vector(f: &FriezeAssignment, limit: usize) -> Result<bool, FriezeError> {
    if f.base.quiver().is_acyclic() {
        is_frieze_vector_acyclic(f)
    } else {
        is_frieze_vector_exhaustive(f, limit)
    }
}

/// The quotients `b_i = (prod_{i->j} a_j + prod_{j->i} a_j) / a_i`.
pub fn companion_b_vector(f: &FriezeAssignment) -> Result<Vec<RingElement>, FriezeError> {
    f.values
        .iter()
        .zip(binomials(f)?)
        .map(|(a, num)| num.exact_div(a)?.ok_or(FriezeError::NotFriezeVector))
        .collect()
}

/// Every integer vector in `[1, bound]^n` passing the divisibility test, in
/// lexicographic order.
pub fn enumerate_frieze_vectors(base: &Seed, bound: u64) -> Result<Vec<Vec<RingElement>>, FriezeError> {
    if bound == 0 {
        return Err(FriezeError::Bound);
    }
    if !base.quiver().is_acyclic() {
        return Err(FriezeError::NotAcyclic);
    }
    let n = base.rank();
    let mut current = vec![1u64; n];
    let mut out = Vec::new();
    loop {
        let f = FriezeAssignment::new(base.clone(), current.iter().map(|&v| RingElement::int(v)).collect())?;
        if is_frieze_vector_acyclic(&f)? {
            out.push(f.values);
        }
        let Some(i) = current.iter().rposition(|&v| v < bound) else {
            return Ok(out);
        };
        current[i] += 1;
        for v in &mut current[i + 1..] {
            *v = 1;
        }
    }
}

/// The path taking `base` to `target`, if `target` descends from `base`.
fn relative_path<'a>(base: &Seed, target: &'a Seed) -> Result<&'a [usize], FriezeError> {
    let rel = target.path().strip_prefix(base.path()).ok_or(FriezeError::Unreachable)?;
    let reached = base.mutate_along(rel)?;
    if reached.quiver() != target.quiver() || reached.vars() != target.vars() {
        return Err(FriezeError::Unreachable);
    }
    Ok(rel)
}

/// The frieze vector of `target`: each base variable, written in the
/// cluster of `target`, evaluated at all ones.
pub fn phi(base: &Seed, target: &Seed) -> Result<Vec<RingElement>, FriezeError> {
    let rel = relative_path(base, target)?;
    let mut local = Seed::base(target.quiver().clone());
    for &k in rel.iter().rev() {
        local = local.mutate(k)?;
    }
    let ones = vec![RingElement::int(1); target.rank()];
    local
        .vars()
        .iter()
        .map(|u| u.specialize(&ones)?.ok_or(FriezeError::NotFriezeVector))
        .collect()
}

/// Outcome of a search for a cluster of units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitSearch {
    /// First seed, in breadth-first order, whose values are all units.
    pub seed: Option<Seed>,
    /// Number of clusters examined.
    pub searched: usize,
}

fn search_clusters(
    f: &FriezeAssignment,
    limit: usize,
    accept: impl Fn(&RingElement) -> bool,
) -> Result<UnitSearch, FriezeError> {
    let mut searched = 0;
    for seed in ExchangeWalk::new(&f.base).take(limit) {
        let seed = seed?;
        searched += 1;
        let mut hit = true;
        for u in seed.vars() {
            match evaluate_frieze(f, u)? {
                Some(v) if accept(&v) => {}
                Some(_) => hit = false,
                None => return Err(FriezeError::NotFriezeVector),
            }
        }
        if hit {
            return Ok(UnitSearch { seed: Some(seed), searched });
        }
    }
    Ok(UnitSearch { seed: None, searched })
}

/// Searches the first `limit` clusters for one on which the frieze takes
/// unit values only.
pub fn is_unitary(base: &Seed, values: Vec<RingElement>, limit: usize) -> Result<UnitSearch, FriezeError> {
    let f = FriezeAssignment::new(base.clone(), values)?;
    search_clusters(&f, limit, RingElement::is_unit)
}

/// The cluster on which the frieze with values `a` on `base` is
/// identically 1.
pub fn phi_inverse(base: &Seed, a: Vec<RingElement>, limit: usize) -> Result<Seed, FriezeError> {
    let f = FriezeAssignment::new(base.clone(), a)?;
    search_clusters(&f, limit, RingElement::is_one)?.seed.ok_or(FriezeError::NoUnitCluster(limit))
}

/// The inverse of `phi` in affine type: values on the fan triangulation of
/// `annulus` are flipped down to the triangulation where all values are 1.
pub fn phi_inverse_annulus(annulus: &MarkedAnnulus, a: &[BigInt]) -> Result<Unitarization, AnnulusError> {
    unitarize(&fan_triangulation(annulus), a)
}
