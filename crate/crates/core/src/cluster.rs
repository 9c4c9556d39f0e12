//! Seeds with symbolic cluster variables, mutation, and exchange-graph
//! search.
//!
//! Every seed remembers its cluster as Laurent polynomials in a fixed base
//! cluster `x1..xn` together with the mutation path that produced it.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::laurent::{LaurentError, LaurentPolynomial};
use crate::quiver::{Quiver, QuiverError};
use crate::rings::{RingElement, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClusterError {
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error("exchange relation at direction {0} did not divide exactly; Laurent phenomenon violated")]
    LaurentViolation(usize),
    #[error("not finite type within budget: more than {0} clusters")]
    BudgetExceeded(usize),
    #[error("limit must be at least 1")]
    ZeroLimit,
}

/// Values that can be pushed through an exchange relation.
pub trait ExchangeValue: Clone + PartialEq {
    type Error;

    /// The multiplicative identity of the ring `self` lives in.
    fn unit_like(&self) -> Self;
    fn times(&self, other: &Self) -> Result<Self, Self::Error>;
    fn plus(&self, other: &Self) -> Result<Self, Self::Error>;
    /// Exact quotient, `None` if it leaves the ring.
    fn divide(&self, divisor: &Self) -> Result<Option<Self>, Self::Error>;
    fn is_zero_value(&self) -> bool;
}

impl ExchangeValue for RingElement {
    type Error = RingError;

    fn unit_like(&self) -> Self {
        self.kind().one()
    }
    fn times(&self, other: &Self) -> Result<Self, RingError> {
        self.mul(other)
    }
    fn plus(&self, other: &Self) -> Result<Self, RingError> {
        self.add(other)
    }
    fn divide(&self, divisor: &Self) -> Result<Option<Self>, RingError> {
        self.exact_div(divisor)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

impl ExchangeValue for LaurentPolynomial {
    type Error = LaurentError;

    fn unit_like(&self) -> Self {
        LaurentPolynomial::one(self.nvars())
    }
    fn times(&self, other: &Self) -> Result<Self, LaurentError> {
        self.mul(other)
    }
    fn plus(&self, other: &Self) -> Result<Self, LaurentError> {
        self.add(other)
    }
    fn divide(&self, divisor: &Self) -> Result<Option<Self>, LaurentError> {
        self.exact_div(divisor)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

/// `prod_{k->j} v_j + prod_{j->k} v_j`, the right-hand side of the exchange
/// relation at `k`. Empty products are 1.
pub fn exchange_binomial<V: ExchangeValue>(quiver: &Quiver, values: &[V], k: usize) -> Result<V, V::Error> {
    let one = values[k].unit_like();
    let mut outgoing = one.clone();
    for (j, m) in quiver.out_arrows(k) {
        for _ in 0..m {
            outgoing = outgoing.times(&values[j])?;
        }
    }
    let mut incoming = one;
    for (j, m) in quiver.in_arrows(k) {
        for _ in 0..m {
            incoming = incoming.times(&values[j])?;
        }
    }
    outgoing.plus(&incoming)
}

/// A seed: quiver, cluster expanded in the base variables, and the path of
/// mutation directions from the base seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed {
    quiver: Quiver,
    vars: Vec<LaurentPolynomial>,
    path: Vec<usize>,
}

impl Seed {
    /// The base seed `((x1, ..., xn), quiver)`.
    pub fn base(quiver: Quiver) -> Seed {
        let n = quiver.len();
        Seed { quiver, vars: (0..n).map(|i| LaurentPolynomial::var(n, i)).collect(), path: Vec::new() }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn vars(&self) -> &[LaurentPolynomial] {
        &self.vars
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn rank(&self) -> usize {
        self.quiver.len()
    }

    /// True when the cluster is exactly `(x1, ..., xn)` in order.
    pub fn is_identity(&self) -> bool {
        self.vars.iter().enumerate().all(|(i, v)| v.is_var(i))
    }

    pub fn mutate(&self, k: usize) -> Result<Seed, ClusterError> {
        let quiver = self.quiver.mutate(k)?;
        let numerator = exchange_binomial(&self.quiver, &self.vars, k)?;
        let fresh = numerator.exact_div(&self.vars[k])?.ok_or(ClusterError::LaurentViolation(k))?;
        let mut vars = self.vars.clone();
        vars[k] = fresh;
        let mut path = self.path.clone();
        path.push(k);
        Ok(Seed { quiver, vars, path })
    }

    pub fn mutate_along(&self, path: &[usize]) -> Result<Seed, ClusterError> {
        path.iter().try_fold(self.clone(), |s, &k| s.mutate(k))
    }

    /// Expansions of the base variables `x_i` in the current cluster, found
    /// by replaying the path backwards from a seed whose symbols stand for
    /// the current cluster.
    pub fn expand_base_in_current(&self) -> Result<Vec<LaurentPolynomial>, ClusterError> {
        let mut seed = Seed::base(self.quiver.clone());
        for &k in self.path.iter().rev() {
            seed = seed.mutate(k)?;
        }
        Ok(seed.vars)
    }

    pub fn cluster(&self) -> Cluster {
        Cluster::new(self.vars.clone())
    }
}

/// An unordered cluster: its variables sorted by their canonical text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cluster {
    key: Vec<String>,
    vars: Vec<LaurentPolynomial>,
}

impl Cluster {
    pub fn new(vars: Vec<LaurentPolynomial>) -> Cluster {
        let mut pairs: Vec<(String, LaurentPolynomial)> = vars.into_iter().map(|v| (v.to_string(), v)).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (key, vars) = pairs.into_iter().unzip();
        Cluster { key, vars }
    }

    pub fn vars(&self) -> &[LaurentPolynomial] {
        &self.vars
    }

    pub fn key(&self) -> &[String] {
        &self.key
    }

    pub fn contains(&self, u: &LaurentPolynomial) -> bool {
        self.vars.contains(u)
    }
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key.join(", "))
    }
}

/// Breadth-first walk of the exchange graph: directions `0..n` in order,
/// FIFO queue, one seed per distinct cluster.
pub struct ExchangeWalk {
    queue: VecDeque<Seed>,
    seen: HashSet<Vec<String>>,
    failed: bool,
}

impl ExchangeWalk {
    pub fn new(base: &Seed) -> Self {
        let mut seen = HashSet::new();
        seen.insert(base.cluster().key);
        ExchangeWalk { queue: VecDeque::from([base.clone()]), seen, failed: false }
    }
}

impl Iterator for ExchangeWalk {
    type Item = Result<Seed, ClusterError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let seed = self.queue.pop_front()?;
        for k in 0..seed.rank() {
            match seed.mutate(k) {
                Ok(next) => {
                    if self.seen.insert(next.cluster().key) {
                        self.queue.push_back(next);
                    }
                }
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
        Some(Ok(seed))
    }
}

/// All clusters reachable from `base`, each with the first seed that
/// reached it. Fails if the exchange graph has `limit` or more vertices.
pub fn enumerate_clusters(base: &Seed, limit: usize) -> Result<Vec<(Cluster, Seed)>, ClusterError> {
    if limit == 0 {
        return Err(ClusterError::ZeroLimit);
    }
    let mut out = Vec::new();
    for seed in ExchangeWalk::new(base) {
        let seed = seed?;
        if out.len() + 1 >= limit {
            return Err(ClusterError::BudgetExceeded(limit));
        }
        out.push((seed.cluster(), seed));
    }
    Ok(out)
}
