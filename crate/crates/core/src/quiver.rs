//! Quivers without loops or 2-cycles, stored as skew-symmetric exchange
//! matrices.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("vertex {vertex} out of range for a quiver on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("a quiver needs at least one vertex")]
    Empty,
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("arrow multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("exchange matrix is not skew-symmetric at ({0}, {1})")]
    NotSkewSymmetric(usize, usize),
    #[error("quiver has an oriented cycle")]
    Cyclic,
}

/// A quiver on vertices `0..n`. `b[i][j]` counts arrows `i -> j` minus
/// arrows `j -> i`, so 2-cycles cancel by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quiver {
    b: Vec<Vec<i64>>,
}

impl Quiver {
    pub fn new(n: usize) -> Result<Self, QuiverError> {
        if n == 0 {
            return Err(QuiverError::Empty);
        }
        Ok(Quiver { b: vec![vec![0; n]; n] })
    }

    /// Builds a quiver from `(source, target, multiplicity)` triples.
    /// Opposite arrows cancel.
    pub fn from_arrows(n: usize, arrows: &[(usize, usize, i64)]) -> Result<Self, QuiverError> {
        let mut q = Quiver::new(n)?;
        for &(s, t, m) in arrows {
            q.check(s)?;
            q.check(t)?;
            if s == t {
                return Err(QuiverError::Loop(s));
            }
            if m < 1 {
                return Err(QuiverError::ZeroMultiplicity);
            }
            q.b[s][t] += m;
            q.b[t][s] -= m;
        }
        Ok(q)
    }

    pub fn from_matrix(b: Vec<Vec<i64>>) -> Result<Self, QuiverError> {
        let n = b.len();
        if n == 0 {
            return Err(QuiverError::Empty);
        }
        for i in 0..n {
            if b[i].len() != n {
                return Err(QuiverError::NotSkewSymmetric(i, b[i].len()));
            }
            for j in 0..n {
                if b[i][j] != -b[j][i] {
                    return Err(QuiverError::NotSkewSymmetric(i, j));
                }
            }
        }
        Ok(Quiver { b })
    }

    fn check(&self, v: usize) -> Result<(), QuiverError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(QuiverError::VertexOutOfRange { vertex: v, n: self.len() })
        }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed arrow count `i -> j`.
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.b[i][j]
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.b
    }

    /// Arrows leaving `v` as `(target, multiplicity)`.
    pub fn out_arrows(&self, v: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.b[v].iter().enumerate().filter(|(_, &m)| m > 0).map(|(j, &m)| (j, m as u32))
    }

    /// Arrows entering `v` as `(source, multiplicity)`.
    pub fn in_arrows(&self, v: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.b[v].iter().enumerate().filter(|(_, &m)| m < 0).map(|(j, &m)| (j, (-m) as u32))
    }

    /// `(source, target, multiplicity)` triples in row-major order.
    pub fn arrows(&self) -> Vec<(usize, usize, i64)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.b[i][j] > 0 {
                    out.push((i, j, self.b[i][j]));
                }
            }
        }
        out
    }

    /// Matrix mutation at `k`.
    pub fn mutate(&self, k: usize) -> Result<Quiver, QuiverError> {
        self.check(k)?;
        let n = self.len();
        let mut b = self.b.clone();
        for i in 0..n {
            for j in 0..n {
                if i == k || j == k {
                    b[i][j] = -self.b[i][j];
                } else {
                    let bik = self.b[i][k];
                    let bkj = self.b[k][j];
                    b[i][j] = self.b[i][j] + bik.signum() * (bik * bkj).max(0);
                }
            }
        }
        Ok(Quiver { b })
    }

    /// The quiver with every arrow reversed.
    pub fn opposite(&self) -> Quiver {
        Quiver { b: self.b.iter().map(|row| row.iter().map(|v| -v).collect()).collect() }
    }

    pub fn is_source(&self, v: usize) -> bool {
        self.b[v].iter().all(|&m| m >= 0)
    }

    pub fn is_sink(&self, v: usize) -> bool {
        self.b[v].iter().all(|&m| m <= 0)
    }

    pub fn is_acyclic(&self) -> bool {
        self.source_order().is_ok()
    }

    /// Topological order, every vertex before the targets of its arrows.
    /// Ties go to the lowest index.
    pub fn source_order(&self) -> Result<Vec<usize>, QuiverError> {
        let n = self.len();
        let mut indegree: Vec<usize> = (0..n).map(|v| self.in_arrows(v).count()).collect();
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n).find(|&v| !done[v] && indegree[v] == 0).ok_or(QuiverError::Cyclic)?;
            done[next] = true;
            order.push(next);
            for (t, _) in self.out_arrows(next) {
                indegree[t] -= 1;
            }
        }
        Ok(order)
    }

    /// Order in which every vertex is a sink when reached; lowest index first.
    pub fn sink_order(&self) -> Result<Vec<usize>, QuiverError> {
        self.opposite().source_order()
    }
}

#[derive(Serialize, Deserialize)]
struct QuiverJson {
    n: usize,
    arrows: Vec<[i64; 3]>,
}

impl Serialize for Quiver {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        QuiverJson {
            n: self.len(),
            arrows: self.arrows().into_iter().map(|(s, t, m)| [s as i64, t as i64, m]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Quiver {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = QuiverJson::deserialize(deserializer)?;
        let mut arrows = Vec::with_capacity(raw.arrows.len());
        for [s, t, m] in raw.arrows {
            if s < 0 || t < 0 {
                return Err(D::Error::custom("negative vertex index"));
            }
            arrows.push((s as usize, t as usize, m));
        }
        Quiver::from_arrows(raw.n, &arrows).map_err(D::Error::custom)
    }
}
