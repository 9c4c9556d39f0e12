//! Exact integral-domain arithmetic.
//!
//! Three rings are supported, selected at runtime by [`RingKind`]:
//!
//! * `Z`: arbitrary precision integers,
//! * `Zi`: Gaussian integers `a + b i`,
//! * `Zsqrt-3half`: the ring of integers of `Q(sqrt(-3))`, stored as
//!   `(a + b s) / 2` with `s = sqrt(-3)` and `a ≡ b (mod 2)`.
//!
//! Every operation is exact. Division returns `None` when the quotient
//! leaves the ring.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("ring mismatch: {0} vs {1}")]
    Mismatch(RingKind, RingKind),
    #[error("positivity is only defined over Z, got an element of {0}")]
    PositivityUndefined(RingKind),
    #[error("parity violated: (a + b s)/2 needs a ≡ b (mod 2), got a={0}, b={1}")]
    Parity(BigInt, BigInt),
    #[error("cannot parse {literal:?} as an element of {ring}")]
    Parse { ring: RingKind, literal: String },
}

/// Which integral domain an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingKind {
    Z,
    Zi,
    ZSqrtMinus3Half,
}

impl RingKind {
    pub fn tag(self) -> &'static str {
        match self {
            RingKind::Z => "Z",
            RingKind::Zi => "Zi",
            RingKind::ZSqrtMinus3Half => "Zsqrt-3half",
        }
    }

    pub fn zero(self) -> RingElement {
        self.from_int(0)
    }

    pub fn one(self) -> RingElement {
        self.from_int(1)
    }

    /// Embeds an ordinary integer.
    pub fn from_int(self, v: impl Into<BigInt>) -> RingElement {
        let v = v.into();
        match self {
            RingKind::Z => RingElement::Integer(v),
            RingKind::Zi => RingElement::Gaussian { a: v, b: BigInt::zero() },
            RingKind::ZSqrtMinus3Half => RingElement::QuadraticD3 { a: v * 2, b: BigInt::zero() },
        }
    }

    /// Parses a ring literal: `-7` over Z, `a+bi` over Z[i], `(a+b s)/2` over
    /// the quadratic ring. Plain integers are accepted in every ring.
    pub fn parse(self, literal: &str) -> Result<RingElement, RingError> {
        let err = || RingError::Parse { ring: self, literal: literal.to_string() };
        let compact: String = literal.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err());
        }
        match self {
            RingKind::Z => BigInt::from_str(&compact).map(RingElement::Integer).map_err(|_| err()),
            RingKind::Zi => {
                let (a, b) = parse_linear(&compact, 'i').ok_or_else(err)?;
                Ok(RingElement::Gaussian { a, b })
            }
            RingKind::ZSqrtMinus3Half => {
                if let Some(inner) = compact.strip_prefix('(').and_then(|r| r.strip_suffix(")/2")) {
                    let (a, b) = parse_linear(inner, 's').ok_or_else(err)?;
                    RingElement::quadratic(a, b)
                } else {
                    // whole-number form `a+bs` means (2a + 2b s)/2
                    let (a, b) = parse_linear(&compact, 's').ok_or_else(err)?;
                    RingElement::quadratic(a * 2, b * 2)
                }
            }
        }
    }
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Z" => Ok(RingKind::Z),
            "Zi" => Ok(RingKind::Zi),
            "Zsqrt-3half" => Ok(RingKind::ZSqrtMinus3Half),
            other => Err(format!("unknown ring {other:?}; expected Z, Zi or Zsqrt-3half")),
        }
    }
}

/// Parses `a`, `bX`, `a+bX`, `a-X`, `X` where `X` is the given unit symbol.
fn parse_linear(s: &str, unit: char) -> Option<(BigInt, BigInt)> {
    if !s.ends_with(unit) {
        return BigInt::from_str(s).ok().map(|a| (a, BigInt::zero()));
    }
    let body = &s[..s.len() - unit.len_utf8()];
    // split at the last sign that is not the leading one
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(_, c)| c == '+' || c == '-')
        .map(|(i, _)| i)
        .last();
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let re = BigInt::from_str(re).ok()?;
    let im = match im {
        "" | "+" => BigInt::one(),
        "-" => -BigInt::one(),
        other => BigInt::from_str(other.strip_prefix('+').unwrap_or(other)).ok()?,
    };
    Some((re, im))
}

/// An element of one of the supported integral domains.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RingElement {
    Integer(BigInt),
    /// `a + b i`
    Gaussian { a: BigInt, b: BigInt },
    /// `(a + b sqrt(-3)) / 2` with `a ≡ b (mod 2)`.
    QuadraticD3 { a: BigInt, b: BigInt },
}

impl RingElement {
    pub fn int(v: impl Into<BigInt>) -> Self {
        RingElement::Integer(v.into())
    }

    pub fn gaussian(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        RingElement::Gaussian { a: a.into(), b: b.into() }
    }

    /// Builds `(a + b sqrt(-3))/2`, checking the parity constraint.
    pub fn quadratic(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Result<Self, RingError> {
        let (a, b) = (a.into(), b.into());
        if a.is_even() != b.is_even() {
            return Err(RingError::Parity(a, b));
        }
        Ok(RingElement::QuadraticD3 { a, b })
    }

    pub fn kind(&self) -> RingKind {
        match self {
            RingElement::Integer(_) => RingKind::Z,
            RingElement::Gaussian { .. } => RingKind::Zi,
            RingElement::QuadraticD3 { .. } => RingKind::ZSqrtMinus3Half,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RingElement::Integer(v) => v.is_zero(),
            RingElement::Gaussian { a, b } | RingElement::QuadraticD3 { a, b } => a.is_zero() && b.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == self.kind().one()
    }

    pub fn as_integer(&self) -> Option<&BigInt> {
        match self {
            RingElement::Integer(v) => Some(v),
            _ => None,
        }
    }

    fn same_ring(&self, other: &Self) -> Result<RingKind, RingError> {
        if self.kind() == other.kind() {
            Ok(self.kind())
        } else {
            Err(RingError::Mismatch(self.kind(), other.kind()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        self.same_ring(other)?;
        Ok(match (self, other) {
            (RingElement::Integer(x), RingElement::Integer(y)) => RingElement::Integer(x + y),
            (RingElement::Gaussian { a, b }, RingElement::Gaussian { a: c, b: d }) => {
                RingElement::Gaussian { a: a + c, b: b + d }
            }
            (RingElement::QuadraticD3 { a, b }, RingElement::QuadraticD3 { a: c, b: d }) => {
                RingElement::QuadraticD3 { a: a + c, b: b + d }
            }
            _ => unreachable!(),
        })
    }

    pub fn neg(&self) -> Self {
        match self {
            RingElement::Integer(x) => RingElement::Integer(-x),
            RingElement::Gaussian { a, b } => RingElement::Gaussian { a: -a, b: -b },
            RingElement::QuadraticD3 { a, b } => RingElement::QuadraticD3 { a: -a, b: -b },
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, RingError> {
        self.same_ring(other)?;
        Ok(match (self, other) {
            (RingElement::Integer(x), RingElement::Integer(y)) => RingElement::Integer(x * y),
            (RingElement::Gaussian { a, b }, RingElement::Gaussian { a: c, b: d }) => {
                RingElement::Gaussian { a: a * c - b * d, b: a * d + b * c }
            }
            (RingElement::QuadraticD3 { a, b }, RingElement::QuadraticD3 { a: c, b: d }) => {
                // ((ac - 3bd) + (ad + bc) s) / 4, rewritten over the /2 lattice
                let re: BigInt = a * c - 3 * (b * d);
                let im: BigInt = a * d + b * c;
                RingElement::QuadraticD3 { a: re / 2, b: im / 2 }
            }
            _ => unreachable!(),
        })
    }

    /// Multiplies by an ordinary integer.
    pub fn scale(&self, k: &BigInt) -> Self {
        match self {
            RingElement::Integer(x) => RingElement::Integer(x * k),
            RingElement::Gaussian { a, b } => RingElement::Gaussian { a: a * k, b: b * k },
            RingElement::QuadraticD3 { a, b } => RingElement::QuadraticD3 { a: a * k, b: b * k },
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.kind().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            base = base.mul(&base).expect("same ring");
            e >>= 1;
        }
        acc
    }

    /// Field norm down to Z. For Z this is the absolute value.
    pub fn norm(&self) -> BigInt {
        match self {
            RingElement::Integer(x) => x.abs(),
            RingElement::Gaussian { a, b } => a * a + b * b,
            RingElement::QuadraticD3 { a, b } => (a * a + 3 * (b * b)) / 4,
        }
    }

    fn conj(&self) -> Self {
        match self {
            RingElement::Integer(x) => RingElement::Integer(x.clone()),
            RingElement::Gaussian { a, b } => RingElement::Gaussian { a: a.clone(), b: -b },
            RingElement::QuadraticD3 { a, b } => RingElement::QuadraticD3 { a: a.clone(), b: -b },
        }
    }

    /// Exact quotient `self / divisor`, or `None` when it leaves the ring.
    pub fn exact_div(&self, divisor: &Self) -> Result<Option<Self>, RingError> {
        self.same_ring(divisor)?;
        if divisor.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        let candidate = match (self, divisor) {
            (RingElement::Integer(x), RingElement::Integer(y)) => {
                let (q, r) = x.div_rem(y);
                if !r.is_zero() {
                    return Ok(None);
                }
                RingElement::Integer(q)
            }
            _ => {
                // x / y = x * conj(y) / N(y); round each coordinate to the
                // nearest lattice point and verify by multiplication below
                let n = divisor.norm();
                let num = self.mul(&divisor.conj())?;
                match num {
                    RingElement::Gaussian { a, b } => {
                        RingElement::Gaussian { a: round_div(&a, &n), b: round_div(&b, &n) }
                    }
                    RingElement::QuadraticD3 { a, b } => {
                        let (qa, qb) = (round_div(&a, &n), round_div(&b, &n));
                        if qa.is_even() != qb.is_even() {
                            return Ok(None);
                        }
                        RingElement::QuadraticD3 { a: qa, b: qb }
                    }
                    RingElement::Integer(_) => unreachable!(),
                }
            }
        };
        if candidate.mul(divisor)? == *self {
            Ok(Some(candidate))
        } else {
            Ok(None)
        }
    }

    /// True iff the element divides 1.
    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.norm().is_one()
    }

    /// Strict positivity; only meaningful over Z.
    pub fn is_positive(&self) -> Result<bool, RingError> {
        match self {
            RingElement::Integer(v) => Ok(v.is_positive()),
            other => Err(RingError::PositivityUndefined(other.kind())),
        }
    }
}

fn round_div(x: &BigInt, n: &BigInt) -> BigInt {
    // floor((2x + n) / 2n), n > 0
    let two = BigInt::from(2);
    (x * &two + n).div_floor(&(n * &two))
}

fn fmt_linear(f: &mut fmt::Formatter<'_>, a: &BigInt, b: &BigInt, unit: &str) -> fmt::Result {
    if b.is_zero() {
        return write!(f, "{a}");
    }
    let coef = if b.is_one() {
        String::new()
    } else if *b == -BigInt::one() {
        "-".to_string()
    } else {
        b.to_string()
    };
    if a.is_zero() {
        write!(f, "{coef}{unit}")
    } else if b.is_negative() {
        write!(f, "{a}{coef}{unit}")
    } else {
        write!(f, "{a}+{coef}{unit}")
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingElement::Integer(v) => write!(f, "{v}"),
            RingElement::Gaussian { a, b } => fmt_linear(f, a, b, "i"),
            RingElement::QuadraticD3 { a, b } => {
                if a.is_even() && b.is_even() {
                    fmt_linear(f, &(a / 2), &(b / 2), "s")
                } else {
                    f.write_str("(")?;
                    fmt_linear(f, a, b, "s")?;
                    f.write_str(")/2")
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "ring")]
enum RingJson {
    #[serde(rename = "Z")]
    Z { v: String },
    #[serde(rename = "Zi")]
    Zi { a: String, b: String },
    #[serde(rename = "Zsqrt-3half")]
    Quadratic { a: String, b: String },
}

impl Serialize for RingElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let json = match self {
            RingElement::Integer(v) => RingJson::Z { v: v.to_string() },
            RingElement::Gaussian { a, b } => RingJson::Zi { a: a.to_string(), b: b.to_string() },
            RingElement::QuadraticD3 { a, b } => RingJson::Quadratic { a: a.to_string(), b: b.to_string() },
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RingElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let int = |s: &str| BigInt::from_str(s).map_err(|_| D::Error::custom(format!("bad integer {s:?}")));
        match RingJson::deserialize(deserializer)? {
            RingJson::Z { v } => Ok(RingElement::Integer(int(&v)?)),
            RingJson::Zi { a, b } => Ok(RingElement::Gaussian { a: int(&a)?, b: int(&b)? }),
            RingJson::Quadratic { a, b } => RingElement::quadratic(int(&a)?, int(&b)?).map_err(D::Error::custom),
        }
    }
}
