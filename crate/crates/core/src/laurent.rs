//! Multivariate Laurent polynomials over Z with monomial denominators.
//!
//! A value is stored as `numerator / x^d` where the numerator is an ordinary
//! polynomial with integer coefficients and `d` is a nonnegative exponent
//! vector. The canonical form never shares a variable factor between the
//! numerator and the denominator, so structural equality is equality of
//! Laurent polynomials.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rings::{RingElement, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("variable count mismatch: {0} vs {1}")]
    VarCountMismatch(usize, usize),
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("zero substituted for x{0}, which occurs in the denominator")]
    ZeroDenominator(usize),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Exponent vector ordered by graded lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e)).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

type Poly = BTreeMap<Monomial, BigInt>;

fn poly_add_term(p: &mut Poly, m: Monomial, c: BigInt) {
    if c.is_zero() {
        return;
    }
    match p.get_mut(&m) {
        Some(existing) => {
            *existing += c;
            if existing.is_zero() {
                p.remove(&m);
            }
        }
        None => {
            p.insert(m, c);
        }
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            poly_add_term(&mut out, ma.mul(mb), ca * cb);
        }
    }
    out
}

fn poly_shift(p: &Poly, m: &Monomial) -> Poly {
    p.iter().map(|(k, c)| (k.mul(m), c.clone())).collect()
}

/// Exact quotient `p / f` in Z[x] by graded-lex long division, or `None`
/// if `f` does not divide `p`.
fn poly_exact_div(p: &Poly, f: &Poly) -> Option<Poly> {
    let (lead_m, lead_c) = f.iter().next_back()?;
    let mut rem = p.clone();
    let mut quotient = Poly::new();
    while let Some((m, c)) = rem.iter().next_back() {
        if !lead_m.divides(m) {
            return None;
        }
        let (qc, r) = c.div_rem(lead_c);
        if !r.is_zero() {
            return None;
        }
        let qm = m.div(lead_m);
        for (fm, fc) in f {
            poly_add_term(&mut rem, fm.mul(&qm), -(fc * &qc));
        }
        poly_add_term(&mut quotient, qm, qc);
    }
    Some(quotient)
}

/// `numerator / x^denom` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentPolynomial {
    nvars: usize,
    numerator: Poly,
    denom: Vec<u32>,
}

impl LaurentPolynomial {
    pub fn zero(nvars: usize) -> Self {
        LaurentPolynomial { nvars, numerator: Poly::new(), denom: vec![0; nvars] }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut numerator = Poly::new();
        poly_add_term(&mut numerator, Monomial::one(nvars), c.into());
        LaurentPolynomial { nvars, numerator, denom: vec![0; nvars] }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1)
    }

    /// The variable `x_{i+1}` (0-based index `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut m = Monomial::one(nvars);
        m.0[i] = 1;
        let mut numerator = Poly::new();
        numerator.insert(m, BigInt::one());
        LaurentPolynomial { nvars, numerator, denom: vec![0; nvars] }
    }

    /// Builds `sum c_m x^m / x^denom` from raw terms and canonicalizes.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>, denom: Vec<u32>) -> Self {
        assert_eq!(denom.len(), nvars, "denominator length");
        let mut numerator = Poly::new();
        for (exps, c) in terms {
            assert_eq!(exps.len(), nvars, "exponent vector length");
            poly_add_term(&mut numerator, Monomial(exps), c);
        }
        Self::canonical(nvars, numerator, denom)
    }

    fn canonical(nvars: usize, mut numerator: Poly, mut denom: Vec<u32>) -> Self {
        if numerator.is_empty() {
            return Self::zero(nvars);
        }
        let mut common = vec![0u32; nvars];
        for (i, c) in common.iter_mut().enumerate() {
            let min_exp = numerator.keys().map(|m| m.0[i]).min().unwrap_or(0);
            *c = min_exp.min(denom[i]);
        }
        if common.iter().any(|&c| c > 0) {
            let shift = Monomial(common.clone());
            numerator = numerator.into_iter().map(|(m, c)| (m.div(&shift), c)).collect();
            for (d, c) in denom.iter_mut().zip(&common) {
                *d -= c;
            }
        }
        LaurentPolynomial { nvars, numerator, denom }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_empty()
    }

    pub fn denominator(&self) -> &[u32] {
        &self.denom
    }

    /// Numerator terms, highest graded-lex monomial first.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.numerator.iter().rev().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.numerator.len()
    }

    /// True if the numerator is a single term.
    pub fn is_monomial(&self) -> bool {
        self.numerator.len() == 1
    }

    pub fn has_positive_coefficients(&self) -> bool {
        self.numerator.values().all(|c| c.is_positive())
    }

    /// Whether this is exactly the variable `x_{i+1}`.
    pub fn is_var(&self, i: usize) -> bool {
        i < self.nvars && *self == Self::var(self.nvars, i)
    }

    fn same_vars(&self, other: &Self) -> Result<(), LaurentError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(LaurentError::VarCountMismatch(self.nvars, other.nvars))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.same_vars(other)?;
        // bring both over the lcm of the denominators
        let lcm: Vec<u32> = self.denom.iter().zip(&other.denom).map(|(a, b)| *a.max(b)).collect();
        let lift = |p: &LaurentPolynomial| {
            let shift = Monomial(lcm.iter().zip(&p.denom).map(|(l, d)| l - d).collect());
            poly_shift(&p.numerator, &shift)
        };
        let mut numerator = lift(self);
        for (m, c) in lift(other) {
            poly_add_term(&mut numerator, m, c);
        }
        Ok(Self::canonical(self.nvars, numerator, lcm))
    }

    pub fn neg(&self) -> Self {
        LaurentPolynomial {
            nvars: self.nvars,
            numerator: self.numerator.iter().map(|(m, c)| (m.clone(), -c)).collect(),
            denom: self.denom.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LaurentError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LaurentError> {
        self.same_vars(other)?;
        let numerator = poly_mul(&self.numerator, &other.numerator);
        let denom = self.denom.iter().zip(&other.denom).map(|(a, b)| a + b).collect();
        Ok(Self::canonical(self.nvars, numerator, denom))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..e {
            acc = acc.mul(self).expect("same variable count");
        }
        acc
    }

    /// Exact quotient `self / divisor` if it is again a Laurent polynomial.
    pub fn exact_div(&self, divisor: &Self) -> Result<Option<Self>, LaurentError> {
        self.same_vars(divisor)?;
        if divisor.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Some(Self::zero(self.nvars)));
        }
        // divisor = g * x^c / x^e with g free of monomial factors
        let n = self.nvars;
        let content: Vec<u32> = (0..n).map(|i| divisor.numerator.keys().map(|m| m.0[i]).min().unwrap_or(0)).collect();
        let content_m = Monomial(content.clone());
        let g: Poly = divisor.numerator.iter().map(|(m, c)| (m.div(&content_m), c.clone())).collect();
        // self / divisor = (f * x^e) / (g * x^d * x^c)
        let lifted = poly_shift(&self.numerator, &Monomial(divisor.denom.clone()));
        let Some(q) = poly_exact_div(&lifted, &g) else {
            return Ok(None);
        };
        let denom = (0..n).map(|i| self.denom[i] + content[i]).collect();
        let quotient = Self::canonical(n, q, denom);
        debug_assert_eq!(quotient.mul(divisor).as_ref(), Ok(self));
        Ok(Some(quotient))
    }

    /// Evaluates at `values`. `Ok(None)` means the quotient leaves the ring.
    pub fn specialize(&self, values: &[RingElement]) -> Result<Option<RingElement>, LaurentError> {
        if values.len() != self.nvars {
            return Err(LaurentError::VarCountMismatch(self.nvars, values.len()));
        }
        let Some(first) = values.first() else {
            return Err(LaurentError::VarCountMismatch(self.nvars, 0));
        };
        let ring = first.kind();
        for (i, (v, &d)) in values.iter().zip(&self.denom).enumerate() {
            if d > 0 && v.is_zero() {
                return Err(LaurentError::ZeroDenominator(i));
            }
        }
        let mut num = ring.zero();
        for (m, c) in &self.numerator {
            let mut term = ring.from_int(c.clone());
            for (v, &e) in values.iter().zip(&m.0) {
                if e > 0 {
                    term = term.mul(&v.pow(e))?;
                }
            }
            num = num.add(&term)?;
        }
        let mut den = ring.one();
        for (v, &d) in values.iter().zip(&self.denom) {
            if d > 0 {
                den = den.mul(&v.pow(d))?;
            }
        }
        Ok(num.exact_div(&den)?)
    }

    /// Formats with custom variable names.
    pub fn display_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.is_zero() {
            return "0".to_string();
        }
        let mut num = String::new();
        for (idx, (m, c)) in self.numerator.iter().rev().enumerate() {
            let mono = monomial_text(&m.0, names);
            let (neg, abs) = (c.is_negative(), c.abs());
            if idx == 0 {
                if neg {
                    num.push('-');
                }
            } else {
                num.push_str(if neg { " - " } else { " + " });
            }
            match (abs.is_one(), mono.is_empty()) {
                (true, true) => num.push('1'),
                (true, false) => num.push_str(&mono),
                (false, true) => num.push_str(&abs.to_string()),
                (false, false) => {
                    num.push_str(&abs.to_string());
                    num.push('*');
                    num.push_str(&mono);
                }
            }
        }
        let den = monomial_text(&self.denom, names);
        if den.is_empty() {
            return num;
        }
        let num = if self.numerator.len() > 1 { format!("({num})") } else { num };
        let factors = self.denom.iter().filter(|&&d| d > 0).count();
        if factors == 1 {
            format!("{num}/{den}")
        } else {
            format!("{num}/({den})")
        }
    }

    /// Default variable names `x1, ..., xn`.
    pub fn default_names(nvars: usize) -> Vec<String> {
        (1..=nvars).map(|i| format!("x{i}")).collect()
    }

    /// Parses text such as `(x1*x3 + x2 + 1)/(x2*x3)` over `x1..xn`.
    /// Division is accepted whenever it is exact in the Laurent ring.
    pub fn parse(text: &str, nvars: usize) -> Result<Self, LaurentError> {
        Self::parse_with(text, &Self::default_names(nvars))
    }

    pub fn parse_with(text: &str, names: &[String]) -> Result<Self, LaurentError> {
        let mut p = Parser { src: text.as_bytes(), pos: 0, names };
        let value = p.sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(value)
    }
}

fn monomial_text(exps: &[u32], names: &[String]) -> String {
    exps.iter()
        .zip(names)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, name)| if e == 1 { name.clone() } else { format!("{name}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&Self::default_names(self.nvars)))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> LaurentError {
        LaurentError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn nvars(&self) -> usize {
        self.names.len()
    }

    fn sum(&mut self) -> Result<LaurentPolynomial, LaurentError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.quotient()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.quotient()?
            }
            _ => self.quotient()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.quotient()?)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.quotient()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn quotient(&mut self) -> Result<LaurentPolynomial, LaurentError> {
        let mut acc = self.product()?;
        while self.peek() == Some(b'/') {
            self.pos += 1;
            let divisor = self.product()?;
            acc = acc.exact_div(&divisor)?.ok_or_else(|| self.error("quotient is not a Laurent polynomial"))?;
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<LaurentPolynomial, LaurentError> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.power()?)?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<LaurentPolynomial, LaurentError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.number()?;
            let e = u32::try_from(e).map_err(|_| self.error("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<BigInt, LaurentError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a number"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits parse"))
    }

    fn atom(&mut self) -> Result<LaurentPolynomial, LaurentError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => Ok(LaurentPolynomial::constant(self.nvars(), self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_' || self.src[self.pos] == b'\'')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
                let idx = self.names.iter().position(|n| n == ident).ok_or_else(|| {
                    self.pos = start;
                    self.error(&format!("unknown variable {ident:?}"))
                })?;
                Ok(LaurentPolynomial::var(self.nvars(), idx))
            }
            _ => Err(self.error("expected a number, variable or '('")),
        }
    }
}
