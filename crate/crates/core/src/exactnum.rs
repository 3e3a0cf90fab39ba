//! Exact rationals extended with ordered infinitesimal tiers and a symbolic infinity.
//!
//! A finite [`TieredValue`] is a finite sum `Σ c_t ε_t` where `ε_0 = 1` and every
//! tier is infinitely smaller than the one before it. Values are totally ordered:
//! infinity is the largest value and finite values compare lexicographically by
//! ascending tier.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision reduced fraction.
pub type Rational = BigRational;

/// Errors raised by tiered arithmetic and value parsing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("malformed value {text:?}: {reason}")]
    Malformed { text: String, reason: String },
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("negative tier in {0:?}")]
    NegativeTier(String),
    #[error("infinity scaled by zero")]
    ZeroTimesInfinity,
    #[error("subtraction of an infinite value")]
    InfiniteSubtraction,
    #[error("ratio denominator must be finite and positive at its leading tier")]
    BadDenominator,
}

/// Shorthand for `n/d` as a [`Rational`].
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer power of a rational with a possibly negative exponent.
pub fn rpow(base: &Rational, exp: i32) -> Rational {
    num_traits::Pow::pow(base, exp)
}

/// Exact cost or makespan value: rational coefficients over infinitesimal tiers, or infinity.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TieredValue {
    infinite: bool,
    coeffs: BTreeMap<u32, Rational>,
}

/// Result of [`leading_ratio`]: a rational at the denominator's leading tier, or unbounded.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ratio {
    Finite(Rational),
    Unbounded,
}

impl Ratio {
    /// True when the ratio is at least `q`; an unbounded ratio exceeds every rational.
    pub fn at_least(&self, q: &Rational) -> bool {
        match self {
            Ratio::Unbounded => true,
            Ratio::Finite(r) => r >= q,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ratio::Unbounded => f64::INFINITY,
            Ratio::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ratio::Unbounded, Ratio::Unbounded) => Ordering::Equal,
            (Ratio::Unbounded, _) => Ordering::Greater,
            (_, Ratio::Unbounded) => Ordering::Less,
            (Ratio::Finite(a), Ratio::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Unbounded => f.write_str("unbounded"),
            Ratio::Finite(r) => f.write_str(&format_rational(r)),
        }
    }
}

impl TieredValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn infinity() -> Self {
        TieredValue { infinite: true, coeffs: BTreeMap::new() }
    }

    /// `q · ε_tier`.
    pub fn term(q: Rational, tier: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !q.is_zero() {
            coeffs.insert(tier, q);
        }
        TieredValue { infinite: false, coeffs }
    }

    /// Standard (tier-0) value `q`.
    pub fn from_rational(q: Rational) -> Self {
        Self::term(q, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    /// The unit infinitesimal `ε_tier`.
    pub fn eps(tier: u32) -> Self {
        Self::term(Rational::one(), tier)
    }

    /// Builds a finite value from `(tier, coefficient)` pairs; repeated tiers are summed.
    pub fn from_terms<I: IntoIterator<Item = (u32, Rational)>>(terms: I) -> Self {
        let mut v = TieredValue::zero();
        for (tier, q) in terms {
            v.add_term(tier, q);
        }
        v
    }

    fn add_term(&mut self, tier: u32, q: Rational) {
        if q.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(tier).or_insert_with(Rational::zero);
        *entry += q;
        if entry.is_zero() {
            self.coeffs.remove(&tier);
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.infinite
    }

    pub fn is_finite(&self) -> bool {
        !self.infinite
    }

    pub fn is_zero(&self) -> bool {
        !self.infinite && self.coeffs.is_empty()
    }

    /// Coefficient at `tier` (zero when absent or infinite).
    pub fn coeff(&self, tier: u32) -> Rational {
        self.coeffs.get(&tier).cloned().unwrap_or_else(Rational::zero)
    }

    /// Tier-0 coefficient.
    pub fn standard_part(&self) -> Rational {
        self.coeff(0)
    }

    /// Smallest tier with a nonzero coefficient, if finite and nonzero.
    pub fn leading_tier(&self) -> Option<u32> {
        if self.infinite {
            return None;
        }
        self.coeffs.keys().next().copied()
    }

    /// Nonzero coefficients in ascending tier order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.coeffs.iter().map(|(t, q)| (*t, q))
    }

    /// Sign of a finite value in the tiered order.
    pub fn signum(&self) -> Ordering {
        if self.infinite {
            return Ordering::Greater;
        }
        match self.coeffs.values().next() {
            None => Ordering::Equal,
            Some(q) if q.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    /// `q · v`; scaling infinity by zero is rejected.
    pub fn scale(&self, q: &Rational) -> Result<Self, NumError> {
        if self.infinite {
            return match q.cmp(&Rational::zero()) {
                Ordering::Greater => Ok(Self::infinity()),
                Ordering::Equal => Err(NumError::ZeroTimesInfinity),
                Ordering::Less => Err(NumError::InfiniteSubtraction),
            };
        }
        if q.is_zero() {
            return Ok(Self::zero());
        }
        let coeffs = self.coeffs.iter().map(|(t, c)| (*t, c * q)).collect();
        Ok(TieredValue { infinite: false, coeffs })
    }

    /// `self − other`; defined unless `other` is infinite.
    pub fn checked_sub(&self, other: &TieredValue) -> Result<Self, NumError> {
        if other.infinite {
            return Err(NumError::InfiniteSubtraction);
        }
        if self.infinite {
            return Ok(Self::infinity());
        }
        let mut out = self.clone();
        for (t, q) in &other.coeffs {
            out.add_term(*t, -q.clone());
        }
        Ok(out)
    }

    /// Tiered maximum.
    pub fn max_of(a: &TieredValue, b: &TieredValue) -> TieredValue {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Approximate float value of the standard part (infinity maps to `f64::INFINITY`).
    pub fn to_f64(&self) -> f64 {
        if self.infinite {
            return f64::INFINITY;
        }
        self.standard_part().to_f64().unwrap_or(f64::NAN)
    }
}

impl Add for &TieredValue {
    type Output = TieredValue;

    fn add(self, rhs: &TieredValue) -> TieredValue {
        if self.infinite || rhs.infinite {
            return TieredValue::infinity();
        }
        let mut out = self.clone();
        for (t, q) in &rhs.coeffs {
            out.add_term(*t, q.clone());
        }
        out
    }
}

impl Add for TieredValue {
    type Output = TieredValue;

    fn add(self, rhs: TieredValue) -> TieredValue {
        &self + &rhs
    }
}

impl Neg for &TieredValue {
    type Output = TieredValue;

    /// Negation of a finite value. Panics on infinity, which has no negative in this algebra.
    fn neg(self) -> TieredValue {
        assert!(!self.infinite, "negation of infinity");
        let coeffs = self.coeffs.iter().map(|(t, c)| (*t, -c.clone())).collect();
        TieredValue { infinite: false, coeffs }
    }
}

impl std::iter::Sum for TieredValue {
    fn sum<I: Iterator<Item = TieredValue>>(iter: I) -> Self {
        iter.fold(TieredValue::zero(), |acc, v| &acc + &v)
    }
}

impl PartialOrd for TieredValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TieredValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.infinite, other.infinite) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Greater,
            (false, true) => return Ordering::Less,
            _ => {}
        }
        let mut a = self.coeffs.iter().peekable();
        let mut b = other.coeffs.iter().peekable();
        let zero = Rational::zero();
        loop {
            let (ta, tb) = (a.peek().map(|e| *e.0), b.peek().map(|e| *e.0));
            let (ca, cb) = match (ta, tb) {
                (None, None) => return Ordering::Equal,
                (Some(x), Some(y)) if x == y => (a.next().unwrap().1, b.next().unwrap().1),
                (Some(x), Some(y)) if x < y => (a.next().unwrap().1, &zero),
                (Some(_), None) => (a.next().unwrap().1, &zero),
                _ => (&zero, b.next().unwrap().1),
            };
            match ca.cmp(cb) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
    }
}

/// Ratio of `num` to `den` at the leading tier of `den`.
///
/// Unbounded when `num` is infinite or carries a nonzero coefficient at a tier coarser
/// than the leading tier of `den`.
pub fn leading_ratio(num: &TieredValue, den: &TieredValue) -> Result<Ratio, NumError> {
    let tau = match den.leading_tier() {
        Some(t) => t,
        None => return Err(NumError::BadDenominator),
    };
    let dc = den.coeff(tau);
    if !dc.is_positive() {
        return Err(NumError::BadDenominator);
    }
    if num.infinite {
        return Ok(Ratio::Unbounded);
    }
    if num.coeffs.range(..tau).next().is_some() {
        return Ok(Ratio::Unbounded);
    }
    Ok(Ratio::Finite(num.coeff(tau) / dc))
}

/// Canonical text for a rational: `n` or `n/d`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Decimal rendering rounded half away from zero to `places` digits.
pub fn format_decimal(q: &Rational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = q * Rational::from_integer(scale.clone());
    let (int, frac) = (scaled.trunc(), scaled.fract());
    let mut n = int.to_integer();
    if frac.abs() * Rational::from_integer(BigInt::from(2)) >= Rational::one() {
        n += if q.is_negative() { -1 } else { 1 };
    }
    let neg = n.is_negative();
    let (whole, rem) = n.abs().div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{:0>width$}", rem.to_string(), width = places)
    }
}

/// Parses a rational `n`, `n/d`, or a plain decimal such as `1.873`.
pub fn parse_rational(text: &str) -> Result<Rational, NumError> {
    let s = text.trim();
    let bad = |reason: &str| NumError::Malformed { text: text.to_string(), reason: reason.to_string() };
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad("bad decimal fraction"));
        }
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad("bad decimal integer part"));
        }
        let joined = format!("{}{}", if digits.is_empty() { "0" } else { digits }, frac);
        let n: BigInt = joined.parse().map_err(|_| bad("bad decimal"))?;
        let d = BigInt::from(10u32).pow(frac.len() as u32);
        let q = Rational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let v: TieredValue = s.parse()?;
    if v.infinite || v.coeffs.keys().any(|t| *t != 0) {
        return Err(bad("expected a plain rational"));
    }
    Ok(v.standard_part())
}

impl fmt::Display for TieredValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.infinite {
            return f.write_str("inf");
        }
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (idx, (tier, q)) in self.coeffs.iter().enumerate() {
            if idx > 0 && q.is_positive() {
                f.write_str("+")?;
            }
            f.write_str(&format_rational(q))?;
            if *tier > 0 {
                write!(f, "e{tier}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TieredValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TieredValue({self})")
    }
}

struct Cursor<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn malformed(&self, reason: &str) -> NumError {
        NumError::Malformed { text: self.src.to_string(), reason: format!("{reason} at byte {}", self.pos) }
    }
}

impl FromStr for TieredValue {
    type Err = NumError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let s = text.trim();
        if s == "inf" {
            return Ok(TieredValue::infinity());
        }
        let normalized = s.replace('\u{2212}', "-");
        let mut cur = Cursor { src: &normalized, bytes: normalized.as_bytes(), pos: 0 };
        let mut value = TieredValue::zero();
        let mut first = true;
        loop {
            let mut negative = false;
            match cur.peek() {
                Some(b'-') => {
                    negative = true;
                    cur.pos += 1;
                }
                Some(b'+') if !first => cur.pos += 1,
                None if first => return Err(cur.malformed("empty value")),
                _ if !first => return Err(cur.malformed("expected '+' or '-'")),
                _ => {}
            }
            let num = cur.digits();
            if num.is_empty() {
                return Err(cur.malformed("expected digits"));
            }
            let mut q = Rational::from_integer(num.parse::<BigInt>().expect("digit run"));
            if cur.peek() == Some(b'/') {
                cur.pos += 1;
                let den = cur.digits();
                if den.is_empty() {
                    return Err(cur.malformed("expected denominator digits"));
                }
                let d: BigInt = den.parse().expect("digit run");
                if d.is_zero() {
                    return Err(NumError::ZeroDenominator(text.to_string()));
                }
                q /= Rational::from_integer(d);
            }
            let mut tier = 0u32;
            if cur.peek() == Some(b'e') {
                cur.pos += 1;
                if cur.peek() == Some(b'-') {
                    return Err(NumError::NegativeTier(text.to_string()));
                }
                let t = cur.digits();
                if t.is_empty() {
                    return Err(cur.malformed("expected tier digits"));
                }
                tier = t.parse().map_err(|_| cur.malformed("tier out of range"))?;
            }
            value.add_term(tier, if negative { -q } else { q });
            first = false;
            if cur.peek().is_none() {
                return Ok(value);
            }
        }
    }
}

impl Serialize for TieredValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TieredValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter storing a [`Rational`] as a grammar string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
