//! Scalar domains for network evaluation.
//!
//! Networks are generic over a [`Scalar`]: exact rationals ([`BigRational`]),
//! IEEE `f64`, or the quadratic extension field ℚ+ℚ√2 ([`QuadExt`]). Exact
//! domains ([`ExactScalar`]) additionally support hashing and total order,
//! which extraction uses to deduplicate feature vectors.
//!
//! Floating-point evaluation is deliberately order-pinned: callers accumulate
//! bias first, then terms in channel order (see `gnn::eval`), and the
//! activation implementations here do nothing clever, so that the float
//! behavior of compiled networks is reproducible bit for bit.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Errors from scalar operations that are only defined on some domains.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("activation `{activation}` is not supported on scalar domain `{domain}`")]
    UnsupportedActivation {
        activation: &'static str,
        domain: &'static str,
    },
    #[error("irrationality test is not supported on scalar domain `{domain}`")]
    UnsupportedIrrationalityTest { domain: &'static str },
    #[error("negation-oracle combination functions require the quadratic-extension domain, got `{domain}`")]
    UnsupportedOracle { domain: &'static str },
    #[error("value is not comparable (NaN encountered)")]
    NotComparable,
    #[error("malformed rational literal `{0}`")]
    BadRational(String),
    #[error("malformed `{domain}` entry in network JSON: {detail}")]
    BadEntry {
        domain: &'static str,
        detail: String,
    },
}

/// Identifies a scalar domain in serialized networks and error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    Rational,
    Float64,
    QuadExt,
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScalarKind::Rational => "rational",
            ScalarKind::Float64 => "float64",
            ScalarKind::QuadExt => "quad_ext",
        };
        f.write_str(s)
    }
}

/// A number type a network can compute over.
pub trait Scalar: Clone + PartialEq + PartialOrd + fmt::Debug + Send + Sync + 'static {
    const KIND: ScalarKind;

    fn zero() -> Self;
    fn one() -> Self;
    /// Embeds an exact rational weight into the domain.
    fn from_rat(r: &BigRational) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact division by a positive count (Mean aggregation).
    fn div_count(&self, n: usize) -> Self;

    fn is_zero(&self) -> bool;

    /// Componentwise maximum (Max aggregation).
    fn sup(&self, rhs: &Self) -> Self {
        if rhs > self {
            rhs.clone()
        } else {
            self.clone()
        }
    }

    /// min(max(0, x), 1).
    fn trrelu(&self) -> Self {
        let z = Self::zero();
        let o = Self::one();
        let lo = if *self < z { z } else { self.clone() };
        if lo > o {
            o
        } else {
            lo
        }
    }

    /// max(0, x).
    fn relu(&self) -> Self {
        let z = Self::zero();
        if *self < z {
            z
        } else {
            self.clone()
        }
    }

    /// 1 if x > 0, else 0.
    fn step(&self) -> Self {
        if *self > Self::zero() {
            Self::one()
        } else {
            Self::zero()
        }
    }

    /// Logistic function; only the float domain supports it.
    fn sigmoid(&self) -> Result<Self, ScalarError> {
        Err(ScalarError::UnsupportedActivation {
            activation: "sigmoid",
            domain: domain_name::<Self>(),
        })
    }

    /// Compares the value against an exact rational threshold.
    fn cmp_rat(&self, r: &BigRational) -> Result<Ordering, ScalarError>;

    /// Whether the value is irrational; only ℚ+ℚ√2 supports the test.
    fn is_irrational(&self) -> Result<bool, ScalarError> {
        Err(ScalarError::UnsupportedIrrationalityTest {
            domain: domain_name::<Self>(),
        })
    }

    /// Lossy projection to `f64`, for reporting distances and margins.
    fn as_f64(&self) -> f64;

    /// Projects into ℚ+ℚ√2 if the domain is (a subfield of) it.
    fn to_quad(&self) -> Option<QuadExt> {
        None
    }

    /// Embeds a ℚ+ℚ√2 value if the domain can represent it exactly.
    fn from_quad(_q: &QuadExt) -> Option<Self> {
        None
    }

    /// Wire representation: `"num/den"` strings for rationals, plain numbers
    /// for floats, `{"p": …, "q": …}` objects for ℚ+ℚ√2.
    fn to_json(&self) -> serde_json::Value;

    /// Parses the wire representation produced by [`Scalar::to_json`].
    fn from_json(v: &serde_json::Value) -> Result<Self, ScalarError>;
}

fn bad_entry<S: Scalar>(v: &serde_json::Value) -> ScalarError {
    ScalarError::BadEntry {
        domain: domain_name::<S>(),
        detail: v.to_string(),
    }
}

fn domain_name<S: Scalar>() -> &'static str {
    match S::KIND {
        ScalarKind::Rational => "rational",
        ScalarKind::Float64 => "float64",
        ScalarKind::QuadExt => "quad_ext",
    }
}

/// Scalars with decidable equality and a total order: feature vectors over
/// these can be deduplicated exactly, which extraction requires.
pub trait ExactScalar: Scalar + Eq + Ord + std::hash::Hash {}

impl Scalar for BigRational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_rat(r: &BigRational) -> Self {
        r.clone()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_count(&self, n: usize) -> Self {
        self / BigRational::from_integer(BigInt::from(n))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn cmp_rat(&self, r: &BigRational) -> Result<Ordering, ScalarError> {
        Ok(self.cmp(r))
    }
    fn as_f64(&self) -> f64 {
        self.to_f64().expect("finite rational")
    }
    fn to_quad(&self) -> Option<QuadExt> {
        Some(QuadExt::from_rational(self.clone()))
    }
    fn from_quad(q: &QuadExt) -> Option<Self> {
        if Zero::is_zero(&q.q) {
            Some(q.p.clone())
        } else {
            None
        }
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
    fn from_json(v: &serde_json::Value) -> Result<Self, ScalarError> {
        let s = v.as_str().ok_or_else(|| bad_entry::<Self>(v))?;
        parse_rational(s)
    }
}

impl ExactScalar for BigRational {}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Float64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rat(r: &BigRational) -> Self {
        // Exact for the dyadic weights the compilers emit; correctly rounded
        // quotient of the (lossily rounded) parts otherwise.
        r.to_f64().expect("finite rational")
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_count(&self, n: usize) -> Self {
        self / n as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn sigmoid(&self) -> Result<Self, ScalarError> {
        Ok(1.0 / (1.0 + (-self).exp()))
    }
    fn cmp_rat(&self, r: &BigRational) -> Result<Ordering, ScalarError> {
        let c = r.to_f64().expect("finite rational");
        self.partial_cmp(&c).ok_or(ScalarError::NotComparable)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
    fn from_json(v: &serde_json::Value) -> Result<Self, ScalarError> {
        v.as_f64().ok_or_else(|| bad_entry::<Self>(v))
    }
}

/// An element p + q·√2 of the real quadratic field ℚ(√2).
///
/// Field arithmetic is exact; order comparisons use the exact sign test
/// sign(p + q√2) via p² vs 2q² (√2 is irrational, so p + q√2 = 0 forces
/// p = q = 0). Serializes as `{"p": "num/den", "q": "num/den"}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    /// Rational part.
    pub p: BigRational,
    /// Coefficient of √2.
    pub q: BigRational,
}

impl serde::Serialize for QuadExt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("QuadExt", 2)?;
        st.serialize_field("p", &format_rational(&self.p))?;
        st.serialize_field("q", &format_rational(&self.q))?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for QuadExt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            p: String,
            q: String,
        }
        let raw = Raw::deserialize(d)?;
        let p = parse_rational(&raw.p).map_err(serde::de::Error::custom)?;
        let q = parse_rational(&raw.q).map_err(serde::de::Error::custom)?;
        Ok(QuadExt { p, q })
    }
}

impl QuadExt {
    pub fn new(p: BigRational, q: BigRational) -> Self {
        QuadExt { p, q }
    }

    pub fn from_rational(p: BigRational) -> Self {
        QuadExt {
            p,
            q: <BigRational as Zero>::zero(),
        }
    }

    /// √2 itself.
    pub fn sqrt2() -> Self {
        QuadExt {
            p: <BigRational as Zero>::zero(),
            q: <BigRational as One>::one(),
        }
    }

    pub fn is_rational(&self) -> bool {
        Zero::is_zero(&self.q)
    }

    /// Exact sign: -1, 0, or 1.
    pub fn signum(&self) -> i8 {
        let pz = Zero::is_zero(&self.p);
        let qz = Zero::is_zero(&self.q);
        if pz && qz {
            return 0;
        }
        let pp = self.p.is_positive() || pz;
        let qp = self.q.is_positive() || qz;
        match (pp, qp) {
            (true, true) => 1,
            (false, false) => -1,
            // p ≥ 0 > q: sign of p - |q|√2, i.e. of p² - 2q² (both sides ≥ 0).
            (true, false) => {
                let lhs = &self.p * &self.p;
                let rhs = BigRational::from_integer(BigInt::from(2)) * &self.q * &self.q;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => 1,
                    Ordering::Less => -1,
                    Ordering::Equal => unreachable!("p^2 = 2q^2 only at 0"),
                }
            }
            // q ≥ 0 > p: sign of |q|√2 - |p|.
            (false, true) => {
                let lhs = BigRational::from_integer(BigInt::from(2)) * &self.q * &self.q;
                let rhs = &self.p * &self.p;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => 1,
                    Ordering::Less => -1,
                    Ordering::Equal => unreachable!("p^2 = 2q^2 only at 0"),
                }
            }
        }
    }

    /// Approximate numeric value, for display only.
    pub fn to_f64_lossy(&self) -> f64 {
        self.p.to_f64().unwrap_or(f64::NAN) + self.q.to_f64().unwrap_or(f64::NAN) * SQRT_2
    }
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = QuadExt {
            p: &self.p - &other.p,
            q: &self.q - &other.q,
        };
        match d.signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt(2)", self.p, self.q)
    }
}

impl Scalar for QuadExt {
    const KIND: ScalarKind = ScalarKind::QuadExt;

    fn zero() -> Self {
        QuadExt::from_rational(<BigRational as Zero>::zero())
    }
    fn one() -> Self {
        QuadExt::from_rational(<BigRational as One>::one())
    }
    fn from_rat(r: &BigRational) -> Self {
        QuadExt::from_rational(r.clone())
    }
    fn add(&self, rhs: &Self) -> Self {
        QuadExt {
            p: &self.p + &rhs.p,
            q: &self.q + &rhs.q,
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        QuadExt {
            p: &self.p - &rhs.p,
            q: &self.q - &rhs.q,
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        QuadExt {
            p: &self.p * &rhs.p + &two * &self.q * &rhs.q,
            q: &self.p * &rhs.q + &self.q * &rhs.p,
        }
    }
    fn neg(&self) -> Self {
        QuadExt {
            p: -self.p.clone(),
            q: -self.q.clone(),
        }
    }
    fn div_count(&self, n: usize) -> Self {
        let nn = BigRational::from_integer(BigInt::from(n));
        QuadExt {
            p: &self.p / &nn,
            q: &self.q / &nn,
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.p) && Zero::is_zero(&self.q)
    }
    fn cmp_rat(&self, r: &BigRational) -> Result<Ordering, ScalarError> {
        let rhs = QuadExt::from_rational(r.clone());
        Ok(self.cmp(&rhs))
    }
    fn as_f64(&self) -> f64 {
        let p = self.p.to_f64().expect("finite rational");
        let q = self.q.to_f64().expect("finite rational");
        p + q * std::f64::consts::SQRT_2
    }
    fn is_irrational(&self) -> Result<bool, ScalarError> {
        Ok(!self.is_rational())
    }
    fn to_quad(&self) -> Option<QuadExt> {
        Some(self.clone())
    }
    fn from_quad(q: &QuadExt) -> Option<Self> {
        Some(q.clone())
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("quad-ext serialization is infallible")
    }
    fn from_json(v: &serde_json::Value) -> Result<Self, ScalarError> {
        serde_json::from_value(v.clone()).map_err(|_| bad_entry::<Self>(v))
    }
}

impl ExactScalar for QuadExt {}

/// Parses `"n"` or `"n/d"` (optional leading `-`) into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ScalarError> {
    let bad = || ScalarError::BadRational(s.to_string());
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if Zero::is_zero(&d) {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Formats a rational as `"n"` for integers, `"n/d"` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Convenience constructor for small rationals.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
