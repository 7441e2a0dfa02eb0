//! The negation oracle: a growing, order-reversing involution on [0, √2].
//!
//! The irrational-classifier construction represents falsity of a subformula
//! by rationals F = ℚ ∩ [0, √2] and truth by T = {p + q√2 | q > 0} ∩ [0, √2].
//! Negation needs a function f with f(F) = T and f(T) = F. No closed form is
//! required: f is built lazily by back-and-forth, seeded with the pairs
//! (0, √2) and (√2, 0), and extended on every fresh query so that it stays a
//! class-swapping, order-reversing involution on the points seen so far.
//!
//! A fresh query x finds its neighbors u₋ < x < u₊ among the already-paired
//! points and picks as f(x) the first unpaired element of the opposite
//! class's fixed enumeration that falls in the open interval (f(u₊), f(u₋)).
//! Density of both classes guarantees such an element exists; scanning a
//! fixed enumeration from the start makes the oracle deterministic in the
//! query order. Every application is recorded in a query log so the
//! invariants can be audited after the fact.

use crate::scalar::{rat, QuadExt};
use num::rational::BigRational;
use num::{BigInt, Signed, Zero};
use std::collections::BTreeMap;

/// Errors from oracle application.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle input {0} lies outside F ∪ T (the representable truth values on [0, √2])")]
    OutsideDomain(String),
    #[error("oracle invariant violated: {0}")]
    InvariantViolation(String),
}

/// One recorded oracle application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRecord {
    pub input: QuadExt,
    pub output: QuadExt,
    /// Whether this query extended the involution (vs. hitting a known pair).
    pub fresh: bool,
}

/// The lazily-built negation function f on F ∪ T.
#[derive(Debug, Clone)]
pub struct NegationOracle {
    pairs: BTreeMap<QuadExt, QuadExt>,
    log: Vec<QueryRecord>,
    rational_enum: ClassEnum,
    irrational_enum: ClassEnum,
}

impl Default for NegationOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl NegationOracle {
    pub fn new() -> Self {
        let zero = QuadExt::from_rational(rat(0, 1));
        let sqrt2 = QuadExt::sqrt2();
        let mut pairs = BTreeMap::new();
        pairs.insert(zero.clone(), sqrt2.clone());
        pairs.insert(sqrt2, zero);
        NegationOracle {
            pairs,
            log: Vec::new(),
            rational_enum: ClassEnum::new(Class::Rational),
            irrational_enum: ClassEnum::new(Class::Irrational),
        }
    }

    /// Applies f to `x`, extending the involution if `x` is new.
    pub fn apply(&mut self, x: &QuadExt) -> Result<QuadExt, OracleError> {
        let class = classify(x).ok_or_else(|| OracleError::OutsideDomain(x.to_string()))?;
        if let Some(y) = self.pairs.get(x) {
            let y = y.clone();
            self.log.push(QueryRecord {
                input: x.clone(),
                output: y.clone(),
                fresh: false,
            });
            return Ok(y);
        }
        // Neighbors among paired points; 0 and √2 bound every valid input.
        let below = self
            .pairs
            .range(..x.clone())
            .next_back()
            .map(|(k, v)| (k.clone(), v.clone()))
            .expect("0 is always paired");
        let above = self
            .pairs
            .range(x.clone()..)
            .next()
            .map(|(k, v)| (k.clone(), v.clone()))
            .expect("sqrt(2) is always paired");
        // Order reversal: f(x) must land strictly between f(u₊) and f(u₋).
        let lo = above.1;
        let hi = below.1;
        let scan = match class {
            Class::Rational => &mut self.irrational_enum,
            Class::Irrational => &mut self.rational_enum,
        };
        let y = scan.first_unpaired_in(&lo, &hi, &self.pairs);
        self.pairs.insert(x.clone(), y.clone());
        self.pairs.insert(y.clone(), x.clone());
        self.log.push(QueryRecord {
            input: x.clone(),
            output: y.clone(),
            fresh: true,
        });
        Ok(y)
    }

    /// All applications so far, in order.
    pub fn log(&self) -> &[QueryRecord] {
        &self.log
    }

    /// The involution built so far (both directions present).
    pub fn pairs(&self) -> impl Iterator<Item = (&QuadExt, &QuadExt)> {
        self.pairs.iter()
    }

    /// Audits the three defining invariants over everything paired so far:
    /// involution, class swap, and order reversal.
    pub fn check_invariants(&self) -> Result<(), OracleError> {
        for (x, y) in &self.pairs {
            let back = self
                .pairs
                .get(y)
                .ok_or_else(|| OracleError::InvariantViolation(format!("{y} unpaired")))?;
            if back != x {
                return Err(OracleError::InvariantViolation(format!(
                    "f(f({x})) = {back} ≠ {x}"
                )));
            }
            let cx = classify(x).ok_or_else(|| {
                OracleError::InvariantViolation(format!("{x} outside domain"))
            })?;
            let cy = classify(y).ok_or_else(|| {
                OracleError::InvariantViolation(format!("{y} outside domain"))
            })?;
            if cx == cy {
                return Err(OracleError::InvariantViolation(format!(
                    "f maps {x} to {y} within the same class"
                )));
            }
        }
        // Order reversal: ascending keys must map to descending values.
        let entries: Vec<_> = self.pairs.iter().collect();
        for w in entries.windows(2) {
            let (x1, y1) = w[0];
            let (x2, y2) = w[1];
            if !(y1 > y2) {
                return Err(OracleError::InvariantViolation(format!(
                    "order not reversed: {x1} < {x2} but f gives {y1} vs {y2}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Rational,
    Irrational,
}

/// None if x ∉ F ∪ T: outside [0, √2], or irrational with q < 0.
fn classify(x: &QuadExt) -> Option<Class> {
    if x.signum() < 0 || x > &QuadExt::sqrt2() {
        return None;
    }
    if x.q.is_zero() {
        Some(Class::Rational)
    } else if x.q.is_positive() {
        Some(Class::Irrational)
    } else {
        None
    }
}

/// A fixed, duplicate-free enumeration of one truth-value class (excluding
/// the seed endpoints), materialized lazily.
#[derive(Debug, Clone)]
struct ClassEnum {
    class: Class,
    generated: Vec<QuadExt>,
    height: u64,
}

impl ClassEnum {
    fn new(class: Class) -> Self {
        ClassEnum {
            class,
            generated: Vec::new(),
            height: 1,
        }
    }

    /// First enumerated element strictly inside (lo, hi) that is not yet
    /// paired. Extends the enumeration as long as needed; density of the
    /// class in (0, √2) guarantees termination.
    fn first_unpaired_in(
        &mut self,
        lo: &QuadExt,
        hi: &QuadExt,
        pairs: &BTreeMap<QuadExt, QuadExt>,
    ) -> QuadExt {
        let mut idx = 0;
        loop {
            while idx >= self.generated.len() {
                self.extend();
            }
            let cand = &self.generated[idx];
            if cand > lo && cand < hi && !pairs.contains_key(cand) {
                return cand.clone();
            }
            idx += 1;
        }
    }

    /// Generates all class members of the next height.
    fn extend(&mut self) {
        self.height += 1;
        let h = self.height as i64;
        match self.class {
            Class::Rational => {
                // Fractions num/den with num + den = h, reduced, in (0, √2).
                for num in 1..h {
                    let den = h - num;
                    if den < 1 {
                        continue;
                    }
                    if gcd(num, den) != 1 {
                        continue;
                    }
                    // num/den < √2 ⟺ num² < 2·den².
                    if num * num >= 2 * den * den {
                        continue;
                    }
                    self.generated
                        .push(QuadExt::from_rational(rat(num, den)));
                }
            }
            Class::Irrational => {
                // p + q√2 with |pn| + pd + qn + qd = h, q > 0 reduced, p
                // reduced (0 rendered as 0/1), value in (0, √2), not √2 itself.
                for pn in -h..=h {
                    for pd in 1..=h {
                        if gcd(pn.abs(), pd) != 1 {
                            continue;
                        }
                        for qn in 1..=h {
                            let qd = h - pn.abs() - pd - qn;
                            if qd < 1 {
                                continue;
                            }
                            if gcd(qn, qd) != 1 {
                                continue;
                            }
                            if pn == 0 && qn == 1 && qd == 1 {
                                continue; // √2 is the seed
                            }
                            let v = QuadExt::new(rat(pn, pd), rat(qn, qd));
                            if v.signum() > 0 && v < QuadExt::sqrt2() {
                                self.generated.push(v);
                            }
                        }
                    }
                }
            }
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// The rational endpoint a = 0 of the truth-value interval.
pub fn interval_lo() -> QuadExt {
    QuadExt::from_rational(BigRational::from_integer(BigInt::from(0)))
}

/// The irrational endpoint b = √2.
pub fn interval_hi() -> QuadExt {
    QuadExt::sqrt2()
}

/// Midpoint-style helper used in tests: (x + y)/2 stays in [0, √2].
pub fn avg(x: &QuadExt, y: &QuadExt) -> QuadExt {
    use crate::scalar::Scalar;
    x.add(y).div_count(2)
}
