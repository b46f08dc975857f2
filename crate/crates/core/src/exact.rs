//! Exact rational arithmetic helpers: 2-adic valuations, binary digit sums,
//! generalized binomial coefficients and truncated one-variable power series.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

pub use num_rational::BigRational as Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("invalid rational {input:?} at byte {position}: {reason}")]
    Parse {
        input: String,
        position: usize,
        reason: String,
    },
    #[error("series power needs constant term exactly 1, found {0}")]
    NonUnitConstant(Rational),
}

/// 2-adic valuation. `Infinite` is the valuation of zero and compares above
/// every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Exponent of 2 in a nonzero integer; `Infinite` for zero.
pub fn nu2_int(x: &BigInt) -> Valuation {
    match x.trailing_zeros() {
        Some(z) => Valuation::Finite(z as i64),
        None => Valuation::Infinite,
    }
}

/// 2-adic valuation of a rational: ν(numerator) − ν(denominator).
pub fn nu2(x: &Rational) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let num = x.numer().trailing_zeros().unwrap_or(0) as i64;
    let den = x.denom().trailing_zeros().unwrap_or(0) as i64;
    Valuation::Finite(num - den)
}

/// Number of ones in the binary expansion of `m`.
pub fn alpha(m: u64) -> u32 {
    m.count_ones()
}

/// Generalized binomial coefficient a(a−1)…(a−k+1)/k! for any integer `a`.
///
/// Built one factor at a time; every partial product is itself a binomial
/// coefficient, so each division is exact.
pub fn binom(a: i64, k: u64) -> BigInt {
    let a = BigInt::from(a);
    let mut c = BigInt::one();
    for j in 0..k {
        c *= &a - BigInt::from(j);
        c = c.div_floor(&BigInt::from(j + 1));
    }
    c
}

/// Same as [`binom`] but lifted to a rational.
pub fn binom_q(a: i64, k: u64) -> Rational {
    Rational::from_integer(binom(a, k))
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or `"p"`, with an optional leading minus, into lowest terms.
pub fn parse_rational(input: &str) -> Result<Rational, ExactError> {
    let err = |position: usize, reason: &str| ExactError::Parse {
        input: input.to_string(),
        position,
        reason: reason.to_string(),
    };
    let trimmed = input.trim();
    let offset = input.len() - input.trim_start().len();
    if trimmed.is_empty() {
        return Err(err(offset, "empty"));
    }
    let (num_str, den_str, den_pos) = match trimmed.find('/') {
        Some(i) => (&trimmed[..i], Some(&trimmed[i + 1..]), offset + i + 1),
        None => (trimmed, None, 0),
    };
    let check_digits = |s: &str, base: usize, allow_sign: bool| -> Result<BigInt, ExactError> {
        let digits = if allow_sign {
            s.strip_prefix('-').unwrap_or(s)
        } else {
            s
        };
        if digits.is_empty() {
            return Err(err(base + s.len(), "expected digits"));
        }
        if let Some(bad) = digits.find(|c: char| !c.is_ascii_digit()) {
            return Err(err(
                base + (s.len() - digits.len()) + bad,
                "unexpected character",
            ));
        }
        Ok(s.parse::<BigInt>().expect("validated digits"))
    };
    let num = check_digits(num_str, offset, true)?;
    let den = match den_str {
        Some(d) => check_digits(d, den_pos, false)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return Err(err(den_pos, "zero denominator"));
    }
    Ok(Rational::new(num, den))
}

pub fn rational_to_string(x: &Rational) -> String {
    x.to_string()
}

/// Truncated power series in one variable with exact rational coefficients.
/// All arithmetic discards terms above `degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    pub fn new(degree: usize, mut coeffs: Vec<Rational>) -> Self {
        coeffs.resize(degree + 1, Rational::zero());
        TruncatedSeries { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self::new(degree, Vec::new())
    }

    pub fn one(degree: usize) -> Self {
        Self::new(degree, vec![Rational::one()])
    }

    /// `1 + c·x`
    pub fn one_plus(degree: usize, c: Rational) -> Self {
        Self::new(degree, vec![Rational::one(), c])
    }

    /// e^x − 1
    pub fn exp_minus_one(degree: usize) -> Self {
        let mut coeffs = vec![Rational::zero()];
        let mut fact = BigInt::one();
        for j in 1..=degree {
            fact *= BigInt::from(j);
            coeffs.push(Rational::new(BigInt::one(), fact.clone()));
        }
        Self::new(degree, coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let degree = self.degree().min(other.degree());
        let coeffs = (0..=degree)
            .map(|i| self.coeff(i) + other.coeff(i))
            .collect();
        Self::new(degree, coeffs)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let degree = self.degree().min(other.degree());
        let mut coeffs = vec![Rational::zero(); degree + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(degree + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(degree + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        TruncatedSeries { coeffs }
    }

    /// Multiplicative inverse of a series with constant term 1.
    pub fn inverse(&self) -> Result<Self, ExactError> {
        self.require_unit()?;
        let degree = self.degree();
        let mut inv = vec![Rational::zero(); degree + 1];
        inv[0] = Rational::one();
        for i in 1..=degree {
            let mut acc = Rational::zero();
            for j in 1..=i {
                acc -= &self.coeffs[j] * &inv[i - j];
            }
            inv[i] = acc;
        }
        Ok(TruncatedSeries { coeffs: inv })
    }

    /// Integer power of a series with constant term 1. Negative exponents go
    /// through the truncated inverse.
    pub fn pow(&self, e: i64) -> Result<Self, ExactError> {
        self.require_unit()?;
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut exp = e.unsigned_abs();
        let mut acc = Self::one(self.degree());
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&sq);
            }
            exp >>= 1;
            if exp > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    fn require_unit(&self) -> Result<(), ExactError> {
        if self.coeffs[0].is_one() {
            Ok(())
        } else {
            Err(ExactError::NonUnitConstant(self.coeffs[0].clone()))
        }
    }
}

/// Expands `base^e` for a series with constant term 1.
pub fn series_pow(base: &TruncatedSeries, e: i64) -> Result<TruncatedSeries, ExactError> {
    base.pow(e)
}

/// Binomial coefficient modulo 2 via Lucas: C(a, b) is odd iff b ⊆ a bitwise.
pub fn binom_is_odd(a: u64, b: u64) -> bool {
    b <= a && (a & b) == b
}

/// ν of C(a, b) for 0 ≤ b ≤ a: by Kummer, α(b) + α(a−b) − α(a).
pub fn nu2_binom(a: u64, b: u64) -> u32 {
    assert!(b <= a);
    alpha(b) + alpha(a - b) - alpha(a)
}
