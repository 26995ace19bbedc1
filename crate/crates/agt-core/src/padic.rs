//! Truncated p-adic arithmetic with tracked precision, p-adic absolute
//! values and the rational product formula.
//!
//! A value represents `p^v * (unit)` where the unit is known modulo
//! `p^N`; `N` is the tracked precision and shrinks under cancellation.
//! All arithmetic is exact integer arithmetic on the known digits.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("operands live over different primes: {0} and {1}")]
    PrimeMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cancellation consumed every known digit")]
    PrecisionExhausted,
    #[error("precision must be at least 1")]
    ZeroPrecision,
}

/// A truncated p-adic number `p^v * sum digits[i] p^i`, digits least
/// significant first with `digits[0] != 0`, known modulo `p^{v+N}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PadicNumber {
    p: u32,
    is_zero: bool,
    valuation: i64,
    digits: Vec<u32>,
    precision: u32,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// p-adic valuation of a nonzero integer.
fn int_valuation(n: &BigInt, p: u32) -> (i64, BigInt) {
    assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.clone();
    loop {
        let (q, r) = (m.clone() / &p, m.clone() % &p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return (v, m);
        }
    }
}

/// Inverse of `a` modulo `m` for coprime inputs, by extended Euclid.
fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let (mut r0, mut r1) = (m.clone(), a.mod_floor_ref(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    assert!(r0.is_one(), "inputs must be coprime");
    t0.mod_floor_ref(m)
}

trait ModFloor {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt;
}

impl ModFloor for BigInt {
    fn mod_floor_ref(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

fn digits_of(mut u: BigInt, p: u32, n: u32) -> Vec<u32> {
    let p_big = BigInt::from(p);
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let d = u.mod_floor_ref(&p_big);
        out.push(u32::try_from(&d).unwrap());
        u = (u - d) / &p_big;
    }
    out
}

impl PadicNumber {
    pub fn zero(p: u32, precision: u32) -> Self {
        PadicNumber { p, is_zero: true, valuation: 0, digits: Vec::new(), precision }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero).then_some(self.valuation)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// The unit part as an integer `sum digits[i] p^i`.
    pub fn unit_value(&self) -> BigInt {
        let p = BigInt::from(self.p);
        let mut acc = BigInt::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * &p + BigInt::from(d);
        }
        acc
    }

    /// `|x|_p = p^{-v}` as an exact rational.
    pub fn abs_value(&self) -> BigRational {
        if self.is_zero {
            return BigRational::zero();
        }
        power_rational(self.p.into(), -self.valuation)
    }

    fn from_unit(p: u32, valuation: i64, unit_mod: BigInt, precision: u32) -> Result<Self, PadicError> {
        if precision == 0 {
            return Err(PadicError::PrecisionExhausted);
        }
        let digits = digits_of(unit_mod, p, precision);
        debug_assert!(digits[0] != 0);
        Ok(PadicNumber { p, is_zero: false, valuation, digits, precision })
    }
}

/// `base^e` as an exact rational, `e` of either sign.
pub fn power_rational(base: u64, e: i64) -> BigRational {
    let b = BigInt::from(base);
    let mag = num::pow::pow(b, e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// Expands a nonzero rational p-adically: the valuation is
/// `v_p(num) - v_p(den)` and the digits come from repeated division
/// with the exact modular inverse of the denominator.
pub fn from_rational(q: &BigRational, p: u32, precision: u32) -> Result<PadicNumber, PadicError> {
    if !is_prime(p) {
        return Err(PadicError::NotPrime(p));
    }
    if precision == 0 {
        return Err(PadicError::ZeroPrecision);
    }
    if q.is_zero() {
        return Ok(PadicNumber::zero(p, precision));
    }
    let (va, a) = int_valuation(q.numer(), p);
    let (vb, b) = int_valuation(q.denom(), p);
    let valuation = va - vb;
    // unit = a/b with p dividing neither; its digits are a * b^{-1}
    // modulo p^precision
    let modulus = num::pow::pow(BigInt::from(p), precision as usize);
    let unit = (a * mod_inverse(&b, &modulus)).mod_floor_ref(&modulus);
    PadicNumber::from_unit(p, valuation, unit, precision)
}

fn require_same_prime(x: &PadicNumber, y: &PadicNumber) -> Result<u32, PadicError> {
    if x.p != y.p {
        return Err(PadicError::PrimeMismatch(x.p, y.p));
    }
    Ok(x.p)
}

/// Addition. Valuations are aligned; the result is known modulo the
/// weaker of the two absolute precisions. Full cancellation of all
/// known digits yields zero; partial cancellation that consumes every
/// digit is an error rather than a fabricated answer.
pub fn add(x: &PadicNumber, y: &PadicNumber) -> Result<PadicNumber, PadicError> {
    let p = require_same_prime(x, y)?;
    if x.is_zero {
        return Ok(y.clone());
    }
    if y.is_zero {
        return Ok(x.clone());
    }
    let v = x.valuation.min(y.valuation);
    let known = (x.valuation + x.precision as i64).min(y.valuation + y.precision as i64);
    let rel = (known - v) as u32; // digits of the sum known above p^v
    let modulus = num::pow::pow(BigInt::from(p), rel as usize);
    let shift = |z: &PadicNumber| {
        let e = (z.valuation - v) as usize;
        (z.unit_value() * num::pow::pow(BigInt::from(p), e)).mod_floor_ref(&modulus)
    };
    let s = (shift(x) + shift(y)).mod_floor_ref(&modulus);
    if s.is_zero() {
        return Ok(PadicNumber::zero(p, rel));
    }
    let (extra, unit) = int_valuation(&s, p);
    PadicNumber::from_unit(p, v + extra, unit, rel - extra as u32)
}

pub fn neg(x: &PadicNumber) -> PadicNumber {
    if x.is_zero {
        return x.clone();
    }
    let modulus = num::pow::pow(BigInt::from(x.p), x.precision as usize);
    let unit = (modulus.clone() - x.unit_value()).mod_floor_ref(&modulus);
    PadicNumber::from_unit(x.p, x.valuation, unit, x.precision).expect("negation keeps precision")
}

pub fn sub(x: &PadicNumber, y: &PadicNumber) -> Result<PadicNumber, PadicError> {
    add(x, &neg(y))
}

/// Multiplication adds valuations; the unit product is known modulo
/// `p^min(Nx, Ny)`.
pub fn mul(x: &PadicNumber, y: &PadicNumber) -> Result<PadicNumber, PadicError> {
    let p = require_same_prime(x, y)?;
    if x.is_zero || y.is_zero {
        return Ok(PadicNumber::zero(p, x.precision.min(y.precision)));
    }
    let prec = x.precision.min(y.precision);
    let modulus = num::pow::pow(BigInt::from(p), prec as usize);
    let unit = (x.unit_value() * y.unit_value()).mod_floor_ref(&modulus);
    PadicNumber::from_unit(p, x.valuation + y.valuation, unit, prec)
}

/// Inversion negates the valuation and inverts the unit mod `p^N`.
pub fn inv(x: &PadicNumber) -> Result<PadicNumber, PadicError> {
    if x.is_zero {
        return Err(PadicError::DivisionByZero);
    }
    let modulus = num::pow::pow(BigInt::from(x.p), x.precision as usize);
    let unit = mod_inverse(&x.unit_value(), &modulus);
    PadicNumber::from_unit(x.p, -x.valuation, unit, x.precision)
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero {
            return write!(f, "0 (mod {}^{})", self.p, self.precision);
        }
        let ds: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        write!(
            f,
            "{}^{} * [{}] (digits lsb first, {} known)",
            self.p,
            self.valuation,
            ds.join(" "),
            self.precision
        )
    }
}

/// `|q|_p = p^{-v_p(q)}` for a nonzero rational.
pub fn rational_abs_p(q: &BigRational, p: u32) -> BigRational {
    assert!(!q.is_zero());
    let (va, _) = int_valuation(q.numer(), p);
    let (vb, _) = int_valuation(q.denom(), p);
    power_rational(p.into(), vb - va)
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaceAbs {
    pub prime: u64,
    pub valuation: i64,
    /// `p^{-v}` as a string, exact.
    pub abs: String,
}

/// Exact verification of `|q|_inf * prod_p |q|_p = 1`; the product runs
/// over the primes dividing numerator or denominator.
#[derive(Debug, Clone, Serialize)]
pub struct ProductFormulaReport {
    pub archimedean: String,
    pub places: Vec<PlaceAbs>,
    pub product_is_one: bool,
}

fn factor_primes(n: &BigInt) -> Vec<u64> {
    let mut m: u64 = u64::try_from(n.abs()).expect("factorization input fits in u64");
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

pub fn product_formula_check(q: &BigRational) -> ProductFormulaReport {
    assert!(!q.is_zero());
    let mut primes = factor_primes(q.numer());
    primes.extend(factor_primes(q.denom()));
    primes.sort();
    primes.dedup();

    let mut product = q.abs();
    let archimedean = product.to_string();
    let mut places = Vec::new();
    for p in primes {
        let (va, _) = int_valuation(q.numer(), p as u32);
        let (vb, _) = int_valuation(q.denom(), p as u32);
        let v = va - vb;
        let abs = power_rational(p, -v);
        product *= &abs;
        places.push(PlaceAbs { prime: p, valuation: v, abs: abs.to_string() });
    }
    ProductFormulaReport {
        archimedean,
        places,
        product_is_one: product.is_one(),
    }
}
