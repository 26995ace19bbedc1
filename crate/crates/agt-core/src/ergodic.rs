//! Von Neumann ergodic averages for circle rotations acting on
//! trigonometric polynomials.
//!
//! On the frequency side the Koopman operator and the ergodic average
//! act diagonally, so convergence to the mean is exactly computable:
//! the average multiplies the coefficient at frequency k by the
//! Dirichlet factor D_n(k alpha), available in closed form. "Irrational"
//! rotation numbers are represented by exact rational continued-fraction
//! convergents of sqrt(2) or the golden ratio; true irrationality is
//! only approximated, but every closed form below is exact for the
//! rational stand-in because k alpha is reduced mod 1 in exact
//! arithmetic before any trigonometry.

use num::complex::Complex64;
use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub type Rational = BigRational;

const COEFF_EPS: f64 = 0.0;

/// A finitely supported map from integer frequencies to complex
/// coefficients: `f(x) = sum_k c_k e^{2 pi i k x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

impl TrigPoly {
    pub fn new(pairs: impl IntoIterator<Item = (i64, Complex64)>) -> TrigPoly {
        let mut coeffs = BTreeMap::new();
        for (k, c) in pairs {
            if c.norm() > COEFF_EPS {
                *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        coeffs.retain(|_, c| c.norm() > COEFF_EPS);
        TrigPoly { coeffs }
    }

    pub fn constant(c: Complex64) -> TrigPoly {
        TrigPoly::new([(0, c)])
    }

    pub fn harmonic(k: i64, c: Complex64) -> TrigPoly {
        TrigPoly::new([(k, c)])
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    /// `sqrt(sum |c_k|^2)` (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The space mean `int f = c_0`.
    pub fn mean(&self) -> Complex64 {
        self.coeff(0)
    }

    /// Pointwise evaluation, for cross-checks against the spectral side.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, &c)| c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x))
            .sum()
    }
}

/// The circle rotation `T x = x + alpha mod 1` with an exact rational
/// rotation number.
#[derive(Debug, Clone)]
pub struct RotationSystem {
    pub alpha: Rational,
}

impl RotationSystem {
    pub fn new(alpha: Rational) -> RotationSystem {
        RotationSystem { alpha }
    }
}

fn frac(x: &Rational) -> Rational {
    let f = x - x.floor();
    debug_assert!(!f.is_negative() && f < Rational::from(BigInt::from(1)));
    f
}

fn to_f64(x: &Rational) -> f64 {
    x.to_f64().expect("rational fits in f64")
}

/// `e^{2 pi i theta}` with theta reduced mod 1 exactly first.
fn unit_phase(theta: &Rational) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * to_f64(&frac(theta)))
}

/// The Koopman operator `U_T f = f o T`: diagonal on frequencies,
/// `c_k -> c_k e^{2 pi i k alpha}`; unitary, so the L2 norm is kept.
pub fn koopman(f: &TrigPoly, alpha: &Rational) -> TrigPoly {
    TrigPoly::new(f.coeffs().map(|(k, c)| {
        let theta = alpha * BigInt::from(k);
        (k, c * unit_phase(&theta))
    }))
}

/// `D_n(theta) = (1/n) sum_{j=1}^{n} e^{2 pi i j theta}` in closed form:
/// 1 when theta is an integer, otherwise a geometric sum. The arguments
/// `theta` and `n theta` are reduced mod 1 exactly, so the evaluation
/// stays accurate for huge n.
pub fn dirichlet_factor(n: u64, theta: &Rational) -> Complex64 {
    assert!(n >= 1);
    if theta.is_integer() {
        return Complex64::new(1.0, 0.0);
    }
    let num = unit_phase(&(theta * BigInt::from(n))) - 1.0;
    let den = unit_phase(theta) - 1.0;
    unit_phase(theta) * (num / den) / n as f64
}

/// `|D_n(theta)| = |sin(pi n theta)| / (n |sin(pi theta)|)`, with both
/// arguments reduced mod 1 exactly.
pub fn dirichlet_magnitude(n: u64, theta: &Rational) -> f64 {
    assert!(n >= 1);
    if theta.is_integer() {
        return 1.0;
    }
    let s_num = (PI * to_f64(&frac(&(theta * BigInt::from(n))))).sin().abs();
    let s_den = (PI * to_f64(&frac(theta))).sin().abs();
    s_num / (n as f64 * s_den)
}

/// The ergodic average `g_n = (1/n) sum_{i=1}^n f o T^i`: diagonal with
/// multiplier `D_n(k alpha)` at frequency k. The mean coefficient is
/// untouched exactly since `D_n(0) = 1` by the integer branch.
pub fn ergodic_average(f: &TrigPoly, alpha: &Rational, n: u64) -> TrigPoly {
    assert!(n >= 1);
    TrigPoly::new(f.coeffs().map(|(k, c)| {
        let theta = alpha * BigInt::from(k);
        (k, c * dirichlet_factor(n, &theta))
    }))
}

/// `||g_n - c_0||_2 = sqrt(sum_{k != 0} |c_k|^2 |D_n(k alpha)|^2)` via
/// Parseval.
pub fn l2_distance_to_mean(f: &TrigPoly, alpha: &Rational, n: u64) -> f64 {
    assert!(n >= 1);
    f.coeffs()
        .filter(|&(k, _)| k != 0)
        .map(|(k, c)| {
            let theta = alpha * BigInt::from(k);
            let m = dirichlet_magnitude(n, &theta);
            c.norm_sqr() * m * m
        })
        .sum::<f64>()
        .sqrt()
}

/// Whether frequency k resonates with the rotation: `k alpha` integer,
/// making `e^{2 pi i k x}` a T-invariant non-constant function (T is
/// not ergodic for rational alpha).
pub fn is_resonant(k: i64, alpha: &Rational) -> bool {
    (alpha * BigInt::from(k)).is_integer()
}

/// `c/n` envelope constant for a fixed f: from `|sin(pi n theta)| <= 1`,
/// `|D_n(k alpha)| <= 1/(n |sin(pi k alpha)|)`, so the distance to the
/// mean is at most `(1/n) sqrt(sum_{k != 0} |c_k|^2 / sin^2(pi k alpha))`.
pub fn envelope_constant(f: &TrigPoly, alpha: &Rational) -> f64 {
    f.coeffs()
        .filter(|&(k, _)| k != 0)
        .map(|(k, c)| {
            let theta = frac(&(alpha * BigInt::from(k)));
            assert!(!theta.is_zero(), "resonant frequency has no 1/n envelope");
            let s = (PI * to_f64(&theta)).sin().abs();
            c.norm_sqr() / (s * s)
        })
        .sum::<f64>()
        .sqrt()
}

fn convergent(partial_quotients: impl IntoIterator<Item = u64>) -> Rational {
    let terms: Vec<u64> = partial_quotients.into_iter().collect();
    let mut value = Rational::from(BigInt::from(*terms.last().unwrap()));
    for &a in terms.iter().rev().skip(1) {
        value = Rational::from(BigInt::from(a)) + value.recip();
    }
    value
}

/// Continued-fraction convergent of sqrt(2) = [1; 2, 2, 2, ...] with
/// `depth` partial quotients after the integer part.
pub fn sqrt2_convergent(depth: usize) -> Rational {
    convergent(std::iter::once(1).chain(std::iter::repeat(2).take(depth)))
}

/// Continued-fraction convergent of the golden ratio = [1; 1, 1, ...].
pub fn golden_convergent(depth: usize) -> Rational {
    convergent(std::iter::repeat(1).take(depth + 1))
}
