//! Exact and numeric kernels for analytic group theory.
//!
//! The crate is organised around a handful of independent subsystems:
//!
//! * [`words`] — reduced words in free groups, ball enumeration and the
//!   paradoxical decomposition of `F_2`.
//! * [`pingpong`] — exact ping-pong certificates on the rational
//!   projective line.
//! * [`cayley`] — Cayley-graph balls, growth functions, boundaries,
//!   Cheeger quotients and Folner certificates for oracle-defined groups.
//! * [`expander`] — Cayley graphs of `SL_k(Z/nZ)`, spectral gaps and
//!   exact vertex expansion.
//! * [`padic`] — truncated p-adic arithmetic and the product formula.
//! * [`btree`] — the Bruhat-Tits tree of `SL_2(Q_p)`.
//! * [`projdyn`] — KAK decomposition, projective contraction dynamics
//!   and the ping-pong-player construction over the reals.
//! * [`ergodic`] — von Neumann ergodic averages for circle rotations
//!   acting on trigonometric polynomials.
//!
//! Exact subsystems work over arbitrary-precision rationals and never
//! use tolerances; the numeric subsystems ([`projdyn`], [`ergodic`],
//! spectral parts of [`expander`]) work over the fixed floating scalar
//! [`Real`].

pub mod btree;
pub mod cayley;
pub mod ergodic;
pub mod expander;
pub mod graph;
pub mod padic;
pub mod pingpong;
pub mod projdyn;
pub mod words;

/// Default floating scalar for the numeric subsystems.
pub type Real = f64;

/// Arbitrary-precision rational used by the exact subsystems.
pub type Rational = num::BigRational;

/// Arbitrary-precision integer used by the exact subsystems.
pub type Integer = num::BigInt;
