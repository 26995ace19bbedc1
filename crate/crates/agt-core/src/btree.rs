//! The Bruhat-Tits tree of `SL_2(Q_p)`.
//!
//! Vertices are homothety classes of `Z_p`-lattices in `Q_p^2`. The
//! ambient scalars are rationals with p-power denominators, so every
//! computation is exact integer arithmetic. A class is stored by the
//! canonical lattice basis
//!
//! ```text
//!   [[p^a, c], [0, p^b]]   with 0 <= c < p^b
//! ```
//!
//! (rows are generators), normalized by homothety to the primitive
//! representative: the lattice lies in `Z_p^2` but not in `p Z_p^2`,
//! i.e. `min(a, b, v_p(c)) = 0`. Primitivity, rather than `min(a, b) =
//! 0`, is the right scalar normalization: classes at distance 2 or more
//! with `v_p(c) = 0` admit no representative with `min(a, b) = 0` and
//! integral `c`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer as _, One, Signed, Zero};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BTreeError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("matrix entries must have p-power denominators")]
    NotPLocal,
    #[error("basis matrix is singular")]
    SingularBasis,
    #[error("classes live over different primes: {0} and {1}")]
    PrimeMismatch(u32, u32),
    #[error("matrix must have determinant exactly 1")]
    DeterminantNotOne,
    #[error("ball of radius {radius} would have {size} vertices (limit {limit})")]
    SizeLimit { radius: u64, size: u64, limit: u64 },
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// p-adic valuation of a nonzero integer, with the unit cofactor.
fn int_valuation(n: &BigInt, p: u32) -> (i64, BigInt) {
    assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.clone();
    while (&m % &p).is_zero() {
        m /= &p;
        v += 1;
    }
    (v, m)
}

/// p-adic valuation of a nonzero rational.
fn rat_valuation(q: &BigRational, p: u32) -> i64 {
    int_valuation(q.numer(), p).0 - int_valuation(q.denom(), p).0
}

fn pow_big(p: u32, e: u64) -> BigInt {
    num::pow::pow(BigInt::from(p), e as usize)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    assert!(r0.is_one(), "inputs must be coprime");
    t0.mod_floor(m)
}

/// A 2x2 matrix over `Z[1/p]`, the exact ambient for all tree
/// computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLocalMatrix {
    pub p: u32,
    pub entries: [[BigRational; 2]; 2],
}

impl PLocalMatrix {
    pub fn new(p: u32, entries: [[BigRational; 2]; 2]) -> Result<Self, BTreeError> {
        if !is_prime(p) {
            return Err(BTreeError::NotPrime(p));
        }
        for row in &entries {
            for e in row {
                let mut d = e.denom().abs();
                let p_big = BigInt::from(p);
                while (&d % &p_big).is_zero() {
                    d /= &p_big;
                }
                if !d.is_one() {
                    return Err(BTreeError::NotPLocal);
                }
            }
        }
        Ok(PLocalMatrix { p, entries })
    }

    pub fn from_int_rows(p: u32, rows: [[i64; 2]; 2]) -> Self {
        let conv = |x: i64| BigRational::from_integer(BigInt::from(x));
        PLocalMatrix::new(
            p,
            [
                [conv(rows[0][0]), conv(rows[0][1])],
                [conv(rows[1][0]), conv(rows[1][1])],
            ],
        )
        .expect("integer entries are p-local")
    }

    pub fn identity(p: u32) -> Self {
        PLocalMatrix::from_int_rows(p, [[1, 0], [0, 1]])
    }

    pub fn det(&self) -> BigRational {
        &self.entries[0][0] * &self.entries[1][1] - &self.entries[0][1] * &self.entries[1][0]
    }

    pub fn mul(&self, other: &PLocalMatrix) -> PLocalMatrix {
        assert_eq!(self.p, other.p);
        let e = |m: &PLocalMatrix, i: usize, j: usize| m.entries[i][j].clone();
        let mut entries: [[BigRational; 2]; 2] = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                entries[i][j] = e(self, i, 0) * e(other, 0, j) + e(self, i, 1) * e(other, 1, j);
            }
        }
        PLocalMatrix { p: self.p, entries }
    }

    pub fn transpose(&self) -> PLocalMatrix {
        let e = &self.entries;
        PLocalMatrix {
            p: self.p,
            entries: [
                [e[0][0].clone(), e[1][0].clone()],
                [e[0][1].clone(), e[1][1].clone()],
            ],
        }
    }

    pub fn inverse(&self) -> Result<PLocalMatrix, BTreeError> {
        let d = self.det();
        if d.is_zero() {
            return Err(BTreeError::SingularBasis);
        }
        let e = &self.entries;
        Ok(PLocalMatrix {
            p: self.p,
            entries: [
                [&e[1][1] / &d, -(&e[0][1] / &d)],
                [-(&e[1][0] / &d), &e[0][0] / &d],
            ],
        })
    }

    /// All entries in `Z_p`, i.e. nonnegative valuation.
    pub fn is_p_integral(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|e| e.is_zero() || rat_valuation(e, self.p) >= 0)
    }
}

/// A vertex of the tree: the canonical primitive representative
/// `[[p^a, c], [0, p^b]]`, rows generating the lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeClass {
    pub p: u32,
    pub a: u64,
    pub b: u64,
    pub c: BigInt,
}

impl fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl LatticeClass {
    pub fn base(p: u32) -> Self {
        LatticeClass { p, a: 0, b: 0, c: BigInt::zero() }
    }

    /// The canonical basis as a matrix.
    pub fn representative(&self) -> PLocalMatrix {
        let r = |x: BigInt| BigRational::from_integer(x);
        PLocalMatrix {
            p: self.p,
            entries: [
                [r(pow_big(self.p, self.a)), r(self.c.clone())],
                [r(BigInt::zero()), r(pow_big(self.p, self.b))],
            ],
        }
    }
}

/// Reduces a basis (rows = lattice generators) to the canonical
/// primitive upper-triangular form. Row operations are restricted to
/// those invertible over `Z_p`: swaps, adding a `Z_p`-multiple of one
/// row to another, and scaling a row by a p-unit.
pub fn canonicalize(m: &PLocalMatrix) -> Result<LatticeClass, BTreeError> {
    let p = m.p;
    if m.det().is_zero() {
        return Err(BTreeError::SingularBasis);
    }
    // clear denominators by a global p-power (a homothety)
    let scale = m
        .entries
        .iter()
        .flatten()
        .filter(|e| !e.is_zero())
        .map(|e| rat_valuation(e, p))
        .min()
        .unwrap()
        .min(0);
    let clear = BigRational::from_integer(pow_big(p, (-scale) as u64));
    let as_int = |q: &BigRational| -> BigInt {
        let r = q * &clear;
        assert!(r.denom().is_one() || r.is_zero());
        r.numer() / r.denom()
    };
    let mut rows = [
        [as_int(&m.entries[0][0]), as_int(&m.entries[0][1])],
        [as_int(&m.entries[1][0]), as_int(&m.entries[1][1])],
    ];

    // zero the lower-left entry keeping integer rows
    if rows[0][0].is_zero() {
        rows.swap(0, 1);
    } else if !rows[1][0].is_zero() {
        let v1 = int_valuation(&rows[0][0], p).0;
        let v2 = int_valuation(&rows[1][0], p).0;
        if v1 > v2 {
            rows.swap(0, 1);
        }
        let v1 = int_valuation(&rows[0][0], p).0;
        let unit = &rows[0][0] / pow_big(p, v1 as u64);
        let factor = &rows[1][0] / pow_big(p, v1 as u64);
        // r2 <- unit * r2 - factor * r1; the multiplier of r2 is a
        // p-unit, so the lattice is unchanged
        rows[1] = [
            &unit * &rows[1][0] - &factor * &rows[0][0],
            &unit * &rows[1][1] - &factor * &rows[0][1],
        ];
        debug_assert!(rows[1][0].is_zero());
    }
    if rows[0][0].is_zero() || rows[1][1].is_zero() {
        return Err(BTreeError::SingularBasis);
    }

    let (a_raw, u) = int_valuation(&rows[0][0], p);
    let (b_raw, _) = int_valuation(&rows[1][1], p);
    let (a_raw, b_raw) = (a_raw as u64, b_raw as u64);
    // scale row 1 by u^{-1} (a p-unit) and row 2 to (0, p^b), then
    // reduce the corner modulo p^b
    let c = if b_raw == 0 {
        BigInt::zero()
    } else {
        let modulus = pow_big(p, b_raw);
        (&rows[0][1] * mod_inverse(&u.mod_floor(&modulus), &modulus)).mod_floor(&modulus)
    };

    // homothety: divide out the common p-power to reach primitivity
    let c_val = if c.is_zero() { u64::MAX } else { int_valuation(&c, p).0 as u64 };
    let shift = a_raw.min(b_raw).min(c_val);
    Ok(LatticeClass {
        p,
        a: a_raw - shift,
        b: b_raw - shift,
        c: &c / pow_big(p, shift),
    })
}

/// Exact tree distance: the transition matrix `S` with `R_y = S R_x`
/// has elementary divisors `p^alpha, p^beta` over `Z_p`, where `alpha`
/// is the minimal entry valuation and `alpha + beta = v_p(det S)`; the
/// distance is `|alpha - beta|`.
pub fn class_distance(x: &LatticeClass, y: &LatticeClass) -> Result<u64, BTreeError> {
    if x.p != y.p {
        return Err(BTreeError::PrimeMismatch(x.p, y.p));
    }
    let p = x.p;
    let s = y.representative().mul(&x.representative().inverse()?);
    let alpha = s
        .entries
        .iter()
        .flatten()
        .filter(|e| !e.is_zero())
        .map(|e| rat_valuation(e, p))
        .min()
        .unwrap();
    let dv = rat_valuation(&s.det(), p);
    Ok((dv - 2 * alpha).unsigned_abs())
}

/// The `p + 1` neighbors, one per line of `F_p^2`: with generator rows
/// `r1, r2`, the lines give lattices `<r1 + s r2, p r2>` for
/// `s = 0..p-1` and `<r2, p r1>`.
pub fn neighbors(x: &LatticeClass) -> Vec<LatticeClass> {
    let p = x.p;
    let rep = x.representative();
    let r1 = &rep.entries[0];
    let r2 = &rep.entries[1];
    let p_rat = BigRational::from_integer(BigInt::from(p));
    let mut out = Vec::with_capacity(p as usize + 1);
    for s in 0..p {
        let s_rat = BigRational::from_integer(BigInt::from(s));
        let m = PLocalMatrix {
            p,
            entries: [
                [&r1[0] + &s_rat * &r2[0], &r1[1] + &s_rat * &r2[1]],
                [&p_rat * &r2[0], &p_rat * &r2[1]],
            ],
        };
        out.push(canonicalize(&m).expect("sublattice basis is nonsingular"));
    }
    let m = PLocalMatrix {
        p,
        entries: [
            [r2[0].clone(), r2[1].clone()],
            [&p_rat * &r1[0], &p_rat * &r1[1]],
        ],
    };
    out.push(canonicalize(&m).expect("sublattice basis is nonsingular"));
    out
}

/// A BFS ball in the tree.
#[derive(Debug, Clone, Serialize)]
pub struct TreeBall {
    pub p: u32,
    pub radius: u64,
    pub base: LatticeClass,
    pub vertices: Vec<LatticeClass>,
    pub depths: Vec<u64>,
    pub edges: Vec<(usize, usize)>,
}

const BALL_LIMIT: u64 = 100_000;

/// Exact vertex count of the radius-R ball of a (p+1)-regular tree.
pub fn ball_size(p: u32, radius: u64) -> u64 {
    if radius == 0 {
        return 1;
    }
    let p = p as u64;
    1 + (p + 1) * (p.pow(radius as u32) - 1) / (p - 1)
}

pub fn build_ball(base: &LatticeClass, radius: u64) -> Result<TreeBall, BTreeError> {
    let expected = ball_size(base.p, radius);
    if expected > BALL_LIMIT {
        return Err(BTreeError::SizeLimit { radius, size: expected, limit: BALL_LIMIT });
    }
    let mut index: HashMap<LatticeClass, usize> = HashMap::new();
    let mut vertices = vec![base.clone()];
    let mut depths = vec![0u64];
    let mut edges = Vec::new();
    index.insert(base.clone(), 0);
    let mut head = 0;
    while head < vertices.len() {
        let (v, depth) = (vertices[head].clone(), depths[head]);
        if depth == radius {
            break;
        }
        for nb in neighbors(&v) {
            let j = *index.entry(nb.clone()).or_insert_with(|| {
                vertices.push(nb.clone());
                depths.push(depth + 1);
                vertices.len() - 1
            });
            if head < j {
                edges.push((head, j));
            }
        }
        head += 1;
    }
    Ok(TreeBall { p: base.p, radius, base: base.clone(), vertices, depths, edges })
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeReport {
    pub vertex_count: u64,
    pub edge_count: u64,
    pub connected: bool,
    pub edge_count_is_tree: bool,
    pub interior_degrees_ok: bool,
    pub depths_match_distance: bool,
}

impl TreeReport {
    pub fn passed(&self) -> bool {
        self.connected && self.edge_count_is_tree && self.interior_degrees_ok
            && self.depths_match_distance
    }
}

pub fn verify_tree(ball: &TreeBall) -> Result<TreeReport, BTreeError> {
    let n = ball.vertices.len();
    let mut degree = vec![0usize; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &ball.edges {
        degree[u] += 1;
        degree[v] += 1;
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    let interior_degrees_ok = (0..n)
        .filter(|&i| ball.depths[i] < ball.radius)
        .all(|i| degree[i] == ball.p as usize + 1);
    let mut depths_match_distance = true;
    for (i, v) in ball.vertices.iter().enumerate() {
        if class_distance(&ball.base, v)? != ball.depths[i] {
            depths_match_distance = false;
        }
    }
    Ok(TreeReport {
        vertex_count: n as u64,
        edge_count: ball.edges.len() as u64,
        connected: count == n,
        edge_count_is_tree: ball.edges.len() == n - 1,
        interior_degrees_ok,
        depths_match_distance,
    })
}

/// Action of `g` on a lattice class: with rows as generators, the image
/// lattice has generator matrix `R g^T`.
pub fn act(g: &PLocalMatrix, x: &LatticeClass) -> Result<LatticeClass, BTreeError> {
    if g.p != x.p {
        return Err(BTreeError::PrimeMismatch(g.p, x.p));
    }
    if !g.det().is_one() {
        return Err(BTreeError::DeterminantNotOne);
    }
    canonicalize(&x.representative().mul(&g.transpose()))
}

/// Whether `g` fixes the base vertex. By the lattice characterization
/// this must agree with `g.is_p_integral()`; both are computed
/// independently and the tests cross-check them.
pub fn in_stabilizer(g: &PLocalMatrix) -> Result<bool, BTreeError> {
    let base = LatticeClass::base(g.p);
    Ok(act(g, &base)? == base)
}

/// Distance parity from the base vertex; invariant under the action.
pub fn orbit_parity(x: &LatticeClass) -> u64 {
    class_distance(&LatticeClass::base(x.p), x).expect("same prime") % 2
}

/// A deterministic pseudorandom element of `SL_2(Z[1/p])`: a product of
/// elementary matrices with entries `m p^e`.
pub fn random_element<R: rand::Rng>(rng: &mut R, p: u32, steps: usize) -> PLocalMatrix {
    let mut g = PLocalMatrix::identity(p);
    for _ in 0..steps {
        let m = rng.gen_range(-2i64..=2);
        let e = rng.gen_range(-2i32..=2);
        let t = BigRational::from_integer(BigInt::from(m))
            * BigRational::new(BigInt::from(p).pow(e.unsigned_abs()), BigInt::one())
                .pow(e.signum());
        let one = BigRational::one();
        let zero = BigRational::zero();
        let f = if rng.gen_bool(0.5) {
            PLocalMatrix { p, entries: [[one.clone(), t], [zero.clone(), one.clone()]] }
        } else {
            PLocalMatrix { p, entries: [[one.clone(), zero.clone()], [t, one.clone()]] }
        };
        g = g.mul(&f);
    }
    g
}
