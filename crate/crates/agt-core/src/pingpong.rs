//! Exact ping-pong certificates on the rational projective line.
//!
//! Projective points are exact rational slopes with a dedicated symbol
//! for the vertical line, never floating pairs: a certificate is a proof
//! and must not carry tolerances. Player sets are finite unions of open
//! arcs with rational endpoints; arcs may wrap through infinity.

use crate::words::{self, Word};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

/// A point of `RP^1` as a slope `x/y`, with `Inf` for the vertical line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProjSlope {
    Finite(BigRational),
    Inf,
}

impl ProjSlope {
    pub fn from_int(n: i64) -> Self {
        ProjSlope::Finite(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        if den == 0 {
            ProjSlope::Inf
        } else {
            ProjSlope::Finite(BigRational::new(num.into(), den.into()))
        }
    }

    /// Linear order with `Inf` greatest; the circular order on `RP^1` is
    /// derived from this by cutting at a base point.
    fn linear_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ProjSlope::Inf, ProjSlope::Inf) => Ordering::Equal,
            (ProjSlope::Inf, _) => Ordering::Greater,
            (_, ProjSlope::Inf) => Ordering::Less,
            (ProjSlope::Finite(a), ProjSlope::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ProjSlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjSlope::Inf => write!(f, "inf"),
            ProjSlope::Finite(q) => write!(f, "{}", q),
        }
    }
}

impl Serialize for ProjSlope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Compares `x` and `y` in the circular order starting at the cut `c`
/// and moving in the direction of increasing slope (through `Inf` and
/// around to the negative side).
fn cmp_from(c: &ProjSlope, x: &ProjSlope, y: &ProjSlope) -> Ordering {
    if x == y {
        return Ordering::Equal;
    }
    if x == c {
        return Ordering::Less;
    }
    if y == c {
        return Ordering::Greater;
    }
    let after = |t: &ProjSlope| t.linear_cmp(c) == Ordering::Greater;
    match (after(x), after(y)) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => x.linear_cmp(y),
    }
}

/// An open arc of `RP^1` from `start` to `end`, moving in the direction
/// of increasing slope (wrapping through `Inf` when `end` precedes
/// `start` linearly). Endpoints are excluded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub start: ProjSlope,
    pub end: ProjSlope,
}

impl Arc {
    pub fn new(start: ProjSlope, end: ProjSlope) -> Self {
        assert!(start != end, "arc endpoints must be distinct");
        Arc { start, end }
    }

    pub fn contains(&self, t: &ProjSlope) -> bool {
        t != &self.start
            && t != &self.end
            && cmp_from(&self.start, t, &self.end) == Ordering::Less
    }

    /// Some rational point strictly inside the arc; used to resolve the
    /// orientation of image arcs.
    pub fn interior_point(&self) -> ProjSlope {
        let one = BigRational::one();
        let p = match (&self.start, &self.end) {
            (ProjSlope::Finite(a), ProjSlope::Finite(b)) if a < b => {
                ProjSlope::Finite((a + b) / BigRational::from_integer(2.into()))
            }
            (ProjSlope::Finite(a), _) => ProjSlope::Finite(a + &one),
            (ProjSlope::Inf, ProjSlope::Finite(b)) => ProjSlope::Finite(b - &one),
            (ProjSlope::Inf, ProjSlope::Inf) => unreachable!(),
        };
        debug_assert!(self.contains(&p));
        p
    }

    fn subset_of(&self, other: &Arc) -> bool {
        cmp_from(&other.start, &self.start, &self.end) == Ordering::Less
            && cmp_from(&other.start, &self.end, &other.end) != Ordering::Greater
    }

    fn intersects(&self, other: &Arc) -> bool {
        self == other
            || self.contains(&other.start)
            || self.contains(&other.end)
            || other.contains(&self.start)
            || other.contains(&self.end)
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.start, self.end)
    }
}

/// A finite union of pairwise disjoint open arcs, sorted by start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlopeIntervalSet {
    arcs: Vec<Arc>,
}

#[derive(Debug, thiserror::Error)]
pub enum PingPongError {
    #[error("arcs overlap: {0} and {1}")]
    OverlappingArcs(Arc, Arc),
    #[error("player sets are not pairwise disjoint: {0} meets {1}")]
    DisjointnessViolation(String, String),
    #[error("inclusion failed: {element} does not map {from_set} into {target} (witness arc {witness})")]
    InclusionFailure {
        element: String,
        from_set: String,
        target: String,
        witness: Arc,
    },
    #[error("the first free factor must have order at least 3")]
    OrderTooSmall,
    #[error("no absorbing arc found for infinite-cyclic factor {0}")]
    NoAbsorbingArc(String),
    #[error("matrix {0:?} does not have determinant 1")]
    DeterminantNotOne([[i64; 2]; 2]),
    #[error("word length cap {0} exceeds the supported bound 14")]
    LengthCapTooLarge(u64),
}

impl fmt::Display for SlopeIntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.arcs.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

impl SlopeIntervalSet {
    pub fn new(mut arcs: Vec<Arc>) -> Result<Self, PingPongError> {
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                if arcs[i].intersects(&arcs[j]) {
                    return Err(PingPongError::OverlappingArcs(
                        arcs[i].clone(),
                        arcs[j].clone(),
                    ));
                }
            }
        }
        arcs.sort_by(|x, y| {
            x.start
                .linear_cmp(&y.start)
                .then_with(|| x.end.linear_cmp(&y.end))
        });
        Ok(SlopeIntervalSet { arcs })
    }

    pub fn single(start: ProjSlope, end: ProjSlope) -> Self {
        SlopeIntervalSet { arcs: vec![Arc::new(start, end)] }
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn contains(&self, t: &ProjSlope) -> bool {
        self.arcs.iter().any(|a| a.contains(t))
    }

    /// Union of disjoint sets; panics if the inputs overlap.
    pub fn union(&self, other: &SlopeIntervalSet) -> SlopeIntervalSet {
        let mut arcs = self.arcs.clone();
        arcs.extend(other.arcs.iter().cloned());
        SlopeIntervalSet::new(arcs).expect("union of disjoint sets")
    }

    pub fn is_subset_of(&self, other: &SlopeIntervalSet) -> bool {
        self.arcs
            .iter()
            .all(|a| other.arcs.iter().any(|b| a.subset_of(b)))
    }

    /// First arc of `self` not contained in `other`, if any.
    fn subset_witness(&self, other: &SlopeIntervalSet) -> Option<Arc> {
        self.arcs
            .iter()
            .find(|a| !other.arcs.iter().any(|b| a.subset_of(b)))
            .cloned()
    }

    pub fn is_disjoint_from(&self, other: &SlopeIntervalSet) -> bool {
        self.arcs
            .iter()
            .all(|a| other.arcs.iter().all(|b| !a.intersects(b)))
    }
}

/// An element of `SL_2(Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct MatZ {
    pub entries: [[i64; 2]; 2],
}

impl MatZ {
    pub fn new(entries: [[i64; 2]; 2]) -> Result<Self, PingPongError> {
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        if det != 1 {
            return Err(PingPongError::DeterminantNotOne(entries));
        }
        Ok(MatZ { entries })
    }

    pub fn identity() -> Self {
        MatZ { entries: [[1, 0], [0, 1]] }
    }

    pub fn inverse(&self) -> MatZ {
        let [[a, b], [c, d]] = self.entries;
        MatZ { entries: [[d, -b], [-c, a]] }
    }

    pub fn mul(&self, other: &MatZ) -> MatZ {
        let x = self.entries;
        let y = other.entries;
        MatZ {
            entries: [
                [
                    x[0][0] * y[0][0] + x[0][1] * y[1][0],
                    x[0][0] * y[0][1] + x[0][1] * y[1][1],
                ],
                [
                    x[1][0] * y[0][0] + x[1][1] * y[1][0],
                    x[1][0] * y[0][1] + x[1][1] * y[1][1],
                ],
            ],
        }
    }

    pub fn pow(&self, n: u32) -> MatZ {
        let mut acc = MatZ::identity();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for MatZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.entries;
        write!(f, "[[{}, {}], [{}, {}]]", a, b, c, d)
    }
}

/// Action of `SL_2` on slopes: `x/y -> (a x + b y)/(c x + d y)`.
pub fn act_slope(g: &MatZ, t: &ProjSlope) -> ProjSlope {
    let [[a, b], [c, d]] = g.entries;
    let (x, y): (BigRational, BigRational) = match t {
        ProjSlope::Inf => (BigRational::one(), BigRational::zero()),
        ProjSlope::Finite(q) => (q.clone(), BigRational::one()),
    };
    let big = |n: i64| BigRational::from_integer(BigInt::from(n));
    let num = big(a) * &x + big(b) * &y;
    let den = big(c) * &x + big(d) * &y;
    if den.is_zero() {
        ProjSlope::Inf
    } else {
        ProjSlope::Finite(num / den)
    }
}

/// Exact image of an arc set under a Mobius map. Endpoints map exactly;
/// the orientation of each image arc is resolved by mapping an interior
/// rational point.
pub fn image_interval(g: &MatZ, s: &SlopeIntervalSet) -> SlopeIntervalSet {
    let arcs = s
        .arcs
        .iter()
        .map(|arc| {
            let p = act_slope(g, &arc.start);
            let q = act_slope(g, &arc.end);
            let mid = act_slope(g, &arc.interior_point());
            let candidate = Arc::new(p.clone(), q.clone());
            if candidate.contains(&mid) {
                candidate
            } else {
                Arc::new(q, p)
            }
        })
        .collect();
    // Mobius maps are injective on RP^1, so disjointness is preserved.
    SlopeIntervalSet::new(arcs).expect("injective image of disjoint arcs")
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckedInclusion {
    pub element: String,
    pub source: String,
    pub target: String,
    pub ok: bool,
}

/// A verified ping-pong table: every listed inclusion holds exactly.
#[derive(Debug, Clone, Serialize)]
pub struct FreenessCertificate {
    pub players: Vec<MatZ>,
    pub sets: Vec<(String, SlopeIntervalSet)>,
    pub checked_inclusions: Vec<CheckedInclusion>,
    pub conclusion: String,
}

fn check_inclusion(
    element: &MatZ,
    element_name: &str,
    source: &SlopeIntervalSet,
    source_name: &str,
    target: &SlopeIntervalSet,
    target_name: &str,
    log: &mut Vec<CheckedInclusion>,
) -> Result<(), PingPongError> {
    let image = image_interval(element, source);
    match image.subset_witness(target) {
        None => {
            log.push(CheckedInclusion {
                element: element_name.into(),
                source: source_name.into(),
                target: target_name.into(),
                ok: true,
            });
            Ok(())
        }
        Some(witness) => Err(PingPongError::InclusionFailure {
            element: element_name.into(),
            from_set: source_name.into(),
            target: target_name.into(),
            witness,
        }),
    }
}

/// First formulation: `a, b` generate `F_2` whenever the four sets are
/// disjoint and
/// `a(A+ u B- u B+) <= A+`, `a^-1(A- u B- u B+) <= A-`,
/// `b(B+ u A- u A+) <= B+`, `b^-1(B- u A- u A+) <= B-`.
pub fn certify_first_form(
    a: &MatZ,
    b: &MatZ,
    a_plus: &SlopeIntervalSet,
    a_minus: &SlopeIntervalSet,
    b_plus: &SlopeIntervalSet,
    b_minus: &SlopeIntervalSet,
) -> Result<FreenessCertificate, PingPongError> {
    let named = [
        ("A+", a_plus),
        ("A-", a_minus),
        ("B+", b_plus),
        ("B-", b_minus),
    ];
    for i in 0..4 {
        for j in i + 1..4 {
            if !named[i].1.is_disjoint_from(named[j].1) {
                return Err(PingPongError::DisjointnessViolation(
                    named[i].0.into(),
                    named[j].0.into(),
                ));
            }
        }
    }

    let mut log = Vec::new();
    let b_both = b_plus.union(b_minus);
    let a_both = a_plus.union(a_minus);
    check_inclusion(a, "a", &a_plus.union(&b_both), "A+ u B- u B+", a_plus, "A+", &mut log)?;
    check_inclusion(
        &a.inverse(),
        "a^-1",
        &a_minus.union(&b_both),
        "A- u B- u B+",
        a_minus,
        "A-",
        &mut log,
    )?;
    check_inclusion(b, "b", &b_plus.union(&a_both), "B+ u A- u A+", b_plus, "B+", &mut log)?;
    check_inclusion(
        &b.inverse(),
        "b^-1",
        &b_minus.union(&a_both),
        "B- u A- u A+",
        b_minus,
        "B-",
        &mut log,
    )?;

    Ok(FreenessCertificate {
        players: vec![*a, *b],
        sets: named.iter().map(|(n, s)| (n.to_string(), (*s).clone())).collect(),
        checked_inclusions: log,
        conclusion: "<a, b> is free of rank 2".into(),
    })
}

/// One cyclic free factor for the second formulation. `order` is the
/// projective order of the generator (`None` for infinite).
#[derive(Debug, Clone, Copy)]
pub struct CyclicFactor {
    pub generator: MatZ,
    pub order: Option<u32>,
}

/// Listed nontrivial powers of a finite-order factor.
fn finite_powers(f: &CyclicFactor) -> Vec<(String, MatZ)> {
    let k = f.order.expect("finite factor");
    (1..k)
        .map(|j| {
            let name = if j == 1 { "g".to_string() } else { format!("g^{}", j) };
            (name, f.generator.pow(j))
        })
        .collect()
}

/// For an infinite cyclic factor `<g>` we cannot list all powers, so we
/// verify a strictly stronger finite condition: an open arc `U+ <= A`
/// disjoint from `B` with `g(U+ u B) <= U+`, and likewise `U- <= A` for
/// `g^-1`. By induction every nonzero power then maps `B` into `A`.
/// The absorbing arcs are searched among arcs spanned by the endpoints
/// of `A`, `B`, `g B` and `g^-1 B`.
fn certify_infinite_factor(
    g: &MatZ,
    g_name: &str,
    from: &SlopeIntervalSet,
    into: &SlopeIntervalSet,
    log: &mut Vec<CheckedInclusion>,
) -> Result<(), PingPongError> {
    let mut endpoints: Vec<ProjSlope> = Vec::new();
    let push_eps = |s: &SlopeIntervalSet, eps: &mut Vec<ProjSlope>| {
        for a in s.arcs() {
            eps.push(a.start.clone());
            eps.push(a.end.clone());
        }
    };
    push_eps(into, &mut endpoints);
    push_eps(from, &mut endpoints);
    push_eps(&image_interval(g, from), &mut endpoints);
    push_eps(&image_interval(&g.inverse(), from), &mut endpoints);
    endpoints.push(ProjSlope::Inf);
    endpoints.push(ProjSlope::from_int(0));
    endpoints.dedup();

    let mut find_absorbing = |h: &MatZ, h_name: &str| -> Result<(), PingPongError> {
        for s in &endpoints {
            for e in &endpoints {
                if s == e {
                    continue;
                }
                let u = SlopeIntervalSet::single(s.clone(), e.clone());
                if !u.is_subset_of(into) || !u.is_disjoint_from(from) {
                    continue;
                }
                let domain = u.union(from);
                if image_interval(h, &domain).is_subset_of(&u) {
                    log.push(CheckedInclusion {
                        element: h_name.into(),
                        source: format!("{} u B where U = {}", u, u),
                        target: format!("U = {}", u),
                        ok: true,
                    });
                    return Ok(());
                }
            }
        }
        Err(PingPongError::NoAbsorbingArc(h_name.into()))
    };

    find_absorbing(g, g_name)?;
    find_absorbing(&g.inverse(), &format!("{}^-1", g_name))
}

/// Second formulation: `<G, H> = G * H` whenever `|G| >= 3`, the sets
/// `A, B` are disjoint and nonempty, `g B <= A` for every nontrivial
/// `g` in `G` and `h A <= B` for every nontrivial `h` in `H`.
pub fn certify_second_form(
    gens_g: &[CyclicFactor],
    gens_h: &[CyclicFactor],
    a: &SlopeIntervalSet,
    b: &SlopeIntervalSet,
) -> Result<FreenessCertificate, PingPongError> {
    if !a.is_disjoint_from(b) {
        return Err(PingPongError::DisjointnessViolation("A".into(), "B".into()));
    }

    // |G| >= 3: an infinite factor, a generator of projective order >= 3,
    // or at least two nontrivial listed elements.
    let nontrivial_count: usize = gens_g
        .iter()
        .map(|f| f.order.map_or(usize::MAX, |k| (k - 1) as usize))
        .sum();
    let big_enough = gens_g.iter().any(|f| f.order.is_none() || f.order.unwrap() >= 3)
        || nontrivial_count >= 2;
    if !big_enough {
        return Err(PingPongError::OrderTooSmall);
    }

    let mut log = Vec::new();
    let check_factor = |factors: &[CyclicFactor],
                            prefix: &str,
                            from: &SlopeIntervalSet,
                            from_name: &str,
                            into: &SlopeIntervalSet,
                            into_name: &str,
                            log: &mut Vec<CheckedInclusion>|
     -> Result<(), PingPongError> {
        for (i, f) in factors.iter().enumerate() {
            let name = format!("{}{}", prefix, i);
            match f.order {
                Some(_) => {
                    for (pow_name, m) in finite_powers(f) {
                        let full = format!("{} ({})", name, pow_name);
                        check_inclusion(&m, &full, from, from_name, into, into_name, log)?;
                    }
                }
                None => certify_infinite_factor(&f.generator, &name, from, into, log)?,
            }
        }
        Ok(())
    };

    check_factor(gens_g, "g", b, "B", a, "A", &mut log)?;
    check_factor(gens_h, "h", a, "A", b, "B", &mut log)?;

    let players: Vec<MatZ> = gens_g
        .iter()
        .chain(gens_h.iter())
        .map(|f| f.generator)
        .collect();
    Ok(FreenessCertificate {
        players,
        sets: vec![("A".into(), a.clone()), ("B".into(), b.clone())],
        checked_inclusions: log,
        conclusion: "<G, H> is the free product G * H".into(),
    })
}

/// An affine map `x -> a x + b` of the rational line, `a != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineMap {
    pub scale: BigRational,
    pub shift: BigRational,
}

impl AffineMap {
    pub fn new(scale: BigRational, shift: BigRational) -> Self {
        assert!(!scale.is_zero());
        AffineMap { scale, shift }
    }

    pub fn apply(&self, x: &BigRational) -> BigRational {
        &self.scale * x + &self.shift
    }
}

/// A bounded open rational interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo < hi);
        RatInterval { lo, hi }
    }

    fn image(&self, f: &AffineMap) -> RatInterval {
        let (a, b) = (f.apply(&self.lo), f.apply(&self.hi));
        if f.scale.is_positive() {
            RatInterval { lo: a, hi: b }
        } else {
            RatInterval { lo: b, hi: a }
        }
    }

    fn subset_of(&self, other: &RatInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    fn disjoint_from(&self, other: &RatInterval) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PingCertificate {
    pub checked: Vec<CheckedInclusion>,
    pub conclusion: String,
}

#[derive(Debug, thiserror::Error)]
pub enum PingError {
    #[error("A and B must be disjoint")]
    NotDisjoint,
    #[error("inclusion failed: {element}({witness}) is not inside {target}")]
    InclusionFailure {
        element: String,
        witness: RatInterval,
        target: RatInterval,
    },
}

/// Ping lemma for semigroups: if `A, B` are disjoint, `a(A u B) <= A`
/// and `b(A u B) <= B`, then `a, b` generate a free semigroup.
pub fn certify_ping(
    a: &AffineMap,
    b: &AffineMap,
    set_a: &RatInterval,
    set_b: &RatInterval,
) -> Result<PingCertificate, PingError> {
    if !set_a.disjoint_from(set_b) {
        return Err(PingError::NotDisjoint);
    }
    let mut log = Vec::new();
    for (f, name, target, target_name) in
        [(a, "a", set_a, "A"), (b, "b", set_b, "B")]
    {
        for (src, src_name) in [(set_a, "A"), (set_b, "B")] {
            let img = src.image(f);
            if !img.subset_of(target) {
                return Err(PingError::InclusionFailure {
                    element: name.into(),
                    witness: src.clone(),
                    target: target.clone(),
                });
            }
            log.push(CheckedInclusion {
                element: name.into(),
                source: src_name.into(),
                target: target_name.into(),
                ok: true,
            });
        }
    }
    Ok(PingCertificate {
        checked: log,
        conclusion: "<a, b>+ is a free semigroup".into(),
    })
}

type Mat2Big = [[BigInt; 2]; 2];

fn big_id() -> Mat2Big {
    [
        [BigInt::one(), BigInt::zero()],
        [BigInt::zero(), BigInt::one()],
    ]
}

fn big_from(m: &MatZ) -> Mat2Big {
    let e = m.entries;
    [
        [BigInt::from(e[0][0]), BigInt::from(e[0][1])],
        [BigInt::from(e[1][0]), BigInt::from(e[1][1])],
    ]
}

fn big_mul(x: &Mat2Big, y: &Mat2Big) -> Mat2Big {
    [
        [
            &x[0][0] * &y[0][0] + &x[0][1] * &y[1][0],
            &x[0][0] * &y[0][1] + &x[0][1] * &y[1][1],
        ],
        [
            &x[1][0] * &y[0][0] + &x[1][1] * &y[1][0],
            &x[1][0] * &y[0][1] + &x[1][1] * &y[1][1],
        ],
    ]
}

fn big_is_id(m: &Mat2Big) -> bool {
    m[0][0].is_one() && m[0][1].is_zero() && m[1][0].is_zero() && m[1][1].is_one()
}

#[derive(Debug, Clone, Serialize)]
pub struct NontrivialityReport {
    pub pass: bool,
    pub witness: Option<String>,
    pub words_checked: u64,
}

/// Independent freeness oracle: evaluates every nonempty reduced word of
/// length at most `maxlen` in `a, b` as an exact integer matrix and
/// reports the first one equal to the identity, if any.
pub fn exhaustive_nontriviality(
    a: &MatZ,
    b: &MatZ,
    maxlen: u64,
) -> Result<NontrivialityReport, PingPongError> {
    if maxlen > 14 {
        return Err(PingPongError::LengthCapTooLarge(maxlen));
    }
    // letters a, a^-1, b, b^-1
    let letters = [big_from(a), big_from(&a.inverse()), big_from(b), big_from(&b.inverse())];
    let letter_word = |i: usize| -> Word {
        let w = Word::generator(i / 2);
        if i % 2 == 1 {
            words::invert(&w)
        } else {
            w
        }
    };

    let mut checked = 0u64;
    // DFS over reduced letter sequences; `last` blocks the inverse letter.
    let mut stack: Vec<(Mat2Big, Word, usize)> = vec![(big_id(), Word::identity(), usize::MAX)];
    while let Some((mat, word, last)) = stack.pop() {
        if word.len() >= maxlen {
            continue;
        }
        for i in 0..4 {
            if last != usize::MAX && i == last ^ 1 {
                continue;
            }
            let next = big_mul(&mat, &letters[i]);
            let next_word = words::multiply(&word, &letter_word(i));
            checked += 1;
            if big_is_id(&next) {
                return Ok(NontrivialityReport {
                    pass: false,
                    witness: Some(next_word.to_string()),
                    words_checked: checked,
                });
            }
            stack.push((next, next_word, i));
        }
    }
    Ok(NontrivialityReport { pass: true, witness: None, words_checked: checked })
}

/// The standard ping-pong pair in `SL_2(Z)` and its four slope arcs.
pub fn standard_sl2_pair() -> (MatZ, MatZ, SlopeIntervalSet, SlopeIntervalSet, SlopeIntervalSet, SlopeIntervalSet)
{
    let a = MatZ::new([[1, 2], [0, 1]]).unwrap();
    let b = MatZ::new([[1, 0], [2, 1]]).unwrap();
    // A+ = {t > 1}, A- = {t < -1} (each through neither 0 nor inf as a
    // set: A+ u A- is the wrap arc from 1 to -1), B+- the middle bands.
    let a_plus = SlopeIntervalSet::single(ProjSlope::from_int(1), ProjSlope::Inf);
    let a_minus = SlopeIntervalSet::single(ProjSlope::Inf, ProjSlope::from_int(-1));
    let b_plus = SlopeIntervalSet::single(ProjSlope::from_int(0), ProjSlope::from_int(1));
    let b_minus = SlopeIntervalSet::single(ProjSlope::from_int(-1), ProjSlope::from_int(0));
    (a, b, a_plus, a_minus, b_plus, b_minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn slope(n: i64) -> ProjSlope {
        ProjSlope::from_int(n)
    }

    #[test]
    fn act_slope_examples() {
        let g = MatZ::new([[1, 2], [0, 1]]).unwrap();
        assert_eq!(act_slope(&g, &slope(0)), slope(2));
        let id = MatZ::identity();
        assert_eq!(act_slope(&id, &ProjSlope::from_ratio(5, 7)), ProjSlope::from_ratio(5, 7));
        let w = MatZ::new([[0, 1], [-1, 0]]).unwrap();
        assert_eq!(act_slope(&w, &ProjSlope::Inf), slope(0));
    }

    #[test]
    fn image_interval_examples() {
        let g = MatZ::new([[1, 2], [0, 1]]).unwrap();
        let s = SlopeIntervalSet::single(slope(-1), slope(1));
        let img = image_interval(&g, &s);
        assert_eq!(img, SlopeIntervalSet::single(slope(1), slope(3)));

        let id = MatZ::identity();
        assert_eq!(image_interval(&id, &s), s);

        // lower shear sends {|t| > 1} into a subset of (0, 1)
        let h = MatZ::new([[1, 0], [2, 1]]).unwrap();
        let outer = SlopeIntervalSet::single(slope(1), slope(-1)); // wrap arc
        let img = image_interval(&h, &outer);
        let target = SlopeIntervalSet::single(slope(0), slope(1));
        assert!(img.is_subset_of(&target));
    }

    #[test]
    fn arc_membership_wrapping() {
        let wrap = Arc::new(slope(1), slope(-1));
        assert!(wrap.contains(&slope(2)));
        assert!(wrap.contains(&ProjSlope::Inf));
        assert!(wrap.contains(&slope(-5)));
        assert!(!wrap.contains(&slope(0)));
        assert!(!wrap.contains(&slope(1)));
    }

    #[test]
    fn first_form_standard_pair() {
        let (a, b, ap, am, bp, bm) = standard_sl2_pair();
        let cert = certify_first_form(&a, &b, &ap, &am, &bp, &bm).unwrap();
        assert_eq!(cert.checked_inclusions.len(), 4);
        assert!(cert.checked_inclusions.iter().all(|c| c.ok));
    }

    #[test]
    fn first_form_identity_fails() {
        let (_, _, ap, am, bp, bm) = standard_sl2_pair();
        let id = MatZ::identity();
        let err = certify_first_form(&id, &id, &ap, &am, &bp, &bm).unwrap_err();
        assert!(matches!(err, PingPongError::InclusionFailure { .. }));
    }

    #[test]
    fn first_form_small_shift_fails() {
        // shift by 1 does not clear the middle band: (-1,0) maps to (0,1)
        let (_, b, ap, am, bp, bm) = standard_sl2_pair();
        let a = MatZ::new([[1, 1], [0, 1]]).unwrap();
        let err = certify_first_form(&a, &b, &ap, &am, &bp, &bm).unwrap_err();
        assert!(matches!(err, PingPongError::InclusionFailure { .. }));
    }

    #[test]
    fn second_form_c3_c2() {
        // Wbar of order 2 and Tbar of order 3 in PSL2(Z); A the negative
        // slopes, B the positive slopes.
        let t = MatZ::new([[0, 1], [-1, -1]]).unwrap();
        let w = MatZ::new([[0, 1], [-1, 0]]).unwrap();
        let a = SlopeIntervalSet::single(ProjSlope::Inf, slope(0));
        let b = SlopeIntervalSet::single(slope(0), ProjSlope::Inf);
        let g = [CyclicFactor { generator: t, order: Some(3) }];
        let h = [CyclicFactor { generator: w, order: Some(2) }];
        let cert = certify_second_form(&g, &h, &a, &b).unwrap();
        assert!(cert.checked_inclusions.iter().all(|c| c.ok));
    }

    #[test]
    fn second_form_order_too_small() {
        let w = MatZ::new([[0, 1], [-1, 0]]).unwrap();
        let a = SlopeIntervalSet::single(ProjSlope::Inf, slope(0));
        let b = SlopeIntervalSet::single(slope(0), ProjSlope::Inf);
        let g = [CyclicFactor { generator: w, order: Some(2) }];
        let h = [CyclicFactor { generator: w, order: Some(2) }];
        let err = certify_second_form(&g, &h, &a, &b).unwrap_err();
        assert!(matches!(err, PingPongError::OrderTooSmall));
    }

    #[test]
    fn second_form_infinite_cyclic() {
        let (a_mat, b_mat, ..) = standard_sl2_pair();
        // A = {|t| > 1} (wrap arc), B = (-1, 1)
        let a = SlopeIntervalSet::single(slope(1), slope(-1));
        let b = SlopeIntervalSet::single(slope(-1), slope(1));
        let g = [CyclicFactor { generator: a_mat, order: None }];
        let h = [CyclicFactor { generator: b_mat, order: None }];
        let cert = certify_second_form(&g, &h, &a, &b).unwrap();
        assert!(cert.checked_inclusions.iter().all(|c| c.ok));
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn ping_lemma_example() {
        // g: x -> x/3, h: x -> (x-1)/3 + 1, A = (-1/2, 1/2), B = (1/2, 3/2)
        let g = AffineMap::new(rat(1, 3), rat(0, 1));
        let h = AffineMap::new(rat(1, 3), rat(2, 3));
        let a = RatInterval::new(rat(-1, 2), rat(1, 2));
        let b = RatInterval::new(rat(1, 2), rat(3, 2));
        assert!(certify_ping(&g, &h, &a, &b).is_ok());

        // same map twice cannot land in disjoint sets
        let err = certify_ping(&g, &g, &a, &b).unwrap_err();
        assert!(matches!(err, PingError::InclusionFailure { .. }));

        // tighter contraction
        let g2 = AffineMap::new(rat(1, 4), rat(0, 1));
        let h2 = AffineMap::new(rat(1, 4), rat(3, 4));
        assert!(certify_ping(&g2, &h2, &a, &b).is_ok());
    }

    #[test]
    fn exhaustive_oracle_examples() {
        let (a, b, ..) = standard_sl2_pair();
        let report = exhaustive_nontriviality(&a, &b, 8).unwrap();
        assert!(report.pass);

        let w = MatZ::new([[0, 1], [-1, 0]]).unwrap();
        let report = exhaustive_nontriviality(&w, &b, 4).unwrap();
        assert!(!report.pass);
        assert_eq!(report.witness.as_deref(), Some("a^-4"));

        let u = MatZ::new([[1, 1], [0, 1]]).unwrap();
        let report = exhaustive_nontriviality(&u, &u, 2).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn act_slope_respects_composition() {
        let mut rng = StdRng::seed_from_u64(7);
        let gens = [
            MatZ::new([[1, 1], [0, 1]]).unwrap(),
            MatZ::new([[1, 0], [1, 1]]).unwrap(),
            MatZ::new([[0, 1], [-1, 0]]).unwrap(),
        ];
        let random_mat = |rng: &mut StdRng| {
            let mut m = MatZ::identity();
            for _ in 0..6 {
                let pick = gens[rng.gen_range(0..3)];
                m = if rng.gen_bool(0.5) { m.mul(&pick) } else { m.mul(&pick.inverse()) };
            }
            m
        };
        for _ in 0..1000 {
            let g = random_mat(&mut rng);
            let h = random_mat(&mut rng);
            let t = ProjSlope::from_ratio(rng.gen_range(-20..=20), rng.gen_range(-5..=5));
            assert_eq!(act_slope(&g.mul(&h), &t), act_slope(&g, &act_slope(&h, &t)));
        }
    }

    #[test]
    fn image_preserves_disjointness() {
        let g = MatZ::new([[2, 1], [1, 1]]).unwrap();
        let s1 = SlopeIntervalSet::single(slope(0), slope(1));
        let s2 = SlopeIntervalSet::single(slope(2), slope(3));
        assert!(image_interval(&g, &s1).is_disjoint_from(&image_interval(&g, &s2)));
    }
}
