//! Cayley-graph balls, growth functions, boundaries, Cheeger quotients
//! and Folner certificates for groups given by exact-arithmetic oracles.
//!
//! All set arithmetic is exact; growth-rate roots are the only floating
//! numbers produced here and are clearly labelled as estimates.

use crate::graph::{ExpansionReport, FiniteGraph, GraphError};
use crate::words::{self, Word};
use num::rational::BigRational;
use num::BigInt;
use num::Zero;
use serde::Serialize;
use std::collections::HashSet;
use std::hash::Hash;

/// A group presented by exact multiplication. `Elem` doubles as the
/// canonical key: `Eq`/`Hash`/`Ord` must agree with group-element
/// equality on the generated subgroup.
pub trait GroupOracle {
    type Elem: Clone + Eq + Hash + Ord;
    fn identity(&self) -> Self::Elem;
    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn invert(&self, a: &Self::Elem) -> Self::Elem;
}

/// A finite symmetric generating set containing the identity.
#[derive(Debug, Clone)]
pub struct GenSet<E> {
    elements: Vec<E>,
}

impl<E: Clone + Eq + Hash + Ord> GenSet<E> {
    /// Closes `gens` under inversion, adds the identity and dedupes.
    pub fn symmetrized<G: GroupOracle<Elem = E>>(oracle: &G, gens: &[E]) -> Self {
        let mut elements: Vec<E> = vec![oracle.identity()];
        for g in gens {
            elements.push(g.clone());
            elements.push(oracle.invert(g));
        }
        elements.sort();
        elements.dedup();
        GenSet { elements }
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CayleyError {
    #[error("ball exceeded the memory budget of {budget} elements at radius {radius}")]
    MemoryBudgetExceeded { budget: usize, radius: u64 },
}

/// Default memory budget for ball enumeration.
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// Nested balls `Sigma^0 <= Sigma^1 <= ...` stored as spheres of new
/// elements per radius; `counts[n]` is the exact ball size `|Sigma^n|`.
#[derive(Debug, Clone)]
pub struct BallData<E> {
    pub spheres: Vec<Vec<E>>,
    pub counts: Vec<u64>,
}

impl<E: Clone> BallData<E> {
    /// All elements of the ball of the given radius.
    pub fn ball_elements(&self, radius: usize) -> Vec<E> {
        self.spheres[..=radius].concat()
    }

    pub fn radius(&self) -> usize {
        self.spheres.len() - 1
    }
}

/// Breadth-first enumeration of `Sigma^n`.
pub fn ball<G: GroupOracle>(
    oracle: &G,
    s: &GenSet<G::Elem>,
    n: u64,
    budget: usize,
) -> Result<BallData<G::Elem>, CayleyError> {
    let mut known: HashSet<G::Elem> = HashSet::new();
    known.insert(oracle.identity());
    let mut spheres = vec![vec![oracle.identity()]];
    let mut counts = vec![1u64];
    for radius in 1..=n {
        let mut next: Vec<G::Elem> = Vec::new();
        for g in spheres.last().unwrap() {
            for t in s.elements() {
                let h = oracle.multiply(g, t);
                if known.insert(h.clone()) {
                    next.push(h);
                }
            }
        }
        if known.len() > budget {
            return Err(CayleyError::MemoryBudgetExceeded { budget, radius });
        }
        next.sort();
        counts.push(counts.last().unwrap() + next.len() as u64);
        spheres.push(next);
        if spheres.last().unwrap().is_empty() {
            // the group is exhausted; later balls repeat
            for _ in radius + 1..=n {
                counts.push(*counts.last().unwrap());
                spheres.push(Vec::new());
            }
            break;
        }
    }
    Ok(BallData { spheres, counts })
}

/// Growth-rate diagnostics from exact ball counts. `roots[i]` is
/// `|Sigma^n|^{1/n}` for `n = i + 1`; by sub-multiplicativity the true
/// rate is `inf_n roots[n]`, approached slowly, so the successive
/// quotients `|Sigma^n| / |Sigma^{n-1}|` are reported as the sharper
/// estimate. Neither is a proof of the growth type.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthEstimate {
    pub roots: Vec<f64>,
    pub running_infimum: Vec<f64>,
    pub quotients: Vec<f64>,
    pub quotient_infimum: f64,
}

pub fn growth_rate_estimate(counts: &[u64]) -> GrowthEstimate {
    assert!(counts.len() >= 3, "need counts up to radius >= 2");
    let roots: Vec<f64> = counts[1..]
        .iter()
        .enumerate()
        .map(|(i, &c)| (c as f64).powf(1.0 / (i + 1) as f64))
        .collect();
    let mut running_infimum = Vec::with_capacity(roots.len());
    let mut inf = f64::INFINITY;
    for &r in &roots {
        inf = inf.min(r);
        running_infimum.push(inf);
    }
    let quotients: Vec<f64> = counts
        .windows(2)
        .map(|w| w[1] as f64 / w[0] as f64)
        .collect();
    let quotient_infimum = quotients.iter().cloned().fold(f64::INFINITY, f64::min);
    GrowthEstimate { roots, running_infimum, quotients, quotient_infimum }
}

/// Exact boundary `A . S \ A`.
pub fn boundary<G: GroupOracle>(
    oracle: &G,
    a: &[G::Elem],
    s: &GenSet<G::Elem>,
) -> Vec<G::Elem> {
    let inside: HashSet<&G::Elem> = a.iter().collect();
    let mut out: Vec<G::Elem> = a
        .iter()
        .flat_map(|g| s.elements().iter().map(move |t| oracle.multiply(g, t)))
        .filter(|h| !inside.contains(h))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Exact Cheeger quotient `|boundary(A)| / |A|`.
pub fn cheeger_quotient<G: GroupOracle>(
    oracle: &G,
    a: &[G::Elem],
    s: &GenSet<G::Elem>,
) -> BigRational {
    assert!(!a.is_empty());
    BigRational::new(
        BigInt::from(boundary(oracle, a, s).len()),
        BigInt::from(a.len()),
    )
}

/// Exact Folner ratio `max_s |F s (symmetric difference) F| / |F|` and
/// whether it is below `eps`.
pub fn folner_check<G: GroupOracle>(
    oracle: &G,
    f: &[G::Elem],
    s: &GenSet<G::Elem>,
    eps: &BigRational,
) -> (bool, BigRational) {
    assert!(!f.is_empty());
    let inside: HashSet<&G::Elem> = f.iter().collect();
    let mut worst = BigRational::zero();
    for t in s.elements() {
        let mut sym_diff = 0u64;
        let mut translate: HashSet<G::Elem> = HashSet::with_capacity(f.len());
        for g in f {
            let h = oracle.multiply(g, t);
            if !inside.contains(&h) {
                sym_diff += 1; // in Fs but not F
            }
            translate.insert(h);
        }
        sym_diff += f.iter().filter(|g| !translate.contains(*g)).count() as u64; // in F but not Fs
        let ratio = BigRational::new(BigInt::from(sym_diff), BigInt::from(f.len()));
        if ratio > worst {
            worst = ratio;
        }
    }
    (&worst < eps, worst)
}

#[derive(Debug, Clone, Serialize)]
pub enum FolnerSearch {
    Found { radius: u64, ratio: BigRational },
    /// Exhaustion up to `maxn` is not evidence of non-amenability.
    Exhausted { maxn: u64, last_ratio: BigRational },
}

/// Searches for the first ball radius that is `(S, eps)`-Folner.
pub fn folner_ball_search<G: GroupOracle>(
    oracle: &G,
    s: &GenSet<G::Elem>,
    eps: &BigRational,
    maxn: u64,
    budget: usize,
) -> Result<FolnerSearch, CayleyError> {
    let data = ball(oracle, s, maxn, budget)?;
    let mut elems: Vec<G::Elem> = Vec::new();
    let mut last_ratio = BigRational::zero();
    for radius in 0..=maxn as usize {
        elems.extend(data.spheres[radius].iter().cloned());
        let (ok, ratio) = folner_check(oracle, &elems, s, eps);
        if ok {
            return Ok(FolnerSearch::Found { radius: radius as u64, ratio });
        }
        last_ratio = ratio;
    }
    Ok(FolnerSearch::Exhausted { maxn, last_ratio })
}

/// Exact minimum vertex-expansion quotient of a finite graph.
pub fn cheeger_bruteforce(graph: &FiniteGraph) -> Result<ExpansionReport, GraphError> {
    graph.vertex_expansion_bruteforce()
}

/// The infinite cyclic group.
#[derive(Debug, Clone, Copy)]
pub struct ZOracle;

impl GroupOracle for ZOracle {
    type Elem = i64;
    fn identity(&self) -> i64 {
        0
    }
    fn multiply(&self, a: &i64, b: &i64) -> i64 {
        a + b
    }
    fn invert(&self, a: &i64) -> i64 {
        -a
    }
}

/// The free abelian group of rank 2.
#[derive(Debug, Clone, Copy)]
pub struct Z2Oracle;

impl GroupOracle for Z2Oracle {
    type Elem = (i64, i64);
    fn identity(&self) -> (i64, i64) {
        (0, 0)
    }
    fn multiply(&self, a: &(i64, i64), b: &(i64, i64)) -> (i64, i64) {
        (a.0 + b.0, a.1 + b.1)
    }
    fn invert(&self, a: &(i64, i64)) -> (i64, i64) {
        (-a.0, -a.1)
    }
}

/// The free group of finite rank on reduced words.
#[derive(Debug, Clone, Copy)]
pub struct FreeOracle {
    pub rank: usize,
}

impl GroupOracle for FreeOracle {
    type Elem = Word;
    fn identity(&self) -> Word {
        Word::identity()
    }
    fn multiply(&self, a: &Word, b: &Word) -> Word {
        words::multiply(a, b)
    }
    fn invert(&self, a: &Word) -> Word {
        words::invert(a)
    }
}

impl FreeOracle {
    pub fn standard_gens(&self) -> Vec<Word> {
        (0..self.rank).map(Word::generator).collect()
    }
}

/// The trivial group.
#[derive(Debug, Clone, Copy)]
pub struct TrivialOracle;

impl GroupOracle for TrivialOracle {
    type Elem = ();
    fn identity(&self) {}
    fn multiply(&self, _: &(), _: &()) {}
    fn invert(&self, _: &()) {}
}
