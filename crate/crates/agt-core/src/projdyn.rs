//! Projective dynamics over the reals: KAK decomposition, the wedge
//! projective metric, exterior powers, contraction certificates,
//! separation search, the ping-pong-player construction and the
//! Zassenhaus commutator check.
//!
//! Everything here is numeric (f64). A certificate produced by this
//! module is sampled evidence, not a proof; when the inputs are integer
//! matrices the construction cross-checks itself against an exact
//! arbitrary-precision word oracle.

use nalgebra::{DMatrix, DVector};
use num::bigint::BigInt;
use num::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

pub type RealMat = DMatrix<f64>;

#[derive(Debug, thiserror::Error)]
pub enum ProjDynError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("the sequence does not diverge")]
    NotDiverging,
    #[error("contraction certificate failed: witness image at distance {image_distance}")]
    CertFailure { image_distance: f64 },
    #[error("no separating family found (best empirical r = {r})")]
    SearchExhausted { r: f64 },
    #[error("operand inverse norms must stay below 2")]
    NormsTooLarge,
    #[error("pipeline stuck at stage {stage}: {detail}")]
    PipelineStuck { stage: &'static str, detail: String },
}

/// KAK (Cartan) decomposition `g = k1 diag(alphas) k2` with special
/// orthogonal factors and descending singular values.
#[derive(Debug, Clone)]
pub struct KakDecomp {
    pub k1: RealMat,
    pub alphas: DVector<f64>,
    pub k2: RealMat,
}

impl KakDecomp {
    pub fn reconstruct(&self) -> RealMat {
        &self.k1 * RealMat::from_diagonal(&self.alphas) * &self.k2
    }
}

pub fn kak(g: &RealMat) -> Result<KakDecomp, ProjDynError> {
    let d = g.nrows();
    if d != g.ncols() || !(2..=20).contains(&d) {
        return Err(ProjDynError::InvalidInput("need a square matrix, 2 <= d <= 20".into()));
    }
    if !g.iter().all(|x| x.is_finite()) {
        return Err(ProjDynError::InvalidInput("entries must be finite".into()));
    }
    let svd = g.clone().svd(true, true);
    let mut k1 = svd.u.ok_or_else(|| ProjDynError::NumericalFailure("svd produced no U".into()))?;
    let mut k2 = svd
        .v_t
        .ok_or_else(|| ProjDynError::NumericalFailure("svd produced no V^T".into()))?;
    let alphas = svd.singular_values;
    // sign of det(g) read off the well-conditioned orthogonal factors;
    // the determinant of g itself is cancellation noise at high
    // condition numbers
    if k1.determinant() * k2.determinant() < 0.0 {
        return Err(ProjDynError::InvalidInput("determinant must be positive".into()));
    }
    // if both factor determinants are -1, flipping one matched
    // column/row pair fixes both without changing k1 A k2
    if k1.determinant() < 0.0 {
        let last = d - 1;
        for i in 0..d {
            k1[(i, last)] = -k1[(i, last)];
            k2[(last, i)] = -k2[(last, i)];
        }
    }
    Ok(KakDecomp { k1, alphas, k2 })
}

/// `d([v],[w]) = ||v ^ w|| / (||v|| ||w||)`, the sine of the angle.
pub fn proj_metric(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let (nx, ny) = (x.norm(), y.norm());
    let dot = x.dot(y);
    let gram = (nx * nx * ny * ny - dot * dot).max(0.0);
    (gram.sqrt() / (nx * ny)).min(1.0)
}

/// Distance from a projective point to a hyperplane with the given
/// normal: `|<x, n>|` on unit representatives.
pub fn point_hyperplane_distance(x: &DVector<f64>, normal: &DVector<f64>) -> f64 {
    (x.dot(normal) / (x.norm() * normal.norm())).abs()
}

fn combinations(d: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..l).collect();
    loop {
        out.push(current.clone());
        // advance to the next sorted l-subset of 0..d
        let mut i = l;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < d - l + i {
                current[i] += 1;
                for j in i + 1..l {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Matrix of the `l`-th exterior power in the sorted multi-index basis:
/// entries are `l x l` minors of `g`.
pub fn exterior_power(g: &RealMat, l: usize) -> Result<RealMat, ProjDynError> {
    let d = g.nrows();
    if l < 1 || l >= d {
        return Err(ProjDynError::InvalidInput("need 1 <= l <= d-1".into()));
    }
    let basis = combinations(d, l);
    let n = basis.len();
    let mut out = RealMat::zeros(n, n);
    for (bi, rows) in basis.iter().enumerate() {
        for (bj, cols) in basis.iter().enumerate() {
            let minor = RealMat::from_fn(l, l, |i, j| g[(rows[i], cols[j])]);
            out[(bi, bj)] = minor.determinant();
        }
    }
    Ok(out)
}

fn singular_values(g: &RealMat) -> DVector<f64> {
    g.clone().svd(false, false).singular_values
}

/// Attracting point (top left-singular vector) and repelling
/// hyperplane normal (top right-singular vector) of `g`. Projective,
/// so the sign ambiguity of the SVD factors is harmless; this stays
/// usable at condition numbers where `kak`'s orientation check cannot.
fn svd_frames(g: &RealMat) -> Result<(RealMat, RealMat), ProjDynError> {
    let svd = g.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| ProjDynError::NumericalFailure("svd produced no U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| ProjDynError::NumericalFailure("svd produced no V^T".into()))?;
    Ok((u, v_t))
}

fn proximal_data(g: &RealMat) -> Result<(DVector<f64>, DVector<f64>), ProjDynError> {
    let (u, v_t) = svd_frames(g)?;
    Ok((u.column(0).into_owned(), v_t.row(0).transpose()))
}

/// Picks the level `l` whose gap `alpha_l / alpha_{l+1}` ends largest
/// along a diverging sequence; ties go to the smallest `l`.
pub fn pick_contracting_level(gs: &[RealMat]) -> Result<usize, ProjDynError> {
    if gs.len() < 2 {
        return Err(ProjDynError::InvalidInput("need at least two matrices".into()));
    }
    let first = singular_values(&gs[0]);
    let last = singular_values(&gs[gs.len() - 1]);
    if last[0] <= first[0] * (1.0 + 1e-9) {
        return Err(ProjDynError::NotDiverging);
    }
    let d = last.len();
    let mut best = 0usize;
    for l in 1..d - 1 {
        if last[l] / last[l + 1] > (last[best] / last[best + 1]) * (1.0 + 1e-9) {
            best = l;
        }
    }
    Ok(best + 1)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0f64);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn sphere_point<R: Rng>(rng: &mut R, d: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| gaussian(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// A unit vector at exact distance `t` from the hyperplane with unit
/// normal `n`: uniform sampling almost never probes the critical layer
/// just outside a tiny tube, so certificates place points there
/// deliberately.
fn layer_point<R: Rng>(rng: &mut R, normal: &DVector<f64>, t: f64) -> DVector<f64> {
    let d = normal.len();
    loop {
        let raw = sphere_point(rng, d);
        let h = &raw - normal * raw.dot(normal);
        if h.norm() > 1e-6 {
            let h = &h / h.norm();
            return h * (1.0 - t * t).sqrt() + normal * t;
        }
    }
}

/// Log-uniform distance in `(epsilon, 1/2]` for boundary-layer probes.
fn layer_distance<R: Rng>(rng: &mut R, epsilon: f64) -> f64 {
    let lo = (epsilon * 1.0001).ln();
    let hi = 0.5f64.ln();
    rng.gen_range(lo..hi).exp()
}

#[derive(Debug, Clone)]
pub struct ContractionCertificate {
    pub epsilon: f64,
    pub v: DVector<f64>,
    pub h_normal: DVector<f64>,
    pub samples: usize,
    pub max_image_distance: f64,
}

/// Samples points outside the `epsilon`-neighborhood of the candidate
/// repelling hyperplane (from KAK) and verifies their images land
/// within `epsilon` of the candidate attracting point.
pub fn contraction_check(
    g: &RealMat,
    epsilon: f64,
    nsamples: usize,
) -> Result<ContractionCertificate, ProjDynError> {
    if !(0.0..1.0).contains(&epsilon) || epsilon == 0.0 {
        return Err(ProjDynError::InvalidInput("epsilon must be in (0,1)".into()));
    }
    let d = g.nrows();
    let (v, h_normal) = proximal_data(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    let n_hat = &h_normal / h_normal.norm();
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    let mut attempts = 0usize;
    while checked < nsamples && attempts < nsamples * 20 {
        attempts += 1;
        // alternate uniform samples with boundary-layer probes just
        // outside the epsilon-tube around H
        let x = if attempts % 2 == 0 {
            sphere_point(&mut rng, d)
        } else {
            let t = layer_distance(&mut rng, epsilon);
            layer_point(&mut rng, &n_hat, t)
        };
        if point_hyperplane_distance(&x, &h_normal) <= epsilon {
            continue;
        }
        let image = g * &x;
        let dist = proj_metric(&image, &v);
        if dist > epsilon {
            return Err(ProjDynError::CertFailure { image_distance: dist });
        }
        worst = worst.max(dist);
        checked += 1;
    }
    Ok(ContractionCertificate {
        epsilon,
        v,
        h_normal,
        samples: checked,
        max_image_distance: worst,
    })
}

/// The Archimedean lower bound `alpha_1/alpha_2 >= sqrt(1-delta^2)/delta`
/// forced by being `delta`-Lipschitz outside a `delta`-neighborhood.
pub fn lipschitz_ratio_bound(delta: f64) -> f64 {
    assert!(delta > 0.0 && delta < 1.0);
    (1.0 - delta * delta).sqrt() / delta
}

/// Sampled estimate of the Lipschitz constant of `g` on the projective
/// ball around `center`.
pub fn local_lipschitz(
    g: &RealMat,
    center: &DVector<f64>,
    radius: f64,
    nsamples: usize,
) -> f64 {
    assert!(radius > 0.0 && radius <= 0.1, "radius must be small");
    let d = g.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11b5_c41);
    let c = center / center.norm();
    let mut best = 0.0f64;
    for _ in 0..nsamples {
        let mut pick = || {
            let u = sphere_point(&mut rng, d);
            let t: f64 = rng.gen_range(0.0..radius);
            let p = &c + u * t;
            &p / p.norm()
        };
        let (x, y) = (pick(), pick());
        let base = proj_metric(&x, &y);
        if base < 1e-12 {
            continue;
        }
        let ratio = proj_metric(&(g * &x), &(g * &y)) / base;
        best = best.max(ratio);
    }
    best
}

/// Upper bound for the projective Lipschitz constant of `g`:
/// `d(gx, gy) <= (alpha_1 alpha_2 / alpha_d^2) d(x, y)` since the wedge
/// norm grows by at most `alpha_1 alpha_2` and vector norms shrink by
/// at least `alpha_d`.
pub fn lipschitz_upper_bound(g: &RealMat) -> f64 {
    let a = singular_values(g);
    let d = a.len();
    a[0] * a[1] / (a[d - 1] * a[d - 1])
}

#[derive(Debug, Clone)]
struct Config {
    points: Vec<DVector<f64>>,
    normals: Vec<DVector<f64>>,
}

fn family_score(fs: &[(RealMat, RealMat)], config: &Config) -> f64 {
    fs.iter()
        .map(|(f, finv)| {
            let mut worst = f64::INFINITY;
            for v in &config.points {
                for n in &config.normals {
                    worst = worst
                        .min(point_hyperplane_distance(&(f * v), n))
                        .min(point_hyperplane_distance(&(finv * v), n));
                }
            }
            worst
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct SeparatingFamily {
    pub indices: Vec<usize>,
    pub family: Vec<RealMat>,
    /// Empirical separation radius: a measured lower estimate over the
    /// tested configurations, not a proof.
    pub r: f64,
}

const SEPARATION_FLOOR: f64 = 1e-3;

/// Greedy search for an `(n, r)`-separating family among the
/// candidates, scored against randomized configurations of `n` points
/// and `n` hyperplanes plus adversarial refinements of the worst ones.
pub fn separating_search(
    candidates: &[RealMat],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<SeparatingFamily, ProjDynError> {
    assert!(!candidates.is_empty() && n >= 1);
    let d = candidates[0].nrows();
    let pairs: Vec<(RealMat, RealMat)> = candidates
        .iter()
        .map(|f| {
            let inv = f
                .clone()
                .try_inverse()
                .ok_or_else(|| ProjDynError::InvalidInput("singular candidate".into()))?;
            Ok((f.clone(), inv))
        })
        .collect::<Result<_, ProjDynError>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut configs: Vec<Config> = Vec::new();
    for t in 0..trials.max(8) {
        let mut c = Config {
            points: (0..n).map(|_| sphere_point(&mut rng, d)).collect(),
            normals: (0..n).map(|_| sphere_point(&mut rng, d)).collect(),
        };
        // every other config is adversarial from the start: place each
        // point inside a hyperplane
        if t % 2 == 0 {
            for i in 0..n {
                let nrm = &c.normals[i % n];
                let p = &c.points[i] - nrm * c.points[i].dot(nrm);
                if p.norm() > 1e-9 {
                    c.points[i] = &p / p.norm();
                }
            }
        }
        configs.push(c);
    }

    // greedy family selection
    let mut chosen: Vec<usize> = Vec::new();
    let mut selected: Vec<(RealMat, RealMat)> = Vec::new();
    let min_score = |sel: &[(RealMat, RealMat)], cfgs: &[Config]| {
        cfgs.iter()
            .map(|c| family_score(sel, c))
            .fold(f64::INFINITY, f64::min)
    };
    let mut current = 0.0f64;
    while chosen.len() < 8 {
        let mut best: Option<(usize, f64)> = None;
        for (i, pair) in pairs.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            selected.push(pair.clone());
            let s = min_score(&selected, &configs);
            selected.pop();
            if best.map_or(true, |(_, bs)| s > bs) {
                best = Some((i, s));
            }
        }
        let Some((i, s)) = best else { break };
        if !chosen.is_empty() && s <= current + 1e-12 {
            break;
        }
        chosen.push(i);
        selected.push(pairs[i].clone());
        current = s;
    }

    // adversarial refinement: perturb the worst configuration to drive
    // the family score down, keeping successful attacks as new tests
    for _ in 0..4 {
        let worst = configs
            .iter()
            .enumerate()
            .min_by(|a, b| {
                family_score(&selected, a.1)
                    .partial_cmp(&family_score(&selected, b.1))
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        let mut attack = configs[worst].clone();
        let mut attack_score = family_score(&selected, &attack);
        for _ in 0..200 {
            let mut cand = attack.clone();
            let scale = rng.gen_range(0.01..0.3);
            for p in cand.points.iter_mut().chain(cand.normals.iter_mut()) {
                if rng.gen_bool(0.5) {
                    let q = &*p + sphere_point(&mut rng, d) * scale;
                    *p = &q / q.norm();
                }
            }
            let s = family_score(&selected, &cand);
            if s < attack_score {
                attack_score = s;
                attack = cand;
            }
        }
        configs.push(attack);
    }

    let r = min_score(&selected, &configs);
    if r < SEPARATION_FLOOR {
        return Err(ProjDynError::SearchExhausted { r });
    }
    Ok(SeparatingFamily {
        family: chosen.iter().map(|&i| candidates[i].clone()).collect(),
        indices: chosen,
        r,
    })
}

/// An element tracked as a reduced word in the input generators;
/// letters are `+-(index+1)`.
#[derive(Debug, Clone)]
struct Elt {
    mat: RealMat,
    word: Vec<i32>,
}

fn word_append(word: &mut Vec<i32>, letter: i32) {
    if word.last() == Some(&-letter) {
        word.pop();
    } else {
        word.push(letter);
    }
}

fn elt_mul(a: &Elt, b: &Elt) -> Elt {
    let mut word = a.word.clone();
    for &l in &b.word {
        word_append(&mut word, l);
    }
    Elt { mat: &a.mat * &b.mat, word }
}

fn elt_inv(a: &Elt) -> Elt {
    Elt {
        mat: a.mat.clone().try_inverse().expect("group element"),
        word: a.word.iter().rev().map(|l| -l).collect(),
    }
}

fn word_string(word: &[i32]) -> String {
    if word.is_empty() {
        return "e".into();
    }
    word.iter()
        .map(|&l| {
            let name = (b'a' + (l.unsigned_abs() as u8 - 1)) as char;
            if l > 0 { name.to_string() } else { format!("{}^-1", name) }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Enumerates reduced words up to the length cap.
fn enumerate_elements(gens: &[RealMat], cap: usize) -> Vec<Elt> {
    let d = gens[0].nrows();
    let letters: Vec<Elt> = gens
        .iter()
        .enumerate()
        .flat_map(|(i, g)| {
            let fwd = Elt { mat: g.clone(), word: vec![i as i32 + 1] };
            let bwd = elt_inv(&fwd);
            [fwd, bwd]
        })
        .collect();
    let mut all: Vec<Elt> = vec![Elt { mat: RealMat::identity(d, d), word: vec![] }];
    let mut frontier = all.clone();
    for _ in 0..cap {
        let mut next = Vec::new();
        for e in &frontier {
            for l in &letters {
                let glued = elt_mul(e, l);
                if glued.word.len() == e.word.len() + 1 {
                    next.push(glued);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

#[derive(Debug, Clone, Serialize)]
pub struct ProximalPair {
    pub v: Vec<f64>,
    pub h_normal: Vec<f64>,
}

/// A numeric ping-pong certificate per the player construction:
/// `gamma_1, gamma_2` with their attracting/repelling data, the
/// Lipschitz bound `C` of the separating family, the separation `r`
/// and the contraction scale `epsilon`, with `C^4 epsilon < r`.
#[derive(Debug, Clone, Serialize)]
pub struct PingPongCert {
    pub gamma1: Vec<Vec<f64>>,
    pub gamma2: Vec<Vec<f64>>,
    pub gamma1_word: String,
    pub gamma2_word: String,
    pub plus1: ProximalPair,
    pub minus1: ProximalPair,
    pub plus2: ProximalPair,
    pub minus2: ProximalPair,
    pub c: f64,
    pub r: f64,
    pub epsilon: f64,
    pub sampled_table_ok: bool,
    /// Exact nontriviality of words in `gamma_1, gamma_2` (only when
    /// the generators are integer matrices).
    pub exact_check: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ConstructParams {
    pub word_len_cap: usize,
    pub separation_len_cap: usize,
    pub power_cap: u32,
    pub separation_trials: usize,
    pub nsamples: usize,
    pub exact_maxlen: u64,
    pub seed: u64,
}

impl Default for ConstructParams {
    fn default() -> Self {
        ConstructParams {
            word_len_cap: 4,
            separation_len_cap: 1,
            power_cap: 64,
            separation_trials: 24,
            nsamples: 300,
            exact_maxlen: 10,
            seed: 17,
        }
    }
}

fn hyperplane_image(f_inv_t: &RealMat, normal: &DVector<f64>) -> DVector<f64> {
    let n = f_inv_t * normal;
    &n / n.norm()
}

fn stuck(stage: &'static str, detail: String) -> ProjDynError {
    ProjDynError::PipelineStuck { stage, detail }
}

fn mat_rows(m: &RealMat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// The ping-pong-player pipeline: find a strongly contracting word,
/// conjugate by a separating element so the inverse contracts too,
/// then translate by separating elements so all attracting points
/// clear all repelling hyperplanes by `r` while `C^4 epsilon < r`.
pub fn construct_free_pair(
    gens: &[RealMat],
    params: &ConstructParams,
) -> Result<PingPongCert, ProjDynError> {
    if gens.is_empty() {
        return Err(ProjDynError::InvalidInput("need at least one generator".into()));
    }
    let d = gens[0].nrows();

    // stage 1: separating family among short words, with its Lipschitz
    // bound C
    let short: Vec<Elt> = enumerate_elements(gens, params.separation_len_cap)
        .into_iter()
        .filter(|e| !e.word.is_empty())
        .collect();
    let sep = separating_search(
        &short.iter().map(|e| e.mat.clone()).collect::<Vec<_>>(),
        2,
        params.separation_trials,
        params.seed,
    )
    .map_err(|e| stuck("separation", e.to_string()))?;
    let family: Vec<Elt> = sep.indices.iter().map(|&i| short[i].clone()).collect();
    let r = sep.r;

    // stage 2: a word with diverging singular-value ratio
    let words = enumerate_elements(gens, params.word_len_cap);
    let best = words
        .iter()
        .filter(|e| !e.word.is_empty())
        .max_by(|a, b| {
            let ra = {
                let s = singular_values(&a.mat);
                s[0] / s[1]
            };
            let rb = {
                let s = singular_values(&b.mat);
                s[0] / s[1]
            };
            ra.partial_cmp(&rb).unwrap()
        })
        .unwrap();
    let best_svals = singular_values(&best.mat);
    if best_svals[0] / best_svals[1] < 1.5 {
        return Err(stuck(
            "unbounded",
            format!(
                "no sampled word has singular ratio above 1.5 (best {:.3}); the group looks bounded",
                best_svals[0] / best_svals[1]
            ),
        ));
    }

    // stage 3: power up gamma until gamma_0 = gamma f gamma^-1 and its
    // inverse are epsilon-contracting. The inverse of gamma = best^k is
    // built by composing word inverses; inverting the powered matrix
    // directly is numerically hopeless at these condition numbers.
    // Candidate translators are products of up to two separating family
    // elements. Since epsilon = r / 2C^4 and C must bound the Lipschitz
    // constants of the translators actually used, try cheap sub-pools
    // first: a small C leaves a far more generous contraction target.
    let full_pool = family_pool(&family, 2);
    let elt_cost =
        |f: &Elt| lipschitz_upper_bound(&f.mat).max(lipschitz_upper_bound(&elt_inv(f).mat));
    let mut cutoffs: Vec<f64> = full_pool.iter().map(|f| elt_cost(f).max(1.0)).collect();
    cutoffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cutoffs.dedup_by(|a, b| *a <= *b * 1.0001);
    let mut last_err = stuck("contraction", "empty pipeline".into());
    for c_bound in cutoffs {
        let pool: Vec<Elt> = full_pool
            .iter()
            .filter(|f| elt_cost(f) <= c_bound * 1.0001)
            .cloned()
            .collect();
        let epsilon = 0.5 * r / c_bound.powi(4);
        if epsilon < 1e-13 {
            last_err = stuck(
                "separation",
                format!("required epsilon {} below numeric resolution", epsilon),
            );
            continue;
        }

        let best_inv = elt_inv(best);
        let mut gamma = best.clone();
        let mut gamma_inv = best_inv.clone();
        let mut attempt = Err(stuck(
            "contraction",
            format!("no power of the best word yields {}-contracting players", epsilon),
        ));
        for _ in 0..params.power_cap {
            if singular_values(&gamma.mat)[0] > 1e130 {
                break;
            }
            let (u, v_t) = svd_frames(&gamma.mat)?;
            // Omega: gamma^-1 is 2-Lipschitz near u e_d; pick v there
            let v_omega = u.column(d - 1).into_owned();
            let h_gamma = v_t.row(0).transpose(); // repelling hyperplane of gamma
            let w = &gamma_inv.mat * &v_omega;

            let f = pool
                .iter()
                .max_by(|x, y| {
                    let score = |f: &Elt| {
                        point_hyperplane_distance(&(&f.mat * &w), &h_gamma)
                            .min(point_hyperplane_distance(&(elt_inv(f).mat * &w), &h_gamma))
                    };
                    score(x).partial_cmp(&score(y)).unwrap()
                })
                .unwrap();
            let gamma0 = elt_mul(&elt_mul(&gamma, f), &gamma_inv);
            let gamma0_inv = elt_mul(&elt_mul(&gamma, &elt_inv(f)), &gamma_inv);

            let fwd = contraction_check(&gamma0.mat, epsilon, params.nsamples);
            let bwd = contraction_check(&gamma0_inv.mat, epsilon, params.nsamples);
            if let (Ok(cert_fwd), Ok(cert_bwd)) = (fwd, bwd) {
                attempt = finish_construction(
                    gens, params, &pool, c_bound, r, epsilon, gamma0, gamma0_inv, cert_fwd,
                    cert_bwd,
                );
                break;
            }
            gamma = elt_mul(&gamma, best);
            gamma_inv = elt_mul(&best_inv, &gamma_inv);
        }
        match attempt {
            Ok(cert) => return Ok(cert),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// Translator candidates: reduced products of up to `depth` separating
/// family elements and their inverses.
fn family_pool(family: &[Elt], depth: usize) -> Vec<Elt> {
    let letters: Vec<Elt> = family
        .iter()
        .flat_map(|f| [f.clone(), elt_inv(f)])
        .collect();
    let mut pool = letters.clone();
    let mut frontier = letters.clone();
    for _ in 1..depth {
        let mut next = Vec::new();
        for e in &frontier {
            for l in &letters {
                let glued = elt_mul(e, l);
                if glued.word.len() > e.word.len() {
                    next.push(glued);
                }
            }
        }
        pool.extend(next.iter().cloned());
        frontier = next;
    }
    pool
}

#[allow(clippy::too_many_arguments)]
fn finish_construction(
    gens: &[RealMat],
    params: &ConstructParams,
    family: &[Elt],
    c: f64,
    r: f64,
    epsilon: f64,
    gamma0: Elt,
    gamma0_inv: Elt,
    cert_fwd: ContractionCertificate,
    cert_bwd: ContractionCertificate,
) -> Result<PingPongCert, ProjDynError> {
    let (v0p, h0p) = (cert_fwd.v, cert_fwd.h_normal);
    let (v0m, h0m) = (cert_bwd.v, cert_bwd.h_normal);

    // stage 4: f0 with d(f0 v0+, H0+) > r and d(f0^-1 v0-, H0-) > r
    let f0 = family
        .iter()
        .max_by(|x, y| {
            let score = |f: &Elt| {
                point_hyperplane_distance(&(&f.mat * &v0p), &h0p)
                    .min(point_hyperplane_distance(&(elt_inv(f).mat * &v0m), &h0m))
            };
            score(x).partial_cmp(&score(y)).unwrap()
        })
        .unwrap();
    let f0_inv = elt_inv(f0);
    let sep0 = point_hyperplane_distance(&(&f0.mat * &v0p), &h0p)
        .min(point_hyperplane_distance(&(&f0_inv.mat * &v0m), &h0m));
    if sep0 <= r {
        return Err(stuck("f0", format!("best clearance {} below r = {}", sep0, r)));
    }

    let gamma1 = elt_mul(f0, &gamma0);
    let gamma1_inv = elt_mul(&gamma0_inv, &f0_inv);
    let normalize = |v: DVector<f64>| -> DVector<f64> {
        let n = v.norm();
        v / n
    };
    let v1p = normalize(&f0.mat * &v0p);
    let h1p = h0p.clone();
    let v1m = v0m.clone();
    let h1m = hyperplane_image(&f0_inv.mat.transpose(), &h0m);

    // stage 5: f1 clearing both H1+- from both v1+-
    let f1 = family
        .iter()
        .max_by(|x, y| {
            let score = |f: &Elt| {
                [&v1p, &v1m]
                    .iter()
                    .flat_map(|v| {
                        [&h1p, &h1m]
                            .iter()
                            .map(|h| point_hyperplane_distance(&(&f.mat * *v), h))
                            .collect::<Vec<_>>()
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            score(x).partial_cmp(&score(y)).unwrap()
        })
        .unwrap();
    let f1_inv = elt_inv(f1);
    let sep1 = [&v1p, &v1m]
        .iter()
        .flat_map(|v| {
            [&h1p, &h1m]
                .iter()
                .map(|h| point_hyperplane_distance(&(&f1.mat * *v), h))
                .collect::<Vec<_>>()
        })
        .fold(f64::INFINITY, f64::min);
    if sep1 <= r {
        return Err(stuck("f1", format!("best clearance {} below r = {}", sep1, r)));
    }

    let gamma2 = elt_mul(&elt_mul(f1, &gamma1), &f1_inv);
    let gamma2_inv = elt_mul(&elt_mul(f1, &gamma1_inv), &f1_inv);
    let v2p = normalize(&f1.mat * &v1p);
    let v2m = normalize(&f1.mat * &v1m);
    let h2p = hyperplane_image(&f1_inv.mat.transpose(), &h1p);
    let h2m = hyperplane_image(&f1_inv.mat.transpose(), &h1m);

    // stage 6: final inequalities and a sampled ping-pong table
    let dist_set = |vs: [&DVector<f64>; 2], hs: [&DVector<f64>; 2]| {
        vs.iter()
            .flat_map(|v| hs.iter().map(|h| point_hyperplane_distance(v, h)).collect::<Vec<_>>())
            .fold(f64::INFINITY, f64::min)
    };
    let ineq1 = dist_set([&v2p, &v2m], [&h1p, &h1m]);
    let ineq2 = dist_set([&v1p, &v1m], [&h2p, &h2m]);
    if !(ineq1 > r && ineq2 > r / c && c.powi(4) * epsilon < r) {
        return Err(stuck(
            "verify",
            format!(
                "final inequalities failed: d(v2,H1)={}, d(v1,H2)={}, C^4 eps={}, r={}",
                ineq1,
                ineq2,
                c.powi(4) * epsilon,
                r
            ),
        ));
    }

    let mut table_ok = true;
    let d = gens[0].nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xabcd);
    let players = [
        (&gamma1.mat, &v1p, &h1p, c * epsilon),
        (&gamma1_inv.mat, &v1m, &h1m, c * epsilon),
        (&gamma2.mat, &v2p, &h2p, c * c * epsilon),
        (&gamma2_inv.mat, &v2m, &h2m, c * c * epsilon),
    ];
    for i in 0..params.nsamples {
        for (g, v, h, eps_level) in &players {
            let x = if i % 2 == 0 {
                sphere_point(&mut rng, d)
            } else {
                let t = layer_distance(&mut rng, *eps_level);
                layer_point(&mut rng, h, t)
            };
            if point_hyperplane_distance(&x, h) > *eps_level
                && proj_metric(&(*g * &x), v) > *eps_level
            {
                table_ok = false;
            }
        }
    }

    // stage 7: exact cross-check when the generators are integral
    let exact_check = exact_words_check(gens, &gamma1.word, &gamma2.word, params.exact_maxlen);

    let pair = |v: &DVector<f64>, h: &DVector<f64>| ProximalPair {
        v: v.iter().cloned().collect(),
        h_normal: h.iter().cloned().collect(),
    };
    Ok(PingPongCert {
        gamma1: mat_rows(&gamma1.mat),
        gamma2: mat_rows(&gamma2.mat),
        gamma1_word: word_string(&gamma1.word),
        gamma2_word: word_string(&gamma2.word),
        plus1: pair(&v1p, &h1p),
        minus1: pair(&v1m, &h1m),
        plus2: pair(&v2p, &h2p),
        minus2: pair(&v2m, &h2m),
        c,
        r,
        epsilon,
        sampled_table_ok: table_ok,
        exact_check,
    })
}

type BigMat = Vec<Vec<BigInt>>;

fn big_identity(d: usize) -> BigMat {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn big_mul(a: &BigMat, b: &BigMat) -> BigMat {
    let d = a.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn big_is_identity(a: &BigMat) -> bool {
    let d = a.len();
    (0..d).all(|i| (0..d).all(|j| a[i][j] == if i == j { BigInt::one() } else { BigInt::zero() }))
}

/// Exact integer inverse, valid only for determinant +-1 integer
/// matrices up to 3x3; returns None otherwise.
fn big_inverse(a: &BigMat) -> Option<BigMat> {
    let d = a.len();
    let det: BigInt = match d {
        2 => &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0],
        3 => {
            &a[0][0] * (&a[1][1] * &a[2][2] - &a[1][2] * &a[2][1])
                - &a[0][1] * (&a[1][0] * &a[2][2] - &a[1][2] * &a[2][0])
                + &a[0][2] * (&a[1][0] * &a[2][1] - &a[1][1] * &a[2][0])
        }
        _ => return None,
    };
    let unit = if det == BigInt::one() {
        BigInt::one()
    } else if det == -BigInt::one() {
        -BigInt::one()
    } else {
        return None;
    };
    let adj: BigMat = match d {
        2 => vec![
            vec![a[1][1].clone(), -a[0][1].clone()],
            vec![-a[1][0].clone(), a[0][0].clone()],
        ],
        3 => {
            let m = |i1: usize, j1: usize, i2: usize, j2: usize| &a[i1][j1] * &a[i2][j2];
            let cof = |i: usize, j: usize| -> BigInt {
                let (r, c): (Vec<usize>, Vec<usize>) = (
                    (0..3).filter(|&x| x != i).collect(),
                    (0..3).filter(|&x| x != j).collect(),
                );
                let minor = m(r[0], c[0], r[1], c[1]) - m(r[0], c[1], r[1], c[0]);
                if (i + j) % 2 == 0 { minor } else { -minor }
            };
            (0..3).map(|i| (0..3).map(|j| cof(j, i)).collect()).collect()
        }
        _ => unreachable!(),
    };
    Some(adj.into_iter().map(|row| row.into_iter().map(|x| x * &unit).collect()).collect())
}

/// Rebuilds the two player words over exact integer generators and
/// checks every nonempty reduced word in them up to `maxlen` against
/// the identity. Returns None when the generators are not integral.
fn exact_words_check(gens: &[RealMat], w1: &[i32], w2: &[i32], maxlen: u64) -> Option<bool> {
    let d = gens[0].nrows();
    let mut exact_gens: Vec<BigMat> = Vec::new();
    for g in gens {
        let mut rows = vec![vec![BigInt::zero(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let x = g[(i, j)];
                if (x - x.round()).abs() > 1e-9 {
                    return None;
                }
                rows[i][j] = BigInt::from(x.round() as i64);
            }
        }
        exact_gens.push(rows);
    }
    let inverses: Vec<BigMat> = exact_gens.iter().map(|g| big_inverse(g))
        .collect::<Option<Vec<_>>>()?;
    let eval = |w: &[i32]| -> BigMat {
        let mut acc = big_identity(d);
        for &l in w {
            let m = if l > 0 {
                &exact_gens[(l - 1) as usize]
            } else {
                &inverses[(-l - 1) as usize]
            };
            acc = big_mul(&acc, m);
        }
        acc
    };
    let a = eval(w1);
    let b = eval(w2);
    let letters = [a.clone(), big_inverse(&a)?, b.clone(), big_inverse(&b)?];

    let mut stack: Vec<(BigMat, u64, usize)> = vec![(big_identity(d), 0, usize::MAX)];
    while let Some((mat, len, last)) = stack.pop() {
        if len >= maxlen {
            continue;
        }
        for i in 0..4 {
            if last != usize::MAX && i == last ^ 1 {
                continue;
            }
            let next = big_mul(&mat, &letters[i]);
            if big_is_identity(&next) {
                return Some(false);
            }
            stack.push((next, len + 1, i));
        }
    }
    Some(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorReport {
    pub epsilon: f64,
    pub delta: f64,
    pub defect: f64,
    pub bound: f64,
    pub within_bound: bool,
}

fn op_norm(m: &RealMat) -> f64 {
    singular_values(m)[0]
}

/// Zassenhaus defect: for `x = 1 + eps`, `y = 1 + delta` perturbations
/// with `||x^-1||, ||y^-1|| < 2`, the commutator satisfies
/// `||[x, y] - 1|| <= 8 eps delta` in operator norm.
pub fn commutator_defect(x: &RealMat, y: &RealMat) -> Result<CommutatorReport, ProjDynError> {
    let d = x.nrows();
    let id = RealMat::identity(d, d);
    let xi = x
        .clone()
        .try_inverse()
        .ok_or(ProjDynError::NormsTooLarge)?;
    let yi = y
        .clone()
        .try_inverse()
        .ok_or(ProjDynError::NormsTooLarge)?;
    if op_norm(&xi) >= 2.0 || op_norm(&yi) >= 2.0 {
        return Err(ProjDynError::NormsTooLarge);
    }
    let epsilon = op_norm(&(x - &id));
    let delta = op_norm(&(y - &id));
    let defect = op_norm(&(x * y * xi * yi - &id));
    let bound = 8.0 * epsilon * delta;
    Ok(CommutatorReport {
        epsilon,
        delta,
        defect,
        bound,
        within_bound: defect <= bound + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> RealMat {
        RealMat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    fn rotation2(theta: f64) -> RealMat {
        mat(&[&[theta.cos(), -theta.sin()], &[theta.sin(), theta.cos()]])
    }

    fn random_sl(rng: &mut ChaCha8Rng, d: usize) -> RealMat {
        loop {
            let mut g = RealMat::from_fn(d, d, |_, _| gaussian(rng));
            let det = g.determinant();
            if det.abs() < 1e-6 {
                continue;
            }
            if det < 0.0 {
                g.swap_rows(0, 1);
            }
            let scale = g.determinant().powf(-1.0 / d as f64);
            return g * scale;
        }
    }

    fn e(d: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn kak_diagonal() {
        let g = mat(&[&[4.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.25]]);
        let k = kak(&g).unwrap();
        assert!((k.alphas[0] - 4.0).abs() < 1e-12);
        assert!((k.alphas[1] - 1.0).abs() < 1e-12);
        assert!((k.alphas[2] - 0.25).abs() < 1e-12);
        assert!((k.reconstruct() - &g).norm() < 1e-9 * g.norm());
    }

    #[test]
    fn kak_rotation() {
        let k = kak(&rotation2(0.7)).unwrap();
        assert!((k.alphas[0] - 1.0).abs() < 1e-12);
        assert!((k.alphas[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kak_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 3, 5] {
            for _ in 0..30 {
                let g = random_sl(&mut rng, d);
                let k = kak(&g).unwrap();
                assert!((k.reconstruct() - &g).norm() <= 1e-9 * g.norm().max(1.0));
                // special orthogonality
                assert!((&k.k1 * k.k1.transpose() - RealMat::identity(d, d)).norm() < 1e-10);
                assert!((k.k1.determinant() - 1.0).abs() < 1e-9);
                assert!((k.k2.determinant() - 1.0).abs() < 1e-9);
                for w in k.alphas.as_slice().windows(2) {
                    assert!(w[0] >= w[1]);
                }
                let prod: f64 = k.alphas.iter().product();
                assert!((prod - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn proj_metric_examples() {
        let (e1, e2) = (e(3, 0), e(3, 1));
        assert!((proj_metric(&e1, &e2) - 1.0).abs() < 1e-15);
        assert!(proj_metric(&e1, &e1) < 1e-15);
        let diag = (&e1 + &e2) / 2.0f64.sqrt();
        assert!((proj_metric(&e1, &diag) - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        // sign-independence
        assert!(proj_metric(&e1, &(-&e1)) < 1e-15);
    }

    #[test]
    fn proj_metric_triangle_and_k_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = 4;
        let k = kak(&random_sl(&mut rng, d)).unwrap().k1;
        for _ in 0..10_000 {
            let (x, y, z) = (
                sphere_point(&mut rng, d),
                sphere_point(&mut rng, d),
                sphere_point(&mut rng, d),
            );
            assert!(proj_metric(&x, &y) <= proj_metric(&x, &z) + proj_metric(&z, &y) + 1e-12);
            assert!(
                (proj_metric(&(&k * &x), &(&k * &y)) - proj_metric(&x, &y)).abs() < 1e-12
            );
        }
    }

    #[test]
    fn hyperplane_distance_is_min_over_hyperplane() {
        // d(x, H) = |<x, n>| equals the minimum wedge distance to points
        // of H, checked by sampled minimization
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 3;
        for _ in 0..20 {
            let x = sphere_point(&mut rng, d);
            let n = sphere_point(&mut rng, d);
            let target = point_hyperplane_distance(&x, &n);
            let mut best = f64::INFINITY;
            for _ in 0..20_000 {
                let raw = sphere_point(&mut rng, d);
                let h = &raw - &n * raw.dot(&n);
                if h.norm() < 1e-9 {
                    continue;
                }
                best = best.min(proj_metric(&x, &h));
            }
            assert!(best >= target - 1e-9);
            assert!(best <= target + 1e-2); // sampling resolution
        }
    }

    #[test]
    fn exterior_power_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_sl(&mut rng, 3);
        let l1 = exterior_power(&g, 1).unwrap();
        assert!((&l1 - &g).norm() < 1e-15);

        let diag = mat(&[
            &[3.0, 0.0, 0.0],
            &[0.0, 2.0, 0.0],
            &[0.0, 0.0, 1.0 / 6.0],
        ]);
        let w2 = exterior_power(&diag, 2).unwrap();
        let mut svals: Vec<f64> = singular_values(&w2).iter().cloned().collect();
        svals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((svals[0] - 6.0).abs() < 1e-12);
        assert!((svals[1] - 0.5).abs() < 1e-12);
        assert!((svals[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exterior_functoriality_and_top_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in [3usize, 4] {
            for _ in 0..10 {
                let g = random_sl(&mut rng, d);
                let h = random_sl(&mut rng, d);
                for l in 1..d {
                    let lhs = exterior_power(&(&g * &h), l).unwrap();
                    let rhs = exterior_power(&g, l).unwrap() * exterior_power(&h, l).unwrap();
                    assert!((&lhs - &rhs).norm() <= 1e-9 * lhs.norm().max(1.0));

                    let top = singular_values(&exterior_power(&g, l).unwrap())[0];
                    let svals = singular_values(&g);
                    let expect: f64 = (0..l).map(|i| svals[i]).product();
                    assert!((top - expect).abs() <= 1e-9 * expect);
                }
            }
        }
    }

    #[test]
    fn contracting_level_examples() {
        let seq1: Vec<RealMat> = (1..=6)
            .map(|m| {
                let t = 2f64.powi(m);
                mat(&[&[t, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0 / t]])
            })
            .collect();
        assert_eq!(pick_contracting_level(&seq1).unwrap(), 1);

        let seq2: Vec<RealMat> = (1..=6)
            .map(|m| {
                let t = 2f64.powi(m);
                mat(&[&[t, 0.0, 0.0], &[0.0, t, 0.0], &[0.0, 0.0, 1.0 / (t * t)]])
            })
            .collect();
        assert_eq!(pick_contracting_level(&seq2).unwrap(), 2);

        let constant: Vec<RealMat> = (0..4).map(|_| rotation2(0.3)).collect();
        assert!(matches!(
            pick_contracting_level(&constant),
            Err(ProjDynError::NotDiverging)
        ));
    }

    #[test]
    fn contraction_examples() {
        let g = mat(&[
            &[100.0, 0.0, 0.0],
            &[0.0, 0.1, 0.0],
            &[0.0, 0.0, 0.1],
        ]);
        let cert = contraction_check(&g, 0.2, 500).unwrap();
        assert!(proj_metric(&cert.v, &e(3, 0)) < 1e-9);
        assert!(point_hyperplane_distance(&e(3, 0), &cert.h_normal) > 0.99);
        assert!(cert.max_image_distance <= 0.2);

        assert!(matches!(
            contraction_check(&rotation2(0.9), 0.1, 200),
            Err(ProjDynError::CertFailure { .. })
        ));

        // rotated versions contract toward rotated data
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let k1 = kak(&random_sl(&mut rng, 3)).unwrap().k1;
        let k2 = kak(&random_sl(&mut rng, 3)).unwrap().k1;
        let cert = contraction_check(&(&k1 * &g * &k2), 0.2, 500).unwrap();
        assert!(proj_metric(&cert.v, &k1.column(0).into_owned()) < 1e-6);
    }

    #[test]
    fn lipschitz_bound_examples() {
        assert!((lipschitz_ratio_bound(1.0 / 2.0f64.sqrt()) - 1.0).abs() < 1e-12);
        let small = 1e-6;
        assert!((lipschitz_ratio_bound(small) - 1e6).abs() / 1e6 < 1e-6);
    }

    #[test]
    fn lipschitz_empirical_consistency() {
        // measured contraction delta near the attracting point obeys
        // alpha1/alpha2 >= sqrt(1-delta^2)/delta
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let base = random_sl(&mut rng, 2);
            let g = &base * mat(&[&[6.0, 0.0], &[0.0, 1.0 / 6.0]]);
            let k = kak(&g).unwrap();
            let ratio = k.alphas[0] / k.alphas[1];
            let delta_hat = local_lipschitz(&g, &k.k2.row(0).transpose(), 0.02, 400)
                .clamp(1e-12, 0.999);
            assert!(ratio >= lipschitz_ratio_bound(delta_hat) - 1e-6);
        }
    }

    #[test]
    fn local_lipschitz_examples() {
        let id = RealMat::identity(3, 3);
        let est = local_lipschitz(&id, &e(3, 0), 0.05, 300);
        assert!((est - 1.0).abs() < 1e-9);

        let g = mat(&[&[10.0, 0.0], &[0.0, 0.1]]);
        let est = local_lipschitz(&g, &e(2, 0), 0.05, 500);
        assert!(est <= 0.012, "estimate {}", est);

        // near the repelling point the map expands
        let est = local_lipschitz(&g, &e(2, 1), 0.05, 500);
        assert!(est > 1.0);
    }

    fn sl2_pair() -> Vec<RealMat> {
        vec![
            mat(&[&[1.0, 2.0], &[0.0, 1.0]]),
            mat(&[&[1.0, 0.0], &[2.0, 1.0]]),
        ]
    }

    #[test]
    fn separating_search_examples() {
        let words = enumerate_elements(&sl2_pair(), 4);
        let mats: Vec<RealMat> = words.iter().skip(1).map(|e| e.mat.clone()).collect();
        let fam = separating_search(&mats, 2, 24, 1).unwrap();
        assert!(!fam.family.is_empty());
        assert!(fam.r >= 1e-2, "r = {}", fam.r);

        let id = vec![RealMat::identity(2, 2)];
        assert!(matches!(
            separating_search(&id, 2, 24, 1),
            Err(ProjDynError::SearchExhausted { .. })
        ));

        let rotations: Vec<RealMat> = (1..=8).map(|k| rotation2(k as f64)).collect();
        let fam = separating_search(&rotations, 1, 24, 2).unwrap();
        assert!(!fam.family.is_empty());
    }

    #[test]
    fn construct_free_pair_integral() {
        let cert = construct_free_pair(&sl2_pair(), &ConstructParams::default()).unwrap();
        assert!(cert.c.powi(4) * cert.epsilon < cert.r);
        assert!(cert.sampled_table_ok);
        assert_eq!(cert.exact_check, Some(true));
        // neighborhoods pairwise disjoint at scale C^2 eps
        let vs = [&cert.plus1.v, &cert.minus1.v, &cert.plus2.v, &cert.minus2.v];
        for i in 0..4 {
            for j in i + 1..4 {
                let a = DVector::from_vec(vs[i].clone());
                let b = DVector::from_vec(vs[j].clone());
                assert!(proj_metric(&a, &b) > 2.0 * cert.c * cert.c * cert.epsilon);
            }
        }
    }

    #[test]
    fn construct_free_pair_bounded_group_fails() {
        let gens = vec![rotation2(1.0), rotation2(0.3)];
        let err = construct_free_pair(&gens, &ConstructParams::default()).unwrap_err();
        assert!(matches!(err, ProjDynError::PipelineStuck { .. }));
    }

    #[test]
    fn construct_free_pair_mixed() {
        let gens = vec![mat(&[&[2.0, 0.0], &[0.0, 0.5]]), rotation2(1.0)];
        let cert = construct_free_pair(&gens, &ConstructParams::default()).unwrap();
        assert!(cert.sampled_table_ok);
        assert!(cert.exact_check.is_none());
    }

    #[test]
    fn commutator_identity() {
        let id = RealMat::identity(3, 3);
        let rep = commutator_defect(&id, &id).unwrap();
        assert!(rep.defect < 1e-15);
        assert!(rep.within_bound);
    }

    #[test]
    fn commutator_random_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let d = 3;
        let id = RealMat::identity(d, d);
        for _ in 0..200 {
            let mut p = RealMat::from_fn(d, d, |_, _| gaussian(&mut rng));
            p *= 0.01 / op_norm(&p);
            let mut q = RealMat::from_fn(d, d, |_, _| gaussian(&mut rng));
            q *= 0.02 / op_norm(&q);
            let rep = commutator_defect(&(&id + p), &(&id + q)).unwrap();
            assert!((rep.epsilon - 0.01).abs() < 1e-12);
            assert!((rep.delta - 0.02).abs() < 1e-12);
            assert!(rep.within_bound, "defect {} > bound {}", rep.defect, rep.bound);
        }
    }

    #[test]
    fn commutator_iteration_shrinks() {
        // ||x - 1|| < 1/(8r) makes iterated commutators shrink by 1/r
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 3;
        let id = RealMat::identity(d, d);
        let r = 4.0;
        let scale = 1.0 / (8.0 * r) * 0.9;
        let mut p = RealMat::from_fn(d, d, |_, _| gaussian(&mut rng));
        p *= scale / op_norm(&p);
        let mut q = RealMat::from_fn(d, d, |_, _| gaussian(&mut rng));
        q *= scale / op_norm(&q);
        let (mut x, y) = (&id + p, &id + q);
        let mut norm = op_norm(&(&x - &id));
        for _ in 0..5 {
            let rep = commutator_defect(&x, &y).unwrap();
            assert!(rep.within_bound);
            x = &x * &y * x.clone().try_inverse().unwrap() * y.clone().try_inverse().unwrap();
            let new_norm = op_norm(&(&x - &id));
            assert!(new_norm <= norm / r + 1e-15, "{} vs {}", new_norm, norm / r);
            norm = new_norm;
            if norm < 1e-14 {
                break;
            }
        }
    }

    #[test]
    fn commutator_norm_guard() {
        let g = mat(&[&[0.3, 0.0], &[0.0, 3.0]]);
        assert!(matches!(
            commutator_defect(&g, &g),
            Err(ProjDynError::NormsTooLarge)
        ));
    }
}
