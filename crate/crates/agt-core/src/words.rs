//! Reduced words in free groups, ball enumeration and the paradoxical
//! decomposition of `F_2`.
//!
//! Words are stored run-length encoded as `(generator, exponent)` pairs,
//! which keeps balls of radius 12 (about a million words) comfortably in
//! memory. Generators are indexed `0..rank`; inverses are encoded by the
//! exponent sign, never as separate generators.

use serde::Serialize;
use std::fmt;

/// A maximal run `generator^exponent` inside a reduced word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Letter {
    pub generator: usize,
    /// Nonzero; negative exponents encode inverse generators.
    pub exponent: i64,
}

impl Letter {
    pub fn new(generator: usize, exponent: i64) -> Self {
        assert!(exponent != 0, "letter exponent must be nonzero");
        Letter { generator, exponent }
    }
}

/// A reduced word in a free group: adjacent letters have distinct
/// generator indices. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    /// Single generator `g` (index) as a word.
    pub fn generator(g: usize) -> Self {
        Word { letters: vec![Letter::new(g, 1)] }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Word length: the number of single-generator letters, i.e. the sum
    /// of absolute exponents.
    pub fn len(&self) -> u64 {
        self.letters.iter().map(|l| l.exponent.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    /// Appends one run, merging and cancelling against the tail.
    fn push(&mut self, l: Letter) {
        if l.exponent == 0 {
            return;
        }
        match self.letters.last_mut() {
            Some(last) if last.generator == l.generator => {
                let e = last.exponent + l.exponent;
                if e == 0 {
                    self.letters.pop();
                } else {
                    last.exponent = e;
                }
            }
            _ => self.letters.push(l),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let name = |g: usize| -> String {
            if g < 26 {
                ((b'a' + g as u8) as char).to_string()
            } else {
                format!("g{}", g)
            }
        };
        let mut first = true;
        for l in &self.letters {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if l.exponent == 1 {
                write!(f, "{}", name(l.generator))?;
            } else {
                write!(f, "{}^{}", name(l.generator), l.exponent)?;
            }
        }
        Ok(())
    }
}

/// Freely reduces a raw sequence of letters. Idempotent.
pub fn reduce(raw: &[Letter]) -> Word {
    let mut w = Word::identity();
    for &l in raw {
        w.push(l);
    }
    w
}

/// Product of two reduced words, reduced.
pub fn multiply(u: &Word, v: &Word) -> Word {
    let mut w = u.clone();
    for &l in &v.letters {
        w.push(l);
    }
    w
}

/// Inverse of a reduced word.
pub fn invert(u: &Word) -> Word {
    Word {
        letters: u
            .letters
            .iter()
            .rev()
            .map(|l| Letter::new(l.generator, -l.exponent))
            .collect(),
    }
}

/// All reduced words of length at most `n` in the free group of the
/// given rank, in breadth-first order (by length, then by the fixed
/// letter order `a, a^-1, b, b^-1, ...`).
pub fn enumerate_ball(rank: usize, n: u64) -> Vec<Word> {
    assert!(rank >= 1);
    // signed letters in enumeration order
    let letters: Vec<(usize, i64)> = (0..rank).flat_map(|g| [(g, 1i64), (g, -1)]).collect();
    let mut all = vec![Word::identity()];
    let mut level: Vec<Word> = vec![Word::identity()];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(level.len() * (2 * rank).max(1));
        for w in &level {
            for &(g, s) in &letters {
                // stay reduced: do not cancel against the last letter
                if let Some(last) = w.letters.last() {
                    if last.generator == g && last.exponent.signum() != s {
                        continue;
                    }
                }
                let mut ext = w.clone();
                ext.push(Letter::new(g, s));
                next.push(ext);
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    all
}

/// The five pieces of the paradoxical decomposition of `F_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Piece {
    FA,
    FAInv,
    FB,
    FBInv,
    Identity,
}

#[derive(Debug, thiserror::Error)]
pub enum WordsError {
    #[error("piece classification is defined for rank 2 only (found generator index {0})")]
    RankTooLarge(usize),
}

/// Tags a reduced rank-2 word by its first letter.
pub fn classify_piece(w: &Word) -> Result<Piece, WordsError> {
    if let Some(l) = w.letters.iter().find(|l| l.generator > 1) {
        return Err(WordsError::RankTooLarge(l.generator));
    }
    Ok(match w.first() {
        None => Piece::Identity,
        Some(l) => match (l.generator, l.exponent > 0) {
            (0, true) => Piece::FA,
            (0, false) => Piece::FAInv,
            (1, true) => Piece::FB,
            _ => Piece::FBInv,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub status: bool,
    pub counterexample: Option<String>,
}

/// Report of [`verify_paradox`], serialisable as the CLI JSON schema.
#[derive(Debug, Clone, Serialize)]
pub struct ParadoxReport {
    pub depth: u64,
    pub piece_counts: PieceCounts,
    pub identities: Vec<IdentityCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PieceCounts {
    pub f_a: u64,
    pub f_a_inv: u64,
    pub f_b: u64,
    pub f_b_inv: u64,
    pub identity: u64,
}

impl ParadoxReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().all(|c| c.status)
    }
}

/// Checks, exhaustively on the radius-`n` ball of `F_2`, that the five
/// pieces partition the ball and that `a^-1 F_a = F_2 \ F_{a^-1}` (and
/// the `b`-analogue) hold for every word of length at most `n - 1`.
///
/// The set identities are only asserted where both sides are fully
/// contained in the enumerated ball, i.e. up to length `n - 1`: for such
/// `w`, membership `w` in `a^-1 F_a` is equivalent to `a w` starting
/// with `a`, and `|a w| <= n` keeps the witness inside the ball.
pub fn verify_paradox(n: u64) -> ParadoxReport {
    assert!(n >= 1);
    let ball = enumerate_ball(2, n);

    let mut counts = PieceCounts { f_a: 0, f_a_inv: 0, f_b: 0, f_b_inv: 0, identity: 0 };
    for w in &ball {
        match classify_piece(w).expect("rank 2 ball") {
            Piece::FA => counts.f_a += 1,
            Piece::FAInv => counts.f_a_inv += 1,
            Piece::FB => counts.f_b += 1,
            Piece::FBInv => counts.f_b_inv += 1,
            Piece::Identity => counts.identity += 1,
        }
    }

    let total = counts.f_a + counts.f_a_inv + counts.f_b + counts.f_b_inv + counts.identity;
    let partition = IdentityCheck {
        name: "five pieces partition the ball".into(),
        status: total == ball.len() as u64 && counts.identity == 1,
        counterexample: None,
    };

    // w in a^-1 F_a  <=>  a.w starts with a  <=>  w does not start with a^-1
    let check_shift = |gen: usize, name: &str| -> IdentityCheck {
        let inv_piece = if gen == 0 { Piece::FAInv } else { Piece::FBInv };
        let head_piece = if gen == 0 { Piece::FA } else { Piece::FB };
        let g = Word::generator(gen);
        for w in &ball {
            if w.len() > n - 1 {
                continue;
            }
            let in_complement = classify_piece(w).unwrap() != inv_piece;
            let shifted = multiply(&g, w);
            let in_image = classify_piece(&shifted).unwrap() == head_piece;
            if in_complement != in_image {
                return IdentityCheck {
                    name: name.into(),
                    status: false,
                    counterexample: Some(w.to_string()),
                };
            }
        }
        IdentityCheck { name: name.into(), status: true, counterexample: None }
    };

    let id_a = check_shift(0, "a^-1 F_a = F_2 \\ F_{a^-1}");
    let id_b = check_shift(1, "b^-1 F_b = F_2 \\ F_{b^-1}");

    ParadoxReport { depth: n, piece_counts: counts, identities: vec![partition, id_a, id_b] }
}
