use rand::Rng;

use crate::error::{Error, Result};

pub const SEQ_LEN: usize = 8;
pub const ALPHABET: usize = 4;
const SPACE: usize = 1 << (2 * SEQ_LEN); // 4⁸

/// `Σⱼ wⱼ·table[j, tⱼ] + Σⱼ bⱼ·[tⱼ = tⱼ₊₁]`, with all `4⁸` scores enumerated
/// once at construction.
#[derive(Debug, Clone)]
pub struct DiscreteLandscape {
    table: [[f64; ALPHABET]; SEQ_LEN],
    weights: [f64; SEQ_LEN],
    bonus: [f64; SEQ_LEN - 1],
    sorted: Vec<f64>,
    argmax: Vec<usize>,
}

impl DiscreteLandscape {
    pub(crate) fn new<R: Rng>(rng: &mut R) -> Self {
        let mut table = [[0.0; ALPHABET]; SEQ_LEN];
        for row in table.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        let mut weights = [0.0; SEQ_LEN];
        for w in weights.iter_mut() {
            *w = rng.random_range(0.5..1.5);
        }
        let mut bonus = [0.0; SEQ_LEN - 1];
        for b in bonus.iter_mut() {
            *b = rng.random_range(0.0..0.5);
        }
        let mut land = DiscreteLandscape {
            table,
            weights,
            bonus,
            sorted: Vec::new(),
            argmax: Vec::new(),
        };
        let mut best = (f64::NEG_INFINITY, 0usize);
        let mut all = Vec::with_capacity(SPACE);
        for code in 0..SPACE {
            let s = land.score_unchecked(&tokens_of(code));
            if s > best.0 {
                best = (s, code);
            }
            all.push(s);
        }
        all.sort_by(f64::total_cmp);
        land.sorted = all;
        land.argmax = tokens_of(best.1);
        land
    }

    pub fn score(&self, tokens: &[usize]) -> Result<f64> {
        if tokens.len() != SEQ_LEN {
            return Err(Error::DimensionMismatch {
                expected: SEQ_LEN,
                found: tokens.len(),
            });
        }
        if let Some(p) = tokens.iter().position(|t| *t >= ALPHABET) {
            return Err(Error::InvalidToken {
                position: p,
                token: tokens[p],
            });
        }
        Ok(self.score_unchecked(tokens))
    }

    fn score_unchecked(&self, tokens: &[usize]) -> f64 {
        let unary: f64 = (0..SEQ_LEN)
            .map(|j| self.weights[j] * self.table[j][tokens[j]])
            .sum();
        let pairs: f64 = (0..SEQ_LEN - 1)
            .filter(|&j| tokens[j] == tokens[j + 1])
            .map(|j| self.bonus[j])
            .sum();
        unary + pairs
    }

    pub fn min_score(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max_score(&self) -> f64 {
        self.sorted[SPACE - 1]
    }

    pub fn argmax(&self) -> &[usize] {
        &self.argmax
    }

    /// All scores in ascending order.
    pub fn sorted_scores(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of sequences scoring strictly higher than `score`.
    pub fn fraction_above(&self, score: f64) -> f64 {
        let at_or_below = self.sorted.partition_point(|s| *s <= score);
        (SPACE - at_or_below) as f64 / SPACE as f64
    }
}

/// Decodes token `code` (base-4 digits, position 0 most significant).
pub(crate) fn tokens_of(mut code: usize) -> Vec<usize> {
    let mut t = vec![0; SEQ_LEN];
    for j in (0..SEQ_LEN).rev() {
        t[j] = code % ALPHABET;
        code /= ALPHABET;
    }
    t
}

/// Per-row argmax of a row-major `len × alphabet` logit matrix. Ties go to
/// the lowest index.
pub fn decode_discrete(logits: &[f64], alphabet: usize) -> Result<Vec<usize>> {
    if alphabet == 0 || !logits.len().is_multiple_of(alphabet) {
        return Err(Error::DimensionMismatch {
            expected: alphabet,
            found: logits.len(),
        });
    }
    Ok(logits
        .chunks(alphabet)
        .map(|row| {
            let mut best = 0;
            for (i, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect())
}

/// Places `hot` at each token's position and zero elsewhere.
pub fn encode_discrete(tokens: &[usize], hot: f64, alphabet: usize) -> Vec<f64> {
    let mut out = vec![0.0; tokens.len() * alphabet];
    for (j, t) in tokens.iter().enumerate() {
        out[j * alphabet + t] = hot;
    }
    out
}
