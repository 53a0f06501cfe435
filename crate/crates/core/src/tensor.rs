//! Dense truncated free tensor algebra over `R^d`.
//!
//! A [`TruncatedTensor`] stores one coefficient array per level `k = 0..=n`,
//! level `k` holding the `d^k` coefficients of `V^{⊗k}` in lexicographic
//! multi-index order (first letter most significant). Signatures of paths
//! live here as grouplike elements with scalar part 1. Dual words and their
//! shuffle products give the coordinate functionals that pair against
//! signatures.

use std::collections::BTreeMap;
use std::fmt;

/// Errors from tensor algebra operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TensorError {
    /// Operands live over different ground dimensions.
    DimensionMismatch { left: usize, right: usize },
    /// An inverse was requested for an element whose scalar part is not 1.
    NonUnitScalar,
    /// A level index exceeded the truncation depth.
    LevelOutOfRange { level: usize, depth: usize },
    /// A dual word is longer than the truncation depth it is paired with.
    WordTooLong { len: usize, depth: usize },
    /// A dual word contains a letter outside `0..dim`.
    LetterOutOfRange { letter: usize, dim: usize },
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            TensorError::NonUnitScalar => write!(f, "scalar part is not 1"),
            TensorError::LevelOutOfRange { level, depth } => {
                write!(f, "level {level} out of range for depth {depth}")
            }
            TensorError::WordTooLong { len, depth } => {
                write!(f, "word of length {len} exceeds depth {depth}")
            }
            TensorError::LetterOutOfRange { letter, dim } => {
                write!(f, "letter {letter} out of range for dimension {dim}")
            }
        }
    }
}

impl std::error::Error for TensorError {}

/// Dense element of the truncated tensor algebra `T^(n)(R^d)`.
///
/// Immutable after construction; all operations return fresh values.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedTensor {
    dim: usize,
    depth: usize,
    levels: Vec<Vec<f64>>,
}

impl TruncatedTensor {
    /// The unit element `(1, 0, ..., 0)`.
    pub fn unit(dim: usize, depth: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let mut levels = Vec::with_capacity(depth + 1);
        levels.push(vec![1.0]);
        let mut size = 1usize;
        for _ in 1..=depth {
            size *= dim;
            levels.push(vec![0.0; size]);
        }
        TruncatedTensor { dim, depth, levels }
    }

    /// The zero element.
    pub fn zero(dim: usize, depth: usize) -> Self {
        let mut t = Self::unit(dim, depth);
        t.levels[0][0] = 0.0;
        t
    }

    /// Build a tensor from raw level arrays; level `k` must hold `d^k`
    /// coefficients.
    pub fn from_levels(dim: usize, levels: Vec<Vec<f64>>) -> Result<Self, TensorError> {
        assert!(dim >= 1, "dimension must be positive");
        let depth = levels.len().saturating_sub(1);
        let mut size = 1usize;
        for (k, lvl) in levels.iter().enumerate() {
            if lvl.len() != size {
                return Err(TensorError::LevelOutOfRange { level: k, depth });
            }
            size *= dim;
        }
        if levels.is_empty() {
            return Err(TensorError::LevelOutOfRange { level: 0, depth: 0 });
        }
        Ok(TruncatedTensor { dim, depth, levels })
    }

    /// Truncated exponential of a vector: level `k` is `v^{⊗k} / k!`.
    pub fn exp(v: &[f64], depth: usize) -> Self {
        let dim = v.len();
        let mut t = Self::unit(dim, depth);
        for k in 1..=depth {
            let (prev, rest) = t.levels.split_at_mut(k);
            let lower = &prev[k - 1];
            let cur = &mut rest[0];
            let inv_k = 1.0 / k as f64;
            for (i, &a) in lower.iter().enumerate() {
                let base = i * dim;
                for (j, &x) in v.iter().enumerate() {
                    cur[base + j] = a * x * inv_k;
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Coefficient array of level `k`.
    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    /// Coefficient of the basis word `word` (letters in `0..dim`).
    pub fn coeff(&self, word: &[usize]) -> f64 {
        let mut idx = 0usize;
        for &w in word {
            debug_assert!(w < self.dim);
            idx = idx * self.dim + w;
        }
        self.levels[word.len()][idx]
    }

    /// Truncated tensor product; the result depth is the smaller of the two.
    pub fn product(&self, other: &Self) -> Result<Self, TensorError> {
        if self.dim != other.dim {
            return Err(TensorError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let depth = self.depth.min(other.depth);
        let dim = self.dim;
        let mut out = Self::zero(dim, depth);
        for k in 0..=depth {
            let cur = &mut out.levels[k];
            for i in 0..=k {
                let j = k - i;
                let a = &self.levels[i];
                let b = &other.levels[j];
                let bl = b.len();
                for (ia, &ca) in a.iter().enumerate() {
                    if ca == 0.0 {
                        continue;
                    }
                    let base = ia * bl;
                    for (ib, &cb) in b.iter().enumerate() {
                        cur[base + ib] += ca * cb;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Inverse with respect to the tensor product.
    ///
    /// Requires scalar part 1; then `a = 1 + u` with `u` nilpotent in the
    /// truncation and the inverse is the finite geometric series
    /// `1 - u + u^2 - ...`.
    pub fn inverse(&self) -> Result<Self, TensorError> {
        if (self.levels[0][0] - 1.0).abs() > 1e-12 {
            return Err(TensorError::NonUnitScalar);
        }
        let mut u = self.clone();
        u.levels[0][0] = 0.0;
        let mut acc = Self::unit(self.dim, self.depth);
        let mut power = Self::unit(self.dim, self.depth);
        let mut sign = 1.0;
        for _ in 1..=self.depth {
            power = power.product(&u)?;
            sign = -sign;
            for (lvl_acc, lvl_pow) in acc.levels.iter_mut().zip(power.levels.iter()) {
                for (x, &p) in lvl_acc.iter_mut().zip(lvl_pow.iter()) {
                    *x += sign * p;
                }
            }
        }
        Ok(acc)
    }

    /// Euclidean norm of the level-`k` coefficient array. Coefficients are
    /// scaled by their peak before squaring so deep levels with tiny entries
    /// do not underflow.
    pub fn level_norm(&self, k: usize) -> Result<f64, TensorError> {
        if k > self.depth {
            return Err(TensorError::LevelOutOfRange {
                level: k,
                depth: self.depth,
            });
        }
        let peak = self.levels[k].iter().map(|x| x.abs()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(0.0);
        }
        let scaled_sq: f64 = self.levels[k]
            .iter()
            .map(|x| {
                let y = x / peak;
                y * y
            })
            .sum();
        Ok(peak * scaled_sq.sqrt())
    }

    /// Largest absolute coefficient difference at each level.
    pub fn max_level_diff(&self, other: &Self) -> Vec<f64> {
        self.levels
            .iter()
            .zip(other.levels.iter())
            .map(|(a, b)| {
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// A word of dual basis letters, each in `0..dim`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DualWord {
    dim: usize,
    letters: Vec<usize>,
}

impl DualWord {
    pub fn new(dim: usize, letters: Vec<usize>) -> Result<Self, TensorError> {
        for &l in &letters {
            if l >= dim {
                return Err(TensorError::LetterOutOfRange { letter: l, dim });
            }
        }
        Ok(DualWord { dim, letters })
    }

    pub fn empty(dim: usize) -> Self {
        DualWord {
            dim,
            letters: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    /// Word with `letter` appended.
    pub fn append(&self, letter: usize) -> Self {
        let mut letters = self.letters.clone();
        letters.push(letter);
        DualWord {
            dim: self.dim,
            letters,
        }
    }

    /// Shuffle product with `other`; coefficients of repeated shuffles
    /// accumulate.
    pub fn shuffle(&self, other: &Self) -> DualTensor {
        assert_eq!(self.dim, other.dim, "shuffle of words over different dims");
        let mut terms = BTreeMap::new();
        shuffle_rec(
            self.dim,
            &self.letters,
            &other.letters,
            &mut Vec::with_capacity(self.len() + other.len()),
            1.0,
            &mut terms,
        );
        DualTensor {
            dim: self.dim,
            terms,
        }
    }
}

fn shuffle_rec(
    dim: usize,
    e: &[usize],
    f: &[usize],
    suffix: &mut Vec<usize>,
    coeff: f64,
    out: &mut BTreeMap<DualWord, f64>,
) {
    if e.is_empty() || f.is_empty() {
        let mut letters = Vec::with_capacity(e.len() + f.len() + suffix.len());
        letters.extend_from_slice(e);
        letters.extend_from_slice(f);
        letters.extend(suffix.iter().rev());
        let w = DualWord { dim, letters };
        *out.entry(w).or_insert(0.0) += coeff;
        return;
    }
    let (e_head, e_last) = e.split_at(e.len() - 1);
    suffix.push(e_last[0]);
    shuffle_rec(dim, e_head, f, suffix, coeff, out);
    suffix.pop();
    let (f_head, f_last) = f.split_at(f.len() - 1);
    suffix.push(f_last[0]);
    shuffle_rec(dim, e, f_head, suffix, coeff, out);
    suffix.pop();
}

/// Finite linear combination of dual words, an element of `T^(n)(V*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualTensor {
    dim: usize,
    terms: BTreeMap<DualWord, f64>,
}

impl DualTensor {
    pub fn from_word(w: DualWord) -> Self {
        let dim = w.dim;
        let mut terms = BTreeMap::new();
        terms.insert(w, 1.0);
        DualTensor { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entries with zero coefficient removed.
    pub fn terms(&self) -> impl Iterator<Item = (&DualWord, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    /// Length of the longest word present.
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Append `letter` to every word (right tensor by a dual letter).
    pub fn append(&self, letter: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(w, &c)| (w.append(letter), c))
            .collect();
        DualTensor {
            dim: self.dim,
            terms,
        }
    }

    /// Drop zero-coefficient entries.
    pub fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| *c != 0.0);
        self
    }

    /// Pair against a truncated tensor: the coordinate functional
    /// `a ↦ Σ coeff(w)·a[w]`.
    pub fn pair(&self, a: &TruncatedTensor) -> Result<f64, TensorError> {
        if self.dim != a.dim() {
            return Err(TensorError::DimensionMismatch {
                left: self.dim,
                right: a.dim(),
            });
        }
        let mut total = 0.0;
        for (w, c) in self.terms.iter() {
            if w.len() > a.depth() {
                return Err(TensorError::WordTooLong {
                    len: w.len(),
                    depth: a.depth(),
                });
            }
            total += c * a.coeff(&w.letters);
        }
        Ok(total)
    }
}

/// Pair a single dual word against a truncated tensor.
pub fn pair_word(w: &DualWord, a: &TruncatedTensor) -> Result<f64, TensorError> {
    if w.dim != a.dim() {
        return Err(TensorError::DimensionMismatch {
            left: w.dim,
            right: a.dim(),
        });
    }
    if w.len() > a.depth() {
        return Err(TensorError::WordTooLong {
            len: w.len(),
            depth: a.depth(),
        });
    }
    Ok(a.coeff(&w.letters))
}

/// Deterministic balanced product of a slice of tensors.
///
/// Associativity makes the result agree with the left-to-right fold up to
/// rounding; the balanced association order is fixed so parallel callers can
/// split the slice and still reproduce results bit for bit.
pub fn balanced_product(factors: &[TruncatedTensor]) -> Result<Option<TruncatedTensor>, TensorError> {
    match factors.len() {
        0 => Ok(None),
        1 => Ok(Some(factors[0].clone())),
        n => {
            let (a, b) = factors.split_at(n / 2);
            let left = balanced_product(a)?.expect("nonempty");
            let right = balanced_product(b)?.expect("nonempty");
            Ok(Some(left.product(&right)?))
        }
    }
}
