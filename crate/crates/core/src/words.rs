//! Free-group words, lattice paths, and the vanishing certificate.
//!
//! Words over a `d`-letter alphabet with inverses correspond to lattice
//! paths of unit steps. A word over two letters embeds into `GL(2,C)` by
//! sending the letters to the Lie-subspace matrices `[[0, z], [z̄, 0]]` with
//! `z = 1` and `z = i`; the graded development of the word collects its
//! iterated integrals degree by degree. Vanishing of the first
//! `⌊e·log(1+√2)·L⌋` degrees certifies that the word reduces to the empty
//! word. The `d`-letter case reduces to two letters through an explicit
//! free-group embedding.

use std::f64::consts::E;
use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::signature::PiecewiseLinearPath;

/// `log(1 + sqrt(2))`, the hyperbolic distance from 0 to 1/sqrt(2).
pub const R0: f64 = 0.881_373_587_019_542_9;

/// Errors from word handling and certification.
#[derive(Clone, Debug, PartialEq)]
pub enum WordError {
    /// An input character was not an ASCII letter.
    BadCharacter(char),
    /// A letter index lies outside the declared alphabet.
    LetterOutOfRange { letter: usize, alphabet: usize },
    /// The operation needs a two-letter alphabet.
    AlphabetNotTwo { alphabet: usize },
    /// The operation needs at least two generators.
    AlphabetTooSmall { alphabet: usize },
    /// `N(L)` is defined for positive length only.
    EmptyLength,
    /// The floor boundary guard tripped: the depth landed within 1e-9 of an
    /// integer, so flooring would be numerically ambiguous.
    FloorBoundary { value: f64 },
}

impl fmt::Display for WordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordError::BadCharacter(c) => write!(f, "bad word character {c:?}"),
            WordError::LetterOutOfRange { letter, alphabet } => {
                write!(f, "letter {letter} out of range for alphabet size {alphabet}")
            }
            WordError::AlphabetNotTwo { alphabet } => {
                write!(f, "operation requires a 2-letter alphabet, got {alphabet}")
            }
            WordError::AlphabetTooSmall { alphabet } => {
                write!(f, "operation requires at least 2 generators, got {alphabet}")
            }
            WordError::EmptyLength => write!(f, "word length must be at least 1"),
            WordError::FloorBoundary { value } => {
                write!(f, "depth {value} is within 1e-9 of an integer; refusing to floor")
            }
        }
    }
}

impl std::error::Error for WordError {}

/// A signed word over a finite alphabet.
///
/// Letters are `(index, sign)` with `index < alphabet_size` and sign `±1`.
/// The text form writes generator `i` as the `i`-th lowercase letter and its
/// inverse as the uppercase letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet_size: usize,
    letters: Vec<(usize, i8)>,
}

impl Word {
    pub fn new(alphabet_size: usize, letters: Vec<(usize, i8)>) -> Result<Self, WordError> {
        for &(l, s) in &letters {
            if l >= alphabet_size {
                return Err(WordError::LetterOutOfRange {
                    letter: l,
                    alphabet: alphabet_size,
                });
            }
            debug_assert!(s == 1 || s == -1);
        }
        Ok(Word {
            alphabet_size: alphabet_size.max(1),
            letters,
        })
    }

    pub fn empty(alphabet_size: usize) -> Self {
        Word {
            alphabet_size: alphabet_size.max(1),
            letters: Vec::new(),
        }
    }

    /// Parse text form: `a`..`z` are generators, `A`..`Z` their inverses.
    /// The alphabet size is the largest letter used, with a floor of two.
    pub fn parse(text: &str) -> Result<Self, WordError> {
        let mut letters = Vec::with_capacity(text.len());
        let mut max_idx = 0usize;
        for c in text.chars() {
            if c.is_ascii_lowercase() {
                let idx = (c as u8 - b'a') as usize;
                max_idx = max_idx.max(idx);
                letters.push((idx, 1i8));
            } else if c.is_ascii_uppercase() {
                let idx = (c as u8 - b'A') as usize;
                max_idx = max_idx.max(idx);
                letters.push((idx, -1i8));
            } else {
                return Err(WordError::BadCharacter(c));
            }
        }
        Ok(Word {
            alphabet_size: (max_idx + 1).max(2),
            letters,
        })
    }

    /// The same letters viewed over a larger alphabet.
    pub fn with_alphabet(&self, alphabet_size: usize) -> Result<Self, WordError> {
        Word::new(alphabet_size, self.letters.clone())
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Stack-based free reduction: cancels adjacent `x x^{-1}` pairs until
    /// none remain. Idempotent; the result is the unique reduced form.
    pub fn reduced(&self) -> Self {
        let mut stack: Vec<(usize, i8)> = Vec::with_capacity(self.letters.len());
        for &(l, s) in &self.letters {
            if let Some(&(tl, ts)) = stack.last() {
                if tl == l && ts == -s {
                    stack.pop();
                    continue;
                }
            }
            stack.push((l, s));
        }
        Word {
            alphabet_size: self.alphabet_size,
            letters: stack,
        }
    }

    /// The inverse word: reversed letters with flipped signs.
    pub fn inverse(&self) -> Self {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|&(l, s)| (l, -s))
            .collect();
        Word {
            alphabet_size: self.alphabet_size,
            letters,
        }
    }

    /// Concatenation.
    pub fn concat(&self, other: &Word) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word {
            alphabet_size: self.alphabet_size.max(other.alphabet_size),
            letters,
        }
    }

    /// The lattice path of unit steps `±e_index` starting at the origin.
    pub fn lattice_path(&self) -> PiecewiseLinearPath {
        let d = self.alphabet_size;
        let mut points = Vec::with_capacity(self.letters.len() + 1);
        let mut cur = vec![0.0; d];
        points.push(cur.clone());
        for &(l, s) in &self.letters {
            cur[l] += s as f64;
            points.push(cur.clone());
        }
        PiecewiseLinearPath::new(d, points).expect("lattice points are well formed")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(l, s) in &self.letters {
            let c = if s > 0 {
                (b'a' + l as u8) as char
            } else {
                (b'A' + l as u8) as char
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Floor with a boundary guard: refuses values within 1e-9 of an integer,
/// where double rounding could silently shift the result by one.
fn guarded_floor(x: f64) -> Result<u64, WordError> {
    if (x - x.round()).abs() < 1e-9 {
        return Err(WordError::FloorBoundary { value: x });
    }
    Ok(x.floor() as u64)
}

/// Number of graded terms whose vanishing certifies triviality of a length-`L`
/// word over two letters: `⌊e·log(1+√2)·L⌋`.
pub fn n_of_l(len: usize) -> Result<u64, WordError> {
    if len == 0 {
        return Err(WordError::EmptyLength);
    }
    guarded_floor(E * R0 * len as f64)
}

/// Degree-graded 2x2 complex series, the development of a word truncated by
/// polynomial degree.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMatrixSeries {
    comps: Vec<Matrix2<Complex64>>,
}

impl GradedMatrixSeries {
    /// The graded identity: identity at degree zero, zero above.
    pub fn identity(depth: usize) -> Self {
        let mut comps = vec![Matrix2::zeros(); depth + 1];
        comps[0] = Matrix2::identity();
        GradedMatrixSeries { comps }
    }

    pub fn depth(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn component(&self, degree: usize) -> &Matrix2<Complex64> {
        &self.comps[degree]
    }

    /// Truncated graded product.
    pub fn product(&self, other: &Self) -> Self {
        let depth = self.depth().min(other.depth());
        let mut comps = vec![Matrix2::zeros(); depth + 1];
        for (k, comp) in comps.iter_mut().enumerate() {
            for i in 0..=k {
                *comp += self.comps[i] * other.comps[k - i];
            }
        }
        GradedMatrixSeries { comps }
    }

    /// Exponential series of a single matrix: degree `k` is `m^k / k!`.
    pub fn exp(m: &Matrix2<Complex64>, depth: usize) -> Self {
        let mut comps = Vec::with_capacity(depth + 1);
        comps.push(Matrix2::identity());
        let mut cur: Matrix2<Complex64> = Matrix2::identity();
        for k in 1..=depth {
            cur = cur * m / Complex64::new(k as f64, 0.0);
            comps.push(cur);
        }
        GradedMatrixSeries { comps }
    }

    /// Largest entry magnitude at each degree from 1 upward.
    pub fn max_abs_by_degree(&self) -> Vec<f64> {
        self.comps
            .iter()
            .map(|m| m.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect()
    }

    /// True when every degree from 1 through `depth` vanishes to `tol`.
    pub fn vanishes_above_unit(&self, tol: f64) -> bool {
        self.comps
            .iter()
            .skip(1)
            .all(|m| m.iter().all(|z| z.norm() <= tol))
    }
}

/// Letter matrix for generator `idx` with sign `s`: `a ↦ [[0,1],[1,0]]`,
/// `b ↦ [[0,i],[-i,0]]`, sign negating.
fn letter_matrix(idx: usize, sign: i8) -> Matrix2<Complex64> {
    let z = match idx {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        _ => unreachable!("letter index checked before matrix construction"),
    };
    let s = sign as f64;
    Matrix2::new(
        Complex64::new(0.0, 0.0),
        z * s,
        z.conj() * s,
        Complex64::new(0.0, 0.0),
    )
}

/// Graded development of a two-letter word at unit step scale.
pub fn gl2_develop(w: &Word, depth: usize) -> Result<GradedMatrixSeries, WordError> {
    gl2_develop_scaled(w, depth, 1.0)
}

/// Graded development with each step scaled by `theta`.
pub fn gl2_develop_scaled(
    w: &Word,
    depth: usize,
    theta: f64,
) -> Result<GradedMatrixSeries, WordError> {
    if w.alphabet_size != 2 {
        return Err(WordError::AlphabetNotTwo {
            alphabet: w.alphabet_size,
        });
    }
    let mut acc = GradedMatrixSeries::identity(depth);
    for &(l, s) in &w.letters {
        let m = letter_matrix(l, s) * Complex64::new(theta, 0.0);
        acc = acc.product(&GradedMatrixSeries::exp(&m, depth));
    }
    Ok(acc)
}

/// Full (ungraded) development of a two-letter word: the product of exact
/// letter exponentials at step scale `theta`. Letter matrices square to the
/// identity, so each factor is `cosh(θ)·I + sinh(θ)·m`.
pub fn gl2_full_development(w: &Word, theta: f64) -> Result<Matrix2<Complex64>, WordError> {
    if w.alphabet_size != 2 {
        return Err(WordError::AlphabetNotTwo {
            alphabet: w.alphabet_size,
        });
    }
    let mut acc: Matrix2<Complex64> = Matrix2::identity();
    let (ch, sh) = (theta.cosh(), theta.sinh());
    for &(l, s) in &w.letters {
        let m = letter_matrix(l, s);
        let factor = Matrix2::identity() * Complex64::new(ch, 0.0) + m * Complex64::new(sh, 0.0);
        acc *= factor;
    }
    Ok(acc)
}

/// Disk trace test: `Tr[M·conj(M)^t] < 6`, equivalently the Mobius image of
/// zero lies strictly inside Euclidean radius `1/sqrt(2)`.
pub fn disc_trace_test(m: &Matrix2<Complex64>) -> bool {
    let trace: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    trace < 6.0
}

const CERT_TOL: f64 = 1e-9;

/// Certify triviality of a two-letter word from the vanishing of its first
/// `N(L)` graded development components.
///
/// `true` means every degree `1..=N(L)` vanishes to 1e-9 per entry, which
/// forces the reduced word to be empty; `false` exhibits a non-vanishing
/// degree, so the reduced word is nontrivial.
pub fn triviality_certificate(w: &Word) -> Result<bool, WordError> {
    if w.alphabet_size != 2 {
        return Err(WordError::AlphabetNotTwo {
            alphabet: w.alphabet_size,
        });
    }
    if w.is_empty() {
        return Ok(true);
    }
    let depth = n_of_l(w.len())? as usize;
    let dev = gl2_develop(w, depth)?;
    Ok(dev.vanishes_above_unit(CERT_TOL))
}

/// Minimal `l` with `2·3^(l-1) >= d`.
fn embedding_word_length(d: usize) -> usize {
    let mut l = 1usize;
    let mut cap = 2usize;
    while cap < d {
        cap *= 3;
        l += 1;
    }
    l
}

/// Enumerate the reduced words of length `l` over two letters whose first
/// letter is generator `class_idx` or its inverse, in lexicographic order
/// with letters ordered `a < A < b < B`.
fn reduced_words_of_class(l: usize, class_idx: usize) -> Vec<Word> {
    let order: [(usize, i8); 4] = [(0, 1), (0, -1), (1, 1), (1, -1)];
    let mut out = Vec::new();
    let mut cur: Vec<(usize, i8)> = Vec::with_capacity(l);
    fn rec(
        l: usize,
        order: &[(usize, i8); 4],
        cur: &mut Vec<(usize, i8)>,
        out: &mut Vec<Word>,
        class_idx: usize,
    ) {
        if cur.len() == l {
            out.push(Word::new(2, cur.clone()).expect("two-letter word"));
            return;
        }
        for &(idx, sign) in order.iter() {
            if cur.is_empty() {
                if idx != class_idx {
                    continue;
                }
            } else {
                let &(pl, ps) = cur.last().expect("nonempty");
                if pl == idx && ps == -sign {
                    continue;
                }
            }
            cur.push((idx, sign));
            rec(l, order, cur, out, class_idx);
            cur.pop();
        }
    }
    rec(l, &order, &mut cur, &mut out, class_idx);
    out
}

/// Embed the free group on `d` generators into the free group on two.
///
/// Reduced words of length `l` (with `2·3^(l-1) >= d`) are grouped by the
/// class of their first letter, sorted lexicographically, and paired off
/// adjacently. The `i`-th generator is `u·c·v^{-1}` for the `i`-th pair
/// `(u, v)`, where `c` is the lexicographically smallest letter from the
/// alternate class that cancels against neither junction, so every output is
/// already reduced with length `2l + 1`.
pub fn embed_free_group(d: usize) -> Vec<Word> {
    assert!(d >= 1, "need at least one generator");
    let l = embedding_word_length(d);
    let mut generators = Vec::with_capacity(d);
    'outer: for class_idx in 0..2usize {
        let words = reduced_words_of_class(l, class_idx);
        let alternate = 1 - class_idx;
        for pair in words.chunks(2) {
            if generators.len() == d {
                break 'outer;
            }
            let (u, v) = (&pair[0], &pair[1]);
            let u_last = *u.letters.last().expect("length l >= 1");
            let v_last = *v.letters.last().expect("length l >= 1");
            // c must not cancel with the last letter of u nor, after
            // inversion of v, with the last letter of v.
            let c = [(alternate, 1i8), (alternate, -1i8)]
                .into_iter()
                .find(|&(cl, cs)| {
                    let cancels_u = u_last.0 == cl && u_last.1 == -cs;
                    let cancels_v = v_last.0 == cl && v_last.1 == cs;
                    !cancels_u && !cancels_v
                })
                .expect("adjacent pairing always leaves an admissible letter");
            let mut letters = u.letters.clone();
            letters.push(c);
            letters.extend(v.inverse().letters);
            generators.push(Word::new(2, letters).expect("two-letter word"));
        }
    }
    generators
}

/// Certify triviality of a word over `d >= 2` generators by substituting the
/// two-letter embedding and checking the graded development through degree
/// `⌊(2⌈log3(d/2)⌉ + 3)·e·log(1+√2)·L⌋`.
pub fn certify_d_dim(w: &Word) -> Result<bool, WordError> {
    let d = w.alphabet_size;
    if d < 2 {
        return Err(WordError::AlphabetTooSmall { alphabet: d });
    }
    if w.is_empty() {
        return Ok(true);
    }
    let generators = embed_free_group(d);
    let mut substituted = Word::empty(2);
    for &(l, s) in &w.letters {
        let f = &generators[l];
        substituted = if s > 0 {
            substituted.concat(f)
        } else {
            substituted.concat(&f.inverse())
        };
    }
    let factor = (2 * embedding_word_length(d) + 1) as f64;
    let depth = guarded_floor(factor * E * R0 * w.len() as f64)? as usize;
    let dev = gl2_develop(&substituted, depth)?;
    Ok(dev.vanishes_above_unit(CERT_TOL))
}
