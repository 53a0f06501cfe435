//! Piecewise linear paths and their exact truncated signatures.
//!
//! A path is an ordered list of breakpoints in `R^d`; between breakpoints it
//! is linear. The signature of a straight segment is the exponential of its
//! increment, and the signature of the whole path is the ordered tensor
//! product of segment exponentials, so piecewise linear signatures are exact
//! up to rounding. Sampling general bounded-variation paths down to
//! breakpoints is the caller's contract.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tensor::{DualWord, TensorError, TruncatedTensor};

/// Errors from path construction and path-level operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathError {
    /// Point list empty or a point of the wrong dimension.
    BadPoint { index: usize, expected: usize, got: usize },
    /// No points at all.
    Empty,
    /// Two paths over different dimensions were combined.
    DimensionMismatch { left: usize, right: usize },
    /// The trailing dual word of an integral-of-integrals was empty.
    EmptyWord,
    /// Word lengths exceed the requested truncation depth.
    DepthExceeded { needed: usize, depth: usize },
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathError::BadPoint { index, expected, got } => {
                write!(f, "point {index} has dimension {got}, expected {expected}")
            }
            PathError::Empty => write!(f, "path needs at least one point"),
            PathError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            PathError::EmptyWord => write!(f, "trailing dual word must be non-empty"),
            PathError::DepthExceeded { needed, depth } => {
                write!(f, "word lengths need depth {needed}, got {depth}")
            }
        }
    }
}

impl std::error::Error for PathError {}

/// A piecewise linear path in `R^d`, stored as its breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseLinearPath {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PiecewiseLinearPath {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self, PathError> {
        if points.is_empty() {
            return Err(PathError::Empty);
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(PathError::BadPoint {
                    index: i,
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        Ok(PiecewiseLinearPath { dim, points })
    }

    /// The constant path at a single point.
    pub fn point(p: Vec<f64>) -> Self {
        PiecewiseLinearPath {
            dim: p.len(),
            points: vec![p],
        }
    }

    pub fn start(&self) -> &[f64] {
        self.points.first().expect("nonempty")
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().expect("nonempty")
    }

    /// Segment increments `p[i+1] - p[i]`.
    pub fn segments(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.points
            .windows(2)
            .map(|w| w[1].iter().zip(w[0].iter()).map(|(b, a)| b - a).collect())
    }

    /// Total variation, the sum of segment lengths.
    pub fn length(&self) -> f64 {
        self.segments().map(|s| norm(&s)).sum()
    }

    /// Cumulative arc length at each breakpoint.
    pub fn arc_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc = 0.0;
        out.push(0.0);
        for s in self.segments() {
            acc += norm(&s);
            out.push(acc);
        }
        out
    }

    /// Truncated signature: the ordered product of segment exponentials.
    ///
    /// A single point gives the unit tensor. Zero-length segments contribute
    /// `exp(0) = 1` and are skipped.
    pub fn signature(&self, depth: usize) -> TruncatedTensor {
        let mut sig = TruncatedTensor::unit(self.dim, depth);
        for seg in self.segments() {
            if seg.iter().all(|&x| x == 0.0) {
                continue;
            }
            sig = sig
                .product(&TruncatedTensor::exp(&seg, depth))
                .expect("dims agree by construction");
        }
        sig
    }

    /// Signature computed with a fixed balanced association order, the
    /// deterministic shape intended for parallel reductions.
    pub fn signature_balanced(&self, depth: usize) -> TruncatedTensor {
        let factors: Vec<TruncatedTensor> = self
            .segments()
            .map(|seg| TruncatedTensor::exp(&seg, depth))
            .collect();
        crate::tensor::balanced_product(&factors)
            .expect("dims agree")
            .unwrap_or_else(|| TruncatedTensor::unit(self.dim, depth))
    }

    /// The path traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        PiecewiseLinearPath {
            dim: self.dim,
            points,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Concatenation: `q` is translated so that its start matches `p`'s end.
///
/// Lengths add: `|p * q| = |p| + |q|`.
pub fn concat(
    p: &PiecewiseLinearPath,
    q: &PiecewiseLinearPath,
) -> Result<PiecewiseLinearPath, PathError> {
    if p.dim != q.dim {
        return Err(PathError::DimensionMismatch {
            left: p.dim,
            right: q.dim,
        });
    }
    let shift: Vec<f64> = p
        .end()
        .iter()
        .zip(q.start().iter())
        .map(|(e, s)| e - s)
        .collect();
    let mut points = p.points.clone();
    for pt in q.points.iter().skip(1) {
        points.push(pt.iter().zip(shift.iter()).map(|(x, s)| x + s).collect());
    }
    Ok(PiecewiseLinearPath { dim: p.dim, points })
}

/// Iterated integral of coordinate iterated integrals, `∫ dX^e dX^f`.
///
/// Reduces to the closed form `pair((e ⊔ f̃) ⊗ f_s, S(p))` where `f̃` drops
/// the last letter `f_s` of `f`.
pub fn iterated_of_iterated(
    e: &DualWord,
    f: &DualWord,
    p: &PiecewiseLinearPath,
    depth: usize,
) -> Result<f64, PathError> {
    if f.is_empty() {
        return Err(PathError::EmptyWord);
    }
    if e.len() + f.len() > depth {
        return Err(PathError::DepthExceeded {
            needed: e.len() + f.len(),
            depth,
        });
    }
    let letters = f.letters();
    let (head, last) = letters.split_at(letters.len() - 1);
    let f_head = DualWord::new(f.dim(), head.to_vec()).expect("letters already validated");
    let functional = e.shuffle(&f_head).append(last[0]);
    let sig = p.signature(depth);
    functional.pair(&sig).map_err(|err| match err {
        TensorError::WordTooLong { len, depth } => PathError::DepthExceeded { needed: len, depth },
        TensorError::DimensionMismatch { left, right } => {
            PathError::DimensionMismatch { left, right }
        }
        _ => PathError::EmptyWord,
    })
}
