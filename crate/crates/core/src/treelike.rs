//! Height functions, tree-like verification, and path reduction.
//!
//! A path is tree-like when some nonnegative function `h` with
//! `h(0) = h(T) = 0` dominates its increments:
//! `‖X_t - X_s‖ <= h(s) + h(t) - 2·inf_{[s,t]} h`. For piecewise linear
//! paths this is equivalent to the signature being trivial, and the
//! reduction here computes the unique minimal representative by cancelling
//! retraced segments. [`build_height`] reverses the cancellations into an
//! explicit height function whose total variation equals that of the path.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::signature::{concat, PathError, PiecewiseLinearPath};

/// Relative tolerance for collinearity of normalized directions.
const DIRECTION_TOL: f64 = 1e-12;

/// Errors from tree-like checks.
#[derive(Clone, Debug, PartialEq)]
pub enum TreeError {
    /// Height breakpoints not strictly increasing, negative values, or
    /// nonzero endpoints.
    BadHeight(String),
    /// A nonconstant path cannot share the degenerate domain `[0, 0]`.
    DomainMismatch,
    /// The reduction says point but the truncated signature does not vanish,
    /// which is impossible and indicates a bug.
    CriteriaDisagree { level: usize, norm: f64 },
    /// Forwarded path error.
    Path(PathError),
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::BadHeight(msg) => write!(f, "bad height function: {msg}"),
            TreeError::DomainMismatch => write!(f, "path and height domains are incompatible"),
            TreeError::CriteriaDisagree { level, norm } => write!(
                f,
                "reduction reached a point but signature level {level} has norm {norm}"
            ),
            TreeError::Path(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for TreeError {}

impl From<PathError> for TreeError {
    fn from(e: PathError) -> Self {
        TreeError::Path(e)
    }
}

/// Piecewise linear height function on `[0, T]` with `h(0) = h(T) = 0` and
/// `h >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightFunction {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl HeightFunction {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, TreeError> {
        if times.is_empty() || times.len() != values.len() {
            return Err(TreeError::BadHeight(
                "times and values must be nonempty and of equal length".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(TreeError::BadHeight("domain must start at 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) && times.len() > 1 {
            return Err(TreeError::BadHeight(
                "times must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(TreeError::BadHeight("values must be nonnegative".into()));
        }
        if values[0] != 0.0 || *values.last().expect("nonempty") != 0.0 {
            return Err(TreeError::BadHeight("endpoints must vanish".into()));
        }
        Ok(HeightFunction { times, values })
    }

    /// The zero function on the degenerate domain `[0, 0]`.
    pub fn zero() -> Self {
        HeightFunction {
            times: vec![0.0],
            values: vec![0.0],
        }
    }

    pub fn domain_end(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Linear interpolation; clamps outside the domain.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.times[0] {
            return self.values[0];
        }
        let n = self.times.len();
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let i = self.times.partition_point(|&x| x <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Exact minimum over `[s, t]`: endpoint values and interior breakpoints.
    pub fn min_on(&self, s: f64, t: f64) -> f64 {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let mut m = self.eval(s).min(self.eval(t));
        let lo = self.times.partition_point(|&x| x <= s);
        let hi = self.times.partition_point(|&x| x < t);
        for i in lo..hi {
            m = m.min(self.values[i]);
        }
        m
    }

    /// Total variation: the sum of `|Δh|` over breakpoints.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Collinearity of two nonzero segment vectors: `1` same direction, `-1`
/// opposite, `0` not collinear.
fn collinearity(u: &[f64], v: &[f64]) -> i8 {
    let (nu, nv) = (norm(u), norm(v));
    let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    let cosine = dot / (nu * nv);
    if cosine >= 1.0 - DIRECTION_TOL {
        1
    } else if cosine <= -1.0 + DIRECTION_TOL {
        -1
    } else {
        0
    }
}

/// Reduce a path to its unique non-degenerate representative.
///
/// Runs a stack of segment vectors: zero segments are dropped and adjacent
/// collinear segments are replaced by their net displacement, cancelling
/// entirely when the net vanishes. The result has the same signature, no
/// adjacent collinear pair, and is a fixpoint of the reduction.
pub fn reduce_path(p: &PiecewiseLinearPath) -> PiecewiseLinearPath {
    let mut stack: Vec<Vec<f64>> = Vec::with_capacity(p.points.len());
    for seg in p.segments() {
        let mut cur = seg;
        if norm(&cur) == 0.0 {
            continue;
        }
        loop {
            match stack.last() {
                Some(top) if collinearity(top, &cur) != 0 => {
                    let top = stack.pop().expect("nonempty");
                    let combined: Vec<f64> =
                        top.iter().zip(cur.iter()).map(|(a, b)| a + b).collect();
                    let scale = norm(&top) + norm(&cur);
                    if norm(&combined) <= DIRECTION_TOL * scale {
                        break;
                    }
                    cur = combined;
                }
                _ => {
                    stack.push(cur);
                    break;
                }
            }
        }
    }
    let mut points = Vec::with_capacity(stack.len() + 1);
    let mut cur = p.start().to_vec();
    points.push(cur.clone());
    for seg in stack {
        for (x, d) in cur.iter_mut().zip(seg.iter()) {
            *x += d;
        }
        points.push(cur.clone());
    }
    PiecewiseLinearPath::new(p.dim, points).expect("reduced points well formed")
}

/// Whether the path, viewed up to redundant breakpoints, is already its own
/// reduction.
pub fn is_nondegenerate(p: &PiecewiseLinearPath) -> bool {
    let r = reduce_path(p);
    (r.length() - p.length()).abs() <= 1e-12 * (1.0 + p.length())
}

/// Group operation on reduced representatives: concatenate, then reduce.
pub fn concat_reduce(
    p: &PiecewiseLinearPath,
    q: &PiecewiseLinearPath,
) -> Result<PiecewiseLinearPath, TreeError> {
    Ok(reduce_path(&concat(p, q)?))
}

/// Check the tree-like inequality for `p` against `h` on a finite pair set:
/// the union of both breakpoint sets and a uniform grid at `spacing`.
///
/// Path breakpoints are placed proportionally to arc length over the domain
/// of `h`. Exactness of the minimum over each pair comes from evaluating at
/// every breakpoint of `h`; this is a sampled check on the pair set, not a
/// proof for other parameterizations.
pub fn verify_height(
    p: &PiecewiseLinearPath,
    h: &HeightFunction,
    spacing: f64,
) -> Result<bool, TreeError> {
    let t_end = h.domain_end();
    let total = p.length();
    if t_end == 0.0 {
        // Degenerate domain certifies only constant paths.
        return if total == 0.0 {
            Ok(true)
        } else {
            Err(TreeError::DomainMismatch)
        };
    }

    // Sample times: h breakpoints, path breakpoints mapped by arc length,
    // and a uniform grid.
    let mut times = h.times.clone();
    if total > 0.0 {
        for t in p.arc_times() {
            times.push(t / total * t_end);
        }
    }
    if spacing > 0.0 {
        let mut t = 0.0;
        while t < t_end {
            times.push(t);
            t += spacing;
        }
        times.push(t_end);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    times.dedup();

    // Path positions at the sampled times (arc-length parameterization).
    let arc = p.arc_times();
    let eval_path = |t: f64| -> Vec<f64> {
        let s = t / t_end * total;
        let i = arc.partition_point(|&x| x <= s).min(arc.len() - 1);
        if i == 0 {
            return p.points[0].clone();
        }
        let (s0, s1) = (arc[i - 1], arc[i]);
        let w = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
        p.points[i - 1]
            .iter()
            .zip(p.points[i].iter())
            .map(|(a, b)| a + (b - a) * w)
            .collect()
    };

    let positions: Vec<Vec<f64>> = times.iter().map(|&t| eval_path(t)).collect();
    let heights: Vec<f64> = times.iter().map(|&t| h.eval(t)).collect();

    for i in 0..times.len() {
        let mut running_min = heights[i];
        for j in i..times.len() {
            running_min = running_min.min(heights[j]);
            let dist: f64 = positions[i]
                .iter()
                .zip(positions[j].iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist > heights[i] + heights[j] - 2.0 * running_min + 1e-9 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Merge exact duplicates and same-direction collinear breakpoints without
/// changing the path as a function.
fn canonical_points(p: &PiecewiseLinearPath) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(p.points.len());
    for q in &p.points {
        if let Some(last) = pts.last() {
            let seg: Vec<f64> = q.iter().zip(last.iter()).map(|(a, b)| a - b).collect();
            if norm(&seg) == 0.0 {
                continue;
            }
            if pts.len() >= 2 {
                let prev: Vec<f64> = pts[pts.len() - 1]
                    .iter()
                    .zip(pts[pts.len() - 2].iter())
                    .map(|(a, b)| a - b)
                    .collect();
                if collinearity(&prev, &seg) == 1 {
                    pts.pop();
                }
            }
        }
        pts.push(q.clone());
    }
    pts
}

/// Construct a height function certifying that `p` is tree-like, or `None`
/// when it is not.
///
/// The recursion finds a retraced pair of adjacent opposite segments,
/// excises the out-and-back loop of half-length `s`, builds a height for the
/// shorter path, and splices in the tent `u ↦ s - |t_j - u|` raised to the
/// height at the junction. The domain is the arc-length interval
/// `[0, length(p)]` and the total variation of the result equals that of the
/// path.
pub fn build_height(p: &PiecewiseLinearPath) -> Option<HeightFunction> {
    let pts = canonical_points(p);
    build_height_rec(&pts)
}

fn build_height_rec(pts: &[Vec<f64>]) -> Option<HeightFunction> {
    if pts.len() <= 1 {
        return Some(HeightFunction::zero());
    }

    // Locate an adjacent opposite pair.
    let mut junction = None;
    for i in 0..pts.len() - 2 {
        let u: Vec<f64> = pts[i + 1].iter().zip(pts[i].iter()).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = pts[i + 2].iter().zip(pts[i + 1].iter()).map(|(a, b)| a - b).collect();
        if collinearity(&u, &v) == -1 {
            junction = Some((i, u, v));
            break;
        }
    }
    let (i, u, v) = junction?;

    let (nu, nv) = (norm(&u), norm(&v));
    let s = nu.min(nv);
    // Junction time in arc-length parameterization.
    let t_junction: f64 = pts
        .windows(2)
        .take(i + 1)
        .map(|w| {
            let seg: Vec<f64> = w[1].iter().zip(w[0].iter()).map(|(a, b)| a - b).collect();
            norm(&seg)
        })
        .sum();
    let t_star = t_junction - s;

    // Excise the loop [t_junction - s, t_junction + s].
    let mut reduced: Vec<Vec<f64>> = pts[..=i].to_vec();
    let meet: Vec<f64> = pts[i + 1]
        .iter()
        .zip(u.iter())
        .map(|(x, du)| x - du * (s / nu))
        .collect();
    let scale = nu + nv;
    let dist_to_prev = norm(
        &meet
            .iter()
            .zip(reduced.last().expect("nonempty").iter())
            .map(|(a, b)| a - b)
            .collect::<Vec<f64>>(),
    );
    if dist_to_prev > DIRECTION_TOL * scale {
        reduced.push(meet.clone());
    }
    for q in &pts[i + 2..] {
        let dist = norm(
            &q.iter()
                .zip(reduced.last().expect("nonempty").iter())
                .map(|(a, b)| a - b)
                .collect::<Vec<f64>>(),
        );
        if dist > DIRECTION_TOL * scale {
            reduced.push(q.clone());
        } else {
            // Coincides with the current endpoint: skip the duplicate.
            continue;
        }
    }
    let reduced = {
        let path = PiecewiseLinearPath::new(pts[0].len(), reduced).expect("well formed");
        canonical_points(&path)
    };

    let inner = build_height_rec(&reduced)?;

    // Splice the tent into the inner height function at time t_star.
    let base = inner.eval(t_star);
    let mut times = Vec::with_capacity(inner.times.len() + 3);
    let mut values = Vec::with_capacity(inner.values.len() + 3);
    for (&t, &v) in inner.times.iter().zip(inner.values.iter()) {
        if t < t_star - DIRECTION_TOL * (1.0 + t_star) {
            times.push(t);
            values.push(v);
        } else {
            break;
        }
    }
    times.push(t_star);
    values.push(base);
    times.push(t_star + s);
    values.push(base + s);
    times.push(t_star + 2.0 * s);
    values.push(base);
    for (&t, &v) in inner.times.iter().zip(inner.values.iter()) {
        if t > t_star + DIRECTION_TOL * (1.0 + t_star) {
            times.push(t + 2.0 * s);
            values.push(v);
        }
    }
    // Monotone cleanup of numerically equal knots.
    let mut ct = vec![times[0]];
    let mut cv = vec![values[0]];
    for i in 1..times.len() {
        if times[i] > *ct.last().expect("nonempty") {
            ct.push(times[i]);
            cv.push(values[i]);
        }
    }
    Some(HeightFunction {
        times: ct,
        values: cv,
    })
}

/// Tree-like test: `true` iff the reduction collapses to a point.
///
/// Cross-checked against vanishing of the truncated signature. A collapsed
/// reduction with a non-vanishing signature level is impossible and reported
/// as [`TreeError::CriteriaDisagree`]; the converse (non-collapsed with
/// vanishing truncation) only means the truncation depth is too shallow to
/// witness the nonzero level, so the reduction verdict stands.
pub fn is_tree_like(p: &PiecewiseLinearPath, depth: usize, tol: f64) -> Result<bool, TreeError> {
    assert!(depth >= 1, "depth must be at least 1");
    let reduced = reduce_path(p);
    let is_point = reduced.points.len() == 1;
    if is_point {
        let sig = p.signature(depth);
        for k in 1..=depth {
            let n = sig.level_norm(k).expect("k <= depth");
            if n > tol {
                return Err(TreeError::CriteriaDisagree { level: k, norm: n });
            }
        }
    }
    Ok(is_point)
}
