//! Cartan development into the hyperboloid model of hyperbolic space.
//!
//! Points live on the sheet `I_d(x,x) = -1` of the quadratic form
//! `I_d(x,y) = Σ x_i y_i - x_{d+1} y_{d+1}`, isometries are the matrices of
//! `SO(I_d)` preserving the form, and a path in `R^d` develops through the
//! linear equation `dΓ = F(dγ)Γ` whose generator `F(v)` carries `v` in the
//! last row and column. Straight segments develop to geodesics, so the
//! development of a scaled path compares its length against the hyperbolic
//! chord; the quantitative estimates here turn that comparison into bounds
//! on signature coefficients and a length-recovery procedure.

use std::f64::consts::{E, PI};
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::signature::PiecewiseLinearPath;
use crate::words::R0;

/// Multiplicative factor of the search grid over the development scale.
const ALPHA_GRID_FACTOR: f64 = 1.01;
/// Upper cap for the scale search.
const ALPHA_CAP: f64 = 1e6;
/// Tolerance window for `acosh` arguments that drift below 1.
const ACOSH_CLAMP: f64 = 1e-9;
/// Constant of the exponential-series tail bound, `e^{1/2}/(√(2π)(e-1))`.
pub fn stirling_constant() -> f64 {
    E.sqrt() / ((2.0 * PI).sqrt() * (E - 1.0))
}

/// Errors from hyperbolic-geometry operations.
#[derive(Clone, Debug, PartialEq)]
pub enum HypError {
    /// `-I_d(x,y)` fell below `1 - 1e-9`, outside the clamp window.
    DistanceUndefined { cosh_value: f64 },
    /// Power iteration failed to converge.
    NormNotConverged,
    /// The tail bound needs `m >= e·x`.
    TailOutOfRange { x: f64, m: u64 },
    /// The Poisson average underflowed to zero.
    PoissonUnderflow,
    /// The non-vanishing level search needs `δ(0) < 1/sqrt(D1)`.
    HypothesisViolated { delta0: f64, limit: f64 },
    /// No admissible scale was found below the cap.
    SearchCapExceeded,
    /// Constants outside their ranges: `C` in (0,1), `M >= 1`.
    BadConstants,
    /// Angle outside the admissible range.
    BadAngle { theta: f64 },
}

impl fmt::Display for HypError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypError::DistanceUndefined { cosh_value } => {
                write!(f, "points not on a common hyperboloid: cosh value {cosh_value}")
            }
            HypError::NormNotConverged => write!(f, "operator norm iteration did not converge"),
            HypError::TailOutOfRange { x, m } => {
                write!(f, "tail bound needs m >= e*x: x = {x}, m = {m}")
            }
            HypError::PoissonUnderflow => write!(f, "Poisson average underflowed to zero"),
            HypError::HypothesisViolated { delta0, limit } => {
                write!(f, "delta(0) = {delta0} must be below 1/sqrt(D1) = {limit}")
            }
            HypError::SearchCapExceeded => write!(f, "scale search exceeded its cap"),
            HypError::BadConstants => write!(f, "need C in (0,1) and M >= 1"),
            HypError::BadAngle { theta } => write!(f, "angle {theta} out of range"),
        }
    }
}

impl std::error::Error for HypError {}

/// The Lorentz form `I_d(x,y) = Σ_{i<=d} x_i y_i - x_{d+1} y_{d+1}` on
/// `(d+1)`-vectors.
pub fn lorentz_form(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "lorentz form needs equal dimensions");
    let n = x.len();
    let spatial: f64 = x[..n - 1].iter().zip(&y[..n - 1]).map(|(a, b)| a * b).sum();
    spatial - x[n - 1] * y[n - 1]
}

/// A point on the hyperboloid sheet `I_d(x,x) = -1`, `x_{d+1} >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicPoint {
    coords: DVector<f64>,
}

impl HyperbolicPoint {
    /// Validates the hyperboloid constraint to 1e-9.
    pub fn new(coords: Vec<f64>) -> Result<Self, HypError> {
        let q = lorentz_form(&coords, &coords);
        let last = coords[coords.len() - 1];
        if (q + 1.0).abs() > 1e-9 || last < 1.0 - 1e-12 {
            return Err(HypError::DistanceUndefined { cosh_value: -q });
        }
        Ok(HyperbolicPoint {
            coords: DVector::from_vec(coords),
        })
    }

    /// The base point `o = (0, ..., 0, 1)`.
    pub fn origin(dim: usize) -> Self {
        let mut coords = DVector::zeros(dim + 1);
        coords[dim] = 1.0;
        HyperbolicPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        self.coords.as_slice()
    }

    /// Last coordinate, `cosh` of the distance to the base point.
    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }
}

/// Distance on the hyperboloid: `acosh(-I_d(x,y))`, clamping cosh values in
/// `[1 - 1e-9, 1)` to 1.
pub fn hyp_distance(x: &HyperbolicPoint, y: &HyperbolicPoint) -> Result<f64, HypError> {
    let c = -lorentz_form(x.coords(), y.coords());
    if c < 1.0 - ACOSH_CLAMP {
        return Err(HypError::DistanceUndefined { cosh_value: c });
    }
    Ok(if c < 1.0 { 0.0 } else { c.acosh() })
}

/// An element of `SO(I_d)` acting on `(d+1)`-vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzMatrix {
    dim: usize,
    mat: DMatrix<f64>,
}

impl LorentzMatrix {
    pub fn identity(dim: usize) -> Self {
        LorentzMatrix {
            dim,
            mat: DMatrix::identity(dim + 1, dim + 1),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        LorentzMatrix {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        }
    }

    /// Apply to a hyperboloid point.
    pub fn apply(&self, p: &HyperbolicPoint) -> HyperbolicPoint {
        HyperbolicPoint {
            coords: &self.mat * &p.coords,
        }
    }

    /// Largest absolute entry of `MᵀJM - J`; zero for exact isometries.
    pub fn lorentz_defect(&self) -> f64 {
        let n = self.dim + 1;
        let mut j = DMatrix::identity(n, n);
        j[(n - 1, n - 1)] = -1.0;
        let residual = self.mat.transpose() * &j * &self.mat - j;
        residual.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// The development generator `F(v)`: zero except for `v` along the last row
/// and column.
fn generator(v: &[f64]) -> DMatrix<f64> {
    let d = v.len();
    let mut m = DMatrix::zeros(d + 1, d + 1);
    for (i, &x) in v.iter().enumerate() {
        m[(i, d)] = x;
        m[(d, i)] = x;
    }
    m
}

/// Closed-form exponential of `F(v)`.
///
/// For unit `u`, `F(u)^3 = F(u)`, so
/// `exp(F(v)) = I + sinh(r)·F(u) + (cosh(r) - 1)·F(u)^2` with `r = |v|`.
/// Near `r = 0` the coefficients switch to series to avoid cancellation.
/// Validated against direct integration of `dΓ = F(dγ)Γ` in the test suite.
pub fn segment_exp(v: &[f64]) -> LorentzMatrix {
    let d = v.len();
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if r == 0.0 {
        return LorentzMatrix::identity(d);
    }
    let f = generator(v);
    let f2 = &f * &f;
    // exp(F(v)) = I + a·F(v) + b·F(v)^2 with a = sinh(r)/r, b = (cosh r - 1)/r².
    let (a, b) = if r > 1e-4 {
        (r.sinh() / r, (r.cosh() - 1.0) / (r * r))
    } else {
        let r2 = r * r;
        (
            1.0 + r2 / 6.0 + r2 * r2 / 120.0,
            0.5 + r2 / 24.0 + r2 * r2 / 720.0,
        )
    };
    let mat = DMatrix::identity(d + 1, d + 1) + f * a + f2 * b;
    LorentzMatrix { dim: d, mat }
}

/// Development of a piecewise linear path scaled by `alpha`, solving
/// `dΓ = F(α·dγ)Γ`: the ordered product of segment exponentials with later
/// segments multiplying on the left.
pub fn develop(p: &PiecewiseLinearPath, alpha: f64) -> LorentzMatrix {
    assert!(alpha >= 0.0, "scale must be nonnegative");
    let mut acc = LorentzMatrix::identity(p.dim);
    for seg in p.segments() {
        let scaled: Vec<f64> = seg.iter().map(|x| x * alpha).collect();
        acc = segment_exp(&scaled).product(&acc);
    }
    acc
}

/// A Lorentz matrix stored as `e^{log_scale} · mat` with `mat` normalized,
/// for developments whose entries overflow `f64`.
#[derive(Clone, Debug)]
pub struct ScaledDevelopment {
    dim: usize,
    mat: DMatrix<f64>,
    log_scale: f64,
}

impl ScaledDevelopment {
    /// Develop with per-segment renormalization. Segments longer than 100
    /// after scaling are subdivided, which leaves the development unchanged
    /// but keeps every exponential within f64 range.
    pub fn develop(p: &PiecewiseLinearPath, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "scale must be nonnegative");
        let d = p.dim;
        let mut mat = DMatrix::identity(d + 1, d + 1);
        let mut log_scale = 0.0;
        for seg in p.segments() {
            let scaled: Vec<f64> = seg.iter().map(|x| x * alpha).collect();
            let r = scaled.iter().map(|x| x * x).sum::<f64>().sqrt();
            let pieces = (r / 100.0).ceil().max(1.0);
            let piece: Vec<f64> = scaled.iter().map(|x| x / pieces).collect();
            let step = segment_exp(&piece);
            for _ in 0..pieces as usize {
                mat = &step.mat * mat;
                let peak = mat.iter().map(|x| x.abs()).fold(0.0, f64::max);
                if peak > 1e100 {
                    mat /= peak;
                    log_scale += peak.ln();
                }
            }
        }
        ScaledDevelopment {
            dim: d,
            mat,
            log_scale,
        }
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// The distance `d(o, Γo)`, stable for arbitrarily large scales.
    pub fn origin_distance(&self) -> f64 {
        // cosh d = e^{log_scale} · x̂ where x̂ is the normalized last corner.
        let n = self.dim;
        let x_hat = self.mat[(n, n)];
        // acosh(e^s x̂) = s + ln(x̂ + sqrt(x̂² - e^{-2s})).
        let inner = x_hat * x_hat - (-2.0 * self.log_scale).exp();
        if self.log_scale == 0.0 {
            let c = x_hat;
            if c < 1.0 {
                return 0.0;
            }
            return c.acosh();
        }
        self.log_scale + (x_hat + inner.max(0.0).sqrt()).ln()
    }

    /// Natural log of the Euclidean operator norm.
    pub fn log_op_norm(&self, tol: f64, max_iter: usize) -> Result<f64, HypError> {
        let norm = op_norm_of(&self.mat, tol, max_iter)?;
        Ok(self.log_scale + norm.ln())
    }

    /// Reconstruct a plain matrix when the scale permits.
    pub fn to_matrix(&self) -> Option<LorentzMatrix> {
        if self.log_scale.exp().is_finite() {
            Some(LorentzMatrix {
                dim: self.dim,
                mat: &self.mat * self.log_scale.exp(),
            })
        } else {
            None
        }
    }
}

fn op_norm_of(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<f64, HypError> {
    let n = m.ncols();
    // Scale out the peak entry so the Gram matrix cannot overflow.
    let peak = m.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let scaled = m / peak;
    let gram = scaled.transpose() * &scaled;
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0) * 1e-3);
    v /= v.norm();
    let mut lambda = 0.0f64;
    for _ in 0..max_iter {
        let w = &gram * &v;
        let new_lambda = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(0.0);
        }
        let next = w / wn;
        if (new_lambda - lambda).abs() <= tol * new_lambda.abs() {
            // Converged Rayleigh quotient of GᵀG; singular value is its root.
            return Ok(peak * new_lambda.max(0.0).sqrt());
        }
        lambda = new_lambda;
        v = next;
    }
    Err(HypError::NormNotConverged)
}

/// Euclidean operator norm (largest singular value) by power iteration on
/// `GᵀG`, to relative accuracy 1e-10.
pub fn matrix_op_norm(g: &LorentzMatrix) -> Result<f64, HypError> {
    op_norm_of(&g.mat, 1e-10, 100_000)
}

/// Side `a` of a hyperbolic triangle from sides `b`, `c` and the included
/// angle: `cosh a = cosh b·cosh c - sinh b·sinh c·cos θ`.
pub fn cosine_rule_side(b: f64, c: f64, theta: f64) -> f64 {
    let ca = b.cosh() * c.cosh() - b.sinh() * c.sinh() * theta.cos();
    ca.max(1.0).acosh()
}

/// Angle at the corner opposite side `b`, from all three sides:
/// `cos θ_B = (cosh a·cosh c - cosh b) / (sinh a·sinh c)`.
pub fn cosine_rule_angle(a: f64, b: f64, c: f64) -> f64 {
    let cosb = (a.cosh() * c.cosh() - b.cosh()) / (a.sinh() * c.sinh());
    cosb.clamp(-1.0, 1.0).acos()
}

/// Minimal geodesic length `K(θ) = log(2 / (1 - cos θ))` from the spacing
/// lemma; defined for `θ` in `(0, π]`.
pub fn k_theta(theta: f64) -> Result<f64, HypError> {
    if theta <= 0.0 || theta > PI {
        return Err(HypError::BadAngle { theta });
    }
    Ok((2.0 / (1.0 - theta.cos())).ln())
}

/// Modulus of continuity of the derivative of a unit-speed path, capped at 2
/// (the diameter of the sphere of directions).
#[derive(Clone, Debug)]
pub enum SmoothnessProfile {
    /// `δ(h) = min(κ·h, 2)`.
    Lipschitz(f64),
    /// Monotone samples `(h, δ(h))`, linearly interpolated and clamped.
    Tabulated(Vec<(f64, f64)>),
}

impl SmoothnessProfile {
    /// Checked tabulated profile: sample times strictly increasing, values
    /// nonnegative and nondecreasing.
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self, HypError> {
        let ok = !samples.is_empty()
            && samples[0].1 >= 0.0
            && samples.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1);
        if ok {
            Ok(SmoothnessProfile::Tabulated(samples))
        } else {
            Err(HypError::BadConstants)
        }
    }

    pub fn eval(&self, h: f64) -> f64 {
        let v = match self {
            SmoothnessProfile::Lipschitz(kappa) => kappa * h.max(0.0),
            SmoothnessProfile::Tabulated(samples) => {
                if samples.is_empty() {
                    0.0
                } else if h <= samples[0].0 {
                    samples[0].1
                } else if h >= samples[samples.len() - 1].0 {
                    samples[samples.len() - 1].1
                } else {
                    let i = samples.partition_point(|&(x, _)| x <= h) - 1;
                    let (x0, y0) = samples[i];
                    let (x1, y1) = samples[i + 1];
                    y0 + (y1 - y0) * (h - x0) / (x1 - x0)
                }
            }
        };
        v.min(2.0)
    }
}

/// The explicit constants of the chord estimate.
///
/// `R0 = log(1+√2)`, `D1(C,M) = (4^{(M+1)R0/M}/(2C) + 16·ln2/π²)/R0` and
/// `D2(M) = (M+1)R0/M`, with free parameters `C` in `(0,1)` and integer
/// `M >= 1`.
#[derive(Clone, Copy, Debug)]
pub struct EstimateConstants {
    c: f64,
    m: u32,
}

impl EstimateConstants {
    pub fn new(c: f64, m: u32) -> Result<Self, HypError> {
        if !(0.0 < c && c < 1.0) || m < 1 {
            return Err(HypError::BadConstants);
        }
        Ok(EstimateConstants { c, m })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn d2(&self) -> f64 {
        (self.m as f64 + 1.0) / self.m as f64 * R0
    }

    pub fn d1(&self) -> f64 {
        let four_pow = 4.0f64.powf(self.d2());
        (four_pow / (2.0 * self.c) + 16.0 * 2.0f64.ln() / (PI * PI)) / R0
    }

    /// Right side of the admissibility condition on `δ((M+1)R0/(Mα))`.
    pub fn admissibility_threshold(&self) -> f64 {
        let four_pow = 4.0f64.powf(-self.d2());
        (2.0 * (2.0f64.sqrt() - (1.0 + self.c * self.c).sqrt()) * four_pow).sqrt()
    }
}

impl Default for EstimateConstants {
    /// `C = 0.8875`, `M = 1`, the values used for the headline numbers.
    fn default() -> Self {
        EstimateConstants { c: 0.8875, m: 1 }
    }
}

/// Whether scale `alpha` satisfies both admissibility conditions for a path
/// of length `l` with modulus `delta`.
pub fn scale_admissible(
    l: f64,
    alpha: f64,
    delta: &SmoothnessProfile,
    k: &EstimateConstants,
) -> bool {
    alpha * l >= k.m() as f64 * R0
        && delta.eval(k.d2() / alpha) < k.admissibility_threshold()
}

/// Bound `D1·δ(D2/α)²·α·l` on the chord defect `|d(o,Γ_α o) - αl|`, or
/// `None` when `alpha` is below admissibility.
pub fn chord_defect_bound(
    l: f64,
    alpha: f64,
    delta: &SmoothnessProfile,
    k: &EstimateConstants,
) -> Option<f64> {
    if !scale_admissible(l, alpha, delta, k) {
        return None;
    }
    let d = delta.eval(k.d2() / alpha);
    Some(k.d1() * d * d * alpha * l)
}

/// Tail bound for the exponential series: for `x >= 1/e` and `m >= e·x + k`,
/// `Σ_{r>=m} x^r/r! <= 0.38·e^{-k}·x^{-1/2}`.
pub fn stirling_tail(x: f64, m: u64) -> Result<f64, HypError> {
    debug_assert!(x >= 1.0 / E, "tail bound needs x >= 1/e");
    let k = m as f64 - E * x;
    if k < 0.0 {
        return Err(HypError::TailOutOfRange { x, m });
    }
    Ok(stirling_constant() * (-k).exp() / x.sqrt())
}

/// Poisson average of normalized signature norms and the induced length
/// estimate.
///
/// Input is the finite prefix `b_k = k!·‖S_k‖`; the average is
/// `C_α = e^{-α} Σ α^k b_k / k!` and the estimate `1 + log(C_α)/α`,
/// converging to the path length as `α` grows. Terms are truncated once they
/// fall below 1e-16 of the running sum past the Poisson mode.
pub fn length_recovery(b: &[f64], alpha: f64) -> Result<(f64, f64), HypError> {
    assert!(alpha > 0.0, "alpha must be positive");
    let mut weight = (-alpha).exp();
    let mut sum = 0.0f64;
    let mut prev_term = f64::INFINITY;
    for (k, &bk) in b.iter().enumerate() {
        debug_assert!(bk >= 0.0);
        let term = weight * bk;
        sum += term;
        if term < prev_term && sum > 0.0 && term < 1e-16 * sum {
            break;
        }
        if term > 0.0 {
            prev_term = term;
        }
        weight *= alpha / (k as f64 + 1.0);
    }
    if sum == 0.0 {
        return Err(HypError::PoissonUnderflow);
    }
    let estimate = 1.0 + sum.ln() / alpha;
    Ok((sum, estimate))
}

/// Normalized coefficient ratio `l^{-k}·b_k`, which approaches 1 for smooth
/// enough paths.
pub fn strong_recovery_ratio(b: &[f64], l: f64, k: usize) -> f64 {
    assert!(l > 0.0);
    b[k] * l.powi(-(k as i32))
}

/// Smallest certified level count: some signature term among the first `N`
/// must be non-zero for a unit-speed path of length `l` with derivative
/// modulus `delta`.
///
/// Searches the scale grid `α = M·R0/l · 1.01^j` for the first admissible
/// scale that also satisfies `α^{3/2}(1 - D1·δ(D2/α)²) > C1·l^{-3/2}` and
/// returns `⌈e·α·l⌉`.
pub fn min_nonzero_level(
    l: f64,
    delta: &SmoothnessProfile,
    k: &EstimateConstants,
) -> Result<u64, HypError> {
    let d1 = k.d1();
    let limit = 1.0 / d1.sqrt();
    if delta.eval(0.0) >= limit {
        return Err(HypError::HypothesisViolated {
            delta0: delta.eval(0.0),
            limit,
        });
    }
    let c1 = stirling_constant();
    let mut alpha = k.m() as f64 * R0 / l;
    while alpha <= ALPHA_CAP {
        if scale_admissible(l, alpha, delta, k) {
            let dv = delta.eval(k.d2() / alpha);
            if alpha.powf(1.5) * (1.0 - d1 * dv * dv) > c1 * l.powf(-1.5) {
                return Ok((E * alpha * l).ceil() as u64);
            }
        }
        alpha *= ALPHA_GRID_FACTOR;
    }
    Err(HypError::SearchCapExceeded)
}
