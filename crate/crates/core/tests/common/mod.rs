//! Oracles and generators shared by the integration suites.
//!
//! Everything here is independent of the library's computation paths: the
//! signature-norm oracle integrates the Goursat recursion for the signature
//! kernel instead of multiplying tensor exponentials, and the development
//! oracle integrates the defining matrix equation with RK4.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sigpath::PiecewiseLinearPath;

/// Normalized signature norms `b_n = n!·‖S_n‖` up to `max_level`, computed
/// through the level-resolved signature kernel.
///
/// `K_n(s,t) = ⟨S_n(X|[0,s]), S_n(X|[0,t])⟩` solves the Goursat problem
/// `∂²K_n/∂s∂t = ⟨Ẋ_s, Ẋ_t⟩·K_{n-1}` with `K_0 ≡ 1`; a second-order scheme
/// on the segment grid integrates it level by level. Working with the
/// rescaled `K̃_n = (n!)²·K_n` keeps every value of order `length^{2n}` and
/// avoids factorial underflow, so levels far beyond any dense tensor are
/// reachable. Each segment is split into `substeps` pieces, which leaves the
/// path unchanged but refines the scheme.
pub fn kernel_signature_norms(
    path: &PiecewiseLinearPath,
    max_level: usize,
    substeps: usize,
) -> Vec<f64> {
    let segs: Vec<Vec<f64>> = path
        .segments()
        .filter(|s| s.iter().any(|&x| x != 0.0))
        .flat_map(|s| {
            let piece: Vec<f64> = s.iter().map(|x| x / substeps as f64).collect();
            std::iter::repeat_n(piece, substeps)
        })
        .collect();
    let m = segs.len();
    if m == 0 {
        let mut out = vec![0.0; max_level + 1];
        out[0] = 1.0;
        return out;
    }

    // Gram matrix of the subdivided segments.
    let mut c = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            c[i * m + j] = segs[i]
                .iter()
                .zip(segs[j].iter())
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    let w = m + 1;
    let mut prev = vec![1.0f64; w * w];
    let mut cur = vec![0.0f64; w * w];
    let mut out = Vec::with_capacity(max_level + 1);
    out.push(1.0);
    for n in 1..=max_level {
        let n2 = (n * n) as f64;
        for idx in cur.iter_mut().take(w) {
            *idx = 0.0;
        }
        for i in 1..=m {
            cur[i * w] = 0.0;
            for j in 1..=m {
                let avg = 0.25
                    * (prev[(i - 1) * w + (j - 1)]
                        + prev[(i - 1) * w + j]
                        + prev[i * w + (j - 1)]
                        + prev[i * w + j]);
                cur[i * w + j] = cur[(i - 1) * w + j] + cur[i * w + (j - 1)]
                    - cur[(i - 1) * w + (j - 1)]
                    + n2 * c[(i - 1) * m + (j - 1)] * avg;
            }
        }
        out.push(cur[w * w - 1].max(0.0).sqrt());
        std::mem::swap(&mut prev, &mut cur);
    }
    out
}

/// RK4 integration of the development equation `dΓ = F(γ')Γ` along the
/// straight segment `t·v`, `t` in `[0, 1]`.
pub fn ode_segment_development(v: &[f64], steps: usize) -> DMatrix<f64> {
    let d = v.len();
    let mut f = DMatrix::zeros(d + 1, d + 1);
    for (i, &x) in v.iter().enumerate() {
        f[(i, d)] = x;
        f[(d, i)] = x;
    }
    let mut m = DMatrix::identity(d + 1, d + 1);
    let h = 1.0 / steps as f64;
    for _ in 0..steps {
        let k1 = &f * &m;
        let k2 = &f * &(&m + &k1 * (h / 2.0));
        let k3 = &f * &(&m + &k2 * (h / 2.0));
        let k4 = &f * &(&m + &k3 * h);
        m += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    m
}

/// Random piecewise linear path with up to `max_segments` segments.
pub fn random_path(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_segments: usize,
    scale: f64,
) -> PiecewiseLinearPath {
    let n = rng.gen_range(1..=max_segments);
    let points = (0..=n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect();
    PiecewiseLinearPath::new(dim, points).unwrap()
}

/// Random tree-like path generated by a depth-first traversal that retraces
/// every edge.
pub fn random_tree_like(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_children: usize,
    depth: usize,
) -> PiecewiseLinearPath {
    fn grow(
        rng: &mut ChaCha8Rng,
        dim: usize,
        max_children: usize,
        depth: usize,
        at: &[f64],
        points: &mut Vec<Vec<f64>>,
    ) {
        if depth == 0 {
            return;
        }
        let children = rng.gen_range(1..=max_children);
        for _ in 0..children {
            let edge: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let child: Vec<f64> = at.iter().zip(edge.iter()).map(|(a, e)| a + e).collect();
            points.push(child.clone());
            grow(rng, dim, max_children, depth - 1, &child, points);
            points.push(at.to_vec());
        }
    }
    let start = vec![0.0; dim];
    let mut points = vec![start.clone()];
    grow(rng, dim, max_children, depth, &start, &mut points);
    PiecewiseLinearPath::new(dim, points).unwrap()
}

/// Unit-speed circular arc of length `len` with curvature `kappa`, sampled
/// at `arc_step` spacing (so the derivative modulus is `δ(h) <= κh`).
pub fn circular_arc(kappa: f64, len: f64, arc_step: f64) -> PiecewiseLinearPath {
    let n = (len / arc_step).round() as usize;
    let points = (0..=n)
        .map(|i| {
            let t = len * i as f64 / n as f64;
            if kappa == 0.0 {
                vec![t, 0.0]
            } else {
                vec![(kappa * t).sin() / kappa, (1.0 - (kappa * t).cos()) / kappa]
            }
        })
        .collect();
    PiecewiseLinearPath::new(2, points).unwrap()
}

/// Zigzag with `edges` segments of length `edge_len`, directions alternating
/// `±phi` around the x axis. Adjacent edges meet at interior angle
/// `π - 2·phi`, so the half-angle parameter of the spacing bound is
/// `θ = π/2 - phi`.
pub fn zigzag(phi: f64, edge_len: f64, edges: usize) -> PiecewiseLinearPath {
    let mut points = vec![vec![0.0, 0.0]];
    let mut cur = vec![0.0, 0.0];
    for i in 0..edges {
        let angle = if i % 2 == 0 { phi } else { -phi };
        cur = vec![
            cur[0] + edge_len * angle.cos(),
            cur[1] + edge_len * angle.sin(),
        ];
        points.push(cur.clone());
    }
    PiecewiseLinearPath::new(2, points).unwrap()
}
