//! Shared generators for the unit tests.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::signature::PiecewiseLinearPath;

/// Random piecewise linear path with 1..=max_segments segments and
/// coordinates in `(-scale, scale)`.
pub(crate) fn random_path(
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

/// Random tree-like path: a depth-first traversal that retraces every edge
/// it descends.
pub(crate) fn random_tree_like(
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
