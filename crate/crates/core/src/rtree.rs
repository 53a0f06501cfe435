//! Pseudo-metric of a height function and its quotient R-tree.
//!
//! On an interval, `d(s,t) = h(s) + h(t) - 2·min_{[s,t]} h` is a
//! pseudo-metric; identifying zero-distance times yields an R-tree rooted at
//! the global minimum. Zero-distance detection works from the exact
//! piecewise linear minima, so the quotient is exact on the sample set.

use std::fmt;

use serde::Serialize;

use crate::treelike::HeightFunction;

/// Errors from pseudo-metric queries.
#[derive(Clone, Debug, PartialEq)]
pub enum RTreeError {
    /// Query time outside the height function's domain.
    OutOfDomain { t: f64, end: f64 },
}

impl fmt::Display for RTreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RTreeError::OutOfDomain { t, end } => {
                write!(f, "time {t} outside domain [0, {end}]")
            }
        }
    }
}

impl std::error::Error for RTreeError {}

/// Sparse-table range-minimum structure over the refined breakpoint values
/// of a height function.
struct RangeMin {
    table: Vec<Vec<f64>>,
}

impl RangeMin {
    fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut table = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= n {
            let prev = table.last().expect("nonempty");
            let row: Vec<f64> = (0..=n - 2 * width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            table.push(row);
            width *= 2;
        }
        RangeMin { table }
    }

    /// Minimum of the stored values over index range `[lo, hi]`, inclusive.
    fn query(&self, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo <= hi);
        let len = hi - lo + 1;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let row = &self.table[k];
        row[lo].min(row[hi + 1 - (1 << k)])
    }
}

/// Pseudo-metric `d(s,t) = h(s) + h(t) - 2·min_{[s,t]} h`, computed exactly
/// on the piecewise linear height function.
pub fn tree_pseudometric(h: &HeightFunction, s: f64, t: f64) -> Result<f64, RTreeError> {
    let end = h.domain_end();
    for x in [s, t] {
        if x < 0.0 || x > end {
            return Err(RTreeError::OutOfDomain { t: x, end });
        }
    }
    Ok(h.eval(s) + h.eval(t) - 2.0 * h.min_on(s, t))
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TreeVertex {
    pub time: f64,
    pub height: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TreeEdge {
    pub parent: usize,
    pub child: usize,
    pub length: f64,
}

/// Serializable quotient tree.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct QuotientTree {
    pub vertices: Vec<TreeVertex>,
    pub edges: Vec<TreeEdge>,
    #[serde(skip)]
    samples: Vec<f64>,
    #[serde(skip)]
    class_of: Vec<usize>,
    #[serde(skip)]
    parent: Vec<Option<usize>>,
}

impl QuotientTree {
    /// Build the quotient tree of `h` over `sample_times`.
    ///
    /// The samples are merged with the breakpoints of `h`, sorted and
    /// deduplicated, so minima over sample ranges are exact. Each vertex is
    /// an equivalence class of samples under `d = 0`; the parent of a class
    /// is the class of the nearest strictly lower separating minimum, and
    /// edge lengths are height differences.
    pub fn build(h: &HeightFunction, sample_times: &[f64]) -> Self {
        let end = h.domain_end();
        let mut times: Vec<f64> = sample_times
            .iter()
            .copied()
            .filter(|&t| (0.0..=end).contains(&t))
            .chain(h.times.iter().copied())
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        times.dedup();
        let values: Vec<f64> = times.iter().map(|&t| h.eval(t)).collect();

        let mut tree = QuotientTree {
            vertices: Vec::new(),
            edges: Vec::new(),
            samples: times,
            class_of: vec![usize::MAX; values.len()],
            parent: Vec::new(),
        };
        tree.split(&values, 0, values.len() - 1, None);
        tree
    }

    /// Recursive contour construction over the inclusive index range.
    fn split(&mut self, values: &[f64], lo: usize, hi: usize, parent: Option<usize>) {
        let m = values[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
        let rep_time = self.samples[lo..=hi]
            .iter()
            .zip(&values[lo..=hi])
            .find(|(_, &v)| v == m)
            .map(|(&t, _)| t)
            .expect("minimum attained");
        let vertex = self.vertices.len();
        self.vertices.push(TreeVertex {
            time: rep_time,
            height: m,
        });
        self.parent.push(parent);
        if let Some(p) = parent {
            self.edges.push(TreeEdge {
                parent: p,
                child: vertex,
                length: m - self.vertices[p].height,
            });
        }
        // Zero-distance members of this class and the strictly higher runs
        // between them.
        let mut run_start: Option<usize> = None;
        for i in lo..=hi {
            if values[i] == m {
                self.class_of[i] = vertex;
                if let Some(rs) = run_start.take() {
                    self.split(values, rs, i - 1, Some(vertex));
                }
            } else if run_start.is_none() {
                run_start = Some(i);
            }
        }
        if let Some(rs) = run_start {
            self.split(values, rs, hi, Some(vertex));
        }
    }

    /// The deduplicated sample times backing the tree.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Vertex class of the `i`-th sample.
    pub fn class_of_sample(&self, i: usize) -> usize {
        self.class_of[i]
    }

    /// Tree distance between two vertices through their lowest common
    /// ancestor: `h(a) + h(b) - 2·h(lca)`.
    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        let lca = {
            let (mut x, mut y) = (a, b);
            // Walk the deeper vertex upward; heights strictly decrease
            // toward the root.
            while x != y {
                let (hx, hy) = (self.vertices[x].height, self.vertices[y].height);
                if hx >= hy {
                    match self.parent[x] {
                        Some(p) => x = p,
                        None => break,
                    }
                } else {
                    match self.parent[y] {
                        Some(p) => y = p,
                        None => break,
                    }
                }
            }
            x
        };
        self.vertices[a].height + self.vertices[b].height - 2.0 * self.vertices[lca].height
    }

    /// Tree distance between two samples.
    pub fn sample_distance(&self, i: usize, j: usize) -> f64 {
        self.vertex_distance(self.class_of[i], self.class_of[j])
    }

    /// Pairwise distances over the sample set, using the sparse-table
    /// minimum structure.
    pub fn pseudometric_matrix(h: &HeightFunction, samples: &[f64]) -> Vec<Vec<f64>> {
        let end = h.domain_end();
        let mut times: Vec<f64> = samples
            .iter()
            .copied()
            .filter(|&t| (0.0..=end).contains(&t))
            .chain(h.times.iter().copied())
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        times.dedup();
        let values: Vec<f64> = times.iter().map(|&t| h.eval(t)).collect();
        let rmq = RangeMin::new(&values);
        let n = values.len();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = values[i] + values[j] - 2.0 * rmq.query(i, j);
                out[i][j] = d;
                out[j][i] = d;
            }
        }
        out
    }
}

/// Gromov four-point condition at tolerance 1e-9: among the three pairings
/// of every quadruple, the two largest sums agree.
pub fn four_point_check(dist: &[Vec<f64>]) -> bool {
    let n = dist.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in (k + 1)..n {
                    let mut sums = [
                        dist[i][j] + dist[k][l],
                        dist[i][k] + dist[j][l],
                        dist[i][l] + dist[j][k],
                    ];
                    sums.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                    if (sums[2] - sums[1]).abs() > 1e-9 {
                        return false;
                    }
                }
            }
        }
    }
    true
}
