use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Reverse Cuthill-McKee ordering of an undirected graph given as
/// adjacency lists. Returns `order[k]` = node placed at position `k`.
pub fn rcm_order(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree = |v: usize| adjacency[v].len();
    let mut visited = alloc::vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree(v), v));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adjacency, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            next.dedup();
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first level structure rooted at `root`: (eccentricity, last level).
fn levels(adjacency: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let mut depth = alloc::collections::BTreeMap::new();
    depth.insert(root, 0usize);
    let mut queue = VecDeque::from([root]);
    let mut max_depth = 0;
    let mut last = alloc::vec![root];
    while let Some(v) = queue.pop_front() {
        let d = depth[&v];
        for &w in &adjacency[v] {
            if !depth.contains_key(&w) {
                depth.insert(w, d + 1);
                if d + 1 > max_depth {
                    max_depth = d + 1;
                    last.clear();
                }
                if d + 1 == max_depth {
                    last.push(w);
                }
                queue.push_back(w);
            }
        }
    }
    (max_depth, last)
}

fn pseudo_peripheral(adjacency: &[Vec<usize>], seed: usize) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = levels(adjacency, root);
    for _ in 0..8 {
        let Some(&cand) = last.iter().min_by_key(|&&v| (adjacency[v].len(), v)) else { break };
        let (e, l) = levels(adjacency, cand);
        if e <= ecc {
            break;
        }
        root = cand;
        ecc = e;
        last = l;
    }
    root
}

/// Symmetric positive definite matrix in envelope (variable band) storage,
/// factorized in place as `L L^T`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    /// First stored column of each row.
    first: Vec<usize>,
    /// Offset of `(i, first[i])` in `values`.
    start: Vec<usize>,
    values: Vec<f64>,
    factored: bool,
}

/// Pivots below this fraction of the original diagonal mark the system as
/// singular.
const PIVOT_TOLERANCE: f64 = 1e-11;

impl EnvelopeCholesky {
    /// Allocates a zero matrix whose lower envelope row `i` starts at
    /// `first[i] <= i`.
    pub fn with_envelope(first: Vec<usize>) -> Self {
        let n = first.len();
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            debug_assert!(f <= i);
            start.push(total);
            total += i - f + 1;
        }
        start.push(total);
        EnvelopeCholesky { n, first, start, values: alloc::vec![0.0; total], factored: false }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn stored(&self) -> usize {
        self.values.len()
    }

    /// Adds `v` at `(i, j)`; entries above the diagonal are ignored, so the
    /// caller may pass a full symmetric element matrix.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if j > i {
            return;
        }
        debug_assert!(j >= self.first[i], "entry outside envelope");
        self.values[self.start[i] + j - self.first[i]] += v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if j < self.first[i] {
            0.0
        } else {
            self.values[self.start[i] + j - self.first[i]]
        }
    }

    /// `y = A x` with the unfactored matrix.
    pub fn multiply(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        let mut y = alloc::vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let f = self.first[i];
            for (k, &a) in row.iter().enumerate() {
                let j = f + k;
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place factorization.
    pub fn factor(&mut self) -> Result<()> {
        for i in 0..self.n {
            let fi = self.first[i];
            let si = self.start[i];
            let diag = self.get(i, i);
            for j in fi..=i {
                let fj = self.first[j];
                let sj = self.start[j];
                let k0 = fi.max(fj);
                let mut s = self.values[si + j - fi];
                for k in k0..j {
                    s -= self.values[si + k - fi] * self.values[sj + k - fj];
                }
                if j < i {
                    let ljj = self.values[sj + j - fj];
                    self.values[si + j - fi] = s / ljj;
                } else {
                    if !(s > PIVOT_TOLERANCE * diag.abs()) || !s.is_finite() {
                        return Err(Error::SingularSystem { dof: i, pivot: s });
                    }
                    self.values[si + i - fi] = crate::math::sqrt(s);
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `L L^T x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert!(self.factored);
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let mut s = b[i];
            for (k, &l) in row[..i - fi].iter().enumerate() {
                s -= l * b[fi + k];
            }
            b[i] = s / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            b[i] /= row[i - fi];
            let xi = b[i];
            for (k, &l) in row[..i - fi].iter().enumerate() {
                b[fi + k] -= l * xi;
            }
        }
    }
}
