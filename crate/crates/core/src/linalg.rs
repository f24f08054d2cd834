//! Small sparse linear algebra kit: row-major sparse matrices and an
//! envelope (skyline) Cholesky factorization with reverse Cuthill-McKee
//! ordering.
//!
//! Every system solved by this crate is a graph Laplacian or a Gram matrix of
//! mesh-local rows, so bandwidth after RCM stays small and the envelope
//! factorization is both simple and fast enough for desk-scale meshes.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sparse matrix stored as sorted `(column, value)` lists per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRows<T> {
    ncols: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SparseRows<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            ncols: n,
            rows: (0..n).map(|i| vec![(i, T::one())]).collect(),
        }
    }

    /// Builds a matrix from unsorted triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut acc: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); nrows];
        for &(i, j, v) in triplets {
            debug_assert!(i < nrows && j < ncols);
            *acc[i].entry(j).or_insert_with(T::zero) += v;
        }
        Self {
            ncols,
            rows: acc.into_iter().map(|r| r.into_iter().collect()).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn set_row(&mut self, i: usize, row: Vec<(usize, T)>) {
        debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        self.rows[i] = row;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match self.rows[i].binary_search_by_key(&j, |e| e.0) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => T::zero(),
        }
    }

    /// Sparse linear combination `Σ c_k · row(r_k)`.
    pub fn combine_rows(&self, terms: &[(usize, T)]) -> Vec<(usize, T)> {
        let mut acc: BTreeMap<usize, T> = BTreeMap::new();
        for &(r, c) in terms {
            for &(j, v) in &self.rows[r] {
                *acc.entry(j).or_insert_with(T::zero) += c * v;
            }
        }
        acc.into_iter().filter(|(_, v)| *v != T::zero()).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.ncols);
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `Aᵀ y`.
    pub fn tr_mul_vec(&self, y: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.rows.len());
        let mut out = vec![T::zero(); self.ncols];
        for (r, yi) in self.rows.iter().zip(y) {
            for &(j, v) in r {
                out[j] += v * *yi;
            }
        }
        out
    }

    /// Sparse product `self · rhs`.
    pub fn mul(&self, rhs: &SparseRows<T>) -> SparseRows<T> {
        assert_eq!(self.ncols, rhs.nrows());
        let rows = self.rows.iter().map(|r| rhs.combine_rows(r)).collect();
        SparseRows {
            ncols: rhs.ncols,
            rows,
        }
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> SparseRows<T> {
        SparseRows {
            ncols: self.ncols,
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn transpose(&self) -> SparseRows<T> {
        let mut rows = vec![Vec::new(); self.ncols];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                rows[j].push((i, v));
            }
        }
        SparseRows {
            ncols: self.rows.len(),
            rows,
        }
    }

    /// Gram matrix `A Aᵀ` as a symmetric builder.
    pub fn gram(&self) -> SymmetricBuilder<T> {
        let cols = self.transpose();
        let mut g = SymmetricBuilder::new(self.nrows());
        for col in &cols.rows {
            for (a, &(i, vi)) in col.iter().enumerate() {
                for &(j, vj) in &col[..=a] {
                    g.add(i, j, vi * vj);
                }
            }
        }
        g
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.rows.len()];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                out[i][j] = v;
            }
        }
        out
    }
}

/// Accumulates the lower triangle of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricBuilder<T> {
    n: usize,
    lower: Vec<BTreeMap<usize, T>>,
}

impl<T: Real> SymmetricBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            lower: vec![BTreeMap::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        *self.lower[r].entry(c).or_insert_with(T::zero) += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.lower[r].get(&c).copied().unwrap_or_else(T::zero)
    }

    pub fn add_diagonal(&mut self, shift: T) {
        for i in 0..self.n {
            self.add(i, i, shift);
        }
    }

    /// Symmetric submatrix on the `keep` indices, renumbered in order.
    pub fn principal_submatrix(&self, keep: &[usize]) -> SymmetricBuilder<T> {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut out = SymmetricBuilder::new(keep.len());
        for (r, row) in self.lower.iter().enumerate() {
            if map[r] == usize::MAX {
                continue;
            }
            for (&c, &v) in row {
                if map[c] != usize::MAX {
                    out.add(map[r], map[c], v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for (r, row) in self.lower.iter().enumerate() {
            for (&c, &v) in row {
                y[r] += v * x[c];
                if c != r {
                    y[c] += v * x[r];
                }
            }
        }
        y
    }

    pub fn factor(&self) -> Result<Cholesky<T>> {
        Cholesky::factor(self)
    }
}

/// Envelope Cholesky factor `P A Pᵀ = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
    /// Column index of the first stored entry in each row of `L`.
    first: Vec<usize>,
    /// Row `k` holds `L[k, first[k]..=k]`.
    rows: Vec<Vec<T>>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(a: &SymmetricBuilder<T>) -> Result<Self> {
        let n = a.n;
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        // Permuted lower-triangle rows.
        let mut prow: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (r, row) in a.lower.iter().enumerate() {
            for (&c, &v) in row {
                let (pr, pc) = (inv[r], inv[c]);
                let (i, j) = if pr >= pc { (pr, pc) } else { (pc, pr) };
                prow[i].push((j, v));
            }
        }
        let mut first = vec![0; n];
        for i in 0..n {
            first[i] = prow[i].iter().map(|e| e.0).min().unwrap_or(i).min(i);
        }
        let mut rows: Vec<Vec<T>> = (0..n).map(|i| vec![T::zero(); i - first[i] + 1]).collect();
        for i in 0..n {
            for &(j, v) in &prow[i] {
                rows[i][j - first[i]] += v;
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let start = fi.max(fj);
                let mut s = rows[i][j - fi];
                if start < j {
                    let (ri, rj) = if j < i {
                        let (lo, hi) = rows.split_at(i);
                        (&hi[0][start - fi..j - fi], &lo[j][start - fj..j - fj])
                    } else {
                        (&rows[i][start - fi..j - fi], &rows[i][start - fi..j - fi])
                    };
                    for (x, y) in ri.iter().zip(rj) {
                        s -= *x * *y;
                    }
                }
                if j < i {
                    let d = rows[j][j - fj];
                    rows[i][j - fi] = s / d;
                } else {
                    if !(s > T::zero()) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    rows[i][i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self { perm, first, rows })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.perm.len();
        assert_eq!(b.len(), n);
        let mut y: Vec<T> = self.perm.iter().map(|&i| b[i]).collect();
        // L y = b
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.rows[i];
            let mut s = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                s -= *l * y[fi + k];
            }
            y[i] = s / row[i - fi];
        }
        // Lᵀ x = y
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.rows[i];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= *l * yi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }

    /// Smallest diagonal entry of `L`, squared; a cheap conditioning hint.
    pub fn min_pivot(&self) -> T {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d = r[i - self.first[i]];
                d * d
            })
            .fold(T::infinity(), |a, b| a.min(b))
    }
}

fn reverse_cuthill_mckee<T: Real>(a: &SymmetricBuilder<T>) -> Vec<usize> {
    let n = a.n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, row) in a.lower.iter().enumerate() {
        for &c in row.keys() {
            if c != r {
                adj[r].push(c);
                adj[c].push(r);
            }
        }
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    for nb in adj.iter_mut() {
        nb.sort_by_key(|&v| (degree[v], v));
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&v| (degree[v], v));
    for seed in seeds {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(adj: &[Vec<usize>], start: usize) -> usize {
    let mut current = start;
    let mut ecc = 0;
    for _ in 0..8 {
        let (far, depth) = bfs_farthest(adj, current);
        if depth <= ecc {
            break;
        }
        ecc = depth;
        current = far;
    }
    current
}

fn bfs_farthest(adj: &[Vec<usize>], start: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut far = (start, 0);
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if d > far.1 || (d == far.1 && adj[v].len() < adj[far.0].len()) {
            far = (v, d);
        }
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = d + 1;
                queue.push_back(w);
            }
        }
    }
    far
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_plus_identity(n: usize) -> SymmetricBuilder<f64> {
        let mut a = SymmetricBuilder::new(n);
        for i in 0..n {
            a.add(i, i, 1.0);
            let j = (i * 7 + 3) % n;
            if j != i {
                a.add(i, i, 1.0);
                a.add(j, j, 1.0);
                a.add(i, j, -1.0);
            }
        }
        a
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = laplacian_plus_identity(40);
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&x);
        let sol = a.factor().unwrap().solve(&b);
        for (p, q) in sol.iter().zip(&x) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = SymmetricBuilder::<f64>::new(2);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(0, 1, 2.0);
        assert!(matches!(a.factor(), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn gram_matches_dense_product() {
        let a = SparseRows::from_triplets(
            3,
            4,
            &[
                (0, 0, 1.0),
                (0, 2, 2.0),
                (1, 1, -1.0),
                (1, 2, 3.0),
                (2, 3, 4.0),
                (2, 0, 0.5),
            ],
        );
        let g = a.gram();
        let d = a.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let e: f64 = (0..4).map(|k| d[i][k] * d[j][k]).sum();
                assert_eq!(g.get(i, j), e);
            }
        }
    }

    #[test]
    fn sparse_product_and_transpose() {
        let a = SparseRows::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let b = SparseRows::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let c = a.mul(&b);
        assert_eq!(c.to_dense(), vec![vec![2.0, 1.0], vec![3.0, 0.0]]);
        assert_eq!(
            a.transpose().to_dense(),
            vec![vec![1.0, 0.0], vec![2.0, 3.0]]
        );
        assert_eq!(a.tr_mul_vec(&[1.0, 1.0]), vec![1.0, 5.0]);
    }
}
