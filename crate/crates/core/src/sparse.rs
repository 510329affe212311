//! Sparse symmetric positive definite solves backed by faer's supernodal Cholesky.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinearSolveError {
    #[error("sparse matrix assembly failed: {0}")]
    Assembly(String),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Lower-triangle triplet accumulator for an `n × n` symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricAssembly {
    pub n: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl SymmetricAssembly {
    pub fn new(n: usize) -> Self {
        SymmetricAssembly {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        SymmetricAssembly {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    /// Add `v` at `(i, j)`; the mirrored entry is implied. Entries with `i < j` are mirrored.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push(Triplet::new(r, c, v));
    }

    fn matrix(&self) -> Result<SparseColMat<usize, f64>, LinearSolveError> {
        SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &self.entries)
            .map_err(|e| LinearSolveError::Assembly(format!("{e:?}")))
    }
}

/// Cholesky solver that reuses the symbolic factorization while the pattern is unchanged.
#[derive(Default)]
pub struct SpdSolver {
    symbolic: Option<(usize, usize, SymbolicLlt<usize>)>,
}

impl SpdSolver {
    pub fn new() -> Self {
        SpdSolver { symbolic: None }
    }

    pub fn solve(&mut self, a: &SymmetricAssembly, rhs: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
        self.solve_many(a, &[rhs]).map(|mut v| v.remove(0))
    }

    pub fn solve_many(&mut self, a: &SymmetricAssembly, rhs: &[&[f64]]) -> Result<Vec<Vec<f64>>, LinearSolveError> {
        let n = a.n;
        if n == 0 {
            return Ok(rhs.iter().map(|_| Vec::new()).collect());
        }
        let m = a.matrix()?;
        let nnz = m.compute_nnz();
        let reuse = matches!(&self.symbolic, Some((sn, snnz, _)) if *sn == n && *snnz == nnz);
        if !reuse {
            let sym = SymbolicLlt::try_new(m.symbolic(), Side::Lower)
                .map_err(|e| LinearSolveError::Assembly(format!("{e:?}")))?;
            self.symbolic = Some((n, nnz, sym));
        }
        let sym = self.symbolic.as_ref().unwrap().2.clone();
        let llt = Llt::try_new_with_symbolic(sym, m.as_ref(), Side::Lower)
            .map_err(|_| LinearSolveError::NotPositiveDefinite)?;
        let mut b = Mat::<f64>::from_fn(n, rhs.len(), |i, j| rhs[j][i]);
        llt.solve_in_place(b.as_mut());
        Ok((0..rhs.len()).map(|j| (0..n).map(|i| b[(i, j)]).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_with_duplicates() {
        let n = 5;
        let mut a = SymmetricAssembly::new(n);
        for i in 0..n {
            a.add(i, i, 1.0);
            a.add(i, i, 1.0);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let b: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = 2.0 * x_true[i];
                if i > 0 {
                    s -= x_true[i - 1];
                }
                if i + 1 < n {
                    s -= x_true[i + 1];
                }
                s
            })
            .collect();
        let mut solver = SpdSolver::new();
        let x = solver.solve(&a, &b).unwrap();
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
        let x2 = solver.solve(&a, &b).unwrap();
        assert_eq!(x, x2);
    }

    #[test]
    fn indefinite_is_reported() {
        let mut a = SymmetricAssembly::new(2);
        a.add(0, 0, 1.0);
        a.add(1, 1, -1.0);
        assert_eq!(SpdSolver::new().solve(&a, &[1.0, 1.0]), Err(LinearSolveError::NotPositiveDefinite));
    }
}
