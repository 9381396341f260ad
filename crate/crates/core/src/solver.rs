//! Sparse direct solve of the (nonsymmetric) system.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// `||A x - b|| / ||b||`, or `||A x - b||` for a zero right-hand side.
    pub relative_residual: f64,
    pub nnz: usize,
    /// Iterative refinement steps applied after the first solve.
    pub refinements: usize,
}

const MAX_REFINEMENTS: usize = 3;

/// LU factorisation with fill-reducing ordering. A structurally empty row,
/// a symbolically rank deficient pattern or a non-finite solution are
/// reported as a singular matrix.
pub fn solve_linear_system(matrix: &SparseMatrix, rhs: &[f64]) -> Result<SolveReport> {
    let n = matrix.nrows();
    if matrix.ncols() != n || rhs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "system of shape {}x{} with right-hand side of length {}",
            n,
            matrix.ncols(),
            rhs.len()
        )));
    }
    if let Some(pivot) = (0..n).find(|&i| matrix.row_is_empty(i)) {
        return Err(Error::SingularMatrix { pivot });
    }
    let triplets: Vec<Triplet<usize, usize, f64>> = matrix
        .iter()
        .filter(|(_, _, v)| *v != 0.0)
        .map(|(i, j, v)| Triplet::new(i, j, v))
        .collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| match e {
        faer::sparse::linalg::LuError::SymbolicSingular { index } => Error::SingularMatrix { pivot: index },
        other => Error::Solver(format!("{other:?}")),
    })?;
    let solve = |b: &[f64]| -> Vec<f64> {
        let mut x = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        lu.solve_in_place(x.as_mut());
        (0..n).map(|i| x[(i, 0)]).collect()
    };
    let residual = |x: &[f64]| -> Vec<f64> { matrix.matvec(x).iter().zip(rhs).map(|(a, b)| b - a).collect() };
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();

    let mut solution = solve(rhs);
    if let Some(pivot) = solution.iter().position(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix { pivot });
    }
    let mut r = residual(&solution);
    let mut refinements = 0;
    // a few steps of iterative refinement with the same factors
    while refinements < MAX_REFINEMENTS {
        let correction = solve(&r);
        let candidate: Vec<f64> = solution.iter().zip(&correction).map(|(x, d)| x + d).collect();
        let rc = residual(&candidate);
        if !(norm(&rc) < norm(&r)) {
            break;
        }
        solution = candidate;
        r = rc;
        refinements += 1;
    }

    let bnorm = norm(rhs);
    let relative_residual = if bnorm > 0.0 { norm(&r) / bnorm } else { norm(&r) };
    Ok(SolveReport {
        solution,
        relative_residual,
        nnz: matrix.nnz(),
        refinements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        let r = solve_linear_system(&SparseMatrix::identity(3), &b).unwrap();
        assert_eq!(r.solution, b);
        assert_eq!(r.relative_residual, 0.0);
    }

    #[test]
    fn zero_matrix_is_singular() {
        let r = solve_linear_system(&SparseMatrix::zeros(1, 1), &[1.0]);
        assert!(matches!(r, Err(Error::SingularMatrix { pivot: 0 })));
    }

    #[test]
    fn rank_deficient_is_singular() {
        // two identical rows
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(solve_linear_system(&a, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn nonsymmetric_system_and_permutation() {
        let a = SparseMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, -1.0), (1, 1, 3.0), (1, 2, 2.0), (2, 1, -2.0), (2, 2, 5.0)],
        );
        let b = vec![1.0, 2.0, 3.0];
        let x = solve_linear_system(&a, &b).unwrap();
        assert!(x.relative_residual < 1e-14);
        let perm = [2, 0, 1];
        let mut pb = vec![0.0; 3];
        for i in 0..3 {
            pb[perm[i]] = b[i];
        }
        let y = solve_linear_system(&a.permuted(&perm), &pb).unwrap();
        for i in 0..3 {
            assert!((y.solution[perm[i]] - x.solution[i]).abs() < 1e-14);
        }
    }
}
