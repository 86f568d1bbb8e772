//! Dense symmetric eigen-helpers for the Galerkin problems.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// `(A + Aᵀ)/2`
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending.
pub fn sorted_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::EigensolverFailure("symmetric QR did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Whitening map `Q = V_k Λ_k^{-1/2}` onto the eigenvectors of `gram` whose
/// eigenvalue exceeds `rel_cutoff · λ_max`; `Qᵀ·gram·Q = I`.
pub fn truncation_map(gram: &DMatrix<f64>, rel_cutoff: f64) -> Result<DMatrix<f64>> {
    let (values, vectors) = sorted_eigen(gram)?;
    let max = values.last().copied().unwrap_or(0.0);
    if !(max > 0.0) {
        return Err(Error::RankDeficiency { rank: 0 });
    }
    let keep: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] > rel_cutoff * max)
        .collect();
    Ok(DMatrix::from_fn(gram.nrows(), keep.len(), |r, c| {
        vectors[(r, keep[c])] / values[keep[c]].sqrt()
    }))
}

/// Eigenvalues of `A x = λ B x` for symmetric `A` and positive definite `B`, ascending.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigensolverFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let y = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::EigensolverFailure("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::EigensolverFailure("singular Cholesky factor".into()))?;
    let (values, _) = sorted_eigen(&symmetrize(&c))?;
    Ok(values)
}

/// Groups sorted values whose consecutive gaps are `≤ tol`; each cluster is `(mean, count)`.
pub fn cluster(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol {
            if i > start {
                let group = &sorted[start..i];
                out.push((group.iter().sum::<f64>() / group.len() as f64, group.len()));
            }
            start = i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cyclic Jacobi eigenvalues: an independent oracle for small symmetric matrices.
    fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    fn spd(n: usize, seed: u64) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |i, j| (((i * 7 + j * 13 + seed as usize) % 17) as f64 - 8.0) / 8.0);
        &m * m.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn generalized_matches_jacobi_oracle() {
        let a = symmetrize(&DMatrix::from_fn(12, 12, |i, j| ((i + 2 * j) % 5) as f64 - 2.0));
        let b = spd(12, 3);
        let got = generalized_eigenvalues(&a, &b).unwrap();
        // B^{-1/2} A B^{-1/2} via Jacobi on B
        let (bv, bq) = sorted_eigen(&b).unwrap();
        let inv_sqrt = &bq * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            bv.len(),
            bv.iter().map(|v| 1.0 / v.sqrt()),
        )) * bq.transpose();
        let expect = jacobi_eigenvalues(symmetrize(&(&inv_sqrt * &a * &inv_sqrt)));
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-10, "{g} vs {e}");
        }
    }

    #[test]
    fn truncation_whitens_and_drops_null_space() {
        // rank-3 Gram in 5 dimensions
        let v = DMatrix::from_fn(5, 3, |i, j| ((i + 1) * (j + 2)) as f64 % 7.0 + (i == j) as u8 as f64);
        let g = &v * v.transpose();
        let q = truncation_map(&g, 1e-10).unwrap();
        assert_eq!(q.ncols(), 3);
        let id = q.transpose() * &g * &q;
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-10);
    }

    #[test]
    fn cluster_groups_close_values() {
        let c = cluster(&[0.0, 1e-9, 2.0, 2.0 + 1e-7, 2.0 + 2e-7, 5.0], 1e-6);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].1, 2);
        assert_eq!(c[1].1, 3);
        assert!((c[1].0 - (2.0 + 1e-7)).abs() < 1e-12);
        assert!(cluster(&[], 1.0).is_empty());
    }

    #[test]
    fn non_spd_mass_is_reported() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            generalized_eigenvalues(&a, &b),
            Err(Error::EigensolverFailure(_))
        ));
    }
}
