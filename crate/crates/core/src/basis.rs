//! Bidegree spectral data of the standard CR sphere and the monomial trial space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Exponents, RealPolynomial};

/// Above this many monomials a warning is logged.
pub const SOFT_BASIS_LIMIT: usize = 20_000;
/// Above this many monomials basis construction fails.
pub const HARD_BASIS_LIMIT: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BidegreeLabel {
    pub p: u32,
    pub q: u32,
}

impl BidegreeLabel {
    pub fn new(p: u32, q: u32) -> Self {
        Self { p, q }
    }

    pub fn degree(&self) -> u32 {
        self.p + self.q
    }
}

/// Eigenvalue `2n(p+q) + 4pq` of the standard sub-Laplacian on `V^{p,q}`.
pub fn subelliptic_eigenvalue(label: BidegreeLabel, n: usize) -> f64 {
    subelliptic_int(label, n) as f64
}

fn subelliptic_int(label: BidegreeLabel, n: usize) -> i64 {
    let (p, q, n) = (i64::from(label.p), i64::from(label.q), n as i64);
    2 * n * (p + q) + 4 * p * q
}

/// Round eigenvalue `d(d+2n)` minus the Reeb contribution `(p−q)²`.
///
/// Panics if the result disagrees with [`subelliptic_eigenvalue`]; the two
/// are equal as integers for every label.
pub fn round_laplacian_consistency(label: BidegreeLabel, n: usize) -> f64 {
    let d = i64::from(label.degree());
    let diff = i64::from(label.p) - i64::from(label.q);
    let value = d * (d + 2 * n as i64) - diff * diff;
    assert_eq!(
        value,
        subelliptic_int(label, n),
        "round/sub-Laplacian identity broken for {label:?}"
    );
    value as f64
}

pub(crate) fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// `dim V^{p,q}` on `C^{n+1}`.
pub fn bidegree_multiplicity(label: BidegreeLabel, n: usize) -> u64 {
    let (p, q, n) = (i64::from(label.p), i64::from(label.q), n as i64);
    binomial(n + p, p) * binomial(n + q, q) - binomial(n + p - 1, p - 1) * binomial(n + q - 1, q - 1)
}

/// Dimension of degree-`d` spherical harmonics on `S^{2n+1}`.
pub fn spherical_harmonic_dimension(n: usize, d: u32) -> u64 {
    (0..=d)
        .map(|p| bidegree_multiplicity(BidegreeLabel::new(p, d - p), n))
        .sum()
}

/// Dimension of the span of monomials of degree `≤ max_degree` restricted to the sphere.
pub fn restricted_dimension(n: usize, max_degree: u32) -> u64 {
    (0..=max_degree)
        .map(|d| spherical_harmonic_dimension(n, d))
        .sum()
}

/// Sorted `(eigenvalue, multiplicity)` pairs of the standard sub-Laplacian on
/// `⊕_{p+q ≤ max_degree} V^{p,q}`.
pub fn expected_clusters(n: usize, max_degree: u32) -> Vec<(f64, u64)> {
    let mut acc: std::collections::BTreeMap<i64, u64> = Default::default();
    for d in 0..=max_degree {
        for p in 0..=d {
            let label = BidegreeLabel::new(p, d - p);
            *acc.entry(subelliptic_int(label, n)).or_default() += bidegree_multiplicity(label, n);
        }
    }
    acc.into_iter().map(|(v, m)| (v as f64, m)).collect()
}

/// All monomials in `2n+2` variables of total degree `≤ max_degree`, canonically ordered.
pub fn monomial_basis(n: usize, max_degree: u32) -> Result<Vec<RealPolynomial>> {
    assert!(n >= 1, "sphere dimension n must be at least 1");
    let vars = 2 * n + 2;
    let size = binomial(vars as i64 + i64::from(max_degree), vars as i64) as usize;
    if size > HARD_BASIS_LIMIT {
        return Err(Error::BudgetExceeded {
            size,
            cap: HARD_BASIS_LIMIT,
        });
    }
    if size > SOFT_BASIS_LIMIT {
        log::warn!("monomial basis has {size} elements (n = {n}, degree {max_degree})");
    }
    let mut out = Vec::with_capacity(size);
    for d in 0..=max_degree {
        let mut exps = Vec::new();
        compositions(d, vars, &mut Vec::with_capacity(vars), &mut exps);
        // descending lexicographic within a degree
        exps.sort_by(|a, b| b.cmp(a));
        out.extend(
            exps.into_iter()
                .map(|e| RealPolynomial::monomial(n, Exponents::new(e), 1.0)),
        );
    }
    debug_assert_eq!(out.len(), size);
    Ok(out)
}

fn compositions(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == slots {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=remaining {
        prefix.push(k);
        compositions(remaining - k, slots, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(subelliptic_eigenvalue(BidegreeLabel::new(1, 0), 1), 2.0);
        assert_eq!(subelliptic_eigenvalue(BidegreeLabel::new(0, 0), 3), 0.0);
        assert_eq!(subelliptic_eigenvalue(BidegreeLabel::new(1, 1), 1), 8.0);
        assert_eq!(round_laplacian_consistency(BidegreeLabel::new(1, 0), 1), 2.0);
        assert_eq!(round_laplacian_consistency(BidegreeLabel::new(1, 1), 1), 8.0);
        assert_eq!(round_laplacian_consistency(BidegreeLabel::new(2, 0), 1), 4.0);
    }

    #[test]
    fn identity_holds_on_grid() {
        for n in 1..=3 {
            for d in 0..=10u32 {
                for p in 0..=d {
                    let l = BidegreeLabel::new(p, d - p);
                    assert_eq!(round_laplacian_consistency(l, n), subelliptic_eigenvalue(l, n));
                }
            }
        }
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(bidegree_multiplicity(BidegreeLabel::new(1, 0), 1), 2);
        assert_eq!(bidegree_multiplicity(BidegreeLabel::new(1, 1), 1), 3);
        for n in 1..5 {
            assert_eq!(bidegree_multiplicity(BidegreeLabel::new(0, 0), n), 1);
        }
    }

    /// Rank of a dense matrix by Gaussian elimination with partial pivoting.
    fn rank(mut m: Vec<Vec<f64>>) -> usize {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        let mut r = 0;
        for c in 0..cols {
            let Some(piv) = (r..rows).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            else {
                break;
            };
            if m[piv][c].abs() < 1e-9 {
                continue;
            }
            m.swap(r, piv);
            for i in r + 1..rows {
                let f = m[i][c] / m[r][c];
                for k in c..cols {
                    m[i][k] -= f * m[r][k];
                }
            }
            r += 1;
            if r == rows {
                break;
            }
        }
        r
    }

    fn multi_indices(total: u32, slots: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        if slots == 0 {
            return out;
        }
        compositions(total, slots, &mut Vec::new(), &mut out);
        out
    }

    /// Kernel dimension of `Σ_j ∂_{ζ_j} ∂_{ζ̄_j}` on bidegree-(p,q) monomials `ζ^α ζ̄^β`.
    fn harmonic_kernel_dim(p: u32, q: u32, n: usize) -> usize {
        let k = n + 1;
        let sources: Vec<(Vec<u32>, Vec<u32>)> = multi_indices(p, k)
            .into_iter()
            .flat_map(|a| multi_indices(q, k).into_iter().map(move |b| (a.clone(), b)))
            .collect();
        if p == 0 || q == 0 {
            return sources.len();
        }
        let targets: Vec<(Vec<u32>, Vec<u32>)> = multi_indices(p - 1, k)
            .into_iter()
            .flat_map(|a| multi_indices(q - 1, k).into_iter().map(move |b| (a.clone(), b)))
            .collect();
        let mut mat = vec![vec![0.0; sources.len()]; targets.len()];
        for (col, (a, b)) in sources.iter().enumerate() {
            for j in 0..k {
                if a[j] > 0 && b[j] > 0 {
                    let mut a2 = a.clone();
                    let mut b2 = b.clone();
                    a2[j] -= 1;
                    b2[j] -= 1;
                    let row = targets.iter().position(|t| t.0 == a2 && t.1 == b2).unwrap();
                    mat[row][col] += f64::from(a[j] * b[j]);
                }
            }
        }
        sources.len() - rank(mat)
    }

    #[test]
    fn multiplicity_matches_brute_force_kernel_rank() {
        for n in 1..=2 {
            for d in 0..=6u32 {
                for p in 0..=d {
                    let q = d - p;
                    assert_eq!(
                        bidegree_multiplicity(BidegreeLabel::new(p, q), n) as usize,
                        harmonic_kernel_dim(p, q, n),
                        "(p,q) = ({p},{q}), n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn harmonic_dimensions_on_s3() {
        for d in 0..8 {
            assert_eq!(spherical_harmonic_dimension(1, d), u64::from((d + 1) * (d + 1)));
        }
        assert_eq!(restricted_dimension(1, 2), 14);
        assert_eq!(restricted_dimension(1, 4), 55);
    }

    #[test]
    fn expected_clusters_d4() {
        let c = expected_clusters(1, 4);
        assert_eq!(
            c,
            vec![
                (0.0, 1),
                (2.0, 4),
                (4.0, 6),
                (6.0, 8),
                (8.0, 13),
                (14.0, 8),
                (20.0, 10),
                (24.0, 5)
            ]
        );
    }

    #[test]
    fn monomial_basis_counts_and_order() {
        let b = monomial_basis(1, 1).unwrap();
        let names: Vec<String> = b.iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["1.0", "1.0*x1", "1.0*y1", "1.0*x2", "1.0*y2"]);
        assert_eq!(monomial_basis(1, 4).unwrap().len(), 70);
        assert_eq!(monomial_basis(2, 2).unwrap().len(), 28);
        assert!(matches!(
            monomial_basis(3, 40),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
