//! Galerkin discretization of the sub-Laplacian of `θ = f·θ₀`.
//!
//! Since `L_{fθ₀} = f·L_{θ₀}` the horizontal gradient scales as
//! `∇^H_θ u = f⁻¹∇^H_{θ₀} u`, and the volume form is `ψ_θ = f^{n+1}ψ₀`. The
//! Dirichlet and mass forms on a trial space `{φ_j}` are therefore
//!
//! ```text
//! A_jk = ∫ fⁿ ⟨∇^H φ_j, ∇^H φ_k⟩_{θ₀} ψ₀      B_jk = ∫ f^{n+1} φ_j φ_k ψ₀
//! ```
//!
//! with everything on the right evaluated for the standard structure.
//! Monomials restricted to the sphere are linearly dependent, so both forms
//! are compressed onto the numerically independent subspace of the round Gram
//! matrix before the generalized eigensolve.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::monomial_basis;
use crate::error::{Error, Result};
use crate::factor::ConformalFactor;
use crate::geometry::{energy_from_gradient, horizontal_frame, SpherePoint};
use crate::linalg::{cluster, generalized_eigenvalues, symmetrize, truncation_map};
use crate::poly::{NeumaierSum, PowerTable, RealPolynomial};
use crate::quadrature::{QuadratureRule, RuleDescriptor};

/// Relative eigenvalue cutoff of the round Gram matrix.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Kernel and clustering tolerances, relative to the largest computed eigenvalue.
pub const KERNEL_TOLERANCE: f64 = 1e-6;
pub const CLUSTER_TOLERANCE: f64 = 1e-6;

const NODE_CHUNK: usize = 2048;

#[derive(Debug, Clone)]
pub struct SpectralProblem {
    n: usize,
    stiffness: DMatrix<f64>,
    mass: DMatrix<f64>,
    basis: Vec<RealPolynomial>,
    basis_degree: u32,
    rank_map: DMatrix<f64>,
    volume: f64,
    round_volume: f64,
    rule: RuleDescriptor,
}

impl SpectralProblem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn basis(&self) -> &[RealPolynomial] {
        &self.basis
    }

    /// Columns span the numerically independent part of the trial space.
    pub fn rank_map(&self) -> &DMatrix<f64> {
        &self.rank_map
    }

    pub fn rank(&self) -> usize {
        self.rank_map.ncols()
    }

    /// `V(θ) = ∫ f^{n+1} ψ₀`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `V(θ₀)` as computed by the same rule.
    pub fn round_volume(&self) -> f64 {
        self.round_volume
    }

    pub fn rule(&self) -> &RuleDescriptor {
        &self.rule
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// `(value, multiplicity)`, ascending.
    pub clusters: Vec<(f64, usize)>,
    pub lambda1: f64,
    pub volume: f64,
    pub round_volume: f64,
    /// `λ₁(θ)·V(θ)^{1/(n+1)}`
    pub invariant: f64,
    /// `2n·V(θ₀)^{1/(n+1)}`
    pub bound: f64,
    pub margin: f64,
    pub kernel_tolerance: f64,
    pub basis_degree: u32,
    pub rule: RuleDescriptor,
}

type Terms = Vec<(Vec<u32>, f64)>;

struct CompiledBasis {
    dim: usize,
    terms: Vec<Terms>,
    grads: Vec<Vec<Terms>>,
    degree: u32,
}

impl CompiledBasis {
    fn new(basis: &[RealPolynomial]) -> Self {
        let flat = |p: &RealPolynomial| {
            p.terms()
                .map(|(e, c)| (e.as_slice().to_vec(), c))
                .collect::<Vec<_>>()
        };
        Self {
            dim: basis[0].ambient_dim(),
            terms: basis.iter().map(flat).collect(),
            grads: basis
                .iter()
                .map(|p| p.gradient().iter().map(flat).collect())
                .collect(),
            degree: basis.iter().map(RealPolynomial::degree).max().unwrap_or(0),
        }
    }

    fn eval(terms: &[(Vec<u32>, f64)], table: &PowerTable) -> f64 {
        terms.iter().map(|(e, c)| c * table.monomial(e)).sum()
    }
}

/// Builds the stiffness, mass and round Gram contributions of a chunk of nodes.
fn chunk_forms(
    basis: &CompiledBasis,
    nodes: &[SpherePoint],
    weights: &[f64],
    fvals: &[f64],
    n: usize,
    table_degree: u32,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let nb = basis.terms.len();
    let h = 2 * n;
    let mut grad_rows = DMatrix::<f64>::zeros(nodes.len() * h, nb);
    let mut mass_rows = DMatrix::<f64>::zeros(nodes.len(), nb);
    let mut gram_rows = DMatrix::<f64>::zeros(nodes.len(), nb);
    let mut grad = vec![0.0; basis.dim];
    for (i, ((z, w), f)) in nodes.iter().zip(weights).zip(fvals).enumerate() {
        let table = PowerTable::new(z.coords(), table_degree);
        let frame = horizontal_frame(z);
        let sw = w.sqrt();
        let s_stiff = (w * f.powi(n as i32)).sqrt();
        let s_mass = (w * f.powi(n as i32 + 1)).sqrt();
        for j in 0..nb {
            let v = CompiledBasis::eval(&basis.terms[j], &table);
            mass_rows[(i, j)] = s_mass * v;
            gram_rows[(i, j)] = sw * v;
            for (g, terms) in grad.iter_mut().zip(&basis.grads[j]) {
                *g = CompiledBasis::eval(terms, &table);
            }
            for (k, e) in frame.iter().enumerate() {
                let d: f64 = e.0.iter().zip(&grad).map(|(a, b)| a * b).sum();
                grad_rows[(i * h + k, j)] = s_stiff * d;
            }
        }
    }
    (gram_t(&grad_rows), gram_t(&mass_rows), gram_t(&gram_rows))
}

/// `XᵀX` through the blocked matrix product.
fn gram_t(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.transpose() * x
}

/// Assembles the Galerkin forms of `θ = f·θ₀` on `basis` with `rule`.
pub fn assemble(
    f: &ConformalFactor,
    basis: &[RealPolynomial],
    rule: &QuadratureRule,
) -> Result<SpectralProblem> {
    let n = rule.n();
    if basis.is_empty() {
        return Err(Error::RankDeficiency { rank: 0 });
    }
    if let Some(p) = basis.iter().find(|p| p.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: 2 * n + 2,
            found: p.ambient_dim(),
        });
    }
    let fvals = f.values_on(rule)?;
    let compiled = CompiledBasis::new(basis);
    let table_degree = compiled.degree.max(1);

    let nodes = rule.nodes();
    let weights = rule.weights();
    let partials: Vec<_> = (0..nodes.len())
        .step_by(NODE_CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + NODE_CHUNK).min(nodes.len());
            chunk_forms(
                &compiled,
                &nodes[start..end],
                &weights[start..end],
                &fvals[start..end],
                n,
                table_degree,
            )
        })
        .collect();
    let nb = basis.len();
    let mut stiffness = DMatrix::zeros(nb, nb);
    let mut mass = DMatrix::zeros(nb, nb);
    let mut gram = DMatrix::zeros(nb, nb);
    for (a, b, g) in &partials {
        stiffness += a;
        mass += b;
        gram += g;
    }
    let stiffness = symmetrize(&stiffness);
    let mass = symmetrize(&mass);
    let gram = symmetrize(&gram);

    let rank_map = truncation_map(&gram, RANK_CUTOFF)?;
    if rank_map.ncols() < 2 {
        return Err(Error::RankDeficiency {
            rank: rank_map.ncols(),
        });
    }

    let mut vol = NeumaierSum::default();
    for (w, fv) in weights.iter().zip(&fvals) {
        vol.add(w * fv.powi(n as i32 + 1));
    }

    Ok(SpectralProblem {
        n,
        stiffness,
        mass,
        basis: basis.to_vec(),
        basis_degree: compiled.degree,
        rank_map,
        volume: vol.value(),
        round_volume: rule.volume(),
        rule: rule.descriptor().clone(),
    })
}

/// Solves the compressed generalized eigenproblem and extracts `λ₁`.
///
/// Reports at most `count` eigenvalues (and the clusters among them);
/// `λ₁` is always computed from the full spectrum.
pub fn solve(problem: &SpectralProblem, count: usize) -> Result<SpectralResult> {
    let q = &problem.rank_map;
    let a = symmetrize(&(q.transpose() * &problem.stiffness * q));
    let b = symmetrize(&(q.transpose() * &problem.mass * q));
    let all = generalized_eigenvalues(&a, &b)?;
    let scale = all.last().copied().unwrap_or(0.0).abs();
    let kernel_tolerance = KERNEL_TOLERANCE * scale;
    let below = all.iter().filter(|v| v.abs() <= kernel_tolerance).count();
    if below != 1 || all.first().is_some_and(|v| *v < -kernel_tolerance) {
        return Err(Error::KernelDimensionAnomaly {
            count: below,
            tolerance: kernel_tolerance,
        });
    }
    let lambda1 = all
        .iter()
        .copied()
        .find(|v| *v > kernel_tolerance)
        .ok_or(Error::RankDeficiency { rank: all.len() })?;
    let eigenvalues: Vec<f64> = all.iter().copied().take(count.max(2)).collect();
    let clusters = cluster(&eigenvalues, CLUSTER_TOLERANCE * scale);

    let exponent = 1.0 / (problem.n as f64 + 1.0);
    let invariant = lambda1 * problem.volume.powf(exponent);
    let bound = 2.0 * problem.n as f64 * problem.round_volume.powf(exponent);
    Ok(SpectralResult {
        n: problem.n,
        eigenvalues,
        clusters,
        lambda1,
        volume: problem.volume,
        round_volume: problem.round_volume,
        invariant,
        bound,
        margin: bound - invariant,
        kernel_tolerance,
        basis_degree: problem.basis_degree,
        rule: problem.rule.clone(),
    })
}

/// Monomial basis of degree `≤ degree`, assembly and full solve in one call.
pub fn invariant_report(
    f: &ConformalFactor,
    n: usize,
    degree: u32,
    rule: &QuadratureRule,
) -> Result<SpectralResult> {
    if rule.n() != n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n + 2,
            found: 2 * rule.n() + 2,
        });
    }
    let basis = monomial_basis(n, degree)?;
    let problem = assemble(f, &basis, rule)?;
    solve(&problem, usize::MAX)
}

/// `∫ fⁿ|∇^H u|² ψ₀ / ∫ f^{n+1}(u − ū)² ψ₀`, with `ū` the `f^{n+1}ψ₀`-mean of `u`.
pub fn rayleigh_quotient(
    u: &RealPolynomial,
    f: &ConformalFactor,
    rule: &QuadratureRule,
) -> Result<f64> {
    let n = rule.n();
    if u.n() != n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n + 2,
            found: u.ambient_dim(),
        });
    }
    let fvals = f.values_on(rule)?;
    let grad = u.gradient();
    let (mut energy, mut vol, mut first) = (
        NeumaierSum::default(),
        NeumaierSum::default(),
        NeumaierSum::default(),
    );
    let mut values = Vec::with_capacity(rule.len());
    for ((z, w), fv) in rule.nodes().iter().zip(rule.weights()).zip(&fvals) {
        let g: Vec<f64> = grad.iter().map(|p| p.eval_coords(z.coords())).collect();
        let density = energy_from_gradient(z.coords(), &g);
        energy.add(w * fv.powi(n as i32) * density);
        let m = w * fv.powi(n as i32 + 1);
        let v = u.eval_coords(z.coords());
        vol.add(m);
        first.add(m * v);
        values.push(v);
    }
    let mean = first.value() / vol.value();
    let mut norm = NeumaierSum::default();
    for ((v, w), fv) in values.iter().zip(rule.weights()).zip(&fvals) {
        norm.add(w * fv.powi(n as i32 + 1) * (v - mean) * (v - mean));
    }
    let norm = norm.value();
    if norm < 1e-14 {
        return Err(Error::DegenerateTestFunction { norm });
    }
    Ok(energy.value() / norm)
}

/// Product rule with `m = 2·degree + 6` for `n = 1`, otherwise a Monte Carlo rule.
pub fn default_rule(n: usize, degree: u32, mc_samples: usize, seed: u64) -> Result<QuadratureRule> {
    if n == 1 {
        QuadratureRule::product_s3(2 * degree as usize + 6)
    } else {
        QuadratureRule::monte_carlo(n, mc_samples, seed)
    }
}
