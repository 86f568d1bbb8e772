//! Conformal balancing of a positive measure on the sphere.
//!
//! For a measure `μ` we look for `(p, t)` such that the barycenter of the
//! push-forward `(γ_t^p)_*μ` vanishes. The unknown is packed as the ball point
//! `b = tanh(t)·p`, in which `γ` reads
//!
//! ```text
//! γ_b(ζ) = (s·ζ + b + (ζ,b)·b/(1+s)) / (1 + (ζ,b)),   s = √(1 − |b|²)
//! ```
//!
//! which is smooth through `b = 0`. The system `G(b) = 0` is solved by damped
//! Newton with a finite-difference Jacobian, restarted from a small lattice of
//! ball points, and finally by Levenberg–Marquardt on `|G|²`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::ConformalFactor;
use crate::geometry::{hermitian, horizontal_frame, SpherePoint, Unitary};
use crate::moebius::{directional_derivative, CrAutomorphism, CrMap};
use crate::poly::NeumaierSum;
use crate::quadrature::QuadratureRule;

/// Accepted barycenter norm.
pub const BALANCE_TOLERANCE: f64 = 1e-8;
/// Largest admissible dilation parameter.
pub const T_CAP: f64 = 20.0;
const IMMEDIATE_ACCEPT: f64 = 1e-12;
const POLISH_TARGET: f64 = 1e-14;
const MAX_ITERATIONS: usize = 500;
const MULTI_STARTS: usize = 8;
const MAX_BALL_RADIUS: f64 = 1.0 - 1e-15;
const JACOBIAN_STEP: f64 = 1e-7;
/// Step for the finite-difference horizontal energies.
pub const ENERGY_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    nodes: Vec<SpherePoint>,
    masses: Vec<f64>,
    total: f64,
}

impl WeightedMeasure {
    pub fn new(nodes: Vec<SpherePoint>, masses: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != masses.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} nodes but {} masses",
                nodes.len(),
                masses.len()
            )));
        }
        let dim = nodes[0].ambient_dim();
        if let Some(z) = nodes.iter().find(|z| z.ambient_dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: z.ambient_dim(),
            });
        }
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(Error::InvalidMeasure(format!("mass {m} at node {i} is not positive")));
        }
        let mut total = NeumaierSum::default();
        for m in &masses {
            total.add(*m);
        }
        Ok(Self {
            nodes,
            masses,
            total: total.value(),
        })
    }

    /// The discretized `ψ_{θ₀}`.
    pub fn round(rule: &QuadratureRule) -> Result<Self> {
        Self::new(rule.nodes().to_vec(), rule.weights().to_vec())
    }

    /// The discretized `ψ_θ = f^{n+1}ψ₀` for `θ = f·θ₀`.
    pub fn from_factor(rule: &QuadratureRule, f: &ConformalFactor) -> Result<Self> {
        let n = rule.n() as i32;
        let masses = f
            .values_on(rule)?
            .iter()
            .zip(rule.weights())
            .map(|(fv, w)| w * fv.powi(n + 1))
            .collect();
        Self::new(rule.nodes().to_vec(), masses)
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn n(&self) -> usize {
        self.nodes[0].n()
    }

    /// Push-forward by a unitary.
    pub fn rotated(&self, u: &Unitary) -> Self {
        Self {
            nodes: self.nodes.iter().map(|z| u.apply(z)).collect(),
            masses: self.masses.clone(),
            total: self.total,
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.nodes.clone(), self.masses.iter().map(|m| m * c).collect())
    }

    fn mean_of<F: Fn(&SpherePoint) -> Vec<f64>>(&self, map: F) -> Vec<f64> {
        let dim = self.nodes[0].ambient_dim();
        let mut acc = vec![NeumaierSum::default(); dim];
        for (z, m) in self.nodes.iter().zip(&self.masses) {
            for (a, v) in acc.iter_mut().zip(map(z)) {
                a.add(m * v);
            }
        }
        acc.iter().map(|a| a.value() / self.total).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub pole: SpherePoint,
    pub t: f64,
    /// Norm of the balanced barycenter, re-evaluated through [`CrAutomorphism`].
    pub residual: f64,
    pub iterations: usize,
}

impl BalancePoint {
    pub fn automorphism(&self) -> CrAutomorphism {
        CrAutomorphism::new(self.pole.clone(), self.t).expect("balance point has valid t")
    }

    /// `tanh(t)·p`
    pub fn ball_point(&self) -> Vec<f64> {
        self.automorphism().ball_point()
    }
}

/// `(1/total)·Σ m_i·g(z_i)`.
pub fn barycenter<G: CrMap>(mu: &WeightedMeasure, g: &G) -> Vec<f64> {
    mu.mean_of(|z| g.map(z).coords().to_vec())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `γ_b(ζ)` in ball coordinates.
fn ball_map(b: &[f64], bc: &[Complex64], s: f64, z: &[f64]) -> Vec<f64> {
    let w = hermitian(z, b);
    let k = w / (1.0 + s);
    let denom = 1.0 + w;
    z.chunks_exact(2)
        .zip(bc)
        .flat_map(|(zj, bj)| {
            let v = (s * Complex64::new(zj[0], zj[1]) + bj + k * bj) / denom;
            [v.re, v.im]
        })
        .collect()
}

fn ball_barycenter(mu: &WeightedMeasure, b: &[f64]) -> Vec<f64> {
    let s = (1.0 - b.iter().map(|c| c * c).sum::<f64>()).max(0.0).sqrt();
    let bc: Vec<Complex64> = b.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    mu.mean_of(|z| ball_map(b, &bc, s, z.coords()))
}

struct Solver<'a> {
    mu: &'a WeightedMeasure,
    iterations: usize,
}

impl Solver<'_> {
    fn residual(&mut self, b: &[f64]) -> (Vec<f64>, f64) {
        let g = ball_barycenter(self.mu, b);
        let r = norm(&g);
        (g, r)
    }

    fn jacobian(&mut self, b: &[f64]) -> DMatrix<f64> {
        let dim = b.len();
        let mut jac = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let h = JACOBIAN_STEP;
            let mut plus = b.to_vec();
            let mut minus = b.to_vec();
            plus[k] += h;
            minus[k] -= h;
            if norm(&plus) >= MAX_BALL_RADIUS || norm(&minus) >= MAX_BALL_RADIUS {
                // one-sided toward the center
                let inward = if b[k] > 0.0 { -h } else { h };
                let mut q = b.to_vec();
                q[k] += inward;
                let g0 = ball_barycenter(self.mu, b);
                let g1 = ball_barycenter(self.mu, &q);
                for r in 0..dim {
                    jac[(r, k)] = (g1[r] - g0[r]) / inward;
                }
                continue;
            }
            let gp = ball_barycenter(self.mu, &plus);
            let gm = ball_barycenter(self.mu, &minus);
            for r in 0..dim {
                jac[(r, k)] = (gp[r] - gm[r]) / (2.0 * h);
            }
        }
        jac
    }

    /// Damped iteration from `b`; `lm` selects Levenberg–Marquardt steps.
    fn run(&mut self, start: Vec<f64>, lm: bool) -> (Vec<f64>, f64) {
        let mut b = start;
        let (mut g, mut r) = self.residual(&b);
        let mut damping = 1e-3;
        for _ in 0..MAX_ITERATIONS {
            if r <= POLISH_TARGET {
                break;
            }
            self.iterations += 1;
            let jac = self.jacobian(&b);
            let rhs = -DVector::from_column_slice(&g);
            let step = if lm {
                let jt = jac.transpose();
                let normal = &jt * &jac + DMatrix::identity(b.len(), b.len()) * damping;
                normal.lu().solve(&(&jt * rhs))
            } else {
                jac.lu().solve(&rhs)
            };
            let Some(step) = step else { break };
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand: Vec<f64> = b.iter().zip(step.iter()).map(|(x, d)| x + alpha * d).collect();
                if norm(&cand) < MAX_BALL_RADIUS {
                    let (gc, rc) = self.residual(&cand);
                    if rc < r {
                        b = cand;
                        g = gc;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if lm {
                damping = if accepted { (damping * 0.3).max(1e-12) } else { damping * 10.0 };
                if damping > 1e12 {
                    break;
                }
            } else if !accepted {
                break;
            }
        }
        (b, r)
    }
}

fn starts(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(MULTI_STARTS);
    'outer: for sign in [0.5, -0.5] {
        for k in 0..dim {
            if out.len() == MULTI_STARTS {
                break 'outer;
            }
            let mut v = vec![0.0; dim];
            v[k] = sign;
            out.push(v);
        }
    }
    out
}

fn point_from_ball(n: usize, b: &[f64]) -> Result<(SpherePoint, f64)> {
    let r = norm(b);
    if r == 0.0 {
        return Ok((SpherePoint::pole(n), 0.0));
    }
    Ok((SpherePoint::normalized(b.to_vec())?, r.min(MAX_BALL_RADIUS).atanh()))
}

/// Finds `(p, t)` with `|barycenter(μ, γ_t^p)| ≤ BALANCE_TOLERANCE`.
pub fn solve_balance(mu: &WeightedMeasure) -> Result<BalancePoint> {
    let n = mu.n();
    let first = &mu.nodes[0];
    if mu.nodes.iter().all(|z| z.distance(first) < 1e-12) {
        return Err(Error::DegenerateMeasure);
    }
    let dim = 2 * n + 2;
    let mut solver = Solver { mu, iterations: 0 };

    let zero = vec![0.0; dim];
    let (_, r0) = solver.residual(&zero);
    let mut best = (zero.clone(), r0);
    if r0 > IMMEDIATE_ACCEPT {
        let mut candidates = vec![zero];
        candidates.extend(starts(dim));
        for start in candidates {
            let (b, r) = solver.run(start, false);
            if r < best.1 {
                best = (b, r);
            }
            if best.1 <= POLISH_TARGET {
                break;
            }
        }
        if best.1 > BALANCE_TOLERANCE {
            let (b, r) = solver.run(best.0.clone(), true);
            if r < best.1 {
                best = (b, r);
            }
        }
    }

    let (pole, t) = point_from_ball(n, &best.0)?;
    let g = CrAutomorphism::new(pole.clone(), t)?;
    let residual = norm(&barycenter(mu, &g));
    if residual > BALANCE_TOLERANCE || t > T_CAP {
        return Err(Error::NoConvergence {
            iterations: solver.iterations,
            residual,
            t,
            pole: pole.coords().to_vec(),
        });
    }
    Ok(BalancePoint {
        pole,
        t,
        residual,
        iterations: solver.iterations,
    })
}

/// `Σ_j ∫|∇^H γ_j|²_θ ψ_θ / V(θ)` for the balancing map `γ` of `μ`.
///
/// The coordinate functions of a balanced `γ` are admissible test functions
/// with `Σ γ_j² = 1`, so the value bounds `λ₁(θ)` from above. Horizontal
/// energies are central differences along great circles with step
/// [`ENERGY_FD_STEP`].
pub fn balanced_test_energy(
    mu: &WeightedMeasure,
    f: &ConformalFactor,
    rule: &QuadratureRule,
) -> Result<f64> {
    if mu.nodes.len() != rule.len() {
        return Err(Error::InvalidMeasure(format!(
            "measure has {} nodes but the rule has {}",
            mu.nodes.len(),
            rule.len()
        )));
    }
    let point = solve_balance(mu)?;
    let g = point.automorphism();
    let fvals = f.values_on(rule)?;
    let n = rule.n() as i32;
    let (mut energy, mut volume) = (NeumaierSum::default(), NeumaierSum::default());
    for ((z, w), fv) in rule.nodes().iter().zip(rule.weights()).zip(&fvals) {
        let density: f64 = horizontal_frame(z)
            .iter()
            .map(|e| {
                let d = directional_derivative(&g, z, &e.0, ENERGY_FD_STEP);
                d.iter().map(|c| c * c).sum::<f64>()
            })
            .sum();
        energy.add(w * fv.powi(n) * density);
        volume.add(w * fv.powi(n + 1));
    }
    Ok(energy.value() / volume.value())
}

/// `2n·(V(θ₀)/V(θ))^{1/(n+1)}`, the bound obtained from the balanced energy by Hölder.
pub fn holder_bound(f: &ConformalFactor, rule: &QuadratureRule) -> Result<f64> {
    let n = rule.n();
    let fvals = f.values_on(rule)?;
    let mut volume = NeumaierSum::default();
    for (w, fv) in rule.weights().iter().zip(&fvals) {
        volume.add(w * fv.powi(n as i32 + 1));
    }
    Ok(2.0 * n as f64 * (rule.volume() / volume.value()).powf(1.0 / (n as f64 + 1.0)))
}
