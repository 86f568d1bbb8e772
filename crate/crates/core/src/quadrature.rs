//! Integration on `S^{2n+1}` against the standard volume form.
//!
//! The volume form of `θ₀` is the round measure, so node/weight sets are
//! ordinary sphere cubatures: an exact product rule on `S³` in Hopf
//! coordinates and seeded Monte Carlo for any `n`.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::poly::NeumaierSum;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    n: usize,
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    exact_degree: u32,
    descriptor: RuleDescriptor,
}

/// Serializable provenance of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RuleDescriptor {
    Product { m: usize },
    #[serde(rename = "montecarlo")]
    MonteCarlo { samples: usize, seed: u64 },
}

impl std::fmt::Display for RuleDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Product { m } => write!(f, "product(m={m})"),
            Self::MonteCarlo { samples, seed } => write!(f, "montecarlo(N={samples},seed={seed})"),
        }
    }
}

/// `2π^{n+1}/n!`, the round volume of `S^{2n+1}`.
pub fn sphere_volume(n: usize) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    2.0 * PI.powi(n as i32 + 1) / fact
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m
        let k = (i + 1) as f64;
        let mf = m as f64;
        let mut r = (PI * (k - 0.25) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, r);
            dp = d;
            let dr = p / d;
            r -= dr;
            if dr.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, r);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - r * r) * dp * dp);
        x[i] = -r;
        x[m - 1 - i] = r;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl QuadratureRule {
    /// Product rule on `S³`: Gauss–Legendre in `cos 2η` with `m` nodes and
    /// `2m+1` equispaced nodes in each Hopf angle. Exact through degree `2m−1`.
    pub fn product_s3(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidRule(format!("product rule needs m ≥ 2, got {m}")));
        }
        let (s, gw) = gauss_legendre(m);
        let k = 2 * m + 1;
        let dphi = 2.0 * PI / k as f64;
        let mut nodes = Vec::with_capacity(m * k * k);
        let mut weights = Vec::with_capacity(m * k * k);
        for (si, wi) in s.iter().zip(&gw) {
            let c = ((1.0 + si) / 2.0).sqrt();
            let sn = ((1.0 - si) / 2.0).sqrt();
            let w = wi / 4.0 * dphi * dphi;
            for a in 0..k {
                let (sa, ca) = (a as f64 * dphi).sin_cos();
                for b in 0..k {
                    let (sb, cb) = (b as f64 * dphi).sin_cos();
                    nodes.push(SpherePoint::normalized(vec![c * ca, c * sa, sn * cb, sn * sb])?);
                    weights.push(w);
                }
            }
        }
        let rule = Self {
            n: 1,
            nodes,
            weights,
            exact_degree: 2 * m as u32 - 1,
            descriptor: RuleDescriptor::Product { m },
        };
        let v = rule.volume();
        if (v - sphere_volume(1)).abs() > 1e-10 {
            return Err(Error::InvalidRule(format!("product rule volume {v} ≠ 2π²")));
        }
        Ok(rule)
    }

    /// Exact rule for `n`; only `n = 1` is available.
    pub fn product(n: usize, m: usize) -> Result<Self> {
        if n != 1 {
            return Err(Error::InvalidRule(format!(
                "exact product rules exist only for n = 1 (got n = {n})"
            )));
        }
        Self::product_s3(m)
    }

    /// `samples` uniform points with equal weights summing to the round volume.
    pub fn monte_carlo(n: usize, samples: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidRule("n must be at least 1".into()));
        }
        if samples < 1000 {
            return Err(Error::InvalidRule(format!(
                "Monte Carlo rule needs at least 1000 samples, got {samples}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes: Vec<SpherePoint> = (0..samples)
            .map(|_| SpherePoint::random(n, &mut rng))
            .collect();
        let w = sphere_volume(n) / samples as f64;
        Ok(Self {
            n,
            nodes,
            weights: vec![w; samples],
            exact_degree: 0,
            descriptor: RuleDescriptor::MonteCarlo { samples, seed },
        })
    }

    pub fn from_descriptor(n: usize, d: &RuleDescriptor) -> Result<Self> {
        match *d {
            RuleDescriptor::Product { m } => Self::product(n, m),
            RuleDescriptor::MonteCarlo { samples, seed } => Self::monte_carlo(n, samples, seed),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polynomial degree integrated exactly; 0 for Monte Carlo.
    pub fn exact_degree(&self) -> u32 {
        self.exact_degree
    }

    pub fn descriptor(&self) -> &RuleDescriptor {
        &self.descriptor
    }

    /// `Σ w_i`, the rule's value of `V(θ₀)`.
    pub fn volume(&self) -> f64 {
        let mut s = NeumaierSum::default();
        for w in &self.weights {
            s.add(*w);
        }
        s.value()
    }

    /// `Σ w_i·field(node_i)`; errors carry the failing node index.
    pub fn integrate<F>(&self, field: F) -> Result<f64>
    where
        F: Fn(&SpherePoint) -> Result<f64>,
    {
        let mut s = NeumaierSum::default();
        for (i, (z, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let v = field(z).map_err(|e| Error::FieldEvaluation {
                node: i,
                source: Box::new(e),
            })?;
            s.add(w * v);
        }
        Ok(s.value())
    }

    /// Infallible variant of [`Self::integrate`].
    pub fn integrate_fn<F>(&self, field: F) -> f64
    where
        F: Fn(&SpherePoint) -> f64,
    {
        let mut s = NeumaierSum::default();
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * field(z));
        }
        s.value()
    }

    /// CSV with one row per node: coordinates followed by the weight.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.n + 1)
            .flat_map(|j| [format!("x{j}"), format!("y{j}")])
            .chain(std::iter::once("weight".to_string()))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            let row: Vec<String> = z
                .coords()
                .iter()
                .chain(std::iter::once(w))
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}
