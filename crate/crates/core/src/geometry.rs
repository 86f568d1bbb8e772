//! Pointwise CR geometry of the unit sphere `S^{2n+1} ⊂ C^{n+1}`.
//!
//! Everything is ambient and real: a point `ζ` is stored as
//! `(x₁, y₁, …, x_{n+1}, y_{n+1})` with `ζ_j = x_j + i·y_j`, and the complex
//! structure acts as `J(x_j, y_j) = (−y_j, x_j)`. With this convention the
//! standard contact form is `θ₀(v) = ⟨Jζ, v⟩`, the Reeb field is `ξ(ζ) = Jζ`
//! and the Levi distribution at `ζ` is the orthogonal complement of
//! `span{ζ, Jζ}`, on which the Levi form is the Euclidean inner product.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::RealPolynomial;

/// Allowed deviation of `|z|²` from 1.
pub const SPHERE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Validates that `coords` has even length ≥ 4 and lies on the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_ambient_len(coords.len())?;
        let deviation = dot(&coords, &coords) - 1.0;
        if !deviation.is_finite() || deviation.abs() > SPHERE_TOLERANCE {
            return Err(Error::OffSphere { deviation });
        }
        Ok(Self { coords })
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        check_ambient_len(coords.len())?;
        let norm = dot(&coords, &coords).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::OffSphere { deviation: -1.0 });
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// The pole `e_{n+1} = (0, …, 0, 1)`.
    pub fn pole(n: usize) -> Self {
        Self::basis(n, n)
    }

    /// The complex basis vector `e_{j+1}` (real part 1 in slot `2j`).
    pub fn basis(n: usize, j: usize) -> Self {
        assert!(n >= 1 && j <= n, "basis index out of range");
        let mut coords = vec![0.0; 2 * n + 2];
        coords[2 * j] = 1.0;
        Self { coords }
    }

    pub fn from_complex(zeta: &[Complex64]) -> Result<Self> {
        Self::new(zeta.iter().flat_map(|c| [c.re, c.im]).collect())
    }

    /// Uniformly distributed point (normalized Gaussian vector).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<f64> = (0..2 * n + 2).map(|_| rng.sample(StandardNormal)).collect();
            if let Ok(p) = Self::normalized(v) {
                return p;
            }
        }
    }

    /// Complex dimension minus one, i.e. the sphere is `S^{2n+1}`.
    pub fn n(&self) -> usize {
        self.coords.len() / 2 - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        to_complex(&self.coords)
    }

    pub fn as_vector(&self) -> AmbientVector {
        AmbientVector(self.coords.clone())
    }

    pub fn distance(&self, other: &SpherePoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Hermitian product `(ζ, p) = Σ ζ_j p̄_j`.
    pub fn hermitian(&self, other: &SpherePoint) -> Complex64 {
        hermitian(&self.coords, &other.coords)
    }
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Self {
        p.coords
    }
}

fn check_ambient_len(len: usize) -> Result<()> {
    if len < 4 || !len.is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: 2 * (len / 2).max(2),
            found: len,
        });
    }
    Ok(())
}

/// A tangent or ambient vector in `R^{2n+2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmbientVector(pub Vec<f64>);

impl AmbientVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &AmbientVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + s·other`
    pub fn axpy(&self, s: f64, other: &AmbientVector) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }
}

/// The complex structure of `C^{n+1}` acting on real coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexStructure;

impl ComplexStructure {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (o, c) in out.chunks_exact_mut(2).zip(v.chunks_exact(2)) {
            o[0] = -c[1];
            o[1] = c[0];
        }
        out
    }

    /// Real matrix of `J` on `R^{dim}`.
    pub fn matrix(&self, dim: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim / 2 {
            m[(2 * j, 2 * j + 1)] = -1.0;
            m[(2 * j + 1, 2 * j)] = 1.0;
        }
        m
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn to_complex(coords: &[f64]) -> Vec<Complex64> {
    coords
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect()
}

/// `Σ a_j b̄_j` for real-encoded complex vectors.
pub(crate) fn hermitian(a: &[f64], b: &[f64]) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.chunks_exact(2).zip(b.chunks_exact(2)) {
        // (x0 + i x1)(y0 - i y1)
        re += x[0] * y[0] + x[1] * y[1];
        im += x[1] * y[0] - x[0] * y[1];
    }
    Complex64::new(re, im)
}

fn check_dims(z: &SpherePoint, v: &AmbientVector) -> Result<()> {
    if v.len() != z.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: z.ambient_dim(),
            found: v.len(),
        });
    }
    Ok(())
}

/// The Reeb field of `θ₀` at `z`, which is `J·z`.
pub fn reeb_vector(z: &SpherePoint) -> AmbientVector {
    AmbientVector(ComplexStructure.apply(z.coords()))
}

/// `θ₀_z(v) = ⟨J·z, v⟩`.
pub fn contact_form(z: &SpherePoint, v: &AmbientVector) -> Result<f64> {
    check_dims(z, v)?;
    Ok(reeb_vector(z).dot(v))
}

/// Orthogonal projection onto the Levi distribution `H_z = span{z, Jz}^⊥`.
pub fn horizontal_project(z: &SpherePoint, v: &AmbientVector) -> Result<AmbientVector> {
    check_dims(z, v)?;
    Ok(project_raw(z.coords(), &v.0))
}

pub(crate) fn project_raw(z: &[f64], v: &[f64]) -> AmbientVector {
    let jz = ComplexStructure.apply(z);
    let a = dot(v, z);
    let b = dot(v, &jz);
    AmbientVector(
        v.iter()
            .zip(z)
            .zip(&jz)
            .map(|((vi, zi), ji)| vi - a * zi - b * ji)
            .collect(),
    )
}

/// `|∇^H u|²_{θ₀}(z) = |∇u|² − ⟨∇u, z⟩² − (ξu)²` with `∇u` the ambient gradient.
pub fn horizontal_energy_density(u: &RealPolynomial, z: &SpherePoint) -> Result<f64> {
    let grad = u.gradient_at(z)?;
    Ok(energy_from_gradient(z.coords(), &grad))
}

pub(crate) fn energy_from_gradient(z: &[f64], grad: &[f64]) -> f64 {
    let jz = ComplexStructure.apply(z);
    let radial = dot(grad, z);
    let reeb = dot(grad, &jz);
    (dot(grad, grad) - radial * radial - reeb * reeb).max(0.0)
}

/// Orthonormal basis of `H_z` (dimension `2n`), ordered as `w₁, Jw₁, w₂, Jw₂, …`.
pub fn horizontal_frame(z: &SpherePoint) -> Vec<AmbientVector> {
    let dim = z.ambient_dim();
    let n = z.n();
    let mut frame: Vec<AmbientVector> = Vec::with_capacity(2 * n);
    for k in 0..dim {
        if frame.len() == 2 * n {
            break;
        }
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let mut w = project_raw(z.coords(), &e);
        for f in &frame {
            w = w.axpy(-w.dot(f), f);
        }
        let norm = w.norm();
        if norm < 1e-6 {
            continue;
        }
        let w = w.scaled(1.0 / norm);
        let jw = AmbientVector(ComplexStructure.apply(&w.0));
        frame.push(w);
        frame.push(jw);
    }
    debug_assert_eq!(frame.len(), 2 * n);
    frame
}

/// Orthonormal basis of `T_z S^{2n+1}`: the Reeb vector followed by [`horizontal_frame`].
pub fn tangent_frame(z: &SpherePoint) -> Vec<AmbientVector> {
    let mut frame = vec![reeb_vector(z)];
    frame.extend(horizontal_frame(z));
    frame
}

/// A complex-unitary map of `C^{n+1}` stored as a real orthogonal matrix commuting with `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: DMatrix<f64>,
}

impl Unitary {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n + 2, 2 * n + 2),
        }
    }

    /// Validates `UᵀU = I` and `UJ = JU`.
    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim < 4 || !dim.is_multiple_of(2) {
            return Err(Error::NotUnitary(format!(
                "shape {}x{} is not an even square ≥ 4",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let ortho = (matrix.transpose() * &matrix - DMatrix::identity(dim, dim)).amax();
        if ortho > Self::TOLERANCE {
            return Err(Error::NotUnitary(format!("|UᵀU − I| = {ortho:e}")));
        }
        let j = ComplexStructure.matrix(dim);
        let comm = (&matrix * &j - &j * &matrix).amax();
        if comm > Self::TOLERANCE {
            return Err(Error::NotUnitary(format!("|UJ − JU| = {comm:e}")));
        }
        Ok(Self { matrix })
    }

    /// Realifies a complex `(n+1)×(n+1)` matrix.
    pub fn from_complex(m: &DMatrix<Complex64>) -> Result<Self> {
        let k = m.nrows();
        let mut r = DMatrix::zeros(2 * k, 2 * m.ncols());
        for i in 0..k {
            for j in 0..m.ncols() {
                let c = m[(i, j)];
                r[(2 * i, 2 * j)] = c.re;
                r[(2 * i, 2 * j + 1)] = -c.im;
                r[(2 * i + 1, 2 * j)] = c.im;
                r[(2 * i + 1, 2 * j + 1)] = c.re;
            }
        }
        Self::from_real(r)
    }

    /// Haar-distributed unitary from a complex Gaussian matrix (Gram–Schmidt with phase fix).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let k = n + 1;
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
        while cols.len() < k {
            let mut v: Vec<Complex64> = (0..k)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            for c in &cols {
                let proj: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                cols.push(v.into_iter().map(|c| c / norm).collect());
            }
        }
        let m = DMatrix::from_fn(k, k, |i, j| cols[j][i]);
        Self::from_complex(&m).expect("Gram–Schmidt output is unitary")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn compose(&self, other: &Unitary) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; dim];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..dim).map(|j| self.matrix[(i, j)] * v[j]).sum();
        }
        out
    }

    pub fn apply(&self, z: &SpherePoint) -> SpherePoint {
        SpherePoint::normalized(self.apply_vec(z.coords())).expect("unitary image is nonzero")
    }
}
