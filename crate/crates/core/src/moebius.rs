//! Explicit CR automorphisms of the sphere.
//!
//! The punctured sphere is identified with the boundary of the Siegel domain
//! `{Im w > |z|²}` by a Cayley-type map. Conjugating the Siegel dilations
//! `(z, w) ↦ (e^t z, e^{2t} w)` back to the sphere and moving the fixed point
//! to an arbitrary pole `p` by a unitary gives the one-parameter groups
//!
//! ```text
//! γ_t^p(ζ) = (ζ + (sinh t + (cosh t − 1)(ζ,p))·p) / (cosh t + sinh t·(ζ,p))
//! ```
//!
//! whose pullback of `θ₀` is `|cosh t + sinh t·(ζ,p)|^{-2}·θ₀`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hermitian, to_complex, ComplexStructure, SpherePoint, Unitary};

/// Minimum distance from the Cayley pole `e_{n+1}` (and of `w` from `−i`).
pub const POLE_TOLERANCE: f64 = 1e-10;

/// Default central-difference step for [`pullback_residual`].
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// A map of the sphere that pulls `θ₀` back to a multiple of itself.
pub trait CrMap {
    fn map(&self, z: &SpherePoint) -> SpherePoint;

    /// The conformal factor `f` with `(self)^*θ₀ = f·θ₀` at `z`.
    fn factor(&self, z: &SpherePoint) -> f64;
}

impl<T: CrMap + ?Sized> CrMap for &T {
    fn map(&self, z: &SpherePoint) -> SpherePoint {
        (**self).map(z)
    }

    fn factor(&self, z: &SpherePoint) -> f64 {
        (**self).factor(z)
    }
}

impl CrMap for Unitary {
    fn map(&self, z: &SpherePoint) -> SpherePoint {
        self.apply(z)
    }

    fn factor(&self, _z: &SpherePoint) -> f64 {
        1.0
    }
}

/// `γ_t^p`, optionally pre- and post-composed with unitaries.
#[derive(Debug, Clone, PartialEq)]
pub struct CrAutomorphism {
    pole: SpherePoint,
    t: f64,
    pre_unitary: Option<Unitary>,
    post_unitary: Option<Unitary>,
}

impl CrAutomorphism {
    pub fn new(pole: SpherePoint, t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidAutomorphism(format!(
                "dilation parameter must be finite and ≥ 0, got {t}"
            )));
        }
        Ok(Self {
            pole,
            t,
            pre_unitary: None,
            post_unitary: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(SpherePoint::pole(n), 0.0).expect("t = 0 is valid")
    }

    pub fn with_unitaries(mut self, pre: Option<Unitary>, post: Option<Unitary>) -> Result<Self> {
        let dim = self.pole.ambient_dim();
        for u in pre.iter().chain(post.iter()) {
            if u.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.dim(),
                });
            }
        }
        self.pre_unitary = pre;
        self.post_unitary = post;
        Ok(self)
    }

    pub fn pole(&self) -> &SpherePoint {
        &self.pole
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.pole.n()
    }

    pub fn pre_unitary(&self) -> Option<&Unitary> {
        self.pre_unitary.as_ref()
    }

    pub fn post_unitary(&self) -> Option<&Unitary> {
        self.post_unitary.as_ref()
    }

    fn pre(&self, z: &[f64]) -> Vec<f64> {
        match &self.pre_unitary {
            Some(u) => u.apply_vec(z),
            None => z.to_vec(),
        }
    }

    fn denominator(&self, zeta: &[f64]) -> Complex64 {
        let w = hermitian(zeta, self.pole.coords());
        let d = self.t.cosh() + self.t.sinh() * w;
        debug_assert!(d.norm() > 1e-14, "γ denominator vanished");
        d
    }

    pub fn apply(&self, z: &SpherePoint) -> SpherePoint {
        if self.t == 0.0 && self.pre_unitary.is_none() && self.post_unitary.is_none() {
            return z.clone();
        }
        let zeta = self.pre(z.coords());
        let w = hermitian(&zeta, self.pole.coords());
        let (ch, sh) = (self.t.cosh(), self.t.sinh());
        let denom = ch + sh * w;
        let c = sh + (ch - 1.0) * w;
        let zc = to_complex(&zeta);
        let pc = self.pole.to_complex();
        let mut out: Vec<f64> = zc
            .iter()
            .zip(&pc)
            .flat_map(|(zj, pj)| {
                let v = (zj + c * pj) / denom;
                [v.re, v.im]
            })
            .collect();
        if let Some(u) = &self.post_unitary {
            out = u.apply_vec(&out);
        }
        SpherePoint::normalized(out).expect("γ image is nonzero")
    }

    /// `1/|cosh t + sinh t·(ζ,p)|²` evaluated at the pre-rotated point.
    pub fn pullback_factor(&self, z: &SpherePoint) -> f64 {
        1.0 / self.denominator(&self.pre(z.coords())).norm_sqr()
    }

    /// Pole and parameter packed as `tanh(t)·p`.
    pub fn ball_point(&self) -> Vec<f64> {
        let s = self.t.tanh();
        self.pole.coords().iter().map(|c| s * c).collect()
    }
}

impl CrMap for CrAutomorphism {
    fn map(&self, z: &SpherePoint) -> SpherePoint {
        self.apply(z)
    }

    fn factor(&self, z: &SpherePoint) -> f64 {
        self.pullback_factor(z)
    }
}

#[derive(Serialize, Deserialize)]
struct CrAutomorphismRepr {
    pole: SpherePoint,
    t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pre_unitary: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    post_unitary: Option<Vec<Vec<f64>>>,
}

fn rows_of(u: &Unitary) -> Vec<Vec<f64>> {
    let m = u.matrix();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn unitary_from_rows(rows: Vec<Vec<f64>>) -> Result<Unitary> {
    let r = rows.len();
    if rows.iter().any(|row| row.len() != r) {
        return Err(Error::NotUnitary("matrix rows have unequal length".into()));
    }
    Unitary::from_real(DMatrix::from_fn(r, r, |i, j| rows[i][j]))
}

impl Serialize for CrAutomorphism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CrAutomorphismRepr {
            pole: self.pole.clone(),
            t: self.t,
            pre_unitary: self.pre_unitary.as_ref().map(rows_of),
            post_unitary: self.post_unitary.as_ref().map(rows_of),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CrAutomorphism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = CrAutomorphismRepr::deserialize(d)?;
        let pre = repr.pre_unitary.map(unitary_from_rows).transpose();
        let post = repr.post_unitary.map(unitary_from_rows).transpose();
        let (pre, post) = (pre.map_err(D::Error::custom)?, post.map_err(D::Error::custom)?);
        CrAutomorphism::new(repr.pole, repr.t)
            .and_then(|g| g.with_unitaries(pre, post))
            .map_err(D::Error::custom)
    }
}

/// `outer ∘ inner`, kept as an application pipeline.
#[derive(Debug, Clone)]
pub struct Composed<A, B> {
    pub outer: A,
    pub inner: B,
}

pub fn compose<A: CrMap, B: CrMap>(outer: A, inner: B) -> Composed<A, B> {
    Composed { outer, inner }
}

impl<A: CrMap, B: CrMap> CrMap for Composed<A, B> {
    fn map(&self, z: &SpherePoint) -> SpherePoint {
        self.outer.map(&self.inner.map(z))
    }

    /// Pullback cocycle: `f_{g₁∘g₂}(z) = f_{g₂}(z)·f_{g₁}(g₂ z)`.
    fn factor(&self, z: &SpherePoint) -> f64 {
        self.inner.factor(z) * self.outer.factor(&self.inner.map(z))
    }
}

/// A point `(z, w) ∈ C^n × C` on the boundary of the Siegel domain, stored as `2n+2` reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    coords: Vec<f64>,
}

impl SiegelPoint {
    /// Validates `Im w = |z|²` (relative to `max(1, |z|²)`).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let p = Self { coords };
        let r = p.boundary_defect();
        let scale = p.z_norm_sqr().max(1.0);
        if !(r.abs() <= 1e-10 * scale) {
            return Err(Error::InvalidAutomorphism(format!(
                "point is off the Siegel boundary (Im w − |z|² = {r:e})"
            )));
        }
        Ok(p)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn w(&self) -> Complex64 {
        let k = self.coords.len();
        Complex64::new(self.coords[k - 2], self.coords[k - 1])
    }

    fn z_norm_sqr(&self) -> f64 {
        let k = self.coords.len();
        self.coords[..k - 2].iter().map(|c| c * c).sum()
    }

    /// `Im w − |z|²`.
    pub fn boundary_defect(&self) -> f64 {
        self.w().im - self.z_norm_sqr()
    }

    /// `(z, w) ↦ (e^t z, e^{2t} w)`.
    pub fn dilate(&self, t: f64) -> Self {
        let k = self.coords.len();
        let (a, b) = (t.exp(), (2.0 * t).exp());
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| if i < k - 2 { a * c } else { b * c })
            .collect();
        Self { coords }
    }
}

/// `Φ(ζ) = (ζ₁, …, ζ_n, i(1 + ζ_{n+1})) / (1 − ζ_{n+1})`.
pub fn cayley_to_siegel(z: &SpherePoint) -> Result<SiegelPoint> {
    let n = z.n();
    if z.distance(&SpherePoint::pole(n)) <= POLE_TOLERANCE {
        return Err(Error::PoleSingularity {
            tolerance: POLE_TOLERANCE,
        });
    }
    let zeta = z.to_complex();
    let last = zeta[n];
    let denom = Complex64::new(1.0, 0.0) - last;
    let i = Complex64::i();
    let coords = zeta[..n]
        .iter()
        .map(|c| c / denom)
        .chain(std::iter::once(i * (1.0 + last) / denom))
        .flat_map(|c| [c.re, c.im])
        .collect();
    SiegelPoint::new(coords)
}

pub(crate) fn cayley_to_sphere_raw(s: &SiegelPoint) -> Result<Vec<f64>> {
    let c = to_complex(s.coords());
    let k = c.len();
    let w = c[k - 1];
    let i = Complex64::i();
    let denom = w + i;
    if denom.norm() < POLE_TOLERANCE {
        return Err(Error::PoleSingularity {
            tolerance: POLE_TOLERANCE,
        });
    }
    Ok(c[..k - 1]
        .iter()
        .map(|zj| 2.0 * i * zj / denom)
        .chain(std::iter::once((w - i) / denom))
        .flat_map(|v| [v.re, v.im])
        .collect())
}

/// `Φ^{-1}(z, w) = (2i z₁, …, 2i z_n, w − i) / (w + i)`, renormalized onto the sphere.
pub fn cayley_to_sphere(s: &SiegelPoint) -> Result<SpherePoint> {
    SpherePoint::normalized(cayley_to_sphere_raw(s)?)
}

/// A unitary `α_p` with `α_p(p) = e_{n+1}`.
///
/// Built as a complex Householder reflection sending `p` to `e^{iφ}e_{n+1}`
/// (`φ = arg p_{n+1}`) followed by the phase `e^{−iφ}` on the last
/// coordinate. When `p_{n+1}` is real and nonnegative the phase is trivial and
/// the result is an involution.
pub fn unitary_to_pole(p: &SpherePoint) -> Unitary {
    let n = p.n();
    let k = n + 1;
    let pc = p.to_complex();
    let last = pc[n];
    let phase = if last.norm() > 0.0 {
        last / last.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut v = pc.clone();
    v[n] -= phase;
    let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let mut h = DMatrix::<Complex64>::identity(k, k);
    if vv > 1e-30 {
        for i in 0..k {
            for j in 0..k {
                h[(i, j)] -= 2.0 * v[i] * v[j].conj() / vv;
            }
        }
    }
    for j in 0..k {
        h[(n, j)] *= phase.conj();
    }
    Unitary::from_complex(&h).expect("Householder reflection is unitary")
}

/// Max over a tangent frame at `z` of `|θ₀(dg(v)) − f_g(z)·θ₀(v)|`, with
/// both sides evaluated on central differences along the great circle through
/// `z` in direction `v`.
///
/// Panics unless `h ∈ (1e-7, 1e-4]`.
pub fn pullback_residual<G: CrMap>(g: &G, z: &SpherePoint, h: f64) -> f64 {
    assert!(h > 1e-7 && h <= 1e-4, "finite-difference step {h} outside (1e-7, 1e-4]");
    let image = g.map(z);
    let j_image = ComplexStructure.apply(image.coords());
    let j_z = ComplexStructure.apply(z.coords());
    let f = g.factor(z);
    crate::geometry::tangent_frame(z)
        .iter()
        .map(|v| {
            let (plus, minus) = (great_circle(z, &v.0, h), great_circle(z, &v.0, -h));
            let dg = central_difference(&g.map(&plus), &g.map(&minus), h);
            let dz = central_difference(&plus, &minus, h);
            let lhs: f64 = j_image.iter().zip(&dg).map(|(a, b)| a * b).sum();
            let rhs: f64 = j_z.iter().zip(&dz).map(|(a, b)| a * b).sum();
            (lhs - f * rhs).abs()
        })
        .fold(0.0, f64::max)
}

fn great_circle(z: &SpherePoint, v: &[f64], s: f64) -> SpherePoint {
    let c: Vec<f64> = z
        .coords()
        .iter()
        .zip(v)
        .map(|(a, b)| s.cos() * a + s.sin() * b)
        .collect();
    SpherePoint::normalized(c).expect("great circle point")
}

fn central_difference(plus: &SpherePoint, minus: &SpherePoint, h: f64) -> Vec<f64> {
    plus.coords()
        .iter()
        .zip(minus.coords())
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

/// Central difference of `g` along the great circle `cos(s)z + sin(s)v` (`v` unit tangent).
pub(crate) fn directional_derivative<G: CrMap>(g: &G, z: &SpherePoint, v: &[f64], h: f64) -> Vec<f64> {
    central_difference(&g.map(&great_circle(z, v, h)), &g.map(&great_circle(z, v, -h)), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    fn close(a: &SpherePoint, b: &SpherePoint) -> f64 {
        a.distance(b)
    }

    #[test]
    fn cayley_examples() {
        for n in 1..=2 {
            let south = SpherePoint::normalized({
                let mut c = vec![0.0; 2 * n + 2];
                c[2 * n] = -1.0;
                c
            })
            .unwrap();
            let s = cayley_to_siegel(&south).unwrap();
            assert!(s.coords().iter().all(|c| c.abs() < 1e-15));
            let back = cayley_to_sphere(&SiegelPoint::new(vec![0.0; 2 * n + 2]).unwrap()).unwrap();
            assert!(close(&back, &south) < 1e-15);
            assert!(matches!(
                cayley_to_siegel(&SpherePoint::pole(n)),
                Err(Error::PoleSingularity { .. })
            ));
        }
        // w = −i
        let bad = SiegelPoint { coords: vec![0.0, 0.0, 0.0, -1.0] };
        assert!(matches!(cayley_to_sphere(&bad), Err(Error::PoleSingularity { .. })));
        assert!(SiegelPoint::new(vec![1.0, 0.0, 0.0, 0.5]).is_err());
    }

    #[test]
    fn cayley_round_trip_and_membership() {
        let mut rng = rng();
        for n in 1..=3 {
            for _ in 0..100 {
                let z = SpherePoint::random(n, &mut rng);
                let s = cayley_to_siegel(&z).unwrap();
                assert!(s.boundary_defect().abs() <= 1e-10 * s.z_norm_sqr().max(1.0));
                let raw = cayley_to_sphere_raw(&s).unwrap();
                let drift = (raw.iter().map(|c| c * c).sum::<f64>() - 1.0).abs();
                assert!(drift <= 1e-12);
                assert!(close(&cayley_to_sphere(&s).unwrap(), &z) <= 1e-12);
            }
        }
    }

    #[test]
    fn dilation_conjugate_matches_gamma_at_pole() {
        let mut rng = rng();
        for n in 1..=2 {
            for _ in 0..50 {
                let t: f64 = rng.random_range(0.0..2.0);
                let z = SpherePoint::random(n, &mut rng);
                let via_siegel = cayley_to_sphere(&cayley_to_siegel(&z).unwrap().dilate(t)).unwrap();
                let g = CrAutomorphism::new(SpherePoint::pole(n), t).unwrap();
                assert!(close(&via_siegel, &g.apply(&z)) < 1e-10);
            }
        }
    }

    #[test]
    fn identity_at_t_zero() {
        let mut rng = rng();
        for _ in 0..100 {
            let p = SpherePoint::random(2, &mut rng);
            let z = SpherePoint::random(2, &mut rng);
            let g = CrAutomorphism::new(p, 0.0).unwrap();
            assert!(close(&g.apply(&z), &z) < 1e-15);
            assert_eq!(g.pullback_factor(&z), 1.0);
        }
    }

    #[test]
    fn fixes_pole_and_antipode_and_attracts() {
        let mut rng = rng();
        for _ in 0..50 {
            let p = SpherePoint::random(1, &mut rng);
            let t = rng.random_range(0.0..3.0);
            let g = CrAutomorphism::new(p.clone(), t).unwrap();
            assert!(close(&g.apply(&p), &p) < 1e-12);
            let anti = SpherePoint::normalized(p.coords().iter().map(|c| -c).collect()).unwrap();
            assert!(close(&g.apply(&anti), &anti) < 1e-12);
            let z = SpherePoint::random(1, &mut rng);
            let far = CrAutomorphism::new(p.clone(), 10.0).unwrap();
            assert!(close(&far.apply(&z), &p) <= 1e-3);
            assert!((g.pullback_factor(&p) - (-2.0 * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_or_infinite_t() {
        assert!(CrAutomorphism::new(SpherePoint::pole(1), -0.1).is_err());
        assert!(CrAutomorphism::new(SpherePoint::pole(1), f64::NAN).is_err());
    }

    #[test]
    fn unitary_to_pole_examples() {
        let u = unitary_to_pole(&SpherePoint::pole(2));
        assert!((u.matrix() - DMatrix::identity(6, 6)).amax() < 1e-15);
        let mut rng = rng();
        for n in 1..=3 {
            for _ in 0..50 {
                let p = SpherePoint::random(n, &mut rng);
                let u = unitary_to_pole(&p);
                assert!(close(&u.apply(&p), &SpherePoint::pole(n)) < 1e-12);
            }
        }
    }

    #[test]
    fn householder_is_involution_when_last_coordinate_is_real() {
        let mut rng = rng();
        for _ in 0..20 {
            let mut c = SpherePoint::random(2, &mut rng).coords().to_vec();
            c[5] = 0.0;
            c[4] = c[4].abs();
            let p = SpherePoint::normalized(c).unwrap();
            let u = unitary_to_pole(&p);
            let uu = u.matrix() * u.matrix();
            assert!((uu - DMatrix::identity(6, 6)).amax() < 1e-12);
        }
    }

    #[test]
    fn conjugation_consistency() {
        let mut rng = rng();
        for n in 1..=2 {
            for _ in 0..50 {
                let p = SpherePoint::random(n, &mut rng);
                let t = rng.random_range(0.0..2.0);
                let a = unitary_to_pole(&p);
                let conj = CrAutomorphism::new(SpherePoint::pole(n), t)
                    .unwrap()
                    .with_unitaries(Some(a.clone()), Some(a.inverse()))
                    .unwrap();
                let direct = CrAutomorphism::new(p.clone(), t).unwrap();
                let z = SpherePoint::random(n, &mut rng);
                assert!(close(&conj.apply(&z), &direct.apply(&z)) < 1e-10);
                assert!((conj.pullback_factor(&z) - direct.pullback_factor(&z)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn group_law_and_cocycle() {
        let mut rng = rng();
        for _ in 0..100 {
            let p = SpherePoint::random(1, &mut rng);
            let s = rng.random_range(0.0..2.0);
            let t = rng.random_range(0.0..2.0);
            let gs = CrAutomorphism::new(p.clone(), s).unwrap();
            let gt = CrAutomorphism::new(p.clone(), t).unwrap();
            let gst = CrAutomorphism::new(p.clone(), s + t).unwrap();
            let comp = compose(&gs, &gt);
            let z = SpherePoint::random(1, &mut rng);
            assert!(close(&comp.map(&z), &gst.apply(&z)) <= 1e-10);
            let rel = (comp.factor(&z) - gst.pullback_factor(&z)).abs() / gst.pullback_factor(&z);
            assert!(rel <= 1e-10);
            let with_id = compose(&gs, CrAutomorphism::identity(1));
            assert!(close(&with_id.map(&z), &gs.apply(&z)) < 1e-15);
        }
    }

    #[test]
    fn pullback_residual_bounds() {
        let mut rng = rng();
        for _ in 0..100 {
            let p = SpherePoint::random(1, &mut rng);
            let t = rng.random_range(0.0..2.0);
            let z = SpherePoint::random(1, &mut rng);
            let g = CrAutomorphism::new(p.clone(), t).unwrap();
            assert!(pullback_residual(&g, &z, 1e-6) <= 1e-6);
            let u = Unitary::random(1, &mut rng);
            let v = Unitary::random(1, &mut rng);
            let gu = g.clone().with_unitaries(Some(u), Some(v)).unwrap();
            assert!(pullback_residual(&gu, &z, 1e-6) <= 1e-6);
        }
        for _ in 0..20 {
            let z = SpherePoint::random(2, &mut rng);
            let g = CrAutomorphism::new(SpherePoint::random(2, &mut rng), 0.0).unwrap();
            assert!(pullback_residual(&g, &z, 1e-6) <= 1e-12);
        }
    }

    #[test]
    fn zero_dilation_is_exact_identity() {
        let mut rng = rng();
        let z = SpherePoint::random(1, &mut rng);
        let g = CrAutomorphism::new(SpherePoint::random(1, &mut rng), 0.0).unwrap();
        assert_eq!(g.apply(&z), z);
        assert_eq!(g.pullback_factor(&z), 1.0);
    }

    #[test]
    fn residual_detects_wrong_factor() {
        struct Wrong(CrAutomorphism);
        impl CrMap for Wrong {
            fn map(&self, z: &SpherePoint) -> SpherePoint {
                self.0.apply(z)
            }
            fn factor(&self, z: &SpherePoint) -> f64 {
                self.0.pullback_factor(z).sqrt()
            }
        }
        let mut rng = rng();
        let g = CrAutomorphism::new(SpherePoint::random(1, &mut rng), 1.0).unwrap();
        let z = SpherePoint::random(1, &mut rng);
        assert!(pullback_residual(&Wrong(g), &z, 1e-6) > 1e-3);
    }

    #[test]
    fn sphere_preserved() {
        let mut rng = rng();
        for _ in 0..100 {
            let g = CrAutomorphism::new(SpherePoint::random(2, &mut rng), rng.random_range(0.0..5.0))
                .unwrap();
            let z = SpherePoint::random(2, &mut rng);
            let img = g.apply(&z);
            let raw_norm: f64 = img.coords().iter().map(|c| c * c).sum();
            assert!((raw_norm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = rng();
        let g = CrAutomorphism::new(SpherePoint::random(1, &mut rng), 0.75).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.starts_with("{\"pole\":["));
        let back: CrAutomorphism = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let gu = g
            .with_unitaries(Some(Unitary::random(1, &mut rng)), None)
            .unwrap();
        let back: CrAutomorphism = serde_json::from_str(&serde_json::to_string(&gu).unwrap()).unwrap();
        assert_eq!(back.t(), 0.75);
        assert!(back.pre_unitary().is_some());
        assert!(serde_json::from_str::<CrAutomorphism>(r#"{"pole":[0,0,1,0],"t":-1}"#).is_err());
    }
}
