use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cr_spectra::balance::{barycenter, solve_balance, WeightedMeasure};
use cr_spectra::geometry::{horizontal_energy_density, horizontal_frame, horizontal_project, reeb_vector, AmbientVector};
use cr_spectra::moebius::{compose, pullback_residual, CrAutomorphism, CrMap};
use cr_spectra::poly::{Exponents, RealPolynomial};
use cr_spectra::quadrature::QuadratureRule;
use cr_spectra::spectral::invariant_report;
use cr_spectra::{ConformalFactor, SpherePoint, Unitary};

fn point(n: usize, seed: u64) -> SpherePoint {
    SpherePoint::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn unitary(n: usize, seed: u64) -> Unitary {
    Unitary::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn ln_gamma_half(k: u32) -> f64 {
    // ln Γ(k/2), by the recurrence from Γ(1/2) = √π and Γ(1) = 1
    let (mut acc, mut x) = if k.is_multiple_of(2) { (0.0, 1.0) } else { (0.5 * std::f64::consts::PI.ln(), 0.5) };
    while x < k as f64 / 2.0 - 1e-12 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

/// `∫_{S^{N−1}} x^α dσ = 2·Πᵢ Γ((αᵢ+1)/2) / Γ((|α|+N)/2)` for even `α`, else 0.
fn sphere_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let num: f64 = alpha.iter().map(|a| ln_gamma_half(a + 1)).sum();
    let total: u32 = alpha.iter().sum::<u32>() + alpha.len() as u32;
    2.0 * (num - ln_gamma_half(total)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_and_cocycle(seed in any::<u64>(), s in 0.0f64..2.0, t in 0.0f64..2.0, n in 1usize..3) {
        let p = point(n, seed);
        let z = point(n, seed ^ 0xabcdef);
        let gs = CrAutomorphism::new(p.clone(), s).unwrap();
        let gt = CrAutomorphism::new(p.clone(), t).unwrap();
        let gst = CrAutomorphism::new(p, s + t).unwrap();
        let c = compose(&gs, &gt);
        prop_assert!(c.map(&z).distance(&gst.apply(&z)) <= 1e-10);
        let direct = gst.pullback_factor(&z);
        prop_assert!((c.factor(&z) - direct).abs() <= 1e-10 * direct.max(1.0));
    }

    #[test]
    fn automorphisms_are_contact(seed in any::<u64>(), t in 0.0f64..2.0, n in 1usize..3) {
        let g = CrAutomorphism::new(point(n, seed), t)
            .unwrap()
            .with_unitaries(Some(unitary(n, seed.wrapping_add(1))), Some(unitary(n, seed.wrapping_add(2))))
            .unwrap();
        let z = point(n, seed.wrapping_add(3));
        prop_assert!(pullback_residual(&g, &z, 1e-6) <= 1e-6);
        let image = g.apply(&z);
        let norm: f64 = image.coords().iter().map(|c| c * c).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn unitary_conjugation(seed in any::<u64>(), t in 0.0f64..1.5) {
        // U∘γ_t^p∘U⁻¹ = γ_t^{Up}
        let p = point(2, seed);
        let u = unitary(2, seed.wrapping_add(1));
        let z = point(2, seed.wrapping_add(2));
        let g = CrAutomorphism::new(p.clone(), t).unwrap();
        let lhs = u.apply(&g.apply(&u.inverse().apply(&z)));
        let rhs = CrAutomorphism::new(u.apply(&p), t).unwrap().apply(&z);
        prop_assert!(lhs.distance(&rhs) <= 1e-10);
    }

    #[test]
    fn horizontal_projection_and_frame(seed in any::<u64>(), n in 1usize..4) {
        let z = point(n, seed);
        let v = AmbientVector(point(n, seed.wrapping_add(1)).coords().to_vec());
        let h = horizontal_project(&z, &v).unwrap();
        prop_assert!(h.dot(&z.as_vector()).abs() <= 1e-12);
        prop_assert!(h.dot(&reeb_vector(&z)).abs() <= 1e-12);
        let frame = horizontal_frame(&z);
        prop_assert_eq!(frame.len(), 2 * n);
        for (i, a) in frame.iter().enumerate() {
            for (j, b) in frame.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((a.dot(b) - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn energy_density_is_nonnegative_and_reeb_blind(seed in any::<u64>(), var in 0usize..4) {
        let z = point(1, seed);
        let u = RealPolynomial::variable(1, var);
        let e = horizontal_energy_density(&u, &z).unwrap();
        prop_assert!(e >= 0.0);
        // |z|² is constant on the sphere
        let r2 = (0..4).fold(RealPolynomial::zero(1), |acc, k| {
            let x = RealPolynomial::variable(1, k);
            acc + &(&x * &x)
        });
        prop_assert!(horizontal_energy_density(&r2, &z).unwrap() <= 1e-12);
    }

    #[test]
    fn product_rule_integrates_monomials_exactly(
        a in 0u32..6, b in 0u32..6, c in 0u32..6, d in 0u32..6, m in 6usize..10
    ) {
        prop_assume!(a + b + c + d < 2 * m as u32);
        let rule = QuadratureRule::product_s3(m).unwrap();
        let alpha = [a, b, c, d];
        let mono = RealPolynomial::monomial(1, Exponents::new(alpha.to_vec()), 1.0);
        let got = rule.integrate_fn(|z| mono.eval_coords(z.coords()));
        prop_assert!((got - sphere_moment(&alpha)).abs() <= 1e-12, "{got} vs {}", sphere_moment(&alpha));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn constant_factor_scaling(c in 0.05f64..20.0) {
        let rule = QuadratureRule::product_s3(8).unwrap();
        let r = invariant_report(&ConformalFactor::Constant(c), 1, 2, &rule).unwrap();
        prop_assert!((r.lambda1 - 2.0 / c).abs() <= 1e-10 / c);
        prop_assert!(r.margin.abs() <= 1e-10 * r.bound);
    }

    #[test]
    fn spectrum_is_rotation_invariant(seed in any::<u64>()) {
        let h = RealPolynomial::parse("3 + x1*y2 - 0.5*x2^2 + 0.25*y1", 1).unwrap();
        let f = ConformalFactor::PolyPositive(h);
        let rule = QuadratureRule::product_s3(10).unwrap();
        let a = invariant_report(&f, 1, 2, &rule).unwrap();
        let b = invariant_report(&f.rotated(&unitary(1, seed)), 1, 2, &rule).unwrap();
        prop_assert_eq!(a.eigenvalues.len(), b.eigenvalues.len());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn balance_is_scale_free_and_equivariant(seed in any::<u64>(), t in 0.05f64..1.0, c in 1e-3f64..1e3) {
        let rule = QuadratureRule::product_s3(16).unwrap();
        let f = ConformalFactor::extremal(point(1, seed), t, 1.0).unwrap();
        let mu = WeightedMeasure::from_factor(&rule, &f).unwrap();
        let base = solve_balance(&mu).unwrap();
        let g = base.automorphism();
        let residual: f64 = barycenter(&mu, &g).iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(residual <= 1e-8);

        let scaled = solve_balance(&mu.scaled(c).unwrap()).unwrap();
        prop_assert!((scaled.t - base.t).abs() <= 1e-10);
        prop_assert!(scaled.pole.distance(&base.pole) <= 1e-10);

        let u = unitary(1, seed.wrapping_add(7));
        let rotated = solve_balance(&mu.rotated(&u)).unwrap();
        let expect = u.apply_vec(&base.ball_point());
        for (x, y) in rotated.ball_point().iter().zip(&expect) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }
}
