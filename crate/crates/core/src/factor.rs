//! Conformal factors `f > 0` defining pseudo-Hermitian structures `θ = f·θ₀`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::monomial_basis;
use crate::error::{Error, Result};
use crate::geometry::{hermitian, SpherePoint, Unitary};
use crate::poly::RealPolynomial;
use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone, PartialEq)]
pub enum ConformalFactor {
    /// `f ≡ c`.
    Constant(f64),
    /// `f(ζ) = c / |cosh t + sinh t·(ζ, p)|²`, the pullback factor of `γ_t^p` times `c`.
    Extremal { pole: SpherePoint, t: f64, scale: f64 },
    /// `f = exp(ε·g)`.
    ExpPoly { g: RealPolynomial, epsilon: f64 },
    /// `f = h`, positivity checked on quadrature nodes.
    PolyPositive(RealPolynomial),
}

impl ConformalFactor {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidFactor(format!("constant must be positive, got {c}")));
        }
        Ok(Self::Constant(c))
    }

    pub fn extremal(pole: SpherePoint, t: f64, scale: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidFactor(format!("t must be finite and ≥ 0, got {t}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidFactor(format!("scale must be positive, got {scale}")));
        }
        Ok(Self::Extremal { pole, t, scale })
    }

    pub fn exp_poly(g: RealPolynomial, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::InvalidFactor("epsilon must be finite".into()));
        }
        Ok(Self::ExpPoly { g, epsilon })
    }

    /// The sphere dimension `n` this factor is tied to, if any.
    pub fn n(&self) -> Option<usize> {
        match self {
            Self::Constant(_) => None,
            Self::Extremal { pole, .. } => Some(pole.n()),
            Self::ExpPoly { g, .. } => Some(g.n()),
            Self::PolyPositive(h) => Some(h.n()),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.n() {
            Some(m) if m != n => Err(Error::DimensionMismatch {
                expected: 2 * n + 2,
                found: 2 * m + 2,
            }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, z: &SpherePoint) -> f64 {
        self.eval_coords(z.coords())
    }

    pub(crate) fn eval_coords(&self, z: &[f64]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Extremal { pole, t, scale } => {
                let w = hermitian(z, pole.coords());
                scale / (t.cosh() + t.sinh() * w).norm_sqr()
            }
            Self::ExpPoly { g, epsilon } => (epsilon * g.eval_coords(z)).exp(),
            Self::PolyPositive(h) => h.eval_coords(z),
        }
    }

    /// Values at every node; fails on the first non-positive or non-finite value.
    pub fn values_on(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        self.check_dim(rule.n())?;
        rule.nodes()
            .iter()
            .enumerate()
            .map(|(node, z)| {
                let value = self.eval(z);
                if value.is_finite() && value > 0.0 {
                    Ok(value)
                } else {
                    Err(Error::NonPositiveFactor { node, value })
                }
            })
            .collect()
    }

    /// `c·f`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidFactor(format!("scale must be positive, got {c}")));
        }
        Ok(match self {
            Self::Constant(a) => Self::Constant(a * c),
            Self::Extremal { pole, t, scale } => Self::Extremal {
                pole: pole.clone(),
                t: *t,
                scale: scale * c,
            },
            Self::ExpPoly { g, epsilon } if *epsilon != 0.0 => Self::ExpPoly {
                g: g.clone() + &RealPolynomial::constant(g.n(), c.ln() / epsilon),
                epsilon: *epsilon,
            },
            Self::ExpPoly { .. } => Self::Constant(c),
            Self::PolyPositive(h) => Self::PolyPositive(h.scale(c)),
        })
    }

    /// `f ∘ U`.
    pub fn rotated(&self, u: &Unitary) -> Self {
        match self {
            Self::Constant(c) => Self::Constant(*c),
            // (Uζ, p) = (ζ, U⁻¹p)
            Self::Extremal { pole, t, scale } => Self::Extremal {
                pole: u.inverse().apply(pole),
                t: *t,
                scale: *scale,
            },
            Self::ExpPoly { g, epsilon } => Self::ExpPoly {
                g: g.compose_linear(u.matrix()),
                epsilon: *epsilon,
            },
            Self::PolyPositive(h) => Self::PolyPositive(h.compose_linear(u.matrix())),
        }
    }
}

/// Polynomial of degree ≤ `degree` with every monomial coefficient uniform in `[−1, 1]`.
pub fn random_polynomial(n: usize, degree: u32, seed: u64) -> RealPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = monomial_basis(n, degree).expect("small random polynomial basis");
    basis.iter().fold(RealPolynomial::zero(n), |acc, m| {
        acc + &m.scale(rng.random_range(-1.0..=1.0))
    })
}

/// JSON-facing description of a conformal factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorSpec {
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    Extremal {
        /// Defaults to `e_{n+1}`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pole: Option<Vec<f64>>,
        t: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    ExpPoly {
        g: String,
        epsilon: f64,
    },
    /// `exp(ε·g)` with `g` from [`random_polynomial`].
    RandomExpPoly {
        seed: u64,
        epsilon: f64,
        #[serde(default = "two")]
        degree: u32,
    },
    PolyPositive {
        h: String,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> u32 {
    2
}

impl FactorSpec {
    /// Accepts JSON (`{"kind": …}`) or the shorthands `constant`, `constant:C`,
    /// `extremal:T` and `extremal:T:SCALE`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return serde_json::from_str(text)
                .map_err(|e| Error::InvalidFactor(format!("malformed factor JSON: {e}")));
        }
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidFactor(format!("not a number: {s:?}")))
        };
        match parts.as_slice() {
            ["constant"] => Ok(Self::Constant { c: 1.0 }),
            ["constant", c] => Ok(Self::Constant { c: num(c)? }),
            ["extremal", t] => Ok(Self::Extremal {
                pole: None,
                t: num(t)?,
                scale: 1.0,
            }),
            ["extremal", t, s] => Ok(Self::Extremal {
                pole: None,
                t: num(t)?,
                scale: num(s)?,
            }),
            _ => Err(Error::InvalidFactor(format!("unrecognized factor {text:?}"))),
        }
    }

    pub fn build(&self, n: usize) -> Result<ConformalFactor> {
        match self {
            Self::Constant { c } => ConformalFactor::constant(*c),
            Self::Extremal { pole, t, scale } => {
                let pole = match pole {
                    Some(p) => {
                        if p.len() != 2 * n + 2 {
                            return Err(Error::DimensionMismatch {
                                expected: 2 * n + 2,
                                found: p.len(),
                            });
                        }
                        SpherePoint::normalized(p.clone())?
                    }
                    None => SpherePoint::pole(n),
                };
                ConformalFactor::extremal(pole, *t, *scale)
            }
            Self::ExpPoly { g, epsilon } => {
                ConformalFactor::exp_poly(RealPolynomial::parse(g, n)?, *epsilon)
            }
            Self::RandomExpPoly {
                seed,
                epsilon,
                degree,
            } => ConformalFactor::exp_poly(random_polynomial(n, *degree, *seed), *epsilon),
            Self::PolyPositive { h } => Ok(ConformalFactor::PolyPositive(RealPolynomial::parse(h, n)?)),
        }
    }
}
