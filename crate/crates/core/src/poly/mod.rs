//! Sparse real polynomials on the ambient space `R^{2n+2}`.
//!
//! Variables are indexed like sphere coordinates: slot `2j` is `x_{j+1}` and
//! slot `2j+1` is `y_{j+1}`.

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;

/// Exponent multi-index ordered by total degree, then by descending
/// lexicographic order, so that `x1` precedes `y1` precedes `x2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponents(Box<[u32]>);

impl Exponents {
    pub fn new(exps: Vec<u32>) -> Self {
        Self(exps.into_boxed_slice())
    }

    pub fn zero(len: usize) -> Self {
        Self(vec![0; len].into_boxed_slice())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn plus(&self, other: &Exponents) -> Exponents {
        Exponents(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial {
    n: usize,
    terms: BTreeMap<Exponents, f64>,
}

impl RealPolynomial {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "sphere dimension n must be at least 1");
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(n, Exponents::zero(2 * n + 2), c)
    }

    /// The coordinate function of ambient slot `var`.
    pub fn variable(n: usize, var: usize) -> Self {
        let mut e = vec![0; 2 * n + 2];
        e[var] = 1;
        Self::monomial(n, Exponents::new(e), 1.0)
    }

    pub fn monomial(n: usize, exps: Exponents, coeff: f64) -> Self {
        assert_eq!(exps.len(), 2 * n + 2, "exponent length must be 2n+2");
        let mut p = Self::zero(n);
        p.add_term(exps, coeff);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponents, f64)>>(n: usize, terms: I) -> Self {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            assert_eq!(e.len(), 2 * n + 2, "exponent length must be 2n+2");
            p.add_term(e, c);
        }
        p
    }

    /// Parses the text format `"c * x1^a y1^b + …"`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        parse::parse(text, n)
    }

    fn add_term(&mut self, exps: Exponents, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + coeff;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.n + 2
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponents::degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, f64)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms
            .get(&Exponents::new(exps.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
    }

    pub fn eval(&self, z: &SpherePoint) -> Result<f64> {
        if z.ambient_dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: z.ambient_dim(),
            });
        }
        Ok(self.eval_coords(z.coords()))
    }

    /// Evaluates at raw coordinates with compensated summation over terms.
    ///
    /// Panics if `coords` has the wrong length.
    pub fn eval_coords(&self, coords: &[f64]) -> f64 {
        assert_eq!(coords.len(), self.ambient_dim());
        let table = PowerTable::new(coords, self.degree());
        self.eval_with(&table)
    }

    pub fn eval_with(&self, table: &PowerTable) -> f64 {
        let mut sum = NeumaierSum::default();
        for (e, c) in &self.terms {
            sum.add(c * table.monomial(e.as_slice()));
        }
        sum.value()
    }

    pub fn partial_derivative(&self, var: usize) -> Self {
        assert!(var < self.ambient_dim(), "variable index out of range");
        let terms = self.terms.iter().filter_map(|(e, c)| {
            let k = e.0[var];
            (k > 0).then(|| {
                let mut d = e.0.to_vec();
                d[var] -= 1;
                (Exponents::new(d), c * f64::from(k))
            })
        });
        Self::from_terms(self.n, terms)
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.ambient_dim())
            .map(|v| self.partial_derivative(v))
            .collect()
    }

    pub fn gradient_at(&self, z: &SpherePoint) -> Result<Vec<f64>> {
        self.gradient().iter().map(|g| g.eval(z)).collect()
    }

    /// `ξu = Σ_j (x_j ∂_{y_j} u − y_j ∂_{x_j} u)`.
    pub fn reeb_derivative(&self) -> Self {
        let mut out = Self::zero(self.n);
        for j in 0..=self.n {
            let (x, y) = (2 * j, 2 * j + 1);
            out = out + &(&Self::variable(self.n, x) * &self.partial_derivative(y));
            out = out - &(&Self::variable(self.n, y) * &self.partial_derivative(x));
        }
        out
    }

    /// `u ∘ M`, i.e. substitutes `v_i ↦ Σ_j M_ij v_j`.
    pub fn compose_linear(&self, m: &DMatrix<f64>) -> Self {
        let dim = self.ambient_dim();
        assert_eq!((m.nrows(), m.ncols()), (dim, dim));
        let images: Vec<Self> = (0..dim)
            .map(|i| {
                Self::from_terms(
                    self.n,
                    (0..dim).map(|j| {
                        let mut e = vec![0; dim];
                        e[j] = 1;
                        (Exponents::new(e), m[(i, j)])
                    }),
                )
            })
            .collect();
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let mut t = Self::constant(self.n, *c);
            for (var, &k) in e.0.iter().enumerate() {
                for _ in 0..k {
                    t = &t * &images[var];
                }
            }
            out = out + &t;
        }
        out
    }

    /// Drops terms with `|coeff| ≤ tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self::from_terms(
            self.n,
            self.terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(e, c)| (e.clone(), *c)),
        )
    }
}

impl Add<&RealPolynomial> for RealPolynomial {
    type Output = RealPolynomial;

    fn add(mut self, rhs: &RealPolynomial) -> RealPolynomial {
        assert_eq!(self.n, rhs.n, "ambient dimension mismatch");
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), *c);
        }
        self
    }
}

impl Sub<&RealPolynomial> for RealPolynomial {
    type Output = RealPolynomial;

    fn sub(mut self, rhs: &RealPolynomial) -> RealPolynomial {
        assert_eq!(self.n, rhs.n, "ambient dimension mismatch");
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), -c);
        }
        self
    }
}

impl Neg for RealPolynomial {
    type Output = RealPolynomial;

    fn neg(self) -> RealPolynomial {
        self.scale(-1.0)
    }
}

impl Mul<&RealPolynomial> for &RealPolynomial {
    type Output = RealPolynomial;

    fn mul(self, rhs: &RealPolynomial) -> RealPolynomial {
        assert_eq!(self.n, rhs.n, "ambient dimension mismatch");
        let mut out = RealPolynomial::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.plus(eb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for RealPolynomial {
    /// Writes the text format accepted by [`RealPolynomial::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            match (i, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            write!(f, "{mag:?}")?;
            for (var, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = if var % 2 == 0 { 'x' } else { 'y' };
                write!(f, "*{name}{}", var / 2 + 1)?;
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

/// Powers `c_v^k` of each coordinate up to a fixed degree.
#[derive(Debug, Clone)]
pub struct PowerTable {
    stride: usize,
    powers: Vec<f64>,
}

impl PowerTable {
    pub fn new(coords: &[f64], max_degree: u32) -> Self {
        let stride = max_degree as usize + 1;
        let mut powers = Vec::with_capacity(coords.len() * stride);
        for &c in coords {
            let mut p = 1.0;
            for _ in 0..stride {
                powers.push(p);
                p *= c;
            }
        }
        Self { stride, powers }
    }

    #[inline]
    pub fn monomial(&self, exps: &[u32]) -> f64 {
        exps.iter()
            .enumerate()
            .map(|(v, &k)| self.powers[v * self.stride + k as usize])
            .product()
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
