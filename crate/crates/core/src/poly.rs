//! Sparse multivariate polynomials with real coefficients.

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn monomial(exps: Vec<u32>, coef: f64) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, coef);
        p
    }

    /// `x₀ + x₁ + … + x_{n−1}`.
    pub fn coordinate_sum(nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        for i in 0..nvars {
            let mut e = vec![0; nvars];
            e[i] = 1;
            p.add_term(e, 1.0);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exps: Vec<u32>, coef: f64) {
        if coef == 0.0 {
            return;
        }
        *self.terms.entry(exps).or_insert(0.0) += coef;
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, k: f64) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn powi(&self, k: u32) -> Poly {
        let mut acc = Poly::constant(self.nvars, 1.0);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute a polynomial `inner` (in `inner.nvars` variables) for the
    /// single variable of `self`.
    pub fn compose_univariate(&self, inner: &Poly) -> Poly {
        assert_eq!(self.nvars, 1, "outer polynomial must be univariate");
        let mut out = Poly::zero(inner.nvars);
        for (e, c) in &self.terms {
            out = out.add(&inner.powi(e[0]).scale(*c));
        }
        out
    }

    /// Substitute `vars[i]` for variable `i`.
    pub fn substitute(&self, vars: &[Poly]) -> Poly {
        assert_eq!(vars.len(), self.nvars);
        let m = vars.first().map_or(0, Poly::nvars);
        let mut out = Poly::zero(m);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(m, *c);
            for (v, &k) in vars.iter().zip(e) {
                t = t.mul(&v.powi(k));
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }
}
