//! Polynomial Weyl symbols, on which the star-product series terminates.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Symbol, SymplecticGrid};
use crate::error::{Error, Result};

/// `sum c_ij x^i p^j`, keyed by `(i, j)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolySymbol {
    terms: BTreeMap<(u32, u32), Complex64>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

impl PolySymbol {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, Complex64::new(1.0, 0.0))
    }

    pub fn p() -> Self {
        Self::monomial(0, 1, Complex64::new(1.0, 0.0))
    }

    fn add_term(&mut self, i: u32, j: u32, c: Complex64) {
        let e = self.terms.entry((i, j)).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if e.norm() == 0.0 {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coefficient(&self, i: u32, j: u32) -> Complex64 {
        self.terms.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn add(&self, other: &PolySymbol) -> Self {
        let mut out = self.clone();
        for ((i, j), c) in &other.terms {
            out.add_term(*i, *j, *c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in &self.terms {
            out.add_term(*i, *j, c * s);
        }
        out
    }

    /// Commutative pointwise product.
    pub fn mul(&self, other: &PolySymbol) -> Self {
        let mut out = Self::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &other.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    /// `d_x^a d_p^b`.
    pub fn derivative(&self, a: u32, b: u32) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in &self.terms {
            if *i >= a && *j >= b {
                out.add_term(i - a, j - b, c * falling(*i, a) * falling(*j, b));
            }
        }
        out
    }

    pub fn eval(&self, x: f64, p: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|((i, j), c)| c * x.powi(*i as i32) * p.powi(*j as i32))
            .sum()
    }

    pub fn to_symbol(&self, grid: &SymplecticGrid) -> Result<Symbol> {
        Symbol::from_fn(grid, |x, p| self.eval(x, p))
    }

    /// Star-product series truncated after order `order`:
    /// `sum_n (i hbar/2)^n/n! sum_k C(n,k) (-1)^k (d_x^{n-k} d_p^k a)(d_x^k d_p^{n-k} b)`.
    pub fn star_series(&self, other: &PolySymbol, hbar: f64, order: i64) -> Result<Self> {
        if order < 0 {
            return Err(Error::InvalidParameter(format!(
                "series order must be >= 0, got {order}"
            )));
        }
        let mut out = Self::zero();
        let mut pref = Complex64::new(1.0, 0.0);
        for n in 0..=order as u32 {
            if n > 0 {
                pref *= Complex64::new(0.0, hbar / 2.0) / n as f64;
            }
            for k in 0..=n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let term = self.derivative(n - k, k).mul(&other.derivative(k, n - k));
                out = out.add(&term.scale(pref * binomial(n, k) * sign));
            }
            if n > self.degree() + other.degree() {
                break;
            }
        }
        Ok(out)
    }

    /// Exact star product; the series stops at the combined degree.
    pub fn star(&self, other: &PolySymbol, hbar: f64) -> Self {
        self.star_series(other, hbar, (self.degree() + other.degree()) as i64)
            .expect("order is nonnegative")
    }

    pub fn moyal_bracket(&self, other: &PolySymbol, hbar: f64) -> Self {
        let d = self
            .star(other, hbar)
            .add(&other.star(self, hbar).scale(Complex64::new(-1.0, 0.0)));
        d.scale(Complex64::new(0.0, -1.0 / hbar))
    }

    pub fn baker_bracket(&self, other: &PolySymbol, hbar: f64) -> Self {
        self.star(other, hbar)
            .add(&other.star(self, hbar))
            .scale(Complex64::new(0.5, 0.0))
    }

    pub fn poisson_bracket(&self, other: &PolySymbol) -> Self {
        let a = self.derivative(1, 0).mul(&other.derivative(0, 1));
        let b = self.derivative(0, 1).mul(&other.derivative(1, 0));
        a.add(&b.scale(Complex64::new(-1.0, 0.0)))
    }
}
