//! Integral-form star product on periodic lattices.
//!
//! In Fourier space the product is a twisted convolution: modes
//! `e^{i(k1 x + l1 p)}` and `e^{i(k2 x + l2 p)}` multiply to
//! `e^{i(k x + l p)} e^{-i hbar (k1 l2 - l1 k2)/2}`. Sums are not wrapped, so
//! the result is exact for symbols whose spectra fit in half the band.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fft2, ifft2, lattice_derivative, loglog_slope, Symbol, SymplecticGrid};
use crate::error::{Error, Result};

fn spectrum(a: &Symbol) -> Vec<Complex64> {
    let (nx, np) = (a.grid.nx, a.grid.np);
    let mut v = a.values.clone();
    fft2(&mut v, nx, np);
    let s = 1.0 / (nx * np) as f64;
    v.iter().map(|c| c * s).collect()
}

/// `a * b` for symbols on a shared periodic lattice. Cost `O(n^4)`.
pub fn star_product(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    a.grid.ensure_same(&b.grid)?;
    let g = &a.grid;
    g.require_periodic("star product")?;
    let (nx, np) = (g.nx, g.np);
    let hbar = g.hbar;
    let ah = spectrum(a);
    let bh = spectrum(b);
    let kappa = g.kappa();
    let lambda = g.lambda();
    let (hx, hp) = (nx as i64 / 2, np as i64 / 2);
    // signed index -> bin, Nyquist excluded
    let kbin = |k: i64| (k.abs() < hx).then(|| k.rem_euclid(nx as i64) as usize);
    let lbin = |l: i64| (l.abs() < hp).then(|| l.rem_euclid(np as i64) as usize);
    let rows: Vec<Vec<Complex64>> = (-hx + 1..hx)
        .into_par_iter()
        .map(|k| {
            let kb = kbin(k).expect("in band");
            let mut row = vec![Complex64::new(0.0, 0.0); np];
            let mut part = vec![Complex64::new(0.0, 0.0); np];
            for k1 in -hx + 1..hx {
                let (Some(k1b), Some(k2b)) = (kbin(k1), kbin(k - k1)) else {
                    continue;
                };
                part.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for l1 in -hp + 1..hp {
                    let l1b = lbin(l1).expect("in band");
                    let u = ah[k1b * np + l1b];
                    if u == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let u = u * Complex64::from_polar(1.0, 0.5 * hbar * lambda[l1b] * kappa[kb]);
                    for l2 in (-hp + 1).max(-hp + 1 - l1)..hp.min(hp - l1) {
                        let l2b = lbin(l2).expect("in band");
                        let lb = lbin(l1 + l2).expect("in band");
                        part[lb] += u * bh[k2b * np + l2b];
                    }
                }
                for (lb, v) in part.iter().enumerate() {
                    if lb == np / 2 {
                        continue;
                    }
                    row[lb] +=
                        v * Complex64::from_polar(1.0, -0.5 * hbar * kappa[k1b] * lambda[lb]);
                }
            }
            row
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); nx * np];
    for (k, row) in (-hx + 1..hx).zip(rows) {
        let kb = kbin(k).expect("in band");
        out[kb * np..(kb + 1) * np].copy_from_slice(&row);
    }
    ifft2(&mut out, nx, np);
    let s = (nx * np) as f64;
    Symbol::new(g.clone(), out.iter().map(|v| v * s).collect())
}

/// `(a*b - b*a) / (i hbar)`.
pub fn moyal_bracket(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    let ab = star_product(a, b)?;
    let ba = star_product(b, a)?;
    let f = Complex64::new(0.0, -1.0 / a.grid.hbar);
    ab.combine(f, &ba, -f)
}

/// `(a*b + b*a) / 2`.
pub fn baker_bracket(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    let ab = star_product(a, b)?;
    let ba = star_product(b, a)?;
    ab.combine(Complex64::new(0.5, 0.0), &ba, Complex64::new(0.5, 0.0))
}

/// `d_x a d_p b - d_p a d_x b` with spectral derivatives.
pub fn poisson_bracket(a: &Symbol, b: &Symbol) -> Result<Symbol> {
    a.grid.ensure_same(&b.grid)?;
    a.grid.require_periodic("spectral Poisson bracket")?;
    let ax = lattice_derivative(&a.grid, &a.values, 0, 1);
    let ap = lattice_derivative(&a.grid, &a.values, 1, 1);
    let bx = lattice_derivative(&b.grid, &b.values, 0, 1);
    let bp = lattice_derivative(&b.grid, &b.values, 1, 1);
    let values = (0..a.values.len())
        .map(|i| ax[i] * bp[i] - ap[i] * bx[i])
        .collect();
    Symbol::new(a.grid.clone(), values)
}

/// Lattice and ladder for [`classical_limit_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLimitSpec {
    pub n: usize,
    pub x_range: [f64; 2],
    pub p_range: [f64; 2],
    pub hbar_ladder: Vec<f64>,
}

impl Default for ClassicalLimitSpec {
    fn default() -> Self {
        ClassicalLimitSpec {
            n: 64,
            x_range: [-8.0, 8.0],
            p_range: [-8.0, 8.0],
            hbar_ladder: vec![0.4, 0.2, 0.1, 0.05],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLimitRow {
    pub hbar: f64,
    /// `max |{a,b}_MB - {a,b}_PB|`.
    pub moyal_error: f64,
    /// `max |{a,b}_BB - a b|`.
    pub baker_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLimitReport {
    pub rows: Vec<ClassicalLimitRow>,
    /// Log-log slopes against `hbar`; `None` when an error is exactly zero.
    pub moyal_slope: Option<f64>,
    pub baker_slope: Option<f64>,
}

/// Distance of the Moyal and Baker brackets from their classical limits along
/// a ladder of `hbar` values, for fixed symbols `a(x,p)` and `b(x,p)`.
pub fn classical_limit_check(
    a: impl Fn(f64, f64) -> Complex64,
    b: impl Fn(f64, f64) -> Complex64,
    spec: &ClassicalLimitSpec,
) -> Result<ClassicalLimitReport> {
    if spec.hbar_ladder.is_empty() {
        return Err(Error::InvalidParameter("empty hbar ladder".into()));
    }
    let mut rows = Vec::new();
    for &hbar in &spec.hbar_ladder {
        let g = SymplecticGrid::lattice(spec.n, spec.x_range, spec.p_range, hbar)?;
        let sa = Symbol::from_fn(&g, &a)?;
        let sb = Symbol::from_fn(&g, &b)?;
        let mb = moyal_bracket(&sa, &sb)?;
        let pb = poisson_bracket(&sa, &sb)?;
        let bb = baker_bracket(&sa, &sb)?;
        let prod = sa.product(&sb)?;
        rows.push(ClassicalLimitRow {
            hbar,
            moyal_error: mb.max_abs_diff(&pb),
            baker_error: bb.max_abs_diff(&prod),
        });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.hbar).collect();
    let me: Vec<f64> = rows.iter().map(|r| r.moyal_error).collect();
    let be: Vec<f64> = rows.iter().map(|r| r.baker_error).collect();
    Ok(ClassicalLimitReport {
        moyal_slope: loglog_slope(&hs, &me),
        baker_slope: loglog_slope(&hs, &be),
        rows,
    })
}

/// Plane-wave symbol `e^{i(k x + l p)}` for lattice wavenumber indices `(k, l)`.
pub fn lattice_mode(g: &SymplecticGrid, k: i64, l: i64) -> Result<Symbol> {
    let kap = k as f64 * 2.0 * std::f64::consts::PI / g.x_period();
    let lam = l as f64 * 2.0 * std::f64::consts::PI / g.p_period();
    Symbol::from_fn(g, |x, p| Complex64::from_polar(1.0, kap * x + lam * p))
}
