//! Wigner-Moyal phase space: distributions, Weyl symbols, star products,
//! Moyal/Baker brackets and the two phase-space evolution equations.
//!
//! Arrays are row-major with `x` slow and `p` fast. Conventions:
//!
//! * `F(x,p) = (1/2 pi hbar) int psi*(x - y/2) psi(x + y/2) e^{-i p y/hbar} dy`
//! * `a * b = a exp((i hbar/2)(<-d_x ->d_p - <-d_p ->d_x)) b`, so `x*p - p*x = i hbar`
//! * `{a,b}_MB = (a*b - b*a)/(i hbar)`, `{a,b}_BB = (a*b + b*a)/2`,
//!   `{a,b}_PB = d_x a d_p b - d_p a d_x b`

mod moyal;
mod poly;
mod projection;
mod star;
mod wigner;

pub use moyal::{
    baker_bracket_h, baker_energy_equation, evolve_moyal, moyal_bracket_h, BakerEnergy, Hamiltonian,
};
pub use poly::PolySymbol;
pub use projection::{
    conditional_momentum, liouville_projection, project_to_configuration, qhj_projection,
    ConditionalMomentum, ConfigurationProjection,
};
pub use star::{
    baker_bracket, classical_limit_check, lattice_mode, moyal_bracket, poisson_bracket,
    star_product, ClassicalLimitReport, ClassicalLimitRow, ClassicalLimitSpec,
};
pub use wigner::{cross_wigner, wigner_transform};

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid};
use crate::spectral;

/// How the `x` rows of a phase-space lattice relate to the configuration grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lattice {
    /// Both axes periodic; rows are the configuration points.
    Periodic,
    /// Odd extension of a Dirichlet grid onto a ring of twice its length; rows
    /// outside the box carry zero weight.
    DirichletRing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticGrid {
    pub hbar: f64,
    pub lattice: Lattice,
    pub nx: usize,
    pub x_min: f64,
    pub dx: f64,
    pub np: usize,
    pub p_min: f64,
    pub dp: f64,
    /// Quadrature weight of each row.
    pub x_weights: Vec<f64>,
}

impl SymplecticGrid {
    /// Lattice Fourier-dual to a 1D configuration grid, `dp = 2 pi hbar / (n dx)`
    /// with `n` the ring length (the grid size, or twice it for Dirichlet grids).
    pub fn dual(grid: &Grid, hbar: f64) -> Result<Self> {
        if grid.dims() != 1 {
            return Err(Error::Unsupported(
                "phase space is implemented for 1D grids".into(),
            ));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be > 0, got {hbar}"
            )));
        }
        let axis = grid.axis(0);
        let dx = axis.dx();
        let (lattice, ring) = match grid.boundary() {
            Boundary::Periodic => (Lattice::Periodic, axis.n),
            Boundary::DirichletSine => (Lattice::DirichletRing, 2 * axis.n),
            Boundary::Radial => {
                return Err(Error::Unsupported(
                    "Wigner transform on a radial grid".into(),
                ))
            }
        };
        let x_weights = match lattice {
            Lattice::Periodic => vec![dx; ring],
            Lattice::DirichletRing => (0..ring)
                .map(|j| match j {
                    0 => 0.5 * dx,
                    j if j < axis.n => dx,
                    j if j == axis.n => 0.5 * dx,
                    _ => 0.0,
                })
                .collect(),
        };
        let dp = 2.0 * PI * hbar / (ring as f64 * dx);
        Ok(SymplecticGrid {
            hbar,
            lattice,
            nx: ring,
            x_min: axis.x_min,
            dx,
            np: ring,
            p_min: -(ring as f64 / 2.0) * dp,
            dp,
            x_weights,
        })
    }

    /// Square periodic lattice over `[x_lo, x_hi) x [p_lo, p_hi)`, not tied to a wavefunction.
    pub fn lattice(n: usize, x: [f64; 2], p: [f64; 2], hbar: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "lattice size must be even and >= 8, got {n}"
            )));
        }
        if !(x[1] > x[0] && p[1] > p[0]) {
            return Err(Error::InvalidGrid(
                "lattice ranges must be increasing".into(),
            ));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be > 0, got {hbar}"
            )));
        }
        let dx = (x[1] - x[0]) / n as f64;
        Ok(SymplecticGrid {
            hbar,
            lattice: Lattice::Periodic,
            nx: n,
            x_min: x[0],
            dx,
            np: n,
            p_min: p[0],
            dp: (p[1] - p[0]) / n as f64,
            x_weights: vec![dx; n],
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn p(&self, m: usize) -> f64 {
        self.p_min + m as f64 * self.dp
    }

    pub fn x_points(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    pub fn p_points(&self) -> Vec<f64> {
        (0..self.np).map(|m| self.p(m)).collect()
    }

    pub fn x_period(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn p_period(&self) -> f64 {
        self.np as f64 * self.dp
    }

    /// True when `dx dp n = 2 pi hbar`.
    pub fn is_dual(&self) -> bool {
        ((self.dx * self.dp * self.np as f64) / (2.0 * PI * self.hbar) - 1.0).abs() < 1e-12
    }

    pub fn ensure_same(&self, other: &SymplecticGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch("phase-space lattices differ".into()));
        }
        Ok(())
    }

    pub(crate) fn require_periodic(&self, what: &str) -> Result<()> {
        if self.lattice != Lattice::Periodic {
            return Err(Error::Unsupported(format!(
                "{what} needs a periodic phase-space lattice"
            )));
        }
        Ok(())
    }

    /// Angular wavenumbers conjugate to `x` (DFT bin order).
    pub(crate) fn kappa(&self) -> Vec<f64> {
        spectral::wavenumbers(self.nx, self.dx)
    }

    /// Angular wavenumbers conjugate to `p` (DFT bin order).
    pub(crate) fn lambda(&self) -> Vec<f64> {
        spectral::wavenumbers(self.np, self.dp)
    }
}

/// Weyl symbol sampled on a phase-space lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub grid: SymplecticGrid,
    pub values: Vec<Complex64>,
}

impl Symbol {
    pub fn new(grid: SymplecticGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Symbol { grid, values })
    }

    pub fn from_fn(grid: &SymplecticGrid, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.nx {
            for m in 0..grid.np {
                values.push(f(grid.x(j), grid.p(m)));
            }
        }
        Self::new(grid.clone(), values)
    }

    pub fn from_real(grid: &SymplecticGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x, p| Complex64::new(f(x, p), 0.0))
    }

    pub fn constant(grid: &SymplecticGrid, c: Complex64) -> Self {
        Symbol {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn conj(&self) -> Self {
        Symbol {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// `alpha self + beta other` on a shared lattice.
    pub fn combine(&self, alpha: Complex64, other: &Symbol, beta: Complex64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Symbol {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Pointwise (commutative) product.
    pub fn product(&self, other: &Symbol) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Symbol {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn max_abs_diff(&self, other: &Symbol) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn value(&self, j: usize, m: usize) -> Complex64 {
        self.values[j * self.grid.np + m]
    }
}

/// Real phase-space distribution `F(x,p)` at a given time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceDistribution {
    pub grid: SymplecticGrid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl PhaseSpaceDistribution {
    pub fn new(grid: SymplecticGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(PhaseSpaceDistribution { grid, values, time })
    }

    pub fn value(&self, j: usize, m: usize) -> f64 {
        self.values[j * self.grid.np + m]
    }

    /// `int F dp` for every row.
    pub fn position_marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.grid.np)
            .map(|row| row.iter().sum::<f64>() * self.grid.dp)
            .collect()
    }

    /// `int F dx` for every momentum column, using the row weights.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.np];
        for (row, w) in self.values.chunks(self.grid.np).zip(&self.grid.x_weights) {
            for (o, f) in out.iter_mut().zip(row) {
                *o += w * f;
            }
        }
        out
    }

    pub fn integral(&self) -> f64 {
        self.momentum_marginal().iter().sum::<f64>() * self.grid.dp
    }

    /// Smallest value on rows with nonzero weight.
    pub fn min(&self) -> f64 {
        self.weighted_rows()
            .flat_map(|(_, row)| row.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.weighted_rows()
            .flat_map(|(_, row)| row.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rows with nonzero quadrature weight, with their index.
    pub fn weighted_rows(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.values
            .chunks(self.grid.np)
            .enumerate()
            .filter(move |(j, _)| self.grid.x_weights[*j] > 0.0)
    }

    pub fn to_symbol(&self) -> Symbol {
        Symbol {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(*v, 0.0))
                .collect(),
        }
    }

    /// Largest difference on weighted rows.
    pub fn max_abs_diff(&self, other: &PhaseSpaceDistribution) -> f64 {
        self.weighted_rows()
            .flat_map(|(j, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(m, v)| (v - other.value(j, m)).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// `int int a(x,p) F(x,p) dx dp` (real part of `a`).
pub fn expectation_phase_space(a: &Symbol, f: &PhaseSpaceDistribution) -> Result<f64> {
    a.grid.ensure_same(&f.grid)?;
    let np = f.grid.np;
    let mut total = 0.0;
    for (j, row) in f.weighted_rows() {
        let s: f64 = row
            .iter()
            .enumerate()
            .map(|(m, v)| a.values[j * np + m].re * v)
            .sum();
        total += f.grid.x_weights[j] * s;
    }
    Ok(total * f.grid.dp)
}

/// As [`expectation_phase_space`] with the symbol given as a function of `(x, p)`.
pub fn expectation_with(f: &PhaseSpaceDistribution, a: impl Fn(f64, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for (j, row) in f.weighted_rows() {
        let x = f.grid.x(j);
        let s: f64 = row
            .iter()
            .enumerate()
            .map(|(m, v)| a(x, f.grid.p(m)) * v)
            .sum();
        total += f.grid.x_weights[j] * s;
    }
    total * f.grid.dp
}

/// Apply `op` to every row (along `p`), in parallel.
pub(crate) fn map_rows(
    values: &mut [Complex64],
    np: usize,
    op: impl Fn(usize, &mut [Complex64]) + Sync,
) {
    values
        .par_chunks_mut(np)
        .enumerate()
        .for_each(|(j, row)| op(j, row));
}

/// Apply `op` to every column (along `x`), in parallel.
pub(crate) fn map_columns(
    values: &mut [Complex64],
    nx: usize,
    np: usize,
    op: impl Fn(usize, &mut [Complex64]) + Sync,
) {
    let mut cols = transpose(values, nx, np);
    cols.par_chunks_mut(nx)
        .enumerate()
        .for_each(|(m, col)| op(m, col));
    values.copy_from_slice(&transpose(&cols, np, nx));
}

fn transpose(values: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = values[r * cols + c];
        }
    }
    out
}

/// Unnormalized 2D DFT.
pub(crate) fn fft2(values: &mut [Complex64], nx: usize, np: usize) {
    map_rows(values, np, |_, row| spectral::fft(row));
    map_columns(values, nx, np, |_, col| spectral::fft(col));
}

/// Inverse 2D DFT including the `1/(nx np)` factor.
pub(crate) fn ifft2(values: &mut [Complex64], nx: usize, np: usize) {
    map_rows(values, np, |_, row| spectral::ifft(row));
    map_columns(values, nx, np, |_, col| spectral::ifft(col));
}

/// Spectral derivative along `x` (`axis = 0`) or `p` (`axis = 1`).
pub(crate) fn lattice_derivative(
    grid: &SymplecticGrid,
    values: &[Complex64],
    axis: usize,
    order: u8,
) -> Vec<Complex64> {
    let mut out = values.to_vec();
    match axis {
        0 => map_columns(&mut out, grid.nx, grid.np, |_, col| {
            let d = spectral::differentiate(col, grid.dx, order);
            col.copy_from_slice(&d);
        }),
        _ => map_rows(&mut out, grid.np, |_, row| {
            let d = spectral::differentiate(row, grid.dp, order);
            row.copy_from_slice(&d);
        }),
    }
    out
}

/// Least-squares slope of `log y` against `log x`; `None` when any `y` is zero.
pub(crate) fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if ys.iter().any(|y| !(*y > 0.0)) || xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Some(sxy / sxx)
}
