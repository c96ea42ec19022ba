//! Position-post-selected weak values of momentum and squared momentum.
//!
//! Each field is computed twice: directly as the ratio `<x|A|psi> / <x|psi>`
//! and from the polar split. The direct ratio is defined wherever `psi != 0`;
//! the polar route only off the node mask.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{self, derivative, derivative_complex, Parity};
use crate::emtensor::COLLAR;
use crate::error::Result;
use crate::field::WaveFunction;
use crate::grid::{Boundary, Grid};
use crate::madelung::{collar, decompose, MadelungFields};

fn ratio(num: Complex64, den: Complex64) -> Complex64 {
    if den.norm_sqr() > 0.0 {
        num / den
    } else {
        Complex64::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakMomentumField {
    pub grid: Grid,
    /// Per axis `Re <P_j>_W = dS/dx_j` from the direct ratio.
    pub real_part: Vec<Vec<f64>>,
    /// Per axis `Im <P_j>_W = -hbar (d rho/dx_j) / 2 rho` from the direct ratio.
    pub imag_part: Vec<Vec<f64>>,
    /// Per axis real part from the polar split (Bohm momentum).
    pub madelung_real: Vec<Vec<f64>>,
    /// Per axis imaginary part from the derivative of the density field.
    pub madelung_imag: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    pub node_mask: Vec<bool>,
    /// Largest gap between the two routes outside the collared mask.
    pub route_discrepancy: f64,
}

/// Weak value of momentum along every axis.
pub fn weak_momentum(psi: &WaveFunction) -> Result<WeakMomentumField> {
    let fields = decompose(psi)?;
    weak_momentum_with(psi, &fields)
}

/// As [`weak_momentum`] reusing an existing decomposition of `psi`.
pub fn weak_momentum_with(
    psi: &WaveFunction,
    fields: &MadelungFields,
) -> Result<WeakMomentumField> {
    let grid = &psi.grid;
    let hbar = psi.hbar();
    let rho_parity = if grid.boundary() == Boundary::DirichletSine {
        Parity::Even
    } else {
        Parity::Odd
    };
    let mut real_part = Vec::new();
    let mut imag_part = Vec::new();
    let mut madelung_imag = Vec::new();
    let excluded = collar(grid, &fields.node_mask, COLLAR);
    let mut discrepancy: f64 = 0.0;
    for axis in 0..grid.dims() {
        let d1 = derivative_complex(grid, &psi.values, axis, 1, Parity::Odd)?;
        let w: Vec<Complex64> = d1
            .iter()
            .zip(&psi.values)
            .map(|(d, p)| ratio(*d * Complex64::new(0.0, -hbar), *p))
            .collect();
        let drho = derivative(grid, &fields.rho, axis, 1, rho_parity)?;
        let mi: Vec<f64> = drho
            .iter()
            .zip(&fields.rho)
            .zip(&fields.node_mask)
            .map(|((d, r), m)| if *m { 0.0 } else { -hbar * d / (2.0 * r) })
            .collect();
        for i in 0..grid.len() {
            if excluded[i] {
                continue;
            }
            discrepancy = discrepancy
                .max((w[i].re - fields.grad_s[axis][i]).abs())
                .max((w[i].im - mi[i]).abs());
        }
        real_part.push(w.iter().map(|v| v.re).collect());
        imag_part.push(w.iter().map(|v| v.im).collect());
        madelung_imag.push(mi);
    }
    Ok(WeakMomentumField {
        grid: grid.clone(),
        real_part,
        imag_part,
        madelung_real: fields.grad_s.clone(),
        madelung_imag,
        rho: fields.rho.clone(),
        node_mask: fields.node_mask.clone(),
        route_discrepancy: discrepancy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakP2Field {
    pub grid: Grid,
    /// `Re <P^2>_W = Re(-hbar^2 lap(psi) / psi)`.
    pub real_part: Vec<f64>,
    pub imag_part: Vec<f64>,
    /// `sum_j (dS/dx_j)^2 - hbar^2 (d_j^2 R)/R` off the mask.
    pub madelung_real: Vec<f64>,
    pub rho: Vec<f64>,
    pub node_mask: Vec<bool>,
    pub route_discrepancy: f64,
}

/// Weak value of `P^2 = sum_j P_j^2`.
pub fn weak_p_squared(psi: &WaveFunction) -> Result<WeakP2Field> {
    let fields = decompose(psi)?;
    let grid = &psi.grid;
    let hbar = psi.hbar();
    let mut lap = vec![Complex64::new(0.0, 0.0); grid.len()];
    for axis in 0..grid.dims() {
        for (l, d) in
            lap.iter_mut()
                .zip(derivative_complex(grid, &psi.values, axis, 2, Parity::Odd)?)
        {
            *l += d;
        }
    }
    let w: Vec<Complex64> = lap
        .iter()
        .zip(&psi.values)
        .map(|(l, p)| ratio(*l * (-hbar * hbar), *p))
        .collect();
    let mut madelung_real = vec![0.0; grid.len()];
    let excluded = collar(grid, &fields.node_mask, COLLAR);
    let mut discrepancy: f64 = 0.0;
    for i in 0..grid.len() {
        if fields.node_mask[i] {
            continue;
        }
        madelung_real[i] = (0..grid.dims())
            .map(|a| fields.grad_s[a][i].powi(2) - hbar * hbar * fields.curv_r_over_r[a][i])
            .sum();
        if !excluded[i] {
            discrepancy = discrepancy.max((madelung_real[i] - w[i].re).abs());
        }
    }
    Ok(WeakP2Field {
        grid: grid.clone(),
        real_part: w.iter().map(|v| v.re).collect(),
        imag_part: w.iter().map(|v| v.im).collect(),
        madelung_real,
        rho: fields.rho,
        node_mask: fields.node_mask,
        route_discrepancy: discrepancy,
    })
}

/// `int rho Re<A>_W dx`, optionally skipping masked points.
pub fn expectation_from_weak(
    grid: &Grid,
    rho: &[f64],
    weak_real: &[f64],
    mask: Option<&[bool]>,
) -> f64 {
    let prod: Vec<f64> = (0..grid.len())
        .map(|i| match mask {
            Some(m) if m[i] => 0.0,
            _ => rho[i] * weak_real[i],
        })
        .collect();
    calculus::integrate(grid, &prod)
}
