use std::f64::consts::PI;

use num_complex::Complex64;

use super::{map_rows, PhaseSpaceDistribution, Symbol, SymplecticGrid};
use crate::error::{Error, Result};
use crate::field::WaveFunction;
use crate::grid::Boundary;
use crate::spectral;

/// Imaginary residue tolerated before the transform is declared non-real, relative to `max |F|`.
const REALITY_TOL: f64 = 1e-12;

/// Values of `psi` on the transform ring: the grid itself when periodic, the
/// odd extension across both walls when Dirichlet.
fn ring(psi: &WaveFunction) -> Vec<Complex64> {
    match psi.grid.boundary() {
        Boundary::DirichletSine => {
            let n = psi.values.len();
            let mut u = vec![Complex64::new(0.0, 0.0); 2 * n];
            u[..n].copy_from_slice(&psi.values);
            for j in 1..n {
                u[2 * n - j] = -psi.values[j];
            }
            u
        }
        _ => psi.values.clone(),
    }
}

/// Band-limited interpolation onto the half-spaced ring (length `2 len`); the
/// Nyquist bin is dropped.
fn upsample(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    let mut spec = u.to_vec();
    spectral::fft(&mut spec);
    let mut wide = vec![Complex64::new(0.0, 0.0); 2 * n];
    for (j, v) in spec.iter().enumerate() {
        let k = spectral::signed_index(j, n);
        if k == -(n as i64) / 2 {
            continue;
        }
        wide[k.rem_euclid(2 * n as i64) as usize] = *v;
    }
    spectral::ifft(&mut wide);
    wide.iter().map(|v| v * 2.0).collect()
}

fn check_pair(f: &WaveFunction, g: &WaveFunction) -> Result<()> {
    f.grid.ensure_same(&g.grid)?;
    if (f.hbar() - g.hbar()).abs() > 0.0 {
        return Err(Error::InvalidUnits("states carry different hbar".into()));
    }
    Ok(())
}

/// Cross-Wigner transform
/// `W[f,g](x,p) = (1/2 pi hbar) int f*(x - y/2) g(x + y/2) e^{-i p y/hbar} dy`
/// on the lattice dual to the states' grid.
pub fn cross_wigner(f: &WaveFunction, g: &WaveFunction) -> Result<Symbol> {
    check_pair(f, g)?;
    let hbar = f.hbar();
    let grid = SymplecticGrid::dual(&f.grid, hbar)?;
    let vf = upsample(&ring(f));
    let vg = upsample(&ring(g));
    let r = grid.nx;
    let two_r = 2 * r as i64;
    let half = r as i64 / 2;
    let scale = grid.dx / (2.0 * PI * hbar);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    map_rows(&mut values, grid.np, |j, row| {
        let c = |k: i64| {
            let lo = (2 * j as i64 - k).rem_euclid(two_r) as usize;
            let hi = (2 * j as i64 + k).rem_euclid(two_r) as usize;
            vf[lo].conj() * vg[hi]
        };
        for k in -half..half {
            // (-1)^k recentres the p axis on zero
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let ck = if k == -half {
                0.5 * (c(-half) + c(half))
            } else {
                c(k)
            };
            row[k.rem_euclid(r as i64) as usize] = ck * sign;
        }
        spectral::fft(row);
        for v in row.iter_mut() {
            *v *= scale;
        }
    });
    Symbol::new(grid, values)
}

/// Wigner distribution of a pure state on a periodic or Dirichlet 1D grid.
pub fn wigner_transform(psi: &WaveFunction) -> Result<PhaseSpaceDistribution> {
    let w = cross_wigner(psi, psi)?;
    let peak = w.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let residue = w.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if residue > REALITY_TOL * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::Guard {
            guard: "wigner-reality",
            detail: format!("imaginary residue {residue:e} against peak {peak:e}"),
        });
    }
    PhaseSpaceDistribution::new(w.grid, w.values.iter().map(|v| v.re).collect(), psi.time)
}
