//! Brackets with `H = p^2/2m + V(x)` and the Moyal and Baker evolution equations.
//!
//! For such `H` the star-product series in `p` terminates, and the potential
//! part acts on the `p`-Fourier modes `e^{i l p}` of `F` by evaluating `V` at
//! `x -+ hbar l/2`:
//!
//! * `{V,F}_MB -> (V(x - hbar l/2) - V(x + hbar l/2)) / (i hbar)`
//! * `{V,F}_BB -> (V(x - hbar l/2) + V(x + hbar l/2)) / 2`

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::wigner::cross_wigner;
use super::{
    lattice_derivative, map_columns, map_rows, Lattice, PhaseSpaceDistribution, SymplecticGrid,
};
use crate::error::{Error, Result};
use crate::field::WaveFunction;
use crate::grid::Grid;
use crate::potential::Potential;
use crate::solver::{EvolutionSpec, PHASE_GUARD};
use crate::spectral;
use crate::units::UnitSystem;

/// `H = p^2/2m + V(x)` on a 1D configuration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub potential: Potential,
    pub units: UnitSystem,
    pub grid: Grid,
}

impl Hamiltonian {
    pub fn new(potential: Potential, units: UnitSystem, grid: Grid) -> Result<Self> {
        if grid.dims() != 1 {
            return Err(Error::Unsupported("phase-space Hamiltonians are 1D".into()));
        }
        potential.validate(&grid)?;
        units.validate()?;
        Ok(Hamiltonian {
            potential,
            units,
            grid,
        })
    }

    pub fn mass(&self) -> f64 {
        self.units.mass(0)
    }

    fn check(&self, g: &SymplecticGrid) -> Result<()> {
        if (g.hbar - self.units.hbar).abs() > 0.0 {
            return Err(Error::InvalidUnits(format!(
                "lattice hbar {} differs from {}",
                g.hbar, self.units.hbar
            )));
        }
        if g.lattice == Lattice::DirichletRing
            && !matches!(self.potential, Potential::Box | Potential::Free)
        {
            return Err(Error::Unsupported(
                "only the box potential is defined on a Dirichlet ring".into(),
            ));
        }
        Ok(())
    }

    /// `V` on the periodic continuation of the lattice's `x` period.
    fn v(&self, g: &SymplecticGrid, x: f64) -> Result<f64> {
        if matches!(self.potential, Potential::Box | Potential::Free) {
            return Ok(0.0);
        }
        let xw = g.x_min + (x - g.x_min).rem_euclid(g.x_period());
        self.potential.value_at(&[xw], &self.units, &self.grid)
    }

    /// `(V(x - hbar l/2), V(x + hbar l/2))` for every row and `p`-frequency bin.
    fn shifted(&self, g: &SymplecticGrid) -> Result<Vec<(f64, f64)>> {
        self.check(g)?;
        let lambda = g.lambda();
        let mut out = Vec::with_capacity(g.len());
        for j in 0..g.nx {
            let x = g.x(j);
            for l in &lambda {
                let s = 0.5 * g.hbar * l;
                out.push((self.v(g, x - s)?, self.v(g, x + s)?));
            }
        }
        Ok(out)
    }
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

/// Multiply the `p`-spectrum of every row by `mult(row, bin)`.
fn p_multiply(
    g: &SymplecticGrid,
    f: &mut [Complex64],
    mult: impl Fn(usize, usize) -> Complex64 + Sync,
) {
    map_rows(f, g.np, |j, row| {
        spectral::fft(row);
        for (l, v) in row.iter_mut().enumerate() {
            *v *= mult(j, l);
        }
        spectral::ifft(row);
    });
}

/// `{H, F}_MB` for `H = p^2/2m + V`.
pub fn moyal_bracket_h(h: &Hamiltonian, f: &PhaseSpaceDistribution) -> Result<Vec<f64>> {
    let g = &f.grid;
    let shifted = h.shifted(g)?;
    let m = h.mass();
    let fc = to_complex(&f.values);
    let dx = lattice_derivative(g, &fc, 0, 1);
    let mut pot = fc;
    let ih = Complex64::new(0.0, g.hbar);
    p_multiply(g, &mut pot, |j, l| {
        if l == g.np / 2 {
            return Complex64::new(0.0, 0.0);
        }
        let (vm, vp) = shifted[j * g.np + l];
        Complex64::new(vm - vp, 0.0) / ih
    });
    Ok((0..g.len())
        .map(|i| -g.p(i % g.np) / m * dx[i].re + pot[i].re)
        .collect())
}

/// `{H, F}_BB` for `H = p^2/2m + V`.
pub fn baker_bracket_h(h: &Hamiltonian, f: &PhaseSpaceDistribution) -> Result<Vec<f64>> {
    let g = &f.grid;
    let shifted = h.shifted(g)?;
    let m = h.mass();
    let fc = to_complex(&f.values);
    let dxx = lattice_derivative(g, &fc, 0, 2);
    let mut pot = fc;
    p_multiply(g, &mut pot, |j, l| {
        let (vm, vp) = shifted[j * g.np + l];
        Complex64::new(0.5 * (vm + vp), 0.0)
    });
    let hb = g.hbar;
    Ok((0..g.len())
        .map(|i| {
            let p = g.p(i % g.np);
            p * p / (2.0 * m) * f.values[i] - hb * hb / (8.0 * m) * dxx[i].re + pot[i].re
        })
        .collect())
}

/// Advance `F` by `dF/dt = {H,F}_MB` with a Strang split: exact free shear for
/// half a step, the potential kick in the `p`-Fourier basis, another half shear.
///
/// The kick is `exp(-i dt (V(x - hbar l/2) - V(x + hbar l/2))/hbar)`; the step
/// guard is the one used by the split-operator solver.
pub fn evolve_moyal(
    f0: &PhaseSpaceDistribution,
    h: &Hamiltonian,
    spec: &EvolutionSpec,
) -> Result<Vec<PhaseSpaceDistribution>> {
    spec.validate()?;
    let g = &f0.grid;
    g.require_periodic("Moyal evolution")?;
    let shifted = h.shifted(g)?;
    let vmax = shifted
        .iter()
        .map(|(a, b)| a.abs().max(b.abs()))
        .fold(0.0, f64::max);
    let phase = spec.dt.abs() * vmax / g.hbar;
    if phase >= PHASE_GUARD {
        return Err(Error::Guard {
            guard: "phase",
            detail: format!("|dt| max|V| / hbar = {phase:.3} must stay below {PHASE_GUARD}"),
        });
    }
    let m = h.mass();
    let (nx, np) = (g.nx, g.np);
    let kappa = g.kappa();
    let half = 0.5 * spec.dt;
    let shear: Vec<Complex64> = (0..np)
        .flat_map(|col| {
            let p = g.p(col);
            kappa
                .iter()
                .enumerate()
                .map(move |(k, kap)| {
                    let a = kap * p * half / m;
                    if k == nx / 2 {
                        Complex64::new(a.cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, -a)
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let kick: Vec<Complex64> = shifted
        .iter()
        .enumerate()
        .map(|(i, (vm, vp))| {
            let a = spec.dt * (vm - vp) / g.hbar;
            if i % np == np / 2 {
                Complex64::new(a.cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -a)
            }
        })
        .collect();
    let shear_step = |buf: &mut [Complex64]| {
        map_columns(buf, nx, np, |col, lane| {
            spectral::fft(lane);
            for (k, v) in lane.iter_mut().enumerate() {
                *v *= shear[col * nx + k];
            }
            spectral::ifft(lane);
        });
    };
    let mut buf = to_complex(&f0.values);
    let mut out = vec![f0.clone()];
    for step in 1..=spec.n_steps {
        shear_step(&mut buf);
        map_rows(&mut buf, np, |j, row| {
            spectral::fft(row);
            for (l, v) in row.iter_mut().enumerate() {
                *v *= kick[j * np + l];
            }
            spectral::ifft(row);
        });
        shear_step(&mut buf);
        for v in buf.iter_mut() {
            v.im = 0.0;
        }
        if step % spec.sample_every == 0 || step == spec.n_steps {
            let values = buf.iter().map(|v| v.re).collect();
            out.push(PhaseSpaceDistribution::new(
                g.clone(),
                values,
                f0.time + step as f64 * spec.dt,
            )?);
        }
    }
    Ok(out)
}

/// Fields of the Baker energy equation at the midpoint of two slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BakerEnergy {
    /// Wigner function of the midpoint state.
    pub distribution: PhaseSpaceDistribution,
    /// `E(x,p) = 2 hbar Im W[psi, d_t psi]`, the transform of the two-way time-derivative kernel.
    pub energy: PhaseSpaceDistribution,
    /// `{H, F}_BB`.
    pub bracket: PhaseSpaceDistribution,
    /// `E + 2 {H, F}_BB`.
    pub residual: PhaseSpaceDistribution,
    /// Largest `|residual|` on weighted rows.
    pub max_residual: f64,
}

/// Evaluate the Baker energy equation between slices `prev` and `cur`, using
/// `(prev + cur)/2` and `(cur - prev)/dt` for the state and its time derivative.
pub fn baker_energy_equation(
    prev: &WaveFunction,
    cur: &WaveFunction,
    h: &Hamiltonian,
) -> Result<BakerEnergy> {
    prev.grid.ensure_same(&cur.grid)?;
    cur.grid.ensure_same(&h.grid)?;
    let dt = cur.time - prev.time;
    if !(dt.abs() > 0.0) {
        return Err(Error::InvalidParameter("time slices must differ".into()));
    }
    let mid_values: Vec<Complex64> = prev
        .values
        .iter()
        .zip(&cur.values)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let dot_values: Vec<Complex64> = prev
        .values
        .iter()
        .zip(&cur.values)
        .map(|(a, b)| (b - a) / dt)
        .collect();
    let time = 0.5 * (prev.time + cur.time);
    let mid = cur.with_values(mid_values, time);
    let dot = cur.with_values(dot_values, time);
    let w = cross_wigner(&mid, &mid)?;
    let g = w.grid.clone();
    let distribution =
        PhaseSpaceDistribution::new(g.clone(), w.values.iter().map(|v| v.re).collect(), time)?;
    let wd = cross_wigner(&mid, &dot)?;
    let hbar = g.hbar;
    let energy = PhaseSpaceDistribution::new(
        g.clone(),
        wd.values.iter().map(|v| 2.0 * hbar * v.im).collect(),
        time,
    )?;
    let bb = baker_bracket_h(h, &distribution)?;
    let residual: Vec<f64> = energy
        .values
        .iter()
        .zip(&bb)
        .map(|(e, b)| e + 2.0 * b)
        .collect();
    let residual = PhaseSpaceDistribution::new(g.clone(), residual, time)?;
    let max_residual = residual
        .weighted_rows()
        .flat_map(|(_, row)| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    Ok(BakerEnergy {
        distribution,
        energy,
        bracket: PhaseSpaceDistribution::new(g, bb, time)?,
        residual,
        max_residual,
    })
}
