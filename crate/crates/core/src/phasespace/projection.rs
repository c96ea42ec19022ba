//! Momentum integrals of phase-space fields, compared against configuration-space fields.

use serde::{Deserialize, Serialize};

use super::moyal::{baker_energy_equation, moyal_bracket_h, Hamiltonian};
use super::wigner::wigner_transform;
use super::{Lattice, PhaseSpaceDistribution, SymplecticGrid};
use crate::error::{Error, Result};
use crate::field::WaveFunction;
use crate::madelung::DEFAULT_NODE_EPS;
use crate::solver::Trace;

/// Rows that coincide with configuration grid points.
fn config_rows(g: &SymplecticGrid) -> usize {
    match g.lattice {
        Lattice::Periodic => g.nx,
        Lattice::DirichletRing => g.nx / 2,
    }
}

/// `int f(x,p) dp` on the configuration rows.
fn p_integral(g: &SymplecticGrid, values: &[f64]) -> Vec<f64> {
    values
        .chunks(g.np)
        .take(config_rows(g))
        .map(|row| row.iter().sum::<f64>() * g.dp)
        .collect()
}

fn density_mask(rho: &[f64], eps: f64) -> Vec<bool> {
    let peak = rho.iter().fold(0.0_f64, |a, b| a.max(*b));
    rho.iter().map(|r| *r < eps * peak).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMomentum {
    pub x: Vec<f64>,
    /// `int F dp`.
    pub rho: Vec<f64>,
    /// `P_M = int p F dp / rho`; zero on the mask.
    pub momentum: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Conditional mean momentum `P_M(x)` of a distribution.
pub fn conditional_momentum(f: &PhaseSpaceDistribution) -> ConditionalMomentum {
    let g = &f.grid;
    let rows = config_rows(g);
    let rho = p_integral(g, &f.values);
    // the unpaired Nyquist column is left out, as in a spectral first derivative
    let first: Vec<f64> = (0..f.values.len())
        .map(|i| {
            if i % g.np == 0 {
                0.0
            } else {
                g.p(i % g.np) * f.values[i]
            }
        })
        .collect();
    let j = p_integral(g, &first);
    let mask = density_mask(&rho, DEFAULT_NODE_EPS);
    let momentum = (0..rows)
        .map(|i| if mask[i] { 0.0 } else { j[i] / rho[i] })
        .collect();
    ConditionalMomentum {
        x: (0..rows).map(|i| g.x(i)).collect(),
        rho,
        momentum,
        mask,
    }
}

/// `int (dF/dt - {H,F}_MB) dp` between two distributions, with the bracket at
/// their average. Equals the configuration-space continuity residual.
pub fn liouville_projection(
    prev: &PhaseSpaceDistribution,
    cur: &PhaseSpaceDistribution,
    h: &Hamiltonian,
) -> Result<Vec<f64>> {
    prev.grid.ensure_same(&cur.grid)?;
    let dt = cur.time - prev.time;
    if !(dt.abs() > 0.0) {
        return Err(Error::InvalidParameter("time slices must differ".into()));
    }
    let mid_values = prev
        .values
        .iter()
        .zip(&cur.values)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mid =
        PhaseSpaceDistribution::new(cur.grid.clone(), mid_values, 0.5 * (prev.time + cur.time))?;
    let mb = moyal_bracket_h(h, &mid)?;
    let integrand: Vec<f64> = (0..mb.len())
        .map(|i| (cur.values[i] - prev.values[i]) / dt - mb[i])
        .collect();
    Ok(p_integral(&cur.grid, &integrand))
}

/// `(1/2) int (E + 2{H,F}_BB) dp`, which is `rho` times the quantum
/// Hamilton-Jacobi residual.
pub fn qhj_projection(
    prev: &WaveFunction,
    cur: &WaveFunction,
    h: &Hamiltonian,
) -> Result<Vec<f64>> {
    let b = baker_energy_equation(prev, cur, h)?;
    Ok(p_integral(&b.residual.grid, &b.residual.values)
        .iter()
        .map(|v| 0.5 * v)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationProjection {
    /// Midpoint times of consecutive samples.
    pub times: Vec<f64>,
    pub liouville: Vec<Vec<f64>>,
    /// Density-weighted QHJ residual.
    pub qhj: Vec<Vec<f64>>,
    /// Conditional momentum at every sample.
    pub momentum: Vec<ConditionalMomentum>,
}

/// Wigner transform every sample of a trace and project the Moyal and Baker
/// equations back onto configuration space.
pub fn project_to_configuration(trace: &Trace, h: &Hamiltonian) -> Result<ConfigurationProjection> {
    let dists: Vec<PhaseSpaceDistribution> = trace
        .samples
        .iter()
        .map(wigner_transform)
        .collect::<Result<_>>()?;
    let mut out = ConfigurationProjection {
        times: Vec::new(),
        liouville: Vec::new(),
        qhj: Vec::new(),
        momentum: dists.iter().map(conditional_momentum).collect(),
    };
    for k in 1..dists.len() {
        out.times.push(0.5 * (dists[k - 1].time + dists[k].time));
        out.liouville
            .push(liouville_projection(&dists[k - 1], &dists[k], h)?);
        out.qhj
            .push(qhj_projection(&trace.samples[k - 1], &trace.samples[k], h)?);
    }
    Ok(out)
}
