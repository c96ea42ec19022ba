//! Momentum density, energy terms and the local conservation residuals of the
//! Schrodinger field.
//!
//! The momentum density is taken as `T^{0j} = rho dS/dx_j`, so that
//! `T^{0j} / rho` is the Bohm momentum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{self, check_len, derivative, Parity};
use crate::error::Result;
use crate::grid::{Boundary, Grid};
use crate::madelung::{collar, decompose, velocities, MadelungFields, VelocityFields};
use crate::solver::Trace;
use crate::spectral;

/// Width of the exclusion band around masked points used by residual norms.
pub const COLLAR: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorComponents {
    /// Per axis `rho dS/dx_j`.
    pub t0j: Vec<Vec<f64>>,
    /// `rho E_B`.
    pub t00_term: Vec<f64>,
    /// `sum_j (dS/dx_j)^2 / 2 m_j`.
    pub kinetic_energy: Vec<f64>,
    /// `sum_j hbar^2 (dR/dx_j)^2 / (2 m_j R^2)`.
    pub osmotic_ke: Vec<f64>,
    pub qpe: Vec<f64>,
    /// `V rho`.
    pub potential_energy: Vec<f64>,
    pub node_mask: Vec<bool>,
}

/// Assemble the tensor components at the midpoint described by `vel`.
pub fn tensor_components(vel: &VelocityFields, potential: &[f64]) -> Result<TensorComponents> {
    check_len(&vel.grid, potential)?;
    let n = vel.grid.len();
    let dims = vel.grid.dims();
    let t0j = (0..dims)
        .map(|a| {
            vel.rho
                .iter()
                .zip(&vel.p_bohm[a])
                .map(|(r, p)| r * p)
                .collect()
        })
        .collect();
    let t00_term = vel
        .rho
        .iter()
        .zip(&vel.e_bohm)
        .map(|(r, e)| r * e)
        .collect();
    let mut kinetic_energy = vec![0.0; n];
    let mut osmotic_ke = vec![0.0; n];
    for a in 0..dims {
        let m = vel.units.mass(a);
        for i in 0..n {
            kinetic_energy[i] += vel.p_bohm[a][i].powi(2) / (2.0 * m);
            osmotic_ke[i] += 0.5 * m * vel.v_osmotic[a][i].powi(2);
        }
    }
    let potential_energy = vel.rho.iter().zip(potential).map(|(r, v)| r * v).collect();
    Ok(TensorComponents {
        t0j,
        t00_term,
        kinetic_energy,
        osmotic_ke,
        qpe: vel.quantum_potential.clone(),
        potential_energy,
        node_mask: vel.node_mask.clone(),
    })
}

/// Single-slice energy terms: `(sum_j (dS_j)^2/2m_j, sum_j hbar^2 (R_j/R)^2 / 2m_j)`.
pub fn slice_energy_terms(fields: &MadelungFields) -> (Vec<f64>, Vec<f64>) {
    let n = fields.grid.len();
    let mut ke = vec![0.0; n];
    let mut ok = vec![0.0; n];
    let hbar = fields.hbar();
    for a in 0..fields.grid.dims() {
        let m = fields.mass(a);
        for i in 0..n {
            ke[i] += fields.grad_s[a][i].powi(2) / (2.0 * m);
            ok[i] += hbar * hbar * fields.grad_r_over_r[a][i].powi(2) / (2.0 * m);
        }
    }
    (ke, ok)
}

/// `int rho (KE_B + osmotic KE + V) dx`, which equals `<H>` for a normalized state.
pub fn field_energy(fields: &MadelungFields, potential: &[f64]) -> f64 {
    let (ke, ok) = slice_energy_terms(fields);
    let dens: Vec<f64> = (0..fields.grid.len())
        .map(|i| fields.rho[i] * (ke[i] + ok[i] + potential[i]))
        .collect();
    calculus::integrate(&fields.grid, &dens)
}

/// `dS/dt + sum_j (dS/dx_j)^2/2m_j + Q + V` at the midpoint; zero on the mask.
pub fn qhj_residual(vel: &VelocityFields, potential: &[f64]) -> Result<Vec<f64>> {
    check_len(&vel.grid, potential)?;
    let n = vel.grid.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        if vel.node_mask[i] {
            continue;
        }
        let ke: f64 = (0..vel.grid.dims())
            .map(|a| vel.p_bohm[a][i].powi(2) / (2.0 * vel.units.mass(a)))
            .sum();
        out[i] = -vel.e_bohm[i] + ke + vel.quantum_potential[i] + potential[i];
    }
    Ok(out)
}

/// `d rho/dt + sum_j d/dx_j (rho dS/dx_j / m_j)` between two slices, defined everywhere.
pub fn liouville_residual(cur: &MadelungFields, prev: &MadelungFields) -> Result<Vec<f64>> {
    cur.grid.ensure_same(&prev.grid)?;
    let dt = cur.time - prev.time;
    let mut out: Vec<f64> = cur
        .rho
        .iter()
        .zip(&prev.rho)
        .map(|(a, b)| (a - b) / dt)
        .collect();
    for a in 0..cur.grid.dims() {
        let m = cur.mass(a);
        let flux: Vec<f64> = cur.current[a]
            .iter()
            .zip(&prev.current[a])
            .map(|(c, p)| 0.5 * (c + p) / m)
            .collect();
        let div = derivative(&cur.grid, &flux, a, 1, Parity::Odd)?;
        for (o, d) in out.iter_mut().zip(div) {
            *o += d;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ResidualNorms {
    pub l2: f64,
    pub linf: f64,
}

impl ResidualNorms {
    pub fn max(self, other: ResidualNorms) -> ResidualNorms {
        ResidualNorms {
            l2: self.l2.max(other.l2),
            linf: self.linf.max(other.linf),
        }
    }
}

/// L2 and L-infinity norms over points outside `mask` dilated by [`COLLAR`].
pub fn residual_norms(grid: &Grid, residual: &[f64], mask: &[bool]) -> ResidualNorms {
    let excluded = collar(grid, mask, COLLAR);
    let mut sq = 0.0;
    let mut linf: f64 = 0.0;
    for ((r, m), _) in residual.iter().zip(&excluded).zip(0..) {
        if *m {
            continue;
        }
        sq += r * r;
        linf = linf.max(r.abs());
    }
    ResidualNorms {
        l2: (sq * grid.cell_volume()).sqrt(),
        linf,
    }
}

/// `<P_j>` computed in momentum space. Dirichlet fields are transformed on their odd ring.
pub fn spectral_momentum(psi: &crate::WaveFunction, axis: usize) -> Option<f64> {
    spectral_moment(psi, axis, 1)
}

/// `<P_j^power>` for `power` 1 or 2 from the momentum-space density, matching the
/// differentiation conventions (the Nyquist bin is dropped for odd powers).
pub fn spectral_moment(psi: &crate::WaveFunction, axis: usize, power: i32) -> Option<f64> {
    let grid = &psi.grid;
    let ring = match grid.boundary() {
        Boundary::Periodic => 1,
        Boundary::DirichletSine => 2,
        Boundary::Radial => return None,
    };
    let n = grid.axis(axis).n;
    let k = spectral::wavenumbers(ring * n, grid.dx(axis));
    let hbar = psi.hbar();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut buf = vec![Complex64::new(0.0, 0.0); ring * n];
    let stride = grid.stride(axis);
    let outer = grid.len() / (n * stride);
    for o in 0..outer {
        for s in 0..stride {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for i in 0..n {
                buf[i] = psi.values[o * n * stride + s + i * stride];
            }
            if ring == 2 {
                for j in 1..n {
                    buf[2 * n - j] = -buf[j];
                }
            }
            spectral::fft(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                let w = b.norm_sqr();
                den += w;
                if power % 2 == 0 || j != ring * n / 2 {
                    num += (hbar * k[j]).powi(power) * w;
                }
            }
        }
    }
    Some(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    /// Per sample, per axis `int T^{0j} dx`.
    pub global_momentum: Vec<Vec<f64>>,
    /// Per sample, per axis `<psi|P_j|psi>` from momentum space (absent on radial grids).
    pub spectral_momentum: Vec<Vec<f64>>,
    /// Largest `|int T^{0j} - <P_j>|` over the run.
    pub momentum_mismatch: f64,
    /// Largest `|int d rho/dx_j dx|` over the run.
    pub osmotic_integral: f64,
    pub global_norm_drift: f64,
    pub global_energy_drift: f64,
    /// Largest `|int liouville - dN/dt|` over consecutive sample pairs.
    pub liouville_integral_error: f64,
    pub qhj: ResidualNorms,
    pub liouville: ResidualNorms,
}

/// Global conservation statistics and worst-case residual norms over a trace.
///
/// Residuals are evaluated between consecutive samples, so the trace should be
/// sampled at the solver step for tight bounds.
pub fn global_checks(trace: &Trace) -> Result<ConservationReport> {
    let grid = trace.grid().clone();
    let decs: Vec<MadelungFields> = trace.samples.iter().map(decompose).collect::<Result<_>>()?;
    let dims = grid.dims();
    let mut global_momentum = Vec::new();
    let mut spectral = Vec::new();
    let mut momentum_mismatch: f64 = 0.0;
    let mut osmotic_integral: f64 = 0.0;
    for (psi, f) in trace.samples.iter().zip(&decs) {
        let gm: Vec<f64> = (0..dims)
            .map(|a| calculus::integrate(&grid, &f.current[a]))
            .collect();
        let sm: Vec<f64> = (0..dims)
            .filter_map(|a| spectral_momentum(psi, a))
            .collect();
        for (g, s) in gm.iter().zip(&sm) {
            momentum_mismatch = momentum_mismatch.max((g - s).abs());
        }
        for a in 0..dims {
            let parity = if grid.boundary() == Boundary::DirichletSine {
                Parity::Even
            } else {
                Parity::Odd
            };
            let d = derivative(&grid, &f.rho, a, 1, parity)?;
            osmotic_integral = osmotic_integral.max(calculus::integrate(&grid, &d).abs());
        }
        global_momentum.push(gm);
        spectral.push(sm);
    }
    let n0 = trace.norms[0];
    let global_norm_drift = trace
        .norms
        .iter()
        .map(|n| (n - n0).abs())
        .fold(0.0, f64::max);
    let e0 = trace.energies[0];
    let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
    let global_energy_drift = trace
        .energies
        .iter()
        .map(|e| (e - e0).abs() / scale)
        .fold(0.0, f64::max);
    let mut qhj = ResidualNorms::default();
    let mut liouville = ResidualNorms::default();
    let mut liouville_integral_error: f64 = 0.0;
    for w in 0..decs.len().saturating_sub(1) {
        let (prev, cur) = (&decs[w], &decs[w + 1]);
        let vel = velocities(cur, prev)?;
        let q = qhj_residual(&vel, &trace.potential)?;
        qhj = qhj.max(residual_norms(&grid, &q, &vel.node_mask));
        let l = liouville_residual(cur, prev)?;
        liouville = liouville.max(residual_norms(&grid, &l, &vel.node_mask));
        let dn = (trace.norms[w + 1] - trace.norms[w]) / (cur.time - prev.time);
        liouville_integral_error =
            liouville_integral_error.max((calculus::integrate(&grid, &l) - dn).abs());
    }
    Ok(ConservationReport {
        times: trace.times(),
        global_momentum,
        spectral_momentum: spectral,
        momentum_mismatch,
        osmotic_integral,
        global_norm_drift,
        global_energy_drift,
        liouville_integral_error,
        qhj,
        liouville,
    })
}
