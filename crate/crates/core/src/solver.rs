//! Split-operator propagation of the Schrodinger equation and eigenstate preparation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::map_lanes;
use crate::error::{Error, Result};
use crate::field::WaveFunction;
use crate::grid::{Boundary, Grid};
use crate::potential::Potential;
use crate::spectral;
use crate::units::UnitSystem;

/// Largest allowed `|dt| max|V| / hbar` per step.
pub const PHASE_GUARD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    /// Time step; a negative step runs the dynamics backward.
    pub dt: f64,
    pub n_steps: usize,
    /// Record a sample every this many steps (the initial state is always recorded).
    pub sample_every: usize,
}

impl EvolutionSpec {
    pub fn new(dt: f64, n_steps: usize, sample_every: usize) -> Self {
        EvolutionSpec {
            dt,
            n_steps,
            sample_every,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be finite and nonzero, got {}",
                self.dt
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sampled history of an evolution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<WaveFunction>,
    pub norms: Vec<f64>,
    pub energies: Vec<f64>,
    /// Potential tabulated on the grid.
    pub potential: Vec<f64>,
    /// Solver step used to produce the trace.
    pub dt: f64,
}

impl Trace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn last(&self) -> &WaveFunction {
        self.samples
            .last()
            .expect("trace always holds the initial state")
    }

    pub fn grid(&self) -> &Grid {
        &self.samples[0].grid
    }
}

/// Strang splitter `e^{-zT/2} e^{-zV} e^{-zT/2}` with `z = i dt / hbar` (real time)
/// or `z = dtau / hbar` (imaginary time).
pub(crate) struct SplitOperator {
    grid: Grid,
    kinetic: Vec<Vec<Complex64>>,
    potential: Vec<Complex64>,
}

impl SplitOperator {
    pub(crate) fn new(grid: &Grid, units: &UnitSystem, v: &[f64], z: Complex64) -> Result<Self> {
        let hbar = units.hbar;
        let ring = match grid.boundary() {
            Boundary::Periodic => 1,
            Boundary::DirichletSine => 2,
            Boundary::Radial => {
                return Err(Error::Unsupported(
                    "split-operator evolution on a radial grid".into(),
                ))
            }
        };
        let kinetic = (0..grid.dims())
            .map(|ax| {
                let m = units.mass(ax);
                spectral::wavenumbers(ring * grid.axis(ax).n, grid.dx(ax))
                    .into_iter()
                    .map(|k| (-z * (hbar * hbar * k * k / (2.0 * m)) * 0.5).exp())
                    .collect()
            })
            .collect();
        let potential = v.iter().map(|&v| (-z * v).exp()).collect();
        Ok(SplitOperator {
            grid: grid.clone(),
            kinetic,
            potential,
        })
    }

    fn kinetic_half(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = values.to_vec();
        let dirichlet = self.grid.boundary() == Boundary::DirichletSine;
        for (ax, phase) in self.kinetic.iter().enumerate() {
            out = map_lanes(&self.grid, &out, ax, |lane| {
                let n = lane.len();
                let mut buf = if dirichlet {
                    let mut ring = vec![Complex64::new(0.0, 0.0); 2 * n];
                    ring[1..n].copy_from_slice(&lane[1..]);
                    for j in 1..n {
                        ring[2 * n - j] = -lane[j];
                    }
                    ring
                } else {
                    lane.to_vec()
                };
                spectral::fft(&mut buf);
                for (b, p) in buf.iter_mut().zip(phase) {
                    *b *= p;
                }
                spectral::ifft(&mut buf);
                buf.truncate(n);
                buf
            });
        }
        out
    }

    pub(crate) fn step(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.kinetic_half(values);
        for (o, p) in out.iter_mut().zip(&self.potential) {
            *o *= p;
        }
        self.kinetic_half(&out)
    }
}

fn phase_guard(dt: f64, v: &[f64], hbar: f64) -> Result<()> {
    let vmax = v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let phase = dt.abs() * vmax / hbar;
    if phase >= PHASE_GUARD {
        return Err(Error::Guard {
            guard: "phase-wrap",
            detail: format!("dt*max|V|/hbar = {phase:.4} must stay below {PHASE_GUARD} (dt = {dt}, max|V| = {vmax})"),
        });
    }
    Ok(())
}

/// Propagate `psi` under `H = sum_j p_j^2/2m_j + V` with Strang splitting.
pub fn evolve(psi: &WaveFunction, potential: &Potential, spec: &EvolutionSpec) -> Result<Trace> {
    spec.validate()?;
    psi.require_normalized(1e-8)?;
    let v = potential.sample(&psi.grid, &psi.units)?;
    evolve_tabulated(psi, &v, spec)
}

/// As [`evolve`] with the potential already tabulated on the grid.
pub fn evolve_tabulated(psi: &WaveFunction, v: &[f64], spec: &EvolutionSpec) -> Result<Trace> {
    spec.validate()?;
    phase_guard(spec.dt, v, psi.hbar())?;
    let op = SplitOperator::new(
        &psi.grid,
        &psi.units,
        v,
        Complex64::new(0.0, spec.dt / psi.hbar()),
    )?;
    let mut samples = vec![psi.clone()];
    let mut norms = vec![psi.norm()];
    let mut energies = vec![psi.energy(v)?];
    let mut cur = psi.values.clone();
    for step in 1..=spec.n_steps {
        cur = op.step(&cur);
        if step % spec.sample_every == 0 || step == spec.n_steps {
            let wf = psi.with_values(cur.clone(), psi.time + step as f64 * spec.dt);
            norms.push(wf.norm());
            energies.push(wf.energy(v)?);
            samples.push(wf);
        }
    }
    Ok(Trace {
        samples,
        norms,
        energies,
        potential: v.to_vec(),
        dt: spec.dt,
    })
}

/// Closed-form eigenfunction sampled on `grid` and normalized there.
///
/// `n` is the principal index: `n >= 1` for box, delta well and hydrogen
/// (only `n = 1` for the latter two), `n >= 0` for the harmonic oscillator.
pub fn prepare_eigenstate(
    grid: &Grid,
    units: &UnitSystem,
    potential: &Potential,
    n: usize,
) -> Result<WaveFunction> {
    potential.validate(grid)?;
    let unsupported = || {
        Err(Error::Unsupported(format!(
            "eigenstate {n} of a {} potential",
            potential.name()
        )))
    };
    let hbar = units.hbar;
    let m = units.mass(0);
    let psi = match potential {
        Potential::Box if n >= 1 && grid.dims() == 1 => {
            let a = grid.axis(0).length();
            let x0 = grid.axis(0).x_min;
            let amp = (2.0 / a).sqrt();
            WaveFunction::from_fn(grid, units, |c| {
                Complex64::new(amp * (n as f64 * PI * (c[0] - x0) / a).sin(), 0.0)
            })?
        }
        Potential::Harmonic { omega } if grid.dims() == 1 => {
            let s = (m * omega / hbar).sqrt();
            WaveFunction::from_fn(grid, units, |c| {
                Complex64::new(hermite_function(n, s * c[0]), 0.0)
            })?
        }
        Potential::DeltaWell { alpha, .. } if n == 1 && grid.dims() == 1 => {
            let a = *alpha;
            WaveFunction::from_fn(grid, units, |c| {
                Complex64::new(a.sqrt() * (-a * c[0].abs()).exp(), 0.0)
            })?
        }
        Potential::CoulombRadial { e2 } if n == 1 => {
            let b = m * e2 / (hbar * hbar);
            WaveFunction::from_fn(grid, units, |c| {
                Complex64::new(2.0 * b.powf(1.5) * c[0] * (-b * c[0]).exp(), 0.0)
            })?
        }
        _ => return unsupported(),
    };
    psi.normalized()
}

/// Exact eigenvalue matching [`prepare_eigenstate`].
pub fn eigen_energy(
    grid: &Grid,
    units: &UnitSystem,
    potential: &Potential,
    n: usize,
) -> Result<f64> {
    let hbar = units.hbar;
    let m = units.mass(0);
    match potential {
        Potential::Box if n >= 1 => {
            let a = grid.axis(0).length();
            Ok((n * n) as f64 * PI * PI * hbar * hbar / (2.0 * m * a * a))
        }
        Potential::Harmonic { omega } => Ok(hbar * omega * (n as f64 + 0.5)),
        Potential::DeltaWell { alpha, .. } if n == 1 => {
            Ok(-hbar * hbar * alpha * alpha / (2.0 * m))
        }
        Potential::CoulombRadial { e2 } if n == 1 => Ok(-m * e2 * e2 / (2.0 * hbar * hbar)),
        _ => Err(Error::Unsupported(format!(
            "eigenvalue {n} of a {} potential",
            potential.name()
        ))),
    }
}

/// Normalized Hermite function `psi_n(xi)` (unit-width oscillator), by stable recurrence.
fn hermite_function(n: usize, xi: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-xi * xi / 2.0).exp();
    for k in 0..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * xi * cur
            - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// First-order estimate of the energy shift caused by smearing a delta well of
/// strength `alpha` into a Gaussian of width `w`.
pub fn delta_well_regularization_shift(alpha: f64, w: f64, units: &UnitSystem) -> f64 {
    2.0 * (2.0 / PI).sqrt() * alpha.powi(3) * w * units.hbar * units.hbar / units.mass(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryTimeSpec {
    pub dtau: f64,
    pub max_steps: usize,
    /// Convergence threshold on the change of `<H>` between checks.
    pub tol: f64,
    pub check_every: usize,
}

impl Default for ImaginaryTimeSpec {
    fn default() -> Self {
        ImaginaryTimeSpec {
            dtau: 1e-3,
            max_steps: 200_000,
            tol: 1e-8,
            check_every: 50,
        }
    }
}

/// Ground state by imaginary-time relaxation, renormalized every step.
pub fn imaginary_time_ground_state(
    grid: &Grid,
    units: &UnitSystem,
    potential: &Potential,
    spec: &ImaginaryTimeSpec,
) -> Result<(WaveFunction, f64)> {
    let v = potential.sample(grid, units)?;
    phase_guard(spec.dtau, &v, units.hbar)?;
    let op = SplitOperator::new(grid, units, &v, Complex64::new(spec.dtau / units.hbar, 0.0))?;
    let centre: Vec<f64> = (0..grid.dims())
        .map(|ax| 0.5 * (grid.axis(ax).x_min + grid.axis(ax).x_max))
        .collect();
    let halfw: Vec<f64> = (0..grid.dims())
        .map(|ax| 0.25 * grid.axis(ax).length())
        .collect();
    let mut psi = WaveFunction::from_fn(grid, units, |c| {
        let r2: f64 = c
            .iter()
            .zip(&centre)
            .zip(&halfw)
            .map(|((x, c), w)| ((x - c) / w).powi(2))
            .sum();
        Complex64::new((-r2).exp(), 0.0)
    })?
    .normalized()?;
    let mut last = psi.energy(&v)?;
    let mut change = f64::INFINITY;
    let mut step = 0;
    while step < spec.max_steps {
        for _ in 0..spec.check_every {
            psi.values = op.step(&psi.values);
            psi = psi.normalized()?;
        }
        step += spec.check_every;
        let e = psi.energy(&v)?;
        change = (e - last).abs();
        last = e;
        if change < spec.tol {
            return Ok((psi, e));
        }
    }
    Err(Error::NoConvergence {
        iterations: step,
        last_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::integrate;

    #[test]
    fn box_second_state_has_central_node() {
        let g = Grid::dirichlet(256, 0.0, 1.0).unwrap();
        let psi = prepare_eigenstate(&g, &UnitSystem::default(), &Potential::Box, 2).unwrap();
        assert!(psi.values[128].norm() < 1e-10);
    }

    #[test]
    fn delta_well_samples() {
        let g = Grid::periodic(1024, -16.0, 16.0).unwrap();
        let psi = prepare_eigenstate(
            &g,
            &UnitSystem::default(),
            &Potential::DeltaWell {
                alpha: 1.0,
                width: None,
            },
            1,
        )
        .unwrap();
        // grid normalization of the cusp shifts the amplitude by O(dx^2)
        assert!((psi.values[512].re - 1.0).abs() < 1e-3);
        assert!((psi.values[512 + 32].re / psi.values[512].re - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn hydrogen_energy() {
        let g = Grid::radial(1024, 20.5).unwrap();
        let u = UnitSystem::default().with_coupling("e2", 1.0);
        let e = eigen_energy(&g, &u, &Potential::CoulombRadial { e2: 1.0 }, 1).unwrap();
        assert_eq!(e, -0.5);
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let g = Grid::periodic(256, -12.0, 12.0).unwrap();
        let u = UnitSystem::default();
        let h = Potential::Harmonic { omega: 1.0 };
        let a = prepare_eigenstate(&g, &u, &h, 3).unwrap();
        let b = prepare_eigenstate(&g, &u, &h, 4).unwrap();
        let ov: Vec<f64> = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(a, b)| (a.conj() * b).re)
            .collect();
        assert!(integrate(&g, &ov).abs() < 1e-10);
        let v = h.sample(&g, &u).unwrap();
        assert!((a.energy(&v).unwrap() - 3.5).abs() < 1e-9);
    }

    #[test]
    fn unsupported_combination() {
        let g = Grid::periodic(64, -1.0, 1.0).unwrap();
        assert!(prepare_eigenstate(&g, &UnitSystem::default(), &Potential::Free, 1).is_err());
    }

    #[test]
    fn phase_guard_trips() {
        let g = Grid::periodic(64, -10.0, 10.0).unwrap();
        let u = UnitSystem::default();
        let psi = WaveFunction::gaussian(&g, &u, 0.0, 0.0, 1.0).unwrap();
        let err = evolve(
            &psi,
            &Potential::Harmonic { omega: 1.0 },
            &EvolutionSpec::new(0.1, 1, 1),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Guard {
                guard: "phase-wrap",
                ..
            }
        ));
    }

    #[test]
    fn rejects_unnormalized() {
        let g = Grid::periodic(64, -10.0, 10.0).unwrap();
        let u = UnitSystem::default();
        let mut psi = WaveFunction::gaussian(&g, &u, 0.0, 0.0, 1.0).unwrap();
        psi.values.iter_mut().for_each(|v| *v *= 2.0);
        assert!(evolve(&psi, &Potential::Free, &EvolutionSpec::new(1e-3, 1, 1)).is_err());
    }
}
