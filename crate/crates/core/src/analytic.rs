//! Closed-form stationary systems used as oracles by the other modules.
//!
//! Each [`OracleCase`] bundles a grid, a potential, the exact state and a list
//! of [`Expectation`]s: closed-form callables for local fields together with a
//! tolerance and the region where they are checked. [`OracleCase::check`] runs
//! the state through the Madelung, tensor and weak-value code and reports the
//! largest deviation for every expectation.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::emtensor::tensor_components;
use crate::error::{Error, Result};
use crate::field::WaveFunction;
use crate::grid::{DerivativeScheme, Grid};
use crate::madelung::{decompose, velocities};
use crate::potential::Potential;
use crate::solver::{evolve, prepare_eigenstate, EvolutionSpec};
use crate::units::UnitSystem;
use crate::weak::weak_p_squared;

/// Local quantity compared against a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    QuantumPotential,
    /// `Q + V`.
    LocalEnergy,
    /// `dQ/dx + dV/dx`.
    ForceBalance,
    BohmMomentum,
    BohmEnergy,
    /// `T^{0j} = rho dS/dx_j`.
    MomentumDensity,
    /// `Re <P^2>_W / 2m`.
    WeakKinetic,
    /// `d^2 Q / dx1 dx2` at the origin.
    CrossDerivative,
    /// `Q(x1, x2) - Q(x1, 0) - Q(0, x2) + Q(0, 0)`.
    NonSeparable,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::QuantumPotential => "Q",
            Quantity::LocalEnergy => "Q+V",
            Quantity::ForceBalance => "grad Q + grad V",
            Quantity::BohmMomentum => "P_B",
            Quantity::BohmEnergy => "E_B",
            Quantity::MomentumDensity => "T0j",
            Quantity::WeakKinetic => "Re<P^2>_W/2m",
            Quantity::CrossDerivative => "d2Q/dx1dx2",
            Quantity::NonSeparable => "Q non-separable part",
        }
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Textbook closed form of the stationary state.
    ClosedForm,
    /// Differentiating the closed form by hand.
    Symbolic,
    /// Follows from symmetry or reality of the state.
    Identity,
}

pub type PointFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type Region = Box<dyn Fn(&[f64]) -> bool + Send + Sync>;

pub struct Expectation {
    pub quantity: Quantity,
    pub expected: PointFn,
    pub tolerance: f64,
    pub basis: Basis,
    pub region: Region,
}

impl fmt::Debug for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expectation")
            .field("quantity", &self.quantity)
            .field("tolerance", &self.tolerance)
            .field("basis", &self.basis)
            .finish_non_exhaustive()
    }
}

fn expect(
    quantity: Quantity,
    tolerance: f64,
    basis: Basis,
    expected: PointFn,
    region: Region,
) -> Expectation {
    Expectation {
        quantity,
        expected,
        tolerance,
        basis,
        region,
    }
}

fn constant(v: f64) -> PointFn {
    Box::new(move |_| v)
}

fn everywhere() -> Region {
    Box::new(|_| true)
}

#[derive(Debug)]
pub struct OracleCase {
    pub name: String,
    pub grid: Grid,
    pub units: UnitSystem,
    pub potential: Potential,
    pub psi: WaveFunction,
    pub energy: f64,
    /// Solver step used to sample `E_B`, `P_B` and the tensor over one step.
    /// `None` when the state is checked as a single slice: radial grids, and
    /// closed forms that are not exact eigenstates of the discretized problem.
    pub dt: Option<f64>,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub case: String,
    pub quantity: Quantity,
    pub max_error: f64,
    pub tolerance: f64,
    pub points: usize,
    pub basis: Basis,
    pub passed: bool,
}

impl OracleCase {
    /// Measure every expectation.
    pub fn check(&self) -> Result<Vec<CheckOutcome>> {
        let grid = &self.grid;
        let f = decompose(&self.psi)?;
        let q = f.quantum_potential();
        let v = self.potential.sample(grid, &self.units)?;
        let vel = match self.dt {
            Some(dt) => {
                let tr = evolve(&self.psi, &self.potential, &EvolutionSpec::new(dt, 1, 1))?;
                Some(velocities(
                    &decompose(&tr.samples[1])?,
                    &decompose(&tr.samples[0])?,
                )?)
            }
            None => None,
        };
        let dims = grid.dims();
        let mut out = Vec::new();
        for e in &self.expectations {
            let fields: Vec<Vec<f64>> = match e.quantity {
                Quantity::QuantumPotential => vec![q.clone()],
                Quantity::LocalEnergy => vec![q.iter().zip(&v).map(|(q, v)| q + v).collect()],
                Quantity::ForceBalance => (0..dims)
                    .map(|a| {
                        let force = f.quantum_force(a)?;
                        (0..grid.len())
                            .map(|i| {
                                Ok(self.potential.gradient_at(
                                    &grid.coords(i),
                                    &self.units,
                                    grid,
                                )?[a]
                                    - force[i])
                            })
                            .collect()
                    })
                    .collect::<Result<_>>()?,
                Quantity::BohmMomentum => match &vel {
                    Some(vel) => vel.p_bohm.clone(),
                    None => f.grad_s.clone(),
                },
                Quantity::MomentumDensity => match &vel {
                    Some(vel) => tensor_components(vel, &v)?.t0j,
                    None => f
                        .grad_s
                        .iter()
                        .map(|g| g.iter().zip(&f.rho).map(|(g, r)| g * r).collect())
                        .collect(),
                },
                Quantity::BohmEnergy => match &vel {
                    Some(vel) => vec![vel.e_bohm.clone()],
                    None => return Err(Error::Unsupported("E_B needs a time-stepped case".into())),
                },
                Quantity::WeakKinetic => {
                    let w = weak_p_squared(&self.psi)?;
                    let m = self.units.mass(0);
                    vec![w.real_part.iter().map(|p| p / (2.0 * m)).collect()]
                }
                Quantity::CrossDerivative => {
                    let got = cross_derivative_at_origin(grid, &q)?;
                    let err = (got - (e.expected)(&[0.0, 0.0])).abs();
                    out.push(self.outcome(e, err, 1));
                    continue;
                }
                Quantity::NonSeparable => vec![non_separable(grid, &q)?],
            };
            let mut err: f64 = 0.0;
            let mut points = 0;
            for i in 0..grid.len() {
                if f.node_mask[i] {
                    continue;
                }
                let c = grid.coords(i);
                if !(e.region)(&c) {
                    continue;
                }
                let want = (e.expected)(&c);
                for field in &fields {
                    err = err.max((field[i] - want).abs());
                }
                points += 1;
            }
            out.push(self.outcome(e, err, points));
        }
        Ok(out)
    }

    fn outcome(&self, e: &Expectation, max_error: f64, points: usize) -> CheckOutcome {
        CheckOutcome {
            case: self.name.clone(),
            quantity: e.quantity,
            max_error,
            tolerance: e.tolerance,
            points,
            basis: e.basis,
            passed: points > 0 && max_error <= e.tolerance,
        }
    }
}

fn origin_index(grid: &Grid, axis: usize) -> Result<usize> {
    let ax = grid.axis(axis);
    let s = -ax.x_min / ax.dx();
    if (s - s.round()).abs() > 1e-9 || s < 2.0 || s.round() as usize + 2 >= ax.n {
        return Err(Error::InvalidParameter(
            "the origin must be an interior grid point".into(),
        ));
    }
    Ok(s.round() as usize)
}

/// Mixed derivative at the origin by Richardson-extrapolated central differences.
fn cross_derivative_at_origin(grid: &Grid, q: &[f64]) -> Result<f64> {
    if grid.dims() != 2 {
        return Err(Error::Unsupported("cross derivative on a 1D grid".into()));
    }
    let (i0, j0) = (origin_index(grid, 0)?, origin_index(grid, 1)?);
    let at = |di: isize, dj: isize| {
        q[grid.ravel(&[(i0 as isize + di) as usize, (j0 as isize + dj) as usize])]
    };
    let h2 = grid.dx(0) * grid.dx(1);
    let d =
        |s: isize| (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4.0 * (s * s) as f64 * h2);
    Ok((4.0 * d(1) - d(2)) / 3.0)
}

fn non_separable(grid: &Grid, q: &[f64]) -> Result<Vec<f64>> {
    if grid.dims() != 2 {
        return Err(Error::Unsupported("separability test on a 1D grid".into()));
    }
    let (i0, j0) = (origin_index(grid, 0)?, origin_index(grid, 1)?);
    let q00 = q[grid.ravel(&[i0, j0])];
    Ok((0..grid.len())
        .map(|k| {
            let idx = grid.unravel(k);
            q[k] - q[grid.ravel(&[idx[0], j0])] - q[grid.ravel(&[i0, idx[1]])] + q00
        })
        .collect())
}

/// Particle in a box of width `a`, level `n`, on 256 points.
pub fn case_box(n: usize, a: f64, units: &UnitSystem) -> Result<OracleCase> {
    if n == 0 || !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "box needs n >= 1 and a > 0, got n = {n}, a = {a}"
        )));
    }
    let grid = Grid::dirichlet(256, 0.0, a)?;
    let psi = prepare_eigenstate(&grid, units, &Potential::Box, n)?;
    let e = box_energy(n, a, units);
    let dx = grid.dx(0);
    let spacing = a / n as f64;
    let away_from_nodes = move |c: &[f64]| {
        let r = c[0] / spacing;
        (r - r.round()).abs() * spacing >= 2.0 * dx - 1e-12
    };
    Ok(OracleCase {
        name: format!("box-n{n}"),
        grid,
        units: units.clone(),
        potential: Potential::Box,
        psi,
        energy: e,
        dt: Some(1e-4),
        expectations: vec![
            expect(
                Quantity::QuantumPotential,
                1e-6,
                Basis::ClosedForm,
                constant(e),
                Box::new(away_from_nodes),
            ),
            expect(
                Quantity::BohmMomentum,
                1e-10,
                Basis::Identity,
                constant(0.0),
                everywhere(),
            ),
            expect(
                Quantity::MomentumDensity,
                1e-10,
                Basis::Identity,
                constant(0.0),
                everywhere(),
            ),
            expect(
                Quantity::BohmEnergy,
                1e-8 * e.max(1.0),
                Basis::ClosedForm,
                constant(e),
                everywhere(),
            ),
        ],
    })
}

/// `n^2 hbar^2 pi^2 / 2 m a^2`.
pub fn box_energy(n: usize, a: f64, units: &UnitSystem) -> f64 {
    (n * n) as f64 * units.hbar * units.hbar * PI * PI / (2.0 * units.mass(0) * a * a)
}

/// Bound state of an attractive delta well of strength `alpha`.
///
/// The well is a Gaussian of width `4 dx` on 1024 points over `|x| < 16/alpha`
/// with fourth-order finite differences, which keeps the cusp free of ringing.
pub fn case_delta_well(alpha: f64, units: &UnitSystem) -> Result<OracleCase> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let l = 16.0 / alpha;
    let grid = Grid::periodic(1024, -l, l)?.with_scheme(DerivativeScheme::FiniteDifference4)?;
    let potential = Potential::DeltaWell { alpha, width: None };
    let psi = prepare_eigenstate(&grid, units, &potential, 1)?;
    let e = -units.hbar * units.hbar * alpha * alpha / (2.0 * units.mass(0));
    let w = potential.delta_width(&grid).unwrap_or_default();
    Ok(OracleCase {
        name: "delta-well".into(),
        grid,
        units: units.clone(),
        potential,
        psi,
        energy: e,
        dt: None,
        expectations: vec![
            expect(
                Quantity::WeakKinetic,
                1e-5 * e.abs().max(1.0),
                Basis::ClosedForm,
                constant(e),
                Box::new(move |c| c[0].abs() > 3.0 * w),
            ),
            expect(
                Quantity::BohmMomentum,
                1e-10,
                Basis::Identity,
                constant(0.0),
                everywhere(),
            ),
            expect(
                Quantity::MomentumDensity,
                1e-10,
                Basis::Identity,
                constant(0.0),
                everywhere(),
            ),
        ],
    })
}

/// Hydrogen ground state as the reduced radial function `u = r R` with
/// reduced mass `mu` (the units' mass is replaced) and coupling `e2`.
pub fn case_hydrogen_1s(mu: f64, e2: f64, units: &UnitSystem) -> Result<OracleCase> {
    if !(mu > 0.0 && e2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need mu > 0 and e2 > 0, got {mu}, {e2}"
        )));
    }
    let units = UnitSystem::new(units.hbar, vec![mu])?;
    let hbar = units.hbar;
    let bohr = hbar * hbar / (mu * e2);
    let grid = Grid::radial(1024, 20.48 * bohr)?;
    let potential = Potential::CoulombRadial { e2 };
    let psi = prepare_eigenstate(&grid, &units, &potential, 1)?;
    let e = -mu * e2 * e2 / (2.0 * hbar * hbar);
    let window = move |c: &[f64]| c[0] >= 0.5 * bohr && c[0] <= 10.0 * bohr;
    Ok(OracleCase {
        name: "hydrogen-1s".into(),
        grid,
        units,
        potential,
        psi,
        energy: e,
        dt: None,
        expectations: vec![
            expect(
                Quantity::QuantumPotential,
                1e-6,
                Basis::ClosedForm,
                Box::new(move |c| e2 / c[0] + e),
                Box::new(window),
            ),
            expect(
                Quantity::LocalEnergy,
                1e-6,
                Basis::ClosedForm,
                constant(e),
                Box::new(window),
            ),
            expect(
                Quantity::ForceBalance,
                1e-6,
                Basis::ClosedForm,
                constant(0.0),
                Box::new(window),
            ),
            expect(
                Quantity::BohmMomentum,
                1e-10,
                Basis::Identity,
                constant(0.0),
                everywhere(),
            ),
        ],
    })
}

/// Two-body Gaussian `exp(-(x1^2 + x2^2)/4 sigma^2 - c x1 x2)`, the ground state
/// of the coupled oscillator with matrix `hbar^2 A M^-1 A`.
pub fn case_entangled_gaussian(c: f64, sigma: f64, units: &UnitSystem) -> Result<OracleCase> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be > 0, got {sigma}"
        )));
    }
    let a = 1.0 / (4.0 * sigma * sigma);
    if !(c.abs() < 2.0 * a) {
        return Err(Error::InvalidParameter(format!(
            "|c| = {} must stay below 1/(2 sigma^2) = {} for a normalizable state",
            c.abs(),
            2.0 * a
        )));
    }
    let units = if units.masses.len() >= 2 {
        units.clone()
    } else {
        UnitSystem::new(units.hbar, vec![units.mass(0); 2])?
    };
    let (hbar, m1, m2) = (units.hbar, units.mass(0), units.mass(1));
    let h2 = hbar * hbar;
    // A = [[2a, c], [c, 2a]], K = hbar^2 A M^-1 A
    let potential = Potential::CoupledHarmonic {
        k11: h2 * (4.0 * a * a / m1 + c * c / m2),
        k22: h2 * (c * c / m1 + 4.0 * a * a / m2),
        k12: h2 * (2.0 * a * c / m1 + 2.0 * a * c / m2),
    };
    let e = h2 * a * (1.0 / m1 + 1.0 / m2);
    let l = 12.0 * sigma;
    let grid = Grid::periodic_2d([256, 256], [-l, -l], [l, l])?;
    let psi = WaveFunction::from_fn(&grid, &units, |x| {
        Complex64::new(
            (-a * (x[0] * x[0] + x[1] * x[1]) - c * x[0] * x[1]).exp(),
            0.0,
        )
    })?
    .normalized()?;
    let q_exact = move |x: &[f64]| {
        let (g1, g2) = (2.0 * a * x[0] + c * x[1], 2.0 * a * x[1] + c * x[0]);
        -h2 / (2.0 * m1) * (g1 * g1 - 2.0 * a) - h2 / (2.0 * m2) * (g2 * g2 - 2.0 * a)
    };
    let core = move |x: &[f64]| x[0].abs() <= 3.0 * sigma && x[1].abs() <= 3.0 * sigma;
    let cross = -h2 * 2.0 * a * c * (1.0 / m1 + 1.0 / m2);
    Ok(OracleCase {
        name: if c == 0.0 {
            "product-gaussian".into()
        } else {
            "entangled-gaussian".into()
        },
        grid,
        units,
        potential,
        psi,
        energy: e,
        dt: Some(1e-4),
        expectations: vec![
            expect(
                Quantity::QuantumPotential,
                1e-8,
                Basis::Symbolic,
                Box::new(q_exact),
                Box::new(core),
            ),
            expect(
                Quantity::LocalEnergy,
                1e-8,
                Basis::ClosedForm,
                constant(e),
                Box::new(core),
            ),
            expect(
                Quantity::BohmEnergy,
                1e-8,
                Basis::ClosedForm,
                constant(e),
                Box::new(core),
            ),
            expect(
                Quantity::BohmMomentum,
                1e-10,
                Basis::Identity,
                constant(0.0),
                Box::new(core),
            ),
            expect(
                Quantity::CrossDerivative,
                1e-6,
                Basis::Symbolic,
                constant(cross),
                everywhere(),
            ),
            expect(
                Quantity::NonSeparable,
                1e-8,
                Basis::Symbolic,
                Box::new(move |x| cross * x[0] * x[1]),
                Box::new(core),
            ),
        ],
    })
}

/// Names accepted by [`case_by_name`].
pub const CASE_NAMES: [&str; 6] = [
    "box",
    "box-n3",
    "delta-well",
    "hydrogen-1s",
    "entangled-gaussian",
    "product-gaussian",
];

/// Default instance of each named case with `hbar = m = 1`.
pub fn case_by_name(name: &str) -> Result<OracleCase> {
    let u = UnitSystem::default();
    match name {
        "box" => case_box(1, 1.0, &u),
        "box-n3" => case_box(3, 2.0, &u),
        "delta-well" => case_delta_well(1.0, &u),
        "hydrogen-1s" => case_hydrogen_1s(1.0, 1.0, &u),
        "entangled-gaussian" => case_entangled_gaussian(0.3, 1.0, &u),
        "product-gaussian" => case_entangled_gaussian(0.0, 1.0, &u),
        _ => Err(Error::InvalidParameter(format!(
            "unknown case `{name}`; known: {}",
            CASE_NAMES.join(", ")
        ))),
    }
}

/// One-line description of a named case.
pub fn describe_case(name: &str) -> Option<&'static str> {
    Some(match name {
        "box" => "particle in a unit box, n = 1: Q = E = pi^2/2 everywhere, P_B = T0j = 0",
        "box-n3" => "particle in a box of width 2, n = 3: Q = 9 pi^2/8",
        "delta-well" => "bound state of a delta well, alpha = 1: Re<P^2>_W/2m = -1/2 off the cusp",
        "hydrogen-1s" => {
            "hydrogen ground state (reduced radial function): Q = 1/r - 1/2, grad Q = -grad V"
        }
        "entangled-gaussian" => "two-body Gaussian with coupling c = 0.3: non-separable Q",
        "product-gaussian" => "two-body Gaussian with c = 0: Q separates",
        _ => return None,
    })
}
