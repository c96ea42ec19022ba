use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{self, check_finite_complex, check_finite_real, check_len, Parity};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::units::UnitSystem;

/// Real scalar field sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        check_len(&grid, &values)?;
        check_finite_real(&values)?;
        Ok(RealField { grid, values, time })
    }

    pub fn from_fn(grid: &Grid, time: f64, f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = grid.map(f);
        RealField {
            grid: grid.clone(),
            values,
            time,
        }
    }

    pub fn integrate(&self) -> f64 {
        calculus::integrate(&self.grid, &self.values)
    }

    pub fn gradient(&self, axis: usize) -> Result<RealField> {
        let values = calculus::gradient(&self.grid, &self.values, axis)?;
        Ok(RealField {
            grid: self.grid.clone(),
            values,
            time: self.time,
        })
    }

    pub fn laplacian(&self) -> Result<RealField> {
        let values = calculus::laplacian(&self.grid, &self.values)?;
        Ok(RealField {
            grid: self.grid.clone(),
            values,
            time: self.time,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Complex wavefunction on a grid, tagged with its time and unit system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub time: f64,
    pub units: UnitSystem,
}

impl WaveFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64, units: UnitSystem) -> Result<Self> {
        check_len(&grid, &values)?;
        check_finite_complex(&values)?;
        units.validate()?;
        Ok(WaveFunction {
            grid,
            values,
            time,
            units,
        })
    }

    pub fn from_fn(
        grid: &Grid,
        units: &UnitSystem,
        f: impl FnMut(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let values = grid.map(f);
        Self::new(grid.clone(), values, 0.0, units.clone())
    }

    /// 1D Gaussian packet `exp(-(x-x0)^2/4 sigma^2 + i p0 x / hbar)`, normalized on the grid.
    /// The density has standard deviation `sigma`.
    pub fn gaussian(grid: &Grid, units: &UnitSystem, x0: f64, p0: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be > 0, got {sigma}"
            )));
        }
        let hbar = units.hbar;
        let psi = Self::from_fn(grid, units, |c| {
            let x = c[0];
            Complex64::from_polar(
                (-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(),
                p0 * x / hbar,
            )
        })?;
        psi.normalized()
    }

    /// Plane wave `e^{ikx}` along axis 0 (unit amplitude, not normalized).
    pub fn plane_wave(grid: &Grid, units: &UnitSystem, k: f64) -> Result<Self> {
        Self::from_fn(grid, units, |c| Complex64::from_polar(1.0, k * c[0]))
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        calculus::integrate(&self.grid, &self.density())
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotNormalized { norm: n });
        }
        let s = 1.0 / n.sqrt();
        for v in &mut self.values {
            *v *= s;
        }
        Ok(self)
    }

    /// Fails unless the norm is within `tol` of 1.
    pub fn require_normalized(&self, tol: f64) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(())
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    pub fn mass(&self, axis: usize) -> f64 {
        self.units.mass(axis)
    }

    /// `<psi| A |psi>` for a local operator already applied to psi.
    pub fn braket(&self, a_psi: &[Complex64]) -> Complex64 {
        let prod: Vec<Complex64> = self
            .values
            .iter()
            .zip(a_psi)
            .map(|(p, a)| p.conj() * a)
            .collect();
        calculus::integrate_complex(&self.grid, &prod)
    }

    /// `-i hbar d psi / dx_axis`.
    pub fn apply_momentum(&self, axis: usize) -> Result<Vec<Complex64>> {
        let d = calculus::derivative_complex(&self.grid, &self.values, axis, 1, Parity::Odd)?;
        let f = Complex64::new(0.0, -self.hbar());
        Ok(d.into_iter().map(|v| v * f).collect())
    }

    /// Kinetic energy operator `sum_j -hbar^2/2m_j d^2/dx_j^2` applied to psi.
    pub fn apply_kinetic(&self) -> Result<Vec<Complex64>> {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for axis in 0..self.grid.dims() {
            let d2 = calculus::derivative_complex(&self.grid, &self.values, axis, 2, Parity::Odd)?;
            let f = -self.hbar() * self.hbar() / (2.0 * self.mass(axis));
            for (a, d) in acc.iter_mut().zip(d2) {
                *a += d * f;
            }
        }
        Ok(acc)
    }

    /// `<H>` for `H = T + V` with `V` tabulated on the grid.
    pub fn energy(&self, potential: &[f64]) -> Result<f64> {
        check_len(&self.grid, potential)?;
        let mut h = self.apply_kinetic()?;
        for ((h, p), v) in h.iter_mut().zip(&self.values).zip(potential) {
            *h += p * v;
        }
        Ok(self.braket(&h).re / self.norm())
    }

    pub fn with_values(&self, values: Vec<Complex64>, time: f64) -> Self {
        WaveFunction {
            grid: self.grid.clone(),
            values,
            time,
            units: self.units.clone(),
        }
    }
}
