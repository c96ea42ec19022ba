use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid};
use crate::units::UnitSystem;

/// Geometry of a double-slit barrier on a 2D grid: a wall of height `height`
/// and thickness `thickness` centred at `x0 = position`, opened by two slits of
/// width `slit_width` centred at `x1 = +-separation/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitBarrier {
    pub position: f64,
    pub thickness: f64,
    pub height: f64,
    pub separation: f64,
    pub slit_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Potential {
    Free,
    /// Infinite well on a Dirichlet grid; zero inside.
    Box,
    Harmonic {
        omega: f64,
    },
    Quartic {
        lambda: f64,
    },
    /// `-e2 / r` on a radial grid.
    CoulombRadial {
        e2: f64,
    },
    /// Gaussian of standard deviation `width` (default `4 dx`) with `int V = -hbar^2 alpha / m`.
    DeltaWell {
        alpha: f64,
        width: Option<f64>,
    },
    DoubleSlit(SlitBarrier),
    /// `(k11 x1^2 + 2 k12 x1 x2 + k22 x2^2) / 2` on a 2D grid.
    CoupledHarmonic {
        k11: f64,
        k22: f64,
        k12: f64,
    },
    /// Tabulated values on the simulation grid.
    Custom {
        values: Vec<f64>,
    },
}

impl Potential {
    /// Regularization width of a delta well on `grid`.
    pub fn delta_width(&self, grid: &Grid) -> Option<f64> {
        match self {
            Potential::DeltaWell { width, .. } => Some(width.unwrap_or(4.0 * grid.dx(0))),
            _ => None,
        }
    }

    /// Pointwise value at `coords`, for kinds that have a closed form.
    pub fn value_at(&self, coords: &[f64], units: &UnitSystem, grid: &Grid) -> Result<f64> {
        let v = match self {
            Potential::Free | Potential::Box => 0.0,
            Potential::Harmonic { omega } => coords
                .iter()
                .enumerate()
                .map(|(ax, x)| 0.5 * units.mass(ax) * omega * omega * x * x)
                .sum(),
            Potential::Quartic { lambda } => coords.iter().map(|x| lambda * x.powi(4)).sum(),
            Potential::CoulombRadial { e2 } => -e2 / coords[0],
            Potential::DeltaWell { alpha, .. } => {
                let w = self.delta_width(grid).unwrap_or_default();
                let x = coords[0];
                let depth = units.hbar * units.hbar * alpha / units.mass(0);
                -depth * (-x * x / (2.0 * w * w)).exp() / ((2.0 * PI).sqrt() * w)
            }
            Potential::DoubleSlit(b) => {
                let (x0, x1) = (coords[0], coords.get(1).copied().unwrap_or(0.0));
                let in_wall = (x0 - b.position).abs() <= 0.5 * b.thickness;
                let in_slit = (x1 - 0.5 * b.separation).abs() < 0.5 * b.slit_width
                    || (x1 + 0.5 * b.separation).abs() < 0.5 * b.slit_width;
                if in_wall && !in_slit {
                    b.height
                } else {
                    0.0
                }
            }
            Potential::CoupledHarmonic { k11, k22, k12 } => {
                let (x1, x2) = (coords[0], coords[1]);
                0.5 * (k11 * x1 * x1 + 2.0 * k12 * x1 * x2 + k22 * x2 * x2)
            }
            Potential::Custom { values } => return interpolate_custom(values, grid, coords),
        };
        Ok(v)
    }

    /// Gradient `dV/dx_j` at `coords` for kinds with a closed form.
    pub fn gradient_at(&self, coords: &[f64], units: &UnitSystem, grid: &Grid) -> Result<Vec<f64>> {
        let g = match self {
            Potential::Free | Potential::Box => vec![0.0; coords.len()],
            Potential::Harmonic { omega } => coords
                .iter()
                .enumerate()
                .map(|(ax, x)| units.mass(ax) * omega * omega * x)
                .collect(),
            Potential::Quartic { lambda } => {
                coords.iter().map(|x| 4.0 * lambda * x.powi(3)).collect()
            }
            Potential::CoulombRadial { e2 } => vec![e2 / (coords[0] * coords[0])],
            Potential::DeltaWell { .. } => {
                let w = self.delta_width(grid).unwrap_or_default();
                vec![-coords[0] / (w * w) * self.value_at(coords, units, grid)?]
            }
            Potential::CoupledHarmonic { k11, k22, k12 } => {
                vec![
                    k11 * coords[0] + k12 * coords[1],
                    k22 * coords[1] + k12 * coords[0],
                ]
            }
            Potential::DoubleSlit(_) | Potential::Custom { .. } => {
                return Err(Error::Unsupported(format!(
                    "closed-form gradient of a {} potential",
                    self.name()
                )))
            }
        };
        Ok(g)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self {
            Potential::Box if grid.boundary() != Boundary::DirichletSine => {
                bad("box potential needs a dirichlet-sine grid")
            }
            Potential::CoulombRadial { .. } if grid.boundary() != Boundary::Radial => {
                bad("coulomb-radial potential needs a radial grid")
            }
            Potential::DeltaWell { width: Some(w), .. } if !(*w > 0.0) => {
                bad("delta-well width must be > 0")
            }
            Potential::DoubleSlit(_) | Potential::CoupledHarmonic { .. } if grid.dims() != 2 => {
                bad("this potential needs a 2D grid")
            }
            Potential::Custom { values } if values.len() != grid.len() => {
                Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    got: values.len(),
                })
            }
            _ => Ok(()),
        }
    }

    /// Tabulate on `grid`.
    pub fn sample(&self, grid: &Grid, units: &UnitSystem) -> Result<Vec<f64>> {
        self.validate(grid)?;
        if let Potential::Custom { values } = self {
            return Ok(values.clone());
        }
        let mut out = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let v = self.value_at(&grid.coords(i), units, grid)?;
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            out.push(v);
        }
        Ok(out)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Potential::Free => "free",
            Potential::Box => "box",
            Potential::Harmonic { .. } => "harmonic",
            Potential::Quartic { .. } => "quartic",
            Potential::CoulombRadial { .. } => "coulomb-radial",
            Potential::DeltaWell { .. } => "delta-well",
            Potential::DoubleSlit(_) => "double-slit",
            Potential::CoupledHarmonic { .. } => "coupled-harmonic",
            Potential::Custom { .. } => "custom",
        }
    }
}

/// Linear interpolation of a tabulated 1D potential; periodic wrap on periodic grids.
fn interpolate_custom(values: &[f64], grid: &Grid, coords: &[f64]) -> Result<f64> {
    if grid.dims() != 1 {
        return Err(Error::Unsupported(
            "off-grid evaluation of a 2D tabulated potential".into(),
        ));
    }
    let a = grid.axis(0);
    let n = a.n;
    let s = (coords[0] - a.x_min) / a.dx();
    let i = s.floor();
    let t = s - i;
    let i = i as i64;
    let at = |j: i64| -> f64 {
        if grid.boundary() == Boundary::Periodic {
            values[j.rem_euclid(n as i64) as usize]
        } else {
            values[j.clamp(0, n as i64 - 1) as usize]
        }
    };
    Ok(at(i) * (1.0 - t) + at(i + 1) * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_well_has_calibrated_area() {
        let g = Grid::periodic(1024, -10.0, 10.0).unwrap();
        let u = UnitSystem::default();
        let v = Potential::DeltaWell {
            alpha: 1.5,
            width: None,
        }
        .sample(&g, &u)
        .unwrap();
        let area: f64 = v.iter().sum::<f64>() * g.dx(0);
        assert!((area + 1.5).abs() < 1e-10);
    }

    #[test]
    fn coupled_harmonic_is_symmetric() {
        let g = Grid::periodic_2d([64, 64], [-4.0, -4.0], [4.0, 4.0]).unwrap();
        let u = UnitSystem::default();
        let p = Potential::CoupledHarmonic {
            k11: 1.0,
            k22: 1.0,
            k12: 0.3,
        };
        assert_eq!(
            p.value_at(&[1.0, 2.0], &u, &g).unwrap(),
            p.value_at(&[2.0, 1.0], &u, &g).unwrap()
        );
        assert!((p.value_at(&[1.0, 1.0], &u, &g).unwrap() - 1.3).abs() < 1e-15);
    }

    #[test]
    fn slit_barrier_has_openings() {
        let g = Grid::periodic_2d([64, 64], [-4.0, -4.0], [4.0, 4.0]).unwrap();
        let u = UnitSystem::default();
        let p = Potential::DoubleSlit(SlitBarrier {
            position: 0.0,
            thickness: 0.5,
            height: 50.0,
            separation: 2.0,
            slit_width: 0.5,
        });
        assert_eq!(p.value_at(&[0.0, 1.0], &u, &g).unwrap(), 0.0);
        assert_eq!(p.value_at(&[0.0, 0.0], &u, &g).unwrap(), 50.0);
        assert_eq!(p.value_at(&[2.0, 0.0], &u, &g).unwrap(), 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let g = Grid::periodic(256, -8.0, 8.0).unwrap();
        let u = UnitSystem::new(1.0, vec![1.7]).unwrap();
        let h = 1e-5;
        for p in [
            Potential::Harmonic { omega: 1.3 },
            Potential::Quartic { lambda: 0.1 },
            Potential::DeltaWell {
                alpha: 1.0,
                width: Some(0.3),
            },
        ] {
            for x in [-1.1, 0.2, 0.7] {
                let fd = (p.value_at(&[x + h], &u, &g).unwrap()
                    - p.value_at(&[x - h], &u, &g).unwrap())
                    / (2.0 * h);
                assert!((p.gradient_at(&[x], &u, &g).unwrap()[0] - fd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn box_requires_dirichlet() {
        let g = Grid::periodic(64, 0.0, 1.0).unwrap();
        assert!(Potential::Box.sample(&g, &UnitSystem::default()).is_err());
    }

    #[test]
    fn custom_interpolates() {
        let g = Grid::periodic(64, 0.0, 64.0).unwrap();
        let vals: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let p = Potential::Custom { values: vals };
        let u = UnitSystem::default();
        assert!((p.value_at(&[10.5], &u, &g).unwrap() - 10.5).abs() < 1e-12);
    }
}
