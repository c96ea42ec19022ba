//! Uniform 1D/2D lattices.
//!
//! Point placement depends on the boundary mode:
//!
//! * `Periodic`: `x_i = x_min + i dx`, `i = 0..n`; `x_max` is the image of `x_min`.
//! * `DirichletSine`: same placement; `x_min` is a wall where fields vanish and
//!   `x_max` (the other wall) is excluded. Fields are sine series on `[x_min, x_max]`.
//! * `Radial`: 1D only, `r_i = (i + 1) dr`, so the origin is excluded and
//!   `x_min = dr`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    DirichletSine,
    Radial,
}

/// How spatial derivatives are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeScheme {
    /// Fourier (periodic) or sine-basis (Dirichlet) differentiation.
    Spectral,
    /// 4th-order centered differences (periodic wrap, or one-sided closure at ends).
    FiniteDifference4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Axis {
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
    boundary: Boundary,
    scheme: DerivativeScheme,
}

fn check_points(n: usize) -> Result<()> {
    if n < 64 || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "n_points must be a power of two >= 64, got {n}"
        )));
    }
    Ok(())
}

impl Grid {
    pub fn new(axes: Vec<Axis>, boundary: Boundary) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "dims must be 1 or 2, got {}",
                axes.len()
            )));
        }
        for a in &axes {
            check_points(a.n)?;
            if !(a.x_min.is_finite() && a.x_max.is_finite() && a.x_max > a.x_min) {
                return Err(Error::InvalidGrid(format!(
                    "x_max must exceed x_min, got [{}, {}]",
                    a.x_min, a.x_max
                )));
            }
        }
        let scheme = match boundary {
            Boundary::Radial => {
                if axes.len() != 1 {
                    return Err(Error::InvalidGrid("radial grids are 1D".into()));
                }
                let a = axes[0];
                if (a.x_min - a.dx()).abs() > 1e-12 * a.dx().max(1.0) {
                    return Err(Error::InvalidGrid(format!(
                        "radial grid needs x_min = dr (origin excluded), got x_min = {}, dr = {}",
                        a.x_min,
                        a.dx()
                    )));
                }
                DerivativeScheme::FiniteDifference4
            }
            _ => DerivativeScheme::Spectral,
        };
        Ok(Grid {
            axes,
            boundary,
            scheme,
        })
    }

    pub fn periodic(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(vec![Axis { n, x_min, x_max }], Boundary::Periodic)
    }

    pub fn periodic_2d(n: [usize; 2], lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        Self::new(
            vec![
                Axis {
                    n: n[0],
                    x_min: lo[0],
                    x_max: hi[0],
                },
                Axis {
                    n: n[1],
                    x_min: lo[1],
                    x_max: hi[1],
                },
            ],
            Boundary::Periodic,
        )
    }

    pub fn dirichlet(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(vec![Axis { n, x_min, x_max }], Boundary::DirichletSine)
    }

    /// Radial grid `r_i = (i+1) dr` with `dr = r_max / n`; the last point is `r_max`.
    pub fn radial(n: usize, r_max: f64) -> Result<Self> {
        let dr = r_max / n as f64;
        Self::new(
            vec![Axis {
                n,
                x_min: dr,
                x_max: r_max + dr,
            }],
            Boundary::Radial,
        )
    }

    /// Switch the differentiation scheme (radial grids are always finite-difference).
    pub fn with_scheme(mut self, scheme: DerivativeScheme) -> Result<Self> {
        if self.boundary == Boundary::Radial && scheme == DerivativeScheme::Spectral {
            return Err(Error::InvalidGrid(
                "radial grids only support finite differences".into(),
            ));
        }
        if self.boundary == Boundary::DirichletSine && scheme == DerivativeScheme::FiniteDifference4
        {
            return Err(Error::InvalidGrid(
                "dirichlet-sine grids are spectral".into(),
            ));
        }
        self.scheme = scheme;
        Ok(self)
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.axes[axis].dx()
    }

    /// Volume element of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.dx()).product()
    }

    /// Coordinates along one axis.
    pub fn points(&self, axis: usize) -> Vec<f64> {
        let a = &self.axes[axis];
        let dx = a.dx();
        (0..a.n).map(|i| a.x_min + i as f64 * dx).collect()
    }

    /// Stride of `axis` in the row-major value layout (axis 0 slowest).
    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.n).product()
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        let mut rem = flat;
        for ax in (0..self.dims()).rev() {
            let n = self.axes[ax].n;
            idx[ax] = rem % n;
            rem /= n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .enumerate()
            .map(|(ax, i)| i * self.stride(ax))
            .sum()
    }

    /// Coordinates of a flat index.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(ax, &i)| self.axes[ax].x_min + i as f64 * self.axes[ax].dx())
            .collect()
    }

    /// Evaluate `f` at every grid point.
    pub fn map<T>(&self, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        (0..self.len()).map(|i| f(&self.coords(i))).collect()
    }

    /// Lowest and highest coordinate actually spanned on `axis`.
    pub fn extent(&self, axis: usize) -> (f64, f64) {
        let a = &self.axes[axis];
        (a.x_min, a.x_min + (a.n - 1) as f64 * a.dx())
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }
}
