//! Differentiation and quadrature on a [`Grid`].
//!
//! Values are flat row-major slices matching `grid.len()`. Periodic grids use
//! Fourier differentiation, Dirichlet grids differentiate an odd (or even)
//! extension onto a doubled ring, radial grids use 4th-order finite differences.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, DerivativeScheme, Grid};
use crate::spectral;

/// Symmetry used to extend a Dirichlet-grid field across the walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Field vanishes at the walls (wavefunctions, R).
    Odd,
    /// Field is mirror-symmetric at the walls (densities, |psi|^2-like products).
    Even,
}

pub(crate) fn check_len<T>(grid: &Grid, values: &[T]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite_real(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn check_finite_complex(values: &[Complex64]) -> Result<()> {
    match values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Apply `op` to every 1D lane of `values` along `axis`.
pub fn map_lanes<T: Copy + Default>(
    grid: &Grid,
    values: &[T],
    axis: usize,
    mut op: impl FnMut(&[T]) -> Vec<T>,
) -> Vec<T> {
    let n = grid.axis(axis).n;
    let stride = grid.stride(axis);
    let outer = grid.len() / (n * stride);
    let mut out = vec![T::default(); values.len()];
    let mut lane = vec![T::default(); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for (i, slot) in lane.iter_mut().enumerate() {
                *slot = values[base + i * stride];
            }
            let res = op(&lane);
            for (i, v) in res.into_iter().enumerate() {
                out[base + i * stride] = v;
            }
        }
    }
    out
}

fn extend(lane: &[Complex64], parity: Parity) -> Vec<Complex64> {
    let n = lane.len();
    let sign = match parity {
        Parity::Odd => -1.0,
        Parity::Even => 1.0,
    };
    let mut ring = vec![Complex64::new(0.0, 0.0); 2 * n];
    ring[..n].copy_from_slice(lane);
    if parity == Parity::Odd {
        ring[0] = Complex64::new(0.0, 0.0);
    }
    for j in 1..n {
        ring[2 * n - j] = lane[j] * sign;
    }
    ring
}

fn dirichlet_lane(lane: &[Complex64], dx: f64, order: u8, parity: Parity) -> Vec<Complex64> {
    let ring = extend(lane, parity);
    let mut d = spectral::differentiate(&ring, dx, order);
    d.truncate(lane.len());
    d
}

fn fd4_periodic(lane: &[Complex64], h: f64, order: u8) -> Vec<Complex64> {
    let n = lane.len();
    let at = |i: isize| lane[i.rem_euclid(n as isize) as usize];
    (0..n as isize)
        .map(|i| match order {
            1 => (at(i - 2) - at(i - 1) * 8.0 + at(i + 1) * 8.0 - at(i + 2)) / (12.0 * h),
            2 => {
                (-at(i - 2) + at(i - 1) * 16.0 - at(i) * 30.0 + at(i + 1) * 16.0 - at(i + 2))
                    / (12.0 * h * h)
            }
            _ => panic!("derivative order {order} not supported"),
        })
        .collect()
}

const D1_EDGE: [[f64; 5]; 2] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
];
const D2_EDGE: [[f64; 6]; 2] = [
    [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
    [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
];

fn fd4_open(lane: &[Complex64], h: f64, order: u8) -> Vec<Complex64> {
    let n = lane.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 2..n - 2 {
        out[i] = match order {
            1 => (lane[i - 2] - lane[i - 1] * 8.0 + lane[i + 1] * 8.0 - lane[i + 2]) / (12.0 * h),
            _ => {
                (-lane[i - 2] + lane[i - 1] * 16.0 - lane[i] * 30.0 + lane[i + 1] * 16.0
                    - lane[i + 2])
                    / (12.0 * h * h)
            }
        };
    }
    for e in 0..2 {
        let (mut lo, mut hi) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        if order == 1 {
            for (k, c) in D1_EDGE[e].iter().enumerate() {
                lo += lane[k] * *c;
                hi -= lane[n - 1 - k] * *c;
            }
            out[e] = lo / (12.0 * h);
            out[n - 1 - e] = hi / (12.0 * h);
        } else {
            for (k, c) in D2_EDGE[e].iter().enumerate() {
                lo += lane[k] * *c;
                hi += lane[n - 1 - k] * *c;
            }
            out[e] = lo / (12.0 * h * h);
            out[n - 1 - e] = hi / (12.0 * h * h);
        }
    }
    out
}

fn derivative_lane(
    grid: &Grid,
    axis: usize,
    lane: &[Complex64],
    order: u8,
    parity: Parity,
) -> Vec<Complex64> {
    let dx = grid.dx(axis);
    match (grid.boundary(), grid.scheme()) {
        (Boundary::Radial, _) => fd4_open(lane, dx, order),
        (Boundary::Periodic, DerivativeScheme::FiniteDifference4) => fd4_periodic(lane, dx, order),
        (Boundary::Periodic, DerivativeScheme::Spectral) => {
            spectral::differentiate(lane, dx, order)
        }
        (Boundary::DirichletSine, _) => dirichlet_lane(lane, dx, order, parity),
    }
}

/// Derivative of order 1 or 2 of a complex field along `axis`.
pub fn derivative_complex(
    grid: &Grid,
    values: &[Complex64],
    axis: usize,
    order: u8,
    parity: Parity,
) -> Result<Vec<Complex64>> {
    check_len(grid, values)?;
    check_finite_complex(values)?;
    if axis >= grid.dims() {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    // real and imaginary parts are differentiated separately so a real field keeps an exactly real derivative
    Ok(map_lanes(grid, values, axis, |lane| {
        let re: Vec<Complex64> = lane.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
        let mut out: Vec<Complex64> = derivative_lane(grid, axis, &re, order, parity)
            .into_iter()
            .map(|d| Complex64::new(d.re, 0.0))
            .collect();
        if lane.iter().any(|v| v.im != 0.0) {
            let im: Vec<Complex64> = lane.iter().map(|v| Complex64::new(v.im, 0.0)).collect();
            for (o, d) in out
                .iter_mut()
                .zip(derivative_lane(grid, axis, &im, order, parity))
            {
                o.im = d.re;
            }
        }
        out
    }))
}

/// Derivative of order 1 or 2 of a real field along `axis`.
pub fn derivative(
    grid: &Grid,
    values: &[f64],
    axis: usize,
    order: u8,
    parity: Parity,
) -> Result<Vec<f64>> {
    check_finite_real(values)?;
    let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(derivative_complex(grid, &c, axis, order, parity)?
        .into_iter()
        .map(|v| v.re)
        .collect())
}

/// First derivative along `axis` (odd extension on Dirichlet grids).
pub fn gradient(grid: &Grid, values: &[f64], axis: usize) -> Result<Vec<f64>> {
    derivative(grid, values, axis, 1, Parity::Odd)
}

pub fn gradient_complex(grid: &Grid, values: &[Complex64], axis: usize) -> Result<Vec<Complex64>> {
    derivative_complex(grid, values, axis, 1, Parity::Odd)
}

/// Sum of second derivatives over all axes.
pub fn laplacian(grid: &Grid, values: &[f64]) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; values.len()];
    for axis in 0..grid.dims() {
        for (a, d) in acc
            .iter_mut()
            .zip(derivative(grid, values, axis, 2, Parity::Odd)?)
        {
            *a += d;
        }
    }
    Ok(acc)
}

pub fn laplacian_complex(grid: &Grid, values: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut acc = vec![Complex64::new(0.0, 0.0); values.len()];
    for axis in 0..grid.dims() {
        for (a, d) in acc
            .iter_mut()
            .zip(derivative_complex(grid, values, axis, 2, Parity::Odd)?)
        {
            *a += d;
        }
    }
    Ok(acc)
}

/// Integral over the grid: a Riemann sum, or on radial grids a trapezoid rule
/// that includes the panel between the origin (where the integrand is taken as 0) and the first point.
pub fn integrate(grid: &Grid, values: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), grid.len());
    match grid.boundary() {
        Boundary::Radial => {
            let n = values.len();
            let inner: f64 = values[..n - 1].iter().sum();
            grid.dx(0) * (inner + 0.5 * values[n - 1])
        }
        _ => values.iter().sum::<f64>() * grid.cell_volume(),
    }
}

/// Integral with the `4 pi r^2` volume weight of a spherically symmetric field.
pub fn integrate_spherical(grid: &Grid, values: &[f64]) -> Result<f64> {
    if grid.boundary() != Boundary::Radial {
        return Err(Error::Unsupported(
            "spherical weight needs a radial grid".into(),
        ));
    }
    let r = grid.points(0);
    let w: Vec<f64> = values
        .iter()
        .zip(&r)
        .map(|(v, r)| 4.0 * std::f64::consts::PI * r * r * v)
        .collect();
    Ok(integrate(grid, &w))
}

pub fn integrate_complex(grid: &Grid, values: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    Complex64::new(integrate(grid, &re), integrate(grid, &im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn sine_derivatives_periodic() {
        let g = Grid::periodic(128, 0.0, 2.0 * PI).unwrap();
        let x = g.points(0);
        let f: Vec<f64> = x.iter().map(|x| (5.0 * x).sin()).collect();
        let d1: Vec<f64> = x.iter().map(|x| 5.0 * (5.0 * x).cos()).collect();
        let d2: Vec<f64> = x.iter().map(|x| -25.0 * (5.0 * x).sin()).collect();
        assert!(max_err(&gradient(&g, &f, 0).unwrap(), &d1) < 1e-10);
        assert!(max_err(&laplacian(&g, &f).unwrap(), &d2) < 1e-10);
    }

    #[test]
    fn gaussian_oracle() {
        let g = Grid::periodic(256, -10.0, 10.0).unwrap();
        let x = g.points(0);
        let f: Vec<f64> = x.iter().map(|x| (-x * x / 2.0).exp()).collect();
        let d1: Vec<f64> = x.iter().map(|x| -x * (-x * x / 2.0).exp()).collect();
        let d2: Vec<f64> = x
            .iter()
            .map(|x| (x * x - 1.0) * (-x * x / 2.0).exp())
            .collect();
        assert!(max_err(&gradient(&g, &f, 0).unwrap(), &d1) < 1e-8);
        assert!(max_err(&laplacian(&g, &f).unwrap(), &d2) < 1e-8);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let g = Grid::periodic(64, -1.0, 1.0).unwrap();
        let d = gradient(&g, &vec![3.5; 64], 0).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn radial_quadratic() {
        let g = Grid::radial(256, 10.0).unwrap();
        let r = g.points(0);
        let f: Vec<f64> = r.iter().map(|r| r * r).collect();
        let lap = derivative(&g, &f, 0, 2, Parity::Odd).unwrap();
        assert!(lap.iter().all(|v| (v - 2.0).abs() < 1e-6));
        let d1 = gradient(&g, &f, 0).unwrap();
        assert!(max_err(&d1, &r.iter().map(|r| 2.0 * r).collect::<Vec<_>>()) < 1e-8);
    }

    #[test]
    fn dirichlet_box_state() {
        let n = 256;
        let g = Grid::dirichlet(n, 0.0, 1.0).unwrap();
        let x = g.points(0);
        let f: Vec<f64> = x.iter().map(|x| 2f64.sqrt() * (PI * x).sin()).collect();
        let rho: Vec<f64> = f.iter().map(|v| v * v).collect();
        assert!((integrate(&g, &rho) - 1.0).abs() < 1e-9);
        let d2 = laplacian(&g, &f).unwrap();
        for (a, b) in d2.iter().zip(&f) {
            assert!((a + PI * PI * b).abs() < 1e-9);
        }
        let drho = derivative(&g, &rho, 0, 1, Parity::Even).unwrap();
        for (a, x) in drho.iter().zip(&x) {
            assert!((a - 2.0 * PI * (2.0 * PI * x).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn fd4_periodic_converges() {
        let err = |n: usize| {
            let g = Grid::periodic(n, 0.0, 2.0 * PI)
                .unwrap()
                .with_scheme(DerivativeScheme::FiniteDifference4)
                .unwrap();
            let x = g.points(0);
            let f: Vec<f64> = x.iter().map(|x| x.sin()).collect();
            let d: Vec<f64> = x.iter().map(|x| x.cos()).collect();
            max_err(&gradient(&g, &f, 0).unwrap(), &d)
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn two_dimensional_lanes() {
        let g = Grid::periodic_2d([64, 64], [0.0, 0.0], [2.0 * PI, 2.0 * PI]).unwrap();
        let f = g.map(|c| (2.0 * c[0]).sin() * c[1].cos());
        let d0 = gradient(&g, &f, 0).unwrap();
        let d1 = gradient(&g, &f, 1).unwrap();
        let e0 = g.map(|c| 2.0 * (2.0 * c[0]).cos() * c[1].cos());
        let e1 = g.map(|c| -(2.0 * c[0]).sin() * c[1].sin());
        assert!(max_err(&d0, &e0) < 1e-10);
        assert!(max_err(&d1, &e1) < 1e-10);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::periodic(64, 0.0, 1.0).unwrap();
        let mut f = vec![0.0; 64];
        f[7] = f64::NAN;
        assert_eq!(gradient(&g, &f, 0), Err(Error::NonFinite { index: 7 }));
    }

    #[test]
    fn radial_trapezoid() {
        let g = Grid::radial(1024, 30.0).unwrap();
        let r = g.points(0);
        let u2: Vec<f64> = r.iter().map(|r| 4.0 * r * r * (-2.0 * r).exp()).collect();
        assert!((integrate(&g, &u2) - 1.0).abs() < 1e-5);
        let dens: Vec<f64> = r.iter().map(|r| (-2.0 * r).exp() / PI).collect();
        assert!((integrate_spherical(&g, &dens).unwrap() - 1.0).abs() < 1e-5);
    }
}
