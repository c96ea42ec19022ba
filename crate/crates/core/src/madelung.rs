//! Polar decomposition `psi = R e^{iS/hbar}` and the local flow fields built from it.
//!
//! Spatial derivatives of `R` and `S` are taken through log-derivatives of `psi`
//! rather than by differentiating the unwrapped phase: `S` is a ramp on a
//! periodic grid whenever the state carries momentum, so its own spectral
//! derivative would see a sawtooth.
//!
//! ```text
//! dS/dx   = hbar Im(psi'/psi)
//! R'/R    = Re(psi'/psi)
//! R''/R   = Re(psi''/psi) + Im(psi'/psi)^2
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{derivative, derivative_complex, Parity};
use crate::error::{Error, Result};
use crate::field::WaveFunction;
use crate::grid::Grid;
use crate::units::UnitSystem;

/// Default node threshold relative to `max rho`.
pub const DEFAULT_NODE_EPS: f64 = 1e-8;

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Plaquette with nonzero phase winding in a 2D field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vortex {
    /// Lower-left corner `(i0, i1)`.
    pub corner: [usize; 2],
    pub winding: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MadelungFields {
    pub grid: Grid,
    pub units: UnitSystem,
    pub time: f64,
    pub psi: Vec<Complex64>,
    pub r: Vec<f64>,
    /// Unwrapped phase times hbar.
    pub s: Vec<f64>,
    pub rho: Vec<f64>,
    /// True where `rho < eps * max rho`.
    pub node_mask: Vec<bool>,
    /// Per axis `dS/dx_j`; zero on the mask.
    pub grad_s: Vec<Vec<f64>>,
    /// Per axis `(dR/dx_j)/R`; zero on the mask.
    pub grad_r_over_r: Vec<Vec<f64>>,
    /// Per axis `(d^2R/dx_j^2)/R`; zero on the mask.
    pub curv_r_over_r: Vec<Vec<f64>>,
    /// Per axis probability current times mass, `rho dS/dx_j = hbar Im(psi* dpsi)`; defined everywhere.
    pub current: Vec<Vec<f64>>,
    pub vortices: Vec<Vortex>,
    pub eps_node: f64,
}

/// Decompose with the default node threshold.
pub fn decompose(psi: &WaveFunction) -> Result<MadelungFields> {
    decompose_with(psi, DEFAULT_NODE_EPS)
}

/// Decompose `psi`, masking points with `rho < eps_rel * max rho`.
pub fn decompose_with(psi: &WaveFunction, eps_rel: f64) -> Result<MadelungFields> {
    let grid = &psi.grid;
    let hbar = psi.hbar();
    let rho: Vec<f64> = psi.values.iter().map(|v| v.norm_sqr()).collect();
    let rmax = rho.iter().cloned().fold(0.0, f64::max);
    let threshold = eps_rel * rmax;
    let node_mask: Vec<bool> = rho.iter().map(|&r| !(r >= threshold) || r == 0.0).collect();
    if node_mask.iter().all(|&m| m) {
        return Err(Error::AllMasked);
    }
    let r: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let arg: Vec<f64> = psi.values.iter().map(|v| v.arg()).collect();
    let anchor = rho
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > rho[best] { i } else { best });
    let s: Vec<f64> = unwrap(grid, &arg, &node_mask, anchor)
        .into_iter()
        .map(|p| hbar * p)
        .collect();
    let vortices = if grid.dims() == 2 {
        find_vortices(grid, &arg, &node_mask)
    } else {
        Vec::new()
    };

    let mut grad_s = Vec::new();
    let mut grad_r_over_r = Vec::new();
    let mut curv_r_over_r = Vec::new();
    let mut current = Vec::new();
    for axis in 0..grid.dims() {
        let d1 = derivative_complex(grid, &psi.values, axis, 1, Parity::Odd)?;
        let d2 = derivative_complex(grid, &psi.values, axis, 2, Parity::Odd)?;
        let mut gs = vec![0.0; grid.len()];
        let mut gr = vec![0.0; grid.len()];
        let mut cr = vec![0.0; grid.len()];
        let mut cur = vec![0.0; grid.len()];
        for i in 0..grid.len() {
            cur[i] = hbar * (psi.values[i].conj() * d1[i]).im;
            if node_mask[i] {
                continue;
            }
            let l1 = d1[i] / psi.values[i];
            let l2 = d2[i] / psi.values[i];
            gs[i] = hbar * l1.im;
            gr[i] = l1.re;
            cr[i] = l2.re + l1.im * l1.im;
        }
        grad_s.push(gs);
        grad_r_over_r.push(gr);
        curv_r_over_r.push(cr);
        current.push(cur);
    }
    Ok(MadelungFields {
        grid: grid.clone(),
        units: psi.units.clone(),
        time: psi.time,
        psi: psi.values.clone(),
        r,
        s,
        rho,
        node_mask,
        grad_s,
        grad_r_over_r,
        curv_r_over_r,
        current,
        vortices,
        eps_node: threshold,
    })
}

/// Continue the unwrapped phase from `last` to the raw angle `raw`.
fn continue_phase(last: f64, raw: f64) -> f64 {
    last + wrap_angle(raw - last)
}

fn unwrap_line(
    arg: &[f64],
    mask: &[bool],
    idx: &[usize],
    start: usize,
    start_value: f64,
    out: &mut [f64],
) {
    out[idx[start]] = start_value;
    for dir in [1isize, -1] {
        let mut last = start_value;
        let mut k = start as isize + dir;
        while k >= 0 && (k as usize) < idx.len() {
            let i = idx[k as usize];
            if !mask[i] {
                last = continue_phase(last, arg[i]);
            }
            out[i] = last;
            k += dir;
        }
    }
}

/// Unwrap the phase outward from `anchor`: along axis 0 first, then along axis 1
/// from the axis-0 spine. Masked points inherit the nearest unwrapped value on their sweep.
fn unwrap(grid: &Grid, arg: &[f64], mask: &[bool], anchor: usize) -> Vec<f64> {
    let mut out = vec![0.0; arg.len()];
    let a = grid.unravel(anchor);
    let n0 = grid.axis(0).n;
    if grid.dims() == 1 {
        let idx: Vec<usize> = (0..n0).collect();
        unwrap_line(arg, mask, &idx, a[0], arg[anchor], &mut out);
        return out;
    }
    let n1 = grid.axis(1).n;
    let spine: Vec<usize> = (0..n0).map(|i| grid.ravel(&[i, a[1]])).collect();
    unwrap_line(arg, mask, &spine, a[0], arg[anchor], &mut out);
    for i in 0..n0 {
        let row: Vec<usize> = (0..n1).map(|j| grid.ravel(&[i, j])).collect();
        let start_value = out[row[a[1]]];
        unwrap_line(arg, mask, &row, a[1], start_value, &mut out);
    }
    out
}

fn find_vortices(grid: &Grid, arg: &[f64], mask: &[bool]) -> Vec<Vortex> {
    let (n0, n1) = (grid.axis(0).n, grid.axis(1).n);
    let mut out = Vec::new();
    for i in 0..n0 - 1 {
        for j in 0..n1 - 1 {
            let loop_ = [
                grid.ravel(&[i, j]),
                grid.ravel(&[i + 1, j]),
                grid.ravel(&[i + 1, j + 1]),
                grid.ravel(&[i, j + 1]),
            ];
            if loop_.iter().any(|&k| mask[k]) {
                continue;
            }
            let total: f64 = (0..4)
                .map(|k| wrap_angle(arg[loop_[(k + 1) % 4]] - arg[loop_[k]]))
                .sum();
            let winding = (total / (2.0 * PI)).round() as i32;
            if winding != 0 {
                out.push(Vortex {
                    corner: [i, j],
                    winding,
                });
            }
        }
    }
    out
}

impl MadelungFields {
    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    pub fn mass(&self, axis: usize) -> f64 {
        self.units.mass(axis)
    }

    /// `R e^{iS/hbar}` at every point.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let hbar = self.hbar();
        self.r
            .iter()
            .zip(&self.s)
            .map(|(r, s)| Complex64::from_polar(*r, s / hbar))
            .collect()
    }

    /// Quantum potential `-sum_j hbar^2/(2 m_j) (d_j^2 R)/R`; zero on the mask.
    pub fn quantum_potential(&self) -> Vec<f64> {
        let hbar = self.hbar();
        let mut q = vec![0.0; self.grid.len()];
        for (axis, c) in self.curv_r_over_r.iter().enumerate() {
            let f = -hbar * hbar / (2.0 * self.mass(axis));
            for (q, c) in q.iter_mut().zip(c) {
                *q += f * c;
            }
        }
        q
    }

    /// Quantum force `-dQ/dx_axis`, from derivatives of `R` up to third order
    /// rather than by differencing `Q`; zero on the mask.
    pub fn quantum_force(&self, axis: usize) -> Result<Vec<f64>> {
        let grid = &self.grid;
        let hbar = self.hbar();
        let d1 = derivative(grid, &self.r, axis, 1, Parity::Odd)?;
        let mut out = vec![0.0; grid.len()];
        for b in 0..grid.dims() {
            let d2 = derivative(grid, &self.r, b, 2, Parity::Odd)?;
            let d3 = derivative(grid, &d2, axis, 1, Parity::Odd)?;
            let f = hbar * hbar / (2.0 * self.mass(b));
            for i in 0..grid.len() {
                if !self.node_mask[i] {
                    let r = self.r[i];
                    out[i] += f * (d3[i] / r - (d2[i] / r) * (d1[i] / r));
                }
            }
        }
        Ok(out)
    }

    /// Quantum potential restricted to one axis' kinetic term.
    pub fn quantum_potential_axis(&self, axis: usize) -> Vec<f64> {
        let f = -self.hbar() * self.hbar() / (2.0 * self.mass(axis));
        self.curv_r_over_r[axis].iter().map(|c| f * c).collect()
    }

    /// Current velocity `dS/dx_j / m_j` along one axis.
    pub fn v_current(&self, axis: usize) -> Vec<f64> {
        let m = self.mass(axis);
        self.grad_s[axis].iter().map(|g| g / m).collect()
    }

    /// Osmotic velocity `(hbar/m_j) (dR/dx_j)/R` along one axis.
    pub fn v_osmotic(&self, axis: usize) -> Vec<f64> {
        let f = self.hbar() / self.mass(axis);
        self.grad_r_over_r[axis].iter().map(|g| f * g).collect()
    }

    /// Velocity `j / (m rho)` computed from the current, finite wherever `rho > 0`.
    pub fn flow_velocity(&self, axis: usize) -> Vec<f64> {
        let m = self.mass(axis);
        self.current[axis]
            .iter()
            .zip(&self.rho)
            .map(|(j, r)| if *r > 0.0 { j / (m * r) } else { 0.0 })
            .collect()
    }
}

/// Fields at the midpoint of two consecutive time slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityFields {
    pub grid: Grid,
    pub units: UnitSystem,
    pub time: f64,
    pub dt: f64,
    /// Union of the two slice masks.
    pub node_mask: Vec<bool>,
    pub rho: Vec<f64>,
    /// Per axis `dS/dx_j`.
    pub p_bohm: Vec<Vec<f64>>,
    pub v_current: Vec<Vec<f64>>,
    pub v_osmotic: Vec<Vec<f64>>,
    /// `-dS/dt` from the phase change between the slices.
    pub e_bohm: Vec<f64>,
    pub quantum_potential: Vec<f64>,
    /// Per axis `rho dS/dx_j`, defined everywhere.
    pub current: Vec<Vec<f64>>,
}

fn average(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| 0.5 * (a + b)).collect()
}

/// Midpoint velocity and energy fields from slices at `t - dt` (`prev`) and `t` (`cur`).
///
/// `dS/dt` is the wrapped phase increment over `dt`, so `|E dt / hbar| < pi` is required.
pub fn velocities(cur: &MadelungFields, prev: &MadelungFields) -> Result<VelocityFields> {
    cur.grid.ensure_same(&prev.grid)?;
    let dt = cur.time - prev.time;
    if !(dt.abs() > 0.0) {
        return Err(Error::InvalidParameter("time slices must differ".into()));
    }
    let hbar = cur.hbar();
    let node_mask: Vec<bool> = cur
        .node_mask
        .iter()
        .zip(&prev.node_mask)
        .map(|(a, b)| *a || *b)
        .collect();
    let e_bohm: Vec<f64> = cur
        .psi
        .iter()
        .zip(&prev.psi)
        .zip(&node_mask)
        .map(|((c, p), m)| {
            if *m {
                0.0
            } else {
                -hbar * (c * p.conj()).arg() / dt
            }
        })
        .collect();
    let dims = cur.grid.dims();
    let p_bohm: Vec<Vec<f64>> = (0..dims)
        .map(|a| average(&cur.grad_s[a], &prev.grad_s[a]))
        .collect();
    let v_current = (0..dims)
        .map(|a| p_bohm[a].iter().map(|p| p / cur.mass(a)).collect())
        .collect();
    let v_osmotic = (0..dims)
        .map(|a| average(&cur.v_osmotic(a), &prev.v_osmotic(a)))
        .collect();
    let current = (0..dims)
        .map(|a| average(&cur.current[a], &prev.current[a]))
        .collect();
    let mut quantum_potential = average(&cur.quantum_potential(), &prev.quantum_potential());
    let mut p_bohm = p_bohm;
    for (i, m) in node_mask.iter().enumerate() {
        if *m {
            quantum_potential[i] = 0.0;
            for p in p_bohm.iter_mut() {
                p[i] = 0.0;
            }
        }
    }
    Ok(VelocityFields {
        grid: cur.grid.clone(),
        units: cur.units.clone(),
        time: 0.5 * (cur.time + prev.time),
        dt,
        node_mask,
        rho: average(&cur.rho, &prev.rho),
        p_bohm,
        v_current,
        v_osmotic,
        e_bohm,
        quantum_potential,
        current,
    })
}

/// Quantum potential of a decomposition.
pub fn quantum_potential(fields: &MadelungFields) -> Vec<f64> {
    fields.quantum_potential()
}

/// Dilate a mask by `width` points along every axis.
pub fn collar(grid: &Grid, mask: &[bool], width: usize) -> Vec<bool> {
    let mut out = mask.to_vec();
    for axis in 0..grid.dims() {
        let n = grid.axis(axis).n as isize;
        let stride = grid.stride(axis);
        let src = out.clone();
        for i in 0..src.len() {
            if !src[i] {
                continue;
            }
            let pos = grid.unravel(i)[axis] as isize;
            for d in -(width as isize)..=(width as isize) {
                let p = pos + d;
                if p >= 0 && p < n {
                    let j = (i as isize + d * stride as isize) as usize;
                    out[j] = true;
                }
            }
        }
    }
    out
}
