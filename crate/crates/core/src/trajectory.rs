//! Bohm flow lines `dx/dt = grad S / m` through a sampled evolution.
//!
//! Velocities are taken from the current velocity field of every trace sample,
//! interpolated with 4-point Lagrange stencils in space (tensor product in 2D)
//! and linearly between sample times. Each field interval is crossed with
//! `substeps` classical RK4 steps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::integrate;
use crate::error::{Error, Result};
use crate::field::WaveFunction;
use crate::grid::{Boundary, Grid};
use crate::madelung::{decompose, velocities, MadelungFields};
use crate::potential::Potential;
use crate::solver::{evolve, EvolutionSpec, Trace};
use crate::units::UnitSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineStatus {
    Complete,
    /// Entered the node mask.
    Node,
    /// Crossed a non-periodic grid edge.
    LeftGrid,
}

impl LineStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LineStatus::Complete => "complete",
            LineStatus::Node => "node",
            LineStatus::LeftGrid => "left grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Quantum potential at `x`.
    pub q: f64,
    /// Bohm energy `-dS/dt` at `x`.
    pub e_bohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowLine {
    pub id: usize,
    pub seed: Vec<f64>,
    pub samples: Vec<FlowSample>,
    pub status: LineStatus,
    /// Time at which integration stopped.
    pub end_time: f64,
    /// Position at `end_time`.
    pub end: Vec<f64>,
}

impl FlowLine {
    pub fn final_position(&self) -> &[f64] {
        &self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    /// RK4 steps per field interval.
    pub substeps: usize,
    /// Record every this many trace samples (the first and last are always kept).
    pub record_every: usize,
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec {
            substeps: 4,
            record_every: 1,
        }
    }
}

/// Velocity, quantum potential, Bohm energy and node mask at every trace sample.
#[derive(Debug, Clone)]
pub struct FlowField {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub velocity: Vec<Vec<Vec<f64>>>,
    pub q: Vec<Vec<f64>>,
    pub e_bohm: Vec<Vec<f64>>,
    pub mask: Vec<Vec<bool>>,
}

impl FlowField {
    pub fn from_trace(trace: &Trace) -> Result<Self> {
        if trace.samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "flow lines need at least two trace samples".into(),
            ));
        }
        let grid = trace.grid().clone();
        let fields: Vec<MadelungFields> = trace
            .samples
            .par_iter()
            .map(decompose)
            .collect::<Result<_>>()?;
        let mids: Vec<Vec<f64>> = fields
            .par_windows(2)
            .map(|w| velocities(&w[1], &w[0]).map(|v| v.e_bohm))
            .collect::<Result<_>>()?;
        let k = fields.len();
        let e_bohm = (0..k)
            .map(|i| match i {
                0 => mids[0].clone(),
                _ if i == k - 1 => mids[k - 2].clone(),
                _ => mids[i - 1]
                    .iter()
                    .zip(&mids[i])
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect(),
            })
            .collect();
        Ok(FlowField {
            times: trace.times(),
            velocity: fields
                .iter()
                .map(|f| (0..grid.dims()).map(|a| f.v_current(a)).collect())
                .collect(),
            q: fields.iter().map(|f| f.quantum_potential()).collect(),
            mask: fields.iter().map(|f| f.node_mask.clone()).collect(),
            e_bohm,
            grid,
        })
    }

    fn check_seed(&self, seed: &[f64]) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::BadSeed {
                seed: seed.to_vec(),
                reason: reason.into(),
            })
        };
        if seed.len() != self.grid.dims() {
            return bad("dimension does not match the grid");
        }
        if !inside(&self.grid, seed) {
            return bad("outside the grid");
        }
        if self.masked(0, seed) {
            return bad("on the node mask");
        }
        Ok(())
    }

    fn masked(&self, k: usize, x: &[f64]) -> bool {
        self.mask[k][nearest(&self.grid, x)]
    }

    fn velocity_at(&self, k: usize, frac: f64, x: &[f64]) -> Vec<f64> {
        (0..self.grid.dims())
            .map(|a| {
                let v0 = interpolate(&self.grid, &self.velocity[k][a], x);
                if frac == 0.0 {
                    v0
                } else {
                    (1.0 - frac) * v0 + frac * interpolate(&self.grid, &self.velocity[k + 1][a], x)
                }
            })
            .collect()
    }

    fn sample(&self, k: usize, x: &[f64]) -> FlowSample {
        FlowSample {
            t: self.times[k],
            x: x.to_vec(),
            v: self.velocity_at(k, 0.0, x),
            q: interpolate(&self.grid, &self.q[k], x),
            e_bohm: interpolate(&self.grid, &self.e_bohm[k], x),
        }
    }

    /// Integrate one line from the first sample time to the last.
    pub fn integrate_line(&self, id: usize, seed: &[f64], spec: &FlowSpec) -> Result<FlowLine> {
        self.check_seed(seed)?;
        let n = self.times.len();
        let mut x = seed.to_vec();
        let mut samples = vec![self.sample(0, &x)];
        let mut status = LineStatus::Complete;
        let mut end_time = self.times[0];
        'outer: for k in 0..n - 1 {
            let dt = self.times[k + 1] - self.times[k];
            let h = dt / spec.substeps as f64;
            for s in 0..spec.substeps {
                let f0 = s as f64 / spec.substeps as f64;
                let fh = (s as f64 + 0.5) / spec.substeps as f64;
                let f1 = (s + 1) as f64 / spec.substeps as f64;
                let k1 = self.velocity_at(k, f0, &x);
                let k2 = self.velocity_at(k, fh, &axpy(&x, 0.5 * h, &k1));
                let k3 = self.velocity_at(k, fh, &axpy(&x, 0.5 * h, &k2));
                let k4 = self.velocity_at(k, f1, &axpy(&x, h, &k3));
                for a in 0..x.len() {
                    x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
                }
                end_time = self.times[k] + f1 * dt;
                if !x.iter().all(|v| v.is_finite()) || !inside(&self.grid, &x) {
                    status = LineStatus::LeftGrid;
                    break 'outer;
                }
                if self.masked(k, &x) || self.masked(k + 1, &x) {
                    status = LineStatus::Node;
                    break 'outer;
                }
            }
            if (k + 1) % spec.record_every == 0 || k + 1 == n - 1 {
                samples.push(self.sample(k + 1, &x));
            }
        }
        Ok(FlowLine {
            id,
            seed: seed.to_vec(),
            samples,
            status,
            end_time,
            end: x,
        })
    }

    /// Integrate every seed in parallel; output order follows `seeds`.
    pub fn integrate(&self, seeds: &[Vec<f64>], spec: &FlowSpec) -> Result<Vec<FlowLine>> {
        if spec.substeps == 0 || spec.record_every == 0 {
            return Err(Error::InvalidParameter(
                "substeps and record_every must be >= 1".into(),
            ));
        }
        seeds
            .par_iter()
            .enumerate()
            .map(|(id, s)| self.integrate_line(id, s, spec))
            .collect()
    }
}

/// Flow lines through `trace` from each seed.
pub fn integrate_flowlines(
    trace: &Trace,
    seeds: &[Vec<f64>],
    spec: &FlowSpec,
) -> Result<Vec<FlowLine>> {
    FlowField::from_trace(trace)?.integrate(seeds, spec)
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| x + a * y).collect()
}

/// Periodic axes are unbounded (positions are kept unwrapped); other axes end
/// at the first and last sample.
fn inside(grid: &Grid, x: &[f64]) -> bool {
    grid.boundary() == Boundary::Periodic
        || x.iter().enumerate().all(|(a, v)| {
            let ax = grid.axis(a);
            *v >= ax.x_min && *v <= ax.x_min + (ax.n - 1) as f64 * ax.dx()
        })
}

fn nearest(grid: &Grid, x: &[f64]) -> usize {
    let idx: Vec<usize> = x
        .iter()
        .enumerate()
        .map(|(a, v)| {
            let ax = grid.axis(a);
            let i = ((v - ax.x_min) / ax.dx()).round() as i64;
            if grid.boundary() == Boundary::Periodic {
                i.rem_euclid(ax.n as i64) as usize
            } else {
                i.clamp(0, ax.n as i64 - 1) as usize
            }
        })
        .collect();
    grid.ravel(&idx)
}

/// First stencil index and the four Lagrange weights along one axis.
fn stencil(grid: &Grid, axis: usize, x: f64) -> (i64, [f64; 4]) {
    let ax = grid.axis(axis);
    let s = (x - ax.x_min) / ax.dx();
    let mut base = s.floor() as i64 - 1;
    if grid.boundary() != Boundary::Periodic {
        base = base.clamp(0, ax.n as i64 - 4);
    }
    let u = s - base as f64;
    let w = [
        -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
        u * (u - 2.0) * (u - 3.0) / 2.0,
        -u * (u - 1.0) * (u - 3.0) / 2.0,
        u * (u - 1.0) * (u - 2.0) / 6.0,
    ];
    (base, w)
}

/// Cubic (1D) or bicubic (2D) Lagrange interpolation of a grid field.
pub fn interpolate(grid: &Grid, values: &[f64], x: &[f64]) -> f64 {
    let wrap = |axis: usize, i: i64| -> usize {
        let n = grid.axis(axis).n as i64;
        if grid.boundary() == Boundary::Periodic {
            i.rem_euclid(n) as usize
        } else {
            i.clamp(0, n - 1) as usize
        }
    };
    match grid.dims() {
        1 => {
            let (b, w) = stencil(grid, 0, x[0]);
            (0..4).map(|j| w[j] * values[wrap(0, b + j as i64)]).sum()
        }
        _ => {
            let (b0, w0) = stencil(grid, 0, x[0]);
            let (b1, w1) = stencil(grid, 1, x[1]);
            let mut acc = 0.0;
            for i in 0..4 {
                let r = wrap(0, b0 + i as i64);
                for j in 0..4 {
                    acc += w0[i] * w1[j] * values[grid.ravel(&[r, wrap(1, b1 + j as i64)])];
                }
            }
            acc
        }
    }
}

/// `count` seeds at the density quantiles `(i + 1/2)/count` of a 1D `rho`.
pub fn quantile_seeds(grid: &Grid, rho: &[f64], count: usize) -> Result<Vec<Vec<f64>>> {
    if grid.dims() != 1 {
        return Err(Error::Unsupported("quantile seeding on a 2D grid".into()));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("seed count must be >= 1".into()));
    }
    let x = grid.points(0);
    let dx = grid.dx(0);
    // cumulative trapezoid, so the cdf is piecewise linear between samples
    let mut cdf = vec![0.0; x.len()];
    for i in 1..x.len() {
        cdf[i] = cdf[i - 1] + 0.5 * dx * (rho[i - 1] + rho[i]);
    }
    let total = *cdf.last().unwrap_or(&0.0);
    if !(total > 0.0) {
        return Err(Error::AllMasked);
    }
    let mut out = Vec::with_capacity(count);
    let mut j = 1;
    for i in 0..count {
        let target = (i as f64 + 0.5) / count as f64 * total;
        while j < x.len() - 1 && cdf[j] < target {
            j += 1;
        }
        let (c0, c1) = (cdf[j - 1], cdf[j]);
        let f = if c1 > c0 {
            (target - c0) / (c1 - c0)
        } else {
            0.5
        };
        out.push(vec![x[j - 1] + f * dx]);
    }
    Ok(out)
}

/// Endpoint histogram of equally weighted lines against `int_bin rho`, as an L1 distance.
pub fn endpoint_l1(grid: &Grid, rho: &[f64], lines: &[FlowLine], bins: usize) -> f64 {
    let x = grid.points(0);
    let (lo, hi) = (x[0], x[x.len() - 1]);
    let width = (hi - lo) / bins as f64;
    let mut hist = vec![0.0; bins];
    for l in lines {
        let b = ((l.end[0] - lo) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            hist[b as usize] += 1.0 / lines.len() as f64;
        }
    }
    let mut mass = vec![0.0; bins];
    let dx = grid.dx(0);
    let norm = integrate(grid, rho);
    for i in 0..x.len() - 1 {
        // trapezoid cell [x_i, x_{i+1}] split at bin edges by linear interpolation
        let (a, b) = (x[i], x[i + 1]);
        let mut s = a;
        while s < b {
            let bin = (((s - lo) / width).floor() as usize).min(bins - 1);
            let e = (lo + (bin + 1) as f64 * width).min(b);
            let lerp = |t: f64| rho[i] + (rho[i + 1] - rho[i]) * (t - a) / dx;
            mass[bin] += 0.5 * (lerp(s) + lerp(e)) * (e - s) / norm;
            if e <= s {
                break;
            }
            s = e;
        }
    }
    hist.iter().zip(&mass).map(|(h, m)| (h - m).abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSlitSpec {
    /// Slit separation `d`; zero gives a single slit.
    pub separation: f64,
    /// Slit width `s`, used as the standard deviation of each slit packet's density.
    pub slit_width: f64,
    /// Longitudinal packet momentum `p0`; sets the flight time `screen_distance m / p0`.
    pub momentum: f64,
    pub screen_distance: f64,
    pub half_width: f64,
    pub n_points: usize,
    pub n_lines: usize,
    /// Field sample spacing.
    pub dt: f64,
}

impl Default for TwoSlitSpec {
    fn default() -> Self {
        TwoSlitSpec {
            separation: 4.0,
            slit_width: 0.5,
            momentum: 1.0,
            screen_distance: 3.0,
            half_width: 40.0,
            n_points: 1024,
            n_lines: 10_000,
            dt: 0.01,
        }
    }
}

impl TwoSlitSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.slit_width > 0.0) {
            return bad(format!("slit width must be > 0, got {}", self.slit_width));
        }
        if self.separation != 0.0 && !(self.separation > self.slit_width) {
            return bad(format!(
                "need d > s (or d = 0), got d = {}, s = {}",
                self.separation, self.slit_width
            ));
        }
        if !(self.momentum > 0.0
            && self.screen_distance > 0.0
            && self.half_width > 0.0
            && self.dt > 0.0)
        {
            return bad("momentum, screen distance, half width and dt must be > 0".into());
        }
        if self.n_lines < 100 {
            return bad(format!(
                "at least 100 flow lines are required, got {}",
                self.n_lines
            ));
        }
        Ok(())
    }

    pub fn flight_time(&self, units: &UnitSystem) -> f64 {
        self.screen_distance * units.mass(0) / self.momentum
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSlitResult {
    pub grid: Grid,
    pub t_final: f64,
    pub lines: Vec<FlowLine>,
    /// Transverse density at `t_final`.
    pub density: Vec<f64>,
    /// Lines whose sign of `x` changed at any recorded sample.
    pub axis_crossings: usize,
    /// Max `|x_i + x_{N-1-i}|` over mirrored seed pairs and samples.
    pub symmetry_error: f64,
    /// Number of adjacent line pairs whose order flipped.
    pub order_violations: usize,
    pub endpoint_l1: f64,
    pub terminated: usize,
}

/// Transverse two-slit run: the two slit packets spread freely for the flight time.
pub fn two_slit_run(spec: &TwoSlitSpec, units: &UnitSystem) -> Result<TwoSlitResult> {
    spec.validate()?;
    let grid = Grid::periodic(spec.n_points, -spec.half_width, spec.half_width)?;
    let t_final = spec.flight_time(units);
    if spec.separation > 0.0 {
        let fringe =
            2.0 * std::f64::consts::PI * units.hbar * t_final / (units.mass(0) * spec.separation);
        if fringe < 4.0 * grid.dx(0) {
            return Err(Error::Guard {
                guard: "fringe resolution",
                detail: format!(
                    "fringe spacing {fringe:.4} is below 4 dx = {:.4}",
                    4.0 * grid.dx(0)
                ),
            });
        }
    }
    let half = 0.5 * spec.separation;
    let a = WaveFunction::gaussian(&grid, units, -half, 0.0, spec.slit_width)?;
    let b = WaveFunction::gaussian(&grid, units, half, 0.0, spec.slit_width)?;
    let sum: Vec<Complex64> = a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect();
    let psi = a.with_values(sum, 0.0).normalized()?;
    let steps = (t_final / spec.dt).round().max(1.0) as usize;
    let trace = evolve(
        &psi,
        &Potential::Free,
        &EvolutionSpec::new(t_final / steps as f64, steps, 1),
    )?;
    let seeds = quantile_seeds(&grid, &psi.density(), spec.n_lines)?;
    let record_every = (steps / 50).max(1);
    let lines = integrate_flowlines(
        &trace,
        &seeds,
        &FlowSpec {
            substeps: 4,
            record_every,
        },
    )?;
    let density = trace.last().density();
    let endpoint_l1 = endpoint_l1(&grid, &density, &lines, 200);
    Ok(TwoSlitResult {
        axis_crossings: axis_crossings(&lines),
        symmetry_error: symmetry_error(&lines),
        order_violations: order_violations(&lines),
        terminated: lines
            .iter()
            .filter(|l| l.status != LineStatus::Complete)
            .count(),
        grid,
        t_final,
        lines,
        density,
        endpoint_l1,
    })
}

/// Lines whose position changed sign relative to their seed.
pub fn axis_crossings(lines: &[FlowLine]) -> usize {
    lines
        .iter()
        .filter(|l| {
            let s = l.seed[0].signum();
            l.samples
                .iter()
                .map(|p| p.x[0])
                .chain(std::iter::once(l.end[0]))
                .any(|x| x * s < 0.0)
        })
        .count()
}

fn symmetry_error(lines: &[FlowLine]) -> f64 {
    let n = lines.len();
    let mut err: f64 = 0.0;
    for i in 0..n / 2 {
        let (a, b) = (&lines[i], &lines[n - 1 - i]);
        for (p, q) in a.samples.iter().zip(&b.samples) {
            err = err.max((p.x[0] + q.x[0]).abs());
        }
    }
    err
}

/// Adjacent pairs (in seed order) whose ordering flips at some common sample.
pub fn order_violations(lines: &[FlowLine]) -> usize {
    lines
        .windows(2)
        .filter(|w| {
            let sign = (w[1].seed[0] - w[0].seed[0]).signum();
            w[0].samples
                .iter()
                .zip(&w[1].samples)
                .any(|(a, b)| (b.x[0] - a.x[0]) * sign < 0.0)
        })
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCompareSpec {
    pub potential: Potential,
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub mass: f64,
    pub x0: f64,
    pub p0: f64,
    /// Packet width, held fixed across the ladder.
    pub sigma: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Step of the classical leapfrog oracle.
    pub dt_classical: f64,
    pub hbar_ladder: Vec<f64>,
}

impl ClassicalCompareSpec {
    /// Quartic `0.004 x^4` with a packet launched from the origin at `p0 = 1`.
    ///
    /// The packet is wide enough to stay WKB-like at `hbar = 1` and the well soft
    /// enough that no classical caustic forms before `t = 1`.
    pub fn quartic() -> Self {
        ClassicalCompareSpec {
            potential: Potential::Quartic { lambda: 0.004 },
            n_points: 512,
            x_min: -10.0,
            x_max: 10.0,
            mass: 1.0,
            x0: 0.0,
            p0: 1.0,
            sigma: 1.2,
            t_final: 1.0,
            dt: 2.5e-4,
            dt_classical: 1e-4,
            hbar_ladder: vec![1.0, 0.5, 0.25, 0.125],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCompareRow {
    pub hbar: f64,
    /// Max over sample times of `|x_Bohm - x_classical|`.
    pub max_error: f64,
    /// Density-weighted L2 norm of `Q` at `t_final`.
    pub q_norm: f64,
    pub status: LineStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCompareReport {
    pub rows: Vec<ClassicalCompareRow>,
    pub monotone: bool,
    /// First-row error over last-row error.
    pub reduction: f64,
    /// Least-squares slope of `ln |Q|` against `ln hbar`.
    pub q_slope: f64,
}

/// Velocity Verlet for `m x'' = -V'(x)`; positions at `n_out + 1` evenly spaced times up to `t_final`.
pub fn leapfrog(
    potential: &Potential,
    grid: &Grid,
    units: &UnitSystem,
    x0: f64,
    p0: f64,
    t_final: f64,
    n_out: usize,
    dt_max: f64,
) -> Result<Vec<f64>> {
    let m = units.mass(0);
    let force = |x: f64| -> Result<f64> { Ok(-potential.gradient_at(&[x], units, grid)?[0]) };
    let interval = t_final / n_out as f64;
    let sub = (interval / dt_max).ceil().max(1.0) as usize;
    let h = interval / sub as f64;
    let (mut x, mut p) = (x0, p0);
    let mut f = force(x)?;
    let mut out = vec![x];
    for _ in 0..n_out {
        for _ in 0..sub {
            p += 0.5 * h * f;
            x += h * p / m;
            f = force(x)?;
            p += 0.5 * h * f;
        }
        out.push(x);
    }
    Ok(out)
}

/// Central Bohm flow line against the classical trajectory for each `hbar`.
pub fn classical_compare(spec: &ClassicalCompareSpec) -> Result<ClassicalCompareReport> {
    if spec.hbar_ladder.len() < 2 {
        return Err(Error::InvalidParameter(
            "hbar ladder needs at least two entries".into(),
        ));
    }
    let grid = Grid::periodic(spec.n_points, spec.x_min, spec.x_max)?;
    let steps = (spec.t_final / spec.dt).round().max(1.0) as usize;
    let dt = spec.t_final / steps as f64;
    let mut rows = Vec::new();
    for &hbar in &spec.hbar_ladder {
        let units = UnitSystem::new(hbar, vec![spec.mass])?;
        let classical = leapfrog(
            &spec.potential,
            &grid,
            &units,
            spec.x0,
            spec.p0,
            spec.t_final,
            steps,
            spec.dt_classical,
        )?;
        let psi = WaveFunction::gaussian(&grid, &units, spec.x0, spec.p0, spec.sigma)?;
        let trace = evolve(&psi, &spec.potential, &EvolutionSpec::new(dt, steps, 1))?;
        let line = &integrate_flowlines(&trace, &[vec![spec.x0]], &FlowSpec::default())?[0];
        let max_error = line
            .samples
            .iter()
            .zip(&classical)
            .map(|(s, c)| (s.x[0] - c).abs())
            .fold(0.0, f64::max);
        let last = decompose(trace.last())?;
        let w: Vec<f64> = last
            .quantum_potential()
            .iter()
            .zip(&last.rho)
            .map(|(q, r)| q * q * r)
            .collect();
        rows.push(ClassicalCompareRow {
            hbar,
            max_error,
            q_norm: integrate(&grid, &w).sqrt(),
            status: line.status,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].max_error < w[0].max_error);
    let reduction = rows[0].max_error / rows[rows.len() - 1].max_error;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.hbar.ln(), r.q_norm.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let q_slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    Ok(ClassicalCompareReport {
        rows,
        monotone,
        reduction,
        q_slope,
    })
}
