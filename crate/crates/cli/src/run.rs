//! Scenario execution, artifact writing and the JSON report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qflow::analytic::OracleCase;
use qflow::emtensor::{
    global_checks, liouville_residual, qhj_residual, spectral_moment, tensor_components,
};
use qflow::io;
use qflow::madelung::{decompose, velocities};
use qflow::phasespace::{project_to_configuration, wigner_transform, Hamiltonian};
use qflow::solver::{evolve, prepare_eigenstate, EvolutionSpec, Trace};
use qflow::trajectory::{
    endpoint_l1, integrate_flowlines, order_violations, quantile_seeds, two_slit_run, FlowSpec,
};
use qflow::weak::{expectation_from_weak, weak_momentum, weak_p_squared};
use qflow::{Grid, Potential, UnitSystem, WaveFunction};
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cases;
use crate::config::{InitialSpec, Scenario, DEFAULT_TOLERANCES};

/// Below this many flow lines the endpoint histogram is reported but not checked.
pub const MIN_LINES_FOR_L1: usize = 10_000;

/// Histogram bins for the endpoint-vs-density comparison.
const L1_BINS: usize = 200;

#[derive(Debug, Error)]
pub enum RunError {
    /// Bad input discovered while building the run.
    #[error("{0}")]
    Input(String),
    /// A numerical guard or convergence failure inside the library.
    #[error("{0}")]
    Numerical(qflow::Error),
    #[error("{0}")]
    Io(String),
}

impl From<qflow::Error> for RunError {
    fn from(e: qflow::Error) -> Self {
        match e {
            qflow::Error::Io(m) => RunError::Io(m),
            e if e.is_numerical() => RunError::Numerical(e),
            e => RunError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed_count: Option<usize>,
    pub hbar: Option<f64>,
    /// Keep only checks with this name (or `oracle.<name>`).
    pub check: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Label of the measured value: `Linf`, `max_error`, `count`, ...
    pub metric: &'static str,
    pub value: f64,
    /// Secondary values reported next to the main one.
    pub extra: Vec<(&'static str, f64)>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, metric: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            metric,
            value,
            extra: Vec::new(),
            tolerance,
            pass: value <= tolerance,
        }
    }

    fn with(mut self, key: &'static str, v: f64) -> Self {
        self.extra.push((key, v));
        self
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert(self.metric.into(), json!(self.value));
        for (k, v) in &self.extra {
            m.insert((*k).into(), json!(v));
        }
        m.insert("tolerance".into(), json!(self.tolerance));
        m.insert("pass".into(), json!(self.pass));
        Value::Object(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub out_dir: PathBuf,
    pub checks: Vec<Check>,
    pub info: Map<String, Value>,
    pub config_tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let checks: Map<String, Value> = self
            .checks
            .iter()
            .map(|c| (c.name.clone(), c.to_json()))
            .collect();
        let defaults: Map<String, Value> = DEFAULT_TOLERANCES
            .iter()
            .map(|(k, v)| ((*k).into(), json!(v)))
            .collect();
        json!({
            "scenario": self.scenario,
            "pass": self.pass(),
            "checks": checks,
            "tolerances": { "defaults": defaults, "config": self.config_tolerances },
            "info": self.info,
            "outputs": self.outputs,
        })
    }
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    dir: PathBuf,
    checks: Vec<Check>,
    info: Map<String, Value>,
    outputs: Vec<String>,
}

impl Ctx<'_> {
    fn tol(&self, key: &str) -> f64 {
        self.scenario.tolerance(key)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.into());
        self.dir.join(name)
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            m.max(v.abs())
        }
    })
}

fn units_for(s: &Scenario, opts: &RunOptions) -> Result<UnitSystem, RunError> {
    let mut spec = s.units.clone();
    if let Some(h) = opts.hbar {
        spec.hbar = h;
    }
    Ok(spec.build()?)
}

/// Run a validated scenario and write every artifact plus `report.json`.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Report, RunError> {
    let dir = opts
        .out
        .clone()
        .or_else(|| s.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").join(&s.name));
    std::fs::create_dir_all(&dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    let mut ctx = Ctx {
        scenario: s,
        dir,
        checks: Vec::new(),
        info: Map::new(),
        outputs: Vec::new(),
    };
    let units = units_for(s, opts)?;
    ctx.info.insert("hbar".into(), json!(units.hbar));

    if let Some(spec) = s.initial.two_slit(
        opts.seed_count
            .or(s.analyses.trajectories.as_ref().map(|t| t.seeds)),
    ) {
        run_two_slit(&mut ctx, &spec, &units)?;
    } else {
        let (grid, potential, psi, case) = initial_state(s, &units)?;
        let spec = match (&s.evolution, &case) {
            (Some(e), _) => Some(EvolutionSpec::new(e.dt, e.steps, e.sample_every)),
            (None, Some(c)) => c.dt.map(|dt| EvolutionSpec::new(dt, 1, 1)),
            (None, None) => None,
        };
        let trace = match spec {
            Some(spec) => evolve(&psi, &potential, &spec)?,
            None => {
                let v = potential.sample(&grid, &units)?;
                Trace {
                    norms: vec![psi.norm()],
                    energies: vec![psi.energy(&v)?],
                    potential: v,
                    dt: 0.0,
                    samples: vec![psi],
                }
            }
        };
        if let Some(c) = &case {
            oracle_checks(&mut ctx, c)?;
        }
        run_analyses(&mut ctx, &trace, &potential, &units, opts)?;
    }

    if let Some(name) = &opts.check {
        let suffix = format!(".{name}");
        ctx.checks
            .retain(|c| &c.name == name || c.name.ends_with(&suffix));
        if ctx.checks.is_empty() {
            return Err(RunError::Input(format!(
                "no check named `{name}` in this run"
            )));
        }
    }
    ctx.outputs.push("report.json".into());
    ctx.outputs.sort();
    let report = Report {
        scenario: s.name.clone(),
        out_dir: ctx.dir.clone(),
        checks: ctx.checks,
        info: ctx.info,
        config_tolerances: s.tolerances.clone(),
        outputs: ctx.outputs,
    };
    io::write_json(&report.to_json(), &ctx.dir.join("report.json"))?;
    Ok(report)
}

fn initial_state(
    s: &Scenario,
    units: &UnitSystem,
) -> Result<(Grid, Potential, WaveFunction, Option<OracleCase>), RunError> {
    match &s.initial {
        InitialSpec::Case { name } => {
            let entry = cases::find(name)
                .ok_or_else(|| RunError::Input(format!("unknown case `{name}`")))?;
            let c = (entry.build)(units)?;
            Ok((c.grid.clone(), c.potential.clone(), c.psi.clone(), Some(c)))
        }
        InitialSpec::Gaussian { x0, p0, sigma } => {
            let (grid, pot) = grid_and_potential(s)?;
            let psi = WaveFunction::gaussian(&grid, units, *x0, *p0, *sigma)?;
            Ok((grid, pot, psi, None))
        }
        InitialSpec::Eigenstate { n } => {
            let (grid, pot) = grid_and_potential(s)?;
            let psi = prepare_eigenstate(&grid, units, &pot, *n)?;
            Ok((grid, pot, psi, None))
        }
        InitialSpec::TwoSlit { .. } => Err(RunError::Input(
            "two-slit scenarios run through run_two_slit".into(),
        )),
    }
}

fn grid_and_potential(s: &Scenario) -> Result<(Grid, Potential), RunError> {
    let g = s
        .grid
        .as_ref()
        .ok_or_else(|| RunError::Input("missing [grid]".into()))?
        .build()?;
    let p = s
        .potential
        .as_ref()
        .ok_or_else(|| RunError::Input("missing [potential]".into()))?
        .build();
    Ok((g, p))
}

fn oracle_checks(ctx: &mut Ctx, case: &OracleCase) -> Result<(), RunError> {
    for o in case.check()? {
        let key = serde_json::to_value(o.quantity)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let mut c = Check::new(
            &format!("oracle.{key}"),
            "max_error",
            o.max_error,
            o.tolerance,
        )
        .with("points", o.points as f64);
        c.pass = o.passed;
        ctx.check(c);
    }
    ctx.info.insert("case".into(), json!(case.name));
    ctx.info.insert("energy".into(), json!(case.energy));
    Ok(())
}

fn run_analyses(
    ctx: &mut Ctx,
    trace: &Trace,
    potential: &Potential,
    units: &UnitSystem,
    opts: &RunOptions,
) -> Result<(), RunError> {
    let a = ctx.scenario.analyses.clone();
    let grid = trace.grid().clone();
    let dir = ctx.dir.join("trace");
    io::write_trace(trace, &dir)?;
    for k in 0..trace.samples.len() {
        ctx.outputs.push(format!("trace/psi_{k:04}.csv"));
        ctx.outputs.push(format!("trace/psi_{k:04}.json"));
    }
    ctx.outputs.push("trace/manifest.json".into());
    ctx.info.insert("times".into(), json!(trace.times()));

    let n0 = trace.norms[0];
    let norm_drift = max_abs(trace.norms.iter().map(|n| n - n0));
    let c = Check::new("norm_drift", "max_abs", norm_drift, ctx.tol("norm_drift"));
    ctx.check(c);
    let e0 = trace.energies[0];
    let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
    let energy_drift = max_abs(trace.energies.iter().map(|e| (e - e0) / scale));
    let c = Check::new(
        "energy_drift",
        "max_rel",
        energy_drift,
        ctx.tol("energy_drift"),
    );
    ctx.check(c);

    let last = trace.last();
    if a.madelung {
        let f = decompose(last)?;
        let p = ctx.path("madelung.csv");
        io::write_madelung(&f, &p)?;
    }
    if a.emtensor {
        emtensor(ctx, trace)?;
    }
    if a.weakvalues {
        weakvalues(ctx, last)?;
    }
    if let Some(t) = &a.trajectories {
        let n = opts.seed_count.unwrap_or(t.seeds);
        let seeds = quantile_seeds(&grid, &trace.samples[0].density(), n)?;
        let lines = integrate_flowlines(
            trace,
            &seeds,
            &FlowSpec {
                substeps: t.substeps,
                record_every: 1,
            },
        )?;
        flowlines(ctx, &lines, &grid, &last.density())?;
    }
    if a.phasespace {
        let f = wigner_transform(last)?;
        let p = ctx.path("wigner.csv");
        io::write_phase_space(&f, &p)?;
        ctx.outputs.push("wigner.json".into());
        let rho = last.density();
        let marg = max_abs(f.position_marginal().iter().zip(&rho).map(|(a, b)| a - b));
        let c = Check::new(
            "wigner_marginal",
            "max_abs",
            marg,
            ctx.tol("wigner_marginal"),
        );
        ctx.check(c);
        let c = Check::new(
            "wigner_norm",
            "abs",
            (f.integral() - last.norm()).abs(),
            ctx.tol("wigner_norm"),
        )
        .with("min_F", f.min());
        ctx.check(c);
    }
    if a.projections {
        projections(ctx, trace, potential, units)?;
    }
    Ok(())
}

fn emtensor(ctx: &mut Ctx, trace: &Trace) -> Result<(), RunError> {
    if trace.samples.len() < 2 {
        return Err(RunError::Input(
            "emtensor needs at least two trace samples".into(),
        ));
    }
    let r = global_checks(trace)?;
    let c = Check::new("qhj_residual", "Linf", r.qhj.linf, ctx.tol("qhj_residual"))
        .with("L2", r.qhj.l2);
    ctx.check(c);
    let c = Check::new(
        "liouville_residual",
        "Linf",
        r.liouville.linf,
        ctx.tol("liouville_residual"),
    )
    .with("L2", r.liouville.l2);
    ctx.check(c);
    let p = ctx.path("conservation.json");
    io::write_json(&r, &p)?;

    let k = trace.samples.len() - 1;
    let prev = decompose(&trace.samples[k - 1])?;
    let cur = decompose(&trace.samples[k])?;
    let vel = velocities(&cur, &prev)?;
    let q = qhj_residual(&vel, &trace.potential)?;
    let l = liouville_residual(&cur, &prev)?;
    let mask: Vec<f64> = vel
        .node_mask
        .iter()
        .map(|m| f64::from(u8::from(*m)))
        .collect();
    let p = ctx.path("residuals.csv");
    io::write_columns(
        &vel.grid,
        &[("qhj", &q), ("liouville", &l), ("mask", &mask)],
        &p,
    )?;
    let t = tensor_components(&vel, &trace.potential)?;
    let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
    let d = vel.grid.dims();
    for (j, t0j) in t.t0j.iter().enumerate() {
        cols.push((
            if d == 1 {
                "t0j".into()
            } else {
                format!("t0j_{}", j + 1)
            },
            t0j.clone(),
        ));
    }
    cols.push(("t00".into(), t.t00_term.clone()));
    cols.push(("kinetic".into(), t.kinetic_energy.clone()));
    cols.push(("osmotic".into(), t.osmotic_ke.clone()));
    cols.push(("qpe".into(), t.qpe.clone()));
    cols.push(("potential".into(), t.potential_energy.clone()));
    cols.push(("mask".into(), mask));
    let refs: Vec<(&str, &[f64])> = cols
        .iter()
        .map(|(n, v)| (n.as_str(), v.as_slice()))
        .collect();
    let p = ctx.path("emtensor.csv");
    io::write_columns(&vel.grid, &refs, &p)?;
    Ok(())
}

fn weakvalues(ctx: &mut Ctx, psi: &WaveFunction) -> Result<(), RunError> {
    let p = weak_momentum(psi)?;
    let p2 = weak_p_squared(psi)?;
    let path = ctx.path("weak.csv");
    io::write_weak_momentum(&p, &path)?;
    let c = Check::new(
        "weak_routes",
        "max_abs",
        p.route_discrepancy.max(p2.route_discrepancy),
        ctx.tol("weak_routes"),
    );
    ctx.check(c);
    if let (Some(s1), Some(s2)) = (spectral_moment(psi, 0, 1), spectral_moment(psi, 0, 2)) {
        let w1 = expectation_from_weak(&psi.grid, &p.rho, &p.real_part[0], None);
        let w2 = expectation_from_weak(&psi.grid, &p2.rho, &p2.real_part, None);
        let err = (w1 - s1).abs().max((w2 - s2).abs());
        let c = Check::new("weak_identity", "max_abs", err, ctx.tol("weak_identity"))
            .with("P", s1)
            .with("P2", s2);
        ctx.check(c);
    }
    Ok(())
}

fn flowlines(
    ctx: &mut Ctx,
    lines: &[qflow::trajectory::FlowLine],
    grid: &Grid,
    rho: &[f64],
) -> Result<(), RunError> {
    let p = ctx.path("flowlines.csv");
    io::write_flowlines(lines, &p)?;
    let p = ctx.path("flowlines.gp");
    std::fs::write(&p, io::gnuplot_script("flowlines.csv", &ctx.scenario.name))
        .map_err(|e| RunError::Io(format!("{}: {e}", p.display())))?;
    if grid.dims() == 1 {
        let c = Check::new(
            "order_violations",
            "count",
            order_violations(lines) as f64,
            0.0,
        );
        ctx.check(c);
        let l1 = endpoint_l1(grid, rho, lines, L1_BINS);
        if lines.len() >= MIN_LINES_FOR_L1 {
            let c = Check::new("endpoint_l1", "L1", l1, ctx.tol("endpoint_l1"));
            ctx.check(c);
        } else {
            ctx.info.insert("endpoint_l1".into(), json!(l1));
        }
    }
    ctx.info.insert("flow_lines".into(), json!(lines.len()));
    Ok(())
}

fn projections(
    ctx: &mut Ctx,
    trace: &Trace,
    potential: &Potential,
    units: &UnitSystem,
) -> Result<(), RunError> {
    if trace.samples.len() < 2 {
        return Err(RunError::Input(
            "projections need at least two trace samples".into(),
        ));
    }
    let grid = trace.grid().clone();
    let h = Hamiltonian::new(potential.clone(), units.clone(), grid.clone())?;
    let proj = project_to_configuration(trace, &h)?;
    let decs = trace
        .samples
        .iter()
        .map(decompose)
        .collect::<qflow::Result<Vec<_>>>()?;
    let (mut dl, mut dq, mut dp): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut last_cols = None;
    for k in 1..decs.len() {
        let (prev, cur) = (&decs[k - 1], &decs[k]);
        let vel = velocities(cur, prev)?;
        let lr = liouville_residual(cur, prev)?;
        let qr = qhj_residual(&vel, &trace.potential)?;
        let weighted: Vec<f64> = qr.iter().zip(&vel.rho).map(|(q, r)| q * r).collect();
        dl = dl.max(max_abs(
            lr.iter().zip(&proj.liouville[k - 1]).map(|(a, b)| a - b),
        ));
        dq = dq.max(max_abs(
            weighted.iter().zip(&proj.qhj[k - 1]).map(|(a, b)| a - b),
        ));
        last_cols = Some((lr, weighted));
    }
    for (k, pm) in proj.momentum.iter().enumerate() {
        let f = &decs[k];
        dp = dp.max(max_abs(
            (0..grid.len())
                .filter(|&i| !f.node_mask[i] && !pm.mask[i])
                .map(|i| pm.momentum[i] - f.grad_s[0][i]),
        ));
    }
    let c = Check::new(
        "projection_liouville",
        "max_abs",
        dl,
        ctx.tol("projection_liouville"),
    );
    ctx.check(c);
    let c = Check::new("projection_qhj", "max_abs", dq, ctx.tol("projection_qhj"));
    ctx.check(c);
    let c = Check::new(
        "projection_momentum",
        "max_abs",
        dp,
        ctx.tol("projection_momentum"),
    );
    ctx.check(c);
    if let Some((lr, weighted)) = last_cols {
        let k = proj.liouville.len() - 1;
        let pm = &proj.momentum[k + 1];
        let pb = &decs[k + 1].grad_s[0];
        let p = ctx.path("projection.csv");
        io::write_columns(
            &grid,
            &[
                ("liouville_phase_space", &proj.liouville[k]),
                ("liouville", &lr),
                ("qhj_phase_space", &proj.qhj[k]),
                ("rho_qhj", &weighted),
                ("p_m", &pm.momentum),
                ("p_b", pb),
            ],
            &p,
        )?;
    }
    Ok(())
}

fn run_two_slit(
    ctx: &mut Ctx,
    spec: &qflow::trajectory::TwoSlitSpec,
    units: &UnitSystem,
) -> Result<(), RunError> {
    let r = two_slit_run(spec, units)?;
    flowlines(ctx, &r.lines, &r.grid, &r.density)?;
    let c = Check::new("axis_crossings", "count", r.axis_crossings as f64, 0.0);
    ctx.check(c);
    let c = Check::new("terminated_lines", "count", r.terminated as f64, 0.0);
    ctx.check(c);
    let c = Check::new(
        "two_slit_symmetry",
        "max_abs",
        r.symmetry_error,
        ctx.tol("two_slit_symmetry"),
    );
    ctx.check(c);
    let p = ctx.path("screen.csv");
    io::write_columns(&r.grid, &[("rho", &r.density)], &p)?;
    ctx.info.insert("t_final".into(), json!(r.t_final));
    ctx.info.insert(
        "two_slit".into(),
        serde_json::to_value(spec).unwrap_or(Value::Null),
    );
    Ok(())
}
