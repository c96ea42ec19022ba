//! Acceptance run: every criterion prints one PASS/FAIL line; the process
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qflow::analytic::{case_delta_well, case_entangled_gaussian, case_hydrogen_1s};
use qflow::emtensor::{global_checks, liouville_residual, spectral_moment, tensor_components};
use qflow::madelung::{decompose, velocities};
use qflow::phasespace::{
    classical_limit_check, conditional_momentum, evolve_moyal, expectation_with,
    liouville_projection, star_product, wigner_transform, ClassicalLimitSpec, Hamiltonian,
    PolySymbol, Symbol, SymplecticGrid,
};
use qflow::solver::{evolve, prepare_eigenstate, EvolutionSpec};
use qflow::trajectory::{classical_compare, two_slit_run, ClassicalCompareSpec, TwoSlitSpec};
use qflow::weak::{expectation_from_weak, weak_momentum, weak_p_squared};
use qflow::{Grid, Potential, Result, UnitSystem, WaveFunction};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn max_abs_diff(a: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn ac1_box() -> Result<Outcome> {
    let u = UnitSystem::default();
    let g = Grid::dirichlet(256, 0.0, 1.0)?;
    let psi = prepare_eigenstate(&g, &u, &Potential::Box, 1)?;
    let q_exact = PI * PI / 2.0;
    let f = decompose(&psi)?;
    let q = f.quantum_potential();
    let dx = g.dx(0);
    let x = g.points(0);
    let q_err = max_abs_diff(
        (0..g.len())
            .filter(|&i| x[i] >= 2.0 * dx && x[i] <= 1.0 - 2.0 * dx)
            .map(|i| q[i] - q_exact),
    );
    let tr = evolve(&psi, &Potential::Box, &EvolutionSpec::new(1e-4, 1, 1))?;
    let vel = velocities(&decompose(&tr.samples[1])?, &decompose(&tr.samples[0])?)?;
    let t = tensor_components(&vel, &tr.potential)?;
    let pb = max_abs_diff(vel.p_bohm[0].iter().copied());
    let t0j = max_abs_diff(t.t0j[0].iter().copied());
    outcome(
        q_err <= 1e-6 && pb <= 1e-10 && t0j <= 1e-10,
        format!("|Q - pi^2/2| = {q_err:.1e}, |P_B| = {pb:.1e}, |T0j| = {t0j:.1e}"),
    )
}

fn ac2_hydrogen() -> Result<Outcome> {
    let c = case_hydrogen_1s(1.0, 1.0, &UnitSystem::default())?;
    let f = decompose(&c.psi)?;
    let q = f.quantum_potential();
    let force = f.quantum_force(0)?;
    let r = c.grid.points(0);
    let (mut eq, mut ee, mut ef): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..r.len() {
        if !(0.5..=10.0).contains(&r[i]) {
            continue;
        }
        let v = -1.0 / r[i];
        eq = eq.max((q[i] - (1.0 / r[i] - 0.5)).abs());
        ee = ee.max((q[i] + v + 0.5).abs());
        // dQ/dr = -force, dV/dr = 1/r^2
        ef = ef.max((1.0 / (r[i] * r[i]) - force[i]).abs());
    }
    outcome(
        eq <= 1e-6 && ee <= 1e-6 && ef <= 1e-6,
        format!(
            "|Q - (1/r - 1/2)| = {eq:.1e}, |Q + V + 1/2| = {ee:.1e}, |grad Q + grad V| = {ef:.1e}"
        ),
    )
}

fn ac3_delta() -> Result<Outcome> {
    let c = case_delta_well(1.0, &UnitSystem::default())?;
    let w = c.potential.delta_width(&c.grid).unwrap_or_default();
    let p2 = weak_p_squared(&c.psi)?;
    let x = c.grid.points(0);
    let mut err: f64 = 0.0;
    let mut points = 0;
    for i in 0..x.len() {
        if x[i].abs() > 3.0 * w && !p2.node_mask[i] {
            err = err.max((p2.real_part[i] / 2.0 + 0.5).abs());
            points += 1;
        }
    }
    outcome(
        points > 0 && err <= 1e-5,
        format!("|Re<P^2>_W/2m + 1/2| = {err:.1e} over {points} points"),
    )
}

fn ac4_residuals() -> Result<Outcome> {
    let g = Grid::periodic(256, -20.0, 20.0)?;
    let psi = WaveFunction::gaussian(&g, &UnitSystem::default(), -1.0, 1.0, 1.0)?;
    let tr = evolve(&psi, &Potential::Free, &EvolutionSpec::new(1e-3, 1000, 1))?;
    let r = global_checks(&tr)?;
    outcome(
        r.qhj.linf <= 1e-5 && r.liouville.linf <= 1e-5,
        format!(
            "QHJ Linf = {:.1e}, Liouville Linf = {:.1e}",
            r.qhj.linf, r.liouville.linf
        ),
    )
}

fn ac5_weak() -> Result<Outcome> {
    let u = UnitSystem::default();
    let g = Grid::periodic(256, -20.0, 20.0)?;
    let gb = Grid::dirichlet(256, 0.0, 1.0)?;
    let gh = Grid::periodic(256, -12.0, 12.0)?;
    let states = [
        WaveFunction::gaussian(&g, &u, 0.5, 1.5, 1.0)?,
        prepare_eigenstate(&gb, &u, &Potential::Box, 2)?,
        prepare_eigenstate(&gh, &u, &Potential::Harmonic { omega: 1.0 }, 0)?,
    ];
    let mut err: f64 = 0.0;
    for psi in &states {
        let p = weak_momentum(psi)?;
        let p2 = weak_p_squared(psi)?;
        let ep = expectation_from_weak(&psi.grid, &p.rho, &p.real_part[0], None);
        let ep2 = expectation_from_weak(&psi.grid, &p2.rho, &p2.real_part, None);
        let sp = spectral_moment(psi, 0, 1).unwrap_or(f64::NAN);
        let sp2 = spectral_moment(psi, 0, 2).unwrap_or(f64::NAN);
        err = err.max((ep - sp).abs()).max((ep2 - sp2).abs());
        if err.is_nan() {
            err = f64::INFINITY;
        }
    }
    outcome(
        err <= 1e-7,
        format!("max |int rho Re<P^k>_W - <P^k>| = {err:.1e} on 3 states"),
    )
}

/// `|phi(p)|^2` by direct summation.
fn momentum_density(psi: &WaveFunction, p: f64) -> f64 {
    let dx = psi.grid.dx(0);
    let hbar = psi.hbar();
    let amp: Complex64 = psi
        .grid
        .points(0)
        .iter()
        .zip(&psi.values)
        .map(|(x, v)| v * Complex64::from_polar(1.0, -p * x / hbar))
        .sum::<Complex64>()
        * dx
        / (2.0 * PI * hbar).sqrt();
    amp.norm_sqr()
}

fn ac6_wigner() -> Result<Outcome> {
    let u = UnitSystem::default();
    let g = Grid::periodic(128, -12.0, 12.0)?;
    let pot = Potential::Harmonic { omega: 1.0 };
    let psi = prepare_eigenstate(&g, &u, &pot, 0)?;
    let f = wigner_transform(&psi)?;
    let ex = max_abs_diff(
        f.position_marginal()
            .iter()
            .zip(psi.density())
            .map(|(a, b)| a - b),
    );
    let ep = max_abs_diff(
        f.momentum_marginal()
            .iter()
            .enumerate()
            .map(|(m, a)| a - momentum_density(&psi, f.grid.p(m))),
    );
    let h_phase = expectation_with(&f, |x, p| 0.5 * p * p + 0.5 * x * x);
    let h_hilbert = psi.energy(&pot.sample(&g, &u)?)?;
    let eh = (h_phase - h_hilbert).abs();
    outcome(
        ex <= 1e-8 && ep <= 1e-8 && eh <= 1e-7,
        format!("x marginal {ex:.1e}, p marginal {ep:.1e}, <H> {h_phase:.10} vs {h_hilbert:.10}"),
    )
}

fn gaussian_symbol(
    g: &SymplecticGrid,
    x0: f64,
    p0: f64,
    s: f64,
    kx: f64,
    kp: f64,
) -> Result<Symbol> {
    Symbol::from_fn(g, |x, p| {
        let r = ((x - x0).powi(2) + (p - p0).powi(2)) / (2.0 * s * s);
        Complex64::from_polar((-r).exp(), kx * x + kp * p)
    })
}

fn ac7_star() -> Result<Outcome> {
    let hbar = 1.0;
    let comm = PolySymbol::x().star(&PolySymbol::p(), hbar).add(
        &PolySymbol::p()
            .star(&PolySymbol::x(), hbar)
            .scale(Complex64::new(-1.0, 0.0)),
    );
    let ec = (comm.coefficient(0, 0) - Complex64::new(0.0, hbar)).norm()
        + if comm.degree() == 0 { 0.0 } else { 1.0 };
    let g = SymplecticGrid::lattice(64, [-8.0, 8.0], [-8.0, 8.0], 0.5)?;
    let a = gaussian_symbol(&g, 0.5, -0.3, 0.9, 0.4, 0.0)?;
    let b = gaussian_symbol(&g, -0.2, 0.4, 0.8, 0.0, -0.3)?;
    let c = gaussian_symbol(&g, 0.1, 0.1, 0.7, 0.2, 0.2)?;
    let ea = star_product(&star_product(&a, &b)?, &c)?
        .max_abs_diff(&star_product(&a, &star_product(&b, &c)?)?);
    let ga = |x: f64, p: f64| Complex64::new((-((x - 0.5).powi(2) + p * p) / 2.0).exp(), 0.0);
    let gb = |x: f64, p: f64| {
        Complex64::new(
            (-(x * x + (p - 0.3).powi(2)) / 2.88).exp() * (1.0 + 0.3 * x),
            0.0,
        )
    };
    let r = classical_limit_check(ga, gb, &ClassicalLimitSpec::default())?;
    let ms = r.moyal_slope.unwrap_or(f64::NAN);
    let bs = r.baker_slope.unwrap_or(f64::NAN);
    outcome(
        ec <= 1e-10 && ea <= 1e-8 && (ms - 2.0).abs() <= 0.1 && (bs - 2.0).abs() <= 0.1,
        format!("[x,p]* - i hbar = {ec:.1e}, associativity {ea:.1e}, slopes MB {ms:.3} BB {bs:.3}"),
    )
}

fn ac8_routes() -> Result<Outcome> {
    let g = Grid::periodic(128, -8.0, 8.0)?;
    let u = UnitSystem::default();
    let pot = Potential::Quartic { lambda: 0.1 };
    let psi = WaveFunction::gaussian(&g, &u, 1.0, 0.0, 0.7)?;
    let spec = EvolutionSpec::new(1e-3, 500, 500);
    let schrodinger = wigner_transform(evolve(&psi, &pot, &spec)?.last())?;
    let h = Hamiltonian::new(pot, u, g)?;
    let moyal = evolve_moyal(&wigner_transform(&psi)?, &h, &spec)?;
    let f = moyal.last().expect("evolve_moyal returns the final slice");
    let err = f.max_abs_diff(&schrodinger);
    outcome(
        err <= 1e-5 && f.grid.nx == 128 && f.grid.np == 128 && (f.time - 0.5).abs() < 1e-12,
        format!("Linf |W[psi(t)] - F(t)| = {err:.1e} at t = {}", f.time),
    )
}

fn ac9_projection() -> Result<Outcome> {
    let g = Grid::periodic(256, -20.0, 20.0)?;
    let u = UnitSystem::default();
    let psi = WaveFunction::gaussian(&g, &u, 0.0, 0.0, 1.0)?;
    let psi_t = evolve(
        &psi,
        &Potential::Free,
        &EvolutionSpec::new(1e-3, 1000, 1000),
    )?
    .last()
    .clone();
    let pm = conditional_momentum(&wigner_transform(&psi_t)?);
    let mf = decompose(&psi_t)?;
    let ep = max_abs_diff(
        (0..g.len())
            .filter(|&i| !mf.node_mask[i] && !pm.mask[i])
            .map(|i| pm.momentum[i] - mf.grad_s[0][i]),
    );

    let gq = Grid::periodic(256, -12.0, 12.0)?;
    let pot = Potential::Quartic { lambda: 0.01 };
    let tr = evolve(
        &WaveFunction::gaussian(&gq, &u, 1.0, 0.5, 0.9)?,
        &pot,
        &EvolutionSpec::new(1e-3, 1, 1),
    )?;
    let h = Hamiltonian::new(pot, u, gq)?;
    let proj = liouville_projection(
        &wigner_transform(&tr.samples[0])?,
        &wigner_transform(&tr.samples[1])?,
        &h,
    )?;
    let lr = liouville_residual(&decompose(&tr.samples[1])?, &decompose(&tr.samples[0])?)?;
    let el = max_abs_diff(lr.iter().zip(&proj).map(|(a, b)| a - b));
    outcome(
        ep <= 1e-7 && el <= 1e-6,
        format!("|P_M - P_B| = {ep:.1e}, |int Moyal dp - Liouville| = {el:.1e}"),
    )
}

fn ac10_two_slit() -> Result<Outcome> {
    let r = two_slit_run(&TwoSlitSpec::default(), &UnitSystem::default())?;
    let n = r.lines.len();
    outcome(
        n >= 10_000 && r.axis_crossings == 0 && r.endpoint_l1 <= 0.05,
        format!(
            "{n} lines, {} axis crossings, endpoint L1 = {:.4}",
            r.axis_crossings, r.endpoint_l1
        ),
    )
}

fn ac11_classical() -> Result<Outcome> {
    let r = classical_compare(&ClassicalCompareSpec::quartic())?;
    let errs: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("{:.1e}", row.max_error))
        .collect();
    let hbars: Vec<f64> = r.rows.iter().map(|row| row.hbar).collect();
    outcome(
        hbars == [1.0, 0.5, 0.25, 0.125]
            && r.monotone
            && r.reduction >= 4.0
            && (r.q_slope - 2.0).abs() <= 0.1,
        format!(
            "errors [{}], reduction {:.1}x, |Q| slope {:.3}",
            errs.join(", "),
            r.reduction,
            r.q_slope
        ),
    )
}

fn origin(g: &Grid, axis: usize) -> usize {
    let ax = g.axis(axis);
    (-ax.x_min / ax.dx()).round() as usize
}

fn ac12_two_body() -> Result<Outcome> {
    let u = UnitSystem::default();
    let sigma = 1.0;
    // Q = -(1/2) sum_j [(d_j ln R)^2 + d_j^2 ln R] with ln R = -a(x1^2 + x2^2) - c x1 x2,
    // so d2Q/dx1dx2 = -(2a c + 2a c) = -4 a c for unit masses and hbar
    let a = 1.0 / (4.0 * sigma * sigma);
    let expected = -4.0 * a * 0.3;

    let ent = case_entangled_gaussian(0.3, sigma, &u)?;
    let q = decompose(&ent.psi)?.quantum_potential();
    let g = &ent.grid;
    let (i0, j0) = (origin(g, 0), origin(g, 1));
    let at = |di: isize, dj: isize| {
        q[g.ravel(&[(i0 as isize + di) as usize, (j0 as isize + dj) as usize])]
    };
    let cross = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * g.dx(0) * g.dx(1));
    let ec = (cross - expected).abs();

    let prod = case_entangled_gaussian(0.0, sigma, &u)?;
    let q = decompose(&prod.psi)?.quantum_potential();
    let g = &prod.grid;
    let (i0, j0) = (origin(g, 0), origin(g, 1));
    let q00 = q[g.ravel(&[i0, j0])];
    let mut es: f64 = 0.0;
    for k in 0..g.len() {
        let c = g.coords(k);
        if c[0].abs() > 3.0 * sigma || c[1].abs() > 3.0 * sigma {
            continue;
        }
        let idx = g.unravel(k);
        es = es.max((q[k] - q[g.ravel(&[idx[0], j0])] - q[g.ravel(&[i0, idx[1]])] + q00).abs());
    }
    outcome(
        cross.abs() > 1e-3 && ec <= 1e-6 && es <= 1e-8,
        format!("c = 0.3: d2Q/dx1dx2 = {cross:.8} (oracle {expected}); c = 0: non-separable part {es:.1e}"),
    )
}

type Criterion = (
    &'static str,
    &'static str,
    fn() -> Result<Outcome>,
    Option<Duration>,
);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("AC1", "box oracle", ac1_box, Some(Duration::from_secs(1))),
        ("AC2", "hydrogen oracle", ac2_hydrogen, None),
        ("AC3", "delta-well oracle", ac3_delta, None),
        (
            "AC4",
            "QHJ/Liouville residuals",
            ac4_residuals,
            Some(Duration::from_secs(10)),
        ),
        ("AC5", "weak-value identity", ac5_weak, None),
        ("AC6", "Wigner marginals and expectations", ac6_wigner, None),
        ("AC7", "star-product algebra", ac7_star, None),
        (
            "AC8",
            "route equivalence",
            ac8_routes,
            Some(Duration::from_secs(60)),
        ),
        ("AC9", "projection fidelity", ac9_projection, None),
        (
            "AC10",
            "two-slit bundle",
            ac10_two_slit,
            Some(Duration::from_secs(120)),
        ),
        ("AC11", "classical limit", ac11_classical, None),
        ("AC12", "two-body nonlocality", ac12_two_body, None),
    ];
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = pass && in_time;
        let budget = limit
            .map(|l| format!(" (limit {} s)", l.as_secs()))
            .unwrap_or_default();
        println!(
            "{id:<5} {} {name}: {detail} [{:.2} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failed += 1;
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
