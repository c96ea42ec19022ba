use std::f64::consts::PI;

use qflow::calculus::integrate;
use qflow::emtensor::spectral_moment;
use qflow::madelung::{decompose_with, DEFAULT_NODE_EPS};
use qflow::solver::prepare_eigenstate;
use qflow::weak::{expectation_from_weak, weak_momentum, weak_momentum_with, weak_p_squared};
use qflow::{DerivativeScheme, Grid, Potential, UnitSystem, WaveFunction};

fn states() -> Vec<(&'static str, WaveFunction)> {
    let u = UnitSystem::default();
    let g = Grid::periodic(256, -20.0, 20.0).unwrap();
    let boosted = WaveFunction::gaussian(&g, &u, 0.5, 1.5, 1.0).unwrap();
    let gb = Grid::dirichlet(256, 0.0, 1.0).unwrap();
    let box2 = prepare_eigenstate(&gb, &u, &Potential::Box, 2).unwrap();
    let gh = Grid::periodic(256, -12.0, 12.0).unwrap();
    let ho = prepare_eigenstate(&gh, &u, &Potential::Harmonic { omega: 1.0 }, 0).unwrap();
    vec![("boosted", boosted), ("box2", box2), ("harmonic", ho)]
}

#[test]
fn expectation_identity_on_three_states() {
    for (name, psi) in states() {
        let p = weak_momentum(&psi).unwrap();
        let p2 = weak_p_squared(&psi).unwrap();
        let ep = expectation_from_weak(&psi.grid, &p.rho, &p.real_part[0], None);
        let ep2 = expectation_from_weak(&psi.grid, &p2.rho, &p2.real_part, None);
        let sp = spectral_moment(&psi, 0, 1).unwrap();
        let sp2 = spectral_moment(&psi, 0, 2).unwrap();
        assert!((ep - sp).abs() < 1e-7, "{name}: <P> {ep} vs {sp}");
        assert!((ep2 - sp2).abs() < 1e-7, "{name}: <P^2> {ep2} vs {sp2}");
    }
}

#[test]
fn routes_agree_off_mask() {
    for (name, psi) in states() {
        let p = weak_momentum(&psi).unwrap();
        assert!(
            p.route_discrepancy < 1e-8,
            "{name}: {}",
            p.route_discrepancy
        );
        let p2 = weak_p_squared(&psi).unwrap();
        assert!(
            p2.route_discrepancy < 1e-8,
            "{name}: {}",
            p2.route_discrepancy
        );
    }
}

#[test]
fn real_gaussian_imaginary_part() {
    let sigma = 0.8;
    let g = Grid::periodic(256, -12.0, 12.0).unwrap();
    let psi = WaveFunction::gaussian(&g, &UnitSystem::default(), 0.0, 0.0, sigma).unwrap();
    let w = weak_momentum(&psi).unwrap();
    let x = g.points(0);
    // -hbar rho'/2rho = hbar x / 2 sigma^2 for rho ~ exp(-x^2/2 sigma^2)
    for i in 0..256 {
        if w.node_mask[i] {
            continue;
        }
        assert!(w.real_part[0][i].abs() < 1e-12);
        assert!((w.imag_part[0][i] - x[i] / (2.0 * sigma * sigma)).abs() < 1e-8);
    }
}

#[test]
fn box_state_weak_values() {
    let g = Grid::dirichlet(256, 0.0, 1.0).unwrap();
    let psi = prepare_eigenstate(&g, &UnitSystem::default(), &Potential::Box, 1).unwrap();
    let w = weak_momentum(&psi).unwrap();
    assert!(w.real_part[0].iter().all(|v| *v == 0.0));
    let p2 = weak_p_squared(&psi).unwrap();
    for i in 2..256 {
        assert!((p2.real_part[i] - PI * PI).abs() < 1e-6);
    }
    let e = expectation_from_weak(&g, &p2.rho, &p2.real_part, None);
    assert!((e - PI * PI).abs() < 1e-5);
}

#[test]
fn delta_well_energy_is_all_quantum_potential() {
    let g = Grid::periodic(1024, -16.0, 16.0)
        .unwrap()
        .with_scheme(DerivativeScheme::FiniteDifference4)
        .unwrap();
    let pot = Potential::DeltaWell {
        alpha: 1.0,
        width: None,
    };
    let u = UnitSystem::default();
    let psi = prepare_eigenstate(&g, &u, &pot, 1).unwrap();
    let w = pot.delta_width(&g).unwrap();
    let p2 = weak_p_squared(&psi).unwrap();
    let x = g.points(0);
    let mut checked = 0;
    for i in 0..g.len() {
        if x[i].abs() > 3.0 * w && !p2.node_mask[i] {
            assert!(
                (p2.real_part[i] / 2.0 + 0.5).abs() < 1e-5,
                "x={} {}",
                x[i],
                p2.real_part[i] / 2.0
            );
            checked += 1;
        }
    }
    assert!(checked > 500);
    assert!(weak_momentum(&psi).unwrap().real_part[0]
        .iter()
        .all(|v| *v == 0.0));
}

#[test]
fn hydrogen_energy_from_weak_kinetic_term() {
    let g = Grid::radial(1024, 20.48).unwrap();
    let u = UnitSystem::default();
    let pot = Potential::CoulombRadial { e2: 1.0 };
    let psi = prepare_eigenstate(&g, &u, &pot, 1).unwrap();
    let v = pot.sample(&g, &u).unwrap();
    let p2 = weak_p_squared(&psi).unwrap();
    let local: Vec<f64> = p2
        .real_part
        .iter()
        .zip(&v)
        .map(|(p, v)| p / 2.0 + v)
        .collect();
    let e = expectation_from_weak(&g, &p2.rho, &local, None);
    assert!((e + 0.5).abs() < 1e-5, "E = {e}");
}

#[test]
fn osmotic_part_integrates_to_zero() {
    for (name, psi) in states() {
        let w = weak_momentum(&psi).unwrap();
        let dens: Vec<f64> = w
            .rho
            .iter()
            .zip(&w.imag_part[0])
            .map(|(r, i)| r * i)
            .collect();
        assert!(integrate(&psi.grid, &dens).abs() < 1e-9, "{name}");
    }
}

#[test]
fn weighted_integral_converges_as_mask_shrinks() {
    let g = Grid::periodic(256, -20.0, 20.0).unwrap();
    let u = UnitSystem::default();
    // two separated packets leave a deep minimum where the weak value is large
    let a = WaveFunction::gaussian(&g, &u, -4.0, 1.0, 0.8).unwrap();
    let b = WaveFunction::gaussian(&g, &u, 4.0, -0.5, 0.8).unwrap();
    let psi = a
        .with_values(
            a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect(),
            0.0,
        )
        .normalized()
        .unwrap();
    let exact = spectral_moment(&psi, 0, 1).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1e-4, 1e-6, DEFAULT_NODE_EPS, 1e-10, 1e-12] {
        let f = decompose_with(&psi, eps).unwrap();
        let w = weak_momentum_with(&psi, &f).unwrap();
        let e = expectation_from_weak(&g, &w.rho, &w.real_part[0], Some(&w.node_mask));
        let err = (e - exact).abs();
        assert!(err <= last + 1e-15);
        last = err;
    }
    assert!(last < 1e-9);
}
