use std::f64::consts::PI;

use qflow::solver::{evolve, prepare_eigenstate, EvolutionSpec};
use qflow::trajectory::{
    axis_crossings, classical_compare, integrate_flowlines, order_violations, quantile_seeds,
    two_slit_run, ClassicalCompareSpec, FlowSpec, LineStatus, TwoSlitSpec,
};
use qflow::{Error, Grid, Potential, UnitSystem, WaveFunction};

#[test]
fn plane_wave_lines_are_straight() {
    let g = Grid::periodic(128, 0.0, 10.0).unwrap();
    let u = UnitSystem::new(0.7, vec![1.3]).unwrap();
    let k = 2.0 * PI * 3.0 / 10.0;
    let psi = WaveFunction::plane_wave(&g, &u, k)
        .unwrap()
        .normalized()
        .unwrap();
    let tr = evolve(&psi, &Potential::Free, &EvolutionSpec::new(1e-2, 200, 5)).unwrap();
    let seeds = vec![vec![0.3], vec![4.44], vec![9.9]];
    for line in integrate_flowlines(&tr, &seeds, &FlowSpec::default()).unwrap() {
        assert_eq!(line.status, LineStatus::Complete);
        for s in &line.samples {
            let exact = line.seed[0] + 0.7 * k * s.t / 1.3;
            assert!((s.x[0] - exact).abs() < 1e-8, "{} vs {}", s.x[0], exact);
        }
    }
}

#[test]
fn free_gaussian_scaling_flow() {
    let sigma = 1.0;
    let g = Grid::periodic(256, -20.0, 20.0).unwrap();
    let u = UnitSystem::default();
    let psi = WaveFunction::gaussian(&g, &u, 0.0, 0.0, sigma).unwrap();
    let tr = evolve(&psi, &Potential::Free, &EvolutionSpec::new(1e-3, 2000, 1)).unwrap();
    let seeds: Vec<Vec<f64>> = [-1.5, -0.4, 0.25, 1.0, 2.0]
        .iter()
        .map(|x| vec![*x])
        .collect();
    let lines = integrate_flowlines(
        &tr,
        &seeds,
        &FlowSpec {
            substeps: 4,
            record_every: 10,
        },
    )
    .unwrap();
    for line in &lines {
        for s in &line.samples {
            let exact = line.seed[0] * (1.0 + (s.t / (2.0 * sigma * sigma)).powi(2)).sqrt();
            assert!(
                (s.x[0] - exact).abs() < 1e-5,
                "t={} {} vs {}",
                s.t,
                s.x[0],
                exact
            );
        }
    }
}

#[test]
fn box_eigenstate_lines_are_at_rest() {
    let g = Grid::dirichlet(256, 0.0, 1.0).unwrap();
    let u = UnitSystem::default();
    let psi = prepare_eigenstate(&g, &u, &Potential::Box, 2).unwrap();
    let tr = evolve(&psi, &Potential::Box, &EvolutionSpec::new(1e-3, 200, 10)).unwrap();
    let lines = integrate_flowlines(&tr, &[vec![0.2], vec![0.71]], &FlowSpec::default()).unwrap();
    for line in lines {
        for s in &line.samples {
            assert!((s.x[0] - line.seed[0]).abs() < 1e-10);
            assert!(s.v[0].abs() < 1e-10);
            // E_B = Q + V = 4 pi^2 / 2 for n = 2
            assert!((s.e_bohm - 2.0 * PI * PI).abs() < 1e-4, "{}", s.e_bohm);
        }
    }
}

#[test]
fn bad_seeds_are_rejected() {
    let g = Grid::dirichlet(256, 0.0, 1.0).unwrap();
    let u = UnitSystem::default();
    let psi = prepare_eigenstate(&g, &u, &Potential::Box, 2).unwrap();
    let tr = evolve(&psi, &Potential::Box, &EvolutionSpec::new(1e-3, 2, 1)).unwrap();
    let outside = integrate_flowlines(&tr, &[vec![1.5]], &FlowSpec::default());
    assert!(matches!(outside, Err(Error::BadSeed { .. })));
    let on_node = integrate_flowlines(&tr, &[vec![0.5]], &FlowSpec::default());
    assert!(matches!(on_node, Err(Error::BadSeed { .. })));
}

#[test]
fn quantile_seeds_are_ordered_and_symmetric() {
    let g = Grid::periodic(512, -10.0, 10.0).unwrap();
    let psi = WaveFunction::gaussian(&g, &UnitSystem::default(), 0.0, 0.0, 1.0).unwrap();
    let s = quantile_seeds(&g, &psi.density(), 101).unwrap();
    assert!(s.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(s[50][0].abs() < 1e-12);
    for i in 0..50 {
        assert!((s[i][0] + s[100 - i][0]).abs() < 1e-9);
    }
}

#[test]
fn two_slit_bundle() {
    let r = two_slit_run(&TwoSlitSpec::default(), &UnitSystem::default()).unwrap();
    assert!(r.lines.len() >= 10_000);
    assert_eq!(r.axis_crossings, 0);
    assert_eq!(r.order_violations, 0);
    assert_eq!(r.terminated, 0);
    assert!(r.symmetry_error < 1e-6, "symmetry {}", r.symmetry_error);
    assert!(r.endpoint_l1 <= 0.05, "L1 {}", r.endpoint_l1);
}

#[test]
fn single_slit_lines_fan_out() {
    let spec = TwoSlitSpec {
        separation: 0.0,
        n_lines: 10_000,
        ..TwoSlitSpec::default()
    };
    let r = two_slit_run(&spec, &UnitSystem::default()).unwrap();
    assert!(r.endpoint_l1 <= 0.05, "L1 {}", r.endpoint_l1);
    assert_eq!(axis_crossings(&r.lines), 0);
    assert_eq!(order_violations(&r.lines), 0);
    for l in &r.lines {
        assert!(l
            .samples
            .windows(2)
            .all(|w| w[1].x[0].abs() >= w[0].x[0].abs() - 1e-12));
    }
}

#[test]
fn under_resolved_fringes_are_rejected() {
    let spec = TwoSlitSpec {
        separation: 30.0,
        screen_distance: 0.5,
        n_points: 64,
        ..TwoSlitSpec::default()
    };
    assert!(matches!(
        two_slit_run(&spec, &UnitSystem::default()),
        Err(Error::Guard { .. })
    ));
}

#[test]
fn harmonic_center_is_classical_at_every_hbar() {
    let spec = ClassicalCompareSpec {
        potential: Potential::Harmonic { omega: 1.0 },
        dt: 2.5e-4,
        x_min: -14.0,
        x_max: 14.0,
        n_points: 512,
        ..ClassicalCompareSpec::quartic()
    };
    let r = classical_compare(&spec).unwrap();
    for row in &r.rows {
        assert!(row.max_error < 1e-6, "hbar {}: {}", row.hbar, row.max_error);
    }
}

#[test]
fn free_center_is_classical() {
    let spec = ClassicalCompareSpec {
        potential: Potential::Free,
        x0: 0.0,
        dt: 1e-3,
        ..ClassicalCompareSpec::quartic()
    };
    for row in classical_compare(&spec).unwrap().rows {
        assert!(row.max_error < 1e-6, "hbar {}: {}", row.hbar, row.max_error);
    }
}

#[test]
fn quartic_classical_limit() {
    let r = classical_compare(&ClassicalCompareSpec::quartic()).unwrap();
    let errs: Vec<f64> = r.rows.iter().map(|r| r.max_error).collect();
    assert!(r.monotone, "{errs:?}");
    assert!(r.reduction >= 4.0, "{errs:?}");
    assert!(
        (r.q_slope - 2.0).abs() <= 0.1,
        "slope {} {:?}",
        r.q_slope,
        r.rows
    );
}
