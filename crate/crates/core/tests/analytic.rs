use std::f64::consts::PI;

use qflow::analytic::{
    case_box, case_by_name, case_delta_well, case_entangled_gaussian, case_hydrogen_1s, Quantity,
    CASE_NAMES,
};
use qflow::UnitSystem;

fn assert_passes(name: &str, case: &qflow::analytic::OracleCase) {
    for o in case.check().unwrap() {
        assert!(
            o.passed,
            "{name}: {} error {:e} > {:e} over {} points",
            o.quantity.as_str(),
            o.max_error,
            o.tolerance,
            o.points
        );
    }
}

#[test]
fn every_named_case_meets_its_expectations() {
    for name in CASE_NAMES {
        assert_passes(name, &case_by_name(name).unwrap());
    }
}

#[test]
fn box_quantum_potential_values() {
    let u = UnitSystem::default();
    let c = case_box(1, 1.0, &u).unwrap();
    assert!((c.energy - 4.934802).abs() < 1e-6);
    let c3 = case_box(3, 2.0, &u).unwrap();
    assert!((c3.energy - 9.0 * PI * PI / 8.0).abs() < 1e-12);
    assert_passes("box n=3 a=2", &c3);
    let wide = case_box(1, 2.0, &u).unwrap();
    assert!((wide.energy * 4.0 - c.energy).abs() < 1e-12);
    assert_passes("box a=2", &wide);
}

#[test]
fn box_with_other_units() {
    let u = UnitSystem::new(0.5, vec![2.0]).unwrap();
    assert_passes("box hbar=1/2 m=2", &case_box(2, 1.5, &u).unwrap());
}

#[test]
fn delta_well_energies() {
    let u = UnitSystem::default();
    assert!((case_delta_well(1.0, &u).unwrap().energy + 0.5).abs() < 1e-15);
    let c2 = case_delta_well(2.0, &u).unwrap();
    assert!((c2.energy + 2.0).abs() < 1e-15);
    assert_passes("delta alpha=2", &c2);
}

#[test]
fn hydrogen_formula_points() {
    let c = case_hydrogen_1s(1.0, 1.0, &UnitSystem::default()).unwrap();
    let q = c
        .expectations
        .iter()
        .find(|e| e.quantity == Quantity::QuantumPotential)
        .unwrap();
    assert!((q.expected)(&[2.0]).abs() < 1e-15);
    assert!(((q.expected)(&[1.0]) - 0.5).abs() < 1e-15);
    assert!((c.energy + 0.5).abs() < 1e-15);
}

#[test]
fn hydrogen_scaled_units() {
    // mu = 2, e2 = 0.5: Bohr radius 1, E = -1/4
    let c = case_hydrogen_1s(2.0, 0.5, &UnitSystem::default()).unwrap();
    assert!((c.energy + 0.25).abs() < 1e-15);
    assert_passes("hydrogen mu=2", &c);
}

#[test]
fn entangled_cross_derivative() {
    // d2Q/dx1dx2 = -4 a c hbar^2/m with a = 1/4 sigma^2
    let c = case_entangled_gaussian(0.3, 1.0, &UnitSystem::default()).unwrap();
    let e = c
        .expectations
        .iter()
        .find(|e| e.quantity == Quantity::CrossDerivative)
        .unwrap();
    assert!(((e.expected)(&[0.0, 0.0]) + 0.3).abs() < 1e-15);
    let out = c.check().unwrap();
    let cross = out
        .iter()
        .find(|o| o.quantity == Quantity::CrossDerivative)
        .unwrap();
    assert!(cross.passed && cross.max_error < 1e-6);
}

#[test]
fn unequal_masses() {
    let u = UnitSystem::new(1.0, vec![1.0, 3.0]).unwrap();
    assert_passes(
        "entangled m2=3",
        &case_entangled_gaussian(-0.2, 0.8, &u).unwrap(),
    );
}
