//! Finite-grid normalization of `P_w`. The kernel decays like `|α|⁻³`, so a
//! square of half-width `R` misses about `2√2 / (π² w R)` of the mass; the
//! checks compare against that far-field estimate rather than against 1.

use nqp_core::{quasiprobability_grid, witness_coefficients, GridSpec, StateDescriptor};
use std::f64::consts::PI;

fn far_field_mass(w: f64, half_width: f64) -> f64 {
    2.0 * 2f64.sqrt() / (PI * PI * w * half_width)
}

fn integral(desc: &str, w: f64, half_width: f64) -> f64 {
    let state = desc.parse::<StateDescriptor>().unwrap().build().unwrap();
    let s = witness_coefficients(w, 400).unwrap();
    quasiprobability_grid(&state, &s, &GridSpec::square(half_width, 0.1))
        .unwrap()
        .riemann_integral()
}

#[test]
fn vacuum_and_single_photon() {
    for desc in ["fock:0", "fock:1"] {
        let total = integral(desc, 1.6, 6.0) + far_field_mass(1.6, 6.0);
        assert!((total - 1.0).abs() < 2e-3, "{desc}: {total}");
    }
}

#[test]
fn missing_mass_follows_far_field() {
    for desc in ["cat:even:1", "pasv:1", "pasv:2", "pasv:3", "pasv:4"] {
        let raw = integral(desc, 1.6, 4.0);
        let deficit = 1.0 - raw;
        let predicted = far_field_mass(1.6, 4.0);
        assert!(
            deficit > 0.0 && (deficit - predicted).abs() < 2.5e-2,
            "{desc}: {raw}"
        );
    }
}

#[test]
fn deficit_shrinks_with_region() {
    let a = integral("fock:0", 2.0, 3.0);
    let b = integral("fock:0", 2.0, 6.0);
    assert!(b > a && 1.0 - b < 1.0 - a);
}
