//! Regression values of the Dirac Hilbert–Schmidt ladder.

use fockimpl::experiments::{dirac_hs_level, DiracTruncation, HS_BOUND_MINUS_PLUS, HS_BOUND_PLUS_MINUS};

#[test]
fn dirac_values_at_4096() {
    let level = dirac_hs_level(&DiracTruncation::new(4096).unwrap());
    let rel = |x: f64, want: f64| ((x - want) / want).abs();
    assert!(rel(level.plus_minus, 0.32006441785255774) < 1e-9, "{}", level.plus_minus);
    assert!(rel(level.minus_plus, 0.07006501026654312) < 1e-9, "{}", level.minus_plus);
}

#[test]
fn bounds_have_their_closed_forms() {
    assert!((HS_BOUND_PLUS_MINUS - 4.27300176389215).abs() < 1e-12);
    assert!((HS_BOUND_MINUS_PLUS - 2.3946280528458628).abs() < 1e-12);
}
