#![allow(dead_code)]

use gwass::gw::GwParams;
use gwass::measures::{Atom, DiscreteMeasure};
use proptest::prelude::*;

/// Up to `max_atoms` atoms in `[-3, 3]^dim`, zero weights included.
pub fn measure(dim: usize, max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((prop::collection::vec(-3.0..3.0f64, dim), 0.0..2.0f64), 0..=max_atoms).prop_map(
        move |atoms| DiscreteMeasure::new(dim, atoms.into_iter().map(|(x, w)| Atom::new(x, w)).collect()).unwrap(),
    )
}

/// At least one atom, every weight positive.
pub fn positive_measure(dim: usize, max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((prop::collection::vec(-3.0..3.0f64, dim), 0.01..2.0f64), 1..=max_atoms).prop_map(
        move |atoms| DiscreteMeasure::new(dim, atoms.into_iter().map(|(x, w)| Atom::new(x, w)).collect()).unwrap(),
    )
}

/// `positive_measure` rescaled to unit mass.
pub fn probability(dim: usize, max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    positive_measure(dim, max_atoms).prop_map(|m| m.scale(1.0 / m.total_mass()).unwrap())
}

/// `a, b ∈ [0.1, 10]`, `p ∈ {1, 2}`.
pub fn params() -> impl Strategy<Value = GwParams> {
    (0.1..10.0f64, 0.1..10.0f64, prop_oneof![Just(1.0), Just(2.0)])
        .prop_map(|(a, b, p)| GwParams::new(a, b, p).unwrap())
}

pub fn reversed(mu: &DiscreteMeasure) -> DiscreteMeasure {
    let mut atoms = mu.atoms().to_vec();
    atoms.reverse();
    DiscreteMeasure::new(mu.dim(), atoms).unwrap()
}

/// Relative comparison scale.
pub fn scale(x: f64) -> f64 {
    x.abs().max(1.0)
}
