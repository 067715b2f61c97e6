//! Seeded random instances for the property suites.

use rand::Rng;

use crate::gw::GwParams;
use crate::measures::{Atom, DiscreteMeasure};

/// Shape of the random measures drawn by [`measure`].
#[derive(Debug, Clone, Copy)]
pub struct MeasureShape {
    pub dim: usize,
    pub max_atoms: usize,
    /// Coordinates are uniform in `[-spread, spread]`.
    pub spread: f64,
    /// Weights are uniform in `(0, max_weight]`.
    pub max_weight: f64,
}

/// Between 0 and `max_atoms` atoms, so zero measures show up too.
pub fn measure(rng: &mut impl Rng, shape: MeasureShape) -> DiscreteMeasure {
    let n = rng.gen_range(0..=shape.max_atoms);
    nonempty_with(rng, shape, n)
}

/// Between 1 and `max_atoms` atoms.
pub fn nonempty_measure(rng: &mut impl Rng, shape: MeasureShape) -> DiscreteMeasure {
    let n = rng.gen_range(1..=shape.max_atoms.max(1));
    nonempty_with(rng, shape, n)
}

fn nonempty_with(rng: &mut impl Rng, shape: MeasureShape, n: usize) -> DiscreteMeasure {
    let atoms = (0..n)
        .map(|_| {
            let x = (0..shape.dim).map(|_| rng.gen_range(-shape.spread..=shape.spread)).collect();
            Atom::new(x, shape.max_weight * (1.0 - rng.gen::<f64>()))
        })
        .collect();
    DiscreteMeasure::new(shape.dim, atoms).expect("random atoms are valid")
}

/// `a, b` log-uniform in `[0.1, 10]`, `p` drawn from `exponents`.
pub fn params(rng: &mut impl Rng, exponents: &[f64]) -> GwParams {
    let mut log_uniform = || 10f64.powf(rng.gen_range(-1.0..=1.0));
    let (a, b) = (log_uniform(), log_uniform());
    let p = exponents[rng.gen_range(0..exponents.len())];
    GwParams::new(a, b, p).expect("positive parameters")
}
