//! Finite discrete measures on `R^d`.
//!
//! A [`DiscreteMeasure`] is a cloud of weighted atoms. It is the stand-in for
//! a finite Borel measure everywhere in the crate: the distances consume it,
//! flows push it forward, and the scheme in [`crate::dynamics`] evolves it.
//!
//! Atom order carries no meaning. Every operation that compares measures
//! (the total variation distance, equality tests) goes through
//! [`CanonicalForm`], which snaps positions to a lattice of step `quantum`
//! and sums coincident weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default lattice step used when comparing atom positions.
pub const DEFAULT_QUANTUM: f64 = 1e-9;

/// A weighted point mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub w: f64,
}

impl Atom {
    pub fn new(x: Vec<f64>, w: f64) -> Self {
        Self { x, w }
    }
}

#[derive(Deserialize)]
struct RawMeasure {
    dim: usize,
    #[serde(default)]
    atoms: Vec<Atom>,
}

/// A finite nonnegative measure made of atoms in `R^dim`.
///
/// Invariants, checked on construction: `dim > 0`, every position has `dim`
/// finite coordinates, every weight is finite and nonnegative. Zero weights
/// are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.dim, raw.atoms)
    }
}

impl DiscreteMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        for (index, atom) in atoms.iter().enumerate() {
            if atom.x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: atom.x.len() });
            }
            if atom.x.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinitePosition { index });
            }
            if !atom.w.is_finite() || atom.w < 0.0 {
                return Err(Error::InvalidWeight { index, weight: atom.w });
            }
        }
        Ok(Self { dim, atoms })
    }

    /// The zero measure in `R^dim`.
    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self { dim, atoms: Vec::new() }
    }

    /// `weight * δ_point`.
    pub fn dirac(point: Vec<f64>, weight: f64) -> Result<Self> {
        let dim = point.len();
        Self::new(dim, vec![Atom::new(point, weight)])
    }

    /// One-dimensional measure from `(position, weight)` pairs.
    pub fn on_line(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(1, atoms.iter().map(|&(x, w)| Atom::new(vec![x], w)).collect())
    }

    /// `n` equal atoms at the cell midpoints of `[lo, hi]`, total mass `mass`.
    pub fn uniform_on_interval(lo: f64, hi: f64, n: usize, mass: f64) -> Result<Self> {
        if n == 0 || hi <= lo {
            return Err(Error::InvalidParams(format!("need n > 0 and lo < hi, got n={n}, [{lo}, {hi}]")));
        }
        let h = (hi - lo) / n as f64;
        let w = mass / n as f64;
        Self::new(1, (0..n).map(|i| Atom::new(vec![lo + (i as f64 + 0.5) * h], w)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn into_atoms(self) -> Vec<Atom> {
        self.atoms
    }

    /// `|μ| = μ(R^d)`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// Largest Euclidean norm of a support point (0 for the zero measure).
    pub fn support_radius(&self) -> f64 {
        self.atoms.iter().filter(|a| a.w > 0.0).map(|a| norm(&a.x)).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::NegativeScale(k));
        }
        if k == 0.0 {
            return Ok(Self::zero(self.dim));
        }
        Ok(Self { dim: self.dim, atoms: self.atoms.iter().map(|a| Atom::new(a.x.clone(), a.w * k)).collect() })
    }

    /// Sum of two measures. Atoms are concatenated; coincident sites merge on
    /// canonicalization.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(Self { dim: self.dim, atoms })
    }

    /// Restriction to the set `{x : keep(x)}`.
    pub fn restrict(&self, keep: impl Fn(&[f64]) -> bool) -> Self {
        Self { dim: self.dim, atoms: self.atoms.iter().filter(|a| keep(&a.x)).cloned().collect() }
    }

    /// Image measure `γ#μ`: every atom moves to `map(position)`, weights unchanged.
    ///
    /// # Panics
    ///
    /// If `map` returns a vector of the wrong length.
    pub fn push_forward(&self, map: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let y = map(&a.x);
                assert_eq!(y.len(), self.dim, "point map changed the dimension");
                Atom::new(y, a.w)
            })
            .collect();
        Self { dim: self.dim, atoms }
    }

    /// Translation by `shift`.
    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: shift.len() });
        }
        Ok(self.push_forward(|x| x.iter().zip(shift).map(|(a, b)| a + b).collect()))
    }

    /// Drops atoms whose weight is `<= threshold`.
    pub fn pruned(&self, threshold: f64) -> Self {
        Self { dim: self.dim, atoms: self.atoms.iter().filter(|a| a.w > threshold).cloned().collect() }
    }

    /// Merges atoms that share a lattice site of step `quantum`, keeping the
    /// position of the first atom seen at each site (positions are not
    /// snapped). Zero-weight atoms are dropped.
    pub fn merge_coincident(&self, quantum: f64) -> Result<Self> {
        check_quantum(quantum)?;
        let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
        let mut atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        for a in self.atoms.iter().filter(|a| a.w > 0.0) {
            let key = lattice_key(&a.x, quantum);
            match index.get(&key) {
                Some(&i) => atoms[i].w += a.w,
                None => {
                    index.insert(key, atoms.len());
                    atoms.push(a.clone());
                }
            }
        }
        Ok(Self { dim: self.dim, atoms })
    }

    pub fn canonicalize(&self, quantum: f64) -> Result<CanonicalForm> {
        check_quantum(quantum)?;
        let mut sites: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for a in self.atoms.iter().filter(|a| a.w > 0.0) {
            *sites.entry(lattice_key(&a.x, quantum)).or_insert(0.0) += a.w;
        }
        Ok(CanonicalForm { dim: self.dim, quantum, sites: sites.into_iter().collect() })
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

/// Deduplicated, lattice-snapped form of a measure.
///
/// Sites are sorted lexicographically by lattice coordinates, so two
/// measures that agree up to atom order and sub-quantum position noise have
/// equal canonical forms.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    dim: usize,
    quantum: f64,
    sites: Vec<(Vec<i64>, f64)>,
}

impl CanonicalForm {
    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    pub fn sites(&self) -> &[(Vec<i64>, f64)] {
        &self.sites
    }

    pub fn total_mass(&self) -> f64 {
        self.sites.iter().map(|(_, w)| w).sum()
    }

    /// Back to a measure, with positions on the lattice.
    pub fn to_measure(&self) -> DiscreteMeasure {
        DiscreteMeasure {
            dim: self.dim,
            atoms: self
                .sites
                .iter()
                .map(|(k, w)| Atom::new(k.iter().map(|&c| c as f64 * self.quantum).collect(), *w))
                .collect(),
        }
    }

    /// `Σ_sites |w_self − w_other|`, unmatched sites counting full weight.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.sites, &other.sites);
        let mut total = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    total += a[i].1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    total += b[j].1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    total += (a[i].1 - b[j].1).abs();
                    i += 1;
                    j += 1;
                }
            }
        }
        total += a[i..].iter().map(|s| s.1).sum::<f64>();
        total += b[j..].iter().map(|s| s.1).sum::<f64>();
        total
    }
}

/// Total variation distance `|μ − ν|` after canonicalizing both measures.
pub fn tv_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure, quantum: f64) -> Result<f64> {
    mu.check_dim(nu)?;
    Ok(mu.canonicalize(quantum)?.tv_distance(&nu.canonicalize(quantum)?))
}

/// `true` when `μ` and `ν` agree site by site within `weight_tol`.
pub fn approx_eq(mu: &DiscreteMeasure, nu: &DiscreteMeasure, quantum: f64, weight_tol: f64) -> Result<bool> {
    Ok(tv_distance(mu, nu, quantum)? <= weight_tol)
}

pub fn total_mass(mu: &DiscreteMeasure) -> f64 {
    mu.total_mass()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn lattice_key(x: &[f64], quantum: f64) -> Vec<i64> {
    x.iter().map(|c| (c / quantum).round() as i64).collect()
}

fn check_quantum(quantum: f64) -> Result<()> {
    if quantum > 0.0 && quantum.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidQuantum(quantum))
    }
}
