//! Generalized Wasserstein distance `W^{a,b}_p` between measures of any mass.
//!
//! ```text
//! W^{a,b}_p(μ, ν) = inf  a|μ − μ̃| + a|ν − ν̃| + b W_p(μ̃, ν̃)
//!                   μ̃,ν̃
//! ```
//!
//! over pairs of equal-mass measures. The infimum is attained with `μ̃ ≤ μ`
//! and `ν̃ ≤ ν`, so for discrete measures it becomes a search over partial
//! transport plans `γ ≥ 0` with row sums `≤ μ_i` and column sums `≤ ν_j`:
//!
//! ```text
//! C(γ) = a(|μ| − Σγ) + a(|ν| − Σγ) + b (Σ γ_ij ‖x_i − y_j‖^p)^{1/p}
//! ```
//!
//! * For `p = 1`, `C` is linear in `γ` and the problem is a single min-cost
//!   flow with unit profit `2a − b‖x_i − y_j‖` per transported unit. Arcs
//!   with `b‖x − y‖ ≥ 2a` never help and are left out of the network.
//! * For `p > 1` the transport term is concave in `γ`, so `C` is minimized by
//!   a parametric scan over the transported mass `m`. The minimal transport
//!   cost `T(m)` is convex and piecewise linear with breakpoints given by the
//!   successive shortest paths; on each linear piece `a(|μ|+|ν|−2m) + b T(m)^{1/p}`
//!   is concave, so its minimum over the piece sits at an endpoint.
//!
//! Ties between equally cheap strategies go to removal: the witness keeps the
//! least mass among optimal choices found by the scan.

use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mcf::TransportNetwork;
use crate::measures::{distance, Atom, DiscreteMeasure};
use crate::transport::TransportPlan;

/// Removal cost `a`, transport multiplier `b` and exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwParams {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl GwParams {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        let params = Self { a, b, p };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.a) || !positive(self.b) {
            return Err(Error::InvalidParams(format!(
                "a and b must be positive and finite, got a={}, b={}",
                self.a, self.b
            )));
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidParams(format!("p must be >= 1, got {}", self.p)));
        }
        Ok(())
    }

    /// Distance beyond which transporting a unit is never cheaper than
    /// removing it on both sides when `p = 1`.
    pub fn truncation_radius(&self) -> f64 {
        2.0 * self.a / self.b
    }
}

impl Default for GwParams {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, p: 1.0 }
    }
}

/// Optimal value together with the decomposition that attains it.
///
/// `kept_source` and `kept_target` share atom indexing with the inputs
/// (atoms that are entirely removed keep weight 0), and `plan` couples them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GwResult {
    pub value: f64,
    pub removed_source_mass: f64,
    pub removed_target_mass: f64,
    /// `W_p(μ̃, ν̃)`.
    pub transport_cost: f64,
    pub kept_source: DiscreteMeasure,
    pub kept_target: DiscreteMeasure,
    #[serde(serialize_with = "plan_as_triples")]
    pub plan: TransportPlan,
}

fn plan_as_triples<S: Serializer>(plan: &TransportPlan, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(plan.entries.len()))?;
    for e in &plan.entries {
        seq.serialize_element(&(e.source, e.target, e.flow))?;
    }
    seq.end()
}

impl GwResult {
    /// `a·removed_source + a·removed_target + b·W_p(μ̃, ν̃)` recomputed from
    /// the plan and the kept measures.
    pub fn recompute_value(&self, params: &GwParams) -> f64 {
        let w = self.plan.cost(&self.kept_source, &self.kept_target, params.p).powf(1.0 / params.p);
        params.a * (self.removed_source_mass + self.removed_target_mass) + params.b * w
    }

    /// Longest arc that carries mass in the optimal plan.
    pub fn max_arc_length(&self) -> f64 {
        self.plan.max_arc_length(&self.kept_source, &self.kept_target)
    }

    pub fn kept_mass(&self) -> f64 {
        self.plan.total_flow()
    }
}

/// Exact `W^{a,b}_p(μ, ν)` with its optimal decomposition.
pub fn gw_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure, params: &GwParams) -> Result<GwResult> {
    mu.check_dim(nu)?;
    params.validate()?;
    let supply: Vec<f64> = mu.atoms().iter().map(|a| a.w).collect();
    let demand: Vec<f64> = nu.atoms().iter().map(|a| a.w).collect();
    let flows = if params.p == 1.0 {
        solve_linear(mu, nu, &supply, &demand, params)
    } else {
        solve_parametric(mu, nu, &supply, &demand, params)
    };
    Ok(assemble(mu, nu, flows, params))
}

/// `p = 1`: augment while the path profit `2a − b·slope` is strictly positive.
fn solve_linear(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    supply: &[f64],
    demand: &[f64],
    params: &GwParams,
) -> Vec<(usize, usize, f64)> {
    let radius = params.truncation_radius();
    let mut net = TransportNetwork::new(supply, demand, |i, j| {
        let c = distance(&mu.atoms()[i].x, &nu.atoms()[j].x);
        (c < radius).then_some(c)
    });
    while let Some(path) = net.shortest_path() {
        if params.b * path.slope >= 2.0 * params.a {
            break;
        }
        net.augment(&path, path.capacity);
    }
    net.flows()
}

/// `p > 1`: scan the breakpoints of the optimal transport-cost curve.
fn solve_parametric(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    supply: &[f64],
    demand: &[f64],
    params: &GwParams,
) -> Vec<(usize, usize, f64)> {
    let p = params.p;
    let cost = |i: usize, j: usize| Some(distance(&mu.atoms()[i].x, &nu.atoms()[j].x).powf(p));
    let total = supply.iter().sum::<f64>() + demand.iter().sum::<f64>();
    let objective = |m: f64, t: f64| params.a * (total - 2.0 * m) + params.b * t.max(0.0).powf(1.0 / p);

    let mut scan = TransportNetwork::new(supply, demand, cost);
    let breakpoints = scan.breakpoints_to_max_flow();

    let scale = total.max(1.0) * params.a.max(params.b);
    let mut best = (objective(0.0, 0.0), 0.0);
    for bp in &breakpoints[1..] {
        let f = objective(bp.mass, bp.cost);
        if f < best.0 - 1e-12 * scale {
            best = (f, bp.mass);
        }
    }
    // Interior stationary points of each piece are maxima of a concave
    // function; evaluate them anyway so a violated concavity shows up.
    for w in breakpoints.windows(2) {
        if let Some((m, t)) = interior_stationary_point(w[0].mass, w[0].cost, w[1].mass, w[1].cost, params) {
            debug_assert!(objective(m, t) >= best.0 - 1e-9 * scale);
        }
    }

    let target_mass = best.1;
    if target_mass <= 0.0 {
        return Vec::new();
    }
    let mut net = TransportNetwork::new(supply, demand, cost);
    while net.flow_value() < target_mass {
        let Some(path) = net.shortest_path() else { break };
        let amount = path.capacity.min(target_mass - net.flow_value());
        net.augment(&path, amount);
        if amount < path.capacity {
            break;
        }
    }
    net.flows()
}

/// Root of `f'(m) = −2a + (bλ/p)(β + λ(m − m0))^{1/p − 1}` inside `(m0, m1)`,
/// where the piece is `T(m) = β + λ(m − m0)`.
fn interior_stationary_point(m0: f64, t0: f64, m1: f64, t1: f64, params: &GwParams) -> Option<(f64, f64)> {
    let lambda = (t1 - t0) / (m1 - m0);
    if lambda <= 0.0 || params.p == 1.0 {
        return None;
    }
    // (β + λ s)^{(1−p)/p} = 2ap / (bλ)  ⇒  β + λ s = (2ap/(bλ))^{p/(1−p)}
    let level = (2.0 * params.a * params.p / (params.b * lambda)).powf(params.p / (1.0 - params.p));
    let s = (level - t0) / lambda;
    (s > 0.0 && m0 + s < m1).then_some((m0 + s, level))
}

fn assemble(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    flows: Vec<(usize, usize, f64)>,
    params: &GwParams,
) -> GwResult {
    let plan = TransportPlan::from_flows(mu.len(), nu.len(), flows);
    let rows = plan.row_sums();
    let cols = plan.col_sums();
    let kept = |m: &DiscreteMeasure, sums: &[f64]| {
        let atoms = m.atoms().iter().zip(sums).map(|(a, &s)| Atom::new(a.x.clone(), s.min(a.w))).collect();
        DiscreteMeasure::new(m.dim(), atoms).expect("kept weights are valid")
    };
    let kept_source = kept(mu, &rows);
    let kept_target = kept(nu, &cols);
    let moved = plan.total_flow();
    let removed_source_mass = (mu.total_mass() - moved).max(0.0);
    let removed_target_mass = (nu.total_mass() - moved).max(0.0);
    let transport_cost = plan.cost(&kept_source, &kept_target, params.p).powf(1.0 / params.p);
    GwResult {
        value: params.a * (removed_source_mass + removed_target_mass) + params.b * transport_cost,
        removed_source_mass,
        removed_target_mass,
        transport_cost,
        kept_source,
        kept_target,
        plan,
    }
}

/// Value of `W^{a,b}_p` without the witness.
///
/// One-dimensional inputs with `p = 1` go through [`gw_line`], which is
/// `O(n log n)` instead of a dense min-cost flow; everything else calls
/// [`gw_distance`].
pub fn gw_value(mu: &DiscreteMeasure, nu: &DiscreteMeasure, params: &GwParams) -> Result<f64> {
    mu.check_dim(nu)?;
    params.validate()?;
    // exact zero rather than rounding noise from the sweep
    if mu == nu {
        return Ok(0.0);
    }
    if mu.dim() == 1 && params.p == 1.0 {
        gw_line(mu, nu, params.a, params.b)
    } else {
        Ok(gw_distance(mu, nu, params)?.value)
    }
}

/// `W^{a,b}_1` on the real line.
///
/// On the line the transport cost between sorted points decomposes over the
/// gaps, so the problem is a min-cost flow on a path graph. Let `g(F)` be the
/// cheapest cost of the atoms left of a cut given a net flow `F` crossing it
/// to the right. Sweeping left to right, `g` stays convex piecewise linear:
///
/// * a source atom of weight `w` takes the infimal convolution with the
///   segment of slope `−a` on `[0, w]` (keep `u`, remove `w − u`);
/// * a target atom takes the infimal convolution with slope `+a` on `[−w, 0]`;
/// * a gap of length `ℓ` adds `bℓ|F|`.
///
/// The answer is `g(0)` after the last atom. `g` is stored as two heaps of
/// `(slope, length)` segments on either side of `F = 0` with lazy slope
/// offsets, and `g(0)` is tracked explicitly.
pub fn gw_line(mu: &DiscreteMeasure, nu: &DiscreteMeasure, a: f64, b: f64) -> Result<f64> {
    mu.check_dim(nu)?;
    if mu.dim() != 1 {
        return Err(Error::NotOneDimensional(mu.dim()));
    }
    GwParams::new(a, b, 1.0)?;

    let mut events: Vec<(f64, bool, f64)> = mu
        .atoms()
        .iter()
        .filter(|x| x.w > 0.0)
        .map(|x| (x.x[0], true, x.w))
        .chain(nu.atoms().iter().filter(|x| x.w > 0.0).map(|x| (x.x[0], false, x.w)))
        .collect();
    events.sort_by(|l, r| l.0.total_cmp(&r.0).then(l.1.cmp(&r.1)));

    let mut g = SlopeSequence::default();
    let mut last_x = None;
    for (x, is_source, w) in events {
        if let Some(prev) = last_x {
            g.add_abs(b * (x - prev));
        }
        last_x = Some(x);
        if is_source {
            g.convolve_left(-a, w);
        } else {
            g.convolve_right(a, w);
        }
    }
    Ok(g.value_at_origin)
}

/// Convex piecewise-linear function stored as segments split at the origin.
#[derive(Default)]
struct SlopeSequence {
    /// Segments left of the origin; max-heap on raw slope.
    left: BinaryHeap<(OrderedFloat<f64>, OrderedFloat<f64>)>,
    /// Segments right of the origin; min-heap via negated raw slope.
    right: BinaryHeap<(OrderedFloat<f64>, OrderedFloat<f64>)>,
    left_offset: f64,
    right_offset: f64,
    value_at_origin: f64,
}

impl SlopeSequence {
    fn push_left(&mut self, slope: f64, len: f64) {
        self.left.push((OrderedFloat(slope - self.left_offset), OrderedFloat(len)));
    }

    fn push_right(&mut self, slope: f64, len: f64) {
        self.right.push((OrderedFloat(-(slope - self.right_offset)), OrderedFloat(len)));
    }

    fn pop_left(&mut self) -> Option<(f64, f64)> {
        self.left.pop().map(|(s, l)| (s.0 + self.left_offset, l.0))
    }

    fn pop_right(&mut self) -> Option<(f64, f64)> {
        self.right.pop().map(|(s, l)| (-s.0 + self.right_offset, l.0))
    }

    /// Infimal convolution with slope `slope` on `[0, w]`: the origin stays
    /// at the same distance from the left end of the domain.
    fn convolve_left(&mut self, slope: f64, w: f64) {
        self.push_left(slope, w);
        let mut remaining = w;
        while remaining > 0.0 {
            let Some((s, len)) = self.pop_left() else { break };
            let take = len.min(remaining);
            self.value_at_origin -= s * take;
            self.push_right(s, take);
            if len > take {
                self.push_left(s, len - take);
            }
            remaining -= take;
        }
    }

    /// Infimal convolution with slope `slope` on `[−w, 0]`.
    fn convolve_right(&mut self, slope: f64, w: f64) {
        self.push_right(slope, w);
        let mut remaining = w;
        while remaining > 0.0 {
            let Some((s, len)) = self.pop_right() else { break };
            let take = len.min(remaining);
            self.value_at_origin += s * take;
            self.push_left(s, take);
            if len > take {
                self.push_right(s, len - take);
            }
            remaining -= take;
        }
    }

    /// Adds `c|F|`.
    fn add_abs(&mut self, c: f64) {
        self.left_offset -= c;
        self.right_offset += c;
    }
}

/// Exhaustive grid search over partial plans, an independent upper bound on
/// `W^{a,b}_p`.
///
/// Every `γ_ij` ranges over multiples of `h = min(|μ|, |ν|) / grid_steps`
/// subject to the inequality marginals and `Σγ ≤ min(|μ|, |ν|)`. Rounding an
/// optimal plan down to this grid keeps it feasible, does not increase the
/// transport term, and raises the removal term by less than `2a·K·h` for `K`
/// arcs, so `oracle − exact ≤ 2a·K·h` (see [`grid_refinement_bound`]).
pub fn gw_brute_force(mu: &DiscreteMeasure, nu: &DiscreteMeasure, params: &GwParams, grid_steps: usize) -> Result<f64> {
    mu.check_dim(nu)?;
    params.validate()?;
    let src: Vec<&Atom> = mu.atoms().iter().filter(|a| a.w > 0.0).collect();
    let tgt: Vec<&Atom> = nu.atoms().iter().filter(|a| a.w > 0.0).collect();
    if src.len() + tgt.len() > 6 {
        return Err(Error::InstanceTooLarge(format!("{} atoms, the oracle accepts at most 6", src.len() + tgt.len())));
    }
    if grid_steps == 0 || grid_steps > 50 {
        return Err(Error::InstanceTooLarge(format!("grid_steps must be in 1..=50, got {grid_steps}")));
    }
    let arcs = src.len() * tgt.len();
    let points = binomial(grid_steps + arcs, arcs);
    if points > 5e7 {
        return Err(Error::InstanceTooLarge(format!("{arcs} arcs at {grid_steps} steps is ~{points:.1e} grid points")));
    }
    let (mass_mu, mass_nu) = (mu.total_mass(), nu.total_mass());
    let cap = mass_mu.min(mass_nu);
    let removal_only = params.a * (mass_mu + mass_nu);
    if arcs == 0 || cap <= 0.0 {
        return Ok(removal_only);
    }
    let h = cap / grid_steps as f64;
    let slack = 1e-12;
    let row_cap: Vec<usize> = src.iter().map(|a| ((a.w / h) + slack).floor() as usize).collect();
    let col_cap: Vec<usize> = tgt.iter().map(|a| ((a.w / h) + slack).floor() as usize).collect();
    let costs: Vec<f64> =
        src.iter().flat_map(|x| tgt.iter().map(move |y| distance(&x.x, &y.x).powf(params.p))).collect();

    struct Search<'a> {
        n_tgt: usize,
        costs: &'a [f64],
        h: f64,
        params: &'a GwParams,
        total: f64,
        best: f64,
    }
    impl Search<'_> {
        fn go(&mut self, k: usize, rows: &mut [usize], cols: &mut [usize], left: usize, moved: usize, cost: f64) {
            if k == self.costs.len() {
                let m = moved as f64 * self.h;
                let f = self.params.a * (self.total - 2.0 * m)
                    + self.params.b * (cost * self.h).max(0.0).powf(1.0 / self.params.p);
                self.best = self.best.min(f);
                return;
            }
            let (i, j) = (k / self.n_tgt, k % self.n_tgt);
            let limit = left.min(rows[i]).min(cols[j]);
            for q in 0..=limit {
                rows[i] -= q;
                cols[j] -= q;
                self.go(k + 1, rows, cols, left - q, moved + q, cost + q as f64 * self.costs[k]);
                rows[i] += q;
                cols[j] += q;
            }
        }
    }
    let mut search =
        Search { n_tgt: tgt.len(), costs: &costs, h, params, total: mass_mu + mass_nu, best: removal_only };
    let (mut rows, mut cols) = (row_cap, col_cap);
    search.go(0, &mut rows, &mut cols, grid_steps, 0, 0.0);
    Ok(search.best)
}

/// Upper bound on `gw_brute_force − gw_distance` for the given grid.
pub fn grid_refinement_bound(mu: &DiscreteMeasure, nu: &DiscreteMeasure, params: &GwParams, grid_steps: usize) -> f64 {
    let k = mu.atoms().iter().filter(|a| a.w > 0.0).count() * nu.atoms().iter().filter(|a| a.w > 0.0).count();
    let h = mu.total_mass().min(nu.total_mass()) / grid_steps as f64;
    2.0 * params.a * k as f64 * h
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Lévy–Prokhorov distance between probability measures on the line.
///
/// For finite atomic measures the one-sided condition `μ(A) ≤ ν(A^α) + α`
/// is tightest on subsets of the support of `μ` (intersecting a closed set
/// with the support keeps `μ(A)` and shrinks `A^α`). For each subset the
/// smallest admissible `α` is found among the distances at which `ν(A^α)`
/// jumps. The result is the larger of the two one-sided values.
pub fn levy_prokhorov_1d(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    for m in [mu, nu] {
        if m.dim() != 1 {
            return Err(Error::NotOneDimensional(m.dim()));
        }
        let mass = m.total_mass();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::NotProbability(mass));
        }
        if m.len() > 12 {
            return Err(Error::InstanceTooLarge(format!("{} atoms, at most 12 supported", m.len())));
        }
    }
    Ok(one_sided_lp(mu, nu).max(one_sided_lp(nu, mu)))
}

fn one_sided_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let xs: Vec<(f64, f64)> = mu.atoms().iter().filter(|a| a.w > 0.0).map(|a| (a.x[0], a.w)).collect();
    let ys: Vec<(f64, f64)> = nu.atoms().iter().filter(|a| a.w > 0.0).map(|a| (a.x[0], a.w)).collect();
    let mut worst: f64 = 0.0;
    for subset in 1u32..(1 << xs.len()) {
        let members: Vec<(f64, f64)> = (0..xs.len()).filter(|i| subset >> i & 1 == 1).map(|i| xs[i]).collect();
        let mass_a: f64 = members.iter().map(|m| m.1).sum();
        // (distance from y to A, weight of y), sorted by distance
        let mut reach: Vec<(f64, f64)> = ys
            .iter()
            .map(|&(y, w)| (members.iter().map(|m| (m.0 - y).abs()).fold(f64::INFINITY, f64::min), w))
            .collect();
        reach.sort_by(|l, r| l.0.total_cmp(&r.0));
        let mut best = mass_a; // α = mass_a always works, ν(A^α) ≥ 0
        let mut covered = 0.0;
        let mut k = 0;
        while k < reach.len() {
            let r = reach[k].0;
            while k < reach.len() && reach[k].0 == r {
                covered += reach[k].1;
                k += 1;
            }
            best = best.min(r.max(mass_a - covered));
        }
        worst = worst.max(best);
    }
    worst
}

/// Outcome of checking the truncation radius on an optimal plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationCheck {
    pub max_arc: f64,
    pub radius: f64,
    pub holds: bool,
}

pub fn truncation_check(result: &GwResult, params: &GwParams, tol: f64) -> TruncationCheck {
    let max_arc = result.max_arc_length();
    let radius = params.truncation_radius();
    TruncationCheck { max_arc, radius, holds: max_arc <= radius + tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(atoms: &[(f64, f64)]) -> DiscreteMeasure {
        DiscreteMeasure::on_line(atoms).unwrap()
    }

    fn unit() -> GwParams {
        GwParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn dirac_examples() {
        for (x, expected) in [(3.0, 2.0), (1.0, 1.0), (2.0, 2.0)] {
            let r = gw_distance(&line(&[(0.0, 1.0)]), &line(&[(x, 1.0)]), &unit()).unwrap();
            assert_abs_diff_eq!(r.value, expected, epsilon = 1e-12);
        }
        // bx = 2a: removal wins the tie
        let tie = gw_distance(&line(&[(0.0, 1.0)]), &line(&[(2.0, 1.0)]), &unit()).unwrap();
        assert_eq!(tie.kept_mass(), 0.0);
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let mu = line(&[(0.0, 0.5), (1.0, 2.0)]);
        for p in [1.0, 2.0] {
            let r = gw_distance(&mu, &mu, &GwParams::new(0.3, 2.0, p).unwrap()).unwrap();
            assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.removed_source_mass, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.removed_target_mass, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_measure_costs_removal_of_the_other() {
        let nu = line(&[(0.0, 1.5), (4.0, 0.5)]);
        let params = GwParams::new(2.0, 1.0, 2.0).unwrap();
        let r = gw_distance(&DiscreteMeasure::zero(1), &nu, &params).unwrap();
        assert_abs_diff_eq!(r.value, 4.0, epsilon = 1e-12);
        let r = gw_distance(&DiscreteMeasure::zero(1), &DiscreteMeasure::zero(1), &params).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn split_atom_example() {
        // transport both: 2b = 2; remove all: 4a = 4; mixed: b + 2a = 3
        let r = gw_distance(&line(&[(1.0, 2.0)]), &line(&[(0.0, 1.0), (2.0, 1.0)]), &unit()).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn heavy_atoms_break_the_radius_for_p2() {
        // 101 units at 0 vs 100 at 1 and 1 at 4: moving the far unit is
        // cheaper than deleting it because it rides on the bulk transport.
        let mu = line(&[(0.0, 101.0)]);
        let nu = line(&[(1.0, 100.0), (4.0, 1.0)]);
        let params = GwParams::new(1.0, 1.0, 2.0).unwrap();
        let r = gw_distance(&mu, &nu, &params).unwrap();
        assert_abs_diff_eq!(r.value, 116f64.sqrt(), epsilon = 1e-9);
        assert!(!truncation_check(&r, &params, 1e-9).holds);
    }

    #[test]
    fn witness_recomputes() {
        let mu = DiscreteMeasure::new(2, vec![Atom::new(vec![0.0, 0.0], 1.0), Atom::new(vec![3.0, 0.0], 0.5)]).unwrap();
        let nu = DiscreteMeasure::new(2, vec![Atom::new(vec![0.5, 0.5], 0.7), Atom::new(vec![3.0, 4.0], 2.0)]).unwrap();
        for p in [1.0, 1.5, 2.0] {
            let params = GwParams::new(1.0, 0.8, p).unwrap();
            let r = gw_distance(&mu, &nu, &params).unwrap();
            assert_abs_diff_eq!(r.value, r.recompute_value(&params), epsilon = 1e-12);
            for (k, m) in r.kept_source.atoms().iter().zip(mu.atoms()) {
                assert!(k.w <= m.w);
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GwParams::new(0.0, 1.0, 1.0).is_err());
        assert!(GwParams::new(1.0, -1.0, 1.0).is_err());
        assert!(GwParams::new(1.0, 1.0, 0.5).is_err());
        let two_d = DiscreteMeasure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(gw_distance(&line(&[(0.0, 1.0)]), &two_d, &unit()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn line_solver_matches_examples() {
        assert_abs_diff_eq!(gw_line(&line(&[(0.0, 1.0)]), &line(&[(3.0, 1.0)]), 1.0, 1.0).unwrap(), 2.0);
        assert_abs_diff_eq!(gw_line(&line(&[(0.0, 1.0)]), &line(&[(0.5, 1.0)]), 1.0, 1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(
            gw_line(&line(&[(1.0, 2.0)]), &line(&[(0.0, 1.0), (2.0, 1.0)]), 1.0, 1.0).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(gw_line(&DiscreteMeasure::zero(1), &line(&[(0.0, 3.0)]), 0.5, 1.0).unwrap(), 1.5);
    }

    #[test]
    fn brute_force_examples() {
        let v = gw_brute_force(&line(&[(0.0, 1.0)]), &line(&[(3.0, 1.0)]), &unit(), 50).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
        let mu = line(&[(0.0, 0.5), (1.0, 0.5)]);
        assert_abs_diff_eq!(gw_brute_force(&mu, &mu, &unit(), 50).unwrap(), 0.0, epsilon = 1e-12);
        let big = line(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]);
        assert!(matches!(gw_brute_force(&big, &big, &unit(), 10), Err(Error::InstanceTooLarge(_))));
        assert!(matches!(gw_brute_force(&mu, &mu, &unit(), 51), Err(Error::InstanceTooLarge(_))));
    }

    #[test]
    fn levy_prokhorov_examples() {
        let d0 = line(&[(0.0, 1.0)]);
        assert_eq!(levy_prokhorov_1d(&d0, &d0).unwrap(), 0.0);
        let close = line(&[(-0.2, 0.5), (0.4, 0.5)]);
        assert_abs_diff_eq!(levy_prokhorov_1d(&d0, &close).unwrap(), 0.4, epsilon = 1e-12);
        let split = line(&[(-0.3, 0.5), (1.5, 0.5)]);
        assert_abs_diff_eq!(levy_prokhorov_1d(&d0, &split).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn levy_prokhorov_rejects_bad_input() {
        let half = line(&[(0.0, 0.5)]);
        assert!(matches!(levy_prokhorov_1d(&half, &half), Err(Error::NotProbability(_))));
        let plane = DiscreteMeasure::dirac(vec![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(levy_prokhorov_1d(&plane, &plane), Err(Error::NotOneDimensional(2))));
        let many: Vec<(f64, f64)> = (0..13).map(|i| (i as f64, 1.0 / 13.0)).collect();
        let many = line(&many);
        assert!(matches!(levy_prokhorov_1d(&many, &many), Err(Error::InstanceTooLarge(_))));
    }
}
