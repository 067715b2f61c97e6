//! Exact balanced optimal transport between discrete measures of equal mass.
//!
//! `W_p(μ, ν)^p = min Σ γ_ij ‖x_i − y_j‖^p` over nonnegative plans `γ` whose
//! row sums are the weights of `μ` and column sums the weights of `ν`. The
//! plan is not normalized by the mass: `W_p(kμ, kν) = k^{1/p} W_p(μ, ν)`.
//!
//! The transportation problem is solved exactly by successive shortest
//! paths ([`crate::mcf`]). Optimality is certified afterwards by dual
//! variables recomputed independently of the solver's potentials.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcf::TransportNetwork;
use crate::measures::{distance, DiscreteMeasure};

/// A nonzero entry `γ_ij` of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub source: usize,
    pub target: usize,
    pub flow: f64,
}

/// Sparse coupling between the atoms of a source and a target measure.
///
/// Indices refer to atom positions in the coupled measures. Only positive
/// flows are stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub n_source: usize,
    pub n_target: usize,
    pub entries: Vec<PlanEntry>,
}

impl TransportPlan {
    pub fn empty(n_source: usize, n_target: usize) -> Self {
        Self { n_source, n_target, entries: Vec::new() }
    }

    pub(crate) fn from_flows(n_source: usize, n_target: usize, flows: Vec<(usize, usize, f64)>) -> Self {
        let mut entries: Vec<PlanEntry> = flows
            .into_iter()
            .filter(|&(_, _, f)| f > 0.0)
            .map(|(source, target, flow)| PlanEntry { source, target, flow })
            .collect();
        entries.sort_by_key(|e| (e.source, e.target));
        Self { n_source, n_target, entries }
    }

    pub fn total_flow(&self) -> f64 {
        self.entries.iter().map(|e| e.flow).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut rows = vec![0.0; self.n_source];
        for e in &self.entries {
            rows[e.source] += e.flow;
        }
        rows
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut cols = vec![0.0; self.n_target];
        for e in &self.entries {
            cols[e.target] += e.flow;
        }
        cols
    }

    /// `Σ γ_ij ‖x_i − y_j‖^p`.
    pub fn cost(&self, source: &DiscreteMeasure, target: &DiscreteMeasure, p: f64) -> f64 {
        self.entries
            .iter()
            .map(|e| e.flow * distance(&source.atoms()[e.source].x, &target.atoms()[e.target].x).powf(p))
            .sum()
    }

    /// Longest arc carrying flow (0 for an empty plan).
    pub fn max_arc_length(&self, source: &DiscreteMeasure, target: &DiscreteMeasure) -> f64 {
        self.entries
            .iter()
            .map(|e| distance(&source.atoms()[e.source].x, &target.atoms()[e.target].x))
            .fold(0.0, f64::max)
    }

    /// Writes `i,j,flow` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "flow"])?;
        for e in &self.entries {
            w.write_record([e.source.to_string(), e.target.to_string(), e.flow.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Dual certificate of a balanced solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    pub source: Vec<f64>,
    pub target: Vec<f64>,
    /// `max(u_i + v_j − c_ij, 0)` over all arcs.
    pub max_violation: f64,
    /// `|Σ γ c − (Σ μ_i u_i + Σ ν_j v_j)|`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WpResult {
    pub value: f64,
    pub plan: TransportPlan,
    pub p: f64,
    pub duals: Option<Duals>,
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("p must be finite and >= 1, got {p}")))
    }
}

/// Exact `W_p` between two measures whose masses agree within `tol`.
pub fn wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64, tol: f64) -> Result<WpResult> {
    mu.check_dim(nu)?;
    check_p(p)?;
    let (mass_mu, mass_nu) = (mu.total_mass(), nu.total_mass());
    if (mass_mu - mass_nu).abs() > tol {
        return Err(Error::MassMismatch { source_mass: mass_mu, target_mass: mass_nu, tol });
    }
    if mass_mu <= 0.0 || mass_nu <= 0.0 {
        return Err(Error::ZeroMass);
    }

    let support_mu: Vec<usize> = (0..mu.len()).filter(|&i| mu.atoms()[i].w > 0.0).collect();
    let support_nu: Vec<usize> = (0..nu.len()).filter(|&j| nu.atoms()[j].w > 0.0).collect();
    if support_mu.len() == 1 || support_nu.len() == 1 {
        return Ok(single_atom_plan(mu, nu, &support_mu, &support_nu, p));
    }

    let supply: Vec<f64> = mu.atoms().iter().map(|a| a.w).collect();
    let demand: Vec<f64> = nu.atoms().iter().map(|a| a.w).collect();
    let cost = |i: usize, j: usize| distance(&mu.atoms()[i].x, &nu.atoms()[j].x).powf(p);
    let mut net = TransportNetwork::new(&supply, &demand, |i, j| Some(cost(i, j)));
    net.breakpoints_to_max_flow();
    let moved = net.flow_value();
    if (moved - mass_mu.min(mass_nu)).abs() > tol.max(1e-12 * mass_mu) {
        return Err(Error::Solver(format!("flow {moved} does not saturate the marginals (mass {mass_mu})")));
    }
    let plan = TransportPlan::from_flows(mu.len(), nu.len(), net.flows());
    let primal = plan.cost(mu, nu, p);

    let (u, v) = net.duals()?;
    let mut max_violation: f64 = 0.0;
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            if supply[i] > 0.0 && demand[j] > 0.0 {
                max_violation = max_violation.max(u[i] + v[j] - cost(i, j));
            }
        }
    }
    let dual: f64 =
        supply.iter().zip(&u).map(|(w, x)| w * x).sum::<f64>() + demand.iter().zip(&v).map(|(w, x)| w * x).sum::<f64>();
    let duals = Duals { source: u, target: v, max_violation, gap: (primal - dual).abs() };
    Ok(WpResult { value: primal.max(0.0).powf(1.0 / p), plan, p, duals: Some(duals) })
}

fn single_atom_plan(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    support_mu: &[usize],
    support_nu: &[usize],
    p: f64,
) -> WpResult {
    let flows: Vec<(usize, usize, f64)> = if support_mu.len() == 1 {
        let i = support_mu[0];
        support_nu.iter().map(|&j| (i, j, nu.atoms()[j].w)).collect()
    } else {
        let j = support_nu[0];
        support_mu.iter().map(|&i| (i, j, mu.atoms()[i].w)).collect()
    };
    let plan = TransportPlan::from_flows(mu.len(), nu.len(), flows);
    let value = plan.cost(mu, nu, p).powf(1.0 / p);
    WpResult { value, plan, p, duals: None }
}

/// Returns `(W_p(kμ, kν), k^{1/p} W_p(μ, ν))`.
pub fn wasserstein_scaling_check(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    k: f64,
    p: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let base = wasserstein(mu, nu, p, tol)?.value;
    if k == 0.0 {
        return Ok((0.0, 0.0));
    }
    let scaled = wasserstein(&mu.scale(k)?, &nu.scale(k)?, p, tol * k.max(1.0))?.value;
    Ok((scaled, k.powf(1.0 / p) * base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(atoms: &[(f64, f64)]) -> DiscreteMeasure {
        DiscreteMeasure::on_line(atoms).unwrap()
    }

    #[test]
    fn dirac_distance_is_displacement() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let r = wasserstein(&line(&[(0.0, 1.0)]), &line(&[(2.5, 1.0)]), p, 1e-12).unwrap();
            assert_abs_diff_eq!(r.value, 2.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn split_atom_example() {
        let r = wasserstein(&line(&[(1.0, 2.0)]), &line(&[(0.0, 1.0), (2.0, 1.0)]), 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-12);
        // No map can split the atom at 1; the plan must.
        assert!(r.plan.entries.iter().filter(|e| e.source == 0).count() >= 2);
    }

    #[test]
    fn heavy_diracs_at_p2() {
        let r = wasserstein(&line(&[(0.0, 4.0)]), &line(&[(3.0, 4.0)]), 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r.value, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn scaling_examples() {
        let (mu, nu) = (line(&[(0.0, 1.0)]), line(&[(3.0, 1.0)]));
        assert_eq!(wasserstein_scaling_check(&mu, &nu, 0.0, 2.0, 1e-12).unwrap(), (0.0, 0.0));
        let (a, b) = wasserstein_scaling_check(&mu, &nu, 1.0, 2.0, 1e-12).unwrap();
        assert_eq!(a, b);
        let (a, b) = wasserstein_scaling_check(&mu, &nu, 4.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(a, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_mismatch_is_an_error() {
        let err = wasserstein(&line(&[(0.0, 1.0)]), &line(&[(0.0, 2.0)]), 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::MassMismatch { .. }));
        let err = wasserstein(&DiscreteMeasure::zero(1), &DiscreteMeasure::zero(1), 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::ZeroMass));
    }

    #[test]
    fn duals_certify_the_plan() {
        let mu = line(&[(0.0, 0.3), (1.0, 0.3), (4.0, 0.4)]);
        let nu = line(&[(0.5, 0.5), (3.0, 0.2), (5.0, 0.3)]);
        let r = wasserstein(&mu, &nu, 2.0, 1e-12).unwrap();
        let d = r.duals.unwrap();
        assert!(d.max_violation <= 1e-10, "violation {}", d.max_violation);
        assert!(d.gap <= 1e-10, "gap {}", d.gap);
    }

    #[test]
    fn plan_csv_has_header() {
        let r = wasserstein(&line(&[(1.0, 2.0)]), &line(&[(0.0, 1.0), (2.0, 1.0)]), 1.0, 1e-12).unwrap();
        let mut buf = Vec::new();
        r.plan.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("i,j,flow"));
        assert_eq!(text.lines().count(), 3);
    }
}
