//! The sample-and-hold Lagrangian scheme for
//!
//! ```text
//! ∂_t μ + div(v[μ] μ) = h[μ]
//! ```
//!
//! On the dyadic grid `Δt = T / 2^k` each step freezes the velocity and the
//! source at the current snapshot, pushes the snapshot along the frozen flow
//! for `Δt`, and deposits `Δt · h[μ]` on the source's quadrature sites:
//!
//! ```text
//! μ_{(n+1)Δt} = Φ^{v[μ_{nΔt}]}_{Δt} # μ_{nΔt} + Δt h[μ_{nΔt}]
//! ```
//!
//! Between grid times the trajectory is `Φ_τ # μ_{nΔt} + τ h[μ_{nΔt}]`.
//!
//! The diagnostics here measure how successive levels approach each other
//! ([`cauchy_table`]) and how two trajectories with nearby initial data drift
//! apart ([`continuous_dependence_check`]). The certified constants in both
//! are derived for `p = 1`; other exponents run but log a warning.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{push_by_field, BaseField, FlowConfig, Kernel, VectorFieldModel};
use crate::gw::{gw_value, GwParams};
use crate::measures::{DiscreteMeasure, DEFAULT_QUANTUM};

/// How the source strength depends on the total mass of the current state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulation {
    Constant,
    /// `max(0, 1 − |μ| / max_mass)`.
    Saturating {
        max_mass: f64,
    },
}

impl Modulation {
    pub fn factor(&self, mass: f64) -> f64 {
        match self {
            Modulation::Constant => 1.0,
            Modulation::Saturating { max_mass } => (1.0 - mass / max_mass).max(0.0),
        }
    }
}

/// `h[μ] = modulation(|μ|) · cloud` for a fixed quadrature cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub cloud: DiscreteMeasure,
    #[serde(default = "constant_modulation")]
    pub modulation: Modulation,
}

fn constant_modulation() -> Modulation {
    Modulation::Constant
}

/// Source constants: mass bound `P`, support radius `R`, and `Q` with
/// `gw(h[μ], h[ν]) ≤ Q gw(μ, ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConstants {
    #[serde(rename = "P")]
    pub mass: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "Q")]
    pub lipschitz: f64,
}

impl SourceModel {
    pub fn new(cloud: DiscreteMeasure, modulation: Modulation) -> Result<Self> {
        let model = Self { cloud, modulation };
        model.validate()?;
        Ok(model)
    }

    pub fn zero(dim: usize) -> Self {
        Self { cloud: DiscreteMeasure::zero(dim), modulation: Modulation::Constant }
    }

    pub fn validate(&self) -> Result<()> {
        if let Modulation::Saturating { max_mass } = self.modulation {
            if !(max_mass > 0.0) || !max_mass.is_finite() {
                return Err(Error::InvalidModel(format!("saturating modulation needs max_mass > 0, got {max_mass}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.cloud.dim()
    }

    /// `h[μ]`.
    pub fn evaluate(&self, mu: &DiscreteMeasure) -> DiscreteMeasure {
        self.cloud.scale(self.modulation.factor(mu.total_mass())).expect("modulation is nonnegative")
    }

    /// `Q` follows from `gw(s·g, s'·g) ≤ a |s − s'| |g|` and
    /// `a ||μ| − |ν|| ≤ gw(μ, ν)`.
    pub fn constants(&self) -> SourceConstants {
        let mass = self.cloud.total_mass();
        SourceConstants {
            mass,
            radius: self.cloud.support_radius(),
            lipschitz: match self.modulation {
                Modulation::Constant => 0.0,
                Modulation::Saturating { max_mass } => mass / max_mass,
            },
        }
    }
}

/// Every constant the scheme's estimates use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConstants {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M")]
    pub m_sup: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "P")]
    pub p_mass: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    /// `(|μ₀| + P T)^{1/p}`, a bound on `|μ_t|^{1/p}`.
    pub m: f64,
    /// `5L + 4mN + Q`.
    #[serde(rename = "C1")]
    pub c1: f64,
    /// `mN(Mm + P) + MP/4`.
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl SchemeConstants {
    /// Constants for trajectories starting from mass at most `initial_mass`.
    /// The field's Lipschitz and sup bounds are taken at the largest mass the
    /// scheme can reach, `|μ₀| + P T`.
    pub fn derive(
        initial_mass: f64,
        field: &VectorFieldModel,
        source: &SourceModel,
        t_final: f64,
        params: &GwParams,
    ) -> Self {
        let s = source.constants();
        let mass_bound = initial_mass + s.mass * t_final;
        let mut capped = field.clone();
        capped.mass_cap = mass_bound;
        let f = capped.constants(params);
        let m = mass_bound.powf(1.0 / params.p);
        let (l, m_sup, n) = (f.lipschitz, f.sup, f.measure_lipschitz);
        Self {
            l,
            m_sup,
            n,
            p_mass: s.mass,
            r: s.radius,
            q: s.lipschitz,
            m,
            c1: 5.0 * l + 4.0 * m * n + s.lipschitz,
            c2: m * n * (m_sup * m + s.mass) + m_sup * s.mass / 4.0,
        }
    }
}

/// Scheme settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    #[serde(default)]
    pub flow: FlowConfig,
    /// Largest dyadic level accepted; `2^k` steps with a growing atom count.
    #[serde(default = "default_max_level")]
    pub max_level: u32,
    /// Atoms closer than this (per coordinate) are merged after each step.
    #[serde(default = "default_quantum")]
    pub quantum: f64,
}

fn default_max_level() -> u32 {
    12
}

fn default_quantum() -> f64 {
    DEFAULT_QUANTUM
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self { flow: FlowConfig::default(), max_level: default_max_level(), quantum: default_quantum() }
    }
}

/// Grid snapshots of one level of the scheme.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub k: u32,
    pub dt: f64,
    pub snapshots: Vec<(f64, DiscreteMeasure)>,
    pub constants: SchemeConstants,
}

impl Trajectory {
    pub fn final_state(&self) -> &DiscreteMeasure {
        &self.snapshots.last().expect("trajectory is never empty").1
    }

    pub fn masses(&self) -> Vec<(f64, f64)> {
        self.snapshots.iter().map(|(t, m)| (*t, m.total_mass())).collect()
    }
}

fn check_inputs(
    mu0: &DiscreteMeasure,
    field: &VectorFieldModel,
    source: &SourceModel,
    t_final: f64,
    k: u32,
    cfg: &SchemeConfig,
) -> Result<()> {
    mu0.check_dim(&source.cloud)?;
    if field.dim != mu0.dim() {
        return Err(Error::DimensionMismatch { expected: mu0.dim(), found: field.dim });
    }
    field.validate()?;
    source.validate()?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidParams(format!("final time must be positive, got {t_final}")));
    }
    if k > cfg.max_level {
        return Err(Error::InvalidParams(format!("level {k} exceeds the configured cap {}", cfg.max_level)));
    }
    Ok(())
}

fn warn_exponent(params: &GwParams) {
    if params.p != 1.0 {
        log::warn!("p = {}: the constant N is only certified for p = 1, bounds are indicative", params.p);
    }
}

/// One scheme step of length `tau` from the frozen state `mu`.
fn step(
    mu: &DiscreteMeasure,
    field: &VectorFieldModel,
    source: &SourceModel,
    tau: f64,
    cfg: &SchemeConfig,
) -> Result<DiscreteMeasure> {
    let pushed = push_by_field(&field.freeze(mu), mu, tau, &cfg.flow);
    let deposit = source.evaluate(mu).scale(tau)?;
    pushed.add(&deposit)?.merge_coincident(cfg.quantum)
}

/// Runs the scheme at level `k` on `[0, t_final]`.
pub fn sample_and_hold(
    mu0: &DiscreteMeasure,
    field: &VectorFieldModel,
    source: &SourceModel,
    t_final: f64,
    k: u32,
    params: &GwParams,
    cfg: &SchemeConfig,
) -> Result<Trajectory> {
    check_inputs(mu0, field, source, t_final, k, cfg)?;
    params.validate()?;
    let steps = 1usize << k;
    let dt = t_final / steps as f64;
    let mut snapshots = Vec::with_capacity(steps + 1);
    snapshots.push((0.0, mu0.clone()));
    for n in 0..steps {
        let next = step(&snapshots[n].1, field, source, dt, cfg)?;
        snapshots.push(((n + 1) as f64 * dt, next));
    }
    Ok(Trajectory {
        k,
        dt,
        snapshots,
        constants: SchemeConstants::derive(mu0.total_mass(), field, source, t_final, params),
    })
}

/// The scheme's state at an arbitrary time in `[0, t_final]`.
pub fn state_at(
    traj: &Trajectory,
    field: &VectorFieldModel,
    source: &SourceModel,
    t: f64,
    cfg: &SchemeConfig,
) -> Result<DiscreteMeasure> {
    let t_final = traj.snapshots.last().map_or(0.0, |s| s.0);
    if !(0.0..=t_final).contains(&t) {
        return Err(Error::InvalidParams(format!("time {t} outside [0, {t_final}]")));
    }
    let n = ((t / traj.dt).floor() as usize).min(traj.snapshots.len() - 1);
    let tau = t - n as f64 * traj.dt;
    let base = &traj.snapshots[n].1;
    if tau <= 0.0 {
        return Ok(base.clone());
    }
    step(base, field, source, tau, cfg)
}

/// One row of a Cauchy table: `D_k = max_n gw(μ^k_{nΔt}, μ^{k+1}_{nΔt})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyRow {
    pub k: u32,
    pub d_k: f64,
    /// `2 C₂ T² 2^{-k}`.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CauchyTable {
    pub rows: Vec<CauchyRow>,
    /// Least-squares slope of `log₂ D_k` against `k`; `None` when some
    /// `D_k` vanishes.
    pub slope: Option<f64>,
    pub constants: SchemeConstants,
}

impl CauchyTable {
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.d_k <= r.bound + tol)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "d_k", "bound"])?;
        for r in &self.rows {
            w.write_record([r.k.to_string(), r.d_k.to_string(), r.bound.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Compares levels `k` and `k + 1` for `k_min ≤ k < k_max`.
#[allow(clippy::too_many_arguments)]
pub fn cauchy_table(
    mu0: &DiscreteMeasure,
    field: &VectorFieldModel,
    source: &SourceModel,
    t_final: f64,
    k_min: u32,
    k_max: u32,
    params: &GwParams,
    cfg: &SchemeConfig,
) -> Result<CauchyTable> {
    if k_max <= k_min {
        return Err(Error::InvalidParams(format!("need k_min < k_max, got {k_min}..{k_max}")));
    }
    warn_exponent(params);
    let trajectories = (k_min..=k_max)
        .into_par_iter()
        .map(|k| sample_and_hold(mu0, field, source, t_final, k, params, cfg))
        .collect::<Result<Vec<_>>>()?;
    let constants = trajectories[0].constants;
    let rows = trajectories
        .windows(2)
        .map(|pair| {
            let (coarse, fine) = (&pair[0], &pair[1]);
            let d_k = coarse
                .snapshots
                .par_iter()
                .enumerate()
                .map(|(n, (_, m))| gw_value(m, &fine.snapshots[2 * n].1, params))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(CauchyRow {
                k: coarse.k,
                d_k,
                bound: 2.0 * constants.c2 * t_final * t_final * 0.5f64.powi(coarse.k as i32),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = log2_slope(&rows);
    Ok(CauchyTable { rows, slope, constants })
}

fn log2_slope(rows: &[CauchyRow]) -> Option<f64> {
    if rows.len() < 2 || rows.iter().any(|r| !(r.d_k > 0.0)) {
        return None;
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.d_k.log2()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DependenceRow {
    pub t: f64,
    pub gw: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceTable {
    pub rows: Vec<DependenceRow>,
    /// `(p+1)/p L + 2mN + Q + 1`.
    pub rate: f64,
    pub constants: SchemeConstants,
}

impl DependenceTable {
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.gw <= r.bound + tol)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value", "bound"])?;
        for r in &self.rows {
            w.write_record([r.t.to_string(), r.gw.to_string(), r.bound.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs both initial data at level `k` and compares
/// `gw(μ_t, ν_t)` with `e^{rate · t} gw(μ₀, ν₀)` at every grid time.
#[allow(clippy::too_many_arguments)]
pub fn continuous_dependence_check(
    mu0: &DiscreteMeasure,
    nu0: &DiscreteMeasure,
    field: &VectorFieldModel,
    source: &SourceModel,
    t_final: f64,
    k: u32,
    params: &GwParams,
    cfg: &SchemeConfig,
) -> Result<DependenceTable> {
    warn_exponent(params);
    let (mu, nu) = rayon::join(
        || sample_and_hold(mu0, field, source, t_final, k, params, cfg),
        || sample_and_hold(nu0, field, source, t_final, k, params, cfg),
    );
    let (mu, nu) = (mu?, nu?);
    let constants = SchemeConstants::derive(mu0.total_mass().max(nu0.total_mass()), field, source, t_final, params);
    let p = params.p;
    let rate = (p + 1.0) / p * constants.l + 2.0 * constants.m * constants.n + constants.q + 1.0;
    let initial = gw_value(mu0, nu0, params)?;
    let rows = mu
        .snapshots
        .par_iter()
        .zip(&nu.snapshots)
        .map(|((t, m), (_, n))| {
            Ok(DependenceRow { t: *t, gw: gw_value(m, n, params)?, bound: (rate * t).exp() * initial })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DependenceTable { rows, rate, constants })
}

/// The nonlocal one-dimensional test problem used throughout the
/// documentation and the verification suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProblem {
    pub initial: DiscreteMeasure,
    pub field: VectorFieldModel,
    pub source: SourceModel,
    pub t_final: f64,
    pub params: GwParams,
}

/// * `μ₀`: 40 equal atoms at the cell midpoints of `[−1, 0]`, mass 1.
/// * `v[μ](x) = 0.5 + 0.3 Σ w ψ(|x − y| / 0.5)` with `ψ(s) = (1 − s²)²`.
/// * `h`: 10 midpoint sites on `[−0.25, 0.25]` weighted by `ψ(|x| / 0.25)`,
///   total mass 0.2, unmodulated.
/// * `T = 1`, `a = b = p = 1`.
pub fn reference_problem() -> ReferenceProblem {
    let initial = DiscreteMeasure::uniform_on_interval(-1.0, 0.0, 40, 1.0).expect("valid interval");
    let field = VectorFieldModel::new(
        1,
        BaseField::Constant { c: vec![0.5] },
        Kernel::Bump { radius: 0.5, height: 0.3, direction: None },
        1.2,
    )
    .expect("valid model");
    let sites: Vec<(f64, f64)> = (0..10)
        .map(|i| {
            let x = -0.25 + 0.05 * (i as f64 + 0.5);
            let s = x / 0.25;
            (x, (1.0 - s * s).powi(2))
        })
        .collect();
    let total: f64 = sites.iter().map(|s| s.1).sum();
    let cloud = DiscreteMeasure::on_line(&sites.iter().map(|&(x, w)| (x, 0.2 * w / total)).collect::<Vec<_>>())
        .expect("valid cloud");
    ReferenceProblem {
        initial,
        field,
        source: SourceModel { cloud, modulation: Modulation::Constant },
        t_final: 1.0,
        params: GwParams::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::approx_eq;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_field_without_source_translates() {
        let mu0 = DiscreteMeasure::on_line(&[(0.0, 1.0), (0.5, 2.0)]).unwrap();
        let field = VectorFieldModel::constant(vec![0.75]).unwrap();
        let source = SourceModel::zero(1);
        for k in [0, 2, 5] {
            let traj =
                sample_and_hold(&mu0, &field, &source, 1.0, k, &GwParams::default(), &SchemeConfig::default()).unwrap();
            for (t, m) in &traj.snapshots {
                let expected = mu0.translate(&[0.75 * t]).unwrap();
                assert!(approx_eq(m, &expected, 1e-12, 1e-9).unwrap(), "k={k}, t={t}");
            }
        }
    }

    #[test]
    fn static_field_accumulates_the_source() {
        let mu0 = DiscreteMeasure::on_line(&[(-1.0, 1.0)]).unwrap();
        let field = VectorFieldModel::constant(vec![0.0]).unwrap();
        let cloud = DiscreteMeasure::on_line(&[(0.0, 0.3), (0.5, 0.1)]).unwrap();
        let source = SourceModel::new(cloud.clone(), Modulation::Constant).unwrap();
        let traj =
            sample_and_hold(&mu0, &field, &source, 1.0, 3, &GwParams::default(), &SchemeConfig::default()).unwrap();
        for (t, m) in &traj.snapshots {
            let expected = mu0.add(&cloud.scale(*t).unwrap()).unwrap();
            assert!(approx_eq(m, &expected, 1e-12, 1e-9).unwrap(), "t={t}");
        }
        assert_eq!(traj.final_state().len(), 3);
    }

    #[test]
    fn reference_mass_audit() {
        let r = reference_problem();
        let traj =
            sample_and_hold(&r.initial, &r.field, &r.source, 1.0, 4, &r.params, &SchemeConfig::default()).unwrap();
        assert_eq!(traj.snapshots.len(), 17);
        for (t, m) in traj.masses() {
            assert!(m <= 1.0 + 0.2 * t + 1e-12);
        }
        assert_abs_diff_eq!(traj.final_state().total_mass(), 1.2, epsilon = 1e-12);
        assert!(traj.constants.m <= 1.2 + 1e-12);
    }

    #[test]
    fn reference_constants() {
        let r = reference_problem();
        let c = SchemeConstants::derive(1.0, &r.field, &r.source, 1.0, &r.params);
        let lip_k = 0.3 * 8.0 / (3.0 * 3f64.sqrt()) / 0.5;
        assert_abs_diff_eq!(c.l, 1.2 * lip_k, epsilon = 1e-12);
        assert_abs_diff_eq!(c.m_sup, 0.5 + 1.2 * 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(c.n, lip_k, epsilon = 1e-12);
        assert_abs_diff_eq!(c.p_mass, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(c.r, 0.225, epsilon = 1e-12);
        assert_eq!(c.q, 0.0);
        let c2 = 1.2 * lip_k * (0.86 * 1.2 + 0.2) + 0.86 * 0.2 / 4.0;
        assert_abs_diff_eq!(c.c2, c2, epsilon = 1e-12);
        assert_abs_diff_eq!(c.c1, 5.0 * c.l + 4.0 * 1.2 * lip_k, epsilon = 1e-12);
    }

    #[test]
    fn intermediate_times_interpolate() {
        let mu0 = DiscreteMeasure::on_line(&[(0.0, 1.0)]).unwrap();
        let field = VectorFieldModel::constant(vec![1.0]).unwrap();
        let source = SourceModel::new(DiscreteMeasure::on_line(&[(0.1, 1.0)]).unwrap(), Modulation::Constant).unwrap();
        let cfg = SchemeConfig::default();
        let traj = sample_and_hold(&mu0, &field, &source, 1.0, 1, &GwParams::default(), &cfg).unwrap();
        let mid = state_at(&traj, &field, &source, 0.25, &cfg).unwrap();
        let expected = DiscreteMeasure::on_line(&[(0.25, 1.0), (0.1, 0.25)]).unwrap();
        assert!(approx_eq(&mid, &expected, 1e-12, 1e-9).unwrap());
        assert_eq!(&state_at(&traj, &field, &source, 0.5, &cfg).unwrap(), &traj.snapshots[1].1);
        assert!(state_at(&traj, &field, &source, 1.5, &cfg).is_err());
    }

    #[test]
    fn saturating_source_constants() {
        let cloud = DiscreteMeasure::on_line(&[(0.0, 0.5)]).unwrap();
        let s = SourceModel::new(cloud, Modulation::Saturating { max_mass: 2.0 }).unwrap();
        assert_eq!(s.constants().lipschitz, 0.25);
        let mu = DiscreteMeasure::on_line(&[(0.0, 1.0)]).unwrap();
        assert_eq!(s.evaluate(&mu).total_mass(), 0.25);
        assert!(SourceModel::new(DiscreteMeasure::zero(1), Modulation::Saturating { max_mass: 0.0 }).is_err());
    }

    #[test]
    fn level_cap_enforced() {
        let r = reference_problem();
        let cfg = SchemeConfig { max_level: 2, ..Default::default() };
        assert!(matches!(
            sample_and_hold(&r.initial, &r.field, &r.source, 1.0, 3, &r.params, &cfg),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn exact_scheme_has_zero_cauchy_table() {
        let mu0 = DiscreteMeasure::on_line(&[(0.0, 1.0)]).unwrap();
        let field = VectorFieldModel::constant(vec![0.3]).unwrap();
        let t = cauchy_table(
            &mu0,
            &field,
            &SourceModel::zero(1),
            1.0,
            1,
            4,
            &GwParams::default(),
            &SchemeConfig::default(),
        )
        .unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.rows.iter().all(|r| r.d_k < 1e-12));
    }
}
