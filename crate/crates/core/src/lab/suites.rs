//! Verification suites. Each reproduces a family of results and reports one
//! [`Check`] per statement, aggregating randomized trials into their worst
//! case.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{cauchy_table, continuous_dependence_check, reference_problem, sample_and_hold, SchemeConfig};
use crate::error::{Error, Result};
use crate::flows::{flow_estimate_report, BaseField, FlowConfig, Kernel, VectorFieldModel};
use crate::gw::{gw_distance, gw_value, levy_prokhorov_1d, GwParams};
use crate::lab::random::{self, MeasureShape};
use crate::lab::report::{Check, SuiteReport};
use crate::measures::{DiscreteMeasure, DEFAULT_QUANTUM};
use crate::transport::wasserstein;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Metric,
    Examples,
    Flows,
    Scheme,
    Prokhorov,
    Metrization,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Metric, Suite::Examples, Suite::Flows, Suite::Scheme, Suite::Prokhorov, Suite::Metrization];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Metric => "metric",
            Suite::Examples => "examples",
            Suite::Flows => "flows",
            Suite::Scheme => "scheme",
            Suite::Prokhorov => "prokhorov",
            Suite::Metrization => "metrization",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Suite::Metric | Suite::Flows)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            Error::InvalidParams(format!("unknown suite {s:?}, expected one of {}", names.join(", ")))
        })
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Metric => metric(seed, 1000),
        Suite::Examples => examples(),
        Suite::Flows => flows(seed, 100),
        Suite::Scheme => scheme(),
        Suite::Prokhorov => prokhorov(),
        Suite::Metrization => metrization(),
    }
}

const DIRAC: &str = "min{2a,bx}";
const TRIANGLE: &str = "We now prove triangle inequality";
const SYMMETRY: &str = "The symmetry property";
const IDENTITY: &str = "gw(mu,nu)=0 implies mu=nu";
const MASS_BOUNDS: &str = "a||mu|-|nu|| <= gw(mu,nu) <= a(|mu|+|nu|)";
const SCALING: &str = "gw(k mu,k nu) <= max{k^(1/p),k} gw(mu,nu)";
const SUBADDITIVITY: &str = "gw(mu1+mu2,nu1+nu2) <= gw(mu1,nu1)+gw(mu2,nu2)";
const TRUNCATION: &str = "with d=2a/b";
const WITNESS: &str = "a|mu-mu~|+a|nu-nu~|+bW_p(mu~,nu~)";
const BOX: &str = "the minimum is attained by";
const LP_FAR: &str = "d_LP(mu,nu)=1";
const LP_MIXED: &str = "d_LP(mu,nu)=sup{1/2,d_1}";
const LP_CLOSE: &str = "d_LP(mu,nu)=d_2 and";
const FLOWS: &str = "bounded and Lipschitz vector fields";
const CAUCHY: &str = "C2 := mN(Mm+P)+MP/4";
const CAUCHY_SUM: &str = "4C2/2^k";
const GRONWALL: &str = "In particular, under assumption (H)";
const MASS_GROWTH: &str = "mu^k_t(R^d)^(1/p) <= m";
const STEP_DIFF: &str = "gw(mu^k_t,mu^k_s) <= |t-s|(Mm+P)";
const METRIZATION: &str = "take the following sequence of probability measures";

/// Relative excess of `lhs` over `rhs`, positive when the inequality fails.
fn excess(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / rhs.abs().max(1.0)
}

struct MetricTrial {
    params: GwParams,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    eta: DiscreteMeasure,
    zeta: DiscreteMeasure,
    k: f64,
}

#[derive(Default, Clone, Copy)]
struct MetricOutcome {
    triangle: f64,
    symmetry: f64,
    identity: f64,
    separation: bool,
    lower: f64,
    upper: f64,
    scaling: f64,
    subadditivity: f64,
    witness: f64,
    truncation_p1: f64,
    truncation_other: f64,
}

impl MetricOutcome {
    fn worst(self, o: Self) -> Self {
        Self {
            triangle: self.triangle.max(o.triangle),
            symmetry: self.symmetry.max(o.symmetry),
            identity: self.identity.max(o.identity),
            separation: self.separation && o.separation,
            lower: self.lower.max(o.lower),
            upper: self.upper.max(o.upper),
            scaling: self.scaling.max(o.scaling),
            subadditivity: self.subadditivity.max(o.subadditivity),
            witness: self.witness.max(o.witness),
            truncation_p1: self.truncation_p1.max(o.truncation_p1),
            truncation_other: self.truncation_other.max(o.truncation_other),
        }
    }

    fn start() -> Self {
        Self {
            separation: true,
            triangle: f64::NEG_INFINITY,
            lower: f64::NEG_INFINITY,
            upper: f64::NEG_INFINITY,
            scaling: f64::NEG_INFINITY,
            subadditivity: f64::NEG_INFINITY,
            truncation_p1: f64::NEG_INFINITY,
            truncation_other: f64::NEG_INFINITY,
            ..Default::default()
        }
    }
}

/// Draws the random instances of the metric suite.
pub fn metric_instances(seed: u64, trials: usize) -> Vec<(GwParams, [DiscreteMeasure; 4], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let params = random::params(&mut rng, &[1.0, 2.0]);
            let shape = MeasureShape { dim: rng.gen_range(1..=3), max_atoms: 8, spread: 2.0, max_weight: 1.0 };
            let ms = [(); 4].map(|_| random::measure(&mut rng, shape));
            (params, ms, rng.gen_range(0.0..3.0))
        })
        .collect()
}

fn metric_trial(t: &MetricTrial) -> Result<MetricOutcome> {
    let p = &t.params;
    let mn = gw_distance(&t.mu, &t.nu, p)?;
    let nm = gw_value(&t.nu, &t.mu, p)?;
    let ne = gw_value(&t.nu, &t.eta, p)?;
    let me = gw_value(&t.mu, &t.eta, p)?;
    let g = mn.value;
    let (mass_mu, mass_nu) = (t.mu.total_mass(), t.nu.total_mass());
    let scaled = gw_value(&t.mu.scale(t.k)?, &t.nu.scale(t.k)?, p)?;
    let sum = gw_value(&t.mu.add(&t.eta)?, &t.nu.add(&t.zeta)?, p)?;
    let ez = gw_value(&t.eta, &t.zeta, p)?;
    let distinct = t.mu.canonicalize(DEFAULT_QUANTUM)? != t.nu.canonicalize(DEFAULT_QUANTUM)?;
    let arc_excess = mn.max_arc_length() - p.truncation_radius();
    Ok(MetricOutcome {
        triangle: excess(me, g + ne),
        symmetry: (g - nm).abs() / g.max(1.0),
        identity: gw_value(&t.mu, &t.mu, p)?,
        separation: !distinct || g > 0.0,
        lower: excess(p.a * (mass_mu - mass_nu).abs(), g),
        upper: excess(g, p.a * (mass_mu + mass_nu)),
        scaling: excess(scaled, t.k.powf(1.0 / p.p).max(t.k) * g),
        subadditivity: excess(sum, g + ez),
        witness: (mn.recompute_value(p) - g).abs() / g.max(1.0),
        truncation_p1: if p.p == 1.0 { arc_excess } else { f64::NEG_INFINITY },
        truncation_other: if p.p == 1.0 { f64::NEG_INFINITY } else { arc_excess },
    })
}

fn metric(seed: u64, trials: usize) -> Result<SuiteReport> {
    let instances: Vec<MetricTrial> = metric_instances(seed, trials)
        .into_iter()
        .map(|(params, [mu, nu, eta, zeta], k)| MetricTrial { params, mu, nu, eta, zeta, k })
        .collect();
    let w = instances
        .par_iter()
        .map(metric_trial)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(MetricOutcome::start(), MetricOutcome::worst);
    let tol = 1e-9;
    let n = trials;
    let mut checks = vec![
        Check::at_most("triangle", TRIANGLE, w.triangle, 0.0, tol).with_trials(n),
        Check::at_most("symmetry", SYMMETRY, w.symmetry, 0.0, tol).with_trials(n),
        Check::at_most("identity", IDENTITY, w.identity, 0.0, tol).with_trials(n),
        Check::holds("separation", IDENTITY, w.separation).with_trials(n),
        Check::at_most("mass lower bound", MASS_BOUNDS, w.lower, 0.0, tol).with_trials(n),
        Check::at_most("mass upper bound", MASS_BOUNDS, w.upper, 0.0, tol).with_trials(n),
        Check::at_most("scaling", SCALING, w.scaling, 0.0, tol).with_trials(n),
        Check::at_most("subadditivity", SUBADDITIVITY, w.subadditivity, 0.0, tol).with_trials(n),
        Check::at_most("witness", WITNESS, w.witness, 0.0, tol).with_trials(n),
    ];
    if w.truncation_p1.is_finite() {
        checks.push(Check::at_most("truncation p=1", TRUNCATION, w.truncation_p1, 0.0, tol));
    }
    let mut report = SuiteReport::new("metric", Some(seed), checks);
    if w.truncation_other > tol {
        report.notes.push(format!(
            "p>1 plans use arcs up to {:.3e} beyond 2a/b; the radius is only guaranteed for p=1",
            w.truncation_other
        ));
    }
    report.notes.push("excess values are relative to max(1, rhs)".into());
    Ok(report)
}

/// `min_{y∈[0,1]} 2 − 2y + xy + y²`, attained at `y = clamp((2 − x)/2)`.
pub fn box_closed_form(x: f64) -> f64 {
    let y = ((2.0 - x) / 2.0).clamp(0.0, 1.0);
    2.0 - 2.0 * y + x * y + y * y
}

/// The unit boxes `[−1, 0]` and `[x, 1 + x]` with `n` atoms each.
pub fn box_measures(x: f64, n: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    (
        DiscreteMeasure::uniform_on_interval(-1.0, 0.0, n, 1.0).expect("valid box"),
        DiscreteMeasure::uniform_on_interval(x, 1.0 + x, n, 1.0).expect("valid box"),
    )
}

fn dirac(x: f64, w: f64) -> DiscreteMeasure {
    DiscreteMeasure::on_line(&[(x, w)]).expect("finite atom")
}

fn examples() -> Result<SuiteReport> {
    let unit = GwParams::default();
    let mut checks = Vec::new();
    for (x, expected) in [(3.0, 2.0), (1.0, 1.0), (2.0, 2.0)] {
        let v = gw_value(&dirac(0.0, 1.0), &dirac(x, 1.0), &unit)?;
        checks.push(Check::close(format!("dirac x={x}"), DIRAC, v, expected, 1e-12));
    }
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for a in [0.5, 1.0, 2.0] {
        for b in [0.5, 1.0, 2.0] {
            let params = GwParams::new(a, b, 1.0)?;
            for i in 1..=50 {
                let x = 0.1 * i as f64;
                let v = gw_distance(&dirac(0.0, 1.0), &dirac(x, 1.0), &params)?.value;
                worst = worst.max((v - (2.0 * a).min(b * x)).abs());
                count += 1;
            }
        }
    }
    checks.push(Check::at_most("dirac grid", DIRAC, worst, 0.0, 1e-9).with_trials(count));

    let mu = DiscreteMeasure::on_line(&[(0.0, 0.3), (1.0, 0.7), (4.0, 1.1)])?;
    checks.push(Check::close("identity", IDENTITY, gw_value(&mu, &mu, &unit)?, 0.0, 0.0));
    let two = GwParams::new(2.0, 1.0, 1.0)?;
    checks.push(Check::close(
        "zero measure",
        MASS_BOUNDS,
        gw_value(&DiscreteMeasure::zero(1), &mu, &two)?,
        2.0 * mu.total_mass(),
        1e-12,
    ));
    let split = DiscreteMeasure::on_line(&[(0.0, 1.0), (2.0, 1.0)])?;
    checks.push(Check::close("two-atom split", WITNESS, gw_value(&dirac(1.0, 2.0), &split, &unit)?, 2.0, 1e-12));

    for x in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let (mu, nu) = box_measures(x, 200);
        let v = gw_value(&mu, &nu, &unit)?;
        checks.push(Check::close(format!("box x={x}"), BOX, v, box_closed_form(x), 0.02));
    }

    let lp_close = levy_prokhorov_1d(&dirac(0.0, 1.0), &DiscreteMeasure::on_line(&[(-0.2, 0.5), (0.4, 0.5)])?)?;
    checks.push(Check::close("prokhorov very close", LP_CLOSE, lp_close, 0.4, 1e-12));
    let lp_mixed = levy_prokhorov_1d(&dirac(0.0, 1.0), &DiscreteMeasure::on_line(&[(-0.3, 0.5), (1.5, 0.5)])?)?;
    checks.push(Check::close("prokhorov close and far", LP_MIXED, lp_mixed, 0.5, 1e-12));
    Ok(SuiteReport::new("examples", None, checks))
}

/// Representative `(d₁, d₂)` for the four regimes of the comparison with
/// `μ = δ₀`, `ν = ½δ_{−d₁} + ½δ_{d₂}`, `a = ½`, `b = 1`, together with the
/// expected Lévy–Prokhorov distance and generalized distance.
pub fn prokhorov_cases(p: f64) -> Vec<(&'static str, f64, f64, f64, f64)> {
    let wp = |d1: f64, d2: f64| ((d1.powf(p) + d2.powf(p)) / 2.0).powf(1.0 / p);
    vec![
        ("both far", 1.2, 1.5, 1.0, 1.0),
        ("close and far", 0.3, 1.5, 0.5f64.max(0.3), 0.5 + 2f64.powf(-1.0 / p) * 0.3),
        ("close, not very close", 0.3, 0.8, 0.5f64.max(0.3), wp(0.3, 0.8)),
        ("very close", 0.2, 0.4, 0.4, wp(0.2, 0.4)),
    ]
}

fn prokhorov() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mu = dirac(0.0, 1.0);
    for p in [1.0, 2.0] {
        let params = GwParams::new(0.5, 1.0, p)?;
        for (name, d1, d2, lp, gw) in prokhorov_cases(p) {
            let nu = DiscreteMeasure::on_line(&[(-d1, 0.5), (d2, 0.5)])?;
            let anchor = match name {
                "both far" => LP_FAR,
                "very close" => LP_CLOSE,
                _ => LP_MIXED,
            };
            if p == 1.0 {
                checks.push(Check::close(format!("d_LP {name}"), anchor, levy_prokhorov_1d(&mu, &nu)?, lp, 1e-9));
            }
            checks.push(Check::close(format!("gw {name} p={p}"), anchor, gw_value(&mu, &nu, &params)?, gw, 1e-9));
        }
    }
    Ok(SuiteReport::new("prokhorov", None, checks))
}

fn metrization() -> Result<SuiteReport> {
    let params = GwParams::default();
    let target = dirac(0.0, 1.0);
    let mut values = Vec::new();
    let mut w1_worst: f64 = 0.0;
    let mut bound_worst = f64::NEG_INFINITY;
    for k in 2..=50 {
        let kf = k as f64;
        let mu = DiscreteMeasure::on_line(&[(0.0, 1.0 - 1.0 / kf), (kf, 1.0 / kf)])?;
        let g = gw_value(&mu, &target, &params)?;
        bound_worst = bound_worst.max(g - 2.0 * params.a / kf);
        w1_worst = w1_worst.max((wasserstein(&mu, &target, 1.0, 1e-9)?.value - 1.0).abs());
        values.push(g);
    }
    let monotone = values.windows(2).all(|w| w[1] < w[0]);
    let k10 = values[8];
    let mut report = SuiteReport::new(
        "metrization",
        None,
        vec![
            Check::at_most("gw(mu_k, delta_0) <= 2a/k", METRIZATION, bound_worst, 0.0, 1e-12).with_trials(49),
            Check::holds("gw decreasing in k", METRIZATION, monotone).with_trials(49),
            Check::at_most("gw at k=10", METRIZATION, k10, 0.2, 1e-12),
            Check::at_most("W_1(mu_k, delta_0) = 1", METRIZATION, w1_worst, 0.0, 1e-9).with_trials(49),
        ],
    );
    report.notes.push("pinned at p=1: W_p(mu_k, delta_0) = k^(1-1/p) grows without bound for p>1".into());
    Ok(report)
}

fn random_field(rng: &mut impl Rng, dim: usize) -> VectorFieldModel {
    fn vec(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..dim).map(|_| rng.gen_range(lo..=hi)).collect()
    }
    let base = if rng.gen_bool(0.5) {
        BaseField::Constant { c: vec(rng, dim, -1.0, 1.0) }
    } else {
        BaseField::Sine {
            offset: vec(rng, dim, -1.0, 1.0),
            amplitude: vec(rng, dim, -1.0, 1.0),
            wavevector: (0..dim).map(|_| vec(rng, dim, -2.0, 2.0)).collect(),
            phase: vec(rng, dim, 0.0, 6.3),
        }
    };
    let kernel = if rng.gen_bool(0.3) {
        Kernel::Zero
    } else {
        Kernel::Bump {
            radius: rng.gen_range(0.3..=1.5),
            height: rng.gen_range(-1.0..=1.0),
            direction: Some(vec(rng, dim, -1.0, 1.0)),
        }
    };
    VectorFieldModel::new(dim, base, kernel, 10.0).expect("random model is valid")
}

/// Draws the random instances of the flow suite: two models, the measures
/// `(μ, ν)` being transported, a measure to freeze the second field at, the
/// parameters and the time.
#[allow(clippy::type_complexity)]
pub fn flow_instances(
    seed: u64,
    trials: usize,
) -> Vec<(VectorFieldModel, VectorFieldModel, [DiscreteMeasure; 3], GwParams, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let dim = rng.gen_range(1..=2);
            let shape = MeasureShape { dim, max_atoms: 20, spread: 1.0, max_weight: 1.0 };
            let v = random_field(&mut rng, dim);
            let w = if rng.gen_bool(0.5) { v.clone() } else { random_field(&mut rng, dim) };
            let ms = [(); 3].map(|_| random::nonempty_measure(&mut rng, shape));
            let params = random::params(&mut rng, &[1.0, 2.0]);
            (v, w, ms, params, rng.gen_range(0.05..=1.0))
        })
        .collect()
}

fn flows(seed: u64, trials: usize) -> Result<SuiteReport> {
    let cfg = FlowConfig::default();
    let outcomes = flow_instances(seed, trials)
        .par_iter()
        .map(|(v, w, [mu, nu, eta], params, t)| {
            let (fv, fw) = (v.freeze(mu), w.freeze(eta));
            let r = flow_estimate_report(&fv, &fw, mu, nu, *t, params, &cfg)?;
            Ok([
                r.contraction.lhs - r.contraction.rhs,
                r.displacement.lhs - r.displacement.rhs,
                r.mixed.lhs - r.mixed.rhs,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = |i: usize| outcomes.iter().map(|o| o[i]).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-6;
    Ok(SuiteReport::new(
        "flows",
        Some(seed),
        vec![
            Check::at_most("contraction", FLOWS, worst(0), 0.0, tol).with_trials(trials),
            Check::at_most("displacement", FLOWS, worst(1), 0.0, tol).with_trials(trials),
            Check::at_most("mixed", FLOWS, worst(2), 0.0, tol).with_trials(trials),
        ],
    ))
}

fn scheme() -> Result<SuiteReport> {
    let r = reference_problem();
    let cfg = SchemeConfig::default();
    let table = cauchy_table(&r.initial, &r.field, &r.source, r.t_final, 3, 8, &r.params, &cfg)?;
    let mut checks: Vec<Check> = table
        .rows
        .iter()
        .map(|row| Check::at_most(format!("D_{} <= 2 C2 2^-k", row.k), CAUCHY, row.d_k, row.bound, 0.0))
        .collect();
    checks.push(Check::at_most("log2 slope of D_k", CAUCHY_SUM, table.slope.unwrap_or(f64::NAN), -0.8, 0.0));

    let shifted = r.initial.translate(&[0.05])?;
    let dep = continuous_dependence_check(&r.initial, &shifted, &r.field, &r.source, r.t_final, 6, &r.params, &cfg)?;
    let dep_worst = dep.rows.iter().map(|row| row.gw - row.bound).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("dependence k=6", GRONWALL, dep_worst, 0.0, 1e-12).with_trials(dep.rows.len()));

    let traj = sample_and_hold(&r.initial, &r.field, &r.source, r.t_final, 5, &r.params, &cfg)?;
    let c = traj.constants;
    let p = r.params.p;
    let mass_worst =
        traj.snapshots.iter().map(|(_, m)| m.total_mass().powf(1.0 / p) - c.m).fold(f64::NEG_INFINITY, f64::max);
    checks
        .push(Check::at_most("mass bound k=5", MASS_GROWTH, mass_worst, 0.0, 1e-12).with_trials(traj.snapshots.len()));
    let pairs: Vec<(usize, usize)> =
        (0..traj.snapshots.len()).flat_map(|i| (i + 1..traj.snapshots.len()).map(move |j| (i, j))).collect();
    let step_worst = pairs
        .par_iter()
        .map(|&(i, j)| {
            let ((t, a), (s, b)) = (&traj.snapshots[i], &traj.snapshots[j]);
            Ok(gw_value(a, b, &r.params)? - (s - t) * (c.m_sup * c.m + c.p_mass))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("step difference k=5", STEP_DIFF, step_worst, 0.0, 1e-9).with_trials(pairs.len()));
    let support_worst = traj
        .snapshots
        .iter()
        .map(|(_, m)| r.source.evaluate(m).support_radius() - c.r)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("source support", MASS_GROWTH, support_worst, 0.0, 0.0));

    let mut report = SuiteReport::new("scheme", None, checks);
    report.constants = Some(table.constants);
    report.notes.push(format!("Gronwall rate (p+1)/p L + 2mN + Q + 1 = {:.6}", dep.rate));
    Ok(report)
}
