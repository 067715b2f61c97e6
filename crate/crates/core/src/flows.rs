//! Measure-dependent vector fields and the pushforward of measures by their
//! flows.
//!
//! A [`VectorFieldModel`] evaluates
//!
//! ```text
//! v[μ](x) = base(x) + Σ_atoms w · K(x − y)
//! ```
//!
//! for a bounded Lipschitz `base` and an interaction kernel `K`. The
//! constants required by the well-posedness hypothesis are derived in closed
//! form from the model parameters and a declared bound on the mass of the
//! measures the model will see:
//!
//! * `L = Lip(base) + mass_cap · Lip(K)` (spatial Lipschitz constant),
//! * `M = sup|base| + mass_cap · sup|K|` (uniform bound),
//! * `N = max(sup|K| / a, Lip(K) / b)` (Lipschitz constant in `μ` with respect
//!   to `W^{a,b}_1`).
//!
//! The last one follows by splitting `∫ K d(μ − ν)` along an optimal
//! decomposition `(μ̃, ν̃)`: the removed parts contribute at most
//! `sup|K| · (|μ − μ̃| + |ν − ν̃|)` and the transported part at most
//! `Lip(K) · W_1(μ̃, ν̃)`. It is therefore certified for `p = 1` only.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gw::{gw_value, GwParams};
use crate::measures::{norm, DiscreteMeasure};

/// Maximum of `|d/ds (1 − s²)²|` on `[0, 1]`, attained at `s = 1/√3`.
const BUMP_PROFILE_LIPSCHITZ: f64 = 8.0 / (3.0 * 1.732_050_807_568_877_2);

/// A user-supplied map `R^d → R^d`.
#[derive(Clone)]
pub struct PointMap(pub Arc<MapFn>);

pub type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

impl fmt::Debug for PointMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PointMap(..)")
    }
}

impl PartialEq for PointMap {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Measure-independent part of the velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseField {
    Constant {
        c: Vec<f64>,
    },
    /// `v(x) = rate · x`. Unbounded, so it carries no uniform bound.
    Linear {
        rate: f64,
    },
    /// `v_i(x) = offset_i + amplitude_i · sin(wavevector_i · x + phase_i)`.
    Sine {
        offset: Vec<f64>,
        amplitude: Vec<f64>,
        wavevector: Vec<Vec<f64>>,
        phase: Vec<f64>,
    },
    #[serde(skip)]
    Custom {
        map: PointMap,
        lipschitz: f64,
        sup: f64,
    },
}

/// Interaction kernel `K: R^d → R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Zero,
    /// `K(z) = height · (1 − ‖z‖²/r²)² · direction` inside the ball of radius
    /// `r`, zero outside; `C¹` with compact support. `direction` defaults to
    /// the first coordinate axis.
    Bump {
        radius: f64,
        height: f64,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    #[serde(skip)]
    Custom {
        map: PointMap,
        lipschitz: f64,
        sup: f64,
    },
}

impl BaseField {
    fn lipschitz(&self) -> f64 {
        match self {
            BaseField::Constant { .. } => 0.0,
            BaseField::Linear { rate } => rate.abs(),
            BaseField::Sine { amplitude, wavevector, .. } => amplitude
                .iter()
                .zip(wavevector)
                .map(|(a, k)| a * a * k.iter().map(|c| c * c).sum::<f64>())
                .sum::<f64>()
                .sqrt(),
            BaseField::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    fn sup(&self) -> f64 {
        match self {
            BaseField::Constant { c } => norm(c),
            BaseField::Linear { rate } => {
                if *rate == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            BaseField::Sine { offset, amplitude, .. } => norm(offset) + norm(amplitude),
            BaseField::Custom { sup, .. } => *sup,
        }
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            BaseField::Constant { c } => out.copy_from_slice(c),
            BaseField::Linear { rate } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = rate * xi;
                }
            }
            BaseField::Sine { offset, amplitude, wavevector, phase } => {
                for i in 0..out.len() {
                    let arg: f64 = wavevector[i].iter().zip(x).map(|(k, xi)| k * xi).sum::<f64>() + phase[i];
                    out[i] = offset[i] + amplitude[i] * arg.sin();
                }
            }
            BaseField::Custom { map, .. } => out.copy_from_slice(&(map.0)(x)),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        match self {
            BaseField::Constant { c } if c.len() != dim => {
                bad(format!("constant field has length {}, expected {dim}", c.len()))
            }
            BaseField::Linear { rate } if !rate.is_finite() => bad("linear rate must be finite".into()),
            BaseField::Sine { offset, amplitude, wavevector, phase } => {
                if offset.len() != dim
                    || amplitude.len() != dim
                    || phase.len() != dim
                    || wavevector.len() != dim
                    || wavevector.iter().any(|k| k.len() != dim)
                {
                    return bad(format!("sine field components must all have dimension {dim}"));
                }
                Ok(())
            }
            BaseField::Custom { lipschitz, sup, .. } => check_constants(*lipschitz, *sup),
            _ => Ok(()),
        }
    }
}

impl Kernel {
    fn direction_norm(direction: &Option<Vec<f64>>) -> f64 {
        direction.as_deref().map_or(1.0, norm)
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Kernel::Zero => 0.0,
            Kernel::Bump { radius, height, direction } => {
                height.abs() * Self::direction_norm(direction) * BUMP_PROFILE_LIPSCHITZ / radius
            }
            Kernel::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Kernel::Zero => 0.0,
            Kernel::Bump { height, direction, .. } => height.abs() * Self::direction_norm(direction),
            Kernel::Custom { sup, .. } => *sup,
        }
    }

    /// Adds `weight · K(z)` to `out`.
    fn accumulate(&self, z: &[f64], weight: f64, out: &mut [f64]) {
        match self {
            Kernel::Zero => {}
            Kernel::Bump { radius, height, direction } => {
                let s2 = z.iter().map(|c| c * c).sum::<f64>() / (radius * radius);
                if s2 >= 1.0 {
                    return;
                }
                let profile = (1.0 - s2) * (1.0 - s2) * height * weight;
                match direction {
                    Some(d) => {
                        for (o, di) in out.iter_mut().zip(d) {
                            *o += profile * di;
                        }
                    }
                    None => out[0] += profile,
                }
            }
            Kernel::Custom { map, .. } => {
                for (o, k) in out.iter_mut().zip((map.0)(z)) {
                    *o += weight * k;
                }
            }
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Kernel::Zero => Ok(()),
            Kernel::Bump { radius, height, direction } => {
                if !(*radius > 0.0) || !radius.is_finite() || !height.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "bump kernel needs radius > 0 and finite height, got radius={radius}, height={height}"
                    )));
                }
                if let Some(d) = direction {
                    if d.len() != dim || d.iter().any(|c| !c.is_finite()) {
                        return Err(Error::InvalidModel(format!(
                            "bump direction must be a finite vector of length {dim}"
                        )));
                    }
                }
                Ok(())
            }
            Kernel::Custom { lipschitz, sup, .. } => check_constants(*lipschitz, *sup),
        }
    }
}

fn check_constants(lipschitz: f64, sup: f64) -> Result<()> {
    if lipschitz >= 0.0 && lipschitz.is_finite() && sup >= 0.0 && sup.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "custom maps need explicit finite nonnegative constants, got lipschitz={lipschitz}, sup={sup}"
        )))
    }
}

/// Constants `L`, `M`, `N` of a field model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConstants {
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "M")]
    pub sup: f64,
    #[serde(rename = "N")]
    pub measure_lipschitz: f64,
}

/// `v[μ](x) = base(x) + Σ w K(x − y)`, certified for measures of mass at
/// most `mass_cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldModel {
    pub dim: usize,
    pub base: BaseField,
    #[serde(default = "zero_kernel")]
    pub kernel: Kernel,
    #[serde(default = "default_mass_cap")]
    pub mass_cap: f64,
}

fn zero_kernel() -> Kernel {
    Kernel::Zero
}

fn default_mass_cap() -> f64 {
    1.0
}

impl VectorFieldModel {
    pub fn new(dim: usize, base: BaseField, kernel: Kernel, mass_cap: f64) -> Result<Self> {
        let model = Self { dim, base, kernel, mass_cap };
        model.validate()?;
        Ok(model)
    }

    /// A field that does not depend on the measure.
    pub fn frozen_base(dim: usize, base: BaseField) -> Result<Self> {
        Self::new(dim, base, Kernel::Zero, 0.0)
    }

    pub fn constant(c: Vec<f64>) -> Result<Self> {
        let dim = c.len();
        Self::frozen_base(dim, BaseField::Constant { c })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if !(self.mass_cap >= 0.0) || !self.mass_cap.is_finite() {
            return Err(Error::InvalidModel(format!("mass_cap must be finite and >= 0, got {}", self.mass_cap)));
        }
        self.base.validate(self.dim)?;
        self.kernel.validate(self.dim)
    }

    pub fn with_mass_cap(mut self, mass_cap: f64) -> Result<Self> {
        self.mass_cap = mass_cap;
        self.validate()?;
        Ok(self)
    }

    pub fn constants(&self, params: &GwParams) -> FieldConstants {
        let (lip_k, sup_k) = (self.kernel.lipschitz(), self.kernel.sup());
        FieldConstants {
            lipschitz: self.base.lipschitz() + self.mass_cap * lip_k,
            sup: self.base.sup() + self.mass_cap * sup_k,
            measure_lipschitz: (sup_k / params.a).max(lip_k / params.b),
        }
    }

    /// `v[μ]` with `μ` held fixed.
    pub fn freeze<'a>(&'a self, mu: &DiscreteMeasure) -> FrozenField<'a> {
        assert_eq!(mu.dim(), self.dim, "frozen measure has the wrong dimension");
        // Sorted by first coordinate so compactly supported kernels only scan
        // a window of atoms.
        let mut support: Vec<_> = mu.atoms().iter().filter(|a| a.w > 0.0).collect();
        support.sort_by(|a, b| a.x[0].total_cmp(&b.x[0]));
        let moments = (self.dim == 1 && matches!(self.kernel, Kernel::Bump { .. })).then(|| {
            let mut acc = [0.0; 5];
            let mut out = Vec::with_capacity(support.len() + 1);
            out.push(acc);
            for a in &support {
                let mut term = a.w;
                for s in acc.iter_mut() {
                    *s += term;
                    term *= a.x[0];
                }
                out.push(acc);
            }
            out
        });
        FrozenField {
            model: self,
            positions: support.iter().flat_map(|a| a.x.iter().copied()).collect(),
            weights: support.iter().map(|a| a.w).collect(),
            mass: mu.total_mass(),
            measure: mu.clone(),
            moments,
        }
    }
}

/// `v[μ](x)`.
pub fn evaluate_field(model: &VectorFieldModel, mu: &DiscreteMeasure, x: &[f64]) -> Vec<f64> {
    model.freeze(mu).velocity(x)
}

/// A model evaluated against a fixed measure: an ordinary vector field.
#[derive(Debug, Clone)]
pub struct FrozenField<'a> {
    model: &'a VectorFieldModel,
    positions: Vec<f64>,
    weights: Vec<f64>,
    mass: f64,
    measure: DiscreteMeasure,
    /// Prefix sums of `w·y^j`, `j = 0..=4`, for the one-dimensional bump.
    moments: Option<Vec<[f64; 5]>>,
}

impl FrozenField<'_> {
    pub fn model(&self) -> &VectorFieldModel {
        self.model
    }

    pub fn velocity(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.model.dim];
        self.velocity_into(x, &mut out, &mut vec![0.0; self.model.dim]);
        out
    }

    fn velocity_into(&self, x: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        self.model.base.eval_into(x, out);
        if matches!(self.model.kernel, Kernel::Zero) {
            return;
        }
        let d = self.model.dim;
        let (lo, hi) = match self.model.kernel {
            Kernel::Bump { radius, .. } => {
                let first = |k: usize| self.positions[k * d];
                let n = self.weights.len();
                let lo = partition_point(n, |k| first(k) <= x[0] - radius);
                let hi = partition_point(n, |k| first(k) < x[0] + radius);
                (lo, hi)
            }
            _ => (0, self.weights.len()),
        };
        if let (Some(moments), Kernel::Bump { radius, height, direction }) = (&self.moments, &self.model.kernel) {
            // Σ w (1 − (x − y)²/r²)² expanded in the window moments.
            let m: Vec<f64> = (0..5).map(|j| moments[hi][j] - moments[lo][j]).collect();
            let x = x[0];
            let x2 = x * x;
            let u = x2 * m[0] - 2.0 * x * m[1] + m[2];
            let u2 = x2 * x2 * m[0] - 4.0 * x2 * x * m[1] + 6.0 * x2 * m[2] - 4.0 * x * m[3] + m[4];
            let r2 = radius * radius;
            let sum = m[0] - 2.0 * u / r2 + u2 / (r2 * r2);
            out[0] += height * direction.as_ref().map_or(1.0, |d| d[0]) * sum;
            return;
        }
        for k in lo..hi {
            let w = self.weights[k];
            let y = &self.positions[k * d..(k + 1) * d];
            for i in 0..d {
                scratch[i] = x[i] - y[i];
            }
            self.model.kernel.accumulate(scratch, w, out);
        }
    }

    /// Spatial Lipschitz constant of this particular field.
    pub fn lipschitz(&self) -> f64 {
        self.model.base.lipschitz() + self.mass * self.model.kernel.lipschitz()
    }

    /// Uniform bound of this particular field.
    pub fn sup(&self) -> f64 {
        self.model.base.sup() + self.mass * self.model.kernel.sup()
    }

    /// An upper bound on `sup_x |v(x) − w(x)|`.
    ///
    /// Exact when the two bases differ by a constant vector; the kernel parts
    /// are bounded through `N · W^{a,b}_1` of the frozen measures.
    pub fn sup_distance_bound(&self, other: &FrozenField<'_>, params: &GwParams) -> Result<f64> {
        let base = match (&self.model.base, &other.model.base) {
            (BaseField::Constant { c: c1 }, BaseField::Constant { c: c2 }) => {
                norm(&c1.iter().zip(c2).map(|(a, b)| a - b).collect::<Vec<_>>())
            }
            (
                BaseField::Sine { offset: o1, amplitude: a1, wavevector: k1, phase: p1 },
                BaseField::Sine { offset: o2, amplitude: a2, wavevector: k2, phase: p2 },
            ) if a1 == a2 && k1 == k2 && p1 == p2 => norm(&o1.iter().zip(o2).map(|(a, b)| a - b).collect::<Vec<_>>()),
            (b1, b2) if b1 == b2 => 0.0,
            (b1, b2) => b1.sup() + b2.sup(),
        };
        let kernel = match (&self.model.kernel, &other.model.kernel) {
            (Kernel::Zero, Kernel::Zero) => 0.0,
            (k1, k2) if k1 == k2 => {
                let n = (k1.sup() / params.a).max(k1.lipschitz() / params.b);
                let p1 = GwParams { p: 1.0, ..*params };
                n * gw_value(&self.measure, &other.measure, &p1)?
            }
            (k1, k2) => self.mass * k1.sup() + other.mass * k2.sup(),
        };
        Ok(base + kernel)
    }
}

/// First index in `0..n` where `pred` fails; `pred` must be monotone.
fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Inner integrator settings. The integrator is classical fourth-order
/// Runge–Kutta with a fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub ode_step: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { ode_step: 1.0 / 64.0 }
    }
}

impl FlowConfig {
    pub fn new(ode_step: f64) -> Result<Self> {
        if ode_step > 0.0 && ode_step.is_finite() {
            Ok(Self { ode_step })
        } else {
            Err(Error::InvalidParams(format!("ode_step must be positive, got {ode_step}")))
        }
    }
}

/// Moves every atom of `carrier` along `ẋ = v[frozen](x)` for time `t`.
pub fn flow_pushforward(
    model: &VectorFieldModel,
    carrier: &DiscreteMeasure,
    frozen: &DiscreteMeasure,
    t: f64,
    cfg: &FlowConfig,
) -> DiscreteMeasure {
    push_by_field(&model.freeze(frozen), carrier, t, cfg)
}

/// Pushforward of `carrier` by the time-`t` flow of an already frozen field.
pub fn push_by_field(field: &FrozenField<'_>, carrier: &DiscreteMeasure, t: f64, cfg: &FlowConfig) -> DiscreteMeasure {
    assert!(t >= 0.0, "flow time must be nonnegative");
    assert_eq!(carrier.dim(), field.model.dim, "carrier has the wrong dimension");
    if t == 0.0 {
        return carrier.clone();
    }
    let steps = (t / cfg.ode_step).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let atoms: Vec<_> = carrier
        .atoms()
        .par_iter()
        .map(|a| {
            let mut x = a.x.clone();
            rk4(field, &mut x, h, steps);
            crate::measures::Atom::new(x, a.w)
        })
        .collect();
    DiscreteMeasure::new(carrier.dim(), atoms).expect("flow keeps atoms finite")
}

fn rk4(field: &FrozenField<'_>, x: &mut [f64], h: f64, steps: usize) {
    let d = x.len();
    let mut k = [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    let mut tmp = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for _ in 0..steps {
        field.velocity_into(x, &mut k[0], &mut scratch);
        for i in 0..d {
            tmp[i] = x[i] + 0.5 * h * k[0][i];
        }
        field.velocity_into(&tmp, &mut k[1], &mut scratch);
        for i in 0..d {
            tmp[i] = x[i] + 0.5 * h * k[1][i];
        }
        field.velocity_into(&tmp, &mut k[2], &mut scratch);
        for i in 0..d {
            tmp[i] = x[i] + h * k[2][i];
        }
        field.velocity_into(&tmp, &mut k[3], &mut scratch);
        for i in 0..d {
            x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
    }
}

/// Left and right sides of one inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub lhs: f64,
    pub rhs: f64,
}

impl Bound {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// The three flow estimates for `W^{a,b}_p`:
///
/// 1. `gw(Φ^v_t#μ, Φ^v_t#ν) ≤ e^{(p+1)/p·Lt} gw(μ, ν)`
/// 2. `gw(μ, Φ^v_t#μ) ≤ b t ‖v‖ |μ|^{1/p}`
/// 3. `gw(Φ^v_t#μ, Φ^w_t#ν) ≤ e^{(p+1)/p·Lt} gw(μ, ν) + b |μ|^{1/p} e^{Lt/p}(e^{Lt} − 1)/L ‖v − w‖`
///
/// with `L` the larger Lipschitz constant of `v` and `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowEstimateReport {
    pub contraction: Bound,
    pub displacement: Bound,
    pub mixed: Bound,
}

impl FlowEstimateReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.contraction.holds(tol) && self.displacement.holds(tol) && self.mixed.holds(tol)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn flow_estimate_report(
    v: &FrozenField<'_>,
    w: &FrozenField<'_>,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    t: f64,
    params: &GwParams,
    cfg: &FlowConfig,
) -> Result<FlowEstimateReport> {
    let p = params.p;
    let lip = v.lipschitz().max(w.lipschitz());
    let mass_root = mu.total_mass().powf(1.0 / p);
    let gw = |x: &DiscreteMeasure, y: &DiscreteMeasure| gw_value(x, y, params);

    let v_mu = push_by_field(v, mu, t, cfg);
    let v_nu = push_by_field(v, nu, t, cfg);
    let w_nu = push_by_field(w, nu, t, cfg);
    let initial = gw(mu, nu)?;
    let growth = ((p + 1.0) / p * lip * t).exp();

    let contraction = Bound { lhs: gw(&v_mu, &v_nu)?, rhs: growth * initial };
    let displacement = Bound { lhs: gw(mu, &v_mu)?, rhs: params.b * t * v.sup() * mass_root };
    let spread = if lip > 0.0 { (lip * t / p).exp() * ((lip * t).exp() - 1.0) / lip } else { t };
    let mixed = Bound {
        lhs: gw(&v_mu, &w_nu)?,
        rhs: growth * initial + params.b * mass_root * spread * v.sup_distance_bound(w, params)?,
    };
    Ok(FlowEstimateReport { contraction, displacement, mixed })
}
