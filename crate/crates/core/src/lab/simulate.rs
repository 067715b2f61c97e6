//! `gwass simulate`: run the scheme from a JSON configuration and write the
//! snapshots and tables to a directory.
//!
//! ```json
//! {
//!   "initial": {"dim": 1, "atoms": [{"x": [0.0], "w": 1.0}]},
//!   "field": {"dim": 1, "base": {"kind": "constant", "c": [0.5]}},
//!   "source": {"cloud": {"dim": 1, "atoms": [{"x": [0.0], "w": 0.2}]}},
//!   "t_final": 1.0,
//!   "k": 5,
//!   "k_range": [3, 8],
//!   "dependence": {"shift": [0.05], "k": 6},
//!   "params": {"a": 1.0, "b": 1.0, "p": 1.0}
//! }
//! ```
//!
//! `initial` may also be a path to a measure file, resolved relative to the
//! configuration file. Only `initial`, `field` and `k` are required; the
//! string `"reference"` in place of the whole configuration object selects
//! the built-in reference problem at `k = 5`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dynamics::{
    cauchy_table, continuous_dependence_check, reference_problem, sample_and_hold, SchemeConfig, SchemeConstants,
    SourceModel,
};
use crate::error::{Error, Result};
use crate::flows::VectorFieldModel;
use crate::gw::GwParams;
use crate::lab::io::{read_measure, write_json, write_measure};
use crate::measures::DiscreteMeasure;

/// Second trajectory started from the initial measure translated by `shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependenceConfig {
    pub shift: Vec<f64>,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub initial: DiscreteMeasure,
    pub field: VectorFieldModel,
    pub source: SourceModel,
    pub t_final: f64,
    pub k: u32,
    pub k_range: Option<(u32, u32)>,
    pub dependence: Option<DependenceConfig>,
    pub params: GwParams,
    pub scheme: SchemeConfig,
}

const KNOWN: [&str; 9] = ["initial", "field", "source", "t_final", "k", "k_range", "dependence", "params", "scheme"];

impl SimulateConfig {
    /// The reference problem at level `k`.
    pub fn reference(k: u32) -> Self {
        let r = reference_problem();
        Self {
            initial: r.initial,
            field: r.field,
            source: r.source,
            t_final: r.t_final,
            k,
            k_range: None,
            dependence: None,
            params: r.params,
            scheme: SchemeConfig::default(),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, path.parent())
    }

    /// Parses and validates a configuration, reporting every invalid field
    /// rather than stopping at the first.
    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        if value == Value::String("reference".into()) {
            return Ok(Self::reference(5));
        }
        let Value::Object(obj) = value else {
            return Err(Error::InvalidConfig(vec!["configuration must be a JSON object".into()]));
        };
        let mut errors = Vec::new();
        for key in obj.keys().filter(|k| !KNOWN.contains(&k.as_str())) {
            errors.push(format!("{key}: unknown field"));
        }
        let initial = match obj.get("initial") {
            None => {
                errors.push("initial: missing".into());
                None
            }
            Some(Value::String(p)) => {
                let path = base_dir.map_or_else(|| PathBuf::from(p), |d| d.join(p));
                read_measure(&path)
                    .map_err(|e| errors.push(format!("initial: cannot read {}: {e}", path.display())))
                    .ok()
            }
            Some(v) => field_value::<DiscreteMeasure>(v, "initial", &mut errors),
        };
        let field = required::<VectorFieldModel>(&obj, "field", &mut errors);
        let source = optional::<SourceModel>(&obj, "source", &mut errors);
        let t_final = optional::<f64>(&obj, "t_final", &mut errors).unwrap_or(Some(1.0));
        let k = required::<u32>(&obj, "k", &mut errors);
        let k_range = optional::<(u32, u32)>(&obj, "k_range", &mut errors).unwrap_or(None);
        let dependence = optional::<DependenceConfig>(&obj, "dependence", &mut errors).unwrap_or(None);
        let params = optional::<GwParams>(&obj, "params", &mut errors).unwrap_or(Some(GwParams::default()));
        let scheme = optional::<SchemeConfig>(&obj, "scheme", &mut errors).unwrap_or(Some(SchemeConfig::default()));

        if let Some(t) = t_final {
            if !(t > 0.0) || !t.is_finite() {
                errors.push(format!("t_final: must be positive, got {t}"));
            }
        }
        if let Some(p) = &params {
            if let Err(e) = p.validate() {
                errors.push(format!("params: {e}"));
            }
        }
        if let Some(f) = &field {
            if let Err(e) = f.validate() {
                errors.push(format!("field: {e}"));
            }
        }
        let source = match source {
            Some(Some(s)) => {
                if let Err(e) = s.validate() {
                    errors.push(format!("source: {e}"));
                }
                Some(s)
            }
            Some(None) => None,
            None => initial.as_ref().map(|m: &DiscreteMeasure| SourceModel::zero(m.dim())),
        };
        if let (Some(m), Some(f)) = (&initial, &field) {
            if m.dim() != f.dim {
                errors.push(format!("field: dimension {} does not match initial dimension {}", f.dim, m.dim()));
            }
        }
        if let (Some(m), Some(s)) = (&initial, &source) {
            if m.dim() != s.dim() {
                errors.push(format!("source: dimension {} does not match initial dimension {}", s.dim(), m.dim()));
            }
        }
        if let (Some(m), Some(d)) = (&initial, &dependence) {
            if d.shift.len() != m.dim() {
                errors.push(format!("dependence: shift has length {}, expected {}", d.shift.len(), m.dim()));
            }
        }
        if let Some(scheme) = &scheme {
            let cap = scheme.max_level;
            let levels =
                [("k", k), ("k_range", k_range.map(|r| r.1)), ("dependence", dependence.as_ref().map(|d| d.k))];
            for (name, level) in levels {
                if let Some(level) = level.filter(|&l| l > cap) {
                    errors.push(format!("{name}: level {level} exceeds max_level {cap}"));
                }
            }
            if let Some((lo, hi)) = k_range {
                if lo >= hi {
                    errors.push(format!("k_range: need lo < hi, got [{lo}, {hi}]"));
                }
            }
            if !(scheme.flow.ode_step > 0.0) || !(scheme.quantum > 0.0) {
                errors.push("scheme: ode_step and quantum must be positive".into());
            }
        }
        if !errors.is_empty() {
            return Err(Error::InvalidConfig(errors));
        }
        Ok(Self {
            initial: initial.unwrap(),
            field: field.unwrap(),
            source: source.unwrap(),
            t_final: t_final.unwrap(),
            k: k.unwrap(),
            k_range,
            dependence,
            params: params.unwrap(),
            scheme: scheme.unwrap(),
        })
    }
}

fn field_value<T: DeserializeOwned>(v: &Value, name: &str, errors: &mut Vec<String>) -> Option<T> {
    serde_json::from_value(v.clone()).map_err(|e| errors.push(format!("{name}: {e}"))).ok()
}

fn required<T: DeserializeOwned>(obj: &Map<String, Value>, name: &str, errors: &mut Vec<String>) -> Option<T> {
    match obj.get(name) {
        Some(v) => field_value(v, name, errors),
        None => {
            errors.push(format!("{name}: missing"));
            None
        }
    }
}

/// `None` when absent, `Some(None)` when present but invalid.
fn optional<T: DeserializeOwned>(obj: &Map<String, Value>, name: &str, errors: &mut Vec<String>) -> Option<Option<T>> {
    obj.get(name).map(|v| field_value(v, name, errors))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub k: u32,
    pub dt: f64,
    pub snapshots: usize,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub constants: SchemeConstants,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cauchy_slope: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cauchy_within_bounds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependence_within_bounds: Option<bool>,
}

/// Writes `snapshot_NNNNN.json` for every grid time, `mass.csv`, optional
/// `cauchy.csv` and `dependence.csv`, and `summary.json` into `out_dir`.
pub fn run_simulation(cfg: &SimulateConfig, out_dir: impl AsRef<Path>) -> Result<SimulationSummary> {
    let out = out_dir.as_ref();
    std::fs::create_dir_all(out)?;
    let traj = sample_and_hold(&cfg.initial, &cfg.field, &cfg.source, cfg.t_final, cfg.k, &cfg.params, &cfg.scheme)?;
    for (n, (_, m)) in traj.snapshots.iter().enumerate() {
        write_measure(out.join(format!("snapshot_{n:05}.json")), m)?;
    }
    let p_mass = cfg.source.constants().mass;
    let mut w = csv::Writer::from_path(out.join("mass.csv"))?;
    w.write_record(["t", "mass", "bound"])?;
    for (t, m) in traj.masses() {
        w.write_record([t.to_string(), m.to_string(), (cfg.initial.total_mass() + t * p_mass).to_string()])?;
    }
    w.flush()?;

    let mut summary = SimulationSummary {
        k: traj.k,
        dt: traj.dt,
        snapshots: traj.snapshots.len(),
        initial_mass: cfg.initial.total_mass(),
        final_mass: traj.final_state().total_mass(),
        constants: traj.constants,
        cauchy_slope: None,
        cauchy_within_bounds: None,
        dependence_within_bounds: None,
    };
    if let Some((lo, hi)) = cfg.k_range {
        let table = cauchy_table(&cfg.initial, &cfg.field, &cfg.source, cfg.t_final, lo, hi, &cfg.params, &cfg.scheme)?;
        table.write_csv(std::fs::File::create(out.join("cauchy.csv"))?)?;
        summary.cauchy_slope = Some(table.slope);
        summary.cauchy_within_bounds = Some(table.within_bounds(0.0));
    }
    if let Some(dep) = &cfg.dependence {
        let nu0 = cfg.initial.translate(&dep.shift)?;
        let table = continuous_dependence_check(
            &cfg.initial,
            &nu0,
            &cfg.field,
            &cfg.source,
            cfg.t_final,
            dep.k,
            &cfg.params,
            &cfg.scheme,
        )?;
        table.write_csv(std::fs::File::create(out.join("dependence.csv"))?)?;
        summary.dependence_within_bounds = Some(table.within_bounds(1e-12));
    }
    write_json(out.join("summary.json"), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_invalid_field_is_listed() {
        let text = r#"{"initial": {"dim": 1, "atoms": []}, "field": {"dim": 2, "base": {"kind": "constant", "c": [1.0, 0.0]}},
                       "k": "five", "t_final": -1.0, "colour": 3}"#;
        let Err(Error::InvalidConfig(errors)) = SimulateConfig::from_json_str(text, None) else {
            panic!("expected a config error");
        };
        let joined = errors.join("\n");
        for key in ["colour:", "k:", "t_final:", "field: dimension"] {
            assert!(joined.contains(key), "{key} missing from {joined}");
        }
        assert_eq!(errors.len(), 4);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let text = r#"{"initial": {"dim": 1, "atoms": [{"x": [0.0], "w": 1.0}]},
                       "field": {"dim": 1, "base": {"kind": "constant", "c": [0.5]}}, "k": 2}"#;
        let cfg = SimulateConfig::from_json_str(text, None).unwrap();
        assert_eq!(cfg.t_final, 1.0);
        assert_eq!(cfg.params, GwParams::default());
        assert_eq!(cfg.source, SourceModel::zero(1));
    }

    #[test]
    fn reference_shortcut() {
        assert_eq!(SimulateConfig::from_json_str("\"reference\"", None).unwrap(), SimulateConfig::reference(5));
    }
}
