//! Run configuration: one JSON document, overridable by dotted keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use superscroll::engine::presets::{sim_preset, Preset, Scale, SimName};
use superscroll::{
    Backend, ConductionMask, FhnParams, GridSpec, RegionSpec, RunPlan, StimulusEvent,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Start from a reference protocol; `grid` and `obstacles` must then be
    /// absent.
    pub preset: Option<PresetConfig>,
    pub grid: Option<GridConfig>,
    pub params: Option<FhnParams>,
    /// `false` runs pure diffusion.
    pub reaction: Option<bool>,
    /// ms
    pub dt: Option<f64>,
    /// ms
    pub t_end: Option<f64>,
    /// Added to the preset's stimuli, if any.
    #[serde(default)]
    pub stimuli: Vec<StimulusEvent>,
    #[serde(default)]
    pub obstacles: Vec<RegionSpec>,
    /// ms
    pub snapshot_every: Option<f64>,
    pub backend: Option<Backend>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tracker: TrackerConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetConfig {
    pub name: SimName,
    #[serde(default)]
    pub scale: Scale,
    /// Replaces the restart crop of SIM2-4.
    pub crop: Option<RegionSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub shape: Vec<usize>,
    /// mm
    pub spacing: f64,
    /// Defaults to the zero vector.
    pub origin: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Write periodic snapshots (the final checkpoint is always written).
    #[serde(default = "yes")]
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            snapshots: true,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    /// Track every periodic snapshot during the run.
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub u0: f64,
    #[serde(default)]
    pub v0: f64,
}

fn yes() -> bool {
    true
}

/// Parses `key.path=value`; the value is JSON when it parses as JSON and a
/// string otherwise.
pub fn parse_override(s: &str) -> CliResult<(Vec<String>, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {s:?} is not of the form key=value")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!(
            "override {s:?} has an empty key segment"
        )));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.split('.').map(String::from).collect(), value))
}

pub fn apply_override(doc: &mut Value, path: &[String], value: Value) -> CliResult<()> {
    let mut node = doc;
    for (k, seg) in path.iter().enumerate() {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let Value::Object(map) = node else {
            return Err(CliError::Config(format!(
                "cannot set `{}`: `{}` is not an object",
                path.join("."),
                path[..k].join(".")
            )));
        };
        if k + 1 == path.len() {
            map.insert(seg.clone(), value);
            return Ok(());
        }
        node = map.entry(seg.clone()).or_insert(Value::Null);
    }
    Ok(())
}

pub fn read_document(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Schema check with the offending key path in the error.
pub fn parse_config(doc: &Value) -> CliResult<RunConfig> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("config key `{path}`: {}", e.into_inner()))
    })
}

/// SHA-256 of the compact serialization (keys sorted).
pub fn config_hash(doc: &Value) -> String {
    let bytes = serde_json::to_vec(doc).expect("JSON values serialize");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// A plan ready to run, plus the restart protocol that produces its initial
/// state when the preset has one.
pub struct Resolved {
    pub plan: RunPlan,
    pub preset: Option<Preset>,
}

fn key_err(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config key `{key}`: {msg}"))
}

pub fn resolve(cfg: &RunConfig, default_workers: usize) -> CliResult<Resolved> {
    let (mut plan, preset) = match &cfg.preset {
        Some(p) => {
            if cfg.grid.is_some() {
                return Err(key_err("grid", "cannot be combined with a preset"));
            }
            if !cfg.obstacles.is_empty() {
                return Err(key_err("obstacles", "cannot be combined with a preset"));
            }
            let mut preset = sim_preset(p.name, p.scale).map_err(|e| key_err("preset", e))?;
            if let Some(crop) = &p.crop {
                preset = preset
                    .with_crop(crop.clone())
                    .map_err(|e| key_err("preset.crop", e))?;
            }
            (preset.plan.clone(), Some(preset))
        }
        None => {
            let g = cfg
                .grid
                .as_ref()
                .ok_or_else(|| key_err("grid", "required without a preset"))?;
            let dt = cfg
                .dt
                .ok_or_else(|| key_err("dt", "required without a preset"))?;
            let t_end = cfg
                .t_end
                .ok_or_else(|| key_err("t_end", "required without a preset"))?;
            let origin = g.origin.clone().unwrap_or_else(|| vec![0.0; g.shape.len()]);
            let grid = GridSpec::new(g.shape.clone(), g.spacing, origin)
                .map_err(|e| key_err("grid", e))?;
            for (k, r) in cfg.obstacles.iter().enumerate() {
                r.validate(grid.ndim())
                    .map_err(|e| key_err(&format!("obstacles[{k}]"), e))?;
            }
            let mut plan = RunPlan::new(grid.clone(), dt, t_end);
            plan.mask = ConductionMask::with_obstacles(grid, &cfg.obstacles)
                .map_err(|e| key_err("obstacles", e))?;
            (plan, None)
        }
    };
    if let Some(p) = cfg.params {
        p.validate().map_err(|e| key_err("params", e))?;
        plan.params = p;
    }
    if let Some(r) = cfg.reaction {
        plan.reaction = r;
    }
    if let Some(dt) = cfg.dt {
        plan.dt = dt;
    }
    if let Some(t) = cfg.t_end {
        plan.t_end = t;
    }
    if let Some(s) = cfg.snapshot_every {
        plan.snapshot_every = s;
    }
    if let Some(b) = cfg.backend {
        plan.backend = b;
    }
    for (k, ev) in cfg.stimuli.iter().enumerate() {
        ev.region
            .validate(plan.grid.ndim())
            .map_err(|e| key_err(&format!("stimuli[{k}].region"), e))?;
    }
    plan.stimuli.extend(cfg.stimuli.iter().cloned());
    plan.stimuli.sort_by(|a, b| a.time.total_cmp(&b.time));
    plan.workers = cfg.workers.unwrap_or(default_workers);
    plan.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Resolved { plan, preset })
}
