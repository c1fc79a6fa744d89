use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::info;
use serde_json::{json, Value};

use superscroll::engine::snapshot;
use superscroll::tracker::write_csv;
use superscroll::{run, track_superfilament, SnapshotKind, Thresholds};

use crate::config::{
    apply_override, config_hash, parse_config, parse_override, read_document, resolve,
};
use crate::error::{CliError, CliResult};
use crate::{default_workers, versions, write_json};

pub struct RunArgs {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub scale: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub resume: Option<PathBuf>,
    pub set: Vec<String>,
}

/// Merges the config file, the shorthand flags and the `--set` overrides
/// into one document.
fn build_document(args: &RunArgs) -> CliResult<Value> {
    let mut doc = match &args.config {
        Some(p) => read_document(p)?,
        None => Value::Object(Default::default()),
    };
    let mut sets = Vec::new();
    if let Some(p) = &args.preset {
        sets.push((
            vec!["preset".into(), "name".into()],
            Value::String(p.to_ascii_uppercase()),
        ));
    }
    if let Some(s) = &args.scale {
        sets.push((
            vec!["preset".into(), "scale".into()],
            Value::String(s.to_ascii_lowercase()),
        ));
    }
    if let Some(o) = &args.out {
        sets.push((vec!["output".into(), "dir".into()], json!(o)));
    }
    if let Some(w) = args.workers {
        sets.push((vec!["workers".into()], json!(w)));
    }
    for s in &args.set {
        sets.push(parse_override(s)?);
    }
    for (path, value) in sets {
        apply_override(&mut doc, &path, value)?;
    }
    Ok(doc)
}

fn snapshot_name(step: u64) -> String {
    format!("snap_{step:010}.xmed")
}

pub fn cmd_run(args: RunArgs) -> CliResult<()> {
    let doc = build_document(&args)?;
    let cfg = parse_config(&doc)?;
    let out = cfg.output.dir.clone().ok_or_else(|| {
        CliError::Config("config key `output.dir`: required (or pass --out)".into())
    })?;
    let resolved = resolve(&cfg, default_workers())?;
    let mut plan = resolved.plan;
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    // the output location does not change what is computed
    let mut hashed = doc.clone();
    if let Some(o) = hashed.get_mut("output").and_then(Value::as_object_mut) {
        o.remove("dir");
    }
    let hash = config_hash(&hashed);
    write_json(&out.join("config.json"), &doc)?;

    let started = Instant::now();
    let initial = match (
        &args.resume,
        resolved
            .preset
            .as_ref()
            .and_then(|p| p.prerequisite.as_ref()),
    ) {
        (Some(path), _) => {
            let (state, mask) = snapshot::load(path)?;
            if state.grid != plan.grid {
                return Err(CliError::Config(format!(
                    "checkpoint {} is on a different grid than the configured run",
                    path.display()
                )));
            }
            info!("resuming from {} at t = {} ms", path.display(), state.t);
            plan.mask = mask;
            Some(state)
        }
        (None, Some(pre)) => {
            info!("running the restart prerequisite");
            let (state, mask) = pre.execute()?;
            plan.mask = mask;
            Some(state)
        }
        (None, None) => None,
    };

    let thresholds = Thresholds {
        u0: cfg.tracker.u0,
        v0: cfg.tracker.v0,
    };
    let filaments = out.join("filaments");
    if cfg.tracker.enabled {
        fs::create_dir_all(&filaments).map_err(|e| CliError::io(&filaments, e))?;
    }
    let mask = plan.mask.clone();
    let mut snapshots = Vec::new();
    let final_path = out.join("final.xmed");
    let summary = run(&plan, initial, |state, kind| {
        let path = match kind {
            SnapshotKind::Final => final_path.clone(),
            SnapshotKind::Periodic if cfg.output.snapshots => {
                out.join(snapshot_name(state.step_count))
            }
            SnapshotKind::Periodic => return Ok(()),
        };
        snapshot::save(&path, state, &mask)?;
        if cfg.tracker.enabled {
            let report = track_superfilament(state, &mask, thresholds)?;
            let name = format!("{}.csv", path.file_stem().unwrap().to_string_lossy());
            let csv = filaments.join(name);
            let file = File::create(&csv).map_err(|e| superscroll::Error::Io {
                path: csv.clone(),
                source: e,
            })?;
            write_csv(BufWriter::new(file), state.grid.ndim(), &report.cloud, true).map_err(
                |e| superscroll::Error::Io {
                    path: csv.clone(),
                    source: e,
                },
            )?;
        }
        if kind == SnapshotKind::Periodic {
            snapshots.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
        Ok(())
    })?;
    let wall = started.elapsed().as_secs_f64();
    println!(
        "{} steps to t = {} ms in {wall:.1} s; checkpoint {}",
        summary.steps,
        summary.final_state.t,
        final_path.display()
    );
    let manifest = json!({
        "command": "run",
        "config_hash": hash,
        "config": doc,
        "versions": versions(),
        "started_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64() - wall).unwrap_or(0.0),
        "wall_seconds": wall,
        "engine_seconds": summary.wall_seconds,
        "workers": plan.workers,
        "resumed_from": args.resume.as_deref().map(Path::to_path_buf),
        "steps": summary.steps,
        "stimuli_applied": summary.stimuli_applied,
        "final_time_ms": summary.final_state.t,
        "final_checkpoint": "final.xmed",
        "snapshots": snapshots,
    });
    write_json(&out.join("manifest.json"), &manifest)
}
