use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::warn;
use serde_json::{json, Value};

use superscroll::engine::snapshot;
use superscroll::tracker::write_csv;
use superscroll::{fit_affine_subspace, ring_radius, track_superfilament, Thresholds};

use crate::error::{CliError, CliResult};
use crate::{versions, worker_pool, write_json};

/// Clouds whose in-plane radii vary less than this fraction count as loops.
const RING_SPREAD: f64 = 0.25;

/// Expands glob patterns; plain paths pass through unchanged.
pub fn expand_inputs(inputs: &[String]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pat in inputs {
        if pat.contains(['*', '?', '[']) {
            let paths = glob::glob(pat)
                .map_err(|e| CliError::Config(format!("bad pattern {pat:?}: {e}")))?;
            let mut hits: Vec<PathBuf> = paths.filter_map(|p| p.ok()).collect();
            if hits.is_empty() {
                return Err(CliError::Config(format!(
                    "pattern {pat:?} matches no files"
                )));
            }
            hits.sort();
            out.extend(hits);
        } else {
            out.push(PathBuf::from(pat));
        }
    }
    Ok(out)
}

fn track_one(path: &Path, out: &Path, thresholds: Thresholds) -> CliResult<Value> {
    let (state, mask) = snapshot::load(path)?;
    let report = track_superfilament(&state, &mask, thresholds)?;
    let ndim = state.grid.ndim();
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let csv = out.join(format!("{stem}.csv"));
    let file = File::create(&csv).map_err(|e| CliError::io(&csv, e))?;
    write_csv(BufWriter::new(file), ndim, &report.cloud, true)
        .map_err(|e| CliError::io(&csv, e))?;

    let positions = report.cloud.positions();
    let plane = if ndim >= 3 {
        fit_affine_subspace(&positions, 2).ok()
    } else {
        None
    };
    let ring = match (&plane, ndim) {
        (Some(p), 3) => ring_radius(&positions, p)
            .ok()
            .filter(|r| r.spread <= RING_SPREAD * r.radius)
            .map(|r| json!({"center": r.center, "radius": r.radius, "spread": r.spread})),
        _ => None,
    };
    let residual = plane.as_ref().map(|p| p.max_residual());
    println!(
        "{}: t = {} ms, {} points{}",
        path.display(),
        state.t,
        report.cloud.len(),
        residual.map_or(String::new(), |r| format!(
            ", planarity residual {r:.3e} mm"
        ))
    );
    Ok(json!({
        "file": path,
        "csv": csv.file_name().map(|s| s.to_string_lossy().into_owned()),
        "t_ms": state.t,
        "points": report.cloud.len(),
        "raw_points": report.raw_count,
        "skipped_cells": report.skipped_cells,
        "planarity_residual_mm": residual,
        "ring": ring,
    }))
}

pub fn cmd_track(
    inputs: &[String],
    out: &Path,
    thresholds: Thresholds,
    workers: usize,
) -> CliResult<()> {
    let files = expand_inputs(inputs)?;
    if files.is_empty() {
        return Err(CliError::Config("no snapshots given".into()));
    }
    // one grid for the whole batch, checked from headers before any tracking
    let mut reference: Option<(PathBuf, superscroll::GridSpec)> = None;
    for f in &files {
        let Ok(h) = snapshot::read_header(f) else {
            continue;
        };
        match &reference {
            None => reference = Some((f.clone(), h.grid)),
            Some((first, g)) if *g != h.grid => {
                return Err(CliError::Config(format!(
                    "{} and {} are on different grids",
                    first.display(),
                    f.display()
                )));
            }
            Some(_) => {}
        }
    }
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let pool = worker_pool(workers)?;
    let mut entries = Vec::new();
    let mut failed = 0;
    for f in &files {
        match pool.install(|| track_one(f, out, thresholds)) {
            Ok(v) => entries.push(v),
            Err(e) => {
                warn!("{}: {e}", f.display());
                eprintln!("{}: {e}", f.display());
                failed += 1;
                entries.push(json!({"file": f, "error": e.to_string()}));
            }
        }
    }
    write_json(
        &out.join("summary.json"),
        &json!({
            "command": "track",
            "versions": versions(),
            "thresholds": {"u0": thresholds.u0, "v0": thresholds.v0},
            "workers": workers,
            "snapshots": entries,
        }),
    )?;
    if failed > 0 {
        return Err(CliError::Batch {
            failed,
            total: files.len(),
        });
    }
    Ok(())
}
