use std::path::Path;

use superscroll::fit_tension;
use superscroll::flow::CollapseGeometry;

use crate::error::{CliError, CliResult};
use crate::{versions, write_json};

type Series = Vec<(f64, f64)>;

/// `(t, R)` rows and, when a third column is present, `(t, z)` drift rows.
/// Blank lines, `#` comments and a non-numeric header line are skipped.
pub fn read_radius_csv(path: &Path) -> CliResult<(Series, Option<Series>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut radius = Vec::new();
    let mut drift = Vec::new();
    let mut width = None;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        let Ok(row) = parsed else {
            if width.is_none() && radius.is_empty() {
                continue;
            }
            return Err(CliError::Config(format!(
                "{} line {}: non-numeric row",
                path.display(),
                k + 1
            )));
        };
        if !(2..=3).contains(&row.len()) || width.is_some_and(|w| w != row.len()) {
            return Err(CliError::Config(format!(
                "{} line {}: expected a consistent 2 (t, R) or 3 (t, R, z) columns",
                path.display(),
                k + 1
            )));
        }
        width = Some(row.len());
        radius.push((row[0], row[1]));
        if row.len() == 3 {
            drift.push((row[0], row[2]));
        }
    }
    Ok((radius, (width == Some(3)).then_some(drift)))
}

pub fn cmd_fit(input: &Path, geometry: CollapseGeometry, out: Option<&Path>) -> CliResult<()> {
    let (radius, drift) = read_radius_csv(input)?;
    let fit = fit_tension(&radius, geometry, drift.as_deref())?;
    println!("gamma1 = {} +- {}", fit.params.gamma1, fit.gamma1_stderr);
    match fit.gamma2_stderr {
        Some(se) => println!("gamma2 = {} +- {se}", fit.params.gamma2),
        None => println!("gamma2 not fitted (no drift column)"),
    }
    println!(
        "slope = {} +- {} mm^2/ms over {} samples",
        fit.slope, fit.slope_stderr, fit.samples
    );
    if let Some(out) = out {
        write_json(
            out,
            &serde_json::json!({
                "command": "fit",
                "versions": versions(),
                "input": input,
                "geometry": geometry,
                "fit": fit,
            }),
        )?;
    }
    Ok(())
}
