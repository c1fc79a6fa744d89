use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use superscroll::engine::snapshot;
use superscroll::{FieldState, SliceSpec, Target};

use crate::error::{CliError, CliResult};

/// `n_p x n_q` table of one field on a coordinate plane, preceded by `#`
/// header lines naming the axes and the fixed coordinates.
pub fn slice_table(state: &FieldState, target: Target, slice: &SliceSpec) -> String {
    let grid = &state.grid;
    let (p, q) = slice.axes();
    let rest = slice.fixed_axes(grid.ndim());
    let h = grid.spacing();
    let field = state.field(target);
    let name = match target {
        Target::U => "u",
        Target::V => "v",
    };
    let mut s = String::new();
    writeln!(s, "# field {name}, t = {} ms, spacing {h} mm", state.t).unwrap();
    writeln!(
        s,
        "# rows: axis {p}, x{p} = {} + i*{h} for i in 0..{}; columns: axis {q}, x{q} = {} + j*{h} for j in 0..{}",
        grid.origin()[p],
        grid.shape()[p],
        grid.origin()[q],
        grid.shape()[q]
    )
    .unwrap();
    for (&axis, &idx) in rest.iter().zip(slice.fixed()) {
        writeln!(
            s,
            "# fixed: axis {axis} index {idx} (x{axis} = {} mm)",
            grid.origin()[axis] + idx as f64 * h
        )
        .unwrap();
    }
    let mut coords = vec![0; grid.ndim()];
    for (&axis, &idx) in rest.iter().zip(slice.fixed()) {
        coords[axis] = idx;
    }
    for i in 0..grid.shape()[p] {
        coords[p] = i;
        let row: Vec<String> = (0..grid.shape()[q])
            .map(|j| {
                coords[q] = j;
                let node: usize = coords.iter().zip(grid.strides()).map(|(c, s)| c * s).sum();
                field[node].to_string()
            })
            .collect();
        writeln!(s, "{}", row.join(",")).unwrap();
    }
    s
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn center_indices(shape: &[usize]) -> Vec<usize> {
    shape.iter().map(|n| n / 2).collect()
}

/// One plane: `axes` and the node indices of the other axes (defaults to the
/// center of each).
pub fn cmd_slice(
    input: &Path,
    out: &Path,
    target: Target,
    axes: (usize, usize),
    fixed: Option<Vec<usize>>,
) -> CliResult<()> {
    let (state, _) = snapshot::load(input)?;
    let grid = &state.grid;
    let (p, q) = axes;
    let fixed = fixed.unwrap_or_else(|| {
        let c = center_indices(grid.shape());
        (0..grid.ndim())
            .filter(|&k| k != p && k != q)
            .map(|k| c[k])
            .collect()
    });
    let slice = SliceSpec::new(grid, p, q, fixed).map_err(|e| CliError::Config(e.to_string()))?;
    write(out, &slice_table(&state, target, &slice))
}

/// Every coordinate plane through the node `at` (defaults to the center),
/// one file per axis pair.
pub fn cmd_slice_all(
    input: &Path,
    out_dir: &Path,
    target: Target,
    at: Option<Vec<usize>>,
) -> CliResult<()> {
    let (state, _) = snapshot::load(input)?;
    let grid = &state.grid;
    let n = grid.ndim();
    let at = at.unwrap_or_else(|| center_indices(grid.shape()));
    if at.len() != n {
        return Err(CliError::Config(format!(
            "--at needs {n} indices, got {}",
            at.len()
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let name = match target {
        Target::U => "u",
        Target::V => "v",
    };
    for p in 0..n {
        for q in p + 1..n {
            let fixed = (0..n)
                .filter(|&k| k != p && k != q)
                .map(|k| at[k])
                .collect();
            let slice =
                SliceSpec::new(grid, p, q, fixed).map_err(|e| CliError::Config(e.to_string()))?;
            write(
                &out_dir.join(format!("{name}_{p}{q}.csv")),
                &slice_table(&state, target, &slice),
            )?;
        }
    }
    Ok(())
}
