//! Initial-condition builders.

use crate::engine::FieldState;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::model::StatePair;

/// Bilinear sample of a 2D field at a physical position; `None` outside.
pub fn sample_2d(state: &FieldState, x: f64, y: f64) -> Option<StatePair> {
    let g = &state.grid;
    let h = g.spacing();
    let fx = (x - g.origin()[0]) / h;
    let fy = (y - g.origin()[1]) / h;
    let (nx, ny) = (g.shape()[0], g.shape()[1]);
    if !(fx >= 0.0 && fy >= 0.0 && fx <= (nx - 1) as f64 && fy <= (ny - 1) as f64) {
        return None;
    }
    let i = (fx.floor() as usize).min(nx - 2);
    let j = (fy.floor() as usize).min(ny - 2);
    let (s, t) = (fx - i as f64, fy - j as f64);
    let at = |a: usize, b: usize, f: &[f64]| f[a * ny + b];
    let lerp = |f: &[f64]| {
        (1.0 - s) * ((1.0 - t) * at(i, j, f) + t * at(i, j + 1, f))
            + s * ((1.0 - t) * at(i + 1, j, f) + t * at(i + 1, j + 1, f))
    };
    Some(StatePair::new(lerp(&state.u), lerp(&state.v)))
}

/// Builds a scroll ring by revolving a 2D spiral snapshot around an axis.
///
/// The ring lies in the plane of the first two axes of `grid` (which must be
/// 3D), centered at `center`, with filament radius `radius`. A point at
/// in-plane distance `rho` from the axis and height `z` takes the spiral's
/// value at `pivot + (rho - radius, z - center[2])`; points that map outside
/// the spiral's domain are set to `rest`.
pub fn revolve_spiral(
    spiral: &FieldState,
    pivot: [f64; 2],
    grid: GridSpec,
    center: [f64; 3],
    radius: f64,
    rest: StatePair,
) -> Result<FieldState> {
    if spiral.grid.ndim() != 2 || grid.ndim() != 3 {
        return Err(Error::Contract(
            "revolve_spiral maps a 2D snapshot onto a 3D grid".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(Error::Config(format!(
            "ring radius must be positive, got {radius}"
        )));
    }
    let mut out = FieldState::uniform(grid, rest);
    let mut coords = [0usize; 3];
    for i in 0..out.grid.node_count() {
        out.grid.unravel_into(i, &mut coords);
        let p = out.grid.position(&coords);
        let rho = (p[0] - center[0]).hypot(p[1] - center[1]) - radius;
        let z = p[2] - center[2];
        if let Some(s) = sample_2d(spiral, pivot[0] + rho, pivot[1] + z) {
            out.u[i] = s.u;
            out.v[i] = s.v;
        }
    }
    Ok(out)
}
