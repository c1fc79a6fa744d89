//! Codimension-two curvature flow `dX/dt = g1 H + g2 eps H` of
//! superfilaments: discrete mean curvature, transported normal frames,
//! explicit evolution, area diagnostics and tension fitting.

pub mod complex;
pub mod curvature;
pub mod evolve;
pub mod fit;
pub mod frame;

pub use complex::{ComplexKind, EmbeddedComplex};
pub use curvature::{mean_curvature, CurvatureField};
pub use evolve::{
    area, evolve, stability_bound, EvolveOptions, StepRecord, StopReason, TensionParams, Trajectory,
};
pub use fit::{fit_tension, CollapseGeometry, TensionFit};
pub use frame::{build_parallel_frame, parallel_frame, NormalFrame};

use crate::error::Result;

/// Per-step comparison of the measured area rate with `-g1 * int |H|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaRate {
    pub t: f64,
    /// Measured `dA/dt` over the step.
    pub rate: f64,
    /// `-g1` times the midpoint `int |H|^2 dV`.
    pub predicted: f64,
    /// `|rate - predicted| / |predicted|`; `None` when nothing is predicted.
    pub residual: Option<f64>,
}

pub fn area_rate_check(trajectory: &Trajectory) -> Vec<AreaRate> {
    let g1 = trajectory.tension.gamma1;
    trajectory
        .records
        .iter()
        .filter(|r| r.h2_end.is_finite())
        .map(|r| {
            let rate = (r.area_end - r.area_start) / trajectory.dt;
            let predicted = -g1 * 0.5 * (r.h2_start + r.h2_end);
            let residual = (predicted != 0.0).then(|| ((rate - predicted) / predicted).abs());
            AreaRate {
                t: r.t,
                rate,
                predicted,
                residual,
            }
        })
        .collect()
}

/// Stationarity score: the largest `|H|` times the mean incident edge
/// length over interior (free, non-boundary) vertices.
pub fn minimal_residual(c: &EmbeddedComplex) -> Result<f64> {
    let topo = c.topology();
    let field = curvature::curvature(c, &topo)?;
    let x = c.positions();
    Ok(c.interior_vertices()
        .into_iter()
        .map(|i| {
            let nb = &topo.neighbors[i];
            let scale = nb.iter().map(|&j| (&x[j] - &x[i]).norm()).sum::<f64>() / nb.len() as f64;
            field.h[i].norm() * scale
        })
        .fold(0.0, f64::max))
}
