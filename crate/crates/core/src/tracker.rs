//! Phase-singularity tracking.
//!
//! A phase singularity on a 2D coordinate slice is a point where the
//! `u = u0` and `v = v0` isolines cross. Every unit cell of a slice is
//! linearized from its four corner values (least-squares plane, i.e. the
//! secant of the bilinear interpolant) and the two level lines are
//! intersected. Repeating this over all coordinate-plane families samples the
//! codimension-two superfilament in N dimensions.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::engine::FieldState;
use crate::error::{Error, Result};
use crate::grid::{ConductionMask, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub u0: f64,
    pub v0: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { u0: 0.0, v0: 0.0 }
    }
}

/// A 2D coordinate plane through the lattice: axes `(p, q)` with `p < q`,
/// and node indices for the remaining axes in increasing axis order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SliceSpec {
    axes: (usize, usize),
    fixed: Vec<usize>,
}

impl SliceSpec {
    /// Normalizes the axis order. `fixed` lists indices of the other axes in
    /// increasing axis order.
    pub fn new(grid: &GridSpec, p: usize, q: usize, fixed: Vec<usize>) -> Result<Self> {
        let n = grid.ndim();
        if p == q || p >= n || q >= n {
            return Err(Error::Config(format!(
                "invalid slice axes ({p}, {q}) for {n} dimensions"
            )));
        }
        if fixed.len() != n - 2 {
            return Err(Error::Config(format!(
                "slice needs {} fixed indices, got {}",
                n - 2,
                fixed.len()
            )));
        }
        let axes = (p.min(q), p.max(q));
        let others = (0..n).filter(|&k| k != axes.0 && k != axes.1);
        for (axis, &f) in others.zip(&fixed) {
            if f >= grid.shape()[axis] {
                return Err(Error::Index {
                    axis,
                    value: f as i64,
                    extent: grid.shape()[axis],
                });
            }
        }
        Ok(SliceSpec { axes, fixed })
    }

    pub fn axes(&self) -> (usize, usize) {
        self.axes
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    /// The axes held fixed, in increasing order.
    pub fn fixed_axes(&self, ndim: usize) -> Vec<usize> {
        (0..ndim)
            .filter(|&k| k != self.axes.0 && k != self.axes.1)
            .collect()
    }

    /// Flat index of slice node `(i, j)`.
    fn index(&self, grid: &GridSpec, base: usize, i: usize, j: usize) -> usize {
        base + i * grid.strides()[self.axes.0] + j * grid.strides()[self.axes.1]
    }

    fn base(&self, grid: &GridSpec) -> usize {
        self.fixed_axes(grid.ndim())
            .iter()
            .zip(&self.fixed)
            .map(|(&a, &f)| f * grid.strides()[a])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilamentPoint {
    /// Physical position in mm.
    pub position: Vec<f64>,
    pub slice: SliceSpec,
    /// Detecting cell (lower-corner indices on the slice axes).
    pub cell: (usize, usize),
    pub time: f64,
    /// Sign of det d(u, v)/d(x_p, x_q) at the crossing.
    pub chirality: i8,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilamentPointCloud {
    pub time: f64,
    pub points: Vec<FilamentPoint>,
}

impl FilamentPointCloud {
    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.position.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SliceDetection {
    pub points: Vec<FilamentPoint>,
    /// Cells skipped because a corner is a non-conducting node.
    pub skipped_cells: usize,
}

/// Intersection of the linearized level lines inside the unit cell, as cell
/// coordinates `(s, t)` in `[0, 1)^2` and the Jacobian sign.
fn cell_crossing(u: [f64; 4], v: [f64; 4]) -> Option<(f64, f64, i8)> {
    // corners ordered (0,0), (1,0), (0,1), (1,1)
    let spans_zero = |c: &[f64; 4]| {
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lo <= 0.0 && hi >= 0.0
    };
    if !spans_zero(&u) || !spans_zero(&v) {
        return None;
    }
    let plane = |c: [f64; 4]| {
        let mean = 0.25 * (c[0] + c[1] + c[2] + c[3]);
        let gx = 0.5 * ((c[1] - c[0]) + (c[3] - c[2]));
        let gy = 0.5 * ((c[2] - c[0]) + (c[3] - c[1]));
        (mean, gx, gy)
    };
    let (cu, ux, uy) = plane(u);
    let (cv, vx, vy) = plane(v);
    let det = ux * vy - uy * vx;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let ds = (-cu * vy + cv * uy) / det;
    let dt = (-cv * ux + cu * vx) / det;
    let s = 0.5 + ds;
    let t = 0.5 + dt;
    if (0.0..1.0).contains(&s) && (0.0..1.0).contains(&t) {
        Some((s, t, if det > 0.0 { 1 } else { -1 }))
    } else {
        None
    }
}

pub fn detect_in_slice(
    state: &FieldState,
    mask: &ConductionMask,
    slice: &SliceSpec,
    thresholds: Thresholds,
) -> SliceDetection {
    let grid = &state.grid;
    let (p, q) = slice.axes;
    let (np, nq) = (grid.shape()[p], grid.shape()[q]);
    let base = slice.base(grid);
    let h = grid.spacing();
    let fixed_axes = slice.fixed_axes(grid.ndim());
    let mut position = vec![0.0; grid.ndim()];
    for (&a, &f) in fixed_axes.iter().zip(&slice.fixed) {
        position[a] = grid.origin()[a] + f as f64 * h;
    }
    let mut out = SliceDetection::default();
    for i in 0..np - 1 {
        for j in 0..nq - 1 {
            let idx = [
                slice.index(grid, base, i, j),
                slice.index(grid, base, i + 1, j),
                slice.index(grid, base, i, j + 1),
                slice.index(grid, base, i + 1, j + 1),
            ];
            if !mask.is_all_active() && idx.iter().any(|&k| !mask.is_active(k)) {
                out.skipped_cells += 1;
                continue;
            }
            let u = idx.map(|k| state.u[k] - thresholds.u0);
            let v = idx.map(|k| state.v[k] - thresholds.v0);
            if let Some((s, t, chirality)) = cell_crossing(u, v) {
                position[p] = grid.origin()[p] + (i as f64 + s) * h;
                position[q] = grid.origin()[q] + (j as f64 + t) * h;
                out.points.push(FilamentPoint {
                    position: position.clone(),
                    slice: slice.clone(),
                    cell: (i, j),
                    time: state.t,
                    chirality,
                });
            }
        }
    }
    out
}

/// Every slice of every coordinate-plane family, in canonical order.
pub fn all_slices(grid: &GridSpec) -> Vec<SliceSpec> {
    let n = grid.ndim();
    let mut out = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            let others: Vec<usize> = (0..n).filter(|&k| k != p && k != q).collect();
            let count: usize = others.iter().map(|&a| grid.shape()[a]).product();
            for mut c in 0..count {
                let mut fixed = vec![0; others.len()];
                for (slot, &a) in others.iter().enumerate().rev() {
                    fixed[slot] = c % grid.shape()[a];
                    c /= grid.shape()[a];
                }
                out.push(SliceSpec {
                    axes: (p, q),
                    fixed,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct TrackReport {
    pub cloud: FilamentPointCloud,
    /// Detections before merging duplicates.
    pub raw_count: usize,
    pub skipped_cells: usize,
}

/// Detects singularities on all `C(N, 2)` plane families and merges points
/// closer than `h/2` (first in scan order wins).
pub fn track_superfilament(
    state: &FieldState,
    mask: &ConductionMask,
    thresholds: Thresholds,
) -> Result<TrackReport> {
    if state.grid.ndim() < 2 {
        return Err(Error::Contract(
            "tracking needs at least two dimensions".into(),
        ));
    }
    let slices = all_slices(&state.grid);
    let found: Vec<SliceDetection> = slices
        .par_iter()
        .map(|s| detect_in_slice(state, mask, s, thresholds))
        .collect();
    let skipped_cells = found.iter().map(|d| d.skipped_cells).sum();
    let raw: Vec<FilamentPoint> = found.into_iter().flat_map(|d| d.points).collect();
    let raw_count = raw.len();
    let points = dedup(raw, 0.5 * state.grid.spacing());
    Ok(TrackReport {
        cloud: FilamentPointCloud {
            time: state.t,
            points,
        },
        raw_count,
        skipped_cells,
    })
}

/// Greedy keep-first removal of points within `radius` of a kept point.
pub fn dedup(points: Vec<FilamentPoint>, radius: f64) -> Vec<FilamentPoint> {
    let r2 = radius * radius;
    let key = |x: &[f64]| -> Vec<i64> { x.iter().map(|c| (c / radius).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut kept: Vec<FilamentPoint> = Vec::new();
    let mut probe = Vec::new();
    for pt in points {
        let k = key(&pt.position);
        let ndim = k.len();
        let mut clash = false;
        'outer: for code in 0..3usize.pow(ndim as u32) {
            probe.clear();
            let mut c = code;
            for &ki in &k {
                probe.push(ki + (c % 3) as i64 - 1);
                c /= 3;
            }
            if let Some(list) = buckets.get(&probe) {
                for &idx in list {
                    let d2: f64 = kept[idx]
                        .position
                        .iter()
                        .zip(&pt.position)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d2 < r2 {
                        clash = true;
                        break 'outer;
                    }
                }
            }
        }
        if !clash {
            buckets.entry(k).or_default().push(kept.len());
            kept.push(pt);
        }
    }
    kept
}

/// Total-least-squares affine subspace through a point set.
#[derive(Debug, Clone)]
pub struct AffineFit {
    pub basepoint: Vec<f64>,
    /// Orthonormal basis of the fitted subspace (`dim` vectors).
    pub basis: Vec<Vec<f64>>,
    /// Orthonormal complement of the subspace.
    pub normal_basis: Vec<Vec<f64>>,
    /// Orthogonal distance of each point to the subspace.
    pub residuals: Vec<f64>,
    /// Covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
}

impl AffineFit {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Coordinates of `x - basepoint` along the basis vectors.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.basis
            .iter()
            .map(|b| {
                b.iter()
                    .zip(x)
                    .zip(&self.basepoint)
                    .map(|((bi, xi), ci)| bi * (xi - ci))
                    .sum()
            })
            .collect()
    }
}

pub const RANK_TOLERANCE: f64 = 1e-9;

pub fn fit_affine_subspace(points: &[Vec<f64>], dim: usize) -> Result<AffineFit> {
    if points.len() < dim + 1 {
        return Err(Error::InsufficientSampling {
            have: points.len(),
            need: dim + 1,
        });
    }
    let n = points[0].len();
    if dim > n || points.iter().any(|p| p.len() != n) {
        return Err(Error::Contract(format!(
            "cannot fit a {dim}-dimensional subspace to points in R^{n}"
        )));
    }
    let m = points.len() as f64;
    let mut centroid = DVector::<f64>::zeros(n);
    for p in points {
        centroid += DVector::from_column_slice(p);
    }
    centroid /= m;
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for p in points {
        let d = DVector::from_column_slice(p) - &centroid;
        cov += &d * d.transpose();
    }
    cov /= m;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let top = eigenvalues[0].max(0.0);
    let rank = eigenvalues
        .iter()
        .filter(|&&l| l > RANK_TOLERANCE * top.max(f64::MIN_POSITIVE))
        .count();
    if rank < dim {
        return Err(Error::RankDeficient {
            rank,
            requested: dim,
        });
    }
    let column =
        |k: usize| -> Vec<f64> { eig.eigenvectors.column(order[k]).iter().copied().collect() };
    let basis: Vec<Vec<f64>> = (0..dim).map(column).collect();
    let normal_basis: Vec<Vec<f64>> = (dim..n).map(column).collect();
    let residuals = points
        .iter()
        .map(|p| {
            normal_basis
                .iter()
                .map(|nb| {
                    let c: f64 = nb
                        .iter()
                        .zip(p)
                        .zip(centroid.iter())
                        .map(|((a, x), c)| a * (x - c))
                        .sum();
                    c * c
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(AffineFit {
        basepoint: centroid.iter().copied().collect(),
        basis,
        normal_basis,
        residuals,
        eigenvalues,
        rank,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingStats {
    /// Ring center in ambient coordinates.
    pub center: Vec<f64>,
    pub radius: f64,
    /// Standard deviation of the in-plane distances.
    pub spread: f64,
}

pub const MIN_RING_POINTS: usize = 8;

/// Mean in-plane radius of a loop-shaped cloud about its in-plane centroid.
pub fn ring_radius(points: &[Vec<f64>], plane: &AffineFit) -> Result<RingStats> {
    if points.len() < MIN_RING_POINTS {
        return Err(Error::InsufficientSampling {
            have: points.len(),
            need: MIN_RING_POINTS,
        });
    }
    if plane.basis.len() != 2 {
        return Err(Error::Contract("ring statistics need a 2-plane fit".into()));
    }
    let local: Vec<Vec<f64>> = points.iter().map(|p| plane.project(p)).collect();
    let m = local.len() as f64;
    let cx = local.iter().map(|c| c[0]).sum::<f64>() / m;
    let cy = local.iter().map(|c| c[1]).sum::<f64>() / m;
    let dists: Vec<f64> = local.iter().map(|c| (c[0] - cx).hypot(c[1] - cy)).collect();
    let radius = dists.iter().sum::<f64>() / m;
    let spread = (dists
        .iter()
        .map(|d| (d - radius) * (d - radius))
        .sum::<f64>()
        / m)
        .sqrt();
    let center = (0..plane.basepoint.len())
        .map(|k| plane.basepoint[k] + cx * plane.basis[0][k] + cy * plane.basis[1][k])
        .collect();
    Ok(RingStats {
        center,
        radius,
        spread,
    })
}

/// A hole in a superfilament sheet of a 4D medium, seen through one slice
/// family: each slice is a column indexed by the two fixed axes, and a column
/// without a point is part of the hole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleStats {
    /// Empty columns within the search radius.
    pub columns: usize,
    /// mm^2
    pub area: f64,
    /// Radius of the disk with the hole's area.
    pub equivalent_radius: f64,
    /// Length of the boundary between empty and filled columns (mm).
    pub perimeter: f64,
    /// Fraction of columns outside the search radius that carry a point.
    pub coverage: f64,
}

/// Hole statistics for the slices with axes `axes` of a 4D grid.
///
/// `center` and `radius` (mm) select the columns searched for the hole, in
/// the coordinates of the two fixed axes. Points from other slice families
/// are ignored.
pub fn hole_stats(
    points: &[FilamentPoint],
    grid: &GridSpec,
    axes: (usize, usize),
    center: [f64; 2],
    radius: f64,
) -> Result<HoleStats> {
    if grid.ndim() != 4 {
        return Err(Error::Contract(format!(
            "hole statistics need a 4D grid, got {}D",
            grid.ndim()
        )));
    }
    let probe = SliceSpec::new(grid, axes.0, axes.1, vec![0, 0])?;
    let fa = probe.fixed_axes(4);
    let (n0, n1) = (grid.shape()[fa[0]], grid.shape()[fa[1]]);
    let mut filled = vec![false; n0 * n1];
    for p in points.iter().filter(|p| p.slice.axes() == probe.axes()) {
        let f = p.slice.fixed();
        filled[f[0] * n1 + f[1]] = true;
    }
    let h = grid.spacing();
    let inside = |i: usize, j: usize| {
        let x = grid.origin()[fa[0]] + i as f64 * h - center[0];
        let y = grid.origin()[fa[1]] + j as f64 * h - center[1];
        x.hypot(y) <= radius
    };
    let hole = |i: usize, j: usize| inside(i, j) && !filled[i * n1 + j];
    let (mut columns, mut outside, mut covered, mut edges) = (0, 0, 0, 0);
    for i in 0..n0 {
        for j in 0..n1 {
            if !inside(i, j) {
                outside += 1;
                covered += filled[i * n1 + j] as usize;
            }
            if !hole(i, j) {
                continue;
            }
            columns += 1;
            let nb = [
                (i > 0).then(|| (i - 1, j)),
                (i + 1 < n0).then(|| (i + 1, j)),
                (j > 0).then(|| (i, j - 1)),
                (j + 1 < n1).then(|| (i, j + 1)),
            ];
            edges += nb.iter().flatten().filter(|&&(a, b)| !hole(a, b)).count();
        }
    }
    let area = columns as f64 * h * h;
    Ok(HoleStats {
        columns,
        area,
        equivalent_radius: (area / std::f64::consts::PI).sqrt(),
        perimeter: edges as f64 * h,
        coverage: if outside == 0 {
            1.0
        } else {
            covered as f64 / outside as f64
        },
    })
}

/// CSV header for an `ndim`-dimensional cloud.
pub fn csv_header(ndim: usize) -> String {
    let mut cols = vec!["t_ms".to_string(), "axis_p".into(), "axis_q".into()];
    cols.extend((0..ndim.saturating_sub(2)).map(|k| format!("fixed_{k}")));
    cols.extend((0..ndim).map(|k| format!("x{k}_mm")));
    cols.push("chirality".into());
    cols.join(",")
}

/// Writes the cloud as CSV rows; the header is written when `header` is set.
pub fn write_csv<W: Write>(
    mut w: W,
    ndim: usize,
    cloud: &FilamentPointCloud,
    header: bool,
) -> std::io::Result<()> {
    if header {
        writeln!(w, "{}", csv_header(ndim))?;
    }
    for p in &cloud.points {
        write!(w, "{},{},{}", p.time, p.slice.axes.0, p.slice.axes.1)?;
        for f in &p.slice.fixed {
            write!(w, ",{f}")?;
        }
        for x in &p.position {
            write!(w, ",{x}")?;
        }
        writeln!(w, ",{}", p.chirality)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
