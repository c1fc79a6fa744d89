//! Explicit time stepping of `dX/dt = g1 H + g2 eps H`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::complex::{ComplexKind, EmbeddedComplex};
use super::curvature::{
    curvature, tangent_spaces, triangle_geometry, CurvatureField, NEGLIGIBLE_CURVATURE,
};
use super::frame::transport;
use crate::error::{Error, Result};

/// Scalar (`gamma1`) and pseudoscalar (`gamma2`) filament tension, mm^2/ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensionParams {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl TensionParams {
    pub fn new(gamma1: f64, gamma2: f64) -> Self {
        TensionParams { gamma1, gamma2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma1.is_finite() || !self.gamma2.is_finite() {
            return Err(Error::Config("filament tensions must be finite".into()));
        }
        Ok(())
    }
}

/// Explicit-scheme safety factor of the time step bound.
pub const STABILITY_FACTOR: f64 = 0.25;
/// Collapse threshold relative to the initial mean edge length.
pub const COLLAPSE_RATIO: f64 = 1e-3;
/// Hitting the stability bound counts as a collapse once the complex has
/// shrunk below this fraction of its initial extent.
pub const COLLAPSE_EXTENT: f64 = 0.1;

/// Largest stable time step for a complex whose shortest edge is `min_edge`.
pub fn stability_bound(min_edge: f64, tension: &TensionParams) -> f64 {
    let g = tension.gamma1.hypot(tension.gamma2);
    if g == 0.0 {
        f64::INFINITY
    } else {
        STABILITY_FACTOR * min_edge * min_edge / g
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Remesh every this many steps; `None` disables remeshing.
    pub remesh_every: Option<usize>,
    /// Keep a copy of the complex every this many steps (plus the last).
    pub sample_every: usize,
    /// Sense of the normal-plane rotation: +1 applies
    /// `(h1, h2) -> (h2, -h1)` in a positively oriented `(N1, N2)` frame.
    pub rotation_sign: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            remesh_every: Some(10),
            sample_every: 100,
            rotation_sign: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    /// An element shrank below the collapse threshold, or the complex shrank
    /// below [`COLLAPSE_EXTENT`] of its initial size and outran the time step.
    Collapsed,
    /// The complex refined past the stability bound of the time step.
    StabilityLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Time at the start of the step.
    pub t: f64,
    pub area_start: f64,
    pub h2_start: f64,
    /// Area after the update, before any remeshing.
    pub area_end: f64,
    pub h2_end: f64,
    pub max_h: f64,
    /// Centroid after the update.
    pub centroid: Vec<f64>,
    /// Largest `|H - h1 N1 - h2 N2| / |H|` over moving vertices.
    pub normal_residual: f64,
    pub frame_error: f64,
    pub remeshed: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub tension: TensionParams,
    /// `(t, complex)` samples, starting with the initial complex.
    pub samples: Vec<(f64, EmbeddedComplex)>,
    pub records: Vec<StepRecord>,
    pub stop: StopReason,
    pub collapse_time: Option<f64>,
    pub final_complex: EmbeddedComplex,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t + self.dt)
    }
}

fn min_edge(c: &EmbeddedComplex) -> f64 {
    c.edge_lengths().into_iter().fold(f64::INFINITY, f64::min)
}

/// Largest distance of a vertex from the centroid.
fn extent(c: &EmbeddedComplex) -> f64 {
    let m = c.centroid();
    c.positions()
        .iter()
        .map(|p| (p - &m).norm())
        .fold(0.0, f64::max)
}

fn mean_edge(c: &EmbeddedComplex) -> f64 {
    let l = c.edge_lengths();
    l.iter().sum::<f64>() / l.len() as f64
}

pub fn evolve(
    complex: &EmbeddedComplex,
    tension: TensionParams,
    dt: f64,
    steps: usize,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    tension.validate()?;
    complex.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!(
            "flow time step must be positive, got {dt}"
        )));
    }
    if options.sample_every == 0 {
        return Err(Error::Config("sample_every must be at least 1".into()));
    }
    let bound = stability_bound(min_edge(complex), &tension);
    if dt > bound {
        return Err(Error::Config(format!(
            "flow time step {dt} exceeds the stability bound {bound:.6e}"
        )));
    }
    let topo = complex.topology();
    if let Some(i) = (0..complex.vertex_count()).find(|&i| topo.boundary[i] && !complex.is_fixed(i))
    {
        return Err(Error::Contract(format!(
            "mesh boundary vertex {i} must be anchored"
        )));
    }

    let l0 = mean_edge(complex);
    let extent0 = extent(complex);
    let target_edge = l0;
    let mut c = complex.clone();
    let mut topo = topo;
    let mut field = curvature(&c, &topo)?;
    let mut samples = vec![(0.0, c.clone())];
    let mut records = Vec::with_capacity(steps);
    let mut stop = StopReason::Completed;
    let mut collapse_time = None;

    for k in 0..steps {
        let t = k as f64 * dt;
        let shortest = min_edge(&c);
        if shortest < COLLAPSE_RATIO * l0 {
            stop = StopReason::Collapsed;
            collapse_time = Some(t);
            break;
        }
        if dt > stability_bound(shortest, &tension) {
            if extent(&c) < COLLAPSE_EXTENT * extent0 {
                stop = StopReason::Collapsed;
                collapse_time = Some(t);
            } else {
                stop = StopReason::StabilityLimit;
            }
            break;
        }
        let tangents = tangent_spaces(&c, &topo, &field.h)?;
        let frame = transport(&c, &topo, tangents)?;
        let frame_error = frame.orthonormality_error();
        let area_start = area(&c);
        let h2_start = field.integral_h2();
        let max_h = field.max_norm();
        let mut normal_residual: f64 = 0.0;
        let mut next = c.vertices.clone();
        for i in 0..c.vertex_count() {
            if c.is_fixed(i) {
                continue;
            }
            let h = &field.h[i];
            let (h1, h2) = frame.coordinates(i, h);
            let in_plane = &frame.n1[i] * h1 + &frame.n2[i] * h2;
            let hn = h.norm();
            if hn * shortest > NEGLIGIBLE_CURVATURE {
                normal_residual = normal_residual.max((h - &in_plane).norm() / hn);
            }
            let rotated = &frame.n1[i] * h2 - &frame.n2[i] * h1;
            next[i] += (in_plane * tension.gamma1
                + rotated * (tension.gamma2 * options.rotation_sign))
                * dt;
        }
        if let Some(i) = next.iter().position(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Numerical(format!(
                "flow produced a non-finite position at vertex {i}, step {k}"
            )));
        }
        let fixed = c.fixed().to_vec();
        c.replace_vertices(next, fixed);
        let area_end = area(&c);
        let collapsed_now = match curvature(&c, &topo) {
            Ok(f) => {
                field = f;
                false
            }
            Err(Error::Degenerate(_)) => true,
            Err(e) => return Err(e),
        };
        let h2_end = if collapsed_now {
            f64::NAN
        } else {
            field.integral_h2()
        };
        let mut remeshed = false;
        if !collapsed_now {
            if let Some(every) = options.remesh_every {
                if (k + 1) % every == 0 {
                    remeshed = remesh(&mut c, target_edge)?;
                    if remeshed {
                        topo = c.topology();
                        field = curvature(&c, &topo)?;
                    }
                }
            }
        }
        records.push(StepRecord {
            t,
            area_start,
            h2_start,
            area_end,
            h2_end,
            max_h,
            centroid: c.centroid().iter().copied().collect(),
            normal_residual,
            frame_error,
            remeshed,
        });
        if collapsed_now {
            stop = StopReason::Collapsed;
            collapse_time = Some(t + dt);
            break;
        }
        if (k + 1) % options.sample_every == 0 {
            samples.push((t + dt, c.clone()));
        }
    }
    let t_last = records.last().map_or(0.0, |r| r.t + dt);
    if samples.last().map(|s| s.0) != Some(t_last) {
        samples.push((t_last, c.clone()));
    }
    Ok(Trajectory {
        dt,
        tension,
        samples,
        records,
        stop,
        collapse_time,
        final_complex: c,
    })
}

/// Total length (polyline) or total triangle area (mesh).
pub fn area(c: &EmbeddedComplex) -> f64 {
    let x = c.positions();
    match c.kind() {
        ComplexKind::PolylineLoop => c.edges().iter().map(|&[a, b]| (&x[a] - &x[b]).norm()).sum(),
        ComplexKind::TriangleMesh => c
            .triangles()
            .iter()
            .map(|t| triangle_geometry(&x[t[0]], &x[t[1]], &x[t[2]]).1)
            .sum(),
    }
}

/// Returns whether the complex changed.
fn remesh(c: &mut EmbeddedComplex, target_edge: f64) -> Result<bool> {
    match c.kind() {
        ComplexKind::PolylineLoop => resample_loops(c, target_edge),
        ComplexKind::TriangleMesh => {
            flip_edges(c);
            smooth_tangentially(c)?;
            Ok(true)
        }
    }
}

/// Resamples every loop to uniform arclength on its Catmull-Rom
/// interpolant. The vertex count only decreases, keeping the mean edge near
/// `target_edge`. Loops with anchored vertices are left alone.
fn resample_loops(c: &mut EmbeddedComplex, target_edge: f64) -> Result<bool> {
    if c.fixed().iter().any(|&f| f) {
        return Ok(false);
    }
    let topo = c.topology();
    let n = c.vertex_count();
    let mut visited = vec![false; n];
    let mut vertices = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut ring = vec![start];
        visited[start] = true;
        let mut v = topo.loop_links[start].1;
        while v != start {
            visited[v] = true;
            ring.push(v);
            v = topo.loop_links[v].1;
        }
        let p: Vec<&DVector<f64>> = ring.iter().map(|&i| &c.positions()[i]).collect();
        let m = p.len();
        let seg: Vec<f64> = (0..m).map(|k| (p[(k + 1) % m] - p[k]).norm()).collect();
        let total: f64 = seg.iter().sum();
        let count = ((total / target_edge).round() as usize).clamp(3, m);
        let base = vertices.len();
        let mut k = 0;
        let mut acc = 0.0;
        for j in 0..count {
            let s = total * j as f64 / count as f64;
            while k + 1 < m && acc + seg[k] <= s {
                acc += seg[k];
                k += 1;
            }
            let f = ((s - acc) / seg[k]).clamp(0.0, 1.0);
            let (p0, p1, p2, p3) = (p[(k + m - 1) % m], p[k], p[(k + 1) % m], p[(k + 2) % m]);
            let (f2, f3) = (f * f, f * f * f);
            let q = (p1 * 2.0
                + (p2 - p0) * f
                + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * f2
                + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * f3)
                * 0.5;
            vertices.push(q);
            edges.push([base + j, base + (j + 1) % count]);
        }
    }
    let count = vertices.len();
    c.replace_vertices(vertices, vec![false; count]);
    c.set_connectivity(edges, Vec::new());
    Ok(true)
}

/// Flips interior edges whose opposite angles sum past pi. Returns the
/// number of flips.
fn flip_edges(c: &mut EmbeddedComplex) -> usize {
    use std::collections::HashMap;
    let mut tris = c.triangles().to_vec();
    let x = c.positions().to_vec();
    let mut flips = 0;
    for _sweep in 0..3 {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, t) in tris.iter().enumerate() {
            for e in 0..3 {
                owner.insert((t[e], t[(e + 1) % 3]), k);
            }
        }
        let mut edge_set: std::collections::HashSet<(usize, usize)> =
            owner.keys().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        let mut touched = vec![false; tris.len()];
        let mut changed = false;
        let mut keys: Vec<(usize, usize)> = owner.keys().copied().filter(|(a, b)| a < b).collect();
        keys.sort_unstable();
        for (i, j) in keys {
            let (Some(&t1), Some(&t2)) = (owner.get(&(i, j)), owner.get(&(j, i))) else {
                continue;
            };
            if touched[t1] || touched[t2] {
                continue;
            }
            let opposite = |t: [usize; 3]| *t.iter().find(|&&v| v != i && v != j).unwrap();
            let (k, l) = (opposite(tris[t1]), opposite(tris[t2]));
            if c.is_fixed(i) && c.is_fixed(j) && c.is_fixed(k) && c.is_fixed(l) {
                continue;
            }
            if edge_set.contains(&(k.min(l), k.max(l))) {
                continue;
            }
            let angle = |o: usize| {
                let u = &x[i] - &x[o];
                let v = &x[j] - &x[o];
                (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos()
            };
            if angle(k) + angle(l) <= std::f64::consts::PI + 1e-9 {
                continue;
            }
            // t1 = (i, j, k) and t2 = (j, i, l) up to rotation
            let new1 = [k, i, l];
            let new2 = [l, j, k];
            let ok = [new1, new2]
                .iter()
                .all(|t| triangle_geometry(&x[t[0]], &x[t[1]], &x[t[2]]).1 > 1e-12);
            if !ok {
                continue;
            }
            tris[t1] = new1;
            tris[t2] = new2;
            touched[t1] = true;
            touched[t2] = true;
            edge_set.remove(&(i, j));
            edge_set.insert((k.min(l), k.max(l)));
            flips += 1;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    c.set_connectivity(Vec::new(), tris);
    flips
}

/// Moves free interior vertices half way to their neighbor average, along
/// the tangent plane only.
fn smooth_tangentially(c: &mut EmbeddedComplex) -> Result<()> {
    let topo = c.topology();
    let field: CurvatureField = curvature(c, &topo)?;
    let tangents = tangent_spaces(c, &topo, &field.h)?;
    let x = c.positions().to_vec();
    let mut next = x.clone();
    for i in 0..x.len() {
        if c.is_fixed(i) || topo.boundary[i] {
            continue;
        }
        let nb = &topo.neighbors[i];
        let mut avg = DVector::zeros(c.ambient_dim());
        for &j in nb {
            avg += &x[j];
        }
        let d = avg / nb.len() as f64 - &x[i];
        let mut step = DVector::zeros(c.ambient_dim());
        for t in &tangents[i] {
            step += t * t.dot(&d);
        }
        next[i] += step * 0.5;
    }
    let fixed = c.fixed().to_vec();
    c.replace_vertices(next, fixed);
    Ok(())
}
