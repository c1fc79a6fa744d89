//! Forward-Euler update kernels.
//!
//! Both backends evaluate the coupling sum in the same neighbor order (axis by
//! axis, lower neighbor first), so they agree bit for bit on lattice graphs.

use rayon::prelude::*;

use crate::grid::{ConductionMask, GridSpec, LatticeGraph};
use crate::model::{reaction, FhnParams, StatePair};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Coeffs {
    pub params: FhnParams,
    pub reaction: bool,
    pub dt: f64,
    /// Edge weight 1/h^2.
    pub weight: f64,
}

impl Coeffs {
    #[inline(always)]
    fn update(&self, u: f64, v: f64, lap_u: f64, lap_v: f64) -> (f64, f64) {
        let r = if self.reaction {
            reaction(&self.params, StatePair::new(u, v))
        } else {
            StatePair::default()
        };
        let un = u + self.dt * (self.params.d_u * (lap_u * self.weight) + r.u);
        let vn = v + self.dt * (self.params.d_v * (lap_v * self.weight) + r.v);
        (un, vn)
    }
}

pub(crate) enum Coupling<'a> {
    Stencil {
        grid: &'a GridSpec,
        mask: &'a ConductionMask,
    },
    Graph {
        graph: &'a LatticeGraph,
        mask: &'a ConductionMask,
    },
}

/// Contiguous slabs along the first axis, one per worker.
pub(crate) fn slab_bounds(grid: &GridSpec, workers: usize) -> Vec<usize> {
    let n0 = grid.shape()[0];
    let stride0 = grid.strides()[0];
    let w = workers.max(1).min(n0);
    let mut bounds = Vec::with_capacity(w + 1);
    for k in 0..=w {
        bounds.push((k * n0 / w) * stride0);
    }
    bounds
}

/// Computes the new buffers from the old ones. Returns the smallest node index
/// that produced a non-finite value, if any.
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance(
    coupling: &Coupling<'_>,
    coeffs: &Coeffs,
    bounds: &[usize],
    pool: Option<&rayon::ThreadPool>,
    u: &[f64],
    v: &[f64],
    u_next: &mut [f64],
    v_next: &mut [f64],
) -> Option<usize> {
    let mut pieces = Vec::with_capacity(bounds.len() - 1);
    let (mut ru, mut rv) = (u_next, v_next);
    for w in bounds.windows(2) {
        let len = w[1] - w[0];
        let (a, b) = ru.split_at_mut(len);
        let (c, d) = rv.split_at_mut(len);
        pieces.push((w[0], a, c));
        ru = b;
        rv = d;
    }
    let work = |(start, un, vn): (usize, &mut [f64], &mut [f64])| match coupling {
        Coupling::Stencil { grid, mask } => stencil_slab(grid, mask, coeffs, start, u, v, un, vn),
        Coupling::Graph { graph, mask } => graph_slab(graph, mask, coeffs, start, u, v, un, vn),
    };
    match pool {
        Some(pool) if pieces.len() > 1 => {
            pool.install(|| pieces.into_par_iter().filter_map(work).min())
        }
        _ => pieces.into_iter().filter_map(work).min(),
    }
}

#[allow(clippy::too_many_arguments)]
fn stencil_slab(
    grid: &GridSpec,
    mask: &ConductionMask,
    c: &Coeffs,
    start: usize,
    u: &[f64],
    v: &[f64],
    un: &mut [f64],
    vn: &mut [f64],
) -> Option<usize> {
    let ndim = grid.ndim();
    let shape = grid.shape();
    let strides = grid.strides();
    let n_last = shape[ndim - 1];
    let end = start + un.len();
    let masked = !mask.is_all_active();
    let active = mask.active();
    let diffuse_v = c.params.d_v != 0.0;
    let mut bad: Option<usize> = None;

    let mut coords = vec![0usize; ndim];
    let mut outer: Vec<usize> = Vec::with_capacity(2 * ndim);
    let mut outer_sign: Vec<bool> = Vec::with_capacity(2 * ndim);

    let mut i = start;
    while i < end {
        let row_start = i - i % n_last;
        let seg_end = (row_start + n_last).min(end);
        grid.unravel_into(row_start, &mut coords);
        outer.clear();
        outer_sign.clear();
        for k in 0..ndim - 1 {
            if coords[k] > 0 {
                outer.push(strides[k]);
                outer_sign.push(false);
            }
            if coords[k] + 1 < shape[k] {
                outer.push(strides[k]);
                outer_sign.push(true);
            }
        }
        for node in i..seg_end {
            let local = node - start;
            let ui = u[node];
            let vi = v[node];
            if masked && !active[node] {
                un[local] = ui;
                vn[local] = vi;
                continue;
            }
            let mut lap_u = 0.0;
            let mut lap_v = 0.0;
            let mut visit = |j: usize| {
                if !masked || active[j] {
                    lap_u += u[j] - ui;
                    if diffuse_v {
                        lap_v += v[j] - vi;
                    }
                }
            };
            for (&s, &up) in outer.iter().zip(&outer_sign) {
                visit(if up { node + s } else { node - s });
            }
            let cl = node - row_start;
            if cl > 0 {
                visit(node - 1);
            }
            if cl + 1 < n_last {
                visit(node + 1);
            }
            let (a, b) = c.update(ui, vi, lap_u, lap_v);
            if !(a.is_finite() && b.is_finite()) && bad.is_none() {
                bad = Some(node);
            }
            un[local] = a;
            vn[local] = b;
        }
        i = seg_end;
    }
    bad
}

#[allow(clippy::too_many_arguments)]
fn graph_slab(
    graph: &LatticeGraph,
    mask: &ConductionMask,
    c: &Coeffs,
    start: usize,
    u: &[f64],
    v: &[f64],
    un: &mut [f64],
    vn: &mut [f64],
) -> Option<usize> {
    let diffuse_v = c.params.d_v != 0.0;
    let mut bad = None;
    for (local, (a_out, b_out)) in un.iter_mut().zip(vn.iter_mut()).enumerate() {
        let node = start + local;
        let ui = u[node];
        let vi = v[node];
        if !mask.is_active(node) {
            *a_out = ui;
            *b_out = vi;
            continue;
        }
        let mut lap_u = 0.0;
        let mut lap_v = 0.0;
        for &j in graph.row(node) {
            lap_u += u[j] - ui;
            if diffuse_v {
                lap_v += v[j] - vi;
            }
        }
        let (a, b) = c.update(ui, vi, lap_u, lap_v);
        if !(a.is_finite() && b.is_finite()) && bad.is_none() {
            bad = Some(node);
        }
        *a_out = a;
        *b_out = b;
    }
    bad
}
