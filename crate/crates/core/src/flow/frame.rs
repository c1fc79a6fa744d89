//! Normal frames transported along a breadth-first spanning tree.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::complex::{EmbeddedComplex, Topology};
use super::curvature::{curvature, tangent_spaces};
use crate::error::{Error, Result};

/// Transport gives up on a parent whose projected `N1` is shorter than this.
const COLLAPSE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct NormalFrame {
    pub n1: Vec<DVector<f64>>,
    pub n2: Vec<DVector<f64>>,
    /// Oriented orthonormal tangent basis per vertex.
    pub tangents: Vec<Vec<DVector<f64>>>,
    /// Largest rotation (rad) between a transported `N1` and the local one
    /// across edges outside the spanning tree.
    pub closure_defect: f64,
}

impl NormalFrame {
    /// Largest deviation from orthonormality of `(tangents, N1, N2)` over all
    /// vertices.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n1.len() {
            let (a, b) = (&self.n1[i], &self.n2[i]);
            worst = worst
                .max((a.norm() - 1.0).abs())
                .max((b.norm() - 1.0).abs())
                .max(a.dot(b).abs());
            for t in &self.tangents[i] {
                worst = worst.max(t.dot(a).abs()).max(t.dot(b).abs());
            }
        }
        worst
    }

    /// Coordinates of `v` in the `(N1, N2)` basis at vertex `i`.
    pub fn coordinates(&self, i: usize, v: &DVector<f64>) -> (f64, f64) {
        (v.dot(&self.n1[i]), v.dot(&self.n2[i]))
    }
}

pub fn build_parallel_frame(complex: &EmbeddedComplex, h: &[DVector<f64>]) -> Result<NormalFrame> {
    let topo = complex.topology();
    let tangents = tangent_spaces(complex, &topo, h)?;
    transport(complex, &topo, tangents)
}

/// Frame from the complex alone, computing the curvature internally.
pub fn parallel_frame(complex: &EmbeddedComplex) -> Result<NormalFrame> {
    let topo = complex.topology();
    let field = curvature(complex, &topo)?;
    let tangents = tangent_spaces(complex, &topo, &field.h)?;
    transport(complex, &topo, tangents)
}

fn project_normal(tangents: &[DVector<f64>], v: &DVector<f64>) -> DVector<f64> {
    let mut out = v.clone();
    for t in tangents {
        out -= t * t.dot(v);
    }
    out
}

/// Unit vector completing `(tangents, n1)` to a positively oriented basis.
fn complete(tangents: &[DVector<f64>], n1: &DVector<f64>) -> DVector<f64> {
    let dim = n1.len();
    let mut best: Option<DVector<f64>> = None;
    for k in 0..dim {
        let mut e = DVector::zeros(dim);
        e[k] = 1.0;
        let mut r = project_normal(tangents, &e);
        r -= n1 * n1.dot(&r);
        if best.as_ref().is_none_or(|b| r.norm() > b.norm() + 1e-12) {
            best = Some(r);
        }
    }
    let n2 = best.expect("ambient dimension is positive").normalize();
    let mut cols: Vec<DVector<f64>> = tangents.to_vec();
    cols.push(n1.clone());
    cols.push(n2.clone());
    if DMatrix::from_columns(&cols).determinant() < 0.0 {
        -n2
    } else {
        n2
    }
}

pub(crate) fn transport(
    complex: &EmbeddedComplex,
    topo: &Topology,
    tangents: Vec<Vec<DVector<f64>>>,
) -> Result<NormalFrame> {
    let n = complex.vertex_count();
    let dim = complex.ambient_dim();
    let mut n1: Vec<Option<DVector<f64>>> = vec![None; n];
    let mut n2: Vec<DVector<f64>> = vec![DVector::zeros(dim); n];
    let mut parent = vec![usize::MAX; n];
    let threshold = 1.0 / (dim as f64).sqrt();

    for seed in 0..n {
        if n1[seed].is_some() {
            continue;
        }
        let t = &tangents[seed];
        let first = (0..dim)
            .map(|k| {
                let mut e = DVector::zeros(dim);
                e[k] = 1.0;
                project_normal(t, &e)
            })
            .find(|p| p.norm() >= threshold)
            .ok_or_else(|| Error::Degenerate(format!("no normal direction at vertex {seed}")))?
            .normalize();
        n2[seed] = complete(t, &first);
        n1[seed] = Some(first);
        let mut queue = VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            for &c in &topo.neighbors[p] {
                if n1[c].is_some() {
                    continue;
                }
                // BFS parent first, then any other framed neighbor
                let candidates = std::iter::once(p).chain(
                    topo.neighbors[c]
                        .iter()
                        .copied()
                        .filter(|&q| q != p && n1[q].is_some()),
                );
                let mut found = None;
                for q in candidates {
                    let proj = project_normal(&tangents[c], n1[q].as_ref().unwrap());
                    let len = proj.norm();
                    if len > COLLAPSE {
                        found = Some((q, proj / len));
                        break;
                    }
                }
                let (q, v) = found.ok_or_else(|| {
                    Error::Degenerate(format!("frame transport collapsed at vertex {c}"))
                })?;
                // remove the rounding residue along the tangents
                let v = project_normal(&tangents[c], &v).normalize();
                n2[c] = complete(&tangents[c], &v);
                n1[c] = Some(v);
                parent[c] = q;
                queue.push_back(c);
            }
        }
    }
    let n1: Vec<DVector<f64>> = n1.into_iter().map(|v| v.unwrap()).collect();
    let mut closure_defect: f64 = 0.0;
    for [a, b] in complex.unique_edges() {
        if parent[a] == b || parent[b] == a {
            continue;
        }
        let moved = project_normal(&tangents[b], &n1[a]);
        let angle = moved.dot(&n2[b]).atan2(moved.dot(&n1[b]));
        closure_defect = closure_defect.max(angle.abs());
    }
    Ok(NormalFrame {
        n1,
        n2,
        tangents,
        closure_defect,
    })
}
