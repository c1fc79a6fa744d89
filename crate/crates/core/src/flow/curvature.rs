//! Discrete mean-curvature vectors and tangent spaces.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::complex::{ComplexKind, EmbeddedComplex, Topology};
use crate::error::{Error, Result};

/// Smallest admissible triangle area (mm^2) and edge length (mm).
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;
pub const MIN_EDGE_LENGTH: f64 = 1e-12;
/// `|H|` times the local edge length below which `H` is treated as zero.
pub const NEGLIGIBLE_CURVATURE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CurvatureField {
    /// Mean-curvature vector per vertex (mm^-1).
    pub h: Vec<DVector<f64>>,
    /// Dual length (polyline) or mixed Voronoi area (mesh) per vertex.
    pub dual: Vec<f64>,
}

impl CurvatureField {
    /// Discrete integral of |H|^2 over the complex.
    pub fn integral_h2(&self) -> f64 {
        self.h
            .iter()
            .zip(&self.dual)
            .map(|(h, a)| h.norm_squared() * a)
            .sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.h.iter().map(|h| h.norm()).fold(0.0, f64::max)
    }
}

pub fn mean_curvature(complex: &EmbeddedComplex) -> Result<Vec<DVector<f64>>> {
    Ok(curvature(complex, &complex.topology())?.h)
}

pub(crate) fn curvature(c: &EmbeddedComplex, topo: &Topology) -> Result<CurvatureField> {
    match c.kind() {
        ComplexKind::PolylineLoop => polyline_curvature(c, topo),
        ComplexKind::TriangleMesh => mesh_curvature(c),
    }
}

fn polyline_curvature(c: &EmbeddedComplex, topo: &Topology) -> Result<CurvatureField> {
    let x = c.positions();
    let mut h = Vec::with_capacity(x.len());
    let mut dual = Vec::with_capacity(x.len());
    for (i, &(p, n)) in topo.loop_links.iter().enumerate() {
        let e1 = &x[i] - &x[p];
        let e2 = &x[n] - &x[i];
        let (l1, l2) = (e1.norm(), e2.norm());
        if l1 < MIN_EDGE_LENGTH || l2 < MIN_EDGE_LENGTH {
            let (a, b) = if l1 < MIN_EDGE_LENGTH { (p, i) } else { (i, n) };
            return Err(Error::Degenerate(format!(
                "edge ({a}, {b}) has zero length"
            )));
        }
        // circumscribed-circle estimator: exact 1/R on regular polygons
        h.push((e2 / l2 - e1 / l1) * (2.0 / (l1 + l2)));
        dual.push(0.5 * (l1 + l2));
    }
    Ok(CurvatureField { h, dual })
}

/// Cotangents of the three corner angles and the area of triangle `abc`.
pub(crate) fn triangle_geometry(
    a: &DVector<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
) -> ([f64; 3], f64) {
    let corner = |o: &DVector<f64>, p: &DVector<f64>, q: &DVector<f64>| {
        let u = p - o;
        let v = q - o;
        let dot = u.dot(&v);
        let cross = (u.norm_squared() * v.norm_squared() - dot * dot)
            .max(0.0)
            .sqrt();
        (dot, cross)
    };
    let (da, ca) = corner(a, b, c);
    let (db, cb) = corner(b, c, a);
    let (dc, cc) = corner(c, a, b);
    let area = 0.5 * ca.max(cb).max(cc);
    ([da / ca, db / cb, dc / cc], area)
}

fn mesh_curvature(c: &EmbeddedComplex) -> Result<CurvatureField> {
    let x = c.positions();
    let n = x.len();
    let mut sum = vec![DVector::zeros(c.ambient_dim()); n];
    let mut dual = vec![0.0; n];
    for (k, t) in c.triangles().iter().enumerate() {
        let (cot, area) = triangle_geometry(&x[t[0]], &x[t[1]], &x[t[2]]);
        if !(area >= MIN_TRIANGLE_AREA) {
            return Err(Error::Degenerate(format!(
                "triangle {k} {t:?} has area {area:e}"
            )));
        }
        let obtuse = cot.iter().position(|&ct| ct < 0.0);
        for corner in 0..3 {
            let i = t[corner];
            let j = t[(corner + 1) % 3];
            let l = t[(corner + 2) % 3];
            // edge (i, j) is opposite corner l; edge (i, l) is opposite corner j
            let cot_l = cot[(corner + 2) % 3];
            let cot_j = cot[(corner + 1) % 3];
            sum[i] += (&x[j] - &x[i]) * cot_l + (&x[l] - &x[i]) * cot_j;
            dual[i] += match obtuse {
                None => {
                    ((&x[i] - &x[j]).norm_squared() * cot_l
                        + (&x[i] - &x[l]).norm_squared() * cot_j)
                        / 8.0
                }
                Some(o) if o == corner => area / 2.0,
                Some(_) => area / 4.0,
            };
        }
    }
    let h = sum
        .into_iter()
        .zip(&dual)
        .map(|(s, &a)| s / (2.0 * a))
        .collect();
    Ok(CurvatureField { h, dual })
}

/// Oriented orthonormal tangent basis per vertex.
///
/// Polyline tangents bisect the unit edge directions, following the loop
/// orientation. Mesh tangent planes are the dominant 2-plane of the
/// area-weighted incident triangle planes, within the complement of `H` at
/// interior vertices whose `H` is above rounding level, oriented by the
/// summed triangle bivectors.
pub(crate) fn tangent_spaces(
    c: &EmbeddedComplex,
    topo: &Topology,
    h: &[DVector<f64>],
) -> Result<Vec<Vec<DVector<f64>>>> {
    let x = c.positions();
    match c.kind() {
        ComplexKind::PolylineLoop => topo
            .loop_links
            .iter()
            .enumerate()
            .map(|(i, &(p, n))| {
                let t = (&x[i] - &x[p]).normalize() + (&x[n] - &x[i]).normalize();
                let norm = t.norm();
                if norm < 1e-9 {
                    return Err(Error::Degenerate(format!(
                        "polyline folds back on itself at vertex {i}"
                    )));
                }
                Ok(vec![t / norm])
            })
            .collect(),
        ComplexKind::TriangleMesh => {
            let dim = c.ambient_dim();
            let planes: Vec<(DVector<f64>, DVector<f64>, f64)> = c
                .triangles()
                .iter()
                .map(|t| {
                    let e1 = &x[t[1]] - &x[t[0]];
                    let e2 = &x[t[2]] - &x[t[0]];
                    let a = e1.normalize();
                    let b = &e2 - &a * a.dot(&e2);
                    let area = 0.5 * e1.norm() * b.norm();
                    (a, b.normalize(), area)
                })
                .collect();
            (0..x.len())
                .map(|i| {
                    let scale = topo.neighbors[i]
                        .iter()
                        .map(|&j| (&x[j] - &x[i]).norm())
                        .sum::<f64>()
                        / topo.neighbors[i].len() as f64;
                    let mut m = DMatrix::<f64>::zeros(dim, dim);
                    for &k in &topo.incident[i] {
                        let (a, b, w) = &planes[k];
                        m += (a * a.transpose() + b * b.transpose()) * *w;
                    }
                    let mut basis = top_two(&m);
                    let hn = h[i].norm();
                    // boundary curvature carries the boundary term; rounding-level
                    // curvature carries no direction
                    if !topo.boundary[i] && hn * scale > NEGLIGIBLE_CURVATURE {
                        let hh = &h[i] / hn;
                        let q = DMatrix::<f64>::identity(dim, dim) - &hh * hh.transpose();
                        basis = top_two(&(&q * &m * &q));
                        // drop the rounding residue along H
                        for t in basis.iter_mut() {
                            *t -= &hh * t.dot(&hh);
                        }
                        let b0 = basis[0].normalize();
                        let b1 = &basis[1] - &b0 * b0.dot(&basis[1]);
                        basis = vec![b0, b1.normalize()];
                    }
                    // orient by the summed bivector of the incident triangles
                    let mut orient = 0.0;
                    for &k in &topo.incident[i] {
                        let t = c.triangles()[k];
                        let e1 = &x[t[1]] - &x[t[0]];
                        let e2 = &x[t[2]] - &x[t[0]];
                        orient += e1.dot(&basis[0]) * e2.dot(&basis[1])
                            - e1.dot(&basis[1]) * e2.dot(&basis[0]);
                    }
                    if orient < 0.0 {
                        basis[1] = -basis[1].clone();
                    }
                    Ok(basis)
                })
                .collect()
        }
    }
}

/// Eigenvectors of the two largest eigenvalues of a symmetric matrix.
fn top_two(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order[..2]
        .iter()
        .map(|&k| eig.eigenvectors.column(k).into_owned())
        .collect()
}
