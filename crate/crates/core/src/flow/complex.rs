//! Codimension-two complexes: closed polylines in R^3 and triangle meshes in
//! R^4, plus the XMESH text format.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexKind {
    /// One or more closed loops; edges are oriented `prev -> next`.
    PolylineLoop,
    TriangleMesh,
}

impl ComplexKind {
    pub fn intrinsic_dim(self) -> usize {
        match self {
            ComplexKind::PolylineLoop => 1,
            ComplexKind::TriangleMesh => 2,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            ComplexKind::PolylineLoop => "polyline",
            ComplexKind::TriangleMesh => "trimesh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedComplex {
    ambient_dim: usize,
    kind: ComplexKind,
    pub(crate) vertices: Vec<DVector<f64>>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    fixed: Vec<bool>,
}

/// Connectivity derived from a complex.
#[derive(Debug, Clone)]
pub(crate) struct Topology {
    /// Sorted neighbor lists.
    pub neighbors: Vec<Vec<usize>>,
    /// Polyline: `(prev, next)` per vertex.
    pub loop_links: Vec<(usize, usize)>,
    /// Mesh: incident triangle indices per vertex.
    pub incident: Vec<Vec<usize>>,
    /// Mesh: vertices on an edge with a single triangle.
    pub boundary: Vec<bool>,
}

impl EmbeddedComplex {
    pub fn polyline(
        ambient_dim: usize,
        vertices: Vec<Vec<f64>>,
        edges: Vec<[usize; 2]>,
        fixed: Vec<bool>,
    ) -> Result<Self> {
        Self::assemble(
            ambient_dim,
            ComplexKind::PolylineLoop,
            vertices,
            edges,
            Vec::new(),
            fixed,
        )
    }

    pub fn mesh(
        ambient_dim: usize,
        vertices: Vec<Vec<f64>>,
        triangles: Vec<[usize; 3]>,
        fixed: Vec<bool>,
    ) -> Result<Self> {
        Self::assemble(
            ambient_dim,
            ComplexKind::TriangleMesh,
            vertices,
            Vec::new(),
            triangles,
            fixed,
        )
    }

    fn assemble(
        ambient_dim: usize,
        kind: ComplexKind,
        vertices: Vec<Vec<f64>>,
        edges: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
        fixed: Vec<bool>,
    ) -> Result<Self> {
        if vertices.iter().any(|v| v.len() != ambient_dim) {
            return Err(Error::Contract(format!(
                "every vertex needs {ambient_dim} coordinates"
            )));
        }
        let c = EmbeddedComplex {
            ambient_dim,
            kind,
            vertices: vertices.into_iter().map(DVector::from_vec).collect(),
            edges,
            triangles,
            fixed,
        };
        c.validate()?;
        Ok(c)
    }

    /// Regular `n`-gon of circumradius `radius` in the plane of axes
    /// `(a, b)`, counterclockwise in that plane.
    pub fn circle(
        ambient_dim: usize,
        n: usize,
        radius: f64,
        center: &[f64],
        axes: (usize, usize),
    ) -> Result<Self> {
        if n < 3
            || center.len() != ambient_dim
            || axes.0 == axes.1
            || axes.0.max(axes.1) >= ambient_dim
        {
            return Err(Error::Contract("invalid circle request".into()));
        }
        let vertices = (0..n)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / n as f64;
                let mut p = center.to_vec();
                p[axes.0] += radius * th.cos();
                p[axes.1] += radius * th.sin();
                p
            })
            .collect();
        let edges = (0..n).map(|k| [k, (k + 1) % n]).collect();
        Self::polyline(ambient_dim, vertices, edges, vec![false; n])
    }

    /// Icosphere of radius `radius` subdivided `level` times, lying in the
    /// 3-plane of the first three axes of R^`ambient_dim`, outward oriented.
    pub fn icosphere(
        ambient_dim: usize,
        level: usize,
        radius: f64,
        center: &[f64],
    ) -> Result<Self> {
        if ambient_dim < 3 || center.len() != ambient_dim {
            return Err(Error::Contract("invalid icosphere request".into()));
        }
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let mut pts: Vec<[f64; 3]> = vec![
            [-1.0, g, 0.0],
            [1.0, g, 0.0],
            [-1.0, -g, 0.0],
            [1.0, -g, 0.0],
            [0.0, -1.0, g],
            [0.0, 1.0, g],
            [0.0, -1.0, -g],
            [0.0, 1.0, -g],
            [g, 0.0, -1.0],
            [g, 0.0, 1.0],
            [-g, 0.0, -1.0],
            [-g, 0.0, 1.0],
        ];
        let normalize = |p: [f64; 3]| {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            [p[0] / n, p[1] / n, p[2] / n]
        };
        pts.iter_mut().for_each(|p| *p = normalize(*p));
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(faces.len() * 4);
            let mut midpoint = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| {
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let (p, q) = (pts[a], pts[b]);
                    pts.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    pts.len() - 1
                })
            };
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut pts);
                let bc = midpoint(b, c, &mut pts);
                let ca = midpoint(c, a, &mut pts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let vertices = pts
            .iter()
            .map(|p| {
                let mut v = center.to_vec();
                for k in 0..3 {
                    v[k] += radius * p[k];
                }
                v
            })
            .collect();
        let n = pts.len();
        Self::mesh(ambient_dim, vertices, faces, vec![false; n])
    }

    /// Triangulated parametric patch over `[0,1]^2` with `nu x nv` vertices;
    /// boundary vertices are fixed.
    pub fn patch(
        ambient_dim: usize,
        nu: usize,
        nv: usize,
        map: impl Fn(f64, f64) -> Vec<f64>,
    ) -> Result<Self> {
        if nu < 2 || nv < 2 {
            return Err(Error::Contract("patch needs at least 2x2 vertices".into()));
        }
        let mut vertices = Vec::with_capacity(nu * nv);
        let mut fixed = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                vertices.push(map(i as f64 / (nu - 1) as f64, j as f64 / (nv - 1) as f64));
                fixed.push(i == 0 || j == 0 || i == nu - 1 || j == nv - 1);
            }
        }
        let id = |i: usize, j: usize| i * nv + j;
        let mut triangles = Vec::new();
        for i in 0..nu - 1 {
            for j in 0..nv - 1 {
                // alternate diagonals to avoid a directional bias
                if (i + j) % 2 == 0 {
                    triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                } else {
                    triangles.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
                    triangles.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
        }
        Self::mesh(ambient_dim, vertices, triangles, fixed)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn kind(&self) -> ComplexKind {
        self.kind
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        self.vertices[i].as_slice()
    }

    pub fn positions(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed[i]
    }

    pub fn centroid(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.ambient_dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    /// Applies `f` to every vertex position.
    pub fn map_vertices(&self, f: impl Fn(&DVector<f64>) -> DVector<f64>) -> Self {
        let mut out = self.clone();
        out.vertices = self.vertices.iter().map(f).collect();
        out
    }

    /// Lengths of all edges (mesh edges are counted once).
    pub fn edge_lengths(&self) -> Vec<f64> {
        self.unique_edges()
            .into_iter()
            .map(|[a, b]| (&self.vertices[a] - &self.vertices[b]).norm())
            .collect()
    }

    pub(crate) fn unique_edges(&self) -> Vec<[usize; 2]> {
        match self.kind {
            ComplexKind::PolylineLoop => self.edges.clone(),
            ComplexKind::TriangleMesh => {
                let set: std::collections::BTreeSet<[usize; 2]> = self
                    .triangles
                    .iter()
                    .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
                    .map(|[a, b]| [a.min(b), a.max(b)])
                    .collect();
                set.into_iter().collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        let need = self.ambient_dim.checked_sub(self.kind.intrinsic_dim());
        if need != Some(2) {
            return Err(Error::Contract(format!(
                "a {} needs codimension two, got ambient dimension {}",
                self.kind.keyword(),
                self.ambient_dim
            )));
        }
        if self.fixed.len() != n {
            return Err(Error::Contract(format!(
                "{} fixed flags for {n} vertices",
                self.fixed.len()
            )));
        }
        if let Some(i) = self
            .vertices
            .iter()
            .position(|v| v.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Contract(format!(
                "vertex {i} has a non-finite coordinate"
            )));
        }
        match self.kind {
            ComplexKind::PolylineLoop => {
                if !self.triangles.is_empty() {
                    return Err(Error::Contract("polyline with triangles".into()));
                }
                let mut out_deg = vec![0usize; n];
                let mut in_deg = vec![0usize; n];
                for (k, &[a, b]) in self.edges.iter().enumerate() {
                    if a >= n || b >= n || a == b {
                        return Err(Error::Contract(format!("edge {k} ({a}, {b}) is invalid")));
                    }
                    out_deg[a] += 1;
                    in_deg[b] += 1;
                }
                if let Some(i) = (0..n).find(|&i| out_deg[i] != 1 || in_deg[i] != 1) {
                    return Err(Error::Contract(format!(
                        "vertex {i} must have exactly two incident edges in a consistent loop"
                    )));
                }
                if n < 3 {
                    return Err(Error::Contract("a loop needs at least 3 vertices".into()));
                }
            }
            ComplexKind::TriangleMesh => {
                if !self.edges.is_empty() {
                    return Err(Error::Contract("mesh with explicit edges".into()));
                }
                let mut seen = HashSet::new();
                let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
                for (k, t) in self.triangles.iter().enumerate() {
                    if t.iter().any(|&i| i >= n) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                        return Err(Error::Contract(format!("triangle {k} {t:?} is invalid")));
                    }
                    let mut key = *t;
                    key.sort_unstable();
                    if !seen.insert(key) {
                        return Err(Error::Contract(format!("triangle {k} is a duplicate")));
                    }
                    for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                        if directed.insert((a, b), k).is_some() {
                            return Err(Error::Contract(format!(
                                "edge ({a}, {b}) is non-manifold or inconsistently oriented"
                            )));
                        }
                    }
                }
                let mut used = vec![false; n];
                self.triangles
                    .iter()
                    .flatten()
                    .for_each(|&i| used[i] = true);
                if let Some(i) = used.iter().position(|u| !u) {
                    return Err(Error::Contract(format!(
                        "vertex {i} belongs to no triangle"
                    )));
                }
                if self.triangles.is_empty() {
                    return Err(Error::Contract("mesh has no triangles".into()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn topology(&self) -> Topology {
        let n = self.vertices.len();
        let mut neighbors = vec![Vec::new(); n];
        let mut loop_links = Vec::new();
        let mut incident = Vec::new();
        let mut boundary = vec![false; n];
        match self.kind {
            ComplexKind::PolylineLoop => {
                loop_links = vec![(0, 0); n];
                for &[a, b] in &self.edges {
                    loop_links[a].1 = b;
                    loop_links[b].0 = a;
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                }
            }
            ComplexKind::TriangleMesh => {
                incident = vec![Vec::new(); n];
                let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
                for (k, t) in self.triangles.iter().enumerate() {
                    for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                        *count.entry((a.min(b), a.max(b))).or_default() += 1;
                    }
                    for &i in t {
                        incident[i].push(k);
                    }
                }
                for (&(a, b), &c) in &count {
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                    if c == 1 {
                        boundary[a] = true;
                        boundary[b] = true;
                    }
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Topology {
            neighbors,
            loop_links,
            incident,
            boundary,
        }
    }

    /// Vertices that are neither anchored nor on a mesh boundary.
    pub fn interior_vertices(&self) -> Vec<usize> {
        let topo = self.topology();
        (0..self.vertices.len())
            .filter(|&i| !self.fixed[i] && !topo.boundary[i])
            .collect()
    }

    pub(crate) fn set_connectivity(&mut self, edges: Vec<[usize; 2]>, triangles: Vec<[usize; 3]>) {
        self.edges = edges;
        self.triangles = triangles;
    }

    pub(crate) fn replace_vertices(&mut self, vertices: Vec<DVector<f64>>, fixed: Vec<bool>) {
        self.vertices = vertices;
        self.fixed = fixed;
    }

    pub fn to_xmesh(&self) -> String {
        let mut s = format!("XMESH 1 {} {}\n", self.ambient_dim, self.kind.keyword());
        for (v, &f) in self.vertices.iter().zip(&self.fixed) {
            s.push('v');
            for x in v.iter() {
                write!(s, " {x:?}").unwrap();
            }
            writeln!(s, " {}", f as u8).unwrap();
        }
        for [a, b] in &self.edges {
            writeln!(s, "e {a} {b}").unwrap();
        }
        for [a, b, c] in &self.triangles {
            writeln!(s, "f {a} {b} {c}").unwrap();
        }
        s
    }

    /// Parses XMESH text; `origin` names the source in error messages.
    pub fn from_xmesh(text: &str, origin: &Path) -> Result<Self> {
        let bad =
            |line: usize, reason: String| Error::format(origin, format!("line {line}: {reason}"));
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines
            .next()
            .ok_or_else(|| Error::format(origin, "empty file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "XMESH" {
            return Err(bad(
                hl,
                "expected header `XMESH <version> <dim> <kind>`".into(),
            ));
        }
        if h[1] != "1" {
            return Err(bad(hl, format!("unsupported version {}", h[1])));
        }
        let dim: usize = h[2]
            .parse()
            .map_err(|_| bad(hl, format!("bad dimension {:?}", h[2])))?;
        let kind = match h[3] {
            "polyline" => ComplexKind::PolylineLoop,
            "trimesh" => ComplexKind::TriangleMesh,
            other => return Err(bad(hl, format!("unknown kind {other:?}"))),
        };
        let mut vertices = Vec::new();
        let mut fixed = Vec::new();
        let mut edges = Vec::new();
        let mut triangles = Vec::new();
        for (ln, line) in lines {
            let mut tok = line.split_whitespace();
            let tag = tok.next().unwrap_or_default();
            let rest: Vec<&str> = tok.collect();
            let idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| bad(ln, format!("bad index {s:?}")))
            };
            match tag {
                "v" => {
                    if rest.len() != dim + 1 {
                        return Err(bad(
                            ln,
                            format!("vertex needs {dim} coordinates and a flag"),
                        ));
                    }
                    let coords = rest[..dim]
                        .iter()
                        .map(|s| {
                            s.parse::<f64>()
                                .map_err(|_| bad(ln, format!("bad coordinate {s:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let flag = match rest[dim] {
                        "0" => false,
                        "1" => true,
                        f => return Err(bad(ln, format!("fixed flag must be 0 or 1, got {f:?}"))),
                    };
                    vertices.push(coords);
                    fixed.push(flag);
                }
                "e" if rest.len() == 2 => edges.push([idx(rest[0])?, idx(rest[1])?]),
                "f" if rest.len() == 3 => {
                    triangles.push([idx(rest[0])?, idx(rest[1])?, idx(rest[2])?])
                }
                _ => return Err(bad(ln, format!("unrecognized record {line:?}"))),
            }
        }
        Self::assemble(dim, kind, vertices, edges, triangles, fixed)
            .map_err(|e| Error::format(origin, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_xmesh()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_xmesh(&text, path)
    }
}
