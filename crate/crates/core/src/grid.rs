//! N-dimensional Cartesian lattices.
//!
//! Nodes are stored row-major with the last axis varying fastest. No-flux
//! boundaries are realized by neighbor omission: a node on the domain edge,
//! or next to an obstacle, simply has fewer neighbors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of a regular lattice: `shape[k]` nodes along axis `k`, lattice
/// constant `spacing` (mm), and the physical coordinate of node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    shape: Vec<usize>,
    spacing: f64,
    origin: Vec<f64>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    len: usize,
}

impl GridSpec {
    pub fn new(shape: Vec<usize>, spacing: f64, origin: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Config("grid needs at least one axis".into()));
        }
        if origin.len() != shape.len() {
            return Err(Error::Config(format!(
                "origin has {} entries for a {}-dimensional grid",
                origin.len(),
                shape.len()
            )));
        }
        if let Some((axis, &n)) = shape.iter().enumerate().find(|(_, &n)| n < 3) {
            return Err(Error::Config(format!(
                "axis {axis} has {n} nodes; at least 3 are required"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Config(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Config("origin must be finite".into()));
        }
        let len = shape
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&n| n <= isize::MAX as usize / 16)
            .ok_or_else(|| Error::Config("node count exceeds the address space".into()))?;
        let mut strides = vec![1usize; shape.len()];
        for k in (0..shape.len() - 1).rev() {
            strides[k] = strides[k + 1] * shape[k + 1];
        }
        Ok(GridSpec {
            shape,
            spacing,
            origin,
            strides,
            len,
        })
    }

    /// Grid with node 0 at the physical origin.
    pub fn cube(ndim: usize, n: usize, spacing: f64) -> Result<Self> {
        GridSpec::new(vec![n; ndim], spacing, vec![0.0; ndim])
    }

    /// Rebuilds derived fields after deserialization.
    pub fn validated(self) -> Result<Self> {
        GridSpec::new(self.shape, self.spacing, self.origin)
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn node_count(&self) -> usize {
        self.len
    }

    /// Physical extent `(n - 1) * h` along `axis`.
    pub fn extent(&self, axis: usize) -> f64 {
        (self.shape[axis] - 1) as f64 * self.spacing
    }

    pub fn flat_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.ndim() {
            return Err(Error::Contract(format!(
                "expected {} coordinates, got {}",
                self.ndim(),
                coords.len()
            )));
        }
        let mut idx = 0;
        for (axis, (&c, &n)) in coords.iter().zip(&self.shape).enumerate() {
            if c >= n {
                return Err(Error::Index {
                    axis,
                    value: c as i64,
                    extent: n,
                });
            }
            idx += c * self.strides[axis];
        }
        Ok(idx)
    }

    pub fn unravel(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.len {
            return Err(Error::Index {
                axis: 0,
                value: index as i64,
                extent: self.len,
            });
        }
        let mut coords = vec![0; self.ndim()];
        self.unravel_into(index, &mut coords);
        Ok(coords)
    }

    /// Unchecked variant of [`GridSpec::unravel`] writing into a buffer.
    pub fn unravel_into(&self, mut index: usize, coords: &mut [usize]) {
        for (c, &s) in coords.iter_mut().zip(&self.strides) {
            *c = index / s;
            index %= s;
        }
    }

    /// Physical position of a node, `origin + index * spacing`.
    pub fn position(&self, coords: &[usize]) -> Vec<f64> {
        coords
            .iter()
            .zip(&self.origin)
            .map(|(&c, &o)| o + c as f64 * self.spacing)
            .collect()
    }

    /// True if the node touches the domain boundary on some axis.
    pub fn is_boundary(&self, coords: &[usize]) -> bool {
        coords
            .iter()
            .zip(&self.shape)
            .any(|(&c, &n)| c == 0 || c + 1 == n)
    }
}

/// Per-node conduction flag: `false` marks obstacle (zero-conductivity) nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductionMask {
    grid: GridSpec,
    active: Vec<bool>,
    all_active: bool,
}

impl ConductionMask {
    pub fn new(grid: GridSpec, active: Vec<bool>) -> Result<Self> {
        if active.len() != grid.node_count() {
            return Err(Error::Contract(format!(
                "mask has {} entries for {} nodes",
                active.len(),
                grid.node_count()
            )));
        }
        if !active.iter().any(|&a| a) {
            return Err(Error::Config("conduction mask has no active node".into()));
        }
        let all_active = active.iter().all(|&a| a);
        Ok(ConductionMask {
            grid,
            active,
            all_active,
        })
    }

    pub fn all_active(grid: GridSpec) -> Self {
        let n = grid.node_count();
        ConductionMask {
            grid,
            active: vec![true; n],
            all_active: true,
        }
    }

    /// Marks every node inside any of `obstacles` as non-conducting.
    pub fn with_obstacles(grid: GridSpec, obstacles: &[RegionSpec]) -> Result<Self> {
        let mut active = vec![true; grid.node_count()];
        for region in obstacles {
            let inside = region_mask(&grid, region)?;
            for (a, hit) in active.iter_mut().zip(inside) {
                *a &= !hit;
            }
        }
        ConductionMask::new(grid, active)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    #[inline]
    pub fn is_active(&self, node: usize) -> bool {
        self.active[node]
    }

    pub fn is_all_active(&self) -> bool {
        self.all_active
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

/// Axis-adjacent active neighbors of an active node, ordered by axis with the
/// lower neighbor before the upper one.
pub fn neighbors(grid: &GridSpec, mask: &ConductionMask, node: usize) -> Result<Vec<usize>> {
    if node >= grid.node_count() {
        return Err(Error::Index {
            axis: 0,
            value: node as i64,
            extent: grid.node_count(),
        });
    }
    if !mask.is_active(node) {
        return Err(Error::Contract(format!("node {node} is not conducting")));
    }
    let coords = grid.unravel(node)?;
    let mut out = Vec::with_capacity(2 * grid.ndim());
    for (axis, (&c, &n)) in coords.iter().zip(grid.shape()).enumerate() {
        let s = grid.strides()[axis];
        if c > 0 && mask.is_active(node - s) {
            out.push(node - s);
        }
        if c + 1 < n && mask.is_active(node + s) {
            out.push(node + s);
        }
    }
    Ok(out)
}

/// Explicit sparse adjacency of the lattice network (CSR rows).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    offsets: Vec<usize>,
    neighbor_indices: Vec<usize>,
    coupling_weight: f64,
}

impl LatticeGraph {
    /// Builds a graph from explicit rows; rows must be symmetric and loop-free.
    pub fn from_rows(rows: Vec<Vec<usize>>, coupling_weight: f64) -> Result<Self> {
        let n = rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbor_indices = Vec::new();
        offsets.push(0);
        for (i, row) in rows.iter().enumerate() {
            for &j in row {
                if j >= n {
                    return Err(Error::Contract(format!("edge {i}->{j} leaves the graph")));
                }
                if j == i {
                    return Err(Error::Contract(format!("self-loop at node {i}")));
                }
                if !rows[j].contains(&i) {
                    return Err(Error::Contract(format!("edge {i}->{j} has no reverse")));
                }
            }
            neighbor_indices.extend_from_slice(row);
            offsets.push(neighbor_indices.len());
        }
        Ok(LatticeGraph {
            offsets,
            neighbor_indices,
            coupling_weight,
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn row(&self, node: usize) -> &[usize] {
        &self.neighbor_indices[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_indices(&self) -> &[usize] {
        &self.neighbor_indices
    }

    /// Edge weight `1/h^2` in mm^-2.
    pub fn coupling_weight(&self) -> f64 {
        self.coupling_weight
    }

    /// Number of directed adjacency entries.
    pub fn directed_edge_count(&self) -> usize {
        self.neighbor_indices.len()
    }
}

pub fn build_graph(grid: &GridSpec, mask: &ConductionMask) -> LatticeGraph {
    let n = grid.node_count();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut neighbor_indices = Vec::with_capacity(2 * grid.ndim() * n);
    let mut coords = vec![0usize; grid.ndim()];
    offsets.push(0);
    for node in 0..n {
        if mask.is_active(node) {
            grid.unravel_into(node, &mut coords);
            for (axis, (&c, &len)) in coords.iter().zip(grid.shape()).enumerate() {
                let s = grid.strides()[axis];
                if c > 0 && mask.is_active(node - s) {
                    neighbor_indices.push(node - s);
                }
                if c + 1 < len && mask.is_active(node + s) {
                    neighbor_indices.push(node + s);
                }
            }
        }
        offsets.push(neighbor_indices.len());
    }
    LatticeGraph {
        offsets,
        neighbor_indices,
        coupling_weight: 1.0 / (grid.spacing() * grid.spacing()),
    }
}

/// Closed geometric regions in physical coordinates (mm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    /// Axis-aligned box, `lo[k] <= x[k] <= hi[k]`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// All points whose projection on the `axes` plane lies in a disk.
    Hypercylinder {
        axes: [usize; 2],
        center: [f64; 2],
        radius: f64,
    },
    /// Ball of `radius` swept along the segment `start`..`end` (a capsule).
    SweptBall {
        start: Vec<f64>,
        end: Vec<f64>,
        radius: f64,
    },
}

impl RegionSpec {
    pub fn validate(&self, ndim: usize) -> Result<()> {
        let check_len = |name: &str, v: &[f64]| {
            if v.len() != ndim {
                Err(Error::Config(format!(
                    "region {name} has {} components, grid has {ndim} axes",
                    v.len()
                )))
            } else if v.iter().any(|x| !x.is_finite()) {
                Err(Error::Config(format!("region {name} is not finite")))
            } else {
                Ok(())
            }
        };
        let check_radius = |r: f64| {
            if r > 0.0 && r.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "region radius must be positive, got {r}"
                )))
            }
        };
        match self {
            RegionSpec::Box { lo, hi } => {
                check_len("lo", lo)?;
                check_len("hi", hi)?;
                if let Some(k) = (0..ndim).find(|&k| lo[k] > hi[k]) {
                    return Err(Error::Config(format!(
                        "box interval on axis {k} is empty: [{}, {}]",
                        lo[k], hi[k]
                    )));
                }
                Ok(())
            }
            RegionSpec::Ball { center, radius } => {
                check_len("center", center)?;
                check_radius(*radius)
            }
            RegionSpec::Hypercylinder {
                axes,
                center,
                radius,
            } => {
                if axes[0] == axes[1] || axes[0] >= ndim || axes[1] >= ndim {
                    return Err(Error::Config(format!(
                        "hypercylinder axes {axes:?} invalid for {ndim} dimensions"
                    )));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Config("hypercylinder center is not finite".into()));
                }
                check_radius(*radius)
            }
            RegionSpec::SweptBall { start, end, radius } => {
                check_len("start", start)?;
                check_len("end", end)?;
                check_radius(*radius)
            }
        }
    }

    /// Region predicate; boundaries are included.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            RegionSpec::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&xi, (&l, &h))| l <= xi && xi <= h),
            RegionSpec::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= radius * radius
            }
            RegionSpec::Hypercylinder {
                axes,
                center,
                radius,
            } => {
                let d0 = x[axes[0]] - center[0];
                let d1 = x[axes[1]] - center[1];
                d0 * d0 + d1 * d1 <= radius * radius
            }
            RegionSpec::SweptBall { start, end, radius } => {
                let mut seg2 = 0.0;
                let mut proj = 0.0;
                for k in 0..x.len() {
                    let d = end[k] - start[k];
                    seg2 += d * d;
                    proj += (x[k] - start[k]) * d;
                }
                let s = if seg2 > 0.0 {
                    (proj / seg2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let d2: f64 = (0..x.len())
                    .map(|k| {
                        let p = start[k] + s * (end[k] - start[k]);
                        (x[k] - p) * (x[k] - p)
                    })
                    .sum();
                d2 <= radius * radius
            }
        }
    }

    /// Shifts every coordinate of the region by `offset`.
    pub fn translated(&self, offset: &[f64]) -> RegionSpec {
        let add = |v: &[f64]| v.iter().zip(offset).map(|(a, b)| a + b).collect::<Vec<_>>();
        match self {
            RegionSpec::Box { lo, hi } => RegionSpec::Box {
                lo: add(lo),
                hi: add(hi),
            },
            RegionSpec::Ball { center, radius } => RegionSpec::Ball {
                center: add(center),
                radius: *radius,
            },
            RegionSpec::Hypercylinder {
                axes,
                center,
                radius,
            } => RegionSpec::Hypercylinder {
                axes: *axes,
                center: [center[0] + offset[axes[0]], center[1] + offset[axes[1]]],
                radius: *radius,
            },
            RegionSpec::SweptBall { start, end, radius } => RegionSpec::SweptBall {
                start: add(start),
                end: add(end),
                radius: *radius,
            },
        }
    }
}

pub fn region_mask(grid: &GridSpec, region: &RegionSpec) -> Result<Vec<bool>> {
    region.validate(grid.ndim())?;
    let mut coords = vec![0usize; grid.ndim()];
    let mut x = vec![0.0; grid.ndim()];
    Ok((0..grid.node_count())
        .map(|i| {
            grid.unravel_into(i, &mut coords);
            for k in 0..coords.len() {
                x[k] = grid.origin()[k] + coords[k] as f64 * grid.spacing();
            }
            region.contains(&x)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edges_by_enumeration(grid: &GridSpec, mask: &ConductionMask) -> usize {
        // Count unordered pairs differing by one step on exactly one axis.
        let n = grid.node_count();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if !mask.is_active(i) || !mask.is_active(j) {
                    continue;
                }
                let a = grid.unravel(i).unwrap();
                let b = grid.unravel(j).unwrap();
                let dist: usize = a.iter().zip(&b).map(|(x, y)| x.abs_diff(*y)).sum();
                if dist == 1 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn flat_index_examples() {
        let g = GridSpec::cube(2, 3, 1.0).unwrap();
        assert_eq!(g.flat_index(&[0, 0]).unwrap(), 0);
        assert_eq!(g.flat_index(&[1, 2]).unwrap(), 5);
        let g4 = GridSpec::cube(4, 4, 1.0).unwrap();
        assert_eq!(g4.flat_index(&[1, 0, 0, 0]).unwrap(), 64);
        assert!(matches!(
            g.flat_index(&[3, 0]),
            Err(Error::Index { axis: 0, .. })
        ));
    }

    #[test]
    fn degenerate_axis_rejected() {
        assert!(GridSpec::new(vec![1, 5], 1.0, vec![0.0, 0.0]).is_err());
        assert!(GridSpec::new(vec![5, 5], 0.0, vec![0.0, 0.0]).is_err());
        assert!(GridSpec::new(vec![5, 5], 1.0, vec![0.0]).is_err());
    }

    #[test]
    fn neighbor_counts() {
        let g2 = GridSpec::cube(2, 5, 1.0).unwrap();
        let m2 = ConductionMask::all_active(g2.clone());
        let center = g2.flat_index(&[2, 2]).unwrap();
        assert_eq!(neighbors(&g2, &m2, center).unwrap().len(), 4);
        assert_eq!(neighbors(&g2, &m2, 0).unwrap().len(), 2);

        let g4 = GridSpec::cube(4, 3, 1.0).unwrap();
        let m4 = ConductionMask::all_active(g4.clone());
        let c4 = g4.flat_index(&[1, 1, 1, 1]).unwrap();
        assert_eq!(neighbors(&g4, &m4, c4).unwrap().len(), 8);
    }

    #[test]
    fn neighbors_of_inactive_node_is_contract_error() {
        let g = GridSpec::cube(2, 3, 1.0).unwrap();
        let mut active = vec![true; 9];
        active[4] = false;
        let m = ConductionMask::new(g.clone(), active).unwrap();
        assert!(matches!(neighbors(&g, &m, 4), Err(Error::Contract(_))));
        assert_eq!(neighbors(&g, &m, 1).unwrap(), vec![0, 2]);
    }

    #[test]
    fn graph_of_3x3() {
        let g = GridSpec::cube(2, 3, 0.5).unwrap();
        let m = ConductionMask::all_active(g.clone());
        let graph = build_graph(&g, &m);
        assert_eq!(edges_by_enumeration(&g, &m), 12);
        assert_eq!(graph.directed_edge_count(), 24);
        assert_eq!(graph.coupling_weight(), 4.0);
    }

    #[test]
    fn graph_with_masked_center() {
        let g = GridSpec::cube(3, 3, 1.0).unwrap();
        let full = build_graph(&g, &ConductionMask::all_active(g.clone()));
        let center = g.flat_index(&[1, 1, 1]).unwrap();
        let mut active = vec![true; 27];
        active[center] = false;
        let m = ConductionMask::new(g.clone(), active).unwrap();
        let graph = build_graph(&g, &m);
        assert!(graph.row(center).is_empty());
        let former = full.row(center).to_vec();
        assert_eq!(former.len(), 6);
        for j in former {
            assert_eq!(graph.row(j).len() + 1, full.row(j).len());
        }
        assert_eq!(
            graph.directed_edge_count(),
            2 * edges_by_enumeration(&g, &m)
        );
        for i in 0..27 {
            if m.is_active(i) {
                assert_eq!(graph.row(i), neighbors(&g, &m, i).unwrap().as_slice());
            }
        }
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        assert!(LatticeGraph::from_rows(vec![vec![1], vec![]], 1.0).is_err());
        assert!(LatticeGraph::from_rows(vec![vec![0]], 1.0).is_err());
        assert!(LatticeGraph::from_rows(vec![vec![1], vec![0]], 1.0).is_ok());
    }

    #[test]
    fn reference_protocol_regions() {
        let g = GridSpec::cube(4, 16, 1.0).unwrap();
        let hole = RegionSpec::Hypercylinder {
            axes: [2, 3],
            center: [8.0, 8.0],
            radius: 5.0,
        };
        let mask = region_mask(&g, &hole).unwrap();
        let mut coords = vec![0; 4];
        for (i, &m) in mask.iter().enumerate() {
            g.unravel_into(i, &mut coords);
            let z = coords[2] as f64;
            let a = coords[3] as f64;
            let expected = ((z - 8.0) / 5.0).powi(2) + ((a - 8.0) / 5.0).powi(2) <= 1.0;
            assert_eq!(m, expected);
        }

        let ball = RegionSpec::Ball {
            center: vec![-20.0, -20.0, 31.0, 45.0],
            radius: 40.0,
        };
        assert!(ball.contains(&[0.0, 0.0, 31.0, 45.0]));
        assert!(!ball.contains(&[20.0, 20.0, 31.0, 45.0]));
        // closed boundary
        assert!(ball.contains(&[20.0, -20.0, 31.0, 45.0]));

        let universe = RegionSpec::Box {
            lo: vec![0.0; 4],
            hi: vec![15.0; 4],
        };
        assert!(region_mask(&g, &universe).unwrap().iter().all(|&m| m));
    }

    #[test]
    fn swept_ball_is_a_capsule() {
        let r = RegionSpec::SweptBall {
            start: vec![10.0, 14.0, 0.0, 0.0],
            end: vec![16.0, 8.0, 25.0, 0.0],
            radius: 2.0,
        };
        assert!(r.contains(&[13.0, 11.0, 12.5, 0.0]));
        assert!(r.contains(&[16.0, 8.0, 27.0, 0.0]));
        assert!(!r.contains(&[16.0, 8.0, 27.1, 0.0]));
        assert!(r.contains(&[10.0, 14.0, 0.0, 2.0]));
    }

    #[test]
    fn bad_regions_rejected() {
        let g = GridSpec::cube(2, 5, 1.0).unwrap();
        let empty = RegionSpec::Box {
            lo: vec![2.0, 0.0],
            hi: vec![1.0, 4.0],
        };
        assert!(matches!(region_mask(&g, &empty), Err(Error::Config(_))));
        let ball = RegionSpec::Ball {
            center: vec![0.0, 0.0],
            radius: 0.0,
        };
        assert!(region_mask(&g, &ball).is_err());
        let cyl = RegionSpec::Hypercylinder {
            axes: [1, 1],
            center: [0.0, 0.0],
            radius: 1.0,
        };
        assert!(region_mask(&g, &cyl).is_err());
    }

    proptest! {
        #[test]
        fn flat_index_round_trips(shape in proptest::collection::vec(3usize..7, 1..5), seed in any::<u64>()) {
            let g = GridSpec::new(shape.clone(), 1.0, vec![0.0; shape.len()]).unwrap();
            let idx = (seed as usize) % g.node_count();
            let coords = g.unravel(idx).unwrap();
            prop_assert_eq!(g.flat_index(&coords).unwrap(), idx);
        }

        #[test]
        fn graph_symmetric_and_degree_bounded(shape in proptest::collection::vec(3usize..6, 1..4), holes in proptest::collection::vec(any::<u16>(), 0..6)) {
            let ndim = shape.len();
            let g = GridSpec::new(shape, 1.0, vec![0.0; ndim]).unwrap();
            let mut active = vec![true; g.node_count()];
            for h in holes {
                active[h as usize % g.node_count()] = false;
            }
            prop_assume!(active.iter().any(|&a| a));
            let m = ConductionMask::new(g.clone(), active).unwrap();
            let graph = build_graph(&g, &m);
            for i in 0..g.node_count() {
                let row = graph.row(i);
                prop_assert!(row.len() <= 2 * ndim);
                prop_assert!(!row.contains(&i));
                for &j in row {
                    prop_assert!(graph.row(j).contains(&i));
                }
                if m.is_active(i) {
                    let c = g.unravel(i).unwrap();
                    let interior = !g.is_boundary(&c)
                        && neighbors(&g, &ConductionMask::all_active(g.clone()), i)
                            .unwrap()
                            .iter()
                            .all(|&j| m.is_active(j));
                    prop_assert_eq!(row.len() == 2 * ndim, interior);
                }
            }
        }

        #[test]
        fn ball_mask_invariant_under_axis_permutation(r in 1.0f64..6.0, c in 2.0f64..6.0) {
            let g = GridSpec::cube(3, 9, 1.0).unwrap();
            let ball = RegionSpec::Ball { center: vec![c; 3], radius: r };
            let mask = region_mask(&g, &ball).unwrap();
            for i in 0..g.node_count() {
                let x = g.unravel(i).unwrap();
                let permuted = g.flat_index(&[x[2], x[0], x[1]]).unwrap();
                prop_assert_eq!(mask[i], mask[permuted]);
            }
        }
    }
}
