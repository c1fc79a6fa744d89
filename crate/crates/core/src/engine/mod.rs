//! Forward-Euler integration of the lattice reaction-diffusion network.
//!
//! The per-node update is
//!
//! ```text
//! u_i <- u_i + dt * (d_u * sum_j (u_j - u_i) / h^2 + f(u_i, v_i))
//! v_i <- v_i + dt * (d_v * sum_j (v_j - v_i) / h^2 + g(u_i, v_i))
//! ```
//!
//! where `j` runs over the active axis neighbors of `i`. Updates are double
//! buffered, and each worker owns a contiguous slab of the new buffer, so the
//! result does not depend on the worker count.

pub mod init;
mod kernel;
pub mod presets;
pub mod snapshot;

use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_graph, region_mask, ConductionMask, GridSpec, LatticeGraph, RegionSpec};
use crate::model::{resting_state, stability_limit, FhnParams, StatePair};

use kernel::{advance, slab_bounds, Coeffs, Coupling};

/// The `u`, `v` fields over a lattice at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: GridSpec,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Time in ms.
    pub t: f64,
    pub step_count: u64,
}

impl FieldState {
    pub fn uniform(grid: GridSpec, value: StatePair) -> Self {
        let n = grid.node_count();
        FieldState {
            grid,
            u: vec![value.u; n],
            v: vec![value.v; n],
            t: 0.0,
            step_count: 0,
        }
    }

    pub fn at_rest(grid: GridSpec, params: &FhnParams) -> Result<Self> {
        Ok(FieldState::uniform(grid, resting_state(params)?))
    }

    pub fn check_invariants(&self) -> Result<()> {
        let n = self.grid.node_count();
        if self.u.len() != n || self.v.len() != n {
            return Err(Error::Contract(format!(
                "field arrays have {}/{} entries for {n} nodes",
                self.u.len(),
                self.v.len()
            )));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::Contract(format!("invalid time {}", self.t)));
        }
        if let Some(i) = self
            .u
            .iter()
            .zip(&self.v)
            .position(|(u, v)| !(u.is_finite() && v.is_finite()))
        {
            return Err(Error::Numerical(format!(
                "non-finite field value at node {i}"
            )));
        }
        Ok(())
    }

    pub fn field(&self, target: Target) -> &[f64] {
        match target {
            Target::U => &self.u,
            Target::V => &self.v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    U,
    V,
}

/// Hard set of one variable inside a region at a given time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusEvent {
    /// ms
    pub time: f64,
    pub region: RegionSpec,
    #[serde(default = "default_target")]
    pub target: Target,
    #[serde(default = "default_value")]
    pub value: f64,
}

fn default_target() -> Target {
    Target::U
}

fn default_value() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Stencil,
    Graph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub params: FhnParams,
    /// `false` switches the kinetics off (pure diffusion).
    pub reaction: bool,
    pub grid: GridSpec,
    pub mask: ConductionMask,
    /// ms
    pub dt: f64,
    /// ms
    pub t_end: f64,
    pub stimuli: Vec<StimulusEvent>,
    /// ms between periodic snapshots.
    pub snapshot_every: f64,
    pub backend: Backend,
    pub workers: usize,
}

impl RunPlan {
    /// Plan on an obstacle-free grid with default kinetics and no stimuli.
    pub fn new(grid: GridSpec, dt: f64, t_end: f64) -> Self {
        RunPlan {
            params: FhnParams::default(),
            reaction: true,
            mask: ConductionMask::all_active(grid.clone()),
            grid,
            dt,
            t_end,
            stimuli: Vec::new(),
            snapshot_every: t_end.max(dt),
            backend: Backend::Stencil,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.mask.grid() != &self.grid {
            return Err(Error::Config(
                "conduction mask grid differs from plan grid".into(),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        let limit = stability_limit(&self.params, &self.grid);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} ms exceeds the explicit stability limit {limit} ms",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("invalid t_end {}", self.t_end)));
        }
        for ev in &self.stimuli {
            if !(ev.time >= 0.0 && ev.time.is_finite()) {
                return Err(Error::Config(format!(
                    "stimulus time {} is negative",
                    ev.time
                )));
            }
            ev.region.validate(self.grid.ndim())?;
        }
        if self.stimuli.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(Error::Config("stimuli must be sorted by time".into()));
        }
        self.snapshot_stride()?;
        if self.workers == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        Ok(())
    }

    /// Snapshot cadence in steps.
    pub fn snapshot_stride(&self) -> Result<u64> {
        let k = (self.snapshot_every / self.dt).round();
        if !(k >= 1.0)
            || (k * self.dt - self.snapshot_every).abs() > 1e-9 * self.snapshot_every.max(1.0)
        {
            return Err(Error::Config(format!(
                "snapshot_every = {} ms is not a positive multiple of dt = {} ms",
                self.snapshot_every, self.dt
            )));
        }
        Ok(k as u64)
    }

    /// Global step index at which an event time fires; off-grid times snap to
    /// the nearest step with a warning.
    pub fn step_of(&self, time: f64) -> u64 {
        let k = (time / self.dt).round();
        if (k * self.dt - time).abs() > 1e-9 * time.abs().max(1.0) {
            warn!(
                "time {time} ms is not on the dt = {} ms grid; snapped to {} ms",
                self.dt,
                k * self.dt
            );
        }
        k.max(0.0) as u64
    }
}

/// Reusable stepping context: owns the scratch buffers, the worker pool and
/// (for the graph backend) the explicit adjacency.
pub struct Integrator {
    coeffs: Coeffs,
    mask: ConductionMask,
    grid: GridSpec,
    graph: Option<LatticeGraph>,
    bounds: Vec<usize>,
    pool: Option<rayon::ThreadPool>,
    u_next: Vec<f64>,
    v_next: Vec<f64>,
}

impl Integrator {
    pub fn new(plan: &RunPlan) -> Result<Self> {
        plan.validate()?;
        let graph = match plan.backend {
            Backend::Stencil => None,
            Backend::Graph => Some(build_graph(&plan.grid, &plan.mask)),
        };
        Self::build(plan, graph)
    }

    /// Graph backend with a caller-supplied adjacency.
    pub fn with_graph(plan: &RunPlan, graph: LatticeGraph) -> Result<Self> {
        plan.validate()?;
        if graph.node_count() != plan.grid.node_count() {
            return Err(Error::Contract(format!(
                "graph has {} nodes, grid has {}",
                graph.node_count(),
                plan.grid.node_count()
            )));
        }
        Self::build(plan, Some(graph))
    }

    fn build(plan: &RunPlan, graph: Option<LatticeGraph>) -> Result<Self> {
        let h = plan.grid.spacing();
        let weight = graph
            .as_ref()
            .map(|g| g.coupling_weight())
            .unwrap_or(1.0 / (h * h));
        let pool = if plan.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(plan.workers)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?,
            )
        } else {
            None
        };
        let n = plan.grid.node_count();
        Ok(Integrator {
            coeffs: Coeffs {
                params: plan.params,
                reaction: plan.reaction,
                dt: plan.dt,
                weight,
            },
            mask: plan.mask.clone(),
            grid: plan.grid.clone(),
            graph,
            bounds: slab_bounds(&plan.grid, plan.workers),
            pool,
            u_next: vec![0.0; n],
            v_next: vec![0.0; n],
        })
    }

    /// Advances `state` by one step in place. `t` is recomputed as
    /// `step_count * dt` so resumed runs reproduce the same time stamps.
    pub fn step(&mut self, state: &mut FieldState) -> Result<()> {
        if state.grid != self.grid {
            return Err(Error::Contract("state grid differs from plan grid".into()));
        }
        let coupling = match &self.graph {
            Some(graph) => Coupling::Graph {
                graph,
                mask: &self.mask,
            },
            None => Coupling::Stencil {
                grid: &self.grid,
                mask: &self.mask,
            },
        };
        let bad = advance(
            &coupling,
            &self.coeffs,
            &self.bounds,
            self.pool.as_ref(),
            &state.u,
            &state.v,
            &mut self.u_next,
            &mut self.v_next,
        );
        let next_step = state.step_count + 1;
        if let Some(node) = bad {
            return Err(Error::Diverged {
                step: next_step,
                node,
            });
        }
        std::mem::swap(&mut state.u, &mut self.u_next);
        std::mem::swap(&mut state.v, &mut self.v_next);
        state.step_count = next_step;
        state.t = next_step as f64 * self.coeffs.dt;
        Ok(())
    }
}

/// One step with the stencil backend.
pub fn step(state: &FieldState, plan: &RunPlan) -> Result<FieldState> {
    let plan = RunPlan {
        backend: Backend::Stencil,
        ..plan.clone()
    };
    let mut next = state.clone();
    Integrator::new(&plan)?.step(&mut next)?;
    Ok(next)
}

/// One step iterating the rows of an explicit graph.
pub fn step_graph(state: &FieldState, plan: &RunPlan, graph: &LatticeGraph) -> Result<FieldState> {
    let mut next = state.clone();
    Integrator::with_graph(plan, graph.clone())?.step(&mut next)?;
    Ok(next)
}

/// Overwrites the target variable on every active node inside the region.
/// Returns the number of nodes touched; zero is legal and only warned about.
pub fn apply_stimulus(
    state: &mut FieldState,
    ev: &StimulusEvent,
    mask: &ConductionMask,
) -> Result<usize> {
    let inside = region_mask(&state.grid, &ev.region)?;
    let field = match ev.target {
        Target::U => &mut state.u,
        Target::V => &mut state.v,
    };
    let mut count = 0;
    for (i, hit) in inside.into_iter().enumerate() {
        if hit && mask.is_active(i) {
            field[i] = ev.value;
            count += 1;
        }
    }
    if count == 0 {
        warn!("stimulus at t = {} ms selects no active node", ev.time);
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotKind {
    Periodic,
    Final,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: FieldState,
    pub steps: u64,
    pub stimuli_applied: usize,
    pub wall_seconds: f64,
}

/// Runs a plan from `initial` (or from rest), calling `sink` with every
/// periodic snapshot and once with the final checkpoint.
///
/// At each step boundary the order is: snapshot, stimuli scheduled for this
/// step, then the step itself. Events earlier than the initial state's step
/// are treated as already applied, which makes resuming from a checkpoint
/// reproduce the uninterrupted run exactly.
pub fn run<F>(plan: &RunPlan, initial: Option<FieldState>, mut sink: F) -> Result<RunSummary>
where
    F: FnMut(&FieldState, SnapshotKind) -> Result<()>,
{
    plan.validate()?;
    let rest = resting_state(&plan.params)?;
    let mut state = match initial {
        Some(s) => s,
        None => FieldState::uniform(plan.grid.clone(), rest),
    };
    if state.grid != plan.grid {
        return Err(Error::Config(
            "initial state grid differs from plan grid".into(),
        ));
    }
    state.check_invariants()?;
    let n0 = (state.t / plan.dt).round();
    if (n0 * plan.dt - state.t).abs() > 1e-9 * state.t.max(1.0) {
        return Err(Error::Config(format!(
            "initial time {} ms is not on the dt = {} ms grid",
            state.t, plan.dt
        )));
    }
    let n0 = n0 as u64;
    state.step_count = n0;
    state.t = n0 as f64 * plan.dt;
    for (i, &a) in plan.mask.active().iter().enumerate() {
        if !a {
            state.u[i] = rest.u;
            state.v[i] = rest.v;
        }
    }

    let n_end = plan.step_of(plan.t_end);
    if n_end < n0 {
        return Err(Error::Config(format!(
            "t_end = {} ms precedes the initial time {} ms",
            plan.t_end, state.t
        )));
    }
    let stride = plan.snapshot_stride()?;
    let schedule: Vec<(u64, &StimulusEvent)> = plan
        .stimuli
        .iter()
        .map(|ev| (plan.step_of(ev.time), ev))
        .collect();
    let mut next_event = schedule
        .iter()
        .position(|(k, _)| *k >= n0)
        .unwrap_or(schedule.len());

    let mut integrator = Integrator::new(plan)?;
    let started = Instant::now();
    let mut applied = 0;
    let mut n = n0;
    loop {
        if n == n_end {
            sink(&state, SnapshotKind::Final)?;
            break;
        }
        if n.is_multiple_of(stride) {
            sink(&state, SnapshotKind::Periodic)?;
        }
        while next_event < schedule.len() && schedule[next_event].0 == n {
            apply_stimulus(&mut state, schedule[next_event].1, &plan.mask)?;
            applied += 1;
            next_event += 1;
        }
        integrator.step(&mut state)?;
        n += 1;
    }
    Ok(RunSummary {
        final_state: state,
        steps: n_end - n0,
        stimuli_applied: applied,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Crops a snapshot to an axis-aligned box and resamples it onto a lattice
/// whose spacing divides the old one, by multilinear interpolation.
///
/// Box faces snap inward to the nearest lattice planes. A refined node stays
/// conducting only if every old node it interpolates from was conducting.
pub fn subdomain_restart(
    state: &FieldState,
    mask: &ConductionMask,
    region: &RegionSpec,
    new_spacing: f64,
) -> Result<(FieldState, ConductionMask)> {
    let grid = &state.grid;
    let ndim = grid.ndim();
    let RegionSpec::Box { lo, hi } = region else {
        return Err(Error::Config("subdomain restart needs a box region".into()));
    };
    region.validate(ndim)?;
    let h = grid.spacing();
    let ratio = (h / new_spacing).round();
    if !(ratio >= 1.0) || (ratio * new_spacing - h).abs() > 1e-9 * h {
        return Err(Error::Config(format!(
            "new spacing {new_spacing} mm must divide the old spacing {h} mm"
        )));
    }
    let r = ratio as usize;

    let mut lo_idx = Vec::with_capacity(ndim);
    let mut counts = Vec::with_capacity(ndim);
    for k in 0..ndim {
        let a = ((lo[k] - grid.origin()[k]) / h - 1e-9).ceil();
        let b = ((hi[k] - grid.origin()[k]) / h + 1e-9).floor();
        if a < 0.0 || b > (grid.shape()[k] - 1) as f64 || b < a {
            return Err(Error::Config(format!(
                "box [{}, {}] on axis {k} lies outside the snapshot domain",
                lo[k], hi[k]
            )));
        }
        lo_idx.push(a as usize);
        counts.push((b - a) as usize * r + 1);
    }
    let origin: Vec<f64> = (0..ndim)
        .map(|k| grid.origin()[k] + lo_idx[k] as f64 * h)
        .collect();
    let new_grid = GridSpec::new(counts, new_spacing, origin)?;

    let n = new_grid.node_count();
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut active = vec![true; n];
    let mut coords = vec![0usize; ndim];
    let mut base = vec![0usize; ndim];
    let mut frac = vec![0.0f64; ndim];
    for i in 0..n {
        new_grid.unravel_into(i, &mut coords);
        for k in 0..ndim {
            base[k] = lo_idx[k] + coords[k] / r;
            frac[k] = (coords[k] % r) as f64 / r as f64;
        }
        let (mut su, mut sv) = (0.0, 0.0);
        let mut all_active = true;
        for corner in 0..(1usize << ndim) {
            let mut w = 1.0;
            let mut idx = 0;
            for k in 0..ndim {
                let up = corner >> k & 1 == 1;
                let wk = if up { frac[k] } else { 1.0 - frac[k] };
                if wk == 0.0 {
                    w = 0.0;
                    break;
                }
                w *= wk;
                idx += (base[k] + up as usize) * grid.strides()[k];
            }
            if w == 0.0 {
                continue;
            }
            su += w * state.u[idx];
            sv += w * state.v[idx];
            all_active &= mask.is_active(idx);
        }
        u[i] = su;
        v[i] = sv;
        active[i] = all_active;
    }
    let new_mask = ConductionMask::new(new_grid.clone(), active)?;
    Ok((
        FieldState {
            grid: new_grid,
            u,
            v,
            t: state.t,
            step_count: state.step_count,
        },
        new_mask,
    ))
}
