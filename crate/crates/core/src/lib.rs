//! Excitable media in N spatial dimensions: lattice reaction-diffusion
//! simulation, phase-singularity tracking, and the codimension-two curvature
//! flow that governs superfilaments.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod engine;
pub mod error;
pub mod flow;
pub mod grid;
pub mod model;
pub mod tracker;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use engine::{
    apply_stimulus, run, step, step_graph, subdomain_restart, Backend, FieldState, Integrator,
    RunPlan, RunSummary, SnapshotKind, StimulusEvent, Target,
};
pub use error::{Error, Result};
pub use flow::{
    area, area_rate_check, evolve, fit_tension, mean_curvature, minimal_residual, parallel_frame,
    ComplexKind, EmbeddedComplex, EvolveOptions, NormalFrame, TensionParams, Trajectory,
};
pub use grid::{
    build_graph, neighbors, region_mask, ConductionMask, GridSpec, LatticeGraph, RegionSpec,
};
pub use model::{reaction, resting_state, stability_limit, FhnParams, StatePair};
pub use tracker::{
    detect_in_slice, fit_affine_subspace, hole_stats, ring_radius, track_superfilament, AffineFit,
    FilamentPoint, FilamentPointCloud, HoleStats, RingStats, SliceSpec, Thresholds,
};
