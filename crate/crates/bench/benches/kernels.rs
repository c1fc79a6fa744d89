use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use superscroll::engine::presets::{sim_preset, Scale, SimName};
use superscroll::{
    build_graph, evolve, run, track_superfilament, Backend, EmbeddedComplex, EvolveOptions,
    FieldState, Integrator, RunPlan, TensionParams, Thresholds,
};

fn sim1_state() -> (RunPlan, FieldState) {
    let mut plan = sim_preset(SimName::Sim1, Scale::Desk).unwrap().plan;
    plan.t_end = 40.0;
    let state = run(&plan, None, |_, _| Ok(())).unwrap().final_state;
    (plan, state)
}

fn engine_step(c: &mut Criterion) {
    let (plan, state) = sim1_state();
    let mut group = c.benchmark_group("engine_step_31^4");
    group.sample_size(10);
    for backend in [Backend::Stencil, Backend::Graph] {
        let mut plan = plan.clone();
        plan.backend = backend;
        let mut integrator = match backend {
            Backend::Stencil => Integrator::new(&plan).unwrap(),
            Backend::Graph => {
                Integrator::with_graph(&plan, build_graph(&plan.grid, &plan.mask)).unwrap()
            }
        };
        let mut s = state.clone();
        group.bench_function(BenchmarkId::from_parameter(format!("{backend:?}")), |b| {
            b.iter(|| integrator.step(&mut s).unwrap())
        });
    }
    group.finish();
}

fn tracking(c: &mut Criterion) {
    let (plan, state) = sim1_state();
    let mut group = c.benchmark_group("track_31^4");
    group.sample_size(10);
    group.bench_function("all_planes", |b| {
        b.iter(|| track_superfilament(&state, &plan.mask, Thresholds::default()).unwrap())
    });
    group.finish();
}

fn flow(c: &mut Criterion) {
    let opts = EvolveOptions {
        remesh_every: None,
        sample_every: 1000,
        rotation_sign: 1.0,
    };
    let circle = EmbeddedComplex::circle(3, 512, 10.0, &[0.0; 3], (0, 1)).unwrap();
    let sphere = EmbeddedComplex::icosphere(4, 3, 5.0, &[0.0; 4]).unwrap();
    let tension = TensionParams::new(1.0, 0.5);
    let mut group = c.benchmark_group("flow_100_steps");
    group.bench_function("circle_512", |b| {
        b.iter(|| evolve(&circle, tension, 0.002, 100, &opts).unwrap())
    });
    group.bench_function("icosphere_3", |b| {
        b.iter(|| evolve(&sphere, tension, 1e-4, 100, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, engine_step, tracking, flow);
criterion_main!(benches);
