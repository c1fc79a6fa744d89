use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use superscroll::flow::{area_rate_check, StopReason};
use superscroll::{evolve, EmbeddedComplex, EvolveOptions, TensionParams};

use crate::error::{CliError, CliResult};
use crate::{versions, write_json};

pub struct FlowArgs {
    pub tension: TensionParams,
    pub dt: f64,
    pub steps: usize,
    pub options: EvolveOptions,
}

pub fn cmd_flow(mesh: &Path, out: &Path, args: &FlowArgs) -> CliResult<()> {
    let complex = EmbeddedComplex::load(mesh)?;
    args.tension
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if !(args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Config(format!(
            "dt must be positive, got {}",
            args.dt
        )));
    }
    if args.options.sample_every == 0 {
        return Err(CliError::Config("--sample-every must be at least 1".into()));
    }
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let started = Instant::now();
    let traj = evolve(&complex, args.tension, args.dt, args.steps, &args.options)?;
    let wall = started.elapsed().as_secs_f64();

    let mut samples = Vec::new();
    for (k, (t, c)) in traj.samples.iter().enumerate() {
        let name = format!("sample_{k:06}.xmesh");
        let path = out.join(&name);
        c.save(&path)?;
        samples.push(json!({"t": t, "file": name}));
    }
    let mut csv = String::from(
        "t,area_start,area_end,int_h2_start,int_h2_end,rate,predicted_rate,residual,max_h\n",
    );
    for (r, a) in traj.records.iter().zip(area_rate_check(&traj)) {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.area_start,
            r.area_end,
            r.h2_start,
            r.h2_end,
            a.rate,
            a.predicted,
            a.residual.map_or(String::new(), |x| x.to_string()),
            r.max_h
        )
        .unwrap();
    }
    let area_path = out.join("area.csv");
    fs::write(&area_path, csv).map_err(|e| CliError::io(&area_path, e))?;

    let status = match (traj.stop, traj.collapse_time) {
        (StopReason::Collapsed, Some(t)) => format!("collapsed at t={t}"),
        (StopReason::Collapsed, None) => "collapsed".to_string(),
        (StopReason::StabilityLimit, _) => {
            format!("stopped at the stability limit at t={}", traj.final_time())
        }
        (StopReason::Completed, _) => format!("completed at t={}", traj.final_time()),
    };
    println!(
        "{status}; {} steps, {} samples",
        traj.records.len(),
        samples.len()
    );
    write_json(
        &out.join("manifest.json"),
        &json!({
            "command": "flow",
            "versions": versions(),
            "mesh": mesh,
            "tension": args.tension,
            "dt": args.dt,
            "steps_requested": args.steps,
            "steps_taken": traj.records.len(),
            "remesh_every": args.options.remesh_every,
            "sample_every": args.options.sample_every,
            "rotation_sign": args.options.rotation_sign,
            "stop": traj.stop,
            "status": status,
            "collapse_time": traj.collapse_time,
            "final_time": traj.final_time(),
            "wall_seconds": wall,
            "samples": samples,
        }),
    )?;
    if traj.stop == StopReason::StabilityLimit {
        return Err(superscroll::Error::Numerical(status).into());
    }
    Ok(())
}
