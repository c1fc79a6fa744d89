//! The four reference protocols (planar, spherical, punctured and anchored
//! superfilaments) at full and desk scale.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{
    apply_stimulus, run, subdomain_restart, FieldState, RunPlan, StimulusEvent, Target,
};
use crate::error::{Error, Result};
use crate::grid::{ConductionMask, GridSpec, RegionSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimName {
    #[serde(rename = "SIM1")]
    Sim1,
    #[serde(rename = "SIM2")]
    Sim2,
    #[serde(rename = "SIM3")]
    Sim3,
    #[serde(rename = "SIM4")]
    Sim4,
}

impl FromStr for SimName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SIM1" => Ok(SimName::Sim1),
            "SIM2" => Ok(SimName::Sim2),
            "SIM3" => Ok(SimName::Sim3),
            "SIM4" => Ok(SimName::Sim4),
            _ => Err(Error::Config(format!("unknown preset {s:?}"))),
        }
    }
}

impl fmt::Display for SimName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            SimName::Sim1 => 1,
            SimName::Sim2 => 2,
            SimName::Sim3 => 3,
            SimName::Sim4 => 4,
        };
        write!(f, "SIM{n}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Full,
    Desk,
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Scale::Full),
            "desk" => Ok(Scale::Desk),
            _ => Err(Error::Config(format!("unknown scale {s:?}"))),
        }
    }
}

/// Time of the planar-superfilament snapshot reused by the restart presets.
pub const RESTART_TIME: f64 = 40.0;

/// How a restart preset derives its initial state from a planar run.
#[derive(Debug, Clone)]
pub struct Prerequisite {
    /// Planar-superfilament run, ending at [`RESTART_TIME`].
    pub source: RunPlan,
    pub crop: RegionSpec,
    /// Edits applied on the cropped snapshot before refinement.
    pub edits: Vec<StimulusEvent>,
    pub new_spacing: f64,
    /// Obstacles in the refined domain.
    pub obstacles: Vec<RegionSpec>,
}

impl Prerequisite {
    /// Runs the source plan and produces the refined initial state and mask.
    pub fn execute(&self) -> Result<(FieldState, ConductionMask)> {
        let summary = run(&self.source, None, |_, _| Ok(()))?;
        let (mut cropped, mask) = subdomain_restart(
            &summary.final_state,
            &self.source.mask,
            &self.crop,
            self.source.grid.spacing(),
        )?;
        for ev in &self.edits {
            apply_stimulus(&mut cropped, ev, &mask)?;
        }
        let whole = RegionSpec::Box {
            lo: cropped.grid.origin().to_vec(),
            hi: (0..cropped.grid.ndim())
                .map(|k| cropped.grid.origin()[k] + cropped.grid.extent(k))
                .collect(),
        };
        let (refined, refined_mask) = subdomain_restart(&cropped, &mask, &whole, self.new_spacing)?;
        let obstacle_mask = ConductionMask::with_obstacles(refined.grid.clone(), &self.obstacles)?;
        let active = refined_mask
            .active()
            .iter()
            .zip(obstacle_mask.active())
            .map(|(&a, &b)| a && b)
            .collect();
        let mask = ConductionMask::new(refined.grid.clone(), active)?;
        Ok((refined, mask))
    }
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: SimName,
    pub scale: Scale,
    /// Plan of the main run; for restart presets its grid and mask are those
    /// the prerequisite produces.
    pub plan: RunPlan,
    pub prerequisite: Option<Prerequisite>,
}

impl Preset {
    /// The same restart protocol on a different crop of the planar run.
    ///
    /// Edits and obstacles keep their coordinates; the main plan's grid is
    /// rebuilt for the new crop. Fails for presets without a prerequisite
    /// and for crops that are not boxes.
    pub fn with_crop(&self, crop: RegionSpec) -> Result<Preset> {
        let Some(pre) = &self.prerequisite else {
            return Err(Error::Config(format!("{} has no restart crop", self.name)));
        };
        if !matches!(crop, RegionSpec::Box { .. }) {
            return Err(Error::Config("restart crop must be a box".into()));
        }
        crop.validate(pre.source.grid.ndim())?;
        let grid = refined_grid(&crop, pre.new_spacing)?;
        let mut plan = self.plan.clone();
        plan.mask = ConductionMask::with_obstacles(grid.clone(), &pre.obstacles)?;
        plan.grid = grid;
        Ok(Preset {
            prerequisite: Some(Prerequisite {
                crop,
                ..pre.clone()
            }),
            plan,
            ..self.clone()
        })
    }
}

fn slab(axis: usize, lo: f64, hi: f64, span: f64) -> RegionSpec {
    let mut l = vec![0.0; 4];
    let mut h = vec![span; 4];
    l[axis] = lo;
    h[axis] = hi;
    RegionSpec::Box { lo: l, hi: h }
}

fn u_set(time: f64, region: RegionSpec) -> StimulusEvent {
    StimulusEvent {
        time,
        region,
        target: Target::U,
        value: 1.0,
    }
}

fn planar_plan(scale: Scale, t_end: f64) -> Result<RunPlan> {
    let n = match scale {
        Scale::Full => 61,
        Scale::Desk => 31,
    };
    let grid = GridSpec::cube(4, n, 1.0)?;
    let mut plan = RunPlan::new(grid, 0.05, t_end);
    plan.stimuli = vec![
        u_set(0.0, slab(0, 0.0, 6.0, 61.0)),
        u_set(15.0, slab(1, 0.0, 12.0, 61.0)),
    ];
    plan.snapshot_every = 5.0;
    Ok(plan)
}

/// Grid produced by cropping `crop` out of a unit-spacing planar run and
/// refining it to `spacing`.
fn refined_grid(crop: &RegionSpec, spacing: f64) -> Result<GridSpec> {
    let RegionSpec::Box { lo, hi } = crop else {
        unreachable!("crop regions are boxes")
    };
    let shape = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| ((h - l) / spacing).round() as usize + 1)
        .collect();
    GridSpec::new(shape, spacing, lo.clone())
}

/// Default run lengths (ms) of the main runs.
pub fn default_t_end(name: SimName) -> f64 {
    match name {
        SimName::Sim1 | SimName::Sim2 => 200.0,
        SimName::Sim3 | SimName::Sim4 => RESTART_TIME + 160.0,
    }
}

pub fn sim_preset(name: SimName, scale: Scale) -> Result<Preset> {
    let t_end = default_t_end(name);
    match name {
        SimName::Sim1 => Ok(Preset {
            name,
            scale,
            plan: planar_plan(scale, t_end)?,
            prerequisite: None,
        }),
        SimName::Sim2 => {
            let mut plan = planar_plan(scale, t_end)?;
            plan.stimuli = vec![
                u_set(
                    0.0,
                    RegionSpec::Ball {
                        center: vec![-20.0, -20.0, 31.0, 45.0],
                        radius: 40.0,
                    },
                ),
                u_set(15.0, slab(0, 0.0, 10.0, 61.0)),
            ];
            Ok(Preset {
                name,
                scale,
                plan,
                prerequisite: None,
            })
        }
        SimName::Sim3 => {
            let crop = RegionSpec::Box {
                lo: vec![0.0; 4],
                hi: vec![15.0; 4],
            };
            let hole = StimulusEvent {
                time: RESTART_TIME,
                region: RegionSpec::Hypercylinder {
                    axes: [2, 3],
                    center: [8.0, 8.0],
                    radius: 5.0,
                },
                target: Target::U,
                value: 0.0,
            };
            restart_preset(name, scale, crop, vec![hole], Vec::new())
        }
        SimName::Sim4 => {
            // Box and obstacle lines are given in the crop's local frame;
            // desk scale halves every coordinate to fit the smaller source.
            let f = match scale {
                Scale::Full => 1.0,
                Scale::Desk => 0.5,
            };
            let lo = [10.0, 2.0, 18.0, 18.0].map(|x| x * f);
            let hi = [36.0, 28.0, 34.0, 34.0].map(|x| x * f);
            let crop = RegionSpec::Box {
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            };
            let line = |k: f64, l1: bool| -> Vec<f64> {
                let local = if l1 {
                    [6.0 * k + 10.0, -6.0 * k + 14.0, 25.0 * k, 0.0]
                } else {
                    [-6.0 * k + 16.0, 6.0 * k + 10.0, 25.0 * k, 25.0]
                };
                (0..4).map(|i| lo[i] + f * local[i]).collect()
            };
            let obstacles = vec![
                RegionSpec::SweptBall {
                    start: line(0.0, true),
                    end: line(1.0, true),
                    radius: 2.0,
                },
                RegionSpec::SweptBall {
                    start: line(0.0, false),
                    end: line(1.0, false),
                    radius: 2.0,
                },
            ];
            restart_preset(name, scale, crop, Vec::new(), obstacles)
        }
    }
}

fn restart_preset(
    name: SimName,
    scale: Scale,
    crop: RegionSpec,
    edits: Vec<StimulusEvent>,
    obstacles: Vec<RegionSpec>,
) -> Result<Preset> {
    let spacing = 0.5;
    let source = planar_plan(scale, RESTART_TIME)?;
    let grid = refined_grid(&crop, spacing)?;
    let mask = ConductionMask::with_obstacles(grid.clone(), &obstacles)?;
    let mut plan = RunPlan::new(grid, 0.025, default_t_end(name));
    plan.mask = mask;
    plan.snapshot_every = 2.5;
    Ok(Preset {
        name,
        scale,
        plan,
        prerequisite: Some(Prerequisite {
            source,
            crop,
            edits,
            new_spacing: spacing,
            obstacles,
        }),
    })
}

/// Position on the first anchoring line of the anchored preset (full scale,
/// local crop frame).
pub fn anchor_line_1(k: f64) -> [f64; 4] {
    [6.0 * k + 10.0, -6.0 * k + 14.0, 25.0 * k, 0.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_protocol_layout() {
        let p = sim_preset(SimName::Sim1, Scale::Full).unwrap();
        assert_eq!(p.plan.grid.shape(), &[61; 4]);
        assert_eq!(p.plan.grid.spacing(), 1.0);
        assert_eq!(p.plan.dt, 0.05);
        assert_eq!(p.plan.stimuli.len(), 2);
        assert_eq!(
            p.plan.stimuli[1],
            StimulusEvent {
                time: 15.0,
                region: RegionSpec::Box {
                    lo: vec![0.0; 4],
                    hi: vec![61.0, 12.0, 61.0, 61.0],
                },
                target: Target::U,
                value: 1.0,
            }
        );
        assert_eq!(
            p.plan.stimuli[0].region,
            RegionSpec::Box {
                lo: vec![0.0; 4],
                hi: vec![6.0, 61.0, 61.0, 61.0],
            }
        );
        let desk = sim_preset(SimName::Sim1, Scale::Desk).unwrap();
        assert_eq!(desk.plan.grid.shape(), &[31; 4]);
        desk.plan.validate().unwrap();
    }

    #[test]
    fn spherical_protocol() {
        let p = sim_preset(SimName::Sim2, Scale::Full).unwrap();
        assert_eq!(
            p.plan.stimuli[0].region,
            RegionSpec::Ball {
                center: vec![-20.0, -20.0, 31.0, 45.0],
                radius: 40.0,
            }
        );
        assert_eq!(p.plan.stimuli[1].time, 15.0);
    }

    #[test]
    fn punctured_protocol_grid() {
        for scale in [Scale::Full, Scale::Desk] {
            let p = sim_preset(SimName::Sim3, scale).unwrap();
            assert_eq!(p.plan.grid.shape(), &[31; 4]);
            assert_eq!(p.plan.grid.spacing(), 0.5);
            assert_eq!(p.plan.dt, 0.025);
            p.plan.validate().unwrap();
            let pre = p.prerequisite.unwrap();
            assert_eq!(pre.source.t_end, 40.0);
        }
    }

    #[test]
    fn recropping_rebuilds_the_grid() {
        let p = sim_preset(SimName::Sim3, Scale::Desk).unwrap();
        let wide = p
            .with_crop(RegionSpec::Box {
                lo: vec![0.0; 4],
                hi: vec![30.0, 30.0, 15.0, 15.0],
            })
            .unwrap();
        assert_eq!(wide.plan.grid.shape(), &[61, 61, 31, 31]);
        wide.plan.validate().unwrap();
        assert_eq!(
            wide.prerequisite.as_ref().unwrap().edits,
            p.prerequisite.as_ref().unwrap().edits
        );
        assert!(sim_preset(SimName::Sim1, Scale::Desk)
            .unwrap()
            .with_crop(RegionSpec::Box {
                lo: vec![0.0; 4],
                hi: vec![1.0; 4]
            })
            .is_err());
    }

    #[test]
    fn anchor_line_endpoint() {
        assert_eq!(anchor_line_1(1.0), [16.0, 8.0, 25.0, 0.0]);
        assert_eq!(anchor_line_1(0.0), [10.0, 14.0, 0.0, 0.0]);
    }

    #[test]
    fn anchored_protocol_has_obstacles() {
        let p = sim_preset(SimName::Sim4, Scale::Full).unwrap();
        assert_eq!(p.plan.grid.shape(), &[53, 53, 33, 33]);
        assert!(p.plan.mask.active_count() < p.plan.grid.node_count());
        let p = sim_preset(SimName::Sim4, Scale::Desk).unwrap();
        assert!(p.plan.mask.active_count() < p.plan.grid.node_count());
    }

    #[test]
    fn names_parse() {
        assert_eq!("sim3".parse::<SimName>().unwrap(), SimName::Sim3);
        assert!("SIM5".parse::<SimName>().is_err());
        assert_eq!("desk".parse::<Scale>().unwrap(), Scale::Desk);
        assert_eq!(SimName::Sim4.to_string(), "SIM4");
    }
}
