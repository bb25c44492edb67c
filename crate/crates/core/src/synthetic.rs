//! Seeded generator of plausible driving scenes and futures.
//!
//! Used for fixtures, benchmarks and the `synth` subcommand. Scenes are
//! built in the agent frame, then placed at a random world pose, so
//! [`WorldScene::to_instance`] exercises the frame transform. Instance `i`
//! of a seed depends only on `(seed, i)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::predictors::{rollout_default, KinematicModelKind};
use crate::scene::{
    transform_to_world_frame, AgentBox, AgentState, HistorySample, Point2, Polygon, Pose, PredictionInstance,
    Trajectory, WorldScene,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    /// Total current-lane length in meters, drawn uniformly.
    pub lane_length: (f64, f64),
    pub max_outgoing_lanes: usize,
    pub max_other_agents: usize,
    pub with_ground_truth: bool,
    /// Half-width of the square the agent is placed in.
    pub world_extent: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            lane_length: (40.0, 120.0),
            max_outgoing_lanes: 3,
            max_other_agents: 6,
            with_ground_truth: true,
            world_extent: 2000.0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.lane_length;
        if !(lo.is_finite() && hi.is_finite() && lo >= 2.0 && lo <= hi) {
            return Err(Error::invalid("lane length range must satisfy 2 <= min <= max"));
        }
        if !(self.world_extent.is_finite() && self.world_extent >= 0.0) {
            return Err(Error::invalid("world extent must be finite and non-negative"));
        }
        Ok(())
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Points every ~1 m along a circular arc (straight when curvature is 0).
fn arc(start: Point2, heading: f64, curvature: f64, length: f64) -> Vec<Point2> {
    let n = length.ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            let s = length * i as f64 / n as f64;
            if curvature.abs() < 1e-9 {
                start + Point2::new(heading.cos(), heading.sin()) * s
            } else {
                let h = heading + curvature * s;
                start + Point2::new(h.sin() - heading.sin(), heading.cos() - h.cos()) * (1.0 / curvature)
            }
        })
        .collect()
}

fn heading_at_end(heading: f64, curvature: f64, length: f64) -> f64 {
    heading + curvature * length
}

/// Ribbon polygon of half-width `w` around a polyline, using every fourth vertex.
fn corridor(line: &[Point2], w: f64) -> Polygon {
    let last = line.len() - 1;
    let line: Vec<Point2> = (0..=last).filter(|&i| i % 4 == 0 || i == last).map(|i| line[i]).collect();
    let normal = |i: usize| {
        let (a, b) = if i + 1 < line.len() { (line[i], line[i + 1]) } else { (line[i - 1], line[i]) };
        let d = b - a;
        Point2::new(-d.y, d.x) * (1.0 / d.norm())
    };
    let left: Vec<Point2> = (0..line.len()).map(|i| line[i] + normal(i) * w).collect();
    let right: Vec<Point2> = (0..line.len()).rev().map(|i| line[i] - normal(i) * w).collect();
    left.into_iter().chain(right).collect()
}

fn rect(center: Point2, heading: f64, length: f64, width: f64) -> Polygon {
    crate::scene::box_corners(&Pose::new(center, heading), length, width).to_vec()
}

/// A 6 s future at 2 Hz in the agent frame: a kinematic rollout around
/// `agent` with perturbed parameters and a small random walk on top.
pub fn sample_future(rng: &mut impl Rng, agent: &AgentState) -> Trajectory {
    let perturbed = AgentState {
        speed: (agent.speed + rng.gen_range(-1.5..1.5)).max(0.0),
        acceleration: agent.acceleration + rng.gen_range(-0.5..0.5),
        yaw_rate: agent.yaw_rate + rng.gen_range(-0.01..0.01),
        ..agent.clone()
    };
    let base = rollout_default(KinematicModelKind::ConstAccelYawRate, &perturbed).expect("valid agent state");
    let mut drift = Point2::ORIGIN;
    let points = base
        .points()
        .iter()
        .map(|&p| {
            drift = drift + Point2::new(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15));
            p + drift
        })
        .collect();
    Trajectory::at_default_rate(points).expect("twelve finite points")
}

fn sample_agent(rng: &mut impl Rng, pose: Pose) -> AgentState {
    AgentState {
        category: ["vehicle.car", "vehicle.truck", "vehicle.bus.rigid"][rng.gen_range(0..3)].to_string(),
        speed: rng.gen_range(0.0..15.0),
        acceleration: rng.gen_range(-1.0..1.0),
        yaw_rate: rng.gen_range(-0.02..0.02),
        pose,
    }
}

/// One random scene; deterministic in `(seed, index)`.
pub fn world_scene(seed: u64, index: u64, cfg: &SyntheticConfig) -> Result<WorldScene> {
    cfg.validate()?;
    let mut rng = rng_for(seed, index);
    let rng = &mut rng;
    let e = cfg.world_extent;
    let world_pose = Pose::new(Point2::new(rng.gen_range(-e..=e), rng.gen_range(-e..=e)), rng.gen_range(-PI..PI));
    let agent = sample_agent(rng, world_pose);

    // agent-frame geometry: heading +y
    let (lo, hi) = cfg.lane_length;
    let lane_len = if lo < hi { rng.gen_range(lo..hi) } else { lo };
    let back = lane_len * rng.gen_range(0.2..0.4);
    let curvature = rng.gen_range(-0.01..0.01);
    let lateral = rng.gen_range(-0.8..0.8);
    // aligned with the agent heading where it passes abeam of the agent
    let h0 = FRAC_PI_2 - curvature * back;
    let abeam = *arc(Point2::ORIGIN, h0, curvature, back).last().expect("non-empty arc");
    let start = Point2::new(lateral, 0.0) - abeam;
    let lane = arc(start, h0, curvature, lane_len);
    let end = *lane.last().expect("non-empty arc");
    let end_heading = heading_at_end(h0, curvature, lane_len);

    let outgoing: Vec<Vec<Point2>> = (0..rng.gen_range(0..=cfg.max_outgoing_lanes))
        .map(|_| arc(end, end_heading, rng.gen_range(-0.06..0.06), rng.gen_range(15.0..40.0)))
        .collect();

    let mut drivable = vec![corridor(&lane, rng.gen_range(3.0..6.0))];
    drivable.extend(outgoing.iter().map(|l| corridor(l, 3.5)));
    let crosswalks = if rng.gen_bool(0.5) {
        let y = rng.gen_range(5.0..35.0);
        vec![rect(Point2::new(lateral, y), 0.0, 12.0, 4.0)]
    } else {
        Vec::new()
    };
    let other_agents: Vec<AgentBox> = (0..rng.gen_range(0..=cfg.max_other_agents))
        .map(|_| AgentBox {
            pose: Pose::new(
                Point2::new(rng.gen_range(-20.0..20.0), rng.gen_range(-15.0..45.0)),
                rng.gen_range(-PI..PI),
            ),
            length: rng.gen_range(3.5..6.0),
            width: rng.gen_range(1.6..2.4),
        })
        .collect();

    let history: Vec<HistorySample> = (1..=4)
        .rev()
        .map(|i| {
            let t = -0.5 * i as f64;
            HistorySample { time: t, position: Point2::new(rng.gen_range(-0.05..0.05), agent.speed * t) }
        })
        .collect();
    let agent_frame = AgentState { pose: Pose::agent_origin(), ..agent.clone() };
    let ground_truth = cfg.with_ground_truth.then(|| sample_future(rng, &agent_frame).points().to_vec());

    let to_world = |pts: &[Point2]| transform_to_world_frame(pts, &world_pose);
    let history_world = to_world(&history.iter().map(|h| h.position).collect::<Vec<_>>())?;
    Ok(WorldScene {
        instance_id: format!("synth-{seed}-{index:05}"),
        agent,
        history: history
            .iter()
            .zip(history_world)
            .map(|(h, position)| HistorySample { time: h.time, position })
            .collect(),
        current_lane: Some(to_world(&lane)?),
        outgoing_lanes: outgoing.iter().map(|l| to_world(l)).collect::<Result<_>>()?,
        drivable_area: drivable.iter().map(|r| to_world(r)).collect::<Result<_>>()?,
        crosswalks: crosswalks.iter().map(|r| to_world(r)).collect::<Result<_>>()?,
        other_agents: other_agents
            .iter()
            .map(|a| {
                let p = to_world(&[a.pose.position])?[0];
                Ok(AgentBox { pose: Pose::new(p, a.pose.heading() + world_pose.heading() - FRAC_PI_2), ..*a })
            })
            .collect::<Result<_>>()?,
        ground_truth: ground_truth.map(|gt| to_world(&gt)).transpose()?,
    })
}

/// `count` agent-frame instances for `seed`.
pub fn generate_split(seed: u64, count: usize, cfg: &SyntheticConfig) -> Result<Vec<PredictionInstance>> {
    (0..count as u64).into_par_iter().map(|i| world_scene(seed, i, cfg)?.to_instance()).collect()
}

/// `count` futures around random agent states, e.g. as a cover-set base.
pub fn base_trajectories(seed: u64, count: usize) -> Vec<Trajectory> {
    let mut rng = rng_for(seed, u64::MAX);
    (0..count)
        .map(|_| {
            let agent = sample_agent(&mut rng, Pose::agent_origin());
            sample_future(&mut rng, &agent)
        })
        .collect()
}
