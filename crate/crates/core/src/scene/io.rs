//! The neutral scene file: a JSON array of per-instance records, all
//! coordinates already in the agent frame.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    AgentBox, AgentState, HistorySample, Lane, LaneRole, MapLayers, Point2, Pose, PredictionInstance, Trajectory,
    DEFAULT_HORIZON_S, DEFAULT_SAMPLE_RATE_HZ,
};
use crate::error::{Error, Result};

/// One record of the neutral scene file, field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub instance_id: String,
    pub category: String,
    pub speed: f64,
    pub acceleration: f64,
    pub yaw_rate: f64,
    /// Rows of `[t, x, y]`.
    pub history: Vec<[f64; 3]>,
    /// Empty when the exporter found no current lane.
    pub current_lane: Vec<[f64; 2]>,
    pub outgoing_lanes: Vec<Vec<[f64; 2]>>,
    pub drivable_area: Vec<Vec<[f64; 2]>>,
    pub crosswalks: Vec<Vec<[f64; 2]>>,
    /// Rows of `[x, y, heading, length, width]`.
    pub other_agents: Vec<[f64; 5]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

fn points(rows: &[[f64; 2]]) -> Vec<Point2> {
    rows.iter().map(|&r| r.into()).collect()
}

fn rows(points: &[Point2]) -> Vec<[f64; 2]> {
    points.iter().map(|&p| p.into()).collect()
}

impl TryFrom<SceneRecord> for PredictionInstance {
    type Error = Error;

    fn try_from(r: SceneRecord) -> Result<Self> {
        let id = r.instance_id.clone();
        let build = move || -> Result<PredictionInstance> {
            let current_lane = if r.current_lane.is_empty() {
                None
            } else {
                Some(Lane::new(points(&r.current_lane), LaneRole::Current)?)
            };
            let outgoing_lanes =
                r.outgoing_lanes.iter().map(|l| Lane::new(points(l), LaneRole::Outgoing)).collect::<Result<_>>()?;
            let ground_truth = r
                .ground_truth
                .as_deref()
                .map(|gt| Trajectory::new(points(gt), DEFAULT_SAMPLE_RATE_HZ, DEFAULT_HORIZON_S))
                .transpose()?;
            let instance = PredictionInstance {
                instance_id: r.instance_id,
                agent: AgentState {
                    category: r.category,
                    speed: r.speed,
                    acceleration: r.acceleration,
                    yaw_rate: r.yaw_rate,
                    pose: Pose::agent_origin(),
                },
                history: r
                    .history
                    .iter()
                    .map(|&[time, x, y]| HistorySample { time, position: Point2::new(x, y) })
                    .collect(),
                current_lane,
                outgoing_lanes,
                map: MapLayers {
                    drivable_area: r.drivable_area.iter().map(|p| points(p)).collect(),
                    crosswalks: r.crosswalks.iter().map(|p| points(p)).collect(),
                    other_agents: r
                        .other_agents
                        .iter()
                        .map(|&[x, y, heading, length, width]| AgentBox {
                            pose: Pose::new(Point2::new(x, y), heading),
                            length,
                            width,
                        })
                        .collect(),
                },
                ground_truth,
                flags: r.flags,
            };
            instance.validate()?;
            Ok(instance)
        };
        build().map_err(|e| e.for_instance(&id))
    }
}

impl From<&PredictionInstance> for SceneRecord {
    fn from(inst: &PredictionInstance) -> Self {
        SceneRecord {
            instance_id: inst.instance_id.clone(),
            category: inst.agent.category.clone(),
            speed: inst.agent.speed,
            acceleration: inst.agent.acceleration,
            yaw_rate: inst.agent.yaw_rate,
            history: inst.history.iter().map(|s| [s.time, s.position.x, s.position.y]).collect(),
            current_lane: inst.current_lane.as_ref().map(|l| rows(l.polyline())).unwrap_or_default(),
            outgoing_lanes: inst.outgoing_lanes.iter().map(|l| rows(l.polyline())).collect(),
            drivable_area: inst.map.drivable_area.iter().map(|p| rows(p)).collect(),
            crosswalks: inst.map.crosswalks.iter().map(|p| rows(p)).collect(),
            other_agents: inst
                .map
                .other_agents
                .iter()
                .map(|a| [a.pose.position.x, a.pose.position.y, a.pose.heading(), a.length, a.width])
                .collect(),
            ground_truth: inst.ground_truth.as_ref().map(|t| rows(t.points())),
            flags: inst.flags.clone(),
        }
    }
}

/// Parses and validates a split.
pub fn split_from_str(json: &str) -> Result<Vec<PredictionInstance>> {
    let records: Vec<SceneRecord> = serde_json::from_str(json)?;
    records.into_iter().map(PredictionInstance::try_from).collect()
}

pub fn split_to_string(instances: &[PredictionInstance]) -> Result<String> {
    let records: Vec<SceneRecord> = instances.iter().map(SceneRecord::from).collect();
    Ok(serde_json::to_string(&records)?)
}

pub fn read_split(path: impl AsRef<Path>) -> Result<Vec<PredictionInstance>> {
    split_from_str(&fs::read_to_string(path)?)
}

pub fn write_split(path: impl AsRef<Path>, instances: &[PredictionInstance]) -> Result<()> {
    fs::write(path, split_to_string(instances)?)?;
    Ok(())
}
