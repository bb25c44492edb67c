use serde::{Deserialize, Serialize};

use super::{
    AgentBox, AgentState, HistorySample, Lane, LaneRole, MapLayers, Point2, Polygon, Pose, PredictionInstance,
    Trajectory,
};
use crate::error::{Error, Result};

/// Maps world-frame points into the frame of `agent_world_pose`: the agent
/// lands on the origin, its heading on +y and its right-hand side on +x.
pub fn transform_to_agent_frame(points: &[Point2], agent_world_pose: &Pose) -> Result<Vec<Point2>> {
    if !agent_world_pose.is_finite() {
        return Err(Error::invalid("agent pose is not finite"));
    }
    let forward = agent_world_pose.forward();
    let right = Point2::new(forward.y, -forward.x);
    points
        .iter()
        .map(|&p| {
            if !p.is_finite() {
                return Err(Error::invalid(format!("point ({}, {}) is not finite", p.x, p.y)));
            }
            let d = p - agent_world_pose.position;
            Ok(Point2::new(d.dot(right), d.dot(forward)))
        })
        .collect()
}

/// Inverse of [`transform_to_agent_frame`].
pub fn transform_to_world_frame(points: &[Point2], agent_world_pose: &Pose) -> Result<Vec<Point2>> {
    if !agent_world_pose.is_finite() {
        return Err(Error::invalid("agent pose is not finite"));
    }
    let forward = agent_world_pose.forward();
    let right = Point2::new(forward.y, -forward.x);
    points
        .iter()
        .map(|&p| {
            if !p.is_finite() {
                return Err(Error::invalid(format!("point ({}, {}) is not finite", p.x, p.y)));
            }
            Ok(agent_world_pose.position + right * p.x + forward * p.y)
        })
        .collect()
}

/// A scene in world coordinates, before it is centered on the target agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldScene {
    pub instance_id: String,
    pub agent: AgentState,
    pub history: Vec<HistorySample>,
    pub current_lane: Option<Vec<Point2>>,
    pub outgoing_lanes: Vec<Vec<Point2>>,
    pub drivable_area: Vec<Polygon>,
    pub crosswalks: Vec<Polygon>,
    pub other_agents: Vec<AgentBox>,
    /// Future positions at the default 2 Hz.
    pub ground_truth: Option<Vec<Point2>>,
}

impl WorldScene {
    /// Re-expresses the whole scene in the agent frame.
    pub fn to_instance(&self) -> Result<PredictionInstance> {
        let pose = self.agent.pose;
        let to_agent = |pts: &[Point2]| transform_to_agent_frame(pts, &pose);
        let history_pts: Vec<Point2> = self.history.iter().map(|s| s.position).collect();
        let history = self
            .history
            .iter()
            .zip(to_agent(&history_pts)?)
            .map(|(s, position)| HistorySample { time: s.time, position })
            .collect();
        let current_lane =
            self.current_lane.as_deref().map(|l| Lane::new(to_agent(l)?, LaneRole::Current)).transpose()?;
        let outgoing_lanes =
            self.outgoing_lanes.iter().map(|l| Lane::new(to_agent(l)?, LaneRole::Outgoing)).collect::<Result<_>>()?;
        let polys = |layer: &[Polygon]| -> Result<Vec<Polygon>> { layer.iter().map(|ring| to_agent(ring)).collect() };
        let other_agents = self
            .other_agents
            .iter()
            .map(|a| Ok(AgentBox { pose: a.pose.relative_to(&pose)?, length: a.length, width: a.width }))
            .collect::<Result<_>>()?;
        let ground_truth =
            self.ground_truth.as_deref().map(|gt| Trajectory::at_default_rate(to_agent(gt)?)).transpose()?;
        let instance = PredictionInstance {
            instance_id: self.instance_id.clone(),
            agent: AgentState { pose: Pose::agent_origin(), ..self.agent.clone() },
            history,
            current_lane,
            outgoing_lanes,
            map: MapLayers {
                drivable_area: polys(&self.drivable_area)?,
                crosswalks: polys(&self.crosswalks)?,
                other_agents,
            },
            ground_truth,
            flags: Vec::new(),
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Applies one rigid motion (rotation about the world origin, then a
    /// translation) to every world-frame quantity, agent pose included.
    pub fn rigidly_moved(&self, rotation: f64, translation: Point2) -> WorldScene {
        let (s, c) = rotation.sin_cos();
        let mv = |p: Point2| Point2::new(c * p.x - s * p.y, s * p.x + c * p.y) + translation;
        let mv_all = |pts: &[Point2]| pts.iter().map(|&p| mv(p)).collect::<Vec<_>>();
        let mv_pose = |pose: &Pose| Pose::new(mv(pose.position), pose.heading() + rotation);
        WorldScene {
            instance_id: self.instance_id.clone(),
            agent: AgentState { pose: mv_pose(&self.agent.pose), ..self.agent.clone() },
            history: self.history.iter().map(|h| HistorySample { time: h.time, position: mv(h.position) }).collect(),
            current_lane: self.current_lane.as_deref().map(mv_all),
            outgoing_lanes: self.outgoing_lanes.iter().map(|l| mv_all(l)).collect(),
            drivable_area: self.drivable_area.iter().map(|r| mv_all(r)).collect(),
            crosswalks: self.crosswalks.iter().map(|r| mv_all(r)).collect(),
            other_agents: self.other_agents.iter().map(|a| AgentBox { pose: mv_pose(&a.pose), ..*a }).collect(),
            ground_truth: self.ground_truth.as_deref().map(mv_all),
        }
    }
}
