//! Scene, agent, lane and trajectory types plus the frame transforms and
//! polyline resampling shared by every other module.

mod frame;
mod io;
mod resample;

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use frame::{transform_to_agent_frame, transform_to_world_frame, WorldScene};
pub use io::{read_split, split_from_str, split_to_string, write_split, SceneRecord};
pub use resample::resample_polyline;

/// Default sample rate of histories and futures.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 2.0;
/// Default prediction horizon.
pub const DEFAULT_HORIZON_S: f64 = 6.0;
/// Number of future points at the default rate and horizon.
pub const DEFAULT_FUTURE_LEN: usize = 12;

/// A 2-D position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        rhs * self
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = angle - TAU * ((angle + PI) / TAU).floor();
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Position plus heading, counter-clockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    heading: f64,
}

impl Pose {
    pub fn new(position: Point2, heading: f64) -> Self {
        Pose { position, heading: normalize_angle(heading) }
    }

    /// The target agent's own pose in its frame: origin, facing +y.
    pub fn agent_origin() -> Self {
        Pose::new(Point2::ORIGIN, PI / 2.0)
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.heading.is_finite()
    }

    /// Unit vector along the heading.
    pub fn forward(&self) -> Point2 {
        Point2::new(self.heading.cos(), self.heading.sin())
    }

    /// Expresses this (world-frame) pose in the frame of `reference`.
    pub fn relative_to(&self, reference: &Pose) -> Result<Pose> {
        let position = transform_to_agent_frame(&[self.position], reference)?[0];
        Ok(Pose::new(position, self.heading - reference.heading + PI / 2.0))
    }
}

/// Kinematic state of the target agent at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub category: String,
    /// m/s, never negative.
    pub speed: f64,
    /// m/s².
    pub acceleration: f64,
    /// Full turns per second (the prompt prints it as `[2π/s]`).
    pub yaw_rate: f64,
    pub pose: Pose,
}

impl AgentState {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed.is_finite() && self.acceleration.is_finite() && self.yaw_rate.is_finite())
            || !self.pose.is_finite()
        {
            return Err(Error::invalid("agent state has non-finite fields"));
        }
        if self.speed < 0.0 {
            return Err(Error::invalid(format!("negative speed {}", self.speed)));
        }
        Ok(())
    }

    /// Yaw rate converted to rad/s.
    pub fn yaw_rate_rad(&self) -> f64 {
        self.yaw_rate * TAU
    }
}

/// Equally spaced future positions in the agent frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<Point2>,
    sample_rate: f64,
    horizon: f64,
}

impl Trajectory {
    pub fn new(points: Vec<Point2>, sample_rate: f64, horizon: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite() && horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("sample rate and horizon must be positive"));
        }
        let expected = (sample_rate * horizon).round() as usize;
        if points.len() != expected {
            return Err(Error::invalid(format!(
                "trajectory has {} points, expected {expected} ({sample_rate} Hz x {horizon} s)",
                points.len()
            )));
        }
        if let Some(bad) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("trajectory point {bad} is not finite")));
        }
        Ok(Trajectory { points, sample_rate, horizon })
    }

    /// A trajectory at the default 2 Hz; the horizon follows from the length.
    pub fn at_default_rate(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("trajectory has no points"));
        }
        let horizon = points.len() as f64 / DEFAULT_SAMPLE_RATE_HZ;
        Self::new(points, DEFAULT_SAMPLE_RATE_HZ, horizon)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn last(&self) -> Point2 {
        *self.points.last().expect("trajectories are never empty")
    }

    /// True when both trajectories have the same length, rate and horizon.
    pub fn same_shape(&self, other: &Trajectory) -> bool {
        self.points.len() == other.points.len()
            && self.sample_rate == other.sample_rate
            && self.horizon == other.horizon
    }

    /// Per-timestep Euclidean distances; errors on mismatched lengths.
    pub fn pointwise_distances<'a>(&'a self, other: &'a Trajectory) -> Result<impl Iterator<Item = f64> + 'a> {
        if self.points.len() != other.points.len() {
            return Err(Error::invalid(format!(
                "trajectory lengths differ: {} vs {}",
                self.points.len(),
                other.points.len()
            )));
        }
        Ok(self.points.iter().zip(&other.points).map(|(a, b)| a.distance(*b)))
    }

    /// Applies `f` to every point, keeping rate and horizon.
    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Trajectory {
        Trajectory {
            points: self.points.iter().map(|&p| f(p)).collect(),
            sample_rate: self.sample_rate,
            horizon: self.horizon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneRole {
    Current,
    Outgoing,
}

/// A lane centerline in the agent frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    polyline: Vec<Point2>,
    role: LaneRole,
}

impl Lane {
    pub fn new(polyline: Vec<Point2>, role: LaneRole) -> Result<Self> {
        if polyline.len() < 2 {
            return Err(Error::invalid(format!("lane needs at least 2 points, got {}", polyline.len())));
        }
        if let Some(bad) = polyline.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("lane point {bad} is not finite")));
        }
        if let Some(i) = polyline.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("lane points {i} and {} coincide", i + 1)));
        }
        Ok(Lane { polyline, role })
    }

    pub fn polyline(&self) -> &[Point2] {
        &self.polyline
    }

    pub fn role(&self) -> LaneRole {
        self.role
    }

    pub fn length(&self) -> f64 {
        self.polyline.windows(2).map(|w| w[0].distance(w[1])).sum()
    }
}

/// Another traffic participant drawn as an oriented box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentBox {
    pub pose: Pose,
    pub length: f64,
    pub width: f64,
}

impl AgentBox {
    /// Corners in order front-left, front-right, rear-right, rear-left.
    pub fn corners(&self) -> [Point2; 4] {
        box_corners(&self.pose, self.length, self.width)
    }
}

pub(crate) fn box_corners(pose: &Pose, length: f64, width: f64) -> [Point2; 4] {
    let forward = pose.forward() * (length / 2.0);
    // left normal of the heading
    let left = Point2::new(-pose.forward().y, pose.forward().x) * (width / 2.0);
    let c = pose.position;
    [c + forward + left, c + forward - left, c - forward - left, c - forward + left]
}

/// A closed ring of vertices; the last vertex connects back to the first.
pub type Polygon = Vec<Point2>;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MapLayers {
    pub drivable_area: Vec<Polygon>,
    pub crosswalks: Vec<Polygon>,
    pub other_agents: Vec<AgentBox>,
}

impl MapLayers {
    pub fn validate(&self) -> Result<()> {
        for (layer, polys) in [("drivable_area", &self.drivable_area), ("crosswalks", &self.crosswalks)] {
            for (i, ring) in polys.iter().enumerate() {
                if ring.len() < 3 {
                    return Err(Error::invalid(format!(
                        "{layer} polygon {i} has {} vertices, need at least 3",
                        ring.len()
                    )));
                }
                if ring.iter().any(|p| !p.is_finite()) {
                    return Err(Error::invalid(format!("{layer} polygon {i} is not finite")));
                }
            }
        }
        for (i, a) in self.other_agents.iter().enumerate() {
            if !a.pose.is_finite() || !(a.length.is_finite() && a.width.is_finite()) {
                return Err(Error::invalid(format!("other agent {i} is not finite")));
            }
            if a.length < 0.0 || a.width < 0.0 {
                return Err(Error::invalid(format!("other agent {i} has negative extent")));
            }
        }
        Ok(())
    }
}

/// One past position of the target agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistorySample {
    /// Seconds relative to prediction time, negative.
    pub time: f64,
    pub position: Point2,
}

/// One prediction task, fully expressed in the agent frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionInstance {
    pub instance_id: String,
    pub agent: AgentState,
    pub history: Vec<HistorySample>,
    /// `None` when no current lane could be resolved for the agent.
    pub current_lane: Option<Lane>,
    pub outgoing_lanes: Vec<Lane>,
    pub map: MapLayers,
    pub ground_truth: Option<Trajectory>,
    /// Free-form exporter flags, e.g. kinematic fields that were missing.
    pub flags: Vec<String>,
}

impl PredictionInstance {
    pub fn validate(&self) -> Result<()> {
        self.validate_inner().map_err(|e| e.for_instance(&self.instance_id))
    }

    fn validate_inner(&self) -> Result<()> {
        self.agent.validate()?;
        let origin = Pose::agent_origin();
        if self.agent.pose.position.distance(origin.position) > 1e-9
            || (self.agent.pose.heading() - origin.heading()).abs() > 1e-9
        {
            return Err(Error::invalid("agent pose is not the agent-frame origin"));
        }
        for (i, s) in self.history.iter().enumerate() {
            if !(s.time.is_finite() && s.position.is_finite()) {
                return Err(Error::invalid(format!("history row {i} is not finite")));
            }
            if s.time >= 0.0 {
                return Err(Error::invalid(format!("history row {i} has non-negative time offset {}", s.time)));
            }
        }
        if self.history.windows(2).any(|w| w[0].time >= w[1].time) {
            return Err(Error::invalid("history time offsets must be strictly increasing"));
        }
        self.map.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heading_is_wrapped_into_half_open_range() {
        assert_eq!(Pose::new(Point2::ORIGIN, PI).heading(), -PI);
        assert!((Pose::new(Point2::ORIGIN, 3.0 * PI / 2.0).heading() + PI / 2.0).abs() < 1e-12);
        assert_eq!(Pose::new(Point2::ORIGIN, 0.25).heading(), 0.25);
        for k in -20..20 {
            let h = normalize_angle(k as f64 * 0.7);
            assert!((-PI..PI).contains(&h));
        }
    }

    #[test]
    fn trajectory_length_must_match_rate_and_horizon() {
        let pts = vec![Point2::ORIGIN; 12];
        assert!(Trajectory::new(pts.clone(), 2.0, 6.0).is_ok());
        assert!(Trajectory::new(pts[..11].to_vec(), 2.0, 6.0).is_err());
        let t = Trajectory::at_default_rate(pts).unwrap();
        assert_eq!((t.sample_rate(), t.horizon()), (2.0, 6.0));
    }

    #[test]
    fn trajectory_rejects_nan() {
        let mut pts = vec![Point2::ORIGIN; 12];
        pts[3].y = f64::NAN;
        assert!(Trajectory::at_default_rate(pts).is_err());
    }

    #[test]
    fn lane_rejects_repeated_points() {
        let p = Point2::new(1.0, 1.0);
        assert!(Lane::new(vec![p, p], LaneRole::Current).is_err());
        assert!(Lane::new(vec![p], LaneRole::Current).is_err());
        let lane = Lane::new(vec![Point2::ORIGIN, Point2::new(3.0, 4.0)], LaneRole::Outgoing).unwrap();
        assert_eq!(lane.length(), 5.0);
    }

    #[test]
    fn map_rejects_two_vertex_polygons() {
        let map = MapLayers { crosswalks: vec![vec![Point2::ORIGIN, Point2::new(1.0, 0.0)]], ..Default::default() };
        assert!(map.validate().is_err());
    }

    #[test]
    fn box_corners_follow_heading() {
        let b = AgentBox { pose: Pose::new(Point2::ORIGIN, PI / 2.0), length: 4.0, width: 2.0 };
        let c = b.corners();
        assert!(c[0].distance(Point2::new(-1.0, 2.0)) < 1e-12);
        assert!(c[1].distance(Point2::new(1.0, 2.0)) < 1e-12);
        assert!(c[2].distance(Point2::new(1.0, -2.0)) < 1e-12);
    }

    #[test]
    fn agent_state_rejects_negative_speed() {
        let agent = AgentState {
            category: "vehicle.car".into(),
            speed: -1.0,
            acceleration: 0.0,
            yaw_rate: 0.0,
            pose: Pose::agent_origin(),
        };
        assert!(agent.validate().is_err());
    }
}
