//! Kinematic baselines, the physics oracle, and mode scoring.
//!
//! Predictors that classify over a cover set emit [`ModeScores`]; that is
//! also the seam through which externally trained models plug into the
//! metrics path (see [`PredictionRecord`]).

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coverset::{delta, TrajectorySet};
use crate::error::{Error, Result};
use crate::scene::{AgentState, Point2, Trajectory, DEFAULT_HORIZON_S, DEFAULT_SAMPLE_RATE_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KinematicModelKind {
    ConstVelocityYaw,
    ConstVelocityYawRate,
    ConstAccelYaw,
    ConstAccelYawRate,
}

impl KinematicModelKind {
    pub const ALL: [KinematicModelKind; 4] = [
        KinematicModelKind::ConstVelocityYaw,
        KinematicModelKind::ConstVelocityYawRate,
        KinematicModelKind::ConstAccelYaw,
        KinematicModelKind::ConstAccelYawRate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KinematicModelKind::ConstVelocityYaw => "const_velocity_yaw",
            KinematicModelKind::ConstVelocityYawRate => "const_velocity_yaw_rate",
            KinematicModelKind::ConstAccelYaw => "const_accel_yaw",
            KinematicModelKind::ConstAccelYawRate => "const_accel_yaw_rate",
        }
    }

    fn uses_accel(self) -> bool {
        matches!(self, KinematicModelKind::ConstAccelYaw | KinematicModelKind::ConstAccelYawRate)
    }

    fn uses_yaw_rate(self) -> bool {
        matches!(self, KinematicModelKind::ConstVelocityYawRate | KinematicModelKind::ConstAccelYawRate)
    }
}

impl std::str::FromStr for KinematicModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown kinematic model {s:?}")))
    }
}

/// `∫₀¹ e^{iφs} ds` and `∫₀¹ s·e^{iφs} ds`, series-expanded near zero.
fn phase_integrals(phi: f64) -> (Complex64, Complex64) {
    if phi.abs() < 0.5 {
        let z = Complex64::new(0.0, phi);
        let (mut e1, mut e2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut power = Complex64::new(1.0, 0.0); // z^n / n!
        for n in 0..30 {
            e1 += power / (n as f64 + 1.0);
            e2 += power / (n as f64 + 2.0);
            power = power * z / (n as f64 + 1.0);
        }
        (e1, e2)
    } else {
        let iz = Complex64::new(0.0, phi);
        let e = Complex64::from_polar(1.0, phi);
        let e1 = (e - 1.0) / iz;
        let e2 = e / iz + (e - 1.0) / (phi * phi);
        (e1, e2)
    }
}

/// Displacement after `t` seconds starting at heading `heading0`, speed
/// `v0`, constant acceleration (speed clamped at zero) and constant turn rate.
fn displacement(v0: f64, accel: f64, omega: f64, heading0: f64, t: f64) -> Point2 {
    let t = if accel < 0.0 { t.min(v0 / -accel) } else { t };
    let (e1, e2) = phase_integrals(omega * t);
    let d = Complex64::from_polar(1.0, heading0) * (e1 * (v0 * t) + e2 * (accel * t * t));
    Point2::new(d.re, d.im)
}

/// Integrates `kind` from the agent-frame origin, heading +y.
pub fn rollout(kind: KinematicModelKind, agent: &AgentState, horizon: f64, rate: f64) -> Result<Trajectory> {
    agent.validate()?;
    let accel = if kind.uses_accel() { agent.acceleration } else { 0.0 };
    let omega = if kind.uses_yaw_rate() { agent.yaw_rate_rad() } else { 0.0 };
    let n = (rate * horizon).round() as usize;
    let points = (1..=n).map(|i| displacement(agent.speed, accel, omega, FRAC_PI_2, i as f64 / rate)).collect();
    Trajectory::new(points, rate, horizon)
}

/// [`rollout`] at the default 2 Hz over 6 s.
pub fn rollout_default(kind: KinematicModelKind, agent: &AgentState) -> Result<Trajectory> {
    rollout(kind, agent, DEFAULT_HORIZON_S, DEFAULT_SAMPLE_RATE_HZ)
}

fn ade(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let n = a.len() as f64;
    Ok(a.pointwise_distances(b)?.sum::<f64>() / n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleChoice {
    pub kind: KinematicModelKind,
    pub trajectory: Trajectory,
    pub ade: f64,
}

/// The kinematic rollout closest to `ground_truth` in average displacement.
///
/// Consults the ground truth, so it is an evaluation-only reference. Ties go
/// to the earlier model in [`KinematicModelKind::ALL`].
pub fn physics_oracle(agent: &AgentState, ground_truth: Option<&Trajectory>) -> Result<OracleChoice> {
    let gt = ground_truth.ok_or_else(|| Error::invalid("physics oracle needs ground truth"))?;
    let mut best: Option<OracleChoice> = None;
    for kind in KinematicModelKind::ALL {
        let trajectory = rollout(kind, agent, gt.horizon(), gt.sample_rate())?;
        let err = ade(&trajectory, gt)?;
        if best.as_ref().is_none_or(|b| err < b.ade) {
            best = Some(OracleChoice { kind, trajectory, ade: err });
        }
    }
    Ok(best.expect("at least one model"))
}

/// One score per cover-set mode; higher is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeScores(pub Vec<f64>);

impl ModeScores {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("mode scores must be finite"));
        }
        Ok(ModeScores(scores))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mode indices by descending score, lower index first on ties.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.0.len()).collect();
        order.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]).then(a.cmp(&b)));
        order
    }

    pub fn argmax(&self) -> Option<usize> {
        self.ranking().first().copied()
    }
}

fn score_against(reference: &Trajectory, modes: &TrajectorySet) -> Result<ModeScores> {
    let scores = modes.trajectories().iter().map(|m| Ok(-delta(reference, m)?)).collect::<Result<_>>()?;
    ModeScores::new(scores)
}

/// Scores each mode by its negated δ-distance to the ground truth; the
/// top-ranked mode is the best any classifier over `modes` could pick.
pub fn score_modes_nearest_oracle(ground_truth: &Trajectory, modes: &TrajectorySet) -> Result<ModeScores> {
    score_against(ground_truth, modes)
}

/// Scores each mode by its negated δ-distance to the `kind` rollout.
pub fn score_modes_physics(agent: &AgentState, modes: &TrajectorySet, kind: KinematicModelKind) -> Result<ModeScores> {
    let (horizon, rate) = modes
        .trajectories()
        .first()
        .map(|t| (t.horizon(), t.sample_rate()))
        .unwrap_or((DEFAULT_HORIZON_S, DEFAULT_SAMPLE_RATE_HZ));
    score_against(&rollout(kind, agent, horizon, rate)?, modes)
}

/// One line of a predictions file.
///
/// Either `ranked_modes` (indices into the cover set, best first, with
/// `scores` indexed by mode) or an explicit `trajectory` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub instance_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ranked_modes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<[f64; 2]>>,
}

impl PredictionRecord {
    pub fn from_scores(instance_id: &str, scores: &ModeScores) -> Self {
        PredictionRecord {
            instance_id: instance_id.to_string(),
            ranked_modes: scores.ranking(),
            scores: scores.0.clone(),
            trajectory: None,
        }
    }

    pub fn from_trajectory(instance_id: &str, trajectory: &Trajectory) -> Self {
        PredictionRecord {
            instance_id: instance_id.to_string(),
            ranked_modes: Vec::new(),
            scores: Vec::new(),
            trajectory: Some(trajectory.points().iter().map(|&p| p.into()).collect()),
        }
    }

    /// Candidate trajectories, best first.
    pub fn ranked_trajectories(&self, modes: Option<&TrajectorySet>) -> Result<Vec<Trajectory>> {
        let resolve = || -> Result<Vec<Trajectory>> {
            if let Some(rows) = &self.trajectory {
                if !self.ranked_modes.is_empty() {
                    return Err(Error::invalid("record has both a trajectory and ranked modes"));
                }
                let points = rows.iter().map(|&r| r.into()).collect();
                return Ok(vec![Trajectory::at_default_rate(points)?]);
            }
            if self.ranked_modes.is_empty() {
                return Err(Error::invalid("record has neither a trajectory nor ranked modes"));
            }
            let modes = modes.ok_or_else(|| Error::invalid("ranked modes given but no mode set loaded"))?;
            self.ranked_modes
                .iter()
                .map(|&i| {
                    modes
                        .get(i)
                        .cloned()
                        .ok_or_else(|| Error::invalid(format!("mode index {i} out of range ({} modes)", modes.len())))
                })
                .collect()
        };
        resolve().map_err(|e| e.for_instance(&self.instance_id))
    }
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_predictions(path: impl AsRef<Path>, records: &[PredictionRecord]) -> Result<()> {
    fs::write(path, serde_json::to_string(records)?)?;
    Ok(())
}
