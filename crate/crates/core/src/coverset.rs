//! ε-cover candidate sets.
//!
//! Given a base set of observed futures, [`greedy_cover`] picks a subset such
//! that every base trajectory lies strictly within `epsilon` (under
//! [`delta`]) of some picked trajectory. The picked set is the mode list that
//! classifiers score over.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{Point2, Trajectory, DEFAULT_HORIZON_S, DEFAULT_SAMPLE_RATE_HZ};

/// Name recorded in cover-set files for the trajectory distance in use.
pub const DELTA_NAME: &str = "max_pointwise_euclidean";

/// Maximum over timesteps of the Euclidean distance between corresponding points.
pub fn delta(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    Ok(a.pointwise_distances(b)?.fold(0.0, f64::max))
}

/// Shape-checked [`delta`] for hot loops.
fn delta_unchecked(a: &[Point2], b: &[Point2]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.distance(*q)).fold(0.0, f64::max)
}

/// An ordered list of same-shaped trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    trajectories: Vec<Trajectory>,
    /// Tolerance the set was built with; `None` for a raw base set.
    pub epsilon: Option<f64>,
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        if let Some(first) = trajectories.first() {
            if let Some(i) = trajectories.iter().position(|t| !t.same_shape(first)) {
                return Err(Error::invalid(format!("trajectory {i} differs in shape from trajectory 0")));
            }
        }
        Ok(TrajectorySet { trajectories, epsilon: None })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn get(&self, index: usize) -> Option<&Trajectory> {
        self.trajectories.get(index)
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    fn check_compatible(&self, other: &TrajectorySet) -> Result<()> {
        match (self.trajectories.first(), other.trajectories.first()) {
            (Some(a), Some(b)) if !a.same_shape(b) => Err(Error::invalid("trajectory sets have different shapes")),
            _ => Ok(()),
        }
    }
}

/// Outcome of checking a candidate set against a base set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub is_cover: bool,
    /// Max over base trajectories of the distance to the nearest candidate;
    /// `+∞` for an empty candidate set.
    pub worst_uncovered_distance: f64,
    pub cover_size: usize,
}

/// For every base trajectory, the indices of base trajectories within `epsilon`.
fn neighbourhoods(base: &[Trajectory], epsilon: f64) -> Vec<Vec<u32>> {
    (0..base.len())
        .into_par_iter()
        .map(|i| {
            let a = base[i].points();
            base.iter()
                .enumerate()
                .filter(|(_, b)| delta_unchecked(a, b.points()) < epsilon)
                .map(|(j, _)| j as u32)
                .collect()
        })
        .collect()
}

/// Greedy max-coverage selection of an ε-cover from `base`.
///
/// Each round takes the base trajectory that covers the most still-uncovered
/// base trajectories, the lowest index winning ties. The result keeps base
/// order of selection and is identical for any rayon thread count.
pub fn greedy_cover(base: &TrajectorySet, epsilon: f64) -> Result<TrajectorySet> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if base.is_empty() {
        return Err(Error::invalid("base trajectory set is empty"));
    }
    let picked = greedy_cover_indices(base, epsilon);
    Ok(TrajectorySet {
        trajectories: picked.into_iter().map(|i| base.trajectories[i].clone()).collect(),
        epsilon: Some(epsilon),
    })
}

/// Indices into `base` chosen by [`greedy_cover`], in selection order.
pub fn greedy_cover_indices(base: &TrajectorySet, epsilon: f64) -> Vec<usize> {
    let covers = neighbourhoods(&base.trajectories, epsilon);
    // δ is symmetric, so the trajectories covering j are exactly covers[j].
    let mut gain: Vec<usize> = covers.iter().map(Vec::len).collect();
    let mut covered = vec![false; base.len()];
    let mut remaining = base.len();
    let mut picked = Vec::new();
    while remaining > 0 {
        let (best, _) = gain.iter().enumerate().fold((0, 0), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc });
        picked.push(best);
        for &j in &covers[best] {
            let j = j as usize;
            if !covered[j] {
                covered[j] = true;
                remaining -= 1;
                for &k in &covers[j] {
                    gain[k as usize] -= 1;
                }
            }
        }
    }
    picked
}

/// Checks whether `candidate` ε-covers `base`.
pub fn is_cover(candidate: &TrajectorySet, base: &TrajectorySet, epsilon: f64) -> Result<CoverReport> {
    candidate.check_compatible(base)?;
    if candidate.is_empty() {
        return Ok(CoverReport { is_cover: false, worst_uncovered_distance: f64::INFINITY, cover_size: 0 });
    }
    let worst = base
        .trajectories
        .par_iter()
        .map(|b| {
            candidate.trajectories.iter().map(|c| delta_unchecked(c.points(), b.points())).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(CoverReport { is_cover: worst < epsilon, worst_uncovered_distance: worst, cover_size: candidate.len() })
}

/// Header of a cover-set file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSetHeader {
    pub epsilon: f64,
    pub delta: String,
    pub base_size: usize,
    pub cover_size: usize,
    pub sample_rate: f64,
    pub horizon: f64,
}

/// The canonical mode-list file consumed by predictors and metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSetFile {
    pub header: CoverSetHeader,
    pub trajectories: Vec<Vec<[f64; 2]>>,
}

impl CoverSetFile {
    pub fn from_cover(cover: &TrajectorySet, base_size: usize) -> Result<Self> {
        let epsilon = cover.epsilon.ok_or_else(|| Error::invalid("trajectory set was not built as a cover"))?;
        let (sample_rate, horizon) = cover
            .trajectories
            .first()
            .map(|t| (t.sample_rate(), t.horizon()))
            .unwrap_or((DEFAULT_SAMPLE_RATE_HZ, DEFAULT_HORIZON_S));
        Ok(CoverSetFile {
            header: CoverSetHeader {
                epsilon,
                delta: DELTA_NAME.to_string(),
                base_size,
                cover_size: cover.len(),
                sample_rate,
                horizon,
            },
            trajectories: cover.trajectories.iter().map(|t| t.points().iter().map(|&p| p.into()).collect()).collect(),
        })
    }

    pub fn to_set(&self) -> Result<TrajectorySet> {
        if self.header.cover_size != self.trajectories.len() {
            return Err(Error::invalid(format!(
                "cover-set header says {} trajectories, file has {}",
                self.header.cover_size,
                self.trajectories.len()
            )));
        }
        let trajectories = self
            .trajectories
            .iter()
            .map(|rows| {
                Trajectory::new(rows.iter().map(|&r| r.into()).collect(), self.header.sample_rate, self.header.horizon)
            })
            .collect::<Result<_>>()?;
        let mut set = TrajectorySet::new(trajectories)?;
        set.epsilon = Some(self.header.epsilon);
        Ok(set)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }
}
