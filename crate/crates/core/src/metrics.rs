//! Displacement and miss-rate metrics over ranked predictions.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverset::{delta, TrajectorySet};
use crate::error::{Error, ReconciliationError, Result};
use crate::predictors::PredictionRecord;
use crate::scene::{PredictionInstance, Trajectory};

pub const DEFAULT_KS: [usize; 3] = [1, 5, 10];
pub const DEFAULT_MISS_THRESHOLD_M: f64 = 2.0;

/// The first `min(k, len)` modes.
fn top_k(modes: &[Trajectory], k: usize) -> Result<&[Trajectory]> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if modes.is_empty() {
        return Err(Error::invalid("no predicted modes"));
    }
    Ok(&modes[..k.min(modes.len())])
}

fn mean_displacement(gt: &Trajectory, mode: &Trajectory) -> Result<f64> {
    Ok(gt.pointwise_distances(mode)?.sum::<f64>() / gt.len() as f64)
}

fn final_displacement(gt: &Trajectory, mode: &Trajectory) -> Result<f64> {
    if !gt.same_shape(mode) {
        return Err(Error::invalid("trajectory shapes differ"));
    }
    Ok(gt.last().distance(mode.last()))
}

fn min_over(modes: &[Trajectory], f: impl Fn(&Trajectory) -> Result<f64>) -> Result<f64> {
    modes.iter().try_fold(f64::INFINITY, |best, m| Ok(best.min(f(m)?)))
}

pub fn min_ade_k(ground_truth: &Trajectory, ranked_modes: &[Trajectory], k: usize) -> Result<f64> {
    min_over(top_k(ranked_modes, k)?, |m| mean_displacement(ground_truth, m))
}

pub fn min_fde_k(ground_truth: &Trajectory, ranked_modes: &[Trajectory], k: usize) -> Result<f64> {
    min_over(top_k(ranked_modes, k)?, |m| final_displacement(ground_truth, m))
}

/// True when every top-k mode strays more than `threshold` from the ground
/// truth at some timestep.
pub fn is_miss(ground_truth: &Trajectory, ranked_modes: &[Trajectory], k: usize, threshold: f64) -> Result<bool> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::invalid("miss threshold must be positive"));
    }
    Ok(min_over(top_k(ranked_modes, k)?, |m| delta(ground_truth, m))? > threshold)
}

/// One evaluated instance: its ground truth and predicted modes, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPrediction {
    pub ground_truth: Trajectory,
    pub ranked_modes: Vec<Trajectory>,
}

pub fn miss_rate_k(dataset: &[RankedPrediction], k: usize, threshold: f64) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::UndefinedRate);
    }
    let mut misses = 0usize;
    for p in dataset {
        if is_miss(&p.ground_truth, &p.ranked_modes, k, threshold)? {
            misses += 1;
        }
    }
    Ok(misses as f64 / dataset.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMetrics {
    pub min_ade: f64,
    pub min_fde: f64,
    pub miss_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_k: BTreeMap<usize, KMetrics>,
    pub num_instances: usize,
}

#[derive(Clone, Copy)]
struct InstanceMetrics {
    ade: f64,
    fde: f64,
    miss: bool,
}

/// Aggregates all metrics over `dataset` for each k.
///
/// Per-instance work runs in parallel; sums are taken sequentially in input
/// order so the result does not depend on scheduling.
pub fn evaluate_ranked(dataset: &[RankedPrediction], ks: &[usize], threshold: f64) -> Result<MetricsReport> {
    if dataset.is_empty() {
        return Err(Error::UndefinedRate);
    }
    if ks.is_empty() {
        return Err(Error::invalid("no k values requested"));
    }
    let per_instance: Vec<Vec<InstanceMetrics>> = dataset
        .par_iter()
        .map(|p| {
            ks.iter()
                .map(|&k| {
                    Ok(InstanceMetrics {
                        ade: min_ade_k(&p.ground_truth, &p.ranked_modes, k)?,
                        fde: min_fde_k(&p.ground_truth, &p.ranked_modes, k)?,
                        miss: is_miss(&p.ground_truth, &p.ranked_modes, k, threshold)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let n = dataset.len() as f64;
    let mut per_k = BTreeMap::new();
    for (j, &k) in ks.iter().enumerate() {
        let (mut ade, mut fde, mut misses) = (0.0, 0.0, 0usize);
        for m in per_instance.iter().map(|row| row[j]) {
            ade += m.ade;
            fde += m.fde;
            misses += m.miss as usize;
        }
        per_k.insert(k, KMetrics { min_ade: ade / n, min_fde: fde / n, miss_rate: misses as f64 / n });
    }
    Ok(MetricsReport { per_k, num_instances: dataset.len() })
}

/// Pairs prediction records with labeled split instances, in split order.
///
/// Unlabeled instances without a prediction are skipped. Every other
/// mismatch is collected into one [`ReconciliationError`].
pub fn reconcile(
    predictions: &[PredictionRecord],
    split: &[PredictionInstance],
    modes: Option<&TrajectorySet>,
) -> Result<Vec<RankedPrediction>> {
    let mut by_id: HashMap<&str, &PredictionRecord> = HashMap::new();
    for rec in predictions {
        if by_id.insert(rec.instance_id.as_str(), rec).is_some() {
            return Err(Error::invalid("duplicate prediction record").for_instance(&rec.instance_id));
        }
    }
    let split_ids: HashSet<&str> = split.iter().map(|i| i.instance_id.as_str()).collect();

    let mut problems = ReconciliationError::default();
    let mut pairs = Vec::new();
    for inst in split {
        match (by_id.get(inst.instance_id.as_str()), &inst.ground_truth) {
            (Some(rec), Some(gt)) => pairs.push((gt, *rec)),
            (Some(_), None) => problems.missing_ground_truth.push(inst.instance_id.clone()),
            (None, Some(_)) => problems.missing_predictions.push(inst.instance_id.clone()),
            (None, None) => {}
        }
    }
    problems.unknown_instances = predictions
        .iter()
        .filter(|r| !split_ids.contains(r.instance_id.as_str()))
        .map(|r| r.instance_id.clone())
        .collect();
    if !problems.is_empty() {
        return Err(problems.into());
    }

    pairs
        .into_iter()
        .map(|(gt, rec)| {
            Ok(RankedPrediction { ground_truth: gt.clone(), ranked_modes: rec.ranked_trajectories(modes)? })
        })
        .collect()
}

/// Reconciles predictions against the split and aggregates the metrics.
pub fn evaluate(
    predictions: &[PredictionRecord],
    split: &[PredictionInstance],
    modes: Option<&TrajectorySet>,
    ks: &[usize],
) -> Result<MetricsReport> {
    let dataset = reconcile(predictions, split, modes)?;
    evaluate_ranked(&dataset, ks, DEFAULT_MISS_THRESHOLD_M)
}

impl MetricsReport {
    /// Aligned text table: minADE per k, then miss rate per k, then minFDE per k.
    pub fn to_table(&self, label: &str) -> String {
        let mut headers = vec!["Method".to_string()];
        let mut cells = vec![label.to_string()];
        type Column = (&'static str, fn(&KMetrics) -> f64);
        let columns: [Column; 3] =
            [("minADE", |m| m.min_ade), ("MissRate", |m| m.miss_rate), ("minFDE", |m| m.min_fde)];
        for (name, get) in columns {
            for (k, m) in &self.per_k {
                headers.push(format!("{name}_{k}"));
                cells.push(format!("{:.2}", get(m)));
            }
        }
        let widths: Vec<usize> = headers.iter().zip(&cells).map(|(h, c)| h.len().max(c.len())).collect();
        let mut out = String::new();
        for row in [&headers, &cells] {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, &w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        let _ = writeln!(out, "({} instances)", self.num_instances);
        out
    }
}
