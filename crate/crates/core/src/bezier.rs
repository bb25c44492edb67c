//! Cubic Bézier curves and least-squares lane fitting with pinned endpoints.
//!
//! A lane polyline `q_0..q_{n-1}` is parameterized by cumulative chord
//! length. With the end control points fixed to `q_0` and `q_{n-1}`, the
//! squared error is quadratic in the two inner control points and separates
//! per axis, so each axis reduces to a 2x2 normal-equation solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicBezier {
    pub p0: Point2,
    pub p1: Point2,
    pub p2: Point2,
    pub p3: Point2,
}

/// Bernstein weights of degree 3 at `t`.
fn bernstein(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t]
}

impl CubicBezier {
    pub fn new(p0: Point2, p1: Point2, p2: Point2, p3: Point2) -> Self {
        CubicBezier { p0, p1, p2, p3 }
    }

    pub fn control_points(&self) -> [Point2; 4] {
        [self.p0, self.p1, self.p2, self.p3]
    }

    pub fn is_finite(&self) -> bool {
        self.control_points().iter().all(Point2::is_finite)
    }

    /// Point on the curve at `t ∈ [0, 1]`; the ends return `p0` / `p3` exactly.
    pub fn evaluate(&self, t: f64) -> Result<Point2> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("curve parameter {t} outside [0, 1]")));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> Point2 {
        if t == 0.0 {
            return self.p0;
        }
        if t == 1.0 {
            return self.p3;
        }
        let [b0, b1, b2, b3] = bernstein(t);
        self.p0 * b0 + self.p1 * b1 + self.p2 * b2 + self.p3 * b3
    }
}

/// Cumulative chord length of `polyline`, normalized to `[0, 1]`.
///
/// Repeated consecutive points yield repeated parameters.
pub fn chord_length_params(polyline: &[Point2]) -> Result<Vec<f64>> {
    if polyline.len() < 2 {
        return Err(Error::degenerate(format!("polyline needs at least 2 points, got {}", polyline.len())));
    }
    if polyline.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("polyline has non-finite points"));
    }
    let mut cumulative = Vec::with_capacity(polyline.len());
    let mut total = 0.0;
    cumulative.push(0.0);
    for w in polyline.windows(2) {
        total += w[0].distance(w[1]);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(Error::degenerate("polyline has zero length"));
    }
    let last = cumulative.len() - 1;
    for c in &mut cumulative[1..last] {
        *c /= total;
    }
    cumulative[last] = 1.0;
    Ok(cumulative)
}

/// Fits a cubic Bézier to a lane polyline, minimizing the mean squared error
/// at the chord-length parameters with `p0`/`p3` pinned to the lane ends.
///
/// Without interior samples the inner points sit at thirds of the chord. If
/// the interior samples cannot determine both inner points (a single interior
/// sample), the minimum-norm correction to that straight-line placement is
/// used.
pub fn fit_lane(polyline: &[Point2]) -> Result<CubicBezier> {
    let params = chord_length_params(polyline)?;
    let first = polyline[0];
    let last = polyline[polyline.len() - 1];
    let chord = last - first;
    let init1 = first + chord * (1.0 / 3.0);
    let init2 = first + chord * (2.0 / 3.0);

    // Normal equations A [p1 p2]^T = g, shared matrix for both axes.
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    let mut g1 = Point2::ORIGIN;
    let mut g2 = Point2::ORIGIN;
    for (q, &t) in polyline.iter().zip(&params).skip(1).take(polyline.len().saturating_sub(2)) {
        let [b0, b1, b2, b3] = bernstein(t);
        let residual = *q - first * b0 - last * b3;
        a11 += b1 * b1;
        a12 += b1 * b2;
        a22 += b2 * b2;
        g1 = g1 + residual * b1;
        g2 = g2 + residual * b2;
    }

    let trace = a11 + a22;
    let det = a11 * a22 - a12 * a12;
    let (p1, p2) = if trace == 0.0 {
        (init1, init2)
    } else if det > 1e-12 * trace * trace {
        let inv = 1.0 / det;
        ((g1 * a22 - g2 * a12) * inv, (g2 * a11 - g1 * a12) * inv)
    } else {
        // Rank one: A = v v^T with trace |v|^2, so A^+ = A / trace^2.
        let e1 = g1 - (init1 * a11 + init2 * a12);
        let e2 = g2 - (init1 * a12 + init2 * a22);
        let scale = 1.0 / (trace * trace);
        (init1 + (e1 * a11 + e2 * a12) * scale, init2 + (e1 * a12 + e2 * a22) * scale)
    };

    let curve = CubicBezier::new(first, p1, p2, last);
    if !curve.is_finite() {
        return Err(Error::degenerate("lane fit produced non-finite control points"));
    }
    Ok(curve)
}

/// Mean squared distance between the curve at chord-length parameters and
/// the polyline vertices.
pub fn fit_error(curve: &CubicBezier, polyline: &[Point2]) -> Result<f64> {
    let params = chord_length_params(polyline)?;
    let sum: f64 = polyline
        .iter()
        .zip(&params)
        .map(|(q, &t)| {
            let d = curve.eval_unchecked(t) - *q;
            d.dot(d)
        })
        .sum();
    Ok(sum / polyline.len() as f64)
}
