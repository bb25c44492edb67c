use super::Point2;
use crate::error::{Error, Result};

/// Samples `polyline` every `spacing` meters of arc length, starting at the
/// first vertex. The exact last vertex always closes the output: it replaces
/// a final sample that already coincides with it, and is appended otherwise
/// (so the last gap may be shorter than `spacing`).
///
/// A polyline of zero total length yields just its first point.
pub fn resample_polyline(polyline: &[Point2], spacing: f64) -> Result<Vec<Point2>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
    }
    if polyline.len() < 2 {
        return Err(Error::invalid(format!("polyline needs at least 2 points, got {}", polyline.len())));
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
    let first = polyline[0];
    let last = polyline[polyline.len() - 1];
    if total == 0.0 {
        return Ok(vec![first]);
    }

    let tolerance = spacing * 1e-9;
    let count = ((total + tolerance) / spacing).floor() as usize;
    let mut out = Vec::with_capacity(count + 2);
    let mut segment = 0;
    for k in 0..=count {
        let s = (k as f64 * spacing).min(total);
        while segment + 2 < cumulative.len() && cumulative[segment + 1] < s {
            segment += 1;
        }
        let seg_len = cumulative[segment + 1] - cumulative[segment];
        let p = if seg_len > 0.0 {
            let u = ((s - cumulative[segment]) / seg_len).clamp(0.0, 1.0);
            polyline[segment].lerp(polyline[segment + 1], u)
        } else {
            polyline[segment]
        };
        out.push(p);
    }
    out[0] = first;

    let tail = out[out.len() - 1];
    if out.len() > 1 && total - count as f64 * spacing <= tolerance {
        *out.last_mut().expect("non-empty") = last;
    } else if tail != last {
        out.push(last);
    }
    Ok(out)
}
