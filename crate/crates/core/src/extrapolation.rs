//! Sequence extrapolation: Richardson (polynomial, via Neville) towards a
//! vanishing parameter, and the Wynn epsilon algorithm for partial sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of extrapolating `values[i] = F(steps[i])` to `F(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub estimate: f64,
    /// Difference between the estimate and the next-lower-order estimate.
    pub error: f64,
    /// Observed convergence order `log(|d1|/|d2|) / log(h1/h2)` from the
    /// last three rungs, when available and meaningful.
    pub observed_rate: Option<f64>,
}

/// Polynomial extrapolation to zero of the last `order + 1` samples.
///
/// `steps` must be strictly decreasing and positive.
pub fn richardson(steps: &[f64], values: &[f64], order: usize) -> Result<Extrapolated> {
    if steps.len() != values.len() {
        return Err(Error::InvalidArgument("steps and values differ in length".into()));
    }
    if steps.len() < 2 || order == 0 {
        return Err(Error::ExtrapolationDiverged(format!(
            "need at least two rungs and order >= 1 (got {} rungs, order {order})",
            steps.len()
        )));
    }
    if order + 1 > steps.len() {
        return Err(Error::ExtrapolationDiverged(format!(
            "order {order} needs {} rungs, ladder has {}",
            order + 1,
            steps.len()
        )));
    }
    let n = steps.len();
    let h = &steps[n - order - 1..];
    let v = &values[n - order - 1..];

    let estimate = neville_at_zero(h, v);
    let lower = if order >= 2 {
        neville_at_zero(&h[1..], &v[1..])
    } else {
        v[v.len() - 1]
    };

    Ok(Extrapolated {
        estimate,
        error: (estimate - lower).abs(),
        observed_rate: observed_rate(steps, values),
    })
}

/// Check that successive differences along the ladder shrink. Differences
/// below `floor` (or at roundoff level) count as converged.
pub fn check_contracting(values: &[f64], floor: f64) -> Result<()> {
    if values.len() < 3 {
        return Err(Error::ExtrapolationDiverged(format!(
            "ladder of {} rungs cannot demonstrate convergence",
            values.len()
        )));
    }
    for w in values.windows(3) {
        let d1 = (w[1] - w[0]).abs();
        let d2 = (w[2] - w[1]).abs();
        if d2 > d1 && d2 > floor.max(1e-13 * w[2].abs()) {
            return Err(Error::ExtrapolationDiverged(format!(
                "successive differences grow: {d1:e} -> {d2:e}"
            )));
        }
    }
    Ok(())
}

fn neville_at_zero(h: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = h.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (-h[i + m] * p[i] + h[i] * p[i + 1]) / (h[i] - h[i + m]);
        }
    }
    p[0]
}

fn observed_rate(steps: &[f64], values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let d1 = (values[n - 2] - values[n - 3]).abs();
    let d2 = (values[n - 1] - values[n - 2]).abs();
    let ratio = steps[n - 2] / steps[n - 1];
    if d1 == 0.0 || d2 == 0.0 || ratio <= 1.0 {
        return None;
    }
    // geometric ladders only; the estimate is meaningless otherwise
    let r2 = steps[n - 3] / steps[n - 2];
    if (r2 - ratio).abs() > 1e-9 * ratio {
        return None;
    }
    Some((d1 / d2).ln() / ratio.ln())
}

/// Wynn's epsilon algorithm. Returns the estimate from the highest even
/// column reachable with the latest term and an error estimate.
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n == 0 {
        return (0.0, f64::INFINITY);
    }
    if n < 3 {
        let last = partial_sums[n - 1];
        let err = if n == 2 {
            (last - partial_sums[0]).abs()
        } else {
            f64::INFINITY
        };
        return (last, err);
    }

    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = cur[n - 1];
    let mut best_err = (cur[n - 1] - cur[n - 2]).abs();
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        let mut broke = false;
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 || !diff.is_finite() {
                broke = true;
                break;
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        if broke || next.is_empty() {
            break;
        }
        k += 1;
        if k % 2 == 0 {
            let est = next[next.len() - 1];
            if !est.is_finite() {
                break;
            }
            best_err = (est - best).abs();
            best = est;
        }
        prev = cur;
        cur = next;
    }
    (best, best_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_polynomial_error() {
        let f = |h: f64| 3.0 + 2.0 * h - 5.0 * h * h;
        let steps = [0.1, 0.05, 0.025];
        let values: Vec<f64> = steps.iter().map(|&h| f(h)).collect();
        let r = richardson(&steps, &values, 2).unwrap();
        assert!((r.estimate - 3.0).abs() < 1e-13);
    }

    #[test]
    fn observed_rate_of_linear_error() {
        let f = |h: f64| 1.0 + h + 1e-3 * h * h;
        let steps = [0.01, 0.005, 0.0025];
        let values: Vec<f64> = steps.iter().map(|&h| f(h)).collect();
        let r = richardson(&steps, &values, 2).unwrap();
        assert!((r.observed_rate.unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn single_rung_is_rejected() {
        assert!(matches!(
            richardson(&[0.1], &[1.0], 1),
            Err(Error::ExtrapolationDiverged(_))
        ));
        assert!(matches!(
            check_contracting(&[1.0], 0.0),
            Err(Error::ExtrapolationDiverged(_))
        ));
    }

    #[test]
    fn growing_differences_are_divergent() {
        assert!(check_contracting(&[1.0, 1.1, 1.5], 0.0).is_err());
        assert!(check_contracting(&[1.0, 1.5, 1.6], 0.0).is_ok());
        assert!(check_contracting(&[1e-12, -1e-12, 3e-12], 1e-10).is_ok());
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                s += sign / k as f64;
                s
            })
            .collect();
        let (est, _) = wynn_epsilon(&sums);
        assert!((est - std::f64::consts::LN_2).abs() < 1e-12);
    }
}
