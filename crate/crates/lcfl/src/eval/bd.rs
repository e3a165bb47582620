//! Bjontegaard deltas between two rate-distortion curves.
//!
//! The pinned variant: cubic least-squares fits in (log10 rate, quality),
//! trapezoidal integration at 1000 samples over the overlapping interval.
//! Delta-rate integrates the log-rate gap over the shared quality range and
//! maps it through 10^x - 1; delta-SNR integrates the quality gap over the
//! shared log-rate range. Fitting both axes the same way on both curves
//! makes the two directions of the comparison consistent: the deltas are
//! antisymmetric up to float noise.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdResult {
    pub delta_rate_percent: f64,
    pub delta_snr_db: f64,
}

const INTEGRATION_SAMPLES: usize = 1000;

/// Least-squares cubic through the points, solved via the normal equations
/// with partial-pivot elimination. Returns [c0, c1, c2, c3].
fn cubic_fit(points: &[(f64, f64)]) -> Result<[f64; 4]> {
    let n = points.len();
    if n < 4 {
        return Err(Error::argument(format!(
            "cubic fit needs at least 4 points, got {n}"
        )));
    }
    // Accumulate sums of x^k and x^k*y.
    let mut xs = [0.0f64; 7];
    let mut xy = [0.0f64; 4];
    for &(x, y) in points {
        let mut p = 1.0;
        for (k, slot) in xs.iter_mut().enumerate() {
            *slot += p;
            if k < 4 {
                xy[k] += p * y;
            }
            p *= x;
        }
    }
    let mut a = [[0.0f64; 5]; 4];
    for (r, row) in a.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().take(4).enumerate() {
            *cell = xs[r + c];
        }
        row[4] = xy[r];
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        if a[col][col].abs() < 1e-30 {
            return Err(Error::argument("degenerate curve: singular fit".to_string()));
        }
        let pivot_row = a[col];
        for row in a.iter_mut().take(4).skip(col + 1) {
            let f = row[col] / pivot_row[col];
            for (cell, p) in row.iter_mut().zip(pivot_row).skip(col) {
                *cell -= f * p;
            }
        }
    }
    let mut coeffs = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut acc = a[row][4];
        for c in row + 1..4 {
            acc -= a[row][c] * coeffs[c];
        }
        coeffs[row] = acc / a[row][row];
    }
    Ok(coeffs)
}

fn poly_eval(c: &[f64; 4], x: f64) -> f64 {
    ((c[3] * x + c[2]) * x + c[1]) * x + c[0]
}

/// Mean of f over [lo, hi] by the trapezoid rule.
fn mean_over(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = INTEGRATION_SAMPLES;
    let step = (hi - lo) / n as f64;
    let mut acc = 0.5 * (f(lo) + f(hi));
    for i in 1..n {
        acc += f(lo + step * i as f64);
    }
    acc / n as f64
}

/// One monotone-prepared curve: points sorted by rate, as
/// (log10 rate, quality).
fn prepare(curve: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if curve.len() < 4 {
        return Err(Error::argument(format!(
            "bd_metrics needs at least 4 points per curve, got {}",
            curve.len()
        )));
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(curve.len());
    for &(rate, quality) in curve {
        if !rate.is_finite() || rate <= 0.0 || !quality.is_finite() {
            return Err(Error::argument(format!(
                "invalid rd point ({rate}, {quality})"
            )));
        }
        pts.push((rate.log10(), quality));
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pts)
}

/// Bjontegaard deltas of curve B relative to curve A. Negative
/// `delta_rate_percent` means B needs fewer bits at equal quality; positive
/// `delta_snr_db` means B is better at equal rate. Points are (rate in
/// bits, quality in dB).
pub fn bd_metrics(curve_a: &[(f64, f64)], curve_b: &[(f64, f64)]) -> Result<BdResult> {
    let a = prepare(curve_a)?;
    let b = prepare(curve_b)?;

    // Quality as a function of log-rate, for delta-SNR.
    let qa = cubic_fit(&a)?;
    let qb = cubic_fit(&b)?;
    let r_lo = a.first().unwrap().0.max(b.first().unwrap().0);
    let r_hi = a.last().unwrap().0.min(b.last().unwrap().0);
    if r_hi <= r_lo {
        return Err(Error::argument("curves do not overlap in rate".to_string()));
    }
    let delta_snr_db = mean_over(r_lo, r_hi, |x| poly_eval(&qb, x) - poly_eval(&qa, x));

    // Log-rate as a function of quality, for delta-rate.
    let swap = |pts: &[(f64, f64)]| pts.iter().map(|&(x, y)| (y, x)).collect::<Vec<_>>();
    let ra = cubic_fit(&swap(&a))?;
    let rb = cubic_fit(&swap(&b))?;
    let q_bounds = |pts: &[(f64, f64)]| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(_, q) in pts {
            lo = lo.min(q);
            hi = hi.max(q);
        }
        (lo, hi)
    };
    let (a_lo, a_hi) = q_bounds(&a);
    let (b_lo, b_hi) = q_bounds(&b);
    let q_lo = a_lo.max(b_lo);
    let q_hi = a_hi.min(b_hi);
    if q_hi <= q_lo {
        return Err(Error::argument("curves do not overlap in quality".to_string()));
    }
    let mean_log_gap = mean_over(q_lo, q_hi, |q| poly_eval(&rb, q) - poly_eval(&ra, q));
    let delta_rate_percent = (10.0f64.powf(mean_log_gap) - 1.0) * 100.0;

    Ok(BdResult {
        delta_rate_percent,
        delta_snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A realistic concave RD curve over a rate span.
    fn base_curve() -> Vec<(f64, f64)> {
        (0..8)
            .map(|i| {
                let rate = 4000.0 * 2.0f64.powi(i);
                let x = rate.log10() - 3.0;
                let quality = 30.0 + 9.0 * x - 0.7 * x * x;
                (rate, quality)
            })
            .collect()
    }

    #[test]
    fn identical_curves_are_zero() {
        let c = base_curve();
        let r = bd_metrics(&c, &c).unwrap();
        assert!(r.delta_rate_percent.abs() < 1e-9, "{:?}", r);
        assert!(r.delta_snr_db.abs() < 1e-9, "{:?}", r);
    }

    #[test]
    fn uniform_rate_scale_maps_to_rate_delta() {
        let a = base_curve();
        let b: Vec<(f64, f64)> = a.iter().map(|&(r, q)| (r * 0.9, q)).collect();
        let res = bd_metrics(&a, &b).unwrap();
        assert!(
            (res.delta_rate_percent + 10.0).abs() < 0.1,
            "{}",
            res.delta_rate_percent
        );
    }

    #[test]
    fn uniform_quality_shift_maps_to_snr_delta() {
        let a = base_curve();
        let b: Vec<(f64, f64)> = a.iter().map(|&(r, q)| (r, q + 0.5)).collect();
        let res = bd_metrics(&a, &b).unwrap();
        assert!((res.delta_snr_db - 0.5).abs() < 0.01, "{}", res.delta_snr_db);
    }

    #[test]
    fn deltas_are_antisymmetric() {
        let a = base_curve();
        // A genuinely different second curve.
        let b: Vec<(f64, f64)> = base_curve()
            .iter()
            .map(|&(r, q)| (r * 0.93, q + 0.3 + 0.02 * (r.log10() - 4.0)))
            .collect();
        let ab = bd_metrics(&a, &b).unwrap();
        let ba = bd_metrics(&b, &a).unwrap();
        assert!((ab.delta_snr_db + ba.delta_snr_db).abs() < 1e-6);
        let product = (1.0 + ab.delta_rate_percent / 100.0) * (1.0 + ba.delta_rate_percent / 100.0);
        assert!((product - 1.0).abs() < 1e-4, "{product}");
    }

    #[test]
    fn insufficient_points_and_disjoint_curves_error() {
        let a = base_curve();
        assert!(bd_metrics(&a[..3], &a).is_err());
        let far: Vec<(f64, f64)> = a.iter().map(|&(r, q)| (r, q + 200.0)).collect();
        assert!(bd_metrics(&a, &far).is_err());
        let bad = vec![(0.0, 30.0), (1.0, 31.0), (2.0, 32.0), (3.0, 33.0)];
        assert!(bd_metrics(&bad, &a).is_err());
    }
}
