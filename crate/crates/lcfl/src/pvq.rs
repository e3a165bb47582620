//! Gain-shape quantization on a pyramid vector codebook, with
//! Householder-reflection prediction.
//!
//! A coefficient vector is split into its gain (L2 norm, scalar-quantized)
//! and its shape (unit direction, quantized to the nearest codeword among
//! integer vectors with a fixed L1 pulse budget). When a predictor vector is
//! available, a Householder reflection aligns the predictor with a signed
//! coordinate axis; the input is reflected the same way, its angle theta to
//! that axis is scalar-quantized, and only the remaining n-1 components go
//! through the pyramid codebook with a pulse budget scaled by the energy
//! left after the angle. A predictor pointing more than 90 degrees away is
//! abandoned via the `noref` flag and the vector is coded unpredicted.
//!
//! Everything here is deterministic: ties break toward the lowest index and
//! `sign(0)` is +1 throughout, so encoder and decoder reconstructions match
//! bit for bit.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Predictor norms at or below this are treated as "no predictor".
pub const PREDICTOR_EPSILON: f64 = 1e-12;

/// Cap on the theta quantizer resolution; keeps indices bounded while the
/// residual angular error stays far below the shape quantizer's.
const MAX_THETA_STEPS: u32 = 1 << 16;

/// Per-vector cap on the pulse budget. 64 pulses per dimension keeps the
/// shape-quantizer error floor safely below half an 8-bit step on the
/// near-lossless path while bounding search and coding work.
const MAX_PULSES_PER_DIM: u32 = 64;

/// Integer vector with a fixed L1 pulse budget; the codewords of the
/// pyramid codebook before unit normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PulseVector {
    pulses: Vec<i32>,
}

impl PulseVector {
    pub fn new(pulses: Vec<i32>) -> Result<Self> {
        if pulses.iter().map(|&p| p.unsigned_abs() as u64).sum::<u64>() == 0 {
            return Err(Error::argument("pulse vector must carry at least one pulse"));
        }
        Ok(PulseVector { pulses })
    }

    pub fn dims(&self) -> usize {
        self.pulses.len()
    }

    /// Total pulse count: the sum of absolute pulse values.
    pub fn k(&self) -> u32 {
        self.pulses.iter().map(|&p| p.unsigned_abs()).sum()
    }

    pub fn pulses(&self) -> &[i32] {
        &self.pulses
    }
}

/// Theta quantizer resolution policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaPolicy {
    /// Steps proportional to gain: max(1, round((pi/2) * gain / q_gain)),
    /// balancing angular and radial resolution at comparable step sizes.
    Proportional,
    /// Fixed step count, mainly for tests and calibration.
    Fixed(u32),
}

/// Pulse budget policy for the shape quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulsePolicy {
    /// max(1, round(shape_energy / q_gain)), capped at 64 pulses per
    /// dimension: shape resolution tracks the energy the shape carries.
    EnergyScaled,
    /// Fixed budget, mainly for tests and calibration.
    Fixed(u32),
}

/// Quantizer configuration shared verbatim by encoder and decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantParams {
    pub q_gain: f64,
    pub theta_policy: ThetaPolicy,
    pub pulse_policy: PulsePolicy,
}

impl QuantParams {
    pub fn new(q_gain: f64) -> Result<Self> {
        if !q_gain.is_finite() || q_gain <= 0.0 {
            return Err(Error::argument(format!("q_gain must be positive, got {q_gain}")));
        }
        Ok(QuantParams {
            q_gain,
            theta_policy: ThetaPolicy::Proportional,
            pulse_policy: PulsePolicy::EnergyScaled,
        })
    }

    /// Number of theta steps for a reconstructed gain; always >= 1.
    pub fn theta_steps(&self, gain: f64) -> u32 {
        match self.theta_policy {
            ThetaPolicy::Proportional => {
                let raw = (FRAC_PI_2 * gain / self.q_gain).round();
                raw.clamp(1.0, f64::from(MAX_THETA_STEPS)) as u32
            }
            ThetaPolicy::Fixed(s) => s.max(1),
        }
    }

    /// Pulse budget for a shape carrying `shape_energy`; always >= 1 and at
    /// most 64 per dimension.
    pub fn pulse_budget(&self, shape_energy: f64, dims: usize) -> u32 {
        let cap = MAX_PULSES_PER_DIM * dims as u32;
        match self.pulse_policy {
            PulsePolicy::EnergyScaled => {
                let raw = (shape_energy / self.q_gain).round();
                raw.clamp(1.0, f64::from(cap)) as u32
            }
            PulsePolicy::Fixed(k) => k.clamp(1, cap),
        }
    }
}

/// The reconstructed angle for a theta index at a given step count. Every
/// site that needs the angle (quantizer, serializer, reconstruction) must
/// go through this one expression: the pulse budget is derived from its
/// sine via a round(), so even a last-ulp difference between two call sites
/// would desynchronize encoder and decoder.
pub fn theta_value(theta_index: u32, steps: u32) -> f64 {
    f64::from(theta_index) * (FRAC_PI_2 / f64::from(steps))
}

/// Coded form of one gain-shape vector.
///
/// `theta_index` is present iff the predicted path was taken (`noref` false)
/// and the reconstructed gain is nonzero. A reconstructed gain of zero codes
/// neither theta nor pulses. `axis_m` and `sign_s` record the reflection
/// axis; the decoder re-derives them from the predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct GainShapeCode {
    pub gain_index: i64,
    pub theta_index: Option<u32>,
    pub pulses: Option<PulseVector>,
    pub noref: bool,
    pub axis_m: usize,
    pub sign_s: i8,
}

/// Nearest-neighbor scalar quantizer: round to nearest with ties away from
/// zero, reconstruction = index * q. The error never exceeds q/2.
pub fn scalar_quantize(c: f64, q: f64) -> Result<(i64, f64)> {
    if !q.is_finite() || q <= 0.0 {
        return Err(Error::argument(format!("quantizer step must be positive, got {q}")));
    }
    let index = (c / q).round() as i64;
    Ok((index, index as f64 * q))
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Codebooks with at most this many magnitude patterns are searched
/// exhaustively; larger budgets fall back to greedy placement with
/// exchange refinement. Exhaustion is affordable exactly where the
/// heuristic's rare local optima would be measurable.
const EXACT_SEARCH_LIMIT: u64 = 100_000;

/// Number of nonnegative integer vectors of length `n` summing to `k`
/// (binomial(n + k - 1, n - 1)), saturating once past the exhaustive-search
/// limit.
fn magnitude_patterns(n: usize, k: u32) -> u64 {
    let mut count: u64 = 1;
    let (mut num, mut den) = (u64::from(k) + 1, 1u64);
    for _ in 0..n - 1 {
        count = count.saturating_mul(num) / den;
        if count > EXACT_SEARCH_LIMIT {
            return u64::MAX;
        }
        num += 1;
        den += 1;
    }
    count
}

/// Exhaustive scan over all magnitude compositions of `k` on `n` slots,
/// keeping the first composition (in DFS order) that strictly maximizes
/// corr^2 / energy.
fn exact_search(abs: &[f64], k: u32) -> Vec<i32> {
    struct State<'a> {
        abs: &'a [f64],
        mags: Vec<i32>,
        best: Vec<i32>,
        best_corr: f64,
        best_energy: f64,
    }
    fn walk(s: &mut State, slot: usize, left: u32, corr: f64, energy: f64) {
        if slot + 1 == s.mags.len() {
            s.mags[slot] = left as i32;
            let c = corr + s.abs[slot] * f64::from(left);
            let e = energy + f64::from(left) * f64::from(left);
            if c * c * s.best_energy > s.best_corr * s.best_corr * e {
                s.best_corr = c;
                s.best_energy = e;
                s.best.copy_from_slice(&s.mags);
            }
            s.mags[slot] = 0;
            return;
        }
        for m in (0..=left).rev() {
            s.mags[slot] = m as i32;
            walk(
                s,
                slot + 1,
                left - m,
                corr + s.abs[slot] * f64::from(m),
                energy + f64::from(m) * f64::from(m),
            );
        }
        s.mags[slot] = 0;
    }
    let n = abs.len();
    let mut state = State {
        abs,
        mags: vec![0; n],
        best: {
            let mut first = vec![0; n];
            first[0] = k as i32;
            first
        },
        best_corr: abs[0] * f64::from(k),
        best_energy: f64::from(k) * f64::from(k),
    };
    walk(&mut state, 0, k, 0.0, 0.0);
    state.best
}

/// Greedy placement: each pulse goes to the position that most improves
/// squared correlation per unit energy; then single pulses move between
/// positions while any move improves the cosine, since greedy placement
/// alone can land an exchange away from the optimum.
fn greedy_search(abs: &[f64], k: u32) -> Vec<i32> {
    let n = abs.len();
    let mut mags = vec![0i32; n];
    let mut corr = 0.0f64;
    let mut energy = 0.0f64;
    for _ in 0..k {
        let mut best = 0usize;
        let mut best_num = {
            let c = corr + abs[0];
            c * c
        };
        let mut best_den = energy + 2.0 * f64::from(mags[0]) + 1.0;
        for j in 1..n {
            let c = corr + abs[j];
            let num = c * c;
            let den = energy + 2.0 * f64::from(mags[j]) + 1.0;
            // num/den > best_num/best_den, compared without dividing.
            if num * best_den > best_num * den {
                best = j;
                best_num = num;
                best_den = den;
            }
        }
        corr += abs[best];
        energy += 2.0 * f64::from(mags[best]) + 1.0;
        mags[best] += 1;
    }
    let mut rounds = 0u32;
    loop {
        rounds += 1;
        if rounds > 4 * k {
            break;
        }
        let mut best_move: Option<(usize, usize, f64, f64)> = None;
        for from in 0..n {
            if mags[from] == 0 {
                continue;
            }
            let c_removed = corr - abs[from];
            let e_removed = energy - 2.0 * f64::from(mags[from]) + 1.0;
            for to in 0..n {
                if to == from {
                    continue;
                }
                let c_new = c_removed + abs[to];
                let e_new = e_removed + 2.0 * f64::from(mags[to]) + 1.0;
                let improves = match best_move {
                    None => c_new * c_new * energy > corr * corr * e_new,
                    Some((_, _, bc, be)) => c_new * c_new * be > bc * bc * e_new,
                };
                if improves {
                    best_move = Some((from, to, c_new, e_new));
                }
            }
        }
        match best_move {
            Some((from, to, c_new, e_new)) => {
                mags[from] -= 1;
                mags[to] += 1;
                corr = c_new;
                energy = e_new;
            }
            None => break,
        }
    }
    mags
}

/// Finds the pulse vector with L1 norm `k` maximizing cosine similarity to
/// `x`. The optimum always carries the input's signs, so the search runs
/// over magnitude patterns only: exhaustively when the pattern count is
/// small, greedily with exchange refinement beyond. Ties keep the lowest
/// index.
pub fn pvq_search(x: &[f64], k: u32) -> Result<PulseVector> {
    if k == 0 {
        return Err(Error::argument("pulse budget must be at least 1"));
    }
    let n = x.len();
    if n == 0 || x.iter().all(|&v| v == 0.0) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::argument("pvq search input must be a nonzero finite vector"));
    }
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let mags = if magnitude_patterns(n, k) <= EXACT_SEARCH_LIMIT {
        exact_search(&abs, k)
    } else {
        greedy_search(&abs, k)
    };
    let pulses = mags
        .iter()
        .zip(x)
        .map(|(&m, &v)| if v < 0.0 { -m } else { m })
        .collect();
    PulseVector::new(pulses)
}

/// Unit-normalized shape of a pulse vector.
pub fn pvq_normalize(y: &PulseVector) -> Vec<f64> {
    let norm = (y.pulses.iter().map(|&p| f64::from(p) * f64::from(p)).sum::<f64>()).sqrt();
    y.pulses.iter().map(|&p| f64::from(p) / norm).collect()
}

/// Normal of the reflection plane that maps `r` onto the signed axis of its
/// largest component: v = r/|r| + s*e_m with m = argmax |r_i| (lowest index
/// on ties) and s = sign(r_m), sign(0) = +1.
pub fn householder_normal(r: &[f64]) -> Result<(Vec<f64>, usize, i8)> {
    let norm = norm2(r);
    if !norm.is_finite() || norm <= PREDICTOR_EPSILON {
        return Err(Error::argument("householder normal of a zero vector"));
    }
    let mut m = 0usize;
    for (i, value) in r.iter().enumerate() {
        if value.abs() > r[m].abs() {
            m = i;
        }
    }
    let s: i8 = if r[m] < 0.0 { -1 } else { 1 };
    let mut v: Vec<f64> = r.iter().map(|&c| c / norm).collect();
    v[m] += f64::from(s);
    Ok((v, m, s))
}

/// Reflects `x` across the plane with normal `v`: z = x - 2 (v.x / v.v) v.
/// Reflections are isometries and involutions; both are asserted in tests.
pub fn reflect(x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if x.len() != v.len() {
        return Err(Error::size(format!(
            "reflect dims {} vs {}",
            x.len(),
            v.len()
        )));
    }
    let vv: f64 = v.iter().map(|c| c * c).sum();
    if !vv.is_finite() || vv <= PREDICTOR_EPSILON * PREDICTOR_EPSILON {
        return Err(Error::argument("reflection normal must be nonzero"));
    }
    let vx: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
    let t = 2.0 * vx / vv;
    Ok(x.iter().zip(v).map(|(&xi, &vi)| xi - t * vi).collect())
}

fn zero_gain_code(gain_index: i64, noref: bool) -> GainShapeCode {
    GainShapeCode {
        gain_index,
        theta_index: None,
        pulses: None,
        noref,
        axis_m: 0,
        sign_s: 1,
    }
}

/// Quantizes `x` without any predictor: gain coded directly, shape over the
/// full vector. Also the fallback body of the predicted path.
pub fn quantize_noref(x: &[f64], qp: &QuantParams) -> Result<GainShapeCode> {
    let gain = norm2(x);
    let (gain_index, recon_gain) = scalar_quantize(gain, qp.q_gain)?;
    if recon_gain <= 0.0 {
        return Ok(zero_gain_code(gain_index.max(0), true));
    }
    let k = qp.pulse_budget(recon_gain, x.len());
    let pulses = pvq_search(x, k)?;
    Ok(GainShapeCode {
        gain_index,
        theta_index: None,
        pulses: Some(pulses),
        noref: true,
        axis_m: 0,
        sign_s: 1,
    })
}

/// Reconstruction for a code produced by [`quantize_noref`].
pub fn dequantize_noref(code: &GainShapeCode, dims: usize, qp: &QuantParams) -> Result<Vec<f64>> {
    if !code.noref {
        return Err(Error::argument("code was produced with a predictor"));
    }
    if code.gain_index < 0 {
        return Err(Error::argument("unpredicted gain index must be non-negative"));
    }
    let gain = code.gain_index as f64 * qp.q_gain;
    if gain <= 0.0 {
        return Ok(vec![0.0; dims]);
    }
    let pulses = code
        .pulses
        .as_ref()
        .ok_or_else(|| Error::argument("nonzero gain without pulses"))?;
    if pulses.dims() != dims {
        return Err(Error::size(format!(
            "pulse dims {} vs vector dims {dims}",
            pulses.dims()
        )));
    }
    Ok(pvq_normalize(pulses).iter().map(|&u| gain * u).collect())
}

/// Quantizes the angle and shape of `x` against a nonzero predictor `r`,
/// for a gain already reconstructed as `recon_gain`. Returns `None` when
/// the angle exceeds 90 degrees (cos(theta) < 0), in which case the caller
/// codes a `noref` flag and falls back to the unpredicted shape path.
pub fn quantize_shape_predicted(
    x: &[f64],
    r: &[f64],
    recon_gain: f64,
    qp: &QuantParams,
) -> Result<Option<(u32, PulseVector)>> {
    if x.len() != r.len() {
        return Err(Error::size(format!(
            "input dims {} vs predictor dims {}",
            x.len(),
            r.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::argument("predicted shape coding needs at least 2 dims"));
    }
    let gain = norm2(x);
    let (v, m, s) = householder_normal(r)?;
    let z = reflect(x, &v)?;
    // A zero input is treated as perfectly aligned; its gain quantizes to
    // (or near) zero anyway.
    let cos_theta = if gain > 0.0 {
        (-f64::from(s) * z[m] / gain).clamp(-1.0, 1.0)
    } else {
        1.0
    };
    if cos_theta < 0.0 {
        return Ok(None);
    }
    let steps = qp.theta_steps(recon_gain);
    let theta = cos_theta.acos();
    let step = FRAC_PI_2 / f64::from(steps);
    let theta_index = ((theta / step).round() as u32).min(steps);
    let theta_hat = theta_value(theta_index, steps);
    let k = qp.pulse_budget(recon_gain * theta_hat.sin(), x.len() - 1);
    let mut reduced: Vec<f64> = Vec::with_capacity(z.len() - 1);
    for (i, &zi) in z.iter().enumerate() {
        if i != m {
            reduced.push(zi);
        }
    }
    let pulses = if reduced.iter().all(|&c| c == 0.0) {
        // Input exactly on the predictor axis: the shape carries no energy,
        // a canonical codeword keeps the stream well-formed.
        let mut p = vec![0i32; reduced.len()];
        p[0] = k as i32;
        PulseVector::new(p)?
    } else {
        pvq_search(&reduced, k)?
    };
    Ok(Some((theta_index, pulses)))
}

/// Shape path of the unpredicted coder for a known reconstructed gain.
pub fn quantize_shape_noref(x: &[f64], recon_gain: f64, qp: &QuantParams) -> Result<PulseVector> {
    pvq_search(x, qp.pulse_budget(recon_gain, x.len()))
}

/// Rebuilds a predicted-shape vector from its symbols, the predictor and
/// the reconstructed gain: gain * (-s cos(theta) e_m + sin(theta) u) with
/// the shape re-embedded in the axis-removed subspace and reflected back
/// through the predictor's reflection plane.
pub fn dequantize_shape_predicted(
    theta_index: u32,
    pulses: &PulseVector,
    r: &[f64],
    recon_gain: f64,
    qp: &QuantParams,
) -> Result<Vec<f64>> {
    let dims = r.len();
    if pulses.dims() != dims - 1 {
        return Err(Error::size(format!(
            "predicted shape dims {} vs expected {}",
            pulses.dims(),
            dims - 1
        )));
    }
    let steps = qp.theta_steps(recon_gain);
    if theta_index > steps {
        return Err(Error::argument(format!(
            "theta index {theta_index} out of range 0..={steps}"
        )));
    }
    let theta_hat = theta_value(theta_index, steps);
    let shape = pvq_normalize(pulses);
    let (v, m, s) = householder_normal(r)?;
    let mut z_hat = vec![0.0; dims];
    let (cos_t, sin_t) = (theta_hat.cos(), theta_hat.sin());
    let mut j = 0usize;
    for (i, slot) in z_hat.iter_mut().enumerate() {
        if i == m {
            *slot = -f64::from(s) * cos_t * recon_gain;
        } else {
            *slot = sin_t * recon_gain * shape[j];
            j += 1;
        }
    }
    reflect(&z_hat, &v)
}

/// Shape reconstruction of the unpredicted path: gain times the normalized
/// pulse vector, no reflection involved.
pub fn dequantize_shape_noref(pulses: &PulseVector, recon_gain: f64) -> Vec<f64> {
    pvq_normalize(pulses).iter().map(|&u| recon_gain * u).collect()
}

/// Quantizes `x` against predictor `r` (both length n):
///
/// * gain: signed index relative to |r|, reconstructed as
///   max(0, index * q + |r|);
/// * angle: cos(theta) = -s * z_m / |z| after reflecting `x`; theta is
///   uniformly quantized on [0, pi/2]. cos(theta) < 0 sets `noref` and falls
///   back to unpredicted coding;
/// * shape: the reflected vector with the axis component removed, searched
///   with a budget driven by the post-angle energy gain * sin(theta).
pub fn predicted_quantize(x: &[f64], r: &[f64], qp: &QuantParams) -> Result<GainShapeCode> {
    if x.len() != r.len() {
        return Err(Error::size(format!(
            "input dims {} vs predictor dims {}",
            x.len(),
            r.len()
        )));
    }
    let r_norm = norm2(r);
    if !r_norm.is_finite() || r_norm <= PREDICTOR_EPSILON {
        return Err(Error::argument("predictor must be nonzero; use the unpredicted path"));
    }
    let gain = norm2(x);
    let (gain_index, _) = scalar_quantize(gain - r_norm, qp.q_gain)?;
    let recon_gain = (gain_index as f64 * qp.q_gain + r_norm).max(0.0);
    let (_, m, s) = householder_normal(r)?;
    if recon_gain <= 0.0 {
        // Still decide the angle so a poor predictor escapes to noref with
        // its own (unpredicted) gain.
        if quantize_shape_predicted(x, r, recon_gain, qp)?.is_some() {
            let mut code = zero_gain_code(gain_index, false);
            code.axis_m = m;
            code.sign_s = s;
            return Ok(code);
        }
        let mut code = quantize_noref(x, qp)?;
        code.axis_m = m;
        code.sign_s = s;
        return Ok(code);
    }
    match quantize_shape_predicted(x, r, recon_gain, qp)? {
        Some((theta_index, pulses)) => Ok(GainShapeCode {
            gain_index,
            theta_index: Some(theta_index),
            pulses: Some(pulses),
            noref: false,
            axis_m: m,
            sign_s: s,
        }),
        None => {
            let mut code = quantize_noref(x, qp)?;
            code.axis_m = m;
            code.sign_s = s;
            Ok(code)
        }
    }
}

/// Mirror of [`predicted_quantize`]: rebuilds the vector from the coded
/// symbols and the predictor alone, so encoder and decoder agree bit for
/// bit.
pub fn predicted_dequantize(code: &GainShapeCode, r: &[f64], qp: &QuantParams) -> Result<Vec<f64>> {
    let dims = r.len();
    let r_norm = norm2(r);
    if !r_norm.is_finite() || r_norm <= PREDICTOR_EPSILON {
        return Err(Error::argument("predictor must be nonzero; use the unpredicted path"));
    }
    if code.noref {
        return dequantize_noref(code, dims, qp);
    }
    let recon_gain = (code.gain_index as f64 * qp.q_gain + r_norm).max(0.0);
    if recon_gain <= 0.0 {
        return Ok(vec![0.0; dims]);
    }
    let theta_index = code
        .theta_index
        .ok_or_else(|| Error::argument("predicted code with nonzero gain needs a theta index"))?;
    let pulses = code
        .pulses
        .as_ref()
        .ok_or_else(|| Error::argument("predicted code with nonzero gain needs pulses"))?;
    dequantize_shape_predicted(theta_index, pulses, r, recon_gain, qp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-10.0..10.0)).collect()
    }

    #[test]
    fn scalar_quantize_examples() {
        assert_eq!(scalar_quantize(0.0, 3.0).unwrap(), (0, 0.0));
        assert_eq!(scalar_quantize(10.0, 4.0).unwrap(), (3, 12.0));
        assert_eq!(scalar_quantize(-10.0, 4.0).unwrap(), (-3, -12.0));
        assert!(scalar_quantize(1.0, 0.0).is_err());
        assert!(scalar_quantize(1.0, -2.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn scalar_quantize_error_bound(c in -1e6f64..1e6, q in 1e-6f64..1e3) {
            let (_, recon) = scalar_quantize(c, q).unwrap();
            proptest::prop_assert!((c - recon).abs() <= q / 2.0 + q * 1e-12);
        }

        #[test]
        fn pulse_normalization_is_unit(pulses in proptest::collection::vec(-9i32..=9, 1..16)) {
            if pulses.iter().any(|&p| p != 0) {
                let y = PulseVector::new(pulses).unwrap();
                let norm: f64 = pvq_normalize(&y).iter().map(|u| u * u).sum();
                proptest::prop_assert!((norm - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn single_pulse_lands_on_max_component() {
        let y = pvq_search(&[0.9, 0.1, 0.0], 1).unwrap();
        assert_eq!(y.pulses(), &[1, 0, 0]);
        let y = pvq_search(&[-0.9, 0.1, 0.0], 1).unwrap();
        assert_eq!(y.pulses(), &[-1, 0, 0]);
    }

    #[test]
    fn search_rejects_zero_vector_and_zero_budget() {
        assert!(pvq_search(&[0.0, 0.0], 3).is_err());
        assert!(pvq_search(&[1.0, 0.0], 0).is_err());
    }

    /// Exhaustive codebook scan: enumerates every signed integer vector with
    /// L1 norm exactly k and keeps the first one achieving the maximum
    /// cosine against x.
    fn search_oracle(x: &[f64], k: u32) -> Vec<i32> {
        fn enumerate(n: usize, k: i32, prefix: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
            if n == 1 {
                for sign in [1, -1] {
                    if k == 0 && sign < 0 {
                        continue;
                    }
                    prefix.push(sign * k);
                    out.push(prefix.clone());
                    prefix.pop();
                }
                return;
            }
            for mag in 0..=k {
                for sign in [1, -1] {
                    if mag == 0 && sign < 0 {
                        continue;
                    }
                    prefix.push(sign * mag);
                    enumerate(n - 1, k - mag, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut all = Vec::new();
        enumerate(x.len(), k as i32, &mut Vec::new(), &mut all);
        let mut best: Option<(f64, &Vec<i32>)> = None;
        for y in &all {
            let dot: f64 = y.iter().zip(x).map(|(&p, &v)| f64::from(p) * v).sum();
            let norm = (y.iter().map(|&p| f64::from(p) * f64::from(p)).sum::<f64>()).sqrt();
            let cos = dot / norm;
            if best.is_none() || cos > best.unwrap().0 {
                best = Some((cos, y));
            }
        }
        best.unwrap().1.clone()
    }

    #[test]
    fn search_matches_exhaustive_oracle() {
        let mut rng = StdRng::seed_from_u64(52);
        for _ in 0..200 {
            let n = rng.random_range(2..=6);
            let k = rng.random_range(1..=4u32);
            let x = random_vec(&mut rng, n);
            let got = pvq_search(&x, k).unwrap();
            let want = search_oracle(&x, k);
            assert_eq!(got.pulses(), &want[..], "n={n} k={k} x={x:?}");
        }
    }

    #[test]
    fn normalize_examples() {
        let y = PulseVector::new(vec![1, 0, 0]).unwrap();
        assert_eq!(pvq_normalize(&y), vec![1.0, 0.0, 0.0]);
        let y = PulseVector::new(vec![1, 1, 0]).unwrap();
        let u = pvq_normalize(&y);
        assert!((u[0] - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        assert!((u[1] - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(u[2], 0.0);
    }

    #[test]
    fn householder_hand_cases() {
        let (v, m, s) = householder_normal(&[3.0, 4.0]).unwrap();
        assert_eq!((m, s), (1, 1));
        assert!((v[0] - 0.6).abs() < 1e-12);
        assert!((v[1] - 1.8).abs() < 1e-12);

        let (v, m, s) = householder_normal(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!((m, s), (0, 1));
        assert_eq!(v, vec![2.0, 0.0, 0.0]);

        let (v, m, s) = householder_normal(&[-5.0, 0.0]).unwrap();
        assert_eq!((m, s), (0, -1));
        assert_eq!(v, vec![-2.0, 0.0]);

        assert!(householder_normal(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn reflect_hand_cases() {
        // x orthogonal to v stays put.
        let z = reflect(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(z, vec![0.0, 1.0]);
        // x == v maps to -v.
        let z = reflect(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert!((z[0] + 1.0).abs() < 1e-12 && (z[1] + 2.0).abs() < 1e-12);
        assert!(reflect(&[1.0], &[0.0]).is_err());
        assert!(reflect(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn reflection_aligns_predictor_with_axis() {
        let mut rng = StdRng::seed_from_u64(54);
        for _ in 0..1000 {
            let n = rng.random_range(2..10);
            let r = random_vec(&mut rng, n);
            if norm2(&r) < 1e-6 {
                continue;
            }
            let (v, m, s) = householder_normal(&r).unwrap();
            let z = reflect(&r, &v).unwrap();
            for (i, &zi) in z.iter().enumerate() {
                if i == m {
                    assert!((zi + f64::from(s) * norm2(&r)).abs() < 1e-9);
                } else {
                    assert!(zi.abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn reflection_is_isometric_involution() {
        let mut rng = StdRng::seed_from_u64(55);
        for _ in 0..1000 {
            let n = rng.random_range(2..10);
            let x = random_vec(&mut rng, n);
            let v = random_vec(&mut rng, n);
            if norm2(&v) < 1e-6 {
                continue;
            }
            let z = reflect(&x, &v).unwrap();
            assert!((norm2(&z) - norm2(&x)).abs() < 1e-9);
            let back = reflect(&z, &v).unwrap();
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cosine_chain_identity() {
        // x.r / (|x||r|) equals -s z_m / |z| after the reflection.
        let mut rng = StdRng::seed_from_u64(56);
        for _ in 0..1000 {
            let n = rng.random_range(2..10);
            let x = random_vec(&mut rng, n);
            let r = random_vec(&mut rng, n);
            if norm2(&x) < 1e-6 || norm2(&r) < 1e-6 {
                continue;
            }
            let direct: f64 =
                x.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / (norm2(&x) * norm2(&r));
            let (v, m, s) = householder_normal(&r).unwrap();
            let z = reflect(&x, &v).unwrap();
            let via_axis = -f64::from(s) * z[m] / norm2(&z);
            assert!((direct - via_axis).abs() < 1e-9);
        }
    }

    fn fine_params() -> QuantParams {
        QuantParams {
            q_gain: 1e-3,
            theta_policy: ThetaPolicy::Fixed(256),
            pulse_policy: PulsePolicy::Fixed(64),
        }
    }

    #[test]
    fn aligned_input_codes_theta_zero() {
        let r = vec![2.0, -1.0, 0.5, 3.0];
        let x: Vec<f64> = r.iter().map(|&c| 1.4 * c).collect();
        let qp = QuantParams::new(1e-6).unwrap();
        let code = predicted_quantize(&x, &r, &qp).unwrap();
        assert!(!code.noref);
        assert_eq!(code.theta_index, Some(0));
        let recon = predicted_dequantize(&code, &r, &qp).unwrap();
        let err = x
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-5, "err {err}");
        // Reconstruction is parallel to r.
        let cos = recon.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>()
            / (norm2(&recon) * norm2(&r));
        assert!((cos - 1.0).abs() < 1e-9);
    }

    #[test]
    fn anti_aligned_input_goes_noref() {
        let r = vec![1.0, 2.0, -0.5];
        let x: Vec<f64> = r.iter().map(|&c| -c).collect();
        let code = predicted_quantize(&x, &r, &fine_params()).unwrap();
        assert!(code.noref);
        assert!(code.theta_index.is_none());
        let recon = predicted_dequantize(&code, &r, &fine_params()).unwrap();
        let rel = x
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / norm2(&x);
        assert!(rel < 0.05, "rel {rel}");
    }

    /// Isotropic vector: gaussian components via Box-Muller.
    fn random_direction(rng: &mut StdRng, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u1: f64 = rng.random_range(1e-12..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    }

    #[test]
    fn fine_quantization_reconstructs_within_5_percent() {
        let mut rng = StdRng::seed_from_u64(57);
        let qp = fine_params();
        for _ in 0..300 {
            let scale = rng.random_range(0.5..8.0);
            let x: Vec<f64> = random_direction(&mut rng, 8).iter().map(|c| c * scale).collect();
            let r = random_direction(&mut rng, 8);
            if norm2(&x) < 0.5 || norm2(&r) < 0.5 {
                continue;
            }
            let code = predicted_quantize(&x, &r, &qp).unwrap();
            let recon = predicted_dequantize(&code, &r, &qp).unwrap();
            let rel = x
                .iter()
                .zip(&recon)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                / norm2(&x);
            assert!(rel < 0.05, "rel {rel} x={x:?} r={r:?}");
        }
    }

    #[test]
    fn zero_predictor_is_an_argument_error() {
        let qp = QuantParams::new(1.0).unwrap();
        assert!(predicted_quantize(&[1.0, 2.0], &[0.0, 0.0], &qp).is_err());
        let code = quantize_noref(&[1.0, 2.0], &qp).unwrap();
        assert!(predicted_dequantize(&code, &[0.0, 0.0], &qp).is_err());
    }

    #[test]
    fn noref_code_reconstructs_without_reflection() {
        let qp = QuantParams::new(0.25).unwrap();
        let x = vec![3.0, -4.0, 0.0, 1.0];
        let code = quantize_noref(&x, &qp).unwrap();
        assert!(code.noref);
        let recon = dequantize_noref(&code, 4, &qp).unwrap();
        let gain = code.gain_index as f64 * qp.q_gain;
        let shape = pvq_normalize(code.pulses.as_ref().unwrap());
        for (i, &value) in recon.iter().enumerate() {
            assert!((value - gain * shape[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn encoder_and_decoder_reconstructions_are_identical() {
        let mut rng = StdRng::seed_from_u64(58);
        let qp = QuantParams::new(0.5).unwrap();
        for _ in 0..1000 {
            let n = rng.random_range(2..12);
            let x = random_vec(&mut rng, n);
            let r = random_vec(&mut rng, n);
            if norm2(&r) < 1e-6 {
                continue;
            }
            let code = predicted_quantize(&x, &r, &qp).unwrap();
            let enc_side = predicted_dequantize(&code, &r, &qp).unwrap();
            let dec_side = predicted_dequantize(&code.clone(), &r, &qp).unwrap();
            assert_eq!(enc_side, dec_side);
        }
    }

    #[test]
    fn refinement_ladder_never_increases_mean_error() {
        // Nested refinement: halving q, doubling theta steps and pulses.
        let mut rng = StdRng::seed_from_u64(59);
        let cases: Vec<(Vec<f64>, Vec<f64>)> = (0..50)
            .map(|_| (random_vec(&mut rng, 6), random_vec(&mut rng, 6)))
            .filter(|(x, r)| norm2(x) > 0.5 && norm2(r) > 0.5)
            .collect();
        let mut prev = f64::INFINITY;
        for level in 0..5 {
            let qp = QuantParams {
                q_gain: 1.0 / f64::from(1u32 << level),
                theta_policy: ThetaPolicy::Fixed(8 << level),
                pulse_policy: PulsePolicy::Fixed(8 << level),
            };
            let mut total = 0.0;
            for (x, r) in &cases {
                let code = predicted_quantize(x, r, &qp).unwrap();
                let recon = predicted_dequantize(&code, r, &qp).unwrap();
                total += x
                    .iter()
                    .zip(&recon)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            }
            assert!(
                total <= prev + 1e-9,
                "level {level}: error {total} > previous {prev}"
            );
            prev = total;
        }
    }
}
