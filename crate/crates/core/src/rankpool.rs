//! Rank pooling: summarizing an ordered frame sequence by the parameters of
//! a linear function that ranks its time-averaged frames.
//!
//! Two routes produce the map `d`:
//! * [`solve_exact`] minimizes the regularized pairwise hinge objective
//!   ([`rank_objective`]) by subgradient descent.
//! * [`approximate_map`] takes a fixed linear combination of the time
//!   averages with the closed-form [`approx_coefficients`], no optimization.

use serde::{Deserialize, Serialize};

use crate::data::image::RgbImage;
use crate::error::{invalid, shape_err, Result};

/// Per-frame feature vectors in temporal order, all of dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSequence {
    dim: usize,
    frames: Vec<Vec<f32>>,
}

impl FeatureSequence {
    pub fn new(frames: Vec<Vec<f32>>) -> Result<Self> {
        let dim = frames
            .first()
            .map(Vec::len)
            .ok_or_else(|| invalid!("a feature sequence needs at least one frame"))?;
        if dim == 0 {
            return Err(invalid!("feature dimension must be at least 1"));
        }
        if let Some((t, f)) = frames.iter().enumerate().find(|(_, f)| f.len() != dim) {
            return Err(shape_err!(
                "frame {} has {} features, frame 1 has {dim}",
                t + 1,
                f.len()
            ));
        }
        Ok(Self { dim, frames })
    }

    /// Raw RGB features in `[0, 1]`; all frames must share one size.
    pub fn from_frames(frames: &[RgbImage]) -> Result<Self> {
        Self::new(frames.iter().map(RgbImage::to_features).collect())
    }

    /// Scalar (`D = 1`) sequence, mostly useful for small examples.
    pub fn from_scalars(values: &[f32]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frames(&self) -> &[Vec<f32>] {
        &self.frames
    }

    /// Reversed temporal order.
    pub fn reversed(&self) -> Self {
        let mut frames = self.frames.clone();
        frames.reverse();
        Self {
            dim: self.dim,
            frames,
        }
    }

    fn ensure_finite(&self) -> Result<()> {
        for (t, f) in self.frames.iter().enumerate() {
            if f.iter().any(|v| !v.is_finite()) {
                return Err(invalid!("frame {} contains a non-finite feature", t + 1));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPoolMode {
    Exact,
    Approximate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankPoolConfig {
    /// Weight of the quadratic regularizer.
    pub delta: f64,
    pub max_iters: usize,
    pub step_size: f64,
    /// Stop once an accepted step moves `d` by less than this (Euclidean).
    pub tolerance: f64,
    pub mode: RankPoolMode,
}

impl Default for RankPoolConfig {
    fn default() -> Self {
        Self {
            delta: 1.0,
            max_iters: 2000,
            step_size: 1e-2,
            tolerance: 1e-8,
            mode: RankPoolMode::Approximate,
        }
    }
}

impl RankPoolConfig {
    pub fn exact() -> Self {
        Self {
            mode: RankPoolMode::Exact,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(invalid!("delta must be positive, got {}", self.delta));
        }
        if !(self.step_size > 0.0) || !(self.tolerance > 0.0) || self.max_iters == 0 {
            return Err(invalid!(
                "step_size, tolerance and max_iters must be positive"
            ));
        }
        Ok(())
    }
}

/// The pooled map `d` with dimension equal to the feature dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicMap {
    pub weights: Vec<f64>,
    pub mode: RankPoolMode,
    /// Final objective value, exact mode only.
    pub objective_value: Option<f64>,
    pub iterations: usize,
}

/// Mean of the first `t` frames (1-based `t`).
pub fn time_average(seq: &FeatureSequence, t: usize) -> Result<Vec<f64>> {
    if t == 0 || t > seq.len() {
        return Err(invalid!("t = {t} outside 1..={}", seq.len()));
    }
    let mut acc = vec![0f64; seq.dim];
    for f in &seq.frames[..t] {
        for (a, &v) in acc.iter_mut().zip(f) {
            *a += v as f64;
        }
    }
    let inv = 1.0 / t as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    Ok(acc)
}

/// All time averages, computed with one running sum.
pub fn time_averages(seq: &FeatureSequence) -> Vec<Vec<f64>> {
    let mut sum = vec![0f64; seq.dim];
    seq.frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            for (s, &v) in sum.iter_mut().zip(f) {
                *s += v as f64;
            }
            let inv = 1.0 / (i + 1) as f64;
            sum.iter().map(|s| s * inv).collect()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ranking score of time `t`: the inner product of `d` and its time average.
pub fn rank_score(d: &[f64], phi_t: &[f64]) -> Result<f64> {
    if d.len() != phi_t.len() {
        return Err(shape_err!(
            "rank score: d has dimension {}, phi has {}",
            d.len(),
            phi_t.len()
        ));
    }
    Ok(dot(d, phi_t))
}

struct Problem {
    averages: Vec<Vec<f64>>,
    delta: f64,
    pair_weight: f64,
}

impl Problem {
    fn new(seq: &FeatureSequence, delta: f64) -> Result<Self> {
        let t = seq.len();
        if t < 2 {
            return Err(invalid!(
                "rank pooling objective needs at least 2 frames, got {t}"
            ));
        }
        Ok(Self {
            averages: time_averages(seq),
            delta,
            pair_weight: 2.0 / (t * (t - 1)) as f64,
        })
    }

    fn scores(&self, d: &[f64]) -> Vec<f64> {
        self.averages.iter().map(|phi| dot(d, phi)).collect()
    }

    fn objective(&self, d: &[f64]) -> f64 {
        let s = self.scores(d);
        let mut hinge = 0.0;
        for l in 0..s.len() {
            for t in 0..l {
                hinge += (1.0 - s[l] + s[t]).max(0.0);
            }
        }
        0.5 * self.delta * dot(d, d) + self.pair_weight * hinge
    }

    /// Subgradient; a pair sitting exactly on the margin contributes 0.
    fn subgradient(&self, d: &[f64]) -> Vec<f64> {
        let s = self.scores(d);
        let mut counts = vec![0i64; s.len()];
        for l in 0..s.len() {
            for t in 0..l {
                if 1.0 - s[l] + s[t] > 0.0 {
                    counts[t] += 1;
                    counts[l] -= 1;
                }
            }
        }
        let mut g: Vec<f64> = d.iter().map(|v| self.delta * v).collect();
        for (phi, &c) in self.averages.iter().zip(&counts) {
            if c == 0 {
                continue;
            }
            let w = self.pair_weight * c as f64;
            for (gi, p) in g.iter_mut().zip(phi) {
                *gi += w * p;
            }
        }
        g
    }
}

/// Regularized pairwise hinge objective `E(d)` over all ordered pairs.
pub fn rank_objective(d: &[f64], seq: &FeatureSequence, delta: f64) -> Result<f64> {
    if d.len() != seq.dim() {
        return Err(shape_err!(
            "objective: d has dimension {}, features have {}",
            d.len(),
            seq.dim()
        ));
    }
    Ok(Problem::new(seq, delta)?.objective(d))
}

/// Minimizes the rank objective by subgradient descent from `d = 0`.
///
/// A step that would increase the objective is rejected and the step size
/// halved, so the accepted objective sequence is non-increasing.
pub fn solve_exact(seq: &FeatureSequence, cfg: &RankPoolConfig) -> Result<DynamicMap> {
    cfg.validate()?;
    seq.ensure_finite()?;
    let problem = Problem::new(seq, cfg.delta)?;
    let mut d = vec![0f64; seq.dim()];
    let mut energy = problem.objective(&d);
    let mut step = cfg.step_size;
    let min_step = cfg.step_size * 1e-12;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let g = problem.subgradient(&d);
        if g.iter().all(|&v| v == 0.0) {
            break;
        }
        let candidate: Vec<f64> = d.iter().zip(&g).map(|(x, gx)| x - step * gx).collect();
        let next = problem.objective(&candidate);
        if next <= energy {
            let moved = step * g.iter().map(|v| v * v).sum::<f64>().sqrt();
            d = candidate;
            energy = next;
            if moved < cfg.tolerance {
                break;
            }
        } else {
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
    }
    Ok(DynamicMap {
        weights: d,
        mode: RankPoolMode::Exact,
        objective_value: Some(energy),
        iterations,
    })
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Closed-form approximate rank pooling coefficients
/// `alpha_t = 2(T - t + 1) - (T + 1)(H_T - H_{t-1})`, `t = 1..=T`.
pub fn approx_coefficients(frames: usize) -> Result<Vec<f64>> {
    if frames == 0 {
        return Err(invalid!("approximate coefficients need T >= 1"));
    }
    let t_total = frames as f64;
    let h_total = harmonic(frames);
    let mut h_prev = 0.0;
    Ok((1..=frames)
        .map(|t| {
            let alpha = 2.0 * (t_total - t as f64 + 1.0) - (t_total + 1.0) * (h_total - h_prev);
            h_prev += 1.0 / t as f64;
            alpha
        })
        .collect())
}

/// `sum_t alpha_t * phi_t`, valid for any `T >= 1`.
///
/// Evaluated as `sum_t alpha_t * (phi_t - phi_T)`, equal because the
/// coefficients sum to zero, so a static clip yields exactly zero instead
/// of rounding residue.
pub fn approximate_map(seq: &FeatureSequence) -> Result<DynamicMap> {
    let alphas = approx_coefficients(seq.len())?;
    let phis = time_averages(seq);
    let last = &phis[phis.len() - 1];
    let mut d = vec![0f64; seq.dim()];
    for (phi, a) in phis.iter().zip(&alphas) {
        for ((x, p), q) in d.iter_mut().zip(phi).zip(last) {
            *x += a * (p - q);
        }
    }
    Ok(DynamicMap {
        weights: d,
        mode: RankPoolMode::Approximate,
        objective_value: None,
        iterations: 0,
    })
}

pub fn rank_pool(seq: &FeatureSequence, cfg: &RankPoolConfig) -> Result<DynamicMap> {
    match cfg.mode {
        RankPoolMode::Exact => solve_exact(seq, cfg),
        RankPoolMode::Approximate => approximate_map(seq),
    }
}

/// Quantizes an interleaved RGB map to bytes by per-channel min-max scaling.
/// A constant channel maps to 128.
pub fn compose_dynamic_image(map: &DynamicMap, width: usize, height: usize) -> Result<RgbImage> {
    let d = &map.weights;
    if d.len() != width * height * 3 {
        return Err(shape_err!(
            "map of dimension {} cannot form a {width}x{height} RGB image",
            d.len()
        ));
    }
    let mut pixels = vec![0u8; d.len()];
    for c in 0..3 {
        let (lo, hi) = d
            .iter()
            .skip(c)
            .step_by(3)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let range = hi - lo;
        for (px, &v) in pixels
            .iter_mut()
            .skip(c)
            .step_by(3)
            .zip(d.iter().skip(c).step_by(3))
        {
            *px = if range > 0.0 {
                ((v - lo) / range * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                128
            };
        }
    }
    RgbImage::new(width, height, pixels)
}

/// Frames to displayable dynamic image in one call.
pub fn dynamic_image(frames: &[RgbImage], cfg: &RankPoolConfig) -> Result<(DynamicMap, RgbImage)> {
    let first = frames
        .first()
        .ok_or_else(|| invalid!("no frames to pool"))?;
    let seq = FeatureSequence::from_frames(frames)?;
    let map = rank_pool(&seq, cfg)?;
    let image = compose_dynamic_image(&map, first.width(), first.height())?;
    Ok((map, image))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_average_basics() {
        let seq = FeatureSequence::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(time_average(&seq, 1).unwrap(), vec![0.0]);
        assert_eq!(time_average(&seq, 3).unwrap(), vec![1.0]);
        assert!(time_average(&seq, 0).is_err());
        assert!(time_average(&seq, 4).is_err());
        let c = FeatureSequence::new(vec![vec![0.25, 0.5]; 6]).unwrap();
        for t in 1..=6 {
            assert_eq!(time_average(&c, t).unwrap(), vec![0.25, 0.5]);
        }
        assert_eq!(time_averages(&seq), vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn rank_score_basics() {
        assert_eq!(rank_score(&[0.0, 0.0], &[3.0, 9.0]).unwrap(), 0.0);
        assert_eq!(rank_score(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(rank_score(&[2.0, 4.0], &[3.0, 4.0]).unwrap(), 22.0);
        assert!(rank_score(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn objective_values() {
        let ramp = FeatureSequence::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        assert!((rank_objective(&[0.0], &ramp, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let e = rank_objective(&[2.0 / 3.0], &ramp, 1.0).unwrap();
        assert!((e - 7.0 / 9.0).abs() < 1e-12, "{e}");
        let flat = FeatureSequence::new(vec![vec![0.3, 0.6]; 4]).unwrap();
        let d = [1.5, -2.0];
        let e = rank_objective(&d, &flat, 0.5).unwrap();
        assert!((e - (0.25 * 6.25 + 1.0)).abs() < 1e-12);
        let single = FeatureSequence::from_scalars(&[1.0]).unwrap();
        assert!(rank_objective(&[0.0], &single, 1.0).is_err());
    }

    #[test]
    fn exact_solver_rejects_bad_input() {
        let single = FeatureSequence::from_scalars(&[1.0]).unwrap();
        assert!(solve_exact(&single, &RankPoolConfig::exact()).is_err());
        let nan = FeatureSequence::from_scalars(&[1.0, f32::NAN]).unwrap();
        assert!(solve_exact(&nan, &RankPoolConfig::exact()).is_err());
    }

    #[test]
    fn coefficient_values() {
        assert_eq!(approx_coefficients(1).unwrap(), vec![0.0]);
        assert_eq!(approx_coefficients(2).unwrap(), vec![-0.5, 0.5]);
        let c3 = approx_coefficients(3).unwrap();
        for (a, b) in c3.iter().zip([-4.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(approx_coefficients(0).is_err());
    }

    #[test]
    fn compose_rules() {
        let flat = DynamicMap {
            weights: vec![0.3; 12],
            mode: RankPoolMode::Approximate,
            objective_value: None,
            iterations: 0,
        };
        let img = compose_dynamic_image(&flat, 2, 2).unwrap();
        assert!(img.pixels().iter().all(|&b| b == 128));

        // Three pixels; the red channel carries -1, 0, 1.
        let map = DynamicMap {
            weights: vec![-1.0, 5.0, 0.0, 0.0, 5.0, 0.0, 1.0, 5.0, 0.0],
            ..flat.clone()
        };
        let img = compose_dynamic_image(&map, 3, 1).unwrap();
        assert_eq!(img.channel(0).collect::<Vec<_>>(), vec![0, 128, 255]);
        assert!(compose_dynamic_image(&map, 2, 2).is_err());
    }
}
