//! Sampling oracle for fluctuation variances.
//!
//! Each vacuum mode is drawn as a complex Gaussian amplitude `alpha` whose
//! real and imaginary parts are independent with variance 1/4. An operator
//! with weights `w_j` then samples as `2 Re(sum_j w_j alpha_j)`, whose
//! variance is `sum_j |w_j|^2`, the analytic variance functional. This is the
//! only place that convention is fixed.
//!
//! Random numbers come from ChaCha8 used as a counter-based generator: sample
//! `i` always reads the same fixed window of the keystream (found with
//! `set_word_pos`), so results depend on `(seed, n_samples)` only. Chunks of
//! samples are filled in parallel and then reduced in index order with
//! Neumaier summation, which keeps the reported variance bit-identical for
//! any `chunk_size` or thread count.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{non_negative, Error, Result};
use crate::fluctuation::FluctuationOperator;
use crate::reservoir::{iterated_bounce, BounceChannel};

/// Keystream words (u32) consumed by one complex vacuum amplitude.
const WORDS_PER_AMPLITUDE: u128 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    n_samples: usize,
    seed: u64,
    chunk_size: usize,
}

impl SamplerConfig {
    pub const DEFAULT_CHUNK: usize = 16_384;

    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        Self::with_chunk_size(n_samples, seed, Self::DEFAULT_CHUNK)
    }

    pub fn with_chunk_size(n_samples: usize, seed: u64, chunk_size: usize) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::OutOfRange {
                name: "n_samples",
                reason: "need at least one sample".into(),
            });
        }
        if chunk_size == 0 {
            return Err(Error::OutOfRange {
                name: "chunk_size",
                reason: "need at least one sample per chunk".into(),
            });
        }
        Ok(SamplerConfig {
            n_samples,
            seed,
            chunk_size,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub sample_variance: f64,
    pub analytic_variance: f64,
    /// `sample_variance * sqrt(2 / n)`, the Gaussian standard error.
    pub standard_error: f64,
    pub z_score: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl EstimateReport {
    fn new(sample_variance: f64, analytic_variance: f64, cfg: &SamplerConfig) -> Self {
        let n = cfg.n_samples as f64;
        let standard_error = sample_variance * (2.0 / n).sqrt();
        let diff = sample_variance - analytic_variance;
        let z_score = if standard_error > 0.0 {
            diff / standard_error
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        EstimateReport {
            sample_variance,
            analytic_variance,
            standard_error,
            z_score,
            n_samples: cfg.n_samples,
            seed: cfg.seed,
        }
    }
}

/// Keystream reader positioned at the window belonging to one sample.
struct VacuumStream(ChaCha8Rng);

impl VacuumStream {
    fn at(seed: u64, sample: usize, amplitudes_per_sample: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(sample as u128 * amplitudes_per_sample as u128 * WORDS_PER_AMPLITUDE);
        VacuumStream(rng)
    }

    fn unit_open(&mut self) -> f64 {
        // (0, 1], 53 random bits
        ((self.0.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Box-Muller pair of independent standard normals.
    fn normal_pair(&mut self) -> (f64, f64) {
        let radius = (-2.0 * self.unit_open().ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * self.unit_open()).sin_cos();
        (radius * c, radius * s)
    }

    /// Vacuum amplitude, variance 1/4 per real component.
    fn vacuum_amplitude(&mut self) -> Complex64 {
        let (x, y) = self.normal_pair();
        Complex64::new(0.5 * x, 0.5 * y)
    }
}

/// Compensated sum in slice order.
fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Draws `n_samples` values with `draw(stream)` in parallel chunks and
/// returns their mean square. Each sample's stream window holds
/// `amplitudes_per_sample` vacuum amplitudes.
fn mean_square<F>(cfg: &SamplerConfig, amplitudes_per_sample: usize, draw: F) -> f64
where
    F: Fn(&mut VacuumStream) -> f64 + Sync,
{
    let mut values = vec![0.0f64; cfg.n_samples];
    if amplitudes_per_sample > 0 {
        values
            .par_chunks_mut(cfg.chunk_size)
            .enumerate()
            .for_each(|(chunk, out)| {
                let first = chunk * cfg.chunk_size;
                let mut stream = VacuumStream::at(cfg.seed, first, amplitudes_per_sample);
                for slot in out.iter_mut() {
                    *slot = draw(&mut stream);
                }
            });
    }
    neumaier_sum(values.iter().map(|x| x * x)) / cfg.n_samples as f64
}

/// Empirical variance of `op` over vacuum draws of its modes. The fluctuation
/// has zero mean by construction, so the estimator is the mean square.
pub fn sample_operator(op: &FluctuationOperator, cfg: &SamplerConfig) -> EstimateReport {
    let weights: Vec<Complex64> = op.iter().map(|(_, w)| w).collect();
    let sample_variance = mean_square(cfg, weights.len(), |stream| {
        let sum: Complex64 = weights.iter().map(|w| w * stream.vacuum_amplitude()).sum();
        2.0 * sum.re
    });
    EstimateReport::new(sample_variance, op.variance(), cfg)
}

/// Trajectory simulation of [`iterated_bounce`]: a Gaussian input quadrature
/// of standard deviation `input_std` is mixed with an independent vacuum
/// quadrature on each of `m` bounces.
pub fn sample_iterated_bounce(
    channel: &BounceChannel,
    m: u32,
    input_std: f64,
    cfg: &SamplerConfig,
) -> Result<EstimateReport> {
    non_negative("input_std", input_std)?;
    let (sin, cos) = channel.theta().sin_cos();
    let vacuum_scale = 2.0 * std::f64::consts::FRAC_1_SQRT_2;
    let sample_variance = mean_square(cfg, m as usize + 1, |stream| {
        // 2 Re(alpha) has unit variance
        let mut x = input_std * 2.0 * stream.vacuum_amplitude().re;
        for _ in 0..m {
            let vacuum = vacuum_scale * stream.vacuum_amplitude().re;
            x = cos * x + sin * vacuum;
        }
        x
    });
    let analytic = iterated_bounce(channel, m, input_std * input_std).variance;
    Ok(EstimateReport::new(sample_variance, analytic, cfg))
}
