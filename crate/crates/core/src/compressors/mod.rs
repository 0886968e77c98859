//! Unbiased compression operators with keyed randomness and per-message bit costs.
//!
//! Every output is a deterministic function of `(spec, master seed, worker, round, call, input)`.
//! In [`Randomness::Independent`] mode each worker draws from its own substream; in
//! [`Randomness::Shared`] mode all workers draw from one substream, so identical inputs in the
//! same round compress identically.

pub mod bits;
pub mod elias;

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::vector::{check_dim, DenseVector};

pub use bits::{ceil_log2_binomial, min_bits_lower_bound, random_s_bits};
pub use elias::{elias_decode, elias_encode, gamma_len, BitString};

/// Bits charged per entry by natural compression: one sign bit and eleven exponent bits.
pub const NATURAL_BITS_PER_ENTRY: u64 = 12;

/// Default bits per raw entry.
pub const DEFAULT_R_BITS: u32 = 64;

const SHARED_KEY: u64 = u64::MAX - 1;
const SERVER_KEY: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompressorKind {
    Identity,
    RandomS { s: usize },
    /// Random-`s` without the `d/s` rescaling (biased; used by EF21).
    UnscaledRandomS { s: usize },
    Natural,
    /// QSGD-style stochastic quantization; `levels` defaults to `⌈√d⌉`.
    Quantize { levels: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Randomness {
    #[default]
    Independent,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressorSpec {
    pub kind: CompressorKind,
    pub randomness: Randomness,
    /// Bits per raw entry.
    pub r_bits: u32,
}

impl CompressorSpec {
    pub fn new(kind: CompressorKind, randomness: Randomness) -> Self {
        CompressorSpec {
            kind,
            randomness,
            r_bits: DEFAULT_R_BITS,
        }
    }

    pub fn identity() -> Self {
        Self::new(CompressorKind::Identity, Randomness::Independent)
    }

    pub fn random_s(s: usize, randomness: Randomness) -> Self {
        Self::new(CompressorKind::RandomS { s }, randomness)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self.kind {
            CompressorKind::RandomS { s } | CompressorKind::UnscaledRandomS { s } if s == 0 || s > d => Err(
                Error::invalid(format!("random-s needs 1 <= s <= d, got s={s}, d={d}")),
            ),
            CompressorKind::Quantize { levels: Some(0) } => Err(Error::invalid("quantization needs >= 1 level")),
            _ if self.r_bits == 0 => Err(Error::invalid("r_bits must be >= 1")),
            _ => Ok(()),
        }
    }

    pub fn quantize_levels(&self, d: usize) -> usize {
        match self.kind {
            CompressorKind::Quantize { levels } => levels.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize),
            _ => 0,
        }
    }

    /// Declared variance parameter `ω` on dimension `d`.
    ///
    /// For the unscaled variant this is the nominal `d/s − 1` of its scaled counterpart.
    pub fn omega(&self, d: usize) -> f64 {
        match self.kind {
            CompressorKind::Identity => 0.0,
            CompressorKind::RandomS { s } | CompressorKind::UnscaledRandomS { s } => d as f64 / s as f64 - 1.0,
            CompressorKind::Natural => 0.125,
            CompressorKind::Quantize { .. } => {
                let s = self.quantize_levels(d) as f64;
                let d = d as f64;
                (d / (s * s)).min(d.sqrt() / s)
            }
        }
    }

    /// Bits per message when the cost does not depend on the message.
    pub fn fixed_bits(&self, d: usize) -> Option<u64> {
        let r = u64::from(self.r_bits);
        match self.kind {
            CompressorKind::Identity => Some(r * d as u64),
            CompressorKind::RandomS { s } | CompressorKind::UnscaledRandomS { s } => {
                Some(random_s_bits(d, s, self.r_bits))
            }
            CompressorKind::Natural => Some(NATURAL_BITS_PER_ENTRY * d as u64),
            CompressorKind::Quantize { .. } => None,
        }
    }

    pub fn is_unbiased(&self) -> bool {
        !matches!(self.kind, CompressorKind::UnscaledRandomS { .. })
    }
}

impl fmt::Display for CompressorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.randomness {
            Randomness::Independent => "id",
            Randomness::Shared => "sd",
        };
        match self.kind {
            CompressorKind::Identity => write!(f, "identity"),
            CompressorKind::RandomS { s } => write!(f, "{mode}-rand{s}"),
            CompressorKind::UnscaledRandomS { s } => write!(f, "{mode}-unscaled-rand{s}"),
            CompressorKind::Natural => write!(f, "{mode}-natural"),
            CompressorKind::Quantize { levels: Some(l) } => write!(f, "{mode}-quant{l}"),
            CompressorKind::Quantize { levels: None } => write!(f, "{mode}-quant"),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A ChaCha stream keyed by a tuple of tags.
pub fn keyed_rng(tags: &[u64]) -> ChaCha8Rng {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for &t in tags {
        h = splitmix64(h ^ splitmix64(t));
    }
    let mut seed = [0u8; 32];
    for (k, chunk) in seed.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(h ^ k as u64).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// A 64-bit seed derived from a tuple of tags.
pub fn derive_seed(tags: &[u64]) -> u64 {
    keyed_rng(tags).random()
}

/// A compressor bound to a dimension and master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressorState {
    spec: CompressorSpec,
    dim: usize,
    master_seed: u64,
}

impl CompressorState {
    pub fn new(spec: CompressorSpec, dim: usize, master_seed: u64) -> Result<Self> {
        spec.validate(dim)?;
        Ok(CompressorState {
            spec,
            dim,
            master_seed,
        })
    }

    pub fn spec(&self) -> &CompressorSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn omega(&self) -> f64 {
        self.spec.omega(self.dim)
    }

    fn stream(&self, worker: usize, round: usize, call: usize) -> ChaCha8Rng {
        let key = match self.spec.randomness {
            Randomness::Independent => worker as u64,
            Randomness::Shared => SHARED_KEY,
        };
        keyed_rng(&[self.master_seed, key, round as u64, call as u64])
    }

    /// Randomness reserved for server-side draws in `round`.
    pub fn server_rng(&self, round: usize) -> ChaCha8Rng {
        keyed_rng(&[self.master_seed, SERVER_KEY, round as u64, 0])
    }

    pub fn compress(&self, worker: usize, round: usize, call: usize, x: &[f64]) -> Result<(DenseVector, u64)> {
        let mut out = DenseVector::zeros(self.dim);
        let bits = self.compress_into(worker, round, call, x, &mut out)?;
        Ok((out, bits))
    }

    /// Writes `C(x)` into `out` and returns the message's bit cost.
    pub fn compress_into(&self, worker: usize, round: usize, call: usize, x: &[f64], out: &mut [f64]) -> Result<u64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, out.len())?;
        let d = self.dim;
        let r = u64::from(self.spec.r_bits);
        match self.spec.kind {
            CompressorKind::Identity => {
                out.copy_from_slice(x);
                Ok(r * d as u64)
            }
            CompressorKind::RandomS { s } | CompressorKind::UnscaledRandomS { s } => {
                let scale = match self.spec.kind {
                    CompressorKind::RandomS { .. } => d as f64 / s as f64,
                    _ => 1.0,
                };
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut rng = self.stream(worker, round, call);
                for j in index::sample(&mut rng, d, s) {
                    out[j] = scale * x[j];
                }
                Ok(random_s_bits(d, s, self.spec.r_bits))
            }
            CompressorKind::Natural => {
                let mut rng = self.stream(worker, round, call);
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = natural_round(v, rng.random::<f64>());
                }
                Ok(NATURAL_BITS_PER_ENTRY * d as u64)
            }
            CompressorKind::Quantize { .. } => {
                let levels = self.spec.quantize_levels(d);
                let mut rng = self.stream(worker, round, call);
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut code_bits = 0u64;
                for (o, &v) in out.iter_mut().zip(x) {
                    let level = if norm > 0.0 {
                        let t = levels as f64 * v.abs() / norm;
                        let lo = t.floor();
                        let up = rng.random::<f64>() < t - lo;
                        (lo as u64 + u64::from(up)).min(levels as u64)
                    } else {
                        0
                    };
                    *o = if level == 0 {
                        0.0
                    } else {
                        v.signum() * norm * level as f64 / levels as f64
                    };
                    code_bits += gamma_len(level + 1);
                }
                Ok(r + d as u64 + code_bits)
            }
        }
    }

    /// Sample mean of `C(x)` and of `‖C(x) − x‖²` over `trials` draws of worker 0.
    pub fn empirical_moments(&self, x: &[f64], trials: usize) -> Result<Moments> {
        check_dim(self.dim, x.len())?;
        let mut out = vec![0.0; self.dim];
        let mut sum = vec![0.0; self.dim];
        let mut sum_sq = vec![0.0; self.dim];
        let mut err = Welford::default();
        for t in 0..trials {
            self.compress_into(0, t, 0, x, &mut out)?;
            let mut e = 0.0;
            for j in 0..self.dim {
                sum[j] += out[j];
                sum_sq[j] += out[j] * out[j];
                e += (out[j] - x[j]).powi(2);
            }
            err.push(e);
        }
        let m = trials as f64;
        let mean: DenseVector = sum.iter().map(|s| s / m).collect();
        let mean_se = sum
            .iter()
            .zip(&sum_sq)
            .map(|(s, q)| {
                let var = ((q - s * s / m) / (m - 1.0).max(1.0)).max(0.0);
                (var / m).sqrt()
            })
            .collect();
        Ok(Moments {
            mean,
            mean_se,
            variance: err.mean(),
            variance_se: err.standard_error(),
        })
    }

    /// Sample mean of `‖(1/n) Σ_i C_i(x) − x‖²` over `trials` rounds.
    pub fn aggregate_variance(&self, n: usize, x: &[f64], trials: usize) -> Result<(f64, f64)> {
        check_dim(self.dim, x.len())?;
        let mut out = vec![0.0; self.dim];
        let mut agg = vec![0.0; self.dim];
        let mut stat = Welford::default();
        for t in 0..trials {
            agg.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                self.compress_into(i, t, 0, x, &mut out)?;
                for j in 0..self.dim {
                    agg[j] += out[j];
                }
            }
            let e: f64 = agg
                .iter()
                .zip(x)
                .map(|(a, v)| (a / n as f64 - v).powi(2))
                .sum();
            stat.push(e);
        }
        Ok((stat.mean(), stat.standard_error()))
    }
}

/// Randomized rounding of `v` to one of the two adjacent powers of two, keeping the sign.
fn natural_round(v: f64, u: f64) -> f64 {
    let a = v.abs();
    if a == 0.0 || !a.is_normal() {
        return v;
    }
    let lo = f64::from_bits(a.to_bits() & 0x7FF0_0000_0000_0000);
    let hi = 2.0 * lo;
    if !hi.is_finite() {
        return v;
    }
    let p_hi = (a - lo) / lo;
    let r = if u < p_hi { hi } else { lo };
    r.copysign(v)
}

/// Monte-Carlo moments of a compressor.
#[derive(Debug, Clone)]
pub struct Moments {
    pub mean: DenseVector,
    /// Componentwise standard error of `mean`.
    pub mean_se: DenseVector,
    /// Sample mean of `‖C(x) − x‖²`.
    pub variance: f64,
    pub variance_se: f64,
}

/// Running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(kind: CompressorKind, mode: Randomness, d: usize) -> CompressorState {
        CompressorState::new(CompressorSpec::new(kind, mode), d, 42).unwrap()
    }

    #[test]
    fn identity_is_lossless() {
        let c = state(CompressorKind::Identity, Randomness::Independent, 3);
        let (y, bits) = c.compress(1, 2, 0, &[1.0, -2.0, 3.5]).unwrap();
        assert_eq!(y.as_slice(), &[1.0, -2.0, 3.5]);
        assert_eq!(bits, 192);
    }

    #[test]
    fn full_random_s_is_identity() {
        let c = state(CompressorKind::RandomS { s: 4 }, Randomness::Independent, 4);
        let x = [1.0, 2.0, 3.0, 4.0];
        let (y, bits) = c.compress(0, 0, 0, &x).unwrap();
        assert_eq!(y.as_slice(), &x);
        assert_eq!(bits, 256);
    }

    #[test]
    fn random_1_keeps_one_scaled_entry() {
        let c = state(CompressorKind::RandomS { s: 1 }, Randomness::Independent, 20);
        let x: Vec<f64> = (1..=20).map(f64::from).collect();
        let (y, bits) = c.compress(3, 5, 1, &x).unwrap();
        assert_eq!(bits, 69);
        let nz: Vec<usize> = (0..20).filter(|&j| y[j] != 0.0).collect();
        assert_eq!(nz.len(), 1);
        assert_eq!(y[nz[0]], 20.0 * x[nz[0]]);
    }

    #[test]
    fn unscaled_keeps_values() {
        let c = state(CompressorKind::UnscaledRandomS { s: 2 }, Randomness::Independent, 5);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let (y, _) = c.compress(0, 0, 0, &x).unwrap();
        assert_eq!(y.iter().filter(|v| **v != 0.0).count(), 2);
        assert!(y.iter().zip(&x).all(|(a, b)| *a == 0.0 || a == b));
    }

    #[test]
    fn dimension_mismatch() {
        let c = state(CompressorKind::Natural, Randomness::Independent, 3);
        assert!(c.compress(0, 0, 0, &[1.0]).is_err());
        assert!(CompressorState::new(CompressorSpec::random_s(0, Randomness::Shared), 3, 0).is_err());
        assert!(CompressorState::new(CompressorSpec::random_s(4, Randomness::Shared), 3, 0).is_err());
    }

    #[test]
    fn natural_rounds_to_powers_of_two() {
        assert_eq!(natural_round(1.5, 0.1), 2.0);
        assert_eq!(natural_round(1.5, 0.9), 1.0);
        assert_eq!(natural_round(-3.0, 0.4), -4.0);
        assert_eq!(natural_round(-3.0, 0.6), -2.0);
        assert_eq!(natural_round(4.0, 0.0), 4.0);
        assert_eq!(natural_round(0.0, 0.5), 0.0);
    }

    #[test]
    fn quantize_bits_include_norm_signs_and_codes() {
        let c = state(CompressorKind::Quantize { levels: None }, Randomness::Independent, 4);
        // levels = 2; x = e1 quantizes exactly to level 2 on entry 0 and 0 elsewhere.
        let (y, bits) = c.compress(0, 0, 0, &[3.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(y.as_slice(), &[3.0, 0.0, 0.0, 0.0]);
        assert_eq!(bits, 64 + 4 + gamma_len(3) + 3 * gamma_len(1));
        let (z, bits0) = c.compress(0, 0, 0, &[0.0; 4]).unwrap();
        assert_eq!(z.as_slice(), &[0.0; 4]);
        assert_eq!(bits0, 64 + 4 + 4);
    }

    #[test]
    fn declared_omegas() {
        assert_eq!(CompressorSpec::random_s(4, Randomness::Independent).omega(20), 4.0);
        assert_eq!(CompressorSpec::new(CompressorKind::Natural, Randomness::Independent).omega(7), 0.125);
        let q = CompressorSpec::new(CompressorKind::Quantize { levels: None }, Randomness::Independent);
        assert_eq!(q.quantize_levels(20), 5);
        assert!((q.omega(20) - (20f64 / 25.0).min(20f64.sqrt() / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn keyed_outputs_are_reproducible() {
        let c = state(CompressorKind::RandomS { s: 3 }, Randomness::Independent, 10);
        let x: Vec<f64> = (0..10).map(|v| v as f64 + 0.5).collect();
        let a = c.compress(2, 7, 1, &x).unwrap();
        let b = c.compress(2, 7, 1, &x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shared_mode_agrees_across_workers() {
        let c = state(CompressorKind::RandomS { s: 1 }, Randomness::Shared, 10);
        let x: Vec<f64> = (0..10).map(|v| v as f64 + 1.0).collect();
        let first = c.compress(0, 3, 0, &x).unwrap();
        for w in 1..8 {
            assert_eq!(c.compress(w, 3, 0, &x).unwrap(), first);
        }
    }

    #[test]
    fn zero_input_has_zero_moments() {
        let c = state(CompressorKind::RandomS { s: 2 }, Randomness::Independent, 6);
        let m = c.empirical_moments(&[0.0; 6], 1000).unwrap();
        assert!(m.mean.iter().all(|v| *v == 0.0));
        assert_eq!(m.variance, 0.0);
    }
}
