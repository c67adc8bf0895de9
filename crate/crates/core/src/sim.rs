//! Monte Carlo block transmission.
//!
//! Randomness: block `b` draws from `ChaCha8Rng::seed_from_u64(seed)` with
//! stream `b`, so each block's samples depend only on `(seed, b)`. Blocks
//! are processed in fixed chunks of [`CHUNK_BLOCKS`] (in parallel) and the
//! chunk sums are combined in block order, which makes the result
//! independent of the thread count.
//!
//! Within a block the draws are taken in the order `S^n`, `X^n`, `J^n`,
//! `Y^n`, `Shat^n`. An i.i.d. jammer draws one value per letter; a block
//! policy draws a single jammer block. A product block policy is therefore
//! equal in law to the i.i.d. path but not sample-for-sample identical.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{block_index, digits, BlockJammerPolicy};
use crate::gaussian::{GaussianSystem, LinearGaussianProfile};
use crate::model::{CondKernel, JsccsjSystem, Pmf, StrategyProfile};

pub const CHUNK_BLOCKS: usize = 4096;

/// Upper bound on `num_blocks * block_length`.
pub const MAX_LETTERS: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub block_length: usize,
    pub num_blocks: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(block_length: usize, num_blocks: usize, seed: u64) -> Result<Self> {
        let config = Self {
            block_length,
            num_blocks,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_length == 0 || self.num_blocks == 0 {
            return Err(Error::InvalidParameter(
                "block length and block count must be at least 1".into(),
            ));
        }
        let letters = (self.block_length as u64).checked_mul(self.num_blocks as u64);
        match letters {
            Some(l) if l <= MAX_LETTERS => Ok(()),
            _ => Err(Error::InvalidParameter(format!(
                "{} blocks of length {} exceed the limit of {MAX_LETTERS} letters",
                self.num_blocks, self.block_length
            ))),
        }
    }

    fn rng(&self, block: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block as u64);
        rng
    }
}

/// Mean and standard error of a per-block statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|mean - value|` in standard errors. Infinite if the estimate has no
    /// spread but misses `value`.
    pub fn z_score(&self, value: f64) -> f64 {
        let dev = (self.mean - value).abs();
        if dev == 0.0 {
            0.0
        } else {
            dev / self.std_error
        }
    }

    pub fn within(&self, value: f64, std_errors: f64) -> bool {
        self.z_score(value) <= std_errors
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub config: SimConfig,
    pub distortion: Estimate,
    pub user_cost: Estimate,
    pub jammer_cost: Estimate,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    count: u64,
    sum: [f64; 3],
    sum_sq: [f64; 3],
}

impl Sums {
    fn push(&mut self, values: [f64; 3]) {
        self.count += 1;
        for k in 0..3 {
            self.sum[k] += values[k];
            self.sum_sq[k] += values[k] * values[k];
        }
    }

    fn merge(mut self, other: &Sums) -> Sums {
        self.count += other.count;
        for k in 0..3 {
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
        }
        self
    }

    fn estimate(&self, k: usize) -> Estimate {
        let n = self.count as f64;
        let mean = self.sum[k] / n;
        let std_error = if self.count > 1 {
            let var = ((self.sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Estimate { mean, std_error }
    }
}

/// Runs `block` for every block index and aggregates its per-letter
/// averages `[distortion, user cost, jammer cost]`.
fn run_blocks<F>(config: &SimConfig, block: F) -> Result<SimResult>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; 3] + Sync,
{
    config.validate()?;
    let chunks = config.num_blocks.div_ceil(CHUNK_BLOCKS);
    let partial: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sums = Sums::default();
            let end = ((c + 1) * CHUNK_BLOCKS).min(config.num_blocks);
            for b in c * CHUNK_BLOCKS..end {
                sums.push(block(&mut config.rng(b)));
            }
            sums
        })
        .collect();
    let total = partial.iter().fold(Sums::default(), |acc, s| acc.merge(s));
    Ok(SimResult {
        config: *config,
        distortion: total.estimate(0),
        user_cost: total.estimate(1),
        jammer_cost: total.estimate(2),
    })
}

struct Sampler(Vec<WeightedIndex<f64>>);

impl Sampler {
    fn new(rows: &[Pmf]) -> Result<Self> {
        rows.iter()
            .map(|row| {
                WeightedIndex::new(row.probs().iter().copied())
                    .map_err(|e| Error::InvalidParameter(format!("cannot sample row: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Sampler)
    }

    fn from_kernel(kernel: &CondKernel) -> Result<Self> {
        Self::new(kernel.rows())
    }

    fn draw(&self, row: usize, rng: &mut ChaCha8Rng) -> usize {
        self.0[row].sample(rng)
    }
}

enum JammerDraw {
    Letters(Sampler),
    Block(Sampler),
}

fn simulate_finite(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
    config: &SimConfig,
    block_policy: Option<&BlockJammerPolicy>,
) -> Result<SimResult> {
    profile.check_shapes(system)?;
    config.validate()?;
    let n = config.block_length;
    let source = Sampler::new(std::slice::from_ref(system.source()))?;
    let encoder = Sampler::from_kernel(&profile.encoder)?;
    let decoder = Sampler::from_kernel(&profile.decoder)?;
    let channel = Sampler::new(
        &(0..system.num_inputs())
            .flat_map(|x| (0..system.num_jammer_inputs()).map(move |j| (x, j)))
            .map(|(x, j)| system.channel().row(x, j).clone())
            .collect::<Vec<_>>(),
    )?;
    let nx = system.num_inputs();
    let nj = system.num_jammer_inputs();
    let jammer = match block_policy {
        None => JammerDraw::Letters(Sampler::from_kernel(&profile.jammer)?),
        Some(policy) => {
            let expected_rows = nx.checked_pow(n as u32);
            let expected_out = nj.checked_pow(n as u32);
            if policy.n != n
                || Some(policy.kernel.num_rows()) != expected_rows
                || Some(policy.kernel.out_len()) != expected_out
            {
                return Err(Error::DimensionMismatch(format!(
                    "block policy of length {} ({} x {}) does not fit blocks of length {n} over {nx} inputs and {nj} jammer symbols",
                    policy.n,
                    policy.kernel.num_rows(),
                    policy.kernel.out_len()
                )));
            }
            JammerDraw::Block(Sampler::from_kernel(&policy.kernel)?)
        }
    };

    run_blocks(config, |rng| {
        let s: Vec<usize> = (0..n).map(|_| source.draw(0, rng)).collect();
        let x: Vec<usize> = s.iter().map(|&s| encoder.draw(s, rng)).collect();
        let j: Vec<usize> = match &jammer {
            JammerDraw::Letters(sampler) => x.iter().map(|&x| sampler.draw(x, rng)).collect(),
            JammerDraw::Block(sampler) => digits(sampler.draw(block_index(&x, nx), rng), nj, n),
        };
        let y: Vec<usize> = (0..n)
            .map(|i| channel.draw(x[i] * nj + j[i], rng))
            .collect();
        let shat: Vec<usize> = y.iter().map(|&y| decoder.draw(y, rng)).collect();
        let mut acc = [0.0; 3];
        for i in 0..n {
            acc[0] += system.distortion()[s[i]][shat[i]];
            acc[1] += system.user_cost()[x[i]];
            acc[2] += system.jammer_cost()[x[i]][j[i]];
        }
        acc.map(|v| v / n as f64)
    })
}

/// Simulates uncoded transmission with the profile's i.i.d. jammer.
pub fn simulate(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
    config: &SimConfig,
) -> Result<SimResult> {
    simulate_finite(system, profile, config, None)
}

/// Like [`simulate`] but `J^n` is drawn jointly from `policy` given `X^n`.
/// The profile's jammer is ignored.
pub fn simulate_block_jammer(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
    config: &SimConfig,
    policy: &BlockJammerPolicy,
) -> Result<SimResult> {
    simulate_finite(system, profile, config, Some(policy))
}

/// Linear strategies on the Gaussian system. Per letter the draws are
/// `S`, `R`, `Z` from the standard normal, scaled.
pub fn simulate_gaussian(
    system: &GaussianSystem,
    profile: &LinearGaussianProfile,
    config: &SimConfig,
) -> Result<SimResult> {
    if !(profile.jammer_noise_var >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "jammer noise variance must be non-negative, got {}",
            profile.jammer_noise_var
        )));
    }
    let n = config.block_length;
    let sd_s = system.source_var.sqrt();
    let sd_r = profile.jammer_noise_var.sqrt();
    let sd_z = system.noise_var.sqrt();
    run_blocks(config, |rng| {
        let mut acc = [0.0; 3];
        for _ in 0..n {
            let s = sd_s * rng.sample::<f64, _>(StandardNormal);
            let r = sd_r * rng.sample::<f64, _>(StandardNormal);
            let z = sd_z * rng.sample::<f64, _>(StandardNormal);
            let x = profile.encoder_gain * s;
            let j = profile.jammer_alpha * x + r;
            let shat = profile.decoder_gain * (x + j + z);
            acc[0] += (s - shat).powi(2);
            acc[1] += x * x;
            acc[2] += j * j;
        }
        acc.map(|v| v / n as f64)
    })
}
