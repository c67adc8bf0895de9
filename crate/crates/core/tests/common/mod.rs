#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jsccsj_core::model::{CondKernel, JammedChannel, JsccsjSystem, Pmf, StrategyProfile};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive random pmf (normalized exponentials).
pub fn pmf(rng: &mut ChaCha8Rng, len: usize) -> Pmf {
    let raw: Vec<f64> = (0..len)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-3)
        .collect();
    let total: f64 = raw.iter().sum();
    Pmf::new(raw.into_iter().map(|v| v / total).collect()).unwrap()
}

pub fn kernel(rng: &mut ChaCha8Rng, rows: usize, len: usize) -> CondKernel {
    CondKernel::from_rows((0..rows).map(|_| pmf(rng, len)).collect()).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct Dims {
    pub s: usize,
    pub x: usize,
    pub j: usize,
    pub y: usize,
    pub shat: usize,
}

pub fn dims(rng: &mut ChaCha8Rng) -> Dims {
    let mut d = || rng.random_range(2..=3);
    Dims {
        s: d(),
        x: d(),
        j: d(),
        y: d(),
        shat: d(),
    }
}

/// Random system with positive kernels, costs in [0, 1), a user budget
/// that admits every input and a jammer budget halfway between the largest
/// per-input minimum cost and the dearest action, so that it is feasible
/// under any input distribution but binding for some.
pub fn system(rng: &mut ChaCha8Rng, d: Dims) -> JsccsjSystem {
    let source = pmf(rng, d.s);
    let channel = JammedChannel::from_fn(d.x, d.j, |_, _| pmf(rng, d.y).probs().to_vec()).unwrap();
    let user_cost: Vec<f64> = (0..d.x).map(|_| rng.random()).collect();
    let jammer_cost: Vec<Vec<f64>> = (0..d.x)
        .map(|_| (0..d.j).map(|_| rng.random()).collect())
        .collect();
    let distortion: Vec<Vec<f64>> = (0..d.s)
        .map(|_| (0..d.shat).map(|_| rng.random()).collect())
        .collect();
    let lo = jammer_cost
        .iter()
        .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = jammer_cost
        .iter()
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::NEG_INFINITY, f64::max);
    JsccsjSystem::new(
        source,
        channel,
        user_cost,
        jammer_cost,
        distortion,
        1.0,
        0.5 * (lo + hi),
    )
    .unwrap()
}

pub fn profile(rng: &mut ChaCha8Rng, d: Dims) -> StrategyProfile {
    StrategyProfile::new(
        kernel(rng, d.s, d.x),
        kernel(rng, d.y, d.shat),
        kernel(rng, d.x, d.j),
    )
}

/// Random jammer kernel whose expected cost under `px` stays within
/// `budget`: a random kernel mixed toward the cheapest action per input.
pub fn feasible_jammer(
    rng: &mut ChaCha8Rng,
    system: &JsccsjSystem,
    px: &[f64],
    budget: f64,
) -> Option<CondKernel> {
    let nj = system.num_jammer_inputs();
    let raw = kernel(rng, system.num_inputs(), nj);
    let cheap: Vec<usize> = system
        .jammer_cost()
        .iter()
        .map(|r| {
            let m = r.iter().copied().fold(f64::INFINITY, f64::min);
            r.iter().position(|&c| c == m).unwrap()
        })
        .collect();
    let floor = CondKernel::deterministic(&cheap, nj).unwrap();
    let cost = |k: &CondKernel| -> f64 {
        px.iter()
            .enumerate()
            .map(|(x, w)| {
                w * (0..nj)
                    .map(|j| k.prob(x, j) * system.jammer_cost()[x][j])
                    .sum::<f64>()
            })
            .sum()
    };
    let (c_raw, c_floor) = (cost(&raw), cost(&floor));
    if c_floor > budget {
        return None;
    }
    // weight on the random kernel
    let max_w = if c_raw <= budget {
        1.0
    } else {
        (budget - c_floor) / (c_raw - c_floor)
    };
    let w = rng.random::<f64>() * max_w;
    Some(raw.mix(&floor, w).unwrap())
}
