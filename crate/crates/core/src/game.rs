//! Best responses for both players, the jammer's distortion cost function,
//! block-level oracles, and Nash-gap verification.
//!
//! The user side is only certified for deterministic uncoded strategies at
//! block length 1 (and, when small enough, exhaustively at larger block
//! lengths). Randomized encoders are mixtures of deterministic ones; when
//! the user budget is not binding they cannot beat the best deterministic
//! encoder, which covers every constant-cost system in [`crate::systems`].

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    conditional_distortion, expected_distortion, induced_channel, input_marginal,
    jammer_cost_under, CondKernel, JsccsjSystem, Pmf, StrategyProfile,
};
use crate::simplex::{LinearProgram, Relation};

/// Exhaustive encoder searches refuse to enumerate more candidates.
pub const ENCODER_SEARCH_LIMIT: f64 = 1e6;
/// Default cap on the number of LP variables in [`block_jammer_lp`].
pub const BLOCK_LP_VARIABLE_LIMIT: usize = 1024;

// Slack used when comparing costs against budgets and when breaking ties.
const COST_SLACK: f64 = 1e-12;
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct JammerResponse {
    pub kernel: CondKernel,
    pub value: f64,
    pub cost: f64,
}

/// Smallest expected jammer cost any i.i.d. policy can achieve.
pub fn min_jammer_cost(system: &JsccsjSystem, px: &[f64]) -> f64 {
    px.iter()
        .zip(system.jammer_cost())
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, row)| w * row.iter().copied().fold(f64::INFINITY, f64::min))
        .sum()
}

/// Maximizes `E[d(S, Shat)]` over i.i.d. jammer kernels with expected cost
/// at most `budget`, for a fixed uncoded user strategy. This is the
/// distortion cost function `D(budget)`.
pub fn jammer_best_response(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    decoder: &CondKernel,
    budget: f64,
) -> Result<JammerResponse> {
    let px = input_marginal(system, encoder)?;
    let h = conditional_distortion(system, encoder, decoder)?;
    let min_cost = min_jammer_cost(system, &px);
    if budget < min_cost - COST_SLACK {
        return Err(Error::InfeasibleBudget { budget, min_cost });
    }
    let (nx, nj) = (system.num_inputs(), system.num_jammer_inputs());
    let mut objective = Vec::with_capacity(nx * nj);
    let mut cost = Vec::with_capacity(nx * nj);
    for x in 0..nx {
        for j in 0..nj {
            objective.push(px[x] * h[x][j]);
            cost.push(px[x] * system.jammer_cost()[x][j]);
        }
    }
    let mut lp = LinearProgram::maximize(objective);
    for x in 0..nx {
        let mut row = vec![0.0; nx * nj];
        row[x * nj..(x + 1) * nj].fill(1.0);
        lp.add_constraint(row, Relation::Eq, 1.0)?;
    }
    lp.add_constraint(cost, Relation::Le, budget.max(min_cost))?;
    let solution = lp.solve()?;
    let kernel = CondKernel::from_rows(
        solution
            .x
            .chunks(nj)
            .map(|row| Pmf::new(row.to_vec()))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let value = px
        .iter()
        .enumerate()
        .map(|(x, &w)| w * kernel.row(x).expect(|j| h[x][j]))
        .sum();
    let cost = jammer_cost_under(system, &px, &kernel);
    Ok(JammerResponse {
        kernel,
        value,
        cost,
    })
}

/// `D(budget)` through the Lagrangian dual of the jammer LP,
/// `min_{lambda >= 0} lambda * budget + sum_x p_X(x) max_j (h(x,j) - lambda rho(j|x))`.
///
/// The dual is piecewise linear in `lambda`, so scanning zero and every
/// pairwise breakpoint finds the minimum exactly. Independent of the simplex
/// path; used to cross-check it.
pub fn lagrangian_jammer_value(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    decoder: &CondKernel,
    budget: f64,
) -> Result<f64> {
    let px = input_marginal(system, encoder)?;
    let h = conditional_distortion(system, encoder, decoder)?;
    let min_cost = min_jammer_cost(system, &px);
    if budget < min_cost - COST_SLACK {
        return Err(Error::InfeasibleBudget { budget, min_cost });
    }
    let rho = system.jammer_cost();
    let used: Vec<usize> = (0..px.len()).filter(|&x| px[x] > 0.0).collect();
    let mut candidates = vec![0.0];
    for &x in &used {
        for a in 0..h[x].len() {
            for b in (a + 1)..h[x].len() {
                let dr = rho[x][a] - rho[x][b];
                if dr != 0.0 {
                    let lambda = (h[x][a] - h[x][b]) / dr;
                    if lambda > 0.0 {
                        candidates.push(lambda);
                    }
                }
            }
        }
    }
    let dual = |lambda: f64| -> f64 {
        lambda * budget
            + used
                .iter()
                .map(|&x| {
                    px[x]
                        * h[x]
                            .iter()
                            .zip(&rho[x])
                            .map(|(hv, r)| hv - lambda * r)
                            .fold(f64::NEG_INFINITY, f64::max)
                })
                .sum::<f64>()
    };
    Ok(candidates
        .into_iter()
        .map(dual)
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub budget: f64,
    /// `None` when the budget is below the minimum feasible jammer cost.
    pub value: Option<f64>,
    pub kernel: Option<CondKernel>,
}

/// Samples of `D(P_J)` with shape diagnostics over the feasible samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionCurve {
    pub samples: Vec<CurveSample>,
    pub monotone_ok: bool,
    pub max_monotone_violation: f64,
    pub concave_ok: bool,
    pub max_concavity_violation: f64,
    pub linear_ok: bool,
    pub max_linearity_deviation: f64,
    /// Slope of the chord through the first and last feasible samples.
    pub chord_slope: f64,
}

impl DistortionCurve {
    fn from_samples(samples: Vec<CurveSample>, tol: f64) -> Self {
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .filter_map(|s| s.value.map(|v| (s.budget, v)))
            .collect();
        let max_monotone_violation = pts
            .windows(2)
            .map(|w| (w[0].1 - w[1].1).max(0.0))
            .fold(0.0, f64::max);
        let max_concavity_violation = pts
            .windows(3)
            .map(|w| {
                let (a, b, c) = (w[0], w[1], w[2]);
                let chord = a.1 + (c.1 - a.1) * (b.0 - a.0) / (c.0 - a.0);
                (chord - b.1).max(0.0)
            })
            .fold(0.0, f64::max);
        let (chord_slope, max_linearity_deviation) = match (pts.first(), pts.last()) {
            (Some(&first), Some(&last)) if last.0 > first.0 => {
                let slope = (last.1 - first.1) / (last.0 - first.0);
                let dev = pts
                    .iter()
                    .map(|&(x, y)| (y - (first.1 + slope * (x - first.0))).abs())
                    .fold(0.0, f64::max);
                (slope, dev)
            }
            _ => (0.0, 0.0),
        };
        Self {
            samples,
            monotone_ok: max_monotone_violation <= tol,
            max_monotone_violation,
            concave_ok: max_concavity_violation <= tol,
            max_concavity_violation,
            linear_ok: max_linearity_deviation <= tol,
            max_linearity_deviation,
            chord_slope,
        }
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.samples.iter().map(|s| s.value).collect()
    }
}

/// Evaluates [`jammer_best_response`] on every budget of a sorted grid.
/// Budgets below the minimum feasible cost give `None` samples; other
/// errors propagate.
pub fn distortion_cost_curve(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    decoder: &CondKernel,
    grid: &[f64],
    tol: f64,
) -> Result<DistortionCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("budget grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "budget grid must be strictly increasing".into(),
        ));
    }
    let samples = grid
        .par_iter()
        .map(
            |&budget| match jammer_best_response(system, encoder, decoder, budget) {
                Ok(r) => Ok(CurveSample {
                    budget,
                    value: Some(r.value),
                    kernel: Some(r.kernel),
                }),
                Err(Error::InfeasibleBudget { .. }) => Ok(CurveSample {
                    budget,
                    value: None,
                    kernel: None,
                }),
                Err(e) => Err(e),
            },
        )
        .collect::<Result<Vec<_>>>()?;
    Ok(DistortionCurve::from_samples(samples, tol))
}

// P(s, y) = sum_x p_S(s) p(x|s) p(y|x), indexed [y][s].
fn source_output_joint(
    system: &JsccsjSystem,
    encoder_rows: &[&Pmf],
    induced: &CondKernel,
) -> Vec<Vec<f64>> {
    let mut joint = vec![vec![0.0; system.num_source()]; induced.out_len()];
    for s in system.source().support() {
        let ps = system.source().get(s);
        for x in encoder_rows[s].support() {
            let w = ps * encoder_rows[s].get(x);
            for y in induced.row(x).support() {
                joint[y][s] += w * induced.prob(x, y);
            }
        }
    }
    joint
}

// Lowest-index minimizer of sum_s weights[s] d(s, shat), and its value.
fn bayes_choice(distortion: &[Vec<f64>], weights: &[f64]) -> (usize, f64) {
    let nshat = distortion[0].len();
    let mut best = (0, f64::INFINITY);
    for shat in 0..nshat {
        let risk: f64 = weights
            .iter()
            .zip(distortion)
            .filter(|(&w, _)| w > 0.0)
            .map(|(w, row)| w * row[shat])
            .sum();
        if risk < best.1 - TIE_EPS * (1.0 + risk.abs()) {
            best = (shat, risk);
        }
    }
    if best.1.is_infinite() {
        best.1 = 0.0;
    }
    best
}

/// Minimum-expected-distortion decoder for a given encoder and i.i.d.
/// jammer. Ties, including outputs of probability zero, go to the lowest
/// estimate index.
pub fn bayes_decoder(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    jammer: &CondKernel,
) -> Result<CondKernel> {
    system.check_encoder(encoder)?;
    let induced = induced_channel(system.channel(), jammer)?;
    let rows: Vec<&Pmf> = encoder.rows().iter().collect();
    let joint = source_output_joint(system, &rows, &induced);
    let map: Vec<usize> = joint
        .iter()
        .map(|w| bayes_choice(system.distortion(), w).0)
        .collect();
    CondKernel::deterministic(&map, system.num_estimates())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserResponse {
    pub encoder: CondKernel,
    pub decoder: CondKernel,
    pub value: f64,
}

/// Exhaustive search over deterministic single-letter encoders within the
/// user budget, each paired with its Bayes decoder.
pub fn user_best_response_single_letter(
    system: &JsccsjSystem,
    jammer: &CondKernel,
) -> Result<UserResponse> {
    user_best_response_block(system, jammer, 1, ENCODER_SEARCH_LIMIT).map(|r| UserResponse {
        encoder: r.encoder,
        decoder: r.decoder,
        value: r.value,
    })
}

/// Best deterministic length-`n` block code against i.i.d. jamming, by
/// exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUserResponse {
    pub n: usize,
    /// Kernel from source blocks to input blocks.
    pub encoder: CondKernel,
    /// Kernel from output blocks to estimate blocks.
    pub decoder: CondKernel,
    /// Per-letter distortion.
    pub value: f64,
}

pub fn user_best_response_block(
    system: &JsccsjSystem,
    jammer: &CondKernel,
    n: usize,
    limit: f64,
) -> Result<BlockUserResponse> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "block length must be at least 1".into(),
        ));
    }
    let induced = induced_channel(system.channel(), jammer)?;
    let (ns, nx, ny, nshat) = (
        system.num_source(),
        system.num_inputs(),
        system.num_outputs(),
        system.num_estimates(),
    );
    let source_blocks = checked_pow(ns, n)?;
    let input_blocks = checked_pow(nx, n)?;
    let output_blocks = checked_pow(ny, n)?;
    let size = (input_blocks as f64).powf(source_blocks as f64);
    if size > limit {
        return Err(Error::SearchTooLarge { size, limit });
    }
    let source_prob: Vec<f64> = (0..source_blocks)
        .map(|b| {
            digits(b, ns, n)
                .iter()
                .map(|&s| system.source().get(s))
                .product()
        })
        .collect();
    let block_cost: Vec<f64> = (0..input_blocks)
        .map(|b| {
            digits(b, nx, n)
                .iter()
                .map(|&x| system.user_cost()[x])
                .sum::<f64>()
                / n as f64
        })
        .collect();
    // p(y^n | x^n)
    let channel: Vec<Vec<f64>> = (0..input_blocks)
        .map(|xb| {
            let xs = digits(xb, nx, n);
            (0..output_blocks)
                .map(|yb| {
                    digits(yb, ny, n)
                        .iter()
                        .zip(&xs)
                        .map(|(&y, &x)| induced.prob(x, y))
                        .product()
                })
                .collect()
        })
        .collect();
    let source_digits: Vec<Vec<usize>> = (0..source_blocks).map(|b| digits(b, ns, n)).collect();

    let mut map = vec![0usize; source_blocks];
    let mut best: Option<(Vec<usize>, Vec<usize>, f64)> = None;
    let total = input_blocks
        .checked_pow(source_blocks as u32)
        .expect("guarded above");
    for _ in 0..total {
        let cost: f64 = map
            .iter()
            .zip(&source_prob)
            .map(|(&xb, &p)| p * block_cost[xb])
            .sum();
        if cost <= system.user_budget() + COST_SLACK {
            let mut risk = 0.0;
            let mut decisions = Vec::with_capacity(output_blocks);
            for yb in 0..output_blocks {
                // Per-letter Bayes decisions given the whole output block.
                let mut letter_weights = vec![vec![0.0; ns]; n];
                for (sb, &xb) in map.iter().enumerate() {
                    let w = source_prob[sb] * channel[xb][yb];
                    if w > 0.0 {
                        for (i, &s) in source_digits[sb].iter().enumerate() {
                            letter_weights[i][s] += w;
                        }
                    }
                }
                let mut decision = 0;
                for weights in &letter_weights {
                    let (shat, r) = bayes_choice(system.distortion(), weights);
                    risk += r / n as f64;
                    decision = decision * nshat + shat;
                }
                decisions.push(decision);
            }
            if best.as_ref().is_none_or(|b| risk < b.2 - TIE_EPS) {
                best = Some((map.clone(), decisions, risk));
            }
        }
        increment(&mut map, input_blocks);
    }
    let Some((enc, dec, value)) = best else {
        return Err(Error::NoFeasibleEncoder {
            budget: system.user_budget(),
            min_cost: system
                .user_cost()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
        });
    };
    Ok(BlockUserResponse {
        n,
        encoder: CondKernel::deterministic(&enc, input_blocks)?,
        decoder: CondKernel::deterministic(&dec, checked_pow(nshat, n)?)?,
        value,
    })
}

fn checked_pow(base: usize, n: usize) -> Result<usize> {
    u32::try_from(n)
        .ok()
        .and_then(|n| base.checked_pow(n))
        .ok_or_else(|| Error::SearchTooLarge {
            size: (base as f64).powf(n as f64),
            limit: usize::MAX as f64,
        })
}

/// Little-endian odometer step over `base`-ary digits.
fn increment(digits: &mut [usize], base: usize) {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return;
        }
        *d = 0;
    }
}

/// Digits of a block index, first letter most significant.
pub fn digits(mut index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// Inverse of [`digits`].
pub fn block_index(letters: &[usize], base: usize) -> usize {
    letters.iter().fold(0, |acc, &l| acc * base + l)
}

/// A general (possibly non-product) jammer kernel from input blocks to
/// jammer blocks. Blocks are indexed with [`block_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockJammerPolicy {
    pub n: usize,
    pub kernel: CondKernel,
}

impl BlockJammerPolicy {
    pub fn new(n: usize, kernel: CondKernel) -> Self {
        Self { n, kernel }
    }

    /// The i.i.d. policy applying `jammer` letter by letter.
    pub fn product(jammer: &CondKernel, n: usize) -> Result<Self> {
        let (nx, nj) = (jammer.num_rows(), jammer.out_len());
        let xb = checked_pow(nx, n)?;
        let jb = checked_pow(nj, n)?;
        let rows = (0..xb)
            .map(|x| {
                let xs = digits(x, nx, n);
                Pmf::new(
                    (0..jb)
                        .map(|j| {
                            digits(j, nj, n)
                                .iter()
                                .zip(&xs)
                                .map(|(&jl, &xl)| jammer.prob(xl, jl))
                                .product()
                        })
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(n, CondKernel::from_rows(rows)?))
    }

    fn check(&self, system: &JsccsjSystem) -> Result<()> {
        let xb = checked_pow(system.num_inputs(), self.n)?;
        let jb = checked_pow(system.num_jammer_inputs(), self.n)?;
        if self.kernel.num_rows() != xb || self.kernel.out_len() != jb {
            return Err(Error::DimensionMismatch(format!(
                "block policy is {}x{}, expected {xb}x{jb} for n = {}",
                self.kernel.num_rows(),
                self.kernel.out_len(),
                self.n
            )));
        }
        Ok(())
    }
}

/// Per-letter `(distortion, jammer cost)` of a block policy against a
/// single-letter code applied coordinatewise.
pub fn block_policy_value(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    decoder: &CondKernel,
    policy: &BlockJammerPolicy,
) -> Result<(f64, f64)> {
    policy.check(system)?;
    let px = input_marginal(system, encoder)?;
    let h = conditional_distortion(system, encoder, decoder)?;
    let (nx, nj, n) = (system.num_inputs(), system.num_jammer_inputs(), policy.n);
    let mut value = 0.0;
    let mut cost = 0.0;
    for (xb, row) in policy.kernel.rows().iter().enumerate() {
        let xs = digits(xb, nx, n);
        let pxb: f64 = xs.iter().map(|&x| px[x]).product();
        if pxb <= 0.0 {
            continue;
        }
        for jb in row.support() {
            let js = digits(jb, nj, n);
            let w = pxb * row.get(jb) / n as f64;
            for (&x, &j) in xs.iter().zip(&js) {
                value += w * h[x][j];
                cost += w * system.jammer_cost()[x][j];
            }
        }
    }
    Ok((value, cost))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockJammerResponse {
    pub policy: BlockJammerPolicy,
    /// Per-letter distortion.
    pub value: f64,
}

/// Maximizes per-letter distortion over every block jammer kernel whose
/// per-letter expected cost is within the system's jammer budget.
pub fn block_jammer_lp(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    decoder: &CondKernel,
    n: usize,
    variable_limit: usize,
) -> Result<BlockJammerResponse> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "block length must be at least 1".into(),
        ));
    }
    let px = input_marginal(system, encoder)?;
    let h = conditional_distortion(system, encoder, decoder)?;
    let (nx, nj) = (system.num_inputs(), system.num_jammer_inputs());
    let xb = checked_pow(nx, n)?;
    let jb = checked_pow(nj, n)?;
    let vars = xb.saturating_mul(jb);
    if vars > variable_limit {
        return Err(Error::SearchTooLarge {
            size: vars as f64,
            limit: variable_limit as f64,
        });
    }
    let budget = system.jammer_budget();
    let min_cost = min_jammer_cost(system, &px);
    if budget < min_cost - COST_SLACK {
        return Err(Error::InfeasibleBudget { budget, min_cost });
    }
    let mut objective = vec![0.0; vars];
    let mut cost = vec![0.0; vars];
    for x in 0..xb {
        let xs = digits(x, nx, n);
        let pxb: f64 = xs.iter().map(|&l| px[l]).product();
        for j in 0..jb {
            let js = digits(j, nj, n);
            let (hv, cv) = xs.iter().zip(&js).fold((0.0, 0.0), |(a, b), (&xl, &jl)| {
                (a + h[xl][jl], b + system.jammer_cost()[xl][jl])
            });
            objective[x * jb + j] = pxb * hv / n as f64;
            cost[x * jb + j] = pxb * cv / n as f64;
        }
    }
    let mut lp = LinearProgram::maximize(objective);
    for x in 0..xb {
        let mut row = vec![0.0; vars];
        row[x * jb..(x + 1) * jb].fill(1.0);
        lp.add_constraint(row, Relation::Eq, 1.0)?;
    }
    lp.add_constraint(cost, Relation::Le, budget.max(min_cost))?;
    let solution = lp.solve()?;
    let kernel = CondKernel::from_rows(
        solution
            .x
            .chunks(jb)
            .map(|row| Pmf::new(row.to_vec()))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let policy = BlockJammerPolicy::new(n, kernel);
    let (value, _) = block_policy_value(system, encoder, decoder, &policy)?;
    Ok(BlockJammerResponse { policy, value })
}

/// Draws a random block jammer policy within the system's jammer budget by
/// rejection: proposals mix a random kernel with the cheapest deterministic
/// policy at a random weight, and are kept only if feasible. Proposal rows
/// are generally not products of per-letter rows.
pub fn random_feasible_block_policy<R: Rng + ?Sized>(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    decoder: &CondKernel,
    n: usize,
    rng: &mut R,
) -> Result<BlockJammerPolicy> {
    let (nx, nj) = (system.num_inputs(), system.num_jammer_inputs());
    let xb = checked_pow(nx, n)?;
    let jb = checked_pow(nj, n)?;
    let cheapest: Vec<usize> = system
        .jammer_cost()
        .iter()
        .map(|row| {
            let m = row.iter().copied().fold(f64::INFINITY, f64::min);
            row.iter().position(|&c| c == m).unwrap_or(0)
        })
        .collect();
    let floor_rows: Vec<usize> = (0..xb)
        .map(|x| {
            let js: Vec<usize> = digits(x, nx, n).iter().map(|&l| cheapest[l]).collect();
            block_index(&js, nj)
        })
        .collect();
    for _ in 0..10_000 {
        let weight: f64 = rng.random();
        let rows = (0..xb)
            .map(|x| {
                let raw: Vec<f64> = (0..jb)
                    .map(|_| -rng.random::<f64>().max(1e-300).ln())
                    .collect();
                let total: f64 = raw.iter().sum();
                let mut row: Vec<f64> = raw.iter().map(|r| weight * r / total).collect();
                row[floor_rows[x]] += 1.0 - weight;
                Pmf::new(row)
            })
            .collect::<Result<Vec<_>>>()?;
        let policy = BlockJammerPolicy::new(n, CondKernel::from_rows(rows)?);
        let (_, cost) = block_policy_value(system, encoder, decoder, &policy)?;
        if cost <= system.jammer_budget() {
            return Ok(policy);
        }
    }
    Err(Error::InvalidParameter(
        "could not sample a feasible block policy; budget too tight".into(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashOptions {
    pub tol: f64,
    /// Block length for the additional block-level checks; 1 disables them.
    pub block_n: usize,
    pub block_variable_limit: usize,
    pub encoder_search_limit: f64,
}

impl Default for NashOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            block_n: 1,
            block_variable_limit: BLOCK_LP_VARIABLE_LIMIT,
            encoder_search_limit: ENCODER_SEARCH_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub n: usize,
    pub jammer_value: f64,
    pub jammer_gap: f64,
    /// `None` when exhaustive block-code search exceeds the search limit.
    pub user_value: Option<f64>,
    pub user_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameReport {
    pub value: f64,
    pub jammer_br_value: f64,
    pub user_br_value: f64,
    pub jammer_gap: f64,
    pub user_gap: f64,
    pub block: Option<BlockCheck>,
    /// Largest block length at which the user side was searched
    /// exhaustively.
    pub user_certified_n: usize,
    pub tol: f64,
    pub nash_ok: bool,
}

/// How much each player gains by deviating from `profile`.
pub fn nash_gap(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
    options: &NashOptions,
) -> Result<GameReport> {
    profile.check_shapes(system)?;
    let tol = options.tol;
    let value = expected_distortion(system, profile)?;
    let jammer = jammer_best_response(
        system,
        &profile.encoder,
        &profile.decoder,
        system.jammer_budget(),
    )?;
    let user = user_best_response_single_letter(system, &profile.jammer)?;
    let jammer_gap = jammer.value - value;
    let user_gap = value - user.value;
    let mut nash_ok = jammer_gap <= tol && user_gap <= tol;
    let mut user_certified_n = 1;
    let block = if options.block_n > 1 {
        let n = options.block_n;
        let jb = block_jammer_lp(
            system,
            &profile.encoder,
            &profile.decoder,
            n,
            options.block_variable_limit,
        )?;
        let ub = match user_best_response_block(
            system,
            &profile.jammer,
            n,
            options.encoder_search_limit,
        ) {
            Ok(r) => Some(r.value),
            Err(Error::SearchTooLarge { .. }) => None,
            Err(e) => return Err(e),
        };
        let check = BlockCheck {
            n,
            jammer_value: jb.value,
            jammer_gap: jb.value - value,
            user_value: ub,
            user_gap: ub.map(|u| value - u),
        };
        nash_ok &= check.jammer_gap <= tol && check.user_gap.is_none_or(|g| g <= tol);
        if ub.is_some() {
            user_certified_n = n;
        }
        Some(check)
    } else {
        None
    };
    Ok(GameReport {
        value,
        jammer_br_value: jammer.value,
        user_br_value: user.value,
        jammer_gap,
        user_gap,
        block,
        user_certified_n,
        tol,
        nash_ok,
    })
}
