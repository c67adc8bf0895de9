//! The scalar Gaussian system: `S ~ N(0, v)`, `Y = X + J + Z` with
//! `Z ~ N(0, sigma^2)`, squared-error distortion and quadratic costs.
//!
//! Strategies are restricted to the linear family `X = g S`,
//! `J = alpha X + R` with `R ~ N(0, sigma_R^2)`, and `Shat = kappa Y`.

use crate::error::{Error, Result};
use crate::matching::{check_distortion, check_jammer_cost, check_user_cost, MatchReport, Verdict};
use crate::model::{CondKernel, JammedChannel, JsccsjSystem, Pmf, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSystem {
    pub source_var: f64,
    pub noise_var: f64,
    pub user_budget: f64,
    pub jammer_budget: f64,
}

impl GaussianSystem {
    pub fn new(
        source_var: f64,
        noise_var: f64,
        user_budget: f64,
        jammer_budget: f64,
    ) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("source variance", source_var)?;
        positive("noise variance", noise_var)?;
        positive("user budget", user_budget)?;
        if !(jammer_budget.is_finite() && jammer_budget >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "jammer budget must be non-negative, got {jammer_budget}"
            )));
        }
        Ok(Self {
            source_var,
            noise_var,
            user_budget,
            jammer_budget,
        })
    }

    /// Unit-variance source.
    pub fn standard(noise_var: f64, user_budget: f64, jammer_budget: f64) -> Result<Self> {
        Self::new(1.0, noise_var, user_budget, jammer_budget)
    }

    /// Gain that spends the whole user budget, `sqrt(P_U / v)`.
    pub fn full_power_gain(&self) -> f64 {
        (self.user_budget / self.source_var).sqrt()
    }

    /// The decoder gain `P_U / (P_U + sigma^2)` used in the uncoded
    /// equilibrium; it ignores the jammer's contribution to the output.
    pub fn nominal_decoder_gain(&self) -> f64 {
        self.user_budget / (self.user_budget + self.noise_var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGaussianProfile {
    pub encoder_gain: f64,
    pub decoder_gain: f64,
    pub jammer_alpha: f64,
    pub jammer_noise_var: f64,
}

impl LinearGaussianProfile {
    /// Full-power encoder and nominal decoder against the given linear
    /// jammer.
    pub fn nominal(system: &GaussianSystem, jammer_alpha: f64, jammer_noise_var: f64) -> Self {
        Self {
            encoder_gain: system.full_power_gain(),
            decoder_gain: system.nominal_decoder_gain(),
            jammer_alpha,
            jammer_noise_var,
        }
    }

    pub fn encoder_cost(&self, system: &GaussianSystem) -> f64 {
        self.encoder_gain.powi(2) * system.source_var
    }

    pub fn jammer_cost(&self, system: &GaussianSystem) -> f64 {
        self.jammer_alpha.powi(2) * self.encoder_cost(system) + self.jammer_noise_var
    }

    pub fn is_feasible(&self, system: &GaussianSystem, tol: f64) -> bool {
        self.jammer_noise_var >= 0.0
            && self.encoder_cost(system) <= system.user_budget + tol
            && self.jammer_cost(system) <= system.jammer_budget + tol
    }
}

/// `E[(S - kappa Y)^2] = (1 - kappa (1 + alpha) g)^2 v + kappa^2 (sigma_R^2 + sigma^2)`.
pub fn gaussian_mse(system: &GaussianSystem, profile: &LinearGaussianProfile) -> f64 {
    let LinearGaussianProfile {
        encoder_gain: g,
        decoder_gain: k,
        jammer_alpha: a,
        jammer_noise_var: r,
    } = *profile;
    (1.0 - k * (1.0 + a) * g).powi(2) * system.source_var + k * k * (r + system.noise_var)
}

/// Linear MMSE decoder gain against a fixed linear jammer.
pub fn mmse_decoder_gain(
    system: &GaussianSystem,
    encoder_gain: f64,
    jammer_alpha: f64,
    jammer_noise_var: f64,
) -> f64 {
    let signal = (1.0 + jammer_alpha) * encoder_gain;
    signal * system.source_var
        / (signal * signal * system.source_var + jammer_noise_var + system.noise_var)
}

/// `D(N(m1, v1) || N(m2, v2))` in nats.
pub fn gaussian_kl(mean1: f64, var1: f64, mean2: f64, var2: f64) -> Result<f64> {
    if !(var1 > 0.0 && var2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "variances must be positive, got {var1} and {var2}"
        )));
    }
    Ok(0.5 * (var1 / var2 + (mean1 - mean2).powi(2) / var2 - 1.0 + (var2 / var1).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearJammerResponse {
    pub alpha: f64,
    pub noise_var: f64,
    pub value: f64,
}

const JAMMER_GRID: usize = 101;

/// Best linear-Gaussian jammer `(alpha, sigma_R^2)` with
/// `alpha^2 P + sigma_R^2 <= P_J`, `P = g^2 v`.
///
/// Deterministic 101 x 101 grid over `alpha` and the fraction of the
/// remaining budget spent on `sigma_R^2`, then coordinate refinement with a
/// halving step.
pub fn jammer_best_linear_response(
    system: &GaussianSystem,
    encoder_gain: f64,
    decoder_gain: f64,
) -> LinearJammerResponse {
    let power = encoder_gain.powi(2) * system.source_var;
    let budget = system.jammer_budget;
    let alpha_max = if power > 0.0 {
        (budget / power).sqrt()
    } else {
        0.0
    };
    // (alpha, fraction of remaining budget) -> (alpha, sigma_R^2)
    let realize = |alpha: f64, frac: f64| -> (f64, f64) {
        let alpha = alpha.clamp(-alpha_max, alpha_max);
        let remaining = (budget - alpha * alpha * power).max(0.0);
        (alpha, frac.clamp(0.0, 1.0) * remaining)
    };
    let eval = |alpha: f64, frac: f64| -> f64 {
        let (a, r) = realize(alpha, frac);
        gaussian_mse(
            system,
            &LinearGaussianProfile {
                encoder_gain,
                decoder_gain,
                jammer_alpha: a,
                jammer_noise_var: r,
            },
        )
    };

    let step_of = |n: usize| 1.0 / (n - 1) as f64;
    let mut best = (0.0, 0.0, eval(0.0, 0.0));
    for i in 0..JAMMER_GRID {
        let alpha = -alpha_max + 2.0 * alpha_max * i as f64 * step_of(JAMMER_GRID);
        for k in 0..JAMMER_GRID {
            let frac = k as f64 * step_of(JAMMER_GRID);
            let v = eval(alpha, frac);
            if v > best.2 {
                best = (alpha, frac, v);
            }
        }
    }

    let mut alpha_step = 2.0 * alpha_max * step_of(JAMMER_GRID);
    let mut frac_step = step_of(JAMMER_GRID);
    while alpha_step > 1e-13 || frac_step > 1e-13 {
        let mut improved = false;
        for (da, df) in [
            (alpha_step, 0.0),
            (-alpha_step, 0.0),
            (0.0, frac_step),
            (0.0, -frac_step),
        ] {
            let a = (best.0 + da).clamp(-alpha_max, alpha_max);
            let f = (best.1 + df).clamp(0.0, 1.0);
            let v = eval(a, f);
            if v > best.2 + 1e-15 {
                best = (a, f, v);
                improved = true;
            }
        }
        if !improved {
            alpha_step *= 0.5;
            frac_step *= 0.5;
        }
    }
    let (alpha, noise_var) = realize(best.0, best.1);
    LinearJammerResponse {
        alpha,
        noise_var,
        value: best.2,
    }
}

/// Nash gaps within the linear strategy families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGameReport {
    pub value: f64,
    pub jammer_response: LinearJammerResponse,
    /// Full-power encoder with the MMSE decoder against the profile's
    /// jammer.
    pub user_encoder_gain: f64,
    pub user_decoder_gain: f64,
    pub user_br_value: f64,
    pub jammer_gap: f64,
    pub user_gap: f64,
    pub nash_ok: bool,
}

pub fn linear_game_report(
    system: &GaussianSystem,
    profile: &LinearGaussianProfile,
    tol: f64,
) -> LinearGameReport {
    let value = gaussian_mse(system, profile);
    let jammer_response =
        jammer_best_linear_response(system, profile.encoder_gain, profile.decoder_gain);
    // The MMSE with an optimal decoder decreases in the encoder power, so
    // the best linear encoder uses the full budget.
    let g = system.full_power_gain();
    let k = mmse_decoder_gain(system, g, profile.jammer_alpha, profile.jammer_noise_var);
    let user_br_value = gaussian_mse(
        system,
        &LinearGaussianProfile {
            encoder_gain: g,
            decoder_gain: k,
            ..*profile
        },
    );
    let jammer_gap = jammer_response.value - value;
    let user_gap = value - user_br_value;
    LinearGameReport {
        value,
        jammer_response,
        user_encoder_gain: g,
        user_decoder_gain: k,
        user_br_value,
        jammer_gap,
        user_gap,
        nash_ok: jammer_gap <= tol && user_gap <= tol,
    }
}

/// Symmetric quantization: `points` cell midpoints spanning
/// `±half_width` standard deviations of each variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 41,
            half_width: 4.0,
        }
    }
}

fn midpoints(points: usize, half_range: f64) -> Vec<f64> {
    if points == 1 || half_range == 0.0 {
        return vec![0.0];
    }
    let width = 2.0 * half_range / points as f64;
    (0..points)
        .map(|i| -half_range + (i as f64 + 0.5) * width)
        .collect()
}

fn gaussian_row(grid: &[f64], mean: f64, var: f64) -> Result<Pmf> {
    let w: Vec<f64> = grid
        .iter()
        .map(|&t| (-(t - mean).powi(2) / (2.0 * var)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid carries no mass for N({mean}, {var}); widen the grid"
        )));
    }
    Pmf::new(w.into_iter().map(|v| v / total).collect())
}

fn nearest(grid: &[f64], t: f64) -> usize {
    let mut best = 0;
    for (i, &g) in grid.iter().enumerate() {
        if (g - t).abs() < (grid[best] - t).abs() {
            best = i;
        }
    }
    best
}

/// A finite system obtained by quantizing the Gaussian one, together with
/// the quantized linear profile.
#[derive(Debug, Clone)]
pub struct DiscretizedGaussian {
    pub system: JsccsjSystem,
    pub profile: StrategyProfile,
    pub source_grid: Vec<f64>,
    pub input_grid: Vec<f64>,
    pub jammer_grid: Vec<f64>,
    pub output_grid: Vec<f64>,
    pub estimate_grid: Vec<f64>,
}

/// Quantizes every density at cell midpoints and renormalizes each row.
///
/// `S` uses `±L sqrt(v)`; `X = g S` and `Shat = kappa Y` reuse the grids of
/// `S` and `Y`, so the encoder and decoder are one-hot identities. `J` and
/// `Y` span `±L` of their own standard deviations under the profile; a
/// jammer that never transmits gets the single point `0`.
pub fn discretize(
    system: &GaussianSystem,
    profile: &LinearGaussianProfile,
    grid: GridSpec,
) -> Result<DiscretizedGaussian> {
    if grid.points == 0 || !(grid.half_width > 0.0) {
        return Err(Error::InvalidParameter(
            "grid needs points and a positive width".into(),
        ));
    }
    let m = grid.points;
    let l = grid.half_width;
    let power = profile.encoder_cost(system);
    let jammer_var = profile.jammer_alpha.powi(2) * power + profile.jammer_noise_var;
    let output_var =
        (1.0 + profile.jammer_alpha).powi(2) * power + profile.jammer_noise_var + system.noise_var;

    let source_grid = midpoints(m, l * system.source_var.sqrt());
    let input_grid: Vec<f64> = source_grid
        .iter()
        .map(|s| profile.encoder_gain * s)
        .collect();
    let jammer_grid = if jammer_var > 0.0 {
        midpoints(m, l * jammer_var.sqrt())
    } else {
        vec![0.0]
    };
    let output_grid = midpoints(m, l * output_var.sqrt());
    let estimate_grid: Vec<f64> = output_grid
        .iter()
        .map(|y| profile.decoder_gain * y)
        .collect();

    let source = gaussian_row(&source_grid, 0.0, system.source_var)?;
    let channel = JammedChannel::from_fn(input_grid.len(), jammer_grid.len(), |x, j| {
        let mean = input_grid[x] + jammer_grid[j];
        gaussian_row(&output_grid, mean, system.noise_var)
            .map(|p| p.probs().to_vec())
            .unwrap_or_else(|_| {
                let mut row = vec![0.0; output_grid.len()];
                row[nearest(&output_grid, mean)] = 1.0;
                row
            })
    })?;
    let jammer = CondKernel::from_rows(
        input_grid
            .iter()
            .map(|&x| {
                let mean = profile.jammer_alpha * x;
                if profile.jammer_noise_var > 0.0 {
                    gaussian_row(&jammer_grid, mean, profile.jammer_noise_var)
                } else {
                    Ok(Pmf::point(jammer_grid.len(), nearest(&jammer_grid, mean)))
                }
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    let user_cost: Vec<f64> = input_grid.iter().map(|x| x * x).collect();
    let jammer_cost = vec![jammer_grid.iter().map(|j| j * j).collect(); input_grid.len()];
    let distortion: Vec<Vec<f64>> = source_grid
        .iter()
        .map(|s| estimate_grid.iter().map(|t| (s - t).powi(2)).collect())
        .collect();
    let max_user_cost = user_cost.iter().copied().fold(0.0, f64::max);
    let finite = JsccsjSystem::new(
        source,
        channel,
        user_cost,
        jammer_cost,
        distortion,
        system.user_budget.max(max_user_cost),
        system.jammer_budget,
    )?;
    let profile = StrategyProfile::new(
        CondKernel::identity(source_grid.len()),
        CondKernel::identity(output_grid.len()),
        jammer,
    );
    Ok(DiscretizedGaussian {
        system: finite,
        profile,
        source_grid,
        input_grid,
        jammer_grid,
        output_grid,
        estimate_grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscretizedVerdict {
    Matched,
    NotMatched,
    /// Grid too coarse: the residual does not shrink under refinement.
    Inconclusive,
}

/// Residuals of the three conditions, in the order user cost, distortion, jammer cost.
pub type ConditionResiduals = [f64; 3];

#[derive(Debug, Clone)]
pub struct DiscretizedMatchReport {
    pub grid: GridSpec,
    /// Per-condition tolerances actually applied (user cost, distortion, jammer cost).
    pub tolerances: [f64; 3],
    pub report: MatchReport,
    pub residuals: ConditionResiduals,
    /// Residuals on the companion grid with `(m + 1) / 2` points; `None` when
    /// the grid cannot be coarsened.
    pub coarse_points: usize,
    pub coarse_residuals: Option<ConditionResiduals>,
    pub verdict: DiscretizedVerdict,
}

fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// `tol + w^2 * spread(target)` per condition, `w = 2L/m` being the cell
/// width in standard deviations.
pub fn grid_tolerances(system: &JsccsjSystem, grid: GridSpec, tol: f64) -> [f64; 3] {
    let w2 = (2.0 * grid.half_width / grid.points as f64).powi(2);
    [
        tol + w2 * spread(system.user_cost().iter().copied()),
        tol + w2 * spread(system.distortion().iter().flatten().copied()),
        tol + w2 * spread(system.jammer_cost().iter().flatten().copied()),
    ]
}

fn run_conditions(
    d: &DiscretizedGaussian,
    tolerances: [f64; 3],
) -> Result<(MatchReport, ConditionResiduals)> {
    let report = MatchReport {
        user_cost: check_user_cost(&d.system, &d.profile, tolerances[0])?,
        distortion: check_distortion(&d.system, &d.profile, tolerances[1])?,
        jammer_cost: check_jammer_cost(&d.system, &d.profile, tolerances[2])?,
        tolerance: tolerances[0].max(tolerances[1]).max(tolerances[2]),
    };
    let residuals = [
        report.user_cost.residual,
        report.distortion.residual,
        report.jammer_cost.residual,
    ];
    Ok((report, residuals))
}

/// Quantizes on `grid` and on a companion grid with `(m + 1) / 2` points and
/// runs the finite matching check with [`grid_tolerances`].
///
/// A condition that fails while its residual did not shrink from the coarse
/// grid is attributed to the grid rather than to the system. The verdict is
/// `NotMatched` if any condition fails with a shrinking residual,
/// `Inconclusive` if the remaining failures are grid-attributed (or no
/// companion grid exists), and `Matched` otherwise.
pub fn discretized_matching_check(
    system: &GaussianSystem,
    profile: &LinearGaussianProfile,
    grid: GridSpec,
    tol: f64,
) -> Result<DiscretizedMatchReport> {
    let fine = discretize(system, profile, grid)?;
    let tolerances = grid_tolerances(&fine.system, grid, tol);
    let (report, residuals) = run_conditions(&fine, tolerances)?;
    let coarse_points = grid.points.div_ceil(2);
    let coarse_residuals = if coarse_points < grid.points {
        let coarse_grid = GridSpec {
            points: coarse_points,
            ..grid
        };
        let coarse = discretize(system, profile, coarse_grid)?;
        let coarse_tol = grid_tolerances(&coarse.system, coarse_grid, tol);
        Some(run_conditions(&coarse, coarse_tol)?.1)
    } else {
        None
    };

    let verdicts = report.verdicts();
    let verdict = match coarse_residuals {
        None => DiscretizedVerdict::Inconclusive,
        Some(coarse) => {
            let mut genuine = false;
            let mut grid_bound = false;
            for i in 0..3 {
                if verdicts[i].1 == Verdict::Pass {
                    continue;
                }
                if residuals[i] <= coarse[i] {
                    genuine = true;
                } else {
                    grid_bound = true;
                }
            }
            if genuine {
                DiscretizedVerdict::NotMatched
            } else if grid_bound {
                DiscretizedVerdict::Inconclusive
            } else {
                DiscretizedVerdict::Matched
            }
        }
    };
    Ok(DiscretizedMatchReport {
        grid,
        tolerances,
        report,
        residuals,
        coarse_points,
        coarse_residuals,
        verdict,
    })
}
