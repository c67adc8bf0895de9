//! Sufficient conditions for uncoded transmission and i.i.d. jamming to be an
//! equilibrium.
//!
//! Each condition asks for constants that make a cost (or the distortion) an
//! affine function of an information quantity:
//!
//! * user cost: `rho_X(x) = a1 * D(p_{Y|X}(.|x) || p_Y) + a2` where the
//!   encoder puts mass, `>=` elsewhere;
//! * distortion: `d(s, shat) = -b1 * ln p_{S|Shat}(s|shat) + d0(s)`;
//! * jammer cost: `rho_{J|X}(j|x) = c1 * h(x, j) + c2` where the jammer puts
//!   mass, `>=` elsewhere, with `h` from [`conditional_distortion`].
//!
//! Constants are fitted by least squares on the equality part (the residual
//! is zero exactly when constants exist), then inequalities are scanned off
//! support. When the regressor is constant on the support every positive
//! slope fits equally well, and the check passes if any member of that
//! family satisfies the off-support constraints.

use std::fmt;

use crate::error::Result;
use crate::model::{
    conditional_distortion, induced_channel, input_marginal, kl_slices, output_marginal,
    posterior_s_given_shat, JsccsjSystem, StrategyProfile,
};

/// Default tolerance for systems given with exact (rational) entries.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance suggested when kernel entries were read from decimal text.
pub const TEXT_INPUT_TOL: f64 = 1e-6;

// Spread below which a regressor counts as constant.
const DEGENERACY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The fit is unidentifiable and no admissible constants exist.
    Degenerate,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Degenerate => "DEGENERATE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    UserCost,
    Distortion,
    JammerCost,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::UserCost => "user_cost",
            Condition::Distortion => "distortion",
            Condition::JammerCost => "jammer_cost",
        }
    }
}

/// An off-support point where the `>=` direction fails.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackViolation {
    pub condition: Condition,
    pub x: usize,
    pub j: Option<usize>,
    /// How far the cost falls below the fitted affine value.
    pub deficit: f64,
}

/// Result of an affine cost condition (user cost or jammer cost).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCondition {
    pub condition: Condition,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub degenerate: bool,
    pub violations: Vec<SlackViolation>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Result of the distortion condition.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionCondition {
    pub b1: f64,
    pub d0: Vec<f64>,
    pub residual: f64,
    pub degenerate: bool,
    /// `(s, shat)` pairs with zero posterior, where `d` would have to be
    /// infinite.
    pub unverifiable: Vec<(usize, usize)>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub user_cost: AffineCondition,
    pub distortion: DistortionCondition,
    pub jammer_cost: AffineCondition,
    pub tolerance: f64,
}

impl MatchReport {
    pub fn a1(&self) -> f64 {
        self.user_cost.slope
    }
    pub fn a2(&self) -> f64 {
        self.user_cost.intercept
    }
    pub fn b1(&self) -> f64 {
        self.distortion.b1
    }
    pub fn d0(&self) -> &[f64] {
        &self.distortion.d0
    }
    pub fn c1(&self) -> f64 {
        self.jammer_cost.slope
    }
    pub fn c2(&self) -> f64 {
        self.jammer_cost.intercept
    }

    pub fn slack_violations(&self) -> impl Iterator<Item = &SlackViolation> {
        self.user_cost
            .violations
            .iter()
            .chain(&self.jammer_cost.violations)
    }

    pub fn verdicts(&self) -> [(Condition, Verdict); 3] {
        [
            (Condition::UserCost, self.user_cost.verdict),
            (Condition::Distortion, self.distortion.verdict),
            (Condition::JammerCost, self.jammer_cost.verdict),
        ]
    }

    /// The system is matched under this profile.
    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| v.is_pass())
    }

    pub fn failed_conditions(&self) -> Vec<Condition> {
        self.verdicts()
            .iter()
            .filter(|(_, v)| !v.is_pass())
            .map(|(c, _)| *c)
            .collect()
    }
}

struct Point {
    x: usize,
    j: Option<usize>,
    regressor: f64,
    target: f64,
}

fn fit_affine(
    condition: Condition,
    on_support: &[Point],
    off_support: &[Point],
    tol: f64,
    mut notes: Vec<String>,
) -> AffineCondition {
    let n = on_support.len() as f64;
    let (slope, intercept, residual, degenerate) = if on_support.is_empty() {
        notes.push("no on-support points".into());
        (1.0, f64::NAN, 0.0, true)
    } else {
        let r_mean = on_support.iter().map(|p| p.regressor).sum::<f64>() / n;
        let t_mean = on_support.iter().map(|p| p.target).sum::<f64>() / n;
        let spread = on_support
            .iter()
            .map(|p| (p.regressor - r_mean).abs())
            .fold(0.0, f64::max);
        if spread <= DEGENERACY_EPS * (1.0 + r_mean.abs()) {
            let t_min = on_support
                .iter()
                .map(|p| p.target)
                .fold(f64::INFINITY, f64::min);
            let t_max = on_support
                .iter()
                .map(|p| p.target)
                .fold(f64::NEG_INFINITY, f64::max);
            let t_mid = 0.5 * (t_min + t_max);
            let slope = admissible_slope(r_mean, t_mid, off_support, tol);
            notes.push(format!(
                "regressor constant on support ({r_mean:.6e}); slope chosen from the admissible family"
            ));
            (slope, t_mid - slope * r_mean, 0.5 * (t_max - t_min), true)
        } else {
            let sxx: f64 = on_support
                .iter()
                .map(|p| (p.regressor - r_mean).powi(2))
                .sum();
            let sxy: f64 = on_support
                .iter()
                .map(|p| (p.regressor - r_mean) * (p.target - t_mean))
                .sum();
            let slope = sxy / sxx;
            let intercept = t_mean - slope * r_mean;
            let residual = on_support
                .iter()
                .map(|p| (p.target - slope * p.regressor - intercept).abs())
                .fold(0.0, f64::max);
            (slope, intercept, residual, false)
        }
    };
    let intercept = if intercept.is_nan() {
        // Nothing pins the intercept; take the largest one every
        // off-support point tolerates.
        off_support
            .iter()
            .map(|p| p.target - slope * p.regressor)
            .fold(f64::INFINITY, f64::min)
            .min(0.0)
    } else {
        intercept
    };
    let violations: Vec<SlackViolation> = off_support
        .iter()
        .filter_map(|p| {
            let bound = slope * p.regressor + intercept;
            let deficit = bound - p.target;
            (deficit > tol || deficit.is_nan()).then_some(SlackViolation {
                condition,
                x: p.x,
                j: p.j,
                deficit,
            })
        })
        .collect();
    let verdict = if residual > tol && degenerate {
        notes.push("targets differ on support while the regressor is constant".into());
        Verdict::Degenerate
    } else if residual > tol {
        notes.push(format!(
            "equality residual {residual:.3e} exceeds tolerance"
        ));
        Verdict::Fail
    } else if !(slope > 0.0) {
        notes.push(format!("fitted slope {slope:.6e} is not positive"));
        if degenerate {
            Verdict::Degenerate
        } else {
            Verdict::Fail
        }
    } else if !violations.is_empty() {
        notes.push(format!(
            "{} off-support inequality violation(s)",
            violations.len()
        ));
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    AffineCondition {
        condition,
        slope,
        intercept,
        residual,
        degenerate,
        violations,
        verdict,
        notes,
    }
}

// With every on-support regressor equal to r0 and target t0, off-support
// points demand `t >= slope * (r - r0) + t0 - tol`. Returns 1 when it is
// admissible, otherwise a positive slope inside the admissible interval, or
// the closest candidate when the interval is empty (violations then get
// reported by the caller).
fn admissible_slope(r0: f64, t0: f64, off_support: &[Point], tol: f64) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    for p in off_support {
        let dr = p.regressor - r0;
        let dt = p.target - t0 + tol;
        if dr.is_infinite() {
            continue;
        }
        if dr > 0.0 {
            hi = hi.min(dt / dr);
        } else if dr < 0.0 {
            lo = lo.max(dt / dr);
        }
    }
    if lo < 1.0 && 1.0 <= hi {
        1.0
    } else if hi.is_infinite() {
        lo + 1.0
    } else if lo < hi {
        0.5 * (lo + hi)
    } else {
        hi.max(f64::MIN_POSITIVE)
    }
}

/// User-cost condition: `rho_X` against `D(p_{Y|X}(.|x) || p_Y)`.
pub fn check_user_cost(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
    tol: f64,
) -> Result<AffineCondition> {
    profile.check_shapes(system)?;
    let px = input_marginal(system, &profile.encoder)?;
    let induced = induced_channel(system.channel(), &profile.jammer)?;
    let py = output_marginal(&px, &induced);
    let mut notes = Vec::new();
    let mut on = Vec::new();
    let mut off = Vec::new();
    let mut infinite = Vec::new();
    for (x, &w) in px.iter().enumerate() {
        let target = system.user_cost()[x];
        match kl_slices(induced.row(x).probs(), &py) {
            Ok(regressor) => {
                let point = Point {
                    x,
                    j: None,
                    regressor,
                    target,
                };
                if w > 0.0 {
                    on.push(point);
                } else {
                    off.push(point);
                }
            }
            // Only reachable off support: p_Y dominates every used row.
            Err(_) => infinite.push(x),
        }
    }
    for &x in &infinite {
        notes.push(format!(
            "input {x}: output support not contained in the support of p_Y (divergence infinite)"
        ));
    }
    let mut report = fit_affine(Condition::UserCost, &on, &off, tol, notes);
    if !infinite.is_empty() {
        report
            .violations
            .extend(infinite.into_iter().map(|x| SlackViolation {
                condition: Condition::UserCost,
                x,
                j: None,
                deficit: f64::INFINITY,
            }));
        if report.verdict == Verdict::Pass {
            report.verdict = Verdict::Fail;
        }
    }
    Ok(report)
}

/// Distortion condition: `d` against `-ln p_{S|Shat}` with per-source
/// offsets.
pub fn check_distortion(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
    tol: f64,
) -> Result<DistortionCondition> {
    let posterior = posterior_s_given_shat(system, profile)?;
    let ns = system.num_source();
    let mut notes = Vec::new();
    let mut unverifiable = Vec::new();
    // (u = -ln posterior, d) grouped by source symbol.
    let mut groups: Vec<Vec<(f64, f64)>> = vec![Vec::new(); ns];
    for (shat, row) in posterior.rows.iter().enumerate() {
        let Some(row) = row else { continue };
        for (s, group) in groups.iter_mut().enumerate() {
            let p = row.get(s);
            if p > 0.0 {
                group.push((-p.ln(), system.distortion()[s][shat]));
            } else {
                unverifiable.push((s, shat));
            }
        }
    }
    let means: Vec<(f64, f64)> = groups
        .iter()
        .map(|g| {
            if g.is_empty() {
                (0.0, 0.0)
            } else {
                let n = g.len() as f64;
                (
                    g.iter().map(|p| p.0).sum::<f64>() / n,
                    g.iter().map(|p| p.1).sum::<f64>() / n,
                )
            }
        })
        .collect();
    let (mut suu, mut sud, mut sdd) = (0.0, 0.0, 0.0);
    let mut u_scale: f64 = 0.0;
    for (g, &(um, dm)) in groups.iter().zip(&means) {
        for &(u, d) in g {
            suu += (u - um).powi(2);
            sud += (u - um) * (d - dm);
            sdd += (d - dm).powi(2);
            u_scale = u_scale.max(u.abs());
        }
    }
    let u_constant = suu.sqrt() <= DEGENERACY_EPS * (1.0 + u_scale);
    let d_constant = sdd.sqrt() <= DEGENERACY_EPS;
    let (b1, degenerate) = if u_constant {
        notes.push(
            "posterior does not vary with the estimate for any source symbol; b1 unidentifiable"
                .into(),
        );
        (1.0, true)
    } else if d_constant {
        notes.push("distortion does not vary with the estimate; b1 would be zero".into());
        (0.0, true)
    } else {
        (sud / suu, false)
    };
    let d0: Vec<f64> = means.iter().map(|&(um, dm)| dm - b1 * um).collect();
    let residual = groups
        .iter()
        .zip(&d0)
        .flat_map(|(g, &off)| g.iter().map(move |&(u, d)| (d - b1 * u - off).abs()))
        .fold(0.0, f64::max);
    if !unverifiable.is_empty() {
        notes.push(format!(
            "{} (s, shat) pair(s) have zero posterior; d would have to be infinite there",
            unverifiable.len()
        ));
    }
    let verdict = if degenerate && (residual > tol || !(b1 > 0.0)) {
        Verdict::Degenerate
    } else if residual > tol {
        notes.push(format!(
            "equality residual {residual:.3e} exceeds tolerance"
        ));
        Verdict::Fail
    } else if !(b1 > 0.0) {
        notes.push(format!("fitted b1 = {b1:.6e} is not positive"));
        Verdict::Fail
    } else if !unverifiable.is_empty() {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(DistortionCondition {
        b1,
        d0,
        residual,
        degenerate,
        unverifiable,
        verdict,
        notes,
    })
}

/// Jammer-cost condition: `rho_{J|X}` against `h(x, j)`.
///
/// Inputs the encoder never uses do not enter the game, so their rows are
/// not constrained.
pub fn check_jammer_cost(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
    tol: f64,
) -> Result<AffineCondition> {
    profile.check_shapes(system)?;
    let px = input_marginal(system, &profile.encoder)?;
    let h = conditional_distortion(system, &profile.encoder, &profile.decoder)?;
    let mut notes = Vec::new();
    let mut on = Vec::new();
    let mut off = Vec::new();
    for (x, &w) in px.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        for (j, &hxj) in h[x].iter().enumerate() {
            let point = Point {
                x,
                j: Some(j),
                regressor: hxj,
                target: system.jammer_cost()[x][j],
            };
            if profile.jammer.prob(x, j) > 0.0 {
                on.push(point);
            } else {
                off.push(point);
            }
        }
    }
    let unused = px.iter().filter(|&&w| w <= 0.0).count();
    if unused > 0 {
        notes.push(format!("{unused} unused input(s) skipped"));
    }
    Ok(fit_affine(Condition::JammerCost, &on, &off, tol, notes))
}

/// All three conditions.
pub fn check_matched(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
    tol: f64,
) -> Result<MatchReport> {
    Ok(MatchReport {
        user_cost: check_user_cost(system, profile, tol)?,
        distortion: check_distortion(system, profile, tol)?,
        jammer_cost: check_jammer_cost(system, profile, tol)?,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CondKernel, Pmf};
    use crate::systems::{asymmetric_binary_example, binary_example};

    #[test]
    fn binary_system_matches_with_closed_form_constants() {
        let (p, pj) = (0.1, 0.2);
        let (sys, profile) = binary_example(p, pj).unwrap();
        let report = check_matched(&sys, &profile, DEFAULT_TOL).unwrap();
        assert!(report.passed(), "{report:#?}");
        let phat: f64 = p * (1.0 - pj) + (1.0 - p) * pj;
        let b1 = 1.0 / ((1.0 - phat) / phat).ln();
        assert!((report.b1() - b1).abs() < 1e-12);
        for &d0 in report.d0() {
            assert!((d0 - b1 * (1.0 - phat).ln()).abs() < 1e-12);
        }
        assert!((report.c1() - 1.0 / (1.0 - 2.0 * p)).abs() < 1e-12);
        assert!((report.c2() + p / (1.0 - 2.0 * p)).abs() < 1e-12);
        assert!(report.user_cost.degenerate);
    }

    #[test]
    fn non_constant_user_cost_fails_user_cost_condition() {
        let (sys, profile) = binary_example(0.1, 0.2).unwrap();
        let sys = sys
            .with_budgets(1.0, 0.2)
            .unwrap()
            .with_user_cost(vec![0.0, 1.0])
            .unwrap();
        let r = check_user_cost(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Degenerate);
    }

    #[test]
    fn single_input_channel_passes_user_cost_condition() {
        let (sys, _) = binary_example(0.1, 0.2).unwrap();
        let ch = crate::model::JammedChannel::from_fn(1, 2, |_, j| {
            if j == 0 {
                vec![0.9, 0.1]
            } else {
                vec![0.1, 0.9]
            }
        })
        .unwrap();
        let sys = JsccsjSystem::new(
            sys.source().clone(),
            ch,
            vec![3.0],
            vec![vec![0.0, 1.0]],
            sys.distortion().to_vec(),
            3.0,
            0.2,
        )
        .unwrap();
        let profile = StrategyProfile::new(
            CondKernel::deterministic(&[0, 0], 1).unwrap(),
            CondKernel::identity(2),
            CondKernel::constant(1, &Pmf::bernoulli(0.2).unwrap()),
        );
        let r = check_user_cost(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.slope * 0.0 + r.intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_posterior_is_degenerate() {
        let (sys, profile) = binary_example(0.5, 0.2).unwrap();
        let r = check_distortion(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Degenerate);
    }

    #[test]
    fn log_loss_distortion_recovers_unit_constants() {
        let (sys, profile) = binary_example(0.1, 0.2).unwrap();
        let post = posterior_s_given_shat(&sys, &profile).unwrap();
        let d: Vec<Vec<f64>> = (0..2)
            .map(|s| (0..2).map(|t| -post.prob(s, t).unwrap().ln()).collect())
            .collect();
        let sys = sys.with_distortion(d).unwrap();
        // Posterior does not depend on d.
        let r = check_distortion(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.b1 - 1.0).abs() < 1e-12);
        assert!(r.d0.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn jammer_cost_equal_half_noise_is_degenerate() {
        let (sys, profile) = binary_example(0.5, 0.2).unwrap();
        let r = check_jammer_cost(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Degenerate);
    }

    #[test]
    fn constructed_jammer_cost_recovers_constants() {
        let (sys, profile) = binary_example(0.1, 0.2).unwrap();
        let h = conditional_distortion(&sys, &profile.encoder, &profile.decoder).unwrap();
        let rho: Vec<Vec<f64>> = h
            .iter()
            .map(|r| r.iter().map(|v| 2.0 * v).collect())
            .collect();
        let sys = sys.with_jammer_cost(rho).unwrap();
        let r = check_jammer_cost(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.slope - 2.0).abs() < 1e-12 && r.intercept.abs() < 1e-12);
    }

    #[test]
    fn zero_budget_jammer_uses_admissible_slope() {
        let (sys, profile) = binary_example(0.1, 0.0).unwrap();
        let r = check_jammer_cost(&sys, &profile, DEFAULT_TOL).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.verdict, Verdict::Pass, "{r:#?}");
    }

    #[test]
    fn off_support_violation_reported() {
        // Jammer never sends 1 but 1 is cheaper than the fit allows.
        let (sys, _) = binary_example(0.1, 0.0).unwrap();
        let sys = sys.with_jammer_cost(vec![vec![0.5, 0.0]; 2]).unwrap();
        let profile = StrategyProfile::new(
            CondKernel::identity(2),
            CondKernel::identity(2),
            CondKernel::constant(2, &Pmf::point(2, 0)),
        );
        let r = check_jammer_cost(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.violations.len(), 2);
    }

    #[test]
    fn asymmetric_channel_not_matched() {
        let (sys, profile) = asymmetric_binary_example(0.1, 0.3, 0.2).unwrap();
        let report = check_matched(&sys, &profile, DEFAULT_TOL).unwrap();
        assert!(!report.passed());
        assert!(report.failed_conditions().contains(&Condition::UserCost));
    }

    #[test]
    fn zero_distortion_is_degenerate_distortion() {
        let (sys, profile) = binary_example(0.1, 0.2).unwrap();
        let sys = sys.with_distortion(vec![vec![0.0; 2]; 2]).unwrap();
        let report = check_matched(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(report.distortion.verdict, Verdict::Degenerate);
        assert!(!report.passed());
    }

    #[test]
    fn zero_posterior_pairs_are_listed() {
        let (sys, profile) = binary_example(0.0, 0.0).unwrap();
        let r = check_distortion(&sys, &profile, DEFAULT_TOL).unwrap();
        assert_eq!(r.unverifiable, vec![(1, 0), (0, 1)]);
        assert_ne!(r.verdict, Verdict::Pass);
    }
}
