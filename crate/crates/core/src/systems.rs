//! Ready-made systems with their candidate equilibrium profiles.

use crate::error::{Error, Result};
use crate::model::{CondKernel, JammedChannel, JsccsjSystem, Pmf, StrategyProfile};

pub fn hamming_distortion(len: usize) -> Vec<Vec<f64>> {
    (0..len)
        .map(|s| (0..len).map(|t| if s == t { 0.0 } else { 1.0 }).collect())
        .collect()
}

/// Mod-`L` additive system `Y = X + J + Z`.
///
/// The source is uniform over `L` symbols with Hamming distortion, the user
/// cost is constant 1 with budget 1, and the jammer pays 1 for any non-zero
/// shift. The noise `Z` and the profile's jammer both spread their mass
/// (`p` and `jammer_budget` respectively) evenly over the non-zero shifts.
/// The profile uses the identity encoder and decoder.
pub fn lary_example(
    levels: usize,
    p: f64,
    jammer_budget: f64,
) -> Result<(JsccsjSystem, StrategyProfile)> {
    if levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "alphabet size must be at least 2, got {levels}"
        )));
    }
    let max = 1.0 - 1.0 / levels as f64;
    if !(0.0..=max).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "noise level p = {p} outside [0, {max}]"
        )));
    }
    if !(0.0..=max).contains(&jammer_budget) {
        return Err(Error::InvalidParameter(format!(
            "jammer budget {jammer_budget} outside [0, {max}]"
        )));
    }
    let spread = |mass: f64| -> Vec<f64> {
        let mut row = vec![mass / (levels - 1) as f64; levels];
        row[0] = 1.0 - mass;
        row
    };
    let noise = spread(p);
    let channel = JammedChannel::from_fn(levels, levels, |x, j| {
        (0..levels)
            .map(|y| noise[(y + 2 * levels - x - j) % levels])
            .collect()
    })?;
    let jammer_cost = vec![
        (0..levels)
            .map(|j| if j == 0 { 0.0 } else { 1.0 })
            .collect();
        levels
    ];
    let system = JsccsjSystem::new(
        Pmf::uniform(levels),
        channel,
        vec![1.0; levels],
        jammer_cost,
        hamming_distortion(levels),
        1.0,
        jammer_budget,
    )?;
    let profile = StrategyProfile::new(
        CondKernel::identity(levels),
        CondKernel::identity(levels),
        CondKernel::constant(levels, &Pmf::new(spread(jammer_budget))?),
    );
    Ok((system, profile))
}

/// Binary symmetric source over `Y = X xor J xor Z`, `Z ~ Bern(p)`, with
/// Bernoulli(`jammer_budget`) jamming independent of `X`.
pub fn binary_example(p: f64, jammer_budget: f64) -> Result<(JsccsjSystem, StrategyProfile)> {
    lary_example(2, p, jammer_budget)
}

/// Like [`binary_example`] but the crossover depends on the input: `p0` for
/// `x = 0` and `p1` for `x = 1`.
pub fn asymmetric_binary_example(
    p0: f64,
    p1: f64,
    jammer_budget: f64,
) -> Result<(JsccsjSystem, StrategyProfile)> {
    let (base, profile) = binary_example(0.0, jammer_budget)?;
    let channel = JammedChannel::from_fn(2, 2, |x, j| {
        let p = if x == 0 { p0 } else { p1 };
        if x ^ j == 0 {
            vec![1.0 - p, p]
        } else {
            vec![p, 1.0 - p]
        }
    })?;
    let system = JsccsjSystem::new(
        base.source().clone(),
        channel,
        base.user_cost().to_vec(),
        base.jammer_cost().to_vec(),
        base.distortion().to_vec(),
        base.user_budget(),
        jammer_budget,
    )?;
    Ok((system, profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expected_distortion;

    #[test]
    fn lary_two_is_binary() {
        let (sys, profile) = lary_example(2, 0.1, 0.2).unwrap();
        assert_eq!(sys.channel().row(0, 0).probs(), &[0.9, 0.1]);
        assert_eq!(sys.channel().row(0, 1).probs(), &[0.1, 0.9]);
        assert_eq!(sys.channel().row(1, 1).probs(), &[0.9, 0.1]);
        assert_eq!(profile.jammer.row(0).probs(), &[0.8, 0.2]);
    }

    #[test]
    fn lary_channel_is_additive() {
        let (sys, _) = lary_example(3, 0.1, 0.2).unwrap();
        // y = x + j + z, z = 0 w.p. 0.9
        assert!((sys.channel().prob(0, 1, 2) - 0.9).abs() < 1e-15);
        assert!((sys.channel().prob(1, 1, 2) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn unjammed_error_rate_is_noise_level() {
        let (sys, profile) = lary_example(4, 0.3, 0.0).unwrap();
        let d = expected_distortion(&sys, &profile).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn parameter_ranges() {
        assert!(lary_example(1, 0.1, 0.1).is_err());
        assert!(lary_example(2, 0.6, 0.1).is_err());
        assert!(lary_example(3, 0.1, 0.7).is_err());
        assert!(lary_example(3, 0.1, 2.0 / 3.0).is_ok());
    }
}
