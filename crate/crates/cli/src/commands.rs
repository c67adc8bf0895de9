//! Command implementations. Each returns the complete report text; the
//! binary only handles arguments, I/O and exit codes.
//!
//! Reports end with a blank line followed by `key=value` lines meant for
//! scripts.

use std::fmt::Write as _;

use jsccsj_core::game::{distortion_cost_curve, nash_gap, NashOptions};
use jsccsj_core::gaussian::{
    discretized_matching_check, gaussian_mse, jammer_best_linear_response, linear_game_report,
    DiscretizedVerdict, GaussianSystem, GridSpec, LinearGaussianProfile,
};
use jsccsj_core::matching::{check_matched, AffineCondition, MatchReport, Verdict};
use jsccsj_core::model::{expected_distortion, expected_jammer_cost, expected_user_cost};
use jsccsj_core::sim::{simulate, simulate_gaussian, Estimate, SimConfig, SimResult};
use jsccsj_core::systems::lary_example;
use jsccsj_core::{JsccsjSystem, StrategyProfile};

use crate::spec_file::{Alphabets, FiniteSpec, GaussianSpec, SpecFile};
use crate::CliError;

#[derive(Default)]
struct Report {
    body: String,
    trailer: String,
}

impl Report {
    fn line(&mut self, text: impl AsRef<str>) {
        self.body.push_str(text.as_ref());
        self.body.push('\n');
    }

    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.trailer, "{key}={value}");
    }

    fn finish(self) -> String {
        format!("{}\n{}", self.body, self.trailer)
    }
}

/// Shortest round-trip form, in scientific notation for very small or
/// very large magnitudes.
struct N(f64);

impl std::fmt::Display for N {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |v| N(v).to_string())
}

fn matched_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "MATCHED",
        Verdict::Fail => "NOT MATCHED",
        Verdict::Degenerate => "DEGENERATE",
    }
}

fn finite_profile(f: &FiniteSpec) -> Result<&StrategyProfile, CliError> {
    f.profile
        .as_ref()
        .ok_or_else(|| CliError::Usage("the file has no \"profile\" section".into()))
}

fn gaussian_profile(g: &GaussianSpec) -> Result<&LinearGaussianProfile, CliError> {
    g.profile
        .as_ref()
        .ok_or_else(|| CliError::Usage("the \"gaussian\" section has no \"profile\"".into()))
}

pub fn validate(spec: &SpecFile) -> Result<String, CliError> {
    let mut r = Report::default();
    r.kv("cmd", "validate");
    if let Some(f) = &spec.finite {
        let s = &f.system;
        r.line(format!(
            "finite system: |S|={} |X|={} |J|={} |Y|={} |Shat|={}, P_U={} P_J={}",
            s.num_source(),
            s.num_inputs(),
            s.num_jammer_inputs(),
            s.num_outputs(),
            s.num_estimates(),
            N(s.user_budget()),
            N(s.jammer_budget())
        ));
        r.kv("finite", true);
        r.kv("finite_profile", f.profile.is_some());
        if let Some(p) = &f.profile {
            let feasible = p.is_feasible(s, 1e-9)?;
            r.line(format!(
                "profile: user cost {}, jammer cost {}{}",
                N(expected_user_cost(s, &p.encoder)?),
                N(expected_jammer_cost(s, &p.encoder, &p.jammer)?),
                if feasible { "" } else { " (exceeds a budget)" }
            ));
            r.kv("finite_profile_feasible", feasible);
        }
    } else {
        r.kv("finite", false);
    }
    if let Some(g) = &spec.gaussian {
        let s = &g.system;
        r.line(format!(
            "gaussian system: source_var={} sigma2={} P_U={} P_J={}",
            N(s.source_var),
            N(s.noise_var),
            N(s.user_budget),
            N(s.jammer_budget)
        ));
        r.kv("gaussian", true);
        r.kv("gaussian_profile", g.profile.is_some());
        if let Some(p) = &g.profile {
            let feasible = p.is_feasible(s, 1e-9);
            r.line(format!(
                "profile: user cost {}, jammer cost {}{}",
                N(p.encoder_cost(s)),
                N(p.jammer_cost(s)),
                if feasible { "" } else { " (exceeds a budget)" }
            ));
            r.kv("gaussian_profile_feasible", feasible);
        }
    } else {
        r.kv("gaussian", false);
    }
    r.line("valid");
    r.kv("valid", true);
    Ok(r.finish())
}

fn render_affine(
    r: &mut Report,
    c: &AffineCondition,
    title: &str,
    names: (&str, &str),
    f: &FiniteSpec,
) {
    let label = c.condition.label();
    r.line(format!("{title} condition: {}", matched_word(c.verdict)));
    r.line(format!(
        "  {} = {}  {} = {}  residual = {}{}",
        names.0,
        N(c.slope),
        names.1,
        N(c.intercept),
        N(c.residual),
        if c.degenerate {
            "  (degenerate fit)"
        } else {
            ""
        }
    ));
    for v in &c.violations {
        let at = match v.j {
            Some(j) => format!("x={:?} j={:?}", f.alphabets.x[v.x], f.alphabets.j[j]),
            None => format!("x={:?}", f.alphabets.x[v.x]),
        };
        r.line(format!(
            "  off-support violation at {at}: deficit {}",
            N(v.deficit)
        ));
    }
    for n in &c.notes {
        r.line(format!("  note: {n}"));
    }
    r.kv(names.0, N(c.slope));
    r.kv(names.1, N(c.intercept));
    r.kv(&format!("residual_{label}"), N(c.residual));
    r.kv(&format!("verdict_{label}"), matched_word(c.verdict));
}

fn render_match(r: &mut Report, m: &MatchReport, f: &FiniteSpec) {
    render_affine(r, &m.user_cost, "user cost", ("a1", "a2"), f);
    let d = &m.distortion;
    r.line(format!("distortion condition: {}", matched_word(d.verdict)));
    r.line(format!(
        "  b1 = {}  residual = {}{}",
        N(d.b1),
        N(d.residual),
        if d.degenerate {
            "  (degenerate fit)"
        } else {
            ""
        }
    ));
    for (s, v) in d.d0.iter().enumerate() {
        r.line(format!("  d0({:?}) = {}", f.alphabets.s[s], N(*v)));
    }
    for &(s, t) in &d.unverifiable {
        r.line(format!(
            "  zero posterior at s={:?} shat={:?}: pair excluded",
            f.alphabets.s[s], f.alphabets.shat[t]
        ));
    }
    for n in &d.notes {
        r.line(format!("  note: {n}"));
    }
    r.kv("b1", N(d.b1));
    r.kv("residual_distortion", N(d.residual));
    r.kv("verdict_distortion", matched_word(d.verdict));
    render_affine(r, &m.jammer_cost, "jammer cost", ("c1", "c2"), f);
}

pub fn check_matched_finite(f: &FiniteSpec, tol: f64) -> Result<String, CliError> {
    let profile = finite_profile(f)?;
    let m = check_matched(&f.system, profile, tol)?;
    let mut r = Report::default();
    r.kv("cmd", "check-matched");
    r.kv("tol", N(tol));
    render_match(&mut r, &m, f);
    let verdict = if m.passed() { "MATCHED" } else { "NOT MATCHED" };
    let failed: Vec<&str> = m.failed_conditions().iter().map(|c| c.label()).collect();
    if failed.is_empty() {
        r.line(format!("verdict: {verdict}"));
    } else {
        r.line(format!(
            "verdict: {verdict} (failing: {})",
            failed.join(", ")
        ));
    }
    r.kv(
        "failed",
        if failed.is_empty() {
            "none".into()
        } else {
            failed.join(",")
        },
    );
    r.kv("verdict", verdict);
    Ok(r.finish())
}

pub fn check_matched_gaussian(
    g: &GaussianSpec,
    grid: GridSpec,
    tol: f64,
) -> Result<String, CliError> {
    let profile = gaussian_profile(g)?;
    let d = discretized_matching_check(&g.system, profile, grid, tol)?;
    let mut r = Report::default();
    r.kv("cmd", "check-matched");
    r.kv("tol", N(tol));
    r.kv("points", grid.points);
    r.kv("half_width", N(grid.half_width));
    r.line(format!(
        "discretized on {} points per variable over +-{} standard deviations",
        grid.points,
        N(grid.half_width)
    ));
    let m = &d.report;
    let names = ["user_cost", "distortion", "jammer_cost"];
    let constants = [
        format!(
            "a1 = {}  a2 = {}",
            N(m.user_cost.slope),
            N(m.user_cost.intercept)
        ),
        format!("b1 = {}", N(m.distortion.b1)),
        format!(
            "c1 = {}  c2 = {}",
            N(m.jammer_cost.slope),
            N(m.jammer_cost.intercept)
        ),
    ];
    for (i, (_, v)) in m.verdicts().iter().enumerate() {
        let coarse = d.coarse_residuals.map(|c| c[i]);
        r.line(format!(
            "{} condition: {}",
            names[i].replace('_', " "),
            matched_word(*v)
        ));
        r.line(format!(
            "  {}  residual = {} (tolerance {}, coarse grid {})",
            constants[i],
            N(d.residuals[i]),
            N(d.tolerances[i]),
            opt(coarse)
        ));
        r.kv(&format!("residual_{}", names[i]), N(d.residuals[i]));
        r.kv(&format!("coarse_residual_{}", names[i]), opt(coarse));
        r.kv(&format!("tol_{}", names[i]), N(d.tolerances[i]));
        r.kv(&format!("verdict_{}", names[i]), matched_word(*v));
    }
    r.kv("a1", N(m.user_cost.slope));
    r.kv("b1", N(m.distortion.b1));
    r.kv("c1", N(m.jammer_cost.slope));
    let verdict = match d.verdict {
        DiscretizedVerdict::Matched => "MATCHED",
        DiscretizedVerdict::NotMatched => "NOT MATCHED",
        DiscretizedVerdict::Inconclusive => "INCONCLUSIVE",
    };
    r.line(format!(
        "verdict: {verdict} (companion grid of {} points)",
        d.coarse_points
    ));
    r.kv("verdict", verdict);
    Ok(r.finish())
}

pub fn nash_verify_finite(f: &FiniteSpec, tol: f64, block_n: usize) -> Result<String, CliError> {
    let profile = finite_profile(f)?;
    let options = NashOptions {
        tol,
        block_n,
        ..NashOptions::default()
    };
    let g = nash_gap(&f.system, profile, &options)?;
    let mut r = Report::default();
    r.kv("cmd", "nash-verify");
    r.kv("tol", N(tol));
    r.line(format!("value: {}", N(g.value)));
    r.line(format!(
        "jammer best response: {}  (gap {})",
        N(g.jammer_br_value),
        N(g.jammer_gap)
    ));
    r.line(format!(
        "user best response:   {}  (gap {})",
        N(g.user_br_value),
        N(g.user_gap)
    ));
    r.kv("value", N(g.value));
    r.kv("jammer_br_value", N(g.jammer_br_value));
    r.kv("user_br_value", N(g.user_br_value));
    r.kv("jammer_gap", N(g.jammer_gap));
    r.kv("user_gap", N(g.user_gap));
    if let Some(b) = &g.block {
        r.line(format!(
            "block n={}: jammer LP {} (gap {}), user search {} (gap {})",
            b.n,
            N(b.jammer_value),
            N(b.jammer_gap),
            opt(b.user_value),
            opt(b.user_gap)
        ));
        r.kv("block_n", b.n);
        r.kv("block_jammer_value", N(b.jammer_value));
        r.kv("block_jammer_gap", N(b.jammer_gap));
        r.kv("block_user_value", opt(b.user_value));
        r.kv("block_user_gap", opt(b.user_gap));
    }
    r.line(format!(
        "user side certified exhaustively up to block length {}; longer codes are not searched",
        g.user_certified_n
    ));
    r.kv("user_certified_n", g.user_certified_n);
    let verdict = if g.nash_ok {
        "EQUILIBRIUM"
    } else {
        "NOT EQUILIBRIUM"
    };
    r.line(format!("verdict: {verdict}"));
    r.kv("verdict", verdict);
    Ok(r.finish())
}

pub fn nash_verify_gaussian(g: &GaussianSpec, tol: f64) -> Result<String, CliError> {
    let profile = gaussian_profile(g)?;
    let rep = linear_game_report(&g.system, profile, tol);
    let mut r = Report::default();
    r.kv("cmd", "nash-verify");
    r.kv("tol", N(tol));
    r.line("linear strategies only");
    r.line(format!("value: {}", N(rep.value)));
    r.line(format!(
        "jammer best linear response: alpha={} sigma_R2={} value={} (gap {})",
        N(rep.jammer_response.alpha),
        N(rep.jammer_response.noise_var),
        N(rep.jammer_response.value),
        N(rep.jammer_gap)
    ));
    r.line(format!(
        "user best linear response: gain={} kappa={} value={} (gap {})",
        N(rep.user_encoder_gain),
        N(rep.user_decoder_gain),
        N(rep.user_br_value),
        N(rep.user_gap)
    ));
    r.kv("value", N(rep.value));
    r.kv("jammer_br_value", N(rep.jammer_response.value));
    r.kv("jammer_br_alpha", N(rep.jammer_response.alpha));
    r.kv("jammer_br_sigma_R2", N(rep.jammer_response.noise_var));
    r.kv("user_br_value", N(rep.user_br_value));
    r.kv("user_br_kappa", N(rep.user_decoder_gain));
    r.kv("jammer_gap", N(rep.jammer_gap));
    r.kv("user_gap", N(rep.user_gap));
    let verdict = if rep.nash_ok {
        "EQUILIBRIUM"
    } else {
        "NOT EQUILIBRIUM"
    };
    r.line(format!("verdict: {verdict}"));
    r.kv("verdict", verdict);
    Ok(r.finish())
}

/// Parses `start:stop:step` into an increasing grid. Points are
/// `start + k step`, rounded to 12 decimals to avoid drift.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Usage(format!("invalid grid {text:?}; expected start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !nums.iter().all(|v| v.is_finite()) || step <= 0.0 {
        return Err(bad());
    }
    if stop < start {
        return Err(CliError::Usage(format!("grid {text:?} is empty")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(CliError::Usage(format!(
            "grid {text:?} has more than 10^6 points"
        )));
    }
    Ok((0..count)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// CSV with header `P_J,D`, one row per grid point (`INFEASIBLE` when the
/// budget is below the cheapest jammer action) and `#` footer lines.
pub fn deq_curve(f: &FiniteSpec, grid: &[f64], tol: f64) -> Result<String, CliError> {
    let profile = finite_profile(f)?;
    let curve = distortion_cost_curve(&f.system, &profile.encoder, &profile.decoder, grid, tol)?;
    let mut out = String::from("P_J,D\n");
    for s in &curve.samples {
        match s.value {
            Some(v) => writeln!(out, "{},{}", N(s.budget), N(v)),
            None => writeln!(out, "{},INFEASIBLE", N(s.budget)),
        }
        .expect("writing to a String");
    }
    let _ = writeln!(out, "# monotone={}", curve.monotone_ok);
    let _ = writeln!(
        out,
        "# max_monotone_violation={}",
        N(curve.max_monotone_violation)
    );
    let _ = writeln!(out, "# concave={}", curve.concave_ok);
    let _ = writeln!(
        out,
        "# max_concavity_violation={}",
        N(curve.max_concavity_violation)
    );
    let _ = writeln!(out, "# linear={}", curve.linear_ok);
    let _ = writeln!(
        out,
        "# max_linearity_deviation={}",
        N(curve.max_linearity_deviation)
    );
    let _ = writeln!(out, "# chord_slope={}", N(curve.chord_slope));
    let _ = writeln!(out, "# tol={}", N(tol));
    Ok(out)
}

fn render_estimate(r: &mut Report, name: &str, e: &Estimate, exact: Option<f64>) {
    let mut line = format!("{name}: {} +- {} (1 s.e.)", N(e.mean), N(e.std_error));
    if let Some(x) = exact {
        let _ = write!(line, "; analytic {}, {} s.e. away", N(x), N(e.z_score(x)));
    }
    r.line(line);
    r.kv(name, N(e.mean));
    r.kv(&format!("{name}_se"), N(e.std_error));
    if let Some(x) = exact {
        r.kv(&format!("{name}_analytic"), N(x));
    }
}

fn render_sim(r: &mut Report, res: &SimResult, exact: [Option<f64>; 3]) {
    r.kv("cmd", "simulate");
    r.kv("n", res.config.block_length);
    r.kv("blocks", res.config.num_blocks);
    r.kv("seed", res.config.seed);
    r.line(format!(
        "{} blocks of length {}, seed {}",
        res.config.num_blocks, res.config.block_length, res.config.seed
    ));
    render_estimate(r, "distortion", &res.distortion, exact[0]);
    render_estimate(r, "user_cost", &res.user_cost, exact[1]);
    render_estimate(r, "jammer_cost", &res.jammer_cost, exact[2]);
}

pub fn simulate_finite(f: &FiniteSpec, config: &SimConfig) -> Result<String, CliError> {
    let profile = finite_profile(f)?;
    let res = simulate(&f.system, profile, config)?;
    let exact = [
        Some(expected_distortion(&f.system, profile)?),
        Some(expected_user_cost(&f.system, &profile.encoder)?),
        Some(expected_jammer_cost(
            &f.system,
            &profile.encoder,
            &profile.jammer,
        )?),
    ];
    let mut r = Report::default();
    render_sim(&mut r, &res, exact);
    Ok(r.finish())
}

pub fn simulate_gaussian_spec(g: &GaussianSpec, config: &SimConfig) -> Result<String, CliError> {
    let profile = gaussian_profile(g)?;
    let res = simulate_gaussian(&g.system, profile, config)?;
    let exact = [
        Some(gaussian_mse(&g.system, profile)),
        Some(profile.encoder_cost(&g.system)),
        Some(profile.jammer_cost(&g.system)),
    ];
    let mut r = Report::default();
    render_sim(&mut r, &res, exact);
    Ok(r.finish())
}

fn finite_file(system: JsccsjSystem, profile: StrategyProfile) -> SpecFile {
    let alphabets = Alphabets::numbered(
        system.num_source(),
        system.num_inputs(),
        system.num_jammer_inputs(),
        system.num_outputs(),
        system.num_estimates(),
    );
    SpecFile {
        finite: Some(FiniteSpec {
            alphabets,
            system,
            profile: Some(profile),
        }),
        gaussian: None,
    }
}

/// The mod-`L` additive example with identity code and uniform jamming.
pub fn example_lary(levels: usize, p: f64, pj: f64) -> Result<SpecFile, CliError> {
    let (system, profile) = lary_example(levels, p, pj)?;
    Ok(finite_file(system, profile))
}

/// The scalar Gaussian system with the full-power encoder, the nominal
/// decoder gain and the jammer's best linear response to them.
pub fn example_gaussian(
    source_var: f64,
    pu: f64,
    sigma2: f64,
    pj: f64,
) -> Result<SpecFile, CliError> {
    let system = GaussianSystem::new(source_var, sigma2, pu, pj)?;
    let g = system.full_power_gain();
    let k = system.nominal_decoder_gain();
    let jam = jammer_best_linear_response(&system, g, k);
    Ok(SpecFile {
        finite: None,
        gaussian: Some(GaussianSpec {
            system,
            profile: Some(LinearGaussianProfile {
                encoder_gain: g,
                decoder_gain: k,
                jammer_alpha: jam.alpha,
                jammer_noise_var: jam.noise_var,
            }),
        }),
    })
}
