//! Finite-alphabet kernels, the system tuple, and the expectations built on
//! top of them.
//!
//! Every alphabet is identified with `0..len`. Deterministic maps are plain
//! one-hot [`CondKernel`]s, and zero-probability symbols stay in their
//! alphabets because the matching conditions treat on-support and
//! off-support symbols differently.

use crate::error::{Error, Result};

/// Row sums within this distance of 1 are renormalized, anything further
/// off is rejected. Sums that differ from 1 only by summation rounding are
/// kept as given, so that renormalizing twice changes nothing.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf(Vec<f64>);

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyPmf);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let rounding = probs.len() as f64 * f64::EPSILON;
        let probs = if (sum - 1.0).abs() <= rounding {
            probs
        } else {
            probs.into_iter().map(|p| p / sum).collect()
        };
        Ok(Self(probs))
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform pmf over an empty alphabet");
        Self(vec![1.0 / len as f64; len])
    }

    pub fn point(len: usize, at: usize) -> Self {
        assert!(at < len, "point mass outside the alphabet");
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Self(probs)
    }

    /// `[1 - q, q]`.
    pub fn bernoulli(q: f64) -> Result<Self> {
        Self::new(vec![1.0 - q, q])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }

    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| p * f(i))
            .sum()
    }

    /// `beta * self + (1 - beta) * other`.
    pub fn mix(&self, other: &Pmf, beta: f64) -> Result<Pmf> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot mix pmfs of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Pmf::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| beta * a + (1.0 - beta) * b)
                .collect(),
        )
    }

    /// Lowest-index symbol with maximal probability.
    pub fn mode(&self) -> usize {
        argmax(&self.0)
    }
}

impl AsRef<[f64]> for Pmf {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A row-stochastic table `p(out | row)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondKernel {
    rows: Vec<Pmf>,
    out_len: usize,
}

impl CondKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| Pmf::new(r).map_err(|e| e.in_row(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<Pmf>) -> Result<Self> {
        let out_len = rows.first().map(Pmf::len).ok_or(Error::EmptyPmf)?;
        if let Some(i) = rows.iter().position(|r| r.len() != out_len) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} outputs, expected {out_len}",
                rows[i].len()
            )));
        }
        Ok(Self { rows, out_len })
    }

    /// One-hot kernel sending row `i` to output `map[i]`.
    pub fn deterministic(map: &[usize], out_len: usize) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&m| m >= out_len) {
            return Err(Error::DimensionMismatch(format!(
                "deterministic map target {bad} outside output alphabet of size {out_len}"
            )));
        }
        Self::from_rows(map.iter().map(|&m| Pmf::point(out_len, m)).collect())
    }

    pub fn identity(len: usize) -> Self {
        Self::deterministic(&(0..len).collect::<Vec<_>>(), len).expect("identity is valid")
    }

    /// Every row equal to `pmf`.
    pub fn constant(rows: usize, pmf: &Pmf) -> Self {
        Self {
            rows: vec![pmf.clone(); rows],
            out_len: pmf.len(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    pub fn row(&self, i: usize) -> &Pmf {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn prob(&self, row: usize, out: usize) -> f64 {
        self.rows[row].get(out)
    }

    /// If every row is a point mass, the map it encodes.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| {
                let m = r.mode();
                (r.get(m) == 1.0).then_some(m)
            })
            .collect()
    }

    /// Row-wise `beta * self + (1 - beta) * other`.
    pub fn mix(&self, other: &CondKernel, beta: f64) -> Result<CondKernel> {
        if self.num_rows() != other.num_rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot mix kernels with {} and {} rows",
                self.num_rows(),
                other.num_rows()
            )));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.mix(b, beta))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

/// The memoryless channel `p(y | x, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JammedChannel {
    kernel: CondKernel,
    num_inputs: usize,
    num_jammer_inputs: usize,
}

impl JammedChannel {
    /// `table[x][j]` is the output distribution for inputs `(x, j)`.
    pub fn new(table: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let num_inputs = table.len();
        let num_jammer_inputs = table.first().map(Vec::len).unwrap_or(0);
        if num_inputs == 0 || num_jammer_inputs == 0 {
            return Err(Error::InvalidSystem(
                "channel has an empty input alphabet".into(),
            ));
        }
        if let Some(x) = table.iter().position(|r| r.len() != num_jammer_inputs) {
            return Err(Error::DimensionMismatch(format!(
                "channel input {x} has {} jammer rows, expected {num_jammer_inputs}",
                table[x].len()
            )));
        }
        let kernel = CondKernel::new(table.into_iter().flatten().collect())?;
        Ok(Self {
            kernel,
            num_inputs,
            num_jammer_inputs,
        })
    }

    /// Builds the channel from a rule `(x, j) -> p(. | x, j)`.
    pub fn from_fn(
        num_inputs: usize,
        num_jammer_inputs: usize,
        mut f: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        Self::new(
            (0..num_inputs)
                .map(|x| (0..num_jammer_inputs).map(|j| f(x, j)).collect())
                .collect(),
        )
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_jammer_inputs(&self) -> usize {
        self.num_jammer_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.kernel.out_len()
    }

    pub fn row(&self, x: usize, j: usize) -> &Pmf {
        self.kernel.row(x * self.num_jammer_inputs + j)
    }

    pub fn prob(&self, y: usize, x: usize, j: usize) -> f64 {
        self.row(x, j).get(y)
    }

    /// Slice of the channel at a fixed jammer input.
    pub fn slice(&self, j: usize) -> CondKernel {
        CondKernel::from_rows(
            (0..self.num_inputs)
                .map(|x| self.row(x, j).clone())
                .collect(),
        )
        .expect("slice rows share the output alphabet")
    }
}

/// `p_{Y|X}(y|x) = sum_j p_{Y|X,J}(y|x,j) p_{J|X}(j|x)`.
pub fn induced_channel(channel: &JammedChannel, jammer: &CondKernel) -> Result<CondKernel> {
    if jammer.num_rows() != channel.num_inputs() || jammer.out_len() != channel.num_jammer_inputs()
    {
        return Err(Error::DimensionMismatch(format!(
            "jammer kernel is {}x{}, channel expects {}x{}",
            jammer.num_rows(),
            jammer.out_len(),
            channel.num_inputs(),
            channel.num_jammer_inputs()
        )));
    }
    let ny = channel.num_outputs();
    let rows = (0..channel.num_inputs())
        .map(|x| {
            let mut row = vec![0.0; ny];
            for j in jammer.row(x).support() {
                let w = jammer.prob(x, j);
                for (acc, &p) in row.iter_mut().zip(channel.row(x, j).probs()) {
                    *acc += w * p;
                }
            }
            Pmf::new(row)
        })
        .collect::<Result<Vec<_>>>()?;
    CondKernel::from_rows(rows)
}

/// The tuple `(p_S, p_{Y|X,J}, rho_X, rho_{J|X}, d)` with both budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct JsccsjSystem {
    source: Pmf,
    channel: JammedChannel,
    user_cost: Vec<f64>,
    jammer_cost: Vec<Vec<f64>>,
    distortion: Vec<Vec<f64>>,
    user_budget: f64,
    jammer_budget: f64,
}

impl JsccsjSystem {
    /// `jammer_cost[x][j]` is `rho_{J|X}(j|x)`; `distortion[s][shat]` is
    /// `d(s, shat)`.
    pub fn new(
        source: Pmf,
        channel: JammedChannel,
        user_cost: Vec<f64>,
        jammer_cost: Vec<Vec<f64>>,
        distortion: Vec<Vec<f64>>,
        user_budget: f64,
        jammer_budget: f64,
    ) -> Result<Self> {
        let nx = channel.num_inputs();
        let nj = channel.num_jammer_inputs();
        if user_cost.len() != nx {
            return Err(Error::DimensionMismatch(format!(
                "user cost has {} entries, channel has {nx} inputs",
                user_cost.len()
            )));
        }
        if let Some(x) = user_cost.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidSystem(format!(
                "user cost of input {x} is {}; costs must be finite and non-negative",
                user_cost[x]
            )));
        }
        if jammer_cost.len() != nx || jammer_cost.iter().any(|r| r.len() != nj) {
            return Err(Error::DimensionMismatch(format!(
                "jammer cost table must be {nx}x{nj}"
            )));
        }
        if jammer_cost.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSystem("jammer costs must be finite".into()));
        }
        let ns = source.len();
        let nshat = distortion.first().map(Vec::len).unwrap_or(0);
        if distortion.len() != ns || nshat == 0 || distortion.iter().any(|r| r.len() != nshat) {
            return Err(Error::DimensionMismatch(format!(
                "distortion table must have {ns} rows of equal non-zero length"
            )));
        }
        for (s, row) in distortion.iter().enumerate() {
            if let Some(t) = row.iter().position(|d| !d.is_finite() || *d < 0.0) {
                return Err(Error::InvalidSystem(format!(
                    "distortion d({s},{t}) = {} must be finite and non-negative",
                    row[t]
                )));
            }
        }
        if !user_budget.is_finite() || !jammer_budget.is_finite() {
            return Err(Error::InvalidSystem("budgets must be finite".into()));
        }
        let min_cost = user_cost.iter().copied().fold(f64::INFINITY, f64::min);
        if user_budget < min_cost {
            return Err(Error::InvalidSystem(format!(
                "user budget {user_budget} is below the cheapest input cost {min_cost}"
            )));
        }
        Ok(Self {
            source,
            channel,
            user_cost,
            jammer_cost,
            distortion,
            user_budget,
            jammer_budget,
        })
    }

    pub fn source(&self) -> &Pmf {
        &self.source
    }

    pub fn channel(&self) -> &JammedChannel {
        &self.channel
    }

    pub fn user_cost(&self) -> &[f64] {
        &self.user_cost
    }

    pub fn jammer_cost(&self) -> &[Vec<f64>] {
        &self.jammer_cost
    }

    pub fn distortion(&self) -> &[Vec<f64>] {
        &self.distortion
    }

    pub fn user_budget(&self) -> f64 {
        self.user_budget
    }

    pub fn jammer_budget(&self) -> f64 {
        self.jammer_budget
    }

    pub fn num_source(&self) -> usize {
        self.source.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.channel.num_inputs()
    }

    pub fn num_jammer_inputs(&self) -> usize {
        self.channel.num_jammer_inputs()
    }

    pub fn num_outputs(&self) -> usize {
        self.channel.num_outputs()
    }

    pub fn num_estimates(&self) -> usize {
        self.distortion[0].len()
    }

    pub fn with_jammer_cost(&self, jammer_cost: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            self.source.clone(),
            self.channel.clone(),
            self.user_cost.clone(),
            jammer_cost,
            self.distortion.clone(),
            self.user_budget,
            self.jammer_budget,
        )
    }

    pub fn with_user_cost(&self, user_cost: Vec<f64>) -> Result<Self> {
        Self::new(
            self.source.clone(),
            self.channel.clone(),
            user_cost,
            self.jammer_cost.clone(),
            self.distortion.clone(),
            self.user_budget,
            self.jammer_budget,
        )
    }

    pub fn with_distortion(&self, distortion: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            self.source.clone(),
            self.channel.clone(),
            self.user_cost.clone(),
            self.jammer_cost.clone(),
            distortion,
            self.user_budget,
            self.jammer_budget,
        )
    }

    pub fn with_budgets(&self, user_budget: f64, jammer_budget: f64) -> Result<Self> {
        Self::new(
            self.source.clone(),
            self.channel.clone(),
            self.user_cost.clone(),
            self.jammer_cost.clone(),
            self.distortion.clone(),
            user_budget,
            jammer_budget,
        )
    }

    pub(crate) fn check_encoder(&self, encoder: &CondKernel) -> Result<()> {
        expect_shape("encoder", encoder, self.num_source(), self.num_inputs())
    }

    pub(crate) fn check_decoder(&self, decoder: &CondKernel) -> Result<()> {
        expect_shape("decoder", decoder, self.num_outputs(), self.num_estimates())
    }

    pub(crate) fn check_jammer(&self, jammer: &CondKernel) -> Result<()> {
        expect_shape(
            "jammer",
            jammer,
            self.num_inputs(),
            self.num_jammer_inputs(),
        )
    }
}

fn expect_shape(what: &str, k: &CondKernel, rows: usize, cols: usize) -> Result<()> {
    if k.num_rows() != rows || k.out_len() != cols {
        return Err(Error::DimensionMismatch(format!(
            "{what} kernel is {}x{}, expected {rows}x{cols}",
            k.num_rows(),
            k.out_len()
        )));
    }
    Ok(())
}

/// An uncoded user strategy together with an i.i.d. jammer policy.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    pub encoder: CondKernel,
    pub decoder: CondKernel,
    pub jammer: CondKernel,
}

impl StrategyProfile {
    pub fn new(encoder: CondKernel, decoder: CondKernel, jammer: CondKernel) -> Self {
        Self {
            encoder,
            decoder,
            jammer,
        }
    }

    pub fn check_shapes(&self, system: &JsccsjSystem) -> Result<()> {
        system.check_encoder(&self.encoder)?;
        system.check_decoder(&self.decoder)?;
        system.check_jammer(&self.jammer)
    }

    /// Whether both expected costs are within their budgets (up to `tol`).
    pub fn is_feasible(&self, system: &JsccsjSystem, tol: f64) -> Result<bool> {
        self.check_shapes(system)?;
        let user = expected_user_cost(system, &self.encoder)?;
        let jammer = expected_jammer_cost(system, &self.encoder, &self.jammer)?;
        Ok(user <= system.user_budget() + tol && jammer <= system.jammer_budget() + tol)
    }

    pub fn with_jammer(&self, jammer: CondKernel) -> Self {
        Self {
            jammer,
            ..self.clone()
        }
    }
}

/// `p_X(x) = sum_s p_S(s) p_{X|S}(x|s)`.
pub fn input_marginal(system: &JsccsjSystem, encoder: &CondKernel) -> Result<Vec<f64>> {
    system.check_encoder(encoder)?;
    let mut px = vec![0.0; system.num_inputs()];
    for s in system.source().support() {
        let ps = system.source().get(s);
        for (acc, &p) in px.iter_mut().zip(encoder.row(s).probs()) {
            *acc += ps * p;
        }
    }
    Ok(px)
}

/// Output marginal `p_Y` of the induced channel under input law `px`.
pub(crate) fn output_marginal(px: &[f64], induced: &CondKernel) -> Vec<f64> {
    let mut py = vec![0.0; induced.out_len()];
    for (x, &w) in px.iter().enumerate() {
        if w > 0.0 {
            for (acc, &p) in py.iter_mut().zip(induced.row(x).probs()) {
                *acc += w * p;
            }
        }
    }
    py
}

/// Dense table over `(s, x, j, y, shat)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    dims: [usize; 5],
    data: Vec<f64>,
}

impl JointTable {
    pub fn dims(&self) -> [usize; 5] {
        self.dims
    }

    fn index(&self, s: usize, x: usize, j: usize, y: usize, shat: usize) -> usize {
        let [_, nx, nj, ny, nshat] = self.dims;
        (((s * nx + x) * nj + j) * ny + y) * nshat + shat
    }

    pub fn get(&self, s: usize, x: usize, j: usize, y: usize, shat: usize) -> f64 {
        self.data[self.index(s, x, j, y, shat)]
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Iterates `((s, x, j, y, shat), probability)` over non-zero entries.
    pub fn iter(&self) -> impl Iterator<Item = ([usize; 5], f64)> + '_ {
        let [_, nx, nj, ny, nshat] = self.dims;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(mut i, &p)| {
                let shat = i % nshat;
                i /= nshat;
                let y = i % ny;
                i /= ny;
                let j = i % nj;
                i /= nj;
                let x = i % nx;
                let s = i / nx;
                ([s, x, j, y, shat], p)
            })
    }

    /// Marginal over the `axis`-th coordinate (0 = s, ..., 4 = shat).
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dims[axis]];
        for (idx, p) in self.iter() {
            out[idx[axis]] += p;
        }
        out
    }

    /// Joint marginal of `(s, shat)`, indexed `[s][shat]`.
    pub fn source_estimate_marginal(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dims[4]]; self.dims[0]];
        for (idx, p) in self.iter() {
            out[idx[0]][idx[4]] += p;
        }
        out
    }
}

/// `p_S(s) p_{X|S}(x|s) p_{J|X}(j|x) p_{Y|X,J}(y|x,j) p_{Shat|Y}(shat|y)`.
pub fn joint_distribution(system: &JsccsjSystem, profile: &StrategyProfile) -> Result<JointTable> {
    profile.check_shapes(system)?;
    let dims = [
        system.num_source(),
        system.num_inputs(),
        system.num_jammer_inputs(),
        system.num_outputs(),
        system.num_estimates(),
    ];
    let mut table = JointTable {
        dims,
        data: vec![0.0; dims.iter().product()],
    };
    for s in system.source().support() {
        let ps = system.source().get(s);
        for x in profile.encoder.row(s).support() {
            let psx = ps * profile.encoder.prob(s, x);
            for j in profile.jammer.row(x).support() {
                let psxj = psx * profile.jammer.prob(x, j);
                for y in system.channel().row(x, j).support() {
                    let psxjy = psxj * system.channel().prob(y, x, j);
                    for shat in profile.decoder.row(y).support() {
                        let i = table.index(s, x, j, y, shat);
                        table.data[i] = psxjy * profile.decoder.prob(y, shat);
                    }
                }
            }
        }
    }
    Ok(table)
}

/// `E[d(S, Shat)]` under the single-letter chain.
pub fn expected_distortion(system: &JsccsjSystem, profile: &StrategyProfile) -> Result<f64> {
    let joint = joint_distribution(system, profile)?;
    Ok(joint
        .iter()
        .map(|([s, _, _, _, shat], p)| p * system.distortion()[s][shat])
        .sum())
}

/// `E[rho_X(X)]` with `X ~ p_S p_{X|S}`.
pub fn expected_user_cost(system: &JsccsjSystem, encoder: &CondKernel) -> Result<f64> {
    let px = input_marginal(system, encoder)?;
    Ok(px.iter().zip(system.user_cost()).map(|(p, c)| p * c).sum())
}

/// `E[rho_{J|X}(J|X)]` under `p_S p_{X|S} p_{J|X}`, read as a single
/// expectation over the joint law of `(X, J)`.
pub fn expected_jammer_cost(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    jammer: &CondKernel,
) -> Result<f64> {
    system.check_jammer(jammer)?;
    let px = input_marginal(system, encoder)?;
    Ok(jammer_cost_under(system, &px, jammer))
}

pub(crate) fn jammer_cost_under(system: &JsccsjSystem, px: &[f64], jammer: &CondKernel) -> f64 {
    px.iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, &w)| w * jammer.row(x).expect(|j| system.jammer_cost()[x][j]))
        .sum()
}

/// Natural-log Kullback-Leibler divergence `D(p || q)`.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "KL between pmfs of lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    kl_slices(p.probs(), q.probs())
}

pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (index, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::InfiniteDivergence { index });
            }
            acc += pi * (pi / qi).ln();
        }
    }
    // Rounding can push an exact zero slightly negative.
    Ok(acc.max(0.0))
}

/// `h(x, j)`: expected distortion given encoder output `x` and jammer input
/// `j`, indexed `[x][j]`.
///
/// For inputs the encoder uses, this is
/// `sum_{s,y,shat} p_{S|X}(s|x) p(y|x,j) p(shat|y) d(s,shat)`. Inputs the
/// encoder never produces keep the unnormalized sum, which is zero.
pub fn conditional_distortion(
    system: &JsccsjSystem,
    encoder: &CondKernel,
    decoder: &CondKernel,
) -> Result<Vec<Vec<f64>>> {
    system.check_decoder(decoder)?;
    let px = input_marginal(system, encoder)?;
    // g(y, s) = sum_shat p(shat|y) d(s, shat)
    let per_output: Vec<Vec<f64>> = (0..system.num_outputs())
        .map(|y| {
            (0..system.num_source())
                .map(|s| decoder.row(y).expect(|shat| system.distortion()[s][shat]))
                .collect()
        })
        .collect();
    let mut h = vec![vec![0.0; system.num_jammer_inputs()]; system.num_inputs()];
    for (x, hx) in h.iter_mut().enumerate() {
        if px[x] <= 0.0 {
            continue;
        }
        let weights: Vec<(usize, f64)> = system
            .source()
            .support()
            .map(|s| (s, system.source().get(s) * encoder.prob(s, x) / px[x]))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        for (j, hxj) in hx.iter_mut().enumerate() {
            *hxj = system
                .channel()
                .row(x, j)
                .expect(|y| weights.iter().map(|&(s, w)| w * per_output[y][s]).sum());
        }
    }
    Ok(h)
}

/// Posterior `p_{S|Shat}`; rows whose estimate has zero probability are
/// `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub rows: Vec<Option<Pmf>>,
    pub estimate_marginal: Vec<f64>,
}

impl Posterior {
    pub fn prob(&self, s: usize, shat: usize) -> Option<f64> {
        self.rows[shat].as_ref().map(|r| r.get(s))
    }
}

pub fn posterior_s_given_shat(
    system: &JsccsjSystem,
    profile: &StrategyProfile,
) -> Result<Posterior> {
    let joint = joint_distribution(system, profile)?.source_estimate_marginal();
    let ns = system.num_source();
    let estimate_marginal: Vec<f64> = (0..system.num_estimates())
        .map(|shat| (0..ns).map(|s| joint[s][shat]).sum())
        .collect();
    let rows = estimate_marginal
        .iter()
        .enumerate()
        .map(|(shat, &m)| {
            if m > 0.0 {
                Pmf::new((0..ns).map(|s| joint[s][shat] / m).collect()).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Posterior {
        rows,
        estimate_marginal,
    })
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
