//! The JSON system description format.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "alphabets": {"S": ["0", "1"], "X": [..], "J": [..], "Y": [..], "Shat": [..]},
//!   "source": {"0": "0.5", "1": "0.5"},
//!   "channel": {"<x>": {"<j>": {"<y>": p}}},
//!   "user_cost": {"<x>": c},
//!   "jammer_cost": {"<x>": {"<j>": c}},
//!   "distortion": {"<s>": {"<shat>": d}},
//!   "budgets": {"P_U": .., "P_J": ..},
//!   "profile": {"encoder": {"<s>": {"<x>": p}}, "decoder": {"<y>": {"<shat>": p}},
//!               "jammer": {"<x>": {"<j>": p}}},
//!   "gaussian": {"source_var": .., "sigma2": .., "P_U": .., "P_J": ..,
//!                "profile": {"gain": .., "alpha": .., "sigma_R2": .., "kappa": ..}}
//! }
//! ```
//!
//! Numbers may be JSON numbers or decimal strings; they are written back as
//! strings with 17 significant digits. Probability rows may omit zero
//! entries, cost and distortion tables must be complete. The finite part
//! (everything but `gaussian`) is optional as a whole, and so is `gaussian`,
//! but at least one must be present.

use std::fmt;

use serde_json::{Map, Value};

use jsccsj_core::gaussian::{GaussianSystem, LinearGaussianProfile};
use jsccsj_core::{
    CondKernel, Error as CoreError, JammedChannel, JsccsjSystem, Pmf, StrategyProfile,
};

pub const SCHEMA_VERSION: u64 = 1;

const FINITE_KEYS: [&str; 8] = [
    "alphabets",
    "source",
    "channel",
    "user_cost",
    "jammer_cost",
    "distortion",
    "budgets",
    "profile",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    let mut out = format!("{} problem(s) found", diags.len());
    for d in diags {
        out.push_str("\n  ");
        out.push_str(&d.to_string());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabets {
    pub s: Vec<String>,
    pub x: Vec<String>,
    pub j: Vec<String>,
    pub y: Vec<String>,
    pub shat: Vec<String>,
}

impl Alphabets {
    /// Symbols `"0"`, `"1"`, ... for every alphabet.
    pub fn numbered(s: usize, x: usize, j: usize, y: usize, shat: usize) -> Self {
        let names = |n: usize| (0..n).map(|i| i.to_string()).collect();
        Self {
            s: names(s),
            x: names(x),
            j: names(j),
            y: names(y),
            shat: names(shat),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpec {
    pub alphabets: Alphabets,
    pub system: JsccsjSystem,
    pub profile: Option<StrategyProfile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub system: GaussianSystem,
    pub profile: Option<LinearGaussianProfile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub finite: Option<FiniteSpec>,
    pub gaussian: Option<GaussianSpec>,
}

/// Formats `v` with 17 significant digits, positionally when the exponent
/// is moderate. Parsing the result gives back `v` exactly.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

fn num(v: f64) -> Value {
    Value::String(fmt17(v))
}

fn key(path: &str, k: &str) -> String {
    format!("{path}[{k:?}]")
}

struct Walker {
    diags: Vec<Diagnostic>,
}

impl Walker {
    fn err(&mut self, path: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn object<'a>(&mut self, v: Option<&'a Value>, path: &str) -> Option<&'a Map<String, Value>> {
        match v {
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.err(path, "expected an object");
                None
            }
            None => {
                self.err(path, "missing");
                None
            }
        }
    }

    fn number(&mut self, v: Option<&Value>, path: &str) -> Option<f64> {
        let parsed = match v {
            Some(Value::Number(n)) => n.as_f64(),
            Some(Value::String(s)) => s.trim().parse::<f64>().ok(),
            Some(_) => None,
            None => {
                self.err(path, "missing");
                return None;
            }
        };
        match parsed {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(
                    path,
                    format!("expected a finite number, found {}", v.unwrap()),
                );
                None
            }
        }
    }

    fn symbols(&mut self, v: Option<&Value>, path: &str) -> Option<Vec<String>> {
        let Some(Value::Array(items)) = v else {
            self.err(
                path,
                if v.is_none() {
                    "missing"
                } else {
                    "expected an array of symbol names"
                },
            );
            return None;
        };
        let mut out: Vec<String> = Vec::new();
        for (i, item) in items.iter().enumerate() {
            match item {
                Value::String(s) if !s.is_empty() => {
                    if out.contains(s) {
                        self.err(path, format!("symbol {s:?} declared twice"));
                        return None;
                    }
                    out.push(s.clone());
                }
                _ => {
                    self.err(&format!("{path}[{i}]"), "expected a non-empty string");
                    return None;
                }
            }
        }
        if out.is_empty() {
            self.err(path, "alphabet is empty");
            return None;
        }
        Some(out)
    }

    /// Maps every key of `map` to its alphabet index; undeclared keys are
    /// reported and skipped.
    fn keyed<'a>(
        &mut self,
        map: &'a Map<String, Value>,
        path: &str,
        alphabet: &[String],
        alphabet_name: &str,
    ) -> Vec<(usize, &'a str, &'a Value)> {
        let mut out = Vec::new();
        for (k, v) in map {
            match alphabet.iter().position(|s| s == k) {
                Some(i) => out.push((i, k.as_str(), v)),
                None => self.err(
                    &key(path, k),
                    format!("undeclared symbol {k:?} (not in alphabet {alphabet_name})"),
                ),
            }
        }
        out
    }

    /// Probability row; omitted symbols are zero.
    fn pmf(
        &mut self,
        v: Option<&Value>,
        path: &str,
        alphabet: &[String],
        alphabet_name: &str,
    ) -> Option<Pmf> {
        let map = self.object(v, path)?;
        let before = self.diags.len();
        let mut row = vec![0.0; alphabet.len()];
        for (i, k, v) in self.keyed(map, path, alphabet, alphabet_name) {
            if let Some(p) = self.number(Some(v), &key(path, k)) {
                row[i] = p;
            }
        }
        if self.diags.len() > before {
            return None;
        }
        match Pmf::new(row) {
            Ok(p) => Some(p),
            Err(CoreError::InvalidProbability { index, value }) => {
                self.err(
                    &key(path, &alphabet[index]),
                    format!("probability {value} is negative"),
                );
                None
            }
            Err(e) => {
                self.err(path, e.to_string());
                None
            }
        }
    }

    /// Complete numeric row over `alphabet`.
    fn dense(
        &mut self,
        v: Option<&Value>,
        path: &str,
        alphabet: &[String],
        alphabet_name: &str,
    ) -> Option<Vec<f64>> {
        let map = self.object(v, path)?;
        let before = self.diags.len();
        let mut row = vec![None; alphabet.len()];
        for (i, k, v) in self.keyed(map, path, alphabet, alphabet_name) {
            row[i] = self.number(Some(v), &key(path, k));
        }
        for (i, entry) in row.iter().enumerate() {
            if entry.is_none() && !map.contains_key(&alphabet[i]) {
                self.err(&key(path, &alphabet[i]), "missing entry");
            }
        }
        if self.diags.len() > before {
            return None;
        }
        Some(row.into_iter().map(|v| v.unwrap()).collect())
    }

    /// Table with one entry per symbol of `rows`, each parsed by `cell`.
    fn table<T>(
        &mut self,
        v: Option<&Value>,
        path: &str,
        rows: &[String],
        rows_name: &str,
        mut cell: impl FnMut(&mut Self, Option<&Value>, &str) -> Option<T>,
    ) -> Option<Vec<T>> {
        let map = self.object(v, path)?;
        let before = self.diags.len();
        let _ = self.keyed(map, path, rows, rows_name);
        let out: Vec<Option<T>> = rows
            .iter()
            .map(|r| cell(self, map.get(r), &key(path, r)))
            .collect();
        if self.diags.len() > before {
            return None;
        }
        out.into_iter().collect()
    }

    fn kernel(
        &mut self,
        v: Option<&Value>,
        path: &str,
        rows: (&[String], &str),
        outs: (&[String], &str),
    ) -> Option<CondKernel> {
        let rows = self.table(v, path, rows.0, rows.1, |w, v, p| {
            w.pmf(v, p, outs.0, outs.1)
        })?;
        match CondKernel::from_rows(rows) {
            Ok(k) => Some(k),
            Err(e) => {
                self.err(path, e.to_string());
                None
            }
        }
    }
}

fn parse_alphabets(w: &mut Walker, v: Option<&Value>) -> Option<Alphabets> {
    let map = w.object(v, "alphabets")?;
    for k in map.keys() {
        if !["S", "X", "J", "Y", "Shat"].contains(&k.as_str()) {
            w.err(
                &key("alphabets", k),
                "unknown alphabet (expected S, X, J, Y, Shat)",
            );
        }
    }
    let mut get = |name: &str| w.symbols(map.get(name), &key("alphabets", name));
    let (s, x, j, y, shat) = (get("S"), get("X"), get("J"), get("Y"), get("Shat"));
    Some(Alphabets {
        s: s?,
        x: x?,
        j: j?,
        y: y?,
        shat: shat?,
    })
}

fn parse_finite(w: &mut Walker, root: &Map<String, Value>) -> Option<FiniteSpec> {
    let a = parse_alphabets(w, root.get("alphabets"))?;
    let source = w.pmf(root.get("source"), "source", &a.s, "S");
    let channel = w.table(root.get("channel"), "channel", &a.x, "X", |w, v, p| {
        w.table(v, p, &a.j, "J", |w, v, p| {
            w.pmf(v, p, &a.y, "Y").map(|pmf| pmf.probs().to_vec())
        })
    });
    let user_cost = w.dense(root.get("user_cost"), "user_cost", &a.x, "X");
    let jammer_cost = w.table(
        root.get("jammer_cost"),
        "jammer_cost",
        &a.x,
        "X",
        |w, v, p| w.dense(v, p, &a.j, "J"),
    );
    let distortion = w.table(
        root.get("distortion"),
        "distortion",
        &a.s,
        "S",
        |w, v, p| w.dense(v, p, &a.shat, "Shat"),
    );
    let budgets = w.object(root.get("budgets"), "budgets").map(|b| {
        (
            w.number(b.get("P_U"), &key("budgets", "P_U")),
            w.number(b.get("P_J"), &key("budgets", "P_J")),
        )
    });
    let profile = root.get("profile").map(|v| {
        let m = w.object(Some(v), "profile")?;
        let enc = w.kernel(
            m.get("encoder"),
            "profile[\"encoder\"]",
            (&a.s, "S"),
            (&a.x, "X"),
        );
        let dec = w.kernel(
            m.get("decoder"),
            "profile[\"decoder\"]",
            (&a.y, "Y"),
            (&a.shat, "Shat"),
        );
        let jam = w.kernel(
            m.get("jammer"),
            "profile[\"jammer\"]",
            (&a.x, "X"),
            (&a.j, "J"),
        );
        Some(StrategyProfile::new(enc?, dec?, jam?))
    });

    let channel = match JammedChannel::new(channel?) {
        Ok(c) => c,
        Err(e) => {
            w.err("channel", e.to_string());
            return None;
        }
    };
    let (Some(pu), Some(pj)) = budgets? else {
        return None;
    };
    let system = match JsccsjSystem::new(
        source?,
        channel,
        user_cost?,
        jammer_cost?,
        distortion?,
        pu,
        pj,
    ) {
        Ok(s) => s,
        Err(e) => {
            w.err("system", e.to_string());
            return None;
        }
    };
    let profile = match profile {
        None => None,
        Some(p) => Some(p?),
    };
    Some(FiniteSpec {
        alphabets: a,
        system,
        profile,
    })
}

fn parse_gaussian(w: &mut Walker, v: &Value) -> Option<GaussianSpec> {
    let m = w.object(Some(v), "gaussian")?;
    let path = |k: &str| key("gaussian", k);
    let source_var = match m.get("source_var") {
        Some(v) => w.number(Some(v), &path("source_var")),
        None => Some(1.0),
    };
    let sigma2 = w.number(m.get("sigma2"), &path("sigma2"));
    let pu = w.number(m.get("P_U"), &path("P_U"));
    let pj = w.number(m.get("P_J"), &path("P_J"));
    let system = match GaussianSystem::new(source_var?, sigma2?, pu?, pj?) {
        Ok(s) => s,
        Err(e) => {
            w.err("gaussian", e.to_string());
            return None;
        }
    };
    let profile = match m.get("profile") {
        None => None,
        Some(v) => {
            let p = w.object(Some(v), &path("profile"))?;
            let pp = |k: &str| key(&path("profile"), k);
            let gain = match p.get("gain") {
                Some(v) => w.number(Some(v), &pp("gain")),
                None => Some(system.full_power_gain()),
            };
            let alpha = w.number(p.get("alpha"), &pp("alpha"));
            let sigma_r2 = w.number(p.get("sigma_R2"), &pp("sigma_R2"));
            let kappa = w.number(p.get("kappa"), &pp("kappa"));
            let profile = LinearGaussianProfile {
                encoder_gain: gain?,
                decoder_gain: kappa?,
                jammer_alpha: alpha?,
                jammer_noise_var: sigma_r2?,
            };
            if profile.jammer_noise_var < 0.0 {
                w.err(&pp("sigma_R2"), "variance must be non-negative");
                return None;
            }
            Some(profile)
        }
    };
    Some(GaussianSpec { system, profile })
}

/// Parses and validates a description; every problem found is reported.
pub fn parse(text: &str) -> Result<SpecFile, SpecError> {
    let root: Value = serde_json::from_str(text).map_err(|e| SpecError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut w = Walker { diags: Vec::new() };
    let Value::Object(root) = root else {
        w.err("$", "expected a JSON object at the top level");
        return Err(SpecError::Invalid(w.diags));
    };
    match root.get("schema_version") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(v) => w.err(
            "schema_version",
            format!("unsupported version {v}; expected {SCHEMA_VERSION}"),
        ),
        None => w.err("schema_version", "missing"),
    }
    for k in root.keys() {
        if k != "schema_version" && k != "gaussian" && !FINITE_KEYS.contains(&k.as_str()) {
            w.err(&key("$", k), "unknown key");
        }
    }
    let has_finite = FINITE_KEYS.iter().any(|k| root.contains_key(*k));
    let finite = if has_finite {
        parse_finite(&mut w, &root)
    } else {
        None
    };
    let gaussian = root.get("gaussian").and_then(|v| parse_gaussian(&mut w, v));
    if !has_finite && !root.contains_key("gaussian") {
        w.err(
            "$",
            "no system: expected the finite keys or a \"gaussian\" section",
        );
    }
    if !w.diags.is_empty() {
        return Err(SpecError::Invalid(w.diags));
    }
    Ok(SpecFile { finite, gaussian })
}

fn sparse_row(pmf: &Pmf, names: &[String]) -> Value {
    Value::Object(
        pmf.probs()
            .iter()
            .zip(names)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, n)| (n.clone(), num(*p)))
            .collect(),
    )
}

fn dense_row(row: &[f64], names: &[String]) -> Value {
    Value::Object(
        row.iter()
            .zip(names)
            .map(|(v, n)| (n.clone(), num(*v)))
            .collect(),
    )
}

fn kernel_value(k: &CondKernel, rows: &[String], outs: &[String]) -> Value {
    Value::Object(
        k.rows()
            .iter()
            .zip(rows)
            .map(|(r, n)| (n.clone(), sparse_row(r, outs)))
            .collect(),
    )
}

fn finite_value(f: &FiniteSpec, root: &mut Map<String, Value>) {
    let a = &f.alphabets;
    let sys = &f.system;
    let names = |v: &[String]| Value::Array(v.iter().cloned().map(Value::String).collect());
    let mut alphabets = Map::new();
    for (k, v) in [
        ("S", &a.s),
        ("X", &a.x),
        ("J", &a.j),
        ("Y", &a.y),
        ("Shat", &a.shat),
    ] {
        alphabets.insert(k.into(), names(v));
    }
    root.insert("alphabets".into(), Value::Object(alphabets));
    root.insert("source".into(), sparse_row(sys.source(), &a.s));
    let channel: Map<String, Value> =
        a.x.iter()
            .enumerate()
            .map(|(x, xn)| {
                let by_j: Map<String, Value> =
                    a.j.iter()
                        .enumerate()
                        .map(|(j, jn)| (jn.clone(), sparse_row(sys.channel().row(x, j), &a.y)))
                        .collect();
                (xn.clone(), Value::Object(by_j))
            })
            .collect();
    root.insert("channel".into(), Value::Object(channel));
    root.insert("user_cost".into(), dense_row(sys.user_cost(), &a.x));
    let table = |rows: &[Vec<f64>], rn: &[String], cn: &[String]| {
        Value::Object(
            rows.iter()
                .zip(rn)
                .map(|(r, n)| (n.clone(), dense_row(r, cn)))
                .collect(),
        )
    };
    root.insert("jammer_cost".into(), table(sys.jammer_cost(), &a.x, &a.j));
    root.insert("distortion".into(), table(sys.distortion(), &a.s, &a.shat));
    let mut budgets = Map::new();
    budgets.insert("P_U".into(), num(sys.user_budget()));
    budgets.insert("P_J".into(), num(sys.jammer_budget()));
    root.insert("budgets".into(), Value::Object(budgets));
    if let Some(p) = &f.profile {
        let mut m = Map::new();
        m.insert("encoder".into(), kernel_value(&p.encoder, &a.s, &a.x));
        m.insert("decoder".into(), kernel_value(&p.decoder, &a.y, &a.shat));
        m.insert("jammer".into(), kernel_value(&p.jammer, &a.x, &a.j));
        root.insert("profile".into(), Value::Object(m));
    }
}

fn gaussian_value(g: &GaussianSpec) -> Value {
    let mut m = Map::new();
    m.insert("source_var".into(), num(g.system.source_var));
    m.insert("sigma2".into(), num(g.system.noise_var));
    m.insert("P_U".into(), num(g.system.user_budget));
    m.insert("P_J".into(), num(g.system.jammer_budget));
    if let Some(p) = &g.profile {
        let mut pm = Map::new();
        pm.insert("gain".into(), num(p.encoder_gain));
        pm.insert("alpha".into(), num(p.jammer_alpha));
        pm.insert("sigma_R2".into(), num(p.jammer_noise_var));
        pm.insert("kappa".into(), num(p.decoder_gain));
        m.insert("profile".into(), Value::Object(pm));
    }
    Value::Object(m)
}

/// Pretty-printed JSON with a trailing newline.
pub fn emit(spec: &SpecFile) -> String {
    let mut root = Map::new();
    root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    if let Some(f) = &spec.finite {
        finite_value(f, &mut root);
    }
    if let Some(g) = &spec.gaussian {
        root.insert("gaussian".into(), gaussian_value(g));
    }
    let mut out =
        serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialize");
    out.push('\n');
    out
}
