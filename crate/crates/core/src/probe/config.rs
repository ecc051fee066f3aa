//! Flat `key = value` configuration with command-line overrides.
//!
//! ```text
//! # comment
//! d = 2
//! kappa = 3/5, 3/10
//! r_grid = 0.2:3:15        # start:stop:count
//! suites = gradient, funk-hecke
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num::{BigRational, Signed, Zero};

use crate::dunkl::ReflectionGroup;
use crate::error::{Error, Result};
use crate::hharmonics::{LambdaCandidate, MAX_DEGREE};
use crate::poly::{rational_from_decimal, rational_to_f64};

/// Verification suites run by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Dunkl,
    Hermite,
    Laguerre,
    Semigroup,
    Gradient,
    Energy,
    Decomposition,
    FunkHecke,
    Rotation,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Dunkl,
        Suite::Hermite,
        Suite::Laguerre,
        Suite::Semigroup,
        Suite::Gradient,
        Suite::Energy,
        Suite::Decomposition,
        Suite::FunkHecke,
        Suite::Rotation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Dunkl => "dunkl",
            Suite::Hermite => "hermite",
            Suite::Laguerre => "laguerre",
            Suite::Semigroup => "semigroup",
            Suite::Gradient => "gradient",
            Suite::Energy => "energy",
            Suite::Decomposition => "decomposition",
            Suite::FunkHecke => "funk-hecke",
            Suite::Rotation => "rotation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub d: usize,
    pub kappa: Vec<BigRational>,
    /// Truncation `N` for the random expansions of the verification suites.
    pub n: u32,
    /// Polynomial degree bound of the exact suites.
    pub degree: u32,
    /// Largest dimension in the exact commutativity suite.
    pub exact_max_dim: usize,
    /// Largest spherical degree `m` in the projection suites.
    pub m_max: u32,
    /// Random functions per suite.
    pub functions: usize,
    /// Heat times for the projection suites.
    pub t_grid: Vec<f64>,
    /// Heat times for `kernel-compare`.
    pub kernel_t_grid: Vec<f64>,
    pub kernel_r_grid: Vec<f64>,
    pub delta_list: Vec<f64>,
    /// Terms of the Laguerre spectral sum.
    pub kernel_terms: usize,
    /// Degree bound of the Hermite spectral sum.
    pub mehler_terms: u32,
    pub r_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    pub p_list: Vec<f64>,
    pub a_list: Vec<f64>,
    pub n_list: Vec<u32>,
    pub trials: usize,
    /// Fractions of the upper admissibility bound swept by `norm-sweep`.
    pub boundary_fractions: Vec<f64>,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub lambda: LambdaCandidate,
    pub tolerance_scale: f64,
    /// Worker threads; `0` uses the default pool.
    pub workers: usize,
    pub out: PathBuf,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            d: 2,
            kappa: vec![BigRational::zero(); 2],
            n: 16,
            degree: 8,
            exact_max_dim: 3,
            m_max: 4,
            functions: 20,
            t_grid: vec![0.3, 0.5, 1.0, 1.5, 2.0],
            kernel_t_grid: vec![0.1, 0.3, 0.5, 1.0, 2.0],
            kernel_r_grid: vec![0.1, 0.5, 1.0, 2.0, 3.0, 4.0],
            delta_list: vec![-0.5, 0.0, 0.9, 2.35],
            kernel_terms: 100,
            mehler_terms: 60,
            r_grid: linspace(0.2, 3.0, 15),
            z_grid: linspace(0.5, 20.0, 40),
            p_list: vec![1.5, 2.0, 3.0],
            a_list: vec![-0.5, 0.0, 0.5],
            n_list: vec![8, 16, 32],
            trials: 100,
            boundary_fractions: vec![0.25, 0.5, 0.75, 0.9],
            seed: 0,
            suites: Suite::ALL.to_vec(),
            lambda: LambdaCandidate::Measured,
            tolerance_scale: 1.0,
            workers: 0,
            out: PathBuf::from("out"),
        }
    }
}

const KEYS: [&str; 26] = [
    "d",
    "kappa",
    "N",
    "degree",
    "exact_max_dim",
    "m_max",
    "functions",
    "t_grid",
    "kernel_t_grid",
    "kernel_r_grid",
    "delta_list",
    "kernel_terms",
    "mehler_terms",
    "r_grid",
    "z_grid",
    "p_list",
    "a_list",
    "N_list",
    "trials",
    "boundary_fractions",
    "seed",
    "suites",
    "lambda",
    "tolerance_scale",
    "workers",
    "out",
];

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s)).collect()
}

/// Comma list, or `start:stop:count`.
fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.len() {
        1 => parse_list(key, v),
        3 => {
            let a: f64 = parse_num(key, parts[0])?;
            let b: f64 = parse_num(key, parts[1])?;
            let n: usize = parse_num(key, parts[2])?;
            if n == 0 {
                return cfg_err(format!("{key}: grid count must be positive"));
            }
            Ok(linspace(a, b, n))
        }
        _ => cfg_err(format!("{key}: expected a list or start:stop:count, got '{v}'")),
    }
}

fn parse_rational(v: &str) -> Result<BigRational> {
    let v = v.trim();
    if v.contains('/') {
        return BigRational::from_str(v).map_err(|_| Error::Config(format!("kappa: cannot parse '{v}'")));
    }
    let x: f64 = parse_num("kappa", v)?;
    if !x.is_finite() {
        return cfg_err(format!("kappa: '{v}' is not finite"));
    }
    rational_from_decimal(x, 12).ok_or_else(|| Error::Config(format!("kappa: '{v}' has too many digits")))
}

fn fmt_list<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Splits a config text into ordered `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return cfg_err(format!("line {}: expected key = value", lineno + 1));
        };
        let k = k.trim().to_string();
        if out.iter().any(|(x, _)| *x == k) {
            return cfg_err(format!("line {}: duplicate key '{k}'", lineno + 1));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

impl ProbeConfig {
    /// Defaults, then each pair in order (later pairs win), then validation.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut c = ProbeConfig::default();
        let mut kappa_text: Option<String> = None;
        for (k, v) in pairs {
            match k {
                "d" => c.d = parse_num(k, v)?,
                "kappa" => kappa_text = Some(v.to_string()),
                "N" => c.n = parse_num(k, v)?,
                "degree" => c.degree = parse_num(k, v)?,
                "exact_max_dim" => c.exact_max_dim = parse_num(k, v)?,
                "m_max" => c.m_max = parse_num(k, v)?,
                "functions" => c.functions = parse_num(k, v)?,
                "t_grid" => c.t_grid = parse_grid(k, v)?,
                "kernel_t_grid" => c.kernel_t_grid = parse_grid(k, v)?,
                "kernel_r_grid" => c.kernel_r_grid = parse_grid(k, v)?,
                "delta_list" => c.delta_list = parse_list(k, v)?,
                "kernel_terms" => c.kernel_terms = parse_num(k, v)?,
                "mehler_terms" => c.mehler_terms = parse_num(k, v)?,
                "r_grid" => c.r_grid = parse_grid(k, v)?,
                "z_grid" => c.z_grid = parse_grid(k, v)?,
                "p_list" => c.p_list = parse_list(k, v)?,
                "a_list" => c.a_list = parse_list(k, v)?,
                "N_list" => c.n_list = parse_list(k, v)?,
                "trials" => c.trials = parse_num(k, v)?,
                "boundary_fractions" => c.boundary_fractions = parse_list(k, v)?,
                "seed" => c.seed = parse_num(k, v)?,
                "suites" => c.suites = parse_list(k, v)?,
                "lambda" => c.lambda = v.trim().parse()?,
                "tolerance_scale" => c.tolerance_scale = parse_num(k, v)?,
                "workers" => c.workers = parse_num(k, v)?,
                "out" => c.out = PathBuf::from(v),
                _ => return cfg_err(format!("unknown key '{k}' (known: {})", KEYS.join(", "))),
            }
        }
        match kappa_text {
            Some(t) => c.kappa = t.split(',').map(parse_rational).collect::<Result<_>>()?,
            None => c.kappa = vec![BigRational::zero(); c.d],
        }
        c.suites.sort();
        c.suites.dedup();
        c.validate()?;
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// Reads a file and applies `overrides` on top of it.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.d) {
            return cfg_err(format!("d must lie in 2..=4, got {}", self.d));
        }
        if self.kappa.len() != self.d {
            return cfg_err(format!("kappa has {} entries, d = {}", self.kappa.len(), self.d));
        }
        if self.kappa.iter().any(|k| k.is_negative()) {
            return cfg_err("kappa entries must be nonnegative");
        }
        if self.n == 0 || self.n > MAX_DEGREE {
            return cfg_err(format!("N must lie in 1..={MAX_DEGREE}, got {}", self.n));
        }
        if self.degree == 0 || self.degree > MAX_DEGREE {
            return cfg_err(format!("degree must lie in 1..={MAX_DEGREE}, got {}", self.degree));
        }
        if !(1..=3).contains(&self.exact_max_dim) {
            return cfg_err("exact_max_dim must lie in 1..=3");
        }
        if self.m_max > self.n || self.m_max > 10 {
            return cfg_err(format!("m_max must not exceed N or 10, got {}", self.m_max));
        }
        if self.functions == 0 || self.trials == 0 {
            return cfg_err("functions and trials must be positive");
        }
        let grids: [(&str, &[f64], f64, f64); 6] = [
            ("t_grid", &self.t_grid, 0.3, 4.0),
            ("kernel_t_grid", &self.kernel_t_grid, 0.1, 4.0),
            ("kernel_r_grid", &self.kernel_r_grid, 1e-3, 16.0),
            ("r_grid", &self.r_grid, 1e-3, 16.0),
            ("z_grid", &self.z_grid, 1e-3, 200.0),
            ("p_list", &self.p_list, 1.0, 1e3),
        ];
        for (name, g, lo, hi) in grids {
            if g.is_empty() {
                return cfg_err(format!("{name} is empty"));
            }
            if let Some(x) = g.iter().find(|x| !(**x >= lo && **x <= hi)) {
                return cfg_err(format!("{name}: {x} outside [{lo}, {hi}]"));
            }
        }
        if self.p_list.contains(&1.0) {
            return cfg_err("p_list: p must exceed 1");
        }
        if self.a_list.is_empty() || self.a_list.iter().any(|a| !a.is_finite()) {
            return cfg_err("a_list must be a nonempty list of finite exponents");
        }
        if self.delta_list.is_empty() || self.delta_list.iter().any(|x| !(*x >= -0.5 && x.is_finite())) {
            return cfg_err("delta_list entries must be finite and at least -1/2");
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n == 0 || n > 64) {
            return cfg_err("N_list entries must lie in 1..=64");
        }
        if self.boundary_fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return cfg_err("boundary_fractions must lie in (0, 1)");
        }
        if self.kernel_terms == 0 || self.kernel_terms > 400 {
            return cfg_err("kernel_terms must lie in 1..=400");
        }
        if self.mehler_terms == 0 || self.mehler_terms > 120 {
            return cfg_err("mehler_terms must lie in 1..=120");
        }
        if !(self.tolerance_scale > 0.0 && self.tolerance_scale.is_finite()) {
            return cfg_err("tolerance_scale must be positive and finite");
        }
        if self.suites.is_empty() {
            return cfg_err("no suites selected");
        }
        Ok(())
    }

    pub fn group(&self) -> ReflectionGroup {
        ReflectionGroup::from_rationals(self.kappa.clone()).expect("validated")
    }

    pub fn kappa_f64(&self) -> Vec<f64> {
        self.kappa.iter().map(rational_to_f64).collect()
    }

    /// Canonical key/value echo of every setting; parsing it back yields the
    /// same configuration.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("d", self.d.to_string());
        put("kappa", fmt_list(&self.kappa));
        put("N", self.n.to_string());
        put("degree", self.degree.to_string());
        put("exact_max_dim", self.exact_max_dim.to_string());
        put("m_max", self.m_max.to_string());
        put("functions", self.functions.to_string());
        put("t_grid", fmt_list(&self.t_grid));
        put("kernel_t_grid", fmt_list(&self.kernel_t_grid));
        put("kernel_r_grid", fmt_list(&self.kernel_r_grid));
        put("delta_list", fmt_list(&self.delta_list));
        put("kernel_terms", self.kernel_terms.to_string());
        put("mehler_terms", self.mehler_terms.to_string());
        put("r_grid", fmt_list(&self.r_grid));
        put("z_grid", fmt_list(&self.z_grid));
        put("p_list", fmt_list(&self.p_list));
        put("a_list", fmt_list(&self.a_list));
        put("N_list", fmt_list(&self.n_list));
        put("trials", self.trials.to_string());
        put("boundary_fractions", fmt_list(&self.boundary_fractions));
        put("seed", self.seed.to_string());
        put("suites", fmt_list(&self.suites));
        let lambda = match self.lambda {
            LambdaCandidate::Measured => "measured",
            LambdaCandidate::Printed => "printed",
            LambdaCandidate::Doubled => "doubled",
        };
        put("lambda", lambda.to_string());
        put("tolerance_scale", self.tolerance_scale.to_string());
        put("workers", self.workers.to_string());
        put("out", self.out.display().to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ProbeConfig::parse("").unwrap();
        assert_eq!(c, ProbeConfig::default());
        assert!(c.group().is_classical());
    }

    #[test]
    fn parse_and_override() {
        let text = "# run\nd = 2\nkappa = 3/5, 0.3\nr_grid = 0.5:1.5:3\nsuites = gradient,energy\nlambda = doubled\n";
        let c = ProbeConfig::parse(text).unwrap();
        assert_eq!(c.kappa_f64(), vec![0.6, 0.3]);
        assert_eq!(c.r_grid, vec![0.5, 1.0, 1.5]);
        assert_eq!(c.suites, vec![Suite::Gradient, Suite::Energy]);
        assert_eq!(c.lambda, LambdaCandidate::Doubled);
        let mut pairs = parse_pairs(text).unwrap();
        pairs.push(("seed".into(), "9".into()));
        let c2 = ProbeConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(c2.seed, 9);
    }

    #[test]
    fn resolved_round_trips() {
        let c = ProbeConfig::parse("kappa = 3/5, 3/10\nseed = 4\nt_grid = 0.3:2:7\n").unwrap();
        let echo = c.resolved();
        let back = ProbeConfig::from_pairs(echo.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "kappa = -1, 0",
            "kappa = 1",
            "d = 7",
            "t_grid = ",
            "kernel_t_grid = 0.05",
            "p_list = 1",
            "suites = nonsense",
            "lambda = other",
            "frobnicate = 1",
            "seed = 1\nseed = 2",
            "no equals sign",
            "N = 40",
            "m_max = 20",
        ] {
            assert!(matches!(ProbeConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
