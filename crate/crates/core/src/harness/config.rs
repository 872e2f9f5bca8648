//! Study configuration: an INI file with one section per study plus a shared
//! `[defaults]` section, overridable by `key=value` pairs from the command line.
//!
//! ```ini
//! [defaults]
//! problem = example1
//! alpha = 0.5
//!
//! [converge-space]
//! lambda = 1.5
//! k = 2
//! q = 2
//! cells = 10, 20, 40, 80
//! r = 1.5
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ini::Ini;

use crate::error::{Error, Result};
use crate::problems::{example1, example2, example3, ProblemSpec, EXAMPLE3_SIGMA};
use crate::projections::InitialProjection;

pub const DEFAULTS_SECTION: &str = "defaults";

/// Every key a study understands.
pub const KEYS: &[&str] = &[
    "problem",
    "alpha",
    "lambda",
    "kappa",
    "beta",
    "sigma",
    "final_time",
    "k",
    "q",
    "cells",
    "r",
    "steps",
    "initial",
    "times",
    "alphas",
    "lambdas",
    "taus",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Example1,
    Example2,
    Example3,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Example1 => "example1",
            ProblemKind::Example2 => "example2",
            ProblemKind::Example3 => "example3",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "example1" | "1" => Ok(Self::Example1),
            "example2" | "2" => Ok(Self::Example2),
            "example3" | "3" => Ok(Self::Example3),
            other => Err(Error::Config(format!("unknown problem {other:?}"))),
        }
    }
}

/// Time-step rule relative to the mesh size: `tau = c h^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauRule {
    pub factor: f64,
    pub power: f64,
}

impl TauRule {
    pub fn tau(&self, h: f64) -> f64 {
        self.factor * h.powf(self.power)
    }
}

impl fmt::Display for TauRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factor != 1.0 {
            write!(f, "{}", self.factor)?;
        }
        if self.power == 1.0 {
            write!(f, "h")
        } else {
            write!(f, "h^{}", self.power)
        }
    }
}

impl FromStr for TauRule {
    type Err = Error;

    /// Accepts `h`, `h^2`, `10h`, `0.5h^1.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::Config(format!(
                "bad time-step rule {s:?} (expected e.g. h^2, h, 10h)"
            ))
        };
        let pos = s.find('h').ok_or_else(bad)?;
        let factor = match &s[..pos] {
            "" => 1.0,
            c => c.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?,
        };
        let power = match &s[pos + 1..] {
            "" => 1.0,
            p => p
                .strip_prefix('^')
                .ok_or_else(bad)?
                .parse::<f64>()
                .map_err(|_| bad())?,
        };
        if !(factor > 0.0) || !power.is_finite() {
            return Err(bad());
        }
        Ok(Self { factor, power })
    }
}

/// Typed view of one study section.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub alpha: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// `None` picks 4 for `q <= 4` and 5 for `q = 5`.
    pub beta: Option<f64>,
    pub sigma: f64,
    pub final_time: Option<f64>,
    pub k: usize,
    pub q: usize,
    pub cells: Vec<usize>,
    /// Coupling exponent in `tau = h^r`; `None` means `(k + 1) / q`.
    pub r: Option<f64>,
    pub steps: Vec<usize>,
    pub initial: InitialProjection,
    pub times: Vec<f64>,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub taus: Vec<TauRule>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Example1,
            alpha: 0.5,
            lambda: 1.0,
            kappa: 1.0,
            beta: None,
            sigma: EXAMPLE3_SIGMA,
            final_time: None,
            k: 1,
            q: 1,
            cells: vec![10, 20, 40, 80],
            r: None,
            steps: vec![5, 10, 20, 40],
            initial: InitialProjection::L2,
            times: Vec::new(),
            alphas: Vec::new(),
            lambdas: Vec::new(),
            taus: vec![TauRule {
                factor: 1.0,
                power: 2.0,
            }],
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

/// Numbers may be written as fractions (`1/40`).
fn parse_real(key: &str, v: &str) -> Result<f64> {
    let v = v.trim();
    if let Some((a, b)) = v.split_once('/') {
        let a: f64 = parse_num(key, a)?;
        let b: f64 = parse_num(key, b)?;
        if b == 0.0 {
            return Err(Error::Config(format!("{key}: division by zero in {v:?}")));
        }
        return Ok(a / b);
    }
    parse_num(key, v)
}

fn parse_list<T, F: Fn(&str, &str) -> Result<T>>(key: &str, v: &str, f: F) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(key, s))
        .collect()
}

impl StudyConfig {
    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "problem" => self.problem = value.parse()?,
            "alpha" => self.alpha = parse_real(key, value)?,
            "lambda" => self.lambda = parse_real(key, value)?,
            "kappa" => self.kappa = parse_real(key, value)?,
            "beta" => self.beta = Some(parse_real(key, value)?),
            "sigma" => self.sigma = parse_real(key, value)?,
            "final_time" => self.final_time = Some(parse_real(key, value)?),
            "k" => self.k = parse_num(key, value)?,
            "q" => self.q = parse_num(key, value)?,
            "cells" => self.cells = parse_list(key, value, parse_num)?,
            "r" => self.r = Some(parse_real(key, value)?),
            "steps" => self.steps = parse_list(key, value, parse_num)?,
            "initial" => {
                self.initial = match value.trim() {
                    "l2" => InitialProjection::L2,
                    "minus" => InitialProjection::Minus,
                    other => {
                        return Err(Error::Config(format!(
                            "initial: unknown projection {other:?}"
                        )))
                    }
                }
            }
            "times" => self.times = parse_list(key, value, parse_real)?,
            "alphas" => self.alphas = parse_list(key, value, parse_real)?,
            "lambdas" => self.lambdas = parse_list(key, value, parse_real)?,
            "taus" => self.taus = parse_list(key, value, |_, s| s.parse())?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {spec:?} is not key=value")))?;
        self.set(k, v)
    }

    /// Reads `[defaults]` and then `[section]` from INI text; missing sections are fine.
    pub fn from_ini(text: &str, section: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        let mut cfg = Self::default();
        for name in [DEFAULTS_SECTION, section] {
            if let Some(props) = ini.section(Some(name)) {
                for (k, v) in props.iter() {
                    cfg.set(k, v)?;
                }
            }
        }
        if let Some(props) = ini.section(None::<String>) {
            if let Some((k, _)) = props.iter().next() {
                return Err(Error::Config(format!("key {k:?} outside any section")));
            }
        }
        Ok(cfg)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(if self.q >= 5 { 5.0 } else { 4.0 })
    }

    pub fn coupling(&self) -> f64 {
        self.r.unwrap_or((self.k as f64 + 1.0) / self.q as f64)
    }

    pub fn problem_with(&self, alpha: f64, lambda: f64) -> Result<ProblemSpec> {
        let p = match self.problem {
            ProblemKind::Example1 => example1(alpha, lambda, self.kappa, self.beta())?,
            ProblemKind::Example2 => example2(alpha, lambda)?,
            ProblemKind::Example3 => example3(alpha, lambda, self.sigma)?,
        };
        match self.final_time {
            Some(t) => p.with_final_time(t),
            None => Ok(p),
        }
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        self.problem_with(self.alpha, self.lambda)
    }

    /// Sorted `key=value` listing of the full configuration.
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut m = BTreeMap::new();
        m.insert("problem", self.problem.name().to_string());
        m.insert("alpha", format!("{}", self.alpha));
        m.insert("lambda", format!("{}", self.lambda));
        m.insert("kappa", format!("{}", self.kappa));
        m.insert("beta", format!("{}", self.beta()));
        m.insert("sigma", format!("{}", self.sigma));
        if let Some(t) = self.final_time {
            m.insert("final_time", format!("{t}"));
        }
        m.insert("k", self.k.to_string());
        m.insert("q", self.q.to_string());
        m.insert(
            "cells",
            self.cells
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("r", format!("{}", self.coupling()));
        m.insert(
            "steps",
            self.steps
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("initial", self.initial.name().to_string());
        m.insert("times", join(&self.times));
        m.insert("alphas", join(&self.alphas));
        m.insert("lambdas", join(&self.lambdas));
        m.insert(
            "taus",
            self.taus
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=crate::frac_calculus::MAX_ORDER).contains(&self.q) {
            return Err(Error::Config(format!("q must be in 1..=5, got {}", self.q)));
        }
        if self.k > 10 {
            return Err(Error::Config(format!(
                "degree k = {} is above the supported 10",
                self.k
            )));
        }
        if self.cells.is_empty() || self.cells.contains(&0) {
            return Err(Error::Config(
                "cells must be a non-empty list of positive counts".into(),
            ));
        }
        if self.steps.is_empty() {
            return Err(Error::Config("steps must be non-empty".into()));
        }
        let as_config = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.build_problem().map_err(as_config)?;
        for &a in &self.alphas {
            self.problem_with(a, self.lambda).map_err(as_config)?;
        }
        for &l in &self.lambdas {
            self.problem_with(self.alpha, l).map_err(as_config)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let text = "[defaults]\nproblem = example2\nalpha = 0.3\n\n[converge-space]\nk = 2\ncells = 5, 10,20\nr = 3\n# comment\n[stability]\nalpha = 0.9\n";
        let mut c = StudyConfig::from_ini(text, "converge-space").unwrap();
        assert_eq!(c.problem, ProblemKind::Example2);
        assert_eq!(c.alpha, 0.3);
        assert_eq!(c.k, 2);
        assert_eq!(c.cells, vec![5, 10, 20]);
        assert_eq!(c.coupling(), 3.0);
        c.apply_override("lambda=1/4").unwrap();
        assert_eq!(c.lambda, 0.25);
        let s = StudyConfig::from_ini(text, "stability").unwrap();
        assert_eq!(s.alpha, 0.9);
        assert!(c.apply_override("nonsense=1").is_err());
        assert!(c.apply_override("k").is_err());
        assert!(StudyConfig::from_ini("alpha = 0.2\n", "x").is_err());
    }

    #[test]
    fn tau_rules() {
        assert_eq!(
            "h^2".parse::<TauRule>().unwrap(),
            TauRule {
                factor: 1.0,
                power: 2.0
            }
        );
        assert_eq!(
            "10h".parse::<TauRule>().unwrap(),
            TauRule {
                factor: 10.0,
                power: 1.0
            }
        );
        let r: TauRule = "0.5h^1.5".parse().unwrap();
        assert!((r.tau(0.25) - 0.0625).abs() < 1e-15);
        assert!("x".parse::<TauRule>().is_err());
        assert!("h2".parse::<TauRule>().is_err());
        for s in ["h", "h^2", "10h", "0.5h^1.5"] {
            let r: TauRule = s.parse().unwrap();
            assert_eq!(r.to_string().parse::<TauRule>().unwrap(), r);
        }
    }

    #[test]
    fn defaults_follow_order() {
        let mut c = StudyConfig {
            k: 2,
            q: 2,
            ..Default::default()
        };
        assert_eq!(c.coupling(), 1.5);
        assert_eq!(c.beta(), 4.0);
        c.q = 5;
        assert_eq!(c.beta(), 5.0);
        c.q = 6;
        assert!(c.validate().is_err());
        c.q = 1;
        c.alpha = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn entries_cover_every_key() {
        let c = StudyConfig {
            final_time: Some(0.5),
            ..Default::default()
        };
        let e = c.entries();
        for k in KEYS {
            assert!(e.contains_key(k), "{k}");
        }
    }
}
