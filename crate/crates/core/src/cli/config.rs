//! Flat `key = value` run configuration.
//!
//! Recognised keys: `scheme`, `c`, `n`, `nu`, `T`, `tau_list`, `tau_ref`,
//! `tau`, `norms`, `out`, `seed`, `tableau`. Text after `#` is ignored.

use std::path::{Path, PathBuf};

use crate::discretize::NormKind;
use crate::error::{Error, Result};

pub const KEYS: [&str; 12] = [
    "scheme", "c", "n", "nu", "T", "tau_list", "tau_ref", "tau", "norms", "out", "seed", "tableau",
];

/// Every field is optional; unset fields fall back to command defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub scheme: Option<String>,
    pub c: Option<f64>,
    pub n: Option<usize>,
    pub nu: Option<f64>,
    pub t_final: Option<f64>,
    pub tau_list: Option<Vec<f64>>,
    pub tau_ref: Option<f64>,
    pub tau: Option<f64>,
    pub norms: Option<Vec<NormKind>>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tableau: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {lineno}: expected key = value, got '{line}'"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let known = KEYS.iter().find(|k| **k == key).ok_or_else(|| {
                Error::Config(format!("line {lineno}: unknown configuration key '{key}'"))
            })?;
            if seen.contains(known) {
                return Err(Error::Config(format!(
                    "line {lineno}: duplicate key '{key}'"
                )));
            }
            seen.push(known);
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {lineno}: {e}")))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scheme" => self.scheme = Some(value.to_string()),
            "c" => self.c = Some(parse_value(key, value)?),
            "n" => self.n = Some(parse_value(key, value)?),
            "nu" => self.nu = Some(parse_value(key, value)?),
            "T" => self.t_final = Some(parse_value(key, value)?),
            "tau_list" => self.tau_list = Some(parse_list(key, value)?),
            "tau_ref" => self.tau_ref = Some(parse_value(key, value)?),
            "tau" => self.tau = Some(parse_value(key, value)?),
            "norms" => self.norms = Some(parse_norms(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "tableau" => self.tableau = Some(PathBuf::from(value)),
            _ => unreachable!("checked against KEYS"),
        }
        Ok(())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            scheme: other.scheme.or(self.scheme),
            c: other.c.or(self.c),
            n: other.n.or(self.n),
            nu: other.nu.or(self.nu),
            t_final: other.t_final.or(self.t_final),
            tau_list: other.tau_list.or(self.tau_list),
            tau_ref: other.tau_ref.or(self.tau_ref),
            tau: other.tau.or(self.tau),
            norms: other.norms.or(self.norms),
            out: other.out.or(self.out),
            seed: other.seed.or(self.seed),
            tableau: other.tableau.or(self.tableau),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

/// Comma-separated reals.
pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_value(key, s.trim()))
        .collect()
}

/// Comma-separated subset of `l1`, `l2`, `linf`; the empty string selects none.
pub fn parse_norms(value: &str) -> Result<Vec<NormKind>> {
    let mut out = Vec::new();
    for s in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let k = NormKind::parse(s)
            .ok_or_else(|| Error::Config(format!("unknown norm '{s}' (expected l1, l2, linf)")))?;
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "# experiment\nscheme = rk2\nc = 0.25\nn=50\nnu = 0.1 # trailing\nT = 2\n\
                    tau_list = 0.5, 0.25,0.125 ,0.0625\ntau_ref = 0.001\ntau = 0.1\n\
                    norms = l2,linf\nout = a.csv\nseed = 9\ntableau = t.txt\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.scheme.as_deref(), Some("rk2"));
        assert_eq!(c.c, Some(0.25));
        assert_eq!(c.n, Some(50));
        assert_eq!(c.nu, Some(0.1));
        assert_eq!(c.t_final, Some(2.0));
        assert_eq!(c.tau_list, Some(vec![0.5, 0.25, 0.125, 0.0625]));
        assert_eq!(c.norms, Some(vec![NormKind::L2, NormKind::LInf]));
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.tableau, Some(PathBuf::from("t.txt")));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let e = RunConfig::parse("n = 10\nsteps = 4\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("'steps'") && e.contains("line 2"), "{e}");
        assert!(RunConfig::parse("n 10").is_err());
        assert!(RunConfig::parse("n = ten")
            .unwrap_err()
            .to_string()
            .contains("'n'"));
        assert!(RunConfig::parse("n = 1\nn = 2").is_err());
        assert!(RunConfig::parse("norms = l3").is_err());
    }

    #[test]
    fn empty_norms_select_none() {
        assert_eq!(RunConfig::parse("norms =").unwrap().norms, Some(vec![]));
    }

    #[test]
    fn override_precedence() {
        let file = RunConfig::parse("n = 10\nnu = 0.3").unwrap();
        let flags = RunConfig {
            n: Some(20),
            ..Default::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!(merged.n, Some(20));
        assert_eq!(merged.nu, Some(0.3));
    }
}
