//! Resolved run configuration: flat `key = value` files, validation, and the
//! header comments embedded in every output file.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_sigma, CovarianceSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: usize,
    pub horizon: f64,
    pub epsilon: f64,
    pub side: String,
    pub grid: usize,
    pub paths: usize,
    pub h: f64,
    pub t_end: f64,
    pub theta0: f64,
    pub checkpoints: Vec<f64>,
    pub hulls: usize,
    pub statistic: String,
    pub seeds: usize,
    pub tol: Option<f64>,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub res: f64,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub boundary_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            a: 1.0,
            b: 1.0,
            c: 0.0,
            n: 25_000,
            horizon: 2.0,
            epsilon: 0.02,
            side: "left".into(),
            grid: 2048,
            paths: 2000,
            h: 1e-3,
            t_end: 3.0,
            theta0: 0.0,
            checkpoints: vec![1.0, 2.0],
            hulls: 200,
            statistic: "max_modulus".into(),
            seeds: 20,
            tol: None,
            a_range: (0.0, 12.0),
            b_range: (0.0, 8.0),
            res: 0.25,
            seed: 0,
            workers: 0,
            out: None,
            svg: None,
            boundary_out: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: Display,
{
    v.trim().parse().map_err(|e| Error::Parse(format!("{key} = {v:?}: {e}")))
}

/// `lo:hi`.
pub fn parse_range(key: &str, v: &str) -> Result<(f64, f64)> {
    let (lo, hi) = v
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("{key} = {v:?}: expected lo:hi")))?;
    Ok((parse(key, lo)?, parse(key, hi)?))
}

/// Comma-separated list of reals.
pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect()
}

fn opt_path(v: &str) -> Option<PathBuf> {
    let v = v.trim();
    (!v.is_empty() && v != "-").then(|| PathBuf::from(v))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or("-".into(), |p| p.display().to_string())
}

impl RunConfig {
    pub const KEYS: [&'static str; 26] = [
        "command", "a", "b", "c", "n", "horizon", "epsilon", "side", "grid", "paths", "h", "t_end", "theta0",
        "checkpoints", "hulls", "statistic", "seeds", "tol", "a_range", "b_range", "res", "seed", "workers", "out",
        "svg", "boundary_out",
    ];

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "command" => self.command = v.trim().to_string(),
            "a" => self.a = parse(key, v)?,
            "b" => self.b = parse(key, v)?,
            "c" => self.c = parse(key, v)?,
            "n" => self.n = parse(key, v)?,
            "horizon" => self.horizon = parse(key, v)?,
            "epsilon" | "eps" => self.epsilon = parse(key, v)?,
            "side" => self.side = v.trim().to_string(),
            "grid" => self.grid = parse(key, v)?,
            "paths" => self.paths = parse(key, v)?,
            "h" => self.h = parse(key, v)?,
            "t_end" => self.t_end = parse(key, v)?,
            "theta0" => self.theta0 = parse(key, v)?,
            "checkpoints" => self.checkpoints = parse_list(key, v)?,
            "hulls" => self.hulls = parse(key, v)?,
            "statistic" => self.statistic = v.trim().to_string(),
            "seeds" => self.seeds = parse(key, v)?,
            "tol" => self.tol = if v.trim() == "-" { None } else { Some(parse(key, v)?) },
            "a_range" => self.a_range = parse_range(key, v)?,
            "b_range" => self.b_range = parse_range(key, v)?,
            "res" => self.res = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "out" => self.out = opt_path(v),
            "svg" => self.svg = opt_path(v),
            "boundary_out" => self.boundary_out = opt_path(v),
            _ => return Err(Error::Parse(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let list = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        Some(match key {
            "command" => self.command.clone(),
            "a" => self.a.to_string(),
            "b" => self.b.to_string(),
            "c" => self.c.to_string(),
            "n" => self.n.to_string(),
            "horizon" => self.horizon.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "side" => self.side.clone(),
            "grid" => self.grid.to_string(),
            "paths" => self.paths.to_string(),
            "h" => self.h.to_string(),
            "t_end" => self.t_end.to_string(),
            "theta0" => self.theta0.to_string(),
            "checkpoints" => list(&self.checkpoints),
            "hulls" => self.hulls.to_string(),
            "statistic" => self.statistic.clone(),
            "seeds" => self.seeds.to_string(),
            "tol" => self.tol.map_or("-".into(), |t| t.to_string()),
            "a_range" => format!("{}:{}", self.a_range.0, self.a_range.1),
            "b_range" => format!("{}:{}", self.b_range.0, self.b_range.1),
            "res" => self.res.to_string(),
            "seed" => self.seed.to_string(),
            "workers" => self.workers.to_string(),
            "out" => show_path(&self.out),
            "svg" => show_path(&self.svg),
            "boundary_out" => show_path(&self.boundary_out),
            _ => return None,
        })
    }

    /// Apply a flat `key = value` file; `#` starts a comment, unknown keys are
    /// errors.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value, got {raw:?}", no + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// `key = value` lines for every key, in a fixed order.
    pub fn header_lines(&self) -> Vec<String> {
        Self::KEYS.iter().map(|k| format!("{k} = {}", self.get(k).unwrap())).collect()
    }

    /// Rebuild a configuration from the `# key = value` comment lines at the
    /// top of an output file. Other comment lines are ignored.
    pub fn from_header(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for line in text.lines() {
            let Some(body) = line.strip_prefix('#') else { break };
            if let Some((k, v)) = body.split_once('=') {
                let k = k.trim();
                if Self::KEYS.contains(&k) {
                    cfg.set(k, v)?;
                }
            }
        }
        Ok(cfg)
    }

    pub fn sigma(&self) -> Result<CovarianceSpec> {
        validate_sigma(self.a, self.b, self.c)
    }

    /// Check the fields a command reads.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(format!("{name} must be > 0, got {v}"))
            }
        };
        let sweep = matches!(self.command.as_str(), "scan");
        if !sweep {
            self.sigma()?;
        } else if !self.c.is_finite() {
            return bad(format!("c must be finite, got {}", self.c));
        }
        match self.command.as_str() {
            "simulate" | "duality" | "disconnect" => {
                if self.n == 0 {
                    return bad("n must be ≥ 1".into());
                }
                positive("horizon", self.horizon)?;
                positive("epsilon", self.epsilon)?;
                if !matches!(self.side.as_str(), "left" | "right") {
                    return bad(format!("side must be left or right, got {:?}", self.side));
                }
                if self.command == "duality" {
                    if self.hulls < 2 {
                        return bad("hulls must be ≥ 2".into());
                    }
                    crate::diagnostics::CloudStatistic::parse(&self.statistic)?;
                }
                if self.command == "disconnect" && self.seeds == 0 {
                    return bad("seeds must be ≥ 1".into());
                }
            }
            "density" | "phases" => {
                if self.grid < 8 || !self.grid.is_multiple_of(2) {
                    return bad(format!("grid must be even and ≥ 8, got {}", self.grid));
                }
            }
            "polar" | "drift" | "stationarity" => {
                positive("h", self.h)?;
                positive("t_end", self.t_end)?;
                if self.command != "polar" && self.paths < 2 {
                    return bad("paths must be ≥ 2".into());
                }
                if self.command == "stationarity" && self.checkpoints.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                    return bad("checkpoints must be finite and ≥ 0".into());
                }
            }
            "scan" => {
                positive("res", self.res)?;
                for (name, (lo, hi)) in [("a_range", self.a_range), ("b_range", self.b_range)] {
                    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                        return bad(format!("{name} must satisfy lo ≤ hi, got {lo}:{hi}"));
                    }
                }
            }
            _ => {}
        }
        if let Some(t) = self.tol {
            positive("tol", t)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let mut cfg = RunConfig {
            command: "simulate".into(),
            a: 0.1 + 0.2,
            c: -1e-300,
            checkpoints: vec![0.5, 1.0 / 3.0],
            tol: Some(1e-7),
            out: Some("hull.csv".into()),
            ..Default::default()
        };
        cfg.seed = u64::MAX;
        let text: String = cfg.header_lines().iter().map(|l| format!("# {l}\n")).collect::<String>() + "# side = left\nre,im\n";
        assert_eq!(RunConfig::from_header(&text).unwrap(), cfg);
        let plain = RunConfig::default();
        let text: String = plain.header_lines().iter().map(|l| format!("# {l}\n")).collect();
        assert_eq!(RunConfig::from_header(&text).unwrap(), plain);
    }

    #[test]
    fn file_parsing() {
        let mut cfg = RunConfig::default();
        cfg.apply_file("# comment\na = 4\n b=2 # trailing\n\na_range = 1:3\ncheckpoints = 0.5, 2\neps = 0.1\n").unwrap();
        assert_eq!((cfg.a, cfg.b, cfg.a_range, cfg.epsilon), (4.0, 2.0, (1.0, 3.0), 0.1));
        assert_eq!(cfg.checkpoints, vec![0.5, 2.0]);
        assert!(cfg.apply_file("bogus = 1").is_err());
        assert!(cfg.apply_file("a 1").is_err());
        assert!(cfg.apply_file("n = -3").is_err());
        assert!(cfg.apply_file("a_range = 3").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig { command: "phases".into(), a: 1.0, b: 1.0, c: 2.0, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::InvalidCovariance(_))));
        cfg.c = 0.5;
        assert!(cfg.validate().is_ok());
        cfg.grid = 7;
        assert!(cfg.validate().is_err());
        let mut s = RunConfig { command: "simulate".into(), epsilon: 0.0, ..Default::default() };
        assert!(s.validate().is_err());
        s.epsilon = 0.02;
        s.side = "up".into();
        assert!(s.validate().is_err());
        let scan = RunConfig { command: "scan".into(), c: 5.0, a_range: (3.0, 1.0), ..Default::default() };
        assert!(scan.validate().is_err());
        let d = RunConfig { command: "duality".into(), statistic: "mean".into(), ..Default::default() };
        assert!(d.validate().is_err());
    }
}
