//! Flat `key = value` configuration files and the resolution of study
//! options into a validated [`StudyConfig`].

use std::fs;
use std::path::Path;
use std::str::FromStr;

use clap::Args;
use pflow_core::harness::{HarnessError, MmsKind, StudyConfig, StudyKind};
use pflow_core::StructureParams;
use serde::Serialize;

use crate::CliError;

/// Default lower bound on the headline slope for a study to pass.
pub const DEFAULT_MIN_SLOPE: f64 = 0.85;

fn parse_kind(s: &str) -> Result<StudyKind, String> {
    StudyKind::parse(s).ok_or_else(|| format!("unknown study kind '{s}' (spatial, temporal, coupled)"))
}

fn parse_mms(s: &str) -> Result<MmsKind, String> {
    MmsKind::parse(s).ok_or_else(|| format!("unknown manufactured solution '{s}' (trig, poly, affine, ramp)"))
}

/// Study options. Every field is optional so that flags, a config file and
/// the per-kind defaults can be layered, in that order of precedence.
#[derive(Args, Clone, Debug, Default)]
pub struct StudyOptions {
    /// Flat key=value file; keys are the long option names.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<StudyKind>,
    #[arg(long, value_parser = parse_mms)]
    pub mms: Option<MmsKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub base_n: Option<usize>,
    #[arg(long)]
    pub base_m: Option<usize>,
    #[arg(long)]
    pub fixed_n: Option<usize>,
    #[arg(long)]
    pub fixed_m: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub sigma0: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lower bound on the headline slope.
    #[arg(long)]
    pub min_slope: Option<f64>,
}

fn set<T: FromStr>(slot: &mut Option<T>, key: &str, value: &str) -> Result<(), CliError> {
    if slot.is_none() {
        let v = value
            .parse()
            .map_err(|_| CliError::Config(format!("invalid value '{value}' for key '{key}'")))?;
        *slot = Some(v);
    }
    Ok(())
}

/// Reads `key = value` lines; blank lines and `#` comments are skipped.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", lineno + 1)))?;
        pairs.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(pairs)
}

impl StudyOptions {
    /// Fills unset options from the config file, rejecting unknown keys.
    pub fn merge_file(&mut self) -> Result<(), CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(());
        };
        for (key, value) in read_pairs(&path)? {
            let v = value.as_str();
            match key.as_str() {
                "kind" => {
                    if self.kind.is_none() {
                        self.kind = Some(parse_kind(v).map_err(CliError::Config)?);
                    }
                }
                "mms" => {
                    if self.mms.is_none() {
                        self.mms = Some(parse_mms(v).map_err(CliError::Config)?);
                    }
                }
                "p" => set(&mut self.p, &key, v)?,
                "delta" => set(&mut self.delta, &key, v)?,
                "levels" => set(&mut self.levels, &key, v)?,
                "base_n" => set(&mut self.base_n, &key, v)?,
                "base_m" => set(&mut self.base_m, &key, v)?,
                "fixed_n" => set(&mut self.fixed_n, &key, v)?,
                "fixed_m" => set(&mut self.fixed_m, &key, v)?,
                "sigma0" => set(&mut self.sigma0, &key, v)?,
                "t_final" => set(&mut self.t_final, &key, v)?,
                "tol" => set(&mut self.tol, &key, v)?,
                "seed" => set(&mut self.seed, &key, v)?,
                "min_slope" => set(&mut self.min_slope, &key, v)?,
                other => return Err(CliError::Config(format!("unknown config key '{other}'"))),
            }
        }
        Ok(())
    }

    /// Applies defaults and validates. Temporal studies default to the
    /// affine solution, whose spatial error vanishes.
    pub fn resolve(mut self) -> Result<ResolvedStudy, CliError> {
        self.merge_file()?;
        let kind = self.kind.unwrap_or(StudyKind::Coupled);
        let mms = self.mms.unwrap_or(match kind {
            StudyKind::Temporal => MmsKind::Affine,
            _ => MmsKind::Trig,
        });
        let p = self.p.unwrap_or(2.0);
        let delta = self.delta.unwrap_or(0.0);
        StructureParams::new(p, delta).map_err(|e| CliError::Config(e.to_string()))?;

        let mut cfg = StudyConfig::for_kind(kind, p, delta, mms);
        let copy = |slot: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        copy(&mut cfg.levels, self.levels);
        copy(&mut cfg.base_n, self.base_n);
        copy(&mut cfg.base_m, self.base_m);
        copy(&mut cfg.fixed_n, self.fixed_n);
        copy(&mut cfg.fixed_m, self.fixed_m);
        cfg.sigma0 = self.sigma0.unwrap_or(cfg.sigma0);
        cfg.t_final = self.t_final.unwrap_or(cfg.t_final);
        cfg.tol = self.tol.unwrap_or(cfg.tol);
        cfg.seed = self.seed.unwrap_or(cfg.seed);

        if cfg.levels < 3 {
            return Err(CliError::Config(format!(
                "levels must be at least 3 (got {})",
                cfg.levels
            )));
        }
        if !(cfg.sigma0 > 0.0) {
            return Err(CliError::Config(format!(
                "sigma0 must be positive (got {})",
                cfg.sigma0
            )));
        }
        let min_slope = self.min_slope.unwrap_or(DEFAULT_MIN_SLOPE);
        if !min_slope.is_finite() {
            return Err(CliError::Config("min_slope must be finite".into()));
        }
        // coupling and remaining range checks
        cfg.plan().map_err(|e| match e {
            HarnessError::Structure(s) => CliError::Config(s.to_string()),
            other => CliError::Config(other.to_string()),
        })?;
        Ok(ResolvedStudy { study: cfg, min_slope })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvedStudy {
    #[serde(flatten)]
    pub study: StudyConfig,
    pub min_slope: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, text).unwrap();
        (dir, path)
    }

    #[test]
    fn pairs_skip_comments_and_normalize_keys() {
        let (_d, path) = write("# header\n\nbase-n = 8\n  p=1.5  \n");
        let pairs = read_pairs(&path).unwrap();
        assert_eq!(
            pairs,
            [
                ("base_n".to_string(), "8".to_string()),
                ("p".to_string(), "1.5".to_string())
            ]
        );
    }

    #[test]
    fn malformed_line_is_rejected() {
        let (_d, path) = write("p 1.5\n");
        assert!(matches!(read_pairs(&path), Err(CliError::Config(m)) if m.contains("line 1")));
    }

    #[test]
    fn defaults_resolve_to_a_coupled_trig_study() {
        let r = StudyOptions::default().resolve().unwrap();
        assert_eq!(r.study.kind, StudyKind::Coupled);
        assert_eq!(r.study.mms, MmsKind::Trig);
        assert_eq!((r.study.p, r.study.delta, r.study.levels), (2.0, 0.0, 4));
        assert_eq!(r.min_slope, DEFAULT_MIN_SLOPE);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let (_d, path) = write("levels = many\n");
        let opts = StudyOptions {
            config: Some(path),
            ..StudyOptions::default()
        };
        assert!(matches!(opts.resolve(), Err(CliError::Config(m)) if m.contains("levels")));
        let opts = StudyOptions {
            delta: Some(-1.0),
            ..StudyOptions::default()
        };
        assert!(matches!(opts.resolve(), Err(CliError::Config(m)) if m.contains("delta")));
    }
}
