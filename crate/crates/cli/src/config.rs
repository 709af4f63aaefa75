//! Run configuration: defaults, `key=value` files and flag overrides.

use std::path::{Path, PathBuf};

use clap::ValueEnum;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    /// Elastic obstacle problem on an `(2^m - 1)^2` grid.
    Eop,
    /// Quadratic plus `l1` problem of size `2^m`.
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Mgprox,
    Fastmgprox,
    Proxgrad,
    Fista,
    Kocvara3,
}

impl Algo {
    pub const ALL: [Algo; 5] = [
        Algo::Mgprox,
        Algo::Fastmgprox,
        Algo::Proxgrad,
        Algo::Fista,
        Algo::Kocvara3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Mgprox => "mgprox",
            Algo::Fastmgprox => "fastmgprox",
            Algo::Proxgrad => "proxgrad",
            Algo::Fista => "fista",
            Algo::Kocvara3 => "kocvara3",
        }
    }

    pub fn is_multigrid(self) -> bool {
        matches!(self, Algo::Mgprox | Algo::Fastmgprox | Algo::Kocvara3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StepModeArg {
    Fixed,
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Timing {
    /// Wall-clock seconds in the `time_s` column.
    Wall,
    /// Zeros in the `time_s` column, for byte-identical output.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub n_exp: u32,
    pub lambda: f64,
    pub levels: usize,
    pub smoothing: usize,
    /// Smoothing steps of the `kocvara3` comparison method.
    pub kocvara_smoothing: usize,
    pub algo: Algo,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub step_mode: StepModeArg,
    pub out: Option<PathBuf>,
    pub timing: Timing,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemKind::Eop,
            n_exp: 4,
            lambda: 1e-6,
            levels: 3,
            smoothing: 20,
            kocvara_smoothing: 10,
            algo: Algo::Mgprox,
            tol: 1e-10,
            max_iters: 1000,
            seed: 42,
            step_mode: StepModeArg::Fixed,
            out: None,
            timing: Timing::Wall,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value `{value}` for `{key}`")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true).map_err(|_| CliError::Usage(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Sets one field from its `key=value` spelling; dashes and underscores
    /// are interchangeable in keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "problem" => self.problem = parse_enum(&key, value)?,
            "n_exp" => self.n_exp = parse_num(&key, value)?,
            "lambda" => self.lambda = parse_num(&key, value)?,
            "levels" => self.levels = parse_num(&key, value)?,
            "smoothing" => self.smoothing = parse_num(&key, value)?,
            "kocvara_smoothing" => self.kocvara_smoothing = parse_num(&key, value)?,
            "algo" => self.algo = parse_enum(&key, value)?,
            "tol" => self.tol = parse_num(&key, value)?,
            "max_iters" => self.max_iters = parse_num(&key, value)?,
            "seed" => self.seed = parse_num(&key, value)?,
            "step_mode" => self.step_mode = parse_enum(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "timing" => self.timing = parse_enum(&key, value)?,
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key=value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", path.display())))?;
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), no + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |flag: &str, why: String| Err(CliError::Usage(format!("--{flag}: {why}")));
        if self.n_exp == 0 || self.n_exp > 12 {
            return bad("n-exp", format!("{} must be in 1..=12", self.n_exp));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda", format!("{} must be finite and >= 0", self.lambda));
        }
        let max_levels = match self.problem {
            ProblemKind::Eop => self.n_exp as usize,
            ProblemKind::Synthetic => self.n_exp as usize + 1,
        };
        if self.levels == 0 || self.levels > max_levels {
            return bad(
                "levels",
                format!("{} must be in 1..={max_levels} for this grid", self.levels),
            );
        }
        if self.smoothing == 0 {
            return bad("smoothing", "must be > 0".into());
        }
        if self.kocvara_smoothing == 0 {
            return bad("kocvara-smoothing", "must be > 0".into());
        }
        if !(self.tol > 0.0) {
            return bad("tol", format!("{} must be > 0", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max-iters", "must be > 0".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_experiment_setup() {
        let c = RunConfig::default();
        assert_eq!((c.lambda, c.smoothing, c.tol), (1e-6, 20, 1e-10));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn keys_and_errors() {
        let mut c = RunConfig::default();
        c.set("n-exp", "5").unwrap();
        c.set("algo", "FISTA").unwrap();
        c.set("step_mode", "backtracking").unwrap();
        assert_eq!(
            (c.n_exp, c.algo, c.step_mode),
            (5, Algo::Fista, StepModeArg::Backtracking)
        );
        assert!(c.set("colour", "red").is_err());
        assert!(c.set("tol", "abc").is_err());
        c.n_exp = 0;
        let CliError::Usage(msg) = c.validate().unwrap_err() else {
            panic!()
        };
        assert!(msg.contains("--n-exp"));
    }

    #[test]
    fn file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "# setup\nlevels = 2\n\nseed=7 # trailing\n").unwrap();
        let mut c = RunConfig::default();
        c.apply_file(&p).unwrap();
        assert_eq!((c.levels, c.seed), (2, 7));
        std::fs::write(&p, "levels\n").unwrap();
        assert!(c.apply_file(&p).is_err());
    }
}
