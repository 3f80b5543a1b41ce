use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::smoothing::DEFAULT_ALPHA;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchmarkMode {
    /// `C` from each period's CAPM inputs.
    PerPeriod,
    /// One `C` for every period and stock.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub fit_alpha: bool,
    /// Trading days per year; the daily step is `1 / h_per_year`.
    pub h_per_year: f64,
    pub benchmark: BenchmarkMode,
    /// Horizon `T` (years) used in the conditional expectation.
    pub period_length: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            fit_alpha: false,
            h_per_year: 252.0,
            benchmark: BenchmarkMode::PerPeriod,
            period_length: 1.0,
        }
    }
}

impl PipelineConfig {
    pub fn step_h(&self) -> f64 {
        1.0 / self.h_per_year
    }

    /// Reads `key = value` lines. Blank lines and `#` comments are skipped.
    ///
    /// Keys: `alpha`, `fit_alpha`, `h_per_year`, `benchmark_mode`
    /// (`per_period` or `constant`) and `constant_c`.
    pub fn parse(text: &str, file: &Path) -> Result<Self> {
        let mut config = PipelineConfig::default();
        let mut mode: Option<String> = None;
        let mut constant_c: Option<f64> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |column: usize, message: String| Error::Parse {
                file: file.to_path_buf(),
                line: i as u64 + 1,
                column,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(1, format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let value_col = raw.find('=').map_or(1, |p| {
                let rest = &raw[p + 1..];
                p + 2 + rest.len() - rest.trim_start().len()
            });
            let number = |v: &str| {
                f64::from_str(v).map_err(|_| err(value_col, format!("{key}: {v:?} is not a number")))
            };
            match key {
                "alpha" => config.alpha = number(value)?,
                "fit_alpha" => {
                    config.fit_alpha = match value {
                        "true" => true,
                        "false" => false,
                        v => return Err(err(value_col, format!("fit_alpha: expected true or false, got {v:?}"))),
                    }
                }
                "h_per_year" => config.h_per_year = number(value)?,
                "benchmark_mode" => mode = Some(value.to_string()),
                "constant_c" => constant_c = Some(number(value)?),
                other => return Err(err(1, format!("unknown key {other:?}"))),
            }
        }
        config.benchmark = match mode.as_deref() {
            None | Some("per_period") => BenchmarkMode::PerPeriod,
            Some("constant") => BenchmarkMode::Constant(constant_c.ok_or_else(|| Error::Input {
                file: file.to_path_buf(),
                message: "benchmark_mode = constant requires constant_c".into(),
            })?),
            Some(other) => {
                return Err(Error::Input {
                    file: file.to_path_buf(),
                    message: format!("benchmark_mode must be per_period or constant, got {other:?}"),
                })
            }
        };
        config.validate().map_err(|e| Error::Input { file: file.to_path_buf(), message: e.to_string() })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.h_per_year.is_finite() && self.h_per_year > 0.0) {
            return Err(Error::invalid(format!("h_per_year must be positive, got {}", self.h_per_year)));
        }
        if !(self.period_length.is_finite() && self.period_length > 0.0) {
            return Err(Error::invalid("period length must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<PipelineConfig> {
        PipelineConfig::parse(text, Path::new("cfg"))
    }

    #[test]
    fn defaults_when_empty() {
        assert_eq!(parse("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn all_keys() {
        let c = parse(
            "# study\nalpha = 0.3\nfit_alpha = true\nh_per_year = 250\nbenchmark_mode = constant\nconstant_c = 0.05 # flat\n",
        )
        .unwrap();
        assert_eq!(c.alpha, 0.3);
        assert!(c.fit_alpha);
        assert_eq!(c.h_per_year, 250.0);
        assert_eq!(c.benchmark, BenchmarkMode::Constant(0.05));
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("alpha = 0.2\nbogus = 1\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("\nalpha = x\n") {
            Err(Error::Parse { line: 2, column: 9, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse("benchmark_mode = constant\n").is_err());
        assert!(parse("benchmark_mode = weekly\n").is_err());
        assert!(parse("alpha = 1.5\n").is_err());
        assert!(parse("fit_alpha = yes\n").is_err());
    }
}
