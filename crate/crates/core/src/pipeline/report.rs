use std::fmt::Write as _;
use std::io::Write;

use super::ForecastReport;
use crate::error::Result;
use crate::format::significant;

const DIGITS: usize = 10;

/// Per-stock holdout comparison plus column totals of the squared
/// deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioReport {
    pub rows: Vec<ForecastReport>,
    pub total_sd_raw: f64,
    pub total_sd_simple: f64,
    pub total_sd_es: f64,
}

impl PortfolioReport {
    pub fn new(rows: Vec<ForecastReport>) -> Self {
        let total = |f: fn(&ForecastReport) -> f64| rows.iter().map(f).sum();
        Self {
            total_sd_raw: total(|r| r.sd_raw),
            total_sd_simple: total(|r| r.sd_simple),
            total_sd_es: total(|r| r.sd_es),
            rows,
        }
    }

    /// Relative reduction of the total squared deviation achieved by the
    /// smoothing adjustment over the raw conditional forecast.
    pub fn es_reduction(&self) -> f64 {
        1.0 - self.total_sd_es / self.total_sd_raw
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "stocks scored: {}", self.rows.len());
        let _ = writeln!(s, "total squared deviation, raw conditional:  {:.4}", self.total_sd_raw);
        let _ = writeln!(s, "total squared deviation, simple adjusted:  {:.4}", self.total_sd_simple);
        let _ = writeln!(s, "total squared deviation, smoothed (ES):    {:.4}", self.total_sd_es);
        let _ = writeln!(
            s,
            "ES adjustment changes the total by {:+.2}% relative to raw",
            -100.0 * self.es_reduction()
        );
        s
    }
}

/// Writes `stock_id,nu_hat,nu_tilde,sa,esa,sd_tilde,sd_sa,sd_esa` rows and a
/// closing `TOTAL` row.
pub fn write_report_csv<W: Write>(report: &PortfolioReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stock_id", "nu_hat", "nu_tilde", "sa", "esa", "sd_tilde", "sd_sa", "sd_esa"])?;
    for r in &report.rows {
        let mut record = vec![r.stock_id.clone()];
        record.extend(
            [
                r.holdout_nu_hat,
                r.raw_conditional,
                r.simple_adjusted,
                r.es_adjusted,
                r.sd_raw,
                r.sd_simple,
                r.sd_es,
            ]
            .iter()
            .map(|v| significant(*v, DIGITS)),
        );
        w.write_record(&record)?;
    }
    w.write_record([
        "TOTAL".to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        significant(report.total_sd_raw, DIGITS),
        significant(report.total_sd_simple, DIGITS),
        significant(report.total_sd_es, DIGITS),
    ])?;
    w.flush()?;
    Ok(())
}
