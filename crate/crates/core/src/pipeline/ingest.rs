//! CSV ingestion: daily closes per stock and yearly CAPM inputs.
//!
//! Prices are grouped into calendar-year periods. The final year of each
//! stock is held out for scoring; the earlier years form the sample.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, NaiveDate};

use super::{CapmInputs, Period, PipelineConfig, StockDataset};
use crate::error::{Error, Result};
use crate::stochastic::PricePath;

const PRICE_HEADER: [&str; 3] = ["stock_id", "date", "close"];
const CAPM_HEADER: [&str; 5] = ["stock_id", "year", "beta", "risk_free", "market_return_expectation"];

/// One stock ready for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedStock {
    pub dataset: StockDataset,
    pub holdout: PricePath,
    pub holdout_label: i32,
}

/// Reads the price and CAPM files from disk.
pub fn ingest(prices_path: &Path, capm_path: &Path, config: &PipelineConfig) -> Result<Vec<IngestedStock>> {
    let open = |p: &Path| {
        File::open(p).map_err(|e| Error::Input {
            file: p.to_path_buf(),
            message: e.to_string(),
        })
    };
    ingest_readers(open(prices_path)?, prices_path, open(capm_path)?, capm_path, config)
}

/// Same as [`ingest`] for arbitrary readers; the paths only label errors.
pub fn ingest_readers<P: Read, C: Read>(
    prices: P,
    prices_name: &Path,
    capm: C,
    capm_name: &Path,
    config: &PipelineConfig,
) -> Result<Vec<IngestedStock>> {
    config.validate()?;
    let rows = read_prices(prices, prices_name)?;
    let capm_table = read_capm(capm, capm_name)?;
    let step_h = config.step_h();

    let mut stocks: BTreeMap<String, BTreeMap<i32, Vec<f64>>> = BTreeMap::new();
    for row in rows {
        stocks
            .entry(row.stock_id)
            .or_default()
            .entry(row.date.year())
            .or_default()
            .push(row.close);
    }

    let mut out = Vec::with_capacity(stocks.len());
    for (stock_id, years) in stocks {
        let input = |message: String| Error::Input {
            file: prices_name.to_path_buf(),
            message,
        };
        if years.len() < 3 {
            return Err(input(format!(
                "stock {stock_id} covers {} calendar year(s); need at least two sample years and one holdout year",
                years.len()
            )));
        }
        let per_period = matches!(config.benchmark, super::BenchmarkMode::PerPeriod);
        if per_period && !capm_table.keys().any(|(id, _)| id == &stock_id) {
            return Err(Error::MissingStock { stock_id, year: None });
        }
        let first_year = *years.keys().next().expect("non-empty");
        let last_year = *years.keys().next_back().expect("non-empty");
        if (last_year - first_year) as usize + 1 != years.len() {
            return Err(input(format!("stock {stock_id}: calendar years {first_year}..={last_year} have gaps")));
        }
        let mut periods = Vec::with_capacity(years.len());
        for (year, closes) in years {
            if closes.len() < 2 {
                return Err(input(format!(
                    "stock {stock_id}, period {year}: {} observation(s), need at least 2",
                    closes.len()
                )));
            }
            let prices = PricePath::new(f64::from(year - first_year), step_h, closes)
                .map_err(|e| input(format!("stock {stock_id}, period {year}: {e}")))?;
            let capm = capm_table.get(&(stock_id.clone(), year)).copied();
            periods.push(Period { label: year, prices, capm });
        }
        let holdout = periods.pop().expect("at least three periods");
        if per_period {
            if let Some(p) = periods.iter().find(|p| p.capm.is_none()) {
                return Err(Error::MissingStock { stock_id, year: Some(p.label) });
            }
        }
        let dataset = StockDataset::new(stock_id, periods).map_err(|e| input(e.to_string()))?;
        out.push(IngestedStock {
            dataset,
            holdout: holdout.prices,
            holdout_label: holdout.label,
        });
    }
    Ok(out)
}

struct PriceRow {
    stock_id: String,
    date: NaiveDate,
    close: f64,
}

fn parse_error(file: &Path, line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

fn csv_error(file: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    parse_error(file, line, 1, e.to_string())
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str], file: &Path) -> Result<()> {
    let header = reader.headers().map_err(|e| csv_error(file, e))?;
    if header.is_empty() {
        return Err(Error::Input {
            file: file.to_path_buf(),
            message: "file is empty".into(),
        });
    }
    if header.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(parse_error(
            file,
            1,
            1,
            format!("expected header {:?}, got {:?}", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

fn field<'r>(record: &'r csv::StringRecord, idx: usize, file: &Path, line: u64) -> Result<&'r str> {
    record
        .get(idx)
        .map(str::trim)
        .ok_or_else(|| parse_error(file, line, idx + 1, "missing field"))
}

fn number(record: &csv::StringRecord, idx: usize, name: &str, file: &Path, line: u64) -> Result<f64> {
    let raw = field(record, idx, file, line)?;
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_error(file, line, idx + 1, format!("{name}: {raw:?} is not a finite number"))),
    }
}

fn read_prices<R: Read>(input: R, file: &Path) -> Result<Vec<PriceRow>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    check_header(&mut reader, &PRICE_HEADER, file)?;
    let mut rows: Vec<PriceRow> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != PRICE_HEADER.len() {
            return Err(parse_error(
                file,
                line,
                record.len().min(PRICE_HEADER.len()) + 1,
                format!("expected {} fields, got {}", PRICE_HEADER.len(), record.len()),
            ));
        }
        let stock_id = field(&record, 0, file, line)?;
        if stock_id.is_empty() {
            return Err(parse_error(file, line, 1, "empty stock_id"));
        }
        let date_raw = field(&record, 1, file, line)?;
        let date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d")
            .map_err(|e| parse_error(file, line, 2, format!("date {date_raw:?}: {e}")))?;
        let close = number(&record, 2, "close", file, line)?;
        if close <= 0.0 {
            return Err(parse_error(
                file,
                line,
                3,
                format!("close {close} violates price positivity; prices must be strictly positive"),
            ));
        }
        if let Some(prev) = rows.last() {
            if (prev.stock_id.as_str(), prev.date) >= (stock_id, date) {
                return Err(parse_error(file, line, 1, "rows must be sorted by (stock_id, date) without duplicates"));
            }
        }
        rows.push(PriceRow {
            stock_id: stock_id.to_string(),
            date,
            close,
        });
    }
    if rows.is_empty() {
        return Err(Error::Input {
            file: file.to_path_buf(),
            message: "no price rows".into(),
        });
    }
    Ok(rows)
}

fn read_capm<R: Read>(input: R, file: &Path) -> Result<BTreeMap<(String, i32), CapmInputs>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    check_header(&mut reader, &CAPM_HEADER, file)?;
    let mut table = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != CAPM_HEADER.len() {
            return Err(parse_error(
                file,
                line,
                record.len().min(CAPM_HEADER.len()) + 1,
                format!("expected {} fields, got {}", CAPM_HEADER.len(), record.len()),
            ));
        }
        let stock_id = field(&record, 0, file, line)?.to_string();
        let year_raw = field(&record, 1, file, line)?;
        let year: i32 = year_raw
            .parse()
            .map_err(|_| parse_error(file, line, 2, format!("year {year_raw:?} is not an integer")))?;
        let inputs = CapmInputs {
            beta: number(&record, 2, "beta", file, line)?,
            risk_free: number(&record, 3, "risk_free", file, line)?,
            market_return_expectation: number(&record, 4, "market_return_expectation", file, line)?,
        };
        if table.insert((stock_id.clone(), year), inputs).is_some() {
            return Err(parse_error(file, line, 1, format!("duplicate CAPM row for {stock_id} {year}")));
        }
    }
    Ok(table)
}
