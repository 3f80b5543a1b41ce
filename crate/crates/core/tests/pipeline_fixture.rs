use std::path::{Path, PathBuf};

use driftbias::normal::cdf;
use driftbias::pipeline::{ingest, ingest_readers, run_portfolio, ssd, Period};
use driftbias::{build_period_records, simulate_gbm, BenchmarkMode, Error, GbmParams, PipelineConfig, StockDataset};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic")
}

#[test]
fn shipped_fixture_orders_the_three_forecasts() {
    let dir = fixture_dir();
    let text = std::fs::read_to_string(dir.join("pipeline.cfg")).unwrap();
    let config = PipelineConfig::parse(&text, &dir.join("pipeline.cfg")).unwrap();
    let stocks = ingest(&dir.join("prices.csv"), &dir.join("capm.csv"), &config).unwrap();
    assert_eq!(stocks.len(), 10);
    let report = run_portfolio(&stocks, &config).unwrap();
    assert!(report.total_sd_es < report.total_sd_simple);
    assert!(report.total_sd_simple < report.total_sd_raw);
    for (row, stock) in report.rows.iter().zip(&stocks) {
        assert_eq!(row.records.len(), 10);
        assert_eq!(stock.holdout_label, 2019);
    }
}

#[test]
fn invested_fraction_matches_one_sigma_tail() {
    // C one standard deviation below the mean return: P(R > C) = Φ(1).
    let (mu, sigma, t) = (0.1, 0.2, 1.0);
    let params = GbmParams::new(mu, sigma).unwrap();
    let c = params.nu() * t - sigma * t.sqrt();
    let config = PipelineConfig {
        benchmark: BenchmarkMode::Constant(c),
        ..PipelineConfig::default()
    };
    let seeds = 500;
    let invested = (0..seeds as u64)
        .filter(|&seed| {
            let periods = (0..2)
                .map(|i| Period {
                    label: 2000 + i,
                    prices: simulate_gbm(&params, 100.0, t, 252, seed * 2 + i as u64).unwrap(),
                    capm: None,
                })
                .collect();
            let data = StockDataset::new("X", periods).unwrap();
            build_period_records(&data, &config).unwrap()[1].invested
        })
        .count();
    let p = cdf(1.0);
    let se = (p * (1.0 - p) / seeds as f64).sqrt();
    let frac = invested as f64 / seeds as f64;
    assert!((frac - p).abs() < 3.0 * se, "invested fraction {frac}");
}

#[test]
fn stock_that_never_beats_its_benchmark_has_no_bias() {
    let params = GbmParams::new(0.05, 0.1).unwrap();
    let config = PipelineConfig {
        benchmark: BenchmarkMode::Constant(10.0),
        ..PipelineConfig::default()
    };
    let periods = (0..6)
        .map(|i| Period {
            label: 2010 + i,
            prices: simulate_gbm(&params, 20.0, 1.0, 252, i as u64).unwrap(),
            capm: None,
        })
        .collect();
    let records = build_period_records(&StockDataset::new("Y", periods).unwrap(), &config).unwrap();
    assert!(records.iter().all(|r| r.nu_tilde == 0.0 && r.bias == 0.0));
    assert_eq!(ssd(&records), 0.0);
}

#[test]
fn ingest_errors_name_the_file_and_position() {
    let prices = "stock_id,date,close\nA,2010-01-04,1.0\nA,2010-01-05,-2.0\n";
    let err = ingest_readers(
        prices.as_bytes(),
        Path::new("prices.csv"),
        "stock_id,year,beta,risk_free,market_return_expectation\n".as_bytes(),
        Path::new("capm.csv"),
        &PipelineConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, column: 3, .. }), "{err:?}");
    assert!(err.to_string().starts_with("prices.csv:3:3:"), "{err}");
    assert!(err.is_usage());
}
