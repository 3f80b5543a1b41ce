//! Writes a synthetic ten-stock fixture: `prices.csv`, `capm.csv` and
//! `pipeline.cfg`.
//!
//! Usage: `cargo run -p driftbias --example make_fixture -- <dir> [seed]`

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use driftbias::pipeline::{ingest, run_portfolio, synthetic, PipelineConfig};

const CONFIG: &str = "# synthetic ten-stock fixture\nalpha = 0.2\nh_per_year = 252\nbenchmark_mode = per_period\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().ok_or("usage: make_fixture <dir> [seed]")?);
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;
    std::fs::create_dir_all(&dir)?;

    let portfolio = synthetic::generate(&synthetic::SyntheticConfig::default(), seed)?;
    portfolio.write_prices_csv(BufWriter::new(File::create(dir.join("prices.csv"))?))?;
    portfolio.write_capm_csv(BufWriter::new(File::create(dir.join("capm.csv"))?))?;
    std::fs::write(dir.join("pipeline.cfg"), CONFIG)?;

    let config = PipelineConfig::parse(CONFIG, &dir.join("pipeline.cfg"))?;
    let stocks = ingest(&dir.join("prices.csv"), &dir.join("capm.csv"), &config)?;
    let report = run_portfolio(&stocks, &config)?;
    print!("seed {seed}\n{}", report.summary());
    Ok(())
}
