//! Serial-correlation checks run before smoothing a series: sample ACF,
//! PACF and the Ljung-Box portmanteau test.

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Below this length the chi-square approximation of the Ljung-Box statistic
/// is poor; results carry a `small_sample` flag.
pub const SMALL_SAMPLE: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct AcfResult {
    pub lags: usize,
    /// `ρ̂_1..ρ̂_h`; lag 0 is implicitly 1.
    pub acf: Vec<f64>,
    pub pacf: Vec<f64>,
    pub n: usize,
}

impl AcfResult {
    /// Half-width of the approximate 95% white-noise band, `1.96/√n`.
    pub fn white_noise_band(&self) -> f64 {
        1.96 / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LjungBoxResult {
    pub q_statistic: f64,
    pub lags_tested: usize,
    /// Upper tail of the chi-square distribution with `lags_tested` degrees
    /// of freedom at `q_statistic`.
    pub p_value: f64,
    pub n: usize,
    pub small_sample: bool,
}

impl LjungBoxResult {
    /// True when white noise is rejected at `level`.
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

fn check(series: &[f64], max_lag: usize) -> Result<()> {
    if max_lag == 0 {
        return Err(Error::invalid("lag count must be at least 1"));
    }
    if max_lag >= series.len() {
        return Err(Error::invalid(format!(
            "lag count {max_lag} must be smaller than the series length {}",
            series.len()
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    Ok(())
}

/// Sample autocorrelations with the pooled `Σ(y−ȳ)²` denominator.
fn autocorrelations(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|y| y - mean).collect();
    let denom: f64 = centered.iter().map(|c| c * c).sum();
    if denom == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((1..=max_lag)
        .map(|k| {
            let num: f64 = centered[k..].iter().zip(&centered).map(|(a, b)| a * b).sum();
            num / denom
        })
        .collect())
}

/// Partial autocorrelations from the ACF by the Durbin-Levinson recursion.
fn durbin_levinson(acf: &[f64]) -> Vec<f64> {
    let h = acf.len();
    let mut pacf = Vec::with_capacity(h);
    let mut phi = vec![0.0; h];
    let mut prev = vec![0.0; h];
    let mut v = 1.0;
    for k in 0..h {
        let num = acf[k] - (0..k).map(|j| prev[j] * acf[k - 1 - j]).sum::<f64>();
        let kappa = if v > 0.0 { num / v } else { 0.0 };
        phi[k] = kappa;
        for j in 0..k {
            phi[j] = prev[j] - kappa * prev[k - 1 - j];
        }
        v *= 1.0 - kappa * kappa;
        pacf.push(kappa);
        prev[..=k].copy_from_slice(&phi[..=k]);
    }
    pacf
}

pub fn acf_pacf(series: &[f64], max_lag: usize) -> Result<AcfResult> {
    check(series, max_lag)?;
    let acf = autocorrelations(series, max_lag)?;
    let pacf = durbin_levinson(&acf);
    Ok(AcfResult { lags: max_lag, acf, pacf, n: series.len() })
}

/// `Q = n(n+2) Σ_{k=1}^{h} ρ̂_k²/(n−k)` with a `χ²_h` p-value.
pub fn ljung_box(series: &[f64], lags: usize) -> Result<LjungBoxResult> {
    check(series, lags)?;
    let n = series.len();
    let acf = autocorrelations(series, lags)?;
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * acf
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>();
    Ok(LjungBoxResult {
        q_statistic: q,
        lags_tested: lags,
        p_value: chi_square_sf(q, lags),
        n,
        small_sample: n < SMALL_SAMPLE,
    })
}

/// `P(χ²_df > x)` via the regularized upper incomplete gamma function.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0)
}
